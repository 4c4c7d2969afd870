// The full verification battery, on the solver and on a deliberately
// perturbed interior optimum.

use af_secrecy::oracle::GridSpec;
use af_secrecy::verify::{verify, VerifyOptions};
use af_secrecy::EcgalNetwork;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = EcgalNetwork::diamond(2, 1.0, 2.0, 1.0, 1.0, 10.0, 1.0)?;
    for perturbation in [1.0, 1.5] {
        let opts = VerifyOptions {
            grid: GridSpec::new(64, 3, true)?,
            glb_perturbation: perturbation,
        };
        let report = verify(&net, &opts)?;
        println!("glb x {perturbation}:");
        for c in &report.checks {
            println!("  {c}");
        }
        assert_eq!(report.passed(), perturbation == 1.0);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("verify example");
}
