// Source-power sweep of the simplification gap, written as CSV.

use af_secrecy::cli::range_values;
use af_secrecy::gap::{sweep, write_csv, SweepAxis};
use af_secrecy::{EcgalNetwork, NetworkParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = EcgalNetwork::new(NetworkParams {
        layers: 2,
        relays: 8,
        h_s: 1.0,
        h_mid: vec![1.0],
        h_t: 2.0,
        h_e: 1.0,
        p_s: 1.0,
        p: 1.0,
        sigma2: 1.0,
    })?;
    let powers = range_values(1e-8, 1e8, 9, true)?;
    let reports = sweep(&net, SweepAxis::SourcePower, &powers, 2)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &reports)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("sweep example");
}
