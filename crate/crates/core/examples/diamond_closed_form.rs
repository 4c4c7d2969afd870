// Optimal relay scaling in a single-layer (diamond) network across the
// three regimes: cap-limited, interior optimum, and no secrecy.

use af_secrecy::{optimal_rate, solve, EcgalNetwork};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // (label, h_t, h_e, P)
    let cases = [
        ("weak relays", 2.0, 1.0, 0.1),
        ("strong relays", 2.0, 1.0, 10.0),
        ("eavesdropper closer", 1.0, 2.0, 10.0),
    ];
    for (label, h_t, h_e, p) in cases {
        let net = EcgalNetwork::diamond(4, 1.0, h_t, h_e, 1.0, p, 1.0)?;
        let sol = solve(&net, 4)?;
        let rate = optimal_rate(&net, 4)?;
        println!(
            "{label:>20}: case {:<4} beta = {:.6} (cap {:.6})  rate = {:.6} bits",
            sol.last_layer_case,
            sol.last_beta(),
            sol.beta_l_max,
            rate.rate_bits
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("diamond example");
}
