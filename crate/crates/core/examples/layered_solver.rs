// Closed-form scaling for a three-layer network: interior layers at their
// power caps, the last layer at `min(cap, interior optimum)`.

use af_secrecy::network::check_feasible;
use af_secrecy::solver::{layered_beta_l_glb, layered_beta_max};
use af_secrecy::{evaluate, solve, EcgalNetwork, NetworkParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = EcgalNetwork::new(NetworkParams {
        layers: 3,
        relays: 4,
        h_s: 1.0,
        h_mid: vec![1.0, 2.0],
        h_t: 4.0,
        h_e: 2.0,
        p_s: 100.0,
        p: 1.0,
        sigma2: 1.0,
    })?;
    for m in 1..=net.relays() {
        let caps = layered_beta_max(&net, m)?;
        let glb = layered_beta_l_glb(&net, m)?;
        let sol = solve(&net, m)?;
        let sub = net.with_relays(m)?;
        check_feasible(&sub, &sol.assignment())?;
        let r = evaluate(&sub, &sol.assignment())?;
        println!(
            "m = {m}: caps = {caps:.4?}  glb = {glb:.4}  case = {}  SNR_t = {:.3}  SNR_e = {:.3}  rate = {:.4}",
            sol.last_layer_case, r.snr_t, r.snr_e, r.rate_bits
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("layered example");
}
