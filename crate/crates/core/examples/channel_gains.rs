// Effective source-to-destination gain: product form versus explicit
// enumeration of all `N^L` relay paths, for an asymmetric assignment.

use af_secrecy::network::{h_source_dest, h_source_dest_pathsum, noise_gain_sum};
use af_secrecy::{evaluate, EcgalNetwork, NetworkParams, Receiver, ScalingAssignment};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = EcgalNetwork::new(NetworkParams {
        layers: 3,
        relays: 3,
        h_s: 0.9,
        h_mid: vec![1.5, 0.6],
        h_t: 1.2,
        h_e: 0.4,
        p_s: 3.0,
        p: 1.0,
        sigma2: 0.7,
    })?;
    let s = ScalingAssignment::new(vec![
        vec![0.2, 0.5, 0.1],
        vec![0.9, 0.1, 0.4],
        vec![0.3, 0.35, 0.6],
    ])?;
    let product = h_source_dest(&net, &s)?;
    let paths = h_source_dest_pathsum(&net, &s)?;
    println!("h_st product form = {product:.15e}");
    println!("h_st path sum     = {paths:.15e}");
    println!("relative diff     = {:.2e}", ((product - paths) / paths).abs());
    println!(
        "noise gain sums: destination {:.6}, eavesdropper {:.6}",
        noise_gain_sum(&net, &s, Receiver::Destination)?,
        noise_gain_sum(&net, &s, Receiver::Eavesdropper)?
    );
    let r = evaluate(&net, &s)?;
    println!("SNR_t = {:.6}  SNR_e = {:.6}  rate = {:.6} bits", r.snr_t, r.snr_e, r.rate_bits);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("channel gain example");
}
