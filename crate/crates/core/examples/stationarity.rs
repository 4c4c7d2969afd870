// Finite-difference first- and second-order checks at the interior optimum
// of the last-layer factor.

use af_secrecy::oracle::{finite_diff_gradient, second_derivative_sign, stationarity_residual};
use af_secrecy::{solve, EcgalNetwork, LastLayerCase};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = EcgalNetwork::diamond(2, 1.0, 2.0, 1.0, 1.0, 10.0, 1.0)?;
    let sol = solve(&net, 2)?;
    assert_eq!(sol.last_layer_case, LastLayerCase::Glb);
    let beta = &sol.beta_per_layer;
    let (residual, d) = stationarity_residual(&net, 2, beta, 1)?;
    println!("at beta_glb = {:.6}: dR/dbeta = {:.3e}, residual = {residual:.3e}", beta[0], d.value);
    println!("curvature: {:?}", second_derivative_sign(&net, 2, beta, 1)?);

    let off = [beta[0] * 1.5];
    let d_off = finite_diff_gradient(&net, 2, &off, 1)?;
    println!("at 1.5 x beta_glb: dR/dbeta = {:.3e} (one-sided: {})", d_off.value, d_off.one_sided);
    let d_zero = finite_diff_gradient(&net, 2, &[0.0], 1)?;
    println!("at beta = 0: dR/dbeta = {:.3e} (one-sided: {})", d_zero.value, d_zero.one_sided);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("stationarity example");
}
