//! Closed-form optimal scaling factors.
//!
//! Interior layers always transmit at full power. The last layer either sits
//! on its power cap (`Max`), at the interior stationary point of the secrecy
//! rate (`Glb`), or is switched off when the eavesdropper's last hop is at
//! least as strong as the destination's (`Zero`). Every routine takes an
//! effective relay count `m <= N`; by symmetry any `m` relays of a layer are
//! interchangeable, so the `m`-relay subnetwork is solved directly.

use std::fmt;

use crate::error::{Error, Result};
use crate::network::{layer_products, receive_power, EcgalNetwork, ScalingAssignment};
use crate::rate::{evaluate, RateResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LastLayerCase {
    Max,
    Glb,
    Zero,
}

impl LastLayerCase {
    pub fn as_str(self) -> &'static str {
        match self {
            LastLayerCase::Max => "MAX",
            LastLayerCase::Glb => "GLB",
            LastLayerCase::Zero => "ZERO",
        }
    }
}

impl fmt::Display for LastLayerCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optimal symmetric scaling for `m` relays per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSolution {
    pub m: usize,
    pub beta_per_layer: Vec<f64>,
    pub last_layer_case: LastLayerCase,
    pub beta_l_max: f64,
    pub beta_l_glb: Option<f64>,
}

impl ScalingSolution {
    pub fn last_beta(&self) -> f64 {
        *self.beta_per_layer.last().expect("at least one layer")
    }

    /// Per-node assignment on the `m`-relay subnetwork.
    pub fn assignment(&self) -> ScalingAssignment {
        ScalingAssignment::from_per_layer(&self.beta_per_layer, self.m)
            .expect("solver betas are finite and non-negative")
    }
}

fn subnetwork(net: &EcgalNetwork, m: usize) -> Result<EcgalNetwork> {
    net.with_relays(m)
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Power caps `beta_{l,max}` for layers `1..=L`, each evaluated with the
/// upstream layers at their own caps.
pub fn layered_beta_max(net: &EcgalNetwork, m: usize) -> Result<Vec<f64>> {
    let sub = subnetwork(net, m)?;
    let mut betas = Vec::with_capacity(sub.layers());
    for l in 1..=sub.layers() {
        let prx = receive_power(&sub, &betas, l)?;
        betas.push((sub.relay_power() / prx).sqrt());
    }
    Ok(betas)
}

/// Interior stationary point `beta_{L,glb}` of the secrecy rate in the
/// last-layer factor, with layers `1..L` at their caps.
///
/// For `L = 1` this is the diamond expression (`A = h_s^2`, `B = 0`). The
/// value is computed in log space and does not depend on which of `h_t`,
/// `h_e` is larger.
pub fn layered_beta_l_glb(net: &EcgalNetwork, m: usize) -> Result<f64> {
    let caps = layered_beta_max(net, m)?;
    last_layer_glb(net, m, &caps[..caps.len() - 1])
}

/// Stationary point of the rate in the last-layer factor for arbitrary
/// upstream factors `upstream[l]` (layers `1..L`).
pub fn last_layer_glb(net: &EcgalNetwork, m: usize, upstream: &[f64]) -> Result<f64> {
    let sub = subnetwork(net, m)?;
    let layers = sub.layers();
    if upstream.len() + 1 != layers {
        return Err(Error::InvalidInput(format!(
            "expected {} upstream factors, got {}",
            layers - 1,
            upstream.len()
        )));
    }
    let (a, b) = if layers == 1 {
        (sub.h_s().powi(2), 0.0)
    } else {
        let prod = layer_products(&sub, upstream, 1, layers - 1)?;
        (sub.h_s().powi(2) * prod.h2, prod.g2.iter().sum::<f64>())
    };
    let mf = m as f64;
    let ln_one_plus_mb = (mf * b).ln_1p();
    let ln_snr_term = sub.source_power().ln() - sub.sigma2().ln() + mf.ln() + a.ln() - ln_one_plus_mb;
    let ln_beta2 = -(mf.ln() + sub.h_t().ln() + sub.h_e().ln() + ln_one_plus_mb + 0.5 * softplus(ln_snr_term));
    Ok((0.5 * ln_beta2).exp())
}

/// Best last-layer factor for fixed upstream factors: `min(cap, glb)`, or
/// 0 when `h_t <= h_e`.
pub fn best_last_layer(net: &EcgalNetwork, m: usize, upstream: &[f64]) -> Result<f64> {
    if net.h_t() <= net.h_e() {
        return Ok(0.0);
    }
    let sub = subnetwork(net, m)?;
    let cap = (sub.relay_power() / receive_power(&sub, upstream, sub.layers())?).sqrt();
    Ok(cap.min(last_layer_glb(net, m, upstream)?))
}

/// Diamond stationary point written as
/// `beta^2 = sqrt(1 / (m^2 h_t^2 h_e^2 (1 + m P_s h_s^2 / sigma2)))`.
pub fn diamond_beta_glb(net: &EcgalNetwork, m: usize) -> Result<f64> {
    if net.layers() != 1 {
        return Err(Error::WrongLayerCount {
            expected: "L = 1",
            got: net.layers(),
        });
    }
    let sub = subnetwork(net, m)?;
    let mf = m as f64;
    let x = sub.source_power() * sub.h_s().powi(2) / sub.sigma2();
    let ln_denominator = 2.0 * (mf.ln() + sub.h_t().ln() + sub.h_e().ln()) + (mf * x).ln_1p();
    // beta = (beta^2)^(1/2) = denominator^(-1/4)
    Ok((-0.25 * ln_denominator).exp())
}

fn compose(m: usize, mut betas: Vec<f64>, glb: f64, secure: bool) -> ScalingSolution {
    let beta_l_max = *betas.last().expect("at least one layer");
    let (last, case) = if !secure {
        (0.0, LastLayerCase::Zero)
    } else if glb < beta_l_max {
        (glb, LastLayerCase::Glb)
    } else {
        (beta_l_max, LastLayerCase::Max)
    };
    *betas.last_mut().expect("at least one layer") = last;
    ScalingSolution {
        m,
        beta_per_layer: betas,
        last_layer_case: case,
        beta_l_max,
        beta_l_glb: Some(glb),
    }
}

/// Optimal factor for the diamond network (`L = 1`) with `m` relays.
pub fn diamond_beta_opt(net: &EcgalNetwork, m: usize) -> Result<ScalingSolution> {
    let glb = diamond_beta_glb(net, m)?;
    let sub = subnetwork(net, m)?;
    let cap = (sub.relay_power() / (sub.source_power() * sub.h_s().powi(2) + sub.sigma2())).sqrt();
    Ok(compose(m, vec![cap], glb, net.h_t() > net.h_e()))
}

/// Optimal symmetric scaling for any number of layers with `m` relays each.
pub fn solve(net: &EcgalNetwork, m: usize) -> Result<ScalingSolution> {
    let caps = layered_beta_max(net, m)?;
    let glb = layered_beta_l_glb(net, m)?;
    Ok(compose(m, caps, glb, net.h_t() > net.h_e()))
}

/// Optimal secure rate using `m` relays per layer.
pub fn optimal_rate(net: &EcgalNetwork, m: usize) -> Result<RateResult> {
    let sol = solve(net, m)?;
    evaluate(&subnetwork(net, m)?, &sol.assignment())
}
