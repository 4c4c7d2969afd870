//! Destination/eavesdropper SNRs and the secure AF rate.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::network::{h_source_receiver, noise_gain_sum, EcgalNetwork, Receiver, ScalingAssignment};

/// SNRs at both receivers and the resulting secrecy rate (bits per channel use).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub snr_t: f64,
    pub snr_e: f64,
    pub rate_bits: f64,
}

impl RateResult {
    pub const ZERO: RateResult = RateResult {
        snr_t: 0.0,
        snr_e: 0.0,
        rate_bits: 0.0,
    };

    /// Unclamped `0.5 log2((1 + snr_t) / (1 + snr_e))`.
    pub fn raw_log_ratio(&self) -> f64 {
        raw_log_ratio(self.snr_t, self.snr_e)
    }
}

/// Linear SNR at `rx`: `(P_s / sigma2) h_s,rx^2 / (1 + sum_{l,j} h_{lj,rx}^2)`.
pub fn snr_receiver(net: &EcgalNetwork, s: &ScalingAssignment, rx: Receiver) -> Result<f64> {
    let gain = h_source_receiver(net, s, rx)?;
    let noise = noise_gain_sum(net, s, rx)?;
    Ok(net.source_power() / net.sigma2() * gain * gain / (1.0 + noise))
}

pub fn snr_destination(net: &EcgalNetwork, s: &ScalingAssignment) -> Result<f64> {
    snr_receiver(net, s, Receiver::Destination)
}

pub fn snr_eavesdropper(net: &EcgalNetwork, s: &ScalingAssignment) -> Result<f64> {
    snr_receiver(net, s, Receiver::Eavesdropper)
}

/// `0.5 log2((1 + snr_t) / (1 + snr_e))` without the `[.]^+` clamp.
///
/// Evaluated as `log1p((snr_t - snr_e) / (1 + snr_e))` so tiny SNRs keep
/// full relative precision.
pub fn raw_log_ratio(snr_t: f64, snr_e: f64) -> f64 {
    0.5 * ((snr_t - snr_e) / (1.0 + snr_e)).ln_1p() / LN_2
}

/// `max(0, 0.5 log2((1 + snr_t) / (1 + snr_e)))`.
pub fn secrecy_rate(snr_t: f64, snr_e: f64) -> Result<f64> {
    for (name, v) in [("snr_t", snr_t), ("snr_e", snr_e)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "{name} must be finite and >= 0, got {v}"
            )));
        }
    }
    Ok(raw_log_ratio(snr_t, snr_e).max(0.0))
}

/// SNRs and secrecy rate for an assignment.
pub fn evaluate(net: &EcgalNetwork, s: &ScalingAssignment) -> Result<RateResult> {
    let snr_t = snr_destination(net, s)?;
    let snr_e = snr_eavesdropper(net, s)?;
    Ok(RateResult {
        snr_t,
        snr_e,
        rate_bits: secrecy_rate(snr_t, snr_e)?,
    })
}

/// SNR at `rx` from the expanded symmetric-assignment closed form, with all
/// `N` relays of layer `l` using `per_layer_beta[l]`.
pub fn symmetric_snr(net: &EcgalNetwork, per_layer_beta: &[f64], rx: Receiver) -> f64 {
    let n = net.relays() as f64;
    let layers = net.layers();
    let hop = |l: usize| n * per_layer_beta[l] * net.hop_gain(l + 1, rx);
    let signal: f64 = (0..layers).map(hop).product();
    let noise: f64 = (0..layers)
        .map(|l| {
            let tail: f64 = (l + 1..layers).map(hop).product();
            (per_layer_beta[l] * net.hop_gain(l + 1, rx) * tail).powi(2)
        })
        .sum();
    net.source_power() * net.h_s().powi(2) / net.sigma2() * signal * signal / (1.0 + n * noise)
}

/// SNR at `rx` given per-layer `(sum beta, sum beta^2)`.
#[cfg(test)]
fn snr_from_layer_sums(net: &EcgalNetwork, sums: &[(f64, f64)], rx: Receiver) -> f64 {
    let mut signal = net.h_s();
    let mut noise = 0.0;
    for (l, &(s1, s2)) in sums.iter().enumerate() {
        let g = net.hop_gain(l + 1, rx);
        signal *= s1 * g;
        noise = noise * s1 * s1 * g * g + s2 * g * g;
    }
    net.source_power() / net.sigma2() * signal * signal / (1.0 + noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkParams;
    use approx::assert_relative_eq;

    fn diamond(h_e: f64) -> EcgalNetwork {
        EcgalNetwork::diamond(2, 1.0, 1.0, h_e, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn secrecy_rate_examples() {
        for x in [0.0, 0.3, 7.0, 1e9] {
            assert_eq!(secrecy_rate(x, x).unwrap(), 0.0);
        }
        assert_relative_eq!(secrecy_rate(3.0, 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(secrecy_rate(1.0, 3.0).unwrap(), 0.0);
        assert!(secrecy_rate(f64::NAN, 1.0).is_err());
        assert!(secrecy_rate(1.0, -0.5).is_err());
        assert!(secrecy_rate(f64::INFINITY, 0.0).is_err());
        assert_relative_eq!(
            secrecy_rate(5.0, 0.0).unwrap(),
            0.5 * 6f64.log2(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn diamond_snr_examples() {
        let s = ScalingAssignment::uniform(1, 2, 1.0).unwrap();
        assert_relative_eq!(snr_destination(&diamond(0.5), &s).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        let hot = EcgalNetwork::diamond(2, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(snr_eavesdropper(&hot, &s).unwrap(), 16.0 / 9.0, max_relative = 1e-15);

        let r = evaluate(&diamond(0.5), &s).unwrap();
        assert_relative_eq!(r.snr_e, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(
            r.rate_bits,
            0.5 * ((7.0 / 3.0) / (5.0 / 3.0f64)).log2(),
            max_relative = 1e-14
        );

        let zero = ScalingAssignment::uniform(1, 2, 0.0).unwrap();
        assert_eq!(evaluate(&diamond(0.5), &zero).unwrap(), RateResult::ZERO);
    }

    #[test]
    fn single_relay_two_hop_reduction() {
        let net = EcgalNetwork::diamond(1, 1.3, 0.7, 0.4, 2.0, 1.0, 0.5).unwrap();
        let b: f64 = 0.8;
        let s = ScalingAssignment::uniform(1, 1, b).unwrap();
        let expected = 2.0 * 1.3f64.powi(2) * b * b * 0.49 / (0.5 * (1.0 + b * b * 0.49));
        assert_relative_eq!(snr_destination(&net, &s).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn eavesdropper_equal_gain_is_symmetric() {
        let net = EcgalNetwork::new(NetworkParams {
            layers: 3,
            relays: 2,
            h_s: 0.9,
            h_mid: vec![1.5, 0.6],
            h_t: 1.2,
            h_e: 1.2,
            p_s: 3.0,
            p: 1.0,
            sigma2: 0.7,
        })
        .unwrap();
        let s = ScalingAssignment::new(vec![vec![0.2, 0.5], vec![0.9, 0.1], vec![0.3, 0.3]]).unwrap();
        let r = evaluate(&net, &s).unwrap();
        assert_eq!(r.snr_t, r.snr_e);
        assert_eq!(r.rate_bits, 0.0);
    }

    #[test]
    fn layer_sum_route_agrees() {
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
        })
        .unwrap();
        let s = ScalingAssignment::new(vec![
            vec![0.2, 0.5, 0.1],
            vec![0.9, 0.1, 0.4],
            vec![0.3, 0.35, 0.6],
        ])
        .unwrap();
        let sums = s.layer_sums();
        for rx in [Receiver::Destination, Receiver::Eavesdropper] {
            assert_relative_eq!(
                snr_from_layer_sums(&net, &sums, rx),
                snr_receiver(&net, &s, rx).unwrap(),
                max_relative = 1e-13
            );
        }
    }
}
