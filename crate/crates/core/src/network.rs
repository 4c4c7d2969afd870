//! Layered ECGAL network description and modified channel-gain algebra.
//!
//! A network has `L` relay layers of `N` relays each. Every link between two
//! adjacent layers carries the same real gain, and consecutive layers are
//! fully connected. Layer and relay numbers in this module's public
//! functions are 1-based (layer 1 hears the source, layer `L` is overheard by
//! the eavesdropper); slices and vectors are indexed from 0 as usual.

use crate::error::{Error, Result};

/// Default cap on the number of paths the enumeration oracle will visit.
pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

/// Relative slack allowed by [`check_feasible`] on `beta^2 <= cap^2`.
const FEASIBILITY_RTOL: f64 = 1e-12;

/// Which receiver a last-hop quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    Destination,
    Eavesdropper,
}

/// Plain parameter bag used to construct an [`EcgalNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: usize,
    pub relays: usize,
    pub h_s: f64,
    pub h_mid: Vec<f64>,
    pub h_t: f64,
    pub h_e: f64,
    pub p_s: f64,
    pub p: f64,
    pub sigma2: f64,
}

/// Immutable description of a symmetric layered relay network with a
/// last-layer eavesdropper.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgalNetwork {
    params: NetworkParams,
}

impl EcgalNetwork {
    pub fn new(params: NetworkParams) -> Result<Self> {
        let p = &params;
        if p.layers == 0 {
            return Err(Error::InvalidNetwork("L must be >= 1".into()));
        }
        if p.relays == 0 {
            return Err(Error::InvalidNetwork("N must be >= 1".into()));
        }
        if p.h_mid.len() != p.layers - 1 {
            return Err(Error::InvalidNetwork(format!(
                "h_mid has {} entries, expected L - 1 = {}",
                p.h_mid.len(),
                p.layers - 1
            )));
        }
        let positive = [
            ("h_s", p.h_s),
            ("h_t", p.h_t),
            ("h_e", p.h_e),
            ("P_s", p.p_s),
            ("P", p.p),
            ("sigma2", p.sigma2),
        ];
        for (name, v) in positive
            .iter()
            .copied()
            .chain(p.h_mid.iter().map(|&v| ("h_mid", v)))
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(Self { params })
    }

    /// Single-layer (diamond) network.
    pub fn diamond(
        relays: usize,
        h_s: f64,
        h_t: f64,
        h_e: f64,
        p_s: f64,
        p: f64,
        sigma2: f64,
    ) -> Result<Self> {
        Self::new(NetworkParams {
            layers: 1,
            relays,
            h_s,
            h_mid: Vec::new(),
            h_t,
            h_e,
            p_s,
            p,
            sigma2,
        })
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn layers(&self) -> usize {
        self.params.layers
    }

    pub fn relays(&self) -> usize {
        self.params.relays
    }

    pub fn h_s(&self) -> f64 {
        self.params.h_s
    }

    pub fn h_mid(&self) -> &[f64] {
        &self.params.h_mid
    }

    pub fn h_t(&self) -> f64 {
        self.params.h_t
    }

    pub fn h_e(&self) -> f64 {
        self.params.h_e
    }

    pub fn source_power(&self) -> f64 {
        self.params.p_s
    }

    pub fn relay_power(&self) -> f64 {
        self.params.p
    }

    pub fn sigma2(&self) -> f64 {
        self.params.sigma2
    }

    /// Last-hop gain towards `rx`.
    pub fn last_hop(&self, rx: Receiver) -> f64 {
        match rx {
            Receiver::Destination => self.params.h_t,
            Receiver::Eavesdropper => self.params.h_e,
        }
    }

    /// Gain on the hop leaving layer `layer` (1-based): `h_mid[layer-1]` for
    /// interior layers, the last-hop gain towards `rx` for layer `L`.
    pub fn hop_gain(&self, layer: usize, rx: Receiver) -> f64 {
        if layer < self.params.layers {
            self.params.h_mid[layer - 1]
        } else {
            self.last_hop(rx)
        }
    }

    /// The same network restricted to `m` relays per layer.
    pub fn with_relays(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.params.relays {
            return Err(Error::RelayCount {
                m,
                n: self.params.relays,
            });
        }
        let mut params = self.params.clone();
        params.relays = m;
        Ok(Self { params })
    }
}

/// Per-relay amplification factors, `betas[l][i]` for layer `l`, relay `i`
/// (both 0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingAssignment {
    betas: Vec<Vec<f64>>,
}

impl ScalingAssignment {
    pub fn new(betas: Vec<Vec<f64>>) -> Result<Self> {
        let width = betas.first().map_or(0, Vec::len);
        if betas.is_empty() || width == 0 {
            return Err(Error::InvalidInput("assignment must be non-empty".into()));
        }
        for (l, row) in betas.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidInput(format!(
                    "layer {} has {} relays, expected {width}",
                    l + 1,
                    row.len()
                )));
            }
            if let Some(b) = row.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "beta in layer {} must be finite and >= 0, got {b}",
                    l + 1
                )));
            }
        }
        Ok(Self { betas })
    }

    /// Every relay in every layer uses `beta`.
    pub fn uniform(layers: usize, relays: usize, beta: f64) -> Result<Self> {
        Self::new(vec![vec![beta; relays]; layers])
    }

    /// Symmetric assignment: all `relays` nodes of layer `l` use `per_layer[l]`.
    pub fn from_per_layer(per_layer: &[f64], relays: usize) -> Result<Self> {
        Self::new(per_layer.iter().map(|&b| vec![b; relays]).collect())
    }

    pub fn layers(&self) -> usize {
        self.betas.len()
    }

    pub fn relays(&self) -> usize {
        self.betas[0].len()
    }

    /// Factors of layer `l` (0-based).
    pub fn layer(&self, l: usize) -> &[f64] {
        &self.betas[l]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.betas
    }

    /// `(sum beta, sum beta^2)` for each layer.
    pub fn layer_sums(&self) -> Vec<(f64, f64)> {
        self.betas
            .iter()
            .map(|row| (row.iter().sum(), row.iter().map(|b| b * b).sum()))
            .collect()
    }

    fn check_shape(&self, net: &EcgalNetwork) -> Result<()> {
        if self.layers() != net.layers() || self.relays() != net.relays() {
            return Err(Error::DimensionMismatch {
                layers: net.layers(),
                relays: net.relays(),
                got_layers: self.layers(),
                got_relays: self.relays(),
            });
        }
        Ok(())
    }
}

/// Forward signal and noise-path products over a range of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGainProducts {
    /// `H^2_{i,j}`.
    pub h2: f64,
    /// `G^2_{m,j}` for `m = i..=j`.
    pub g2: Vec<f64>,
}

fn check_layer(net: &EcgalNetwork, layer: usize) -> Result<()> {
    if layer == 0 || layer > net.layers() {
        return Err(Error::IndexOutOfRange {
            what: "layer",
            index: layer,
            bound: net.layers(),
        });
    }
    Ok(())
}

/// Modified source-to-`rx` gain: `h_s * prod_l (sum_i beta_{l,i}) g_l`.
pub fn h_source_receiver(net: &EcgalNetwork, s: &ScalingAssignment, rx: Receiver) -> Result<f64> {
    s.check_shape(net)?;
    let mut gain = net.h_s();
    for (l, row) in s.rows().iter().enumerate() {
        gain *= row.iter().sum::<f64>() * net.hop_gain(l + 1, rx);
    }
    Ok(gain)
}

/// Modified source-destination gain `h_st` in product form.
pub fn h_source_dest(net: &EcgalNetwork, s: &ScalingAssignment) -> Result<f64> {
    h_source_receiver(net, s, Receiver::Destination)
}

/// Source-to-`rx` gain by explicit enumeration of all `N^L` paths.
///
/// Oracle for the product form; refuses to run past `cap` paths.
pub fn path_sum(
    net: &EcgalNetwork,
    s: &ScalingAssignment,
    rx: Receiver,
    cap: u128,
) -> Result<f64> {
    s.check_shape(net)?;
    let (layers, relays) = (net.layers(), net.relays());
    let paths = (relays as u128)
        .checked_pow(layers as u32)
        .unwrap_or(u128::MAX);
    if paths > cap {
        return Err(Error::EnumerationCap { paths, cap });
    }
    let mut idx = vec![0usize; layers];
    let mut total = 0.0;
    loop {
        let mut term = net.h_s();
        for (l, &i) in idx.iter().enumerate() {
            term *= s.layer(l)[i] * net.hop_gain(l + 1, rx);
        }
        total += term;
        // odometer over (i_1, ..., i_L)
        let mut pos = layers;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < relays {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `h_st` by path enumeration with the default cap.
pub fn h_source_dest_pathsum(net: &EcgalNetwork, s: &ScalingAssignment) -> Result<f64> {
    path_sum(net, s, Receiver::Destination, DEFAULT_PATH_CAP)
}

/// Modified gain from relay `j` of layer `layer` to `rx` (both 1-based).
pub fn h_relay_receiver(
    net: &EcgalNetwork,
    s: &ScalingAssignment,
    layer: usize,
    j: usize,
    rx: Receiver,
) -> Result<f64> {
    s.check_shape(net)?;
    check_layer(net, layer)?;
    if j == 0 || j > net.relays() {
        return Err(Error::IndexOutOfRange {
            what: "relay",
            index: j,
            bound: net.relays(),
        });
    }
    let mut gain = s.layer(layer - 1)[j - 1] * net.hop_gain(layer, rx);
    for m in layer + 1..=net.layers() {
        gain *= s.layer(m - 1).iter().sum::<f64>() * net.hop_gain(m, rx);
    }
    Ok(gain)
}

/// `h_{lj,t}`.
pub fn h_relay_dest(net: &EcgalNetwork, s: &ScalingAssignment, layer: usize, j: usize) -> Result<f64> {
    h_relay_receiver(net, s, layer, j, Receiver::Destination)
}

/// `h_{lj,e}`.
pub fn h_relay_eavesdropper(
    net: &EcgalNetwork,
    s: &ScalingAssignment,
    layer: usize,
    j: usize,
) -> Result<f64> {
    h_relay_receiver(net, s, layer, j, Receiver::Eavesdropper)
}

/// `sum_{l,j} h_{lj,rx}^2`, the relay-noise amplification seen at `rx`.
pub fn noise_gain_sum(net: &EcgalNetwork, s: &ScalingAssignment, rx: Receiver) -> Result<f64> {
    s.check_shape(net)?;
    let sums = s.layer_sums();
    // walk back from the last layer, carrying prod_{m>l} (S1_m g_m)^2
    let mut tail = 1.0;
    let mut total = 0.0;
    for l in (0..net.layers()).rev() {
        let g = net.hop_gain(l + 1, rx);
        total += sums[l].1 * g * g * tail;
        tail *= sums[l].0 * sums[l].0 * g * g;
    }
    Ok(total)
}

/// `H^2_{i,j}` and `G^2_{m,j}` for a symmetric per-layer assignment
/// (1-based `1 <= i <= j <= L-1`).
pub fn layer_products(
    net: &EcgalNetwork,
    per_layer_beta: &[f64],
    i: usize,
    j: usize,
) -> Result<LayerGainProducts> {
    let interior = net.layers().saturating_sub(1);
    if i == 0 || i > j || j > interior {
        return Err(Error::InvalidInput(format!(
            "layer range {i}..={j} must satisfy 1 <= i <= j <= L-1 = {interior}"
        )));
    }
    if per_layer_beta.len() < j {
        return Err(Error::InvalidInput(format!(
            "need betas for layers 1..={j}, got {}",
            per_layer_beta.len()
        )));
    }
    let n = net.relays() as f64;
    let h = net.h_mid();
    let fwd = |k: usize| {
        let t = n * per_layer_beta[k - 1] * h[k - 1];
        t * t
    };
    let h2 = (i..=j).map(fwd).product();
    let g2 = (i..=j)
        .map(|m| {
            let own = n * per_layer_beta[m - 1].powi(2) * h[m - 1].powi(2);
            own * (m + 1..=j).map(fwd).product::<f64>()
        })
        .collect();
    Ok(LayerGainProducts { h2, g2 })
}

/// Received signal-plus-noise power at a layer-`layer` relay under a
/// symmetric per-layer assignment (only layers `1..layer` are read).
pub fn receive_power(net: &EcgalNetwork, per_layer_beta: &[f64], layer: usize) -> Result<f64> {
    check_layer(net, layer)?;
    let first_hop = net.source_power() * net.h_s().powi(2);
    if layer == 1 {
        return Ok(first_hop + net.sigma2());
    }
    let prod = layer_products(net, per_layer_beta, 1, layer - 1)?;
    let noise: f64 = prod.g2.iter().sum();
    Ok(first_hop * prod.h2 + (noise + 1.0) * net.sigma2())
}

/// Received power at every relay of `layer` for an arbitrary per-node
/// assignment. All relays of a layer hear the same mixture.
pub fn received_power(net: &EcgalNetwork, s: &ScalingAssignment, layer: usize) -> Result<f64> {
    s.check_shape(net)?;
    check_layer(net, layer)?;
    let sums = s.layer_sums();
    let mut signal = net.source_power() * net.h_s().powi(2);
    // relay noise common to all relays of the current layer, in units of sigma2
    let mut common = 0.0;
    for (k, &(s1, s2)) in sums.iter().enumerate().take(layer - 1) {
        let g2 = net.h_mid()[k].powi(2);
        signal *= s1 * s1 * g2;
        common = common * s1 * s1 * g2 + s2 * g2;
    }
    Ok(signal + (common + 1.0) * net.sigma2())
}

/// Largest admissible factor for relays of `layer` given the upstream layers
/// of `s`: `sqrt(P / P_Rx)`.
pub fn relay_cap(net: &EcgalNetwork, s: &ScalingAssignment, layer: usize) -> Result<f64> {
    Ok((net.relay_power() / received_power(net, s, layer)?).sqrt())
}

/// Verifies the per-relay power constraint `beta^2 <= P / P_Rx` everywhere.
pub fn check_feasible(net: &EcgalNetwork, s: &ScalingAssignment) -> Result<()> {
    s.check_shape(net)?;
    for l in 1..=net.layers() {
        let cap2 = net.relay_power() / received_power(net, s, l)?;
        for (i, b) in s.layer(l - 1).iter().enumerate() {
            if b * b > cap2 * (1.0 + FEASIBILITY_RTOL) {
                return Err(Error::InvalidInput(format!(
                    "relay {} of layer {l}: beta^2 = {} exceeds cap {cap2}",
                    i + 1,
                    b * b
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn net(layers: usize, relays: usize, h_s: f64, h_mid: Vec<f64>, h_t: f64) -> EcgalNetwork {
        EcgalNetwork::new(NetworkParams {
            layers,
            relays,
            h_s,
            h_mid,
            h_t,
            h_e: 1.0,
            p_s: 1.0,
            p: 1.0,
            sigma2: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_networks() {
        let mut p = net(2, 2, 1.0, vec![2.0], 3.0).params().clone();
        p.h_mid.clear();
        assert!(EcgalNetwork::new(p.clone()).is_err());
        p.h_mid = vec![-1.0];
        assert!(EcgalNetwork::new(p.clone()).is_err());
        p.h_mid = vec![1.0];
        p.sigma2 = 0.0;
        assert!(EcgalNetwork::new(p).is_err());
        assert!(EcgalNetwork::diamond(0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn product_form_examples() {
        let d = net(1, 2, 1.0, vec![], 1.0);
        let s = ScalingAssignment::uniform(1, 2, 1.0).unwrap();
        assert_eq!(h_source_dest(&d, &s).unwrap(), 2.0);

        let n = net(2, 2, 1.0, vec![2.0], 3.0);
        let s = ScalingAssignment::uniform(2, 2, 1.0).unwrap();
        assert_eq!(h_source_dest(&n, &s).unwrap(), 24.0);
        assert_eq!(h_source_dest_pathsum(&n, &s).unwrap(), 24.0);

        let zero = ScalingAssignment::uniform(2, 2, 0.0).unwrap();
        assert_eq!(h_source_dest(&n, &zero).unwrap(), 0.0);
        assert_eq!(h_source_dest_pathsum(&n, &zero).unwrap(), 0.0);

        let one = net(1, 1, 1.0, vec![], 1.0);
        let half = ScalingAssignment::uniform(1, 1, 0.5).unwrap();
        assert_eq!(h_source_dest_pathsum(&one, &half).unwrap(), 0.5);
    }

    #[test]
    fn shape_mismatch_and_cap() {
        let n = net(2, 2, 1.0, vec![2.0], 3.0);
        let s = ScalingAssignment::uniform(1, 2, 1.0).unwrap();
        assert!(matches!(
            h_source_dest(&n, &s),
            Err(Error::DimensionMismatch { .. })
        ));
        let big = net(3, 200, 1.0, vec![1.0, 1.0], 1.0);
        let s = ScalingAssignment::uniform(3, 200, 1.0).unwrap();
        assert!(matches!(
            h_source_dest_pathsum(&big, &s),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn relay_gain_examples() {
        let n = net(2, 2, 1.0, vec![2.0], 3.0);
        let s = ScalingAssignment::uniform(2, 2, 1.0).unwrap();
        assert_eq!(h_relay_dest(&n, &s, 1, 1).unwrap(), 12.0);
        // two tail paths from relay (1,1): via (2,1) and (2,2), each 1*2*1*3
        assert_eq!(h_relay_dest(&n, &s, 1, 2).unwrap(), 6.0 + 6.0);

        let tail = net(1, 1, 1.0, vec![], 2.0);
        let s1 = ScalingAssignment::uniform(1, 1, 1.0).unwrap();
        assert_eq!(h_relay_dest(&tail, &s1, 1, 1).unwrap(), 2.0);

        let zero = ScalingAssignment::uniform(2, 2, 0.0).unwrap();
        assert_eq!(h_relay_dest(&n, &zero, 1, 2).unwrap(), 0.0);
        assert!(h_relay_dest(&n, &s, 3, 1).is_err());
        assert!(h_relay_dest(&n, &s, 1, 0).is_err());
    }

    #[test]
    fn noise_sum_matches_relay_gains() {
        let n = net(3, 2, 1.0, vec![2.0, 0.5], 3.0);
        let s = ScalingAssignment::new(vec![vec![0.3, 0.7], vec![1.1, 0.2], vec![0.4, 0.9]])
            .unwrap();
        for rx in [Receiver::Destination, Receiver::Eavesdropper] {
            let mut direct = 0.0;
            for l in 1..=3 {
                for j in 1..=2 {
                    direct += h_relay_receiver(&n, &s, l, j, rx).unwrap().powi(2);
                }
            }
            assert_relative_eq!(noise_gain_sum(&n, &s, rx).unwrap(), direct, max_relative = 1e-14);
        }
    }

    #[test]
    fn layer_products_examples() {
        let unit = net(2, 1, 1.0, vec![1.0], 1.0);
        let p = layer_products(&unit, &[1.0, 1.0], 1, 1).unwrap();
        assert_eq!(p, LayerGainProducts { h2: 1.0, g2: vec![1.0] });

        let n = net(3, 2, 1.0, vec![2.0, 3.0], 1.0);
        let p = layer_products(&n, &[1.0, 1.0, 1.0], 1, 2).unwrap();
        assert_eq!(p.h2, 576.0);
        assert_eq!(layer_products(&n, &[0.0, 1.0, 1.0], 1, 2).unwrap().h2, 0.0);
        assert!(layer_products(&n, &[1.0; 3], 1, 3).is_err());
        assert!(layer_products(&n, &[1.0; 3], 2, 1).is_err());
    }

    #[test]
    fn receive_power_examples() {
        let n = net(2, 2, 1.0, vec![1.0], 1.0);
        assert_eq!(receive_power(&n, &[], 1).unwrap(), 2.0);
        let b1 = 0.5f64.sqrt();
        assert_relative_eq!(receive_power(&n, &[b1], 2).unwrap(), 4.0, max_relative = 1e-15);
        let s = ScalingAssignment::from_per_layer(&[b1, 0.0], 2).unwrap();
        assert_relative_eq!(received_power(&n, &s, 2).unwrap(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn feasibility() {
        let n = net(2, 2, 1.0, vec![1.0], 1.0);
        let ok = ScalingAssignment::from_per_layer(&[0.5f64.sqrt(), 0.5], 2).unwrap();
        assert!(check_feasible(&n, &ok).is_ok());
        let bad = ScalingAssignment::from_per_layer(&[0.5f64.sqrt(), 0.51], 2).unwrap();
        assert!(check_feasible(&n, &bad).is_err());
        assert!(ScalingAssignment::new(vec![vec![-0.1]]).is_err());
    }
}
