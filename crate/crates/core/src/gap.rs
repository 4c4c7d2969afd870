//! Rate loss from network simplification: using `k` instead of `N` relays per
//! layer. Exact gaps come from the solver; the upper bounds are asymptotic
//! closed forms evaluated at finite powers and reported with their slack.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{EcgalNetwork, NetworkParams};
use crate::solver::{optimal_rate, solve, LastLayerCase};

/// Tolerance added to additive bounds when judging them (bits).
pub const ADDITIVE_SLACK_BITS: f64 = 0.02;
/// Factor applied to multiplicative bounds when judging them.
pub const MULTIPLICATIVE_SLACK_FACTOR: f64 = 1.02;
/// `N <= REGIME_FACTOR * P_s / sigma2` (or `sigma2 / P_s`) approximates the
/// `N, k = o(P_s)` (or `o(1 / P_s)`) regime.
pub const REGIME_FACTOR: f64 = 1e-2;
/// Band of `h_t / h_e` in which the diamond MAX-case multiplicative bound is
/// claimed ("comparable gains").
pub const COMPARABLE_GAIN_RATIO: (f64, f64) = (1.0, 4.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Additive,
    Multiplicative,
}

impl BoundKind {
    /// Additive for high source SNR (`P_s >= sigma2`), multiplicative otherwise.
    pub fn for_network(net: &EcgalNetwork) -> Self {
        if net.source_power() >= net.sigma2() {
            BoundKind::Additive
        } else {
            BoundKind::Multiplicative
        }
    }
}

/// Which last-layer regime a bound was derived for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundCase {
    /// Last layer at its power cap.
    Max,
    /// Last layer at the interior stationary point.
    Glb,
}

impl BoundCase {
    pub fn from_case(case: LastLayerCase) -> Option<Self> {
        match case {
            LastLayerCase::Max => Some(BoundCase::Max),
            LastLayerCase::Glb => Some(BoundCase::Glb),
            LastLayerCase::Zero => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    DiamondIAdd,
    DiamondIMul,
    DiamondIIAdd,
    DiamondIIMul,
    L2IAdd,
    L2IMul,
    L2IIAdd,
    L2IIMul,
    AsympMaxAdd,
    AsympMaxMul,
    AsympGlbAdd,
    AsympGlbMul,
}

impl BoundId {
    /// Bound family for a network with `layers` layers.
    pub fn select(layers: usize, case: BoundCase, kind: BoundKind) -> Self {
        use BoundCase::*;
        use BoundKind::*;
        match (layers, case, kind) {
            (1, Max, Additive) => BoundId::DiamondIAdd,
            (1, Max, Multiplicative) => BoundId::DiamondIMul,
            (1, Glb, Additive) => BoundId::DiamondIIAdd,
            (1, Glb, Multiplicative) => BoundId::DiamondIIMul,
            (2, Max, Additive) => BoundId::L2IAdd,
            (2, Max, Multiplicative) => BoundId::L2IMul,
            (2, Glb, Additive) => BoundId::L2IIAdd,
            (2, Glb, Multiplicative) => BoundId::L2IIMul,
            (_, Max, Additive) => BoundId::AsympMaxAdd,
            (_, Max, Multiplicative) => BoundId::AsympMaxMul,
            (_, Glb, Additive) => BoundId::AsympGlbAdd,
            (_, Glb, Multiplicative) => BoundId::AsympGlbMul,
        }
    }

    pub fn kind(self) -> BoundKind {
        use BoundId::*;
        match self {
            DiamondIAdd | DiamondIIAdd | L2IAdd | L2IIAdd | AsympMaxAdd | AsympGlbAdd => {
                BoundKind::Additive
            }
            _ => BoundKind::Multiplicative,
        }
    }

    pub fn as_str(self) -> &'static str {
        use BoundId::*;
        match self {
            DiamondIAdd => "DIAMOND_I_ADD",
            DiamondIMul => "DIAMOND_I_MUL",
            DiamondIIAdd => "DIAMOND_II_ADD",
            DiamondIIMul => "DIAMOND_II_MUL",
            L2IAdd => "L2_I_ADD",
            L2IMul => "L2_I_MUL",
            L2IIAdd => "L2_II_ADD",
            L2IIMul => "L2_II_MUL",
            AsympMaxAdd => "ASYMP_MAX_ADD",
            AsympMaxMul => "ASYMP_MAX_MUL",
            AsympGlbAdd => "ASYMP_GLB_ADD",
            AsympGlbMul => "ASYMP_GLB_MUL",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    Ok(())
}

/// `(1/k^p - 1/N^p)`.
fn inv_diff(k: f64, n: f64, p: f64) -> f64 {
    k.powf(-p) - n.powf(-p)
}

/// Diamond (`L = 1`) bounds with `N = net.relays()`.
pub fn bound_diamond(net: &EcgalNetwork, k: usize, case: BoundCase, kind: BoundKind) -> Result<f64> {
    if net.layers() != 1 {
        return Err(Error::WrongLayerCount {
            expected: "L = 1",
            got: net.layers(),
        });
    }
    check_k(net.relays(), k)?;
    let (n, k) = (net.relays() as f64, k as f64);
    let (p, s2, ht, he) = (net.relay_power(), net.sigma2(), net.h_t(), net.h_e());
    Ok(match (case, kind) {
        (BoundCase::Max, BoundKind::Additive) => {
            0.5 * (1.0 + s2 / (p * he * he) * inv_diff(k, n, 2.0)).log2()
        }
        (BoundCase::Max, BoundKind::Multiplicative) => {
            (n / k) * (1.0 + s2 / p * (1.0 / (k * he * he) - 1.0 / (n * ht * ht)))
        }
        (BoundCase::Glb, BoundKind::Additive) => 0.25 * (n / k).log2(),
        (BoundCase::Glb, BoundKind::Multiplicative) => (n / k).max(ht / he),
    })
}

/// Two-layer bounds (`L = 2`, `h_1 = h_mid[0]`, `h_2 = h_t`).
pub fn bound_two_layer(net: &EcgalNetwork, k: usize, case: BoundCase, kind: BoundKind) -> Result<f64> {
    if net.layers() != 2 {
        return Err(Error::WrongLayerCount {
            expected: "L = 2",
            got: net.layers(),
        });
    }
    check_k(net.relays(), k)?;
    let (n, k) = (net.relays() as f64, k as f64);
    let (p, s2, h1, h2, he) = (
        net.relay_power(),
        net.sigma2(),
        net.h_mid()[0],
        net.h_t(),
        net.h_e(),
    );
    let (h1s, h2s, hes) = (h1 * h1, h2 * h2, he * he);
    Ok(match (case, kind) {
        (BoundCase::Max, BoundKind::Additive) => {
            let first = 1.0 + h2s / h1s * inv_diff(k, n, 1.0) + s2 / (p * h1s) * inv_diff(k, n, 2.0);
            let second = 1.0
                + s2 / (p * hes) * inv_diff(k, n, 2.0)
                + s2 / (p * h1s) * inv_diff(k, n, 3.0)
                + s2 * s2 / (p * h1s * p * hes) * inv_diff(k, n, 4.0);
            0.5 * first.log2() + 0.5 * second.log2()
        }
        (BoundCase::Max, BoundKind::Multiplicative) => {
            (n / k).powi(2)
                * (1.0
                    + s2 / (p * h1s) * inv_diff(k, n, 2.0)
                    + s2 / p * (1.0 / (k * k * hes) - 1.0 / (n * n * h2s))
                    + s2 / (p * h1s) * s2 / p * (1.0 / (k.powi(3) * hes) - 1.0 / (n.powi(3) * h2s)))
        }
        (BoundCase::Glb, BoundKind::Additive) => {
            let root = |m: f64| (m.powi(-6) + p * h1s / (m.powi(3) * s2)).sqrt();
            let bracket = inv_diff(k, n, 3.0) + h2 / he * (root(k) - root(n));
            0.75 * (n / k).log2() + 0.5 * (1.0 + s2 / (p * h1s) * bracket).log2()
        }
        (BoundCase::Glb, BoundKind::Multiplicative) => {
            ((n / k) * (1.0 + s2 / (p * h1s) * inv_diff(k, n, 2.0))).max(h2 / he)
        }
    })
}

/// Constants `(a, b)` of the layered asymptotic bounds:
/// `a = h_t^2 sum_{i=1}^{L-1} 1/h_i^2`, `b = h_t^2 sum_{i=2}^{L-1} 1/h_i^2`.
pub fn asymptotic_constants(net: &EcgalNetwork) -> Result<(f64, f64)> {
    if net.layers() < 2 {
        return Err(Error::WrongLayerCount {
            expected: "L >= 2",
            got: net.layers(),
        });
    }
    let ht2 = net.h_t() * net.h_t();
    let inv: Vec<f64> = net.h_mid().iter().map(|h| 1.0 / (h * h)).collect();
    let b = ht2 * inv[1..].iter().sum::<f64>();
    let a = ht2 * inv.iter().sum::<f64>();
    Ok((a, b))
}

/// Layered asymptotic bounds (`L >= 2`, `h_L = h_t`).
pub fn bound_asymptotic(net: &EcgalNetwork, k: usize, case: BoundCase, kind: BoundKind) -> Result<f64> {
    let (a, b) = asymptotic_constants(net)?;
    check_k(net.relays(), k)?;
    let (n, k) = (net.relays() as f64, k as f64);
    let (p, s2, h1, hl, he) = (
        net.relay_power(),
        net.sigma2(),
        net.h_mid()[0],
        net.h_t(),
        net.h_e(),
    );
    let (h1s, hls, hes) = (h1 * h1, hl * hl, he * he);
    Ok(match (case, kind) {
        (BoundCase::Max, BoundKind::Additive) => {
            0.5 * (1.0 + a * inv_diff(k, n, 1.0)).log2()
                + 0.5
                    * (1.0 + a * s2 / (p * hls) * inv_diff(k, n, 3.0) + s2 / (p * hes) * inv_diff(k, n, 2.0))
                        .log2()
        }
        (BoundCase::Max, BoundKind::Multiplicative) => {
            (n / k).powi(2)
                * (1.0
                    + s2 / (p * h1s) * inv_diff(k, n, 2.0)
                    + s2 / p * (1.0 / (k * k * hes) - 1.0 / (n * n * hls))
                    + s2 / (p * hls) * inv_diff(k, n, 3.0) * b)
        }
        (BoundCase::Glb, BoundKind::Additive) => {
            0.75 * (n / k).log2()
                + 0.5
                    * (1.0
                        + (s2 * a / (p * hes)).sqrt() * inv_diff(k, n, 1.5)
                        + s2 * a / (p * hls) * inv_diff(k, n, 3.0))
                        .log2()
        }
        (BoundCase::Glb, BoundKind::Multiplicative) => ((n / k)
            * (1.0 + s2 / (p * h1s) * inv_diff(k, n, 2.0) + s2 * b / p * inv_diff(k, n, 3.0)))
        .max(hl / he),
    })
}

/// Evaluates the bound family appropriate for the network's depth.
pub fn bound_for(net: &EcgalNetwork, k: usize, case: BoundCase, kind: BoundKind) -> Result<(BoundId, f64)> {
    let id = BoundId::select(net.layers(), case, kind);
    let value = match net.layers() {
        1 => bound_diamond(net, k, case, kind)?,
        2 => bound_two_layer(net, k, case, kind)?,
        _ => bound_asymptotic(net, k, case, kind)?,
    };
    Ok((id, value))
}

/// Diamond rate with `m` relays from the closed-form SNRs of `case`. Only
/// meaningful when the solver realises that case.
pub fn diamond_case_rate(net: &EcgalNetwork, m: usize, case: BoundCase) -> Result<f64> {
    if net.layers() != 1 {
        return Err(Error::WrongLayerCount {
            expected: "L = 1",
            got: net.layers(),
        });
    }
    let m = m as f64;
    let (ps, hs2, s2, p, ht, he) = (
        net.source_power(),
        net.h_s() * net.h_s(),
        net.sigma2(),
        net.relay_power(),
        net.h_t(),
        net.h_e(),
    );
    let x = ps * hs2 / s2;
    let ratio = match case {
        BoundCase::Max => {
            let snr = |h: f64| x * m * m * p * h * h / (ps * hs2 + s2 + m * p * h * h);
            (1.0 + snr(ht)) / (1.0 + snr(he))
        }
        BoundCase::Glb => {
            let root = (1.0 + m * x).sqrt();
            let term = |r: f64| 1.0 + m * x / (1.0 + r * root);
            term(he / ht) / term(ht / he)
        }
    };
    Ok((0.5 * ratio.log2()).max(0.0))
}

/// Two-layer rate with `m` relays from the closed-form expressions of `case`.
///
/// In the interior case `D = 1 + P_s h_s^2/sigma2 + m^2 P h_1^2/sigma2`
/// divides the `m^3` term under the square root; it does not multiply it.
pub fn two_layer_case_rate(net: &EcgalNetwork, m: usize, case: BoundCase) -> Result<f64> {
    if net.layers() != 2 {
        return Err(Error::WrongLayerCount {
            expected: "L = 2",
            got: net.layers(),
        });
    }
    let m = m as f64;
    let s2 = net.sigma2();
    let x = net.source_power() * net.h_s().powi(2) / s2;
    let q1 = net.relay_power() * net.h_mid()[0].powi(2) / s2;
    let ratio = match case {
        BoundCase::Max => {
            let snr = |h: f64| {
                let q2 = net.relay_power() * h * h / s2;
                x * m * m * q1 * m * m * q2
                    / (x * (m * m * q1 + m * q2 + 1.0) + 1.0 + m * q1 + m * q2 + m * q1 * m * m * q2)
            };
            (1.0 + snr(net.h_t())) / (1.0 + snr(net.h_e()))
        }
        BoundCase::Glb => {
            let d = 1.0 + x + m * m * q1;
            let root = (1.0 + x * m.powi(3) * q1 / d).sqrt();
            let term = |r: f64| 1.0 + m * x / (1.0 + (1.0 + x + r * d * root) / (m * m * q1));
            term(net.h_e() / net.h_t()) / term(net.h_t() / net.h_e())
        }
    };
    Ok((0.5 * ratio.log2()).max(0.0))
}

/// One evaluated bound with its slack against the measured gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEvaluation {
    pub id: BoundId,
    pub value: f64,
    /// `value - gap` (additive) or `value / gap` (multiplicative); absent when
    /// the multiplicative gap is undefined.
    pub slack: Option<f64>,
}

impl BoundEvaluation {
    fn new(id: BoundId, value: f64, additive_gap: f64, multiplicative_gap: Option<f64>) -> Self {
        let slack = match id.kind() {
            BoundKind::Additive => Some(value - additive_gap),
            BoundKind::Multiplicative => multiplicative_gap.map(|g| value / g),
        };
        Self { id, value, slack }
    }

    /// Whether the gap respects the bound within the pinned tolerances.
    pub fn holds(&self) -> Option<bool> {
        let slack = self.slack?;
        Some(match self.id.kind() {
            BoundKind::Additive => slack >= -ADDITIVE_SLACK_BITS,
            BoundKind::Multiplicative => slack * MULTIPLICATIVE_SLACK_FACTOR >= 1.0,
        })
    }
}

/// Gap between the optimal rates with `N` and with `k` relays per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub params: NetworkParams,
    pub k: usize,
    pub case_n: LastLayerCase,
    pub case_k: LastLayerCase,
    pub rate_n: f64,
    pub rate_k: f64,
    pub additive_gap: f64,
    /// `rate_n / rate_k`; absent when `rate_k == 0`.
    pub multiplicative_gap: Option<f64>,
    /// `rate_k == 0` while `rate_n > 0`: the ratio is unbounded.
    pub multiplicative_unbounded: bool,
    pub kind: BoundKind,
    /// Bound for the `N`-relay case tag; absent in the zero-rate case.
    pub bound: Option<BoundEvaluation>,
    /// Bound for the `k`-relay case tag when it differs from `case_n`.
    pub alternate: Option<BoundEvaluation>,
    pub regime_ok: bool,
}

impl GapReport {
    pub fn n(&self) -> usize {
        self.params.relays
    }

    pub fn layers(&self) -> usize {
        self.params.layers
    }

    pub fn p_s(&self) -> f64 {
        self.params.p_s
    }

    pub fn mixed_case(&self) -> bool {
        self.case_n != self.case_k
    }

    /// The measured gap matching `kind`.
    pub fn gap(&self) -> Option<f64> {
        match self.kind {
            BoundKind::Additive => Some(self.additive_gap),
            BoundKind::Multiplicative => self.multiplicative_gap,
        }
    }
}

fn regime_ok(net: &EcgalNetwork, kind: BoundKind, id: BoundId) -> bool {
    let n = net.relays() as f64;
    let (ps, s2) = (net.source_power(), net.sigma2());
    let power = match kind {
        BoundKind::Additive => n <= REGIME_FACTOR * ps / s2,
        BoundKind::Multiplicative => n <= REGIME_FACTOR * s2 / ps,
    };
    let gains = id != BoundId::DiamondIMul || {
        let r = net.h_t() / net.h_e();
        r > COMPARABLE_GAIN_RATIO.0 && r <= COMPARABLE_GAIN_RATIO.1
    };
    power && gains
}

/// Optimal rates with all `N` and with `k` relays per layer, their gaps, and
/// the bound matching the realised last-layer cases.
pub fn gaps(net: &EcgalNetwork, k: usize) -> Result<GapReport> {
    let n = net.relays();
    check_k(n, k)?;
    let case_n = solve(net, n)?.last_layer_case;
    let case_k = solve(net, k)?.last_layer_case;
    let rate_n = optimal_rate(net, n)?.rate_bits;
    let rate_k = optimal_rate(net, k)?.rate_bits;
    let additive_gap = rate_n - rate_k;
    let multiplicative_gap = (rate_k > 0.0).then(|| rate_n / rate_k);
    let kind = BoundKind::for_network(net);

    let eval = |case: LastLayerCase| -> Result<Option<BoundEvaluation>> {
        BoundCase::from_case(case)
            .map(|c| {
                bound_for(net, k, c, kind)
                    .map(|(id, value)| BoundEvaluation::new(id, value, additive_gap, multiplicative_gap))
            })
            .transpose()
    };
    let bound = eval(case_n)?;
    let alternate = if case_k != case_n { eval(case_k)? } else { None };
    let regime_ok = case_n == case_k
        && bound.is_some_and(|b| regime_ok(net, kind, b.id));

    Ok(GapReport {
        params: net.params().clone(),
        k,
        case_n,
        case_k,
        rate_n,
        rate_k,
        additive_gap,
        multiplicative_gap,
        multiplicative_unbounded: rate_k == 0.0 && rate_n > 0.0,
        kind,
        bound,
        alternate,
        regime_ok,
    })
}

/// Parameter swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    SourcePower,
    K,
    N,
    Layers,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::SourcePower => "P_s",
            SweepAxis::K => "k",
            SweepAxis::N => "N",
            SweepAxis::Layers => "L",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P_s" | "p_s" | "Ps" => Ok(SweepAxis::SourcePower),
            "k" => Ok(SweepAxis::K),
            "N" => Ok(SweepAxis::N),
            "L" => Ok(SweepAxis::Layers),
            other => Err(Error::InvalidSweep(format!(
                "unknown axis `{other}` (expected P_s, k, N or L)"
            ))),
        }
    }
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidSweep(format!(
            "{} values must be positive integers, got {v}",
            axis.as_str()
        )))
    }
}

/// Network and `k` for one sweep point.
fn sweep_point(template: &NetworkParams, axis: SweepAxis, v: f64, k: usize) -> Result<(EcgalNetwork, usize)> {
    let mut p = template.clone();
    let mut k = k;
    match axis {
        SweepAxis::SourcePower => p.p_s = v,
        SweepAxis::K => k = as_count(axis, v)?,
        SweepAxis::N => p.relays = as_count(axis, v)?,
        SweepAxis::Layers => {
            let layers = as_count(axis, v)?;
            if layers > 1 {
                let fill = *p.h_mid.last().ok_or_else(|| {
                    Error::InvalidSweep("an L sweep from a single-layer template has no gain to repeat".into())
                })?;
                p.h_mid.resize(layers - 1, fill);
            } else {
                p.h_mid.clear();
            }
            p.layers = layers;
        }
    }
    Ok((EcgalNetwork::new(p)?, k))
}

/// One [`GapReport`] per value, in input order. `values` must be finite and
/// sorted ascending.
pub fn sweep(template: &EcgalNetwork, axis: SweepAxis, values: &[f64], k: usize) -> Result<Vec<GapReport>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSweep("values must be finite".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidSweep("values must be sorted ascending".into()));
    }
    let points = values
        .iter()
        .map(|&v| sweep_point(template.params(), axis, v, k))
        .collect::<Result<Vec<_>>>()?;
    for (net, k) in &points {
        check_k(net.relays(), *k)?;
    }
    points.par_iter().map(|(net, k)| gaps(net, *k)).collect()
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes the reports as CSV. The variable-length `h_mid` gain vector is
/// spread over columns `h_mid_1 ..`; shorter rows leave the extra cells empty.
pub fn write_csv<W: Write>(mut w: W, reports: &[GapReport]) -> Result<()> {
    let mid = reports.iter().map(|r| r.params.h_mid.len()).max().unwrap_or(0);
    let mut header = vec!["L", "N", "k", "P_s", "P", "sigma2", "h_s"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend((1..=mid).map(|i| format!("h_mid_{i}")));
    header.extend(
        [
            "h_t", "h_e", "case_N", "case_k", "rate_N", "rate_k", "add_gap", "mul_gap", "bound_id",
            "bound_value", "slack", "regime_ok",
        ]
        .map(String::from),
    );
    writeln!(w, "{}", header.join(","))?;
    for r in reports {
        let p = &r.params;
        let mut row = vec![
            p.layers.to_string(),
            p.relays.to_string(),
            r.k.to_string(),
            fmt_f64(p.p_s),
            fmt_f64(p.p),
            fmt_f64(p.sigma2),
            fmt_f64(p.h_s),
        ];
        row.extend((0..mid).map(|i| fmt_opt(p.h_mid.get(i).copied())));
        row.extend([
            fmt_f64(p.h_t),
            fmt_f64(p.h_e),
            r.case_n.to_string(),
            r.case_k.to_string(),
            fmt_f64(r.rate_n),
            fmt_f64(r.rate_k),
            fmt_f64(r.additive_gap),
            fmt_opt(r.multiplicative_gap),
            r.bound.map(|b| b.id.to_string()).unwrap_or_default(),
            fmt_opt(r.bound.map(|b| b.value)),
            fmt_opt(r.bound.and_then(|b| b.slack)),
            r.regime_ok.to_string(),
        ]);
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
