//! Brute-force and finite-difference checks for the closed-form solver.
//!
//! The grid search parametrises every axis as a fraction `u in [0, 1]` of the
//! power cap of its layer, where the cap is recomputed from the actual
//! upstream factors of each grid point. The searched box is therefore the
//! exact feasible set, not a box around the solver's own caps.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{relay_cap, EcgalNetwork, ScalingAssignment};
use crate::rate::{evaluate, RateResult};

pub const DEFAULT_EVAL_CAP: u128 = 100_000_000;
pub const EVAL_CAP_ENV: &str = "AF_SECRECY_EVAL_CAP";
pub const DEFAULT_MAX_ASYMMETRIC_AXES: usize = 9;

/// Relative finite-difference step for first derivatives.
pub const FD_RELATIVE_STEP: f64 = 1e-6;
/// Relative step for second differences.
/// Rounding allowance, relative to the layer cap, when judging symmetry.
pub const SPREAD_RTOL: f64 = 1e-12;
pub const SECOND_DIFF_RELATIVE_STEP: f64 = 1e-4;
/// Relative curvature below which [`Sign::Zero`] is reported.
const CURVATURE_ZERO_TOL: f64 = 1e-6;

/// Evaluation budget, taken from `AF_SECRECY_EVAL_CAP` when set.
pub fn eval_cap_from_env() -> u128 {
    std::env::var(EVAL_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_EVAL_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub steps_per_axis: usize,
    pub refine_rounds: usize,
    /// Search one factor per layer instead of one per relay.
    pub symmetric_only: bool,
    pub eval_cap: u128,
    pub max_asymmetric_axes: usize,
}

impl GridSpec {
    pub fn new(steps_per_axis: usize, refine_rounds: usize, symmetric_only: bool) -> Result<Self> {
        if steps_per_axis < 8 {
            return Err(Error::InvalidInput(format!(
                "steps_per_axis must be >= 8, got {steps_per_axis}"
            )));
        }
        Ok(Self {
            steps_per_axis,
            refine_rounds,
            symmetric_only,
            eval_cap: eval_cap_from_env(),
            max_asymmetric_axes: DEFAULT_MAX_ASYMMETRIC_AXES,
        })
    }

    /// Points evaluated per round for `axes` axes.
    pub fn points_per_round(&self, axes: usize) -> u128 {
        (self.steps_per_axis as u128 + 1)
            .checked_pow(axes as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn total_evaluations(&self, axes: usize) -> u128 {
        self.points_per_round(axes)
            .saturating_mul(self.refine_rounds as u128 + 1)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(64, 3, true).expect("default grid is valid")
    }
}

/// Incumbent of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub assignment: ScalingAssignment,
    pub rate: RateResult,
    /// Incumbent axis coordinates (fractions of the layer caps).
    pub fractions: Vec<f64>,
    /// Per-axis step of the last round, in fraction units.
    pub final_steps: Vec<f64>,
    /// Layer caps at the incumbent.
    pub layer_caps: Vec<f64>,
    /// Incumbent rate after each round.
    pub round_rates: Vec<f64>,
    pub evaluations: u128,
    /// Largest rate change (bits) from moving the incumbent one final step
    /// along any single axis.
    pub epsilon_grid: f64,
}

impl GridOutcome {
    /// `max - min` of the factors within each layer.
    pub fn within_layer_spread(&self) -> Vec<f64> {
        self.assignment
            .rows()
            .iter()
            .map(|row| {
                let max = row.iter().copied().fold(f64::MIN, f64::max);
                let min = row.iter().copied().fold(f64::MAX, f64::min);
                max - min
            })
            .collect()
    }

    /// Final-round grid step of each layer in beta units.
    pub fn beta_steps(&self) -> Vec<f64> {
        let relays = self.assignment.relays();
        let per_axis = self.final_steps.len() / self.layer_caps.len();
        debug_assert!(per_axis == 1 || per_axis == relays);
        self.layer_caps
            .iter()
            .enumerate()
            .map(|(l, cap)| {
                let steps = &self.final_steps[l * per_axis..(l + 1) * per_axis];
                cap * steps.iter().copied().fold(0.0, f64::max)
            })
            .collect()
    }

    /// Largest within-layer spread beyond one final grid step; `<= 0` means
    /// the incumbent is symmetric to grid resolution. Each step is widened by
    /// [`SPREAD_RTOL`] times the layer cap to absorb rounding in
    /// `cap * fraction`.
    pub fn symmetry_excess(&self) -> f64 {
        self.within_layer_spread()
            .iter()
            .zip(self.beta_steps())
            .zip(&self.layer_caps)
            .map(|((s, step), cap)| s - step - SPREAD_RTOL * cap)
            .fold(f64::MIN, f64::max)
    }
}

/// Evaluates grid points; all relays of a layer share one cap.
struct PointEvaluator<'a> {
    net: &'a EcgalNetwork,
    relays: usize,
    symmetric: bool,
}

impl PointEvaluator<'_> {
    fn axes(&self) -> usize {
        if self.symmetric {
            self.net.layers()
        } else {
            self.net.layers() * self.relays
        }
    }

    fn layer_fractions<'u>(&self, u: &'u [f64], l: usize) -> &'u [f64] {
        if self.symmetric {
            &u[l..l + 1]
        } else {
            &u[l * self.relays..(l + 1) * self.relays]
        }
    }

    /// Per-layer `(sum beta, sum beta^2)` and caps for fractions `u`.
    fn layer_sums(&self, u: &[f64], sums: &mut Vec<(f64, f64)>, caps: &mut Vec<f64>) {
        let net = self.net;
        sums.clear();
        caps.clear();
        let n = self.relays as f64;
        let mut signal = net.source_power() * net.h_s().powi(2);
        let mut common = 0.0;
        for l in 0..net.layers() {
            let cap = (net.relay_power() / (signal + (common + 1.0) * net.sigma2())).sqrt();
            let frac = self.layer_fractions(u, l);
            let (f1, f2) = if self.symmetric {
                (n * frac[0], n * frac[0] * frac[0])
            } else {
                frac.iter().fold((0.0, 0.0), |(a, b), &x| (a + x, b + x * x))
            };
            let (s1, s2) = (cap * f1, cap * cap * f2);
            sums.push((s1, s2));
            caps.push(cap);
            if l + 1 < net.layers() {
                let g2 = net.h_mid()[l].powi(2);
                signal *= s1 * s1 * g2;
                common = common * s1 * s1 * g2 + s2 * g2;
            }
        }
    }

    /// State of a grid point with everything but the last axis fixed.
    fn prepare(&self, u: &[f64]) -> LastAxis {
        let net = self.net;
        let layers = net.layers();
        let n = self.relays as f64;
        let mut signal = net.source_power() * net.h_s().powi(2);
        let mut common = 0.0;
        for l in 0..layers - 1 {
            let cap = (net.relay_power() / (signal + (common + 1.0) * net.sigma2())).sqrt();
            let frac = self.layer_fractions(u, l);
            let (f1, f2) = if self.symmetric {
                (n * frac[0], n * frac[0] * frac[0])
            } else {
                frac.iter().fold((0.0, 0.0), |(a, b), &x| (a + x, b + x * x))
            };
            let (s1, s2) = (cap * f1, cap * cap * f2);
            let g2 = net.h_mid()[l].powi(2);
            signal *= s1 * s1 * g2;
            common = common * s1 * s1 * g2 + s2 * g2;
        }
        let cap = (net.relay_power() / (signal + (common + 1.0) * net.sigma2())).sqrt();
        let (partial1, partial2, weight) = if self.symmetric {
            (0.0, 0.0, n)
        } else {
            let frac = self.layer_fractions(u, layers - 1);
            let (a, b) = frac[..frac.len() - 1]
                .iter()
                .fold((0.0, 0.0), |(a, b), &x| (a + x, b + x * x));
            (a, b, 1.0)
        };
        LastAxis {
            signal: signal / net.sigma2(),
            common,
            cap,
            partial1,
            partial2,
            weight,
            gt2: net.h_t().powi(2),
            ge2: net.h_e().powi(2),
        }
    }

    /// Clamped `(1 + snr_t) / (1 + snr_e) - 1` (monotone in the secrecy
    /// rate) at fractions `u`.
    fn score(&self, u: &[f64]) -> f64 {
        self.prepare(u).score(u[u.len() - 1])
    }

    fn assignment(&self, u: &[f64]) -> (ScalingAssignment, Vec<f64>) {
        let mut sums = Vec::new();
        let mut caps = Vec::new();
        self.layer_sums(u, &mut sums, &mut caps);
        let rows = (0..self.net.layers())
            .map(|l| {
                let frac = self.layer_fractions(u, l);
                if self.symmetric {
                    vec![caps[l] * frac[0]; self.relays]
                } else {
                    frac.iter().map(|x| caps[l] * x).collect()
                }
            })
            .collect();
        (
            ScalingAssignment::new(rows).expect("grid factors are finite and non-negative"),
            caps,
        )
    }

    fn rate(&self, u: &[f64]) -> RateResult {
        let (s, _) = self.assignment(u);
        evaluate(self.net, &s).expect("grid assignment matches network shape")
    }
}

/// Upstream quantities for sweeping the last axis.
struct LastAxis {
    /// Signal power reaching the last layer over `sigma2`.
    signal: f64,
    /// Accumulated relay noise reaching the last layer, in units of `sigma2`.
    common: f64,
    cap: f64,
    partial1: f64,
    partial2: f64,
    weight: f64,
    gt2: f64,
    ge2: f64,
}

impl LastAxis {
    #[inline]
    fn score(&self, v: f64) -> f64 {
        let s1 = self.cap * (self.partial1 + self.weight * v);
        let s2 = self.cap * self.cap * (self.partial2 + self.weight * v * v);
        let snr = |g2: f64| {
            let a = s1 * s1 * g2;
            self.signal * a / (1.0 + self.common * a + s2 * g2)
        };
        let (st, se) = (snr(self.gt2), snr(self.ge2));
        ((st - se) / (1.0 + se)).max(0.0)
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    score: f64,
    u: Vec<f64>,
}

impl Candidate {
    /// Larger score wins; ties go to the lexicographically smaller point.
    fn better_than(&self, other: &Candidate) -> bool {
        match self.score.partial_cmp(&other.score) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => self.u < other.u,
        }
    }

    fn pick(a: Candidate, b: Candidate) -> Candidate {
        if b.better_than(&a) {
            b
        } else {
            a
        }
    }
}

fn axis_points(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    (0..=steps)
        .map(|i| if i == steps { hi } else { lo + i as f64 * h })
        .collect()
}

fn best_on_grid(eval: &PointEvaluator<'_>, grids: &[Vec<f64>]) -> Candidate {
    let axes = grids.len();
    let last = axes - 1;
    if axes == 1 {
        return grids[0]
            .par_iter()
            .map(|&v| Candidate {
                score: eval.score(&[v]),
                u: vec![v],
            })
            .reduce_with(Candidate::pick)
            .expect("grid is non-empty");
    }
    grids[0]
        .par_iter()
        .map(|&first| {
            let mut idx = vec![0usize; axes];
            let mut u: Vec<f64> = grids.iter().map(|g| g[0]).collect();
            u[0] = first;
            let mut best: Option<Candidate> = None;
            loop {
                // innermost axis swept with the upstream state fixed; points
                // are visited in lexicographic order, so strict `>` keeps the
                // smallest of tied points
                let state = eval.prepare(&u);
                for &v in &grids[last] {
                    let score = state.score(v);
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        u[last] = v;
                        best = Some(Candidate { score, u: u.clone() });
                    }
                }
                let mut pos = last;
                loop {
                    if pos == 1 {
                        return best.expect("at least one point");
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < grids[pos].len() {
                        u[pos] = grids[pos][idx[pos]];
                        break;
                    }
                    idx[pos] = 0;
                    u[pos] = grids[pos][0];
                }
            }
        })
        .reduce_with(Candidate::pick)
        .expect("grid is non-empty")
}

/// Deterministic refined grid search for the secrecy-rate maximiser with `m`
/// relays per layer.
pub fn grid_search(net: &EcgalNetwork, m: usize, spec: &GridSpec) -> Result<GridOutcome> {
    let sub = net.with_relays(m)?;
    let eval = PointEvaluator {
        net: &sub,
        relays: m,
        symmetric: spec.symmetric_only,
    };
    let axes = eval.axes();
    if !spec.symmetric_only && axes > spec.max_asymmetric_axes {
        return Err(Error::AxisCap {
            axes,
            cap: spec.max_asymmetric_axes,
        });
    }
    let required = spec.total_evaluations(axes);
    if required > spec.eval_cap {
        return Err(Error::BudgetExceeded {
            required,
            cap: spec.eval_cap,
        });
    }

    let s = spec.steps_per_axis;
    let mut steps = vec![1.0 / s as f64; axes];
    let mut grids: Vec<Vec<f64>> = vec![axis_points(0.0, 1.0, s); axes];
    let mut incumbent = best_on_grid(&eval, &grids);
    let mut evaluations = spec.points_per_round(axes);
    let mut round_rates = vec![eval.rate(&incumbent.u).rate_bits];

    for _ in 0..spec.refine_rounds {
        for a in 0..axes {
            let lo = (incumbent.u[a] - steps[a]).max(0.0);
            let hi = (incumbent.u[a] + steps[a]).min(1.0);
            grids[a] = axis_points(lo, hi, s);
            steps[a] = (hi - lo) / s as f64;
        }
        let challenger = best_on_grid(&eval, &grids);
        evaluations += spec.points_per_round(axes);
        incumbent = Candidate::pick(incumbent, challenger);
        round_rates.push(eval.rate(&incumbent.u).rate_bits);
    }

    let (assignment, layer_caps) = eval.assignment(&incumbent.u);
    let rate = evaluate(&sub, &assignment)?;
    let mut epsilon_grid: f64 = 0.0;
    for a in 0..axes {
        for dir in [-1.0, 1.0] {
            let mut u = incumbent.u.clone();
            u[a] = (u[a] + dir * steps[a]).clamp(0.0, 1.0);
            epsilon_grid = epsilon_grid.max((eval.rate(&u).rate_bits - rate.rate_bits).abs());
        }
    }

    Ok(GridOutcome {
        assignment,
        rate,
        fractions: incumbent.u,
        final_steps: steps,
        layer_caps,
        round_rates,
        evaluations,
        epsilon_grid,
    })
}

/// Outcome of a first-derivative estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub step: f64,
    /// A one-sided difference was used because the point sits on a boundary
    /// of `[0, cap]`.
    pub one_sided: bool,
}

/// Sign of a numerical second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn second_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Sign of `f''(x)` from a central second difference with relative step
/// [`SECOND_DIFF_RELATIVE_STEP`]; curvatures that are negligible relative to
/// `|f|` are reported as [`Sign::Zero`].
pub fn curvature_sign<F: Fn(f64) -> f64>(f: F, x: f64) -> Result<Sign> {
    let h = SECOND_DIFF_RELATIVE_STEP * x.abs();
    if !(h.is_finite() && h >= f64::MIN_POSITIVE) {
        return Err(Error::StepUnderflow(x));
    }
    let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
    let scale = fm.abs().max(f0.abs()).max(fp.abs());
    if scale == 0.0 {
        return Ok(Sign::Zero);
    }
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    let kappa = d2 * x * x / scale;
    Ok(if kappa.abs() <= CURVATURE_ZERO_TOL {
        Sign::Zero
    } else if kappa < 0.0 {
        Sign::Negative
    } else {
        Sign::Positive
    })
}

fn check_beta_layer(net: &EcgalNetwork, per_layer_beta: &[f64], layer: usize) -> Result<()> {
    if per_layer_beta.len() != net.layers() {
        return Err(Error::InvalidInput(format!(
            "expected {} per-layer factors, got {}",
            net.layers(),
            per_layer_beta.len()
        )));
    }
    if layer == 0 || layer > net.layers() {
        return Err(Error::IndexOutOfRange {
            what: "layer",
            index: layer,
            bound: net.layers(),
        });
    }
    Ok(())
}

/// Unclamped log-ratio as a function of the symmetric factor of `layer`,
/// with every other layer held fixed.
fn raw_rate_along<'a>(
    sub: &'a EcgalNetwork,
    per_layer_beta: &'a [f64],
    layer: usize,
) -> impl Fn(f64) -> f64 + 'a {
    move |x| {
        let mut betas = per_layer_beta.to_vec();
        betas[layer - 1] = x;
        let s = ScalingAssignment::from_per_layer(&betas, sub.relays())
            .expect("probe factors are non-negative");
        evaluate(sub, &s).expect("shape matches").raw_log_ratio()
    }
}

/// Derivative of the raw log-ratio with respect to the symmetric factor of
/// `layer` (1-based), relative step [`FD_RELATIVE_STEP`]. Points on the
/// `0` or cap boundary fall back to a one-sided difference.
pub fn finite_diff_gradient(
    net: &EcgalNetwork,
    m: usize,
    per_layer_beta: &[f64],
    layer: usize,
) -> Result<Derivative> {
    let sub = net.with_relays(m)?;
    check_beta_layer(&sub, per_layer_beta, layer)?;
    let upstream = ScalingAssignment::from_per_layer(per_layer_beta, m)?;
    let cap = relay_cap(&sub, &upstream, layer)?;
    let x = per_layer_beta[layer - 1];
    let h = FD_RELATIVE_STEP * if x > 0.0 { x } else { cap };
    let f = raw_rate_along(&sub, per_layer_beta, layer);
    let (value, one_sided) = if x - h < 0.0 {
        ((f(x + h) - f(x)) / h, true)
    } else if x + h > cap {
        ((f(x) - f(x - h)) / h, true)
    } else {
        (central_difference(&f, x, h), false)
    };
    Ok(Derivative {
        value,
        step: h,
        one_sided,
    })
}

/// `|dR/d beta| * beta / |R|` at the given point: the stationarity residual
/// on the scale of the rate itself.
pub fn stationarity_residual(
    net: &EcgalNetwork,
    m: usize,
    per_layer_beta: &[f64],
    layer: usize,
) -> Result<(f64, Derivative)> {
    let d = finite_diff_gradient(net, m, per_layer_beta, layer)?;
    let sub = net.with_relays(m)?;
    let rate = raw_rate_along(&sub, per_layer_beta, layer)(per_layer_beta[layer - 1]);
    let scale = rate.abs().max(f64::MIN_POSITIVE);
    Ok(((d.value * per_layer_beta[layer - 1]).abs() / scale, d))
}

/// Sign of the second derivative of the raw log-ratio along the symmetric
/// factor of `layer`.
pub fn second_derivative_sign(
    net: &EcgalNetwork,
    m: usize,
    per_layer_beta: &[f64],
    layer: usize,
) -> Result<Sign> {
    let sub = net.with_relays(m)?;
    check_beta_layer(&sub, per_layer_beta, layer)?;
    curvature_sign(raw_rate_along(&sub, per_layer_beta, layer), per_layer_beta[layer - 1])
}
