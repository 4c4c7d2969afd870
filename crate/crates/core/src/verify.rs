//! Numerical checks of a closed-form solution: grid optimality, first- and
//! second-order conditions, interior-layer boundary optimality, symmetry.

use std::fmt;

use crate::error::{Error, Result};
use crate::network::{EcgalNetwork, ScalingAssignment};
use crate::oracle::{
    grid_search, second_derivative_sign, stationarity_residual, GridSpec, Sign,
};
use crate::rate::evaluate;
use crate::solver::{best_last_layer, solve, LastLayerCase, ScalingSolution};

pub const STATIONARITY_TOL: f64 = 1e-6;
pub const BACKOFF_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn judged(name: &'static str, residual: f64, tolerance: f64, detail: String) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self {
            name,
            status,
            residual: Some(residual),
            tolerance: Some(tolerance),
            detail,
        }
    }

    fn skip(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skip,
            residual: None,
            tolerance: None,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.status, self.name)?;
        if let Some(r) = self.residual {
            write!(f, " residual={r:e}")?;
        }
        if let Some(t) = self.tolerance {
            write!(f, " tol={t:e}")?;
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn skipped(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Skip)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    /// Test hook: multiplies the interior stationary point before checking.
    /// `1.0` checks the solver as is.
    pub glb_perturbation: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            glb_perturbation: 1.0,
        }
    }
}

fn candidate(net: &EcgalNetwork, perturbation: f64) -> Result<ScalingSolution> {
    let mut sol = solve(net, net.relays())?;
    if let (LastLayerCase::Glb, Some(glb)) = (sol.last_layer_case, sol.beta_l_glb) {
        *sol.beta_per_layer.last_mut().expect("at least one layer") =
            (glb * perturbation).min(sol.beta_l_max);
    }
    Ok(sol)
}

fn budget_skip(name: &'static str, e: Error) -> Result<Check> {
    match e {
        Error::BudgetExceeded { .. } | Error::AxisCap { .. } => Ok(Check::skip(name, e.to_string())),
        other => Err(other),
    }
}

/// Runs every check on the solution with all `N` relays.
pub fn verify(net: &EcgalNetwork, opts: &VerifyOptions) -> Result<VerifyReport> {
    let m = net.relays();
    let sol = candidate(net, opts.glb_perturbation)?;
    let rate = evaluate(net, &sol.assignment())?.rate_bits;
    let last = net.layers();
    let mut checks = Vec::new();

    let sym_spec = GridSpec {
        symmetric_only: true,
        ..opts.grid.clone()
    };
    checks.push(match grid_search(net, m, &sym_spec) {
        Ok(g) => Check::judged(
            "grid_optimality",
            g.rate.rate_bits - rate,
            g.epsilon_grid,
            format!("solver={rate:e} grid={:e} evals={}", g.rate.rate_bits, g.evaluations),
        ),
        Err(e) => budget_skip("grid_optimality", e)?,
    });

    let beta = sol.beta_per_layer.clone();
    checks.push(match sol.last_layer_case {
        LastLayerCase::Glb => {
            let (res, d) = stationarity_residual(net, m, &beta, last)?;
            Check::judged(
                "stationarity",
                res,
                STATIONARITY_TOL,
                format!("dR/dbeta={:e} step={:e}", d.value, d.step),
            )
        }
        LastLayerCase::Max => {
            let (res, d) = stationarity_residual(net, m, &beta, last)?;
            // at the cap only an ascent direction into the boundary is allowed
            Check::judged(
                "stationarity",
                if d.value >= 0.0 { 0.0 } else { res },
                STATIONARITY_TOL,
                format!("boundary, one-sided dR/dbeta={:e}", d.value),
            )
        }
        LastLayerCase::Zero => Check::skip("stationarity", "rate is identically zero"),
    });

    checks.push(match sol.last_layer_case {
        LastLayerCase::Glb => match second_derivative_sign(net, m, &beta, last)? {
            Sign::Negative => Check {
                name: "curvature",
                status: Status::Pass,
                residual: None,
                tolerance: None,
                detail: "local maximum".into(),
            },
            s => Check {
                name: "curvature",
                status: Status::Fail,
                residual: None,
                tolerance: None,
                detail: format!("second derivative sign {s:?}"),
            },
        },
        _ => Check::skip("curvature", "no interior stationary point"),
    });

    checks.push(if last == 1 {
        Check::skip("boundary_optimality", "no interior layers")
    } else if sol.last_layer_case == LastLayerCase::Zero {
        Check::skip("boundary_optimality", "rate is identically zero")
    } else {
        // strict: backing off must lose rate
        let worst = backoff_excess(net, m, &beta, rate, BACKOFF_EPS, Backoff::Fixed)?;
        Check {
            name: "boundary_optimality",
            status: if worst < 0.0 { Status::Pass } else { Status::Fail },
            residual: Some(worst),
            tolerance: Some(0.0),
            detail: format!("eps={BACKOFF_EPS:e}, other layers fixed"),
        }
    });

    let asym_spec = GridSpec {
        symmetric_only: false,
        ..opts.grid.clone()
    };
    checks.push(match grid_search(net, m, &asym_spec) {
        Ok(g) => Check::judged("symmetry", g.symmetry_excess(), 0.0, "spread minus final grid step".into()),
        Err(e) => budget_skip("symmetry", e)?,
    });

    Ok(VerifyReport { checks })
}

/// What happens to the other layers when an interior layer backs off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backoff {
    /// All other layers keep their factors.
    Fixed,
    /// The last layer re-optimises for the new upstream.
    ReoptimizeLast,
}

/// Largest rate change from scaling one interior layer's factor by
/// `1 - eps`. Negative when every interior layer is strictly optimal at its
/// cap.
pub fn backoff_excess(
    net: &EcgalNetwork,
    m: usize,
    beta: &[f64],
    rate: f64,
    eps: f64,
    mode: Backoff,
) -> Result<f64> {
    let sub = net.with_relays(m)?;
    let layers = sub.layers();
    let mut worst = f64::MIN;
    for l in 0..layers - 1 {
        let mut probe = beta.to_vec();
        probe[l] *= 1.0 - eps;
        if mode == Backoff::ReoptimizeLast {
            probe[layers - 1] = best_last_layer(net, m, &probe[..layers - 1])?;
        }
        let s = ScalingAssignment::from_per_layer(&probe, m)?;
        worst = worst.max(evaluate(&sub, &s)?.rate_bits - rate);
    }
    Ok(worst)
}
