//! Batch front end behind the `af-secrecy` binary.
//!
//! Exit codes: 0 success (including skipped checks), 1 a verified property
//! failed, 2 usage, parse or I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::gap::{gaps, sweep, write_csv, SweepAxis};
use crate::netfile::read_network;
use crate::network::EcgalNetwork;
use crate::oracle::GridSpec;
use crate::rate::evaluate;
use crate::solver::solve;
use crate::verify::{verify, Status, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Optimal scaling factors, case, SNRs and rate.
    Solve,
    /// Optimal SNRs and rate only.
    Rate,
    /// Gap report CSV for `--k`, one row per `--sweep` value if given.
    Gaps,
    /// Like `gaps`, but `--sweep` is required.
    Sweep,
    /// Numerical checks of the closed-form solution.
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "af-secrecy", version, about = "Secure AF relaying in layered networks")]
pub struct RunConfig {
    /// Network description file (`key = value` lines).
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, value_enum)]
    pub cmd: Command,
    /// Relays per layer to use (`gaps`, `sweep`: the simplified count; `solve`,
    /// `rate`: defaults to all `N`).
    #[arg(long)]
    pub k: Option<usize>,
    /// `axis=start,stop,points,log|lin` or `axis=v1,v2,...`; axis is one of
    /// P_s, k, N, L.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub grid_steps: usize,
    #[arg(long, default_value_t = 3)]
    pub refine: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed `--sweep` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

fn sweep_err(msg: impl Into<String>) -> Error {
    Error::InvalidSweep(msg.into())
}

/// `n` values from `start` to `stop`. Log ranges use repeated multiplication
/// by a fixed ratio; the last point is pinned to `stop`.
pub fn range_values(start: f64, stop: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) || start > stop {
        return Err(sweep_err("range needs finite start <= stop"));
    }
    if log && start <= 0.0 {
        return Err(sweep_err("log range needs start > 0"));
    }
    Ok(match points {
        0 => Vec::new(),
        1 => vec![start],
        n => {
            let mut out = Vec::with_capacity(n);
            if log {
                let ratio = (stop / start).powf(1.0 / (n - 1) as f64);
                let mut v = start;
                for _ in 0..n - 1 {
                    out.push(v);
                    v *= ratio;
                }
            } else {
                let h = (stop - start) / (n - 1) as f64;
                out.extend((0..n - 1).map(|i| start + i as f64 * h));
            }
            out.push(stop);
            out
        }
    })
}

impl std::str::FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (axis, spec) = s
            .split_once('=')
            .ok_or_else(|| sweep_err(format!("`{s}`: expected axis=spec")))?;
        let axis: SweepAxis = axis.trim().parse()?;
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| sweep_err(format!("`{t}`: {e}")))
        };
        let values = match parts.as_slice() {
            [start, stop, points, mode @ ("log" | "lin")] => {
                let points = points
                    .parse::<usize>()
                    .map_err(|e| sweep_err(format!("point count `{points}`: {e}")))?;
                range_values(num(start)?, num(stop)?, points, *mode == "log")?
            }
            [""] => Vec::new(),
            list => list.iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?,
        };
        Ok(SweepSpec { axis, values })
    }
}

fn open_out<'a>(cfg: &RunConfig, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(stdout),
    })
}

fn relays_used(cfg: &RunConfig, net: &EcgalNetwork) -> usize {
    cfg.k.unwrap_or(net.relays())
}

fn cmd_solve(cfg: &RunConfig, net: &EcgalNetwork, out: &mut dyn Write, with_betas: bool) -> Result<()> {
    let m = relays_used(cfg, net);
    let sol = solve(net, m)?;
    let r = evaluate(&net.with_relays(m)?, &sol.assignment())?;
    if with_betas {
        for (l, b) in sol.beta_per_layer.iter().enumerate() {
            writeln!(out, "layer {}: beta = {b:.9e}  beta^2 = {:.9e}", l + 1, b * b)?;
        }
        writeln!(out, "last-layer case: {}", sol.last_layer_case)?;
    }
    writeln!(
        out,
        "relays used: {m}  SNR_t = {:.9e}  SNR_e = {:.9e}  rate = {:.9e} bits/use",
        r.snr_t, r.snr_e, r.rate_bits
    )?;
    writeln!(out, "m={m}")?;
    if with_betas {
        for (l, b) in sol.beta_per_layer.iter().enumerate() {
            writeln!(out, "beta_{}={b:?}", l + 1)?;
            writeln!(out, "beta2_{}={:?}", l + 1, b * b)?;
        }
        writeln!(out, "case={}", sol.last_layer_case)?;
    }
    writeln!(out, "snr_t={:?}", r.snr_t)?;
    writeln!(out, "snr_e={:?}", r.snr_e)?;
    writeln!(out, "rate_bits={:?}", r.rate_bits)?;
    Ok(())
}

fn require_k(cfg: &RunConfig, net: &EcgalNetwork) -> Result<usize> {
    let k = cfg
        .k
        .ok_or_else(|| Error::InvalidInput("--k is required for this command".into()))?;
    if k == 0 || k >= net.relays() {
        return Err(Error::InvalidK { k, n: net.relays() });
    }
    Ok(k)
}

fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let net = read_network(&cfg.net)?;
    match cfg.cmd {
        Command::Solve | Command::Rate => {
            let mut out = open_out(cfg, stdout)?;
            cmd_solve(cfg, &net, &mut out, cfg.cmd == Command::Solve)?;
            out.flush()?;
        }
        Command::Gaps | Command::Sweep => {
            let reports = match cfg.sweep.as_deref() {
                None if cfg.cmd == Command::Sweep => {
                    return Err(Error::InvalidInput("--sweep is required for the sweep command".into()))
                }
                None => vec![gaps(&net, require_k(cfg, &net)?)?],
                Some(spec) => {
                    let spec: SweepSpec = spec.parse()?;
                    let k = match (spec.axis, cfg.k) {
                        (SweepAxis::K, k) => k.unwrap_or(0),
                        (_, Some(k)) => k,
                        (_, None) => {
                            return Err(Error::InvalidInput("--k is required unless sweeping k".into()))
                        }
                    };
                    sweep(&net, spec.axis, &spec.values, k)?
                }
            };
            let mut out = open_out(cfg, stdout)?;
            write_csv(&mut out, &reports)?;
            out.flush()?;
        }
        Command::Verify => {
            let report = verify(
                &net,
                &VerifyOptions {
                    grid: GridSpec::new(cfg.grid_steps, cfg.refine, true)?,
                    glb_perturbation: 1.0,
                },
            )?;
            let mut out = open_out(cfg, stdout)?;
            for c in &report.checks {
                writeln!(out, "{c}")?;
            }
            out.flush()?;
            for c in report.skipped() {
                writeln!(stderr, "warning: {} skipped: {}", c.name, c.detail)?;
            }
            let ok = report.passed();
            writeln!(out, "{}", if ok { Status::Pass } else { Status::Fail })?;
            return Ok(if ok { EXIT_OK } else { EXIT_PROPERTY_FAILURE });
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cfg, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
