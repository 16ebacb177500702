//! Experiment orchestration: trial execution, averaging with uncertainty,
//! user-count sweeps with interference schedules, slope fits, and the
//! Kolmogorov–Smirnov distance used by the distribution checks.
//!
//! Determinism contract: every trial derives its own stream from
//! `(seed, n, trial index)`, trials are collected in index order, and the
//! reduction is sequential, so results are bit-identical for any number of
//! parallel workers and independent of the grid ordering.

use rayon::prelude::*;

use crate::bc;
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::mac;
use crate::model::{draw_channels, interference_on_primary, SecondaryMode, SystemConfig};
use crate::rng::RandomStream;
use crate::theory::{bc_bounds, mac_bounds, mac_capacity_leading, BoundsReport};

/// Interference-tolerance schedule over the user count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    Constant(f64),
    /// `gamma0 * n^(-q)`
    PowerLaw { gamma0: f64, q: f64 },
    /// `gamma0 * (log n)^(-q)`
    LogLaw { gamma0: f64, q: f64 },
}

impl GammaSchedule {
    pub fn gamma_at(&self, n: usize) -> Result<f64> {
        match *self {
            GammaSchedule::Constant(g) => Ok(g),
            GammaSchedule::PowerLaw { gamma0, q } => Ok(mac::gamma_power_law(gamma0, q, n)),
            GammaSchedule::LogLaw { gamma0, q } => bc::gamma_log_law(gamma0, q, n),
        }
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Scenario template; `secondary_users` and `tolerance` are overridden
    /// per grid point.
    pub cfg: SystemConfig,
    /// Strictly increasing user counts.
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub schedule: GammaSchedule,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.trials < 2 {
            return Err(Error::InsufficientData(
                "at least 2 trials are needed for a standard error".into(),
            ));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n_grid must be non-empty and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Sample mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    pub trials: usize,
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub gamma: f64,
    pub estimate: Estimate,
    pub bounds: BoundsReport,
    /// Leading analytic growth term at this point: `(m/(K+1)) log n` for a
    /// MAC secondary, `m log(gamma log n)` for a broadcast secondary.
    pub leading: f64,
    /// Interference-constraint breaches observed; must be zero on every
    /// accepted run.
    pub violations: u64,
}

fn run_trial(cfg: &SystemConfig, stream: RandomStream) -> (f64, u64) {
    let chan = draw_channels(cfg, stream.substream(0));
    let decision_stream = stream.substream(1);
    let mut violations = 0u64;
    let rate = match cfg.secondary_mode {
        SecondaryMode::Mac => {
            let (sched, rate) = mac::schedule_and_rate(cfg, &chan, decision_stream);
            let gp = chan.to_primary.select_cols(&sched.active);
            let q_s = HermitianMatrix::scaled_identity(sched.active.len(), sched.per_user_power);
            let interference = interference_on_primary(&gp, &q_s).expect("shape by construction");
            for (l, v) in interference.into_iter().enumerate() {
                // the scheduler guarantees a strict inequality
                if v >= cfg.tolerance_for(l) {
                    violations += 1;
                }
            }
            rate
        }
        SecondaryMode::Broadcast => {
            let (sched, rate) = bc::assign_and_rate(cfg, &chan, decision_stream);
            let q_s = HermitianMatrix::scaled_identity(
                cfg.secondary_antennas,
                sched.power / cfg.secondary_antennas as f64,
            );
            let interference =
                interference_on_primary(&chan.to_primary, &q_s).expect("shape by construction");
            for (l, v) in interference.into_iter().enumerate() {
                // a binding constraint reproduces the tolerance only up to
                // division round-off; forgive a relative 1e-9
                if v > cfg.tolerance_for(l) * (1.0 + 1e-9) {
                    violations += 1;
                }
            }
            rate
        }
    };
    (rate, violations)
}

/// Per-trial rates plus the violation total for one `(cfg, trials, seed)`
/// point. Deterministic regardless of the worker count.
pub fn run_point(cfg: &SystemConfig, trials: usize, seed: u64) -> (Estimate, u64) {
    let base = RandomStream::new(seed).substream(cfg.secondary_users as u64);
    let outcomes: Vec<(f64, u64)> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, base.substream(t as u64)))
        .collect();
    let mut sum = 0.0;
    let mut violations = 0u64;
    for &(r, v) in &outcomes {
        sum += r;
        violations += v;
    }
    let mean = sum / trials as f64;
    let mut ss = 0.0;
    for &(r, _) in &outcomes {
        ss += (r - mean) * (r - mean);
    }
    let stderr = if trials > 1 {
        (ss / (trials - 1) as f64).sqrt() / (trials as f64).sqrt()
    } else {
        f64::NAN
    };
    (
        Estimate {
            mean,
            stderr,
            trials,
        },
        violations,
    )
}

/// Average secondary throughput over independent channel draws.
///
/// Requires `trials >= 2` so the standard error is defined.
pub fn estimate_throughput(cfg: &SystemConfig, trials: usize, seed: u64) -> Result<Estimate> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::InsufficientData(format!(
            "standard error undefined for {trials} trial(s)"
        )));
    }
    Ok(run_point(cfg, trials, seed).0)
}

/// Execute a sweep: one row per grid point with the scheduled tolerance, the
/// throughput estimate, matching closed-form bounds, and the violation count.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.n_grid.len());
    for &n in &spec.n_grid {
        let gamma = spec.schedule.gamma_at(n)?;
        let mut cfg = spec.cfg.clone();
        cfg.secondary_users = n;
        cfg.tolerance = gamma;
        let (estimate, violations) = run_point(&cfg, spec.trials, spec.seed);
        let (bounds, leading) = match cfg.secondary_mode {
            SecondaryMode::Mac => (mac_bounds(&cfg, n, gamma), mac_capacity_leading(&cfg, n)),
            SecondaryMode::Broadcast => (
                bc_bounds(&cfg, n, gamma)?,
                cfg.secondary_antennas as f64 * (gamma * (n as f64).ln()).ln(),
            ),
        };
        rows.push(SweepRow {
            n,
            gamma,
            estimate,
            bounds,
            leading,
            violations,
        });
    }
    Ok(rows)
}

/// Regressor choice for [`fit_slope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    LogN,
    LogLogN,
}

/// Least-squares slope of the estimated means against `log n` or
/// `log log n`. Needs at least three rows.
pub fn fit_slope(rows: &[SweepRow], abscissa: Abscissa) -> Result<f64> {
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| match abscissa {
            Abscissa::LogN => (r.n as f64).ln(),
            Abscissa::LogLogN => (r.n as f64).ln().ln(),
        })
        .collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate.mean).collect();
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xb = xs.iter().sum::<f64>() / n;
    let yb = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - xb) * (y - yb);
        den += (x - xb) * (x - xb);
    }
    num / den
}

/// Two-sided Kolmogorov–Smirnov statistic: the sup-norm distance between the
/// empirical distribution of `samples` and `cdf`. The 0.01-significance
/// critical value for `n` samples is about `1.628 / sqrt(n)`; at least a few
/// hundred samples are needed for that approximation to hold.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS distance of an empty sample set");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n);
        d = d.max((i + 1) as f64 / n - f);
    }
    d
}
