//! Random-beamforming scheduler for the secondary downlink.
//!
//! The base station draws `m` Haar-random orthonormal beams, splits its
//! transmit power equally across them, caps that power so that every primary
//! constraint point sees at most its tolerance, and gives each beam to the
//! user with the highest SINR on it. The sandwich variables bracket each
//! user's SINR between two ratios whose denominators are gamma distributed,
//! which is what the closed-form analysis in [`crate::theory`] works with.

use crate::linalg::ComplexMatrix;
use crate::model::{
    primary_covariance, ChannelRealization, PrimaryCovariance, SecondaryMode, SystemConfig,
};
use crate::rng::{sample_haar_beams, RandomStream};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// One block's beamforming decision.
#[derive(Debug, Clone, PartialEq)]
pub struct BcSchedule {
    /// Orthonormal beam set; column `j` is beam `j`.
    pub beams: ComplexMatrix,
    /// Total transmit power actually used (at most the power cap).
    pub power: f64,
    /// Per beam: the winning user and its SINR. Exactly one entry per beam.
    pub winners: Vec<(usize, f64)>,
    /// Number of zero-norm cross-channel rows encountered when capping the
    /// power (probability-zero; treated as non-binding).
    pub degenerate_rows: usize,
}

/// SINR of one user on one beam together with its sandwich bounds.
///
/// With `theta >= 1` the ordering `lower <= sinr <= upper` holds pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSandwich {
    pub lower: f64,
    pub sinr: f64,
    pub upper: f64,
    /// `m * (per-dimension primary power) / power`.
    pub theta: f64,
}

/// Largest transmit power that satisfies every interference constraint and
/// the base-station cap: `min_l (m * tolerance_l / |row_l|^2)` capped at the
/// power budget. Zero-norm rows impose no constraint.
pub fn secondary_tx_power(to_primary: &ComplexMatrix, cfg: &SystemConfig) -> f64 {
    secondary_tx_power_detail(to_primary, cfg).0
}

fn secondary_tx_power_detail(to_primary: &ComplexMatrix, cfg: &SystemConfig) -> (f64, usize) {
    debug_assert_eq!(cfg.secondary_mode, SecondaryMode::Broadcast);
    debug_assert_eq!(to_primary.cols(), cfg.secondary_antennas);
    let m = cfg.secondary_antennas as f64;
    let mut power = cfg.secondary_bs_power;
    let mut degenerate = 0usize;
    for l in 0..to_primary.rows() {
        let norm_sq = to_primary.row_norm_sq(l);
        if norm_sq > 0.0 {
            power = power.min(m * cfg.tolerance_for(l) / norm_sq);
        } else {
            degenerate += 1;
        }
    }
    (power, degenerate)
}

#[inline]
fn sinr_from_alignments(
    alignments: &[f64],
    beam: usize,
    power_per_beam: f64,
    primary_interference: f64,
) -> f64 {
    let mut intra = 0.0;
    for (k, &a) in alignments.iter().enumerate() {
        if k != beam {
            intra += a;
        }
    }
    power_per_beam * alignments[beam] / (1.0 + power_per_beam * intra + primary_interference)
}

fn beam_alignments(
    user: usize,
    forward: &ComplexMatrix,
    beams: &ComplexMatrix,
) -> Vec<f64> {
    (0..beams.cols())
        .map(|k| forward.row_dot_col(user, beams, k).norm_sqr())
        .collect()
}

/// SINR of `user` on `beam`:
/// `(P/m)|h†φ_j|^2 / (1 + (P/m) Σ_{k≠j} |h†φ_k|^2 + g† Q_p g)`.
pub fn sinr(
    user: usize,
    beam: usize,
    forward: &ComplexMatrix,
    beams: &ComplexMatrix,
    power: f64,
    from_primary: &ComplexMatrix,
    q_p: &PrimaryCovariance,
) -> f64 {
    let m = beams.cols() as f64;
    let alignments = beam_alignments(user, forward, beams);
    let g: Vec<Complex64> = from_primary.row(user).to_vec();
    sinr_from_alignments(&alignments, beam, power / m, q_p.quad_form(&g))
}

/// Draw beams, cap the power, assign every beam to its best user, and return
/// the schedule with the per-beam-maximum sum rate
/// `Σ_j log(1 + max_i SINR_{i,j})`.
///
/// One user may win several beams; the reported rate is exactly the
/// per-beam-max sum. The interference delivered to constraint point `l` is
/// `(power/m) |row_l|^2 <= tolerance_l`, with equality when that row's
/// constraint is the binding one.
pub fn assign_and_rate(
    cfg: &SystemConfig,
    chan: &ChannelRealization,
    stream: RandomStream,
) -> (BcSchedule, f64) {
    let m = cfg.secondary_antennas;
    let n = cfg.secondary_users;
    let (power, degenerate_rows) = secondary_tx_power_detail(&chan.to_primary, cfg);
    let beams = sample_haar_beams(stream.substream(0), m);
    let q_p = primary_covariance(cfg);
    let power_per_beam = power / m as f64;

    let mut winners: Vec<(usize, f64)> = vec![(0, f64::NEG_INFINITY); m];
    let mut alignments = vec![0.0f64; m];
    for i in 0..n {
        let row = chan.forward.row(i);
        for (k, a) in alignments.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &h) in row.iter().enumerate() {
                acc += h * beams.get(t, k);
            }
            *a = acc.norm_sqr();
        }
        let interference = q_p.quad_form(chan.from_primary.row(i));
        for j in 0..m {
            let s = sinr_from_alignments(&alignments, j, power_per_beam, interference);
            if s > winners[j].1 {
                winners[j] = (i, s);
            }
        }
    }
    let rate = winners.iter().map(|&(_, s)| s.ln_1p()).sum();
    (
        BcSchedule {
            beams,
            power,
            winners,
            degenerate_rows,
        },
        rate,
    )
}

/// SINR of `user` on `beam` together with the sandwich variables
///
/// ```text
/// lower = |h†φ_j|^2 / (m/P + θ(Σ_{k≠j}|h†φ_k|^2 + |g|^2))
/// upper = |h†φ_j|^2 / (m/P + θ|g|^2)
/// ```
///
/// where `θ = m c / P` and `c` is the primary's per-dimension power, so that
/// `g† Q_p g = c |g|^2`. For `θ >= 1` these bracket the SINR pointwise.
pub fn sinr_sandwich(
    user: usize,
    beam: usize,
    chan: &ChannelRealization,
    beams: &ComplexMatrix,
    power: f64,
    cfg: &SystemConfig,
) -> SinrSandwich {
    let m = cfg.secondary_antennas as f64;
    let q_p = primary_covariance(cfg);
    let theta = m * q_p.scale / power;
    let alignments = beam_alignments(user, &chan.forward, beams);
    let mut intra = 0.0;
    for (k, &a) in alignments.iter().enumerate() {
        if k != beam {
            intra += a;
        }
    }
    let gain_sq: f64 = chan.from_primary.row_norm_sq(user);
    let signal = alignments[beam];
    let c = m / power;
    SinrSandwich {
        lower: signal / (c + theta * (intra + gain_sq)),
        sinr: sinr_from_alignments(&alignments, beam, power / m, q_p.scale * gain_sq),
        upper: signal / (c + theta * gain_sq),
        theta,
    }
}

/// Logarithmically shrinking interference schedule: `gamma0 * (log n)^(-q)`.
/// Requires `n >= 3` so the logarithm exceeds one, and `0 <= q < 1`.
pub fn gamma_log_law(gamma0: f64, q: f64, n: usize) -> Result<f64> {
    if n <= 2 {
        return Err(Error::InvalidParameter(format!(
            "log-law schedule needs n >= 3, got {n}"
        )));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "log-law exponent must lie in [0, 1), got {q}"
        )));
    }
    Ok(gamma0 * (n as f64).ln().powf(-q))
}
