//! Scenario configuration, channel drawing, primary transmit covariance, and
//! interference measurement — the substrate shared by both schedulers.
//!
//! All powers are expressed relative to unit noise variance (the receiver
//! noise is CN(0, I)), so there is no separate noise parameter.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::rng::{sample_cn_matrix, RandomStream};

/// Operating mode of the licensed primary system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimaryMode {
    /// Downlink: the primary base station transmits to its users.
    Broadcast,
    /// Uplink: the primary users transmit to their base station.
    Mac,
}

/// Operating mode of the secondary system under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondaryMode {
    /// Uplink: many secondary users transmit to the secondary base station.
    Mac,
    /// Downlink: the secondary base station transmits on random beams.
    Broadcast,
}

/// Full scenario description.
///
/// Counts follow the network roles: the primary base station has
/// `primary_antennas`, serves `primary_users` single-antenna users, and the
/// secondary base station has `secondary_antennas` with `secondary_users`
/// single-antenna users.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub primary_antennas: usize,
    pub primary_users: usize,
    pub secondary_antennas: usize,
    pub secondary_users: usize,
    /// Primary base-station broadcast power (used when the primary is a
    /// broadcast channel).
    pub primary_bs_power: f64,
    /// Per-primary-user transmit power (used when the primary is a MAC).
    pub primary_user_power: f64,
    /// Secondary base-station power cap (used when the secondary broadcasts).
    pub secondary_bs_power: f64,
    /// Per-secondary-user power cap (used when the secondary is a MAC).
    pub secondary_user_power: f64,
    /// Interference power each primary user or antenna tolerates.
    pub tolerance: f64,
    /// Optional per-constraint tolerances; when present it overrides the
    /// scalar `tolerance` entry by entry.
    pub per_constraint_tolerance: Option<Vec<f64>>,
    pub primary_mode: PrimaryMode,
    pub secondary_mode: SecondaryMode,
}

impl SystemConfig {
    /// Paper-style default scenario: 4 secondary antennas, 2 primary antennas
    /// and users, all powers 5, tolerance 2.
    pub fn default_scenario(secondary_mode: SecondaryMode, primary_mode: PrimaryMode) -> Self {
        Self {
            primary_antennas: 2,
            primary_users: 2,
            secondary_antennas: 4,
            secondary_users: 1,
            primary_bs_power: 5.0,
            primary_user_power: 5.0,
            secondary_bs_power: 5.0,
            secondary_user_power: 5.0,
            tolerance: 2.0,
            per_constraint_tolerance: None,
            primary_mode,
            secondary_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.primary_antennas == 0
            || self.primary_users == 0
            || self.secondary_antennas == 0
            || self.secondary_users == 0
        {
            return Err(Error::InvalidParameter(
                "antenna and user counts must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("primary_bs_power", self.primary_bs_power),
            ("primary_user_power", self.primary_user_power),
            ("secondary_bs_power", self.secondary_bs_power),
            ("secondary_user_power", self.secondary_user_power),
            ("tolerance", self.tolerance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(list) = &self.per_constraint_tolerance {
            if list.len() != self.constraint_count() {
                return Err(Error::InvalidParameter(format!(
                    "per-constraint tolerance list has {} entries, need {}",
                    list.len(),
                    self.constraint_count()
                )));
            }
            if list.iter().any(|&g| !(g > 0.0)) {
                return Err(Error::InvalidParameter(
                    "per-constraint tolerances must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of interference constraints the primary imposes: one per
    /// primary user (broadcast primary) or per base-station antenna (MAC
    /// primary).
    pub fn constraint_count(&self) -> usize {
        match self.primary_mode {
            PrimaryMode::Broadcast => self.primary_users,
            PrimaryMode::Mac => self.primary_antennas,
        }
    }

    /// Dimension of the primary transmit vector.
    pub fn primary_signal_dim(&self) -> usize {
        match self.primary_mode {
            PrimaryMode::Broadcast => self.primary_antennas,
            PrimaryMode::Mac => self.primary_users,
        }
    }

    /// Tolerance for constraint `l`.
    pub fn tolerance_for(&self, l: usize) -> f64 {
        match &self.per_constraint_tolerance {
            Some(list) => list[l],
            None => self.tolerance,
        }
    }
}

/// One block-fading draw of the three channel matrices.
///
/// Shapes depend on the scenario; every entry is i.i.d. CN(0,1).
///
/// | secondary | `forward` (H)      | `from_primary` (to secondary Rx) | `to_primary` (from secondary Tx) |
/// |-----------|--------------------|----------------------------------|----------------------------------|
/// | MAC       | antennas x users   | antennas x primary dim           | constraints x users              |
/// | broadcast | users x antennas   | users x primary dim              | constraints x antennas           |
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Secondary forward channel. For a MAC secondary, column `i` is user
    /// `i`'s uplink channel; for a broadcast secondary, row `i` is user `i`'s
    /// downlink channel (conjugated receive vector).
    pub forward: ComplexMatrix,
    /// Cross channel from the primary transmitter(s) into the secondary
    /// receiver(s).
    pub from_primary: ComplexMatrix,
    /// Cross channel from the secondary transmitter(s) onto the primary
    /// constraint points.
    pub to_primary: ComplexMatrix,
}

/// Primary transmit covariance: a scaled identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryCovariance {
    pub dim: usize,
    /// Per-dimension transmit power.
    pub scale: f64,
}

impl PrimaryCovariance {
    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::scaled_identity(self.dim, self.scale)
    }

    /// Quadratic form `g† Q_p g` for a cross-channel vector `g`.
    pub fn quad_form(&self, g: &[Complex64]) -> f64 {
        debug_assert_eq!(g.len(), self.dim);
        self.scale * g.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Draw all channel matrices for one transmission block.
///
/// The full user-count forward matrix is drawn even though schedulers use
/// only the selected columns or rows; user selection therefore cannot bias
/// the forward-channel distribution.
pub fn draw_channels(cfg: &SystemConfig, stream: RandomStream) -> ChannelRealization {
    let m = cfg.secondary_antennas;
    let n = cfg.secondary_users;
    let pdim = cfg.primary_signal_dim();
    let ncon = cfg.constraint_count();
    let (h_shape, gs_shape, gp_shape) = match cfg.secondary_mode {
        SecondaryMode::Mac => ((m, n), (m, pdim), (ncon, n)),
        SecondaryMode::Broadcast => ((n, m), (n, pdim), (ncon, m)),
    };
    ChannelRealization {
        forward: sample_cn_matrix(stream.substream(0), h_shape.0, h_shape.1),
        from_primary: sample_cn_matrix(stream.substream(1), gs_shape.0, gs_shape.1),
        to_primary: sample_cn_matrix(stream.substream(2), gp_shape.0, gp_shape.1),
    }
}

/// Primary transmit covariance for the configured mode: `rho_p I` when the
/// primary is a MAC, `(P_p / antennas) I` when it broadcasts.
pub fn primary_covariance(cfg: &SystemConfig) -> PrimaryCovariance {
    match cfg.primary_mode {
        PrimaryMode::Mac => PrimaryCovariance {
            dim: cfg.primary_users,
            scale: cfg.primary_user_power,
        },
        PrimaryMode::Broadcast => PrimaryCovariance {
            dim: cfg.primary_antennas,
            scale: cfg.primary_bs_power / cfg.primary_antennas as f64,
        },
    }
}

/// Interference power delivered to each primary constraint point:
/// entry `l` is `[G Q_s G†]_{l,l}`.
pub fn interference_on_primary(
    to_primary: &ComplexMatrix,
    q_s: &HermitianMatrix,
) -> Result<Vec<f64>> {
    if to_primary.cols() != q_s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cross channel has {} columns but the transmit covariance is {}x{}",
            to_primary.cols(),
            q_s.dim(),
            q_s.dim()
        )));
    }
    let mut out = Vec::with_capacity(to_primary.rows());
    for l in 0..to_primary.rows() {
        let row = to_primary.row(l);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..q_s.dim() {
            for b in 0..q_s.dim() {
                acc += row[a] * q_s.get(a, b) * row[b].conj();
            }
        }
        out.push(acc.re);
    }
    Ok(out)
}
