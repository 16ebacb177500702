//! Threshold-based user selection for the secondary uplink.
//!
//! Interference control is decoupled per user: with at most `k` simultaneous
//! transmitters, each allowed to inflict at most `tolerance / k` on any
//! primary constraint point, the total stays below the tolerance no matter
//! which users are picked. The quota `k` is designed so that the expected
//! number of eligible users matches it, which balances "few users, loose
//! threshold" against "many users, strict threshold".

use crate::linalg::ComplexMatrix;
use crate::model::{
    primary_covariance, ChannelRealization, PrimaryCovariance, SecondaryMode, SystemConfig,
};
use crate::rng::RandomStream;
use crate::linalg::{logdet_hpd, HermitianMatrix};

/// Designed allowable active-user count and the matching per-link quota.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotaDesign {
    /// Real-valued design target for the number of active users.
    pub k_bar: f64,
    /// Per-link interference quota: `tolerance / k_bar`.
    pub alpha: f64,
    /// Integer number of users actually allowed: `floor(k_bar)`.
    pub cap: usize,
}

/// Scheduler output for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct MacSchedule {
    /// Users whose every cross-channel interference falls below the quota.
    pub eligible: Vec<usize>,
    /// The transmitting subset, at most `cap` of the eligible users.
    pub active: Vec<usize>,
    /// On-off power: every active user transmits exactly this.
    pub per_user_power: f64,
}

/// Design the active-user quota for the configured scenario.
///
/// With `K` primary constraints the quota solves `k = n * (alpha/rho)^K`
/// together with `alpha = tolerance / k`, giving
/// `k_bar = (tolerance/rho)^(K/(K+1)) * n^(1/(K+1))`. A broadcast primary
/// contributes one constraint per user; a MAC primary one per base-station
/// antenna (each antenna acting as a virtual user).
pub fn design_quota(cfg: &SystemConfig) -> QuotaDesign {
    debug_assert_eq!(cfg.secondary_mode, SecondaryMode::Mac);
    let k = cfg.constraint_count() as f64;
    let gamma = cfg.tolerance;
    let rho = cfg.secondary_user_power;
    let n = cfg.secondary_users as f64;
    let k_bar = (gamma / rho).powf(k / (k + 1.0)) * n.powf(1.0 / (k + 1.0));
    QuotaDesign {
        k_bar,
        alpha: gamma / k_bar,
        cap: k_bar.floor() as usize,
    }
}

/// Users whose interference on every constraint point stays strictly below
/// the quota: user `i` is eligible iff `rho * |G[j,i]|^2 < alpha` for every
/// row `j`. Returned sorted ascending.
pub fn eligible_set(to_primary: &ComplexMatrix, alpha: f64, user_power: f64) -> Vec<usize> {
    let mut out = Vec::new();
    'user: for i in 0..to_primary.cols() {
        for j in 0..to_primary.rows() {
            if !(user_power * to_primary.get(j, i).norm_sqr() < alpha) {
                continue 'user;
            }
        }
        out.push(i);
    }
    out
}

/// Pick the transmitting subset: all eligible users when at or under the cap,
/// otherwise a uniformly random `cap`-subset chosen without replacement by a
/// partial Fisher–Yates shuffle of the eligible list. Deterministic for a
/// given stream; returned sorted ascending.
pub fn select_active(eligible: &[usize], cap: usize, stream: RandomStream) -> Vec<usize> {
    if eligible.len() <= cap {
        return eligible.to_vec();
    }
    let mut pool = eligible.to_vec();
    let mut smp = stream.sampler();
    for i in 0..cap {
        let j = i + smp.index(pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(cap);
    pool.sort_unstable();
    pool
}

/// Instantaneous sum rate of the active secondary users, in nats:
/// `log det(I + rho H_S H_S† + G_s Q_p G_s†) - log det(I + G_s Q_p G_s†)`.
///
/// `active_forward` holds only the active users' columns. The result is
/// non-negative; an empty active set gives exactly zero.
pub fn mac_sum_rate(
    active_forward: &ComplexMatrix,
    user_power: f64,
    from_primary: &ComplexMatrix,
    q_p: &PrimaryCovariance,
) -> f64 {
    let m = from_primary.rows();
    debug_assert!(active_forward.cols() == 0 || active_forward.rows() == m);
    let mut base = HermitianMatrix::identity(m);
    base.add_scaled_gram(from_primary, q_p.scale);
    let mut full = base.clone();
    full.add_scaled_gram(active_forward, user_power);
    let num = logdet_hpd(&full).expect("I + Gram form is positive definite");
    let den = logdet_hpd(&base).expect("I + Gram form is positive definite");
    num - den
}

/// Run the whole per-block pipeline: quota design, eligibility filtering,
/// random selection, and rate evaluation.
///
/// Every active user clears the per-link quota on every constraint and at
/// most `floor(k_bar)` of them transmit, so the interference delivered to
/// each primary constraint point is strictly below the tolerance whenever
/// anyone transmits at all.
pub fn schedule_and_rate(
    cfg: &SystemConfig,
    chan: &ChannelRealization,
    stream: RandomStream,
) -> (MacSchedule, f64) {
    let quota = design_quota(cfg);
    let rho = cfg.secondary_user_power;
    let eligible = eligible_set(&chan.to_primary, quota.alpha, rho);
    let active = if quota.cap == 0 {
        Vec::new()
    } else {
        select_active(&eligible, quota.cap, stream)
    };
    let h_active = chan.forward.select_cols(&active);
    let q_p = primary_covariance(cfg);
    let rate = mac_sum_rate(&h_active, rho, &chan.from_primary, &q_p);
    (
        MacSchedule {
            eligible,
            active,
            per_user_power: rho,
        },
        rate,
    )
}

/// Polynomially shrinking interference schedule: `gamma0 * n^(-q)`.
pub fn gamma_power_law(gamma0: f64, q: f64, n: usize) -> f64 {
    debug_assert!(gamma0 > 0.0 && q >= 0.0);
    gamma0 * (n as f64).powf(-q)
}

/// Probability that one user is eligible under quota `alpha`:
/// `(1 - exp(-alpha/rho))^constraints`. The eligible-set size is then
/// binomial with this success probability.
pub fn eligibility_probability(cfg: &SystemConfig, alpha: f64) -> f64 {
    let base = 1.0 - (-alpha / cfg.secondary_user_power).exp();
    base.powi(cfg.constraint_count() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{draw_channels, interference_on_primary, PrimaryMode};
    use num_complex::Complex64;

    fn mac_cfg(primary: PrimaryMode, n: usize, gamma: f64) -> SystemConfig {
        let mut c = SystemConfig::default_scenario(SecondaryMode::Mac, primary);
        c.secondary_users = n;
        c.tolerance = gamma;
        c
    }

    #[test]
    fn quota_paper_point() {
        let q = design_quota(&mac_cfg(PrimaryMode::Broadcast, 1000, 2.0));
        assert!((q.k_bar - 5.42883523318981).abs() < 1e-9, "k_bar {}", q.k_bar);
        assert!((q.alpha - 0.368403149864039).abs() < 1e-9, "alpha {}", q.alpha);
        assert_eq!(q.cap, 5);
    }

    #[test]
    fn quota_collapses_at_single_user() {
        let mut c = mac_cfg(PrimaryMode::Broadcast, 1, 5.0);
        c.secondary_user_power = 5.0;
        let q = design_quota(&c);
        assert!((q.k_bar - 1.0).abs() < 1e-12);
        assert!((q.alpha - 5.0).abs() < 1e-12);
        assert_eq!(q.cap, 1);
    }

    #[test]
    fn quota_primary_mac_matches_when_symmetric() {
        // With as many primary antennas as users the two designs coincide.
        let qb = design_quota(&mac_cfg(PrimaryMode::Broadcast, 1000, 2.0));
        let qm = design_quota(&mac_cfg(PrimaryMode::Mac, 1000, 2.0));
        assert_eq!(qb, qm);
    }

    #[test]
    fn eligibility_threshold_cases() {
        // Squared magnitudes: col0 = {0.1, 0.2}, col1 = {2.0, 0.01}.
        let g = ComplexMatrix::from_fn(2, 2, |i, j| {
            let sq: f64 = [[0.1, 2.0], [0.2, 0.01]][i][j];
            Complex64::new(sq.sqrt(), 0.0)
        });
        assert_eq!(eligible_set(&g, 0.5, 1.0), vec![0]);
        // quota above every gain: everyone eligible
        assert_eq!(eligible_set(&g, 10.0, 1.0), vec![0, 1]);
        // vanishing quota: nobody
        assert_eq!(eligible_set(&g, 1e-300, 1.0), Vec::<usize>::new());
    }

    #[test]
    fn select_under_quota_keeps_everyone() {
        assert_eq!(select_active(&[1, 2], 5, RandomStream::new(0)), vec![1, 2]);
        assert_eq!(select_active(&[], 3, RandomStream::new(0)), Vec::<usize>::new());
    }

    #[test]
    fn select_is_uniform() {
        let eligible: Vec<usize> = (0..10).collect();
        let mut counts = [0usize; 10];
        let reps = 100_000;
        let s = RandomStream::new(123);
        for t in 0..reps {
            for u in select_active(&eligible, 4, s.substream(t)) {
                counts[u] += 1;
            }
        }
        for (u, &c) in counts.iter().enumerate() {
            let f = c as f64 / reps as f64;
            assert!((f - 0.4).abs() < 0.01, "user {u} frequency {f}");
        }
    }

    #[test]
    fn sum_rate_empty_set_is_zero() {
        let cfg = mac_cfg(PrimaryMode::Broadcast, 4, 2.0);
        let q_p = primary_covariance(&cfg);
        let gs = crate::rng::sample_cn_matrix(RandomStream::new(5), 4, 2);
        let h = ComplexMatrix::zeros(4, 0);
        assert_eq!(mac_sum_rate(&h, 5.0, &gs, &q_p), 0.0);
    }

    #[test]
    fn sum_rate_scalar_case() {
        // One antenna, one user, negligible primary power: log(1 + rho |h|^2).
        let h = ComplexMatrix::from_fn(1, 1, |_, _| Complex64::new(0.6, -0.3));
        let gs = ComplexMatrix::zeros(1, 1);
        let q_p = PrimaryCovariance { dim: 1, scale: 1e-300 };
        let rate = mac_sum_rate(&h, 5.0, &gs, &q_p);
        let expect = (1.0 + 5.0 * (0.36 + 0.09f64)).ln();
        assert!((rate - expect).abs() < 1e-12, "{rate} vs {expect}");
    }

    #[test]
    fn sum_rate_matches_determinant_ratio() {
        // 3x3 brute-force determinant oracle on a random instance.
        let s = RandomStream::new(99);
        let h = crate::rng::sample_cn_matrix(s.substream(0), 3, 2);
        let gs = crate::rng::sample_cn_matrix(s.substream(1), 3, 2);
        let q_p = PrimaryCovariance { dim: 2, scale: 2.5 };
        let rho = 5.0;

        let det3 = |a: &HermitianMatrix| -> f64 {
            let m = |i: usize, j: usize| a.get(i, j);
            let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
            det.re
        };
        let mut base = HermitianMatrix::identity(3);
        base.add_scaled_gram(&gs, q_p.scale);
        let mut full = base.clone();
        full.add_scaled_gram(&h, rho);
        let expect = (det3(&full) / det3(&base)).ln();

        let rate = mac_sum_rate(&h, rho, &gs, &q_p);
        assert!((rate - expect).abs() < 1e-9, "{rate} vs {expect}");
    }

    #[test]
    fn schedule_silent_when_cap_zero() {
        // tolerance far below per-user power: k_bar < 1 and nobody transmits
        let cfg = mac_cfg(PrimaryMode::Broadcast, 3, 1e-3);
        assert_eq!(design_quota(&cfg).cap, 0);
        let chan = draw_channels(&cfg, RandomStream::new(8));
        let (sched, rate) = schedule_and_rate(&cfg, &chan, RandomStream::new(9));
        assert!(sched.active.is_empty());
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn schedule_interference_stays_strictly_below_tolerance() {
        let cfg = mac_cfg(PrimaryMode::Broadcast, 300, 2.0);
        let s = RandomStream::new(2024);
        for t in 0..1000u64 {
            let chan = draw_channels(&cfg, s.substream(t).substream(0));
            let (sched, _) = schedule_and_rate(&cfg, &chan, s.substream(t).substream(1));
            let gp = chan.to_primary.select_cols(&sched.active);
            let q_s = HermitianMatrix::scaled_identity(sched.active.len(), sched.per_user_power);
            for v in interference_on_primary(&gp, &q_s).unwrap() {
                assert!(v < cfg.tolerance, "trial {t}: interference {v}");
            }
        }
    }

    #[test]
    fn schedule_rate_is_reconstructible() {
        let cfg = mac_cfg(PrimaryMode::Mac, 50, 2.0);
        let s = RandomStream::new(31);
        let chan = draw_channels(&cfg, s.substream(0));
        let (sched, rate) = schedule_and_rate(&cfg, &chan, s.substream(1));
        let recomputed = mac_sum_rate(
            &chan.forward.select_cols(&sched.active),
            sched.per_user_power,
            &chan.from_primary,
            &primary_covariance(&cfg),
        );
        assert_eq!(rate, recomputed);
    }

    #[test]
    fn eligible_count_is_binomial() {
        let cfg = mac_cfg(PrimaryMode::Broadcast, 2000, 2.0);
        let quota = design_quota(&cfg);
        let p = eligibility_probability(&cfg, quota.alpha);
        let trials = 2000u64;
        let s = RandomStream::new(55);
        let mut total = 0usize;
        for t in 0..trials {
            let chan = draw_channels(&cfg, s.substream(t));
            total += eligible_set(&chan.to_primary, quota.alpha, cfg.secondary_user_power).len();
        }
        let n = cfg.secondary_users as f64;
        let mean = total as f64 / trials as f64;
        let sigma = (n * p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (mean - n * p).abs() < 3.0 * sigma,
            "|A| mean {mean} vs np {} (3 sigma {})",
            n * p,
            3.0 * sigma
        );
    }

    #[test]
    fn selection_never_looks_at_forward_channel() {
        // Mean square of the selected users' forward coefficients stays 1.
        let cfg = mac_cfg(PrimaryMode::Broadcast, 500, 2.0);
        let s = RandomStream::new(66);
        let mut acc = 0.0;
        let mut count = 0usize;
        for t in 0..500u64 {
            let chan = draw_channels(&cfg, s.substream(t).substream(0));
            let (sched, _) = schedule_and_rate(&cfg, &chan, s.substream(t).substream(1));
            let h = chan.forward.select_cols(&sched.active);
            for j in 0..h.cols() {
                acc += h.col_norm_sq(j);
                count += h.rows();
            }
        }
        let mean_sq = acc / count as f64;
        // var(|entry|^2) = 1, so 3 sigma over `count` samples:
        let three_sigma = 3.0 / (count as f64).sqrt();
        assert!(
            (mean_sq - 1.0).abs() < three_sigma,
            "selected-channel mean square {mean_sq} ({count} entries)"
        );
    }

    #[test]
    fn larger_tolerance_never_shrinks_the_schedule() {
        let s = RandomStream::new(7);
        for t in 0..50u64 {
            let cfg_small = mac_cfg(PrimaryMode::Broadcast, 200, 1.0);
            let cfg_large = mac_cfg(PrimaryMode::Broadcast, 200, 3.0);
            let chan = draw_channels(&cfg_small, s.substream(t));
            let qs = design_quota(&cfg_small);
            let ql = design_quota(&cfg_large);
            assert!(ql.cap >= qs.cap);
            let es = eligible_set(&chan.to_primary, qs.alpha, 5.0);
            let el = eligible_set(&chan.to_primary, ql.alpha, 5.0);
            assert!(el.len() >= es.len());
            assert!(es.iter().all(|u| el.contains(u)));
        }
    }

    #[test]
    fn power_law_schedule() {
        assert_eq!(gamma_power_law(2.0, 0.0, 123), 2.0);
        assert!((gamma_power_law(2.0, 0.1, 10_000) - 0.796214341107).abs() < 1e-9);
        assert!((gamma_power_law(2.0, 0.2, 10_000) - 0.316978638492).abs() < 1e-9);
    }
}
