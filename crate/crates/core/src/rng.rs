//! Deterministic pseudorandom sampling.
//!
//! All randomness in the crate flows through [`RandomStream`], a value token
//! naming one ChaCha8 keystream out of 2^64 per seed. Identical
//! `(seed, stream_id)` pairs replay the identical sample sequence on every
//! run and worker layout; distinct stream ids select disjoint keystreams, so
//! substreams can be handed to parallel workers without coordination.
//!
//! Transforms from raw 64-bit words are fixed here rather than inherited from
//! a distributions crate, so the exact output sequence is pinned by this
//! file:
//!
//! * uniform `[0,1)`: top 53 bits scaled by 2^-53 (and `(0,1]` via a +1 offset
//!   before scaling);
//! * standard normals: basic Box–Muller, consuming exactly two words per pair;
//! * circular complex normals: one Box–Muller pair scaled by `1/sqrt(2)`;
//! * unit exponentials: `-ln(u)` with `u` in `(0,1]`;
//! * bounded integers: multiply-free rejection from the high bits.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::ComplexMatrix;

const TWO_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Immutable token naming one pseudorandom stream.
///
/// Substreams are derived, never mutated in place, so a stream value can be
/// copied freely into parallel workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derive the sub-stream labelled `label`.
    ///
    /// Labels are mixed bijectively into the 64-bit stream id, so nested
    /// derivations like `s.substream(n).substream(t)` give well-separated
    /// streams for grid points and trials.
    pub fn substream(self, label: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(label)),
        }
    }

    /// Materialize the sampler for this stream.
    pub fn sampler(self) -> Sampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        Sampler { rng }
    }
}

/// Stateful sampler over one stream's keystream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_NEG_53
    }

    /// Uniform on `(0, 1]`; safe as a logarithm argument.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_NEG_53
    }

    /// Pair of independent standard normals (Box–Muller).
    #[inline]
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Circularly-symmetric complex normal with zero mean and unit variance:
    /// real and imaginary parts independent, each with variance 1/2.
    #[inline]
    pub fn complex_normal(&mut self) -> Complex64 {
        let (a, b) = self.standard_normal_pair();
        Complex64::new(a * std::f64::consts::FRAC_1_SQRT_2, b * std::f64::consts::FRAC_1_SQRT_2)
    }

    /// Unit-mean exponential.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Gamma with integer shape `k` and the given scale (sum of exponentials).
    pub fn gamma_int(&mut self, k: usize, scale: f64) -> f64 {
        let mut acc = 0.0;
        for _ in 0..k {
            acc += self.exp1();
        }
        acc * scale
    }

    /// Uniform integer in `0..n`, by rejection on the high bits.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.rng.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }
}

/// Matrix with i.i.d. circular complex Gaussian entries of unit variance.
pub fn sample_cn_matrix(stream: RandomStream, rows: usize, cols: usize) -> ComplexMatrix {
    let mut s = stream.sampler();
    ComplexMatrix::from_fn(rows, cols, |_, _| s.complex_normal())
}

/// `m` orthonormal beams as the columns of an `m x m` matrix, distributed
/// with Haar measure on the unitary group.
///
/// Realized by modified Gram–Schmidt on an i.i.d. complex Gaussian matrix;
/// the positive-real diagonal normalization built into Gram–Schmidt picks the
/// canonical factor, which makes the result Haar rather than merely unitary.
/// One re-orthogonalization pass keeps the columns orthonormal to well below
/// 1e-12 at the dimensions used here.
pub fn sample_haar_beams(stream: RandomStream, m: usize) -> ComplexMatrix {
    assert!(m >= 1, "at least one beam");
    let a = sample_cn_matrix(stream, m, m);
    let mut cols: Vec<Vec<Complex64>> = (0..m).map(|j| a.col(j)).collect();
    for j in 0..m {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..m).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..m {
                    let upd = cols[k][i] * proj;
                    cols[j][i] -= upd;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..m {
            cols[j][i] /= norm;
        }
    }
    ComplexMatrix::from_fn(m, m, |i, j| cols[j][i])
}
