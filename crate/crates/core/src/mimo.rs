//! Finite constellations, exhaustive candidate enumeration and random MIMO
//! instances `y = A x + n`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{mat_vec, ComplexMatrix, ComplexVector, C64};
use crate::opcount::NullTally;
use crate::random::{complex_gaussian, gaussian_matrix, gaussian_vector, trial_rng};

/// Default ceiling on `|X|^n`.
pub const DEFAULT_ENUM_CAP: usize = 1 << 20;

/// Environment variable that overrides [`DEFAULT_ENUM_CAP`].
pub const ENUM_CAP_ENV: &str = "QDRD_ENUM_CAP";

/// The enumeration cap from `QDRD_ENUM_CAP`, or the default when unset.
pub fn enum_cap_from_env() -> Result<usize> {
    match std::env::var(ENUM_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("{ENUM_CAP_ENV}={v} is not a positive integer"))
            }),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

/// Square Gray-mapped QAM with unit average energy.
///
/// Point `p` carries label `p`. The upper half of the label bits selects the
/// in-phase level and the lower half the quadrature level, each through a
/// binary-reflected Gray code, so horizontally or vertically adjacent points
/// differ in exactly one bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<C64>,
    labels: Vec<u32>,
    bits_per_symbol: usize,
}

fn gray_decode(mut g: u32) -> u32 {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

pub fn make_qam(order: usize) -> Result<Constellation> {
    let bits = match order {
        4 => 2,
        16 => 4,
        64 => 6,
        _ => return Err(Error::UnsupportedOrder(order)),
    };
    let half = bits / 2;
    let levels = 1u32 << half;
    let mean_energy = 2.0 * ((levels * levels - 1) as f64) / 3.0;
    let scale = 1.0 / mean_energy.sqrt();
    let amplitude = |g: u32| (2.0 * gray_decode(g) as f64 - (levels - 1) as f64) * scale;
    let labels: Vec<u32> = (0..order as u32).collect();
    let points = labels
        .iter()
        .map(|&l| C64::new(amplitude(l >> half), amplitude(l & (levels - 1))))
        .collect();
    Ok(Constellation {
        name: format!("qam{order}"),
        points,
        labels,
        bits_per_symbol: bits,
    })
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qam4" => make_qam(4),
            "qam16" => make_qam(16),
            "qam64" => make_qam(64),
            other => Err(Error::UnknownConstellation(other.to_string())),
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Constellation {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Bit `k` of the label of point `p`, counting from the most significant.
    pub fn label_bit(&self, p: usize, k: usize) -> bool {
        (self.labels[p] >> (self.bits_per_symbol - 1 - k)) & 1 == 1
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Index of the point closest to `z`.
    pub fn nearest(&self, z: C64) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if (p - z).norm_sqr() < (self.points[best] - z).norm_sqr() {
                best = i;
            }
        }
        best
    }
}

/// All `|X|^n` candidate vectors in lexicographic order: candidate `k`
/// writes `k` in base `|X|`, the first symbol being the most significant
/// digit.
#[derive(Clone, Copy, Debug)]
pub struct CandidateSet<'c> {
    constellation: &'c Constellation,
    n: usize,
    len: usize,
}

impl<'c> CandidateSet<'c> {
    pub fn new(constellation: &'c Constellation, n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "vector length n must be at least 1".into(),
            ));
        }
        let order = constellation.order();
        let len = u32::try_from(n)
            .ok()
            .and_then(|e| order.checked_pow(e))
            .filter(|&p| p <= cap)
            .ok_or_else(|| Error::EnumerationCap {
                requested: format!("{order}^{n}"),
                cap,
            })?;
        Ok(CandidateSet {
            constellation,
            n,
            len,
        })
    }

    pub fn constellation(&self) -> &'c Constellation {
        self.constellation
    }

    /// Vector length.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of candidates, `P`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Label bits per candidate vector.
    pub fn label_bits(&self) -> usize {
        self.n * self.constellation.bits_per_symbol()
    }

    /// Symbol indices of candidate `k`.
    pub fn decode_into(&self, mut k: usize, out: &mut [usize]) {
        let order = self.constellation.order();
        for slot in out.iter_mut().rev() {
            *slot = k % order;
            k /= order;
        }
    }

    pub fn symbols(&self, k: usize) -> Vec<usize> {
        let mut s = vec![0; self.n];
        self.decode_into(k, &mut s);
        s
    }

    /// Inverse of [`symbols`](Self::symbols).
    pub fn index_of(&self, symbols: &[usize]) -> usize {
        symbols
            .iter()
            .fold(0, |acc, &s| acc * self.constellation.order() + s)
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        let pts = self.constellation.points();
        self.symbols(k).into_iter().map(|s| pts[s]).collect()
    }

    /// Bit `b` of candidate `k`'s concatenated label (symbol 0's bits first,
    /// each most significant first).
    pub fn bit(&self, k: usize, b: usize) -> bool {
        let bps = self.constellation.bits_per_symbol();
        let order = self.constellation.order();
        let pos = b / bps;
        let sym = (k / order.pow((self.n - 1 - pos) as u32)) % order;
        self.constellation.label_bit(sym, b % bps)
    }
}

/// Every candidate vector of length `n`, in enumeration order.
pub fn enumerate_vectors(c: &Constellation, n: usize, cap: usize) -> Result<Vec<ComplexVector>> {
    let set = CandidateSet::new(c, n, cap)?;
    Ok((0..set.len()).map(|k| set.vector(k)).collect())
}

/// Split of the candidate indices by one label bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitPartition {
    /// Candidates whose addressed bit is 1.
    pub set1: Vec<usize>,
    /// Candidates whose addressed bit is 0.
    pub set2: Vec<usize>,
}

pub fn bit_partitions(
    c: &Constellation,
    n: usize,
    bit_index: usize,
    cap: usize,
) -> Result<BitPartition> {
    let set = CandidateSet::new(c, n, cap)?;
    if bit_index >= set.label_bits() {
        return Err(Error::BitIndexOutOfRange {
            index: bit_index,
            bits: set.label_bits(),
        });
    }
    let (set1, set2) = (0..set.len()).partition(|&k| set.bit(k, bit_index));
    Ok(BitPartition { set1, set2 })
}

/// One realization of `y = A x + n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoInstance {
    pub a: ComplexMatrix,
    pub x_true: ComplexVector,
    /// Constellation indices of `x_true`.
    pub x_symbols: Vec<usize>,
    pub noise_var: f64,
    pub noise: ComplexVector,
    pub y: ComplexVector,
}

/// How the channel matrix is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChannelKind {
    /// i.i.d. CN(0, 1) entries.
    #[default]
    Gaussian,
    /// `[I; 0]`, for which `D' = I`.
    Identity,
}

/// Noise variance giving `snr_db` at each receive antenna for `n` unit-energy
/// streams over a unit-variance channel: `sigma^2 = n / 10^(snr/10)`.
/// `+inf` gives zero noise.
pub fn noise_var_for_snr(n: usize, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        n as f64 / 10f64.powf(snr_db / 10.0)
    }
}

pub fn sample_instance(
    m: usize,
    n: usize,
    snr_db: f64,
    c: &Constellation,
    seed: u64,
) -> Result<MimoInstance> {
    sample_instance_with(m, n, snr_db, c, seed, ChannelKind::Gaussian)
}

/// Draws, in order from one seeded stream: the channel (row-major), the
/// symbol indices, then unit-variance noise that is scaled by `sigma`.
/// Instances that share a seed but differ in SNR share everything except
/// the noise scale.
pub fn sample_instance_with(
    m: usize,
    n: usize,
    snr_db: f64,
    c: &Constellation,
    seed: u64,
    channel: ChannelKind,
) -> Result<MimoInstance> {
    if n == 0 || m < n {
        return Err(Error::InvalidConfig(format!(
            "need m >= n >= 1, got m={m}, n={n}"
        )));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidConfig("SNR must not be NaN".into()));
    }
    let mut rng = trial_rng(seed);
    let a = match channel {
        ChannelKind::Gaussian => gaussian_matrix(&mut rng, m, n),
        ChannelKind::Identity => ComplexMatrix::from_fn(m, n, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            }
        }),
    };
    let x_symbols: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c.order())).collect();
    let x_true: ComplexVector = x_symbols.iter().map(|&s| c.points()[s]).collect();
    let noise_var = noise_var_for_snr(n, snr_db);
    let sigma = noise_var.sqrt();
    let noise: ComplexVector = gaussian_vector(&mut rng, m)
        .iter()
        .map(|z| z * sigma)
        .collect();
    let clean = mat_vec(&mut NullTally, &a, &x_true)?;
    let y = clean.iter().zip(noise.iter()).map(|(s, w)| s + w).collect();
    Ok(MimoInstance {
        a,
        x_true,
        x_symbols,
        noise_var,
        noise,
        y,
    })
}

/// `count` fresh noise vectors of variance `noise_var`, for moment checks.
pub fn sample_noise(m: usize, noise_var: f64, seed: u64, count: usize) -> Vec<ComplexVector> {
    let mut rng = trial_rng(seed);
    let sigma = noise_var.sqrt();
    (0..count)
        .map(|_| (0..m).map(|_| complex_gaussian(&mut rng) * sigma).collect())
        .collect()
}
