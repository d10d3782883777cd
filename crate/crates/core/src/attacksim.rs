//! Monte Carlo attacker.
//!
//! The eavesdropper heterodynes both polarization modes of the transmitted
//! state `|beta e^{-i phi/2}>_x |beta e^{i phi/2}>_y`, i.e. samples its
//! two-mode Husimi Q function: `gamma_x = beta e^{-i phi/2} + w_x` and
//! `gamma_y = beta e^{i phi/2} + w_y` with independent complex Gaussian
//! noise of unit total variance (1/2 per quadrature). The reported phase is
//! `z = arg(gamma_y conj(gamma_x))`.
//!
//! Up to terms that do not depend on `phi` the log-likelihood is
//! `2 beta Re(gamma_x e^{i phi/2} + gamma_y e^{-i phi/2})`, which drives both
//! the per-bit MAP decision and the exhaustive key search.
//!
//! Randomness: trial `t` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `t`. Within a trial each
//! symbol draws, in order, its bit (`random::<bool>`), its basis
//! (`random_range(0..M)`, joint attacks only), then the x and y noise as
//! four standard normals (re_x, im_x, re_y, im_y).

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deltarho::SignalParams;
use crate::encoding::{signal_phase, PhaseAlphabet};
use crate::error::{Error, Result};
use crate::numkernel::C64;

pub const MAX_KEY_BITS: u32 = 24;

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Heterodyne outcome on the two polarization modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeterodyneOutcome {
    pub gamma_x: C64,
    pub gamma_y: C64,
}

impl HeterodyneOutcome {
    /// Noise-free outcome of a signal at phase `phi`.
    pub fn noiseless(phi: f64, params: &SignalParams) -> Self {
        let beta = params.beta();
        Self {
            gamma_x: C64::from_polar(beta, -0.5 * phi),
            gamma_y: C64::from_polar(beta, 0.5 * phi),
        }
    }

    /// Relative phase `arg(gamma_y conj(gamma_x))` in `[0, 2pi)`.
    pub fn phase(&self) -> f64 {
        let z = (self.gamma_y * self.gamma_x.conj()).arg().rem_euclid(TAU);
        if z >= TAU {
            0.0
        } else {
            z
        }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Heterodyne both modes of the signal `(bit, k)`.
pub fn sample_heterodyne<R: Rng + ?Sized>(
    bit: u8,
    k: usize,
    a: &PhaseAlphabet,
    params: &SignalParams,
    rng: &mut R,
) -> Result<HeterodyneOutcome> {
    let clean = HeterodyneOutcome::noiseless(signal_phase(bit, k, a)?, params);
    let wx = complex_normal(rng);
    let wy = complex_normal(rng);
    Ok(HeterodyneOutcome {
        gamma_x: clean.gamma_x + wx,
        gamma_y: clean.gamma_y + wy,
    })
}

/// Measured phase `z` of one heterodyne shot on signal `(bit, k)`.
pub fn sample_measurement<R: Rng + ?Sized>(
    bit: u8,
    k: usize,
    a: &PhaseAlphabet,
    params: &SignalParams,
    rng: &mut R,
) -> Result<f64> {
    Ok(sample_heterodyne(bit, k, a, params, rng)?.phase())
}

/// Exact log-density of an outcome given the modulation phase.
pub fn log_likelihood(o: &HeterodyneOutcome, phi: f64, params: &SignalParams) -> f64 {
    let clean = HeterodyneOutcome::noiseless(phi, params);
    -2.0 * PI.ln() - (o.gamma_x - clean.gamma_x).norm_sqr() - (o.gamma_y - clean.gamma_y).norm_sqr()
}

/// Precomputed `e^{i phi(j,k)/2}` for fast likelihood scoring.
#[derive(Clone, Debug)]
pub struct PhaseDecoder {
    two_beta: f64,
    half_phases: Vec<[C64; 2]>,
}

impl PhaseDecoder {
    pub fn new(a: &PhaseAlphabet, params: &SignalParams) -> Self {
        let half_phases = (0..a.bases())
            .map(|k| {
                let h = |bit| C64::from_polar(1.0, 0.5 * signal_phase(bit, k, a).expect("k < M"));
                [h(0), h(1)]
            })
            .collect();
        Self {
            two_beta: 2.0 * params.beta(),
            half_phases,
        }
    }

    pub fn bases(&self) -> usize {
        self.half_phases.len()
    }

    /// Log-likelihood of `(bit, k)` up to a `phi`-independent constant.
    pub fn score(&self, o: &HeterodyneOutcome, bit: u8, k: usize) -> f64 {
        let u = self.half_phases[k][bit as usize];
        self.two_beta * (o.gamma_x * u + o.gamma_y * u.conj()).re
    }

    /// `log sum_k exp(score(bit, k))` for bits 0 and 1.
    pub fn bit_log_evidence(&self, o: &HeterodyneOutcome) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (bit, slot) in out.iter_mut().enumerate() {
            let (mut top, mut sum) = (f64::NEG_INFINITY, 0.0);
            for k in 0..self.bases() {
                let s = self.score(o, bit as u8, k);
                if s > top {
                    sum = sum * (top - s).exp() + 1.0;
                    top = s;
                } else {
                    sum += (s - top).exp();
                }
            }
            *slot = top + sum.ln();
        }
        out
    }

    /// MAP bit under a uniform basis prior; ties go to 0.
    pub fn decide(&self, o: &HeterodyneOutcome) -> u8 {
        let [e0, e1] = self.bit_log_evidence(o);
        u8::from(e1 > e0)
    }

    /// `max_j score(j, k)` for every basis.
    pub fn best_bit_scores(&self, o: &HeterodyneOutcome) -> Vec<f64> {
        (0..self.bases())
            .map(|k| self.score(o, 0, k).max(self.score(o, 1, k)))
            .collect()
    }
}

pub fn map_bit_decision(o: &HeterodyneOutcome, a: &PhaseAlphabet, params: &SignalParams) -> u8 {
    PhaseDecoder::new(a, params).decide(o)
}

/// Simulated measurement record of a symbol sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSequence {
    pub z: Vec<f64>,
    pub outcomes: Vec<HeterodyneOutcome>,
    pub true_bits: Vec<u8>,
    pub true_bases: Vec<usize>,
    pub seed: u64,
}

/// Measures `bits[i]` sent on `bases[i]`, noise drawn from `trial_rng(seed, stream)`.
pub fn measure_sequence(
    bits: &[u8],
    bases: &[usize],
    a: &PhaseAlphabet,
    params: &SignalParams,
    seed: u64,
    stream: u64,
) -> Result<MeasuredSequence> {
    if bits.len() != bases.len() {
        return Err(Error::domain("bits and bases must have equal length"));
    }
    let mut rng = trial_rng(seed, stream);
    let outcomes = bits
        .iter()
        .zip(bases)
        .map(|(&b, &k)| sample_heterodyne(b, k, a, params, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasuredSequence {
        z: outcomes.iter().map(HeterodyneOutcome::phase).collect(),
        outcomes,
        true_bits: bits.to_vec(),
        true_bases: bases.to_vec(),
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub success_rate: f64,
    pub trials: u64,
    /// `1.96 sqrt(p (1 - p) / trials)`.
    pub ci95: f64,
    /// Keys enumerated per search (`2^b`); 0 for attacks without a search.
    pub candidates_tried: u64,
    pub elapsed_seconds: f64,
}

impl AttackResult {
    fn from_counts(successes: u64, trials: u64, candidates_tried: u64, elapsed_seconds: f64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            success_rate: p,
            trials,
            ci95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            candidates_tried,
            elapsed_seconds,
        }
    }

    /// Binomial standard error of the success rate.
    pub fn sigma(&self) -> f64 {
        self.ci95 / 1.96
    }
}

/// Fraction of trials in which `k_bits` independent symbols (uniform bit,
/// uniform basis) are all decided correctly by the MAP rule.
pub fn joint_attack_success(
    k_bits: usize,
    a: &PhaseAlphabet,
    params: &SignalParams,
    trials: u64,
    seed: u64,
) -> Result<AttackResult> {
    if k_bits < 1 {
        return Err(Error::domain("k_bits must be >= 1"));
    }
    if trials < 1 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let start = Instant::now();
    let decoder = PhaseDecoder::new(a, params);
    let m = a.bases();
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut rng = trial_rng(seed, t);
            let mut all = true;
            for _ in 0..k_bits {
                let bit = u8::from(rng.random::<bool>());
                let k = rng.random_range(0..m);
                let o = sample_heterodyne(bit, k, a, params, &mut rng)?;
                all &= decoder.decide(&o) == bit;
            }
            Ok(u64::from(all))
        })
        .sum::<Result<u64>>()?;
    Ok(AttackResult::from_counts(successes, trials, 0, start.elapsed().as_secs_f64()))
}

/// Galois LFSR over `x^32 + x^22 + x^2 + x + 1` (maximal length) that turns
/// a key into a basis sequence.
///
/// The register starts at `key | 0x8000_0000` (keys are below `2^24`, so
/// distinct keys give distinct nonzero states), runs 32 warm-up steps, then
/// each basis index is the next `ceil(log2 M)` output bits, LSB first,
/// reduced mod `M`.
#[derive(Clone, Debug)]
pub struct Keystream {
    state: u32,
}

impl Keystream {
    const TAPS: u32 = 0x8020_0003;

    pub fn new(key: u32) -> Self {
        let mut ks = Self {
            state: key | 0x8000_0000,
        };
        for _ in 0..32 {
            ks.next_bit();
        }
        ks
    }

    #[inline]
    pub fn next_bit(&mut self) -> u32 {
        let out = self.state & 1;
        self.state >>= 1;
        if out == 1 {
            self.state ^= Self::TAPS;
        }
        out
    }

    #[inline]
    pub fn next_index(&mut self, index_bits: u32, m: usize) -> usize {
        let mut v = 0usize;
        for i in 0..index_bits {
            v |= (self.next_bit() as usize) << i;
        }
        v % m
    }
}

fn index_bits(m: usize) -> u32 {
    usize::BITS - (m.max(1) - 1).leading_zeros()
}

/// The first `symbols` basis indices generated by `key`.
pub fn key_to_bases(key: u32, symbols: usize, m: usize) -> Vec<usize> {
    let bits = index_bits(m);
    let mut ks = Keystream::new(key);
    (0..symbols).map(|_| ks.next_index(bits, m)).collect()
}

/// Exhaustive maximum-likelihood key search.
///
/// Each trial draws a `key_bits`-bit key and `symbols` random message bits,
/// sends them on the keyed basis sequence, and scores every candidate key by
/// `sum_i max_j loglik(outcome_i | phi(j, basis_i(candidate)))`. The first
/// best-scoring candidate is the guess. `elapsed_seconds` covers only the
/// candidate enumeration, summed over trials.
pub fn ml_key_search(
    key_bits: u32,
    symbols: usize,
    trials: u64,
    a: &PhaseAlphabet,
    params: &SignalParams,
    seed: u64,
) -> Result<AttackResult> {
    if key_bits < 1 {
        return Err(Error::domain("key_bits must be >= 1"));
    }
    if key_bits > MAX_KEY_BITS {
        return Err(Error::Resource(format!(
            "key search limited to {MAX_KEY_BITS} bits, got {key_bits}"
        )));
    }
    if symbols < 1 || trials < 1 {
        return Err(Error::domain("symbols and trials must be >= 1"));
    }
    let m = a.bases();
    let bits = index_bits(m);
    let decoder = PhaseDecoder::new(a, params);
    let candidates = 1u64 << key_bits;
    let mut successes = 0;
    let mut elapsed = 0.0;

    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let key = rng.random_range(0..candidates) as u32;
        let message: Vec<u8> = (0..symbols).map(|_| u8::from(rng.random::<bool>())).collect();
        let bases = key_to_bases(key, symbols, m);
        let outcomes = message
            .iter()
            .zip(&bases)
            .map(|(&b, &k)| sample_heterodyne(b, k, a, params, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let table: Vec<f64> = outcomes.iter().flat_map(|o| decoder.best_bit_scores(o)).collect();

        let start = Instant::now();
        let mut best = (f64::NEG_INFINITY, 0u32);
        for cand in 0..candidates as u32 {
            let mut ks = Keystream::new(cand);
            let mut score = 0.0;
            for row in table.chunks_exact(m) {
                score += row[ks.next_index(bits, m)];
            }
            if score > best.0 {
                best = (score, cand);
            }
        }
        elapsed += start.elapsed().as_secs_f64();
        successes += u64::from(best.1 == key);
    }
    Ok(AttackResult::from_counts(successes, trials, candidates, elapsed))
}

/// JSON attack report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackReport {
    pub model: String,
    pub alphabet: PhaseAlphabet,
    pub n_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_bits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_bits: Option<u32>,
    pub trials: u64,
    pub success_rate: f64,
    pub ci95: f64,
    pub candidates_tried: u64,
    /// Wall-clock time; `None` when the report must be reproducible byte for
    /// byte.
    pub elapsed_seconds: Option<f64>,
    pub seed: u64,
}

impl AttackReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
