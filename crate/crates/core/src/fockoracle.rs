//! Brute-force reference: the attacker's states and their difference built
//! directly in a truncated two-mode Fock space.
//!
//! Nothing here uses Bessel functions or structure sums. Coherent amplitudes
//! come from the number-state expansion, the modulator is applied as the
//! opposite phase rotations `e^{-i J_z phi}` produces on the two
//! polarization modes, and `P_e` comes from a dense eigendecomposition of the
//! full `(n_max + 1)^2`-dimensional operator.

use crate::deltarho::SignalParams;
use crate::discrimination::{spectral_error_probability, ErrorProbability, Method};
use crate::encoding::{signal_phase, PhaseAlphabet};
use crate::error::{Error, Result};
use crate::numkernel::{HermitianMatrix, C64};

/// Largest truncation the single-mode expansion may leave untouched.
pub const MAX_NORM_DEFECT: f64 = 1e-6;
pub const MAX_ORACLE_BASES: usize = 32;
pub const MAX_ORACLE_N_MEAN: f64 = 10.0;
pub const MAX_ORACLE_N_MAX: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeState {
    pub amplitudes: Vec<C64>,
    pub norm_defect: f64,
}

/// Product state over modes x and y, amplitude of `|n1>|n2>` at
/// `n1 * (n_max + 1) + n2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    pub n_max: usize,
    pub amplitudes: Vec<C64>,
    pub norm_defect: f64,
}

impl TwoModeState {
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.n_max + 1) + n2
    }

    pub fn inner(&self, other: &TwoModeState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Photon-number distribution of mode x (`mode = 0`) or y (`mode = 1`).
    pub fn mode_distribution(&self, mode: usize) -> Vec<f64> {
        let d = self.n_max + 1;
        let mut out = vec![0.0; d];
        for n1 in 0..d {
            for n2 in 0..d {
                let p = self.amplitudes[n1 * d + n2].norm_sqr();
                out[if mode == 0 { n1 } else { n2 }] += p;
            }
        }
        out
    }
}

/// Operator on the two-mode space, rows and columns indexed like
/// [`TwoModeState`].
#[derive(Clone, Debug)]
pub struct TwoModeOperator {
    pub n_max: usize,
    pub matrix: HermitianMatrix,
}

fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=n_max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// Poisson mass above `n_max` for mean `mean`, summed term by term.
fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut n = n_max + 1;
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let mut term = (-mean + n as f64 * mean.ln() - ln_fact).exp();
    let mut tail = 0.0;
    loop {
        tail += term;
        n += 1;
        term *= mean / n as f64;
        if term < 1e-18 * tail.max(1e-300) && (n as f64) > mean {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    tail
}

/// Number-state expansion `e^{-|a|^2/2} a^n / sqrt(n!)` for `n <= n_max`.
pub fn coherent_vector(amplitude: C64, n_max: usize) -> Result<SingleModeState> {
    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
        return Err(Error::domain("coherent amplitude must be finite"));
    }
    let mean = amplitude.norm_sqr();
    let mut amplitudes = vec![C64::new(0.0, 0.0); n_max + 1];
    if mean == 0.0 {
        amplitudes[0] = C64::new(1.0, 0.0);
        return Ok(SingleModeState {
            amplitudes,
            norm_defect: 0.0,
        });
    }
    let ln_fact = ln_factorials(n_max);
    let ln_r = amplitude.norm().ln();
    let arg = amplitude.arg();
    for (n, slot) in amplitudes.iter_mut().enumerate() {
        let modulus = (-0.5 * mean + n as f64 * ln_r - 0.5 * ln_fact[n]).exp();
        *slot = C64::from_polar(modulus, n as f64 * arg);
    }
    let norm_defect = poisson_tail(mean, n_max);
    if norm_defect > MAX_NORM_DEFECT {
        return Err(Error::Truncation { n_max, defect: norm_defect });
    }
    Ok(SingleModeState { amplitudes, norm_defect })
}

/// Smallest `n` whose Poisson tail (mean `<n>/2`) is below `1e-12`, times 1.5.
pub fn default_n_max(n_mean: f64) -> usize {
    let mean = n_mean / 2.0;
    let mut n = 0;
    while poisson_tail(mean, n) >= 1e-12 {
        n += 1;
    }
    ((n as f64) * 1.5).ceil().max(1.0) as usize
}

fn check_oracle_range(a: &PhaseAlphabet, params: &SignalParams, n_max: usize) -> Result<()> {
    if a.bases() > MAX_ORACLE_BASES {
        return Err(Error::Resource(format!(
            "Fock oracle limited to M <= {MAX_ORACLE_BASES}, got {}",
            a.bases()
        )));
    }
    if params.n_mean() > MAX_ORACLE_N_MEAN {
        return Err(Error::Resource(format!(
            "Fock oracle limited to <n> <= {MAX_ORACLE_N_MEAN}, got {}",
            params.n_mean()
        )));
    }
    if n_max > MAX_ORACLE_N_MAX {
        return Err(Error::Resource(format!(
            "Fock oracle limited to n_max <= {MAX_ORACLE_N_MAX}, got {n_max}"
        )));
    }
    Ok(())
}

/// `|beta e^{-i phi/2}>_x |beta e^{i phi/2}>_y` with `phi = phi(bit, k)`.
pub fn modulated_state(bit: u8, k: usize, a: &PhaseAlphabet, params: &SignalParams, n_max: usize) -> Result<TwoModeState> {
    let phi = signal_phase(bit, k, a)?;
    let beta = params.beta();
    let x = coherent_vector(C64::from_polar(beta, -0.5 * phi), n_max)?;
    let y = coherent_vector(C64::from_polar(beta, 0.5 * phi), n_max)?;
    let mut amplitudes = Vec::with_capacity((n_max + 1) * (n_max + 1));
    for ax in &x.amplitudes {
        for ay in &y.amplitudes {
            amplitudes.push(ax * ay);
        }
    }
    let norm_defect = x.norm_defect + y.norm_defect - x.norm_defect * y.norm_defect;
    Ok(TwoModeState {
        n_max,
        amplitudes,
        norm_defect,
    })
}

/// `(1/M) sum_k (|Psi(1,k)><Psi(1,k)| - |Psi(0,k)><Psi(0,k)|)`.
pub fn mixed_state_delta(a: &PhaseAlphabet, params: &SignalParams, n_max: usize) -> Result<TwoModeOperator> {
    check_oracle_range(a, params, n_max)?;
    let dim = (n_max + 1) * (n_max + 1);
    let mut matrix = HermitianMatrix::zeros(dim);
    let weight = 1.0 / a.bases() as f64;
    for k in 0..a.bases() {
        let one = modulated_state(1, k, a, params, n_max)?;
        let zero = modulated_state(0, k, a, params, n_max)?;
        matrix.add_outer(&one.amplitudes, weight);
        matrix.add_outer(&zero.amplitudes, -weight);
    }
    Ok(TwoModeOperator { n_max, matrix })
}

pub fn oracle_error_probability(a: &PhaseAlphabet, params: &SignalParams, n_max: usize) -> Result<ErrorProbability> {
    let delta = mixed_state_delta(a, params, n_max)?;
    Ok(spectral_error_probability(&delta.matrix, Method::FockOracle)?.with_truncation(n_max))
}

/// Normalized `sum_{n2 - n1 = m} beta^{n1 + n2} / sqrt(n1! n2!) |n1>|n2>`
/// within the truncated space (positive `beta`).
pub fn difference_sector_vector(m: i64, params: &SignalParams, n_max: usize) -> Vec<C64> {
    let d = n_max + 1;
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    let ln_fact = ln_factorials(n_max);
    let beta = params.beta();
    if beta == 0.0 {
        if m == 0 {
            v[0] = C64::new(1.0, 0.0);
        }
        return v;
    }
    let ln_beta = beta.ln();
    let mut logs = Vec::new();
    for n1 in 0..d {
        let n2 = n1 as i64 + m;
        if n2 < 0 || n2 as usize >= d {
            continue;
        }
        let n2 = n2 as usize;
        logs.push((n1 * d + n2, (n1 + n2) as f64 * ln_beta - 0.5 * (ln_fact[n1] + ln_fact[n2])));
    }
    let top = logs.iter().map(|&(_, l)| l).fold(f64::NEG_INFINITY, f64::max);
    let mut norm = 0.0;
    for &(i, l) in &logs {
        let val = (l - top).exp();
        v[i] = C64::new(val, 0.0);
        norm += val * val;
    }
    let norm = norm.sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    v
}

impl TwoModeOperator {
    /// `<<Phi_p| op |Phi_q>>` for `m = 2p`, `m' = 2q` in `[-2P, 2P]`, using
    /// the sector vectors of [`difference_sector_vector`]. Row `r` holds
    /// `m = r - 2P`.
    pub fn in_difference_basis(&self, params: &SignalParams, order: usize) -> Vec<Vec<C64>> {
        let span = 2 * order as i64;
        let basis: Vec<Vec<C64>> = (-span..=span)
            .map(|m| difference_sector_vector(m, params, self.n_max))
            .collect();
        let dim = self.matrix.dim();
        let applied: Vec<Vec<C64>> = basis
            .iter()
            .map(|v| {
                (0..dim)
                    .map(|i| (0..dim).map(|j| self.matrix.get(i, j) * v[j]).sum())
                    .collect()
            })
            .collect();
        basis
            .iter()
            .map(|u| {
                applied
                    .iter()
                    .map(|av| u.iter().zip(av).map(|(a, b)| a.conj() * b).sum())
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::coherent_overlap_sq;
    use crate::encoding::{fan_angles, wheel_angles};
    use std::f64::consts::PI;

    #[test]
    fn vacuum_vector() {
        let v = coherent_vector(C64::new(0.0, 0.0), 5).unwrap();
        assert_eq!(v.amplitudes[0], C64::new(1.0, 0.0));
        assert!(v.amplitudes[1..].iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(v.norm_defect, 0.0);
    }

    #[test]
    fn unit_amplitude_vector() {
        let v = coherent_vector(C64::new(1.0, 0.0), 20).unwrap();
        assert!((v.amplitudes[0].re - (-0.5f64).exp()).abs() < 1e-16);
        // entry 3 = e^{-1/2} / sqrt(6)
        assert!((v.amplitudes[3].re - (-0.5f64).exp() / 6f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn norm_defect_matches_poisson_tail() {
        let v = coherent_vector(C64::new(2f64.sqrt(), 0.0), 30).unwrap();
        assert!(v.norm_defect <= 1e-10);
        // independent check: 1 - sum of the kept probabilities
        let kept: f64 = v.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        assert!((1.0 - kept - v.norm_defect).abs() < 1e-15);
        let v = coherent_vector(C64::new(2.0, 0.0), 6).unwrap_err();
        assert!(matches!(v, Error::Truncation { n_max: 6, .. }));
    }

    #[test]
    fn modulated_vacuum() {
        let w4 = wheel_angles(4).unwrap();
        let s = modulated_state(0, 0, &w4, &SignalParams::new(0.0).unwrap(), 4).unwrap();
        assert_eq!(s.amplitudes[0], C64::new(1.0, 0.0));
        assert_eq!(s.amplitudes.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn bit_overlap_matches_closed_form() {
        let w4 = wheel_angles(4).unwrap();
        for n in [0.5, 2.0, 5.0] {
            let params = SignalParams::new(n).unwrap();
            for k in 0..4 {
                let s0 = modulated_state(0, k, &w4, &params, 40).unwrap();
                let s1 = modulated_state(1, k, &w4, &params, 40).unwrap();
                let overlap = s0.inner(&s1).norm_sqr();
                assert!((overlap - coherent_overlap_sq(n, PI)).abs() < 1e-10, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn mode_means_are_half_the_total() {
        let a = fan_angles(5, 2).unwrap();
        let params = SignalParams::new(3.0).unwrap();
        let reference = modulated_state(0, 0, &a, &params, 40).unwrap();
        for (bit, k) in [(0u8, 1usize), (1, 3), (1, 4)] {
            let s = modulated_state(bit, k, &a, &params, 40).unwrap();
            for mode in 0..2 {
                let dist = s.mode_distribution(mode);
                let mean: f64 = dist.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
                assert!((mean - 1.5).abs() < 1e-8);
                for (p, q) in dist.iter().zip(reference.mode_distribution(mode)) {
                    assert!((p - q).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn vacuum_delta_is_zero() {
        let d = mixed_state_delta(&wheel_angles(3).unwrap(), &SignalParams::new(0.0).unwrap(), 6).unwrap();
        assert_eq!(d.matrix.max_abs(), 0.0);
        let pe = oracle_error_probability(&wheel_angles(3).unwrap(), &SignalParams::new(0.0).unwrap(), 6).unwrap();
        assert_eq!(pe.value, 0.5);
    }

    #[test]
    fn delta_is_traceless() {
        let d = mixed_state_delta(&fan_angles(4, 2).unwrap(), &SignalParams::new(2.0).unwrap(), 24).unwrap();
        assert!(d.matrix.trace().abs() < 1e-10);
    }

    #[test]
    fn single_basis_eigenvalues_are_a_pure_pair() {
        // |1><1| - |0><0| has eigenvalues +-sqrt(1 - |<0|1>|^2)
        let d = mixed_state_delta(&wheel_angles(1).unwrap(), &SignalParams::new(1.0).unwrap(), 24).unwrap();
        let ev = crate::numkernel::hermitian_eigenvalues(&d.matrix).unwrap();
        let expect = (1.0 - (-2.0f64).exp()).sqrt();
        assert!((ev[0] - expect).abs() < 1e-10);
        assert!((ev[ev.len() - 1] + expect).abs() < 1e-10);
        assert!(ev[1..ev.len() - 1].iter().all(|l| l.abs() < 1e-10));
    }

    #[test]
    fn guardrails() {
        let big = wheel_angles(1 << 10).unwrap();
        let e = oracle_error_probability(&big, &SignalParams::new(1.0).unwrap(), 10).unwrap_err();
        assert!(matches!(e, Error::Resource(_)));
        let e = mixed_state_delta(&wheel_angles(2).unwrap(), &SignalParams::new(50.0).unwrap(), 10).unwrap_err();
        assert!(matches!(e, Error::Resource(_)));
        let e = mixed_state_delta(&wheel_angles(2).unwrap(), &SignalParams::new(1.0).unwrap(), 100).unwrap_err();
        assert!(matches!(e, Error::Resource(_)));
    }

    #[test]
    fn default_truncation() {
        assert_eq!(default_n_max(0.0), 1);
        let n = default_n_max(4.0);
        assert!(poisson_tail(2.0, n) < 1e-12);
        assert!(n <= 40);
    }

    #[test]
    fn difference_sectors_are_orthonormal() {
        let params = SignalParams::new(3.0).unwrap();
        for n_max in [8usize, 20] {
            let vs: Vec<Vec<C64>> = (-6..=6).map(|m| difference_sector_vector(m, &params, n_max)).collect();
            for (i, u) in vs.iter().enumerate() {
                for (j, v) in vs.iter().enumerate() {
                    let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).norm() < 1e-12);
                }
            }
        }
    }
}
