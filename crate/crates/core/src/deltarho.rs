//! Analytic difference operator `rho~_1 - rho~_0` in the photon-number
//! difference basis.
//!
//! The transmitted two-mode state `|beta e^{-i phi/2}>|beta e^{i phi/2}>`
//! decomposes over sectors of fixed `m = n_2 - n_1`:
//!
//! `sum_m e^{i phi m / 2} sqrt(e^{-x} I_|m|(x)) |Phi_{m/2}>>`, `x = <n> = 2 |beta|^2`,
//!
//! where `|Phi_p>>` is the normalized superposition of `|J - p>|J + p>`.
//! Averaging the bit-1 and bit-0 projectors over the bases gives the
//! coefficient matrix
//!
//! `c_{m m'} = w_m w_m' [ H_1(m' - m) - H_0(m' - m) ]`,
//! `H_j(h) = (1/M) sum_k exp(-i phi(j, k) h / 2)`.
//!
//! On even differences `m' - m = 2 (q - p)` this is
//! `-2 [(1 - (-1)^{q-p}) / 2] w w S(q - p)`, the textbook integer-`p` form.
//! Odd differences (half-integer `p`) are kept as well: without them the
//! matrix describes only part of the state and disagrees with the Fock-space
//! result.

use serde::{Deserialize, Serialize};

use crate::encoding::{half_step_moment, structure_sum, structure_sum_closed_fan, AlphabetKind, PhaseAlphabet};
use crate::error::{Error, Result};
use crate::numkernel::{HermitianMatrix, ScaledBesselTable, C64};

/// Default Bessel tail tolerance used to pick the truncation order.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-14;

/// Mean photon number per bit and the derived split amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalParams {
    n_mean: f64,
}

impl SignalParams {
    pub fn new(n_mean: f64) -> Result<Self> {
        if !n_mean.is_finite() || n_mean < 0.0 {
            return Err(Error::domain(format!(
                "mean photon number must be finite and >= 0, got {n_mean}"
            )));
        }
        Ok(Self { n_mean })
    }

    /// `<n> = |alpha|^2`.
    pub fn n_mean(&self) -> f64 {
        self.n_mean
    }

    /// `|beta|^2 = <n> / 2` (equal split, `mu = nu = 1/sqrt 2`).
    pub fn beta_sq(&self) -> f64 {
        self.n_mean / 2.0
    }

    pub fn beta(&self) -> f64 {
        self.beta_sq().sqrt()
    }
}

/// Smallest `P >= 1` with `e^{-x} I_{2P}(x) < tol`.
pub fn truncation_order(params: &SignalParams, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain(format!("truncation tolerance must be in (0, 1), got {tol}")));
    }
    let x = params.n_mean();
    // Gaussian envelope exp(-n^2 / 2x) as a first guess for the table size
    let mut max_order = 16 + (2.0 * (x + 1.0) * (1.0 / tol).ln()).sqrt().ceil() as usize;
    loop {
        let table = ScaledBesselTable::new(x, max_order)?;
        if let Some(p) = (1..=max_order / 2).find(|&p| table.values()[2 * p] < tol) {
            return Ok(p);
        }
        max_order *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationWarning {
    pub order: usize,
    pub tail_bound: f64,
    pub tolerance: f64,
}

impl std::fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "truncation order {} leaves Bessel tail {:.3e} above tolerance {:.3e}",
            self.order, self.tail_bound, self.tolerance
        )
    }
}

/// `rho~_1 - rho~_0` in the orthonormal `|Phi_p>>` basis, `p` running over
/// `{-P, -P + 1/2, ..., P}`. Row `r` holds `m = 2p = r - 2P`.
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    order: usize,
    matrix: HermitianMatrix,
    params: SignalParams,
    alphabet: PhaseAlphabet,
    tail_bound: f64,
    warning: Option<TruncationWarning>,
}

impl CoefficientMatrix {
    /// Truncation order `P`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn entries(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// Entry between sectors `m = 2p` and `m' = 2q`; `None` outside `[-2P, 2P]`.
    pub fn entry(&self, m: i64, m_prime: i64) -> Option<C64> {
        let span = 2 * self.order as i64;
        if m.abs() > span || m_prime.abs() > span {
            return None;
        }
        Some(self.matrix.get((m + span) as usize, (m_prime + span) as usize))
    }

    pub fn params(&self) -> &SignalParams {
        &self.params
    }

    pub fn alphabet(&self) -> &PhaseAlphabet {
        &self.alphabet
    }

    /// Two-sided Bessel mass dropped by the truncation,
    /// `2 sum_{m > 2P} e^{-x} I_m(x)`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn warning(&self) -> Option<&TruncationWarning> {
        self.warning.as_ref()
    }

    /// Checks Hermiticity, the zero diagonal, the zeros on even `q - p` and
    /// the zero trace, all exactly.
    pub fn verify_structure(&self) -> Result<()> {
        let n = self.dim();
        let h = &self.matrix;
        let mut trace = 0.0;
        for i in 0..n {
            trace += h.get(i, i).re;
            for j in 0..n {
                let v = h.get(i, j);
                if v != h.get(j, i).conj() {
                    return Err(Error::Invariant(format!("c({i},{j}) breaks Hermiticity")));
                }
                let h_diff = j as i64 - i as i64;
                if h_diff.rem_euclid(4) == 0 && v != C64::new(0.0, 0.0) {
                    return Err(Error::Invariant(format!(
                        "c({i},{j}) should vanish (q - p = {} is even)",
                        h_diff / 2
                    )));
                }
            }
        }
        if trace != 0.0 {
            return Err(Error::Invariant(format!("trace is {trace:e}, not 0")));
        }
        Ok(())
    }
}

/// `D(h) = H_1(h) - H_0(h)` for `h = 0..=max_h`.
fn moment_differences(a: &PhaseAlphabet, max_h: usize) -> Result<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    (0..=max_h as i64)
        .map(|h| {
            if h % 2 == 1 {
                return Ok(half_step_moment(a, 1, h) - half_step_moment(a, 0, h));
            }
            let d = h / 2;
            if d % 2 == 0 {
                return Ok(zero);
            }
            let s = match a.kind() {
                AlphabetKind::Fan => structure_sum_closed_fan(d, a.bases(), a.n_b())?,
                AlphabetKind::Wheel => structure_sum(a, d),
            };
            Ok(s * -2.0)
        })
        .collect()
}

/// Builds the coefficient matrix at truncation order `order`. A
/// [`TruncationWarning`] is attached when the dropped Bessel mass exceeds
/// `tol`.
pub fn build_coefficient_matrix(
    a: &PhaseAlphabet,
    params: &SignalParams,
    order: usize,
    tol: f64,
) -> Result<CoefficientMatrix> {
    if order < 1 {
        return Err(Error::domain("truncation order must be >= 1"));
    }
    let span = 2 * order;
    let dim = 2 * span + 1;
    let table = ScaledBesselTable::new(params.n_mean(), span)?;
    let weights: Vec<f64> = (0..dim)
        .map(|r| table.values()[(r as i64 - span as i64).unsigned_abs() as usize].sqrt())
        .collect();
    let diffs = moment_differences(a, 2 * span)?;

    let matrix = HermitianMatrix::from_upper_fn(dim, |i, j| diffs[j - i] * (weights[i] * weights[j]));
    let tail_bound = table.tail_tol();
    let warning = (tail_bound > tol).then_some(TruncationWarning {
        order,
        tail_bound,
        tolerance: tol,
    });
    let c = CoefficientMatrix {
        order,
        matrix,
        params: *params,
        alphabet: a.clone(),
        tail_bound,
        warning,
    };
    c.verify_structure()?;
    Ok(c)
}

/// Smallest order whose dropped sector amplitudes `sqrt(e^{-x} I_{2P}(x))`
/// are below `tol`, i.e. `truncation_order(params, tol^2)`.
///
/// `sum lambda_+` responds to truncation linearly in the dropped amplitudes,
/// so cutting on the Bessel mass alone leaves errors near `sqrt(tol)`.
pub fn converged_order(params: &SignalParams, tol: f64) -> Result<usize> {
    if !(tol > 1e-150 && tol < 1.0) {
        return Err(Error::domain(format!("truncation tolerance must be in (1e-150, 1), got {tol}")));
    }
    truncation_order(params, tol * tol)
}

/// [`build_coefficient_matrix`] at `converged_order(params, tol)`.
pub fn build_auto(a: &PhaseAlphabet, params: &SignalParams, tol: f64) -> Result<CoefficientMatrix> {
    let order = converged_order(params, tol)?;
    build_coefficient_matrix(a, params, order, tol)
}
