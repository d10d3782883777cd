//! Attacker error probabilities from difference operators, the two-state
//! Helstrom bound, and (M, <n>) sweeps.
//!
//! For equal bit priors the optimal measurement projects onto the positive
//! eigenspace of `rho~_1 - rho~_0`, so `P_e = (1 - sum lambda_+) / 2`. The
//! projector itself is never formed.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deltarho::{build_auto, build_coefficient_matrix, converged_order, CoefficientMatrix, SignalParams};
use crate::encoding::{fan_angles, wheel_angles, AlphabetKind, PhaseAlphabet};
use crate::error::{Error, Result};
use crate::numkernel::{hermitian_eigenvalues, positive_part_sum, HermitianMatrix};

const RANGE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    AnalyticSpectral,
    FockOracle,
    HelstromClosedForm,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::AnalyticSpectral => "analytic_spectral",
            Method::FockOracle => "fock_oracle",
            Method::HelstromClosedForm => "helstrom_closed_form",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

/// A per-bit error probability tagged with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorProbability {
    pub value: f64,
    pub method: Method,
    /// Truncation order `P` (analytic) or per-mode `n_max` (oracle).
    pub truncation: Option<usize>,
    /// One-sigma statistical error, Monte Carlo only.
    pub stat_error: Option<f64>,
}

impl ErrorProbability {
    /// Values within `1e-12` outside `[0, 1/2]` are clamped; anything
    /// further out is an error.
    pub fn new(value: f64, method: Method) -> Result<Self> {
        if !value.is_finite() || !(-RANGE_SLACK..=0.5 + RANGE_SLACK).contains(&value) {
            return Err(Error::Invariant(format!(
                "error probability {value} outside [0, 1/2] ({method})"
            )));
        }
        Ok(Self {
            value: value.clamp(0.0, 0.5),
            method,
            truncation: None,
            stat_error: None,
        })
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = Some(truncation);
        self
    }

    pub fn with_stat_error(mut self, sigma: f64) -> Self {
        self.stat_error = Some(sigma);
        self
    }
}

/// `(1 - sum of positive eigenvalues) / 2` for a trace-zero difference
/// operator.
pub fn spectral_error_probability(delta: &HermitianMatrix, method: Method) -> Result<ErrorProbability> {
    let ev = hermitian_eigenvalues(delta)?;
    let positive = positive_part_sum(&ev, delta.dim(), delta.max_abs());
    ErrorProbability::new(0.5 * (1.0 - positive), method)
}

pub fn attacker_error_probability(c: &CoefficientMatrix) -> Result<ErrorProbability> {
    Ok(spectral_error_probability(c.entries(), Method::AnalyticSpectral)?.with_truncation(c.order()))
}

/// `|<Psi_0|Psi_1>|^2 = exp(-2 <n> (1 - cos(dphi / 2)))` for two signals whose
/// modulation phases differ by `dphi`.
pub fn coherent_overlap_sq(n_mean: f64, delta_phi: f64) -> f64 {
    (-2.0 * n_mean * (1.0 - (0.5 * delta_phi).cos())).exp()
}

/// Helstrom minimum error for two pure states with priors `p0`, `p1`:
/// `(1 - sqrt(1 - 4 p0 p1 |<Psi_0|Psi_1>|^2)) / 2`.
pub fn helstrom_two_state(n_mean: f64, delta_phi: f64, p0: f64, p1: f64) -> Result<ErrorProbability> {
    if !(n_mean >= 0.0) || !n_mean.is_finite() {
        return Err(Error::domain(format!("mean photon number must be >= 0, got {n_mean}")));
    }
    if !(p0 >= 0.0 && p1 >= 0.0) || (p0 + p1 - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("priors must be >= 0 and sum to 1, got {p0} + {p1}")));
    }
    let overlap = coherent_overlap_sq(n_mean, delta_phi);
    let value = 0.5 * (1.0 - (1.0 - 4.0 * p0 * p1 * overlap).max(0.0).sqrt());
    ErrorProbability::new(value, Method::HelstromClosedForm)
}

/// One grid point of a sweep. Failed points keep their coordinates and carry
/// the error message instead of a probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: AlphabetKind,
    pub m: usize,
    pub f: usize,
    pub n_b: usize,
    pub n_mean: f64,
    pub order: Option<usize>,
    pub pe: Option<f64>,
    pub method: Method,
    pub tail_bound: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "kind,M,f,N_B,n_mean,P,pe,method,tail_bound";

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepTable {
    /// CSV with header [`CSV_HEADER`], 17 significant digits, `.` decimal.
    /// Failed rows leave `P`, `pe` and `tail_bound` empty and use the method
    /// `failed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let opt = |v: Option<String>| v.unwrap_or_default();
            let method = if r.error.is_some() {
                "failed".to_string()
            } else {
                r.method.to_string()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.kind,
                r.m,
                r.f,
                r.n_b,
                sci(r.n_mean),
                opt(r.order.map(|p| p.to_string())),
                opt(r.pe.map(sci)),
                method,
                opt(r.tail_bound.map(sci)),
            );
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

fn evaluate(alphabet: Result<PhaseAlphabet>, coords: (AlphabetKind, usize, usize, usize), n_mean: f64, tol: f64) -> SweepRow {
    let (kind, m, f, n_b) = coords;
    let mut row = SweepRow {
        kind,
        m,
        f,
        n_b,
        n_mean,
        order: None,
        pe: None,
        method: Method::AnalyticSpectral,
        tail_bound: None,
        error: None,
    };
    let result = alphabet.and_then(|a| {
        let params = SignalParams::new(n_mean)?;
        let c = build_auto(&a, &params, tol)?;
        let pe = attacker_error_probability(&c)?;
        Ok((c.order(), pe.value, c.tail_bound()))
    });
    match result {
        Ok((order, pe, tail)) => {
            row.order = Some(order);
            row.pe = Some(pe);
            row.tail_bound = Some(tail);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn check_lists(a: &[usize], n: &[f64]) -> Result<()> {
    if a.is_empty() || n.is_empty() {
        return Err(Error::domain("sweep lists must be non-empty"));
    }
    Ok(())
}

/// Wheel sweep; rows ordered by `(M, n_mean)` as given.
pub fn sweep_wheel(m_list: &[usize], n_mean_list: &[f64], tol: f64) -> Result<SweepTable> {
    check_lists(m_list, n_mean_list)?;
    let grid: Vec<(usize, f64)> = m_list
        .iter()
        .flat_map(|&m| n_mean_list.iter().map(move |&n| (m, n)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(m, n)| evaluate(wheel_angles(m), (AlphabetKind::Wheel, m, 1, m), n, tol))
        .collect();
    Ok(SweepTable { rows })
}

/// Fan sweep at fixed closest-spoke separation `pi / N_B`; each `M_f` must
/// divide `N_B` (the concentration factor is `N_B / M_f`).
pub fn sweep_fan(n_b: usize, m_f_list: &[usize], n_mean_list: &[f64], tol: f64) -> Result<SweepTable> {
    check_lists(m_f_list, n_mean_list)?;
    if n_b == 0 {
        return Err(Error::domain("N_B must be >= 1"));
    }
    let grid: Vec<(usize, f64)> = m_f_list
        .iter()
        .flat_map(|&m| n_mean_list.iter().map(move |&n| (m, n)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(m_f, n)| {
            let f = if m_f > 0 { n_b / m_f } else { 0 };
            let alphabet = if m_f == 0 || m_f > n_b || !n_b.is_multiple_of(m_f) {
                Err(Error::domain(format!("M_f = {m_f} must divide N_B = {n_b}")))
            } else {
                fan_angles(m_f, f)
            };
            evaluate(alphabet, (AlphabetKind::Fan, m_f, f, n_b), n, tol)
        })
        .collect();
    Ok(SweepTable { rows })
}

/// Change in `sum lambda_+` when the truncation order grows by 25 %.
pub fn spectrum_shift(a: &PhaseAlphabet, params: &SignalParams, tol: f64) -> Result<f64> {
    let p = converged_order(params, tol)?;
    let bigger = p + (p as f64 * 0.25).ceil() as usize;
    let pe_small = attacker_error_probability(&build_coefficient_matrix(a, params, p, tol)?)?;
    let pe_big = attacker_error_probability(&build_coefficient_matrix(a, params, bigger, tol)?)?;
    // sum lambda_+ = 1 - 2 P_e
    Ok(2.0 * (pe_small.value - pe_big.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltarho::DEFAULT_TRUNCATION_TOL;
    use std::f64::consts::PI;

    #[test]
    fn zero_operator_is_a_coin_flip() {
        let pe = spectral_error_probability(&HermitianMatrix::zeros(5), Method::AnalyticSpectral).unwrap();
        assert_eq!(pe.value, 0.5);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(coherent_overlap_sq(3.7, 0.0), 1.0);
        assert_eq!(coherent_overlap_sq(0.0, 1.3), 1.0);
        assert!((coherent_overlap_sq(1.0, PI) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn helstrom_examples() {
        assert_eq!(helstrom_two_state(0.0, PI, 0.5, 0.5).unwrap().value, 0.5);
        let v = helstrom_two_state(1.0, PI, 0.5, 0.5).unwrap().value;
        assert!((v - 0.5 * (1.0 - (1.0 - (-2.0f64).exp()).sqrt())).abs() < 1e-16);
        assert!((v - 0.035_063_252_483_903_13).abs() < 1e-15);
        // certain prior: no error at all
        assert_eq!(helstrom_two_state(1.0, PI, 1.0, 0.0).unwrap().value, 0.0);
        assert!(helstrom_two_state(1.0, PI, 0.7, 0.7).is_err());
        assert!(helstrom_two_state(-1.0, PI, 0.5, 0.5).is_err());
    }

    #[test]
    fn helstrom_decreases_with_photon_number() {
        let vals: Vec<f64> = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&n| helstrom_two_state(n, PI, 0.5, 0.5).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(*vals.last().unwrap() < 1e-13);
    }

    #[test]
    fn single_basis_matches_helstrom() {
        for n in [0.25, 1.0, 4.0, 10.0] {
            let c = build_auto(&wheel_angles(1).unwrap(), &SignalParams::new(n).unwrap(), DEFAULT_TRUNCATION_TOL).unwrap();
            let spectral = attacker_error_probability(&c).unwrap();
            let closed = helstrom_two_state(n, PI, 0.5, 0.5).unwrap();
            assert!((spectral.value - closed.value).abs() < 1e-8, "n = {n}");
            assert_eq!(spectral.truncation, Some(c.order()));
        }
    }

    #[test]
    fn out_of_range_probability_rejected() {
        assert!(ErrorProbability::new(0.6, Method::MonteCarlo).is_err());
        assert!(ErrorProbability::new(f64::NAN, Method::MonteCarlo).is_err());
        assert_eq!(ErrorProbability::new(-1e-14, Method::MonteCarlo).unwrap().value, 0.0);
    }

    #[test]
    fn wheel_sweep_trends() {
        let t = sweep_wheel(&[1, 2, 4, 8, 16], &[1.0, 4.0], DEFAULT_TRUNCATION_TOL).unwrap();
        assert_eq!(t.rows.len(), 10);
        let col = |n: f64| -> Vec<f64> { t.rows.iter().filter(|r| r.n_mean == n).map(|r| r.pe.unwrap()).collect() };
        for n in [1.0, 4.0] {
            assert!(col(n).windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", col(n));
        }
        for (a, b) in col(1.0).iter().zip(col(4.0)) {
            assert!(b <= *a + 1e-12);
        }
    }

    #[test]
    fn fan_sweep_reports_bad_points_in_row() {
        let t = sweep_fan(16, &[2, 3, 16, 32], &[2.0], DEFAULT_TRUNCATION_TOL).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.failures().count(), 2);
        let csv = t.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.lines().nth(2).unwrap().contains(",failed,"));
        assert!(sweep_fan(16, &[], &[2.0], 1e-14).is_err());
    }

    #[test]
    fn fan_with_full_circle_equals_wheel() {
        let fan = sweep_fan(8, &[8], &[3.0], DEFAULT_TRUNCATION_TOL).unwrap();
        let wheel = sweep_wheel(&[8], &[3.0], DEFAULT_TRUNCATION_TOL).unwrap();
        assert!((fan.rows[0].pe.unwrap() - wheel.rows[0].pe.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn csv_row_format() {
        let t = sweep_wheel(&[2], &[1.0], DEFAULT_TRUNCATION_TOL).unwrap();
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert_eq!(&cols[..4], &["wheel", "2", "1", "2"]);
        assert_eq!(cols[4], "1.0000000000000000e0");
        assert_eq!(cols[7], "analytic_spectral");
    }
}
