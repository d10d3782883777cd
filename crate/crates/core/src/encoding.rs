//! Phase alphabets (full wheel and fan) and the structure sums that carry the
//! alphabet geometry into the difference operator.
//!
//! Every angle lives on the grid `pi * r / N_B` with integer `r`: wheel and
//! fan spokes are `pi * (k + N_B * [k odd]) / N_B`. Keeping that integer
//! numerator around lets phase products like `phi_k * d` be reduced exactly
//! before any trigonometry happens.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetKind {
    Wheel,
    Fan,
}

impl std::fmt::Display for AlphabetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlphabetKind::Wheel => "wheel",
            AlphabetKind::Fan => "fan",
        })
    }
}

/// The `M` basis angles of a wheel or fan, in radians, reduced to `[0, 2pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseAlphabet {
    kind: AlphabetKind,
    bases: usize,
    concentration: usize,
    n_b: usize,
    angles: Vec<f64>,
}

/// Numerator of spoke `k` on the `pi / n_b` grid.
fn spoke_numerator(k: usize, n_b: usize) -> u64 {
    (k + if k % 2 == 1 { n_b } else { 0 }) as u64
}

fn grid_angle(numerator: u64, n_b: usize) -> f64 {
    PI * numerator as f64 / n_b as f64
}

/// `exp(-i pi r / den)` for integer `r`, reduced exactly modulo `2 den`.
fn cis_grid(r: i128, den: i128) -> C64 {
    let r = r.rem_euclid(2 * den);
    let theta = PI * r as f64 / den as f64;
    C64::new(theta.cos(), -theta.sin())
}

pub fn wheel_angles(m: usize) -> Result<PhaseAlphabet> {
    if m < 1 {
        return Err(Error::domain("a wheel needs at least one basis"));
    }
    Ok(PhaseAlphabet::build(AlphabetKind::Wheel, m, 1))
}

/// Fan of `m_f` spokes concentrated on `pi / f` of the circle; closest
/// spokes are `pi / N_B` apart with `N_B = f * m_f`.
pub fn fan_angles(m_f: usize, f: usize) -> Result<PhaseAlphabet> {
    if m_f < 1 {
        return Err(Error::domain("a fan needs at least one basis"));
    }
    if f < 1 {
        return Err(Error::domain("fan concentration factor must be >= 1"));
    }
    m_f.checked_mul(f)
        .filter(|&n| n <= 1 << 40)
        .ok_or_else(|| Error::domain(format!("N_B = {m_f} * {f} is too large")))?;
    Ok(PhaseAlphabet::build(AlphabetKind::Fan, m_f, f))
}

impl PhaseAlphabet {
    fn build(kind: AlphabetKind, bases: usize, concentration: usize) -> Self {
        let n_b = bases * concentration;
        let angles = (0..bases)
            .map(|k| grid_angle(spoke_numerator(k, n_b), n_b))
            .collect();
        Self {
            kind,
            bases,
            concentration,
            n_b,
            angles,
        }
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    /// Number of bases `M`.
    pub fn bases(&self) -> usize {
        self.bases
    }

    /// Concentration factor `f` (1 for a wheel).
    pub fn concentration(&self) -> usize {
        self.concentration
    }

    /// Closest-spoke separation denominator `N_B = f * M`.
    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Integer `r` with `phi(bit, k) = pi * r / N_B`, `0 <= r < 2 N_B`.
    pub fn phase_numerator(&self, bit: u8, k: usize) -> u64 {
        let r = spoke_numerator(k, self.n_b) + u64::from(bit) * self.n_b as u64;
        r % (2 * self.n_b as u64)
    }

    /// JSON form with angles printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        let angles: Vec<String> = self.angles.iter().map(|a| format!("{a:.16e}")).collect();
        format!(
            "{{\"kind\":\"{}\",\"M\":{},\"f\":{},\"N_B\":{},\"angles\":[{}]}}",
            self.kind,
            self.bases,
            self.concentration,
            self.n_b,
            angles.join(",")
        )
    }

    /// Parses the JSON form, rebuilding the alphabet from `(kind, M, f)` and
    /// checking the stored angles against it.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            kind: AlphabetKind,
            #[serde(rename = "M")]
            bases: usize,
            f: usize,
            #[serde(rename = "N_B")]
            n_b: usize,
            angles: Vec<f64>,
        }
        let raw: Raw =
            serde_json::from_str(s).map_err(|e| Error::domain(format!("alphabet json: {e}")))?;
        let rebuilt = match raw.kind {
            AlphabetKind::Wheel if raw.f == 1 => wheel_angles(raw.bases)?,
            AlphabetKind::Wheel => return Err(Error::domain("wheel alphabets have f = 1")),
            AlphabetKind::Fan => fan_angles(raw.bases, raw.f)?,
        };
        if rebuilt.n_b != raw.n_b || rebuilt.angles != raw.angles {
            return Err(Error::domain(
                "alphabet json angles or N_B disagree with (kind, M, f)",
            ));
        }
        Ok(rebuilt)
    }
}

impl Serialize for PhaseAlphabet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("PhaseAlphabet", 5)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field("M", &self.bases)?;
        s.serialize_field("f", &self.concentration)?;
        s.serialize_field("N_B", &self.n_b)?;
        s.serialize_field("angles", &self.angles)?;
        s.end()
    }
}

/// Physical phase `phi(j, k) = phi_k + j pi`, reduced to `[0, 2pi)`.
pub fn signal_phase(bit: u8, k: usize, a: &PhaseAlphabet) -> Result<f64> {
    if bit > 1 {
        return Err(Error::domain(format!("bit must be 0 or 1, got {bit}")));
    }
    if k >= a.bases {
        return Err(Error::domain(format!(
            "basis index {k} out of range for M = {}",
            a.bases
        )));
    }
    Ok(grid_angle(a.phase_numerator(bit, k), a.n_b))
}

/// `S(d) = (1/M) sum_k exp(-i phi_k d)`.
pub fn structure_sum(a: &PhaseAlphabet, d: i64) -> C64 {
    let n_b = a.n_b as i128;
    let total: C64 = (0..a.bases)
        .map(|k| cis_grid(a.phase_numerator(0, k) as i128 * d as i128, n_b))
        .sum();
    total / a.bases as f64
}

/// `(1/M) sum_k exp(-i phi(bit, k) h / 2)` for integer `h`: the structure sum
/// evaluated at half-integer `d = h/2` on the bit-`bit` phases. With even
/// `h = 2d` and `bit = 0` it equals [`structure_sum`].
///
/// The two-mode states depend on `phi / 2`, so these half-step moments are
/// what the odd photon-number-difference sectors need.
pub fn half_step_moment(a: &PhaseAlphabet, bit: u8, h: i64) -> C64 {
    let den = 2 * a.n_b as i128;
    let total: C64 = (0..a.bases)
        .map(|k| cis_grid(a.phase_numerator(bit, k) as i128 * h as i128, den))
        .sum();
    total / a.bases as f64
}

fn fan_direct_sum(d: i64, m_f: usize, n_b: usize) -> C64 {
    let total: C64 = (0..m_f)
        .map(|k| cis_grid(spoke_numerator(k, n_b) as i128 * d as i128, n_b as i128))
        .sum();
    total / m_f as f64
}

/// Closed form of the fan structure sum,
///
/// `S(d) = 1/(2M) [ (1 - (-y)^M)/(1 + y) (1 - y^N_B) + (1 - y^M)/(1 - y) (1 + y^N_B) ]`
///
/// with `y = exp(-i pi d / N_B)` and `M = m_f` spokes. `y^N_B = (-1)^d`
/// selects the odd-`d` (first) or even-`d` (second) geometric series, so
/// the result equals the direct `(1/M_f) sum_k exp(-i phi_k d)`. At `y = +-1`
/// the direct sum is used.
pub fn structure_sum_closed_fan(d: i64, m_f: usize, n_b: usize) -> Result<C64> {
    if m_f < 1 {
        return Err(Error::domain("M_f must be >= 1"));
    }
    if n_b < m_f {
        return Err(Error::domain(format!("N_B = {n_b} must be >= M_f = {m_f}")));
    }
    let nb = n_b as i128;
    let d = d as i128;
    if d.rem_euclid(nb) == 0 {
        return Ok(fan_direct_sum(d as i64, m_f, n_b));
    }
    let one = C64::new(1.0, 0.0);
    let y = cis_grid(d, nb);
    let y_m = cis_grid(d * m_f as i128, nb);
    let neg_y_m = if m_f.is_multiple_of(2) { y_m } else { -y_m };
    let y_nb = cis_grid(d * nb, nb);
    let odd_branch = (one - neg_y_m) / (one + y) * (one - y_nb);
    let even_branch = (one - y_m) / (one - y) * (one + y_nb);
    Ok((odd_branch + even_branch) / (2.0 * m_f as f64))
}
