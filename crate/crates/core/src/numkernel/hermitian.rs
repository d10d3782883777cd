use faer::{Mat, Side};

use super::C64;
use crate::error::{Error, Result};

/// Dense Hermitian matrix, row-major. Hermiticity is exact: the lower
/// triangle is always the conjugate of the upper one and the diagonal is real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Builds the matrix from its upper triangle (`row <= col`). Imaginary
    /// parts requested on the diagonal are dropped.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(f(i, i).re, 0.0);
            for j in i + 1..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v.conj();
            }
        }
        m
    }

    /// Wraps row-major data, rejecting anything that is not exactly Hermitian.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                if data[i * dim + j] != data[j * dim + i].conj() {
                    return Err(Error::Invariant(format!(
                        "entry ({i},{j}) is not the conjugate of ({j},{i})"
                    )));
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self += weight * |v><v|`.
    pub fn add_outer(&mut self, v: &[C64], weight: f64) {
        assert_eq!(v.len(), self.dim, "vector length must match dim");
        let n = self.dim;
        for i in 0..n {
            let vi = v[i] * weight;
            if vi == C64::new(0.0, 0.0) {
                continue;
            }
            self.data[i * n + i].re += (vi * v[i].conj()).re;
            for j in i + 1..n {
                let u = vi * v[j].conj();
                self.data[i * n + j] += u;
                self.data[j * n + i] += u.conj();
            }
        }
    }

    /// `P H P^T` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[perm[i] * n + perm[j]] = self.data[i * n + j];
            }
        }
        Self { dim: n, data }
    }
}

const DUMP_MAGIC: &str = "# y00 hermitian dump v1";

impl HermitianMatrix {
    /// Debug dump: one ASCII header line
    /// `# y00 hermitian dump v1 dim=<n> layout=row-major complex=f64-re,f64-im endian=little label=<label>`
    /// followed by `n*n` (re, im) pairs as little-endian f64.
    pub fn write_dump<W: std::io::Write>(&self, mut w: W, label: &str) -> Result<()> {
        let label = label.replace('\n', " ");
        writeln!(
            w,
            "{DUMP_MAGIC} dim={} layout=row-major complex=f64-re,f64-im endian=little label={label}",
            self.dim
        )?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a dump written by [`HermitianMatrix::write_dump`]; returns the
    /// matrix and its label.
    pub fn read_dump<R: std::io::BufRead>(mut r: R) -> Result<(Self, String)> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let header = header.trim_end();
        let rest = header
            .strip_prefix(DUMP_MAGIC)
            .ok_or_else(|| Error::domain("not a hermitian dump"))?;
        let (fields, label) = rest.split_once(" label=").unwrap_or((rest, ""));
        let dim = fields
            .split_whitespace()
            .find_map(|f| f.strip_prefix("dim="))
            .and_then(|v| v.parse::<usize>().ok());
        let dim = dim.ok_or_else(|| Error::domain("dump header lacks dim"))?;
        let mut buf = vec![0u8; dim * dim * 16];
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        Ok((Self::from_row_major(dim, data)?, label.to_string()))
    }
}

/// All eigenvalues of `h`, sorted in descending order.
///
/// The result is checked against the trace: `|sum(lambda) - tr(h)|` must stay
/// within `1e-10 * dim * max(1, max|h_ij|)`.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = h.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mat = Mat::<C64>::from_fn(n, n, |i, j| h.get(i, j));
    let mut eig = mat
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical {
            dim: n,
            detail: format!("self-adjoint eigensolver did not converge: {e:?}"),
        })?;
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            dim: n,
            detail: format!("non-finite eigenvalue (max |h_ij| = {:.3e})", h.max_abs()),
        });
    }
    eig.sort_by(|a, b| b.total_cmp(a));

    let sum: f64 = eig.iter().sum();
    let trace = h.trace();
    let tol = 1e-10 * n as f64 * h.max_abs().max(1.0);
    if (sum - trace).abs() > tol {
        return Err(Error::Numerical {
            dim: n,
            detail: format!("eigenvalue sum {sum:e} departs from trace {trace:e}"),
        });
    }
    Ok(eig)
}

/// Sum of the eigenvalues above `1e-13 * dim * max|h_ij|`; anything smaller
/// is treated as part of the numerical null space.
pub fn positive_part_sum(eigenvalues: &[f64], dim: usize, max_abs: f64) -> f64 {
    let floor = 1e-13 * dim as f64 * max_abs;
    eigenvalues.iter().filter(|&&l| l > floor).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal() {
        let h = HermitianMatrix::from_upper_fn(3, |i, j| {
            if i == j {
                c([3.0, -1.0, 0.0][i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert_eq!(ev.len(), 3);
        for (a, b) in ev.iter().zip([3.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_x() {
        let h = HermitianMatrix::from_row_major(
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let r = HermitianMatrix::from_row_major(
            2,
            vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 1.0), c(0.0, 0.0)],
        );
        assert!(matches!(r, Err(Error::Invariant(_))));
        assert!(HermitianMatrix::from_row_major(2, vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn outer_product_stays_hermitian() {
        let v = [c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -1.0)];
        let mut h = HermitianMatrix::zeros(3);
        h.add_outer(&v, 0.5);
        h.add_outer(&[c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0)], -1.0);
        assert!(HermitianMatrix::from_row_major(3, h.as_slice().to_vec()).is_ok());
    }

    #[test]
    fn dump_round_trip() {
        let h = HermitianMatrix::from_upper_fn(3, |i, j| c(i as f64 - 0.5, j as f64 * 0.25));
        let mut buf = Vec::new();
        h.write_dump(&mut buf, "delta rho").unwrap();
        let header_len = buf.iter().position(|&b| b == b'\n').unwrap() + 1;
        assert_eq!(buf.len(), header_len + 9 * 16);
        let (back, label) = HermitianMatrix::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back, h);
        assert_eq!(label, "delta rho");
        assert!(HermitianMatrix::read_dump(&b"nonsense\n"[..]).is_err());
    }

    #[test]
    fn empty_matrix() {
        assert!(hermitian_eigenvalues(&HermitianMatrix::zeros(0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn positive_part_ignores_roundoff() {
        let ev = [0.5, 1e-18, -1e-18, -0.5];
        assert_eq!(positive_part_sum(&ev, 4, 1.0), 0.5);
    }
}
