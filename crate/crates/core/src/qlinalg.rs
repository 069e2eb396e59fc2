//! Dense complex linear algebra for matrices of dimension 1, 2, 4 or 8.
//!
//! Everything here is sized for one to three qubits. Eigenproblems are
//! solved with cyclic Jacobi rotations, which are unconditionally stable
//! for Hermitian input and plenty fast at these sizes.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::{Error, Result};

pub type Complex = num_complex::Complex64;

const ALLOWED_DIMS: [usize; 4] = [1, 2, 4, 8];

/// Maximum entrywise deviation from Hermiticity accepted by the eigensolvers.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `Tr ρ = 1` for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues of a density matrix down to `-PSD_TOL` are treated as rounding.
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalues of `√ρ ρ̃ √ρ` below this are rounding noise and set to zero.
/// All of them are at most 1 for unit-trace `ρ`, so the floor is absolute.
pub const ALPHA_SQ_FLOOR: f64 = 1e-14;

const MAX_SWEEPS: usize = 100;

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Row-major complex matrix with each side in {1, 2, 4, 8}.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if !ALLOWED_DIMS.contains(&rows) || !ALLOWED_DIMS.contains(&cols) {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} is not a supported shape (sides must be 1, 2, 4 or 8)"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real entries in row-major order.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(ALLOWED_DIMS.contains(&rows) && ALLOWED_DIMS.contains(&cols));
        Self {
            rows,
            cols,
            data: vec![Complex::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        m
    }

    /// The rank-one projector `|v⟩⟨v|`.
    pub fn outer(v: &[Complex]) -> Result<Self> {
        let n = v.len();
        let mut data = Vec::with_capacity(n * n);
        for a in v {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Self::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, k: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|m_ij - conj(m_ji)|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = &self.adjoint() * self;
        let id = Self::identity(self.rows);
        g.data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self · v` for a column vector.
    pub fn apply(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex::default() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrix by label: 0 → I, 1 → X, 2 → Y, 3 → Z.
pub fn pauli(label: usize) -> CMatrix {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let data = match label {
        0 => vec![one, o, o, one],
        1 => vec![o, one, one, o],
        2 => vec![o, -i, i, o],
        3 => vec![one, o, o, -one],
        _ => panic!("pauli label must be 0..=3, got {label}"),
    };
    CMatrix { rows: 2, cols: 2, data }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows > 8 || cols > 8 {
        return Err(Error::Dimension(format!(
            "kron of {}x{} and {}x{} exceeds 8x8",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = CMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

fn qubit_count(dim: usize) -> Option<usize> {
    match dim {
        2 => Some(1),
        4 => Some(2),
        8 => Some(3),
        _ => None,
    }
}

/// Reduced density matrix on the qubits in `keep`.
///
/// Qubit 0 is the most significant bit of the basis index. The kept qubits
/// appear in ascending order in the output regardless of the order in `keep`.
pub fn partial_trace(rho: &CMatrix, keep: &[usize]) -> Result<CMatrix> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!(
            "partial trace needs a square matrix, got {}x{}",
            rho.rows, rho.cols
        )));
    }
    let n = qubit_count(rho.rows)
        .ok_or_else(|| Error::Dimension(format!("{}x{} is not a qubit register", rho.rows, rho.cols)))?;
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep-set must not be empty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return Err(Error::InvalidArgument(format!(
            "keep-set {keep:?} is not a set of distinct qubits below {n}"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
    }

    let bit = |q: usize| 1usize << (n - 1 - q);
    let traced_mask: usize = (0..n).filter(|q| !kept.contains(q)).map(bit).sum();
    let sub = |idx: usize| {
        kept.iter()
            .fold(0usize, |acc, &q| (acc << 1) | usize::from(idx & bit(q) != 0))
    };

    let out_dim = 1 << kept.len();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for i in 0..rho.rows {
        for j in 0..rho.cols {
            if i & traced_mask == j & traced_mask {
                out[(sub(i), sub(j))] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Real eigenvalues of a Hermitian matrix, non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct HermSpectrum {
    eigenvalues: Vec<f64>,
}

impl HermSpectrum {
    fn from_unsorted(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues (non-increasing)
/// and the unitary whose columns are the matching eigenvectors.
pub fn herm_eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    jacobi_hermitian(m)
}

/// Eigenvalues of a Hermitian matrix, non-increasing.
pub fn herm_eigvals(m: &CMatrix) -> Result<HermSpectrum> {
    herm_eigh(m).map(|(vals, _)| HermSpectrum { eigenvalues: vals })
}

fn jacobi_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.rows;
    // Work on the exactly Hermitian part.
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = CMatrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut diag = 0.0;
        for p in 0..n {
            diag += a[(p, p)].re * a[(p, p)].re;
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= 1e-32 * (diag + 2.0 * off) || off < f64::MIN_POSITIVE {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let ph = (apq / mag).conj();
                // V = diag(1, ph) on (p, q) followed by a real rotation.
                let vpp = c(cs, 0.0);
                let vpq = c(sn, 0.0);
                let vqp = ph * -sn;
                let vqq = ph * cs;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * vpp + akq * vqp;
                    a[(k, q)] = akp * vpq + akq * vqq;
                    let wkp = v[(k, p)];
                    let wkq = v[(k, q)];
                    v[(k, p)] = wkp * vpp + wkq * vqp;
                    v[(k, q)] = wkp * vpq + wkq * vqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
                    a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
                }
                a[(p, q)] = Complex::default();
                a[(q, p)] = Complex::default();
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    if !converged {
        return Err(Error::Numerical("Hermitian Jacobi iteration did not converge".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, col)] = v[(k, src)];
        }
    }
    Ok((vals, vecs))
}

/// Eigenvalues of a real symmetric `n×n` matrix (row-major), non-increasing.
///
/// Used for the 64-state Pauli-weight chain, which is symmetric.
pub fn sym_eigvals(n: usize, data: &[f64]) -> Result<Vec<f64>> {
    if data.len() != n * n {
        return Err(Error::Dimension(format!(
            "{n}x{n} matrix needs {} entries, got {}",
            n * n,
            data.len()
        )));
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((data[i * n + j] - data[j * n + i]).abs());
        }
    }
    if worst > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (max asymmetry {worst:e})"
        )));
    }
    let mut a = data.to_vec();
    let at = |i: usize, j: usize| i * n + j;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut diag = 0.0;
        for p in 0..n {
            diag += a[at(p, p)] * a[at(p, p)];
            for q in p + 1..n {
                off += a[at(p, q)] * a[at(p, q)];
            }
        }
        if off <= 1e-32 * (diag + 2.0 * off) || off < f64::MIN_POSITIVE {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[at(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[at(q, q)] - a[at(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[at(k, p)];
                    let akq = a[at(k, q)];
                    a[at(k, p)] = cs * akp - sn * akq;
                    a[at(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[at(p, k)];
                    let aqk = a[at(q, k)];
                    a[at(p, k)] = cs * apk - sn * aqk;
                    a[at(q, k)] = sn * apk + cs * aqk;
                }
                a[at(p, q)] = 0.0;
                a[at(q, p)] = 0.0;
            }
        }
    }
    if !converged {
        return Err(Error::Numerical("symmetric Jacobi iteration did not converge".into()));
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[at(i, i)]).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok(vals)
}

/// `σ_y ⊗ σ_y`, the two-qubit spin-flip operator.
pub fn spin_flip() -> CMatrix {
    let y = pauli(2);
    kron(&y, &y).expect("4x4 fits")
}

/// Validates a two-qubit density matrix and returns its eigendecomposition.
fn check_density4(rho: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if rho.rows != 4 || rho.cols != 4 {
        return Err(Error::Dimension(format!(
            "two-qubit density matrix must be 4x4, got {}x{}",
            rho.rows, rho.cols
        )));
    }
    let dev = rho.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::InvalidDensity(format!("not hermitian (deviation {dev:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
    }
    let (vals, vecs) = jacobi_hermitian(rho)?;
    if let Some(&min) = vals.last() {
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok((vals, vecs))
}

/// The four Wootters α's of a two-qubit density matrix, non-increasing.
///
/// The α² are the eigenvalues of `ρ ρ̃` with `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
/// They are obtained from the similar Hermitian matrix `√ρ ρ̃ √ρ`.
pub fn concurrence_alphas(rho: &CMatrix) -> Result<HermSpectrum> {
    let (vals, vecs) = check_density4(rho)?;
    let roots: Vec<f64> = vals.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let sqrt_rho = &(&vecs * &CMatrix::diag(&roots)) * &vecs.adjoint();
    let yy = spin_flip();
    let tilde = &(&yy * &rho.conj()) * &yy;
    let r = &(&sqrt_rho * &tilde) * &sqrt_rho;
    let (lam, _) = jacobi_hermitian(&r)?;
    let mut alphas = Vec::with_capacity(4);
    for l in lam {
        if l < -PSD_TOL {
            return Err(Error::Numerical(format!(
                "√ρ ρ̃ √ρ has eigenvalue {l:e}, expected non-negative"
            )));
        }
        alphas.push(if l < ALPHA_SQ_FLOOR { 0.0 } else { l.sqrt() });
    }
    Ok(HermSpectrum::from_unsorted(alphas))
}

/// Wootters concurrence `max(0, α1 − α2 − α3 − α4)`.
pub fn concurrence(rho: &CMatrix) -> Result<f64> {
    let a = concurrence_alphas(rho)?;
    let a = a.eigenvalues();
    Ok((a[0] - a[1] - a[2] - a[3]).max(0.0))
}

/// Determinant of a 2×2 matrix.
pub fn det2(m: &CMatrix) -> Complex {
    assert!(m.rows == 2 && m.cols == 2);
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_matrix(rng: &mut impl Rng, r: usize, cols: usize) -> CMatrix {
        let data = (0..r * cols)
            .map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        CMatrix::new(r, cols, data).unwrap()
    }

    fn rand_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
        let a = rand_matrix(rng, n, n);
        (&a + &a.adjoint()).scale(c(0.5, 0.0))
    }

    fn rand_density(rng: &mut impl Rng, n: usize) -> CMatrix {
        let a = rand_matrix(rng, n, n);
        let p = &a * &a.adjoint();
        let tr = p.trace().re;
        p.scale(c(1.0 / tr, 0.0))
    }

    #[test]
    fn shape_validation() {
        assert!(CMatrix::new(3, 3, vec![c(0.0, 0.0); 9]).is_err());
        assert!(CMatrix::new(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(CMatrix::new(2, 2, vec![c(f64::NAN, 0.0); 4]).is_err());
        assert!(CMatrix::new(2, 4, vec![c(0.0, 0.0); 8]).is_ok());
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i4 = kron(&CMatrix::identity(2), &CMatrix::identity(2)).unwrap();
        assert_eq!(i4, CMatrix::identity(4));
        let zz = kron(&pauli(3), &pauli(3)).unwrap();
        assert_eq!(zz, CMatrix::diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_overflow_is_an_error() {
        let a = CMatrix::identity(4);
        assert!(matches!(kron(&a, &a), Err(Error::Dimension(_))));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (a, b, cm, d) = (
                rand_matrix(&mut rng, 2, 2),
                rand_matrix(&mut rng, 2, 2),
                rand_matrix(&mut rng, 2, 2),
                rand_matrix(&mut rng, 2, 2),
            );
            let lhs = &kron(&a, &b).unwrap() * &kron(&cm, &d).unwrap();
            let rhs = kron(&(&a * &cm), &(&b * &d)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn kron_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let a1 = rand_matrix(&mut rng, 2, 2);
            let a2 = rand_matrix(&mut rng, 2, 2);
            let b = rand_matrix(&mut rng, 4, 4);
            let k = c(rng.random(), rng.random());
            let lhs = kron(&(&a1 + &a2.scale(k)), &b).unwrap();
            let rhs = &kron(&a1, &b).unwrap() + &kron(&a2, &b).unwrap().scale(k);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rs = rand_density(&mut rng, 2);
        let re = rand_density(&mut rng, 4);
        let rho = kron(&rs, &re).unwrap();
        assert!(partial_trace(&rho, &[0]).unwrap().max_abs_diff(&rs) < 1e-14);
        assert!(partial_trace(&rho, &[1, 2]).unwrap().max_abs_diff(&re) < 1e-14);
    }

    #[test]
    fn partial_trace_of_ghz() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![c(0.0, 0.0); 8];
        v[0] = c(s, 0.0);
        v[7] = c(s, 0.0);
        let rho = CMatrix::outer(&v).unwrap();
        for q in 0..3 {
            let r = partial_trace(&rho, &[q]).unwrap();
            assert!(r.max_abs_diff(&CMatrix::diag(&[0.5, 0.5])) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let rho = CMatrix::diag(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::InvalidArgument(_))));
        assert!(partial_trace(&rho, &[3]).is_err());
        assert!(partial_trace(&rho, &[1, 1]).is_err());
        let rect = CMatrix::zeros(8, 4);
        assert!(matches!(partial_trace(&rect, &[0]), Err(Error::Dimension(_))));
        let bad = CMatrix::diag(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(partial_trace(&bad, &[0]), Err(Error::InvalidDensity(_))));
    }

    /// `Tr_E ρ = Σ_k (I ⊗ ⟨k|) ρ (I ⊗ |k⟩)` built from explicit Kronecker
    /// products, an independent route to the index-bit implementation.
    fn trace_out_last_two(rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(2, 2);
        for k in 0..4 {
            let mut bra = CMatrix::zeros(1, 4);
            bra[(0, k)] = c(1.0, 0.0);
            let left = kron(&CMatrix::identity(2), &bra).unwrap();
            let right = left.adjoint();
            out = &out + &(&(&left * rho) * &right);
        }
        out
    }

    #[test]
    fn partial_trace_matches_kron_oracle_and_preserves_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let rho = rand_density(&mut rng, 8);
            let r0 = partial_trace(&rho, &[0]).unwrap();
            assert!(r0.max_abs_diff(&trace_out_last_two(&rho)) < 1e-12);
            for keep in [&[0usize][..], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]] {
                let r = partial_trace(&rho, keep).unwrap();
                assert!((r.trace() - rho.trace()).norm() < 1e-12);
                assert!(r.hermitian_deviation() < 1e-14);
            }
            // Linearity over unit-trace combinations.
            let sigma = rand_density(&mut rng, 8);
            let p: f64 = rng.random();
            let mix = &rho.scale(c(p, 0.0)) + &sigma.scale(c(1.0 - p, 0.0));
            let lhs = partial_trace(&mix, &[0, 2]).unwrap();
            let rhs = &partial_trace(&rho, &[0, 2]).unwrap().scale(c(p, 0.0))
                + &partial_trace(&sigma, &[0, 2]).unwrap().scale(c(1.0 - p, 0.0));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn herm_eigvals_simple_cases() {
        assert_eq!(herm_eigvals(&CMatrix::identity(4)).unwrap().eigenvalues(), &[1.0; 4]);
        let z = herm_eigvals(&pauli(3)).unwrap();
        assert_eq!(z.eigenvalues(), &[1.0, -1.0]);
        let y = herm_eigvals(&pauli(2)).unwrap();
        assert!((y.eigenvalues()[0] - 1.0).abs() < 1e-15);
        assert!((y.eigenvalues()[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn herm_eigvals_rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_eigvals(&m), Err(Error::NotHermitian(_))));
    }

    /// Characteristic polynomial coefficients via Faddeev–LeVerrier:
    /// `det(λI − A) = λ^n + c[n-1] λ^{n-1} + … + c[0]`.
    fn charpoly(a: &CMatrix) -> Vec<Complex> {
        let n = a.rows();
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[n] = c(1.0, 0.0);
        let mut m = CMatrix::zeros(n, n);
        for k in 1..=n {
            let mut next = &(a * &m) + &CMatrix::identity(n).scale(coeffs[n - k + 1]);
            if k == 1 {
                next = CMatrix::identity(n);
            }
            m = next;
            coeffs[n - k] = -(a * &m).trace() / (k as f64);
        }
        coeffs
    }

    /// Durand–Kerner root finder.
    fn poly_roots(coeffs: &[Complex]) -> Vec<Complex> {
        let n = coeffs.len() - 1;
        let eval = |z: Complex| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * z + k);
        let mut roots: Vec<Complex> = (0..n).map(|k| c(0.4, 0.9).powu(k as u32)).collect();
        for _ in 0..2000 {
            let prev = roots.clone();
            for i in 0..n {
                let mut denom = c(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let r = roots[i];
                roots[i] = r - eval(r) / denom;
            }
            if roots.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
                break;
            }
        }
        roots
    }

    #[test]
    fn herm_eigvals_match_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let h = rand_hermitian(&mut rng, 4);
            let spec = herm_eigvals(&h).unwrap();
            let mut roots: Vec<f64> = poly_roots(&charpoly(&h)).iter().map(|z| z.re).collect();
            roots.sort_by(|a, b| b.total_cmp(a));
            for (e, r) in spec.eigenvalues().iter().zip(&roots) {
                assert!((e - r).abs() < 1e-9, "{e} vs {r}");
            }
        }
    }

    #[test]
    fn herm_eigh_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [2, 4, 8] {
            for _ in 0..100 {
                let h = rand_hermitian(&mut rng, n);
                let (vals, vecs) = herm_eigh(&h).unwrap();
                assert!(vals.windows(2).all(|w| w[0] >= w[1]));
                let sum: f64 = vals.iter().sum();
                assert!((sum - h.trace().re).abs() < 1e-10);
                let sq: f64 = vals.iter().map(|x| x * x).sum();
                assert!((sq - h.frobenius_sqr()).abs() < 1e-10);
                assert!(vecs.unitarity_deviation() < 1e-12);
                let back = &(&vecs * &CMatrix::diag(&vals)) * &vecs.adjoint();
                assert!(back.max_abs_diff(&h) < 1e-12);
            }
        }
    }

    #[test]
    fn sym_eigvals_known_spectrum() {
        let vals = sym_eigvals(2, &[0.75, 0.25, 0.25, 0.75]).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] - 0.5).abs() < 1e-15);
        assert!(sym_eigvals(2, &[0.0, 1.0, 0.0, 0.0]).is_err());
        assert!(sym_eigvals(3, &[0.0; 4]).is_err());
    }

    #[test]
    fn sym_eigvals_agree_with_hermitian_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let mut data = vec![0.0; 64];
            for i in 0..8 {
                for j in i..8 {
                    let x = rng.random::<f64>() - 0.5;
                    data[i * 8 + j] = x;
                    data[j * 8 + i] = x;
                }
            }
            let real = sym_eigvals(8, &data).unwrap();
            let cplx = herm_eigvals(&CMatrix::from_real(8, 8, &data).unwrap()).unwrap();
            for (a, b) in real.iter().zip(cplx.eigenvalues()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    fn bell_phi_plus() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::outer(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn alphas_of_bell_and_product_states() {
        let a = concurrence_alphas(&bell_phi_plus()).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0];
        for (x, e) in a.eigenvalues().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12, "{:?}", a);
        }
        let prod = CMatrix::outer(&[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = concurrence_alphas(&prod).unwrap();
        assert!(a.eigenvalues().iter().all(|&x| x == 0.0));
        assert_eq!(concurrence(&prod).unwrap(), 0.0);
    }

    #[test]
    fn werner_state_concurrence() {
        let p = 0.8;
        let rho = &bell_phi_plus().scale(c(p, 0.0)) + &CMatrix::identity(4).scale(c((1.0 - p) / 4.0, 0.0));
        // Werner states are spin-flip invariant, so ρ ρ̃ = ρ² and the α's are
        // the eigenvalues of ρ: (1+3p)/4 once and (1−p)/4 three times.
        let a = concurrence_alphas(&rho).unwrap();
        let expected = [(1.0 + 3.0 * p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0];
        for (x, e) in a.eigenvalues().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        let analytic = ((3.0 * p - 1.0) / 2.0f64).max(0.0);
        assert!((concurrence(&rho).unwrap() - analytic).abs() < 1e-12);
        assert!((analytic - 0.7).abs() < 1e-15);
    }

    #[test]
    fn alphas_reject_invalid_density() {
        let neg = CMatrix::diag(&[1.5, -0.5, 0.0, 0.0]);
        assert!(matches!(concurrence_alphas(&neg), Err(Error::InvalidDensity(_))));
        let untraced = CMatrix::diag(&[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(concurrence_alphas(&untraced), Err(Error::InvalidDensity(_))));
        assert!(matches!(concurrence_alphas(&CMatrix::identity(2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn pure_two_qubit_alphas_have_single_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut v: Vec<Complex> = (0..4).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            let a = concurrence_alphas(&CMatrix::outer(&v).unwrap()).unwrap();
            let a = a.eigenvalues();
            // For |ψ⟩ = a|00⟩+b|01⟩+c|10⟩+d|11⟩, C = 2|ad − bc|.
            let cc = 2.0 * (v[0] * v[3] - v[1] * v[2]).norm();
            assert!((a[0] - cc).abs() < 1e-12 && cc <= 1.0 + 1e-12);
            assert!(a[1..].iter().all(|&x| x == 0.0), "{a:?}");
        }
    }
}
