//! Dense complex vectors and Hermitian matrices, sized for space-time
//! dimensions up to a few dozen.
//!
//! Every quadratic form `x† A⁻¹ y` goes through a Cholesky factor and two
//! triangular solves; no explicit inverse is ever formed.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("vector must have at least one entry".into()));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("vector entries must be finite".into()));
        }
        Ok(Self(entries))
    }

    /// Builds without validation; callers guarantee finiteness and length.
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// The `i`-th standard basis vector of length `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &ComplexVec) -> Result<Self> {
        check_dims(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Plain inner product `self† other`.
    pub fn dot(&self, other: &ComplexVec) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|a| a.re == 0.0 && a.im == 0.0)
    }
}

impl std::ops::Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Hermitian matrix stored as its packed lower triangle; the upper triangle
/// is the conjugate mirror, so the matrix is Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    lower: Vec<Complex64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    i * (i + 1) / 2 + j
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, lower: vec![Complex64::new(0.0, 0.0); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.lower[packed(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from the lower triangle of `f(i, j)`; diagonal imaginary
    /// parts are dropped.
    pub fn from_lower_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut v = f(i, j);
                if i == j {
                    v.im = 0.0;
                }
                m.lower[packed(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            self.lower[packed(i, j)]
        } else {
            self.lower[packed(j, i)].conj()
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, lower: self.lower.iter().map(|x| x * c).collect() }
    }

    pub fn add_diagonal(&self, c: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.lower[packed(i, i)].re += c;
        }
        m
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.lower.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn mul_vec(&self, x: &ComplexVec) -> Result<ComplexVec> {
        check_dims(self.n, x.len())?;
        let out = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect();
        Ok(ComplexVec(out))
    }

    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        cholesky(self)
    }
}

/// Sample scatter matrix `Σ z_k z_k†`.
pub fn gram_accumulate(snapshots: &[ComplexVec]) -> Result<HermitianMatrix> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidParameter("no snapshots".into()))?;
    let n = first.len();
    let mut m = HermitianMatrix::zeros(n);
    for z in snapshots {
        check_dims(n, z.len())?;
        accumulate_outer(&mut m, z.as_slice());
    }
    Ok(m)
}

pub(crate) fn accumulate_outer(m: &mut HermitianMatrix, z: &[Complex64]) {
    for i in 0..m.n {
        let zi = z[i];
        let row = i * (i + 1) / 2;
        for j in 0..i {
            m.lower[row + j] += zi * z[j].conj();
        }
        m.lower[row + i].re += zi.norm_sqr();
    }
}

/// Lower-triangular `L` with positive real diagonal and `L L† = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    // packed lower triangle, same layout as HermitianMatrix
    l: Vec<Complex64>,
}

pub fn cholesky(a: &HermitianMatrix) -> Result<CholeskyFactor> {
    let n = a.n;
    let mut l = vec![Complex64::new(0.0, 0.0); a.lower.len()];
    for j in 0..n {
        let rj = j * (j + 1) / 2;
        let mut d = a.lower[rj + j].re;
        for k in 0..j {
            d -= l[rj + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[rj + j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let ri = i * (i + 1) / 2;
            let mut s = a.lower[ri + j];
            for k in 0..j {
                s -= l[ri + k] * l[rj + k].conj();
            }
            l[ri + j] = s / djj;
        }
    }
    Ok(CholeskyFactor { n, l })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            self.l[packed(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Forward substitution: returns `L⁻¹ b`.
    pub fn whiten(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut y = b.to_vec();
        for i in 0..self.n {
            let ri = i * (i + 1) / 2;
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[ri + k] * y[k];
            }
            y[i] = s / self.l[ri + i].re;
        }
        y
    }

    /// Returns `L w`; maps white samples to samples with covariance `L L†`.
    pub fn color(&self, w: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let ri = i * (i + 1) / 2;
                (0..=i).map(|k| self.l[ri + k] * w[k]).sum()
            })
            .collect()
    }

    /// `x† A⁻¹ y` for the factored `A`.
    pub fn quad_form(&self, x: &ComplexVec, y: &ComplexVec) -> Result<Complex64> {
        check_dims(self.n, x.len())?;
        check_dims(self.n, y.len())?;
        let wx = self.whiten(x.as_slice());
        let wy = self.whiten(y.as_slice());
        Ok(wx.iter().zip(&wy).map(|(a, b)| a.conj() * b).sum())
    }

    /// Reconstructs `L L†`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_lower_fn(self.n, |i, j| {
            (0..=j).map(|k| self.get(i, k) * self.get(j, k).conj()).sum()
        })
    }
}

/// `x† A⁻¹ y` via Cholesky and two triangular solves.
pub fn quad_form(a: &HermitianMatrix, x: &ComplexVec, y: &ComplexVec) -> Result<Complex64> {
    check_dims(a.dim(), x.len())?;
    check_dims(a.dim(), y.len())?;
    cholesky(a)?.quad_form(x, y)
}
