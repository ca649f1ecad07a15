//! Dense Hermitian operators on a bipartite space `C^dA ⊗ C^dB`.
//!
//! Basis states are ordered row-major over the product basis, so `|i⟩⊗|j⟩`
//! sits at index `i·dB + j`. Operators built as tensor products of several
//! bipartite copies keep their copy structure (a list of [`Factor`]s) and are
//! stored in the interleaved order `(a₁,b₁)(a₂,b₂)…`. The bipartition is always
//! "every A factor" versus "every B factor", and the partial transpose acts on
//! all B factors at once.

mod spectrum;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use spectrum::{eig_hermitian, JordanPair, Spectrum};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest matrix side any operation will materialize.
pub const DEFAULT_MAX_SIDE: usize = 4096;

/// Admission threshold for the Hermiticity residual `max|M − M†|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues with `|λ| ≤ ZERO_EIGEN_REL · max|λ|` count as zero for rank and support.
pub const ZERO_EIGEN_REL: f64 = 1e-10;

/// Local dimensions of one bipartite copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub d_a: usize,
    pub d_b: usize,
}

impl Factor {
    pub fn new(d_a: usize, d_b: usize) -> Self {
        Self { d_a, d_b }
    }

    pub fn side(&self) -> usize {
        self.d_a * self.d_b
    }
}

/// A Hermitian operator tagged with its bipartite (and copy) structure.
///
/// Hermiticity is checked when a value is admitted from outside and the stored
/// matrix is then exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteOperator {
    factors: Vec<Factor>,
    mat: CMatrix,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Standard Kronecker product of two plain matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|a⟩⊗|b⟩`.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// `max|M − M†|`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = r(m[(i, i)].re);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn total_side(factors: &[Factor]) -> usize {
    factors.iter().map(Factor::side).product()
}

impl BipartiteOperator {
    /// Admits `mat` as a Hermitian operator on `C^d_a ⊗ C^d_b`.
    pub fn new(d_a: usize, d_b: usize, mat: CMatrix) -> Result<Self> {
        Self::with_factors(vec![Factor::new(d_a, d_b)], mat)
    }

    pub fn with_factors(factors: Vec<Factor>, mut mat: CMatrix) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.d_a == 0 || f.d_b == 0) {
            return Err(Error::Dimension(format!(
                "subsystem dimensions must be positive, got {factors:?}"
            )));
        }
        let side = total_side(&factors);
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::Dimension(format!(
                "expected a {side}x{side} matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if side > DEFAULT_MAX_SIDE {
            return Err(Error::CapExceeded {
                side,
                cap: DEFAULT_MAX_SIDE,
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension("matrix has non-finite entries".into()));
        }
        let residual = hermitian_residual(&mat);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        hermitize(&mut mat);
        Ok(Self { factors, mat })
    }

    /// For results of operations that preserve Hermiticity exactly.
    pub(crate) fn from_parts(factors: Vec<Factor>, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), total_side(&factors));
        Self { factors, mat }
    }

    /// Same as [`from_parts`](Self::from_parts) but re-symmetrizes, for products
    /// like `V·D·V†` that are Hermitian only up to rounding.
    pub(crate) fn from_parts_hermitized(factors: Vec<Factor>, mut mat: CMatrix) -> Self {
        hermitize(&mut mat);
        Self::from_parts(factors, mat)
    }

    pub fn zeros(d_a: usize, d_b: usize) -> Self {
        let n = d_a * d_b;
        Self::from_parts(vec![Factor::new(d_a, d_b)], CMatrix::zeros(n, n))
    }

    pub fn identity(d_a: usize, d_b: usize) -> Self {
        let n = d_a * d_b;
        Self::from_parts(vec![Factor::new(d_a, d_b)], CMatrix::identity(n, n))
    }

    pub fn zeros_like(&self) -> Self {
        let n = self.side();
        Self::from_parts(self.factors.clone(), CMatrix::zeros(n, n))
    }

    pub fn identity_like(&self) -> Self {
        let n = self.side();
        Self::from_parts(self.factors.clone(), CMatrix::identity(n, n))
    }

    pub fn from_diagonal(d_a: usize, d_b: usize, diag: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| r(x)));
        Self::new(d_a, d_b, CMatrix::from_diagonal(&v))
    }

    /// `|v⟩⟨v|` for a (not necessarily normalized) vector.
    pub fn pure(d_a: usize, d_b: usize, v: &CVector) -> Result<Self> {
        if v.len() != d_a * d_b {
            return Err(Error::Dimension(format!(
                "vector of length {} on a {d_a}x{d_b} system",
                v.len()
            )));
        }
        Ok(Self::from_parts(
            vec![Factor::new(d_a, d_b)],
            v * v.adjoint(),
        ))
    }

    /// `A ⊗ B` with A acting on the first subsystem.
    pub fn product(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(Error::Dimension("local operators must be square".into()));
        }
        Self::new(a.nrows(), b.nrows(), kron(a, b))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn copies(&self) -> usize {
        self.factors.len()
    }

    pub fn d_a(&self) -> usize {
        self.factors.iter().map(|f| f.d_a).product()
    }

    pub fn d_b(&self) -> usize {
        self.factors.iter().map(|f| f.d_b).product()
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn same_structure(&self, other: &Self) -> bool {
        self.factors == other.factors
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(A·B)`, real for Hermitian arguments.
    pub fn trace_with(&self, other: &Self) -> f64 {
        assert_eq!(self.side(), other.side(), "trace_with: side mismatch");
        // Tr(AB) = Σ A_ij B_ji and B_ji = conj(B_ij)
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max|A − B|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.side(), other.side(), "max_abs_diff: side mismatch");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(self.factors.clone(), &self.mat * r(s))
    }

    /// Transposes every B factor in the computational product basis:
    /// `⟨a b|X^PT|a' b'⟩ = ⟨a b'|X|a' b⟩`.
    pub fn partial_transpose(&self) -> Self {
        let (a_part, b_part) = self.index_split();
        let n = self.side();
        let mut out = CMatrix::zeros(n, n);
        for col in 0..n {
            for row in 0..n {
                out[(a_part[row] + b_part[col], a_part[col] + b_part[row])] = self.mat[(row, col)];
            }
        }
        Self::from_parts(self.factors.clone(), out)
    }

    /// Splits each flat index `i` into `a_part[i] + b_part[i]`, where `b_part`
    /// carries the B digits of every copy in place.
    fn index_split(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.side();
        let mut a_part = vec![0usize; n];
        let mut b_part = vec![0usize; n];
        for idx in 0..n {
            let mut rest = idx;
            let mut stride = 1;
            for f in self.factors.iter().rev() {
                let digit = rest % f.side();
                rest /= f.side();
                let (a, b) = (digit / f.d_b, digit % f.d_b);
                a_part[idx] += a * f.d_b * stride;
                b_part[idx] += b * stride;
                stride *= f.side();
            }
        }
        (a_part, b_part)
    }

    /// Tensor product keeping the copy structure of both operands.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.kron_capped(other, DEFAULT_MAX_SIDE)
    }

    pub fn kron_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let side = self.side() * other.side();
        if side > cap {
            return Err(Error::CapExceeded { side, cap });
        }
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Ok(Self::from_parts(factors, kron(&self.mat, &other.mat)))
    }

    /// `self^{⊗copies}`.
    pub fn tensor_power(&self, copies: usize, cap: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidParameter("tensor power needs at least one copy".into()));
        }
        let side = (self.side() as u128).checked_pow(copies as u32).unwrap_or(u128::MAX);
        if side > cap as u128 {
            return Err(Error::CapExceeded {
                side: usize::try_from(side).unwrap_or(usize::MAX),
                cap,
            });
        }
        let mut acc = self.clone();
        for _ in 1..copies {
            acc = acc.kron_capped(self, cap)?;
        }
        Ok(acc)
    }

    /// Re-expresses a folded operator on the single bipartite factor
    /// `(Π d_a, Π d_b)`, i.e. basis order `(a₁…a_L)(b₁…b_L)`.
    pub fn grouped(&self) -> Self {
        let (d_a, d_b) = (self.d_a(), self.d_b());
        let n = self.side();
        let mut target = vec![0usize; n];
        for (idx, t) in target.iter_mut().enumerate() {
            let mut rest = idx;
            let (mut a_idx, mut b_idx) = (0, 0);
            let (mut a_stride, mut b_stride) = (1, 1);
            for f in self.factors.iter().rev() {
                let digit = rest % f.side();
                rest /= f.side();
                a_idx += (digit / f.d_b) * a_stride;
                b_idx += (digit % f.d_b) * b_stride;
                a_stride *= f.d_a;
                b_stride *= f.d_b;
            }
            *t = a_idx * d_b + b_idx;
        }
        let mut out = CMatrix::zeros(n, n);
        for col in 0..n {
            for row in 0..n {
                out[(target[row], target[col])] = self.mat[(row, col)];
            }
        }
        Self::from_parts(vec![Factor::new(d_a, d_b)], out)
    }

    pub fn eig(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        spectrum::eigenvalues_hermitian(&self.mat)
    }

    /// `Tr|A| = Σ|λ_k|`.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|l| l.abs()).sum())
    }

    /// Largest `|λ|`.
    pub fn op_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().fold(0.0, |m: f64, l| m.max(l.abs())))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("non-empty spectrum"))
    }

    pub fn jordan(&self) -> Result<JordanPair> {
        JordanPair::of(self)
    }

    /// True iff `λ_min ≥ −tol·max(1, ‖A‖)`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let ev = self.eigenvalues()?;
        let norm = ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let min = ev.last().copied().unwrap_or(0.0);
        Ok(min >= -tol * norm.max(1.0))
    }

    pub fn is_ppt(&self, tol: f64) -> Result<bool> {
        self.partial_transpose().is_psd(tol)
    }

    /// Number of eigenvalues above the relative numerical-zero threshold.
    pub fn rank(&self) -> Result<usize> {
        let ev = self.eigenvalues()?;
        let scale = ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        Ok(ev.iter().filter(|l| l.abs() > ZERO_EIGEN_REL * scale).count())
    }

    fn assert_compatible(&self, other: &Self, op: &str) {
        assert!(
            self.same_structure(other),
            "{op}: incompatible operator structures {:?} vs {:?}",
            self.factors,
            other.factors
        );
    }
}

impl Add for &BipartiteOperator {
    type Output = BipartiteOperator;

    fn add(self, rhs: &BipartiteOperator) -> BipartiteOperator {
        self.assert_compatible(rhs, "add");
        BipartiteOperator::from_parts(self.factors.clone(), &self.mat + &rhs.mat)
    }
}

impl Sub for &BipartiteOperator {
    type Output = BipartiteOperator;

    fn sub(self, rhs: &BipartiteOperator) -> BipartiteOperator {
        self.assert_compatible(rhs, "sub");
        BipartiteOperator::from_parts(self.factors.clone(), &self.mat - &rhs.mat)
    }
}

impl Add for BipartiteOperator {
    type Output = BipartiteOperator;

    fn add(self, rhs: BipartiteOperator) -> BipartiteOperator {
        &self + &rhs
    }
}

impl Sub for BipartiteOperator {
    type Output = BipartiteOperator;

    fn sub(self, rhs: BipartiteOperator) -> BipartiteOperator {
        &self - &rhs
    }
}

impl Neg for &BipartiteOperator {
    type Output = BipartiteOperator;

    fn neg(self) -> BipartiteOperator {
        BipartiteOperator::from_parts(self.factors.clone(), -&self.mat)
    }
}

impl Mul<f64> for &BipartiteOperator {
    type Output = BipartiteOperator;

    fn mul(self, s: f64) -> BipartiteOperator {
        self.scale(s)
    }
}

impl Mul<f64> for BipartiteOperator {
    type Output = BipartiteOperator;

    fn mul(self, s: f64) -> BipartiteOperator {
        self.scale(s)
    }
}

/// Free-function form of [`BipartiteOperator::partial_transpose`].
pub fn partial_transpose(a: &BipartiteOperator) -> BipartiteOperator {
    a.partial_transpose()
}

pub fn trace_norm(a: &BipartiteOperator) -> Result<f64> {
    a.trace_norm()
}

pub fn jordan(a: &BipartiteOperator) -> Result<JordanPair> {
    a.jordan()
}

pub fn is_psd(a: &BipartiteOperator, tol: f64) -> Result<bool> {
    a.is_psd(tol)
}

pub fn is_ppt(a: &BipartiteOperator, tol: f64) -> Result<bool> {
    a.is_ppt(tol)
}
