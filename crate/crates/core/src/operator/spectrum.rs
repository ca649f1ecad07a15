use nalgebra::SymmetricEigen;

use super::{BipartiteOperator, CMatrix};
use crate::error::{Error, Result};

/// Spectral decomposition `A = Σ λ_k v_k v_k†` with eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose k-th column is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// `V · diag(g(λ)) · V†`.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let w = g(l);
            scaled.column_mut(k).scale_mut(w);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// Iteration cap handed to the implicit QR stage: ten passes per dimension.
fn iteration_cap(n: usize) -> usize {
    10 * n.max(1)
}

fn decompose(m: &CMatrix) -> Result<SymmetricEigen<num_complex::Complex64, nalgebra::Dyn>> {
    let n = m.nrows();
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, iteration_cap(n))
        .ok_or(Error::EigenNonConvergence(n))
}

/// Full Hermitian eigendecomposition, sorted by descending eigenvalue.
pub fn eig_hermitian(a: &BipartiteOperator) -> Result<Spectrum> {
    let n = a.side();
    let se = decompose(a.matrix())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        eigenvectors.set_column(k, &se.eigenvectors.column(i));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

pub(crate) fn eigenvalues_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = decompose(m)?.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Orthogonal split `A = plus − minus` into positive and negative parts.
#[derive(Clone, Debug)]
pub struct JordanPair {
    pub plus: BipartiteOperator,
    pub minus: BipartiteOperator,
}

impl JordanPair {
    /// `plus = ½(|A| + A)`, `minus = ½(|A| − A)`.
    pub fn of(a: &BipartiteOperator) -> Result<Self> {
        let spec = eig_hermitian(a)?;
        let factors = a.factors().to_vec();
        let plus = spec.apply(|l| l.max(0.0));
        let minus = spec.apply(|l| (-l).max(0.0));
        Ok(Self {
            plus: BipartiteOperator::from_parts_hermitized(factors.clone(), plus),
            minus: BipartiteOperator::from_parts_hermitized(factors, minus),
        })
    }

    /// `|A| = plus + minus`.
    pub fn abs(&self) -> BipartiteOperator {
        &self.plus + &self.minus
    }

    pub fn reconstruct(&self) -> BipartiteOperator {
        &self.plus - &self.minus
    }
}
