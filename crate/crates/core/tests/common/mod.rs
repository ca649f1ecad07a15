//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's own linear algebra.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sephide_core::ensemble::TwoStateEnsemble;
use sephide_core::operator::{kron, kron_vec, BipartiteOperator, CMatrix, CVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cyclic Jacobi on a real symmetric matrix; returns eigenvalues in descending order.
pub fn jacobi_symmetric(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Eigenvalues of a Hermitian `A + iB` via the real embedding `[[A, −B], [B, A]]`,
/// whose spectrum is that of the original with every value doubled.
pub fn jacobi_hermitian(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            big[(i, j)] = z.re;
            big[(i + n, j + n)] = z.re;
            big[(i, j + n)] = -z.im;
            big[(i + n, j)] = z.im;
        }
    }
    jacobi_symmetric(big).into_iter().step_by(2).collect()
}

pub fn oracle_trace_norm(a: &BipartiteOperator) -> f64 {
    jacobi_hermitian(a.matrix()).iter().map(|l| l.abs()).sum()
}

/// Entrywise partial transpose on the single-copy layout, written independently.
pub fn oracle_partial_transpose(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    let mut out = CMatrix::zeros(d_a * d_b, d_a * d_b);
    for a in 0..d_a {
        for b in 0..d_b {
            for a2 in 0..d_a {
                for b2 in 0..d_b {
                    out[(a * d_b + b, a2 * d_b + b2)] = m[(a * d_b + b2, a2 * d_b + b)];
                }
            }
        }
    }
    out
}

pub fn random_hermitian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d_a: usize, d_b: usize) -> BipartiteOperator {
    BipartiteOperator::new(d_a, d_b, random_hermitian_matrix(rng, d_a * d_b)).unwrap()
}

pub fn random_real_unit<R: Rng>(rng: &mut R, d: usize) -> CVector {
    let v = CVector::from_iterator(d, (0..d).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// A mixture of `terms` real product pure states; invariant under partial transpose.
pub fn random_real_product_mixture<R: Rng>(rng: &mut R, d: usize, terms: usize) -> BipartiteOperator {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(d * d, d * d);
    for w in weights {
        let v = kron_vec(&random_real_unit(rng, d), &random_real_unit(rng, d));
        m += &v * v.adjoint() * Complex64::new(w / total, 0.0);
    }
    BipartiteOperator::new(d, d, m).unwrap()
}

pub fn random_pt_invariant_ensemble<R: Rng>(rng: &mut R, d: usize) -> TwoStateEnsemble {
    let eta0 = rng.random_range(0.2..0.8);
    let k0 = rng.random_range(1..=3);
    let k1 = rng.random_range(1..=3);
    let rho0 = random_real_product_mixture(rng, d, k0);
    let rho1 = random_real_product_mixture(rng, d, k1);
    TwoStateEnsemble::new(eta0, rho0, rho1).unwrap()
}

/// `(|i⟩|j⟩, |k⟩|l⟩)` computational product states on `d⊗d`, equal priors.
pub fn product_pair(d: usize, (i, j): (usize, usize), (k, l): (usize, usize)) -> TwoStateEnsemble {
    let ket = |a: usize, b: usize| {
        let mut u = CVector::zeros(d);
        let mut v = CVector::zeros(d);
        u[a] = Complex64::new(1.0, 0.0);
        v[b] = Complex64::new(1.0, 0.0);
        BipartiteOperator::pure(d, d, &kron_vec(&u, &v)).unwrap()
    };
    TwoStateEnsemble::new(0.5, ket(i, j), ket(k, l)).unwrap()
}

/// `Σ_{b⃗ : ω₂(b⃗) = parity} Π_l η_{b_l} ρ_{b_l}` on the interleaved layout, by enumeration.
pub fn brute_force_parity_weight(e: &TwoStateEnsemble, copies: usize, parity: u32) -> CMatrix {
    let side = e.rho0().side().pow(copies as u32);
    let mut acc = CMatrix::zeros(side, side);
    for bits in 0u32..(1 << copies) {
        if bits.count_ones() % 2 != parity {
            continue;
        }
        let mut term = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for l in 0..copies {
            let b = (bits >> l & 1) as u8;
            let w = e.state(b).matrix() * Complex64::new(e.prior(b), 0.0);
            term = kron(&term, &w);
        }
        acc += term;
    }
    acc
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
