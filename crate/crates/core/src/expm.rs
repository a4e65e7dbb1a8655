//! Action of `exp(-i H dt)` for Hermitian `H`.
//!
//! Small systems use a dense Hermitian eigendecomposition; larger ones a
//! Lanczos (Krylov) approximation with full reorthogonalization. Both are
//! unitary up to round-off since the small exponential is formed from real
//! eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::sparse::CsrMatrix;

/// Dense propagator `exp(-i H dt)`.
pub fn dense_propagator(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * dt)),
    );
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * phases[c]);
    scaled * v.adjoint()
}

/// `exp(-i T dt) e_1` for the real symmetric tridiagonal `T`.
fn tridiagonal_exp_first_column(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| q[(r, k)] * q[(0, k)] * C64::from_polar(1.0, -eig.eigenvalues[k] * dt))
                .sum()
        })
        .collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Reusable Lanczos workspace.
#[derive(Debug, Clone)]
pub struct Krylov {
    basis: Vec<Vec<C64>>,
    work: Vec<C64>,
    max_dim: usize,
    tolerance: f64,
}

impl Krylov {
    pub fn new(dim: usize, max_dim: usize, tolerance: f64) -> Self {
        let max_dim = max_dim.min(dim).max(1);
        Self {
            basis: vec![vec![C64::new(0.0, 0.0); dim]; max_dim],
            work: vec![C64::new(0.0, 0.0); dim],
            max_dim,
            tolerance,
        }
    }

    /// Replace `psi` by `exp(-i H dt) psi`, where `apply_h(x, y)` sets `y = H x`.
    /// Returns the Krylov dimension used.
    pub fn propagate<F>(&mut self, apply_h: F, psi: &mut [C64], dt: f64) -> usize
    where
        F: Fn(&[C64], &mut [C64]),
    {
        let beta0 = norm(psi);
        if beta0 == 0.0 {
            return 0;
        }
        for (b, p) in self.basis[0].iter_mut().zip(psi.iter()) {
            *b = *p / beta0;
        }
        let mut alpha = Vec::with_capacity(self.max_dim);
        let mut beta: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut coeffs = Vec::new();

        for j in 0..self.max_dim {
            apply_h(&self.basis[j], &mut self.work);
            let a = dot(&self.basis[j], &self.work).re;
            alpha.push(a);
            for i in 0..=j {
                let proj = dot(&self.basis[i], &self.work);
                for (w, b) in self.work.iter_mut().zip(&self.basis[i]) {
                    *w -= proj * b;
                }
            }
            let b = norm(&self.work);
            coeffs = tridiagonal_exp_first_column(&alpha, &beta, dt);
            let estimate = b * coeffs[j].norm();
            // happy breakdown or converged
            if estimate < self.tolerance || b < 1e-14 * a.abs().max(1.0) || j + 1 == self.max_dim {
                break;
            }
            beta.push(b);
            for (dst, w) in self.basis[j + 1].iter_mut().zip(&self.work) {
                *dst = *w / b;
            }
        }

        psi.iter_mut().for_each(|p| *p = C64::new(0.0, 0.0));
        for (c, v) in coeffs.iter().zip(&self.basis) {
            let s = *c * beta0;
            for (p, x) in psi.iter_mut().zip(v) {
                *p += s * x;
            }
        }
        coeffs.len()
    }
}

/// One exponential step `psi <- exp(-i H dt) psi` for a fixed sparse `H`.
pub fn exp_step(h: &CsrMatrix, psi: &mut [C64], dt: f64, dense_threshold: usize) {
    if h.nrows() <= dense_threshold {
        let u = dense_propagator(&h.to_dense(), dt);
        let out = &u * DVector::from_column_slice(psi);
        psi.copy_from_slice(out.as_slice());
    } else {
        let mut k = Krylov::new(h.nrows(), 40, 1e-13);
        k.propagate(|x, y| h.mul_vec_into(x, y), psi, dt);
    }
}
