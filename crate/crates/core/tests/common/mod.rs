//! Shared builders for randomized Gaussian-state checks.
#![allow(dead_code)]

use nalgebra::DMatrix;
use vacent::gaussian::{mixing_matrix, GaussianState};

fn local(n: usize, i: usize, block: [[f64; 2]; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * i + r, 2 * i + c)] = block[r][c];
        }
    }
    m
}

fn beam_splitter(n: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        m[(a, a)] = c;
        m[(a, b)] = s;
        m[(b, a)] = -s;
        m[(b, b)] = c;
    }
    m
}

/// Symplectic matrix on `n` modes built from rotations, single-mode
/// squeezers, beam splitters and two-mode squeezers. `params` are in [-1, 1]
/// and are consumed four at a time.
pub fn symplectic_from(n: usize, params: &[f64]) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for (k, chunk) in params.chunks_exact(4).enumerate() {
        let i = k % n;
        let j = (k + 1) % n;
        let th = std::f64::consts::PI * chunk[0];
        s = local(n, i, [[th.cos(), th.sin()], [-th.sin(), th.cos()]]) * s;
        let r = 0.5 * chunk[1];
        s = local(n, i, [[r.exp(), 0.0], [0.0, (-r).exp()]]) * s;
        if n > 1 {
            s = beam_splitter(n, i, j, std::f64::consts::PI * chunk[2]) * s;
            s = mixing_matrix(n, i, j, 0.3 * chunk[3]).unwrap() * s;
        }
    }
    s
}

/// `S · diag(ν₁, ν₁, ν₂, ν₂, …) · Sᵀ`.
pub fn williamson_state(nus: &[f64], s: &DMatrix<f64>) -> GaussianState {
    let n = nus.len();
    let d = DMatrix::from_fn(2 * n, 2 * n, |r, c| if r == c { nus[r / 2] } else { 0.0 });
    let sigma = s * d * s.transpose();
    GaussianState::new((&sigma + sigma.transpose()) * 0.5).unwrap()
}

pub fn block_diag(a: &GaussianState, b: &GaussianState) -> GaussianState {
    let (na, nb) = (a.sigma().nrows(), b.sigma().nrows());
    let mut m = DMatrix::zeros(na + nb, na + nb);
    m.view_mut((0, 0), (na, na)).copy_from(a.sigma());
    m.view_mut((na, na), (nb, nb)).copy_from(b.sigma());
    GaussianState::new(m).unwrap()
}
