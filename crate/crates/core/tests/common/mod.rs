//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls into the library's Fock, projector or gate code; the
//! amplitudes are built in log space and projectors come from a QR
//! factorisation instead of the inverse Gram matrix.

#![allow(dead_code)]

use coherent::complex_sets::Label;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `⟨N|A⟩ = exp(−|A|²/2 + N ln A − ln N!/2)`, evaluated term by term in logs.
pub fn coh(a: C64, dim: usize) -> DVector<C64> {
    let mut ln_fact = 0.0;
    DVector::from_fn(dim, |n, _| {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        if a == C64::new(0.0, 0.0) {
            return if n == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
        }
        (C64::from(-0.5 * a.norm_sqr() - 0.5 * ln_fact) + a.ln() * n as f64).exp()
    })
}

/// `⟨A|B⟩` in closed form.
pub fn overlap(a: C64, b: C64) -> C64 {
    (a.conj() * b - 0.5 * a.norm_sqr() - 0.5 * b.norm_sqr()).exp()
}

pub fn gram(labels: &[C64]) -> DMatrix<C64> {
    let n = labels.len();
    DMatrix::from_fn(n, n, |j, k| overlap(labels[j], labels[k]))
}

/// Columns are the truncated coherent vectors.
pub fn basis(labels: &[C64], dim: usize) -> DMatrix<C64> {
    let cols: Vec<DVector<C64>> = labels.iter().map(|a| coh(*a, dim)).collect();
    DMatrix::from_columns(&cols)
}

/// Orthogonal projector onto the span, via thin QR.
pub fn qr_projector(labels: &[C64], dim: usize) -> DMatrix<C64> {
    let q = basis(labels, dim).qr().q();
    &q * q.adjoint()
}

pub fn annihilation(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |m, n| {
        if n == m + 1 {
            c((n as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `exp(z a† − z* a)` by Padé exponentiation of the generator at a larger
/// truncation, cut back to `dim`.
pub fn displacement_expm(z: C64, dim: usize, big: usize) -> DMatrix<C64> {
    let a = annihilation(big);
    let gen = a.adjoint() * z - &a * z.conj();
    gen.exp().view((0, 0), (dim, dim)).into_owned()
}

/// Hermitian eigendecomposition sorted by descending eigenvalue. A 2x2
/// Gram matrix uses the closed form `(e^{iθ}, ±1)/√2`, which stays defined
/// when `1 ± μ` round to the same double.
pub fn eig_desc(m: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>) {
    if m.nrows() == 2 {
        let (mu, theta) = (m[(0, 1)].norm(), m[(0, 1)].arg());
        let ph = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
        let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        return (
            vec![1.0 + mu, 1.0 - mu],
            vec![DVector::from_vec(vec![ph, h]), DVector::from_vec(vec![-ph, h])],
        );
    }
    let e = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    (
        idx.iter().map(|&i| e.eigenvalues[i]).collect(),
        idx.iter().map(|&i| e.eigenvectors.column(i).into_owned()).collect(),
    )
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn textbook_cnot() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, col)] = c(1.0, 0.0);
    }
    m
}

/// Labels uniform in a disk with a minimum pairwise separation.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, radius: f64, min_sep: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    while out.len() < n {
        let z = c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() <= radius && out.iter().all(|o| (o - z).norm() >= min_sep) {
            out.push(z);
        }
    }
    out
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_square<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `B B† / Tr` on the first `support` levels, zero-padded to `dim`.
pub fn random_density<R: Rng>(rng: &mut R, support: usize, dim: usize) -> DMatrix<C64> {
    let b = random_square(rng, support);
    let small = &b * b.adjoint();
    let small = &small / small.trace();
    let mut rho = DMatrix::zeros(dim, dim);
    rho.view_mut((0, 0), (support, support)).copy_from(&small);
    rho
}

pub fn labels(zs: &[C64]) -> Vec<Label> {
    zs.iter().map(|z| Label::new(z.re, z.im)).collect()
}
