//! Coherent subspaces `H(S)` spanned by finitely many coherent states.
//!
//! A [`CoherentSpace`] caches the Gram metric `g_jk = ⟨A_j|A_k⟩`, its inverse
//! `G`, and the eigensystem `g = Σ γ_j E_j` (eigenvalues descending). The
//! projector onto `H(S)` is `Π(S) = Σ G_jk |A_j⟩⟨A_k|`; the Gram–Schmidt chain
//! splits it into rank-one pieces `ϖ(A_i | A_1..A_{i-1})`.
//!
//! Gram entries use the closed-form overlap, so the metric never depends on
//! the Fock truncation. Only operations that return Fock-space objects take a
//! [`TruncationPolicy`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::complex_sets::{check_labels, CSet, Label};
use crate::error::{Error, Result};
use crate::fock::{
    annihilation, coherent_amplitudes, displacement_op, evolution_op, inner,
    momentum_op, number_op, position_op, FockOperator, FockVector, TruncationPolicy, C64,
};
use crate::quadrature::DiskGrid;
use crate::report::CheckReport;

/// Upper bound on `γ_max / γ_min` accepted by [`CoherentSpace::new`].
pub const COND_LIMIT: f64 = 1e12;

/// `⟨a|b⟩ = exp(a* b − |a|²/2 − |b|²/2)`.
pub fn overlap(a: Label, b: Label) -> C64 {
    let (a, b) = (a.to_complex(), b.to_complex());
    (a.conj() * b - 0.5 * a.norm_sqr() - 0.5 * b.norm_sqr()).exp()
}

/// Closed form of the two-point metric: `g_12 = μ e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramTwoPoint {
    pub mu: f64,
    pub theta: f64,
}

impl GramTwoPoint {
    pub fn new(a1: Label, a2: Label) -> Self {
        let (z1, z2) = (a1.to_complex(), a2.to_complex());
        let mu = (-0.5 * (z1 - z2).norm_sqr()).exp();
        // (i/2)(A2* A1 − A1* A2) = Im(A1* A2)
        let theta = (C64::i() * 0.5 * (z2.conj() * z1 - z1.conj() * z2)).re;
        GramTwoPoint { mu, theta }
    }

    fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }

    pub fn g(&self) -> DMatrix<C64> {
        let off = self.phase() * self.mu;
        DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), off, off.conj(), C64::new(1.0, 0.0)])
    }

    pub fn ginv(&self) -> DMatrix<C64> {
        let off = -self.phase() * self.mu;
        let s = 1.0 / (1.0 - self.mu * self.mu);
        DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), off, off.conj(), C64::new(1.0, 0.0)]) * C64::new(s, 0.0)
    }

    /// `(1 + μ, 1 − μ)`.
    pub fn eigvals(&self) -> [f64; 2] {
        [1.0 + self.mu, 1.0 - self.mu]
    }

    /// `e_1 = (e^{iθ}, 1)/√2`, `e_2 = (−e^{iθ}, 1)/√2`.
    pub fn eigvecs(&self) -> [DVector<C64>; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = self.phase() * s;
        let one = C64::new(s, 0.0);
        [
            DVector::from_vec(vec![p, one]),
            DVector::from_vec(vec![-p, one]),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct CoherentSpace {
    labels: Vec<Label>,
    g: DMatrix<C64>,
    ginv: DMatrix<C64>,
    eigvals: Vec<f64>,
    eigvecs: Vec<DVector<C64>>,
    eigprojs: Vec<DMatrix<C64>>,
}

pub fn gram_matrix(labels: &[Label]) -> DMatrix<C64> {
    let n = labels.len();
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            C64::new(1.0, 0.0)
        } else {
            overlap(labels[j], labels[k])
        }
    })
}

impl CoherentSpace {
    pub fn new(labels: &[Label]) -> Result<Self> {
        Self::with_cond_limit(labels, COND_LIMIT)
    }

    pub fn with_cond_limit(labels: &[Label], cond_limit: f64) -> Result<Self> {
        check_labels(labels)?;
        let n = labels.len();
        let g = gram_matrix(labels);
        let (eigvals, eigvecs): (Vec<f64>, Vec<DVector<C64>>) = if n == 2 {
            let tp = GramTwoPoint::new(labels[0], labels[1]);
            let [v1, v2] = tp.eigvecs();
            (tp.eigvals().to_vec(), vec![v1, v2])
        } else {
            let eig = SymmetricEigen::new(g.clone());
            let mut pairs: Vec<(f64, DVector<C64>)> = eig
                .eigenvalues
                .iter()
                .zip(eig.eigenvectors.column_iter())
                .map(|(&v, c)| (v, c.into_owned()))
                .collect();
            pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
            pairs.into_iter().unzip()
        };
        if n > 0 {
            let (max, min) = (eigvals[0], eigvals[n - 1]);
            let cond = if min > 0.0 { max / min } else { f64::INFINITY };
            if cond.is_nan() || cond > cond_limit {
                return Err(Error::IllConditioned {
                    cond,
                    limit: cond_limit,
                });
            }
        }
        let eigprojs: Vec<DMatrix<C64>> = eigvecs.iter().map(|e| e * e.adjoint()).collect();
        let ginv = eigprojs
            .iter()
            .zip(&eigvals)
            .fold(DMatrix::zeros(n, n), |acc, (e, &gamma)| acc + e * C64::new(1.0 / gamma, 0.0));
        Ok(CoherentSpace {
            labels: labels.to_vec(),
            g,
            ginv,
            eigvals,
            eigvecs,
            eigprojs,
        })
    }

    pub fn from_set(set: &CSet) -> Result<Self> {
        Self::new(set.labels())
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_set(&self) -> CSet {
        CSet::new(self.labels.iter().copied()).expect("labels validated at construction")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn g(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn ginv(&self) -> &DMatrix<C64> {
        &self.ginv
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &[DVector<C64>] {
        &self.eigvecs
    }

    pub fn eigprojs(&self) -> &[DMatrix<C64>] {
        &self.eigprojs
    }

    pub fn cond(&self) -> f64 {
        match (self.eigvals.first(), self.eigvals.last()) {
            (Some(max), Some(min)) => max / min,
            _ => 1.0,
        }
    }

    pub fn two_point(&self) -> Option<GramTwoPoint> {
        (self.dim() == 2).then(|| GramTwoPoint::new(self.labels[0], self.labels[1]))
    }

    /// Smallest gap between consecutive eigenvalues relative to `γ_max`.
    pub fn min_relative_gap(&self) -> f64 {
        self.eigvals
            .windows(2)
            .map(|w| (w[0] - w[1]).abs() / self.eigvals[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// The space translated by `z`.
    pub fn shifted(&self, z: Label) -> Result<Self> {
        let zc = z.to_complex();
        let labels: Vec<Label> = self.labels.iter().map(|l| Label::from(l.to_complex() + zc)).collect();
        Self::new(&labels)
    }

    /// The space with every label multiplied by `e^{it}`.
    pub fn rotated(&self, t: f64) -> Result<Self> {
        let ph = C64::from_polar(1.0, t);
        let labels: Vec<Label> = self.labels.iter().map(|l| Label::from(l.to_complex() * ph)).collect();
        Self::new(&labels)
    }

    pub fn extended(&self, a: Label) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.push(a);
        Self::new(&labels)
    }

    /// The first `k` labels.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        Self::new(&self.labels[..k])
    }

    /// Metric inner product `u† g v` of two coordinate vectors.
    pub fn coord_inner(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        u.dotc(&(&self.g * v))
    }

    /// Residuals of the cached-field invariants.
    pub fn invariant_reports(&self, tol: f64) -> Vec<CheckReport> {
        let n = self.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let herm = (&self.g - self.g.adjoint()).norm();
        let diag = (0..n).map(|j| (self.g[(j, j)] - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
        let inv = (&self.g * &self.ginv - &id).norm();
        let spectral = self
            .eigprojs
            .iter()
            .zip(&self.eigvals)
            .fold(DMatrix::zeros(n, n), |acc, (e, &gamma)| acc + e * C64::new(gamma, 0.0));
        let spectral = (spectral - &self.g).norm();
        let mut ortho: f64 = 0.0;
        for (j, ej) in self.eigprojs.iter().enumerate() {
            for (k, ek) in self.eigprojs.iter().enumerate() {
                let target = if j == k { ej.clone() } else { DMatrix::zeros(n, n) };
                ortho = ortho.max((ej * ek - target).norm());
            }
        }
        let sum = (self.eigprojs.iter().fold(DMatrix::zeros(n, n), |acc, e| acc + e) - &id).norm();
        let min_eig = self.eigvals.last().copied().unwrap_or(1.0);
        vec![
            CheckReport::new("gram_hermitian", herm, tol),
            CheckReport::new("gram_unit_diagonal", diag, tol),
            CheckReport::new("gram_inverse", inv, tol),
            CheckReport::new("gram_spectral_sum", spectral, tol),
            CheckReport::new("eigprojector_orthogonality", ortho, tol),
            CheckReport::new("eigprojector_completeness", sum, tol),
            CheckReport::exact("gram_positive_definite", min_eig > 0.0),
        ]
    }

    /// Coherent states of the space as columns of an `(n_max+1)×|S|` matrix.
    pub fn basis_matrix(&self, trunc: &TruncationPolicy) -> Result<DMatrix<C64>> {
        trunc.check_labels(&self.labels)?;
        Ok(self.basis_block(trunc.dim()))
    }

    /// Exact number-basis components `⟨N|A_j⟩` for `N < dim`, with no
    /// truncation check: a block of the infinite-dimensional object.
    pub fn basis_block(&self, dim: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(dim, self.dim());
        for (j, l) in self.labels.iter().enumerate() {
            m.set_column(j, &coherent_amplitudes(l.to_complex(), dim));
        }
        m
    }

    /// Exact block `⟨M|Π(S)|N⟩`, `M, N < dim`.
    pub fn projector_block(&self, dim: usize) -> DMatrix<C64> {
        let v = self.basis_block(dim);
        &v * &self.ginv * v.adjoint()
    }

    pub fn coherent_vectors(&self, trunc: &TruncationPolicy) -> Result<Vec<FockVector>> {
        let v = self.basis_matrix(trunc)?;
        Ok(v.column_iter().map(|c| FockVector(c.into_owned())).collect())
    }
}

pub fn build_space(labels: &[Label]) -> Result<CoherentSpace> {
    CoherentSpace::new(labels)
}

/// `Π(S) = Σ G_jk |A_j⟩⟨A_k|`.
pub fn projector(space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<FockOperator> {
    let v = space.basis_matrix(trunc)?;
    Ok(FockOperator(&v * space.ginv() * v.adjoint()))
}

/// `Π⊥(S) = 1 − Π(S)`.
pub fn perp_projector(space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<FockOperator> {
    let p = projector(space, trunc)?;
    Ok(FockOperator(DMatrix::identity(p.dim(), p.dim()) - p.0))
}

/// Orthonormal vectors `|u_i⟩ = sqrt(τ_i) Π⊥(A_1..A_{i-1}) |A_i⟩`, by explicit
/// deflation (two Gram–Schmidt passes per step).
pub fn gs_vectors(space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<Vec<FockVector>> {
    let coh = space.coherent_vectors(trunc)?;
    let mut us: Vec<DVector<C64>> = Vec::with_capacity(coh.len());
    for a in coh {
        let mut u = a.0;
        for _ in 0..2 {
            for prev in &us {
                let c = prev.dotc(&u);
                u -= prev * c;
            }
        }
        // ‖Π⊥|A_i⟩‖² = 1/τ_i
        let n = u.norm();
        us.push(u / C64::new(n, 0.0));
    }
    Ok(us.into_iter().map(FockVector).collect())
}

/// `ϖ(A_1), ϖ(A_2|A_1), …`, each `|u_i⟩⟨u_i|`.
pub fn gs_chain(space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<Vec<FockOperator>> {
    Ok(gs_vectors(space, trunc)?.iter().map(|u| u.outer(u)).collect())
}

/// `τ_i = 1 / Tr[Π⊥(A_1..A_{i-1}) Π(A_i)]` for each step of the chain.
pub fn gs_taus(space: &CoherentSpace) -> Result<Vec<f64>> {
    (0..space.dim())
        .map(|i| {
            if i == 0 {
                return Ok(1.0);
            }
            let prev = space.prefix(i)?;
            // Tr[Π⊥ Π(A_i)] = 1 − ⟨A_i|Π(prev)|A_i⟩
            let w = DVector::from_iterator(i, prev.labels().iter().map(|&l| overlap(l, space.labels()[i])));
            let inside = w.dotc(&(prev.ginv() * &w)).re;
            Ok(1.0 / (1.0 - inside))
        })
        .collect()
}

/// Tolerance on `‖Π s − s‖` accepted by [`expand`], relative to `max(1, ‖s‖)`.
pub const EXPAND_TOL: f64 = 1e-8;

/// Coordinates `s_j = Σ G_jk ⟨A_k|s⟩` of a state in `H(S)`.
pub fn expand(s: &FockVector, space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<DVector<C64>> {
    let v = space.basis_matrix(trunc)?;
    if v.nrows() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.nrows(),
            found: s.dim(),
        });
    }
    let overlaps = v.adjoint() * &s.0;
    let coords = space.ginv() * overlaps;
    let residual = (&v * &coords - &s.0).norm();
    let tolerance = EXPAND_TOL * s.norm().max(1.0);
    if residual > tolerance {
        return Err(Error::NotInSpace { residual, tolerance });
    }
    Ok(coords)
}

/// `Σ s_j |A_j⟩`.
pub fn reconstruct(coords: &DVector<C64>, space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<FockVector> {
    if coords.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: coords.len(),
        });
    }
    Ok(FockVector(space.basis_matrix(trunc)? * coords))
}

/// `𝔰(|A|) = |A|² / (e^{|A|²} − 1)`, with `𝔰(0) = 1`.
pub fn s_function(modulus: f64) -> f64 {
    let x = modulus * modulus;
    if x < 1e-8 {
        // 1 / (1 + x/2! + x²/3! + …)
        1.0 / (1.0 + x / 2.0 + x * x / 6.0)
    } else {
        x / x.exp_m1()
    }
}

/// Numeric versus analytic moment traces of a coherent space.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTraces {
    pub ell: usize,
    /// `Tr[a^ℓ Π(S)]` against `Σ A_j^ℓ`.
    pub projector: (C64, C64),
    /// `Tr[a^ℓ ϖ(A_n|A_1..A_{n-1})]` against `A_n^ℓ`, one per chain element.
    pub chain: Vec<(C64, C64)>,
    /// `Tr[x Π]` against `√2 Re Σ A_j`.
    pub position: (f64, f64),
    /// `Tr[p Π]` against `√2 Im Σ A_j`.
    pub momentum: (f64, f64),
    /// `Tr[a†a Π(A_1, A_2)]` against `|A_1|² + |A_2|² + 𝔰(|A_1 − A_2|)`.
    pub number: Option<(f64, f64)>,
}

impl MomentTraces {
    pub fn reports(&self, tol: f64, number_tol: f64) -> Vec<CheckReport> {
        let l = self.ell;
        let mut out = vec![CheckReport::new(
            format!("trace_a{l}_projector"),
            (self.projector.0 - self.projector.1).norm(),
            tol,
        )];
        let chain = self.chain.iter().map(|(n, a)| (n - a).norm()).fold(0.0, f64::max);
        out.push(CheckReport::new(format!("trace_a{l}_chain"), chain, tol));
        out.push(CheckReport::new("trace_x_projector", (self.position.0 - self.position.1).abs(), tol));
        out.push(CheckReport::new("trace_p_projector", (self.momentum.0 - self.momentum.1).abs(), tol));
        if let Some((n, a)) = self.number {
            out.push(CheckReport::new("trace_number_two_point", (n - a).abs(), number_tol));
        }
        out
    }
}

fn check_ell(ell: usize) -> Result<()> {
    if (1..=4).contains(&ell) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("moment order {ell} outside 1..=4")))
    }
}

/// Room above the coherent-state rule needed to apply `a^ℓ` faithfully.
fn check_moment_truncation(space: &CoherentSpace, ell: usize, trunc: &TruncationPolicy) -> Result<()> {
    let reduced = TruncationPolicy {
        n_max: trunc.n_max.saturating_sub(ell),
        ..*trunc
    };
    reduced.check_labels(space.labels())
}

pub fn moment_traces(space: &CoherentSpace, ell: usize, trunc: &TruncationPolicy) -> Result<MomentTraces> {
    check_ell(ell)?;
    check_moment_truncation(space, ell, trunc)?;
    let p = projector(space, trunc)?;
    let al = annihilation(trunc).pow(ell);
    let analytic: C64 = space.labels().iter().map(|l| l.to_complex().powu(ell as u32)).sum();
    let numeric = al.compose(&p)?.trace();
    let chain = gs_chain(space, trunc)?
        .iter()
        .zip(space.labels())
        .map(|(w, l)| Ok((al.compose(w)?.trace(), l.to_complex().powu(ell as u32))))
        .collect::<Result<Vec<_>>>()?;
    let sum: C64 = space.labels().iter().map(|l| l.to_complex()).sum();
    let sqrt2 = std::f64::consts::SQRT_2;
    let position = (position_op(trunc).compose(&p)?.trace().re, sqrt2 * sum.re);
    let momentum = (momentum_op(trunc).compose(&p)?.trace().re, sqrt2 * sum.im);
    let number = if space.dim() == 2 {
        let (a1, a2) = (space.labels()[0], space.labels()[1]);
        let analytic = a1.norm_sqr() + a2.norm_sqr() + s_function(a1.distance(a2));
        Some((number_op(trunc).compose(&p)?.trace().re, analytic))
    } else {
        None
    };
    Ok(MomentTraces {
        ell,
        projector: (numeric, analytic),
        chain,
        position,
        momentum,
        number,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenRelationResiduals {
    /// `‖ϖ a^ℓ ϖ − A_last^ℓ ϖ‖_F` for the last chain element.
    pub chain: f64,
    /// `‖Π⊥ a^ℓ Π‖_F`.
    pub perp: f64,
}

/// Checks `ϖ(A_{n+1}|A_1..A_n) a^ℓ ϖ = A_{n+1}^ℓ ϖ` (with `A_{n+1}` the last
/// label of `space`) and `Π⊥ a^ℓ Π = 0`.
pub fn eigen_relation_check(space: &CoherentSpace, ell: usize, trunc: &TruncationPolicy) -> Result<EigenRelationResiduals> {
    check_ell(ell)?;
    check_moment_truncation(space, ell, trunc)?;
    let al = annihilation(trunc).pow(ell);
    let chain = gs_chain(space, trunc)?;
    let last_label = *space
        .labels()
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty coherent space".into()))?;
    let w = chain.last().expect("non-empty chain");
    let lhs = w.compose(&al)?.compose(w)?;
    let rhs = w.scale(last_label.to_complex().powu(ell as u32));
    let p = projector(space, trunc)?;
    let perp = FockOperator(DMatrix::identity(p.dim(), p.dim()) - &p.0);
    Ok(EigenRelationResiduals {
        chain: lhs.sub(&rhs)?.frobenius_norm(),
        perp: perp.compose(&al)?.compose(&p)?.frobenius_norm(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CovarianceResiduals {
    /// `‖D(z) Π(S) D(z)† − Π(S + z)‖_F`.
    pub displacement: f64,
    /// `‖e^{itN} Π(S) e^{−itN} − Π(S e^{it})‖_F`.
    pub evolution: f64,
    /// Largest chain-element residual under displacement.
    pub chain_displacement: f64,
    /// Largest chain-element residual under time evolution.
    pub chain_evolution: f64,
}

pub fn covariance_check(space: &CoherentSpace, z: Label, t: f64, trunc: &TruncationPolicy) -> Result<CovarianceResiduals> {
    let shifted = space.shifted(z)?;
    let rotated = space.rotated(t)?;
    let d = displacement_op(z, trunc)?;
    let u = evolution_op(t, trunc);
    let p = projector(space, trunc)?;
    let displacement = p.conjugate_by(&d)?.sub(&projector(&shifted, trunc)?)?.frobenius_norm();
    let evolution = p.conjugate_by(&u)?.sub(&projector(&rotated, trunc)?)?.frobenius_norm();
    let chain = gs_chain(space, trunc)?;
    let chain_shift = gs_chain(&shifted, trunc)?;
    let chain_rot = gs_chain(&rotated, trunc)?;
    let mut chain_displacement: f64 = 0.0;
    let mut chain_evolution: f64 = 0.0;
    for ((w, ws), wr) in chain.iter().zip(&chain_shift).zip(&chain_rot) {
        chain_displacement = chain_displacement.max(w.conjugate_by(&d)?.sub(ws)?.frobenius_norm());
        chain_evolution = chain_evolution.max(w.conjugate_by(&u)?.sub(wr)?.frobenius_norm());
    }
    Ok(CovarianceResiduals {
        displacement,
        evolution,
        chain_displacement,
        chain_evolution,
    })
}

/// Tolerance used when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-8;

pub fn check_density_matrix(rho: &FockOperator, tol: f64) -> Result<()> {
    let herm = rho.hermiticity_residual();
    if herm > tol {
        return Err(Error::NotADensityMatrix(format!("not Hermitian (residual {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotADensityMatrix(format!("trace {tr} is not 1")));
    }
    let sym = FockOperator((&rho.0 + rho.0.adjoint()) * C64::new(0.5, 0.0));
    let min = SymmetricEigen::new(sym.0).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::NotADensityMatrix(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Generalized Q-function `Tr[Π(S) ρ]`.
pub fn q_function(rho: &FockOperator, space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<f64> {
    check_density_matrix(rho, DENSITY_TOL)?;
    let p = projector(space, trunc)?;
    Ok(p.compose(rho)?.trace().re)
}

/// Which operator family is integrated over the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionKind {
    /// `∫ d²A/(nπ) Π(A, A+d_2, …, A+d_n)`.
    Projector,
    /// `∫ d²A/π ϖ(A | A+d_1, …, A+d_{n-1})`.
    Chain,
}

/// Labels at one quadrature node, ordered so that the operator of interest is
/// `Π` of the whole tuple (projector kind) or its last chain element.
fn node_labels(center: C64, offsets: &[Label], kind: ResolutionKind) -> Vec<Label> {
    let shifted = offsets.iter().map(|d| Label::from(center + d.to_complex()));
    match kind {
        ResolutionKind::Projector => std::iter::once(Label::from(center)).chain(shifted).collect(),
        ResolutionKind::Chain => shifted.chain(std::iter::once(Label::from(center))).collect(),
    }
}

fn node_block(center: C64, offsets: &[Label], kind: ResolutionKind, dim: usize) -> Result<DMatrix<C64>> {
    let labels = node_labels(center, offsets, kind);
    let full = CoherentSpace::new(&labels)?.projector_block(dim);
    Ok(match kind {
        ResolutionKind::Projector => full,
        ResolutionKind::Chain => {
            let prev = CoherentSpace::new(&labels[..labels.len() - 1])?.projector_block(dim);
            full - prev
        }
    })
}

fn integrate_blocks(offsets: &[Label], kind: ResolutionKind, grid: &DiskGrid, dim: usize) -> Result<DMatrix<C64>> {
    let angles = grid.angles();
    let partials: Vec<Result<DMatrix<C64>>> = grid
        .radial_nodes()
        .into_par_iter()
        .map(|(r, w)| {
            let mut acc = DMatrix::zeros(dim, dim);
            for &phi in &angles {
                acc += node_block(C64::from_polar(r, phi), offsets, kind, dim)?;
            }
            Ok(acc * C64::new(w, 0.0))
        })
        .collect();
    let mut total = DMatrix::zeros(dim, dim);
    for p in partials {
        total += p?;
    }
    let n = match kind {
        ResolutionKind::Projector => offsets.len() + 1,
        ResolutionKind::Chain => 1,
    };
    Ok(total / C64::new(n as f64 * std::f64::consts::PI, 0.0))
}

/// Default agreement required between a grid and its halved version.
pub const GRID_CONVERGENCE_TOL: f64 = 1e-4;

/// Quadrature estimate of the resolution-of-identity integral, restricted to
/// number states `0..=block`. Node operators are exact blocks (closed-form
/// Gram matrices), so the only errors are the disk cut-off and the rule.
/// Fails with `GridTooSmall` when the halved grid disagrees by more than
/// `convergence_tol` (Frobenius).
pub fn resolution_quadrature(
    offsets: &[Label],
    kind: ResolutionKind,
    grid: &DiskGrid,
    block: usize,
    convergence_tol: f64,
) -> Result<FockOperator> {
    let (op, difference) = resolution_with_difference(offsets, kind, grid, block)?;
    if difference.is_nan() || difference > convergence_tol {
        return Err(Error::GridTooSmall {
            difference,
            tolerance: convergence_tol,
        });
    }
    Ok(op)
}

/// The quadrature on `grid` together with its Frobenius distance to the
/// same quadrature on the halved grid.
pub fn resolution_with_difference(
    offsets: &[Label],
    kind: ResolutionKind,
    grid: &DiskGrid,
    block: usize,
) -> Result<(FockOperator, f64)> {
    let dim = block + 1;
    let fine = integrate_blocks(offsets, kind, grid, dim)?;
    let coarse = integrate_blocks(offsets, kind, &grid.halved(), dim)?;
    let difference = (&fine - coarse).norm();
    Ok((FockOperator(fine), difference))
}

/// `∫ d²A/(nπ) Q(A, A+d_2, …)` for a density matrix supported on `rho.dim()`
/// number states.
pub fn q_integral(rho: &FockOperator, offsets: &[Label], grid: &DiskGrid) -> Result<f64> {
    check_density_matrix(rho, DENSITY_TOL)?;
    let pi_avg = integrate_blocks(offsets, ResolutionKind::Projector, grid, rho.dim())?;
    Ok((pi_avg * &rho.0).trace().re)
}

/// Coefficients (ascending powers) of `Π_j (z − A_j*)`.
pub fn bargmann_polynomial(space: &CoherentSpace) -> Vec<C64> {
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for l in space.labels() {
        let root = l.to_complex().conj();
        let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * root;
        }
        coeffs = next;
    }
    coeffs
}

/// Normalized state whose Bargmann function is `Π_j (z − A_j*)`; it is
/// orthogonal to every `|A_j⟩` because the `A_j*` are zeros.
pub fn orthogonal_state(space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<FockVector> {
    if 4 * space.dim() > trunc.n_max {
        return Err(Error::InadequateTruncation {
            n_max: trunc.n_max,
            required: 4 * space.dim(),
        });
    }
    let poly = bargmann_polynomial(space);
    let mut amps = DVector::zeros(trunc.dim());
    let mut sqrt_fact = 1.0;
    for (n, c) in poly.iter().enumerate() {
        if n > 0 {
            sqrt_fact *= (n as f64).sqrt();
        }
        amps[n] = c * sqrt_fact;
    }
    Ok(FockVector(amps).normalized())
}

/// Largest `|⟨A_j|s⟩|` over the labels of the space.
pub fn max_overlap(s: &FockVector, space: &CoherentSpace, trunc: &TruncationPolicy) -> Result<f64> {
    space
        .coherent_vectors(trunc)?
        .iter()
        .map(|v| inner(v, s).map(|z| z.norm()))
        .try_fold(0.0, |m, x| x.map(|x| f64::max(m, x)))
}
