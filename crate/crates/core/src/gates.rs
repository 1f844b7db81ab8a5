//! Quantum CNOT gates on `H(S_A) ⊗ H(S_B)` in the non-orthogonal coherent basis.
//!
//! Operators are stored through their matrix elements `⟨A_k ⊗ B_m| U |A_l ⊗ B_n⟩`
//! (product index `k·n_B + m`). A coordinate vector `v` is mapped to
//! `(G_A ⊗ G_B) M v`, and products contract through `G`. With this convention
//! the CNOT is
//!
//! `U = Σ_j γ_jA E_j(S_A) ⊗ U_jT`, `U_jT = V(phases) = Σ_k e^{iφ_jk} γ_kB E_k(S_B)`,
//!
//! where `U_1T` has all phases zero (so `U_1T = g(S_B)`) and `U_jT` for
//! `j ≥ 2` flips only the sign of the `j`-th eigencomponent, `g − 2γ_j E_j`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::complex_sets::Label;
use crate::contour::{Ket, KetAtom, KernelTerm, ContourKernel, kernel_apply_ket};
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, FockOperator, FockVector, MaxAbs, TruncationPolicy, C64};
use crate::io::MatrixJson;
use crate::report::CheckReport;
use crate::spaces::CoherentSpace;

/// Smallest relative eigenvalue gap accepted by [`build_cnot4`].
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Largest two-mode dimension `(n_max + 1)²` for which a dense lifted
/// operator is materialized.
pub const DENSE_LIMIT: usize = 1024;

/// Coordinates in a (product) coherent basis.
pub type CoordState = DVector<C64>;

/// `u_A ⊗ u_B`.
pub fn product_state(u_a: &DVector<C64>, u_b: &DVector<C64>) -> CoordState {
    u_a.kronecker(u_b)
}

/// `u† g u`.
pub fn metric_norm_sqr(g: &DMatrix<C64>, u: &DVector<C64>) -> f64 {
    u.dotc(&(g * u)).re
}

fn metric_distance(g: &DMatrix<C64>, u: &DVector<C64>, v: &DVector<C64>) -> f64 {
    metric_norm_sqr(g, &(u - v)).max(0.0).sqrt()
}

fn check_square(m: &DMatrix<C64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

fn check_len(v: &DVector<C64>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// Coordinates of `Θ|s⟩` on a single space: `G Θ s`.
pub fn metric_apply(space: &CoherentSpace, theta: &DMatrix<C64>, v: &DVector<C64>) -> Result<DVector<C64>> {
    check_square(theta, space.dim())?;
    check_len(v, space.dim())?;
    Ok(space.ginv() * (theta * v))
}

/// Matrix elements of `ΘΦ`: `Θ G Φ`.
pub fn metric_product(theta: &DMatrix<C64>, phi: &DMatrix<C64>, space: &CoherentSpace) -> Result<DMatrix<C64>> {
    check_square(theta, space.dim())?;
    check_square(phi, space.dim())?;
    Ok(theta * space.ginv() * phi)
}

/// Matrix elements of `[Θ, Φ]`: `Θ G Φ − Φ G Θ`.
pub fn metric_commutator(theta: &DMatrix<C64>, phi: &DMatrix<C64>, space: &CoherentSpace) -> Result<DMatrix<C64>> {
    Ok(metric_product(theta, phi, space)? - metric_product(phi, theta, space)?)
}

/// Largest entry of `Θ G Θ† − g`.
pub fn unitarity_residual(theta: &DMatrix<C64>, g: &DMatrix<C64>, ginv: &DMatrix<C64>) -> f64 {
    (theta * ginv * theta.adjoint() - g).max_abs()
}

/// `V(φ) = Σ_k e^{iφ_k} γ_k E_k` on `H(S)`; `phases` has one entry per eigenvalue.
pub fn phase_gate(space: &CoherentSpace, phases: &[f64]) -> Result<DMatrix<C64>> {
    if phases.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: phases.len(),
        });
    }
    let n = space.dim();
    let mut v = DMatrix::zeros(n, n);
    for ((phi, gamma), e) in phases.iter().zip(space.eigvals()).zip(space.eigprojs()) {
        v += e * (C64::from_polar(*gamma, *phi));
    }
    Ok(v)
}

/// The target matrices `U_jT`: `U_1T = V(0, …, 0)` and `U_jT` with a phase
/// `π` on the `j`-th eigenvalue only.
pub fn target_matrices(space: &CoherentSpace) -> Vec<DMatrix<C64>> {
    let n = space.dim();
    (0..n)
        .map(|j| {
            let mut phases = vec![0.0; n];
            if j > 0 {
                phases[j] = std::f64::consts::PI;
            }
            phase_gate(space, &phases).expect("one phase per eigenvalue")
        })
        .collect()
}

/// A controlled gate on `H(S_A) ⊗ H(S_B)`, stored as matrix elements.
#[derive(Debug, Clone)]
pub struct GateMatrix {
    space_a: CoherentSpace,
    space_b: CoherentSpace,
    targets: Vec<DMatrix<C64>>,
    entries: DMatrix<C64>,
    g: DMatrix<C64>,
    ginv: DMatrix<C64>,
}

impl GateMatrix {
    pub fn dims(&self) -> (usize, usize) {
        (self.space_a.dim(), self.space_b.dim())
    }

    pub fn space_a(&self) -> &CoherentSpace {
        &self.space_a
    }

    pub fn space_b(&self) -> &CoherentSpace {
        &self.space_b
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// `U_jT`, in the order of the control eigenvalues.
    pub fn targets(&self) -> &[DMatrix<C64>] {
        &self.targets
    }

    /// `g_A ⊗ g_B`.
    pub fn metric(&self) -> &DMatrix<C64> {
        &self.g
    }

    /// `G_A ⊗ G_B`.
    pub fn inverse_metric(&self) -> &DMatrix<C64> {
        &self.ginv
    }

    /// `v ↦ (G_A ⊗ G_B) M v`.
    pub fn apply(&self, v: &CoordState) -> Result<CoordState> {
        check_len(v, self.g.nrows())?;
        Ok(&self.ginv * (&self.entries * v))
    }

    /// Coordinate-level map on the target for the control eigenvector `e_j`:
    /// `G_B U_jT`, which equals `1 − 2E_j` for `j ≥ 2`.
    pub fn target_map(&self, j: usize) -> DMatrix<C64> {
        self.space_b.ginv() * &self.targets[j]
    }

    /// Target map induced by the full gate: apply `U` to `e_j ⊗ b` for each
    /// coordinate basis vector `b` and read off the target factor.
    pub fn induced_target_map(&self, j: usize) -> DMatrix<C64> {
        let (na, nb) = self.dims();
        let e = &self.space_a.eigvecs()[j];
        let mut out = DMatrix::zeros(nb, nb);
        for col in 0..nb {
            let mut b = DVector::zeros(nb);
            b[col] = C64::new(1.0, 0.0);
            let w = self.apply(&product_state(e, &b)).expect("dimensions agree");
            for m in 0..nb {
                out[(m, col)] = (0..na).map(|k| e[k].conj() * w[k * nb + m]).sum::<C64>();
            }
        }
        out
    }

    /// Largest entry of `U (G ⊗ G) U† − g ⊗ g`.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.entries, &self.g, &self.ginv)
    }

    /// `‖U(e_j ⊗ T) − e_j ⊗ (G U_jT T)‖` in the product metric.
    pub fn control_eigen_residual(&self, j: usize, t: &DVector<C64>) -> Result<f64> {
        check_len(t, self.space_b.dim())?;
        let e = &self.space_a.eigvecs()[j];
        let out = self.apply(&product_state(e, t))?;
        let expect = product_state(e, &(self.target_map(j) * t));
        Ok(metric_distance(&self.g, &out, &expect))
    }

    /// Involution, bijectivity and unitarity of every induced target map.
    pub fn involution_reports(&self, tol: f64) -> Vec<CheckReport> {
        let nb = self.space_b.dim();
        let id = DMatrix::<C64>::identity(nb, nb);
        let mut out = Vec::new();
        for j in 0..self.targets.len() {
            let m = self.induced_target_map(j);
            out.push(CheckReport::new(format!("target map {} squared is identity", j + 1), (&m * &m - &id).max_abs(), tol));
            let sv = m.clone().singular_values();
            let cond = sv.max() / sv.min();
            out.push(CheckReport::new(format!("target map {} condition number", j + 1), cond, 1e3));
            out.push(CheckReport::new(
                format!("U_{}T metric unitarity", j + 1),
                unitarity_residual(&self.targets[j], self.space_b.g(), self.space_b.ginv()),
                tol,
            ));
        }
        out
    }

    /// The invariants every constructed gate must satisfy.
    pub fn reports(&self, tol: f64) -> Vec<CheckReport> {
        let mut out = vec![CheckReport::new("gate metric unitarity", self.unitarity_residual(), tol)];
        out.extend(self.involution_reports(tol));
        for j in 1..self.targets.len() {
            let c = metric_commutator(&self.targets[0], &self.targets[j], &self.space_b).expect("square");
            out.push(CheckReport::new(format!("[U_1T, U_{}T] = 0", j + 1), c.max_abs(), tol));
            let sq = metric_product(&self.targets[j], &self.targets[j], &self.space_b).expect("square");
            out.push(CheckReport::new(
                format!("U_{0}T G U_{0}T = g", j + 1),
                (sq - self.space_b.g()).max_abs(),
                tol,
            ));
        }
        if self.dims() == (2, 2) {
            out.extend(self.cnot2_mapping_reports(tol));
        }
        out
    }

    /// `T_p` and `T_m` for a two-point target space.
    pub fn target_pm(&self) -> Option<(DVector<C64>, DVector<C64>)> {
        (self.space_b.dim() == 2).then(|| {
            let e = self.space_b.eigvecs();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            ((&e[0] + &e[1]) * C64::new(s, 0.0), (&e[0] - &e[1]) * C64::new(s, 0.0))
        })
    }

    /// The four mappings `[e_i, T_p/m] → [e_i, T_p/m]` of the two-point CNOT.
    pub fn cnot2_mapping_reports(&self, tol: f64) -> Vec<CheckReport> {
        let Some((tp, tm)) = self.target_pm() else {
            return Vec::new();
        };
        let e = self.space_a.eigvecs();
        let cases = [
            ("e1 Tp -> e1 Tp", &e[0], &tp, &tp),
            ("e1 Tm -> e1 Tm", &e[0], &tm, &tm),
            ("e2 Tp -> e2 Tm", &e[1], &tp, &tm),
            ("e2 Tm -> e2 Tp", &e[1], &tm, &tp),
        ];
        cases
            .iter()
            .map(|(name, c, t_in, t_out)| {
                let out = self.apply(&product_state(c, t_in)).expect("dimensions agree");
                let res = metric_distance(&self.g, &out, &product_state(c, t_out));
                CheckReport::new(*name, res, tol)
            })
            .collect()
    }

    /// `‖M − (E_1 ⊗ 1 + E_2 ⊗ U_2T)‖` and `‖g_A − 1‖`, `‖g_B − 1‖`: the
    /// almost-orthogonal limit of the two-point gate.
    pub fn orthogonal_limit_residuals(&self) -> Option<(f64, f64)> {
        if self.dims() != (2, 2) {
            return None;
        }
        let ea = self.space_a.eigprojs();
        let id = DMatrix::<C64>::identity(2, 2);
        let approx = ea[0].kronecker(&id) + ea[1].kronecker(&self.targets[1]);
        let g_dev = (self.space_a.g() - &id).max_abs().max((self.space_b.g() - &id).max_abs());
        Some(((&self.entries - approx).max_abs(), g_dev))
    }

    pub fn to_json(&self) -> GateJson {
        GateJson {
            dims: self.dims(),
            labels_a: self.space_a.labels().to_vec(),
            labels_b: self.space_b.labels().to_vec(),
            entries: MatrixJson::from(&self.entries),
            metric_a: MetricJson::from(&self.space_a),
            metric_b: MetricJson::from(&self.space_b),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricJson {
    pub g: MatrixJson,
    pub ginv: MatrixJson,
    pub eigvals: Vec<f64>,
}

impl From<&CoherentSpace> for MetricJson {
    fn from(s: &CoherentSpace) -> Self {
        MetricJson {
            g: MatrixJson::from(s.g()),
            ginv: MatrixJson::from(s.ginv()),
            eigvals: s.eigvals().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateJson {
    pub dims: (usize, usize),
    pub labels_a: Vec<Label>,
    pub labels_b: Vec<Label>,
    pub entries: MatrixJson,
    pub metric_a: MetricJson,
    pub metric_b: MetricJson,
}

/// `U = Σ_j γ_jA E_j(S_A) ⊗ U_jT` for control and target spaces of equal size.
pub fn build_controlled(space_a: &CoherentSpace, space_b: &CoherentSpace) -> Result<GateMatrix> {
    if space_a.dim() != space_b.dim() {
        return Err(Error::WrongSpaceSize {
            expected: space_a.dim(),
            found: space_b.dim(),
        });
    }
    let targets = target_matrices(space_b);
    let n = space_a.dim() * space_b.dim();
    let mut entries = DMatrix::zeros(n, n);
    for ((gamma, e), t) in space_a.eigvals().iter().zip(space_a.eigprojs()).zip(&targets) {
        entries += (e * C64::new(*gamma, 0.0)).kronecker(t);
    }
    Ok(GateMatrix {
        g: space_a.g().kronecker(space_b.g()),
        ginv: space_a.ginv().kronecker(space_b.ginv()),
        space_a: space_a.clone(),
        space_b: space_b.clone(),
        targets,
        entries,
    })
}

fn expect_size(space: &CoherentSpace, n: usize) -> Result<()> {
    if space.dim() != n {
        return Err(Error::WrongSpaceSize {
            expected: n,
            found: space.dim(),
        });
    }
    Ok(())
}

/// CNOT on two-point control and target spaces.
pub fn build_cnot2(space_a: &CoherentSpace, space_b: &CoherentSpace) -> Result<GateMatrix> {
    expect_size(space_a, 2)?;
    expect_size(space_b, 2)?;
    build_controlled(space_a, space_b)
}

/// CNOT on four-point spaces; both Gram spectra must be non-degenerate so
/// that the eigenprojectors are labelled unambiguously.
pub fn build_cnot4(space_a: &CoherentSpace, space_b: &CoherentSpace) -> Result<GateMatrix> {
    expect_size(space_a, 4)?;
    expect_size(space_b, 4)?;
    for s in [space_a, space_b] {
        let gap = s.min_relative_gap();
        if gap < DEGENERACY_TOL {
            return Err(Error::DegenerateSpectrum { gap });
        }
    }
    build_controlled(space_a, space_b)
}

/// `{r, i r, −r, −i r}`.
pub fn square_labels(r: f64) -> Vec<Label> {
    vec![Label::new(r, 0.0), Label::new(0.0, r), Label::new(-r, 0.0), Label::new(0.0, -r)]
}

/// A two-mode Fock state `Ψ_{N1,N2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState(pub DMatrix<C64>);

impl TwoModeState {
    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &FockVector, b: &FockVector) -> Self {
        TwoModeState(&a.0 * b.0.transpose())
    }

    pub fn zeros(dim: usize) -> Self {
        TwoModeState(DMatrix::zeros(dim, dim))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn inner(&self, other: &TwoModeState) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &TwoModeState) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// A gate lifted to truncated two-mode Fock space in factored form:
/// `Σ Θ̃_{(k,m),(l,n)} |A_k ⊗ B_m⟩⟨A_l ⊗ B_n|` with `Θ̃ = (G ⊗ G) M (G ⊗ G)`.
#[derive(Debug, Clone)]
pub struct LiftedGate {
    coeffs: DMatrix<C64>,
    va: DMatrix<C64>,
    vb: DMatrix<C64>,
}

/// Columns are the truncated coherent vectors of the space.
fn coherent_columns(space: &CoherentSpace, dim: usize) -> DMatrix<C64> {
    let mut v = DMatrix::zeros(dim, space.dim());
    for (j, a) in space.labels().iter().enumerate() {
        v.set_column(j, &coherent_amplitudes(a.to_complex(), dim));
    }
    v
}

pub fn lift_to_fock(gate: &GateMatrix, trunc: &TruncationPolicy) -> Result<LiftedGate> {
    trunc.check_labels(gate.space_a.labels().iter().chain(gate.space_b.labels()))?;
    let dim = trunc.dim();
    Ok(LiftedGate {
        coeffs: &gate.ginv * &gate.entries * &gate.ginv,
        va: coherent_columns(&gate.space_a, dim),
        vb: coherent_columns(&gate.space_b, dim),
    })
}

impl LiftedGate {
    pub fn dim(&self) -> usize {
        self.va.nrows()
    }

    /// The adjoint, with coefficients `Θ̃†`.
    pub fn adjoint(&self) -> Self {
        LiftedGate {
            coeffs: self.coeffs.adjoint(),
            va: self.va.clone(),
            vb: self.vb.clone(),
        }
    }

    /// `Π(S_A) ⊗ Π(S_B)` in the same factored form.
    pub fn subspace_projector(gate: &GateMatrix, trunc: &TruncationPolicy) -> Result<Self> {
        let mut p = lift_to_fock(gate, trunc)?;
        p.coeffs = gate.ginv.clone();
        Ok(p)
    }

    pub fn apply(&self, psi: &TwoModeState) -> Result<TwoModeState> {
        let dim = self.dim();
        if psi.0.nrows() != dim || psi.0.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.0.nrows(),
            });
        }
        let (na, nb) = (self.va.ncols(), self.vb.ncols());
        let c = self.va.adjoint() * &psi.0 * self.vb.map(|x| x.conj());
        let cv = DVector::from_fn(na * nb, |i, _| c[(i / nb, i % nb)]);
        let w = &self.coeffs * cv;
        let wm = DMatrix::from_fn(na, nb, |k, m| w[k * nb + m]);
        Ok(TwoModeState(&self.va * wm * self.vb.transpose()))
    }

    /// The two-mode state with coherent-product coordinates `u`.
    pub fn state_of(&self, u: &CoordState) -> Result<TwoModeState> {
        let (na, nb) = (self.va.ncols(), self.vb.ncols());
        check_len(u, na * nb)?;
        let um = DMatrix::from_fn(na, nb, |k, m| u[k * nb + m]);
        Ok(TwoModeState(&self.va * um * self.vb.transpose()))
    }

    /// Dense `(n_max+1)² × (n_max+1)²` operator, index `N1·dim + N2`.
    pub fn to_dense(&self) -> Result<FockOperator> {
        let dim = self.dim();
        if dim * dim > DENSE_LIMIT {
            return Err(Error::TooLarge {
                what: "dense two-mode operator",
                size: dim * dim,
                limit: DENSE_LIMIT,
            });
        }
        let basis = self.va.kronecker(&self.vb);
        Ok(FockOperator(&basis * &self.coeffs * basis.adjoint()))
    }
}

/// Residual of `U†U = Π ⊗ Π` on the lifted gate, probed on product coherent
/// states of both spaces and on the first few number states.
pub fn lifted_unitarity_residual(gate: &GateMatrix, trunc: &TruncationPolicy) -> Result<f64> {
    let u = lift_to_fock(gate, trunc)?;
    let ud = u.adjoint();
    let p = LiftedGate::subspace_projector(gate, trunc)?;
    let dim = trunc.dim();
    let mut probes = Vec::new();
    for a in gate.space_a.labels() {
        for b in gate.space_b.labels() {
            let shifted = |l: &Label| {
                FockVector(coherent_amplitudes(l.to_complex() + C64::new(0.25, -0.15), dim))
            };
            probes.push(TwoModeState::product(&shifted(a), &shifted(b)));
        }
    }
    for n1 in 0..3.min(dim) {
        for n2 in 0..3.min(dim) {
            let mut psi = TwoModeState::zeros(dim);
            psi.0[(n1, n2)] = C64::new(1.0, 0.0);
            probes.push(psi);
        }
    }
    let mut worst: f64 = 0.0;
    for psi in &probes {
        let lhs = ud.apply(&u.apply(psi)?)?;
        let rhs = p.apply(psi)?;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// Matrix of the lifted two-point gate in the orthonormal basis
/// `{ẽ_1, ẽ_2} ⊗ {T̃_p, T̃_m}`, where `ẽ_j = Σ_k (e_j)_k |A_k⟩ / sqrt(γ_j)`
/// and `T̃_{p,m} = (f̃_1 ± f̃_2)/sqrt(2)` come from the target eigenvectors.
pub fn orthonormal_cnot_matrix(gate: &GateMatrix, trunc: &TruncationPolicy) -> Result<DMatrix<C64>> {
    expect_size(&gate.space_a, 2)?;
    expect_size(&gate.space_b, 2)?;
    let u = lift_to_fock(gate, trunc)?;
    let orth = |space: &CoherentSpace, v: &DMatrix<C64>| -> Vec<DVector<C64>> {
        space
            .eigvecs()
            .iter()
            .zip(space.eigvals())
            .map(|(e, g)| v * e / C64::new(g.sqrt(), 0.0))
            .collect()
    };
    let ctrl = orth(&gate.space_a, &u.va);
    let f = orth(&gate.space_b, &u.vb);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let tgt = [(&f[0] + &f[1]) * s, (&f[0] - &f[1]) * s];
    let mut basis = Vec::with_capacity(4);
    for c in &ctrl {
        for t in &tgt {
            basis.push(TwoModeState(c * t.transpose()));
        }
    }
    let images: Vec<TwoModeState> = basis.iter().map(|b| u.apply(b)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(4, 4, |i, j| basis[i].inner(&images[j])))
}

/// The textbook CNOT in the computational basis.
pub fn textbook_cnot() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(i, j)] = C64::new(1.0, 0.0);
    }
    m
}

/// A sum of product kets `Σ s_A ⊗ s_B`.
pub type ProductKets = Vec<(Ket, Ket)>;

/// `U (s_A ⊗ s_B)` through the residue engine: the gate is split into
/// `Σ_{k,l} |A_k⟩⟨A_l| ⊗ M^{kl}_B` and each factor acts as a contour kernel.
pub fn apply_via_contour(gate: &GateMatrix, s_a: &Ket, s_b: &Ket) -> Result<ProductKets> {
    let coeffs = &gate.ginv * &gate.entries * &gate.ginv;
    let (na, nb) = gate.dims();
    let la = gate.space_a.labels();
    let mut out = Vec::with_capacity(na * na);
    for k in 0..na {
        for l in 0..na {
            let w = (-0.5 * (la[k].norm_sqr() + la[l].norm_sqr())).exp();
            let ka = ContourKernel::from_parts(
                C64::new(0.0, 0.0),
                vec![KernelTerm {
                    c: C64::new(w, 0.0),
                    atom: KetAtom::Exp(la[k]),
                    p: la[l].conj(),
                }],
            );
            let block = DMatrix::from_fn(nb, nb, |m, n| coeffs[(k * nb + m, l * nb + n)]);
            let kb = ContourKernel::from_coherent_coeffs(&gate.space_b, &block)?;
            let a_out = kernel_apply_ket(&ka, s_a);
            let b_out = kernel_apply_ket(&kb, s_b);
            if !a_out.is_zero() && !b_out.is_zero() {
                out.push((a_out, b_out));
            }
        }
    }
    Ok(out)
}

/// Product-basis coordinates of a sum of product kets lying in the space.
pub fn product_kets_coords(gate: &GateMatrix, kets: &ProductKets) -> Result<CoordState> {
    let (na, nb) = gate.dims();
    let mut u = DVector::zeros(na * nb);
    for (a, b) in kets {
        u += product_state(&a.coords(&gate.space_a)?, &b.coords(&gate.space_b)?);
    }
    Ok(u)
}

/// Pairwise residuals of coordinate, residue-engine and truncated-Fock
/// application of the gate to `u_A ⊗ u_B`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TriangleResiduals {
    pub coords_vs_contour: f64,
    pub coords_vs_fock: f64,
    pub contour_vs_fock: f64,
}

impl TriangleResiduals {
    pub fn max(&self) -> f64 {
        self.coords_vs_contour.max(self.coords_vs_fock).max(self.contour_vs_fock)
    }
}

pub fn consistency_triangle(
    gate: &GateMatrix,
    u_a: &DVector<C64>,
    u_b: &DVector<C64>,
    trunc: &TruncationPolicy,
) -> Result<TriangleResiduals> {
    check_len(u_a, gate.space_a.dim())?;
    check_len(u_b, gate.space_b.dim())?;
    let coords = gate.apply(&product_state(u_a, u_b))?;

    let s_a = crate::contour::ket_of(&gate.space_a, u_a)?;
    let s_b = crate::contour::ket_of(&gate.space_b, u_b)?;
    let kets = apply_via_contour(gate, &s_a, &s_b)?;
    let contour_coords = product_kets_coords(gate, &kets)?;

    let lifted = lift_to_fock(gate, trunc)?;
    let input = lifted.state_of(&product_state(u_a, u_b))?;
    let fock_out = lifted.apply(&input)?;
    let dim = trunc.dim();
    let mut contour_fock = TwoModeState::zeros(dim);
    for (a, b) in &kets {
        contour_fock.0 += TwoModeState::product(&a.to_fock(dim), &b.to_fock(dim)).0;
    }
    Ok(TriangleResiduals {
        coords_vs_contour: metric_distance(&gate.g, &coords, &contour_coords),
        coords_vs_fock: lifted.state_of(&coords)?.distance(&fock_out),
        contour_vs_fock: contour_fock.distance(&fock_out),
    })
}
