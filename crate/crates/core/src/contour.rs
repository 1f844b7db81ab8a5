//! Residue calculus for the Dirac contour representation.
//!
//! Kets are entire functions `s(z) = Σ_N s_N z^N / sqrt(N!)`, bras are the
//! rational functions `f(z) = Σ_N f_N* sqrt(N!) / z^{N+1}`, and an operator is a
//! kernel `Θ(z1, z2)`. For coherent-superposition states these are finite sums:
//!
//! * ket: `Σ c e^{a z}` plus an optional polynomial part,
//! * bra: `Σ c / (z − p)` plus an optional polynomial part in `1/z`,
//! * kernel: `cauchy / (z2 − z1) + Σ c φ(z1) / (z2 − p)` with `φ` either
//!   `e^{a z1}` or a monomial `z1^N`.
//!
//! Every contour integral reduces to a sum of residues at simple poles, so all
//! operations here are closed-form coefficient manipulations. Equal keys are
//! merged and terms below [`PRUNE_REL`] of the largest coefficient in the same
//! sum are dropped, which is how pole cancellations show up.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex_sets::{CSet, Label};
use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockVector, C64};
use crate::spaces::CoherentSpace;

/// Relative threshold below which a merged coefficient counts as cancelled.
pub const PRUNE_REL: f64 = 1e-15;

/// Default relative tolerance of [`lives_in_check`].
pub const LIVES_IN_TOL: f64 = 1e-9;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Drops coefficients that are zero or negligible against `scale`.
fn negligible(c: C64, scale: f64) -> bool {
    let m = c.norm();
    m == 0.0 || m < PRUNE_REL * scale
}

fn trim_poly(poly: &mut Vec<C64>, scale: f64) {
    for c in poly.iter_mut() {
        if negligible(*c, scale) {
            *c = zero();
        }
    }
    while poly.last().is_some_and(|c| *c == zero()) {
        poly.pop();
    }
}

fn add_poly(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
    let mut out = vec![zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c * sign;
    }
    out
}

/// `a^n / n!` for `n = 0..len`.
fn exp_taylor(a: C64, len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    let mut t = C64::new(1.0, 0.0);
    for n in 0..len {
        if n > 0 {
            t = t * a / n as f64;
        }
        out.push(t);
    }
    out
}

/// `a^n / sqrt(n!)` for `n = 0..len`.
fn scaled_powers(a: C64, len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    let mut t = C64::new(1.0, 0.0);
    for n in 0..len {
        if n > 0 {
            t = t * a / (n as f64).sqrt();
        }
        out.push(t);
    }
    out
}

fn sqrt_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut f = 1.0;
    for n in 0..len {
        if n > 0 {
            f *= (n as f64).sqrt();
        }
        out.push(f);
    }
    out
}

/// Horner evaluation of `Σ q_N z^N`.
fn eval_poly(poly: &[C64], z: C64) -> C64 {
    poly.iter().rev().fold(zero(), |acc, c| acc * z + c)
}

/// `c e^{a z}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub c: C64,
    pub a: Label,
}

/// `c / (z − p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub c: C64,
    pub p: Label,
}

/// The `z1` factor of a kernel term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KetAtom {
    /// `e^{a z}`
    Exp(Label),
    /// `z^N`
    Mono(usize),
}

impl KetAtom {
    pub fn eval(&self, z: C64) -> C64 {
        match *self {
            KetAtom::Exp(a) => (a.to_complex() * z).exp(),
            KetAtom::Mono(n) => z.powu(n as u32),
        }
    }

    pub fn to_ket(&self) -> Ket {
        match *self {
            KetAtom::Exp(a) => Ket::from_parts(vec![ExpTerm { c: C64::new(1.0, 0.0), a }], vec![]),
            KetAtom::Mono(n) => {
                let mut poly = vec![zero(); n + 1];
                poly[n] = C64::new(1.0, 0.0);
                Ket::from_parts(vec![], poly)
            }
        }
    }

    fn cmp_key(&self, other: &KetAtom) -> Ordering {
        match (self, other) {
            (KetAtom::Exp(a), KetAtom::Exp(b)) => a.canonical_cmp(b),
            (KetAtom::Exp(_), KetAtom::Mono(_)) => Ordering::Less,
            (KetAtom::Mono(_), KetAtom::Exp(_)) => Ordering::Greater,
            (KetAtom::Mono(m), KetAtom::Mono(n)) => m.cmp(n),
        }
    }
}

/// `c φ(z1) / (z2 − p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTerm {
    pub c: C64,
    pub atom: KetAtom,
    pub p: Label,
}

/// A ket function: exponential terms plus polynomial coefficients `q_N` on `z^N`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Ket {
    exps: Vec<ExpTerm>,
    poly: Vec<C64>,
}

impl Ket {
    /// Merges equal exponents, prunes cancellations and sorts by exponent.
    pub fn from_parts(mut exps: Vec<ExpTerm>, mut poly: Vec<C64>) -> Self {
        exps.sort_by(|x, y| x.a.canonical_cmp(&y.a));
        let mut merged: Vec<ExpTerm> = Vec::with_capacity(exps.len());
        for t in exps {
            match merged.last_mut() {
                Some(last) if last.a == t.a => last.c += t.c,
                _ => merged.push(t),
            }
        }
        let scale = merged
            .iter()
            .map(|t| t.c.norm())
            .chain(poly.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        merged.retain(|t| !negligible(t.c, scale));
        trim_poly(&mut poly, scale);
        Ket { exps: merged, poly }
    }

    pub fn zero() -> Self {
        Ket::default()
    }

    /// `|A⟩ ↦ e^{Az − |A|²/2}`.
    pub fn coherent(a: Label) -> Self {
        Ket::from_parts(
            vec![ExpTerm {
                c: C64::new((-0.5 * a.norm_sqr()).exp(), 0.0),
                a,
            }],
            vec![],
        )
    }

    /// `|N⟩ ↦ z^N / sqrt(N!)`.
    pub fn number(n: usize) -> Self {
        let mut poly = vec![zero(); n + 1];
        poly[n] = C64::new(1.0 / sqrt_factorials(n + 1)[n], 0.0);
        Ket::from_parts(vec![], poly)
    }

    /// Ket with the given Bargmann coefficients `q_N` (ascending powers).
    pub fn from_polynomial(coeffs: Vec<C64>) -> Self {
        Ket::from_parts(vec![], coeffs)
    }

    /// Polynomial ket of a truncated Fock vector: `q_N = s_N / sqrt(N!)`.
    pub fn from_fock(s: &FockVector) -> Self {
        let sf = sqrt_factorials(s.dim());
        Ket::from_polynomial(s.amps().iter().zip(&sf).map(|(c, f)| c / f).collect())
    }

    pub fn exp_terms(&self) -> &[ExpTerm] {
        &self.exps
    }

    pub fn poly(&self) -> &[C64] {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty() && self.poly.is_empty()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.exps
            .iter()
            .map(|t| t.c * (t.a.to_complex() * z).exp())
            .sum::<C64>()
            + eval_poly(&self.poly, z)
    }

    /// Taylor coefficients `[z^N] s` for `N = 0..len`.
    pub fn taylor(&self, len: usize) -> Vec<C64> {
        let mut out = vec![zero(); len];
        for t in &self.exps {
            for (o, x) in out.iter_mut().zip(exp_taylor(t.a.to_complex(), len)) {
                *o += t.c * x;
            }
        }
        for (o, q) in out.iter_mut().zip(&self.poly) {
            *o += q;
        }
        out
    }

    /// Fock amplitudes `s_N = sqrt(N!) [z^N] s`, `N < dim`.
    pub fn to_fock(&self, dim: usize) -> FockVector {
        let mut amps = DVector::zeros(dim);
        for t in &self.exps {
            for (n, x) in scaled_powers(t.a.to_complex(), dim).into_iter().enumerate() {
                amps[n] += t.c * x;
            }
        }
        let sf = sqrt_factorials(dim);
        for (n, q) in self.poly.iter().enumerate().take(dim) {
            amps[n] += q * sf[n];
        }
        FockVector(amps)
    }

    /// Coordinates `u` with `s = Σ u_j |A_j⟩`; fails if the ket has terms
    /// outside the space.
    pub fn coords(&self, space: &CoherentSpace) -> Result<DVector<C64>> {
        let mut u = DVector::zeros(space.dim());
        let mut residual = self.poly.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for t in &self.exps {
            match space.labels().iter().position(|l| *l == t.a) {
                Some(j) => u[j] += t.c * (0.5 * t.a.norm_sqr()).exp(),
                None => residual = residual.max(t.c.norm()),
            }
        }
        if residual > 0.0 {
            return Err(Error::NotInSpace {
                residual,
                tolerance: 0.0,
            });
        }
        Ok(u)
    }

    pub fn scale(&self, k: C64) -> Ket {
        Ket::from_parts(
            self.exps.iter().map(|t| ExpTerm { c: t.c * k, a: t.a }).collect(),
            self.poly.iter().map(|c| c * k).collect(),
        )
    }

    pub fn add(&self, other: &Ket) -> Ket {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Ket) -> Ket {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Ket, sign: f64) -> Ket {
        let mut exps = self.exps.clone();
        exps.extend(other.exps.iter().map(|t| ExpTerm { c: t.c * sign, a: t.a }));
        Ket::from_parts(exps, add_poly(&self.poly, &other.poly, sign))
    }

    /// The bra `⟨s|` of this ket.
    pub fn dual(&self) -> Bra {
        let poles = self
            .exps
            .iter()
            .map(|t| PoleTerm { c: t.c.conj(), p: t.a.conj() })
            .collect();
        let mut fact = 1.0;
        let poly = self
            .poly
            .iter()
            .enumerate()
            .map(|(n, q)| {
                if n > 0 {
                    fact *= n as f64;
                }
                q.conj() * fact
            })
            .collect();
        Bra::from_parts(poles, poly)
    }

    /// `⟨s|s⟩`.
    pub fn norm_sqr(&self) -> f64 {
        scalar(&self.dual(), self).re
    }
}

/// A bra function: simple poles plus coefficients `b_N` on `1/z^{N+1}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Bra {
    poles: Vec<PoleTerm>,
    poly: Vec<C64>,
}

impl Bra {
    /// Merges equal poles, prunes cancellations and sorts by pole.
    pub fn from_parts(mut poles: Vec<PoleTerm>, mut poly: Vec<C64>) -> Self {
        poles.sort_by(|x, y| x.p.canonical_cmp(&y.p));
        let mut merged: Vec<PoleTerm> = Vec::with_capacity(poles.len());
        for t in poles {
            match merged.last_mut() {
                Some(last) if last.p == t.p => last.c += t.c,
                _ => merged.push(t),
            }
        }
        let scale = merged
            .iter()
            .map(|t| t.c.norm())
            .chain(poly.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        merged.retain(|t| !negligible(t.c, scale));
        trim_poly(&mut poly, scale);
        Bra { poles: merged, poly }
    }

    /// `⟨A| ↦ e^{−|A|²/2} / (z − A*)`.
    pub fn coherent(a: Label) -> Self {
        Bra::from_parts(
            vec![PoleTerm {
                c: C64::new((-0.5 * a.norm_sqr()).exp(), 0.0),
                p: a.conj(),
            }],
            vec![],
        )
    }

    /// `⟨N| ↦ sqrt(N!) / z^{N+1}`.
    pub fn number(n: usize) -> Self {
        let mut poly = vec![zero(); n + 1];
        poly[n] = C64::new(sqrt_factorials(n + 1)[n], 0.0);
        Bra::from_parts(vec![], poly)
    }

    pub fn pole_terms(&self) -> &[PoleTerm] {
        &self.poles
    }

    pub fn poly(&self) -> &[C64] {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poles.is_empty() && self.poly.is_empty()
    }

    /// Value at `z`, valid outside every pole.
    pub fn eval(&self, z: C64) -> C64 {
        let inv = z.inv();
        self.poles.iter().map(|t| t.c / (z - t.p.to_complex())).sum::<C64>()
            + inv * eval_poly(&self.poly, inv)
    }

    /// Distinct pole locations; the polynomial part contributes `0`.
    pub fn pole_set(&self) -> CSet {
        let mut poles: Vec<Label> = self.poles.iter().map(|t| t.p).collect();
        if !self.poly.is_empty() && !poles.iter().any(|p| p.norm_sqr() == 0.0) {
            poles.push(Label::ZERO);
        }
        CSet::from_distinct(poles)
    }

    /// The state `f` with `⟨f|` equal to this bra, as Fock amplitudes
    /// `f_N = conj(b_N) / sqrt(N!)`.
    pub fn to_fock(&self, dim: usize) -> FockVector {
        let mut amps = DVector::zeros(dim);
        for t in &self.poles {
            for (n, x) in scaled_powers(t.p.to_complex(), dim).into_iter().enumerate() {
                amps[n] += (t.c * x).conj();
            }
        }
        let sf = sqrt_factorials(dim);
        for (n, b) in self.poly.iter().enumerate().take(dim) {
            amps[n] += b.conj() / sf[n];
        }
        FockVector(amps)
    }

    pub fn scale(&self, k: C64) -> Bra {
        Bra::from_parts(
            self.poles.iter().map(|t| PoleTerm { c: t.c * k, p: t.p }).collect(),
            self.poly.iter().map(|c| c * k).collect(),
        )
    }

    pub fn add(&self, other: &Bra) -> Bra {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Bra) -> Bra {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Bra, sign: f64) -> Bra {
        let mut poles = self.poles.clone();
        poles.extend(other.poles.iter().map(|t| PoleTerm { c: t.c * sign, p: t.p }));
        Bra::from_parts(poles, add_poly(&self.poly, &other.poly, sign))
    }
}

fn check_coeffs(space: &CoherentSpace, coeffs: &DVector<C64>) -> Result<()> {
    if coeffs.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: coeffs.len(),
        });
    }
    Ok(())
}

/// `Σ λ_j |A_j⟩ ↦ Σ λ_j e^{A_j z − |A_j|²/2}`.
pub fn ket_of(space: &CoherentSpace, coeffs: &DVector<C64>) -> Result<Ket> {
    check_coeffs(space, coeffs)?;
    let exps = space
        .labels()
        .iter()
        .zip(coeffs.iter())
        .map(|(a, c)| ExpTerm {
            c: c * (-0.5 * a.norm_sqr()).exp(),
            a: *a,
        })
        .collect();
    Ok(Ket::from_parts(exps, vec![]))
}

/// `Σ λ_j* ⟨A_j| ↦ Σ λ_j* e^{−|A_j|²/2} / (z − A_j*)`.
pub fn bra_of(space: &CoherentSpace, coeffs: &DVector<C64>) -> Result<Bra> {
    Ok(ket_of(space, coeffs)?.dual())
}

/// `⟨f|s⟩`: residues of `f(z) s(z)` at the poles of `f`.
pub fn scalar(f: &Bra, s: &Ket) -> C64 {
    let poles: C64 = f.poles.iter().map(|t| t.c * s.eval(t.p.to_complex())).sum();
    let taylor = s.taylor(f.poly.len());
    poles + f.poly.iter().zip(&taylor).map(|(b, q)| b * q).sum::<C64>()
}

/// An operator kernel `Θ(z1, z2)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourKernel {
    cauchy: C64,
    terms: Vec<KernelTerm>,
}

impl ContourKernel {
    /// Merges terms with equal `(p, φ)`, prunes cancellations and sorts by
    /// pole, then by atom.
    pub fn from_parts(cauchy: C64, mut terms: Vec<KernelTerm>) -> Self {
        terms.sort_by(|x, y| x.p.canonical_cmp(&y.p).then_with(|| x.atom.cmp_key(&y.atom)));
        let mut merged: Vec<KernelTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.p == t.p && last.atom == t.atom => last.c += t.c,
                _ => merged.push(t),
            }
        }
        let scale = merged.iter().map(|t| t.c.norm()).fold(cauchy.norm(), f64::max);
        merged.retain(|t| !negligible(t.c, scale));
        let cauchy = if negligible(cauchy, scale) { zero() } else { cauchy };
        ContourKernel { cauchy, terms: merged }
    }

    pub fn zero() -> Self {
        ContourKernel::default()
    }

    /// The identity, `1 / (z2 − z1)`.
    pub fn identity() -> Self {
        ContourKernel {
            cauchy: C64::new(1.0, 0.0),
            terms: vec![],
        }
    }

    /// `Σ λ_jk |A_j⟩⟨A_k|` for a coefficient matrix in the coherent basis.
    pub fn from_coherent_coeffs(space: &CoherentSpace, lambda: &DMatrix<C64>) -> Result<Self> {
        let n = space.dim();
        if lambda.nrows() != n || lambda.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: lambda.nrows().max(lambda.ncols()),
            });
        }
        let labels = space.labels();
        let mut terms = Vec::with_capacity(n * n);
        for (j, aj) in labels.iter().enumerate() {
            for (k, ak) in labels.iter().enumerate() {
                terms.push(KernelTerm {
                    c: lambda[(j, k)] * (-0.5 * (aj.norm_sqr() + ak.norm_sqr())).exp(),
                    atom: KetAtom::Exp(*aj),
                    p: ak.conj(),
                });
            }
        }
        Ok(ContourKernel::from_parts(zero(), terms))
    }

    /// Kernel of an operator on `H(S)` given by its matrix elements
    /// `Θ_kl = ⟨A_k|Θ|A_l⟩`; the coherent coefficients are `G Θ G`.
    pub fn from_matrix_elements(space: &CoherentSpace, elements: &DMatrix<C64>) -> Result<Self> {
        let g = space.ginv();
        if elements.shape() != g.shape() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: elements.nrows().max(elements.ncols()),
            });
        }
        ContourKernel::from_coherent_coeffs(space, &(g * elements * g))
    }

    /// `|s⟩⟨f|`. Bras with a polynomial part would need higher-order poles
    /// and are rejected.
    pub fn outer(s: &Ket, f: &Bra) -> Result<Self> {
        if !f.poly.is_empty() {
            return Err(Error::InvalidArgument(
                "outer product with a polynomial bra is not representable by simple poles".into(),
            ));
        }
        let mut terms = Vec::new();
        for pt in &f.poles {
            for et in &s.exps {
                terms.push(KernelTerm {
                    c: et.c * pt.c,
                    atom: KetAtom::Exp(et.a),
                    p: pt.p,
                });
            }
            for (n, q) in s.poly.iter().enumerate() {
                terms.push(KernelTerm {
                    c: q * pt.c,
                    atom: KetAtom::Mono(n),
                    p: pt.p,
                });
            }
        }
        Ok(ContourKernel::from_parts(zero(), terms))
    }

    pub fn cauchy(&self) -> C64 {
        self.cauchy
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.cauchy == zero() && self.terms.is_empty()
    }

    /// Largest coefficient magnitude, including the Cauchy term.
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.c.norm()).fold(self.cauchy.norm(), f64::max)
    }

    /// Distinct poles in `z2`.
    pub fn pole_set(&self) -> CSet {
        let mut poles: Vec<Label> = Vec::new();
        for t in &self.terms {
            if poles.last() != Some(&t.p) {
                poles.push(t.p);
            }
        }
        CSet::from_distinct(poles)
    }

    pub fn scale(&self, k: C64) -> Self {
        ContourKernel::from_parts(
            self.cauchy * k,
            self.terms.iter().map(|t| KernelTerm { c: t.c * k, ..*t }).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| KernelTerm { c: t.c * sign, ..*t }));
        ContourKernel::from_parts(self.cauchy + other.cauchy * sign, terms)
    }

    /// Largest coefficient of `self − other` before pruning, relative to the
    /// larger of the two kernels (absolute if both are zero).
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self.max_coeff().max(other.max_coeff());
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| KernelTerm { c: -t.c, ..*t }));
        terms.sort_by(|x, y| x.p.canonical_cmp(&y.p).then_with(|| x.atom.cmp_key(&y.atom)));
        let mut worst = (self.cauchy - other.cauchy).norm();
        let mut i = 0;
        while i < terms.len() {
            let mut c = terms[i].c;
            let mut j = i + 1;
            while j < terms.len() && terms[j].p == terms[i].p && terms[j].atom == terms[i].atom {
                c += terms[j].c;
                j += 1;
            }
            worst = worst.max(c.norm());
            i = j;
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// Matrix elements `Θ_MN = ⟨M|Θ|N⟩` for `M, N < dim`.
    pub fn to_fock(&self, dim: usize) -> FockOperator {
        let mut m = DMatrix::from_diagonal_element(dim, dim, self.cauchy);
        let sf = sqrt_factorials(dim);
        for t in &self.terms {
            let right = scaled_powers(t.p.to_complex(), dim);
            let left: Vec<C64> = match t.atom {
                KetAtom::Exp(a) => scaled_powers(a.to_complex(), dim),
                KetAtom::Mono(k) => {
                    let mut v = vec![zero(); dim];
                    if k < dim {
                        v[k] = C64::new(sf[k], 0.0);
                    }
                    v
                }
            };
            for (i, l) in left.iter().enumerate() {
                if *l == zero() {
                    continue;
                }
                for (j, r) in right.iter().enumerate() {
                    m[(i, j)] += t.c * l * r;
                }
            }
        }
        FockOperator(m)
    }
}

/// `∮ Θ1(z1, ζ) Θ2(ζ, z2) dζ / 2πi`, evaluated by residues at the poles of `Θ1`.
pub fn kernel_product(k1: &ContourKernel, k2: &ContourKernel) -> ContourKernel {
    let mut terms = Vec::with_capacity(k1.terms.len() * k2.terms.len() + k1.terms.len() + k2.terms.len());
    for t1 in &k1.terms {
        let p1 = t1.p.to_complex();
        for t2 in &k2.terms {
            terms.push(KernelTerm {
                c: t1.c * t2.c * t2.atom.eval(p1),
                atom: t1.atom,
                p: t2.p,
            });
        }
    }
    if k1.cauchy != zero() {
        terms.extend(k2.terms.iter().map(|t| KernelTerm { c: t.c * k1.cauchy, ..*t }));
    }
    if k2.cauchy != zero() {
        terms.extend(k1.terms.iter().map(|t| KernelTerm { c: t.c * k2.cauchy, ..*t }));
    }
    ContourKernel::from_parts(k1.cauchy * k2.cauchy, terms)
}

/// `Tr Θ = Σ c φ(p)`, normalized so that `Tr |A⟩⟨A| = 1`.
pub fn kernel_trace(k: &ContourKernel) -> Result<C64> {
    if k.cauchy != zero() {
        return Err(Error::NotTraceClass);
    }
    Ok(k.terms.iter().map(|t| t.c * t.atom.eval(t.p.to_complex())).sum())
}

/// `Θ|s⟩`.
pub fn kernel_apply_ket(k: &ContourKernel, s: &Ket) -> Ket {
    let mut exps = Vec::new();
    let mut poly: Vec<C64> = s.poly.iter().map(|q| q * k.cauchy).collect();
    exps.extend(s.exps.iter().map(|t| ExpTerm { c: t.c * k.cauchy, a: t.a }));
    for t in &k.terms {
        let w = t.c * s.eval(t.p.to_complex());
        match t.atom {
            KetAtom::Exp(a) => exps.push(ExpTerm { c: w, a }),
            KetAtom::Mono(n) => {
                if poly.len() <= n {
                    poly.resize(n + 1, zero());
                }
                poly[n] += w;
            }
        }
    }
    Ket::from_parts(exps, poly)
}

/// `⟨f|Θ`.
pub fn kernel_apply_bra(f: &Bra, k: &ContourKernel) -> Bra {
    let mut poles: Vec<PoleTerm> = f.poles.iter().map(|t| PoleTerm { c: t.c * k.cauchy, p: t.p }).collect();
    let poly = f.poly.iter().map(|b| b * k.cauchy).collect();
    for t in &k.terms {
        poles.push(PoleTerm {
            c: t.c * scalar(f, &t.atom.to_ket()),
            p: t.p,
        });
    }
    Bra::from_parts(poles, poly)
}

/// Kernel of `Π(S) = Σ G_jk |A_j⟩⟨A_k|`.
pub fn kernel_of_projector(space: &CoherentSpace) -> ContourKernel {
    ContourKernel::from_coherent_coeffs(space, space.ginv()).expect("G is |S| x |S|")
}

/// Kernel of `|N⟩⟨A|`, the standard example of an operator that does not
/// live in `H(A)`.
pub fn number_coherent_outer(n: usize, a: Label) -> ContourKernel {
    ContourKernel::outer(&Ket::number(n), &Bra::coherent(a)).expect("coherent bra has no polynomial part")
}

/// Relative coefficient distance between `Π Θ Π` and `Θ`.
pub fn lives_in_residual(k: &ContourKernel, space: &CoherentSpace) -> f64 {
    let pi = kernel_of_projector(space);
    let sandwiched = kernel_product(&kernel_product(&pi, k), &pi);
    sandwiched.relative_distance(k)
}

/// Whether `Π(S) Θ Π(S) = Θ` coefficientwise, within [`LIVES_IN_TOL`].
pub fn lives_in_check(k: &ContourKernel, space: &CoherentSpace) -> bool {
    lives_in_residual(k, space) <= LIVES_IN_TOL
}

/// `Tr[Π(S1) Π(S2)] = Σ G1_rs G2_lm ⟨A_s|B_l⟩⟨B_m|A_r⟩` in closed form.
pub fn trace_of_projector_product(s1: &CoherentSpace, s2: &CoherentSpace) -> C64 {
    let (a, b) = (s1.labels(), s2.labels());
    let (g1, g2) = (s1.ginv(), s2.ginv());
    let mut total = zero();
    for r in 0..a.len() {
        for s in 0..a.len() {
            for l in 0..b.len() {
                for m in 0..b.len() {
                    let (ar, as_) = (a[r].to_complex(), a[s].to_complex());
                    let (bl, bm) = (b[l].to_complex(), b[m].to_complex());
                    let e = ar * bm.conj() + as_.conj() * bl
                        - 0.5 * (ar.norm_sqr() + as_.norm_sqr() + bl.norm_sqr() + bm.norm_sqr());
                    total += g1[(r, s)] * g2[(l, m)] * e.exp();
                }
            }
        }
    }
    total
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermJson {
    c: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    p: Label,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KernelJson {
    cauchy: C64,
    terms: Vec<TermJson>,
}

impl Serialize for ContourKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KernelJson {
            cauchy: self.cauchy,
            terms: self
                .terms
                .iter()
                .map(|t| match t.atom {
                    KetAtom::Exp(a) => TermJson { c: t.c, a: Some(a), n: None, p: t.p },
                    KetAtom::Mono(n) => TermJson { c: t.c, a: None, n: Some(n), p: t.p },
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ContourKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = KernelJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (i, t) in raw.terms.into_iter().enumerate() {
            let atom = match (t.a, t.n) {
                (Some(a), None) => KetAtom::Exp(a),
                (None, Some(n)) => KetAtom::Mono(n),
                _ => return Err(D::Error::custom(format!("terms[{i}]: exactly one of \"a\" or \"n\" is required"))),
            };
            terms.push(KernelTerm { c: t.c, atom, p: t.p });
        }
        Ok(ContourKernel::from_parts(raw.cauchy, terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_vector, inner, TruncationPolicy};
    use crate::spaces::{orthogonal_state, overlap, projector};

    fn l(re: f64, im: f64) -> Label {
        Label::new(re, im)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn space(labels: &[Label]) -> CoherentSpace {
        CoherentSpace::new(labels).unwrap()
    }

    #[test]
    fn coherent_scalar_matches_overlap() {
        let (a1, a2) = (l(0.3, -0.7), l(-1.1, 0.4));
        let s = scalar(&Bra::coherent(a1), &Ket::coherent(a2));
        assert!((s - overlap(a1, a2)).norm() < 1e-12);
        let vac = scalar(&Bra::coherent(Label::ZERO), &Ket::coherent(Label::ZERO));
        assert!((vac - 1.0).norm() < 1e-15);
    }

    #[test]
    fn superposition_norm_is_metric_form() {
        let sp = space(&[l(0.0, 0.0), l(1.0, 0.5), l(-0.5, 1.2)]);
        let u = DVector::from_vec(vec![c(0.5, 0.1), c(-0.3, 0.8), c(1.0, 0.0)]);
        let ket = ket_of(&sp, &u).unwrap();
        let bra = bra_of(&sp, &u).unwrap();
        assert!((scalar(&bra, &ket) - sp.coord_inner(&u, &u)).norm() < 1e-12);
    }

    #[test]
    fn number_bra_picks_taylor_coefficient() {
        let a = l(0.8, -0.2);
        let v = coherent_vector(a, &TruncationPolicy::default()).unwrap();
        for n in 0..6 {
            let s = scalar(&Bra::number(n), &Ket::coherent(a));
            assert!((s - v.amps()[n]).norm() < 1e-14);
        }
        assert_eq!(Bra::number(3).pole_set(), CSet::singleton(Label::ZERO));
    }

    #[test]
    fn zero_coefficients_give_empty_terms() {
        let sp = space(&[l(0.0, 0.0), l(1.0, 0.0)]);
        let ket = ket_of(&sp, &DVector::zeros(2)).unwrap();
        assert!(ket.is_zero());
        assert!(bra_of(&sp, &DVector::zeros(2)).unwrap().pole_set().is_empty());
    }

    #[test]
    fn single_label_projector_kernel() {
        let a = l(0.6, 0.9);
        let k = kernel_of_projector(&space(&[a]));
        assert_eq!(k.terms().len(), 1);
        let t = k.terms()[0];
        assert_eq!(t.atom, KetAtom::Exp(a));
        assert_eq!(t.p, a.conj());
        assert!((t.c - (-a.norm_sqr()).exp()).norm() < 1e-15);
        assert!((kernel_trace(&k).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn two_point_projector_kernel() {
        let sp = space(&[l(0.0, 0.0), l(1.0, 0.0)]);
        let k = kernel_of_projector(&sp);
        assert_eq!(k.terms().len(), 4);
        assert_eq!(k.pole_set(), sp.label_set().conj());
        // G of the pair (0, 1): μ = e^{-1/2}, G = [[1, −μ], [−μ, 1]] / (1 − μ²).
        let mu = (-0.5f64).exp();
        let d = 1.0 - mu * mu;
        for t in k.terms() {
            let (j, kk) = match (t.atom, t.p.re) {
                (KetAtom::Exp(a), p) => (a.re as usize, p as usize),
                _ => unreachable!(),
            };
            let g = if j == kk { 1.0 / d } else { -mu / d };
            let w = (-0.5 * (j * j + kk * kk) as f64).exp();
            assert!((t.c - g * w).norm() < 1e-14);
        }
        assert!((kernel_trace(&k).unwrap() - 2.0).norm() < 1e-12);
    }

    #[test]
    fn projector_kernel_is_idempotent() {
        let sp = space(&[l(0.2, 0.1), l(-1.0, 0.7), l(0.9, -1.3), l(1.5, 1.1)]);
        let k = kernel_of_projector(&sp);
        let k2 = kernel_product(&k, &k);
        assert!(k2.relative_distance(&k) < 1e-12);
        assert_eq!(k.pole_set().len(), 4);
        assert!((kernel_trace(&k).unwrap() - 4.0).norm() < 1e-12);
    }

    #[test]
    fn identity_is_unit() {
        let sp = space(&[l(0.2, 0.1), l(-1.0, 0.7)]);
        let k = kernel_of_projector(&sp);
        let id = ContourKernel::identity();
        assert_eq!(kernel_product(&id, &k), k);
        assert_eq!(kernel_product(&k, &id), k);
        assert_eq!(kernel_product(&id, &id), id);
        assert_eq!(kernel_trace(&id), Err(Error::NotTraceClass));
        let s = Ket::coherent(l(0.4, 0.4)).add(&Ket::number(2));
        assert_eq!(kernel_apply_ket(&id, &s), s);
        let f = Bra::coherent(l(0.1, -0.3));
        assert_eq!(kernel_apply_bra(&f, &id), f);
    }

    #[test]
    fn outer_products_compose() {
        let (a1, a2, a3) = (l(0.5, 0.0), l(-0.4, 0.8), l(1.0, -1.0));
        let k12 = ContourKernel::outer(&Ket::coherent(a1), &Bra::coherent(a2)).unwrap();
        let k23 = ContourKernel::outer(&Ket::coherent(a2), &Bra::coherent(a3)).unwrap();
        let k13 = ContourKernel::outer(&Ket::coherent(a1), &Bra::coherent(a3)).unwrap();
        assert!(kernel_product(&k12, &k23).relative_distance(&k13) < 1e-14);
        let aa = ContourKernel::outer(&Ket::coherent(a2), &Bra::coherent(a2)).unwrap();
        assert!((kernel_trace(&aa).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn projector_fixes_its_coherent_states() {
        let labels = [l(0.2, 0.1), l(-1.0, 0.7), l(0.9, -1.3)];
        let sp = space(&labels);
        let k = kernel_of_projector(&sp);
        for a in labels {
            let out = kernel_apply_ket(&k, &Ket::coherent(a));
            let diff = out.sub(&Ket::coherent(a));
            let worst = diff.exp_terms().iter().map(|t| t.c.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "{worst}");
            let back = kernel_apply_bra(&Bra::coherent(a), &k).sub(&Bra::coherent(a));
            let worst = back.pole_terms().iter().map(|t| t.c.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12);
        }
    }

    #[test]
    fn projector_kills_orthogonal_state() {
        let sp = space(&[l(0.2, 0.1), l(-1.0, 0.7), l(0.9, -0.3)]);
        let s = orthogonal_state(&sp, &TruncationPolicy::default()).unwrap();
        let out = kernel_apply_ket(&kernel_of_projector(&sp), &Ket::from_fock(&s));
        assert!(out.exp_terms().iter().all(|t| t.c.norm() < 1e-12));
        assert!(out.poly().is_empty());
    }

    #[test]
    fn lives_in_examples() {
        let (a1, a2) = (l(0.3, 0.2), l(-0.8, 0.5));
        let sp = space(&[a1, a2, l(1.0, 1.0)]);
        let k = ContourKernel::outer(&Ket::coherent(a1), &Bra::coherent(a2)).unwrap();
        assert!(lives_in_check(&k, &sp));
        assert!(lives_in_check(&kernel_of_projector(&sp), &sp));
        let a = l(0.7, -0.1);
        assert!(!lives_in_check(&number_coherent_outer(1, a), &space(&[a])));
    }

    #[test]
    fn bra_cancellation_and_union() {
        let (a, b) = (l(0.3, 0.4), l(-1.0, 0.2));
        let f = Bra::coherent(a);
        assert_eq!(f.pole_set(), CSet::singleton(a.conj()));
        assert!(f.sub(&f).pole_set().is_empty());
        let g = Bra::coherent(b).scale(c(0.3, -0.9));
        let both = CSet::new([a.conj(), b.conj()]).unwrap();
        assert_eq!(f.add(&g).pole_set(), both);
        assert_eq!(f.add(&g).sub(&g).pole_set(), CSet::singleton(a.conj()));
    }

    #[test]
    fn fock_conversions_agree() {
        let trunc = TruncationPolicy::default();
        let dim = trunc.dim();
        let sp = space(&[l(0.2, 0.1), l(-1.0, 0.7), l(0.9, -1.3)]);
        let pi = projector(&sp, &trunc).unwrap();
        let k = kernel_of_projector(&sp);
        assert!((k.to_fock(dim).0 - &pi.0).norm() < 1e-10);

        let u = DVector::from_vec(vec![c(0.5, 0.1), c(-0.3, 0.8), c(1.0, 0.0)]);
        let ket = ket_of(&sp, &u).unwrap();
        let bra = bra_of(&sp, &u).unwrap();
        assert!((ket.to_fock(dim).0 - bra.to_fock(dim).0).norm() < 1e-12);
        let v = ket.to_fock(dim);
        assert!((inner(&v, &v).unwrap() - ket.norm_sqr()).norm() < 1e-10);

        let n1 = number_coherent_outer(1, l(0.7, -0.1)).to_fock(dim);
        let expect = FockVector::number_state(1, &trunc)
            .outer(&coherent_vector(l(0.7, -0.1), &trunc).unwrap());
        assert!((n1.0 - expect.0).norm() < 1e-14);
    }

    #[test]
    fn trace_product_closed_form() {
        let s1 = space(&[l(0.2, 0.1), l(-1.0, 0.7)]);
        let s2 = space(&[l(0.5, -0.5), l(0.9, 1.0), l(-0.3, -1.2)]);
        let via_kernels =
            kernel_trace(&kernel_product(&kernel_of_projector(&s1), &kernel_of_projector(&s2))).unwrap();
        let closed = trace_of_projector_product(&s1, &s2);
        assert!((via_kernels - closed).norm() < 1e-12);
    }

    #[test]
    fn kernel_json_round_trip() {
        let k = kernel_of_projector(&space(&[l(0.0, 0.0), l(1.0, 0.0)]))
            .add(&number_coherent_outer(2, l(0.5, 0.5)))
            .add(&ContourKernel::identity().scale(c(0.0, 2.0)));
        let js = serde_json::to_string(&k).unwrap();
        assert!(js.contains("\"cauchy\":[0.0,2.0]"));
        assert!(js.contains("\"n\":2"));
        let back: ContourKernel = serde_json::from_str(&js).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<ContourKernel>(r#"{"cauchy":[0,0],"terms":[{"c":[1,0],"p":[0,0]}]}"#).is_err());
    }
}
