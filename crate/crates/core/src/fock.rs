//! Truncated number-basis linear algebra.
//!
//! States are amplitude vectors `s_0..s_{n_max}` and operators are
//! `(n_max+1)×(n_max+1)` matrices with element `(M, N) = ⟨M|Θ|N⟩`. This is the
//! numerical reference against which the analytic identities are checked.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_sets::Label;
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const DEFAULT_N_MAX: usize = 64;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// How many number states are kept, and how much Poisson tail may be lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub n_max: usize,
    pub tail_tol: f64,
    /// Accept inadequate truncations with a logged warning instead of an error.
    #[serde(default)]
    pub allow_override: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            n_max: DEFAULT_N_MAX,
            tail_tol: DEFAULT_TAIL_TOL,
            allow_override: false,
        }
    }
}

impl TruncationPolicy {
    pub fn new(n_max: usize) -> Self {
        TruncationPolicy {
            n_max,
            ..Default::default()
        }
    }

    pub fn with_override(mut self) -> Self {
        self.allow_override = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// `ceil(|A|² + 10·sqrt(|A|² + 1))`: mean plus ten standard deviations of
    /// the photon-number distribution of `|A⟩`.
    pub fn required_n_max(modulus: f64) -> usize {
        let m2 = modulus * modulus;
        (m2 + 10.0 * (m2 + 1.0).sqrt()).ceil() as usize
    }

    /// Smallest policy (at least the default) adequate for every label given.
    pub fn for_labels<'a, I: IntoIterator<Item = &'a Label>>(labels: I) -> Self {
        let need = labels
            .into_iter()
            .map(|l| Self::required_n_max(l.norm()))
            .max()
            .unwrap_or(0);
        TruncationPolicy::new(need.max(DEFAULT_N_MAX))
    }

    /// Checks that `|A⟩` is represented with tail mass below `tail_tol`.
    pub fn check_modulus(&self, modulus: f64) -> Result<()> {
        let required = Self::required_n_max(modulus);
        let tail = poisson_tail(modulus * modulus, self.n_max);
        if self.n_max >= required && tail < self.tail_tol {
            return Ok(());
        }
        if self.allow_override {
            log::warn!(
                "truncation override: n_max = {} for |A| = {modulus} (recommended {required}, tail {tail:.3e})",
                self.n_max
            );
            return Ok(());
        }
        Err(Error::InadequateTruncation {
            n_max: self.n_max,
            required,
        })
    }

    pub fn check_labels<'a, I: IntoIterator<Item = &'a Label>>(&self, labels: I) -> Result<()> {
        labels
            .into_iter()
            .try_for_each(|l| self.check_modulus(l.norm()))
    }
}

/// Mass of a Poisson(`lambda`) distribution beyond `n_max`, summed directly.
pub fn poisson_tail(lambda: f64, n_max: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    // log of the pmf at n_max + 1
    let n0 = n_max + 1;
    let mut log_p = -lambda + n0 as f64 * lambda.ln() - ln_factorial(n0);
    let mut sum = 0.0;
    let mut n = n0;
    loop {
        let p = log_p.exp();
        sum += p;
        n += 1;
        log_p += lambda.ln() - (n as f64).ln();
        if (p < 1e-300 || p < sum * 1e-17) && n as f64 > lambda {
            break;
        }
    }
    sum
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Amplitudes of a (possibly unnormalized) state in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector(pub DVector<C64>);

/// Matrix of an operator in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator(pub DMatrix<C64>);

impl FockVector {
    pub fn zeros(dim: usize) -> Self {
        FockVector(DVector::zeros(dim))
    }

    pub fn number_state(n: usize, trunc: &TruncationPolicy) -> Self {
        let mut v = DVector::zeros(trunc.dim());
        v[n] = C64::new(1.0, 0.0);
        FockVector(v)
    }

    pub fn from_amps(amps: Vec<C64>) -> Self {
        FockVector(DVector::from_vec(amps))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn n_max(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn amps(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Self {
        FockVector(self.0.normalize())
    }

    pub fn scale(&self, c: C64) -> Self {
        FockVector(&self.0 * c)
    }

    pub fn add(&self, other: &FockVector) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockVector(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &FockVector) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockVector(&self.0 - &other.0))
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &FockVector) -> FockOperator {
        FockOperator(&self.0 * other.0.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl FockOperator {
    pub fn identity(dim: usize) -> Self {
        FockOperator(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        FockOperator(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn compose(&self, other: &FockOperator) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockOperator(&self.0 * &other.0))
    }

    pub fn apply(&self, s: &FockVector) -> Result<FockVector> {
        same_dim(self.dim(), s.dim())?;
        Ok(FockVector(&self.0 * &s.0))
    }

    pub fn adjoint(&self) -> Self {
        FockOperator(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn add(&self, other: &FockOperator) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockOperator(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &FockOperator) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockOperator(&self.0 - &other.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        FockOperator(&self.0 * c)
    }

    /// `self^k`.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.0;
        }
        FockOperator(out)
    }

    /// `U Θ U†`.
    pub fn conjugate_by(&self, u: &FockOperator) -> Result<Self> {
        same_dim(self.dim(), u.dim())?;
        Ok(FockOperator(&u.0 * &self.0 * u.0.adjoint()))
    }

    /// Leading `(k+1)×(k+1)` block (number states `0..=k`).
    pub fn block(&self, k: usize) -> DMatrix<C64> {
        let d = (k + 1).min(self.dim());
        self.0.view((0, 0), (d, d)).into_owned()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl<R: Dim, C: Dim, S: RawStorage<C64, R, C>> MaxAbs for Matrix<C64, R, C, S> {
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `⟨f|s⟩`.
pub fn inner(f: &FockVector, s: &FockVector) -> Result<C64> {
    same_dim(f.dim(), s.dim())?;
    Ok(f.0.dotc(&s.0))
}

/// Amplitudes `e^{-|A|²/2} A^N / sqrt(N!)` for `N = 0..=n_max`.
pub fn coherent_amplitudes(a: C64, dim: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    if dim == 0 {
        return v;
    }
    v[0] = C64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        v[n] = v[n - 1] * a / (n as f64).sqrt();
    }
    v
}

/// The coherent state `|A⟩`, truncated at `n_max`.
pub fn coherent_vector(a: Label, trunc: &TruncationPolicy) -> Result<FockVector> {
    trunc.check_modulus(a.norm())?;
    Ok(FockVector(coherent_amplitudes(a.to_complex(), trunc.dim())))
}

/// Annihilation and creation operators with `a_{N-1,N} = sqrt(N)`.
pub fn ladder_ops(trunc: &TruncationPolicy) -> (FockOperator, FockOperator) {
    let a = annihilation(trunc);
    let adag = a.adjoint();
    (a, adag)
}

pub fn annihilation(trunc: &TruncationPolicy) -> FockOperator {
    let d = trunc.dim();
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    FockOperator(m)
}

pub fn creation(trunc: &TruncationPolicy) -> FockOperator {
    annihilation(trunc).adjoint()
}

/// `x = (a + a†)/sqrt(2)`.
pub fn position_op(trunc: &TruncationPolicy) -> FockOperator {
    let (a, ad) = ladder_ops(trunc);
    FockOperator((&a.0 + &ad.0) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
}

/// `p = i(a† − a)/sqrt(2)`.
pub fn momentum_op(trunc: &TruncationPolicy) -> FockOperator {
    let (a, ad) = ladder_ops(trunc);
    FockOperator((&ad.0 - &a.0) * C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2))
}

/// `a†a`, exactly diagonal.
pub fn number_op(trunc: &TruncationPolicy) -> FockOperator {
    let d = trunc.dim();
    FockOperator(DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| {
        C64::new(n as f64, 0.0)
    })))
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨m|D(z)|n⟩` in closed form:
/// `sqrt(n!/m!) z^{m-n} e^{-|z|²/2} L_n^{(m-n)}(|z|²)` for `m ≥ n`, and the
/// mirrored expression with `-z*` for `m < n`.
pub fn displacement_element(m: usize, n: usize, z: C64) -> C64 {
    let x = z.norm_sqr();
    if x == 0.0 {
        return if m == n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let (lo, hi, w) = if m >= n { (n, m, z) } else { (m, n, -z.conj()) };
    let k = hi - lo;
    let log_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + k as f64 * w.norm().ln() - 0.5 * x;
    let phase = C64::from_polar(1.0, k as f64 * w.arg());
    phase * (log_mag.exp() * laguerre(lo, k as f64, x))
}

/// `D(z) = exp(z a† − z* a)` from its closed-form matrix elements.
pub fn displacement_op(z: Label, trunc: &TruncationPolicy) -> Result<FockOperator> {
    trunc.check_modulus(z.norm())?;
    let d = trunc.dim();
    let zc = z.to_complex();
    Ok(FockOperator(DMatrix::from_fn(d, d, |m, n| {
        displacement_element(m, n, zc)
    })))
}

/// `exp(i t a†a)`, diagonal.
pub fn evolution_op(t: f64, trunc: &TruncationPolicy) -> FockOperator {
    let d = trunc.dim();
    FockOperator(DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| {
        C64::from_polar(1.0, t * n as f64)
    })))
}

/// JSON form `{ "n_max": int, "amps": [[re, im], ...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FockVectorJson {
    pub n_max: usize,
    pub amps: Vec<C64>,
}

impl From<&FockVector> for FockVectorJson {
    fn from(v: &FockVector) -> Self {
        FockVectorJson {
            n_max: v.n_max(),
            amps: v.amps().to_vec(),
        }
    }
}

impl TryFrom<FockVectorJson> for FockVector {
    type Error = Error;

    fn try_from(j: FockVectorJson) -> Result<Self> {
        if j.amps.len() != j.n_max + 1 {
            return Err(Error::DimensionMismatch {
                expected: j.n_max + 1,
                found: j.amps.len(),
            });
        }
        let v = FockVector::from_amps(j.amps);
        if !v.is_finite() {
            return Err(Error::Parse("amps: non-finite amplitude".into()));
        }
        Ok(v)
    }
}
