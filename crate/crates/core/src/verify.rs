//! Seeded verification suites: every identity the library relies on, turned
//! into residual-versus-tolerance reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classical_gates::{check_reversible, fixed_control_target_map, truth_table, GateKind};
use crate::complex_sets::{decode, CSet, Label};
use crate::contour::{
    bra_of, kernel_apply_ket, kernel_of_projector, kernel_product, kernel_trace, ket_of, scalar,
    trace_of_projector_product, ContourKernel, Ket,
};
use crate::error::{Error, Result};
use crate::fock::{evolution_op, FockOperator, FockVector, MaxAbs, TruncationPolicy, C64};
use crate::gates::{
    build_cnot2, build_cnot4, consistency_triangle, lifted_unitarity_residual, orthonormal_cnot_matrix,
    square_labels, textbook_cnot, GateMatrix,
};
use crate::quadrature::DiskGrid;
use crate::report::CheckReport;
use crate::spaces::{
    covariance_check, eigen_relation_check, gs_chain, moment_traces, orthogonal_state, projector, q_function,
    q_integral, resolution_with_difference, CoherentSpace, ResolutionKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Classical,
    Ring,
    Projector,
    Moments,
    Covariance,
    Resolution,
    Contour,
    Orthogonal,
    Cnot,
    All,
}

impl Suite {
    pub const EACH: [Suite; 9] = [
        Suite::Classical,
        Suite::Ring,
        Suite::Projector,
        Suite::Moments,
        Suite::Covariance,
        Suite::Resolution,
        Suite::Contour,
        Suite::Orthogonal,
        Suite::Cnot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Classical => "classical",
            Suite::Ring => "ring",
            Suite::Projector => "projector",
            Suite::Moments => "moments",
            Suite::Covariance => "covariance",
            Suite::Resolution => "resolution",
            Suite::Contour => "contour",
            Suite::Orthogonal => "orthogonal",
            Suite::Cnot => "cnot",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s.to_ascii_lowercase())
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

/// Knobs shared by all suites. `tol` replaces every default tolerance;
/// `n_max` replaces the per-suite truncation.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
    pub grid: (usize, usize),
    pub disk_radius: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20240917,
            tol: None,
            n_max: None,
            grid: (200, 256),
            disk_radius: 6.0,
        }
    }
}

impl VerifyConfig {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn trunc(&self, default: usize) -> TruncationPolicy {
        TruncationPolicy::new(self.n_max.unwrap_or(default))
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub elapsed_s: f64,
    pub checks: Vec<CheckReport>,
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::All => Suite::EACH.iter().map(|s| run_one(*s, cfg)).collect(),
        s => Ok(vec![run_one(s, cfg)?]),
    }
}

fn run_one(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let checks = match suite {
        Suite::Classical => classical(cfg)?,
        Suite::Ring => ring(cfg)?,
        Suite::Projector => projector_suite(cfg)?,
        Suite::Moments => moments(cfg)?,
        Suite::Covariance => covariance(cfg)?,
        Suite::Resolution => resolution(cfg)?,
        Suite::Contour => contour(cfg)?,
        Suite::Orthogonal => orthogonal(cfg)?,
        Suite::Cnot => cnot(cfg)?,
        Suite::All => unreachable!("expanded by run"),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    log::info!("suite {suite}: {} checks in {elapsed_s:.2}s", checks.len());
    Ok(SuiteReport {
        suite,
        pass: checks.iter().all(|c| c.pass),
        elapsed_s,
        checks,
    })
}

/// `n` labels uniform in the disk `|A| ≤ radius`, pairwise at least
/// `min_sep` apart (which keeps the Gram matrix well conditioned).
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, radius: f64, min_sep: f64) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::with_capacity(n);
    while out.len() < n {
        let r = radius * rng.gen::<f64>().sqrt();
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let l = Label::new(r * phi.cos(), r * phi.sin());
        if out.iter().all(|o| o.distance(l) >= min_sep) {
            out.push(l);
        }
    }
    out
}

pub fn random_coeffs<R: Rng>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// A random density matrix supported on the first `support` number states.
pub fn random_density<R: Rng>(rng: &mut R, support: usize, dim: usize) -> FockOperator {
    let a = random_matrix(rng, support);
    let small = &a * a.adjoint();
    let tr = small.trace();
    let mut rho = DMatrix::zeros(dim, dim);
    rho.view_mut((0, 0), (support, support)).copy_from(&(small / tr));
    FockOperator(rho)
}

fn random_space<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Result<CoherentSpace> {
    CoherentSpace::new(&random_labels(rng, n, radius, 0.5))
}

/// Worst residual over trials, as a single report.
struct Worst {
    name: String,
    value: f64,
    tol: f64,
}

impl Worst {
    fn new(name: impl Into<String>, tol: f64) -> Self {
        Worst {
            name: name.into(),
            value: 0.0,
            tol,
        }
    }

    fn see(&mut self, x: f64) {
        // NaN must fail the check, so once seen it sticks.
        if !self.value.is_nan() && (x.is_nan() || x > self.value) {
            self.value = x;
        }
    }

    fn report(&self) -> CheckReport {
        CheckReport::new(self.name.clone(), self.value, self.tol)
    }
}

/// Output codes of the printed OR/AND/XOR table for `|R| = 2`; the inputs
/// run `(0,0), (1,0), …, (3,3)` with the first input varying fastest.
pub const TABLE_OR_AND_XOR: [[u64; 16]; 3] = [
    [0, 1, 2, 3, 1, 1, 3, 3, 2, 3, 2, 3, 3, 3, 3, 3],
    [0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 2, 2, 0, 1, 2, 3],
    [0, 1, 2, 3, 1, 0, 3, 2, 2, 3, 0, 1, 3, 2, 1, 0],
];

/// `(control, target)` outputs of the printed CNOT table for `|R| = 1`.
pub const TABLE_CNOT_1: [(u64, u64); 4] = [(0, 0), (0, 1), (1, 1), (1, 0)];

/// `(control, target)` outputs of the printed CNOT table for `|R| = 2`,
/// inputs in lexicographic order.
pub const TABLE_CNOT_2: [(u64, u64); 16] = [
    (0, 0), (0, 1), (0, 2), (0, 3),
    (1, 1), (1, 0), (1, 3), (1, 2),
    (2, 2), (2, 3), (2, 0), (2, 1),
    (3, 3), (3, 2), (3, 1), (3, 0),
];

fn base(n: usize) -> CSet {
    CSet::new((0..n).map(|k| Label::new(k as f64, 0.5 * k as f64))).expect("distinct labels")
}

fn classical(_cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let r2 = base(2);
    let mut out = Vec::new();
    for (kind, expect) in [GateKind::Or, GateKind::And, GateKind::Xor].iter().zip(TABLE_OR_AND_XOR) {
        let rows = truth_table(*kind, &r2)?.first_varying_rows();
        let got: Vec<u64> = rows.iter().map(|r| r.outputs[0]).collect();
        let inputs_ok = rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.inputs == vec![i as u64 % 4, i as u64 / 4]);
        out.push(CheckReport::exact(format!("{kind} table (|R|=2)"), inputs_ok && got == expect));
    }
    for (n, expect) in [(1, &TABLE_CNOT_1[..]), (2, &TABLE_CNOT_2[..])] {
        let table = truth_table(GateKind::Cnot, &base(n))?;
        let got: Vec<(u64, u64)> = table.rows.iter().map(|r| (r.outputs[0], r.outputs[1])).collect();
        out.push(CheckReport::exact(format!("CNOT table (|R|={n})"), got == expect));
        out.push(CheckReport::exact(format!("CNOT reversible (|R|={n})"), check_reversible(&table)));
        let maps_ok = (0..1u64 << n).all(|c| {
            let m = fixed_control_target_map(&decode(&base(n), c).expect("code in range"), &base(n))
                .expect("subset");
            m.is_bijection() && m.is_involution() && (c != 0 || m.is_identity())
        });
        out.push(CheckReport::exact(format!("CNOT target maps are involutions (|R|={n})"), maps_ok));
    }
    Ok(out)
}

fn ring(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let pool = base(8);
    let mut rng = cfg.rng(2);
    let empty = CSet::empty();
    let mut fails = [0usize; 9];
    let names = [
        "addition associative, commutative, identity, inverse",
        "multiplication associative, commutative, identity, idempotent",
        "distributive law",
        "union = S1 + S2 + S1 S2",
        "sym_diff = union minus intersection",
        "zero divisors (S1 S2)(S1 + S2) = 0",
        "multiplicative monotonicity",
        "relative complement = R + S",
        "encode/decode round trip",
    ];
    for _ in 0..10_000 {
        let s: Vec<CSet> = (0..4)
            .map(|_| decode(&pool, rng.gen_range(0..256)).expect("code in range"))
            .collect();
        let (a, b, c) = (&s[0], &s[1], &s[2]);
        let add = a.sym_diff(b) == b.sym_diff(a)
            && a.sym_diff(&b.sym_diff(c)) == a.sym_diff(b).sym_diff(c)
            && a.sym_diff(&empty) == *a
            && a.sym_diff(a).is_empty();
        let mul = a.intersect(b) == b.intersect(a)
            && a.intersect(&b.intersect(c)) == a.intersect(b).intersect(c)
            && a.intersect(&pool) == *a
            && a.intersect(a) == *a;
        let dist = a.intersect(&b.sym_diff(c)) == a.intersect(b).sym_diff(&a.intersect(c));
        let union = a.union(b) == a.sym_diff(b).sym_diff(&a.intersect(b));
        let sym = a.sym_diff(b) == a.union(b).minus(&a.intersect(b));
        let zero = a.intersect(b).intersect(&a.sym_diff(b)).is_empty();
        let sub = a.intersect(b);
        let mono = !sub.is_subset(a) || sub.intersect(c).is_subset(&a.intersect(c));
        let comp = a.rel_complement(&pool)? == pool.sym_diff(a);
        let code = crate::complex_sets::encode(&pool, &s[3])?.code;
        let round = decode(&pool, code)? == s[3];
        for (f, ok) in fails.iter_mut().zip([add, mul, dist, union, sym, zero, mono, comp, round]) {
            *f += usize::from(!ok);
        }
    }
    let mut out: Vec<CheckReport> = names
        .iter()
        .zip(fails)
        .map(|(n, f)| CheckReport::exact(format!("{n} (10000 trials)"), f == 0))
        .collect();
    // S1 ⊆ S2 does not give S1 + S3 ⊆ S2 + S3: take S1 = ∅, S2 = S3 = {A}.
    let single = decode(&pool, 1)?;
    let counter = empty.is_subset(&single) && !empty.sym_diff(&single).is_subset(&single.sym_diff(&single));
    out.push(CheckReport::exact("additive monotonicity fails on a counterexample", counter));
    Ok(out)
}

fn projector_suite(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let trunc = cfg.trunc(64);
    let tol = cfg.tol(1e-9);
    let mut rng = cfg.rng(3);
    let mut idem = Worst::new("||P^2 - P||_F", tol);
    let mut trace = Worst::new("|Tr P - |S||", tol);
    let mut fixes = Worst::new("||P coh(A_j) - coh(A_j)||", tol);
    let mut sum = Worst::new("||sum of chain - P||_F", tol);
    let mut orth = Worst::new("chain pairwise orthogonality", tol);
    for trial in 0..24 {
        let space = random_space(&mut rng, 1 + trial % 4, 2.0)?;
        let p = projector(&space, &trunc)?;
        idem.see(p.compose(&p)?.sub(&p)?.frobenius_norm());
        trace.see((p.trace() - space.dim() as f64).norm());
        for v in space.coherent_vectors(&trunc)? {
            fixes.see(p.apply(&v)?.sub(&v)?.norm());
        }
        let chain = gs_chain(&space, &trunc)?;
        let mut total = FockOperator::zeros(trunc.dim());
        for (i, w) in chain.iter().enumerate() {
            total = total.add(w)?;
            for v in &chain[i + 1..] {
                orth.see(w.compose(v)?.frobenius_norm());
            }
        }
        sum.see(total.sub(&p)?.frobenius_norm());
    }
    Ok([idem, trace, fixes, sum, orth].iter().map(Worst::report).collect())
}

fn moments(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let trunc = cfg.trunc(64);
    let tol = cfg.tol(1e-7);
    let number_tol = cfg.tol(1e-8);
    let mut rng = cfg.rng(4);
    let mut out = Vec::new();
    let mut worst: Vec<Worst> = Vec::new();
    for trial in 0..12 {
        let space = random_space(&mut rng, 1 + trial % 4, 2.0)?;
        for ell in 1..=3 {
            let reports = moment_traces(&space, ell, &trunc)?.reports(tol, number_tol);
            let eig = eigen_relation_check(&space, ell, &trunc)?;
            let all = reports.into_iter().chain([
                CheckReport::new(format!("chain eigenrelation a^{ell}"), eig.chain, tol),
                CheckReport::new(format!("perp a^{ell} P = 0"), eig.perp, tol),
            ]);
            for r in all {
                match worst.iter_mut().find(|w| w.name == r.check) {
                    Some(w) => w.see(r.residual),
                    None => {
                        let mut w = Worst::new(r.check.clone(), r.tolerance);
                        w.see(r.residual);
                        worst.push(w);
                    }
                }
            }
        }
    }
    out.extend(worst.iter().map(Worst::report));
    Ok(out)
}

fn covariance(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let trunc = cfg.trunc(96);
    let mut rng = cfg.rng(5);
    let mut disp = Worst::new("D(z) P(S) D(z)^+ = P(S + z)", cfg.tol(1e-7));
    let mut chain_disp = Worst::new("chain displacement covariance", cfg.tol(1e-7));
    let mut evol = Worst::new("U(t) P(S) U(t)^+ = P(S e^{it})", cfg.tol(1e-9));
    let mut chain_evol = Worst::new("chain evolution covariance", cfg.tol(1e-9));
    let mut q = Worst::new("Q(U rho U^+, S) = Q(rho, S e^{-it})", cfg.tol(1e-8));
    for trial in 0..4 {
        let space = random_space(&mut rng, 1 + trial % 3, 1.5)?;
        let z = random_labels(&mut rng, 1, 1.5, 0.0)[0];
        let t = rng.gen_range(-3.0..3.0);
        let r = covariance_check(&space, z, t, &trunc)?;
        disp.see(r.displacement);
        chain_disp.see(r.chain_displacement);
        evol.see(r.evolution);
        chain_evol.see(r.chain_evolution);
        let rho = random_density(&mut rng, 6, trunc.dim());
        let u = evolution_op(t, &trunc);
        let evolved = rho.conjugate_by(&u)?;
        q.see((q_function(&evolved, &space, &trunc)? - q_function(&rho, &space.rotated(-t)?, &trunc)?).abs());
    }
    Ok([disp, chain_disp, evol, chain_evol, q].iter().map(Worst::report).collect())
}

fn resolution(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let grid = DiskGrid::new(cfg.disk_radius, cfg.grid.0, cfg.grid.1);
    let block = 5;
    let id = DMatrix::<C64>::identity(block + 1, block + 1);
    let mut rng = cfg.rng(6);
    let rho = random_density(&mut rng, 4, block + 1);
    let mut out = Vec::new();
    let cases: [(&str, Vec<Label>, ResolutionKind); 3] = [
        ("n=1", vec![], ResolutionKind::Projector),
        ("n=2, d2=1", vec![Label::new(1.0, 0.0)], ResolutionKind::Projector),
        ("chain, d1=1", vec![Label::new(1.0, 0.0)], ResolutionKind::Chain),
    ];
    for (name, offsets, kind) in cases {
        let (op, diff) = resolution_with_difference(&offsets, kind, &grid, block)?;
        out.push(CheckReport::new(
            format!("resolution of identity {name}, block N<=5"),
            (&op.0 - &id).max_abs(),
            cfg.tol(1e-3),
        ));
        out.push(CheckReport::new(format!("grid refinement {name}"), diff, cfg.tol(1e-4)));
        if kind == ResolutionKind::Projector {
            out.push(CheckReport::new(
                format!("integral of Q/(n pi) {name}"),
                (q_integral(&rho, &offsets, &grid)? - 1.0).abs(),
                cfg.tol(2e-3),
            ));
        }
    }
    Ok(out)
}

fn contour(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let trunc = cfg.trunc(64);
    let dim = trunc.dim();
    let tol = cfg.tol(1e-9);
    let mut rng = cfg.rng(7);
    let mut sc = Worst::new("scalar products vs Fock", tol);
    let mut ap = Worst::new("kernel application vs Fock", tol);
    let mut pr = Worst::new("kernel products vs Fock", tol);
    let mut tr = Worst::new("kernel traces vs Fock", tol);
    let mut idem = Worst::new("projector kernel idempotency (relative)", cfg.tol(1e-12));
    let mut rank = Worst::new("pole count minus rank", 0.5);
    let mut cor_res = Worst::new("trace corollary: closed form vs residues", tol);
    let mut cor_fock = Worst::new("trace corollary: closed form vs Fock", tol);
    for trial in 0..1000 {
        let space = random_space(&mut rng, 1 + trial % 4, 2.0)?;
        let v = space.basis_matrix(&trunc)?;
        let (u, w) = (random_coeffs(&mut rng, space.dim()), random_coeffs(&mut rng, space.dim()));
        let (l1, l2) = (random_matrix(&mut rng, space.dim()), random_matrix(&mut rng, space.dim()));
        let (su, sw) = (&v * &u, &v * &w);
        sc.see((scalar(&bra_of(&space, &w)?, &ket_of(&space, &u)?) - sw.dotc(&su)).norm());

        let (k1, k2) = (
            ContourKernel::from_coherent_coeffs(&space, &l1)?,
            ContourKernel::from_coherent_coeffs(&space, &l2)?,
        );
        let (f1, f2) = (&v * &l1 * v.adjoint(), &v * &l2 * v.adjoint());
        let applied = kernel_apply_ket(&k1, &ket_of(&space, &u)?).to_fock(dim);
        ap.see((&applied.0 - &f1 * &su).norm());
        pr.see((kernel_product(&k1, &k2).to_fock(dim).0 - &f1 * &f2).max_abs());
        tr.see((kernel_trace(&k1)? - f1.trace()).norm());

        let pk = kernel_of_projector(&space);
        idem.see(kernel_product(&pk, &pk).relative_distance(&pk));
        rank.see((pk.pole_set().len() as f64 - space.dim() as f64).abs());

        if trial % 10 == 0 {
            let other = random_space(&mut rng, 1 + (trial / 10) % 4, 2.0)?;
            let closed = trace_of_projector_product(&space, &other);
            let res = kernel_trace(&kernel_product(&pk, &kernel_of_projector(&other)))?;
            let fock = projector(&space, &trunc)?.compose(&projector(&other, &trunc)?)?.trace();
            cor_res.see((closed - res).norm());
            cor_fock.see((closed - fock).norm());
        }
    }
    Ok([sc, ap, pr, tr, idem, rank, cor_res, cor_fock].iter().map(Worst::report).collect())
}

fn orthogonal(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let trunc = cfg.trunc(64);
    let mut rng = cfg.rng(8);
    let mut fock = Worst::new("||P(S) s|| for the Bargmann-zero state (100 spaces)", cfg.tol(1e-8));
    let mut residue = Worst::new("residue-engine P(S) s (100 spaces)", cfg.tol(1e-8));
    for trial in 0..100 {
        let space = random_space(&mut rng, 1 + trial % 4, 2.0)?;
        let s = orthogonal_state(&space, &trunc)?;
        fock.see(projector(&space, &trunc)?.apply(&s)?.norm());
        let out = kernel_apply_ket(&kernel_of_projector(&space), &Ket::from_fock(&s));
        residue.see(out.to_fock(trunc.dim()).norm());
    }
    Ok(vec![fock.report(), residue.report()])
}

/// Gate checks shared by the CLI and the suite.
pub fn gate_reports(gate: &GateMatrix, tol: f64, semantic_tol: f64, seed: u64) -> Vec<CheckReport> {
    let mut out = vec![CheckReport::new("metric unitarity", gate.unitarity_residual(), tol)];
    for r in gate.reports(tol) {
        if r.check.contains("->") {
            out.push(CheckReport::new(r.check, r.residual, semantic_tol));
        } else if r.check != "gate metric unitarity" {
            out.push(r);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fixes = Worst::new("e1 control fixes every target", semantic_tol);
    let mut eig = Worst::new("control eigenvector semantics", semantic_tol);
    for _ in 0..8 {
        let t = random_coeffs(&mut rng, gate.dims().1);
        fixes.see(gate.control_eigen_residual(0, &t).unwrap_or(f64::NAN));
        for j in 0..gate.dims().0 {
            eig.see(gate.control_eigen_residual(j, &t).unwrap_or(f64::NAN));
        }
    }
    out.push(fixes.report());
    out.push(eig.report());
    out
}

fn cnot(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(1e-12);
    let semantic = cfg.tol(1e-10);
    let limit_tol = cfg.tol(1e-8);
    let mut rng = cfg.rng(9);
    let mut out = Vec::new();
    let l = Label::new;

    let two_a = CoherentSpace::new(&[l(0.3, 0.4), l(-0.6, 0.9)])?;
    let two_b = CoherentSpace::new(&[l(1.0, -0.2), l(-0.1, 0.5)])?;
    let g2 = build_cnot2(&two_a, &two_b)?;
    out.extend(tagged("2-point", gate_reports(&g2, tol, semantic, cfg.seed)));

    let g4 = build_cnot4(&CoherentSpace::new(&square_labels(1.0))?, &CoherentSpace::new(&square_labels(1.2))?)?;
    out.extend(tagged("4-point", gate_reports(&g4, tol, semantic, cfg.seed)));

    let far_a = CoherentSpace::new(&[l(5.0, 0.0), l(-5.0, 0.0)])?;
    let far_b = CoherentSpace::new(&[l(0.0, 5.0), l(0.0, -5.0)])?;
    let far = build_cnot2(&far_a, &far_b)?;
    let (dev, g_dev) = far.orthogonal_limit_residuals().expect("two-point gate");
    out.push(CheckReport::new("|A|=5: U vs E1 x 1 + E2 x U_2T", dev, limit_tol));
    out.push(CheckReport::new("|A|=5: ||g - 1||", g_dev, cfg.tol(1e-10)));
    let trunc = TruncationPolicy::for_labels(far_a.labels().iter().chain(far_b.labels()));
    let m = orthonormal_cnot_matrix(&far, &trunc)?;
    out.push(CheckReport::new("|A|=5: orthonormal basis matrix vs textbook CNOT", (m - textbook_cnot()).max_abs(), limit_tol));

    let trunc = cfg.trunc(64);
    out.push(CheckReport::new(
        "lifted gate: U^+ U = P x P on probes",
        lifted_unitarity_residual(&g2, &trunc)?,
        limit_tol,
    ));
    let mut tri = Worst::new("coordinates / residues / Fock agree", limit_tol);
    for gate in [&g2, &g4] {
        for _ in 0..3 {
            let (na, nb) = gate.dims();
            let r = consistency_triangle(gate, &random_coeffs(&mut rng, na), &random_coeffs(&mut rng, nb), &trunc)?;
            tri.see(r.max());
        }
    }
    out.push(tri.report());
    Ok(out)
}

fn tagged(tag: &str, reports: Vec<CheckReport>) -> Vec<CheckReport> {
    reports
        .into_iter()
        .map(|mut r| {
            r.check = format!("{tag}: {}", r.check);
            r
        })
        .collect()
}

/// A Fock vector helper for callers that only have coordinates.
pub fn fock_of_coords(space: &CoherentSpace, u: &DVector<C64>, trunc: &TruncationPolicy) -> Result<FockVector> {
    Ok(FockVector(space.basis_matrix(trunc)? * u))
}
