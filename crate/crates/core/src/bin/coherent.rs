//! Command-line front end.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on a
//! usage, parse or input-validation error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use coherent::classical_gates::{check_reversible, fixed_control_target_map, truth_table, GateKind};
use coherent::complex_sets::{decode, Label};
use coherent::contour::{kernel_of_projector, kernel_product, kernel_trace};
use coherent::fock::{evolution_op, FockOperator, MaxAbs, TruncationPolicy, C64};
use coherent::gates::{build_cnot2, build_cnot4, build_controlled, square_labels};
use coherent::io::{from_json_str, matrix_from_rows, parse_labels, parse_set, read_json_arg, MatrixJson};
use coherent::quadrature::DiskGrid;
use coherent::report::{all_pass, CheckReport};
use coherent::spaces::{gs_chain, gs_taus, projector, q_function, resolution_with_difference, CoherentSpace, ResolutionKind};
use coherent::verify::{self, gate_reports, Suite, VerifyConfig};
use coherent::{Error, Result};

#[derive(Parser)]
#[command(name = "coherent", version, about = "Coherent spaces, Boolean rings of label sets and metric-aware CNOT gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance for every check of the command.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Clone)]
struct LabelsArg {
    /// Labels as inline JSON `[[re, im], ...]` or a path to a JSON file.
    #[arg(long)]
    labels: String,
}

#[derive(Subcommand)]
enum Command {
    /// Gram metric, its inverse and eigensystem.
    Gram {
        #[command(flatten)]
        labels: LabelsArg,
        #[command(flatten)]
        common: Common,
    },
    /// Projector onto the coherent space in truncated Fock space.
    Projector {
        #[command(flatten)]
        labels: LabelsArg,
        #[arg(long = "n-max", default_value_t = 64)]
        n_max: usize,
        /// Number of low Fock rows/columns of the projector to print.
        #[arg(long, default_value_t = 6)]
        block: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Gram-Schmidt chain of rank-one projectors.
    Chain {
        #[command(flatten)]
        labels: LabelsArg,
        #[arg(long = "n-max", default_value_t = 64)]
        n_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Truth table of a classical gate over all subsets of R, as CSV.
    TruthTable {
        #[arg(long, value_enum)]
        gate: GateArg,
        /// Base set R.
        #[arg(long = "R")]
        r: String,
        /// Order rows with the first input varying fastest.
        #[arg(long = "table1-order")]
        table1_order: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Classical CNOT: reversibility and the target permutation of every control.
    CnotClassical {
        #[arg(long = "R")]
        r: String,
        #[command(flatten)]
        common: Common,
    },
    /// Quantum CNOT on two coherent spaces (2 or 4 labels each).
    CnotQuantum {
        /// Control labels; defaults to a fixture matching --target's size.
        #[arg(long)]
        labels: Option<String>,
        /// Target labels.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Residue-calculus kernel of the projector.
    Contour {
        #[command(flatten)]
        labels: LabelsArg,
        #[command(flatten)]
        common: Common,
    },
    /// Resolution of identity by quadrature; --labels gives the offsets d_2..d_n.
    Resolution {
        #[arg(long, default_value = "[]")]
        labels: String,
        #[arg(long, value_enum, default_value_t = KindArg::Projector)]
        kind: KindArg,
        /// Radial x angular nodes, e.g. `200x256`.
        #[arg(long, default_value = "200x256")]
        grid: String,
        #[arg(long = "disk-radius", default_value_t = 6.0)]
        disk_radius: f64,
        /// Largest number state of the checked block.
        #[arg(long, default_value_t = 5)]
        block: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Generalized Q-function Tr[P(S) rho] and its evolution identity.
    Qfunction {
        #[command(flatten)]
        labels: LabelsArg,
        /// Density matrix as nested `[re, im]` rows (inline or file); default |0><0|.
        #[arg(long)]
        rho: Option<String>,
        /// Evolution time for the covariance check.
        #[arg(long, default_value_t = 0.7)]
        t: f64,
        #[arg(long = "n-max", default_value_t = 64)]
        n_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        #[arg(long = "n-max")]
        n_max: Option<usize>,
        #[arg(long, default_value = "200x256")]
        grid: String,
        #[arg(long = "disk-radius", default_value_t = 6.0)]
        disk_radius: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GateArg {
    Or,
    And,
    Xor,
    Not,
    Cnot,
}

impl From<GateArg> for GateKind {
    fn from(g: GateArg) -> Self {
        match g {
            GateArg::Or => GateKind::Or,
            GateArg::And => GateKind::And,
            GateArg::Xor => GateKind::Xor,
            GateArg::Not => GateKind::Not,
            GateArg::Cnot => GateKind::Cnot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Projector,
    Chain,
}

/// What a command produced: a JSON report or raw CSV text.
enum Artifact {
    Report {
        command: &'static str,
        inputs: Value,
        tolerances: Value,
        checks: Vec<CheckReport>,
        result: Value,
    },
    Csv(String, bool),
}

fn labels(arg: &str) -> Result<Vec<Label>> {
    parse_labels(&read_json_arg(arg)?)
}

fn space(arg: &str) -> Result<CoherentSpace> {
    CoherentSpace::new(&labels(arg)?)
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("grid `{s}` is not of the form <radial>x<angular>"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let n_r: usize = a.trim().parse().map_err(|_| bad())?;
    let n_phi: usize = b.trim().parse().map_err(|_| bad())?;
    if n_r == 0 || n_phi == 0 {
        return Err(bad());
    }
    Ok((n_r, n_phi))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn run(cmd: Command) -> Result<(Artifact, Option<PathBuf>)> {
    Ok(match cmd {
        Command::Gram { labels: l, common } => {
            let s = space(&l.labels)?;
            let tol = common.tol.unwrap_or(1e-10);
            let checks = s.invariant_reports(tol);
            let two_point = s.two_point().map(|t| json!({"mu": t.mu, "theta": t.theta}));
            let result = json!({
                "labels": s.labels(),
                "g": MatrixJson::from(s.g()),
                "ginv": MatrixJson::from(s.ginv()),
                "eigvals": s.eigvals(),
                "eigvecs": s.eigvecs().iter().map(|e| e.iter().copied().collect::<Vec<C64>>()).collect::<Vec<_>>(),
                "cond": s.cond(),
                "two_point": two_point,
            });
            (
                Artifact::Report {
                    command: "gram",
                    inputs: json!({"labels": s.labels()}),
                    tolerances: json!({"invariants": tol}),
                    checks,
                    result,
                },
                common.out,
            )
        }
        Command::Projector { labels: l, n_max, block, common } => {
            let s = space(&l.labels)?;
            let trunc = TruncationPolicy::new(n_max);
            let tol = common.tol.unwrap_or(1e-9);
            let p = projector(&s, &trunc)?;
            let mut fixes: f64 = 0.0;
            for v in s.coherent_vectors(&trunc)? {
                fixes = fixes.max(p.apply(&v)?.sub(&v)?.norm());
            }
            let checks = vec![
                CheckReport::new("||P^2 - P||_F", p.compose(&p)?.sub(&p)?.frobenius_norm(), tol),
                CheckReport::new("|Tr P - |S||", (p.trace() - s.dim() as f64).norm(), tol),
                CheckReport::new("||P coh(A_j) - coh(A_j)||", fixes, tol),
                CheckReport::new("hermiticity", p.hermiticity_residual(), tol),
            ];
            let b = block.min(trunc.dim());
            let result = json!({
                "rank": s.dim(),
                "trace": p.trace(),
                "elements_in_coherent_basis": MatrixJson::from(s.g()),
                "fock_block": MatrixJson::from(&p.block(b)),
            });
            (
                Artifact::Report {
                    command: "projector",
                    inputs: json!({"labels": s.labels(), "n_max": n_max, "block": block}),
                    tolerances: json!({"projector": tol}),
                    checks,
                    result,
                },
                common.out,
            )
        }
        Command::Chain { labels: l, n_max, common } => {
            let s = space(&l.labels)?;
            let trunc = TruncationPolicy::new(n_max);
            let tol = common.tol.unwrap_or(1e-9);
            let chain = gs_chain(&s, &trunc)?;
            let p = projector(&s, &trunc)?;
            let mut total = FockOperator::zeros(trunc.dim());
            let mut orth: f64 = 0.0;
            for (i, w) in chain.iter().enumerate() {
                total = total.add(w)?;
                for v in &chain[i + 1..] {
                    orth = orth.max(w.compose(v)?.frobenius_norm());
                }
            }
            let traces: Vec<C64> = chain.iter().map(|w| w.trace()).collect();
            let trace_err = traces.iter().map(|t| (t - 1.0).norm()).fold(0.0, f64::max);
            let checks = vec![
                CheckReport::new("||sum of chain - P||_F", total.sub(&p)?.frobenius_norm(), tol),
                CheckReport::new("chain pairwise orthogonality", orth, tol),
                CheckReport::new("each chain element has trace 1", trace_err, tol),
            ];
            (
                Artifact::Report {
                    command: "chain",
                    inputs: json!({"labels": s.labels(), "n_max": n_max}),
                    tolerances: json!({"chain": tol}),
                    checks,
                    result: json!({"taus": gs_taus(&s)?, "traces": traces}),
                },
                common.out,
            )
        }
        Command::TruthTable { gate, r, table1_order, common } => {
            let base = parse_set(&read_json_arg(&r)?)?;
            let table = truth_table(gate.into(), &base)?;
            (Artifact::Csv(table.to_csv_string(table1_order), true), common.out)
        }
        Command::CnotClassical { r, common } => {
            let base = parse_set(&read_json_arg(&r)?)?;
            let table = truth_table(GateKind::Cnot, &base)?;
            let mut checks = vec![CheckReport::exact("reversible", check_reversible(&table))];
            let mut maps = Vec::new();
            for c in 0..1u64 << base.len() {
                let m = fixed_control_target_map(&decode(&base, c)?, &base)?;
                checks.push(CheckReport::exact(
                    format!("control {c}: bijective involution"),
                    m.is_bijection() && m.is_involution(),
                ));
                maps.push(json!({"control": c, "perm": m.perm, "cycles": m.cycles(), "identity": m.is_identity()}));
            }
            (
                Artifact::Report {
                    command: "cnot-classical",
                    inputs: json!({"R": base}),
                    tolerances: json!({}),
                    checks,
                    result: json!({"rows": table.rows, "target_maps": maps}),
                },
                common.out,
            )
        }
        Command::CnotQuantum { labels: la, target, common } => {
            let lb = match &target {
                Some(t) => labels(t)?,
                None => vec![Label::new(1.0, -0.2), Label::new(-0.1, 0.5)],
            };
            let la = match &la {
                Some(a) => labels(a)?,
                None if lb.len() == 4 => square_labels(1.0),
                None => vec![Label::new(0.3, 0.4), Label::new(-0.6, 0.9)],
            };
            let (sa, sb) = (CoherentSpace::new(&la)?, CoherentSpace::new(&lb)?);
            let gate = match (sa.dim(), sb.dim()) {
                (2, 2) => build_cnot2(&sa, &sb)?,
                (4, 4) => build_cnot4(&sa, &sb)?,
                (a, b) if a == b => build_controlled(&sa, &sb)?,
                (a, b) => return Err(Error::WrongSpaceSize { expected: a, found: b }),
            };
            let tol = common.tol.unwrap_or(1e-12);
            let semantic = common.tol.unwrap_or(1e-10);
            let checks = gate_reports(&gate, tol, semantic, 1);
            (
                Artifact::Report {
                    command: "cnot-quantum",
                    inputs: json!({"labels": la, "target": lb}),
                    tolerances: json!({"algebraic": tol, "semantic": semantic}),
                    checks,
                    result: to_value(&gate.to_json()),
                },
                common.out,
            )
        }
        Command::Contour { labels: l, common } => {
            let s = space(&l.labels)?;
            let tol = common.tol.unwrap_or(1e-12);
            let k = kernel_of_projector(&s);
            let checks = vec![
                CheckReport::new("idempotency (relative)", kernel_product(&k, &k).relative_distance(&k), tol),
                CheckReport::new("|Tr - |S||", (kernel_trace(&k)? - s.dim() as f64).norm(), tol.max(1e-12) * s.dim().max(1) as f64 * 10.0),
                CheckReport::exact("pole set = conjugated labels", k.pole_set() == s.label_set().conj()),
            ];
            (
                Artifact::Report {
                    command: "contour",
                    inputs: json!({"labels": s.labels()}),
                    tolerances: json!({"coefficients": tol}),
                    checks,
                    result: json!({"kernel": k, "poles": k.pole_set()}),
                },
                common.out,
            )
        }
        Command::Resolution { labels: l, kind, grid, disk_radius, block, common } => {
            let offsets: Vec<Label> = from_json_str(&read_json_arg(&l)?)?;
            let (n_r, n_phi) = parse_grid(&grid)?;
            let kind = match kind {
                KindArg::Projector => ResolutionKind::Projector,
                KindArg::Chain => ResolutionKind::Chain,
            };
            let g = DiskGrid::new(disk_radius, n_r, n_phi);
            let (op, diff) = resolution_with_difference(&offsets, kind, &g, block)?;
            let id = DMatrix::<C64>::identity(block + 1, block + 1);
            let tol = common.tol.unwrap_or(1e-3);
            let conv = common.tol.unwrap_or(1e-4);
            let checks = vec![
                CheckReport::new("block deviation from identity", (&op.0 - id).max_abs(), tol),
                CheckReport::new("agreement with halved grid", diff, conv),
            ];
            (
                Artifact::Report {
                    command: "resolution",
                    inputs: json!({"offsets": offsets, "kind": kind, "grid": [n_r, n_phi], "disk_radius": disk_radius, "block": block}),
                    tolerances: json!({"identity": tol, "grid": conv}),
                    checks,
                    result: json!({"block": MatrixJson::from(&op.0)}),
                },
                common.out,
            )
        }
        Command::Qfunction { labels: l, rho, t, n_max, common } => {
            let s = space(&l.labels)?;
            let trunc = TruncationPolicy::new(n_max);
            let rho = match rho {
                Some(r) => {
                    let rows: Vec<Vec<C64>> = from_json_str(&read_json_arg(&r)?)?;
                    let small = matrix_from_rows(&rows)?;
                    if small.nrows() != small.ncols() || small.nrows() > trunc.dim() {
                        return Err(Error::Parse(format!(
                            "rho must be square with at most {} rows",
                            trunc.dim()
                        )));
                    }
                    let mut m = DMatrix::zeros(trunc.dim(), trunc.dim());
                    m.view_mut((0, 0), small.shape()).copy_from(&small);
                    FockOperator(m)
                }
                None => {
                    let mut m = DMatrix::zeros(trunc.dim(), trunc.dim());
                    m[(0, 0)] = C64::new(1.0, 0.0);
                    FockOperator(m)
                }
            };
            let q = q_function(&rho, &s, &trunc)?;
            let evolved = rho.conjugate_by(&evolution_op(t, &trunc))?;
            let lhs = q_function(&evolved, &s, &trunc)?;
            let rhs = q_function(&rho, &s.rotated(-t)?, &trunc)?;
            let tol = common.tol.unwrap_or(1e-8);
            let checks = vec![
                CheckReport::new("Q within [0, 1]", if (0.0..=1.0 + 1e-12).contains(&q) { 0.0 } else { 1.0 }, 0.5),
                CheckReport::new("Q(U rho U^+, S) = Q(rho, S e^{-it})", (lhs - rhs).abs(), tol),
            ];
            (
                Artifact::Report {
                    command: "qfunction",
                    inputs: json!({"labels": s.labels(), "n_max": n_max, "t": t}),
                    tolerances: json!({"evolution": tol}),
                    checks,
                    result: json!({"q": q, "q_evolved": lhs}),
                },
                common.out,
            )
        }
        Command::Verify { suite, seed, n_max, grid, disk_radius, common } => {
            let suite: Suite = suite.parse()?;
            let cfg = VerifyConfig {
                seed,
                tol: common.tol,
                n_max,
                grid: parse_grid(&grid)?,
                disk_radius,
            };
            let reports = verify::run(suite, &cfg)?;
            for r in &reports {
                eprintln!(
                    "{:<11} {} ({} checks, {:.2}s)",
                    r.suite.name(),
                    if r.pass { "PASS" } else { "FAIL" },
                    r.checks.len(),
                    r.elapsed_s
                );
                for c in r.checks.iter().filter(|c| !c.pass) {
                    eprintln!("    failed: {} residual {:.3e} tolerance {:.3e}", c.check, c.residual, c.tolerance);
                }
            }
            let checks: Vec<CheckReport> = reports.iter().flat_map(|r| r.checks.clone()).collect();
            (
                Artifact::Report {
                    command: "verify",
                    inputs: to_value(&json!({"suite": suite, "config": cfg})),
                    tolerances: json!({"override": cfg.tol}),
                    checks,
                    result: to_value(&reports),
                },
                common.out,
            )
        }
    })
}

fn emit(artifact: Artifact, out: Option<PathBuf>) -> std::io::Result<bool> {
    let (text, pass) = match artifact {
        Artifact::Csv(text, pass) => (text, pass),
        Artifact::Report {
            command,
            inputs,
            tolerances,
            checks,
            result,
        } => {
            let hash = Sha256::digest(format!("{command}:{inputs}").as_bytes());
            let pass = all_pass(&checks);
            let body = json!({
                "command": command,
                "input_hash": format!("{hash:x}"),
                "inputs": inputs,
                "tolerances": tolerances,
                "pass": pass,
                "checks": checks,
                "result": result,
            });
            (serde_json::to_string_pretty(&body)? + "\n", pass)
        }
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((artifact, out)) => match emit(artifact, out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
