//! Classical gates over the principal ideal `I(R)` (all subsets of `R`).
//!
//! Inputs and outputs take one of `2^|R|` values, written as [`IdealIndex`]
//! codes. OR, AND and XOR are ring expressions in two variables; NOT is the
//! complement in `R`; CNOT maps `(S1, S2)` to `(S1, S1 + S2)`.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex_sets::{decode, encode, CSet};
use crate::error::{Error, Result};

/// Largest base set accepted by [`truth_table`].
pub const TABLE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Or,
    And,
    Xor,
    Not,
    Cnot,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn outputs(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Or => "OR",
            GateKind::And => "AND",
            GateKind::Xor => "XOR",
            GateKind::Not => "NOT",
            GateKind::Cnot => "CNOT",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Ok(GateKind::Or),
            "and" => Ok(GateKind::And),
            "xor" => Ok(GateKind::Xor),
            "not" => Ok(GateKind::Not),
            "cnot" => Ok(GateKind::Cnot),
            other => Err(Error::Parse(format!("unknown gate '{other}'"))),
        }
    }
}

fn require_subsets(base: &CSet, sets: &[&CSet]) -> Result<()> {
    if sets.iter().all(|s| s.is_subset(base)) {
        Ok(())
    } else {
        Err(Error::NotASubset)
    }
}

/// OR, AND or XOR of two subsets of `R`.
pub fn apply_basic(kind: GateKind, s1: &CSet, s2: &CSet, base: &CSet) -> Result<CSet> {
    require_subsets(base, &[s1, s2])?;
    match kind {
        // S1 + S2 + S1·S2
        GateKind::Or => Ok(s1.sym_diff(s2).sym_diff(&s1.intersect(s2))),
        GateKind::And => Ok(s1.intersect(s2)),
        GateKind::Xor => Ok(s1.sym_diff(s2)),
        other => Err(Error::Parse(format!("{other} is not a two-input, one-output gate"))),
    }
}

/// `R + S`.
pub fn apply_not(s: &CSet, base: &CSet) -> Result<CSet> {
    require_subsets(base, &[s])?;
    Ok(base.sym_diff(s))
}

/// `(S1, S2) -> (S1, S1 + S2)`.
pub fn apply_cnot(s1: &CSet, s2: &CSet, base: &CSet) -> Result<(CSet, CSet)> {
    require_subsets(base, &[s1, s2])?;
    Ok((s1.clone(), s1.sym_diff(s2)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthRow {
    pub inputs: Vec<u64>,
    pub outputs: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub base: CSet,
    pub kind: GateKind,
    /// Ordered lexicographically by input codes (first input most significant).
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    /// Rows reordered so the first input varies fastest, the column order
    /// used for the printed OR/AND/XOR table.
    pub fn first_varying_rows(&self) -> Vec<TruthRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.inputs.iter().rev().cmp(b.inputs.iter().rev()));
        rows
    }

    pub fn header(&self) -> Vec<&'static str> {
        match self.kind {
            GateKind::Cnot => vec!["in_control", "in_target", "out_control", "out_target"],
            GateKind::Not => vec!["in", "out"],
            _ => vec!["in1", "in2", "out"],
        }
    }

    /// Writes the table as CSV. With `first_varying` the rows follow the
    /// printed OR/AND/XOR table order instead of lexicographic order.
    pub fn write_csv<W: Write>(&self, w: W, first_varying: bool) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(self.header())?;
        let rows = if first_varying {
            self.first_varying_rows()
        } else {
            self.rows.clone()
        };
        for row in rows {
            wtr.write_record(
                row.inputs
                    .iter()
                    .chain(row.outputs.iter())
                    .map(|c| c.to_string()),
            )?;
        }
        wtr.flush()
    }

    pub fn to_csv_string(&self, first_varying: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, first_varying)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Exhaustive truth table over all input tuples of `I(R)`.
pub fn truth_table(kind: GateKind, base: &CSet) -> Result<TruthTable> {
    if base.len() > TABLE_LIMIT {
        return Err(Error::TooLarge {
            what: "truth table base",
            size: base.len(),
            limit: TABLE_LIMIT,
        });
    }
    let d = 1u64 << base.len();
    let code = |s: &CSet| encode(base, s).map(|i| i.code);
    let mut rows = Vec::with_capacity((d as usize).pow(kind.arity() as u32));
    if kind.arity() == 1 {
        for c in 0..d {
            let s = decode(base, c)?;
            rows.push(TruthRow {
                inputs: vec![c],
                outputs: vec![code(&apply_not(&s, base)?)?],
            });
        }
    } else {
        for c1 in 0..d {
            let s1 = decode(base, c1)?;
            for c2 in 0..d {
                let s2 = decode(base, c2)?;
                let outputs = match kind {
                    GateKind::Cnot => {
                        let (o1, o2) = apply_cnot(&s1, &s2, base)?;
                        vec![code(&o1)?, code(&o2)?]
                    }
                    _ => vec![code(&apply_basic(kind, &s1, &s2, base)?)?],
                };
                rows.push(TruthRow {
                    inputs: vec![c1, c2],
                    outputs,
                });
            }
        }
    }
    Ok(TruthTable {
        base: base.clone(),
        kind,
        rows,
    })
}

/// True iff the output tuples are a permutation of the input tuples.
pub fn check_reversible(table: &TruthTable) -> bool {
    if table.rows.iter().any(|r| r.outputs.len() != r.inputs.len()) {
        return false;
    }
    let inputs: HashSet<&[u64]> = table.rows.iter().map(|r| r.inputs.as_slice()).collect();
    let outputs: HashSet<&[u64]> = table.rows.iter().map(|r| r.outputs.as_slice()).collect();
    outputs.len() == table.rows.len() && inputs == outputs
}

/// The target map `S2 -> S1 + S2` for a fixed control `S1`, as a permutation
/// of codes: `perm[c]` is the output code for target code `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetMap {
    pub control: u64,
    pub perm: Vec<u64>,
}

impl TargetMap {
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        self.perm.iter().all(|&c| {
            let c = c as usize;
            c < seen.len() && !std::mem::replace(&mut seen[c], true)
        })
    }

    pub fn is_involution(&self) -> bool {
        self.perm
            .iter()
            .enumerate()
            .all(|(c, &o)| self.perm.get(o as usize) == Some(&(c as u64)))
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(c, &o)| o == c as u64)
    }

    /// Non-trivial cycles, each starting at its smallest code.
    pub fn cycles(&self) -> Vec<Vec<u64>> {
        let mut seen = vec![false; self.perm.len()];
        let mut out = Vec::new();
        for start in 0..self.perm.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut c = start;
            while !seen[c] {
                seen[c] = true;
                cycle.push(c as u64);
                c = self.perm[c] as usize;
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }
}

pub fn fixed_control_target_map(s1: &CSet, base: &CSet) -> Result<TargetMap> {
    require_subsets(base, &[s1])?;
    if base.len() > TABLE_LIMIT {
        return Err(Error::TooLarge {
            what: "target map base",
            size: base.len(),
            limit: TABLE_LIMIT,
        });
    }
    let control = encode(base, s1)?.code;
    // S1 + S2 on codes is bitwise XOR of the membership bits.
    let perm = (0..1u64 << base.len()).map(|c| c ^ control).collect();
    Ok(TargetMap { control, perm })
}
