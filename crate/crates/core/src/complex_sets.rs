//! Finite sets of complex labels as a Boolean ring.
//!
//! Union and intersection give the distributive lattice; symmetric difference
//! (`+`, XOR) and intersection (`·`, AND) give the Boolean ring. Sets keep the
//! order in which their elements were ingested: that order fixes the bit
//! assignment of [`IdealIndex`] codes (element `i` of `R` is bit `i`).
//! Equality between sets ignores order.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Two distinct labels closer than this are rejected at construction.
pub const EPS_DUP: f64 = 1e-12;

/// Largest base set accepted by [`powerset`].
pub const POWERSET_LIMIT: usize = 20;

/// A complex label with exact (bitwise) identity; `-0.0` and `0.0` coincide.
#[derive(Debug, Clone, Copy)]
pub struct Label {
    pub re: f64,
    pub im: f64,
}

impl Label {
    pub const ZERO: Label = Label { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Label { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn conj(self) -> Self {
        Label::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn distance(self, other: Label) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Bit patterns with `-0.0` folded into `0.0`, so that conjugating a real
    /// label gives back the same label.
    fn key(&self) -> (u64, u64) {
        ((self.re + 0.0).to_bits(), (self.im + 0.0).to_bits())
    }

    /// Lexicographic order on `(re, im)`, used for canonical serialization.
    pub fn canonical_cmp(&self, other: &Label) -> Ordering {
        let (a, b) = (self.key(), other.key());
        f64::from_bits(a.0)
            .total_cmp(&f64::from_bits(b.0))
            .then_with(|| f64::from_bits(a.1).total_cmp(&f64::from_bits(b.1)))
    }
}

impl From<Complex64> for Label {
    fn from(z: Complex64) -> Self {
        Label::new(z.re, z.im)
    }
}

impl From<Label> for Complex64 {
    fn from(l: Label) -> Self {
        l.to_complex()
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Label {}

impl Hash for Label {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.re, self.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Label::new(re, im))
    }
}

/// A finite set of labels: an element of the Boolean ring.
#[derive(Debug, Clone, Default)]
pub struct CSet {
    elems: Vec<Label>,
}

impl CSet {
    pub fn empty() -> Self {
        CSet { elems: Vec::new() }
    }

    /// Builds a set, rejecting non-finite labels, exact duplicates and
    /// distinct labels within [`EPS_DUP`] of each other.
    pub fn new<I: IntoIterator<Item = Label>>(labels: I) -> Result<Self> {
        let elems: Vec<Label> = labels.into_iter().collect();
        check_labels(&elems)?;
        Ok(CSet { elems })
    }

    pub fn singleton(label: Label) -> Self {
        CSet { elems: vec![label] }
    }

    /// Constructor for elements already known to be pairwise distinct
    /// (results of ring operations, merged pole locations).
    pub(crate) fn from_distinct(elems: Vec<Label>) -> Self {
        CSet { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.elems.contains(label)
    }

    /// Elements in ingestion order.
    pub fn labels(&self) -> &[Label] {
        &self.elems
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.elems.iter()
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.elems.iter().position(|l| l == label)
    }

    /// Elements sorted by `(re, im)`.
    pub fn canonical(&self) -> Vec<Label> {
        let mut v = self.elems.clone();
        v.sort_by(Label::canonical_cmp);
        v
    }

    pub fn conj(&self) -> CSet {
        CSet::from_distinct(self.elems.iter().map(|l| l.conj()).collect())
    }

    /// `S1 ∨ S2 = S1 ∪ S2`.
    pub fn union(&self, other: &CSet) -> CSet {
        let mut elems = self.elems.clone();
        elems.extend(other.elems.iter().filter(|l| !self.contains(l)));
        CSet::from_distinct(elems)
    }

    /// `S1 ∧ S2 = S1 ∩ S2`, the ring product.
    pub fn intersect(&self, other: &CSet) -> CSet {
        CSet::from_distinct(
            self.elems
                .iter()
                .filter(|l| other.contains(l))
                .copied()
                .collect(),
        )
    }

    /// Set difference `S1 \ S2`.
    pub fn minus(&self, other: &CSet) -> CSet {
        CSet::from_distinct(
            self.elems
                .iter()
                .filter(|l| !other.contains(l))
                .copied()
                .collect(),
        )
    }

    /// `S1 + S2`, the ring addition.
    pub fn sym_diff(&self, other: &CSet) -> CSet {
        let mut elems: Vec<Label> = self
            .elems
            .iter()
            .filter(|l| !other.contains(l))
            .copied()
            .collect();
        elems.extend(other.elems.iter().filter(|l| !self.contains(l)));
        CSet::from_distinct(elems)
    }

    /// Subset test, equality allowed.
    pub fn is_subset(&self, other: &CSet) -> bool {
        self.elems.iter().all(|l| other.contains(l))
    }

    /// `R \ S` for `S ⊆ R`.
    pub fn rel_complement(&self, base: &CSet) -> Result<CSet> {
        if !self.is_subset(base) {
            return Err(Error::NotASubset);
        }
        Ok(base.minus(self))
    }
}

impl PartialEq for CSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }
}

impl Eq for CSet {}

impl Serialize for CSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.canonical().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<Label>::deserialize(d)?;
        CSet::new(labels).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for CSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

pub fn check_labels(labels: &[Label]) -> Result<()> {
    if let Some(l) = labels.iter().find(|l| !l.is_finite()) {
        return Err(Error::NonFiniteLabel { label: *l });
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for (i, a) in labels.iter().enumerate() {
        if !seen.insert(*a) {
            return Err(Error::DuplicateLabel {
                first: *a,
                second: *a,
            });
        }
        for b in &labels[..i] {
            if a.distance(*b) < EPS_DUP {
                return Err(Error::DuplicateLabel {
                    first: *b,
                    second: *a,
                });
            }
        }
    }
    Ok(())
}

pub fn union(s1: &CSet, s2: &CSet) -> CSet {
    s1.union(s2)
}

pub fn intersect(s1: &CSet, s2: &CSet) -> CSet {
    s1.intersect(s2)
}

pub fn sym_diff(s1: &CSet, s2: &CSet) -> CSet {
    s1.sym_diff(s2)
}

pub fn rel_complement(s: &CSet, base: &CSet) -> Result<CSet> {
    s.rel_complement(base)
}

pub fn is_subset(s1: &CSet, s2: &CSet) -> bool {
    s1.is_subset(s2)
}

/// A subset of `R` identified by its integer code: bit `i` is membership of
/// the `i`-th element of `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealIndex {
    pub base: CSet,
    pub code: u64,
}

impl IdealIndex {
    pub fn subset(&self) -> CSet {
        decode_bits(&self.base, self.code)
    }
}

fn decode_bits(base: &CSet, code: u64) -> CSet {
    CSet::from_distinct(
        base.elems
            .iter()
            .enumerate()
            .filter(|(i, _)| code >> i & 1 == 1)
            .map(|(_, l)| *l)
            .collect(),
    )
}

pub fn encode(base: &CSet, s: &CSet) -> Result<IdealIndex> {
    if base.len() > 63 {
        return Err(Error::TooLarge {
            what: "ideal index base",
            size: base.len(),
            limit: 63,
        });
    }
    let mut code = 0u64;
    for l in s.iter() {
        match base.position(l) {
            Some(i) => code |= 1 << i,
            None => return Err(Error::NotASubset),
        }
    }
    Ok(IdealIndex {
        base: base.clone(),
        code,
    })
}

pub fn decode(base: &CSet, code: u64) -> Result<CSet> {
    if base.len() > 63 || code >> base.len() != 0 {
        return Err(Error::CodeOutOfRange {
            code,
            size: base.len(),
        });
    }
    Ok(decode_bits(base, code))
}

/// All `2^|R|` subsets of `R`, in ascending code order.
pub fn powerset(base: &CSet) -> Result<Vec<CSet>> {
    if base.len() > POWERSET_LIMIT {
        return Err(Error::TooLarge {
            what: "powerset base",
            size: base.len(),
            limit: POWERSET_LIMIT,
        });
    }
    Ok((0..1u64 << base.len())
        .map(|c| decode_bits(base, c))
        .collect())
}
