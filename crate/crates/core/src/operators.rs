//! Shift-type operators acting exactly on finitely supported sequences.
//!
//! Vectors live in `c00` (unilateral, indices `>= 0`) or `c00(Z)` (bilateral).
//! The one-dimensional space `C` is modelled as unilateral vectors supported
//! on `{0}`. A direct sum of `m` blocks interleaves coordinates: global index
//! `g` belongs to block `g mod m` at local index `g div m`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wide::{WideComplex, WideReal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "uni")]
    Unilateral,
    #[serde(rename = "bi")]
    Bilateral,
}

/// Finitely supported complex sequence. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeqVector", into = "RawSeqVector")]
pub struct SeqVector {
    domain: Domain,
    entries: BTreeMap<i64, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawSeqVector {
    domain: Domain,
    entries: Vec<(i64, f64, f64)>,
}

impl TryFrom<RawSeqVector> for SeqVector {
    type Error = OperatorError;

    fn try_from(raw: RawSeqVector) -> Result<Self, Self::Error> {
        SeqVector::from_entries(raw.domain, raw.entries.into_iter().map(|(i, re, im)| (i, Complex64::new(re, im))))
    }
}

impl From<SeqVector> for RawSeqVector {
    fn from(v: SeqVector) -> Self {
        RawSeqVector { domain: v.domain, entries: v.entries.into_iter().map(|(i, z)| (i, z.re, z.im)).collect() }
    }
}

impl SeqVector {
    pub fn zero(domain: Domain) -> Self {
        SeqVector { domain, entries: BTreeMap::new() }
    }

    /// Builds a vector; repeated indices are summed.
    pub fn from_entries(
        domain: Domain,
        entries: impl IntoIterator<Item = (i64, Complex64)>,
    ) -> Result<Self, OperatorError> {
        let mut v = SeqVector::zero(domain);
        for (i, z) in entries {
            if domain == Domain::Unilateral && i < 0 {
                return Err(OperatorError::InvalidVector(format!("unilateral vector with negative index {i}")));
            }
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(OperatorError::InvalidVector(format!("non-finite entry at index {i}")));
            }
            v.add_at(i, z);
        }
        Ok(v)
    }

    /// Standard basis vector `e_j`.
    pub fn basis(domain: Domain, j: i64) -> Self {
        assert!(domain == Domain::Bilateral || j >= 0, "unilateral basis index must be >= 0");
        let mut v = SeqVector::zero(domain);
        v.entries.insert(j, Complex64::new(1.0, 0.0));
        v
    }

    /// A point of `C`, i.e. `z * e_0` in the unilateral domain.
    pub fn scalar(z: Complex64) -> Self {
        let mut v = SeqVector::zero(Domain::Unilateral);
        v.add_at(0, z);
        v
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn get(&self, i: i64) -> Complex64 {
        self.entries.get(&i).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries.iter().map(|(&i, &z)| (i, z))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    /// `max{j >= 0 : v(j) != 0}`, or 0 when no nonnegative index is occupied.
    pub fn degree(&self) -> i64 {
        self.max_index().filter(|&j| j >= 0).unwrap_or(0)
    }

    fn add_at(&mut self, i: i64, z: Complex64) {
        let slot = self.entries.entry(i).or_default();
        *slot += z;
        if *slot == Complex64::new(0.0, 0.0) {
            self.entries.remove(&i);
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> SeqVector {
        let mut out = SeqVector::zero(self.domain);
        for (&i, &z) in &self.entries {
            out.add_at(i, c * z);
        }
        out
    }

    pub fn add(&self, other: &SeqVector) -> Result<SeqVector, OperatorError> {
        if self.domain != other.domain {
            return Err(OperatorError::DomainMismatch("cannot add unilateral and bilateral vectors".into()));
        }
        let mut out = self.clone();
        for (&i, &z) in &other.entries {
            out.add_at(i, z);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SeqVector) -> Result<SeqVector, OperatorError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Coordinates `section[k]` of this vector.
    pub fn project(&self, section: &[i64]) -> Vec<Complex64> {
        section.iter().map(|&i| self.get(i)).collect()
    }
}

/// Sparse vector with wide-exponent entries, used where intermediate values leave the `f64` range.
#[derive(Clone, Debug, PartialEq)]
pub struct WideVector {
    domain: Domain,
    entries: BTreeMap<i64, WideComplex>,
}

impl WideVector {
    pub fn zero(domain: Domain) -> Self {
        WideVector { domain, entries: BTreeMap::new() }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, WideComplex)> + '_ {
        self.entries.iter().map(|(&i, &z)| (i, z))
    }

    fn add_at(&mut self, i: i64, z: WideComplex) {
        let slot = self.entries.entry(i).or_insert(WideComplex::ZERO);
        *slot = *slot + z;
        if slot.is_zero() {
            self.entries.remove(&i);
        }
    }

    pub fn add(&self, other: &WideVector) -> WideVector {
        let mut out = self.clone();
        for (&i, &z) in &other.entries {
            out.add_at(i, z);
        }
        out
    }

    pub fn sub(&self, other: &WideVector) -> WideVector {
        self.add(&other.scale(-WideComplex::ONE))
    }

    pub fn scale(&self, c: WideComplex) -> WideVector {
        let mut out = WideVector::zero(self.domain);
        for (&i, &z) in &self.entries {
            out.add_at(i, c * z);
        }
        out
    }

    pub fn norm(&self) -> WideReal {
        self.entries.values().fold(WideReal::ZERO, |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Rounds every entry to `f64`; entries below the subnormal range become zero.
    pub fn to_seq(&self) -> SeqVector {
        let mut out = SeqVector::zero(self.domain);
        for (&i, &z) in &self.entries {
            out.add_at(i, z.to_c64());
        }
        out
    }
}

impl From<&SeqVector> for WideVector {
    fn from(v: &SeqVector) -> Self {
        WideVector {
            domain: v.domain,
            entries: v.entries.iter().map(|(&i, &z)| (i, WideComplex::from_c64(z))).collect(),
        }
    }
}

/// Piecewise-constant nonzero weights over `Z`.
///
/// `values[k]` applies on the `k`-th piece; piece boundaries are the
/// `breakpoints`, each one the first index of a new piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    breakpoints: Vec<i64>,
    values: Vec<f64>,
}

impl WeightSpec {
    pub fn new(breakpoints: Vec<i64>, values: Vec<f64>) -> Result<Self, OperatorError> {
        let w = WeightSpec { breakpoints, values };
        w.validate()?;
        Ok(w)
    }

    /// `w_i = 2` for `i > 0`, `w_i = 1` otherwise.
    pub fn doubling_on_positive() -> Self {
        WeightSpec { breakpoints: vec![1], values: vec![1.0, 2.0] }
    }

    pub fn constant(c: f64) -> Self {
        WeightSpec { breakpoints: vec![], values: vec![c] }
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.values.len() != self.breakpoints.len() + 1 {
            return Err(OperatorError::InvalidOperator("weights need one value per piece".into()));
        }
        if self.breakpoints.windows(2).any(|p| p[0] >= p[1]) {
            return Err(OperatorError::InvalidOperator("weight breakpoints must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(OperatorError::InvalidOperator("weights must be finite and nonzero".into()));
        }
        Ok(())
    }

    pub fn weight(&self, i: i64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= i)]
    }

    /// Weights `nu_i = 1 / w_{i+1}` of the forward shift inverting the backward shift with weights `w`.
    pub fn inverse_forward(&self) -> WeightSpec {
        WeightSpec {
            breakpoints: self.breakpoints.iter().map(|b| b - 1).collect(),
            values: self.values.iter().map(|v| 1.0 / v).collect(),
        }
    }

    /// Pieces as `(first, last, value)`, with open ends at `i64::MIN` / `i64::MAX`.
    fn pieces(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        (0..self.values.len()).map(move |k| {
            let lo = if k == 0 { i64::MIN } else { self.breakpoints[k - 1] };
            let hi = if k == self.breakpoints.len() { i64::MAX } else { self.breakpoints[k] - 1 };
            (lo, hi, self.values[k])
        })
    }

    /// `prod_{i = lo}^{hi} w_i`, empty product 1.
    pub fn product(&self, lo: i64, hi: i64) -> WideComplex {
        let mut acc = WideComplex::ONE;
        if lo > hi {
            return acc;
        }
        for (a, b, v) in self.pieces() {
            let start = a.max(lo);
            let end = b.min(hi);
            if start <= end {
                acc = acc * WideComplex::from_real(v).powu((end - start + 1) as u64);
            }
        }
        acc
    }

    /// Largest `|w_j w_{j-1} ... w_{j-n+1}|` over all window positions.
    fn max_window_product(&self, n: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let n = n as i64;
        let first = self.values[0].abs();
        let last = self.values[self.values.len() - 1].abs();
        let mut best = WideComplex::from_real(first).powu(n as u64).abs();
        let tail = WideComplex::from_real(last).powu(n as u64).abs();
        if tail > best {
            best = tail;
        }
        // windows meeting a breakpoint are the only other candidates
        for &b in &self.breakpoints {
            for hi in (b - 1)..=(b + n - 1) {
                let p = self.product(hi - n + 1, hi).abs();
                if p > best {
                    best = p;
                }
            }
        }
        best.to_f64()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    /// Unilateral backward shift `B e_j = e_{j-1}`, `B e_0 = 0`.
    BackwardShift,
    /// Unilateral forward shift `F e_j = e_{j+1}`.
    ForwardShift,
    /// Bilateral `B_w e_j = w_j e_{j-1}`.
    WeightedBilateralBackward {
        weights: WeightSpec,
    },
    /// Bilateral `F_nu e_j = nu_j e_{j+1}`.
    WeightedBilateralForward {
        weights: WeightSpec,
    },
    /// `c * Id` on `C`.
    ScalarOnC {
        c: Complex64,
    },
    DirectSum {
        blocks: Vec<OperatorSpec>,
    },
    ScalarMultiple {
        lambda: Complex64,
        inner: Box<OperatorSpec>,
    },
}

impl OperatorSpec {
    pub fn scalar_multiple(lambda: Complex64, inner: OperatorSpec) -> Self {
        OperatorSpec::ScalarMultiple { lambda, inner: Box::new(inner) }
    }

    /// `B_w` with `w_i = 2` for `i > 0` and `1` otherwise.
    pub fn doubling_backward() -> Self {
        OperatorSpec::WeightedBilateralBackward { weights: WeightSpec::doubling_on_positive() }
    }

    /// `F_{1/w}`, the inverse of [`OperatorSpec::doubling_backward`].
    pub fn doubling_backward_inverse() -> Self {
        OperatorSpec::WeightedBilateralForward { weights: WeightSpec::doubling_on_positive().inverse_forward() }
    }

    pub fn domain(&self) -> Domain {
        match self {
            OperatorSpec::BackwardShift | OperatorSpec::ForwardShift | OperatorSpec::ScalarOnC { .. } => {
                Domain::Unilateral
            }
            OperatorSpec::WeightedBilateralBackward { .. } | OperatorSpec::WeightedBilateralForward { .. } => {
                Domain::Bilateral
            }
            OperatorSpec::DirectSum { blocks } => {
                if blocks.iter().any(|b| b.domain() == Domain::Bilateral) {
                    Domain::Bilateral
                } else {
                    Domain::Unilateral
                }
            }
            OperatorSpec::ScalarMultiple { inner, .. } => inner.domain(),
        }
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        match self {
            OperatorSpec::WeightedBilateralBackward { weights }
            | OperatorSpec::WeightedBilateralForward { weights } => weights.validate(),
            OperatorSpec::ScalarOnC { c } | OperatorSpec::ScalarMultiple { lambda: c, .. }
                if !(c.re.is_finite() && c.im.is_finite()) =>
            {
                Err(OperatorError::InvalidOperator("non-finite scalar".into()))
            }
            OperatorSpec::DirectSum { blocks } if blocks.is_empty() => {
                Err(OperatorError::InvalidOperator("direct sum needs at least one block".into()))
            }
            OperatorSpec::DirectSum { blocks } => blocks.iter().try_for_each(OperatorSpec::validate),
            OperatorSpec::ScalarMultiple { inner, .. } => inner.validate(),
            _ => Ok(()),
        }
    }
}

fn check_domain(t: &OperatorSpec, domain: Domain) -> Result<(), OperatorError> {
    if t.domain() != domain {
        return Err(OperatorError::DomainMismatch(format!(
            "operator acts on {:?} sequences, vector is {:?}",
            t.domain(),
            domain
        )));
    }
    Ok(())
}

fn check_scalar_support<'a>(mut indices: impl Iterator<Item = &'a i64>) -> Result<(), OperatorError> {
    if indices.any(|&i| i != 0) {
        return Err(OperatorError::DomainMismatch("a scalar operator on C needs support in {0}".into()));
    }
    Ok(())
}

/// Splits a direct-sum vector into its blocks.
fn split_blocks(blocks: &[OperatorSpec], v: &WideVector) -> Result<Vec<WideVector>, OperatorError> {
    let m = blocks.len() as i64;
    let mut parts: Vec<WideVector> = blocks.iter().map(|b| WideVector::zero(b.domain())).collect();
    for (&g, &z) in &v.entries {
        let b = g.rem_euclid(m) as usize;
        let j = g.div_euclid(m);
        if parts[b].domain == Domain::Unilateral && j < 0 {
            return Err(OperatorError::DomainMismatch(format!(
                "index {g} maps to negative local index in unilateral block {b}"
            )));
        }
        parts[b].add_at(j, z);
    }
    Ok(parts)
}

fn join_blocks(domain: Domain, parts: Vec<WideVector>) -> WideVector {
    let m = parts.len() as i64;
    let mut out = WideVector::zero(domain);
    for (b, part) in parts.into_iter().enumerate() {
        for (j, z) in part.entries {
            out.add_at(j * m + b as i64, z);
        }
    }
    out
}

/// One application of `t`, by direct coordinate manipulation.
pub fn apply(t: &OperatorSpec, v: &SeqVector) -> Result<SeqVector, OperatorError> {
    check_domain(t, v.domain)?;
    let mut out = SeqVector::zero(v.domain);
    match t {
        OperatorSpec::BackwardShift => {
            for (&j, &z) in &v.entries {
                if j > 0 {
                    out.add_at(j - 1, z);
                }
            }
        }
        OperatorSpec::ForwardShift => {
            for (&j, &z) in &v.entries {
                out.add_at(j + 1, z);
            }
        }
        OperatorSpec::WeightedBilateralBackward { weights } => {
            for (&j, &z) in &v.entries {
                out.add_at(j - 1, z * weights.weight(j));
            }
        }
        OperatorSpec::WeightedBilateralForward { weights } => {
            for (&j, &z) in &v.entries {
                out.add_at(j + 1, z * weights.weight(j));
            }
        }
        OperatorSpec::ScalarOnC { c } => {
            check_scalar_support(v.entries.keys())?;
            out = v.scale(*c);
        }
        OperatorSpec::DirectSum { blocks } => {
            let parts = split_blocks(blocks, &WideVector::from(v))?;
            let mut images = Vec::with_capacity(parts.len());
            for (b, part) in blocks.iter().zip(parts) {
                images.push(WideVector::from(&apply(b, &part.to_seq())?));
            }
            out = join_blocks(v.domain, images).to_seq();
        }
        OperatorSpec::ScalarMultiple { lambda, inner } => {
            out = apply(inner, v)?.scale(*lambda);
        }
    }
    Ok(out)
}

/// `t^n v` in closed form on wide-exponent entries.
///
/// Shift powers move each basis vector by `n` places and multiply by the
/// product of the weights crossed, so the cost does not grow with `n`.
pub fn power_apply_wide(t: &OperatorSpec, n: u64, v: &WideVector) -> Result<WideVector, OperatorError> {
    check_domain(t, v.domain)?;
    let mut out = WideVector::zero(v.domain);
    let steps = n as i64;
    match t {
        OperatorSpec::BackwardShift => {
            for (&j, &z) in &v.entries {
                if j >= steps {
                    out.add_at(j - steps, z);
                }
            }
        }
        OperatorSpec::ForwardShift => {
            for (&j, &z) in &v.entries {
                out.add_at(j + steps, z);
            }
        }
        OperatorSpec::WeightedBilateralBackward { weights } => {
            for (&j, &z) in &v.entries {
                out.add_at(j - steps, z * weights.product(j - steps + 1, j));
            }
        }
        OperatorSpec::WeightedBilateralForward { weights } => {
            for (&j, &z) in &v.entries {
                out.add_at(j + steps, z * weights.product(j, j + steps - 1));
            }
        }
        OperatorSpec::ScalarOnC { c } => {
            check_scalar_support(v.entries.keys())?;
            out = v.scale(WideComplex::from_c64(*c).powu(n));
        }
        OperatorSpec::DirectSum { blocks } => {
            let parts = split_blocks(blocks, v)?;
            let mut images = Vec::with_capacity(parts.len());
            for (b, part) in blocks.iter().zip(parts) {
                images.push(power_apply_wide(b, n, &part)?);
            }
            out = join_blocks(v.domain, images);
        }
        OperatorSpec::ScalarMultiple { lambda, inner } => {
            out = power_apply_wide(inner, n, v)?.scale(WideComplex::from_c64(*lambda).powu(n));
        }
    }
    Ok(out)
}

/// `t^n v`.
pub fn power_apply(t: &OperatorSpec, n: u64, v: &SeqVector) -> Result<SeqVector, OperatorError> {
    Ok(power_apply_wide(t, n, &WideVector::from(v))?.to_seq())
}

/// Upper bound for `||t^n||` on `l^2`.
///
/// Exact for the shifts and for `c * Id`; direct sums take the largest block bound.
pub fn power_norm_bound(t: &OperatorSpec, n: u64) -> f64 {
    match t {
        OperatorSpec::BackwardShift | OperatorSpec::ForwardShift => 1.0,
        OperatorSpec::WeightedBilateralBackward { weights } | OperatorSpec::WeightedBilateralForward { weights } => {
            weights.max_window_product(n)
        }
        OperatorSpec::ScalarOnC { c } => c.norm().powi(n as i32),
        OperatorSpec::DirectSum { blocks } => blocks.iter().map(|b| power_norm_bound(b, n)).fold(0.0, f64::max),
        OperatorSpec::ScalarMultiple { lambda, inner } => lambda.norm().powi(n as i32) * power_norm_bound(inner, n),
    }
}

/// Where a catalog answer for `sigma_p(T*)` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    /// Follows from `sigma_p((cId)*) = {conj(c)}` and `sigma_p((T1 + T2)*)` being the union.
    ScalarCatalog,
    /// Standard textbook fact (e.g. the forward shift `B* = F` has no eigenvalues).
    StandardFact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AdjointSpectrum {
    Known { eigenvalues: Vec<Complex64>, source: SpectrumSource },
    Unknown,
}

/// Point spectrum of the adjoint from a closed-form catalog.
pub fn adjoint_point_spectrum(t: &OperatorSpec) -> AdjointSpectrum {
    use AdjointSpectrum::*;
    match t {
        OperatorSpec::BackwardShift => Known { eigenvalues: vec![], source: SpectrumSource::StandardFact },
        OperatorSpec::ScalarOnC { c } => Known { eigenvalues: vec![c.conj()], source: SpectrumSource::ScalarCatalog },
        OperatorSpec::ScalarMultiple { lambda, inner } => {
            if *lambda == Complex64::new(0.0, 0.0) {
                return Unknown;
            }
            match adjoint_point_spectrum(inner) {
                Known { eigenvalues, source } => {
                    Known { eigenvalues: eigenvalues.into_iter().map(|e| e * lambda.conj()).collect(), source }
                }
                Unknown => Unknown,
            }
        }
        OperatorSpec::DirectSum { blocks } => {
            let mut all: Vec<Complex64> = Vec::new();
            let mut source = SpectrumSource::ScalarCatalog;
            for b in blocks {
                match adjoint_point_spectrum(b) {
                    Known { eigenvalues, source: s } => {
                        if s == SpectrumSource::StandardFact {
                            source = s;
                        }
                        for e in eigenvalues {
                            if !all.contains(&e) {
                                all.push(e);
                            }
                        }
                    }
                    Unknown => return Unknown,
                }
            }
            Known { eigenvalues: all, source }
        }
        _ => Unknown,
    }
}
