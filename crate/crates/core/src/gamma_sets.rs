//! Symbolic scalar sets `Gamma` in the complex plane and the decision
//! procedures built on them: moduli, hypercyclic-scalar-set classification,
//! products with the rotation group `G_theta`, and density in `C`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::wide::WideComplex;

/// Boundaries closer than this (relative) are treated as coincident.
const SNAP_TOL: f64 = 1e-12;
/// Boundaries separated by more than `SNAP_TOL` but at most this are too close to call.
const AMBIGUOUS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaSetError {
    #[error("the set is empty or reduces to {{0}}")]
    EmptySet,
    #[error("density undecidable: {0}")]
    Undecidable(String),
    #[error("invalid scalar set: {0}")]
    InvalidSet(String),
}

/// An angle carried symbolically so that rationality over `pi` is never guessed from a float.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAngle", into = "RawAngle")]
pub enum AngleSpec {
    /// `p * pi / q` in lowest terms, `q > 0`.
    RationalPi {
        p: i64,
        q: u64,
    },
    DeclaredIrrational {
        value: f64,
        tag: String,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawAngle {
    Rational { pi_rational: (i64, u64) },
    Irrational { irrational: f64, tag: String },
}

impl TryFrom<RawAngle> for AngleSpec {
    type Error = GammaSetError;

    fn try_from(raw: RawAngle) -> Result<Self, Self::Error> {
        match raw {
            RawAngle::Rational { pi_rational: (p, q) } => AngleSpec::rational_pi(p, q),
            RawAngle::Irrational { irrational, tag } => AngleSpec::irrational(irrational, tag),
        }
    }
}

impl From<AngleSpec> for RawAngle {
    fn from(a: AngleSpec) -> Self {
        match a {
            AngleSpec::RationalPi { p, q } => RawAngle::Rational { pi_rational: (p, q) },
            AngleSpec::DeclaredIrrational { value, tag } => RawAngle::Irrational { irrational: value, tag },
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl AngleSpec {
    pub fn rational_pi(p: i64, q: u64) -> Result<Self, GammaSetError> {
        if q == 0 {
            return Err(GammaSetError::InvalidSet("rational angle needs q > 0".into()));
        }
        let g = gcd(p.unsigned_abs(), q).max(1);
        Ok(AngleSpec::RationalPi { p: p / g as i64, q: q / g })
    }

    pub fn irrational(value: f64, tag: impl Into<String>) -> Result<Self, GammaSetError> {
        if !value.is_finite() {
            return Err(GammaSetError::InvalidSet("irrational angle must be finite".into()));
        }
        Ok(AngleSpec::DeclaredIrrational { value, tag: tag.into() })
    }

    pub fn radians(&self) -> f64 {
        match self {
            AngleSpec::RationalPi { p, q } => *p as f64 * PI / *q as f64,
            AngleSpec::DeclaredIrrational { value, .. } => *value,
        }
    }

    /// Order of `e^{i theta}` in the circle group, `None` when it generates a dense subgroup.
    pub fn group_order(&self) -> Option<u64> {
        match self {
            AngleSpec::RationalPi { p, q } => Some(2 * q / gcd(p.unsigned_abs(), 2 * q)),
            AngleSpec::DeclaredIrrational { .. } => None,
        }
    }

    /// Angles of the finite group `G_theta`, each reduced exactly modulo `2 pi` before conversion.
    fn group_angles(&self) -> Option<Vec<f64>> {
        let AngleSpec::RationalPi { p, q } = self else { return None };
        let n = self.group_order()?;
        let two_q = 2 * *q as i128;
        Some((0..n as i128).map(|k| ((k * *p as i128).rem_euclid(two_q)) as f64 * PI / *q as f64).collect())
    }
}

fn serialize_opt_radius<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

/// Closed interval `[lo, hi]` of moduli; `hi` may be `+inf` (serialized as `null`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialInterval {
    pub lo: f64,
    #[serde(serialize_with = "serialize_opt_radius")]
    pub hi: f64,
}

/// Moduli `{start * ratio^j : j >= 0}` of a geometric sequence, `ratio != 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricModuli {
    pub start: f64,
    pub ratio: f64,
}

/// Closure of a set of moduli: sorted disjoint closed intervals plus
/// geometric point sequences accumulating at `0` or `+inf`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusSet {
    intervals: Vec<RadialInterval>,
    sequences: Vec<GeometricModuli>,
    unbounded: bool,
}

impl ModulusSet {
    fn new(mut intervals: Vec<RadialInterval>, mut sequences: Vec<GeometricModuli>) -> Self {
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut merged: Vec<RadialInterval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                // exact comparison: closed intervals that touch or overlap share points
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        sequences.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.ratio.total_cmp(&b.ratio)));
        sequences.dedup();
        let unbounded = merged.iter().any(|iv| iv.hi.is_infinite()) || sequences.iter().any(|s| s.ratio > 1.0);
        ModulusSet { intervals: merged, sequences, unbounded }
    }

    pub fn intervals(&self) -> &[RadialInterval] {
        &self.intervals
    }

    pub fn sequences(&self) -> &[GeometricModuli] {
        &self.sequences
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.sequences.is_empty()
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn sup(&self) -> f64 {
        if self.unbounded {
            return f64::INFINITY;
        }
        let a = self.intervals.iter().map(|iv| iv.hi).fold(f64::NEG_INFINITY, f64::max);
        let b = self.sequences.iter().map(|s| s.start).fold(f64::NEG_INFINITY, f64::max);
        a.max(b)
    }

    /// Infimum of the positive elements; `0` when positive moduli accumulate at `0`.
    pub fn inf_positive(&self) -> Option<f64> {
        let a = self.intervals.iter().filter(|iv| iv.hi > 0.0).map(|iv| iv.lo);
        let b = self.sequences.iter().map(|s| if s.ratio < 1.0 { 0.0 } else { s.start });
        a.chain(b).reduce(f64::min)
    }

    /// True when some interval has positive length.
    pub fn has_interior(&self) -> bool {
        self.intervals.iter().any(|iv| iv.hi > iv.lo)
    }

    /// True when the closure is all of `[0, +inf)`.
    pub fn covers_half_line(&self) -> bool {
        matches!(self.intervals.as_slice(), [iv] if iv.lo == 0.0 && iv.hi.is_infinite())
    }

    pub fn union(&self, other: &ModulusSet) -> ModulusSet {
        ModulusSet::new(
            self.intervals.iter().chain(&other.intervals).copied().collect(),
            self.sequences.iter().chain(&other.sequences).copied().collect(),
        )
    }

    fn scaled(&self, k: f64) -> ModulusSet {
        ModulusSet::new(
            self.intervals.iter().map(|iv| RadialInterval { lo: iv.lo * k, hi: iv.hi * k }).collect(),
            self.sequences.iter().map(|s| GeometricModuli { start: s.start * k, ratio: s.ratio }).collect(),
        )
    }

    /// Membership of `rho` in the closure, up to `tol`.
    pub fn contains(&self, rho: f64, tol: f64) -> bool {
        if self.intervals.iter().any(|iv| iv.lo - tol <= rho && rho <= iv.hi + tol) {
            return true;
        }
        self.sequences.iter().any(|s| {
            if s.ratio < 1.0 && rho <= tol {
                return true;
            }
            if rho <= 0.0 {
                return false;
            }
            let j = ((rho / s.start).ln() / s.ratio.ln()).round();
            j >= 0.0 && (s.start * s.ratio.powf(j) - rho).abs() <= tol * rho.max(1.0)
        })
    }
}

/// A scalar set `Gamma`. Every variant has a closed-form membership test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarSet {
    FinitePoints {
        points: Vec<Complex64>,
    },
    Circle {
        radius: f64,
    },
    /// `[inner, outer] * T`.
    Annulus {
        inner: f64,
        outer: f64,
    },
    Arc {
        radius: f64,
        angle_lo: f64,
        angle_hi: f64,
    },
    /// `{rho e^{i alpha} : rho in [radius_lo, radius_hi], alpha in [angle_lo, angle_hi]}`;
    /// a missing `radius_hi` means `+inf`.
    Sector {
        radius_lo: f64,
        radius_hi: Option<f64>,
        angle_lo: f64,
        angle_hi: f64,
    },
    /// `{base^t e^{-i t theta} : t real}`.
    LogSpiral {
        base: f64,
        rate: AngleSpec,
    },
    /// `{start * ratio^j : j >= 0}` with `|ratio|` different from 0 and 1.
    Geometric {
        start: Complex64,
        ratio: Complex64,
    },
    Union {
        parts: Vec<ScalarSet>,
    },
    Scaled {
        factor: Complex64,
        inner: Box<ScalarSet>,
    },
    /// The closure of `inner * T`.
    RotationClosure {
        inner: Box<ScalarSet>,
    },
}

fn angle_in_arc(z_arg: f64, lo: f64, hi: f64, tol: f64) -> bool {
    let width = hi - lo;
    if width >= TAU - tol {
        return true;
    }
    let d = (z_arg - lo).rem_euclid(TAU);
    d <= width + tol || d >= TAU - tol
}

impl ScalarSet {
    pub fn unit_circle() -> Self {
        ScalarSet::Circle { radius: 1.0 }
    }

    /// The closed ray `{rho e^{i angle} : rho >= 0}`.
    pub fn ray(angle: f64) -> Self {
        ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: angle, angle_hi: angle }
    }

    pub fn union(parts: Vec<ScalarSet>) -> Self {
        ScalarSet::Union { parts }
    }

    pub fn validate(&self) -> Result<(), GammaSetError> {
        let bad = |m: &str| Err(GammaSetError::InvalidSet(m.to_string()));
        let finite = |x: f64| x.is_finite();
        match self {
            ScalarSet::FinitePoints { points } => {
                if points.iter().any(|z| !finite(z.re) || !finite(z.im)) {
                    return bad("non-finite point");
                }
            }
            ScalarSet::Circle { radius } => {
                if !(finite(*radius) && *radius > 0.0) {
                    return bad("circle radius must be finite and > 0");
                }
            }
            ScalarSet::Annulus { inner, outer } => {
                if !(finite(*inner) && finite(*outer) && *inner > 0.0 && inner <= outer) {
                    return bad("annulus needs 0 < inner <= outer < inf");
                }
            }
            ScalarSet::Arc { radius, angle_lo, angle_hi } => {
                if !(finite(*radius) && *radius > 0.0) {
                    return bad("arc radius must be finite and > 0");
                }
                if !(finite(*angle_lo) && finite(*angle_hi) && angle_lo <= angle_hi) {
                    return bad("arc angles must be finite with angle_lo <= angle_hi");
                }
            }
            ScalarSet::Sector { radius_lo, radius_hi, angle_lo, angle_hi } => {
                if !(finite(*radius_lo) && *radius_lo >= 0.0) {
                    return bad("sector radius_lo must be finite and >= 0");
                }
                if let Some(hi) = radius_hi {
                    if !(finite(*hi) && hi >= radius_lo) {
                        return bad("sector radius_hi must be finite and >= radius_lo");
                    }
                }
                if !(finite(*angle_lo) && finite(*angle_hi) && angle_lo <= angle_hi) {
                    return bad("sector angles must be finite with angle_lo <= angle_hi");
                }
            }
            ScalarSet::LogSpiral { base, rate } => {
                if !(finite(*base) && *base > 0.0 && *base != 1.0) {
                    return bad("spiral base must be positive and different from 1");
                }
                if !finite(rate.radians()) {
                    return bad("spiral rate must be finite");
                }
            }
            ScalarSet::Geometric { start, ratio } => {
                if !(finite(start.norm()) && start.norm() > 0.0) {
                    return bad("geometric start must be finite and nonzero");
                }
                let r = ratio.norm();
                if !(finite(r) && r > 0.0 && r != 1.0) {
                    return bad("geometric ratio must have modulus in (0,1) or (1,inf)");
                }
            }
            ScalarSet::Union { parts } => {
                if parts.is_empty() {
                    return bad("union must be non-empty");
                }
                return parts.iter().try_for_each(ScalarSet::validate);
            }
            ScalarSet::Scaled { factor, inner } => {
                if !(finite(factor.re) && finite(factor.im)) || factor.norm() == 0.0 {
                    return bad("scale factor must be finite and nonzero");
                }
                return inner.validate();
            }
            ScalarSet::RotationClosure { inner } => return inner.validate(),
        }
        Ok(())
    }

    /// Membership with absolute tolerance `tol` (angles use `tol / |z|`).
    pub fn contains_within(&self, z: Complex64, tol: f64) -> bool {
        let rho = z.norm();
        let angle_tol = if rho > 0.0 { tol / rho } else { TAU };
        match self {
            ScalarSet::FinitePoints { points } => points.iter().any(|p| (p - z).norm() <= tol),
            ScalarSet::Circle { radius } => (rho - radius).abs() <= tol,
            ScalarSet::Annulus { inner, outer } => inner - tol <= rho && rho <= outer + tol,
            ScalarSet::Arc { radius, angle_lo, angle_hi } => {
                (rho - radius).abs() <= tol && angle_in_arc(z.arg(), *angle_lo, *angle_hi, angle_tol)
            }
            ScalarSet::Sector { radius_lo, radius_hi, angle_lo, angle_hi } => {
                let hi = radius_hi.unwrap_or(f64::INFINITY);
                if !(radius_lo - tol <= rho && rho <= hi + tol) {
                    return false;
                }
                (rho <= tol && *radius_lo <= tol) || angle_in_arc(z.arg(), *angle_lo, *angle_hi, angle_tol)
            }
            ScalarSet::LogSpiral { base, rate } => {
                if rho == 0.0 {
                    return false;
                }
                let t = rho.ln() / base.ln();
                let on = Complex64::from_polar(rho, -t * rate.radians());
                (on - z).norm() <= tol.max(tol * rho)
            }
            ScalarSet::Geometric { start, ratio } => {
                if rho == 0.0 {
                    return false;
                }
                let j = ((rho / start.norm()).ln() / ratio.norm().ln()).round();
                if j < 0.0 {
                    return false;
                }
                let p = (WideComplex::from_c64(*start) * WideComplex::from_c64(*ratio).powu(j as u64)).to_c64();
                (p - z).norm() <= tol.max(tol * rho)
            }
            ScalarSet::Union { parts } => parts.iter().any(|p| p.contains_within(z, tol)),
            ScalarSet::Scaled { factor, inner } => inner.contains_within(z / factor, tol / factor.norm()),
            ScalarSet::RotationClosure { inner } => modulus_set(inner).contains(rho, tol),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.contains_within(z, 1e-9)
    }

    /// `c * self`, pushed into the primitive variants where the image has a closed form.
    pub fn scaled(&self, c: Complex64) -> ScalarSet {
        let k = c.norm();
        let a = c.arg();
        match self {
            ScalarSet::FinitePoints { points } => {
                ScalarSet::FinitePoints { points: points.iter().map(|p| c * p).collect() }
            }
            ScalarSet::Circle { radius } => ScalarSet::Circle { radius: radius * k },
            ScalarSet::Annulus { inner, outer } => ScalarSet::Annulus { inner: inner * k, outer: outer * k },
            ScalarSet::Arc { radius, angle_lo, angle_hi } => {
                ScalarSet::Arc { radius: radius * k, angle_lo: angle_lo + a, angle_hi: angle_hi + a }
            }
            ScalarSet::Sector { radius_lo, radius_hi, angle_lo, angle_hi } => ScalarSet::Sector {
                radius_lo: radius_lo * k,
                radius_hi: radius_hi.map(|h| h * k),
                angle_lo: angle_lo + a,
                angle_hi: angle_hi + a,
            },
            ScalarSet::Geometric { start, ratio } => ScalarSet::Geometric { start: c * start, ratio: *ratio },
            ScalarSet::Union { parts } => ScalarSet::Union { parts: parts.iter().map(|p| p.scaled(c)).collect() },
            ScalarSet::Scaled { factor, inner } => ScalarSet::Scaled { factor: c * factor, inner: inner.clone() },
            ScalarSet::RotationClosure { .. } if k == 1.0 => self.clone(),
            _ => ScalarSet::Scaled { factor: c, inner: Box::new(self.clone()) },
        }
    }

    /// A nonzero element with `log2|gamma| >= log2_min`, preferring the smallest such modulus.
    pub fn pick_modulus_at_least(&self, log2_min: f64) -> Option<WideComplex> {
        self.pick(Pick::AtLeast(log2_min))
    }

    /// A nonzero element with `log2|gamma| <= log2_max`, preferring the largest such modulus.
    pub fn pick_modulus_at_most(&self, log2_max: f64) -> Option<WideComplex> {
        self.pick(Pick::AtMost(log2_max))
    }

    fn pick(&self, want: Pick) -> Option<WideComplex> {
        match self {
            ScalarSet::FinitePoints { points } => {
                best_pick(points.iter().filter(|p| p.norm() > 0.0).map(|p| WideComplex::from_c64(*p)), want)
            }
            ScalarSet::Circle { radius } => pick_in_range(radius.log2(), radius.log2(), 0.0, want),
            ScalarSet::Arc { radius, angle_lo, .. } => pick_in_range(radius.log2(), radius.log2(), *angle_lo, want),
            ScalarSet::Annulus { inner, outer } => pick_in_range(inner.log2(), outer.log2(), 0.0, want),
            ScalarSet::Sector { radius_lo, radius_hi, angle_lo, .. } => {
                let hi = radius_hi.map_or(f64::INFINITY, f64::log2);
                pick_in_range(radius_lo.log2(), hi, *angle_lo, want)
            }
            ScalarSet::LogSpiral { base, rate } => {
                let l = match want {
                    Pick::AtLeast(m) => m.ceil(),
                    Pick::AtMost(m) => m.floor(),
                };
                let t = l / base.log2();
                Some(WideComplex::from_polar_log2(l, (-t * rate.radians()).rem_euclid(TAU)))
            }
            ScalarSet::Geometric { start, ratio } => {
                let l0 = start.norm().log2();
                let step = ratio.norm().log2();
                let term = |j: u64| WideComplex::from_c64(*start) * WideComplex::from_c64(*ratio).powu(j);
                let first_j = |bound: f64| -> u64 { ((bound - l0) / step).max(0.0).ceil() as u64 };
                match want {
                    Pick::AtLeast(m) if step > 0.0 => {
                        let mut j = first_j(m).saturating_sub(1);
                        while term(j).log2_abs() < m {
                            j += 1;
                        }
                        Some(term(j))
                    }
                    Pick::AtMost(m) if step < 0.0 => {
                        let mut j = first_j(m).saturating_sub(1);
                        while term(j).log2_abs() > m {
                            j += 1;
                        }
                        Some(term(j))
                    }
                    // the extreme term on the other side is the start itself
                    _ => best_pick(std::iter::once(term(0)), want),
                }
            }
            ScalarSet::Union { parts } => best_pick(parts.iter().filter_map(|p| p.pick(want)), want),
            ScalarSet::Scaled { factor, inner } => {
                let shift = factor.norm().log2();
                let inner_want = match want {
                    Pick::AtLeast(m) => Pick::AtLeast(m - shift),
                    Pick::AtMost(m) => Pick::AtMost(m - shift),
                };
                let f = WideComplex::from_c64(*factor);
                inner.pick(inner_want).map(|g| g * f).filter(|g| want.accepts(g.log2_abs()))
            }
            ScalarSet::RotationClosure { inner } => inner.pick(want),
        }
    }

    /// Deterministic finite sample of the set, used to build orbit clouds.
    pub fn grid(&self, spec: &GammaGrid) -> Vec<Complex64> {
        let n = spec.size.max(1);
        let side = (n as f64).sqrt().ceil() as usize;
        let angles = |count: usize, lo: f64, hi: f64| -> Vec<f64> {
            if count <= 1 || hi <= lo {
                return vec![lo];
            }
            (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
        };
        let full_turn = |count: usize| -> Vec<f64> { (0..count).map(|k| TAU * k as f64 / count as f64).collect() };
        match self {
            ScalarSet::FinitePoints { points } => points.clone(),
            ScalarSet::Circle { radius } => {
                full_turn(n).into_iter().map(|a| Complex64::from_polar(*radius, a)).collect()
            }
            ScalarSet::Arc { radius, angle_lo, angle_hi } => {
                angles(n, *angle_lo, *angle_hi).into_iter().map(|a| Complex64::from_polar(*radius, a)).collect()
            }
            ScalarSet::Annulus { inner, outer } => {
                let radii = angles(side, *inner, *outer);
                polar_product(&radii, &full_turn(side))
            }
            ScalarSet::Sector { radius_lo, radius_hi, angle_lo, angle_hi } => {
                let lo = radius_lo.max(spec.log2_radius_min.exp2());
                let hi = radius_hi.unwrap_or(f64::INFINITY).min(spec.log2_radius_max.exp2());
                if lo > hi {
                    return vec![];
                }
                let (nr, na) = if angle_hi > angle_lo { (side, side) } else { (n, 1) };
                let radii: Vec<f64> = angles(nr, lo.log2(), hi.log2()).into_iter().map(f64::exp2).collect();
                let arcs = if angle_hi - angle_lo >= TAU { full_turn(na) } else { angles(na, *angle_lo, *angle_hi) };
                polar_product(&radii, &arcs)
            }
            ScalarSet::LogSpiral { base, rate } => {
                let lb = base.log2();
                let (t0, t1) = (spec.log2_radius_min / lb, spec.log2_radius_max / lb);
                angles(n, t0.min(t1), t0.max(t1))
                    .into_iter()
                    .map(|t| Complex64::from_polar(base.powf(t), -t * rate.radians()))
                    .collect()
            }
            ScalarSet::Geometric { start, ratio } => {
                let mut out = Vec::new();
                let mut cur = WideComplex::from_c64(*start);
                let r = WideComplex::from_c64(*ratio);
                for _ in 0..n {
                    let l = cur.log2_abs();
                    if l >= spec.log2_radius_min && l <= spec.log2_radius_max {
                        out.push(cur.to_c64());
                    }
                    cur = cur * r;
                }
                out
            }
            ScalarSet::Union { parts } => parts.iter().flat_map(|p| p.grid(spec)).collect(),
            ScalarSet::Scaled { factor, inner } => inner.grid(spec).into_iter().map(|z| factor * z).collect(),
            ScalarSet::RotationClosure { inner } => {
                let mut radii: Vec<f64> = inner.grid(spec).iter().map(|z| z.norm()).collect();
                radii.sort_by(f64::total_cmp);
                radii.dedup();
                polar_product(&radii, &full_turn(side))
            }
        }
    }
}

fn polar_product(radii: &[f64], angles: &[f64]) -> Vec<Complex64> {
    radii.iter().flat_map(|&r| angles.iter().map(move |&a| Complex64::from_polar(r, a))).collect()
}

/// Size and radial window of a deterministic sample of `Gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaGrid {
    pub size: usize,
    #[serde(default = "default_log2_min")]
    pub log2_radius_min: f64,
    #[serde(default = "default_log2_max")]
    pub log2_radius_max: f64,
}

fn default_log2_min() -> f64 {
    -32.0
}

fn default_log2_max() -> f64 {
    32.0
}

impl GammaGrid {
    pub fn new(size: usize) -> Self {
        GammaGrid { size, log2_radius_min: default_log2_min(), log2_radius_max: default_log2_max() }
    }
}

#[derive(Clone, Copy, Debug)]
enum Pick {
    AtLeast(f64),
    AtMost(f64),
}

impl Pick {
    fn accepts(self, l: f64) -> bool {
        match self {
            Pick::AtLeast(m) => l >= m,
            Pick::AtMost(m) => l <= m && l > f64::NEG_INFINITY,
        }
    }
}

fn best_pick(candidates: impl Iterator<Item = WideComplex>, want: Pick) -> Option<WideComplex> {
    let mut best: Option<WideComplex> = None;
    for c in candidates.filter(|c| want.accepts(c.log2_abs())) {
        let better = match (best, want) {
            (None, _) => true,
            (Some(b), Pick::AtLeast(_)) => c.abs() < b.abs(),
            (Some(b), Pick::AtMost(_)) => c.abs() > b.abs(),
        };
        if better {
            best = Some(c);
        }
    }
    best
}

/// Picks a modulus from `[2^lo, 2^hi]` on the ray at `angle`, preferring exact powers of two.
fn pick_in_range(lo: f64, hi: f64, angle: f64, want: Pick) -> Option<WideComplex> {
    let l = match want {
        Pick::AtLeast(m) => {
            let p = m.ceil();
            if p <= hi {
                p.max(lo)
            } else if m <= hi {
                m.max(lo)
            } else {
                return None;
            }
        }
        Pick::AtMost(m) => {
            let p = m.floor();
            if p >= lo && p > f64::NEG_INFINITY {
                p.min(hi)
            } else if lo <= m && lo > f64::NEG_INFINITY {
                lo
            } else {
                return None;
            }
        }
    };
    if !l.is_finite() {
        return None;
    }
    Some(WideComplex::from_polar_log2(l, angle))
}

fn moduli(g: &ScalarSet, strip_zero: bool) -> ModulusSet {
    let point = |r: f64| RadialInterval { lo: r, hi: r };
    match g {
        ScalarSet::FinitePoints { points } => ModulusSet::new(
            points.iter().map(|p| p.norm()).filter(|&r| !(strip_zero && r == 0.0)).map(point).collect(),
            vec![],
        ),
        ScalarSet::Circle { radius } | ScalarSet::Arc { radius, .. } => ModulusSet::new(vec![point(*radius)], vec![]),
        ScalarSet::Annulus { inner, outer } => ModulusSet::new(vec![RadialInterval { lo: *inner, hi: *outer }], vec![]),
        ScalarSet::Sector { radius_lo, radius_hi, .. } => {
            let hi = radius_hi.unwrap_or(f64::INFINITY);
            if strip_zero && hi == 0.0 {
                ModulusSet::new(vec![], vec![])
            } else {
                ModulusSet::new(vec![RadialInterval { lo: *radius_lo, hi }], vec![])
            }
        }
        // {base^t : t real} = (0, inf)
        ScalarSet::LogSpiral { .. } => ModulusSet::new(vec![RadialInterval { lo: 0.0, hi: f64::INFINITY }], vec![]),
        ScalarSet::Geometric { start, ratio } => {
            ModulusSet::new(vec![], vec![GeometricModuli { start: start.norm(), ratio: ratio.norm() }])
        }
        ScalarSet::Union { parts } => parts
            .iter()
            .map(|p| moduli(p, strip_zero))
            .reduce(|a, b| a.union(&b))
            .unwrap_or_else(|| ModulusSet::new(vec![], vec![])),
        ScalarSet::Scaled { factor, inner } => moduli(inner, strip_zero).scaled(factor.norm()),
        ScalarSet::RotationClosure { inner } => moduli(inner, strip_zero),
    }
}

/// Closure of `{|z| : z in g}`.
pub fn modulus_set(g: &ScalarSet) -> ModulusSet {
    moduli(g, false)
}

/// Closure of `{|z| : z in g, z != 0}`.
pub fn nonzero_modulus_set(g: &ScalarSet) -> ModulusSet {
    moduli(g, true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub nonempty_nonzero: bool,
    pub bounded: bool,
    pub bounded_away_zero: bool,
    pub modulus_empty_interior: bool,
    pub is_hypercyclic_scalar_set: bool,
    pub is_somewhere_hypercyclic_scalar_set: bool,
    pub explanation: Vec<String>,
}

/// Decides whether `g` is a (somewhere) hypercyclic scalar set.
///
/// Hypercyclic: `g \ {0}` is non-empty, bounded and bounded away from zero.
/// Somewhere hypercyclic: additionally `closure(g T) \ {0}` has empty
/// interior, which for a rotation-invariant set means the moduli contain no
/// interval of positive length.
pub fn classify(g: &ScalarSet) -> Result<ClassificationResult, GammaSetError> {
    g.validate()?;
    let m = nonzero_modulus_set(g);
    if m.is_empty() {
        return Err(GammaSetError::EmptySet);
    }
    let sup = m.sup();
    let inf = m.inf_positive().unwrap_or(0.0);
    let bounded = !m.is_unbounded();
    let bounded_away_zero = inf > 0.0;
    let modulus_empty_interior = !m.has_interior();
    let hyper = bounded && bounded_away_zero;
    let somewhere = hyper && modulus_empty_interior;
    let mut explanation = vec!["Gamma \\ {0} is non-empty".to_string()];
    explanation.push(if bounded {
        format!("Gamma \\ {{0}} is bounded (sup of moduli = {sup})")
    } else {
        "Gamma \\ {0} is unbounded".to_string()
    });
    explanation.push(if bounded_away_zero {
        format!("Gamma \\ {{0}} is bounded away from 0 (inf of moduli = {inf})")
    } else {
        "Gamma \\ {0} accumulates at 0".to_string()
    });
    explanation.push(if modulus_empty_interior {
        "closure(Gamma T) \\ {0} has empty interior (moduli contain no interval)".to_string()
    } else {
        "closure(Gamma T) \\ {0} has interior (moduli contain an interval of positive length)".to_string()
    });
    Ok(ClassificationResult {
        nonempty_nonzero: true,
        bounded,
        bounded_away_zero,
        modulus_empty_interior,
        is_hypercyclic_scalar_set: hyper,
        is_somewhere_hypercyclic_scalar_set: somewhere,
        explanation,
    })
}

/// Closure of `g * T` as a symbolic set.
pub fn rotation_closure(g: &ScalarSet) -> ScalarSet {
    let m = modulus_set(g);
    if !m.sequences().is_empty() {
        return ScalarSet::RotationClosure { inner: Box::new(g.clone()) };
    }
    let mut parts: Vec<ScalarSet> = m
        .intervals()
        .iter()
        .map(|iv| match (iv.lo == iv.hi, iv.lo == 0.0) {
            (true, true) => ScalarSet::FinitePoints { points: vec![Complex64::new(0.0, 0.0)] },
            (true, false) => ScalarSet::Circle { radius: iv.lo },
            (false, true) => ScalarSet::Sector {
                radius_lo: 0.0,
                radius_hi: iv.hi.is_finite().then_some(iv.hi),
                angle_lo: 0.0,
                angle_hi: TAU,
            },
            (false, false) if iv.hi.is_infinite() => {
                ScalarSet::Sector { radius_lo: iv.lo, radius_hi: None, angle_lo: 0.0, angle_hi: TAU }
            }
            (false, false) => ScalarSet::Annulus { inner: iv.lo, outer: iv.hi },
        })
        .collect();
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        ScalarSet::Union { parts }
    }
}

/// `Gamma G_theta`: a finite union of rotated copies for rational `theta / pi`,
/// otherwise the closure `Gamma T` (since `G_theta` is then dense in `T`).
pub fn gamma_group_product(g: &ScalarSet, theta: &AngleSpec) -> ScalarSet {
    let Some(angles) = theta.group_angles() else {
        return rotation_closure(g);
    };
    if angles.len() == 1 {
        return g.clone();
    }
    let copies: Vec<ScalarSet> = angles.iter().map(|&a| g.scaled(Complex64::from_polar(1.0, a))).collect();
    if copies.iter().all(|c| matches!(c, ScalarSet::FinitePoints { .. })) {
        let points = copies
            .into_iter()
            .flat_map(|c| match c {
                ScalarSet::FinitePoints { points } => points,
                _ => unreachable!(),
            })
            .collect();
        return ScalarSet::FinitePoints { points };
    }
    ScalarSet::Union { parts: copies }
}

/// Closed polar rectangle `[r_lo, r_hi] x [a_lo, a_hi]` with positive area.
#[derive(Clone, Copy, Debug)]
struct PolarRect {
    r_lo: f64,
    r_hi: f64,
    a_lo: f64,
    a_hi: f64,
}

fn full_rects(m: &ModulusSet, k: f64) -> Vec<PolarRect> {
    m.intervals()
        .iter()
        .filter(|iv| iv.hi > iv.lo)
        .map(|iv| PolarRect { r_lo: iv.lo * k, r_hi: iv.hi * k, a_lo: 0.0, a_hi: TAU })
        .collect()
}

/// Polar rectangles with positive area whose union has the same closure as
/// `factor * g` up to a closed nowhere dense set.
fn polar_rects(g: &ScalarSet, factor: Complex64) -> Vec<PolarRect> {
    let k = factor.norm();
    let a = factor.arg();
    match g {
        // points, circles, arcs, spirals and geometric sequences have nowhere dense closures
        ScalarSet::FinitePoints { .. }
        | ScalarSet::Circle { .. }
        | ScalarSet::Arc { .. }
        | ScalarSet::LogSpiral { .. }
        | ScalarSet::Geometric { .. } => vec![],
        ScalarSet::Annulus { inner, outer } if outer > inner => {
            vec![PolarRect { r_lo: inner * k, r_hi: outer * k, a_lo: 0.0, a_hi: TAU }]
        }
        ScalarSet::Annulus { .. } => vec![],
        ScalarSet::Sector { radius_lo, radius_hi, angle_lo, angle_hi } => {
            let hi = radius_hi.unwrap_or(f64::INFINITY);
            if hi > *radius_lo && angle_hi > angle_lo {
                vec![PolarRect { r_lo: radius_lo * k, r_hi: hi * k, a_lo: angle_lo + a, a_hi: angle_hi + a }]
            } else {
                vec![]
            }
        }
        ScalarSet::Union { parts } => parts.iter().flat_map(|p| polar_rects(p, factor)).collect(),
        ScalarSet::Scaled { factor: c, inner } => polar_rects(inner, factor * c),
        ScalarSet::RotationClosure { inner } => full_rects(&modulus_set(inner), k),
    }
}

fn close_enough(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Whether the closed angular intervals cover the whole circle.
fn covers_circle(arcs: &[(f64, f64)]) -> Result<bool, GammaSetError> {
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for &(lo, hi) in arcs {
        let width = hi - lo;
        if width >= TAU - SNAP_TOL {
            return Ok(true);
        }
        let s = lo.rem_euclid(TAU);
        if s + width > TAU {
            pieces.push((s, TAU));
            pieces.push((0.0, s + width - TAU));
        } else {
            pieces.push((s, s + width));
        }
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut reach = 0.0f64;
    for (lo, hi) in pieces {
        let gap = lo - reach;
        if gap > AMBIGUOUS_TOL {
            return Ok(false);
        }
        if gap > SNAP_TOL {
            return Err(GammaSetError::Undecidable(format!("angular gap of {gap:e} rad is below float resolution")));
        }
        reach = reach.max(hi);
    }
    let gap = TAU - reach;
    if gap > AMBIGUOUS_TOL {
        Ok(false)
    } else if gap > SNAP_TOL {
        Err(GammaSetError::Undecidable(format!("angular gap of {gap:e} rad is below float resolution")))
    } else {
        Ok(true)
    }
}

/// Decides `closure(g) = C` on finite unions of the supported variants.
///
/// Nowhere dense pieces are dropped; the rest are polar rectangles, and the
/// plane is covered iff every radial band between consecutive boundaries is
/// covered angularly. Boundaries that differ by less than `1e-9` (relative)
/// but more than `1e-12` cannot be separated in floating point and yield
/// `Undecidable`.
pub fn is_dense_in_plane(g: &ScalarSet) -> Result<bool, GammaSetError> {
    g.validate()?;
    let rects = polar_rects(g, Complex64::new(1.0, 0.0));
    if rects.is_empty() {
        return Ok(false);
    }
    let mut bounds: Vec<f64> = vec![0.0];
    for r in &rects {
        bounds.push(r.r_lo);
        if r.r_hi.is_finite() {
            bounds.push(r.r_hi);
        }
    }
    bounds.sort_by(f64::total_cmp);
    let mut snapped: Vec<f64> = Vec::new();
    for b in bounds {
        match snapped.last() {
            Some(&last) if close_enough(last, b, SNAP_TOL) => {}
            Some(&last) if close_enough(last, b, AMBIGUOUS_TOL) => {
                return Err(GammaSetError::Undecidable(format!(
                    "radial boundaries {last} and {b} are below float resolution"
                )));
            }
            _ => snapped.push(b),
        }
    }
    let mut bands: Vec<(f64, f64)> = snapped.windows(2).map(|w| (w[0], w[1])).collect();
    bands.push((*snapped.last().unwrap(), f64::INFINITY));
    for (lo, hi) in bands {
        let arcs: Vec<(f64, f64)> = rects
            .iter()
            .filter(|r| {
                (r.r_lo <= lo || close_enough(r.r_lo, lo, SNAP_TOL))
                    && (r.r_hi >= hi || (hi.is_finite() && close_enough(r.r_hi, hi, SNAP_TOL)))
            })
            .map(|r| (r.a_lo, r.a_hi))
            .collect();
        if !covers_circle(&arcs)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn verdicts(g: &ScalarSet) -> (bool, bool) {
        let r = classify(g).unwrap();
        (r.is_hypercyclic_scalar_set, r.is_somewhere_hypercyclic_scalar_set)
    }

    #[test]
    fn modulus_of_annulus() {
        let m = modulus_set(&ScalarSet::Annulus { inner: 1.0, outer: 2.0 });
        assert_eq!(m.intervals(), &[RadialInterval { lo: 1.0, hi: 2.0 }]);
        assert!(!m.is_unbounded());
    }

    #[test]
    fn modulus_of_two_circles() {
        let g = ScalarSet::union(vec![ScalarSet::Circle { radius: 1.0 }, ScalarSet::Circle { radius: 3.0 }]);
        let m = modulus_set(&g);
        assert_eq!(m.intervals(), &[RadialInterval { lo: 1.0, hi: 1.0 }, RadialInterval { lo: 3.0, hi: 3.0 }]);
    }

    #[test]
    fn modulus_of_spiral_fills_half_line() {
        let g = ScalarSet::LogSpiral { base: 2.0, rate: AngleSpec::irrational(1.0, "1 rad").unwrap() };
        let m = modulus_set(&g);
        assert!(m.is_unbounded());
        assert!(m.covers_half_line());
        // oracle: every dyadic radius 2^k is attained at t = k
        for k in -40..=40 {
            let rho = 2f64.powi(k);
            let t = k as f64;
            let z = Complex64::from_polar(2f64.powf(t), -t);
            assert!((z.norm() - rho).abs() <= 1e-12 * rho);
            assert!(g.contains_within(z, 1e-12 * rho.max(1.0)));
            assert!(m.contains(rho, 0.0));
        }
    }

    #[test]
    fn classification_fixtures() {
        assert_eq!(verdicts(&ScalarSet::unit_circle()), (true, true));
        assert_eq!(verdicts(&ScalarSet::Annulus { inner: 1.0, outer: 2.0 }), (true, false));
        let two = ScalarSet::union(vec![ScalarSet::Circle { radius: 1.0 }, ScalarSet::Circle { radius: 3.0 }]);
        assert_eq!(verdicts(&two), (true, true));
        assert_eq!(verdicts(&ScalarSet::ray(0.0)), (false, false));
        let halving = ScalarSet::Geometric { start: c(1.0, 0.0), ratio: c(0.5, 0.0) };
        assert_eq!(verdicts(&halving), (false, false));
        let r = classify(&halving).unwrap();
        assert!(r.bounded && !r.bounded_away_zero);
        let scaled = ScalarSet::Scaled { factor: c(0.0, 5.0), inner: Box::new(ScalarSet::unit_circle()) };
        assert_eq!(verdicts(&scaled), (true, true));
    }

    #[test]
    fn zero_is_ignored_and_empty_sets_rejected() {
        let g = ScalarSet::FinitePoints { points: vec![c(0.0, 0.0), c(2.0, 0.0)] };
        assert_eq!(verdicts(&g), (true, true));
        assert_eq!(classify(&ScalarSet::FinitePoints { points: vec![c(0.0, 0.0)] }), Err(GammaSetError::EmptySet));
        assert_eq!(classify(&ScalarSet::FinitePoints { points: vec![] }), Err(GammaSetError::EmptySet));
        let origin_sector = ScalarSet::Sector { radius_lo: 0.0, radius_hi: Some(0.0), angle_lo: 0.0, angle_hi: 1.0 };
        assert_eq!(classify(&origin_sector), Err(GammaSetError::EmptySet));
    }

    #[test]
    fn group_product_of_a_point_with_quarter_turns() {
        let g = ScalarSet::FinitePoints { points: vec![c(1.0, 0.0)] };
        let prod = gamma_group_product(&g, &AngleSpec::rational_pi(1, 2).unwrap());
        let ScalarSet::FinitePoints { points } = prod else { panic!("expected points") };
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        assert_eq!(points.len(), 4);
        for (p, e) in points.iter().zip(expected) {
            assert!((p - e).norm() < 1e-15);
        }
    }

    #[test]
    fn group_product_of_circle_with_dense_group() {
        let prod = gamma_group_product(&ScalarSet::unit_circle(), &AngleSpec::irrational(1.0, "1 rad").unwrap());
        assert_eq!(prod, ScalarSet::unit_circle());
    }

    #[test]
    fn sector_rotated_by_its_own_width_fills_plane() {
        let theta = AngleSpec::rational_pi(1, 3).unwrap();
        let sector = ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: 0.0, angle_hi: theta.radians() };
        assert_eq!(is_dense_in_plane(&gamma_group_product(&sector, &theta)), Ok(true));
        // a coarser rotation group leaves gaps
        let quarter = AngleSpec::rational_pi(1, 2).unwrap();
        assert_eq!(is_dense_in_plane(&gamma_group_product(&sector, &quarter)), Ok(false));
        let two_fifths = AngleSpec::rational_pi(2, 5).unwrap();
        assert_eq!(is_dense_in_plane(&gamma_group_product(&sector, &two_fifths)), Ok(false));
        // 3pi/4 generates the eighth roots of unity, whose pi/4 steps are narrower than the sector
        let three_quarters = AngleSpec::rational_pi(3, 4).unwrap();
        assert_eq!(is_dense_in_plane(&gamma_group_product(&sector, &three_quarters)), Ok(true));
    }

    #[test]
    fn density_decisions() {
        let plane = ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: 0.0, angle_hi: TAU };
        assert_eq!(is_dense_in_plane(&plane), Ok(true));
        let spiral = ScalarSet::LogSpiral { base: 2.0, rate: AngleSpec::irrational(1.0, "1 rad").unwrap() };
        assert_eq!(is_dense_in_plane(&spiral), Ok(false));
        let theta = AngleSpec::irrational(1.0, "1 rad").unwrap();
        assert_eq!(is_dense_in_plane(&gamma_group_product(&spiral, &theta)), Ok(true));
        let two = ScalarSet::union(vec![ScalarSet::Circle { radius: 1.0 }, ScalarSet::Circle { radius: 3.0 }]);
        assert_eq!(is_dense_in_plane(&two), Ok(false));
        // disk plus exterior annulus plus the outside, glued at exact radii
        let glued = ScalarSet::union(vec![
            ScalarSet::Sector { radius_lo: 0.0, radius_hi: Some(1.0), angle_lo: 0.0, angle_hi: TAU },
            ScalarSet::Annulus { inner: 1.0, outer: 2.0 },
            ScalarSet::Sector { radius_lo: 2.0, radius_hi: None, angle_lo: -1.0, angle_hi: 7.0 },
        ]);
        assert_eq!(is_dense_in_plane(&glued), Ok(true));
        let holed = ScalarSet::union(vec![
            ScalarSet::Sector { radius_lo: 0.0, radius_hi: Some(1.0), angle_lo: 0.0, angle_hi: TAU },
            ScalarSet::Sector { radius_lo: 1.5, radius_hi: None, angle_lo: 0.0, angle_hi: TAU },
        ]);
        assert_eq!(is_dense_in_plane(&holed), Ok(false));
    }

    #[test]
    fn near_coincident_boundaries_are_undecidable() {
        let g = ScalarSet::union(vec![
            ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: 0.0, angle_hi: PI },
            ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: PI + 1e-10, angle_hi: TAU },
        ]);
        assert!(matches!(is_dense_in_plane(&g), Err(GammaSetError::Undecidable(_))));
    }

    #[test]
    fn samplers_respect_requested_moduli() {
        let ray = ScalarSet::ray(0.0);
        let g = ray.pick_modulus_at_least(10.3).unwrap();
        assert_eq!(g.log2_abs(), 11.0);
        assert_eq!(ray.pick_modulus_at_most(-5000.5).unwrap().log2_abs(), -5001.0);
        let halving = ScalarSet::Geometric { start: c(1.0, 0.0), ratio: c(0.5, 0.0) };
        assert_eq!(halving.pick_modulus_at_most(-70000.0).unwrap().log2_abs(), -70000.0);
        assert!(halving.pick_modulus_at_least(1.0).is_none());
        assert!(ScalarSet::unit_circle().pick_modulus_at_least(0.5).is_none());
        let spiral = ScalarSet::LogSpiral { base: 2.0, rate: AngleSpec::irrational(1.0, "1 rad").unwrap() };
        let s = spiral.pick_modulus_at_least(3.2).unwrap();
        assert_eq!(s.log2_abs(), 4.0);
        assert!(spiral.contains_within(s.to_c64(), 1e-12));
    }

    #[test]
    fn angle_spec_json() {
        let a: AngleSpec = serde_json::from_str(r#"{"pi_rational":[2,6]}"#).unwrap();
        assert_eq!(a, AngleSpec::RationalPi { p: 1, q: 3 });
        assert_eq!(a.group_order(), Some(6));
        let b: AngleSpec = serde_json::from_str(r#"{"irrational":1.0,"tag":"one radian"}"#).unwrap();
        assert_eq!(b.group_order(), None);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"pi_rational":[1,3]}"#);
        assert_eq!(AngleSpec::rational_pi(0, 5).unwrap().group_order(), Some(1));
        assert_eq!(AngleSpec::rational_pi(1, 1).unwrap().group_order(), Some(2));
    }

    #[test]
    fn scalar_set_json() {
        let g: ScalarSet = serde_json::from_str(
            r#"{"kind":"union","parts":[{"kind":"circle","radius":1.0},
                {"kind":"sector","radius_lo":0.0,"radius_hi":null,"angle_lo":0.0,"angle_hi":0.0},
                {"kind":"log_spiral","base":2.0,"rate":{"irrational":1.0,"tag":"t"}}]}"#,
        )
        .unwrap();
        let ScalarSet::Union { parts } = &g else { panic!() };
        assert_eq!(parts[1], ScalarSet::ray(0.0));
    }

    #[test]
    fn rational_product_agrees_with_brute_force_rotation() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let sets = [
            ScalarSet::Sector { radius_lo: 0.5, radius_hi: Some(2.0), angle_lo: 0.2, angle_hi: 0.9 },
            ScalarSet::Annulus { inner: 1.0, outer: 1.5 },
            ScalarSet::union(vec![
                ScalarSet::Sector { radius_lo: 0.0, radius_hi: Some(1.0), angle_lo: -0.3, angle_hi: 0.1 },
                ScalarSet::Arc { radius: 2.0, angle_lo: 0.0, angle_hi: 0.5 },
            ]),
        ];
        let thetas = [(1, 3), (2, 5), (3, 4), (7, 6)];
        for g in &sets {
            for (p, q) in thetas {
                let theta = AngleSpec::rational_pi(p, q).unwrap();
                let prod = gamma_group_product(g, &theta);
                let n = theta.group_order().unwrap() as i64;
                for _ in 0..10_000 {
                    let z = c(rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5));
                    let brute = (0..n).any(|k| {
                        let back = Complex64::from_polar(1.0, -(k as f64) * theta.radians());
                        g.contains_within(z * back, 1e-9)
                    });
                    assert_eq!(prod.contains_within(z, 1e-9), brute, "z = {z}, theta = {p}pi/{q}");
                }
            }
        }
    }

    #[test]
    fn dense_sets_meet_every_small_disk() {
        let theta = AngleSpec::rational_pi(1, 3).unwrap();
        let dense = [
            ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: 0.0, angle_hi: TAU },
            gamma_group_product(
                &ScalarSet::Sector { radius_lo: 0.0, radius_hi: None, angle_lo: 0.0, angle_hi: theta.radians() },
                &theta,
            ),
            gamma_group_product(
                &ScalarSet::LogSpiral { base: 2.0, rate: AngleSpec::irrational(1.0, "1 rad").unwrap() },
                &AngleSpec::irrational(1.0, "1 rad").unwrap(),
            ),
        ];
        for g in &dense {
            assert_eq!(is_dense_in_plane(g), Ok(true));
            for cx in -10..=10 {
                for cy in -10..=10 {
                    let z0 = c(cx as f64 * 0.7, cy as f64 * 0.7);
                    if z0.norm() > 10.0 {
                        continue;
                    }
                    // grid oracle inside D(z0, 0.1)
                    let hit = (-4..=4).any(|i| {
                        (-4..=4).any(|j| {
                            let z = z0 + c(i as f64 * 0.02, j as f64 * 0.02);
                            (z - z0).norm() < 0.1 && g.contains_within(z, 0.0)
                        })
                    });
                    assert!(hit, "no point of the dense set near {z0}");
                }
            }
        }
    }

    fn arb_set() -> impl Strategy<Value = ScalarSet> {
        let leaf = prop_oneof![
            (0.1f64..5.0).prop_map(|r| ScalarSet::Circle { radius: r }),
            (0.1f64..3.0, 0.0f64..3.0).prop_map(|(a, w)| ScalarSet::Annulus { inner: a, outer: a + w }),
            (0.0f64..2.0, proptest::option::of(0.0f64..4.0), -3.0f64..3.0, 0.0f64..7.0).prop_map(|(lo, w, a, aw)| {
                ScalarSet::Sector { radius_lo: lo, radius_hi: w.map(|w| lo + w), angle_lo: a, angle_hi: a + aw }
            }),
            (0.2f64..4.0, 0.05f64..0.95).prop_map(|(s, r)| ScalarSet::Geometric { start: c(s, 0.0), ratio: c(r, 0.0) }),
            (1.1f64..4.0)
                .prop_map(|b| ScalarSet::LogSpiral { base: b, rate: AngleSpec::irrational(1.0, "1").unwrap() }),
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..4)
                .prop_map(|ps| ScalarSet::FinitePoints { points: ps.into_iter().map(|(a, b)| c(a, b)).collect() }),
        ];
        leaf.prop_recursive(2, 8, 3, |inner| proptest::collection::vec(inner, 1..3).prop_map(ScalarSet::union))
    }

    proptest! {
        #[test]
        fn classification_is_dilation_invariant(g in arb_set(), re in -4.0f64..4.0, im in -4.0f64..4.0) {
            prop_assume!(Complex64::new(re, im).norm() > 1e-3);
            let scaled = ScalarSet::Scaled { factor: c(re, im), inner: Box::new(g.clone()) };
            let (a, b) = (classify(&g), classify(&scaled));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.is_hypercyclic_scalar_set, b.is_hypercyclic_scalar_set);
                    prop_assert_eq!(a.is_somewhere_hypercyclic_scalar_set, b.is_somewhere_hypercyclic_scalar_set);
                }
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                _ => prop_assert!(false, "dilation changed classifiability"),
            }
        }

        #[test]
        fn somewhere_implies_hypercyclic(g in arb_set()) {
            if let Ok(r) = classify(&g) {
                prop_assert!(!r.is_somewhere_hypercyclic_scalar_set || r.is_hypercyclic_scalar_set);
                prop_assert_eq!(r.is_hypercyclic_scalar_set, r.nonempty_nonzero && r.bounded && r.bounded_away_zero);
            }
        }

        #[test]
        fn modulus_of_union_is_merge(a in arb_set(), b in arb_set()) {
            let u = ScalarSet::union(vec![a.clone(), b.clone()]);
            prop_assert_eq!(modulus_set(&u), modulus_set(&a).union(&modulus_set(&b)));
        }
    }
}
