//! Stage-by-stage constructions of Gamma-supercyclic vectors for the
//! backward shift and for the doubling weighted bilateral shift, and the
//! spiral scenario for `r e^{-i theta} Id` on `C`.
//!
//! Each build returns the finite partial sum `x_K` together with every
//! choice made and the residuals `||gamma_k T^{m_k} x_K - y_k||`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gamma_sets::{nonzero_modulus_set, AngleSpec, GammaSetError, ScalarSet};
use crate::operators::{power_apply_wide, Domain, OperatorError, OperatorSpec, SeqVector, WideVector};
use crate::wide::{WideComplex, WideReal};

/// Upper limit on shift exponents searched by the weighted-shift build.
const MAX_SHIFT: u64 = 1 << 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("Gamma is bounded: the backward-shift construction needs scalars of arbitrarily large modulus (no element with log2|gamma| >= {0})")]
    GammaBounded(f64),
    #[error("Gamma is bounded away from 0: the weighted-shift construction needs scalars of arbitrarily small modulus (no element with log2|gamma| <= {0})")]
    GammaBoundedAwayFromZero(f64),
    #[error("r = 1: the spiral scenario needs r != 1")]
    RIsOne,
    #[error("tail certificate failed: outside the s-range the spiral comes within {tail} of the target, below the grid minimum {grid}")]
    RangeTooSmall { tail: f64, grid: f64 },
    #[error("invalid targets: {0}")]
    InvalidTargets(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    GammaSet(#[from] GammaSetError),
}

/// Finitely supported nonzero target vectors `y_0, y_1, ...` on a single domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SeqVector>", into = "Vec<SeqVector>")]
pub struct TargetFamily {
    vectors: Vec<SeqVector>,
}

impl TryFrom<Vec<SeqVector>> for TargetFamily {
    type Error = ConstructionError;

    fn try_from(v: Vec<SeqVector>) -> Result<Self, Self::Error> {
        TargetFamily::new(v)
    }
}

impl From<TargetFamily> for Vec<SeqVector> {
    fn from(f: TargetFamily) -> Self {
        f.vectors
    }
}

impl TargetFamily {
    pub fn new(vectors: Vec<SeqVector>) -> Result<Self, ConstructionError> {
        let Some(first) = vectors.first() else {
            return Err(ConstructionError::InvalidTargets("the family is empty".into()));
        };
        let domain = first.domain();
        if let Some(k) = vectors.iter().position(|v| v.domain() != domain) {
            return Err(ConstructionError::InvalidTargets(format!("y_{k} lives on a different domain")));
        }
        if let Some(k) = vectors.iter().position(SeqVector::is_zero) {
            return Err(ConstructionError::InvalidTargets(format!("y_{k} is zero")));
        }
        Ok(TargetFamily { vectors })
    }

    /// The first `count` vectors of the default enumeration of `(Z + iZ) / 2^j`-valued
    /// vectors with at most `D` nonzero coordinates, ordered by `D + j`, then `D`.
    ///
    /// Within a block `(D, j)` real and imaginary numerators run over
    /// `[-D 2^j, D 2^j]` in odometer order. Zero vectors, vectors already listed
    /// at a smaller `j` (all numerators even) and vectors already listed at a
    /// smaller `D` (last coordinate zero) are skipped. Coordinates are placed at
    /// `0, 1, ..., D-1` on the unilateral domain and at `0, 1, -1, 2, -2, ...`
    /// on the bilateral one.
    pub fn dense_default(domain: Domain, count: usize) -> Self {
        TargetFamily { vectors: DenseFamily::new(domain).take(count).collect() }
    }

    pub fn vectors(&self) -> &[SeqVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.vectors[0].domain()
    }

    /// `d(y_k)`: largest nonnegative support index (0 when there is none).
    pub fn degree(&self, k: usize) -> i64 {
        self.vectors[k].degree()
    }
}

/// Iterator over the default dense family; see [`TargetFamily::dense_default`].
pub struct DenseFamily {
    domain: Domain,
    sum: u32,
    dim: u32,
    digits: Vec<i64>,
    radius: i64,
}

impl DenseFamily {
    pub fn new(domain: Domain) -> Self {
        let mut f = DenseFamily { domain, sum: 1, dim: 1, digits: vec![], radius: 0 };
        f.reset_block();
        f
    }

    fn level(&self) -> u32 {
        self.sum - self.dim
    }

    fn reset_block(&mut self) {
        self.radius = self.dim as i64 * (1i64 << self.level());
        self.digits = vec![-self.radius; 2 * self.dim as usize];
    }

    fn next_block(&mut self) {
        if self.dim < self.sum {
            self.dim += 1;
        } else {
            self.sum += 1;
            self.dim = 1;
        }
        self.reset_block();
    }

    /// Advances the odometer; false when the block is exhausted.
    fn step(&mut self) -> bool {
        for d in self.digits.iter_mut().rev() {
            if *d < self.radius {
                *d += 1;
                return true;
            }
            *d = -self.radius;
        }
        false
    }

    fn position(&self, t: usize) -> i64 {
        match self.domain {
            Domain::Unilateral => t as i64,
            Domain::Bilateral if t % 2 == 1 => (t as i64 + 1) / 2,
            Domain::Bilateral => -(t as i64) / 2,
        }
    }

    fn admissible(&self) -> bool {
        let nonzero = self.digits.iter().any(|&d| d != 0);
        let reduced = self.level() == 0 || self.digits.iter().any(|d| d % 2 != 0);
        let n = self.digits.len();
        let full = self.dim == 1 || self.digits[n - 2] != 0 || self.digits[n - 1] != 0;
        nonzero && reduced && full
    }

    fn current(&self) -> SeqVector {
        let scale = (1u64 << self.level()) as f64;
        let entries = self
            .digits
            .chunks(2)
            .enumerate()
            .map(|(t, pair)| (self.position(t), Complex64::new(pair[0] as f64 / scale, pair[1] as f64 / scale)));
        SeqVector::from_entries(self.domain, entries).expect("dyadic entries are finite")
    }
}

impl Iterator for DenseFamily {
    type Item = SeqVector;

    fn next(&mut self) -> Option<SeqVector> {
        loop {
            if self.admissible() {
                let v = self.current();
                if !self.step() {
                    self.next_block();
                }
                return Some(v);
            }
            if !self.step() {
                self.next_block();
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Unilateral backward shift with large scalars.
    BackwardShift,
    /// Doubling weighted bilateral shift with small scalars.
    WeightedBilateralShift,
}

/// The choice made at one stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageChoice {
    pub k: usize,
    pub gamma: WideComplex,
    pub gamma_modulus: String,
    pub log2_gamma_modulus: f64,
    pub m: u64,
    pub target_degree: i64,
    /// For the weighted-shift scheme, the largest admissible `log2|gamma_k|`
    /// from the a-priori bound on the backward cross terms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_bound_log2: Option<f64>,
}

/// The three stage inequalities, each evaluated directly after the choice.
///
/// `own_term`: the stage-k term of the series is below `2^-k`.
/// `forward_cross`: earlier stages see the stage-k term below `2^-k`.
/// `backward_cross`: stage k sees earlier terms below `2^-k`; for the
/// backward shift this is the strict shift separation `m_k > m_i + d(y_i)`,
/// which makes those terms vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StageConditions {
    pub k: usize,
    pub own_term: bool,
    pub forward_cross: bool,
    pub backward_cross: bool,
}

impl StageConditions {
    pub fn all(&self) -> bool {
        self.own_term && self.forward_cross && self.backward_cross
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageResidual {
    pub k: usize,
    pub residual: f64,
    pub log2_residual: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionTrace {
    pub scheme: Scheme,
    pub stages: usize,
    pub operator: OperatorSpec,
    pub choices: Vec<StageChoice>,
    pub conditions: Vec<StageConditions>,
    pub residuals: Vec<StageResidual>,
    /// `2^-K`, the bound on the omitted series tail.
    pub tail_bound: f64,
    pub partial_sum: SeqVector,
    pub partial_sum_norm: f64,
    #[serde(skip)]
    pub partial_sum_wide: WideVector,
}

impl ConstructionTrace {
    pub fn all_conditions_hold(&self) -> bool {
        self.conditions.iter().all(StageConditions::all)
    }

    pub fn all_residuals_within_bound(&self) -> bool {
        self.residuals.iter().all(|r| r.within_bound)
    }
}

fn check_stage_count(targets: &TargetFamily, k_max: usize, domain: Domain) -> Result<(), ConstructionError> {
    if targets.domain() != domain {
        return Err(ConstructionError::InvalidTargets(format!("targets must be {domain:?} sequences")));
    }
    if targets.len() <= k_max {
        return Err(ConstructionError::InvalidTargets(format!(
            "{} stages need {} targets, got {}",
            k_max + 1,
            k_max + 1,
            targets.len()
        )));
    }
    Ok(())
}

fn choice(k: usize, gamma: WideComplex, m: u64, degree: i64, bound: Option<f64>) -> StageChoice {
    StageChoice {
        k,
        gamma,
        gamma_modulus: gamma.abs().to_sci_string(),
        log2_gamma_modulus: gamma.log2_abs(),
        m,
        target_degree: degree,
        gamma_bound_log2: bound,
    }
}

fn partial_sum(
    forward: &OperatorSpec,
    targets: &[WideVector],
    gammas: &[WideComplex],
    ms: &[u64],
) -> Result<WideVector, ConstructionError> {
    let mut x = WideVector::zero(targets[0].domain());
    for ((y, g), &m) in targets.iter().zip(gammas).zip(ms) {
        x = x.add(&power_apply_wide(forward, m, y)?.scale(g.recip()));
    }
    Ok(x)
}

fn residuals(
    backward: &OperatorSpec,
    x: &WideVector,
    targets: &[WideVector],
    gammas: &[WideComplex],
    ms: &[u64],
    bound: impl Fn(usize) -> f64,
) -> Result<Vec<StageResidual>, ConstructionError> {
    let mut out = Vec::with_capacity(targets.len());
    for k in 0..targets.len() {
        let r = power_apply_wide(backward, ms[k], x)?.scale(gammas[k]).sub(&targets[k]).norm();
        let b = bound(k);
        out.push(StageResidual {
            k,
            residual: r.to_f64(),
            log2_residual: r.log2(),
            bound: b,
            within_bound: r <= WideReal::from_f64(b),
        });
    }
    Ok(out)
}

fn pow2_neg(k: usize) -> WideReal {
    WideReal::pow2(-(k as i64))
}

/// Builds `x_K = sum_{k <= K} gamma_k^{-1} F^{m_k} y_k` for the unilateral backward shift.
///
/// `|gamma_k|` is the first sampler value with
/// `|gamma_k| >= 2^{k+1} ||y_k|| max(1, max_{i<k} |gamma_i|)`, which makes
/// `||y_k|| / |gamma_k|` and `(|gamma_i| / |gamma_k|) ||y_k||` at most
/// `2^{-k-1}`; `m_0 = 0` and `m_k = max_{i<k} (m_i + d(y_i)) + 1` is the
/// smallest exponent separating the supports. Residuals are at most `2^-k`.
pub fn build_backward_shift(
    gamma: &ScalarSet,
    targets: &TargetFamily,
    k_max: usize,
) -> Result<ConstructionTrace, ConstructionError> {
    gamma.validate()?;
    check_stage_count(targets, k_max, Domain::Unilateral)?;
    if !nonzero_modulus_set(gamma).is_unbounded() {
        return Err(ConstructionError::GammaBounded(f64::INFINITY));
    }
    let ys: Vec<WideVector> = targets.vectors()[..=k_max].iter().map(WideVector::from).collect();
    let mut gammas: Vec<WideComplex> = Vec::new();
    let mut ms: Vec<u64> = Vec::new();
    let mut choices = Vec::new();
    let mut conditions = Vec::new();
    for (k, y) in ys.iter().enumerate() {
        let y_norm = y.norm();
        let largest_prev = gammas.iter().map(|g| g.log2_abs()).fold(0.0, f64::max);
        let need = (k + 1) as f64 + y_norm.log2() + largest_prev;
        let g = gamma.pick_modulus_at_least(need).ok_or(ConstructionError::GammaBounded(need))?;
        let m = (0..k).map(|i| ms[i] + targets.degree(i) as u64 + 1).max().unwrap_or(0);

        let g_abs = g.abs();
        let limit = pow2_neg(k);
        conditions.push(StageConditions {
            k,
            own_term: y_norm / g_abs < limit,
            forward_cross: gammas.iter().all(|gi| gi.abs() / g_abs * y_norm < limit),
            backward_cross: (0..k).all(|i| m > ms[i] + targets.degree(i) as u64),
        });
        choices.push(choice(k, g, m, targets.degree(k), None));
        gammas.push(g);
        ms.push(m);
    }
    let x = partial_sum(&OperatorSpec::ForwardShift, &ys, &gammas, &ms)?;
    let residuals = residuals(&OperatorSpec::BackwardShift, &x, &ys, &gammas, &ms, |k| 2f64.powi(-(k as i32)))?;
    Ok(ConstructionTrace {
        scheme: Scheme::BackwardShift,
        stages: k_max,
        operator: OperatorSpec::BackwardShift,
        choices,
        conditions,
        residuals,
        tail_bound: 2f64.powi(-(k_max as i32)),
        partial_sum: x.to_seq(),
        partial_sum_norm: x.norm().to_f64(),
        partial_sum_wide: x,
    })
}

/// Smallest `m >= lo` with `pred(m)`, for `pred` monotone (false then true).
fn first_true(lo: u64, pred: impl Fn(u64) -> Result<bool, ConstructionError>) -> Result<u64, ConstructionError> {
    if pred(lo)? {
        return Ok(lo);
    }
    let mut step = 1u64;
    while !pred(lo + step)? {
        step *= 2;
        if step > MAX_SHIFT {
            return Err(ConstructionError::InvalidParameter("no admissible shift exponent below 2^40".into()));
        }
    }
    // pred(lo + step / 2) is false (or step == 1 and pred(lo) is false)
    let (mut bad, mut good) = (lo + step / 2, lo + step);
    if step == 1 {
        bad = lo;
    }
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if pred(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Builds `x_K = sum_{k <= K} gamma_k^{-1} F^{m_k} y_k` for the doubling weighted
/// bilateral shift `B_w` (`w_i = 2` for `i > 0`, else `1`) with `F = F_{1/w}`.
///
/// `gamma_k` is chosen first: `gamma_0` is the largest sampler value of
/// modulus at most 1 and, for `k > 0`,
/// `|gamma_k| <= 2^{-k-1} min_{i<k} |gamma_i| / (2^{m_i + d(y_i)} ||y_i||)`,
/// which bounds every backward cross term by `2^{-k-1}` whatever `m_k` is.
/// Then `m_k` is the least exponent above `m_{k-1}` with
/// `||F^{m_k} y_k|| <= 2^{-k-1} |gamma_k|` and
/// `|gamma_i| ||F^{m_k - m_i} y_k|| <= 2^{-k-1} |gamma_k|` for all `i < k`.
/// Residuals are at most `(k+1) 2^-k`.
pub fn build_weighted_shift(
    gamma: &ScalarSet,
    targets: &TargetFamily,
    k_max: usize,
) -> Result<ConstructionTrace, ConstructionError> {
    gamma.validate()?;
    check_stage_count(targets, k_max, Domain::Bilateral)?;
    if nonzero_modulus_set(gamma).inf_positive() != Some(0.0) {
        return Err(ConstructionError::GammaBoundedAwayFromZero(f64::NEG_INFINITY));
    }
    let backward = OperatorSpec::doubling_backward();
    let forward = OperatorSpec::doubling_backward_inverse();
    let ys: Vec<WideVector> = targets.vectors()[..=k_max].iter().map(WideVector::from).collect();
    let norms: Vec<WideReal> = ys.iter().map(WideVector::norm).collect();
    let mut gammas: Vec<WideComplex> = Vec::new();
    let mut ms: Vec<u64> = Vec::new();
    let mut choices = Vec::new();
    let mut conditions = Vec::new();
    let fwd_norm = |y: &WideVector, n: u64| -> Result<WideReal, ConstructionError> {
        Ok(power_apply_wide(&forward, n, y)?.norm())
    };
    for (k, y) in ys.iter().enumerate() {
        let bound = (0..k)
            .map(|i| gammas[i].log2_abs() - (ms[i] as f64 + targets.degree(i) as f64) - norms[i].log2())
            .fold(f64::INFINITY, f64::min)
            - k as f64;
        let bound = if k == 0 { 0.0 } else { bound };
        let want = if k == 0 { 0.0 } else { bound - 1.0 };
        let g = gamma.pick_modulus_at_most(want).ok_or(ConstructionError::GammaBoundedAwayFromZero(want))?;
        let g_abs = g.abs();
        let target = g_abs * pow2_neg(k + 1);
        let start = if k == 0 { 0 } else { ms[k - 1] + 1 };
        let m = first_true(start, |m| {
            if fwd_norm(y, m)? > target {
                return Ok(false);
            }
            for i in 0..k {
                if gammas[i].abs() * fwd_norm(y, m - ms[i])? > target {
                    return Ok(false);
                }
            }
            Ok(true)
        })?;

        let limit = pow2_neg(k);
        let mut forward_cross = true;
        let mut backward_cross = true;
        for i in 0..k {
            let gi = gammas[i].abs();
            forward_cross &= gi / g_abs * fwd_norm(y, m - ms[i])? < limit;
            let back = power_apply_wide(&backward, m - ms[i], &ys[i])?.norm();
            backward_cross &= g_abs / gi * back < limit;
        }
        conditions.push(StageConditions {
            k,
            own_term: fwd_norm(y, m)? / g_abs < limit,
            forward_cross,
            backward_cross,
        });
        choices.push(choice(k, g, m, targets.degree(k), (k > 0).then_some(bound)));
        gammas.push(g);
        ms.push(m);
    }
    let x = partial_sum(&forward, &ys, &gammas, &ms)?;
    let residuals = residuals(&backward, &x, &ys, &gammas, &ms, |k| (k as f64 + 1.0) * 2f64.powi(-(k as i32)))?;
    Ok(ConstructionTrace {
        scheme: Scheme::WeightedBilateralShift,
        stages: k_max,
        operator: backward,
        choices,
        conditions,
        residuals,
        tail_bound: 2f64.powi(-(k_max as i32)),
        partial_sum: x.to_seq(),
        partial_sum_norm: x.norm().to_f64(),
        partial_sum_wide: x,
    })
}

/// `(max, min)` of `||T^n x||` over `0 <= n <= horizon`, evaluated on wide entries.
pub fn orbit_norm_extremes(t: &OperatorSpec, x: &WideVector, horizon: u64) -> Result<(f64, f64), ConstructionError> {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for n in 0..=horizon {
        let v = power_apply_wide(t, n, x)?.norm().to_f64();
        hi = hi.max(v);
        lo = lo.min(v);
    }
    Ok((hi, lo))
}

/// `R = r e^{-i theta} Id` on `C` and `Gamma = {r^t e^{-i t theta} : t real}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpiralScenario {
    pub r: f64,
    pub theta: AngleSpec,
    pub operator: OperatorSpec,
    pub gamma: ScalarSet,
}

impl SpiralScenario {
    /// `r^s e^{-i s theta}`.
    pub fn point(&self, s: f64) -> Complex64 {
        Complex64::from_polar(self.r.powf(s), -s * self.theta.radians())
    }
}

pub fn build_spiral_scenario(r: f64, theta: AngleSpec) -> Result<SpiralScenario, ConstructionError> {
    if r == 1.0 {
        return Err(ConstructionError::RIsOne);
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(ConstructionError::InvalidParameter("r must be finite and positive".into()));
    }
    let c = Complex64::from_polar(r, -theta.radians());
    Ok(SpiralScenario {
        r,
        operator: OperatorSpec::ScalarOnC { c },
        gamma: ScalarSet::LogSpiral { base: r, rate: theta.clone() },
        theta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpiralDistance {
    /// Minimum of `|r^s e^{-i s theta} - target|` over the grid `s = i * step` inside the range.
    pub distance: f64,
    pub argmin_s: f64,
    /// Lower bound for the distance over the whole range (grid minimum minus the
    /// curve's speed times half a step, cell by cell).
    pub range_lower_bound: f64,
    /// Lower bound for the distance outside the range from `| r^s - |target| |`.
    pub tail_lower_bound: f64,
    pub grid_points: usize,
}

/// Distance from `target` to the spiral, by grid search with a tail certificate.
pub fn spiral_distance_to(
    scn: &SpiralScenario,
    target: Complex64,
    s_lo: f64,
    s_hi: f64,
    step: f64,
) -> Result<SpiralDistance, ConstructionError> {
    if target.norm() == 0.0 {
        return Err(ConstructionError::InvalidParameter("target must be nonzero".into()));
    }
    if !(step > 0.0 && s_lo < s_hi && s_lo.is_finite() && s_hi.is_finite()) {
        return Err(ConstructionError::InvalidParameter("need step > 0 and a finite range s_lo < s_hi".into()));
    }
    let i_lo = (s_lo / step).ceil() as i64;
    let i_hi = (s_hi / step).floor() as i64;
    let speed = (scn.r.ln().powi(2) + scn.theta.radians().powi(2)).sqrt();
    let mut best = f64::INFINITY;
    let mut best_s = 0.0;
    let mut lower = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for i in i_lo..=i_hi {
        let s = i as f64 * step;
        let d = (scn.point(s) - target).norm();
        if d < best {
            best = d;
            best_s = s;
        }
        if let Some((ps, pd)) = prev {
            let top = scn.r.powf(s).max(scn.r.powf(ps));
            lower = lower.min(d.min(pd) - top * speed * (s - ps) / 2.0);
        }
        prev = Some((s, d));
    }
    let (s_first, s_last) = (i_lo as f64 * step, i_hi as f64 * step);
    // the grid ends inside the range; the band between them and the range ends
    // is covered by the tail bound taken at the grid ends
    let rho = target.norm();
    let (small, large) =
        if scn.r > 1.0 { (scn.r.powf(s_first), scn.r.powf(s_last)) } else { (scn.r.powf(s_last), scn.r.powf(s_first)) };
    let tail = (rho - small).min(large - rho);
    if tail < best {
        return Err(ConstructionError::RangeTooSmall { tail, grid: best });
    }
    Ok(SpiralDistance {
        distance: best,
        argmin_s: best_s,
        range_lower_bound: lower.max(0.0),
        tail_lower_bound: tail,
        grid_points: (i_hi - i_lo + 1).max(0) as usize,
    })
}
