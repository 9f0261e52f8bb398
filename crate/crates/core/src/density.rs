//! Orbit clouds `{gamma T^n x}` and numerical density verdicts on
//! finite-dimensional coordinate sections.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gamma_sets::{GammaGrid, ScalarSet};
use crate::operators::{apply, OperatorError, OperatorSpec, SeqVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("the orbit cloud has no samples")]
    EmptyCloud,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invalid density parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub n: u64,
    pub gamma: Complex64,
    pub point: SeqVector,
}

/// Samples `gamma T^n x` for `0 <= n <= horizon` and `gamma` on a deterministic grid of `Gamma`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitCloud {
    pub base_point: SeqVector,
    pub operator: OperatorSpec,
    pub horizon: u64,
    pub gamma_grid_size: usize,
    pub samples: Vec<OrbitSample>,
}

impl OrbitCloud {
    /// Real coordinates `(re, im)` of every sample on `section`, flattened.
    fn projected(&self, section: &[i64]) -> Vec<f64> {
        self.samples.iter().flat_map(|s| to_real(&s.point.project(section))).collect()
    }
}

fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Orbit iterates are produced by repeated application, so each sample is exactly `gamma * T^n x`.
pub fn generate_orbit(
    t: &OperatorSpec,
    x: &SeqVector,
    g: &ScalarSet,
    horizon: u64,
    grid: &GammaGrid,
) -> Result<OrbitCloud, DensityError> {
    t.validate()?;
    let gammas = g.grid(grid);
    let mut samples = Vec::with_capacity(gammas.len() * (horizon as usize + 1));
    let mut v = x.clone();
    for n in 0..=horizon {
        if n > 0 {
            v = apply(t, &v)?;
        } else if t.domain() != x.domain() {
            return Err(OperatorError::DomainMismatch(format!(
                "operator acts on {:?} sequences, vector is {:?}",
                t.domain(),
                x.domain()
            ))
            .into());
        }
        for &gamma in &gammas {
            samples.push(OrbitSample { n, gamma, point: v.scale(gamma) });
        }
    }
    Ok(OrbitCloud { base_point: x.clone(), operator: t.clone(), horizon, gamma_grid_size: grid.size, samples })
}

/// Ball and grid for a density scan on a coordinate section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub section: Vec<i64>,
    pub center: Vec<Complex64>,
    pub radius: f64,
    pub epsilon: f64,
    pub grid_step: f64,
}

impl DensityParams {
    fn validate(&self) -> Result<(), DensityError> {
        let bad = |m: &str| Err(DensityError::InvalidParameters(m.to_string()));
        if self.section.is_empty() {
            return bad("section must list at least one coordinate");
        }
        if self.center.len() != self.section.len() {
            return bad("ball center must have one complex coordinate per section index");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("ball radius must be positive and finite");
        }
        if !(self.grid_step > 0.0 && self.epsilon > self.grid_step / 2.0) {
            return bad("need grid_step > 0 and epsilon > grid_step / 2");
        }
        Ok(())
    }

    /// Grid `center + grid_step * Z^{2d}` inside the closed ball, in odometer order.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let center = to_real(&self.center);
        let reach = (self.radius / self.grid_step).floor() as i64;
        let dims = center.len();
        let mut offsets = vec![-reach; dims];
        let mut out = Vec::new();
        loop {
            let p: Vec<f64> = center.iter().zip(&offsets).map(|(c, &o)| c + o as f64 * self.grid_step).collect();
            if dist(&p, &center) <= self.radius {
                out.push(p);
            }
            let mut d = dims;
            loop {
                if d == 0 {
                    return out;
                }
                d -= 1;
                if offsets[d] < reach {
                    offsets[d] += 1;
                    break;
                }
                offsets[d] = -reach;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDistance {
    pub point: Vec<f64>,
    pub distance: f64,
    /// Index of the first nearest sample.
    pub nearest: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityVerdict {
    CoveredAtEps,
    NotCovered,
    /// The ball is not covered, but this smaller ball inside it is.
    SomewhereWitness {
        center: Vec<f64>,
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub params: DensityParams,
    pub grid_points: usize,
    pub covered_fraction: f64,
    pub miss_witnesses: Vec<GridDistance>,
    pub verdict: DensityVerdict,
    /// Every grid point with its nearest-sample distance, for heat maps.
    #[serde(skip)]
    pub heat_map: Vec<GridDistance>,
}

fn dist_sqr(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], cloud: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, q) in cloud.chunks_exact(p.len()).enumerate() {
        let d = dist_sqr(p, q);
        if d < best.0 {
            best = (d, i);
        }
    }
    (best.0.sqrt(), best.1)
}

/// Whether every grid point of the ball lies within `epsilon` of the projected cloud.
pub fn epsilon_density(cloud: &OrbitCloud, params: &DensityParams) -> Result<DensityReport, DensityError> {
    params.validate()?;
    if cloud.samples.is_empty() {
        return Err(DensityError::EmptyCloud);
    }
    let projected = cloud.projected(&params.section);
    let grid = params.grid_points();
    let heat_map: Vec<GridDistance> = grid
        .into_par_iter()
        .map(|p| {
            let (distance, nearest) = nearest(&p, &projected);
            GridDistance { point: p, distance, nearest }
        })
        .collect();
    let covered: Vec<bool> = heat_map.iter().map(|g| g.distance <= params.epsilon).collect();
    let n_covered = covered.iter().filter(|&&c| c).count();
    let miss_witnesses: Vec<GridDistance> =
        heat_map.iter().zip(&covered).filter(|(_, &c)| !c).map(|(g, _)| g.clone()).collect();
    let verdict = if miss_witnesses.is_empty() {
        DensityVerdict::CoveredAtEps
    } else {
        somewhere_witness(params, &heat_map, &covered)
    };
    Ok(DensityReport {
        params: params.clone(),
        grid_points: heat_map.len(),
        covered_fraction: n_covered as f64 / heat_map.len().max(1) as f64,
        miss_witnesses,
        verdict,
        heat_map,
    })
}

/// First grid point whose quarter-radius ball lies inside the scanned ball and is fully covered.
fn somewhere_witness(params: &DensityParams, heat: &[GridDistance], covered: &[bool]) -> DensityVerdict {
    let r = params.radius / 4.0;
    if r < params.grid_step {
        return DensityVerdict::NotCovered;
    }
    let center = to_real(&params.center);
    for (g, &c) in heat.iter().zip(covered) {
        if !c || dist(&g.point, &center) + r > params.radius {
            continue;
        }
        let all = heat.iter().zip(covered).all(|(h, &hc)| hc || dist(&h.point, &g.point) > r);
        if all {
            return DensityVerdict::SomewhereWitness { center: g.point.clone(), radius: r };
        }
    }
    DensityVerdict::NotCovered
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DDenseResult {
    pub d: f64,
    pub all_met: bool,
    /// Indices of balls containing no sample.
    pub empty_balls: Vec<usize>,
}

/// Whether every open ball of radius `d` around the given centers contains a projected sample.
pub fn d_dense_check(cloud: &OrbitCloud, section: &[i64], d: f64, centers: &[Vec<Complex64>]) -> DDenseResult {
    let projected = cloud.projected(section);
    let dim = 2 * section.len();
    let empty_balls: Vec<usize> = centers
        .iter()
        .enumerate()
        .filter(|(_, c)| projected.chunks_exact(dim).all(|q| dist(&to_real(c), q) >= d))
        .map(|(i, _)| i)
        .collect();
    DDenseResult { d, all_met: empty_balls.is_empty(), empty_balls }
}

/// `(max, min)` of `||T^n x||` over `0 <= n <= horizon`.
pub fn boundedness_certificates(t: &OperatorSpec, x: &SeqVector, horizon: u64) -> Result<(f64, f64), DensityError> {
    if horizon == 0 {
        return Err(DensityError::InvalidParameters("horizon must be at least 1".into()));
    }
    let mut v = x.clone();
    let mut sup = v.norm();
    let mut inf = sup;
    for _ in 0..horizon {
        v = apply(t, &v)?;
        sup = sup.max(v.norm());
        inf = inf.min(v.norm());
    }
    Ok((sup, inf))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaHit {
    pub lambda: f64,
    /// Orbit index of the matching sample, `m >= n`.
    pub m: u64,
    pub phase: f64,
    pub residual: f64,
    /// `epsilon` plus the phase-grid error `lambda ||T^m x|| pi / N`.
    pub allowance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub n: u64,
    pub epsilon: f64,
    pub phase_grid: usize,
    pub detected: Vec<LambdaHit>,
}

impl LambdaEstimate {
    pub fn lambdas(&self) -> Vec<f64> {
        self.detected.iter().map(|h| h.lambda).collect()
    }
}

fn inner(a: &SeqVector, b: &SeqVector) -> Complex64 {
    a.entries().map(|(i, z)| z * b.get(i).conj()).sum()
}

/// Positive `lambda` with `min_theta ||lambda e^{i theta} T^m x - T^n x|| <= epsilon`
/// for some orbit sample `m >= n`, `theta` on an `N`-point phase grid.
///
/// For each sample the best `lambda` is the projection coefficient
/// `|<T^n x, T^m x>| / ||T^m x||^2`; its phase is snapped to the grid and the
/// snapping error is added to the allowance.
pub fn lambda_set_estimate(
    t: &OperatorSpec,
    x: &SeqVector,
    n: u64,
    cloud: &OrbitCloud,
    epsilon: f64,
    phase_grid: usize,
) -> Result<LambdaEstimate, DensityError> {
    if cloud.samples.is_empty() {
        return Err(DensityError::EmptyCloud);
    }
    if &cloud.operator != t || &cloud.base_point != x {
        return Err(DensityError::InvalidParameters("cloud was not generated from this operator and vector".into()));
    }
    if cloud.samples.iter().any(|s| s.gamma != Complex64::new(1.0, 0.0)) {
        return Err(DensityError::InvalidParameters("cloud must be generated with Gamma = {1}".into()));
    }
    if n > cloud.horizon || phase_grid == 0 {
        return Err(DensityError::InvalidParameters("need n <= horizon and a non-empty phase grid".into()));
    }
    let v = &cloud.samples.iter().find(|s| s.n == n).expect("every index up to the horizon is sampled").point;
    let slot = TAU / phase_grid as f64;
    let mut detected = Vec::new();
    for s in cloud.samples.iter().filter(|s| s.n >= n) {
        let u = &s.point;
        let uu = u.norm_sqr();
        let vu = inner(v, u);
        if uu == 0.0 || vu.norm() == 0.0 {
            continue;
        }
        let lambda = vu.norm() / uu;
        let k = (vu.arg() / slot).round().rem_euclid(phase_grid as f64);
        let phase = k * slot;
        let fitted = u.scale(Complex64::from_polar(lambda, phase));
        let residual = fitted.sub(v)?.norm();
        let allowance = epsilon + lambda * uu.sqrt() * PI / phase_grid as f64;
        if residual <= allowance {
            detected.push(LambdaHit { lambda, m: s.n, phase, residual, allowance });
        }
    }
    Ok(LambdaEstimate { n, epsilon, phase_grid, detected })
}
