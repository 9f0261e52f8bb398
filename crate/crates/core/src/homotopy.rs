//! Winding numbers of closed curves in the unit circle, built from samples,
//! from the parametrization `phi(t) = exp(2 i pi (t - 1) / (b - 1))` of `T`
//! over `[1, b]`, from constants and from concatenations.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Endpoint matching tolerance for sampled curves and concatenation joints.
pub const CLOSURE_TOL: f64 = 1e-9;
/// Largest per-step turn for which a sampled winding number is reported as confident.
pub const CONFIDENT_STEP: f64 = PI / 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error("parameter {t} outside [1, {b}] (or b <= 1)")]
    OutOfRange { t: f64, b: f64 },
    #[error("curve is not closed: endpoints {start} and {end} differ")]
    NotClosed { start: Complex64, end: Complex64 },
    #[error("concatenation is discontinuous between parts {0} and {1}")]
    Discontinuous(usize, usize),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("curve passes through 0")]
    ThroughOrigin,
    #[error("invalid audit input: {0}")]
    InvalidAudit(String),
}

/// `e^{2 i pi u}`, exact at quarter turns.
fn turn(u: f64) -> Complex64 {
    let q = 4.0 * u.rem_euclid(1.0);
    if q == q.round() {
        return match q as u8 {
            0 | 4 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * u)
}

fn check_phi_args(t: f64, b: f64) -> Result<(), HomotopyError> {
    if !(b > 1.0 && b.is_finite() && (1.0..=b).contains(&t)) {
        return Err(HomotopyError::OutOfRange { t, b });
    }
    Ok(())
}

/// `phi(t) = exp(2 i pi (t - 1) / (b - 1))` for `1 <= t <= b`.
pub fn phi(t: f64, b: f64) -> Result<Complex64, HomotopyError> {
    check_phi_args(t, b)?;
    Ok(turn((t - 1.0) / (b - 1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleCurve {
    Sampled {
        points: Vec<Complex64>,
        closed: bool,
    },
    /// `s -> phi(from + s (to - from))`, `s` in `[0, 1]`.
    AnalyticPhiSegment {
        b: f64,
        from: f64,
        to: f64,
    },
    Constant {
        value: Complex64,
    },
    Concat {
        parts: Vec<CircleCurve>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindingResult {
    pub index: i64,
    pub min_modulus: f64,
    pub max_step_turn: f64,
    pub confident: bool,
}

/// Angle swept by an open curve, in turns, with its endpoints.
struct Sweep {
    turns: f64,
    start: Complex64,
    end: Complex64,
    min_modulus: f64,
    max_step: f64,
}

fn sweep_points(points: &[Complex64]) -> Result<Sweep, HomotopyError> {
    let (Some(&start), Some(&end)) = (points.first(), points.last()) else {
        return Err(HomotopyError::InvalidCurve("sampled curve has no points".into()));
    };
    let min_modulus = points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    if min_modulus == 0.0 {
        return Err(HomotopyError::ThroughOrigin);
    }
    let mut total = 0.0;
    let mut max_step = 0.0f64;
    for w in points.windows(2) {
        let step = (w[1] / w[0]).arg();
        total += step;
        max_step = max_step.max(step.abs());
    }
    Ok(Sweep { turns: total / TAU, start, end, min_modulus, max_step })
}

impl CircleCurve {
    pub fn validate(&self) -> Result<(), HomotopyError> {
        match self {
            CircleCurve::Sampled { points, closed } => {
                if points.is_empty() {
                    return Err(HomotopyError::InvalidCurve("sampled curve has no points".into()));
                }
                if let Some(p) = points.iter().find(|p| (p.norm() - 1.0).abs() > CLOSURE_TOL) {
                    return Err(HomotopyError::InvalidCurve(format!("point {p} is off the unit circle")));
                }
                let (s, e) = (points[0], points[points.len() - 1]);
                if *closed && (s - e).norm() > CLOSURE_TOL {
                    return Err(HomotopyError::InvalidCurve("flagged closed but endpoints differ".into()));
                }
                Ok(())
            }
            CircleCurve::AnalyticPhiSegment { b, from, to } => {
                check_phi_args(*from, *b)?;
                check_phi_args(*to, *b)
            }
            CircleCurve::Constant { value } => {
                if (value.norm() - 1.0).abs() > CLOSURE_TOL {
                    return Err(HomotopyError::InvalidCurve(format!("constant {value} is off the unit circle")));
                }
                Ok(())
            }
            CircleCurve::Concat { parts } => {
                if parts.is_empty() {
                    return Err(HomotopyError::InvalidCurve("empty concatenation".into()));
                }
                parts.iter().try_for_each(CircleCurve::validate)
            }
        }
    }

    /// The unit circle sampled at `n` points plus the repeated start point.
    pub fn unit_circle(n: usize) -> Self {
        let mut points: Vec<Complex64> = (0..n).map(|k| turn(k as f64 / n as f64)).collect();
        points.push(points[0]);
        CircleCurve::Sampled { points, closed: true }
    }

    pub fn reversed(&self) -> CircleCurve {
        match self {
            CircleCurve::Sampled { points, closed } => {
                CircleCurve::Sampled { points: points.iter().rev().copied().collect(), closed: *closed }
            }
            CircleCurve::AnalyticPhiSegment { b, from, to } => {
                CircleCurve::AnalyticPhiSegment { b: *b, from: *to, to: *from }
            }
            CircleCurve::Constant { value } => CircleCurve::Constant { value: *value },
            CircleCurve::Concat { parts } => {
                CircleCurve::Concat { parts: parts.iter().rev().map(CircleCurve::reversed).collect() }
            }
        }
    }

    fn sweep(&self) -> Result<Sweep, HomotopyError> {
        match self {
            CircleCurve::Sampled { points, .. } => sweep_points(points),
            CircleCurve::AnalyticPhiSegment { b, from, to } => Ok(Sweep {
                turns: (to - from) / (b - 1.0),
                start: phi(*from, *b)?,
                end: phi(*to, *b)?,
                min_modulus: 1.0,
                max_step: 0.0,
            }),
            CircleCurve::Constant { value } => {
                Ok(Sweep { turns: 0.0, start: *value, end: *value, min_modulus: value.norm(), max_step: 0.0 })
            }
            CircleCurve::Concat { parts } => {
                let sweeps = parts.iter().map(CircleCurve::sweep).collect::<Result<Vec<_>, _>>()?;
                for (i, w) in sweeps.windows(2).enumerate() {
                    if (w[0].end - w[1].start).norm() > CLOSURE_TOL {
                        return Err(HomotopyError::Discontinuous(i, i + 1));
                    }
                }
                Ok(Sweep {
                    turns: sweeps.iter().map(|s| s.turns).sum(),
                    start: sweeps[0].start,
                    end: sweeps[sweeps.len() - 1].end,
                    min_modulus: sweeps.iter().map(|s| s.min_modulus).fold(f64::INFINITY, f64::min),
                    max_step: sweeps.iter().map(|s| s.max_step).fold(0.0, f64::max),
                })
            }
        }
    }
}

fn closed_result(s: Sweep) -> Result<WindingResult, HomotopyError> {
    if (s.start - s.end).norm() > CLOSURE_TOL {
        return Err(HomotopyError::NotClosed { start: s.start, end: s.end });
    }
    Ok(WindingResult {
        index: s.turns.round() as i64,
        min_modulus: s.min_modulus,
        max_step_turn: s.max_step,
        confident: s.max_step < CONFIDENT_STEP,
    })
}

/// Winding number around 0 from principal-branch angle increments
/// (closed form for analytic segments and constants).
pub fn winding_number(c: &CircleCurve) -> Result<WindingResult, HomotopyError> {
    c.validate()?;
    closed_result(c.sweep()?)
}

/// Winding number around 0 of a closed polygon in `C \ {0}`.
pub fn winding_number_plane(points: &[Complex64]) -> Result<WindingResult, HomotopyError> {
    closed_result(sweep_points(points)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdditivityCheck {
    pub concat_index: i64,
    pub sum_of_indices: i64,
    pub holds: bool,
}

/// Compares the index of the concatenation with the sum of the parts' indices.
pub fn concat_additivity_check(parts: &[CircleCurve]) -> Result<AdditivityCheck, HomotopyError> {
    let mut sum = 0;
    for p in parts {
        sum += winding_number(p)?.index;
    }
    let whole = winding_number(&CircleCurve::Concat { parts: parts.to_vec() })?.index;
    Ok(AdditivityCheck { concat_index: whole, sum_of_indices: sum, holds: whole == sum })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditVerdict {
    Contradiction,
    Consistent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub verdict: AuditVerdict,
    /// An integer index satisfying `n w = 1` for every `n`, when one exists.
    pub witness: Option<i64>,
    pub detail: String,
}

/// Checks whether `n * w = 1` can hold for every listed `n`; `w = None` leaves the index free.
pub fn contradiction_audit(w: Option<i64>, n_list: &[u64]) -> Result<AuditReport, HomotopyError> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(HomotopyError::InvalidAudit("need a non-empty list of positive integers".into()));
    }
    let mut sorted = n_list.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(HomotopyError::InvalidAudit("integers must be distinct".into()));
    }
    // n w = 1 over Z forces n = w = 1
    let solvable = sorted == [1];
    let report = match w {
        Some(w) => {
            let bad: Vec<u64> = sorted.iter().copied().filter(|&n| n as i128 * w as i128 != 1).collect();
            if bad.is_empty() {
                AuditReport {
                    verdict: AuditVerdict::Consistent,
                    witness: Some(w),
                    detail: format!("n w = 1 holds for w = {w}"),
                }
            } else {
                AuditReport {
                    verdict: AuditVerdict::Contradiction,
                    witness: None,
                    detail: format!("n w = 1 fails for w = {w} at n in {bad:?}"),
                }
            }
        }
        None if solvable => {
            AuditReport { verdict: AuditVerdict::Consistent, witness: Some(1), detail: "w = 1 solves 1 w = 1".into() }
        }
        None => AuditReport {
            verdict: AuditVerdict::Contradiction,
            witness: None,
            detail: format!("no integer w satisfies n w = 1 for n in {sorted:?}"),
        },
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    /// The curve `phi` traversed from `b` down to `1`, in two halves.
    fn descending(b: f64) -> CircleCurve {
        let mid = (1.0 + b) / 2.0;
        CircleCurve::Concat {
            parts: vec![
                CircleCurve::AnalyticPhiSegment { b, from: b, to: mid },
                CircleCurve::AnalyticPhiSegment { b, from: mid, to: 1.0 },
            ],
        }
    }

    /// A loop based at 1 winding `w` times, sampled finely enough to be confident.
    fn loop_with_index(w: i64) -> CircleCurve {
        let steps = 16 * w.unsigned_abs().max(1) as usize;
        let points = (0..=steps).map(|k| turn(w as f64 * k as f64 / steps as f64)).collect();
        CircleCurve::Sampled { points, closed: true }
    }

    #[test]
    fn phi_values() {
        for b in [1.5, 2.0, 10.0] {
            assert_eq!(phi(1.0, b).unwrap(), one());
            assert_eq!(phi(b, b).unwrap(), one());
            assert_eq!(phi((1.0 + b) / 2.0, b).unwrap(), Complex64::new(-1.0, 0.0));
        }
        assert!(matches!(phi(0.5, 2.0), Err(HomotopyError::OutOfRange { .. })));
        assert!(matches!(phi(1.0, 1.0), Err(HomotopyError::OutOfRange { .. })));
    }

    #[test]
    fn descending_phi_has_index_minus_one() {
        for b in [1.5, 2.0, 10.0] {
            assert_eq!(winding_number(&descending(b)).unwrap().index, -1);
            let whole = CircleCurve::AnalyticPhiSegment { b, from: b, to: 1.0 };
            let r = winding_number(&whole).unwrap();
            assert_eq!(r.index, -1);
            assert!(r.confident);
        }
    }

    #[test]
    fn sampled_circle_and_constant() {
        let r = winding_number(&CircleCurve::unit_circle(720)).unwrap();
        assert_eq!(r.index, 1);
        assert!(r.confident);
        assert_eq!(winding_number(&CircleCurve::Constant { value: Complex64::from_polar(1.0, 0.3) }).unwrap().index, 0);
        let coarse = winding_number(&CircleCurve::unit_circle(3)).unwrap();
        assert_eq!(coarse.index, 1);
        assert!(!coarse.confident);
    }

    #[test]
    fn open_and_broken_curves_are_rejected() {
        let half = CircleCurve::AnalyticPhiSegment { b: 2.0, from: 1.0, to: 1.5 };
        assert!(matches!(winding_number(&half), Err(HomotopyError::NotClosed { .. })));
        let broken = CircleCurve::Concat {
            parts: vec![CircleCurve::unit_circle(8), CircleCurve::Constant { value: Complex64::new(0.0, 1.0) }],
        };
        assert_eq!(winding_number(&broken), Err(HomotopyError::Discontinuous(0, 1)));
        let off = CircleCurve::Sampled { points: vec![Complex64::new(2.0, 0.0)], closed: true };
        assert!(matches!(winding_number(&off), Err(HomotopyError::InvalidCurve(_))));
    }

    #[test]
    fn additivity_examples() {
        let c = CircleCurve::unit_circle(64);
        let both = concat_additivity_check(&[c.clone(), c.clone()]).unwrap();
        assert_eq!((both.concat_index, both.holds), (2, true));
        let undo = concat_additivity_check(&[c.clone(), c.reversed()]).unwrap();
        assert_eq!((undo.concat_index, undo.holds), (0, true));
        for w in -3..=3 {
            for n in 1..6 {
                let mut parts = vec![loop_with_index(w); n];
                parts.push(CircleCurve::Constant { value: one() });
                parts.push(CircleCurve::Constant { value: one() });
                parts.push(descending(2.0));
                let r = concat_additivity_check(&parts).unwrap();
                assert!(r.holds);
                assert_eq!(r.concat_index, n as i64 * w - 1);
            }
        }
    }

    #[test]
    fn random_compositions_are_additive() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let parts: Vec<CircleCurve> = (0..rng.gen_range(1..8))
                .map(|_| match rng.gen_range(0..3) {
                    0 => loop_with_index(rng.gen_range(-4..=4)),
                    1 => CircleCurve::Constant { value: one() },
                    _ => descending([1.5, 2.0, 10.0][rng.gen_range(0..3)]).reversed(),
                })
                .collect();
            assert!(concat_additivity_check(&parts).unwrap().holds);
        }
    }

    #[test]
    fn audits() {
        let r = contradiction_audit(None, &[3, 5]).unwrap();
        assert_eq!(r.verdict, AuditVerdict::Contradiction);
        assert_eq!(contradiction_audit(Some(1), &[1]).unwrap().verdict, AuditVerdict::Consistent);
        assert_eq!(contradiction_audit(None, &[1]).unwrap().witness, Some(1));
        for w in -5..=5 {
            assert_eq!(contradiction_audit(Some(w), &[2]).unwrap().verdict, AuditVerdict::Contradiction);
        }
        assert!(contradiction_audit(None, &[]).is_err());
        assert!(contradiction_audit(None, &[2, 2]).is_err());
    }

    fn closed_loop(w: i64, radii: &[f64], per_radius: usize) -> Vec<Complex64> {
        let n = radii.len() * per_radius;
        let mut pts: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(radii[k / per_radius], TAU * w as f64 * k as f64 / n as f64))
            .collect();
        pts.push(pts[0]);
        pts
    }

    /// Loops winding `w` times with a radial profile in `[0.6, 1.6]`.
    fn arb_closed_loop() -> impl Strategy<Value = Vec<Complex64>> {
        (-3i64..=3, proptest::collection::vec(0.6f64..1.6, 8..40)).prop_map(|(w, radii)| closed_loop(w, &radii, 8))
    }

    fn arb_loop_pair() -> impl Strategy<Value = (Vec<Complex64>, Vec<Complex64>)> {
        (8usize..40).prop_flat_map(|len| {
            let one = (-3i64..=3, proptest::collection::vec(0.6f64..1.6, len));
            (one.clone(), one).prop_map(|((w1, r1), (w2, r2))| (closed_loop(w1, &r1, 8), closed_loop(w2, &r2, 8)))
        })
    }

    proptest! {
        #[test]
        fn reversal_negates(points in arb_closed_loop()) {
            let unit: Vec<Complex64> = points.iter().map(|p| p / p.norm()).collect();
            let c = CircleCurve::Sampled { points: unit, closed: true };
            let a = winding_number(&c).unwrap();
            let b = winding_number(&c.reversed()).unwrap();
            prop_assert_eq!(a.index, -b.index);
            // the index is the integer nearest the accumulated turns
            let Sweep { turns, .. } = c.sweep().unwrap();
            prop_assert_eq!(a.index, turns.round() as i64);
        }

        #[test]
        fn linear_homotopy_preserves_index((a, b) in arb_loop_pair()) {
            let ia = winding_number_plane(&a).unwrap().index;
            let ib = winding_number_plane(&b).unwrap().index;
            let mut indices = Vec::new();
            for s in 0..=100 {
                let s = s as f64 / 100.0;
                let mix: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| p * (1.0 - s) + q * s).collect();
                let m = winding_number_plane(&mix);
                let min_mod = mix.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
                if min_mod < 0.5 {
                    // the homotopy leaves the admissible region; invariance is not claimed
                    return Ok(());
                }
                indices.push(m.unwrap().index);
            }
            prop_assert!(indices.iter().all(|&i| i == ia));
            prop_assert_eq!(ia, ib);
        }
    }
}
