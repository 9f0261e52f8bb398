//! Finite-horizon check of the Hypercyclicity Criterion and of its
//! full-sequence special case (Kitai).
//!
//! For `T`, dense-set samples `X0`, `Y0`, right inverses `S_n = S^n` and an
//! increasing sequence `n_k`, three residual traces are recorded:
//! `r1 = max ||T^{n_k} x||`, `r2 = max ||S^{n_k} y||` and
//! `r3 = max ||T^{n_k} S^{n_k} y - y||`. A trace "tends to 0" when its last
//! value is within tolerance and its last five values never increase.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::{power_apply_wide, OperatorError, OperatorSpec, SeqVector, WideVector};

/// Number of final trace entries that must be nonincreasing.
pub const TAIL_LENGTH: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriterionError {
    #[error("map domain mismatch: {0}")]
    MapDomainMismatch(String),
    #[error("invalid criterion instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionInstance {
    pub operator: OperatorSpec,
    pub x0: Vec<SeqVector>,
    pub y0: Vec<SeqVector>,
    /// `S`, with `S_{n} = S^n`.
    pub right_inverse: OperatorSpec,
    pub sequence: Vec<u64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl CriterionInstance {
    fn validate(&self) -> Result<(), CriterionError> {
        if self.x0.is_empty() || self.y0.is_empty() {
            return Err(CriterionError::InvalidInstance("X0 and Y0 must be non-empty".into()));
        }
        if self.sequence.is_empty() || self.sequence.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CriterionError::InvalidInstance("n_k must be non-empty and strictly increasing".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(CriterionError::InvalidInstance("tolerance must be nonnegative".into()));
        }
        self.operator.validate()?;
        self.right_inverse.validate()?;
        let domain = self.operator.domain();
        if self.right_inverse.domain() != domain {
            return Err(CriterionError::MapDomainMismatch(format!(
                "T acts on {domain:?} sequences but S acts on {:?} sequences",
                self.right_inverse.domain()
            )));
        }
        if let Some(v) = self.x0.iter().chain(&self.y0).find(|v| v.domain() != domain) {
            return Err(CriterionError::MapDomainMismatch(format!(
                "T acts on {domain:?} sequences but a test vector is {:?}",
                v.domain()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualStep {
    pub n: u64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub final_value: f64,
    pub within_tolerance: bool,
    pub tail_nonincreasing: bool,
}

impl ConditionVerdict {
    fn of(trace: &[f64], tol: f64) -> Self {
        let final_value = *trace.last().expect("traces are non-empty");
        let start = trace.len().saturating_sub(TAIL_LENGTH);
        ConditionVerdict {
            final_value,
            within_tolerance: final_value <= tol,
            tail_nonincreasing: trace[start..].windows(2).all(|w| w[1] <= w[0]),
        }
    }

    pub fn holds(&self) -> bool {
        self.within_tolerance && self.tail_nonincreasing
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub pass: bool,
    /// Final-index values of `(r1, r2, r3)`.
    pub max_residuals: [f64; 3],
    pub tolerance: f64,
    /// `T^{n_k} x -> 0` on `X0`.
    pub orbit_vanishes: ConditionVerdict,
    /// `S_{n_k} y -> 0` on `Y0`.
    pub inverse_vanishes: ConditionVerdict,
    /// `T^{n_k} S_{n_k} y -> y` on `Y0`.
    pub right_inverse_holds: ConditionVerdict,
    pub trace: Vec<ResidualStep>,
}

fn max_norm(vs: impl ParallelIterator<Item = Result<f64, CriterionError>>) -> Result<f64, CriterionError> {
    vs.try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

pub fn check_criterion(inst: &CriterionInstance) -> Result<CriterionReport, CriterionError> {
    inst.validate()?;
    let (t, s) = (&inst.operator, &inst.right_inverse);
    let xs: Vec<WideVector> = inst.x0.iter().map(WideVector::from).collect();
    let ys: Vec<WideVector> = inst.y0.iter().map(WideVector::from).collect();
    let mut trace = Vec::with_capacity(inst.sequence.len());
    for &n in &inst.sequence {
        let r1 = max_norm(xs.par_iter().map(|x| Ok(power_apply_wide(t, n, x)?.norm().to_f64())))?;
        let r2 = max_norm(ys.par_iter().map(|y| Ok(power_apply_wide(s, n, y)?.norm().to_f64())))?;
        let r3 = max_norm(ys.par_iter().map(|y| {
            let back = power_apply_wide(t, n, &power_apply_wide(s, n, y)?)?;
            Ok(back.sub(y).norm().to_f64())
        }))?;
        trace.push(ResidualStep { n, r1, r2, r3 });
    }
    let col = |f: fn(&ResidualStep) -> f64| trace.iter().map(f).collect::<Vec<f64>>();
    let orbit_vanishes = ConditionVerdict::of(&col(|r| r.r1), inst.tolerance);
    let inverse_vanishes = ConditionVerdict::of(&col(|r| r.r2), inst.tolerance);
    let right_inverse_holds = ConditionVerdict::of(&col(|r| r.r3), inst.tolerance);
    Ok(CriterionReport {
        pass: orbit_vanishes.holds() && inverse_vanishes.holds() && right_inverse_holds.holds(),
        max_residuals: [orbit_vanishes.final_value, inverse_vanishes.final_value, right_inverse_holds.final_value],
        tolerance: inst.tolerance,
        orbit_vanishes,
        inverse_vanishes,
        right_inverse_holds,
        trace,
    })
}

/// The same check along the full sequence `0, 1, ..., n_K`.
pub fn kitai_mode(inst: &CriterionInstance) -> Result<CriterionReport, CriterionError> {
    let last = *inst.sequence.last().ok_or_else(|| CriterionError::InvalidInstance("n_k must be non-empty".into()))?;
    check_criterion(&CriterionInstance { sequence: (0..=last).collect(), ..inst.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Domain;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis_block(domain: Domain, upto: i64) -> Vec<SeqVector> {
        (0..=upto).map(|j| SeqVector::basis(domain, j)).collect()
    }

    fn rolewicz(lambda: Complex64, k: u64) -> CriterionInstance {
        CriterionInstance {
            operator: OperatorSpec::scalar_multiple(lambda, OperatorSpec::BackwardShift),
            x0: basis_block(Domain::Unilateral, 5),
            y0: basis_block(Domain::Unilateral, 5),
            right_inverse: OperatorSpec::scalar_multiple(lambda.inv(), OperatorSpec::ForwardShift),
            sequence: (0..=k).collect(),
            tolerance: 1e-9,
        }
    }

    #[test]
    fn rolewicz_passes_with_exact_residuals() {
        let report = check_criterion(&rolewicz(c(2.0, 0.0), 40)).unwrap();
        assert!(report.pass);
        for step in &report.trace {
            if step.n > 5 {
                assert_eq!(step.r1, 0.0);
            }
            assert_eq!(step.r3, 0.0);
            assert_eq!(step.r2, 2f64.powi(-(step.n as i32)));
        }
    }

    #[test]
    fn plain_backward_shift_fails_on_the_inverse() {
        let inst = CriterionInstance {
            operator: OperatorSpec::BackwardShift,
            right_inverse: OperatorSpec::ForwardShift,
            ..rolewicz(c(1.0, 0.0), 40)
        };
        let report = check_criterion(&inst).unwrap();
        assert!(!report.pass);
        assert!(report.orbit_vanishes.holds() && report.right_inverse_holds.holds());
        assert_eq!(report.max_residuals[1], 1.0);
    }

    #[test]
    fn expanding_scalar_fails_on_the_orbit() {
        let cval = c(0.0, 2.0);
        let one = vec![SeqVector::scalar(c(1.0, 0.0))];
        let inst = CriterionInstance {
            operator: OperatorSpec::ScalarOnC { c: cval },
            x0: one.clone(),
            y0: one,
            right_inverse: OperatorSpec::ScalarOnC { c: cval.inv() },
            sequence: (1..=40).collect(),
            tolerance: 1e-9,
        };
        let report = check_criterion(&inst).unwrap();
        assert!(!report.pass);
        assert!(!report.orbit_vanishes.within_tolerance && !report.orbit_vanishes.tail_nonincreasing);
        assert!(report.inverse_vanishes.holds());
        assert_eq!(report.right_inverse_holds.final_value, 0.0);
    }

    #[test]
    fn kitai_mode_matches_full_sequence() {
        let mut inst = rolewicz(c(2.0, 0.0), 40);
        inst.sequence = vec![3, 10, 20, 40];
        let full = kitai_mode(&inst).unwrap();
        assert_eq!(full.trace.len(), 41);
        assert_eq!(full, check_criterion(&rolewicz(c(2.0, 0.0), 40)).unwrap());
        assert_eq!(full.pass, check_criterion(&inst).unwrap().pass);
    }

    #[test]
    fn malformed_instances() {
        let mut inst = rolewicz(c(2.0, 0.0), 10);
        inst.right_inverse = OperatorSpec::doubling_backward_inverse();
        assert!(matches!(check_criterion(&inst), Err(CriterionError::MapDomainMismatch(_))));
        let mut inst = rolewicz(c(2.0, 0.0), 10);
        inst.y0 = vec![SeqVector::basis(Domain::Bilateral, 0)];
        assert!(matches!(check_criterion(&inst), Err(CriterionError::MapDomainMismatch(_))));
        let mut inst = rolewicz(c(2.0, 0.0), 10);
        inst.sequence = vec![1, 1, 2];
        assert!(matches!(check_criterion(&inst), Err(CriterionError::InvalidInstance(_))));
        inst.sequence = vec![];
        assert!(matches!(kitai_mode(&inst), Err(CriterionError::InvalidInstance(_))));
    }

    #[test]
    fn increasing_tail_is_never_accepted() {
        // r2 grows by a factor 1.01 per step but stays tiny in absolute terms
        let one = vec![SeqVector::scalar(c(1e-12, 0.0))];
        let inst = CriterionInstance {
            operator: OperatorSpec::ScalarOnC { c: c(1.0 / 1.01, 0.0) },
            x0: vec![SeqVector::scalar(c(0.0, 0.0))],
            y0: one,
            right_inverse: OperatorSpec::ScalarOnC { c: c(1.01, 0.0) },
            sequence: (0..=20).collect(),
            tolerance: 1e-9,
        };
        let report = check_criterion(&inst).unwrap();
        assert!(report.inverse_vanishes.within_tolerance);
        assert!(!report.pass);
    }

    proptest! {
        #[test]
        fn rolewicz_right_inverse_is_exact(
            re in -4.0f64..4.0,
            im in -4.0f64..4.0,
            coords in proptest::collection::vec((0i64..12, -8i32..8, -8i32..8), 1..5),
        ) {
            let lambda = c(re, im);
            prop_assume!(lambda.norm() > 1.0);
            let y = SeqVector::from_entries(
                Domain::Unilateral,
                coords.iter().map(|&(j, a, b)| (j, c(a as f64, b as f64 / 3.0))),
            ).unwrap();
            prop_assume!(!y.is_zero());
            let inst = CriterionInstance { y0: vec![y], ..rolewicz(lambda, 25) };
            let report = check_criterion(&inst).unwrap();
            // lambda^n lambda^{-n} is not exactly 1 in floating point; within rounding of ||y||
            for step in &report.trace {
                prop_assert!(step.r3 <= 1e-13 * inst.y0[0].norm() * (step.n as f64 + 1.0));
            }
        }

        #[test]
        fn pass_is_monotone_in_tolerance(l in 1.01f64..3.0, k in 6u64..30, tol in 1e-12f64..1e-3, extra in 0.0f64..1.0) {
            let mut inst = rolewicz(c(l, 0.0), k);
            inst.tolerance = tol;
            let tight = check_criterion(&inst).unwrap().pass;
            inst.tolerance = tol + extra;
            let loose = check_criterion(&inst).unwrap().pass;
            prop_assert!(!tight || loose);
        }

        #[test]
        fn pass_implies_nonincreasing_tails(l in 0.5f64..3.0, k in 1u64..30) {
            let report = check_criterion(&rolewicz(c(l, 0.0), k)).unwrap();
            if report.pass {
                let n = report.trace.len();
                for w in report.trace[n.saturating_sub(TAIL_LENGTH)..].windows(2) {
                    prop_assert!(w[1].r1 <= w[0].r1 && w[1].r2 <= w[0].r2 && w[1].r3 <= w[0].r3);
                }
            }
        }
    }
}
