use gammalab_core::constructions::{build_backward_shift, TargetFamily};
use gammalab_core::criteria::CriterionInstance;
use gammalab_core::density::{d_dense_check, epsilon_density, generate_orbit, DensityParams, DensityVerdict};
use gammalab_core::gamma_sets::{AngleSpec, GammaGrid, ScalarSet};
use gammalab_core::homotopy::CircleCurve;
use gammalab_core::operators::{Domain, OperatorSpec, SeqVector};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(v: &T) {
    let text = serde_json::to_string(v).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, v, "{text}");
}

/// Build `x_20` along the positive ray, then scan its scaled orbit on the first coordinate.
#[test]
fn backward_shift_orbit_fills_the_half_disk_scan() {
    let targets = TargetFamily::dense_default(Domain::Unilateral, 21);
    let trace = build_backward_shift(&ScalarSet::ray(0.0), &targets, 20).unwrap();
    assert!(trace.all_conditions_hold() && trace.all_residuals_within_bound());

    let grid = GammaGrid { size: 4000, log2_radius_min: -8.0, log2_radius_max: 264.0 };
    let cloud =
        generate_orbit(&OperatorSpec::BackwardShift, &trace.partial_sum, &ScalarSet::ray(0.0), 20, &grid).unwrap();
    let scan = |epsilon| {
        let p = DensityParams { section: vec![0], center: vec![c(0.0, 0.0)], radius: 0.5, epsilon, grid_step: 0.05 };
        epsilon_density(&cloud, &p).unwrap()
    };
    // the first 21 targets point in 13 directions with gaps of pi/4, so the
    // projected rays leave points up to 0.5 sin(pi/8) ~ 0.19 away
    let loose = scan(0.2);
    assert_eq!(loose.verdict, DensityVerdict::CoveredAtEps);
    let tight = scan(0.1);
    assert_ne!(tight.verdict, DensityVerdict::CoveredAtEps);
    assert!(tight.covered_fraction > 0.8 && tight.covered_fraction < 1.0);

    let centers: Vec<Vec<Complex64>> =
        [(0.0, 0.0), (0.3, 0.3), (-0.3, 0.2), (0.0, -0.4)].iter().map(|&(a, b)| vec![c(a, b)]).collect();
    assert!(d_dense_check(&cloud, &[0], 0.2, &centers).all_met);
}

#[test]
fn model_types_round_trip_through_json() {
    round_trip(&ScalarSet::union(vec![
        ScalarSet::Sector { radius_lo: 0.5, radius_hi: None, angle_lo: 0.0, angle_hi: 1.0 },
        ScalarSet::LogSpiral { base: 2.0, rate: AngleSpec::irrational(1.0, "one radian").unwrap() },
        ScalarSet::Scaled { factor: c(0.0, 5.0), inner: Box::new(ScalarSet::unit_circle()) },
        ScalarSet::Geometric { start: c(1.0, 0.0), ratio: c(0.5, 0.0) },
    ]));
    round_trip(&AngleSpec::rational_pi(3, 4).unwrap());
    round_trip(&OperatorSpec::DirectSum {
        blocks: vec![
            OperatorSpec::doubling_backward(),
            OperatorSpec::scalar_multiple(c(2.0, 0.0), OperatorSpec::BackwardShift),
        ],
    });
    round_trip(&CircleCurve::Concat {
        parts: vec![CircleCurve::unit_circle(12), CircleCurve::AnalyticPhiSegment { b: 2.0, from: 2.0, to: 1.0 }],
    });
    round_trip(&CriterionInstance {
        operator: OperatorSpec::BackwardShift,
        x0: vec![SeqVector::basis(Domain::Unilateral, 2)],
        y0: vec![SeqVector::from_entries(Domain::Unilateral, [(0, c(1.0, -0.25))]).unwrap()],
        right_inverse: OperatorSpec::ForwardShift,
        sequence: vec![1, 2, 4],
        tolerance: 1e-9,
    });
    round_trip(&TargetFamily::dense_default(Domain::Bilateral, 7));
}

#[test]
fn reduced_angles_are_canonical() {
    let a: AngleSpec = serde_json::from_str(r#"{"pi_rational":[2,4]}"#).unwrap();
    assert_eq!(a, AngleSpec::rational_pi(1, 2).unwrap());
    assert!(serde_json::from_str::<AngleSpec>(r#"{"pi_rational":[1,0]}"#).is_err());
}
