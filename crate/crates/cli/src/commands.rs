//! One runner per subcommand. Each returns the serializable result and any CSV tables.

use gammalab_core::constructions::{
    build_backward_shift, build_spiral_scenario, build_weighted_shift, orbit_norm_extremes, spiral_distance_to,
    ConstructionError, ConstructionTrace, SpiralDistance, SpiralScenario,
};
use gammalab_core::criteria::{check_criterion, kitai_mode, CriterionError, CriterionReport};
use gammalab_core::density::{
    d_dense_check, epsilon_density, generate_orbit, lambda_set_estimate, DDenseResult, DensityError, DensityParams,
    DensityReport, LambdaEstimate,
};
use gammalab_core::gamma_sets::{
    classify, gamma_group_product, is_dense_in_plane, nonzero_modulus_set, AngleSpec, ClassificationResult, GammaGrid,
    GammaSetError, ModulusSet, ScalarSet,
};
use gammalab_core::homotopy::{
    concat_additivity_check, contradiction_audit, winding_number, AdditivityCheck, AuditReport, HomotopyError,
    WindingResult,
};
use gammalab_core::operators::{adjoint_point_spectrum, AdjointSpectrum, Domain, SeqVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::config::{
    BuildConfig, ClassifyConfig, CriterionConfig, DensityConfig, LambdaConfig, SpiralConfig, WindingConfig,
};
use crate::report::sci;

#[derive(Debug, Error)]
pub enum CliError {
    /// A documented precondition of a core operation, or of the configuration, failed.
    #[error("{0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn pre<E: std::fmt::Display>(op: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Precondition(format!("{op}: {e}"))
}

pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Output {
    pub result: serde_json::Value,
    pub tables: Vec<Table>,
}

fn output<T: Serialize>(result: &T, tables: Vec<Table>) -> Result<Output, CliError> {
    let result = serde_json::to_value(result).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Output { result, tables })
}

#[derive(Debug, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum PlaneDensity {
    Dense,
    NotDense,
    Undecidable { reason: String },
}

fn plane_density(g: &ScalarSet) -> Result<PlaneDensity, GammaSetError> {
    match is_dense_in_plane(g) {
        Ok(true) => Ok(PlaneDensity::Dense),
        Ok(false) => Ok(PlaneDensity::NotDense),
        Err(GammaSetError::Undecidable(reason)) => Ok(PlaneDensity::Undecidable { reason }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Serialize)]
struct GroupProduct {
    theta: AngleSpec,
    group_order: Option<u64>,
    product: ScalarSet,
    dense_in_plane: PlaneDensity,
}

#[derive(Debug, Serialize)]
struct ClassifyResult {
    classification: ClassificationResult,
    nonzero_moduli: ModulusSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    group_product: Option<GroupProduct>,
}

pub fn run_classify(cfg: &ClassifyConfig) -> Result<Output, CliError> {
    let classification = classify(&cfg.gamma).map_err(pre("classify"))?;
    let group_product = match &cfg.theta {
        None => None,
        Some(theta) => {
            let product = gamma_group_product(&cfg.gamma, theta);
            let dense_in_plane = plane_density(&product).map_err(pre("plane density"))?;
            Some(GroupProduct { theta: theta.clone(), group_order: theta.group_order(), product, dense_in_plane })
        }
    };
    let res = ClassifyResult { classification, nonzero_moduli: nonzero_modulus_set(&cfg.gamma), group_product };
    output(&res, vec![])
}

#[derive(Debug, Serialize)]
struct OrbitCertificate {
    horizon: u64,
    sup_orbit_norm: f64,
    inf_orbit_norm: f64,
    partial_sum_norm: f64,
}

#[derive(Debug, Serialize)]
struct BuildResult {
    all_conditions_hold: bool,
    all_residuals_within_bound: bool,
    certificate: OrbitCertificate,
    trace: ConstructionTrace,
}

fn trace_table(file: &str, trace: &ConstructionTrace) -> Table {
    let rows = trace
        .choices
        .iter()
        .zip(&trace.residuals)
        .map(|(c, r)| {
            vec![
                c.k.to_string(),
                c.gamma_modulus.clone(),
                sci(c.log2_gamma_modulus),
                c.m.to_string(),
                sci(r.residual),
                sci(r.log2_residual),
            ]
        })
        .collect();
    Table {
        file: file.to_string(),
        header: vec!["k", "gamma_modulus", "log2_gamma_modulus", "m", "residual", "log2_residual"],
        rows,
    }
}

fn run_build(
    cfg: &BuildConfig,
    op: &'static str,
    domain: Domain,
    build: fn(
        &ScalarSet,
        &gammalab_core::constructions::TargetFamily,
        usize,
    ) -> Result<ConstructionTrace, ConstructionError>,
    default_horizon: fn(&ConstructionTrace) -> u64,
) -> Result<Output, CliError> {
    let targets = cfg.targets.resolve(domain, cfg.stages + 1).map_err(pre(op))?;
    let trace = build(&cfg.gamma, &targets, cfg.stages).map_err(pre(op))?;
    let horizon = cfg.orbit_horizon.unwrap_or_else(|| default_horizon(&trace));
    let (sup, inf) = orbit_norm_extremes(&trace.operator, &trace.partial_sum_wide, horizon).map_err(pre(op))?;
    let res = BuildResult {
        all_conditions_hold: trace.all_conditions_hold(),
        all_residuals_within_bound: trace.all_residuals_within_bound(),
        certificate: OrbitCertificate {
            horizon,
            sup_orbit_norm: sup,
            inf_orbit_norm: inf,
            partial_sum_norm: trace.partial_sum_norm,
        },
        trace,
    };
    let table = trace_table(&format!("{op}_trace.csv"), &res.trace);
    output(&res, vec![table])
}

pub fn run_build21(cfg: &BuildConfig) -> Result<Output, CliError> {
    // Past the last support index the backward-shift orbit is zero.
    run_build(cfg, "build21", Domain::Unilateral, build_backward_shift, |t| {
        t.partial_sum.max_index().map_or(0, |i| i as u64 + 1)
    })
}

pub fn run_build22(cfg: &BuildConfig) -> Result<Output, CliError> {
    run_build(cfg, "build22", Domain::Bilateral, build_weighted_shift, |_| 200)
}

#[derive(Debug, Serialize)]
struct SpiralResult {
    scenario: SpiralScenario,
    group_product: ScalarSet,
    group_product_dense: PlaneDensity,
    distance: SpiralDistance,
    adjoint_point_spectrum: AdjointSpectrum,
    /// Scan of the ball of radius `distance / 2` around the target at `epsilon = distance / 2`.
    target_ball_scan: DensityReport,
}

pub fn run_spiral(cfg: &SpiralConfig) -> Result<Output, CliError> {
    let scenario = build_spiral_scenario(cfg.r, cfg.theta.clone()).map_err(pre("spiral"))?;
    let group_product = gamma_group_product(&scenario.gamma, &cfg.theta);
    let group_product_dense = plane_density(&group_product).map_err(pre("plane density"))?;
    let distance = spiral_distance_to(&scenario, cfg.target, cfg.s_range[0], cfg.s_range[1], cfg.s_step)
        .map_err(pre("spiral distance"))?;
    let cloud = generate_orbit(
        &scenario.operator,
        &SeqVector::scalar(Complex64::new(1.0, 0.0)),
        &scenario.gamma,
        cfg.orbit_horizon,
        &cfg.gamma_grid,
    )
    .map_err(pre("orbit"))?;
    let half = distance.distance / 2.0;
    let params = DensityParams {
        section: vec![0],
        center: vec![cfg.target],
        radius: half,
        epsilon: half,
        grid_step: half / 4.0,
    };
    let target_ball_scan = epsilon_density(&cloud, &params).map_err(pre("density scan"))?;
    let res = SpiralResult {
        adjoint_point_spectrum: adjoint_point_spectrum(&scenario.operator),
        scenario,
        group_product,
        group_product_dense,
        distance,
        target_ball_scan,
    };
    output(&res, vec![])
}

#[derive(Debug, Serialize)]
struct DensityResult {
    sample_count: usize,
    report: DensityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_dense: Option<DDenseResult>,
}

pub fn run_density(cfg: &DensityConfig) -> Result<Output, CliError> {
    let f = pre::<DensityError>("density");
    let cloud = generate_orbit(&cfg.operator, &cfg.vector, &cfg.gamma, cfg.horizon, &cfg.gamma_grid).map_err(&f)?;
    let params = DensityParams {
        section: cfg.section.clone(),
        center: cfg.center.clone(),
        radius: cfg.radius,
        epsilon: cfg.epsilon,
        grid_step: cfg.grid_step,
    };
    let report = epsilon_density(&cloud, &params).map_err(&f)?;
    let d_dense = cfg.d_dense.as_ref().map(|d| d_dense_check(&cloud, &cfg.section, d.d, &d.centers));
    let dims = 2 * cfg.section.len();
    let mut header: Vec<&'static str> = Vec::with_capacity(dims + 2);
    const COORDS: [&str; 8] = ["x0", "x1", "x2", "x3", "x4", "x5", "x6", "x7"];
    if dims > COORDS.len() {
        return Err(CliError::Precondition("density: heat map supports at most 4 section coordinates".into()));
    }
    header.extend_from_slice(&COORDS[..dims]);
    header.extend(["distance", "covered"]);
    let rows = report
        .heat_map
        .iter()
        .map(|g| {
            let mut row: Vec<String> = g.point.iter().map(|&v| sci(v)).collect();
            row.push(sci(g.distance));
            row.push((g.distance <= cfg.epsilon).to_string());
            row
        })
        .collect();
    let res = DensityResult { sample_count: cloud.samples.len(), report, d_dense };
    output(&res, vec![Table { file: "density_heatmap.csv".into(), header, rows }])
}

pub fn run_criterion(cfg: &CriterionConfig) -> Result<Output, CliError> {
    let f = pre::<CriterionError>("criterion");
    let report: CriterionReport =
        if cfg.kitai { kitai_mode(&cfg.instance) } else { check_criterion(&cfg.instance) }.map_err(f)?;
    let rows = report.trace.iter().map(|s| vec![s.n.to_string(), sci(s.r1), sci(s.r2), sci(s.r3)]).collect();
    let table = Table { file: "criterion_residuals.csv".into(), header: vec!["n", "r1", "r2", "r3"], rows };
    output(&report, vec![table])
}

#[derive(Debug, Serialize)]
struct WindingOutput {
    #[serde(flatten)]
    winding: WindingResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    additivity: Option<AdditivityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<AuditReport>,
}

pub fn run_winding(cfg: &WindingConfig) -> Result<Output, CliError> {
    let f = pre::<HomotopyError>("winding");
    let winding = winding_number(&cfg.curve).map_err(&f)?;
    let additivity = cfg.additivity_parts.as_ref().map(|p| concat_additivity_check(p)).transpose().map_err(&f)?;
    let audit = cfg.audit.as_ref().map(|a| contradiction_audit(a.w, &a.n_list)).transpose().map_err(&f)?;
    output(&WindingOutput { winding, additivity, audit }, vec![])
}

pub fn run_lambda(cfg: &LambdaConfig) -> Result<Output, CliError> {
    let f = pre::<DensityError>("lambda-est");
    if cfg.n_values.is_empty() {
        return Err(CliError::Precondition("lambda-est: n_values must not be empty".into()));
    }
    let unit = ScalarSet::FinitePoints { points: vec![Complex64::new(1.0, 0.0)] };
    let cloud = generate_orbit(&cfg.operator, &cfg.vector, &unit, cfg.horizon, &GammaGrid::new(1)).map_err(&f)?;
    let estimates = cfg
        .n_values
        .iter()
        .map(|&n| lambda_set_estimate(&cfg.operator, &cfg.vector, n, &cloud, cfg.epsilon, cfg.phase_grid))
        .collect::<Result<Vec<LambdaEstimate>, _>>()
        .map_err(&f)?;
    let rows = estimates
        .iter()
        .flat_map(|e| {
            e.detected
                .iter()
                .map(move |h| vec![e.n.to_string(), sci(h.lambda), h.m.to_string(), sci(h.phase), sci(h.residual)])
        })
        .collect();
    let table = Table { file: "lambda_est.csv".into(), header: vec!["n", "lambda", "m", "phase", "residual"], rows };
    output(&estimates, vec![table])
}
