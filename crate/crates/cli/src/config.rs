//! Run configurations, one JSON object per command, tagged by `"command"`.

use gammalab_core::constructions::TargetFamily;
use gammalab_core::criteria::CriterionInstance;
use gammalab_core::gamma_sets::{AngleSpec, GammaGrid, ScalarSet};
use gammalab_core::homotopy::CircleCurve;
use gammalab_core::operators::{Domain, OperatorSpec, SeqVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Classify(ClassifyConfig),
    Build21(BuildConfig),
    Build22(BuildConfig),
    Spiral(SpiralConfig),
    Density(DensityConfig),
    Criterion(CriterionConfig),
    Winding(WindingConfig),
    LambdaEst(LambdaConfig),
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            RunConfig::Classify(_) => "classify",
            RunConfig::Build21(_) => "build21",
            RunConfig::Build22(_) => "build22",
            RunConfig::Spiral(_) => "spiral",
            RunConfig::Density(_) => "density",
            RunConfig::Criterion(_) => "criterion",
            RunConfig::Winding(_) => "winding",
            RunConfig::LambdaEst(_) => "lambda-est",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub gamma: ScalarSet,
    /// When present, the report also covers `Gamma G_theta` and its density in `C`.
    #[serde(default)]
    pub theta: Option<AngleSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    /// The first `stages + 1` vectors of the default dyadic enumeration.
    DenseDefault,
    Explicit(Vec<SeqVector>),
}

impl TargetSource {
    pub fn resolve(&self, domain: Domain, count: usize) -> Result<TargetFamily, String> {
        match self {
            TargetSource::DenseDefault => Ok(TargetFamily::dense_default(domain, count)),
            TargetSource::Explicit(v) => TargetFamily::new(v.clone()).map_err(|e| e.to_string()),
        }
    }
}

fn dense_default() -> TargetSource {
    TargetSource::DenseDefault
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub gamma: ScalarSet,
    pub stages: usize,
    #[serde(default = "dense_default")]
    pub targets: TargetSource,
    /// Orbit horizon for the norm certificate; defaults to the support length
    /// of `x_K` for the backward shift and to 200 for the weighted shift.
    #[serde(default)]
    pub orbit_horizon: Option<u64>,
}

fn minus_one() -> Complex64 {
    Complex64::new(-1.0, 0.0)
}

fn default_s_range() -> [f64; 2] {
    [-20.0, 20.0]
}

fn default_s_step() -> f64 {
    1e-4
}

fn default_spiral_horizon() -> u64 {
    50
}

fn default_spiral_grid() -> GammaGrid {
    GammaGrid::new(100)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpiralConfig {
    pub r: f64,
    pub theta: AngleSpec,
    #[serde(default = "minus_one")]
    pub target: Complex64,
    #[serde(default = "default_s_range")]
    pub s_range: [f64; 2],
    #[serde(default = "default_s_step")]
    pub s_step: f64,
    /// Orbit cloud used for the density scan around the target.
    #[serde(default = "default_spiral_horizon")]
    pub orbit_horizon: u64,
    #[serde(default = "default_spiral_grid")]
    pub gamma_grid: GammaGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DDenseConfig {
    pub d: f64,
    pub centers: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub operator: OperatorSpec,
    pub vector: SeqVector,
    pub gamma: ScalarSet,
    pub horizon: u64,
    pub gamma_grid: GammaGrid,
    pub section: Vec<i64>,
    pub center: Vec<Complex64>,
    pub radius: f64,
    pub epsilon: f64,
    pub grid_step: f64,
    #[serde(default)]
    pub d_dense: Option<DDenseConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    pub instance: CriterionInstance,
    /// Replace the sequence by `0, 1, ..., n_K`.
    #[serde(default)]
    pub kitai: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default)]
    pub w: Option<i64>,
    pub n_list: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingConfig {
    pub curve: CircleCurve,
    /// Closed curves whose concatenation is checked for additivity of the index.
    #[serde(default)]
    pub additivity_parts: Option<Vec<CircleCurve>>,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
}

fn default_phase_grid() -> usize {
    360
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub operator: OperatorSpec,
    pub vector: SeqVector,
    pub n_values: Vec<u64>,
    pub horizon: u64,
    pub epsilon: f64,
    #[serde(default = "default_phase_grid")]
    pub phase_grid: usize,
}

/// Parses `re,im[,re,im...]:radius` into a ball center and radius.
pub fn parse_ball(s: &str) -> Result<(Vec<Complex64>, f64), String> {
    let (coords, radius) = s.split_once(':').ok_or("expected <re,im,...>:<radius>")?;
    let radius: f64 = radius.trim().parse().map_err(|_| format!("bad radius {radius:?}"))?;
    let nums = coords
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate {t:?}")))
        .collect::<Result<Vec<f64>, String>>()?;
    if nums.is_empty() || nums.len() % 2 != 0 {
        return Err("ball center needs an even number of real coordinates".into());
    }
    Ok((nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(), radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_flag() {
        let (c, r) = parse_ball("-1,0:0.25").unwrap();
        assert_eq!(c, vec![Complex64::new(-1.0, 0.0)]);
        assert_eq!(r, 0.25);
        assert_eq!(parse_ball("1,2,3,4:1").unwrap().0.len(), 2);
        assert!(parse_ball("1,2,3:1").is_err());
        assert!(parse_ball("1,2").is_err());
    }

    #[test]
    fn config_tags() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"command":"classify","gamma":{"kind":"annulus","inner":1.0,"outer":2.0}}"#)
                .unwrap();
        assert_eq!(cfg.command_name(), "classify");
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command":"build21","gamma":{"kind":"sector","radius_lo":0.0,"radius_hi":null,"angle_lo":0.0,"angle_hi":0.0},"stages":3}"#,
        )
        .unwrap();
        let RunConfig::Build21(b) = cfg else { panic!() };
        assert_eq!(b.targets, TargetSource::DenseDefault);
        let bad = serde_json::from_str::<RunConfig>(r#"{"command":"nope"}"#);
        assert!(bad.is_err());
        let typo = r#"{"command":"classify","gamma":{"kind":"circle","radius":1.0},"thetaa":null}"#;
        assert!(serde_json::from_str::<RunConfig>(typo).is_err());
    }
}
