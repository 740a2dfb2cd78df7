//! Experiment configuration: TOML files with `--set key=value` overrides.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eig::LanczosOptions;
use crate::error::{Error, Result};
use crate::fields::{PotentialSpec, ScalarSpec};
use crate::identities::SpinorSpec;
use crate::sectors::{MIN_NODES, MIN_RHO_MAX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Verify,
    Spectrum2d,
    Sectors,
    Weyl,
    Gauge,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Verify,
        Experiment::Spectrum2d,
        Experiment::Sectors,
        Experiment::Weyl,
        Experiment::Gauge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Spectrum2d => "spectrum2d",
            Experiment::Sectors => "sectors",
            Experiment::Weyl => "weyl",
            Experiment::Gauge => "gauge",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| cfg_err("experiment", format!("unknown experiment `{s}`")))
    }
}

fn cfg_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub potential: PotentialSpec,
    pub mass: ScalarSpec,
    pub electric: ScalarSpec,
    pub solver: SolverConfig,
    pub verify: VerifyConfig,
    pub spectrum2d: Spectrum2dConfig,
    pub sectors: SectorsConfig,
    pub weyl: WeylConfig,
    pub gauge: GaugeConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: crate::eig::DEFAULT_SEED,
            potential: PotentialSpec::Zero,
            mass: ScalarSpec::Zero,
            electric: ScalarSpec::Zero,
            solver: SolverConfig::default(),
            verify: VerifyConfig::default(),
            spectrum2d: Spectrum2dConfig::default(),
            sectors: SectorsConfig::default(),
            weyl: WeylConfig::default(),
            gauge: GaugeConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub k: usize,
    pub tol: f64,
    pub block: usize,
    pub filter_degree: usize,
    pub max_matvecs: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 5,
            tol: 1e-8,
            block: 4,
            filter_degree: 0,
            max_matvecs: 0,
        }
    }
}

impl SolverConfig {
    pub fn lanczos_options(&self, seed: u64) -> LanczosOptions {
        LanczosOptions {
            block: self.block,
            max_basis: 0,
            max_matvecs: self.max_matvecs,
            filter_degree: self.filter_degree,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub center: [f64; 2],
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub potential: PotentialSpec,
    pub spinor: SpinorSpec,
    #[serde(rename = "box")]
    pub sample_box: BoxConfig,
    /// Overrides `verify.h` for this entry.
    #[serde(default)]
    pub h: Option<Vec<f64>>,
    /// Samples closer than this to the origin are redrawn.
    #[serde(default = "default_exclusion")]
    pub exclusion_radius: f64,
}

fn default_exclusion() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub order: u32,
    pub h: Vec<f64>,
    pub samples: usize,
    pub diamagnetic_samples: usize,
    pub diamagnetic_h: f64,
    pub masses: Vec<ScalarSpec>,
    pub corpus: Vec<CorpusEntry>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let gauss = SpinorSpec::Gaussian {
            width: 1.0,
            center: [0.0, 0.0],
            spin: [1.0, 0.0, 0.0, 1.0],
        };
        let potentials = [
            ("zero", PotentialSpec::Zero),
            ("constant", PotentialSpec::Constant { b: 1.0 }),
            ("miller-simon", PotentialSpec::MillerSimon { gamma: 0.5 }),
        ];
        let mut corpus = Vec::new();
        for (pname, p) in potentials {
            for (sname, s) in [("gaussian", gauss.clone()), ("vortex", SpinorSpec::Vortex)] {
                corpus.push(CorpusEntry {
                    name: format!("{pname}/{sname}"),
                    potential: p.clone(),
                    spinor: s,
                    sample_box: BoxConfig {
                        center: [0.0, 0.0],
                        half_width: 2.0,
                    },
                    h: None,
                    exclusion_radius: default_exclusion(),
                });
            }
        }
        VerifyConfig {
            order: 4,
            h: vec![0.1, 0.05, 0.025],
            samples: 12,
            diamagnetic_samples: 200,
            diamagnetic_h: 0.01,
            masses: vec![
                ScalarSpec::Confining {
                    power: 1.0,
                    scale: 1.0,
                },
                ScalarSpec::Constant { value: 1.0 },
            ],
            corpus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spectrum2dConfig {
    /// Smaller half-width `L`; the run also uses `2L`.
    pub half_width: f64,
    pub h: f64,
    /// Allowed relative change of the lowest `K` values between `L` and `2L`.
    pub stability: f64,
    /// Required relative drop of the lowest value without mass.
    pub collapse: f64,
    /// Nodes per side of the grid used for the dense `±` pairing check.
    pub symmetry_n: usize,
    pub symmetry_half_width: f64,
    pub condition_radii: Vec<f64>,
    pub condition_epsilon: f64,
}

impl Default for Spectrum2dConfig {
    fn default() -> Self {
        Spectrum2dConfig {
            half_width: 12.0,
            h: 0.5,
            stability: 0.02,
            collapse: 0.6,
            symmetry_n: 16,
            symmetry_half_width: 4.0,
            condition_radii: vec![10.0, 20.0, 40.0, 80.0],
            condition_epsilon: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub enabled: bool,
    pub n_per_side: usize,
    pub half_width: f64,
    pub m_max: u32,
    pub k: usize,
    pub count: usize,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enabled: false,
            n_per_side: 64,
            half_width: 10.0,
            m_max: 8,
            k: 8,
            count: 10,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorsConfig {
    pub rho_max: f64,
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub m_sweep: Vec<u32>,
    /// Optional upper bound on the max gap at the largest `M`.
    pub max_gap_bound: Option<f64>,
    pub oracle: OracleConfig,
}

impl Default for SectorsConfig {
    fn default() -> Self {
        SectorsConfig {
            rho_max: 40.0,
            n: 2000,
            k: 20,
            lambda: 1.0,
            m_sweep: vec![10, 20, 40],
            max_gap_bound: None,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylConfig {
    /// Target values `|k|^2`; `k` points along the first axis.
    pub lambdas: Vec<f64>,
    pub ns: Vec<usize>,
    pub h: f64,
    /// Constant spinor as `[re1, im1, re2, im2]`, normalized on use.
    pub spin: [f64; 4],
    /// Free-case fit check `r(n) ~ c / sqrt(n)` within this factor.
    pub fit_factor: f64,
}

impl Default for WeylConfig {
    fn default() -> Self {
        WeylConfig {
            lambdas: vec![0.0, 0.25, 1.0, 2.25],
            ns: vec![4, 8, 16],
            h: 0.25,
            spin: [1.0, 0.0, 0.0, 0.0],
            fit_factor: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeConfig {
    /// Quadrature steps for the reconstruction table.
    pub steps: Vec<f64>,
    pub boxes: Vec<BoxConfig>,
    pub samples: usize,
    /// Grid of the exact-difference covariance check.
    pub covariance_n: usize,
    pub covariance_half_width: f64,
    pub covariance_tolerance: f64,
    /// Ball scales `n` for the sup-norm decay table.
    pub ns: Vec<usize>,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig {
            steps: vec![0.2, 0.1, 0.05],
            boxes: vec![
                BoxConfig {
                    center: [0.0, 0.0],
                    half_width: 2.0,
                },
                BoxConfig {
                    center: [12.0, 0.0],
                    half_width: 4.0,
                },
            ],
            samples: 64,
            covariance_n: 16,
            covariance_half_width: 4.0,
            covariance_tolerance: 1e-10,
            ns: vec![1, 2, 4, 8, 16],
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML file and applies `key=value` overrides (dotted keys).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(&path.display().to_string(), format!("cannot read: {e}")))?;
        if path.extension().is_some_and(|e| e == "json") {
            return Self::from_report_json(&text, overrides);
        }
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| cfg_err("<file>", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| cfg_err("<config>", e.message().to_string()))?;
        Ok(cfg)
    }

    /// Takes the embedded `config` of a previously written `report.json`.
    pub fn from_report_json(text: &str, overrides: &[String]) -> Result<Self> {
        #[derive(Deserialize)]
        struct Embedded {
            config: ExperimentConfig,
        }
        let e: Embedded =
            serde_json::from_str(text).map_err(|e| cfg_err("config", e.to_string()))?;
        Self::from_toml(&e.config.to_toml(), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Checks every parameter used by `exp` against the module preconditions.
    pub fn validate(&self, exp: Experiment) -> Result<()> {
        if let Some(e) = self.experiment {
            if e != exp {
                return Err(cfg_err(
                    "experiment",
                    format!("config is for `{}`, invoked as `{}`", e.name(), exp.name()),
                ));
            }
        }
        validate_potential(&self.potential, "potential")?;
        validate_scalar(&self.mass, "mass")?;
        validate_scalar(&self.electric, "electric")?;
        let s = &self.solver;
        positive(s.tol, "solver.tol")?;
        at_least(s.k, 1, "solver.k")?;
        at_least(s.block, 1, "solver.block")?;
        match exp {
            Experiment::Verify => self.validate_verify(),
            Experiment::Spectrum2d => self.validate_spectrum2d(),
            Experiment::Sectors => self.validate_sectors(),
            Experiment::Weyl => self.validate_weyl(),
            Experiment::Gauge => self.validate_gauge(),
        }
    }

    fn validate_verify(&self) -> Result<()> {
        let v = &self.verify;
        if v.order != 2 && v.order != 4 {
            return Err(cfg_err("verify.order", "stencil order must be 2 or 4"));
        }
        validate_h_sequence(&v.h, "verify.h")?;
        at_least(v.samples, 1, "verify.samples")?;
        positive(v.diamagnetic_h, "verify.diamagnetic_h")?;
        for (i, m) in v.masses.iter().enumerate() {
            validate_scalar(m, &format!("verify.masses[{i}]"))?;
        }
        if v.corpus.is_empty() {
            return Err(cfg_err("verify.corpus", "corpus is empty"));
        }
        for (i, e) in v.corpus.iter().enumerate() {
            let at = |f: &str| format!("verify.corpus[{i}].{f}");
            validate_potential(&e.potential, &at("potential"))?;
            positive(e.sample_box.half_width, &at("box.half_width"))?;
            if let Some(h) = &e.h {
                validate_h_sequence(h, &at("h"))?;
            }
            if !(e.exclusion_radius >= 0.0 && e.exclusion_radius < e.sample_box.half_width) {
                return Err(cfg_err(
                    &at("exclusion_radius"),
                    "must lie in [0, half_width)",
                ));
            }
            e.spinor
                .build()
                .map_err(|err| cfg_err(&at("spinor"), err.to_string()))?;
        }
        Ok(())
    }

    fn validate_spectrum2d(&self) -> Result<()> {
        let c = &self.spectrum2d;
        positive(c.half_width, "spectrum2d.half_width")?;
        positive(c.h, "spectrum2d.h")?;
        if c.h > c.half_width / 4.0 {
            return Err(cfg_err("spectrum2d.h", "need at least 8 nodes per side"));
        }
        positive(c.stability, "spectrum2d.stability")?;
        if !(c.collapse > 0.0 && c.collapse < 1.0) {
            return Err(cfg_err("spectrum2d.collapse", "must lie in (0, 1)"));
        }
        at_least(c.symmetry_n, 8, "spectrum2d.symmetry_n")?;
        if 2 * c.symmetry_n * c.symmetry_n > crate::eig::DENSE_DIM_CAP {
            return Err(cfg_err(
                "spectrum2d.symmetry_n",
                "dense pairing check exceeds the dense dimension cap",
            ));
        }
        positive(c.symmetry_half_width, "spectrum2d.symmetry_half_width")?;
        if c.condition_radii.is_empty() || c.condition_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(cfg_err("spectrum2d.condition_radii", "need positive radii"));
        }
        if !(c.condition_epsilon > 0.0 && c.condition_epsilon < 1.0) {
            return Err(cfg_err(
                "spectrum2d.condition_epsilon",
                "must lie in (0, 1)",
            ));
        }
        Ok(())
    }

    fn validate_sectors(&self) -> Result<()> {
        if !matches!(self.potential, PotentialSpec::MillerSimon { .. }) {
            return Err(cfg_err(
                "potential.family",
                "sector reduction needs the rotation-invariant miller-simon family",
            ));
        }
        let c = &self.sectors;
        if !(c.rho_max >= MIN_RHO_MAX) {
            return Err(cfg_err(
                "sectors.rho_max",
                format!("must be at least {MIN_RHO_MAX}"),
            ));
        }
        at_least(c.n, MIN_NODES, "sectors.n")?;
        at_least(c.k, 1, "sectors.k")?;
        positive(c.lambda, "sectors.lambda")?;
        if c.m_sweep.is_empty() {
            return Err(cfg_err("sectors.m_sweep", "must list at least one M"));
        }
        let o = &c.oracle;
        if o.enabled {
            at_least(o.n_per_side, 8, "sectors.oracle.n_per_side")?;
            positive(o.half_width, "sectors.oracle.half_width")?;
            at_least(o.k, 1, "sectors.oracle.k")?;
            at_least(o.count, 1, "sectors.oracle.count")?;
            positive(o.tolerance, "sectors.oracle.tolerance")?;
            if 16 * o.count > 2 * o.n_per_side * o.n_per_side {
                return Err(cfg_err(
                    "sectors.oracle.count",
                    "4·count exceeds a quarter of the lattice dimension",
                ));
            }
        }
        Ok(())
    }

    fn validate_weyl(&self) -> Result<()> {
        let c = &self.weyl;
        if c.lambdas.is_empty() || c.lambdas.iter().any(|l| !(*l >= 0.0)) {
            return Err(cfg_err("weyl.lambdas", "need nonnegative targets"));
        }
        if c.ns.len() < 2 || c.ns.contains(&0) || c.ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg_err(
                "weyl.ns",
                "need at least two strictly increasing positive scales",
            ));
        }
        positive(c.h, "weyl.h")?;
        if c.h > 0.5 {
            return Err(cfg_err(
                "weyl.h",
                "spacing above 0.5 leaves the smallest cutoff annulus with too few nodes",
            ));
        }
        let s = c.spin;
        if !(s.iter().map(|x| x * x).sum::<f64>() > 0.0) {
            return Err(cfg_err("weyl.spin", "must be nonzero"));
        }
        positive(c.fit_factor, "weyl.fit_factor")?;
        if !matches!(
            self.potential,
            PotentialSpec::MillerSimon { .. } | PotentialSpec::Zero
        ) {
            return Err(cfg_err(
                "potential.family",
                "quasimode experiment supports miller-simon or zero",
            ));
        }
        Ok(())
    }

    fn validate_gauge(&self) -> Result<()> {
        let c = &self.gauge;
        if c.steps.is_empty() || c.steps.iter().any(|s| !(*s > 0.0)) {
            return Err(cfg_err("gauge.steps", "need positive quadrature steps"));
        }
        for (i, b) in c.boxes.iter().enumerate() {
            positive(b.half_width, &format!("gauge.boxes[{i}].half_width"))?;
            if c.steps.iter().any(|s| *s > b.half_width / 8.0) {
                return Err(cfg_err(
                    "gauge.steps",
                    format!("every step must be at most half_width/8 of box {i}"),
                ));
            }
        }
        at_least(c.samples, 1, "gauge.samples")?;
        at_least(c.covariance_n, 8, "gauge.covariance_n")?;
        positive(c.covariance_half_width, "gauge.covariance_half_width")?;
        positive(c.covariance_tolerance, "gauge.covariance_tolerance")?;
        if c.ns.contains(&0) {
            return Err(cfg_err("gauge.ns", "ball scales must be positive"));
        }
        Ok(())
    }
}

fn positive(v: f64, path: &str) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(cfg_err(
            path,
            format!("must be positive and finite, got {v}"),
        ));
    }
    Ok(())
}

fn at_least(v: usize, min: usize, path: &str) -> Result<()> {
    if v < min {
        return Err(cfg_err(path, format!("must be at least {min}, got {v}")));
    }
    Ok(())
}

fn validate_h_sequence(h: &[f64], path: &str) -> Result<()> {
    if h.len() < 3 {
        return Err(cfg_err(path, "need at least three steps"));
    }
    if h.iter().any(|x| !(*x > 0.0)) || h.windows(2).any(|w| w[1] > 0.505 * w[0]) {
        return Err(cfg_err(
            path,
            "steps must be positive and at least halve each time",
        ));
    }
    Ok(())
}

fn validate_potential(p: &PotentialSpec, path: &str) -> Result<()> {
    if let PotentialSpec::MillerSimon { gamma } = p {
        if !(*gamma > 0.0 && *gamma < 1.0) {
            return Err(cfg_err(
                &format!("{path}.gamma"),
                format!(
                    "gamma = {gamma} is outside (0, 1), the range with dense pure point spectrum"
                ),
            ));
        }
    }
    p.build()
        .map(|_| ())
        .map_err(|e| cfg_err(path, e.to_string()))
}

fn validate_scalar(s: &ScalarSpec, path: &str) -> Result<()> {
    s.build(crate::fields::ScalarRole::Mass)
        .map(|_| ())
        .map_err(|e| cfg_err(path, e.to_string()))
}

/// Applies `a.b.c=value`. The value is parsed as a TOML literal, falling
/// back to a bare string.
pub fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| cfg_err(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(cfg_err(assignment, "empty key"));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| cfg_err(&parts[..i].join("."), "is not a table"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    unreachable!("split yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        for e in Experiment::ALL {
            if e != Experiment::Sectors {
                c.validate(e).unwrap();
            }
        }
    }

    #[test]
    fn families_parse() {
        let c = ExperimentConfig::from_toml(
            r#"
            experiment = "sectors"
            [potential]
            family = "miller-simon"
            gamma = 0.5
            [mass]
            family = "confining"
            power = 1.0
            scale = 1.0
            "#,
            &[],
        )
        .unwrap();
        assert_eq!(c.potential, PotentialSpec::MillerSimon { gamma: 0.5 });
        assert_eq!(
            c.mass,
            ScalarSpec::Confining {
                power: 1.0,
                scale: 1.0
            }
        );
        c.validate(Experiment::Sectors).unwrap();
        assert!(c.validate(Experiment::Weyl).is_err());
    }

    #[test]
    fn overrides_apply_with_types() {
        let c = ExperimentConfig::from_toml(
            "[potential]\nfamily = \"constant\"\nb = 1.0\n",
            &[
                "potential.b=2.5".into(),
                "solver.k=7".into(),
                "sectors.m_sweep=[1, 2]".into(),
                "sectors.oracle.enabled=true".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.potential, PotentialSpec::Constant { b: 2.5 });
        assert_eq!(c.solver.k, 7);
        assert_eq!(c.sectors.m_sweep, vec![1, 2]);
        assert!(c.sectors.oracle.enabled);
        let c = ExperimentConfig::from_toml("", &["potential.family=zero".into()]).unwrap();
        assert_eq!(c.potential, PotentialSpec::Zero);
        assert!(ExperimentConfig::from_toml("", &["novalue".into()]).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let c = ExperimentConfig::from_toml(
            "[potential]\nfamily = \"miller-simon\"\ngamma = 1.5\n",
            &[],
        )
        .unwrap();
        match c.validate(Experiment::Sectors) {
            Err(Error::Config { path, reason }) => {
                assert_eq!(path, "potential.gamma");
                assert!(reason.contains("(0, 1)"));
            }
            other => panic!("{other:?}"),
        }
        let c = ExperimentConfig::from_toml("", &["verify.h=[0.1, 0.07, 0.05]".into()]).unwrap();
        assert!(
            matches!(c.validate(Experiment::Verify), Err(Error::Config { path, .. }) if path == "verify.h")
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_toml("bogus = 1", &[]).is_err());
        assert!(ExperimentConfig::from_toml("[solver]\nkk = 1", &[]).is_err());
        assert!("spectrum3d".parse::<Experiment>().is_err());
    }

    #[test]
    fn mismatched_experiment_rejected() {
        let c = ExperimentConfig::from_toml("experiment = \"weyl\"", &[]).unwrap();
        assert!(c.validate(Experiment::Gauge).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&c.to_toml(), &[]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn corpus_entries_parse() {
        let c = ExperimentConfig::from_toml(
            r#"
            [[verify.corpus]]
            name = "ms/gauss"
            potential = { family = "miller-simon", gamma = 0.5 }
            spinor = { family = "gaussian", spin = [1.0, 0.0, 0.0, 0.0] }
            box = { center = [1.0, 0.0], half_width = 1.5 }
            h = [0.2, 0.1, 0.05]
            "#,
            &[],
        )
        .unwrap();
        assert_eq!(c.verify.corpus.len(), 1);
        assert_eq!(c.verify.corpus[0].exclusion_radius, 0.5);
        c.validate(Experiment::Verify).unwrap();
    }
}
