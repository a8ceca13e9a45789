//! Experiment specifications: the nine experiment families, their desk-scale
//! defaults, and the JSON config format (camelCase keys, unknown keys
//! rejected). Command-line flags override config-file values, which override
//! the per-experiment defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ergolab_core::grid::SchemeKind;
use ergolab_core::{CoreError, MapParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("run interrupted after computing {computed} new cells")]
    Interrupted { computed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    SrbDistance,
    IterateDistance,
    ShortTermVsPrediction,
    Injectivity,
    LocalPreimageDensity,
    SchemeComparison,
    AsymptoticMu,
    TimeToCycle,
    MinDistanceTime,
}

pub const ALL_EXPERIMENTS: [ExperimentId; 9] = [
    ExperimentId::SrbDistance,
    ExperimentId::IterateDistance,
    ExperimentId::ShortTermVsPrediction,
    ExperimentId::Injectivity,
    ExperimentId::LocalPreimageDensity,
    ExperimentId::SchemeComparison,
    ExperimentId::AsymptoticMu,
    ExperimentId::TimeToCycle,
    ExperimentId::MinDistanceTime,
];

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::SrbDistance => "srb-distance",
            ExperimentId::IterateDistance => "iterate-distance",
            ExperimentId::ShortTermVsPrediction => "short-term-vs-prediction",
            ExperimentId::Injectivity => "injectivity",
            ExperimentId::LocalPreimageDensity => "local-preimage-density",
            ExperimentId::SchemeComparison => "scheme-comparison",
            ExperimentId::AsymptoticMu => "asymptotic-mu",
            ExperimentId::TimeToCycle => "time-to-cycle",
            ExperimentId::MinDistanceTime => "min-distance-time",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_EXPERIMENTS
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ALL_EXPERIMENTS.iter().map(|e| e.name()).collect();
                HarnessError::InvalidSpec(format!(
                    "unknown experiment '{s}' (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Map parameters as they appear in config files.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapParamsSpec {
    pub c1: f64,
    pub c2: f64,
    pub shift: f64,
}

impl MapParamsSpec {
    pub fn build(&self) -> Result<MapParams, HarnessError> {
        Ok(MapParams::new(self.c1, self.c2, self.shift)?)
    }
}

impl From<&MapParams> for MapParamsSpec {
    fn from(p: &MapParams) -> Self {
        MapParamsSpec { c1: p.c1(), c2: p.c2(), shift: p.shift() }
    }
}

/// Config-file form of a run: every field optional, unknown keys rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ConfigFile {
    pub experiment_id: Option<ExperimentId>,
    pub map_params: Option<MapParamsSpec>,
    /// Perturbation step; present means "run the 25-member ensemble".
    pub ensemble_step: Option<f64>,
    pub grid_orders: Option<Vec<u64>>,
    pub k_max: Option<usize>,
    pub schemes: Option<Vec<String>>,
    pub seeds: Option<Vec<u64>>,
    /// Operator grid size M.
    pub resolution: Option<usize>,
    /// Truncation degree for the preimage-count polynomials.
    pub m_max: Option<usize>,
    /// Half-width R of the local window (in grid cells).
    pub window: Option<usize>,
    /// Cap on the point-process prediction curve length.
    pub pk_k_max: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn scheme_names<S: serde::Serializer>(v: &[SchemeKind], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|k| k.name()))
}

/// A fully resolved experiment run.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSpec {
    pub experiment_id: ExperimentId,
    pub map_params: MapParamsSpec,
    pub ensemble_step: Option<f64>,
    pub grid_orders: Vec<u64>,
    pub k_max: usize,
    #[serde(serialize_with = "scheme_names")]
    pub schemes: Vec<SchemeKind>,
    pub seeds: Vec<u64>,
    pub resolution: usize,
    pub m_max: usize,
    pub window: usize,
    pub pk_k_max: usize,
}

impl RunSpec {
    /// Desk-scale defaults for one experiment family.
    pub fn defaults(id: ExperimentId) -> Self {
        let base = RunSpec {
            experiment_id: id,
            map_params: (&MapParams::default()).into(),
            ensemble_step: None,
            grid_orders: vec![1 << 10, 1 << 12, 1 << 14, 1 << 16],
            k_max: 100,
            schemes: SchemeKind::ALL.to_vec(),
            seeds: vec![0],
            resolution: 4096,
            m_max: 256,
            window: 40,
            pk_k_max: 250,
        };
        match id {
            ExperimentId::SrbDistance => base,
            ExperimentId::IterateDistance => RunSpec { k_max: 50, ..base },
            ExperimentId::ShortTermVsPrediction => RunSpec {
                ensemble_step: Some(0.001),
                grid_orders: vec![1 << 20],
                k_max: 25,
                ..base
            },
            ExperimentId::Injectivity => RunSpec {
                grid_orders: vec![100_000],
                k_max: 50,
                resolution: 1 << 14,
                ..base
            },
            ExperimentId::LocalPreimageDensity => RunSpec {
                grid_orders: vec![1_000_000],
                k_max: 10,
                ..base
            },
            ExperimentId::SchemeComparison => RunSpec {
                grid_orders: vec![50_000],
                k_max: 2000,
                seeds: vec![0, 1, 2, 3, 4],
                ..base
            },
            ExperimentId::AsymptoticMu => RunSpec {
                grid_orders: (4..=9).map(|j| 1u64 << (2 * j)).collect(),
                ..base
            },
            ExperimentId::TimeToCycle => RunSpec {
                grid_orders: (8..=16).map(|j| 1u64 << j).collect(),
                seeds: (0..10).collect(),
                ..base
            },
            ExperimentId::MinDistanceTime => RunSpec {
                grid_orders: (10..=20).map(|j| 1u64 << j).collect(),
                ..base
            },
        }
    }

    /// Layered resolution: defaults, then config file, then CLI overrides.
    pub fn resolve(
        id: ExperimentId,
        config: Option<&ConfigFile>,
        overrides: &ConfigFile,
    ) -> Result<Self, HarnessError> {
        if let Some(file_id) = config.and_then(|c| c.experiment_id) {
            if file_id != id {
                return Err(HarnessError::InvalidSpec(format!(
                    "config file is for '{file_id}' but '{id}' was requested"
                )));
            }
        }
        let mut spec = Self::defaults(id);
        for layer in config.into_iter().chain(std::iter::once(overrides)) {
            spec.apply(layer)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn apply(&mut self, layer: &ConfigFile) -> Result<(), HarnessError> {
        if let Some(p) = layer.map_params {
            self.map_params = p;
        }
        if let Some(s) = layer.ensemble_step {
            self.ensemble_step = Some(s);
        }
        if let Some(ref n) = layer.grid_orders {
            self.grid_orders = n.clone();
        }
        if let Some(k) = layer.k_max {
            self.k_max = k;
        }
        if let Some(ref names) = layer.schemes {
            self.schemes = names
                .iter()
                .map(|s| {
                    s.parse::<SchemeKind>()
                        .map_err(|e| HarnessError::InvalidSpec(e.to_string()))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(ref s) = layer.seeds {
            self.seeds = s.clone();
        }
        if let Some(r) = layer.resolution {
            self.resolution = r;
        }
        if let Some(m) = layer.m_max {
            self.m_max = m;
        }
        if let Some(w) = layer.window {
            self.window = w;
        }
        if let Some(p) = layer.pk_k_max {
            self.pk_k_max = p;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), HarnessError> {
        self.map_params.build()?;
        if self.grid_orders.is_empty() {
            return Err(HarnessError::InvalidSpec("gridOrders must be nonempty".into()));
        }
        if self.grid_orders.iter().any(|&n| n == 0 || n > u32::MAX as u64) {
            return Err(HarnessError::InvalidSpec(
                "grid orders must lie in 1..=2^32-1".into(),
            ));
        }
        if self.resolution < 2 {
            return Err(HarnessError::InvalidSpec("resolution must be at least 2".into()));
        }
        if self.m_max == 0 {
            return Err(HarnessError::InvalidSpec("mMax must be positive".into()));
        }
        if self.window == 0 {
            return Err(HarnessError::InvalidSpec("window must be positive".into()));
        }
        if let Some(step) = self.ensemble_step {
            if step.is_nan() || step < 0.0 {
                return Err(HarnessError::InvalidSpec("ensembleStep must be >= 0".into()));
            }
        }
        if self.schemes.is_empty() || self.seeds.is_empty() {
            return Err(HarnessError::InvalidSpec("schemes and seeds must be nonempty".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> MapParams {
        // validate() already proved this is expanding.
        self.map_params.build().expect("validated params")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names_round_trip() {
        for id in ALL_EXPERIMENTS {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("nope".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"kMax": 3, "bogus": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn layering_order_is_defaults_config_cli() {
        let file: ConfigFile = serde_json::from_str(r#"{"kMax": 7, "resolution": 512}"#).unwrap();
        let cli = ConfigFile { k_max: Some(9), ..Default::default() };
        let spec =
            RunSpec::resolve(ExperimentId::SrbDistance, Some(&file), &cli).unwrap();
        assert_eq!(spec.k_max, 9);
        assert_eq!(spec.resolution, 512);
        // Untouched fields keep their defaults.
        assert_eq!(spec.window, 40);
    }

    #[test]
    fn mismatched_config_experiment_is_an_error() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"experimentId": "injectivity"}"#).unwrap();
        let err = RunSpec::resolve(ExperimentId::SrbDistance, Some(&file), &ConfigFile::default());
        assert!(err.is_err());
    }

    #[test]
    fn non_expanding_params_are_rejected() {
        let cli = ConfigFile {
            map_params: Some(MapParamsSpec { c1: 0.2, c2: 0.0, shift: 0.0 }),
            ..Default::default()
        };
        let err = RunSpec::resolve(ExperimentId::SrbDistance, None, &cli);
        assert!(err.is_err());
    }
}
