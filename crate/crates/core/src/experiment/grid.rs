//! The benchmark model catalog.
//!
//! The default grid holds 678 specs: a 30-width sweep of single-hidden-
//! layer sigmoid networks (the classical ANN family surveyed in prior
//! work), plus three deep bases — the literature 40-60-40 ReLU network of
//! Saggi & Jain and the proposed 60-90-60 ReLU/SeLU networks — each
//! expanded over a 6×6×6 grid of per-gap dropout rates.

use serde::Deserialize;

use crate::nn::{ActivationKind, Hyperparams, NetworkSpec};

use super::ExperimentError;

/// Dropout rates tried at each of the three gaps of a deep base.
pub const DEFAULT_DROPOUT_RATES: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    /// Literature single-hidden-layer sigmoid networks, width swept.
    LAnn,
    /// Literature deep network: 40-60-40, ReLU.
    LDnnSaggi,
    /// Proposed deep network: 60-90-60, ReLU.
    PDnnRelu,
    /// Proposed deep network: 60-90-60, SeLU.
    PDnnSelu,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::LAnn => "L-ANN",
            ModelFamily::LDnnSaggi => "L-DNN-Saggi",
            ModelFamily::PDnnRelu => "P-DNN-ReLU",
            ModelFamily::PDnnSelu => "P-DNN-SeLU",
        }
    }

    pub fn parse(name: &str) -> Option<ModelFamily> {
        match name.to_ascii_lowercase().as_str() {
            "l-ann" => Some(ModelFamily::LAnn),
            "l-dnn-saggi" => Some(ModelFamily::LDnnSaggi),
            "p-dnn-relu" => Some(ModelFamily::PDnnRelu),
            "p-dnn-selu" => Some(ModelFamily::PDnnSelu),
            _ => None,
        }
    }

    pub fn all() -> [ModelFamily; 4] {
        [ModelFamily::LAnn, ModelFamily::LDnnSaggi, ModelFamily::PDnnRelu, ModelFamily::PDnnSelu]
    }

    fn is_deep(self) -> bool {
        !matches!(self, ModelFamily::LAnn)
    }

    fn deep_base(self) -> Option<(&'static [usize], ActivationKind)> {
        match self {
            ModelFamily::LAnn => None,
            ModelFamily::LDnnSaggi => Some((&[40, 60, 40], ActivationKind::ReLU)),
            ModelFamily::PDnnRelu => Some((&[60, 90, 60], ActivationKind::ReLU)),
            ModelFamily::PDnnSelu => Some((&[60, 90, 60], ActivationKind::SeLU)),
        }
    }
}

/// One candidate model in the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGridEntry {
    /// Unique, file-name-safe identifier.
    pub id: String,
    pub family: ModelFamily,
    pub spec: NetworkSpec,
    /// Where the architecture comes from.
    pub provenance: &'static str,
}

impl ModelGridEntry {
    /// Human-readable name in the report style: `L-ANN (9)`,
    /// `P-DNN-SeLU dropout 0.0 0.1 0.0`.
    pub fn display_name(&self) -> String {
        match self.family {
            ModelFamily::LAnn => {
                let widths: Vec<String> =
                    self.spec.hidden.iter().map(|h| h.width.to_string()).collect();
                format!("L-ANN ({})", widths.join(", "))
            }
            _ => {
                if self.spec.dropout_rates.iter().all(|&r| r == 0.0) {
                    self.family.name().to_string()
                } else {
                    let rates: Vec<String> =
                        self.spec.dropout_rates.iter().map(|r| format!("{r}")).collect();
                    format!("{} dropout {}", self.family.name(), rates.join(" "))
                }
            }
        }
    }
}

/// Grid construction parameters. Loadable from TOML; every field has a
/// default matching the full benchmark.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Family names to include.
    pub families: Vec<String>,
    /// Inclusive width range for the single-hidden-layer sweep.
    pub ann_width_range: (usize, usize),
    /// Dropout rates expanded over the three gaps of each deep base.
    pub dnn_dropout_rates: Vec<f64>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    /// Adds the multi-hidden sigmoid variants reported by Huo et al.
    pub include_huo_variants: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            families: ModelFamily::all().iter().map(|f| f.name().to_string()).collect(),
            ann_width_range: (1, 30),
            dnn_dropout_rates: DEFAULT_DROPOUT_RATES.to_vec(),
            hyperparams: Hyperparams::default(),
            seed: 42,
            include_huo_variants: false,
        }
    }
}

impl GridConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let config: GridConfig = toml::from_str(text)
            .map_err(|e| ExperimentError::InvalidGridConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn parsed_families(&self) -> Result<Vec<ModelFamily>, ExperimentError> {
        self.families
            .iter()
            .map(|name| {
                ModelFamily::parse(name).ok_or_else(|| {
                    ExperimentError::InvalidGridConfig(format!("unknown family `{name}`"))
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.families.is_empty() {
            return Err(ExperimentError::InvalidGridConfig("no families selected".into()));
        }
        let families = self.parsed_families()?;
        let (lo, hi) = self.ann_width_range;
        if lo < 1 || lo > hi {
            return Err(ExperimentError::InvalidGridConfig(format!(
                "invalid width range ({lo}, {hi})"
            )));
        }
        if families.iter().any(|f| f.is_deep()) && self.dnn_dropout_rates.is_empty() {
            return Err(ExperimentError::InvalidGridConfig("empty dropout rate list".into()));
        }
        for &rate in &self.dnn_dropout_rates {
            if !(0.0..1.0).contains(&rate) {
                return Err(ExperimentError::InvalidGridConfig(format!(
                    "dropout rate {rate} outside [0, 1)"
                )));
            }
        }
        self.hyperparams.validate().map_err(|e| ExperimentError::InvalidGridConfig(e.to_string()))
    }
}

/// Number of inputs every benchmark model sees.
pub const INPUT_WIDTH: usize = 6;

fn ann_entry(widths: &[usize], id: String, provenance: &'static str) -> ModelGridEntry {
    ModelGridEntry {
        id,
        family: ModelFamily::LAnn,
        spec: NetworkSpec::mlp(INPUT_WIDTH, widths, ActivationKind::Sigmoid, 0),
        provenance,
    }
}

/// Expands a grid config into the concrete model list.
///
/// The default config yields 30 + 3·6³ = 678 entries. Entry seeds are
/// placeholders; the cross-validation runner derives the real per-fold
/// seeds from the run seed, station, entry id, and fold index.
pub fn build_model_grid(config: &GridConfig) -> Result<Vec<ModelGridEntry>, ExperimentError> {
    config.validate()?;
    let families = config.parsed_families()?;
    let mut entries = Vec::new();

    if families.contains(&ModelFamily::LAnn) {
        let (lo, hi) = config.ann_width_range;
        for width in lo..=hi {
            entries.push(ann_entry(
                &[width],
                format!("L-ANN-w{width:02}"),
                "single-hidden-layer survey sweep",
            ));
        }
        if config.include_huo_variants {
            entries.push(ann_entry(&[8], "L-ANN-Huo-8".into(), "Huo et al. variant"));
            entries.push(ann_entry(&[4, 5], "L-ANN-Huo-4-5".into(), "Huo et al. variant"));
            entries.push(ann_entry(&[5, 6], "L-ANN-Huo-5-6".into(), "Huo et al. variant"));
        }
    }

    for family in [ModelFamily::LDnnSaggi, ModelFamily::PDnnRelu, ModelFamily::PDnnSelu] {
        if !families.contains(&family) {
            continue;
        }
        let (widths, activation) = family.deep_base().expect("deep family");
        let provenance = match family {
            ModelFamily::LDnnSaggi => "Saggi & Jain deep baseline",
            _ => "proposed deep architecture",
        };
        for &r1 in &config.dnn_dropout_rates {
            for &r2 in &config.dnn_dropout_rates {
                for &r3 in &config.dnn_dropout_rates {
                    let spec = NetworkSpec::mlp(INPUT_WIDTH, widths, activation, 0)
                        .with_dropout(&[r1, r2, r3]);
                    entries.push(ModelGridEntry {
                        id: format!("{}-d{r1}-{r2}-{r3}", family.name()),
                        family,
                        spec,
                        provenance,
                    });
                }
            }
        }
    }

    let mut ids: Vec<&str> = entries.iter().map(|e| e.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != entries.len() {
        return Err(ExperimentError::InvalidGridConfig("duplicate entry ids".into()));
    }
    Ok(entries)
}
