use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ProbeConfig;
use crate::attributes::{AttributeDef, AttributeKind};
use crate::error::{Error, Result};
use crate::training::{InversionConfig, MixtureSpec, TrainConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Complete description of an experiment. Every random choice hangs off an
/// explicit seed in here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub train: TrainConfig,
    pub dataset: MixtureSpec,
    pub dataset_seed: u64,
    pub attributes: Vec<AttributeDef>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let dataset = MixtureSpec::two_modes(0.25, 10_000);
        let modes = dataset.centers.clone();
        Self {
            schema_version: SCHEMA_VERSION,
            train: TrainConfig::default(),
            dataset,
            dataset_seed: 1000,
            attributes: vec![
                AttributeDef::half_plane("x>0", [1.0, 0.0], 0.0, 10.0),
                AttributeDef::half_plane("y>0", [0.0, 1.0], 0.0, 10.0),
                AttributeDef {
                    id: "near-origin".into(),
                    kind: AttributeKind::Radial {
                        center: [0.0, 0.0],
                        radius: 2.0,
                        sharpness: 4.0,
                    },
                },
                AttributeDef {
                    id: "right-mode".into(),
                    kind: AttributeKind::NearestMode { modes, target: 1 },
                },
            ],
            out_dir: None,
            inversion: InversionConfig::default(),
            probe: ProbeConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::VersionMismatch {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        self.train.validate()?;
        self.dataset.validate()?;
        crate::attributes::validate_attributes(&self.attributes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw: serde_json::Value = super::read_json(path)?;
        if let Some(v) = raw.get("schema_version").and_then(|v| v.as_u64()) {
            if v != SCHEMA_VERSION as u64 {
                return Err(Error::VersionMismatch {
                    found: u32::try_from(v).unwrap_or(u32::MAX),
                    expected: SCHEMA_VERSION,
                });
            }
        }
        let cfg: Self = serde_json::from_value(raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_json(path, self)
    }
}
