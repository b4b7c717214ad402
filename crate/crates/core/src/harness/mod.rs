//! Operational shell: file I/O, synthetic patches and corpora, the oracle
//! detector, AP50 evaluation, run configuration and the command line.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod io;
pub mod oracle;
pub mod patch;
pub mod resize;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{detect_with_asd, AsdConfig, Detector};
use crate::error::{AsdError, Result};
use crate::spectral_mask::RgbImage;

use self::eval::{ap50, Detections, GroundTruth};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything a CLI run needs; loadable from JSON, overridable by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub asd: AsdConfig,
    pub inputs: Vec<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub detector_cmd: Option<String>,
    pub gt: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(AsdError::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|source| AsdError::Io { path: path.to_path_buf(), source })?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.check_paths()?;
        Ok(cfg)
    }

    /// Referenced input and ground-truth paths must exist.
    pub fn check_paths(&self) -> Result<()> {
        for p in self.inputs.iter().chain(&self.gt) {
            if !p.exists() {
                return Err(AsdError::MissingFile(p.clone()));
            }
        }
        Ok(())
    }
}

/// Result of running the defended pipeline over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub ap50: f64,
    pub images: usize,
    pub config: AsdConfig,
}

/// Runs [`detect_with_asd`] on every image with a per-image detector and
/// scores the pooled detections against `gt`.
pub fn evaluate<F>(
    images: &[(String, RgbImage)],
    gt: &GroundTruth,
    config: &AsdConfig,
    make_detector: F,
) -> Result<(Detections, EvalReport)>
where
    F: Fn(&str, &RgbImage) -> Result<Box<dyn Detector>> + Sync,
{
    let per_image: Vec<(String, Vec<_>)> = images
        .par_iter()
        .map(|(name, image)| {
            let detector = make_detector(name, image)?;
            Ok((name.clone(), detect_with_asd(image, detector.as_ref(), config)?))
        })
        .collect::<Result<_>>()?;
    let detections: Detections = per_image.into_iter().collect::<BTreeMap<_, _>>();
    let score = ap50(&detections, gt)?;
    let report =
        EvalReport { schema_version: SCHEMA_VERSION, ap50: score, images: images.len(), config: config.clone() };
    Ok((detections, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_flattens_pipeline_fields() {
        let cfg: RunConfig = serde_json::from_str(r#"{"theta": 0.2, "levels": [0, 2], "seed": 4}"#).unwrap();
        assert_eq!(cfg.asd.theta, 0.2);
        assert_eq!(cfg.asd.levels, vec![0, 2]);
        assert_eq!(cfg.asd.nms_iou, 0.4);
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn run_config_requires_existing_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"inputs": ["/definitely/not/here.png"]}"#).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(AsdError::MissingFile(_))));
    }
}
