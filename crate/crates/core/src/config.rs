//! Run configuration: defaults, TOML file loading and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::IngestOptions;
use crate::error::{Error, Result};
use crate::index::QueryLimits;
use crate::nn::CONV_KERNEL;
use crate::pos::MAX_POINTS;

/// Constants used while verifying a claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Rows with this many points or fewer are dampened.
    pub point_threshold: u32,
    pub dampen_factor: f64,
    pub limits: QueryLimits,
    pub max_evidence: usize,
    pub use_points: bool,
    pub use_merge: bool,
    pub use_conv: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            point_threshold: 11,
            dampen_factor: 0.3,
            limits: QueryLimits::default(),
            max_evidence: 5,
            use_points: true,
            use_merge: true,
            use_conv: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dump: Option<PathBuf>,
    pub claims: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub tags: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub output: Option<PathBuf>,

    pub point_threshold: u32,
    pub dampen_factor: f64,
    pub type1_limit: usize,
    pub type2_limit: usize,
    pub type3_limit: usize,
    pub max_sentence_chars: usize,
    pub max_evidence: usize,
    pub conv_min_len: usize,
    pub lowercase_pronouns: bool,

    pub no_points: bool,
    pub no_merge: bool,
    pub no_conv: bool,

    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        let ingest = IngestOptions::default();
        RunConfig {
            dump: None,
            claims: None,
            annotations: None,
            tags: None,
            model: None,
            index: None,
            output: None,
            point_threshold: p.point_threshold,
            dampen_factor: p.dampen_factor,
            type1_limit: p.limits.type1,
            type2_limit: p.limits.type2,
            type3_limit: p.limits.type3,
            max_sentence_chars: ingest.max_sentence_chars,
            max_evidence: p.max_evidence,
            conv_min_len: CONV_KERNEL,
            lowercase_pronouns: ingest.lowercase_pronouns,
            no_points: false,
            no_merge: false,
            no_conv: false,
            seed: 0,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("type1_limit", self.type1_limit),
            ("type2_limit", self.type2_limit),
            ("type3_limit", self.type3_limit),
            ("max_sentence_chars", self.max_sentence_chars),
            ("max_evidence", self.max_evidence),
            ("workers", self.workers),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.dampen_factor > 0.0 && self.dampen_factor < 1.0) {
            return bad(format!("dampen_factor {} is outside (0, 1)", self.dampen_factor));
        }
        if self.point_threshold > MAX_POINTS {
            return bad(format!("point_threshold {} exceeds {MAX_POINTS}", self.point_threshold));
        }
        if self.conv_min_len != CONV_KERNEL {
            return bad(format!("conv_min_len must equal the kernel size {CONV_KERNEL}"));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            point_threshold: self.point_threshold,
            dampen_factor: self.dampen_factor,
            limits: QueryLimits {
                type1: self.type1_limit,
                type2: self.type2_limit,
                type3: self.type3_limit,
            },
            max_evidence: self.max_evidence,
            use_points: !self.no_points,
            use_merge: !self.no_merge,
            use_conv: !self.no_conv,
        }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            max_sentence_chars: self.max_sentence_chars,
            lowercase_pronouns: self.lowercase_pronouns,
        }
    }
}
