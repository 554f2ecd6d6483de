//! Experiment configuration. A bare file yields the full default protocol.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cgan::{CganConfig, SizeClass};
use crate::error::{Error, Result};
use crate::strategies::{
    gbt_grid, mlp_grid, LearnerKind, LearnerSpec, GBT_DEPTHS, GBT_LEARNING_RATES, GBT_TREES, MLP_NEURONS,
    MLP_WEIGHT_DECAY, RIDGE_SHRINKAGE,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetInput {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub assets: Vec<AssetInput>,
    /// Final observations reserved for out-of-sample testing.
    pub holdout: usize,
    /// Lagged returns used as features.
    pub lags: usize,
    /// Asset-level worker threads; 0 lets the thread pool decide.
    pub workers: usize,
    pub cgan: CganSection,
    pub case1: Case1Section,
    pub case2: Case2Section,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CganSection {
    pub noise_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub snap: usize,
    pub eval_samples: usize,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Case1Section {
    pub enabled: bool,
    /// `stat_boot`, `cgan_small`, `cgan_medium`, `cgan_large`.
    pub resamplers: Vec<String>,
    pub block: f64,
    pub b_values: Vec<usize>,
    pub learners: Vec<LearnerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Case2Section {
    pub enabled: bool,
    pub schemes: Vec<String>,
    pub learners: Vec<LearnerKind>,
    pub window: usize,
    pub stride: usize,
    pub block: usize,
    pub gap: usize,
    pub one_split_h: usize,
    pub k: usize,
    pub boot_b: usize,
    pub boot_block: f64,
    pub cgan_b: usize,
    pub cgan_h: usize,
    pub alpha: f64,
    pub grids: GridSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub ridge_shrinkage: Vec<f64>,
    pub gbt_trees: Vec<usize>,
    pub gbt_learning_rates: Vec<f64>,
    pub gbt_depths: Vec<usize>,
    pub mlp_neurons: Vec<usize>,
    pub mlp_weight_decay: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("results"),
            assets: Vec::new(),
            holdout: 1260,
            lags: 252,
            workers: 0,
            cgan: CganSection::default(),
            case1: Case1Section::default(),
            case2: Case2Section::default(),
        }
    }
}

impl Default for CganSection {
    fn default() -> Self {
        let c = CganConfig::sized(SizeClass::Medium);
        Self {
            noise_dim: c.noise_dim,
            epochs: c.epochs,
            batch_size: c.batch_size,
            snap: c.snap,
            eval_samples: c.eval_samples,
            learning_rate: c.learning_rate,
        }
    }
}

impl Default for Case1Section {
    fn default() -> Self {
        Self {
            enabled: true,
            resamplers: ["stat_boot", "cgan_small", "cgan_medium", "cgan_large"]
                .map(String::from)
                .to_vec(),
            block: 20.0,
            b_values: vec![20, 100, 500],
            learners: vec![LearnerSpec::reg_tree(), LearnerSpec::mlp(200, 0.00001)],
        }
    }
}

impl Default for Case2Section {
    fn default() -> Self {
        Self {
            enabled: true,
            schemes: [
                "naive",
                "sliding",
                "block",
                "hv_block",
                "one_split",
                "kfold",
                "stat_boot",
                "cgan_small",
                "cgan_medium",
                "cgan_large",
            ]
            .map(String::from)
            .to_vec(),
            learners: vec![LearnerKind::Gbt, LearnerKind::Mlp, LearnerKind::Ridge],
            window: 252,
            stride: 252,
            block: 252,
            gap: 10,
            one_split_h: 1260,
            k: 10,
            boot_b: 100,
            boot_block: 20.0,
            cgan_b: 100,
            cgan_h: 1260,
            alpha: 0.05,
            grids: GridSection::default(),
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            ridge_shrinkage: RIDGE_SHRINKAGE.to_vec(),
            gbt_trees: GBT_TREES.to_vec(),
            gbt_learning_rates: GBT_LEARNING_RATES.to_vec(),
            gbt_depths: GBT_DEPTHS.to_vec(),
            mlp_neurons: MLP_NEURONS.to_vec(),
            mlp_weight_decay: MLP_WEIGHT_DECAY.to_vec(),
        }
    }
}

impl GridSection {
    pub fn grid(&self, kind: LearnerKind) -> Vec<LearnerSpec> {
        match kind {
            LearnerKind::Ridge => self
                .ridge_shrinkage
                .iter()
                .map(|&shrinkage| LearnerSpec::Ridge { shrinkage })
                .collect(),
            LearnerKind::RegTree => vec![LearnerSpec::reg_tree()],
            LearnerKind::Gbt => gbt_grid(&self.gbt_trees, &self.gbt_learning_rates, &self.gbt_depths),
            LearnerKind::Mlp => mlp_grid(&self.mlp_neurons, &self.mlp_weight_decay),
        }
    }
}

/// Size class named by a `cgan_<size>` resampler or scheme.
pub fn cgan_size(name: &str) -> Option<SizeClass> {
    name.strip_prefix("cgan_")?.parse().ok()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Relative asset and output paths resolve against the config file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            if cfg.output_dir.is_relative() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
            for a in &mut cfg.assets {
                if a.path.is_relative() {
                    a.path = dir.join(&a.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn cgan_config(&self, size: SizeClass) -> CganConfig {
        CganConfig {
            p: self.lags,
            noise_dim: self.cgan.noise_dim,
            gen_hidden: size.hidden_units(),
            disc_hidden: size.hidden_units(),
            epochs: self.cgan.epochs,
            batch_size: self.cgan.batch_size,
            snap: self.cgan.snap,
            eval_samples: self.cgan.eval_samples,
            learning_rate: self.cgan.learning_rate,
        }
    }

    /// Generator sizes needed by any enabled resampler or scheme.
    pub fn cgan_sizes(&self) -> Vec<SizeClass> {
        let mut names: Vec<&String> = Vec::new();
        if self.case1.enabled {
            names.extend(&self.case1.resamplers);
        }
        if self.case2.enabled {
            names.extend(&self.case2.schemes);
        }
        SizeClass::ALL
            .into_iter()
            .filter(|s| names.iter().any(|n| cgan_size(n) == Some(*s)))
            .collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, with
    /// file locations and the worker count left out.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.workers = 0;
        for a in &mut canonical.assets {
            a.path = PathBuf::new();
        }
        let json = serde_json::to_string(&canonical).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.lags == 0 {
            return bad("lags must be positive".into());
        }
        if self.holdout == 0 {
            return bad("holdout must be positive".into());
        }
        for size in SizeClass::ALL {
            self.cgan_config(size)
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        let mut names: Vec<&str> = self.assets.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("asset names must be unique".into());
        }
        for r in &self.case1.resamplers {
            if r != "stat_boot" && cgan_size(r).is_none() {
                return bad(format!("unknown resampler {r:?}"));
            }
        }
        if self.case1.b_values.contains(&0) {
            return bad("ensemble sizes must be positive".into());
        }
        for (i, spec) in self.case1.learners.iter().enumerate() {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            if self.case1.learners[..i].iter().any(|s| s.kind() == spec.kind()) {
                return bad(format!("duplicate case1 learner {}", spec.kind()));
            }
        }
        const CLASSICAL: [&str; 7] = [
            "naive",
            "sliding",
            "block",
            "hv_block",
            "one_split",
            "kfold",
            "stat_boot",
        ];
        for s in &self.case2.schemes {
            if !CLASSICAL.contains(&s.as_str()) && cgan_size(s).is_none() {
                return bad(format!("unknown scheme {s:?}"));
            }
        }
        for kind in &self.case2.learners {
            let grid = self.case2.grids.grid(*kind);
            if grid.is_empty() {
                return bad(format!("empty grid for {kind}"));
            }
            for spec in &grid {
                spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if !(self.case2.alpha > 0.0 && self.case2.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)".into());
        }
        Ok(())
    }
}
