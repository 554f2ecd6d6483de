use ndarray::{s, Array2};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CganModel, GeneratorSnapshot};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// How conditioning lags are formed while generating a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Every step conditions on the real lags of the input series.
    TeacherForced,
    /// Only the first `p` real values seed the window; later steps condition
    /// on previously generated values.
    Recursive,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "teacher_forced" => Ok(SampleMode::TeacherForced),
            "recursive" => Ok(SampleMode::Recursive),
            other => Err(Error::param(format!("unknown sample mode {other:?}"))),
        }
    }
}

/// `sqrt(sum((a - s)^2) / (n - 1))` over aligned points.
pub fn path_rmse(actual: &[f64], sample: &[f64]) -> Result<f64> {
    if actual.len() != sample.len() || actual.len() < 2 {
        return Err(Error::shape(format!(
            "rmse over {} actual and {} sampled points",
            actual.len(),
            sample.len()
        )));
    }
    let sse: f64 = actual.iter().zip(sample).map(|(a, s)| (a - s).powi(2)).sum();
    Ok((sse / (actual.len() - 1) as f64).sqrt())
}

fn fill_noise(row: &mut ndarray::ArrayViewMut1<f64>, rng: &mut Rng) {
    for v in row.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

impl GeneratorSnapshot {
    /// One teacher-forced path per seed, each of length `series.len() - p`.
    pub(crate) fn teacher_forced_paths(
        &self,
        p: usize,
        noise_dim: usize,
        series: &[f64],
        seeds: &[u64],
    ) -> Result<Vec<Vec<f64>>> {
        if series.len() <= p {
            return Err(Error::InsufficientHistory {
                needed: p,
                got: series.len(),
            });
        }
        let rows = series.len() - p;
        let scaled: Vec<f64> = self.feature_scaler.apply_all(series);
        let mut input = Array2::zeros((rows, noise_dim + p));
        for i in 0..rows {
            let t = p + i;
            for j in 0..p {
                input[[i, noise_dim + j]] = scaled[t - 1 - j];
            }
        }
        seeds
            .iter()
            .map(|&seed| {
                let mut rng = rng_from_seed(seed);
                for i in 0..rows {
                    fill_noise(&mut input.slice_mut(s![i, ..noise_dim]), &mut rng);
                }
                let out = self.generator.predict(input.view())?;
                Ok(out.column(0).iter().map(|&z| self.target_scaler.invert(z)).collect())
            })
            .collect()
    }

    /// One recursive path per seed, seeded by `series[..p]` and running for
    /// `len` steps. All paths advance together as one batch.
    pub(crate) fn recursive_paths(
        &self,
        p: usize,
        noise_dim: usize,
        series: &[f64],
        len: usize,
        seeds: &[u64],
    ) -> Result<Vec<Vec<f64>>> {
        if series.len() < p {
            return Err(Error::InsufficientHistory {
                needed: p.saturating_sub(1),
                got: series.len(),
            });
        }
        let n = seeds.len();
        let mut rngs: Vec<Rng> = seeds.iter().map(|&s| rng_from_seed(s)).collect();
        let seed_window = self.feature_scaler.apply_all(&series[..p]);
        // scaled history per path; the conditioning vector reads it backwards
        let mut history: Vec<Vec<f64>> = vec![seed_window; n];
        let mut paths: Vec<Vec<f64>> = vec![Vec::with_capacity(len); n];
        let mut input = Array2::zeros((n, noise_dim + p));
        for _ in 0..len {
            for (b, rng) in rngs.iter_mut().enumerate() {
                fill_noise(&mut input.slice_mut(s![b, ..noise_dim]), rng);
                let h = &history[b];
                for j in 0..p {
                    input[[b, noise_dim + j]] = h[h.len() - 1 - j];
                }
            }
            let out = self.generator.predict(input.view())?;
            for b in 0..n {
                let y = self.target_scaler.invert(out[[b, 0]]);
                if !y.is_finite() {
                    return Err(Error::NonFinite { index: paths[b].len() });
                }
                paths[b].push(y);
                history[b].push(self.feature_scaler.apply(y));
            }
        }
        Ok(paths)
    }
}

impl CganModel {
    fn path_seeds(seed: u64, n: usize) -> Vec<u64> {
        (0..n as u64).map(|b| derive_seed(seed, "cgan-path", b)).collect()
    }

    /// Draw one path of length `conditioning.len() - p`.
    pub fn sample_path(&self, conditioning: &[f64], mode: SampleMode, seed: u64) -> Result<Vec<f64>> {
        Ok(self.sample_paths(conditioning, mode, 1, seed)?.remove(0))
    }

    /// Draw `n` paths, each of length `conditioning.len() - p`. Path `b`
    /// depends only on `(seed, b)`.
    pub fn sample_paths(&self, conditioning: &[f64], mode: SampleMode, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let p = self.config.p;
        if conditioning.len() <= p {
            return Err(Error::InsufficientHistory {
                needed: p,
                got: conditioning.len(),
            });
        }
        let seeds = Self::path_seeds(seed, n);
        match mode {
            SampleMode::TeacherForced => {
                self.selected
                    .teacher_forced_paths(p, self.config.noise_dim, conditioning, &seeds)
            }
            SampleMode::Recursive => {
                self.selected
                    .recursive_paths(p, self.config.noise_dim, conditioning, conditioning.len() - p, &seeds)
            }
        }
    }

    /// Mean RMSE of `samples` teacher-forced paths against `returns[p..]`.
    pub fn sample_rmse(&self, returns: &[f64], samples: usize, seed: u64) -> Result<f64> {
        snapshot_rmse(
            &self.selected,
            self.config.p,
            self.config.noise_dim,
            returns,
            samples,
            seed,
        )
    }
}

pub(crate) fn snapshot_rmse(
    snapshot: &GeneratorSnapshot,
    p: usize,
    noise_dim: usize,
    returns: &[f64],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::param("at least one evaluation sample"));
    }
    let seeds = CganModel::path_seeds(seed, samples);
    let paths = snapshot.teacher_forced_paths(p, noise_dim, returns, &seeds)?;
    let actual = &returns[p..];
    let total = paths.iter().map(|path| path_rmse(actual, path)).sum::<Result<f64>>()?;
    Ok(total / samples as f64)
}
