//! Synthetic data drawn from a planted sequential logit model.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{parse_csv, preprocess, Dataset, Direction, PreprocessOptions};
use crate::error::{Error, Result};
use crate::estimator::SeqLogitParams;
use crate::loss::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    /// Number of classes minus one.
    pub m: usize,
    pub true_features: usize,
    /// Planted weights have magnitude `scale * U(0.5, 1.5)` and random sign.
    pub coef_scale: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n: 200,
            p: 8,
            m: 2,
            true_features: 3,
            coef_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub config: SynthConfig,
    pub x: DMatrix<f64>,
    pub y: Vec<usize>,
    /// Planted support, 0-based and ascending.
    pub truth: Vec<usize>,
    pub params: SeqLogitParams,
}

pub const LABEL_COLUMN: &str = "y";

impl SynthData {
    pub fn feature_names(&self) -> Vec<String> {
        (1..=self.config.p).map(|j| format!("x{j}")).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.feature_names().join(",");
        out.push_str(",y\n");
        for i in 0..self.x.nrows() {
            for j in 0..self.x.ncols() {
                let _ = write!(out, "{},", self.x[(i, j)]);
            }
            let _ = writeln!(out, "{}", self.y[i]);
        }
        out
    }

    /// The CSV run through the default preprocessing pipeline.
    pub fn dataset(&self) -> Result<Dataset> {
        let table = parse_csv(&self.to_csv(), LABEL_COLUMN)?;
        preprocess(&table, &PreprocessOptions::default())
    }

    /// Raw matrix and labels without standardization.
    pub fn raw_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.x.clone(), self.y.clone(), self.feature_names())
    }

    pub fn truth_json(&self) -> String {
        let names = self.feature_names();
        let truth: Vec<serde_json::Value> = self
            .truth
            .iter()
            .map(|&j| serde_json::json!({ "index": j + 1, "name": names[j] }))
            .collect();
        let doc = serde_json::json!({
            "seed": self.config.seed,
            "n": self.config.n,
            "p": self.config.p,
            "m": self.config.m,
            "truth": truth,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    }
}

/// Draws `X ~ N(0, I)` and labels from the planted model. Intercepts are
/// `-ln(m + 1 - k)`, which makes the classes equally likely at `w = 0`.
pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    if cfg.m == 0 || cfg.n == 0 {
        return Err(Error::InvalidOption("synthetic data needs n >= 1 and m >= 1".into()));
    }
    if cfg.true_features > cfg.p {
        return Err(Error::InvalidOption(format!(
            "{} true features requested but p = {}",
            cfg.true_features, cfg.p
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut truth = index::sample(&mut rng, cfg.p, cfg.true_features).into_vec();
    truth.sort_unstable();

    let mut params = SeqLogitParams::zeros(cfg.p, cfg.m, Direction::Forward);
    for k in 0..cfg.m {
        params.intercepts[k] = -((cfg.m - k) as f64).ln();
        for &j in &truth {
            let mag = cfg.coef_scale * rng.random_range(0.5..1.5);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            params.weights[(j, k)] = sign * mag;
        }
    }

    let x = DMatrix::from_fn(cfg.n, cfg.p, |_, _| StandardNormal.sample(&mut rng));
    let mut y = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let mut label = cfg.m + 1;
        for k in 0..cfg.m {
            let score: f64 = (0..cfg.p).map(|j| params.weights[(j, k)] * x[(i, j)]).sum::<f64>()
                + params.intercepts[k];
            if rng.random::<f64>() < sigmoid(score) {
                label = k + 1;
                break;
            }
        }
        y.push(label);
    }
    Ok(SynthData {
        config: cfg.clone(),
        x,
        y,
        truth,
        params,
    })
}
