use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModelWeights;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOptions {
    pub steps: usize,
    pub lr: f32,
    pub batch: usize,
    pub momentum: f32,
    /// Rescale the averaged gradient to at most this L2 norm.
    pub clip_norm: Option<f32>,
    /// Seeds window sampling; independent from the init seed.
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            steps: 500,
            lr: 0.05,
            batch: 4,
            momentum: 0.9,
            clip_norm: Some(1.0),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Mean batch loss before each update.
    pub losses: Vec<f32>,
}

impl TrainingLog {
    /// Trailing moving average over `window` steps (shorter at the start).
    pub fn moving_average(&self, window: usize) -> Vec<f32> {
        let window = window.max(1);
        let mut out = Vec::with_capacity(self.losses.len());
        let mut sum = 0.0f64;
        for (i, &l) in self.losses.iter().enumerate() {
            sum += l as f64;
            if i >= window {
                sum -= self.losses[i - window] as f64;
            }
            out.push((sum / (i + 1).min(window) as f64) as f32);
        }
        out
    }
}

/// SGD with momentum on next-token loss over seeded random windows of
/// `context_len + 1` tokens drawn from `tokens`.
pub fn train(model: &mut ModelWeights, tokens: &[usize], opts: &TrainOptions) -> Result<TrainingLog> {
    if tokens.is_empty() {
        return Err(Error::Data("training corpus is empty".into()));
    }
    let window = model.config.context_len + 1;
    if tokens.len() < window {
        return Err(Error::Data(format!(
            "training corpus has {} tokens, need at least {window}",
            tokens.len()
        )));
    }
    if opts.batch == 0 {
        return Err(Error::Contract("batch size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut velocity: Vec<Vec<f32>> = model
        .named_tensors()
        .iter()
        .map(|(_, t)| vec![0.0; t.numel()])
        .collect();
    let mut log = TrainingLog::default();

    for _ in 0..opts.steps {
        let starts: Vec<usize> = (0..opts.batch)
            .map(|_| rng.gen_range(0..=tokens.len() - window))
            .collect();
        let snapshot = &*model;
        let results: Vec<(f32, Vec<Vec<f32>>)> = starts
            .par_iter()
            .map(|&s| snapshot.loss_and_grads(&tokens[s..s + window]))
            .collect::<Result<_>>()?;

        let inv = 1.0 / opts.batch as f32;
        let mut mean_loss = 0.0f64;
        let mut grads: Vec<Vec<f32>> = velocity.iter().map(|v| vec![0.0; v.len()]).collect();
        for (loss, g) in &results {
            mean_loss += *loss as f64;
            for (acc, gi) in grads.iter_mut().zip(g) {
                for (a, &b) in acc.iter_mut().zip(gi) {
                    *a += b;
                }
            }
        }
        let mut norm_sq = 0.0f64;
        for g in grads.iter_mut() {
            for v in g.iter_mut() {
                *v *= inv;
                norm_sq += (*v as f64) * (*v as f64);
            }
        }
        if let Some(max_norm) = opts.clip_norm {
            let norm = norm_sq.sqrt() as f32;
            if norm > max_norm {
                let s = max_norm / norm;
                grads.iter_mut().flatten().for_each(|v| *v *= s);
            }
        }
        log.losses.push((mean_loss / opts.batch as f64) as f32);

        for (((_, param), vel), g) in model.named_tensors_mut().into_iter().zip(&mut velocity).zip(&grads) {
            for ((w, v), &gi) in param.data_mut().iter_mut().zip(vel.iter_mut()).zip(g) {
                *v = opts.momentum * *v + gi;
                *w -= opts.lr * *v;
            }
        }
    }
    Ok(log)
}
