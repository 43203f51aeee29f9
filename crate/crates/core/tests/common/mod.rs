#![allow(dead_code)]

pub mod reference;

use actigraph::model::{ModelConfig, ModelWeights};

/// Central difference of `f` along coordinate `i`.
pub fn central_diff(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], i: usize, eps: f64) -> f64 {
    let mut p = x.to_vec();
    p[i] = x[i] + eps;
    let up = f(&p);
    p[i] = x[i] - eps;
    let down = f(&p);
    (up - down) / (2.0 * eps)
}

/// `|g - fd| <= max(rel * |g|, abs)`.
pub fn grad_close(g: f64, fd: f64, rel: f64, abs: f64) -> bool {
    (g - fd).abs() <= (rel * g.abs()).max(abs)
}

pub fn tiny_config(n_layers: usize, d_model: usize, n_heads: usize, d_ff: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        n_layers,
        d_model,
        n_heads,
        d_ff,
        vocab_size: 259,
        context_len: 16,
        seed,
    }
}

/// Every parameter of `model` as `f64`, in checkpoint order.
pub fn params_f64(model: &ModelWeights) -> Vec<Vec<f64>> {
    model
        .named_tensors()
        .iter()
        .map(|(_, t)| t.data().iter().map(|&v| v as f64).collect())
        .collect()
}

/// Deterministic pseudo-random bytes for test inputs.
pub fn lcg_tokens(n: usize, seed: u64, vocab: usize) -> Vec<usize> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as usize) % vocab
        })
        .collect()
}

/// Checkpoint-order positions of the prunable matrices, in activation order.
pub fn prunable_slots(n_layers: usize) -> Vec<usize> {
    (0..n_layers)
        .flat_map(|l| [1, 2, 3, 4, 6, 7, 8].map(|k| 1 + 9 * l + k))
        .collect()
}

/// Tokens that read as text: `BOS` followed by lowercase bytes.
pub fn text_sample(len: usize, seed: u64) -> Vec<usize> {
    let mut s = vec![actigraph::tokenizer::BOS];
    s.extend(lcg_tokens(len - 1, seed, 26).into_iter().map(|b| b + 97));
    s
}
