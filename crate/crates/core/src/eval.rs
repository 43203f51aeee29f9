//! Perplexity and brute-force single-weight ablation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{forward, ModelWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Checkpoint or model label; empty when evaluating an in-memory model.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub model: String,
    pub corpus: String,
    /// Number of predicted positions.
    pub token_count: usize,
    pub mean_nll: f64,
    pub perplexity: f64,
}

/// Summed next-token NLL of one window, from `f64` log-softmax of the logits.
fn window_nll(model: &ModelWeights, window: &[usize]) -> Result<f64> {
    let logits = forward(model, &window[..window.len() - 1])?;
    let vocab = model.config.vocab_size;
    let mut total = 0.0;
    for (row, &target) in logits.data().chunks(vocab).zip(&window[1..]) {
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
        let lse = row.iter().map(|&v| (v as f64 - max).exp()).sum::<f64>().ln() + max;
        total += lse - row[target] as f64;
    }
    Ok(total)
}

/// Perplexity over disjoint windows of `context_len` tokens; each window
/// predicts its tokens after the first. A trailing window shorter than two
/// tokens is skipped.
pub fn perplexity(
    model: &ModelWeights,
    corpus_name: &str,
    tokens: &[usize],
    context_len: usize,
) -> Result<EvalResult> {
    if tokens.len() < 2 {
        return Err(Error::Data(format!(
            "corpus `{corpus_name}` has {} tokens; perplexity needs at least 2",
            tokens.len()
        )));
    }
    if context_len < 2 || context_len > model.config.context_len {
        return Err(Error::Contract(format!(
            "evaluation window {context_len} must lie in 2..={}",
            model.config.context_len
        )));
    }
    let windows: Vec<&[usize]> = tokens.chunks(context_len).filter(|w| w.len() >= 2).collect();
    let sums: Vec<f64> = windows
        .par_iter()
        .map(|w| window_nll(model, w))
        .collect::<Result<_>>()?;
    let count: usize = windows.iter().map(|w| w.len() - 1).sum();
    let mean_nll = sums.iter().sum::<f64>() / count as f64;
    Ok(EvalResult {
        model: String::new(),
        corpus: corpus_name.to_string(),
        token_count: count,
        mean_nll,
        perplexity: mean_nll.exp(),
    })
}

pub const MAX_ABLATION_TARGETS: usize = 100_000;

/// `|L(w) - L(w with weight i zeroed)|` for each flat prunable index in
/// `targets`. Works on private copies; `model` is untouched.
pub fn exact_ablation(
    model: &ModelWeights,
    sample: &[usize],
    targets: &[usize],
) -> Result<BTreeMap<usize, f64>> {
    if targets.len() > MAX_ABLATION_TARGETS {
        return Err(Error::Contract(format!(
            "{} ablation targets exceed the limit of {MAX_ABLATION_TARGETS}",
            targets.len()
        )));
    }
    let config = model.config;
    let located: Vec<_> = targets
        .iter()
        .map(|&i| {
            config.locate_prunable(i).map(|loc| (i, loc)).ok_or_else(|| {
                Error::Index(format!(
                    "parameter index {i} outside 0..{}",
                    config.prunable_total()
                ))
            })
        })
        .collect::<Result<_>>()?;
    let base = model.loss(sample)? as f64;

    let chunk = located.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let parts: Vec<Vec<(usize, f64)>> = located
        .par_chunks(chunk)
        .map(|part| {
            let mut work = model.clone();
            let mut out = Vec::with_capacity(part.len());
            for &(i, (id, offset)) in part {
                let original = work.matrix(id).data()[offset];
                if original == 0.0 {
                    out.push((i, 0.0));
                    continue;
                }
                work.matrix_mut(id).data_mut()[offset] = 0.0;
                let ablated = work.loss(sample);
                work.matrix_mut(id).data_mut()[offset] = original;
                out.push((i, (base - ablated? as f64).abs()));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}
