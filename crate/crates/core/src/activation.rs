//! First-order parameter activation `|w * dL/dw|` over the prunable
//! matrices, its sample mean, and the sorted-bucket and histogram summaries.

use rayon::prelude::*;
use serde::Serialize;

use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::model::{bind, sample_loss, MatrixKind, ModelWeights};

/// Per-layer activation values, each layer concatenating the seven prunable
/// matrices in canonical order (`wq, wk, wv, wo, w_gate, w_up, w_down`,
/// row-major within each).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationVector {
    layers: Vec<Vec<f32>>,
    samples: usize,
}

impl ActivationVector {
    /// Wraps precomputed values; every value must be finite and `>= 0`.
    pub fn from_layers(layers: Vec<Vec<f32>>, samples: usize) -> Result<Self> {
        for (l, values) in layers.iter().enumerate() {
            if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Numeric(format!("activation layer {} holds {bad}", l + 1)));
            }
        }
        Ok(ActivationVector { layers, samples })
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Number of samples averaged into this vector.
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Values of a 1-based layer.
    pub fn layer(&self, layer: usize) -> Result<&[f32]> {
        layer
            .checked_sub(1)
            .and_then(|i| self.layers.get(i))
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::Index(format!("layer {layer} outside 1..={}", self.layers.len()))
            })
    }

    pub fn layers(&self) -> &[Vec<f32>] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at a flat prunable-parameter index.
    pub fn get(&self, index: usize) -> Option<f32> {
        let mut rest = index;
        for layer in &self.layers {
            if rest < layer.len() {
                return Some(layer[rest]);
            }
            rest -= layer.len();
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = f32> + '_ {
        self.layers.iter().flatten().copied()
    }
}

/// `|w * dL/dw|` for every prunable weight, `L` being the sample's own mean
/// next-token cross-entropy.
pub fn activation(model: &ModelWeights, sample: &[usize]) -> Result<ActivationVector> {
    let mut tape = Tape::new();
    let bound = bind(&mut tape, model, true);
    let loss = sample_loss(&mut tape, &bound, sample)?;
    tape.backward(loss)?;

    let mut layers = Vec::with_capacity(model.layers.len());
    for (l, (weights, vars)) in model.layers.iter().zip(&bound.layers).enumerate() {
        let mut values = Vec::with_capacity(model.config.prunable_per_layer());
        for kind in MatrixKind::ALL {
            let w = weights.matrix(kind).data();
            match tape.grad(vars.matrix(kind)) {
                Some(g) => {
                    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
                        return Err(Error::Numeric(format!(
                            "gradient of layers.{l}.{} at element {i}",
                            kind.name()
                        )));
                    }
                    values.extend(w.iter().zip(g).map(|(w, g)| (w * g).abs()));
                }
                None => values.extend(std::iter::repeat_n(0.0, w.len())),
            }
        }
        layers.push(values);
    }
    ActivationVector::from_layers(layers, 1)
}

/// Elementwise mean of per-sample activations. Samples are evaluated in
/// parallel and summed in input order.
pub fn mean_activation(model: &ModelWeights, samples: &[Vec<usize>]) -> Result<ActivationVector> {
    if samples.is_empty() {
        return Err(Error::Contract("mean_activation over zero samples".into()));
    }
    let mut sums: Vec<Vec<f64>> = (0..model.layers.len())
        .map(|_| vec![0.0; model.config.prunable_per_layer()])
        .collect();
    let chunk = rayon::current_num_threads().max(1) * 2;
    for batch in samples.chunks(chunk) {
        let vectors: Vec<ActivationVector> = batch
            .par_iter()
            .map(|s| activation(model, s))
            .collect::<Result<_>>()?;
        for v in &vectors {
            for (acc, layer) in sums.iter_mut().zip(&v.layers) {
                for (a, &x) in acc.iter_mut().zip(layer) {
                    *a += x as f64;
                }
            }
        }
    }
    let n = samples.len() as f64;
    let layers = sums
        .into_iter()
        .map(|l| l.into_iter().map(|s| (s / n) as f32).collect())
        .collect();
    ActivationVector::from_layers(layers, samples.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerActivationProfile {
    /// 1-based.
    pub layer: usize,
    pub bucket_size: usize,
    pub samples: usize,
    pub bucket_means: Vec<f64>,
}

/// Sorts a layer's values ascending, cuts them into consecutive chunks of
/// `bucket_size` (the last may be short) and replaces each chunk by its mean.
pub fn bucketed_profile(
    v: &ActivationVector,
    layer: usize,
    bucket_size: usize,
) -> Result<LayerActivationProfile> {
    let values = v.layer(layer)?;
    Ok(LayerActivationProfile {
        layer,
        bucket_size,
        samples: v.samples,
        bucket_means: bucket_means(values, bucket_size)?,
    })
}

/// Sort-chunk-mean over raw values.
pub fn bucket_means(values: &[f32], bucket_size: usize) -> Result<Vec<f64>> {
    if bucket_size == 0 {
        return Err(Error::Contract("bucket size must be at least 1".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f32::total_cmp);
    Ok(sorted
        .chunks(bucket_size)
        .map(|c| c.iter().map(|&x| x as f64).sum::<f64>() / c.len() as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `n_bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Uniform bins over `[min, max]`; the maximum falls in the last bin and an
/// all-equal input puts every value in the first bin.
pub fn histogram(values: &[f64], n_bins: usize) -> Result<Histogram> {
    if n_bins == 0 {
        return Err(Error::Contract("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::Contract("histogram of an empty input".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / n_bins as f64;
    let edges = (0..=n_bins)
        .map(|i| if i == n_bins { max } else { min + width * i as f64 })
        .collect();
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let bin = if width > 0.0 {
            (((v - min) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    Ok(Histogram { edges, counts })
}
