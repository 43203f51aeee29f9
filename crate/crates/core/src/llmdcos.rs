//! Per-layer cosine similarity between two inputs' activation vectors,
//! layer-range summaries, dataset relevance and semantic-similarity scoring.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{activation, ActivationVector};
use crate::error::{Error, Result};
use crate::model::ModelWeights;
use crate::stats::spearman;

/// Inclusive 1-based layer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRange {
    pub lo: usize,
    pub hi: usize,
}

impl LayerRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        LayerRange { lo, hi }
    }

    pub fn all(n_layers: usize) -> Self {
        LayerRange { lo: 1, hi: n_layers }
    }

    pub fn validate(&self, n_layers: usize) -> Result<()> {
        if self.lo < 1 || self.lo > self.hi || self.hi > n_layers {
            return Err(Error::Contract(format!(
                "layer range {self} not within 1..={n_layers}"
            )));
        }
        Ok(())
    }

    pub fn layers(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl fmt::Display for LayerRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl FromStr for LayerRange {
    type Err = Error;

    /// `"5-8"` or a single layer `"5"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |p: &str| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Contract(format!("bad layer range `{s}`")))
        };
        let r = match s.split_once('-') {
            Some((a, b)) => LayerRange::new(parse(a)?, parse(b)?),
            None => {
                let l = parse(s)?;
                LayerRange::new(l, l)
            }
        };
        if r.lo < 1 || r.lo > r.hi {
            return Err(Error::Contract(format!("layer range `{s}` must satisfy 1 <= lo <= hi")));
        }
        Ok(r)
    }
}

fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("cosine of {} vs {} values", a.len(), b.len())));
    }
    let (mut dot, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::Degenerate("cosine with an all-zero activation slice".into()));
    }
    Ok((dot / (aa.sqrt() * bb.sqrt())).clamp(0.0, 1.0))
}

/// Cosine of two activation vectors restricted to one 1-based layer.
pub fn llmdcos_layer(a: &ActivationVector, b: &ActivationVector, layer: usize) -> Result<f64> {
    if a.n_layers() != b.n_layers() {
        return Err(Error::Shape(format!(
            "activation vectors with {} vs {} layers",
            a.n_layers(),
            b.n_layers()
        )));
    }
    cosine(a.layer(layer)?, b.layer(layer)?)
        .map_err(|e| match e {
            Error::Degenerate(m) => Error::Degenerate(format!("layer {layer}: {m}")),
            other => other,
        })
}

/// Cosines for every layer, first layer first.
pub fn llmdcos_layers(a: &ActivationVector, b: &ActivationVector) -> Result<Vec<f64>> {
    (1..=a.n_layers()).map(|l| llmdcos_layer(a, b, l)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairId {
    pub dataset_a: String,
    pub index_a: usize,
    pub dataset_b: String,
    pub index_b: usize,
}

impl PairId {
    pub fn label(&self) -> String {
        format!("{}:{}|{}:{}", self.dataset_a, self.index_a, self.dataset_b, self.index_b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeMean {
    pub lo: usize,
    pub hi: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmdcosReport {
    pub pair: PairId,
    /// Index `i` holds layer `i + 1`.
    pub cosines: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_mean: Option<RangeMean>,
}

impl LlmdcosReport {
    pub fn with_range(mut self, range: LayerRange) -> Result<Self> {
        let mean = layer_range_mean(&self.cosines, range)?;
        self.range_mean = Some(RangeMean {
            lo: range.lo,
            hi: range.hi,
            mean,
        });
        Ok(self)
    }
}

/// Per-layer LLMDcos for two samples; each activation vector is computed once.
pub fn llmdcos_profile(
    model: &ModelWeights,
    x1: &[usize],
    x2: &[usize],
    pair: PairId,
) -> Result<LlmdcosReport> {
    let (a, b) = rayon::join(|| activation(model, x1), || activation(model, x2));
    Ok(LlmdcosReport {
        pair,
        cosines: llmdcos_layers(&a?, &b?)?,
        range_mean: None,
    })
}

/// Mean of per-layer values (index `i` = layer `i + 1`) over an inclusive range.
pub fn layer_range_mean(cosines: &[f64], range: LayerRange) -> Result<f64> {
    range.validate(cosines.len())?;
    let vals = &cosines[range.lo - 1..range.hi];
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelevanceMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub range: LayerRange,
    pub pairs_per_cell: usize,
}

/// A named list of tokenized samples.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub name: String,
    pub samples: Vec<Vec<usize>>,
}

/// Activation values of the layers in `range` only.
fn range_slices(v: ActivationVector, range: LayerRange) -> Vec<Vec<f32>> {
    v.layers()[range.lo - 1..range.hi].to_vec()
}

fn range_mean_cos(a: &[Vec<f32>], b: &[Vec<f32>]) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        total += cosine(x, y)?;
    }
    Ok(total / a.len() as f64)
}

/// Mean range-LLMDcos between datasets over seeded random pairs.
///
/// Cell `(i, j)` averages `pairs_per_cell` draws with the first sample from
/// dataset `i` and `pairs_per_cell` draws with the first sample from dataset
/// `j`. Diagonal draws always use two distinct samples.
pub fn dataset_relevance(
    model: &ModelWeights,
    datasets: &[SampleSet],
    pairs_per_cell: usize,
    range: LayerRange,
    seed: u64,
) -> Result<RelevanceMatrix> {
    range.validate(model.config.n_layers)?;
    if pairs_per_cell == 0 {
        return Err(Error::Contract("pairs_per_cell must be at least 1".into()));
    }
    for ds in datasets {
        if ds.samples.len() < 2 {
            return Err(Error::Data(format!(
                "dataset `{}` has {} samples; same-dataset pairs need at least 2",
                ds.name,
                ds.samples.len()
            )));
        }
    }
    let k = datasets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // draws[i][j] = list of ((ds, idx), (ds, idx))
    let mut draws = vec![vec![Vec::with_capacity(pairs_per_cell); k]; k];
    for (i, row) in draws.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for _ in 0..pairs_per_cell {
                let a = rng.gen_range(0..datasets[i].samples.len());
                let b = if i == j {
                    let b = rng.gen_range(0..datasets[j].samples.len() - 1);
                    if b >= a { b + 1 } else { b }
                } else {
                    rng.gen_range(0..datasets[j].samples.len())
                };
                cell.push(((i, a), (j, b)));
            }
        }
    }

    let mut needed: Vec<(usize, usize)> = draws
        .iter()
        .flatten()
        .flatten()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    needed.sort_unstable();
    needed.dedup();
    let computed: Vec<Vec<Vec<f32>>> = needed
        .par_iter()
        .map(|&(d, s)| activation(model, &datasets[d].samples[s]).map(|v| range_slices(v, range)))
        .collect::<Result<_>>()?;
    let cache: BTreeMap<(usize, usize), Vec<Vec<f32>>> = needed.into_iter().zip(computed).collect();

    let mut raw = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut total = 0.0;
            for (a, b) in &draws[i][j] {
                total += range_mean_cos(&cache[a], &cache[b])?;
            }
            raw[i][j] = total / pairs_per_cell as f64;
        }
    }
    let values = (0..k)
        .map(|i| (0..k).map(|j| (raw[i][j] + raw[j][i]) / 2.0).collect())
        .collect();
    Ok(RelevanceMatrix {
        names: datasets.iter().map(|d| d.name.clone()).collect(),
        values,
        range,
        pairs_per_cell,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticEval {
    pub spearman: f64,
    pub scores: Vec<f64>,
    pub gold: Vec<f64>,
}

/// Scores each `(a, b, gold)` pair by its range-mean LLMDcos and correlates
/// the scores with the gold similarities.
pub fn semantic_eval(
    model: &ModelWeights,
    pairs: &[(Vec<usize>, Vec<usize>, f64)],
    range: LayerRange,
) -> Result<SemanticEval> {
    range.validate(model.config.n_layers)?;
    if pairs.len() < 3 {
        return Err(Error::Contract(format!(
            "semantic evaluation needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|(a, b, _)| {
            let va = range_slices(activation(model, a)?, range);
            let vb = range_slices(activation(model, b)?, range);
            range_mean_cos(&va, &vb)
        })
        .collect::<Result<_>>()?;
    let gold: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    Ok(SemanticEval {
        spearman: spearman(&scores, &gold)?,
        scores,
        gold,
    })
}
