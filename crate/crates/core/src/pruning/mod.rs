//! Unstructured pruning with Wanda or magnitude scores under per-layer
//! sparsity schedules.

mod calibration;
mod schedule;

pub use calibration::{build_calibration, CalibrationSet};
pub use schedule::{build_schedule, build_schedule_weighted, SparsitySchedule};

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor};
use crate::error::{Error, Result};
use crate::model::{
    bind, bind_layer, block_forward, encode_container, logits, read_container, write_container,
    ContainerEntry,
    LayerWeights, MatrixId, MatrixKind, ModelConfig, ModelWeights, Payload,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PruneMethod {
    #[default]
    Wanda,
    Magnitude,
}

/// Set of weights competing for removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonGroup {
    /// All weights feeding one output unit.
    #[default]
    PerOutput,
    /// The whole matrix.
    PerMatrix,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneOptions {
    pub method: PruneMethod,
    pub group: ComparisonGroup,
}

/// `|W[j][o]| * norms[j]` for `W` of shape `[in, out]` and one norm per input
/// feature.
pub fn wanda_scores(w: &Tensor, feature_norms: &[f32]) -> Result<Vec<f32>> {
    let (rows, cols) = w.dims2()?;
    if feature_norms.len() != rows {
        return Err(Error::Shape(format!(
            "wanda_scores: {} feature norms for a matrix with input dimension {rows}",
            feature_norms.len()
        )));
    }
    if let Some(bad) = feature_norms.iter().find(|n| !(**n >= 0.0)) {
        return Err(Error::Contract(format!("feature norm {bad} is negative")));
    }
    let mut out = Vec::with_capacity(rows * cols);
    for (row, &n) in w.data().chunks(cols).zip(feature_norms) {
        out.extend(row.iter().map(|v| v.abs() * n));
    }
    Ok(out)
}

pub fn magnitude_scores(w: &Tensor) -> Vec<f32> {
    w.data().iter().map(|v| v.abs()).collect()
}

/// `floor(s * n)`, tolerant of fractions that land a hair below an integer.
pub fn prune_count(s: f64, n: usize) -> usize {
    ((s * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Keep-mask for one `[in, out]` score matrix: the lowest-scoring weights of
/// each comparison group are dropped, ties going to the lower input index.
pub fn select_keep(
    scores: &[f32],
    in_dim: usize,
    out_dim: usize,
    s: f64,
    group: ComparisonGroup,
) -> Vec<bool> {
    debug_assert_eq!(scores.len(), in_dim * out_dim);
    let mut keep = vec![true; scores.len()];
    match group {
        ComparisonGroup::PerOutput => {
            let k = prune_count(s, in_dim);
            let mut idx: Vec<usize> = Vec::with_capacity(in_dim);
            for o in 0..out_dim {
                idx.clear();
                idx.extend(0..in_dim);
                idx.sort_by(|&a, &b| {
                    scores[a * out_dim + o]
                        .total_cmp(&scores[b * out_dim + o])
                        .then(a.cmp(&b))
                });
                for &j in &idx[..k] {
                    keep[j * out_dim + o] = false;
                }
            }
        }
        ComparisonGroup::PerMatrix => {
            let k = prune_count(s, scores.len());
            let mut idx: Vec<usize> = (0..scores.len()).collect();
            idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
            for &i in &idx[..k] {
                keep[i] = false;
            }
        }
    }
    keep
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskEntry {
    pub id: MatrixId,
    pub shape: Vec<usize>,
    /// `true` = weight kept.
    pub keep: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneMask {
    pub entries: Vec<MaskEntry>,
}

impl PruneMask {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.keep.len()).sum()
    }

    pub fn pruned(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.keep.iter().filter(|&&k| !k).count())
            .sum()
    }

    pub fn realized_sparsity(&self) -> f64 {
        self.pruned() as f64 / self.total() as f64
    }

    /// Realized sparsity of one 1-based layer.
    pub fn layer_sparsity(&self, layer: usize) -> f64 {
        let (mut pruned, mut total) = (0, 0);
        for e in self.entries.iter().filter(|e| e.id.layer + 1 == layer) {
            total += e.keep.len();
            pruned += e.keep.iter().filter(|&&k| !k).count();
        }
        pruned as f64 / total.max(1) as f64
    }

    pub fn save(&self, path: impl AsRef<Path>, config: &ModelConfig) -> Result<()> {
        write_container(path, "mask", config, &self.container_entries())
    }

    /// Serialized mask container, as written by [`PruneMask::save`].
    pub fn to_bytes(&self, config: &ModelConfig) -> Result<Vec<u8>> {
        encode_container("mask", config, &self.container_entries())
    }

    fn container_entries(&self) -> Vec<ContainerEntry> {
        self
            .entries
            .iter()
            .map(|e| ContainerEntry {
                name: format!("layers.{}.{}", e.id.layer, e.id.kind.name()),
                shape: e.shape.clone(),
                payload: Payload::Bool(e.keep.clone()),
            })
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(ModelConfig, Self)> {
        let (kind, config, raw) = read_container(path)?;
        if kind != "mask" {
            return Err(Error::Format(format!("expected a mask, found `{kind}`")));
        }
        let mut entries = Vec::with_capacity(raw.len());
        for e in raw {
            let id = parse_matrix_name(&e.name)
                .ok_or_else(|| Error::Format(format!("unknown mask tensor `{}`", e.name)))?;
            let Payload::Bool(keep) = e.payload else {
                return Err(Error::Format(format!("mask tensor `{}` is not boolean", e.name)));
            };
            entries.push(MaskEntry {
                id,
                shape: e.shape,
                keep,
            });
        }
        Ok((config, PruneMask { entries }))
    }
}

fn parse_matrix_name(name: &str) -> Option<MatrixId> {
    let rest = name.strip_prefix("layers.")?;
    let (layer, kind) = rest.split_once('.')?;
    Some(MatrixId {
        layer: layer.parse().ok()?,
        kind: MatrixKind::from_name(kind)?,
    })
}

/// Sum of squares of each input feature of the four distinct matrix inputs of
/// a layer: `[attn_in, attn_out, mlp_in, down_in]`.
type InputSumSq = [Vec<f64>; 4];

fn input_slot(kind: MatrixKind) -> usize {
    match kind {
        MatrixKind::Wq | MatrixKind::Wk | MatrixKind::Wv => 0,
        MatrixKind::Wo => 1,
        MatrixKind::WGate | MatrixKind::WUp => 2,
        MatrixKind::WDown => 3,
    }
}

fn column_sumsq(t: &Tensor) -> Vec<f64> {
    let (_, cols) = t.rows_cols();
    let mut out = vec![0.0; cols];
    for row in t.data().chunks(cols) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += (v as f64) * (v as f64);
        }
    }
    out
}

fn add_sumsq(acc: &mut InputSumSq, other: &InputSumSq) {
    for (a, b) in acc.iter_mut().zip(other) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
}

/// Runs one decoder layer on a hidden state, returning its output and the
/// per-feature sums of squares of its matrix inputs.
fn layer_pass(config: &ModelConfig, layer: &LayerWeights, hidden: &Tensor) -> Result<(Tensor, InputSumSq)> {
    let mut tape = Tape::new();
    let x = tape.constant(hidden.clone());
    let bound = bind_layer(&mut tape, layer, false);
    let (out, inputs) = block_forward(&mut tape, config, &bound, x)?;
    let stats = [
        column_sumsq(tape.value(inputs.attn_in)),
        column_sumsq(tape.value(inputs.attn_out)),
        column_sumsq(tape.value(inputs.mlp_in)),
        column_sumsq(tape.value(inputs.down_in)),
    ];
    Ok((tape.value(out).clone(), stats))
}

/// Per-input-feature L2 norm of a matrix's inputs over every token of every
/// calibration sequence, from a forward pass of `model` as given.
pub fn feature_norms(model: &ModelWeights, calib: &CalibrationSet, id: MatrixId) -> Result<Vec<f32>> {
    if calib.is_empty() {
        return Err(Error::Contract("feature norms need a non-empty calibration set".into()));
    }
    if id.layer >= model.layers.len() {
        return Err(Error::Index(format!("layer index {} out of range", id.layer)));
    }
    let per_seq: Vec<Vec<f64>> = calib
        .sequences
        .par_iter()
        .map(|seq| {
            let mut tape = Tape::new();
            let bound = bind(&mut tape, model, false);
            let (_, traces) = logits(&mut tape, &bound, seq)?;
            Ok(column_sumsq(tape.value(traces[id.layer].input_of(id.kind))))
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0f64; per_seq[0].len()];
    for s in &per_seq {
        for (a, b) in acc.iter_mut().zip(s) {
            *a += b;
        }
    }
    Ok(acc.into_iter().map(|v| v.sqrt() as f32).collect())
}

fn embed_sequence(model: &ModelWeights, seq: &[usize]) -> Result<Tensor> {
    crate::model::check_tokens(&model.config, seq)?;
    let d = model.config.d_model;
    let table = model.tok_embeddings.data();
    let data = seq.iter().flat_map(|&id| table[id * d..(id + 1) * d].iter().copied()).collect();
    Tensor::matrix(seq.len(), d, data)
}

/// Prunes every prunable matrix according to `schedule`; the input model is
/// not modified.
///
/// With Wanda scores, layers are processed in order: each layer's input
/// statistics come from calibration activations propagated through the
/// already-pruned earlier layers.
pub fn prune(
    model: &ModelWeights,
    schedule: &SparsitySchedule,
    calib: &CalibrationSet,
    opts: PruneOptions,
) -> Result<(ModelWeights, PruneMask)> {
    let config = model.config;
    schedule.check_congruent(&config)?;
    let wanda = opts.method == PruneMethod::Wanda;
    if wanda && calib.is_empty() {
        return Err(Error::Contract("Wanda pruning needs a non-empty calibration set".into()));
    }
    let mut pruned = model.clone();
    let mut entries = Vec::with_capacity(config.n_layers * MatrixKind::ALL.len());
    let mut hidden: Vec<Tensor> = if wanda {
        calib
            .sequences
            .iter()
            .map(|s| embed_sequence(model, s))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    for l in 0..config.n_layers {
        let s = schedule.per_layer[l];
        let norms: Option<Vec<Vec<f32>>> = if wanda {
            let stats: Vec<InputSumSq> = hidden
                .par_iter()
                .map(|h| layer_pass(&config, &pruned.layers[l], h).map(|(_, st)| st))
                .collect::<Result<_>>()?;
            let mut acc = stats[0].clone();
            for st in &stats[1..] {
                add_sumsq(&mut acc, st);
            }
            Some(
                acc.iter()
                    .map(|v| v.iter().map(|x| x.sqrt() as f32).collect())
                    .collect(),
            )
        } else {
            None
        };

        for kind in MatrixKind::ALL {
            let w = pruned.layers[l].matrix_mut(kind);
            let (in_dim, out_dim) = w.dims2()?;
            let scores = match &norms {
                Some(n) => wanda_scores(w, &n[input_slot(kind)])?,
                None => magnitude_scores(w),
            };
            let keep = select_keep(&scores, in_dim, out_dim, s, opts.group);
            for (v, &k) in w.data_mut().iter_mut().zip(&keep) {
                if !k {
                    *v = 0.0;
                }
            }
            entries.push(MaskEntry {
                id: MatrixId { layer: l, kind },
                shape: vec![in_dim, out_dim],
                keep,
            });
        }

        if wanda && l + 1 < config.n_layers {
            hidden = hidden
                .par_iter()
                .map(|h| layer_pass(&config, &pruned.layers[l], h).map(|(out, _)| out))
                .collect::<Result<_>>()?;
        }
    }
    Ok((pruned, PruneMask { entries }))
}
