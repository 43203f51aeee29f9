//! Llama-style decoder: configuration, weight layout, forward pass,
//! training and checkpoints.

mod checkpoint;
mod forward;
mod train;

pub use checkpoint::{
    encode_container,
    load_checkpoint, read_container, save_checkpoint, write_container, ContainerEntry, Payload,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use forward::{
    bind, bind_layer, block_forward, check_tokens, forward, logits, sample_loss, BoundLayer, BoundModel, LayerInputs,
    NORM_EPS,
};
pub use train::{train, TrainOptions, TrainingLog};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::tokenizer::VOCAB_SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub vocab_size: usize,
    pub context_len: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n_layers: 8,
            d_model: 64,
            n_heads: 4,
            d_ff: 172,
            vocab_size: VOCAB_SIZE,
            context_len: 128,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: &str| {
            Err(Error::Config {
                field,
                reason: reason.to_string(),
            })
        };
        if self.n_layers == 0 {
            return bad("n_layers", "must be at least 1");
        }
        if self.d_model == 0 {
            return bad("d_model", "must be at least 1");
        }
        if self.n_heads == 0 {
            return bad("n_heads", "must be at least 1");
        }
        if self.d_model % self.n_heads != 0 {
            return bad(
                "n_heads",
                &format!("d_model {} is not divisible by {} heads", self.d_model, self.n_heads),
            );
        }
        if self.d_ff == 0 {
            return bad("d_ff", "must be at least 1");
        }
        if self.vocab_size < 2 {
            return bad("vocab_size", "must be at least 2");
        }
        if self.context_len < 2 {
            return bad("context_len", "must be at least 2");
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Number of weights in the seven prunable matrices of one layer.
    pub fn prunable_per_layer(&self) -> usize {
        MatrixKind::ALL
            .iter()
            .map(|k| {
                let (r, c) = k.dims(self);
                r * c
            })
            .sum()
    }

    pub fn prunable_total(&self) -> usize {
        self.n_layers * self.prunable_per_layer()
    }

    /// Maps a flat index over all prunable weights (layer-major, canonical
    /// matrix order, row-major within a matrix) to its matrix and offset.
    pub fn locate_prunable(&self, index: usize) -> Option<(MatrixId, usize)> {
        let per_layer = self.prunable_per_layer();
        let layer = index / per_layer;
        if layer >= self.n_layers {
            return None;
        }
        let mut rest = index % per_layer;
        for kind in MatrixKind::ALL {
            let (r, c) = kind.dims(self);
            if rest < r * c {
                return Some((MatrixId { layer, kind }, rest));
            }
            rest -= r * c;
        }
        unreachable!("offset within layer is below the layer's prunable count")
    }

    /// All parameters, including embeddings, norm gains and the output head.
    pub fn total_params(&self) -> usize {
        let d = self.d_model;
        self.vocab_size * d
            + self.n_layers * (self.prunable_per_layer() + 2 * d)
            + d
            + d * self.vocab_size
    }
}

/// The seven prunable matrices of a decoder layer, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Wq,
    Wk,
    Wv,
    Wo,
    WGate,
    WUp,
    WDown,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 7] = [
        MatrixKind::Wq,
        MatrixKind::Wk,
        MatrixKind::Wv,
        MatrixKind::Wo,
        MatrixKind::WGate,
        MatrixKind::WUp,
        MatrixKind::WDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Wq => "wq",
            MatrixKind::Wk => "wk",
            MatrixKind::Wv => "wv",
            MatrixKind::Wo => "wo",
            MatrixKind::WGate => "w_gate",
            MatrixKind::WUp => "w_up",
            MatrixKind::WDown => "w_down",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// `(input_dim, output_dim)`; activations are multiplied as `x * W`.
    pub fn dims(self, config: &ModelConfig) -> (usize, usize) {
        let (d, f) = (config.d_model, config.d_ff);
        match self {
            MatrixKind::Wq | MatrixKind::Wk | MatrixKind::Wv | MatrixKind::Wo => (d, d),
            MatrixKind::WGate | MatrixKind::WUp => (d, f),
            MatrixKind::WDown => (f, d),
        }
    }
}

/// Identifies one prunable matrix in a model (layer index is 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatrixId {
    pub layer: usize,
    pub kind: MatrixKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub attn_norm: Tensor,
    pub wq: Tensor,
    pub wk: Tensor,
    pub wv: Tensor,
    pub wo: Tensor,
    pub mlp_norm: Tensor,
    pub w_gate: Tensor,
    pub w_up: Tensor,
    pub w_down: Tensor,
}

impl LayerWeights {
    pub fn matrix(&self, kind: MatrixKind) -> &Tensor {
        match kind {
            MatrixKind::Wq => &self.wq,
            MatrixKind::Wk => &self.wk,
            MatrixKind::Wv => &self.wv,
            MatrixKind::Wo => &self.wo,
            MatrixKind::WGate => &self.w_gate,
            MatrixKind::WUp => &self.w_up,
            MatrixKind::WDown => &self.w_down,
        }
    }

    pub fn matrix_mut(&mut self, kind: MatrixKind) -> &mut Tensor {
        match kind {
            MatrixKind::Wq => &mut self.wq,
            MatrixKind::Wk => &mut self.wk,
            MatrixKind::Wv => &mut self.wv,
            MatrixKind::Wo => &mut self.wo,
            MatrixKind::WGate => &mut self.w_gate,
            MatrixKind::WUp => &mut self.w_up,
            MatrixKind::WDown => &mut self.w_down,
        }
    }

    /// Parameters in checkpoint order.
    fn named(&self) -> [(&'static str, &Tensor); 9] {
        [
            ("attn_norm", &self.attn_norm),
            ("wq", &self.wq),
            ("wk", &self.wk),
            ("wv", &self.wv),
            ("wo", &self.wo),
            ("mlp_norm", &self.mlp_norm),
            ("w_gate", &self.w_gate),
            ("w_up", &self.w_up),
            ("w_down", &self.w_down),
        ]
    }

    fn named_mut(&mut self) -> [(&'static str, &mut Tensor); 9] {
        [
            ("attn_norm", &mut self.attn_norm),
            ("wq", &mut self.wq),
            ("wk", &mut self.wk),
            ("wv", &mut self.wv),
            ("wo", &mut self.wo),
            ("mlp_norm", &mut self.mlp_norm),
            ("w_gate", &mut self.w_gate),
            ("w_up", &mut self.w_up),
            ("w_down", &mut self.w_down),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub config: ModelConfig,
    pub tok_embeddings: Tensor,
    pub layers: Vec<LayerWeights>,
    pub final_norm: Tensor,
    pub output: Tensor,
}

impl ModelWeights {
    /// Seeded initialization: matrices uniform in `±1/sqrt(fan_in)`, norm gains 1.
    ///
    /// A one-hot lookup has fan-in 1, so embeddings are uniform in `±1`.
    pub fn init(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let bound = 1.0 / (fan_in as f32).sqrt();
            let data = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
            Tensor::matrix(rows, cols, data).expect("shape matches data")
        };
        let ones = |n: usize| Tensor::new(vec![n], vec![1.0; n]).expect("shape matches data");
        let (d, v) = (config.d_model, config.vocab_size);

        let tok_embeddings = uniform(v, d, 1);
        let mut layers = Vec::with_capacity(config.n_layers);
        for _ in 0..config.n_layers {
            let mut mat = |kind: MatrixKind| {
                let (r, c) = kind.dims(&config);
                uniform(r, c, r)
            };
            let wq = mat(MatrixKind::Wq);
            let wk = mat(MatrixKind::Wk);
            let wv = mat(MatrixKind::Wv);
            let wo = mat(MatrixKind::Wo);
            let w_gate = mat(MatrixKind::WGate);
            let w_up = mat(MatrixKind::WUp);
            let w_down = mat(MatrixKind::WDown);
            layers.push(LayerWeights {
                attn_norm: ones(d),
                wq,
                wk,
                wv,
                wo,
                mlp_norm: ones(d),
                w_gate,
                w_up,
                w_down,
            });
        }
        let output = uniform(d, v, d);
        Ok(ModelWeights {
            config,
            tok_embeddings,
            layers,
            final_norm: ones(d),
            output,
        })
    }

    pub fn matrix(&self, id: MatrixId) -> &Tensor {
        self.layers[id.layer].matrix(id.kind)
    }

    pub fn matrix_mut(&mut self, id: MatrixId) -> &mut Tensor {
        self.layers[id.layer].matrix_mut(id.kind)
    }

    /// Every prunable matrix, layer-major then canonical matrix order.
    pub fn prunable_ids(&self) -> impl Iterator<Item = MatrixId> {
        let n_layers = self.layers.len();
        (0..n_layers).flat_map(|layer| MatrixKind::ALL.into_iter().map(move |kind| MatrixId { layer, kind }))
    }

    /// All parameters with their checkpoint names, in checkpoint order.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("tok_embeddings".to_string(), &self.tok_embeddings)];
        for (i, layer) in self.layers.iter().enumerate() {
            for (name, t) in layer.named() {
                out.push((format!("layers.{i}.{name}"), t));
            }
        }
        out.push(("final_norm".to_string(), &self.final_norm));
        out.push(("output".to_string(), &self.output));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = vec![("tok_embeddings".to_string(), &mut self.tok_embeddings)];
        for (i, layer) in self.layers.iter_mut().enumerate() {
            for (name, t) in layer.named_mut() {
                out.push((format!("layers.{i}.{name}"), t));
            }
        }
        out.push(("final_norm".to_string(), &mut self.final_norm));
        out.push(("output".to_string(), &mut self.output));
        out
    }

    /// Expected shape of every named parameter for `config`.
    pub fn expected_shapes(config: &ModelConfig) -> Vec<(String, Vec<usize>)> {
        let (d, v) = (config.d_model, config.vocab_size);
        let mut out = vec![("tok_embeddings".to_string(), vec![v, d])];
        for i in 0..config.n_layers {
            out.push((format!("layers.{i}.attn_norm"), vec![d]));
            for kind in &MatrixKind::ALL[..4] {
                let (r, c) = kind.dims(config);
                out.push((format!("layers.{i}.{}", kind.name()), vec![r, c]));
            }
            out.push((format!("layers.{i}.mlp_norm"), vec![d]));
            for kind in &MatrixKind::ALL[4..] {
                let (r, c) = kind.dims(config);
                out.push((format!("layers.{i}.{}", kind.name()), vec![r, c]));
            }
        }
        out.push(("final_norm".to_string(), vec![d]));
        out.push(("output".to_string(), vec![d, v]));
        out
    }
}
