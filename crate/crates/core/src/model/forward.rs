use super::{LayerWeights, MatrixKind, ModelConfig, ModelWeights};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

pub const NORM_EPS: f32 = 1e-5;

/// One decoder layer's parameters recorded on a tape.
#[derive(Debug, Clone, Copy)]
pub struct BoundLayer {
    pub attn_norm: Var,
    pub wq: Var,
    pub wk: Var,
    pub wv: Var,
    pub wo: Var,
    pub mlp_norm: Var,
    pub w_gate: Var,
    pub w_up: Var,
    pub w_down: Var,
}

impl BoundLayer {
    pub fn matrix(&self, kind: MatrixKind) -> Var {
        match kind {
            MatrixKind::Wq => self.wq,
            MatrixKind::Wk => self.wk,
            MatrixKind::Wv => self.wv,
            MatrixKind::Wo => self.wo,
            MatrixKind::WGate => self.w_gate,
            MatrixKind::WUp => self.w_up,
            MatrixKind::WDown => self.w_down,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundModel {
    pub config: ModelConfig,
    pub tok_embeddings: Var,
    pub layers: Vec<BoundLayer>,
    pub final_norm: Var,
    pub output: Var,
}

impl BoundModel {
    /// Parameter handles in checkpoint order (matches `ModelWeights::named_tensors`).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = vec![self.tok_embeddings];
        for l in &self.layers {
            out.extend([
                l.attn_norm, l.wq, l.wk, l.wv, l.wo, l.mlp_norm, l.w_gate, l.w_up, l.w_down,
            ]);
        }
        out.push(self.final_norm);
        out.push(self.output);
        out
    }
}

/// Records every parameter of `model` on `tape` as a leaf.
pub fn bind(tape: &mut Tape, model: &ModelWeights, requires_grad: bool) -> BoundModel {
    let tok_embeddings = tape.leaf(model.tok_embeddings.clone().with_requires_grad(requires_grad));
    let layers = model
        .layers
        .iter()
        .map(|l| bind_layer(tape, l, requires_grad))
        .collect();
    let final_norm = tape.leaf(model.final_norm.clone().with_requires_grad(requires_grad));
    let output = tape.leaf(model.output.clone().with_requires_grad(requires_grad));
    BoundModel {
        config: model.config,
        tok_embeddings,
        layers,
        final_norm,
        output,
    }
}

pub fn bind_layer(tape: &mut Tape, layer: &LayerWeights, requires_grad: bool) -> BoundLayer {
    let mut leaf = |t: &Tensor| tape.leaf(t.clone().with_requires_grad(requires_grad));
    BoundLayer {
        attn_norm: leaf(&layer.attn_norm),
        wq: leaf(&layer.wq),
        wk: leaf(&layer.wk),
        wv: leaf(&layer.wv),
        wo: leaf(&layer.wo),
        mlp_norm: leaf(&layer.mlp_norm),
        w_gate: leaf(&layer.w_gate),
        w_up: leaf(&layer.w_up),
        w_down: leaf(&layer.w_down),
    }
}

/// The tensors each prunable matrix of a layer multiplies, as recorded
/// during a forward pass.
#[derive(Debug, Clone, Copy)]
pub struct LayerInputs {
    /// Normalized residual stream, input of `wq`, `wk` and `wv`.
    pub attn_in: Var,
    /// Concatenated head outputs, input of `wo`.
    pub attn_out: Var,
    /// Normalized residual stream, input of `w_gate` and `w_up`.
    pub mlp_in: Var,
    /// `silu(gate) * up`, input of `w_down`.
    pub down_in: Var,
}

impl LayerInputs {
    pub fn input_of(&self, kind: MatrixKind) -> Var {
        match kind {
            MatrixKind::Wq | MatrixKind::Wk | MatrixKind::Wv => self.attn_in,
            MatrixKind::Wo => self.attn_out,
            MatrixKind::WGate | MatrixKind::WUp => self.mlp_in,
            MatrixKind::WDown => self.down_in,
        }
    }
}

/// One pre-norm decoder block:
/// `x += attn(rms_norm(x))`, then `x += swiglu(rms_norm(x))`.
pub fn block_forward(
    tape: &mut Tape,
    config: &ModelConfig,
    layer: &BoundLayer,
    x: Var,
) -> Result<(Var, LayerInputs)> {
    let heads = config.n_heads;
    let head_dim = config.head_dim();
    let scale = 1.0 / (head_dim as f32).sqrt();

    let attn_in = tape.rms_norm(x, layer.attn_norm, NORM_EPS)?;
    let q = tape.matmul(attn_in, layer.wq)?;
    let k = tape.matmul(attn_in, layer.wk)?;
    let v = tape.matmul(attn_in, layer.wv)?;
    let q = tape.rope(q, heads)?;
    let k = tape.rope(k, heads)?;
    let mut head_outs = Vec::with_capacity(heads);
    for h in 0..heads {
        let qh = tape.slice_cols(q, h * head_dim, head_dim)?;
        let kh = tape.slice_cols(k, h * head_dim, head_dim)?;
        let vh = tape.slice_cols(v, h * head_dim, head_dim)?;
        let kt = tape.transpose(kh)?;
        let scores = tape.matmul(qh, kt)?;
        let scores = tape.scale(scores, scale)?;
        let probs = tape.causal_softmax(scores)?;
        head_outs.push(tape.matmul(probs, vh)?);
    }
    let attn_out = if heads == 1 {
        head_outs[0]
    } else {
        tape.concat_cols(&head_outs)?
    };
    let attn = tape.matmul(attn_out, layer.wo)?;
    let x = tape.add(x, attn)?;

    let mlp_in = tape.rms_norm(x, layer.mlp_norm, NORM_EPS)?;
    let gate = tape.matmul(mlp_in, layer.w_gate)?;
    let up = tape.matmul(mlp_in, layer.w_up)?;
    let gate = tape.silu(gate)?;
    let down_in = tape.mul(gate, up)?;
    let mlp = tape.matmul(down_in, layer.w_down)?;
    let x = tape.add(x, mlp)?;

    Ok((
        x,
        LayerInputs {
            attn_in,
            attn_out,
            mlp_in,
            down_in,
        },
    ))
}

pub fn check_tokens(config: &ModelConfig, tokens: &[usize]) -> Result<()> {
    if tokens.is_empty() {
        return Err(Error::Contract("forward on an empty token sequence".into()));
    }
    if tokens.len() > config.context_len {
        return Err(Error::Length {
            len: tokens.len(),
            max: config.context_len,
        });
    }
    if let Some(&bad) = tokens.iter().find(|&&id| id >= config.vocab_size) {
        return Err(Error::Index(format!(
            "token id {bad} >= vocabulary size {}",
            config.vocab_size
        )));
    }
    Ok(())
}

/// Embedding lookup; the first stage of the forward pass.
pub(crate) fn embed(tape: &mut Tape, bound: &BoundModel, tokens: &[usize]) -> Result<Var> {
    check_tokens(&bound.config, tokens)?;
    tape.embed(bound.tok_embeddings, tokens)
}

/// Final norm and output head; the last stage of the forward pass.
pub(crate) fn head(tape: &mut Tape, bound: &BoundModel, x: Var) -> Result<Var> {
    let x = tape.rms_norm(x, bound.final_norm, NORM_EPS)?;
    tape.matmul(x, bound.output)
}

/// Full forward pass on a tape; returns `[t, vocab]` logits and every layer's
/// matrix inputs.
pub fn logits(
    tape: &mut Tape,
    bound: &BoundModel,
    tokens: &[usize],
) -> Result<(Var, Vec<LayerInputs>)> {
    let mut x = embed(tape, bound, tokens)?;
    let mut traces = Vec::with_capacity(bound.layers.len());
    for layer in &bound.layers {
        let (next, inputs) = block_forward(tape, &bound.config, layer, x)?;
        x = next;
        traces.push(inputs);
    }
    Ok((head(tape, bound, x)?, traces))
}

/// Logits for `tokens` without recording gradients.
pub fn forward(model: &ModelWeights, tokens: &[usize]) -> Result<Tensor> {
    let mut tape = Tape::new();
    let bound = bind(&mut tape, model, false);
    let (out, _) = logits(&mut tape, &bound, tokens)?;
    Ok(tape.value(out).clone())
}

/// Mean next-token cross-entropy of `tokens`: position `i` predicts token
/// `i + 1`. Accepts up to `context_len + 1` tokens.
pub fn sample_loss(tape: &mut Tape, bound: &BoundModel, tokens: &[usize]) -> Result<Var> {
    if tokens.len() < 2 {
        return Err(Error::Contract(format!(
            "sample_loss needs at least 2 tokens, got {}",
            tokens.len()
        )));
    }
    let (out, _) = logits(tape, bound, &tokens[..tokens.len() - 1])?;
    tape.cross_entropy(out, &tokens[1..])
}

impl ModelWeights {
    /// Scalar value of [`sample_loss`].
    pub fn loss(&self, tokens: &[usize]) -> Result<f32> {
        let mut tape = Tape::new();
        let bound = bind(&mut tape, self, false);
        let l = sample_loss(&mut tape, &bound, tokens)?;
        tape.value(l).item()
    }

    /// Loss and the gradient of every parameter, in checkpoint order.
    pub fn loss_and_grads(&self, tokens: &[usize]) -> Result<(f32, Vec<Vec<f32>>)> {
        let mut tape = Tape::new();
        let bound = bind(&mut tape, self, true);
        let l = sample_loss(&mut tape, &bound, tokens)?;
        let loss = tape.value(l).item()?;
        tape.backward(l)?;
        let grads = bound
            .vars()
            .into_iter()
            .map(|v| {
                tape.grad(v)
                    .map(<[f32]>::to_vec)
                    .unwrap_or_else(|| vec![0.0; tape.value(v).numel()])
            })
            .collect();
        Ok((loss, grads))
    }
}
