//! Straight-line `f64` decoder used as an independent oracle for the tape.

use actigraph::model::ModelConfig;

pub fn matmul(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i * k + l] * b[l * n + j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

pub fn rms_norm(x: &[f64], d: usize, gain: &[f64], eps: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for row in x.chunks(d) {
        let ms: f64 = row.iter().map(|v| v * v).sum::<f64>() / d as f64;
        let inv = 1.0 / (ms + eps).sqrt();
        out.extend(row.iter().zip(gain).map(|(v, g)| g * v * inv));
    }
    out
}

pub fn softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn cross_entropy(logits: &[f64], vocab: usize, targets: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &t) in logits.chunks(vocab).zip(targets) {
        total -= softmax(row)[t].ln();
    }
    total / targets.len() as f64
}

fn rope(x: &mut [f64], d: usize, heads: usize) {
    let hd = d / heads;
    for (pos, row) in x.chunks_mut(d).enumerate() {
        for h in 0..heads {
            for p in 0..hd / 2 {
                let theta = pos as f64 * 10_000f64.powf(-((2 * p) as f64) / hd as f64);
                let (s, c) = theta.sin_cos();
                let i = h * hd + 2 * p;
                let (a, b) = (row[i], row[i + 1]);
                row[i] = a * c - b * s;
                row[i + 1] = a * s + b * c;
            }
        }
    }
}

fn silu(v: f64) -> f64 {
    v / (1.0 + (-v).exp())
}

/// Logits of the decoder for `params` in checkpoint order.
pub fn logits(cfg: &ModelConfig, params: &[Vec<f64>], tokens: &[usize]) -> Vec<f64> {
    trace(cfg, params, tokens).0
}

/// Logits plus, per layer, the dense inputs of `[wq/wk/wv, wo, w_gate/w_up, w_down]`.
pub fn trace(cfg: &ModelConfig, params: &[Vec<f64>], tokens: &[usize]) -> (Vec<f64>, Vec<[Vec<f64>; 4]>) {
    let mut inputs = Vec::new();
    let (d, f, v) = (cfg.d_model, cfg.d_ff, cfg.vocab_size);
    let t = tokens.len();
    let eps = 1e-5;
    let emb = &params[0];
    let mut x: Vec<f64> = tokens.iter().flat_map(|&id| emb[id * d..(id + 1) * d].to_vec()).collect();
    let heads = cfg.n_heads;
    let hd = d / heads;
    for l in 0..cfg.n_layers {
        let p = &params[1 + 9 * l..1 + 9 * (l + 1)];
        let (attn_norm, wq, wk, wv, wo, mlp_norm, wg, wu, wd) =
            (&p[0], &p[1], &p[2], &p[3], &p[4], &p[5], &p[6], &p[7], &p[8]);
        let n = rms_norm(&x, d, attn_norm, eps);
        let mut q = matmul(&n, t, d, wq, d);
        let mut k = matmul(&n, t, d, wk, d);
        let vv = matmul(&n, t, d, wv, d);
        rope(&mut q, d, heads);
        rope(&mut k, d, heads);
        let mut att = vec![0.0; t * d];
        for h in 0..heads {
            for i in 0..t {
                let scores: Vec<f64> = (0..=i)
                    .map(|j| {
                        (0..hd).map(|c| q[i * d + h * hd + c] * k[j * d + h * hd + c]).sum::<f64>()
                            / (hd as f64).sqrt()
                    })
                    .collect();
                let pr = softmax(&scores);
                for c in 0..hd {
                    att[i * d + h * hd + c] = (0..=i).map(|j| pr[j] * vv[j * d + h * hd + c]).sum();
                }
            }
        }
        let o = matmul(&att, t, d, wo, d);
        x.iter_mut().zip(&o).for_each(|(a, b)| *a += b);
        let n2 = rms_norm(&x, d, mlp_norm, eps);
        let g = matmul(&n2, t, d, wg, f);
        let u = matmul(&n2, t, d, wu, f);
        let a: Vec<f64> = g.iter().zip(&u).map(|(g, u)| silu(*g) * u).collect();
        let down = matmul(&a, t, f, wd, d);
        x.iter_mut().zip(&down).for_each(|(a, b)| *a += b);
        inputs.push([n, att, n2, a]);
    }
    let n = rms_norm(&x, d, &params[params.len() - 2], eps);
    (matmul(&n, t, d, &params[params.len() - 1], v), inputs)
}

/// Mean next-token cross-entropy, the quantity the tape differentiates.
pub fn sample_loss(cfg: &ModelConfig, params: &[Vec<f64>], tokens: &[usize]) -> f64 {
    let lg = logits(cfg, params, &tokens[..tokens.len() - 1]);
    cross_entropy(&lg, cfg.vocab_size, &tokens[1..])
}
