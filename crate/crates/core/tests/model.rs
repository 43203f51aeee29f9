mod common;

use actigraph::autodiff::Tensor;
use actigraph::model::{
    forward, load_checkpoint, save_checkpoint, train, ModelConfig, ModelWeights, TrainOptions,
};
use actigraph::Error;
use common::{lcg_tokens, tiny_config};
use proptest::prelude::*;

fn small() -> ModelConfig {
    tiny_config(2, 16, 2, 32, 3)
}

#[test]
fn single_token_logits_shape() {
    let m = ModelWeights::init(small()).unwrap();
    assert_eq!(forward(&m, &[65]).unwrap().shape(), &[1, 259]);
}

#[test]
fn causality_is_bit_exact() {
    let m = ModelWeights::init(small()).unwrap();
    let base = lcg_tokens(12, 1, 259);
    let before = forward(&m, &base).unwrap();
    for j in [0, 5, 11] {
        let mut changed = base.clone();
        changed[j] = (changed[j] + 1) % 259;
        let after = forward(&m, &changed).unwrap();
        let cut = j * 259;
        assert_eq!(&before.data()[..cut], &after.data()[..cut], "position {j}");
        assert_ne!(&before.data()[cut..cut + 259], &after.data()[cut..cut + 259]);
    }
}

#[test]
fn golden_logits() {
    let m = ModelWeights::init(tiny_config(2, 8, 2, 12, 5)).unwrap();
    let l = forward(&m, &[256, 72, 105, 33]).unwrap();
    let d = l.data();
    let got = [d[0], d[1], d[100], d[258], d[259], d[259 * 3 + 17], d[259 * 4 - 1]];
    let want = [-0.9868683, 0.38032833, 0.14711541, 1.0784937, -0.17294876, -0.11856016, -0.5656457];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-5, "{got:?}");
    }
}

#[test]
fn uniform_logits_give_log_vocab() {
    let mut m = ModelWeights::init(small()).unwrap();
    m.output.data_mut().fill(0.0);
    let loss = m.loss(&lcg_tokens(10, 2, 259)).unwrap() as f64;
    assert!((loss - 259f64.ln()).abs() < 1e-5, "{loss}");
}

#[test]
fn forward_input_errors() {
    let m = ModelWeights::init(small()).unwrap();
    assert!(matches!(forward(&m, &[1; 17]), Err(Error::Length { len: 17, max: 16 })));
    assert!(matches!(forward(&m, &[1, 259]), Err(Error::Index(_))));
    assert!(matches!(m.loss(&[5]), Err(Error::Contract(_))));
}

#[test]
fn vocabulary_permutation_leaves_loss_unchanged() {
    let m = ModelWeights::init(small()).unwrap();
    let (v, d) = (259, 16);
    let perm: Vec<usize> = (0..v).map(|i| (i * 100 + 7) % v).collect();
    let mut p = m.clone();
    for old in 0..v {
        let new = perm[old];
        let row = m.tok_embeddings.data()[old * d..(old + 1) * d].to_vec();
        p.tok_embeddings.data_mut()[new * d..(new + 1) * d].copy_from_slice(&row);
        for r in 0..d {
            p.output.data_mut()[r * v + new] = m.output.data()[r * v + old];
        }
    }
    let tokens = lcg_tokens(14, 9, v);
    let mapped: Vec<usize> = tokens.iter().map(|&t| perm[t]).collect();
    let (a, b) = (m.loss(&tokens).unwrap(), p.loss(&mapped).unwrap());
    assert!((a - b).abs() < 1e-5, "{a} vs {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn loss_is_non_negative(tokens in prop::collection::vec(0usize..259, 2..17), seed in 0u64..4) {
        let m = ModelWeights::init(tiny_config(1, 8, 2, 12, seed)).unwrap();
        prop_assert!(m.loss(&tokens).unwrap() >= 0.0);
    }
}

fn periodic(n: usize, period: usize) -> Vec<usize> {
    (0..n).map(|i| 97 + i % period).collect()
}

#[test]
fn repeating_corpus_is_learned() {
    let corpus = periodic(2000, 8);
    let mut m = ModelWeights::init(small()).unwrap();
    let opts = TrainOptions { steps: 300, lr: 0.1, ..Default::default() };
    train(&mut m, &corpus, &opts).unwrap();
    let loss = m.loss(&corpus[3..20]).unwrap();
    assert!(loss < 0.1, "{loss}");
}

#[test]
fn periodic_64_symbol_moving_average_decreases() {
    let corpus: Vec<usize> = (0..5000).map(|i| i * 37 % 64).collect();
    let mut m = ModelWeights::init(small()).unwrap();
    let log = train(&mut m, &corpus, &TrainOptions::default()).unwrap();
    assert_eq!(log.losses.len(), 500);
    let ma = log.moving_average(50);
    assert!(ma[499] < ma[49], "{} -> {}", ma[49], ma[499]);
}

#[test]
fn zero_learning_rate_leaves_weights_unchanged() {
    let before = ModelWeights::init(small()).unwrap();
    let mut m = before.clone();
    let opts = TrainOptions { steps: 5, lr: 0.0, ..Default::default() };
    train(&mut m, &periodic(200, 5), &opts).unwrap();
    assert_eq!(m.to_bytes().unwrap(), before.to_bytes().unwrap());
}

#[test]
fn training_is_deterministic() {
    let corpus = lcg_tokens(400, 4, 259);
    let opts = TrainOptions { steps: 8, ..Default::default() };
    let mut a = ModelWeights::init(small()).unwrap();
    let mut b = ModelWeights::init(small()).unwrap();
    let la = train(&mut a, &corpus, &opts).unwrap();
    let lb = train(&mut b, &corpus, &opts).unwrap();
    assert_eq!(la, lb);
    assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
}

#[test]
fn training_corpus_errors() {
    let mut m = ModelWeights::init(small()).unwrap();
    let opts = TrainOptions { steps: 1, ..Default::default() };
    assert!(matches!(train(&mut m, &[], &opts), Err(Error::Data(_))));
    assert!(train(&mut m, &[1; 16], &opts).is_err());
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.actg"), dir.path().join("b.actg"));
    let m = ModelWeights::init(small()).unwrap();
    save_checkpoint(&m, &p1).unwrap();
    save_checkpoint(&load_checkpoint(&p1).unwrap(), &p2).unwrap();
    let (b1, b2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(b1, b2);

    let header_len = u64::from_le_bytes(b1[5..13].try_into().unwrap()) as usize;
    let cfg = small();
    let (v, d, f, l) = (cfg.vocab_size, cfg.d_model, cfg.d_ff, cfg.n_layers);
    let params = 2 * v * d + d + l * (2 * d + 4 * d * d + 3 * d * f);
    assert_eq!(b1.len(), 13 + header_len + 4 * params);

    let mut bad = b1.clone();
    bad[0] = b'X';
    std::fs::write(&p2, &bad).unwrap();
    assert!(matches!(load_checkpoint(&p2), Err(Error::Format(_))));
    std::fs::write(&p2, &b1[..b1.len() - 3]).unwrap();
    assert!(matches!(load_checkpoint(&p2), Err(Error::Format(_))));
}

#[test]
fn init_respects_fan_in_scale() {
    let m = ModelWeights::init(small()).unwrap();
    let bound = 1.0 / (16f32).sqrt();
    let wq: &Tensor = &m.layers[0].wq;
    assert!(wq.data().iter().all(|w| w.abs() <= bound));
    assert!(m.layers.iter().all(|l| l.attn_norm.data().iter().all(|&g| g == 1.0)));
}
