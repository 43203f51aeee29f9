mod common;

use actigraph::activation::{activation, bucketed_profile, histogram, mean_activation, ActivationVector};
use actigraph::autodiff::{Tape, Tensor};
use actigraph::model::{ModelWeights, MatrixId, MatrixKind};
use common::{central_diff, params_f64, prunable_slots, reference, text_sample, tiny_config};
use proptest::prelude::*;

#[test]
fn scalar_square_stand_in() {
    let mut t = Tape::new();
    let w = t.param(Tensor::scalar(3.0));
    let y = t.mul(w, w).unwrap();
    t.backward(y).unwrap();
    let a = (t.value(w).item().unwrap() * t.grad(w).unwrap()[0]).abs();
    assert_eq!(a, 18.0);
}

#[test]
fn zero_weights_have_zero_activation() {
    let cfg = tiny_config(2, 8, 2, 12, 4);
    let mut m = ModelWeights::init(cfg).unwrap();
    let id = MatrixId { layer: 1, kind: MatrixKind::WUp };
    for i in (0..m.matrix(id).numel()).step_by(3) {
        m.matrix_mut(id).data_mut()[i] = 0.0;
    }
    let v = activation(&m, &text_sample(12, 1)).unwrap();
    // w_up of layer 2 starts after wq, wk, wv, wo (4·64) and w_gate (96).
    let start = 4 * 64 + 96;
    let layer = v.layer(2).unwrap();
    for i in (0..96).step_by(3) {
        assert_eq!(layer[start + i], 0.0);
    }
    assert!(layer[start + 1] > 0.0);
}

#[test]
fn activation_matches_finite_difference_oracle() {
    let cfg = tiny_config(1, 2, 1, 4, 8);
    let m = ModelWeights::init(cfg).unwrap();
    let sample = text_sample(9, 3);
    let v = activation(&m, &sample).unwrap();
    let params = params_f64(&m);
    let mut flat = Vec::new();
    for slot in prunable_slots(1) {
        for i in 0..params[slot].len() {
            let mut f = |x: &[f64]| {
                let mut p = params.clone();
                p[slot] = x.to_vec();
                reference::sample_loss(&cfg, &p, &sample)
            };
            let g = central_diff(&mut f, &params[slot], i, 1e-4);
            flat.push((params[slot][i] * g).abs());
        }
    }
    assert_eq!(flat.len(), v.len());
    for (i, (a, want)) in v.iter().zip(&flat).enumerate() {
        let a = a as f64;
        assert!((a - want).abs() <= (1e-2 * want).max(1e-6), "param {i}: {a} vs {want}");
    }
}

#[test]
fn vector_covers_exactly_the_prunable_parameters() {
    let cfg = tiny_config(3, 8, 2, 12, 2);
    let m = ModelWeights::init(cfg).unwrap();
    let v = activation(&m, &text_sample(10, 2)).unwrap();
    assert_eq!(v.len(), cfg.prunable_total());
    assert_eq!(v.n_layers(), 3);
    assert!(v.iter().all(|x| x >= 0.0 && x.is_finite()));
}

#[test]
fn mean_of_one_and_of_duplicates() {
    let m = ModelWeights::init(tiny_config(2, 8, 2, 12, 6)).unwrap();
    let x = text_sample(11, 5);
    let single = activation(&m, &x).unwrap();
    assert_eq!(mean_activation(&m, &[x.clone()]).unwrap().layers(), single.layers());
    let dup = mean_activation(&m, &[x.clone(), x]).unwrap();
    assert_eq!(dup.samples(), 2);
    for (a, b) in dup.iter().zip(single.iter()) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn mean_of_two_matches_independent_sum() {
    let m = ModelWeights::init(tiny_config(2, 8, 2, 12, 7)).unwrap();
    let (x, y) = (text_sample(9, 1), text_sample(13, 2));
    let (a, b) = (activation(&m, &x).unwrap(), activation(&m, &y).unwrap());
    let mean = mean_activation(&m, &[x, y]).unwrap();
    for ((m, a), b) in mean.iter().zip(a.iter()).zip(b.iter()) {
        let want = (a as f64 + b as f64) / 2.0;
        assert!((m as f64 - want).abs() <= 1e-7 * want.max(1.0));
    }
    assert!(mean_activation(&ModelWeights::init(tiny_config(1, 8, 2, 12, 0)).unwrap(), &[]).is_err());
}

fn layer_of(values: Vec<f32>) -> ActivationVector {
    ActivationVector::from_layers(vec![values], 1).unwrap()
}

proptest! {
    #[test]
    fn profile_is_sorted_and_preserves_mean(
        values in prop::collection::vec(0.0f32..100.0, 1..300),
        bucket in 1usize..40,
    ) {
        let n = values.len();
        let p = bucketed_profile(&layer_of(values.clone()), 1, bucket).unwrap();
        prop_assert_eq!(p.bucket_means.len(), n.div_ceil(bucket));
        prop_assert!(p.bucket_means.windows(2).all(|w| w[0] <= w[1]));
        if n % bucket == 0 {
            let overall = values.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
            let mean = p.bucket_means.iter().sum::<f64>() / p.bucket_means.len() as f64;
            prop_assert!((overall - mean).abs() <= 1e-6 * overall.max(1.0));
        }
    }

    #[test]
    fn histogram_conserves_counts(values in prop::collection::vec(-50.0f64..50.0, 1..200), bins in 1usize..20) {
        let h = histogram(&values, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
        prop_assert_eq!(h.edges.len(), bins + 1);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if max > min {
            let top = values.iter().filter(|&&v| v == max).count();
            prop_assert!(h.counts[bins - 1] >= top);
        }
    }
}
