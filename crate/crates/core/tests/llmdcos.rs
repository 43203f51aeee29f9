mod common;

use actigraph::activation::{activation, ActivationVector};
use actigraph::llmdcos::{
    dataset_relevance, layer_range_mean, llmdcos_layer, llmdcos_profile, semantic_eval, LayerRange,
    PairId, SampleSet,
};
use actigraph::model::ModelWeights;
use actigraph::Error;
use common::{text_sample, tiny_config};

fn pair() -> PairId {
    PairId { dataset_a: "a".into(), index_a: 0, dataset_b: "b".into(), index_b: 1 }
}

fn model() -> ModelWeights {
    ModelWeights::init(tiny_config(3, 16, 2, 24, 17)).unwrap()
}

#[test]
fn reflexive_symmetric_and_bounded() {
    let m = model();
    let (x, y) = (text_sample(12, 1), text_sample(15, 2));
    let same = llmdcos_profile(&m, &x, &x, pair()).unwrap();
    assert_eq!(same.cosines.len(), 3);
    assert!(same.cosines.iter().all(|c| (c - 1.0).abs() <= 1e-6));
    let xy = llmdcos_profile(&m, &x, &y, pair()).unwrap();
    let yx = llmdcos_profile(&m, &y, &x, pair()).unwrap();
    for (a, b) in xy.cosines.iter().zip(&yx.cosines) {
        assert!((a - b).abs() <= 1e-6);
        assert!((0.0..=1.0).contains(a));
    }
}

#[test]
fn positive_scaling_of_one_slice() {
    let m = model();
    let a = activation(&m, &text_sample(10, 3)).unwrap();
    let b = activation(&m, &text_sample(10, 4)).unwrap();
    let scaled: Vec<Vec<f32>> = b
        .layers()
        .iter()
        .enumerate()
        .map(|(l, v)| v.iter().map(|x| x * (l as f32 + 0.5) * 3.0).collect())
        .collect();
    let scaled = ActivationVector::from_layers(scaled, 1).unwrap();
    for l in 1..=3 {
        let (c1, c2) = (llmdcos_layer(&a, &b, l).unwrap(), llmdcos_layer(&a, &scaled, l).unwrap());
        assert!((c1 - c2).abs() <= 1e-6, "layer {l}: {c1} vs {c2}");
    }
}

#[test]
fn layer_errors() {
    let a = ActivationVector::from_layers(vec![vec![1.0, 0.0], vec![0.0, 0.0]], 1).unwrap();
    assert!(matches!(llmdcos_layer(&a, &a, 2), Err(Error::Degenerate(_))));
    assert!(matches!(llmdcos_layer(&a, &a, 3), Err(Error::Index(_))));
    let orth = ActivationVector::from_layers(vec![vec![0.0, 1.0], vec![1.0, 1.0]], 1).unwrap();
    assert_eq!(llmdcos_layer(&a, &orth, 1).unwrap(), 0.0);
}

#[test]
fn range_mean_examples() {
    let c = [0.2, 0.4, 0.9];
    assert!((layer_range_mean(&c, LayerRange::new(1, 3)).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(layer_range_mean(&c, LayerRange::new(2, 2)).unwrap(), 0.4);
    assert!(matches!(layer_range_mean(&c, LayerRange::new(2, 4)), Err(Error::Contract(_))));
    assert!(matches!(layer_range_mean(&c, LayerRange::new(0, 1)), Err(Error::Contract(_))));
}

fn samples(n: usize, seed: u64) -> Vec<Vec<usize>> {
    (0..n as u64).map(|i| text_sample(8 + (i as usize % 8), seed * 1000 + i)).collect()
}

#[test]
fn duplicate_dataset_control() {
    let m = model();
    let s = samples(24, 1);
    let sets = [
        SampleSet { name: "x".into(), samples: s.clone() },
        SampleSet { name: "x_copy".into(), samples: s },
    ];
    let r = dataset_relevance(&m, &sets, 32, LayerRange::new(2, 3), 5).unwrap();
    let delta = (r.values[0][1] - r.values[0][0]).abs();
    assert!(delta < 0.1, "{:?}", r.values);
}

#[test]
fn relevance_is_symmetric_bounded_and_seeded() {
    let m = model();
    let sets = [
        SampleSet { name: "a".into(), samples: samples(6, 2) },
        SampleSet { name: "b".into(), samples: samples(5, 3) },
        SampleSet { name: "c".into(), samples: samples(4, 4) },
    ];
    let range = LayerRange::new(1, 3);
    let r = dataset_relevance(&m, &sets, 6, range, 9).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((r.values[i][j] - r.values[j][i]).abs() <= 1e-6);
            assert!((0.0..=1.0).contains(&r.values[i][j]));
        }
    }
    assert_eq!(r, dataset_relevance(&m, &sets, 6, range, 9).unwrap());

    let tiny = [SampleSet { name: "one".into(), samples: samples(1, 5) }];
    assert!(matches!(dataset_relevance(&m, &tiny, 4, range, 0), Err(Error::Data(_))));
}

#[test]
fn semantic_eval_rankings() {
    let m = model();
    let pairs: Vec<_> = (0..6).map(|i| (text_sample(10, i), text_sample(11, 100 + i), i as f64)).collect();
    let range = LayerRange::new(2, 3);
    let scores = semantic_eval(&m, &pairs, range).unwrap().scores;

    let with_gold = |gold: &dyn Fn(f64) -> f64| -> Vec<_> {
        pairs.iter().zip(&scores).map(|((a, b, _), &s)| (a.clone(), b.clone(), gold(s))).collect()
    };
    let up = semantic_eval(&m, &with_gold(&|s| s), range).unwrap();
    assert!((up.spearman - 1.0).abs() < 1e-12);
    let down = semantic_eval(&m, &with_gold(&|s| -s), range).unwrap();
    assert!((down.spearman + 1.0).abs() < 1e-12);
    assert!(semantic_eval(&m, &pairs[..2], range).is_err());
}
