use super::*;
use crate::Error;

fn close(a: &[f32], b: &[f32], tol: f32) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn matmul_hand_example() {
    let mut t = Tape::new();
    let a = t.constant(Tensor::matrix(2, 2, vec![1., 2., 3., 4.]).unwrap());
    let b = t.constant(Tensor::matrix(2, 1, vec![5., 6.]).unwrap());
    let c = t.matmul(a, b).unwrap();
    assert_eq!(t.value(c).shape(), &[2, 1]);
    assert_eq!(t.value(c).data(), &[17., 39.]);
}

#[test]
fn matmul_identity() {
    let data: Vec<f32> = (0..12).map(|i| i as f32 * 0.37 - 1.0).collect();
    let mut eye = vec![0.0; 16];
    for i in 0..4 {
        eye[i * 4 + i] = 1.0;
    }
    let mut t = Tape::new();
    let a = t.constant(Tensor::matrix(3, 4, data.clone()).unwrap());
    let i = t.constant(Tensor::matrix(4, 4, eye).unwrap());
    let c = t.matmul(a, i).unwrap();
    assert_eq!(t.value(c).data(), &data[..]);
}

#[test]
fn matmul_reports_both_shapes() {
    let mut t = Tape::new();
    let a = t.constant(Tensor::zeros(vec![2, 3]));
    let b = t.constant(Tensor::zeros(vec![2, 3]));
    let err = t.matmul(a, b).unwrap_err().to_string();
    assert!(err.contains("[2, 3] x [2, 3]"), "{err}");
}

#[test]
fn rms_norm_hand_example() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::matrix(1, 2, vec![3., 4.]).unwrap());
    let g = t.constant(Tensor::new(vec![2], vec![1., 1.]).unwrap());
    let y = t.rms_norm(x, g, 0.0).unwrap();
    assert!(close(t.value(y).data(), &[0.848_53, 1.131_37], 1e-5));
}

#[test]
fn rms_norm_zero_row_with_eps() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::zeros(vec![1, 3]));
    let g = t.constant(Tensor::new(vec![3], vec![1.; 3]).unwrap());
    let y = t.rms_norm(x, g, 1e-5).unwrap();
    assert_eq!(t.value(y).data(), &[0.0; 3]);
}

#[test]
fn rms_norm_gain_mismatch() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::zeros(vec![1, 3]));
    let g = t.constant(Tensor::new(vec![2], vec![1.; 2]).unwrap());
    assert!(matches!(t.rms_norm(x, g, 1e-5), Err(Error::Shape(_))));
}

#[test]
fn softmax_symmetric_and_stable() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::matrix(2, 2, vec![0., 0., 1000., 0.]).unwrap());
    let y = t.softmax_rows(x).unwrap();
    let v = t.value(y).data();
    assert_eq!(&v[..2], &[0.5, 0.5]);
    assert_eq!(v[2], 1.0);
    assert!(v[3] >= 0.0 && v[3] < 1e-30);
}

#[test]
fn causal_softmax_masks_future() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::matrix(3, 3, vec![1., 9., 9., 0., 0., 9., 1., 2., 3.]).unwrap());
    let y = t.causal_softmax(x).unwrap();
    let v = t.value(y).data();
    assert_eq!(&v[..3], &[1.0, 0.0, 0.0]);
    assert_eq!(&v[3..6], &[0.5, 0.5, 0.0]);
    assert!((v[6..].iter().sum::<f32>() - 1.0).abs() < 1e-6);
}

#[test]
fn cross_entropy_uniform_and_saturated() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::matrix(1, 2, vec![0., 0.]).unwrap());
    let l = t.cross_entropy(x, &[0]).unwrap();
    assert!((t.value(l).item().unwrap() - std::f32::consts::LN_2).abs() < 1e-6);

    let mut logits = vec![0.0; 5];
    logits[3] = 30.0;
    let x = t.constant(Tensor::matrix(1, 5, logits).unwrap());
    let l = t.cross_entropy(x, &[3]).unwrap();
    assert!(t.value(l).item().unwrap() < 1e-9);
}

#[test]
fn cross_entropy_bad_target() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::matrix(1, 2, vec![0., 0.]).unwrap());
    assert!(matches!(t.cross_entropy(x, &[2]), Err(Error::Index(_))));
}

#[test]
fn backward_linear_and_square() {
    let mut t = Tape::new();
    let w = t.param(Tensor::new(vec![3], vec![0.5, -2.0, 7.0]).unwrap());
    let s = t.sum(w).unwrap();
    t.backward(s).unwrap();
    assert_eq!(t.grad(w).unwrap(), &[1.0, 1.0, 1.0]);

    let mut t = Tape::new();
    let w = t.param(Tensor::new(vec![2], vec![1.0, 2.0]).unwrap());
    let sq = t.mul(w, w).unwrap();
    let s = t.sum(sq).unwrap();
    t.backward(s).unwrap();
    assert_eq!(t.grad(w).unwrap(), &[2.0, 4.0]);
}

#[test]
fn backward_contract_errors() {
    let mut t = Tape::new();
    let w = t.param(Tensor::new(vec![2], vec![1.0, 2.0]).unwrap());
    assert!(matches!(t.backward(w), Err(Error::Contract(_))));
    let s = t.sum(w).unwrap();
    t.backward(s).unwrap();
    assert!(matches!(t.backward(s), Err(Error::Contract(_))));
    t.reset_grads();
    t.backward(s).unwrap();
    assert_eq!(t.grad(w).unwrap(), &[1.0, 1.0]);
}

#[test]
fn constants_receive_no_gradient() {
    let mut t = Tape::new();
    let c = t.constant(Tensor::new(vec![2], vec![1.0, 2.0]).unwrap());
    let w = t.param(Tensor::new(vec![2], vec![3.0, 4.0]).unwrap());
    let p = t.mul(c, w).unwrap();
    let s = t.sum(p).unwrap();
    t.backward(s).unwrap();
    assert!(t.grad(c).is_none());
    assert_eq!(t.grad(w).unwrap(), &[1.0, 2.0]);
}

#[test]
fn tensor_shape_invariant() {
    assert!(matches!(Tensor::new(vec![2, 3], vec![0.0; 5]), Err(Error::Shape(_))));
}
