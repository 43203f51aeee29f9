use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelConfig;

/// Per-layer prune fractions whose parameter-weighted mean is `global`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsitySchedule {
    pub global: f64,
    /// Index `i` holds layer `i + 1`.
    pub per_layer: Vec<f64>,
    /// 1-based layers pruned at `shallow_sparsity`; the rest form the deep band.
    #[serde(default)]
    pub shallow_layers: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shallow_sparsity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deep_sparsity: Option<f64>,
}

fn check_fraction(name: &str, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Contract(format!("{name} must lie in [0, 1], got {s}")));
    }
    Ok(())
}

impl SparsitySchedule {
    pub fn uniform(n_layers: usize, s: f64) -> Result<Self> {
        check_fraction("sparsity", s)?;
        Ok(SparsitySchedule {
            global: s,
            per_layer: vec![s; n_layers],
            shallow_layers: Vec::new(),
            shallow_sparsity: None,
            deep_sparsity: None,
        })
    }

    /// Parameter-weighted mean of the per-layer fractions.
    pub fn weighted_mean(&self, layer_sizes: &[usize]) -> f64 {
        let total: usize = layer_sizes.iter().sum();
        let kept: f64 = self
            .per_layer
            .iter()
            .zip(layer_sizes)
            .map(|(&s, &n)| s * n as f64)
            .sum();
        kept / total as f64
    }

    pub fn check_congruent(&self, config: &ModelConfig) -> Result<()> {
        if self.per_layer.len() != config.n_layers {
            return Err(Error::Contract(format!(
                "schedule has {} layers but the model has {}",
                self.per_layer.len(),
                config.n_layers
            )));
        }
        for (i, &s) in self.per_layer.iter().enumerate() {
            check_fraction(&format!("layer {} sparsity", i + 1), s)?;
        }
        Ok(())
    }
}

/// Two-band schedule over layers of the given prunable sizes: layers in
/// `shallow` (1-based) get `shallow_s`, the rest get the fraction that keeps
/// the parameter-weighted mean at `global_s`.
pub fn build_schedule_weighted(
    layer_sizes: &[usize],
    global_s: f64,
    shallow: &[usize],
    shallow_s: f64,
) -> Result<SparsitySchedule> {
    check_fraction("global sparsity", global_s)?;
    check_fraction("shallow sparsity", shallow_s)?;
    let n = layer_sizes.len();
    let mut is_shallow = vec![false; n];
    for &l in shallow {
        if l == 0 || l > n {
            return Err(Error::Contract(format!("shallow layer {l} outside 1..={n}")));
        }
        is_shallow[l - 1] = true;
    }
    let n_shallow_layers = is_shallow.iter().filter(|&&b| b).count();
    if n_shallow_layers == 0 || n_shallow_layers == n {
        return Err(Error::Contract(
            "shallow band must be a non-empty proper subset of the layers".into(),
        ));
    }
    let mut n_total = 0.0f64;
    let mut n_shallow = 0.0f64;
    for (&size, &sh) in layer_sizes.iter().zip(&is_shallow) {
        n_total += size as f64;
        if sh {
            n_shallow += size as f64;
        }
    }
    let n_deep = n_total - n_shallow;
    let deep_s = (global_s * n_total - shallow_s * n_shallow) / n_deep;
    if !(0.0..=1.0).contains(&deep_s) {
        return Err(Error::Schedule(format!(
            "deep band would need sparsity {deep_s:.6}, outside [0, 1]"
        )));
    }
    let per_layer = is_shallow
        .iter()
        .map(|&sh| if sh { shallow_s } else { deep_s })
        .collect();
    let mut shallow_layers: Vec<usize> = shallow.to_vec();
    shallow_layers.sort_unstable();
    shallow_layers.dedup();
    Ok(SparsitySchedule {
        global: global_s,
        per_layer,
        shallow_layers,
        shallow_sparsity: Some(shallow_s),
        deep_sparsity: Some(deep_s),
    })
}

pub fn build_schedule(
    config: &ModelConfig,
    global_s: f64,
    shallow: &[usize],
    shallow_s: f64,
) -> Result<SparsitySchedule> {
    let sizes = vec![config.prunable_per_layer(); config.n_layers];
    build_schedule_weighted(&sizes, global_s, shallow, shallow_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_is_uniform() {
        let s = build_schedule_weighted(&[10; 6], 0.3, &[2, 3], 0.3).unwrap();
        assert!(s.per_layer.iter().all(|&x| (x - 0.3).abs() < 1e-12));
    }

    #[test]
    fn weighted_mean_hits_target_with_unequal_layers() {
        let sizes = [100, 300, 50, 550];
        let s = build_schedule_weighted(&sizes, 0.5, &[2], 0.4).unwrap();
        assert!((s.weighted_mean(&sizes) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_reports_value() {
        let err = build_schedule_weighted(&[10; 4], 0.9, &[1, 2, 3], 0.1).unwrap_err();
        assert!(matches!(err, Error::Schedule(ref m) if m.contains("3.3")), "{err}");
    }

    #[test]
    fn band_must_be_proper_subset() {
        assert!(build_schedule_weighted(&[10; 3], 0.5, &[], 0.4).is_err());
        assert!(build_schedule_weighted(&[10; 3], 0.5, &[1, 2, 3], 0.4).is_err());
        assert!(build_schedule_weighted(&[10; 3], 0.5, &[4], 0.4).is_err());
    }
}
