//! Shape-checked forecast containers and residual arithmetic.
//!
//! Everything downstream works in 64-bit floats: the ridge normal equations
//! are ill-conditioned in 32-bit at moderate feature counts. All containers
//! are immutable after construction and safe to share across workers.

use ndarray::{Array3, Axis};

use crate::error::{CrcError, Result};

/// Problem dimensions for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    /// Batch (window) count.
    pub batch: usize,
    /// Look-back window length.
    pub lookback: usize,
    /// Forecast horizon length.
    pub horizon: usize,
    /// Number of variables.
    pub nodes: usize,
    /// Encoder latent width.
    pub latent: usize,
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.lookback == 0 || self.horizon == 0 || self.nodes == 0 || self.latent == 0 {
            return Err(CrcError::Config(format!("all shape dimensions must be positive: {self:?}")));
        }
        if self.lookback < 2 {
            return Err(CrcError::Config(format!(
                "lookback must be >= 2 for lag-based feature priors, got {}",
                self.lookback
            )));
        }
        Ok(())
    }
}

/// Aligned (history, baseline forecast, target) windows for one batch.
///
/// `target` is absent at pure inference time.
#[derive(Debug, Clone)]
pub struct ForecastInstance {
    /// `[B, P, N]`
    pub history: Array3<f64>,
    /// `[B, H, N]`
    pub base_forecast: Array3<f64>,
    /// `[B, H, N]` when ground truth is known.
    pub target: Option<Array3<f64>>,
}

impl ForecastInstance {
    pub fn batch(&self) -> usize {
        self.history.dim().0
    }

    pub fn lookback(&self) -> usize {
        self.history.dim().1
    }

    pub fn horizon(&self) -> usize {
        self.base_forecast.dim().1
    }

    pub fn nodes(&self) -> usize {
        self.history.dim().2
    }

    pub fn target_ref(&self) -> Result<&Array3<f64>> {
        self.target.as_ref().ok_or(CrcError::MissingTarget)
    }
}

/// Raw and post-ridge residuals for a batch.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    /// `target - base_forecast`, elementwise.
    pub raw: Array3<f64>,
    /// `target - (base_forecast + ridge_delta)` when a ridge correction exists.
    pub post_ridge: Option<Array3<f64>>,
}

/// Chronologically disjoint train/validation/test windows.
///
/// Validation precedes test in time; `boundaries` records the sample-index
/// cut points in the source series for audit.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: ForecastInstance,
    pub val: ForecastInstance,
    pub test: ForecastInstance,
    /// Row indices in the source series where val and test segments begin.
    pub boundaries: (usize, usize),
    /// Per-column normalization applied at ingestion, if any.
    pub normalization: Option<crate::ingest::NormStats>,
}

impl DatasetSplit {
    /// Validation sample count; the `m` of the certificate's bound.
    pub fn val_count(&self) -> usize {
        self.val.batch()
    }
}

fn check_finite(name: &str, t: &Array3<f64>) -> Result<()> {
    for ((b, s, n), v) in t.indexed_iter() {
        if !v.is_finite() {
            return Err(CrcError::NonFinite {
                tensor: name.to_string(),
                sample: b,
                step: s,
                node: n,
                value: *v,
            });
        }
    }
    Ok(())
}

/// Checks shape consistency and finiteness; returns the instance unchanged on
/// success. Idempotent: validating a checked instance changes nothing.
pub fn validate_instance(inst: ForecastInstance) -> Result<ForecastInstance> {
    let (b, _p, n) = inst.history.dim();
    let (fb, fh, fn_) = inst.base_forecast.dim();
    if fb != b || fn_ != n {
        return Err(CrcError::shape(
            "base_forecast vs history",
            format!("[{b}, H, {n}]"),
            format!("[{fb}, {fh}, {fn_}]"),
        ));
    }
    if let Some(t) = &inst.target {
        let (tb, th, tn) = t.dim();
        if tb != b || tn != n || th != fh {
            return Err(CrcError::shape(
                "target vs base_forecast",
                format!("[{b}, {fh}, {n}]"),
                format!("[{tb}, {th}, {tn}]"),
            ));
        }
    }
    check_finite("history", &inst.history)?;
    check_finite("base_forecast", &inst.base_forecast)?;
    if let Some(t) = &inst.target {
        check_finite("target", t)?;
    }
    Ok(inst)
}

/// Raw residual `R = Y - base`, and `e = Y - (base + ridge_delta)` when a
/// ridge correction is supplied. Same arithmetic precision as the inputs.
pub fn compute_residuals(inst: &ForecastInstance, ridge_delta: Option<&Array3<f64>>) -> Result<ResidualSet> {
    let target = inst.target_ref()?;
    let raw = target - &inst.base_forecast;
    let post_ridge = match ridge_delta {
        None => None,
        Some(delta) => {
            if delta.dim() != target.dim() {
                return Err(CrcError::shape(
                    "ridge_delta vs target",
                    format!("{:?}", target.dim()),
                    format!("{:?}", delta.dim()),
                ));
            }
            Some(target - &inst.base_forecast - delta)
        }
    };
    Ok(ResidualSet { raw, post_ridge })
}

/// Units-in-last-place distance between two finite f64 values.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let to_ordered = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN.wrapping_sub(bits) as u64
        } else {
            (bits as u64) | (1 << 63)
        }
    };
    to_ordered(a).abs_diff(to_ordered(b))
}

/// Stacks per-split instances along the batch axis (used by ablation/eval glue).
pub fn concat_batches(parts: &[&Array3<f64>]) -> Array3<f64> {
    let views: Vec<_> = parts.iter().map(|a| a.view()).collect();
    ndarray::concatenate(Axis(0), &views).expect("compatible shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn inst(b: usize, p: usize, h: usize, n: usize) -> ForecastInstance {
        ForecastInstance {
            history: Array3::from_shape_fn((b, p, n), |(i, j, k)| (i + j + k) as f64 * 0.1),
            base_forecast: Array3::from_shape_fn((b, h, n), |(i, j, k)| (i * j + k) as f64 * 0.2),
            target: Some(Array3::from_shape_fn((b, h, n), |(i, j, k)| (i + j * k) as f64 * 0.3)),
        }
    }

    #[test]
    fn accepts_consistent_instance() {
        let i = inst(2, 8, 4, 3);
        assert!(validate_instance(i).is_ok());
    }

    #[test]
    fn rejects_node_count_mismatch() {
        let mut i = inst(2, 8, 4, 3);
        i.base_forecast = Array3::zeros((2, 4, 4));
        let err = validate_instance(i).unwrap_err();
        assert!(matches!(err, CrcError::ShapeMismatch { .. }), "{err}");
    }

    #[test]
    fn reports_nan_location() {
        let mut i = inst(2, 8, 4, 3);
        i.history[(0, 0, 0)] = f64::NAN;
        match validate_instance(i).unwrap_err() {
            CrcError::NonFinite { sample, step, node, .. } => {
                assert_eq!((sample, step, node), (0, 0, 0));
            }
            other => panic!("expected NonFinite, got {other}"),
        }
    }

    #[test]
    fn validation_is_idempotent() {
        let i = inst(2, 8, 4, 3);
        let once = validate_instance(i).unwrap();
        let hist = once.history.clone();
        let twice = validate_instance(once).unwrap();
        assert_eq!(hist, twice.history);
    }

    #[test]
    fn zero_residual_when_target_equals_base() {
        let mut i = inst(2, 8, 4, 3);
        i.target = Some(i.base_forecast.clone());
        let r = compute_residuals(&i, None).unwrap();
        assert!(r.raw.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_offset_residual() {
        let mut i = inst(2, 8, 4, 3);
        i.target = Some(&i.base_forecast + 1.0);
        let r = compute_residuals(&i, None).unwrap();
        assert!(r.raw.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn perfect_ridge_floor_zeroes_post_ridge() {
        let i = inst(2, 8, 4, 3);
        let raw = compute_residuals(&i, None).unwrap().raw;
        let r = compute_residuals(&i, Some(&raw)).unwrap();
        assert!(r.post_ridge.unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn missing_target_is_an_error() {
        let mut i = inst(2, 8, 4, 3);
        i.target = None;
        assert!(matches!(compute_residuals(&i, None), Err(CrcError::MissingTarget)));
    }

    #[test]
    fn residual_reconstructs_target_within_one_ulp() {
        let i = inst(3, 8, 5, 4);
        let r = compute_residuals(&i, None).unwrap();
        let rebuilt = &i.base_forecast + &r.raw;
        for (a, b) in rebuilt.iter().zip(i.target.as_ref().unwrap().iter()) {
            assert!(ulp_distance(*a, *b) <= 1, "{a} vs {b}");
        }
    }

    #[test]
    fn shape_validation_bounds() {
        let ok = Shape { batch: 1, lookback: 2, horizon: 1, nodes: 1, latent: 1 };
        assert!(ok.validate().is_ok());
        let bad = Shape { lookback: 1, ..ok };
        assert!(bad.validate().is_err());
    }
}
