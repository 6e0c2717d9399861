//! Run configuration: the knobs that govern graph construction, training,
//! and the safety firewall, plus a canonical hash that every downstream
//! artifact embeds.

use sha2::{Digest, Sha256};

use crate::error::{CrcError, Result};
use crate::kv::{KvMap, KvWriter};

/// All tunables for one run.
///
/// Serialized as a flat key-value file; unknown keys are rejected so a typo
/// in a safety-critical threshold cannot silently revert to a default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Neighbor count for the correlation K-NN graph.
    pub knn_k: usize,
    /// Clip quantile for the firewall thresholds.
    pub quantile_q: f64,
    /// Minimum relative validation improvement required to activate blending.
    pub epsilon: f64,
    /// Ridge penalty used when per-node selection is disabled.
    pub ridge_lambda: f64,
    /// Select lambda per node from a fixed grid by validation MAE.
    pub ridge_lambda_select: bool,
    /// Latent width of the encoder.
    pub latent_dim: usize,
    pub encoder_lr: f64,
    pub mlp_lr: f64,
    pub encoder_epochs: usize,
    pub mlp_epochs: usize,
    pub batch_size: usize,
    /// Early-stopping patience (epochs without validation MAE improvement).
    pub patience: usize,
    /// Confidence parameter for the certificate's concentration bound.
    pub confidence: f64,
    /// Margin over 0.5 sign-agreement required to open a gate mask entry.
    pub gate_margin: f64,
    /// Chronological split fractions; test takes the remainder.
    pub split_train: f64,
    pub split_val: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            knn_k: 5,
            quantile_q: 0.80,
            epsilon: 0.01,
            ridge_lambda: 1.0,
            ridge_lambda_select: true,
            latent_dim: 16,
            encoder_lr: 1e-4,
            mlp_lr: 1e-4,
            encoder_epochs: 80,
            mlp_epochs: 60,
            batch_size: 32,
            patience: 10,
            confidence: 0.05,
            gate_margin: 0.05,
            split_train: 0.70,
            split_val: 0.15,
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantile_q > 0.0 && self.quantile_q < 1.0) {
            return Err(CrcError::Config(format!(
                "quantile_q must be in (0, 1), got {}",
                self.quantile_q
            )));
        }
        if self.epsilon < 0.0 {
            return Err(CrcError::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if self.ridge_lambda < 0.0 {
            return Err(CrcError::Config(format!(
                "ridge_lambda must be >= 0, got {}",
                self.ridge_lambda
            )));
        }
        if self.knn_k == 0 {
            return Err(CrcError::Config("knn_k must be >= 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(CrcError::Config(format!(
                "confidence must be in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.latent_dim == 0 || self.batch_size == 0 {
            return Err(CrcError::Config("latent_dim and batch_size must be >= 1".into()));
        }
        let rest = 1.0 - self.split_train - self.split_val;
        if self.split_train <= 0.0 || self.split_val <= 0.0 || rest <= 0.0 {
            return Err(CrcError::Config(format!(
                "split fractions must leave room for all three splits (train {}, val {})",
                self.split_train, self.split_val
            )));
        }
        Ok(())
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.put("knn_k", self.knn_k);
        w.put_f64("quantile_q", self.quantile_q);
        w.put_f64("epsilon", self.epsilon);
        w.put_f64("ridge_lambda", self.ridge_lambda);
        w.put("ridge_lambda_select", self.ridge_lambda_select);
        w.put("latent_dim", self.latent_dim);
        w.put_f64("encoder_lr", self.encoder_lr);
        w.put_f64("mlp_lr", self.mlp_lr);
        w.put("encoder_epochs", self.encoder_epochs);
        w.put("mlp_epochs", self.mlp_epochs);
        w.put("batch_size", self.batch_size);
        w.put("patience", self.patience);
        w.put_f64("confidence", self.confidence);
        w.put_f64("gate_margin", self.gate_margin);
        w.put_f64("split_train", self.split_train);
        w.put_f64("split_val", self.split_val);
        w.put("seed", self.seed);
        w.into_string()
    }

    pub fn from_kv_string(text: &str) -> Result<Self> {
        let mut kv = KvMap::parse(text)?;
        let d = RunConfig::default();
        let cfg = RunConfig {
            knn_k: kv.get_parsed("knn_k")?.unwrap_or(d.knn_k),
            quantile_q: kv.get_parsed("quantile_q")?.unwrap_or(d.quantile_q),
            epsilon: kv.get_parsed("epsilon")?.unwrap_or(d.epsilon),
            ridge_lambda: kv.get_parsed("ridge_lambda")?.unwrap_or(d.ridge_lambda),
            ridge_lambda_select: kv
                .get_parsed("ridge_lambda_select")?
                .unwrap_or(d.ridge_lambda_select),
            latent_dim: kv.get_parsed("latent_dim")?.unwrap_or(d.latent_dim),
            encoder_lr: kv.get_parsed("encoder_lr")?.unwrap_or(d.encoder_lr),
            mlp_lr: kv.get_parsed("mlp_lr")?.unwrap_or(d.mlp_lr),
            encoder_epochs: kv.get_parsed("encoder_epochs")?.unwrap_or(d.encoder_epochs),
            mlp_epochs: kv.get_parsed("mlp_epochs")?.unwrap_or(d.mlp_epochs),
            batch_size: kv.get_parsed("batch_size")?.unwrap_or(d.batch_size),
            patience: kv.get_parsed("patience")?.unwrap_or(d.patience),
            confidence: kv.get_parsed("confidence")?.unwrap_or(d.confidence),
            gate_margin: kv.get_parsed("gate_margin")?.unwrap_or(d.gate_margin),
            split_train: kv.get_parsed("split_train")?.unwrap_or(d.split_train),
            split_val: kv.get_parsed("split_val")?.unwrap_or(d.split_val),
            seed: kv.get_parsed("seed")?.unwrap_or(d.seed),
        };
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hash of the canonical serialization plus seed; embedded in every
    /// artifact so mixed-config inputs are detectable.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_kv_string().as_bytes());
        let digest = hasher.finalize();
        hex_prefix(&digest, 16)
    }
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    bytes.iter().take(n).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_kv() {
        let mut cfg = RunConfig::default();
        cfg.quantile_q = 0.9;
        cfg.seed = 1234;
        let text = cfg.to_kv_string();
        let back = RunConfig::from_kv_string(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.config_hash(), back.config_hash());
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = "knn_k = 5\nquantile_qq = 0.8\n";
        let err = RunConfig::from_kv_string(text).unwrap_err();
        assert!(err.to_string().contains("quantile_qq"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_quantile() {
        assert!(RunConfig::from_kv_string("quantile_q = 1.5").is_err());
    }

    #[test]
    fn hash_changes_with_seed() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        b.seed = 43;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
