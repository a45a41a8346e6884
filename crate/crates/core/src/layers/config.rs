use serde::{Deserialize, Serialize};

use crate::autodiff::Activation;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttentionMode {
    None,
    Single,
    Multi,
}

/// Dimensions and branch switches of the classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d_w: usize,
    pub d_p: usize,
    pub max_dist: usize,
    /// LSTM units per direction; the Bi-LSTM output width is `2 * hidden`.
    pub hidden: usize,
    pub heads: usize,
    pub gcn_layers: usize,
    pub label_count: usize,
    /// Dropout on the Bi-LSTM output.
    pub dropout: f64,
    /// Dropout on the token input vectors.
    pub embed_dropout: f64,
    /// Dropout on the concatenated pooled features.
    pub feature_dropout: f64,
    pub gcn_activation: Activation,
    pub use_pretrained: bool,
    pub use_position: bool,
    pub attention: AttentionMode,
    pub use_gcn: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_w: 100,
            d_p: 20,
            max_dist: 60,
            hidden: 128,
            heads: 8,
            gcn_layers: 2,
            label_count: 2,
            dropout: 0.5,
            embed_dropout: 0.0,
            feature_dropout: 0.0,
            gcn_activation: Activation::Tanh,
            use_pretrained: true,
            use_position: true,
            attention: AttentionMode::Multi,
            use_gcn: true,
        }
    }
}

impl ModelConfig {
    pub fn d_model(&self) -> usize {
        2 * self.hidden
    }

    /// Width of one token's input vector.
    pub fn input_width(&self) -> usize {
        if self.use_position {
            self.d_w + 2 * self.d_p
        } else {
            self.d_w
        }
    }

    /// Heads actually used by the attention branch (0 when it is off).
    pub fn effective_heads(&self) -> usize {
        match self.attention {
            AttentionMode::None => 0,
            AttentionMode::Single => 1,
            AttentionMode::Multi => self.heads,
        }
    }

    /// Width of the classifier input: two pooled branch vectors, or one
    /// when the GCN branch is off.
    pub fn classifier_width(&self) -> usize {
        if self.use_gcn {
            2 * self.d_model()
        } else {
            self.d_model()
        }
    }

    pub fn position_rows(&self) -> usize {
        2 * self.max_dist + 1
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_w", self.d_w),
            ("hidden", self.hidden),
            ("heads", self.heads),
            ("gcn_layers", self.gcn_layers),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("model.{name} must be positive")));
        }
        if self.use_position && self.d_p == 0 {
            return Err(Error::invalid("model.d_p must be positive when positions are used"));
        }
        if self.label_count < 2 {
            return Err(Error::invalid("a classifier needs at least two labels"));
        }
        let heads = self.effective_heads();
        if heads > 0 && !self.d_model().is_multiple_of(heads) {
            return Err(Error::invalid(format!(
                "{} heads do not divide the model width {}",
                heads,
                self.d_model()
            )));
        }
        for (name, p) in [
            ("dropout", self.dropout),
            ("embed_dropout", self.embed_dropout),
            ("feature_dropout", self.feature_dropout),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::invalid(format!("model.{name} {p} outside [0, 1)")));
            }
        }
        Ok(())
    }
}
