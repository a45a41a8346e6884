use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::layers::{AttentionMode, ModelConfig};

/// The ablation rows, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AblationVariant {
    Full,
    NoPretrained,
    NoPosition,
    NoPretrainedNoPosition,
    NoAttention,
    SingleHead,
    NoGcn,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 7] = [
        AblationVariant::Full,
        AblationVariant::NoPretrained,
        AblationVariant::NoPosition,
        AblationVariant::NoPretrainedNoPosition,
        AblationVariant::NoAttention,
        AblationVariant::SingleHead,
        AblationVariant::NoGcn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationVariant::Full => "full",
            AblationVariant::NoPretrained => "no_pretrained",
            AblationVariant::NoPosition => "no_position",
            AblationVariant::NoPretrainedNoPosition => "no_pretrained_no_position",
            AblationVariant::NoAttention => "no_attention",
            AblationVariant::SingleHead => "single_head",
            AblationVariant::NoGcn => "no_gcn",
        }
    }

    /// Row label in the ablation table.
    pub fn label(self) -> &'static str {
        match self {
            AblationVariant::Full => "Proposed Method",
            AblationVariant::NoPretrained => "- pretrained embeddings",
            AblationVariant::NoPosition => "- position",
            AblationVariant::NoPretrainedNoPosition => "- position - pretrained embeddings",
            AblationVariant::NoAttention => "- Multi-head Attention",
            AblationVariant::SingleHead => "- Multi-head Attention + Single-head attention",
            AblationVariant::NoGcn => "- GCN",
        }
    }
}

impl fmt::Display for AblationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AblationVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = AblationVariant::ALL.iter().map(|v| v.name()).collect();
                Error::invalid(format!("unknown variant {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Applies exactly the switches of one ablation row to `base`.
pub fn make_variant(base: &ModelConfig, variant: AblationVariant) -> ModelConfig {
    let mut c = base.clone();
    match variant {
        AblationVariant::Full => {}
        AblationVariant::NoPretrained => c.use_pretrained = false,
        AblationVariant::NoPosition => c.use_position = false,
        AblationVariant::NoPretrainedNoPosition => {
            c.use_pretrained = false;
            c.use_position = false;
        }
        AblationVariant::NoAttention => c.attention = AttentionMode::None,
        AblationVariant::SingleHead => {
            c.attention = AttentionMode::Single;
            c.heads = 1;
        }
        AblationVariant::NoGcn => c.use_gcn = false,
    }
    c
}
