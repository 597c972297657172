//! Free auxiliary factors of a coordination scheme.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::ConditionalKernel;

use super::Scenario;

/// The auxiliary factors a designer is free to choose in each scenario.
/// W1 is the channel codeword variable, W2 the description variable; both
/// alphabets are declared by the kernels themselves.
///
/// Kernel shapes, with axis order as listed:
/// * `noncausal` / `causal_decoding`: encoder (X,W1,W2 | U,S), decoder
///   (V | Y,Z,W1,W2), except the causal decoder sees (V | Y,Z,W2).
/// * `strictly_causal_decoding`: encoder only; V is tied to W2.
/// * `causal_encoding`: prior (W1 |), description (W2 | U,S,W1), channel
///   input (X | U,S,W1), decoder (V | Y,Z,W1,W2).
/// * `strictly_causal_encoding`: channel input (X |), description
///   (W2 | U,S,X), decoder (V | Y,Z,X,W2); W1 is tied to X.
/// * `perfect_channel`: description (W2 | U,S,X), decoder (V | X,Z,W2);
///   W1 is tied to X and the channel copies X to Y.
/// * `lossless`: encoder (X,W1 | U,S); W2 and V are tied to U.
/// * `independent`: source description (W2 | U), source decoder
///   (V | Z,W2), channel encoder (X,W1 | S).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum AuxScheme {
    Noncausal {
        codeword_encoder: ConditionalKernel,
        codeword_decoder: ConditionalKernel,
    },
    PerfectChannel {
        state_description: ConditionalKernel,
        codeword_decoder: ConditionalKernel,
    },
    Lossless {
        codeword_encoder: ConditionalKernel,
    },
    Independent {
        source_description: ConditionalKernel,
        source_decoder: ConditionalKernel,
        channel_encoder: ConditionalKernel,
    },
    CausalEncoding {
        codeword_prior: ConditionalKernel,
        description: ConditionalKernel,
        channel_input: ConditionalKernel,
        codeword_decoder: ConditionalKernel,
    },
    StrictlyCausalEncoding {
        channel_input: ConditionalKernel,
        description: ConditionalKernel,
        codeword_decoder: ConditionalKernel,
    },
    CausalDecoding {
        codeword_encoder: ConditionalKernel,
        codeword_decoder: ConditionalKernel,
    },
    StrictlyCausalDecoding {
        codeword_encoder: ConditionalKernel,
    },
}

impl AuxScheme {
    pub fn scenario(&self) -> Scenario {
        match self {
            AuxScheme::Noncausal { .. } => Scenario::Noncausal,
            AuxScheme::PerfectChannel { .. } => Scenario::PerfectChannel,
            AuxScheme::Lossless { .. } => Scenario::Lossless,
            AuxScheme::Independent { .. } => Scenario::Independent,
            AuxScheme::CausalEncoding { .. } => Scenario::CausalEncoding,
            AuxScheme::StrictlyCausalEncoding { .. } => Scenario::StrictlyCausalEncoding,
            AuxScheme::CausalDecoding { .. } => Scenario::CausalDecoding,
            AuxScheme::StrictlyCausalDecoding { .. } => Scenario::StrictlyCausalDecoding,
        }
    }

    /// Factor names in assembly order for each scenario.
    pub fn factor_names(scenario: Scenario) -> &'static [&'static str] {
        match scenario {
            Scenario::Noncausal | Scenario::CausalDecoding => {
                &["codeword_encoder", "codeword_decoder"]
            }
            Scenario::StrictlyCausalDecoding => &["codeword_encoder"],
            Scenario::PerfectChannel => &["state_description", "codeword_decoder"],
            Scenario::Lossless => &["codeword_encoder"],
            Scenario::Independent => {
                &["source_description", "source_decoder", "channel_encoder"]
            }
            Scenario::CausalEncoding => &[
                "codeword_prior",
                "description",
                "channel_input",
                "codeword_decoder",
            ],
            Scenario::StrictlyCausalEncoding => {
                &["channel_input", "description", "codeword_decoder"]
            }
        }
    }

    pub fn factor(&self, name: &str) -> Result<&ConditionalKernel> {
        let found = match (self, name) {
            (AuxScheme::Noncausal { codeword_encoder, .. }, "codeword_encoder") => {
                Some(codeword_encoder)
            }
            (AuxScheme::Noncausal { codeword_decoder, .. }, "codeword_decoder") => {
                Some(codeword_decoder)
            }
            (AuxScheme::PerfectChannel { state_description, .. }, "state_description") => {
                Some(state_description)
            }
            (AuxScheme::PerfectChannel { codeword_decoder, .. }, "codeword_decoder") => {
                Some(codeword_decoder)
            }
            (AuxScheme::Lossless { codeword_encoder }, "codeword_encoder") => {
                Some(codeword_encoder)
            }
            (AuxScheme::Independent { source_description, .. }, "source_description") => {
                Some(source_description)
            }
            (AuxScheme::Independent { source_decoder, .. }, "source_decoder") => {
                Some(source_decoder)
            }
            (AuxScheme::Independent { channel_encoder, .. }, "channel_encoder") => {
                Some(channel_encoder)
            }
            (AuxScheme::CausalEncoding { codeword_prior, .. }, "codeword_prior") => {
                Some(codeword_prior)
            }
            (AuxScheme::CausalEncoding { description, .. }, "description") => Some(description),
            (AuxScheme::CausalEncoding { channel_input, .. }, "channel_input") => {
                Some(channel_input)
            }
            (AuxScheme::CausalEncoding { codeword_decoder, .. }, "codeword_decoder") => {
                Some(codeword_decoder)
            }
            (AuxScheme::StrictlyCausalEncoding { channel_input, .. }, "channel_input") => {
                Some(channel_input)
            }
            (AuxScheme::StrictlyCausalEncoding { description, .. }, "description") => {
                Some(description)
            }
            (AuxScheme::StrictlyCausalEncoding { codeword_decoder, .. }, "codeword_decoder") => {
                Some(codeword_decoder)
            }
            (AuxScheme::CausalDecoding { codeword_encoder, .. }, "codeword_encoder") => {
                Some(codeword_encoder)
            }
            (AuxScheme::CausalDecoding { codeword_decoder, .. }, "codeword_decoder") => {
                Some(codeword_decoder)
            }
            (AuxScheme::StrictlyCausalDecoding { codeword_encoder }, "codeword_encoder") => {
                Some(codeword_encoder)
            }
            _ => None,
        };
        found.ok_or_else(|| {
            Error::InvalidConfig(format!(
                "scheme for {} has no factor named {name}",
                self.scenario()
            ))
        })
    }

    /// Rebuild a scheme from named factors, in any order.
    pub fn from_factors(
        scenario: Scenario,
        mut factors: Vec<(String, ConditionalKernel)>,
    ) -> Result<AuxScheme> {
        let mut take = |name: &str| -> Result<ConditionalKernel> {
            let pos = factors
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| Error::InvalidConfig(format!("missing factor {name}")))?;
            Ok(factors.swap_remove(pos).1)
        };
        let scheme = match scenario {
            Scenario::Noncausal => AuxScheme::Noncausal {
                codeword_encoder: take("codeword_encoder")?,
                codeword_decoder: take("codeword_decoder")?,
            },
            Scenario::CausalDecoding => AuxScheme::CausalDecoding {
                codeword_encoder: take("codeword_encoder")?,
                codeword_decoder: take("codeword_decoder")?,
            },
            Scenario::StrictlyCausalDecoding => AuxScheme::StrictlyCausalDecoding {
                codeword_encoder: take("codeword_encoder")?,
            },
            Scenario::PerfectChannel => AuxScheme::PerfectChannel {
                state_description: take("state_description")?,
                codeword_decoder: take("codeword_decoder")?,
            },
            Scenario::Lossless => AuxScheme::Lossless {
                codeword_encoder: take("codeword_encoder")?,
            },
            Scenario::Independent => AuxScheme::Independent {
                source_description: take("source_description")?,
                source_decoder: take("source_decoder")?,
                channel_encoder: take("channel_encoder")?,
            },
            Scenario::CausalEncoding => AuxScheme::CausalEncoding {
                codeword_prior: take("codeword_prior")?,
                description: take("description")?,
                channel_input: take("channel_input")?,
                codeword_decoder: take("codeword_decoder")?,
            },
            Scenario::StrictlyCausalEncoding => AuxScheme::StrictlyCausalEncoding {
                channel_input: take("channel_input")?,
                description: take("description")?,
                codeword_decoder: take("codeword_decoder")?,
            },
        };
        if !factors.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "unexpected factor {} for {scenario}",
                factors[0].0
            )));
        }
        Ok(scheme)
    }
}
