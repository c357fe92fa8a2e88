//! Generalized stochastic block models over finite alphabets: channel
//! families, characteristic tensors and marginal orders, low coordinate
//! degree advantage bounds, exact brute-force oracles, Pearson chi-squared
//! concentration and instance sampling.

pub mod bounds;
pub mod channel;
pub mod characteristic;
pub mod concentration;
pub mod error;
pub mod group;
pub mod injective;
pub mod model_spec;
pub mod multinomial;
pub mod numeric;
pub mod oracle;
pub mod sampler;
pub mod tensor;

pub use bounds::{BoundOptions, BoundReport, ThresholdVerdict};
pub use channel::{ChannelFamily, GroupMode, ModelAudit};
pub use characteristic::{characteristic_tensor, marginal_profile, MarginalOrder, MarginalProfile};
pub use concentration::PearsonSpec;
pub use error::{GsbmError, Result};
pub use group::FiniteGroup;
pub use injective::{injective_norm, InjectiveNorm, InjectiveOptions, NormMethod};
pub use model_spec::{parse_model, parse_model_arg, ResolvedModel, SpecDefaults};
pub use oracle::{ChainReport, TinyInstance};
pub use sampler::{sample, Instance};
pub use tensor::SymTensor;
