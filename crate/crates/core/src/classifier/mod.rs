//! Binary text classifier. Training runs plainly, on blinded or augmented
//! data, or with a logit-pairing penalty over counterfactual pairs.

pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod model;
pub mod train;

pub use checkpoint::Checkpoint;
pub use loss::{
    gradient_check, loss_and_grad, loss_logit_pairing, loss_parts, loss_plain, penalty, Example,
    LossParts, LossSelector,
};
pub use model::{encode, sigmoid, ModelParams};
pub use train::{train, Blinding, EpochRecord, Scheme, TrainConfig, TrainedModel, TrainingLog};
