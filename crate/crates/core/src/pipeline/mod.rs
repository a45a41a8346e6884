//! The end-to-end classifier: embed, Bi-LSTM, attention and GCN branches,
//! max pooling, affine output. Also dataset assembly, the ablation
//! variants, and parameter accounting.

mod dataset;
mod example;
mod model;
mod variant;

pub use dataset::{build_dataset, Dataset, DatasetOptions};
pub use example::{prepare_examples, Example};
pub use model::{
    argmax, batch_gradients, check_model_gradients, count_parameters, forward, forward_instance, init_classifier,
    init_model, instance_rng, loss, predict, predict_proba, softmax_row, BatchGradients, CoordSampling, ModelState, CLS_B, CLS_W,
};
pub use variant::{make_variant, AblationVariant};
