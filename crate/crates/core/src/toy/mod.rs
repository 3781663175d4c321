//! Small f64 reference versions of the conditioning network blocks, each
//! with an analytic backward pass checked against finite differences.

pub mod attention;
pub mod encoder;
pub mod gradcheck;
pub mod loss;
pub mod tensor;

pub use attention::{
    attention, attention_backward, attention_weights, cross_frame_mix, cross_view_mix, neighbor_mix,
    neighbor_mix_backward, AttentionParams, MixGrads, MixParams,
};
pub use encoder::{
    embed_slab, embedding_table, mpi_encode, mpi_encode_backward, one_hot_slab, subsample, Conv1x1Params, EMBED_DIM,
    EMBED_ROWS,
};
pub use gradcheck::{finite_diff_gradcheck, run_gradcheck, GradcheckReport, OpReport};
pub use loss::{reweighed_loss, reweighed_loss_backward};
pub use tensor::{add_condition, DenseTensor};
