//! Parameterized layers: embeddings, Bi-LSTM, multi-head self-attention and
//! multi-graph GCN propagation, plus the named parameter registry they share.

mod attention;
mod config;
mod embed;
mod gcn;
mod lstm;
mod params;

pub use attention::{init_attention, multi_head_attention, scaled_dot_attention};
pub use config::{AttentionMode, ModelConfig};
pub use embed::{embed_sequence, init_embeddings, position_row, POS_HEAD, POS_TAIL, WORD_TABLE};
pub use gcn::{gcn_branch, gcn_name, gcn_propagate, init_gcn, inter_graph_mix};
pub use lstm::{bilstm, init_lstm, lstm_direction, lstm_step, Direction, LstmVars};
pub use params::{glorot, Binder, GradPiece, ParamGrads, ParamStore};
