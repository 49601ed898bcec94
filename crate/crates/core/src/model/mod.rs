//! The biaffine parser network, parameter bookkeeping, student sizing and
//! model files.

mod batch;
mod config;
mod io;
mod network;
mod params;
mod sizing;

pub use batch::Batch;
pub use config::ModelConfig;
pub use io::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use network::{Features, Parser, ScoreBundle};
pub use params::{count_params, init_params, param_shapes, LinearIds, LstmIds, ParamLayout};
pub use sizing::{param_fraction, scale_config, size_student};
