pub mod error;
pub mod linalg;
pub mod scenario;
pub mod signal_model;
pub mod objective;
pub mod optimizer;
pub mod detector;
pub mod harness;
