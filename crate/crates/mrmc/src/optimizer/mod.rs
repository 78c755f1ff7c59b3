//! Dual subgradient precoder updates, Sylvester closed forms, PAR projection
//! and the outer BCD-AP loop.

pub mod bcd;
pub mod gradients;
pub mod init;
pub mod par;
pub mod subgradient;
pub mod sylvester;

pub use bcd::{bcd_ap, wmmse_mrmc_pass, BcdOptions, BcdResult, PassReport, TraceRow};
pub use gradients::{gradient, hessian, linearized_rate_gradients, Block, BlockQuadratic, WmmseContext};
pub use init::{init_precoders, uncoded_code, InitMode};
pub use par::{par_project, par_project_code};
pub use subgradient::{polyak_step, subgradient_block, DualState};
pub use sylvester::SylvesterSystem;
