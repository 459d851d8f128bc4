//! Normal-form proper equilibria of finite extensive-form games with perfect
//! recall, computed in the sequence form by path following.

pub mod bench;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod forms;
pub mod game;
pub mod homotopy;
pub mod oracles;
pub mod refine;
pub mod solve;
pub mod tracer;

pub use error::{Error, Result};
pub use forms::{MixedProfile, NormalForm, RealizationProfile, SequenceForm, StrategySets};
pub use game::GameTree;
pub use homotopy::{HomotopyConfig, Method};
pub use refine::{Certificate, PerturbationFamily};
pub use solve::{solve, SolveOptions, SolveReport, StartKind};
pub use tracer::{PathTrace, TraceStatus, TracerOptions};
