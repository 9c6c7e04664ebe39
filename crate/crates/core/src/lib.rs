//! Global energy-efficiency (GEE) maximization for multi-carrier wireless
//! interference networks.
//!
//! The solver stacks three loops:
//!
//! - an outer fractional-programming loop ([`optimizer`]) that turns the
//!   rate-over-power ratio into a sequence of subtractive problems,
//! - better-response dynamics ([`brd`]) over the identical-interest game whose
//!   shared utility is the subtractive objective,
//! - an exponential-mapping learning scheme ([`learning`]) that solves each
//!   user's concave surrogate subproblem with closed-form updates.
//!
//! Minimum-rate requirements are handled either with a relaxed logarithmic
//! barrier or with per-subcarrier power floors ([`qos`]). The [`oracle`]
//! module holds independent reference solvers used to validate results on
//! small instances, and [`sweep`] drives Monte Carlo parameter studies.

pub mod brd;
pub mod error;
pub mod gen;
pub mod learning;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod qos;
pub mod scenario;
pub mod sweep;
pub mod validate;

pub use brd::{BrdOptions, BrdOutcome};
pub use error::{Error, Result};
pub use gen::{GenConfig, Topology};
pub use learning::LearningParams;
pub use model::RateBound;
pub use optimizer::{maximize_gee, RunReport, SolverOptions, StopReason};
pub use qos::{FloorPlan, QosMode, SplitRule};
pub use scenario::{PowerAllocation, Scenario};
pub use sweep::{SweepConfig, SweptParam};
