//! Hyper-parameter over-tuning: pseudo-label search on validation nodes and
//! the validation-size sweep.

mod sweep;
mod validutil;

pub use sweep::{sweep_order, sweep_validation_size, SweepReport, SweepRow};
pub use validutil::{
    plain_tuned_accuracy, validutil, validutil_partial, validutil_with_oracle, AdoptionRule,
    PseudoLabelState, ValidUtilResult, ValidUtilTask,
};
