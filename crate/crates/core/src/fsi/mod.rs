//! Picard maps Λ and Π for the coupled fluid-wave system and the fixed-point driver.

pub mod terms;
pub mod compat;
pub mod picard;

pub use compat::{check_compatibility, crafted_compatible_triple, CompatThresholds, CompatibilityReport, InitialLoads};
pub use picard::{
    apply_step, contraction_pair, contraction_study, diagnostic_diff, lambda_step, perturbed_iterate, pi_step,
    pi_step_with_kinematics, run_fixed_point, ContractionRow, ContractionTable, ConvergenceReport, ExternalLoads,
    FinalResiduals, FixedPointFailure, FsiData, FsiState, IterationConfig, Mode, ReportFlags, RowStatus, StepOutput,
};
