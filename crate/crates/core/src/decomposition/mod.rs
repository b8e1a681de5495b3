//! Splitting boxes and states into steerable and unsteerable parts, and
//! deciding whether a box admits a local-hidden-state model.

mod certify;
mod conic;
mod lp;
mod model;
mod search;
mod splits;

pub use certify::{certify_quantumness, certify_quantumness_with_margin, Certificate, Verdict, WITNESS_MARGIN};
pub use model::{
    bloch_z_factor, hidden_state_phases, build_lhs_model_2set, build_lhs_model_3set, lhs_target_2set, lhs_target_3set,
    verify_lhv_lhs, LhvLhsModel, MODEL_SLACK,
};
pub use search::{search_lhs_bounded, InfeasibilityTrace, SearchOutcome, TraceEntry, RECONSTRUCTION_TOL};
pub use splits::{
    canonical_box_split, canonical_split_2set, canonical_split_3set, schrodinger_strength_bb84,
    schrodinger_strength_bd, steering_cost_bb84, steering_cost_split_bb84, BoxSplit, StateSplit,
};
