//! Checks of the inequality, its proof steps and corollaries on random
//! instances, and the campaign runner that sweeps them.

mod alt;
mod campaign;
mod checks;
mod counter;
mod proof;

pub use alt::{
    alt_proof_check, concavity_instance, concavity_reversal_check, AltProofReport, ConcavityReport, ReversalWitness,
    ALT_QUADRATURE_NODES,
};
pub use campaign::{
    corollary2_check, run_campaign, run_sweep, CampaignConfig, CellReport, CheckKind, FailureRecord, GapReport,
    CSV_HEADER, MAX_CAMPAIGN_DIM,
};
pub use checks::{
    classical_integrated_check, classical_pointwise_check, corollary1_ratio, duality_monotonicity_check,
    normalized_theorem_gap, theorem_gap, theorem_scale, Corollary1Report, DualityReport,
};
pub use counter::{
    counterexample_search, exact_ratio_p1, two_atom_ratio, two_atom_search, CounterexampleReport, SearchStep,
};
pub use proof::{
    case1a_step_check, case1b_decomposition_check, case2_conclusion_check, case2_default_depth, case2_identity_check,
    log_t_grid, Case1aIntegrated, Case1aReport, Case1bReport, Case2Chain, Case2IdentityReport, ChainLink,
};
