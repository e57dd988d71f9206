//! Diagnostics around the coboundary equation: Birkhoff sums and tightness
//! statistics, the generic class 𝒢^p, and explicit counterexample families.

mod birkhoff;
mod families;
mod generic;
mod growth;
mod spec;

pub use birkhoff::{
    birkhoff, dn_membership, lq_norm, schmidt_profile, schmidt_profile_on, schmidt_statistic, schmidt_statistic_on,
    BirkhoffReport, DnVerdict, LevelStat,
};
pub use families::{audit_tolerance, default_n_table, kwapien_delta, kwapien_generate, log2_table, not_a_moment_generate};
pub use generic::{
    case_two_k, core_lower_bound, default_witness, gp_densify, gp_membership, gp_openness_radius, gp_row, BoundCase,
    GpMembership, GpRow, OpennessWitness, MAX_EXPANDED_BITS,
};
pub use growth::GrowthSequence;
pub use spec::{AuditEntry, CounterexampleSpec, Family, Parameters};
