//! Orientability of random hypergraphs.
//!
//! A (w,k)-orientation of a hypergraph gives every edge `w` positive signs on
//! distinct vertices so that no vertex collects more than `k`. This crate
//! decides orientability exactly with max-flow, peels hypergraphs down to
//! their (w,k+1)-core, samples the random models involved, and predicts the
//! orientability threshold of random hypergraphs by integrating the fluid
//! limit of the peeling process.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod flow;
pub mod hypergraph;
pub mod ode;
pub mod peeling;
pub mod poisson;
pub mod random;

pub use error::{Error, Result};
pub use flow::{build_network, hakimi_check, max_flow, min_max_indegree, orient, CutWitness, FlowNetwork, OrientOutcome};
pub use hypergraph::{
    check_deterministic_conditions, check_property_a, check_property_t, expansion_condition,
    recommended_gamma, subset_stats, verify_orientation, w_density, w_induced_subgraph,
    EdgeCountVector, Hypergraph, Orientation, OrientationCheck, OrientationParams, Rational,
    BRUTE_FORCE_CAP,
};
pub use ode::{find_threshold, integrate, CoreStats, OdeParams, OdeState, ThresholdResult, Trajectory};
pub use peeling::{core_statistics, extend_orientation, rancore, PeelMode, PeelResult, ProcessTrace};
pub use poisson::{poisson_lower_tail, poisson_upper_tail, solve_lambda, TruncatedPoisson};
pub use random::RngSeed;
