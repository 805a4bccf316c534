//! Numerical laboratory for multi-bubble solutions of the critical Hamiltonian system
//! `-Δu = |v|^{p-1} v`, `-Δv = |u|^{q-1} u` in `R^N`.
//!
//! The crate builds the radial ground state, the polygon ansatz of one inner bubble and `k`
//! outer bubbles, Monte Carlo estimates of its energy and interaction profile, weighted-norm
//! error checks and the reduced energy landscape in the parameters `(mu0, r, lambda)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod energy;
pub mod error;
pub mod norms;
pub mod optimize;
pub mod pair;
pub mod polygon;
pub mod quad;
pub mod radial;
pub mod reduced;
pub mod special;

pub use error::{Error, Result};
pub use pair::{CriticalPair, TailBranch};
pub use polygon::{apply_symmetry, btilde11, pairwise_sum, polygon_centers, PolygonConfig};
pub use radial::{
    radial_moment, rebuild_ground_state, solve_ground_state, solve_w, tail_constants, AuxProfileW, GridOpts, GroundState,
    RadialProfile,
};
pub use bubble::{
    eval_bubble, eval_derivatives, eval_multibubble, eval_phi_asymptotic, eval_phi_mc, eval_projection_u,
    eval_projection_u_mc, scaling_defect, Ansatz, AnsatzPoint, BubbleField, DerivativeFamily, PhiMode,
};
pub use energy::{
    expansion_convergence, ground_energy, interaction_constants, measure_expansion, EnergyBreakdown, ExpansionTable,
    InteractionConstants,
};
pub use norms::{error_norm_check, error_term, nonlinearity, weighted_ratio, ErrorNormTable, NormKind, SamplePlan, WeightedNormSpec};
pub use quad::{integrate, integrate_vec, McEstimate, McVector, Mixture, Sampling};
pub use reduced::{InteriorMax, ReducedLandscape, SearchBox};
