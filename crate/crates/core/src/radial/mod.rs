//! Radial ground state of the Lane-Emden system, its far-field constants, the auxiliary
//! profile `w` and one-dimensional radial integrals.

mod aux_w;
mod grid;
mod ground_state;
mod profile;
pub(crate) mod quadrature;
mod tail;

pub use aux_w::{solve_w, AuxProfileW};
pub use grid::{Grid, GridOpts};
pub use ground_state::{rebuild_ground_state, solve_ground_state, tail_constants, GroundState, OdeResidual, ShootingReport};
pub use profile::{PowerTail, RadialProfile};
pub use quadrature::radial_moment;
pub use tail::{fit_log, fit_power, fitted_exponent, TailFit, TailReport};

