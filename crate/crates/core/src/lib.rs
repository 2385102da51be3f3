//! Wigner functions on the discrete cylinder S¹×ℤ (angle × orbital angular
//! momentum) and tomographic reconstruction of rotor states from angular
//! distributions recorded under free evolution.
//!
//! Module map:
//!
//! * [`numerics`]: θ₃, truncated Dirac comb, periodic-grid quadrature.
//! * [`conventions`]: basis phases and sign pairings shared by every module.
//! * [`states`]: truncated pure states and density matrices in the OAM basis.
//! * [`phase_space`]: displacement operators, the Wigner kernel, Wigner and
//!   coefficient maps, marginals.
//! * [`tomography`]: free-rotor evolution, simulated measurements and linear
//!   inversion.
//! * [`io`]: JSON and CSV formats used by the command line front end.
//! * [`cli`]: the `vortex-wigner` command.

pub mod cli;
pub mod conventions;
pub mod error;
pub mod io;
pub mod numerics;
pub mod phase_space;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
