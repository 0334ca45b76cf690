//! Comparison methods: standard finite differences and adaptive RK4(5).

pub mod odes;
pub mod rk45;
pub mod standard_fd;
pub mod stencil;

pub use odes::{ode_rhs_library, InvariantOde};
pub use rk45::{rk45_integrate, rk45_integrate_with, FirstOrderSystem, Rk45Options, Rk45Result};
pub use standard_fd::{run_standard_fd, standard_fd_step, FdRun, UniformMesh};
