//! Deterministic numerical kernels shared by the fits and the simulation.

mod minimize;
mod random;
mod wls;

pub use minimize::{minimize_scalar, try_minimize_scalar, ScalarMinResult, SearchConfig};
pub use random::{derive_stream, RandomStream};
pub use wls::solve_wls;
