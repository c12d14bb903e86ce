pub mod characteristic;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod mesh;
pub mod ode;
pub mod oracles;
pub mod potentials;
pub mod quad;
pub mod riccati;
pub mod roots;
pub mod scaled;
pub mod spectra;
pub mod wkb;

pub use error::{Error, ErrorFamily, Result};
