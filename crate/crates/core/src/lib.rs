pub mod cli;
pub mod covmat;
pub mod error;
pub mod kernels;
pub mod mle;
pub mod sim;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use kernels::{Family, KernelSpec, ValidityReport};
