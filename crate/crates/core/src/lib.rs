//! Eigenpairs of symmetrizable matrices with positive spectrum by
//! integrating the S-Oja-Brockett flow, together with constructions and
//! certificates for the symmetrizer `S`.

pub mod certify;
pub mod eigh;
pub mod error;
pub mod flow;
pub mod matrix;
pub mod oracle;
pub mod presets;
pub mod saddle;
pub mod symmetrizer;
pub mod textio;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub mod cli;
