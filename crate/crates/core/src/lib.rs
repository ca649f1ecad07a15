pub mod bounds;
pub mod constructions;
pub mod discrimination;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod operator;
pub mod sim;

pub use error::{Error, Result};
pub use operator::{BipartiteOperator, CMatrix, CVector, Factor, JordanPair, Spectrum};
