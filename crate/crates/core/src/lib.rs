pub mod copula;
pub mod error;
pub mod figures;
pub mod iterates;
pub mod numerics;
pub mod product;
pub mod report;
pub mod spec;
pub mod step;
pub mod subdist;
pub mod substoch;
pub mod tdf;

pub use error::{Error, Result};
