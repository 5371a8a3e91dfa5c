pub mod affine;
pub mod axioms;
pub mod error;
pub mod exec;
pub mod fields;
pub mod grading;
pub mod linalg;
pub mod products;
pub mod report;
pub mod scalars;
pub mod series;
pub mod synthetic;

pub use error::{Error, Result};
