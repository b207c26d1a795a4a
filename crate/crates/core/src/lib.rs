pub mod error;
pub mod lattice;
pub mod rules;
pub mod quantity;
pub mod engine;
pub mod linalg;
pub mod conservation;
pub mod recode;
pub mod fluxpdr;
pub mod search;
pub mod cli;

pub use error::{Error, Result};
