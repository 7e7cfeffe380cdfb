pub mod covering;
pub mod dirichlet;
pub mod error;
pub mod field;
pub mod graph;
pub mod kuramoto;
pub mod linalg;
pub mod pcf;
pub mod render;
pub mod winding;

pub use error::{Error, Result};
