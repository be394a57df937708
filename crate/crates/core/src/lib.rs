//! Exact mod-2 cohomology computations for small 2-groups.

pub mod error;
pub mod bar;
pub mod catalog;
pub mod f2;
pub mod pc;
pub mod resolution;
pub mod ring;
pub mod verify;

pub use error::{Error, Result, SizingError};
