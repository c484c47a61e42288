pub mod cli;
pub mod collage;
pub mod config;
pub mod conspace;
pub mod error;
pub mod hyperspace;
pub mod io;
pub mod ifs;
pub mod maps;
pub mod pmetric;
pub mod shiftspace;

pub use error::{Error, Result};
