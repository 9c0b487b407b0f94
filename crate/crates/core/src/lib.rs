pub mod cell;
pub mod cli;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod io;
pub mod macroscale;
pub mod mesh;
pub mod micro;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
