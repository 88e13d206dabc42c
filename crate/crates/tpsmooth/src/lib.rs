//! File formats, reports, plots and the command-line driver around
//! [`tpsmooth_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod plot;
pub mod report;
pub mod verify;

pub use error::{AppError, AppResult};
