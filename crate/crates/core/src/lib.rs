pub mod cli;
pub mod config;
pub mod controller;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod output;
pub mod pid;
pub mod plant;
pub mod trial;

pub use error::{Error, Result};
