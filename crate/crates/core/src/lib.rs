//! Collaborative exploratory data analysis engine.

pub mod cluster;
pub mod command;
pub mod data;
pub mod error;
pub mod metric;
pub mod pipeline;
pub mod reduce;
pub mod select;
pub mod server;
pub mod session;
pub mod stats;

pub use error::{Error, Result, SyntaxError};
