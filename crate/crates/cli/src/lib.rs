//! Command-line front end and HTTP API for the gateway.

pub mod api;
pub mod cli;

pub use api::{router, ApiConfig, AppState};
pub use cli::{run, Cli};
