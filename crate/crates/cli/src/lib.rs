//! Library surface of the CLI: configuration parsing, profiles, snapshot
//! serialization and the subcommand entry points (kept in a lib so the
//! integration tests can exercise them directly).

pub mod commands;
pub mod config;
pub mod output;
pub mod profiles;
pub mod snapshot;
