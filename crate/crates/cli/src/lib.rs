//! Command-line front end and the live-session HTTP server.

pub mod server;
