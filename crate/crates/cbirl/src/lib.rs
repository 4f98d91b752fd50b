pub mod config;
pub mod formats;
pub mod harness;
pub mod world;
