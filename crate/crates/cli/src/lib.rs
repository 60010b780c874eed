//! Library half of the `randev` binary, split out so the commands can be
//! unit tested without spawning processes.

pub mod args;
pub mod commands;
pub mod failure;
pub mod monitor;
pub mod output;
