//! Batch front end for the reflected BSDE toolkit: JSON scenario files in,
//! CSV and JSON reports out.

pub mod commands;
pub mod config;
pub mod output;
pub mod sample;
