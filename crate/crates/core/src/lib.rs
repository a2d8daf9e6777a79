//! Online aggregation of crowd fact-checking judgements.

pub mod aggregators;
pub mod bias;
pub mod cli;
pub mod data;
pub mod fixture;
pub mod report;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod simulation;
