//! Resampling inference over racially labelled incident data.
//!
//! Incidents are linked to counties, each county supplies a race
//! distribution (from population or arrest counts), and replications redraw
//! every incident's race to build a null distribution of race totals. The
//! observed totals are then compared with that null.

pub mod config;
pub mod demography;
pub mod engine;
pub mod inference;
pub mod ingest;
pub mod linkage;
pub mod pipeline;
pub mod race;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod states;
