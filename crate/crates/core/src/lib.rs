//! Routing and scheduling of home health care caregivers.
//!
//! The crate models patients with multiple time windows and possibly
//! synchronized services, decodes two-row chromosomes into timed schedules,
//! and provides the solvers built on that decoder: a general variable
//! neighborhood search, a genetic algorithm with optional Monte Carlo
//! recourse estimation, and three multi-objective evolutionary algorithms.
//! An exhaustive oracle solves tiny instances exactly for testing.

pub mod ga;
pub mod gvns;
pub mod instancegen;
pub mod io;
pub mod metrics;
pub mod model;
pub mod moea;
pub mod oracle;
mod par;
pub mod recourse;
pub mod rng;
pub mod samples;
pub mod schedule;

pub use model::{build_instance, validate_chromosome, Chromosome, Instance, VisitGene};
pub use schedule::{decode, objective, objective_vector, DecodeParams, Schedule, VariantId};
