//! Deterministic first-order optimization lab.
//!
//! The crate bundles four layers:
//!
//! * [`core`] — the `Objective` trait, per-iteration traces, and the shared
//!   descent loop used by every stepsize rule.
//! * [`objectives`] — concrete convex test functions (a quartic with tunable
//!   gradient-dependent smoothness, an isotropic quadratic) plus empirical
//!   smoothness probes.
//! * [`optimizers`] — seven stepsize policies: constant, clipped, Polyak,
//!   naive lower-bound, DecSPS, AdaSPS, and the horizon-normalized inexact
//!   Polyak rule.
//! * [`verify`] — machine-checkable inequality certificates evaluated on
//!   traces and sample grids, and log-log rate-slope fitting.
//! * [`harness`] — JSON-configured experiments, grid search with
//!   deterministic selection, CSV/JSON/SVG persistence, and the CLI backend.
//!
//! Everything is deterministic: identical inputs produce bitwise-identical
//! traces and byte-identical artifacts on the same platform.

pub mod core;
pub mod harness;
pub mod objectives;
pub mod optimizers;
pub mod verify;
