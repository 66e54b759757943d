//! perturbench: a deterministic, reversible text-perturbation pipeline
//! that turns LaTeX-formatted math problem sets into structural-robustness
//! benchmarks, plus the harness to run them against chat-completions
//! endpoints and score the results.
//!
//! The pipeline stages map onto the modules here:
//!
//! - [`sanitize`]: preprocessing that makes statements safe under reversal
//!   and grid layout
//! - [`grid`]: the rectangular character grid shared by spatial encodings
//! - [`transform`]: fifteen perturbations with exact decoders and their
//!   plain-English rule texts
//! - [`benchgen`]: manifest construction with round-trip verification,
//!   saturation prefixes, and sequential problem sets
//! - [`prompt`]: prompt bundles for the four protocols
//! - [`runner`]: request execution with caching and retries
//! - [`scoring`]: boxed-answer extraction and verdict rules
//! - [`report`]: aggregate tables and plot data
//!
//! Batch stages (manifest build, verification, scoring) run data-parallel
//! under the default `parallel` feature and sequentially without it.

pub mod benchgen;
pub mod exec;
pub mod grid;
pub mod prompt;
pub mod report;
pub mod rng;
pub mod runner;
pub mod sanitize;
pub mod scoring;
pub mod transform;
