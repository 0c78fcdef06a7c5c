//! Grammar-driven event generation for reproducing pianos.
//!
//! The crate is organised as a stack. [`grammar`] expands an L-system into a
//! tagged symbol string, [`mapping`] turns each symbol into a bundle of
//! sampling distributions, [`pipeline`] renders sections of tempo-canon voices
//! (timed by [`canon`]) into [`pipeline::NoteEvent`]s, and [`hal`] adapts the
//! result to the latency and rate limits of a solenoid-driven instrument.
//!
//! [`metrics`] and [`stats`] measure the output, [`experiments`] wires
//! everything into reproducible, seeded studies, and [`io`] reads and writes
//! MIDI, JSON and CSV.
//!
//! ```
//! use pianola::grammar::Grammar;
//!
//! let s = Grammar::fibonacci().expand(4).unwrap();
//! assert_eq!(s.to_string(), "ABAABABA");
//! ```

pub mod canon;
pub mod error;
pub mod experiments;
pub mod grammar;
pub mod hal;
pub mod io;
pub mod mapping;
pub mod metrics;
pub mod pipeline;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
