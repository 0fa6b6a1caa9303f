//! Combinatorics and point counts for quiver moment maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`quiver`], [`forms`], [`graph`], [`dynkin`], [`simple`]: quivers, the
//!   Euler form and every per-quiver predicate (total negativity, property
//!   (P), bridges, extended-Dynkin roots, existence of simple modules);
//! * [`strata`]: semisimple types, their order, top-types and auxiliary
//!   quivers;
//! * [`bounds`]: exact evaluation of the dimension formulas and lemma checks;
//! * [`ring`] and [`count`]: arithmetic in `F_q[t]/(t^n)` and exact point
//!   counts of moment-map fibres over it, with [`cache`] persisting counts
//!   between runs;
//! * [`mukai`]: Mukai vectors and Ext-quivers of 2-Calabi-Yau categories;
//! * [`catalog`] and [`suite`]: generated test corpora and the end-to-end
//!   acceptance catalog used by the CLI.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod quiver;
pub mod forms;
pub mod graph;
pub mod dynkin;
pub mod simple;
pub mod strata;
pub mod bounds;
pub mod ring;
pub mod count;
pub mod cache;
pub mod mukai;
pub mod catalog;
pub mod suite;

pub use error::{Error, Result};
pub use quiver::{Arrow, DimVector, Quiver};
