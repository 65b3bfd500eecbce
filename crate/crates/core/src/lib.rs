//! Readability analysis from scroll-interaction logs.
//!
//! The pipeline runs from raw reading sessions to per-text feature rows:
//!
//! 1. [`session`] ingests sessions, articles, participants and AoA norms.
//! 2. [`engagement`] drops readings that never reached the middle of the text.
//! 3. [`interaction`] turns a scroll trace into speed, acceleration and
//!    regression statistics.
//! 4. [`text`] computes length, lexical richness, traditional formulas and AoA.
//! 5. [`aggregate`] averages sessions per text and builds labeled matrices.
//! 6. [`classifier`] trains a linear SVM under stratified k-fold CV.
//! 7. [`stats`] covers correlations, Bonferroni, paired permutation tests and
//!    the subgroup reports.

pub mod aggregate;
pub mod classifier;
pub mod engagement;
pub mod error;
pub mod interaction;
pub mod rng;
pub mod session;
pub mod stats;
pub mod synthetic;
pub mod text;

pub use error::{Error, Result};
pub use session::{Level, ScrollEvent, Session, SessionKey};
