//! Multiscale topology optimization over a multiclass microstructure library.
//!
//! The crate covers the full pipeline:
//!
//! 1. [`microlib`] — parametric 2D unit-cell classes rasterized to binary pixel
//!    grids over a sweep of volume fractions.
//! 2. [`homog`] — periodic homogenization of each cell into an orthotropic
//!    plane-stress stiffness `[C11, C12, C22, C66]`.
//! 3. [`gp`] — a multi-response Gaussian-process surrogate over the mixed input
//!    (volume fraction, class), with qualitative classes embedded into a 2D
//!    latent space learned from data.
//! 4. [`penalty`] — a smooth latent-distance penalty that keeps optimized latent
//!    points near class anchors.
//! 5. [`fea`], [`mma`], [`topopt`] — macro finite-element analysis, the method of
//!    moving asymptotes, and the three-stage compliance optimization that picks
//!    a density and a cell class per macro element.
//! 6. [`config`], [`io`], [`cli`] — TOML run configuration, file formats
//!    (CSV/PGM/JSON/VTK/PNG), and the pipeline commands behind the `mstopo`
//!    binary.
//!
//! Everything is deterministic for a fixed configuration and seed: repeated
//! runs produce byte-identical artifacts.

pub mod cli;
pub mod config;
pub mod error;
pub mod fea;
pub mod gp;
pub mod homog;
pub mod io;
pub mod microlib;
pub mod mma;
pub mod penalty;
mod sparse;
pub mod topopt;

pub use error::{Error, Result};
