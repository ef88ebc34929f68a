//! Guided-filter family expressed as cyclic coordinate descent (CCD) on
//! least-squares objectives.
//!
//! Every filter here is one full CCD pass over a quadratic objective: a
//! closed-form minimization over the per-window linear coefficients
//! followed by a closed-form minimization over the output image. Rolling a
//! filter (feeding its output back as input) continues the same descent, so
//! each objective has an exact energy evaluator that tests use to certify
//! monotone decrease.
//!
//! | module    | filters                                             |
//! |-----------|-----------------------------------------------------|
//! | [`gf`]    | guided filter, its rolling form, objective energy   |
//! | [`tvgf`]  | total-variation guided filter (spectral q-update)   |
//! | [`cgf`]   | conservative guided filter (anchored rolling)       |
//! | [`igf`]   | inverse guided filters (guidance recovery)          |
//! | [`rmsf`]  | rolling mutual-structure filtering                  |
//! | [`rfnf`]  | rolling flash/no-flash filtering                    |
//!
//! Supporting modules: [`image`] (containers and parameters), [`boxops`]
//! (O(1) window statistics), [`metrics`], [`imgio`] (binary PNM) and
//! [`synth`] (seeded test-image generators).

pub mod boxops;
pub mod cgf;
pub mod error;
pub mod gf;
pub mod igf;
pub mod image;
pub mod imgio;
pub mod metrics;
pub mod rfnf;
pub mod rmsf;
pub mod synth;
pub mod tvgf;

pub use error::{Error, Result};
pub use image::{Boundary, EnergyReport, FilterParams, Image, WindowSpec};
