//! Thermo-mechanical response of a single energy pile.
//!
//! A pile of length `L` is restrained by linear shear springs along its
//! shaft and a spring (or rigid support) at its tip, and loaded by a
//! uniform temperature change and an axial head force. The crate provides
//!
//! - [`homogeneous`]: closed-form fields for a single soil layer,
//! - [`layered`]: a transfer-matrix solution for any number of layers,
//! - [`fd_oracle`]: an independent finite-difference solver for verification,
//! - [`calibration`]: fitting of spring stiffnesses to measurements.
//!
//! `x` runs upward from the tip; tension is positive; units are SI.

pub mod calibration;
pub mod error;
pub mod fd_oracle;
pub mod homogeneous;
pub mod layered;
pub mod pile_model;
pub mod quadrature;
pub mod roots;

pub use error::{Error, Result};
pub use homogeneous::HomogeneousCase;
pub use layered::{LayeredCase, LayeredSolution};
pub use pile_model::{
    LoadCase, PileSection, ResponseProfile, Sample, SoilLayer, SoilProfile, TipSupport,
};

/// A solved pile that can be evaluated anywhere on `[0, L]`.
pub trait AxialResponse {
    fn length(&self) -> f64;

    fn evaluate(&self, x: f64) -> Result<Sample>;
}
