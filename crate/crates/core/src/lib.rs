//! Simulation of a holographic self-controlled reconfigurable intelligent
//! surface: hologram synthesis, FFT user localization and 1-bit beamforming.

pub mod beamforming;
pub mod ber;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod formats;
pub mod geometry;
pub mod localization;
pub mod wavefield;
