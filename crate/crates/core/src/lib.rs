//! Free-particle wave-packet integrals.
//!
//! The packet `psi(x, tau) = int phi(z) exp(i x z - i tau z^2) dz` is evaluated
//! in reduced time `tau = t hbar / (2m)` by closed forms, adaptive quadrature,
//! heat and theta series, and checked against a catalogue of identities.

pub mod asymptotics;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod foundation;
pub mod hermite;
pub mod quadrature;
pub mod registry;
pub mod wavepacket;
pub mod zeta;

pub use error::{Error, Result};
pub use foundation::{Complex, PhysicalConfig, ReducedTime};
pub use wavepacket::{Amplitude, Method, WaveValue};
