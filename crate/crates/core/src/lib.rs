//! Two-photon localisation and delocalisation in coupled nonlinear cavities
//! and in linear cavity arrays.

pub mod cavity_array;
pub mod coherent;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod metrics;
pub mod numerics;
pub mod open_system;

pub use error::{Error, Result};
