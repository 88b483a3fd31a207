// SPDX-License-Identifier: Apache-2.0

//! Information propagation through quantum chains with fluctuating on-site
//! disorder.
//!
//! * [`model`]: chain geometry, hopping matrix, noise paths, random streams.
//! * [`single_particle`]: noisy XX chain in the one-fermion sector.
//! * [`lindblad`]: many-body master equations in the Pauli basis.
//! * [`bounds`]: closed-form envelopes and regime classification.
//! * [`analysis`]: observables, light-cone fronts and exponent fits.
//! * [`io`]: configuration, experiment runner and output files.

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod single_particle;
pub mod special;

pub use error::{Error, Result};
