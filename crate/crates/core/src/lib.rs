//! Hybrid main-engine power modelling.
//!
//! A calm-water baseline built from sea-trial power curves (`P = c·Vⁿ`,
//! linearly interpolated in draft) is combined with a data-driven regressor
//! that learns the residual power caused by weather and operating
//! conditions. The regressors are a gradient-boosted tree ensemble and a
//! tanh multilayer perceptron, the latter optionally trained with a
//! propeller-law derivative penalty.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! live in the `vesselpower` companion crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod baseline;
pub mod data;
pub mod error;
pub mod gbt;
pub mod harness;
pub mod model;
pub mod neural;
pub mod pinn;
pub mod scaler;
pub mod synth;

mod math;

pub use baseline::{PowerCurve, SeaTrialBaseline, SeaTrialPoint};
pub use data::{FeatureVector, VoyageRecord};
pub use error::{Error, Result};
pub use model::{Family, Mode, TrainedModel};
pub use scaler::StandardScaler;
