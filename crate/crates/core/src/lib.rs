//! # blobflow
//!
//! Particle discretisation of Wasserstein gradient flows
//!
//! ```text
//! ∂ρ/∂t = ∇·( ρ ∇( H'(ρ) + V + W * ρ ) )
//! ```
//!
//! Each particle carries a fixed mass `w_i` and is blown up into a ball whose
//! diameter is a smoothed minimum of the distances to its neighbours. The
//! internal energy is evaluated on the resulting piecewise constant density,
//! while confinement and interaction act on the point masses directly. The
//! flow is the weighted gradient descent of that discrete energy, stepped with
//! explicit Euler.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`particles`] | [`ParticleSystem`], density reconstruction |
//! | [`model`] | [`EnergySpec`]: internal energy `H`, confinement `V`, interaction `W` |
//! | [`softmin`] | smooth `p`-approximation of the minimum and its gradient |
//! | [`energy`] | ball volumes, discrete energy, weighted gradient |
//! | [`init`] | initial particle systems from continuum profiles |
//! | [`integrate`] | fixed and adaptive explicit stepping, blow-up detection |
//! | [`exact`] | `erf`, incomplete Beta, reference solutions |
//! | [`metrics`] | Wasserstein errors, moments, entropy, slope fits |
//! | [`scenario`] | preset problems and the study drivers built on them |
//!
//! ## Quick start
//!
//! ```
//! use blobflow::{init, integrate, model::EnergySpec, exact::ReferenceSolution, metrics};
//!
//! let profile = init::ProfileSpec::GaussianHeat { t0: 0.25 };
//! let sys0 = init::init_equal_spacing(&profile, 20, (-2.5, 2.5), None).unwrap();
//! let spec = EnergySpec::heat();
//! let control = integrate::StepControl::fixed(integrate::cfl_suggestion(20, 0.1), 0.05);
//! let run = integrate::run(&sys0, &spec, &control).unwrap();
//! let err = metrics::wasserstein_error(
//!     run.final_system(),
//!     &ReferenceSolution::heat(0.25).unwrap(),
//!     0.05,
//! ).unwrap();
//! assert!(err < 0.1);
//! ```

pub mod energy;
pub mod error;
pub mod exact;
pub mod init;
pub mod integrate;
pub mod metrics;
pub mod model;
pub mod particles;
pub mod scenario;
pub mod softmin;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use energy::EnergyBreakdown;
pub use error::{Error, Result};
pub use model::EnergySpec;
pub use particles::ParticleSystem;
