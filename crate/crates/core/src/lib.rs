//! Normal sub-Riemannian geodesics on the unit tangent bundle of a Riemannian
//! surface, and the Legendre singularities of their two projections: to the
//! surface (`pi`) and to the local space of Riemannian geodesics (`pi'`).

#[cfg(feature = "cli")]
pub mod checks;
#[cfg(feature = "cli")]
pub mod cli;
pub mod elliptic;
pub mod error;
pub mod expr;
pub mod extremal;
pub mod jet;
pub mod legendre;
pub mod metric;
pub mod ode;
pub mod pendulum;
#[cfg(feature = "cli")]
pub mod sampling;
pub mod singularity;

pub use error::{Error, Result};
