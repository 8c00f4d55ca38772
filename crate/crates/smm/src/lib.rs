//! Self-motion manifolds of serial kinematic chains.
//!
//! A self-motion manifold (SMM) is the set of all joint configurations that
//! place the end effector at one fixed task pose. For a chain with one degree
//! of redundancy it is a one-dimensional curve (possibly several disconnected
//! closed or open curves) in joint space. This crate traces those curves by
//! integrating a directionally regularized Jacobian-kernel ODE with a
//! fixed-step fifth-order Runge-Kutta scheme, so the samples stay on the
//! manifold without any per-step inverse-kinematics correction.
//!
//! The pieces:
//!
//! - [`chain`]: chain descriptions (revolute/prismatic joints, limits, tool
//!   frame), the JSON chain-file format, and builtin planar/spatial models.
//! - [`kinematics`]: forward kinematics, geometric Jacobians in base/tool
//!   frame, pose error metrics.
//! - [`nullspace`]: SVD-based kernel extraction, pseudo-inverse, and rank
//!   diagnostics.
//! - [`induced`]: induced redundancy, turning an nDOF chain on an (n-1)DOF
//!   task into a degree-1 redundant system via an orthogonal projection.
//! - [`ivp`]: the regularized kernel field and the trace integrator with
//!   closure detection and bidirectional fallback at singularities.
//! - [`ik`]: damped-least-squares inverse kinematics, random restarts, and
//!   elbow-toggle seeds for planar 3R chains.
//! - [`search`]: disconnected-component search over a seed set and the
//!   workspace sweep driver.
//! - [`runs`]: file-producing experiment runs behind the `smm` binary.
//!
//! ```
//! use nalgebra::DVector;
//! use smm::chain::builtin;
//! use smm::ivp::{solve_smm_ivp, IntegratorConfig};
//!
//! let (model, task) = builtin("RRR").unwrap();
//! let q0 = DVector::from_column_slice(&[-1.0472, 1.5708, 2.618]);
//! let trace = solve_smm_ivp(&model, &task, &q0, &IntegratorConfig::default()).unwrap();
//! assert!(trace.closed);
//! ```

pub mod chain;
pub mod error;
pub mod ik;
pub mod induced;
pub mod ivp;
pub mod kinematics;
pub mod nullspace;
pub mod runs;
pub mod search;

pub use error::{Error, Result};
