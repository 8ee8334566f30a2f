//! Numerical laboratory for Gaussian measures on gauge connections over flat tori.
//!
//! The library builds a spectral mode basis for Lie-algebra valued one-forms on
//! T^d (d = 1, 2, 3), equips the mode coefficients with a product Gaussian
//! measure, and evaluates holonomy (Wilson line/loop) expectation values with
//! both Monte Carlo and closed-form abelian routes. On top of that sit
//! coherent-state translation operators with exact overlap formulas, their
//! infinitesimal generators, and heat-kernel-smeared composite operators up to
//! a Yang-Mills energy candidate.
//!
//! Module map:
//! - [`geometry`]: flat torus, piecewise-C¹ curves, vector-field flows.
//! - [`spectrum`]: Laplace eigenmode basis, Sobolev product, summability checks.
//! - [`gauge`]: structure groups, holonomy ODE, perturbative expansion bounds.
//! - [`hilbert`]: coherent-state frame, translation operators, quadratic forms.
//! - [`expectation`]: Monte Carlo holonomy expectations with error budgets.
//! - [`operators`]: heat-kernel smearing, electric/magnetic energy operators.
//! - [`support`]: measure-support experiments (envelope sets, Sobolev tails).

pub mod cmat;
pub mod error;
pub mod expectation;
pub mod gauge;
pub mod geometry;
pub mod hilbert;
pub mod operators;
pub mod quad;
pub mod rng;
pub mod spectrum;
pub mod support;

pub use cmat::CMat;
pub use error::{Error, Result};
pub use expectation::{ExpectationResult, McParams, SectionGrid, TruncationMode};
pub use gauge::{ConnectionSample, GroupSpec, GroupTag, HolonomyValue};
pub use geometry::{PathCurve, TorusPoint, VectorFieldSpec};
pub use hilbert::{FrameState, OverlapMatrix};
pub use operators::EnergyReport;
pub use spectrum::{Mode, ModeBasis, OneFormCoeffs};
