//! Finite-dimensional Bismut–Lott torsion forms over flat tori, odd
//! characteristic forms, filtration torsion, and the closed-form torsion
//! classes of circle bundles together with the checks that relate them.

pub mod circle_model;
pub mod exterior;
pub mod fixtures;
pub mod flat_bundle;
pub mod form_matrix;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod special_fn;
pub mod torsion;
