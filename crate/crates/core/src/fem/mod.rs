//! Finite element building blocks: quadrature, Q2 shape functions, sparse
//! storage and assembly of the variational forms.

pub mod assembly;
pub mod elasticity;
pub mod quadrature;
pub mod shape;
pub mod sparse;
