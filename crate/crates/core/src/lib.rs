//! Finite element discretisation of plane linear elasticity with a thin
//! fault strip carrying a slip variable, its sharp-interface limit, and
//! numerical checks of the associated analysis.
//!
//! Everything is generic over [`Real`] (implemented for `f32` and `f64`);
//! the aliases at the crate root fix the scalar to `f64`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod fem;
pub mod field;
pub mod geometry;
pub mod manufactured;
pub mod material;
pub mod report;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{build_dof_map, build_mesh, Region, Side};
pub use scalar::Real;

pub type Mesh = geometry::StructuredMesh<f64>;
pub type Dofs = geometry::DofMap<f64>;
pub type Geometry = geometry::FaultGeometry<f64>;
pub type Coefficients = material::Coefficients<f64>;
pub type Materials = material::MaterialField<f64>;
pub type Matrix = fem::sparse::CsrMatrix<f64>;
pub type Discretization = field::Discretization<f64>;
