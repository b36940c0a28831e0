//! Geometry of the quaternionic and complex hyperbolic planes together with
//! the local structure of the figure-eight knot representation variety near
//! its standard complex hyperbolic representation.

pub mod boundary;
pub mod cartan;
pub mod error;
pub mod gluing;
pub mod hermitian;
pub mod isometries;
pub mod scalars;
pub mod tolerances;
pub mod variety;
pub mod verify;

pub use error::{Error, Result};
pub use hermitian::{FormTag, HVector, HermitianForm, Isometry, Mat3, PointClass, ProjPoint};
pub use scalars::{FieldTag, ImScalar, Quaternion};
