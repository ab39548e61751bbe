//! Deformation, factorization, exact solutions and point symmetries of the
//! complex Van der Pol equation, with a residual audit for each relation.

pub mod audit;
pub mod error;
pub mod exact;
pub mod exppoly;
pub mod factorization;
pub mod lienard;
pub mod num;
pub mod symmetry;

pub use error::{Error, Result};
pub use factorization::Sign;
