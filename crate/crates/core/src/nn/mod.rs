//! Minimal from-scratch neural toolkit.
//!
//! Exactly the pieces the embedder and classifier need, nothing more: a
//! row-major [`tensor::Tensor`], seven layer operations with hand-derived
//! backward passes ([`ops`]), binary cross-entropy ([`loss`]), an Adam
//! optimizer ([`adam`]), seeded weight initialization ([`init`]), and a
//! central-finite-difference gradient checker ([`gradcheck`]) that verifies
//! every backward pass in 64-bit mode.

pub mod adam;
pub mod gradcheck;
pub mod init;
pub mod loss;
pub mod ops;
pub mod tensor;

pub use tensor::{Scalar, Tensor};
