//! Exact wall-and-chamber computations for packings of nine balls in the
//! complex projective plane.
//!
//! The crate models the second homology of the 9-fold blow-up with its
//! intersection form, enumerates the negative classes that can carry walls,
//! plays Mozes' numbers game on the affine E8 diagram, and follows the
//! resulting sequence of (-2)-wall crossings toward the monotone point.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod negative_classes;
pub mod numbers_game;
pub mod wall_crossing;

pub use error::{Error, Result};
