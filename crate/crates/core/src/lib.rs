//! Executable combinatorics of atlases, hypercovers and set-valued descent on
//! finite spaces, together with an exact-rational calculator for quasi-smooth
//! derived intersections presented by polynomial cospans.

pub mod atlas;
pub mod error;
pub mod io;
pub mod lattice;
pub mod qsmooth;
pub mod sheaf;
pub mod simplicial;
pub mod sweep;

pub use error::{Error, Result};
