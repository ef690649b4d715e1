//! Exact-rational models of quasi-smooth intersections `X ×_Z Y` presented
//! by polynomial cospans.

pub mod corpus;
pub mod cospan;
pub mod hochschild;
pub mod jets;
pub mod linalg;
pub mod model;
pub mod pl;
pub mod poly;

pub use cospan::{
    diagonal_point, diagonal_representation, is_transverse, jacobian, product, product_point, tangent_complex,
    virtual_dimension, ChainComplex, CospanPresentation, PolynomialMap, RationalPoint,
};
pub use hochschild::{
    hochschild_degeneracy, hochschild_differential, hochschild_face, hochschild_level, interval_map_report,
    koszul_betti, HochschildLevel,
};
pub use jets::{
    jet_mapping_complex, mapping_space_betti, nerve_cosimplicial_betti, JetAlgebra, SimplicialVectorSpace,
};
pub use linalg::{Matrix, Q};
pub use pl::{pl_retraction, pl_retraction_check, PlReport};
pub use poly::Poly;
