//! Numerical laboratory for grafting and symplectic forms on Teichmüller
//! space.
//!
//! The crate builds surface-group holonomy representations from complex
//! Fenchel–Nielsen coordinates, differentiates them into group cocycles,
//! pairs cocycles with the Goldman cup product, and compares the result with
//! the length/weight form on `T × ML`. A separate tetrahedron module checks
//! the hyperbolic Schläfli formula and its dual.

pub mod diffgeo;
pub mod goldman;
pub mod holonomy;
pub mod moebius;
pub mod precision;
pub mod schlafli;
pub mod special;
pub mod surface;
pub mod symplectic;
