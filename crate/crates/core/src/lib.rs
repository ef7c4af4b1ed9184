//! Exact computations on triangulations of an n-gon and the structures they
//! index on the Grassmannian of 2-planes: moment and bending polytopes,
//! piecewise-linear maps between them, deformed Plücker relations, potential
//! functions and their geometric lifts.

pub mod combinatorics;
pub mod error;
pub mod gelfand_cetlin;
pub mod linalg;
pub mod plmap;
pub mod pluecker;
pub mod polytope;
pub mod rational;
pub mod symbolic;

pub use error::{Error, Result};
pub use rational::Rat;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/triangulations.md")]
    mod triangulations {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/plmaps.md")]
    mod plmaps {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/pluecker.md")]
    mod pluecker {}
    #[doc = include_str!("../../../book/src/gelfand_cetlin.md")]
    mod gelfand_cetlin {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
