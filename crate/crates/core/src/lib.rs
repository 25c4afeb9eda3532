pub mod approx;
pub mod corpus;
pub mod eigen;
pub mod error;
pub mod kernel;
pub mod krein;
pub mod operator;
pub mod quadrature;
pub mod rational;
pub mod rootfind;
pub mod scattering;
pub mod spectral;
pub mod vector;

pub use error::{Error, Result};
pub use operator::{Backend, Domain, OperatorModel};
pub use rational::RationalFn;
pub use vector::ScaleVector;

pub type C64 = num_complex::Complex64;

// The guide's code blocks run as doc-tests so they cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scale.md")]
    mod scale {}
    #[doc = include_str!("../../../book/src/krein.md")]
    mod krein {}
    #[doc = include_str!("../../../book/src/eigenvalues.md")]
    mod eigenvalues {}
    #[doc = include_str!("../../../book/src/approximation.md")]
    mod approximation {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
