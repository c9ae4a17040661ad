pub mod chain;
pub mod duality;
pub mod error;
pub mod io;
pub mod lp;
pub mod measures;
pub mod rng;
pub mod scalar_ot;
pub mod tol;
pub mod vector_ot;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/scalar.md")]
    struct Scalar;
    #[doc = include_str!("../../../book/src/vector.md")]
    struct Vector;
    #[doc = include_str!("../../../book/src/chain.md")]
    struct Chain;
    #[doc = include_str!("../../../book/src/duality.md")]
    struct Duality;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
