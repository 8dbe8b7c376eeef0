//! Exact and Monte-Carlo experiments on the singularity of random symmetric
//! ±1 matrices, over the rationals and modulo small primes.

pub mod bound;
pub mod enumerate;
pub mod error;
pub mod event;
pub mod experiments;
pub mod fourier;
pub mod linalg;
pub mod matrix;
pub mod modulus;
pub mod rng;
pub mod structure;
pub mod vector;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/linalg.md")]
    mod linalg {}
    #[doc = include_str!("../../../book/src/structure.md")]
    mod structure {}
    #[doc = include_str!("../../../book/src/fourier.md")]
    mod fourier {}
    #[doc = include_str!("../../../book/src/rng.md")]
    mod rng {}
}
