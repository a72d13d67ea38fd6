pub mod error;
pub mod estimate;
pub mod harness;
pub mod model;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod spectrum;
mod symlets;
pub mod testkit;
pub mod wavelet;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/model.md")]
mod book_model {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/simulation.md")]
mod book_simulation {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/wavelets.md")]
mod book_wavelets {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/spectrum.md")]
mod book_spectrum {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/estimation.md")]
mod book_estimation {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/testing.md")]
mod book_testing {}
