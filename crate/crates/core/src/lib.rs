// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod dyson;
pub mod error;
pub mod fock;
pub mod hermitian;
pub mod model;
pub mod ode;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/drive.md")]
    mod drive {}
    #[doc = include_str!("../../../book/src/dyson-map.md")]
    mod dyson_map {}
    #[doc = include_str!("../../../book/src/hermitization.md")]
    mod hermitization {}
    #[doc = include_str!("../../../book/src/squeezing.md")]
    mod squeezing {}
    #[doc = include_str!("../../../book/src/fock-oracle.md")]
    mod fock_oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
