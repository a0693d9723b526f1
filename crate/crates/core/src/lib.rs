pub mod bounds;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod seeding;
pub mod srht;
pub mod wht;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hadamard.md")]
    mod hadamard {}
    #[doc = include_str!("../../../book/src/srht.md")]
    mod srht {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/coupons.md")]
    mod coupons {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
