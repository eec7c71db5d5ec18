//! The guide under `book/src`, compiled so that `cargo test --doc` runs
//! every listing. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}
#[doc = include_str!("../../../book/src/sprt.md")]
pub mod sprt {}
#[doc = include_str!("../../../book/src/checking.md")]
pub mod checking {}
#[doc = include_str!("../../../book/src/case-studies.md")]
pub mod case_studies {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
