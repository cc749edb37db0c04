// mdbook cannot test snippets that depend on a workspace crate, so every
// chapter is pulled into this crate's docs and `cargo test --doc` runs them.
// One module per chapter keeps failures traceable to a file.

#[cfg(doctest)]
#[doc = include_str!("src/kernels.md")]
mod ch01_kernels {}

#[cfg(doctest)]
#[doc = include_str!("src/conditions.md")]
mod ch02_conditions {}

#[cfg(doctest)]
#[doc = include_str!("src/modes.md")]
mod ch03_modes {}

#[cfg(doctest)]
#[doc = include_str!("src/spectra.md")]
mod ch04_spectra {}

#[cfg(doctest)]
#[doc = include_str!("src/witnesses.md")]
mod ch05_witnesses {}

#[cfg(doctest)]
#[doc = include_str!("src/decay.md")]
mod ch06_decay {}

#[cfg(doctest)]
#[doc = include_str!("src/cli.md")]
mod ch07_cli {}
