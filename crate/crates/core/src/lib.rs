//! Probabilistic quantum associative memory.
//!
//! A memory register holds a uniform superposition of `p` stored patterns
//! of `n` qbits. Each of `b` control qbits goes through a round that
//! amplifies memory states close (in Hamming distance) to the input; reading
//! every control qbit as `|0>` accepts the input, and a subsequent memory
//! readout returns a stored pattern with Boltzmann probability at
//! temperature `1 / b`. This crate provides:
//!
//! * [`patterns`]: packed bit patterns, Hamming distances, pattern files;
//! * [`gatesim`]: exact gate-level simulation of the retrieval circuit;
//! * [`closedform`]: recognition probability, output distribution and
//!   energy levels at any scale;
//! * [`retrieval`]: Monte Carlo runs of the repeat-until-success protocol;
//! * [`thermo`]: free energy, entropy and effective distance of the
//!   averaged memory, temperature sweeps and the order/disorder crossover;
//! * [`tuner`]: the `(b, T)` needed for a target tolerance and efficiency;
//! * [`cli`]: the `qamem` command-line tool.
//!
//! ```
//! use qamem::closedform::retrieval_distribution;
//! use qamem::patterns::{BinaryPattern, MemoryInstance};
//!
//! let mem = MemoryInstance::new(vec!["0000".parse()?, "0011".parse()?])?;
//! let input: BinaryPattern = "0001".parse()?;
//! let stats = retrieval_distribution(&mem, &input, 4)?;
//! // both patterns sit at distance 1, so they tie
//! assert!((stats.per_pattern[0] - 0.5).abs() < 1e-15);
//! # Ok::<(), qamem::Error>(())
//! ```

pub mod cli;
pub mod closedform;
pub mod error;
pub mod gatesim;
pub mod numerics;
pub mod patterns;
pub mod quadrature;
pub mod retrieval;
pub mod thermo;
pub mod tuner;

pub use error::{Error, Result};

// Book chapters are compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/patterns.md")]
    struct Patterns;
    #[doc = include_str!("../../../book/src/circuit.md")]
    struct Circuit;
    #[doc = include_str!("../../../book/src/statistics.md")]
    struct Statistics;
    #[doc = include_str!("../../../book/src/protocol.md")]
    struct Protocol;
    #[doc = include_str!("../../../book/src/thermodynamics.md")]
    struct Thermodynamics;
    #[doc = include_str!("../../../book/src/tuning.md")]
    struct Tuning;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
