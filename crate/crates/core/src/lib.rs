//! Barnes-Wall lattice codes over `Z[i]`.
//!
//! * [`gint`]: exact Gaussian integers and base-`(1+i)` digits.
//! * [`polyring`]: the ring `F2[u]/u^m` and the Kronecker generator.
//! * [`rmcode`]: Reed-Muller codes and the soft-input decoder.
//! * [`bwlattice`]: bits ↔ lattice codewords, shaping, membership.
//! * [`decoders`]: sequential decoder, noise trimming, ML oracle.
//! * [`analysis`]: cross-over probabilities, theta and sphere bounds.
//! * [`sim`]: channel model, Monte-Carlo sweeps and CSV/JSON output.

pub mod analysis;
pub mod bwlattice;
pub mod decoders;
pub mod gint;
pub mod polyring;
pub mod rmcode;
pub mod sim;
