//! Eavesdropper error probabilities for Y00-style M-ary phase-modulated
//! coherent-state encodings.
//!
//! * [`numkernel`]: scaled modified Bessel functions and a dense Hermitian
//!   eigenvalue routine.
//! * [`encoding`]: wheel and fan phase alphabets and their structure sums.
//! * [`deltarho`]: the analytic difference operator in the photon-number
//!   difference basis.
//! * [`discrimination`]: spectral error probabilities, the two-state Helstrom
//!   bound and parameter sweeps.
//! * [`fockoracle`]: brute-force construction of the same operator in a
//!   truncated two-mode Fock space.
//! * [`attacksim`]: Monte Carlo heterodyne attacks, joint-bit success and an
//!   exhaustive key search.

pub mod attacksim;
pub mod deltarho;
pub mod discrimination;
pub mod encoding;
pub mod error;
pub mod fockoracle;
pub mod numkernel;

pub use error::{Error, Result};
