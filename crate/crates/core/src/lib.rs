//! Compactifications of semi-algebraic sets by logarithmic limits.
//!
//! The crate is organised bottom-up:
//!
//! - [`semialg`]: Laurent polynomials, sign-condition sets and a sampler.
//! - [`logmap`]: log maps, amoebas, logarithmic limit directions, tropical
//!   prevarieties and cone clustering.
//! - [`families`]: proper families of positive functions, boundary limits
//!   along paths, injectivity evidence and relabeling by group actions.
//! - [`charvar`]: free-group words, SL(2)/SL(3) representations, traces,
//!   eigenvalues and translation lengths.
//! - [`hilbert`]: Hilbert metric on ellipses and polygons.
//! - [`surface`]: the once-punctured torus: slopes, Dehn twists, Markov
//!   moves, limit length spectra and train-track charts.
//! - [`cli`]: the `logcompact` command line front end.

pub mod charvar;
pub mod cli;
pub mod families;
pub mod hilbert;
pub mod linalg;
pub mod logmap;
pub mod output;
pub mod semialg;
pub mod surface;
