//! Exact combinatorics for associahedra `K_r` and 2-associahedra `W_n`.
//!
//! The crate enumerates face posets, checks that the completed posets are
//! Eulerian, and cross-validates face counts against two independent routes:
//! fixed points of generating-function equations ([`series`]) and the
//! concatenation recurrences ([`associahedron::KCounter`],
//! [`two_assoc::WCounter`]).
//!
//! Module map:
//!
//! * [`poset`]: ranked posets, alternating sums, Möbius function, products,
//!   flag vectors and the cd-index.
//! * [`associahedron`]: stable rooted ribbon trees, bracketings and `K_r`.
//! * [`series`]: truncated power series with Laurent coefficients in `t`.
//! * [`two_assoc`]: 2-bracketings and the poset `W_n`.
//! * [`audit`]: one-shot verification reports.
//! * [`cache`]: JSON-lines memo cache used by the command-line front end.

pub mod associahedron;
pub mod audit;
pub mod cache;
pub mod poset;
pub mod series;
pub mod two_assoc;

pub use associahedron::{Bracket, Bracketing, KCounter, KPoset, Tree};
pub use poset::{CdPolynomial, EulerianReport, FlagVector, RankedPoset};
pub use series::{LaurentPoly, TruncatedSeries};
pub use two_assoc::{NVector, TwoBracket, TwoBracketing, WCounter, WPoset};
