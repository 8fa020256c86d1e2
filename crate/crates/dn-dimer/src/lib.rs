//! F-polynomials of type `D_n` cluster algebras via three independent routes:
//!
//! * a mixed dimer configuration model on a planar bipartite *base graph*
//!   attached to a type `D` quiver ([`dimer`]),
//! * submodule-style enumeration of e-vectors against the arc module of the
//!   corresponding quiver with potential ([`evector`], [`jacobian`]),
//! * brute-force seed mutation with principal coefficients ([`oracle`]).
//!
//! The three computations are structurally unrelated, which makes agreement a
//! strong correctness check; the command line tool (`dn-dimer compare`) runs
//! them side by side.
//!
//! Supporting modules: [`quiver`] (mutation, framing, and recognition of the
//! mutation class of `D_n`), [`surface`] (ideal triangulations of the
//! once-punctured polygon, tagged arcs, and the catalog of crossing vectors).

pub mod dimer;
pub mod evector;
pub mod jacobian;
pub mod oracle;
pub mod poly;
pub mod quiver;
pub mod surface;
