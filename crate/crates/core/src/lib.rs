//! Hodograph method for the 1-layer Benney and dToda hierarchies.
//!
//! * [`epd`]: series coefficients, the potential `W`, the polynomial `h(λ)`,
//!   derivative towers and characteristic speeds.
//! * [`operator`]: exact Euler-Poisson-Darboux operator identities on
//!   rational functions `p(x, y)/(x - y)^m`.
//! * [`hodograph`]: regular and singular hodograph solves, sector
//!   classification, catastrophe loci.
//! * [`elliptic`]: the complex-conjugate regime `β2 = conj(β1)`.
//! * [`flows`]: finite-difference verification that hodograph solutions
//!   satisfy the hydrodynamic flows.

pub mod elliptic;
pub mod epd;
pub mod error;
pub mod flows;
pub mod hodograph;
pub mod newton;
pub mod operator;
pub mod poly;

pub use epd::{Hierarchy, RiemannPoint, TimeVector};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
