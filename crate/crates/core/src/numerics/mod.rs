//! Special functions and quadrature shared by the analytic modules.

mod hyp2f1;
mod quadrature;
mod special;

pub use hyp2f1::{hyp2f1_b1, hyp2f1_b1_series};
pub use quadrature::{integrate, QuadratureSpec};
pub use special::{beta_fn, mu_fn, TAYLOR_THRESHOLD};

pub(crate) use special::{beta_unchecked, mu_unchecked};
