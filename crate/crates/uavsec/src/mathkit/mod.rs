//! Numerical kernels shared by every other module. All functions are pure.

mod hypoexp;
mod lambert;
mod quad;
mod roots;

pub use hypoexp::{hypoexp_cdf, HypoExpRates};
pub use lambert::lambert_w0;
pub use quad::{integrate, integrate_radial, QuadOptions, Quadrature};
pub use roots::{bisect, bisect_root, Bisection};
