//! Thin math shims.
//!
//! `exp` always goes through libm so that similarity values are identical
//! across platforms and under `no_std`; std's `exp` may differ in the last
//! ulp between libc implementations. `sqrt` and `abs` are IEEE-exact
//! operations, so the std intrinsics are safe to use when available.

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
pub(crate) fn sqrt(x: f64) -> f64 {
    f64::sqrt(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
pub(crate) fn abs(x: f64) -> f64 {
    f64::abs(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[cfg(feature = "std")]
pub(crate) fn round(x: f64) -> f64 {
    f64::round(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}
