//! Numerical laboratory for the electric field between two nearly touching
//! insulated inclusions.
//!
//! Two insulators with boundaries that separate like `λ|x'|^m` near the point
//! of closest approach confine the harmonic potential to a thin gap of width
//! `ε`. As `ε → 0` the field `|∇u|` blows up like `ε^{(α−1)/m}`, where
//! `α = α(d, m)` is the positive root of a quadratic in the dimension `d` and
//! the convexity order `m`. This crate computes those exponents in closed
//! form, solves the singular radial ODE that drives the lower-bound argument
//! with certified two-sided envelopes, solves the axisymmetric first-mode PDE
//! on the flattened gap, and fits the observed blow-up rate against the
//! theoretical target.
//!
//! The pieces:
//!
//! * [`exponents`] — closed-form exponent algebra `α`, `α_k`, `(α−1)/m`.
//! * [`radial_ode`] — shooting solver for the singular gap ODE plus
//!   sub/supersolution certificates.
//! * [`gap_geometry`] — m-ellipsoid boundary graphs, gap width, and the
//!   strip chart that flattens the gap to a rectangle.
//! * [`gap_solver`] — finite-difference solution of the first spherical-
//!   harmonic mode on the flattened rectangle.
//! * [`rate_harness`] — ε-sweep orchestration, log-log rate fitting, and the
//!   aggregated verification report.
//!
//! Each capability has a runnable demo under `examples/`; the `gaplab`
//! binary exposes the same operations as subcommands.

pub mod exponents;
pub mod gap_geometry;
pub mod gap_solver;
pub mod linsys;
pub mod radial_ode;
pub mod rate_harness;
