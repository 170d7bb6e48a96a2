//! The singular radial gap ODE and its certified envelopes.
//!
//! The k-th spherical-harmonic mode of the gap-averaged potential solves
//!
//! ```text
//! L_k g = g'' + ( (d−2)/r + mλr^{m−1}/(ε + λr^m) ) g' − k(k+d−3)/r² g = 0
//! ```
//!
//! on (0, 1). The origin is a regular singular point; the bounded indicial
//! branch behaves like `r^{c₊}` with `c₊` the positive root of
//! `c² + (d−3)c − k(k+d−3) = 0` (for k = 1 that root is exactly 1). The
//! solver shoots from deep inside the asymptotic regime in the variable
//! `t = ln r`, where the equation becomes the non-stiff linear system
//!
//! ```text
//! dg/dt = G,      dG/dt = (3 − d − q(r)) G + k(k+d−3) g,
//! q(r)  = mλr^m / (ε + λr^m) ∈ (0, m),
//! ```
//!
//! and normalizes to g(1) = 1 afterwards. The first mode is pinched between
//! the explicit envelopes `min{r, λ^{(β−α)/m} r^β (ε+λr^m)^{(α−β)/m}}` from
//! below and `r^α` (plus a linear cap `C₀(ε)·r` near the origin) from above;
//! [`certify_bounds`] checks all of them node by node and
//! [`subsolution_certificate`] / [`supersolution_certificate`] verify the
//! one-signed operator residuals that make those envelopes work.

use crate::exponents::{self, ExponentParams};
use serde::Serialize;
use thiserror::Error;

/// Relative slack applied to the strict analytic inequalities; absorbs
/// discretization and normalization roundoff.
pub const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("integrator failed: {0}")]
    IntegratorFailed(String),
    #[error(
        "solution depends on the shooting start radius (max relative difference {0:.3e}); \
         refine the grid or loosen the start radius"
    )]
    ShootingInconsistent(f64),
    #[error("ODE residual {residual:.3e} exceeds tolerance {tol:.3e} at r = {r:.6e}")]
    ResidualTooLarge { residual: f64, tol: f64, r: f64 },
    #[error("problem/solution mismatch: {0}")]
    Mismatch(String),
    #[error(
        "supersolution denominator 1 − a0·r0^(b0−1) = {denominator:.3e} is not positive \
         (r0 = {r0:.3e} too large for the chosen a0, b0)"
    )]
    SupersolutionUnavailable { r0: f64, denominator: f64 },
    #[error(transparent)]
    Exponent(#[from] exponents::ExponentError),
}

/// Parameter set for the operator `L_k` on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOdeProblem {
    pub epsilon: f64,
    pub d: u32,
    pub m: f64,
    /// Gap-profile coefficient λ > 0 in the drift term.
    pub lambda: f64,
    /// Spherical-harmonic mode index (k = 1 carries the boundary data x₁).
    pub k: u32,
}

impl GapOdeProblem {
    /// First-mode problem (k = 1).
    pub fn new(epsilon: f64, d: u32, m: f64, lambda: f64) -> Result<Self, OdeError> {
        Self::with_mode(epsilon, d, m, lambda, 1)
    }

    pub fn with_mode(epsilon: f64, d: u32, m: f64, lambda: f64, k: u32) -> Result<Self, OdeError> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(OdeError::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(OdeError::InvalidParameter(format!("lambda = {lambda}")));
        }
        ExponentParams::with_mode(d, m, k)?;
        Ok(Self {
            epsilon,
            d,
            m,
            lambda,
            k,
        })
    }

    /// Drift fraction q(r) = mλr^m/(ε + λr^m) ∈ (0, m).
    pub fn drift_fraction(&self, r: f64) -> f64 {
        let w = self.lambda * r.powf(self.m);
        self.m * w / (self.epsilon + w)
    }

    /// k(k + d − 3), the spherical-harmonic eigenvalue.
    pub fn mode_constant(&self) -> f64 {
        let k = self.k as f64;
        k * (k + self.d as f64 - 3.0)
    }

    /// Radius (ε/λ)^{1/m} where gap width and profile balance.
    pub fn transition_radius(&self) -> f64 {
        (self.epsilon / self.lambda).powf(1.0 / self.m)
    }

    /// Bounded indicial exponent at the origin: positive root of
    /// c² + (d−3)c − k(k+d−3) = 0. Equals 1 for k = 1.
    pub fn indicial_root(&self) -> f64 {
        let b = self.d as f64 - 3.0;
        let q = self.mode_constant();
        2.0 * q / (b + (b * b + 4.0 * q).sqrt())
    }

    /// ε → 0 decay exponent α_k.
    pub fn limit_root(&self) -> Result<f64, OdeError> {
        Ok(exponents::alpha_k(ExponentParams::with_mode(
            self.d, self.m, self.k,
        )?))
    }

    /// L_k applied to the monomial r^c, via the exact identity
    /// `L_k r^c = r^{c−2} [c² + (d−3+q(r)) c − k(k+d−3)]`.
    pub fn apply_to_monomial(&self, c: f64, r: f64) -> Result<f64, OdeError> {
        if !(r > 0.0) {
            return Err(OdeError::InvalidParameter(format!(
                "monomial evaluation at r = {r}"
            )));
        }
        let bracket =
            c * c + (self.d as f64 - 3.0 + self.drift_fraction(r)) * c - self.mode_constant();
        Ok(r.powf(c - 2.0) * bracket)
    }
}

/// Output-grid request for [`solve_g`]: log-spaced nodes ending at r = 1.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Smallest output radius; `None` picks min(1e−6, (ε/λ)^{1/m}/100).
    pub r_min: Option<f64>,
    /// Log-grid density. The regular singular point and the transition
    /// radius both need at least 8 nodes per decade.
    pub nodes_per_decade: usize,
    /// Cap on the scaled 4th-order finite-difference residual of the
    /// returned values.
    pub residual_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: None,
            nodes_per_decade: 32,
            residual_tol: 1e-3,
        }
    }
}

/// Solved radial profile on a log grid, normalized so g(1) = boundary_value.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub problem: GapOdeProblem,
    /// Strictly increasing radii in (0, 1].
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
    /// g at r = 1 (1 unless rescaled).
    pub boundary_value: f64,
    /// Max relative change when the shooting start radius is divided by 10.
    pub shooting_consistency: f64,
    /// Sup of the scaled 4th-order check-stencil residual over interior nodes.
    pub residual_sup: f64,
}

impl RadialSolution {
    /// Linear rescaling to a different boundary value.
    pub fn rescaled(&self, boundary_value: f64) -> Self {
        let s = boundary_value / self.boundary_value;
        Self {
            problem: self.problem,
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            derivative: self.derivative.iter().map(|v| v * s).collect(),
            boundary_value,
            shooting_consistency: self.shooting_consistency,
            residual_sup: self.residual_sup,
        }
    }

    /// Log-linear interpolation of g at radius r within the grid range.
    pub fn interpolate(&self, r: f64) -> f64 {
        let grid = &self.grid;
        if r <= grid[0] {
            return self.values[0] * (r / grid[0]).powf(self.problem.indicial_root());
        }
        if r >= *grid.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let idx = grid.partition_point(|&x| x < r).max(1);
        let (r0, r1) = (grid[idx - 1], grid[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        let w = (r.ln() - r0.ln()) / (r1.ln() - r0.ln());
        v0 + w * (v1 - v0)
    }
}

/// Dormand–Prince 5(4) step for the log-radius system y = (g, G).
fn dopri_step(
    prob: &GapOdeProblem,
    t: f64,
    y: [f64; 2],
    h: f64,
) -> ([f64; 2], f64) {
    let f = |t: f64, y: [f64; 2]| -> [f64; 2] {
        let r = t.exp();
        let q = prob.drift_fraction(r);
        [
            y[1],
            (3.0 - prob.d as f64 - q) * y[1] + prob.mode_constant() * y[0],
        ]
    };
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let k1 = f(t, y);
    let add = |y: [f64; 2], terms: &[(f64, [f64; 2])]| -> [f64; 2] {
        let mut out = y;
        for &(c, k) in terms {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
        out
    };
    let k2 = f(t + h / 5.0, add(y, &[(A21, k1)]));
    let k3 = f(t + 3.0 * h / 10.0, add(y, &[(A31, k1), (A32, k2)]));
    let k4 = f(t + 4.0 * h / 5.0, add(y, &[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = f(
        t + 8.0 * h / 9.0,
        add(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
    );
    let k6 = f(
        t + h,
        add(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
    );
    let y5 = add(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = f(t + h, y5);

    let err = {
        let e0 = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]);
        let e1 = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]);
        let s0 = y[0].abs().max(y5[0].abs()).max(1e-300);
        let s1 = y[1].abs().max(y5[1].abs()).max(1e-300);
        ((e0 / s0).abs()).max((e1 / s1).abs())
    };
    (y5, err)
}

/// Integrate the log-radius system from t0 to t1 with adaptive steps.
fn integrate_to(
    prob: &GapOdeProblem,
    mut t: f64,
    mut y: [f64; 2],
    t1: f64,
    rtol: f64,
) -> Result<[f64; 2], OdeError> {
    let mut h = (t1 - t).min(0.1).max(1e-8);
    let mut steps = 0usize;
    while t < t1 {
        if steps > 2_000_000 {
            return Err(OdeError::IntegratorFailed(format!(
                "step cap exceeded at t = {t}"
            )));
        }
        steps += 1;
        h = h.min(t1 - t);
        let (y_new, err) = dopri_step(prob, t, y, h);
        if err <= rtol || h <= 1e-13 {
            t += h;
            y = y_new;
            let factor = if err > 0.0 {
                (0.9 * (rtol / err).powf(0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h * factor).min(0.25);
        } else {
            h *= (0.9 * (rtol / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(y)
}

fn log_grid(r_min: f64, nodes_per_decade: usize) -> Vec<f64> {
    let decades = -r_min.log10();
    let n = (decades * nodes_per_decade as f64).ceil() as usize;
    let t_min = r_min.ln();
    let mut grid: Vec<f64> = (0..=n)
        .map(|i| (t_min * (1.0 - i as f64 / n as f64)).exp())
        .collect();
    grid[0] = r_min;
    *grid.last_mut().unwrap() = 1.0;
    grid
}

/// March the shooting solution across `grid`, starting from the bounded
/// indicial branch at `r_start`, and return raw (g, g') per node.
fn shoot(
    prob: &GapOdeProblem,
    grid: &[f64],
    r_start: f64,
) -> Result<(Vec<f64>, Vec<f64>), OdeError> {
    let c_plus = prob.indicial_root();
    let mut t = r_start.ln();
    // Scale-free start on the bounded branch: g = 1, dg/dt = c₊.
    let mut y = [1.0, c_plus];
    let rtol = 1e-11;
    let mut values = Vec::with_capacity(grid.len());
    let mut derivs = Vec::with_capacity(grid.len());
    for &r in grid {
        let t_node = r.ln();
        if t_node > t {
            y = integrate_to(prob, t, y, t_node, rtol)?;
            t = t_node;
        }
        values.push(y[0]);
        derivs.push(y[1] / r); // g' = (dg/dt)/r
    }
    Ok((values, derivs))
}

/// 4th-order check-stencil residual of the log-radius equation
/// g_tt − (3−d−q) g_t − k(k+d−3) g on interior nodes, scaled by the local
/// solution magnitude. Uses only the stored values.
fn check_residual(prob: &GapOdeProblem, grid: &[f64], values: &[f64]) -> f64 {
    let n = grid.len();
    if n < 5 {
        return f64::INFINITY;
    }
    let h = (grid[1].ln() - grid[0].ln()).abs();
    let mut sup: f64 = 0.0;
    for i in 2..n - 2 {
        let (gm2, gm1, g0, gp1, gp2) = (
            values[i - 2],
            values[i - 1],
            values[i],
            values[i + 1],
            values[i + 2],
        );
        let gt = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h);
        let gtt = (-gp2 + 16.0 * gp1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * h * h);
        let r = grid[i];
        let q = prob.drift_fraction(r);
        let res = gtt - (3.0 - prob.d as f64 - q) * gt - prob.mode_constant() * g0;
        let scale = gtt.abs().max(gt.abs()).max(g0.abs()).max(1e-300);
        sup = sup.max(res.abs() / scale);
    }
    sup
}

/// Solve L_k g = 0 on (0, 1), bounded at the origin, normalized to g(1) = 1.
pub fn solve_g(prob: &GapOdeProblem, spec: &GridSpec) -> Result<RadialSolution, OdeError> {
    if spec.nodes_per_decade < 8 {
        return Err(OdeError::GridTooCoarse(format!(
            "{} nodes per decade; the transition radius needs at least 8",
            spec.nodes_per_decade
        )));
    }
    let trans = prob.transition_radius();
    let r_min = match spec.r_min {
        Some(r) => {
            if !(r > 0.0 && r < 1.0) {
                return Err(OdeError::InvalidParameter(format!("grid r_min = {r}")));
            }
            r
        }
        None => (trans / 100.0).min(1e-6),
    };
    if trans < 1.0 && r_min > trans / 10.0 {
        return Err(OdeError::GridTooCoarse(format!(
            "grid starts at {r_min:.3e} but the transition radius is {trans:.3e}; \
             the grid must reach a decade below it"
        )));
    }
    let grid = log_grid(r_min, spec.nodes_per_decade);

    // Shoot from far below the output grid so the start-branch error decays
    // before the first recorded node, then repeat a decade lower to measure
    // sensitivity to the start radius.
    let r_start = (r_min.min(trans / 100.0)) / 100.0;
    let (raw, raw_d) = shoot(prob, &grid, r_start)?;
    let (raw2, _) = shoot(prob, &grid, r_start / 10.0)?;

    let g1 = *raw.last().unwrap();
    let g1b = *raw2.last().unwrap();
    let mut consistency: f64 = 0.0;
    for i in 0..grid.len() {
        let a = raw[i] / g1;
        let b = raw2[i] / g1b;
        consistency = consistency.max((a - b).abs() / a.abs().max(1e-300));
    }
    if consistency > 1e-7 {
        return Err(OdeError::ShootingInconsistent(consistency));
    }

    let values: Vec<f64> = raw.iter().map(|v| v / g1).collect();
    let derivative: Vec<f64> = raw_d.iter().map(|v| v / g1).collect();

    for i in 1..values.len() {
        if !(values[i] > values[i - 1]) || !(values[i - 1] > 0.0) {
            return Err(OdeError::IntegratorFailed(format!(
                "solution not strictly increasing and positive near r = {:.3e}",
                grid[i]
            )));
        }
    }

    let residual_sup = check_residual(prob, &grid, &values);
    if residual_sup > spec.residual_tol {
        let worst_r = grid[grid.len() / 2];
        return Err(OdeError::ResidualTooLarge {
            residual: residual_sup,
            tol: spec.residual_tol,
            r: worst_r,
        });
    }

    Ok(RadialSolution {
        problem: *prob,
        grid,
        values,
        derivative,
        boundary_value: 1.0,
        shooting_consistency: consistency,
        residual_sup,
    })
}

/// A radial function with optional closed-form derivatives; when absent,
/// [`apply_l`] falls back to 4th-order finite differences.
pub trait RadialFn {
    fn eval(&self, r: f64) -> f64;
    fn d1(&self, _r: f64) -> Option<f64> {
        None
    }
    fn d2(&self, _r: f64) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64> RadialFn for F {
    fn eval(&self, r: f64) -> f64 {
        self(r)
    }
}

/// r^c with exact derivatives.
pub struct Monomial(pub f64);

impl RadialFn for Monomial {
    fn eval(&self, r: f64) -> f64 {
        r.powf(self.0)
    }
    fn d1(&self, r: f64) -> Option<f64> {
        Some(self.0 * r.powf(self.0 - 1.0))
    }
    fn d2(&self, r: f64) -> Option<f64> {
        Some(self.0 * (self.0 - 1.0) * r.powf(self.0 - 2.0))
    }
}

/// Lower envelope λ^{(β−α)/m} r^β (ε + λr^m)^{(α−β)/m}.
pub struct LowerEnvelope {
    pub epsilon: f64,
    pub m: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LowerEnvelope {
    // ln env = const + β ln r + ((α−β)/m) ln(ε + λr^m)
    fn log_d1(&self, r: f64) -> f64 {
        let w = self.lambda * r.powf(self.m);
        self.beta / r + (self.alpha - self.beta) * w / (r * (self.epsilon + w))
    }

    fn log_d2(&self, r: f64) -> f64 {
        let w = self.lambda * r.powf(self.m);
        let u = w / (self.epsilon + w);
        // d/dr [ u/r ] = (1/r²)·u·((m−1) − m·u)
        -self.beta / (r * r)
            + (self.alpha - self.beta) / (r * r) * u * ((self.m - 1.0) - self.m * u)
    }
}

impl RadialFn for LowerEnvelope {
    fn eval(&self, r: f64) -> f64 {
        let w = self.lambda * r.powf(self.m);
        self.lambda.powf((self.beta - self.alpha) / self.m)
            * r.powf(self.beta)
            * (self.epsilon + w).powf((self.alpha - self.beta) / self.m)
    }
    fn d1(&self, r: f64) -> Option<f64> {
        Some(self.eval(r) * self.log_d1(r))
    }
    fn d2(&self, r: f64) -> Option<f64> {
        let ld1 = self.log_d1(r);
        Some(self.eval(r) * (ld1 * ld1 + self.log_d2(r)))
    }
}

/// Supersolution C₀ (r − a₀ r^{b₀}), valid on (0, r₀(ε)).
pub struct LinearCap {
    pub c0: f64,
    pub a0: f64,
    pub b0: f64,
}

impl RadialFn for LinearCap {
    fn eval(&self, r: f64) -> f64 {
        self.c0 * (r - self.a0 * r.powf(self.b0))
    }
    fn d1(&self, r: f64) -> Option<f64> {
        Some(self.c0 * (1.0 - self.a0 * self.b0 * r.powf(self.b0 - 1.0)))
    }
    fn d2(&self, r: f64) -> Option<f64> {
        Some(-self.c0 * self.a0 * self.b0 * (self.b0 - 1.0) * r.powf(self.b0 - 2.0))
    }
}

/// Apply L_k to `f` at radius r, using exact derivatives when supplied and a
/// 4th-order central stencil with h = 10⁻³·r otherwise.
pub fn apply_l(prob: &GapOdeProblem, f: &dyn RadialFn, r: f64) -> Result<f64, OdeError> {
    if !(r > 0.0) {
        return Err(OdeError::InvalidParameter(format!(
            "operator evaluation at r = {r}"
        )));
    }
    let (d1, d2) = match (f.d1(r), f.d2(r)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let h = 1e-3 * r;
            let fm2 = f.eval(r - 2.0 * h);
            let fm1 = f.eval(r - h);
            let f0 = f.eval(r);
            let fp1 = f.eval(r + h);
            let fp2 = f.eval(r + 2.0 * h);
            let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
            let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
            (d1, d2)
        }
    };
    let coeff = (prob.d as f64 - 2.0) / r + prob.drift_fraction(r) / r;
    Ok(d2 + coeff * d1 - prob.mode_constant() / (r * r) * f.eval(r))
}

/// Explicit constants of the linear-cap supersolution:
/// r₀ = (a₀(b₀−1)(d+b₀−2) / (mλ(1+a₀b₀)) · ε)^{1/(m+1−b₀)} and
/// C₀ = r₀^{α−1} / (1 − a₀ r₀^{b₀−1}).
pub fn r0_c0(
    epsilon: f64,
    d: u32,
    m: f64,
    lambda: f64,
    a0: f64,
    b0: f64,
) -> Result<(f64, f64), OdeError> {
    if !(epsilon > 0.0) || !(lambda > 0.0) {
        return Err(OdeError::InvalidParameter(format!(
            "epsilon = {epsilon}, lambda = {lambda}"
        )));
    }
    if !(a0 > 0.0) {
        return Err(OdeError::InvalidParameter(format!("a0 = {a0} must be > 0")));
    }
    if !(b0 > 1.0 && b0 < m + 1.0) {
        return Err(OdeError::InvalidParameter(format!(
            "b0 = {b0} must lie strictly between 1 and m+1 = {}",
            m + 1.0
        )));
    }
    let alpha = exponents::alpha(ExponentParams::new(d, m)?)?;
    let num = a0 * (b0 - 1.0) * (d as f64 + b0 - 2.0);
    let den = m * lambda * (1.0 + a0 * b0);
    let r0 = (num / den * epsilon).powf(1.0 / (m + 1.0 - b0));
    let cap_den = 1.0 - a0 * r0.powf(b0 - 1.0);
    if cap_den <= 0.0 {
        return Err(OdeError::SupersolutionUnavailable {
            r0,
            denominator: cap_den,
        });
    }
    Ok((r0, r0.powf(alpha - 1.0) / cap_den))
}

/// Subsolution polynomial
/// p(t) = (β−α)²t² + ((α−β)(d+m+2β−3) + mβ) t + (d−2+β)(β−1), t ∈ [0,1];
/// L applied to the lower envelope equals envelope·r⁻²·p(λr^m/(ε+λr^m)).
pub fn p_poly(beta: f64, d: u32, m: f64, t: f64) -> f64 {
    let alpha = exponents::alpha(ExponentParams::new(d, m).expect("valid (d, m)"))
        .expect("first mode");
    let df = d as f64;
    (beta - alpha) * (beta - alpha) * t * t
        + ((alpha - beta) * (df + m + 2.0 * beta - 3.0) + m * beta) * t
        + (df - 2.0 + beta) * (beta - 1.0)
}

/// Smallest β for which p is non-increasing on [0, 1] (hence p ≥ p(1) = 0):
/// β* = (2α² + α(d+m−3)) / (2α + d − 3).
pub fn p_threshold(d: u32, m: f64) -> Result<f64, OdeError> {
    let alpha = exponents::alpha(ExponentParams::new(d, m)?)?;
    Ok((2.0 * alpha * alpha + alpha * (d as f64 + m - 3.0)) / (2.0 * alpha + d as f64 - 3.0))
}

/// True when p'(t) ≤ 0 across [0, 1], the condition that makes the lower
/// envelope a subsolution. Holds exactly when β ≥ β*.
pub fn p_monotone_nonincreasing(beta: f64, d: u32, m: f64) -> bool {
    let alpha = exponents::alpha(ExponentParams::new(d, m).expect("valid (d, m)"))
        .expect("first mode");
    // p' is affine increasing in t, so its max over [0,1] is p'(1), which
    // collapses to −(2α+d−3)β + 2α² + α(d+m−3).
    -(2.0 * alpha + d as f64 - 3.0) * beta + 2.0 * alpha * alpha + alpha * (d as f64 + m - 3.0)
        <= 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    Subsolution,
    Supersolution,
}

/// One-signed operator residual check on a sample grid.
#[derive(Debug, Clone, Serialize)]
pub struct SubSuperCertificate {
    pub kind: CertificateKind,
    pub beta: Option<f64>,
    pub a0: Option<f64>,
    pub b0: Option<f64>,
    pub nodes_checked: usize,
    pub residual_sign_violations: usize,
    pub max_violation: f64,
}

impl SubSuperCertificate {
    pub fn is_valid(&self) -> bool {
        self.residual_sign_violations == 0
    }
}

/// Verify L(envelope) ≥ 0 on (0, 1) via the exact identity
/// L(envelope) = envelope·r⁻²·p(t), i.e. check p(t) ≥ 0 on the drift range.
pub fn subsolution_certificate(
    prob: &GapOdeProblem,
    beta: f64,
    nodes: usize,
) -> Result<SubSuperCertificate, OdeError> {
    if prob.k != 1 {
        return Err(OdeError::InvalidParameter(
            "envelope certificates are first-mode statements".into(),
        ));
    }
    let mut violations = 0usize;
    let mut max_violation: f64 = 0.0;
    for i in 0..nodes {
        let t = (i as f64 + 0.5) / nodes as f64;
        let p = p_poly(beta, prob.d, prob.m, t);
        if p < -1e-12 {
            violations += 1;
            max_violation = max_violation.max(-p);
        }
    }
    Ok(SubSuperCertificate {
        kind: CertificateKind::Subsolution,
        beta: Some(beta),
        a0: None,
        b0: None,
        nodes_checked: nodes,
        residual_sign_violations: violations,
        max_violation,
    })
}

/// Verify L(C₀(r − a₀r^{b₀})) ≤ 0 on (0, r₀(ε)) from the closed form of the
/// residual.
pub fn supersolution_certificate(
    prob: &GapOdeProblem,
    a0: f64,
    b0: f64,
    nodes: usize,
) -> Result<SubSuperCertificate, OdeError> {
    if prob.k != 1 {
        return Err(OdeError::InvalidParameter(
            "envelope certificates are first-mode statements".into(),
        ));
    }
    let (r0, c0) = r0_c0(prob.epsilon, prob.d, prob.m, prob.lambda, a0, b0)?;
    let cap = LinearCap { c0, a0, b0 };
    let mut violations = 0usize;
    let mut max_violation: f64 = 0.0;
    for i in 0..nodes {
        // Log-spaced samples of (0, r0), weighted toward the origin.
        let r = r0 * (1e-6_f64).powf(1.0 - (i as f64 + 0.5) / nodes as f64);
        let lv = apply_l(prob, &cap, r)?;
        let scale = c0 * r.powf(b0 - 2.0).max(1.0 / r);
        if lv > 1e-10 * scale.max(1.0) {
            violations += 1;
            max_violation = max_violation.max(lv / scale.max(1.0));
        }
    }
    Ok(SubSuperCertificate {
        kind: CertificateKind::Supersolution,
        beta: None,
        a0: Some(a0),
        b0: Some(b0),
        nodes_checked: nodes,
        residual_sign_violations: violations,
        max_violation,
    })
}

/// Node-by-node comparison statistics for one bound.
#[derive(Debug, Clone, Serialize)]
pub struct CheckStats {
    pub nodes_checked: usize,
    pub violations: usize,
    /// Largest relative breach of the inequality, 0 when clean.
    pub max_violation: f64,
}

impl CheckStats {
    fn record(&mut self, breach: f64) {
        if breach > 0.0 {
            self.violations += 1;
            self.max_violation = self.max_violation.max(breach);
        }
        self.nodes_checked += 1;
    }

    fn new() -> Self {
        Self {
            nodes_checked: 0,
            violations: 0,
            max_violation: 0.0,
        }
    }
}

/// Envelope certificate for a solved first-mode profile.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsCertificate {
    /// r ≤ g(1+tol) on the grid.
    pub lower_linear: CheckStats,
    /// min{r, λ^{(β−α)/m} r^β (ε+λr^m)^{(α−β)/m}} ≤ g(1+tol).
    pub lower_envelope: CheckStats,
    /// g ≤ r^α (1+tol).
    pub upper_power: CheckStats,
    /// g ≤ C₀(ε) r (1+tol) on (0, r₀(ε)); empty when the linear cap does not
    /// exist for the requested (a₀, b₀) because ε is too large.
    pub upper_linear_cap: CheckStats,
    pub beta: f64,
    pub r0: Option<f64>,
    pub c0: Option<f64>,
    pub tolerance: f64,
}

impl BoundsCertificate {
    pub fn is_valid(&self) -> bool {
        self.lower_linear.violations == 0
            && self.lower_envelope.violations == 0
            && self.upper_power.violations == 0
            && self.upper_linear_cap.violations == 0
    }
}

/// Check the two-sided envelopes of the solved profile at every grid node.
pub fn certify_bounds(
    prob: &GapOdeProblem,
    sol: &RadialSolution,
    beta: f64,
    a0: f64,
    b0: f64,
) -> Result<BoundsCertificate, OdeError> {
    if sol.problem != *prob {
        return Err(OdeError::Mismatch(format!(
            "solution was produced for {:?}, certificate requested for {:?}",
            sol.problem, prob
        )));
    }
    if prob.k != 1 {
        return Err(OdeError::InvalidParameter(
            "bounds hold for the first mode".into(),
        ));
    }
    let threshold = p_threshold(prob.d, prob.m)?;
    if beta < threshold - 1e-12 {
        return Err(OdeError::InvalidParameter(format!(
            "beta = {beta} below the subsolution threshold {threshold}"
        )));
    }
    let alpha = exponents::alpha(ExponentParams::new(prob.d, prob.m)?)?;
    let cap = match r0_c0(prob.epsilon, prob.d, prob.m, prob.lambda, a0, b0) {
        Ok(pair) => Some(pair),
        Err(OdeError::SupersolutionUnavailable { .. }) => None,
        Err(e) => return Err(e),
    };
    let envelope = LowerEnvelope {
        epsilon: prob.epsilon,
        m: prob.m,
        lambda: prob.lambda,
        alpha,
        beta,
    };

    let tol = BOUND_TOL;
    let mut lower_linear = CheckStats::new();
    let mut lower_env = CheckStats::new();
    let mut upper_power = CheckStats::new();
    let mut upper_cap = CheckStats::new();
    let scale = 1.0 / sol.boundary_value;
    for (i, &r) in sol.grid.iter().enumerate() {
        let g = sol.values[i] * scale;
        lower_linear.record(r / g - 1.0 - tol);
        lower_env.record(envelope.eval(r).min(r) / g - 1.0 - tol);
        upper_power.record(g / r.powf(alpha) - 1.0 - tol);
        if let Some((r0, c0)) = cap {
            if r < r0 {
                upper_cap.record(g / (c0 * r) - 1.0 - tol);
            }
        }
    }
    Ok(BoundsCertificate {
        lower_linear,
        lower_envelope: lower_env,
        upper_power,
        upper_linear_cap: upper_cap,
        beta,
        r0: cap.map(|(r0, _)| r0),
        c0: cap.map(|(_, c0)| c0),
        tolerance: tol,
    })
}

/// Mode-decay report: sup over the grid of V(r)/r^{α_k} for the solved mode.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub k: u32,
    pub alpha_k: f64,
    pub sup_ratio: f64,
    pub at_radius: f64,
}

/// Solve L_k V = 0 with V(1) = 1 and compare against the decay bound
/// |V(r)| ≤ r^{α_k}.
pub fn mode_decay(prob: &GapOdeProblem, spec: &GridSpec) -> Result<DecayReport, OdeError> {
    let sol = solve_g(prob, spec)?;
    let ak = prob.limit_root()?;
    let mut sup = f64::MIN;
    let mut at = sol.grid[0];
    for (i, &r) in sol.grid.iter().enumerate() {
        let ratio = sol.values[i] / r.powf(ak);
        if ratio > sup {
            sup = ratio;
            at = r;
        }
    }
    Ok(DecayReport {
        k: prob.k,
        alpha_k: ak,
        sup_ratio: sup,
        at_radius: at,
    })
}

/// The Wronskian-type integral I(r) = g(r)·∫_r^1 ds / (g² s^{d−2} (ε+λs^m)),
/// whose divergence as r → 0 forces uniqueness of the bounded solution.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessDiagnostic {
    pub radii: Vec<f64>,
    pub integral: Vec<f64>,
    /// I at the smallest grid radius.
    pub at_min: f64,
}

pub fn uniqueness_diagnostic(
    prob: &GapOdeProblem,
    sol: &RadialSolution,
) -> Result<UniquenessDiagnostic, OdeError> {
    if sol.problem != *prob {
        return Err(OdeError::Mismatch(
            "solution does not belong to this problem".into(),
        ));
    }
    let n = sol.grid.len();
    let scale = 1.0 / sol.boundary_value;
    // 1/G with G = g² r^{d−2} (ε + λ r^m), integrated in t = ln r
    // (ds = s dt keeps the integrand tame near the origin).
    let integrand: Vec<f64> = (0..n)
        .map(|i| {
            let r = sol.grid[i];
            let g = sol.values[i] * scale;
            let w = prob.epsilon + prob.lambda * r.powf(prob.m);
            r / (g * g * r.powf(prob.d as f64 - 2.0) * w)
        })
        .collect();
    let mut cumulative = vec![0.0_f64; n];
    for i in (0..n - 1).rev() {
        let dt = sol.grid[i + 1].ln() - sol.grid[i].ln();
        cumulative[i] = cumulative[i + 1] + 0.5 * dt * (integrand[i] + integrand[i + 1]);
    }
    let integral: Vec<f64> = (0..n)
        .map(|i| sol.values[i] * scale * cumulative[i])
        .collect();
    Ok(UniquenessDiagnostic {
        radii: sol.grid.clone(),
        at_min: integral[0],
        integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn prob(eps: f64, d: u32, m: f64, lambda: f64) -> GapOdeProblem {
        GapOdeProblem::new(eps, d, m, lambda).unwrap()
    }

    #[test]
    fn boundary_condition_imposed() {
        let sol = solve_g(&prob(1e-3, 3, 2.0, 1.0), &GridSpec::default()).unwrap();
        assert_eq!(*sol.grid.last().unwrap(), 1.0);
        assert!((sol.values.last().unwrap() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn small_epsilon_limit_is_power_alpha() {
        // ε → 0 turns the ODE into an Euler equation; the bounded solution
        // with g(1) = 1 is exactly r^α.
        let sol = solve_g(&prob(1e-12, 3, 2.0, 1.0), &GridSpec::default()).unwrap();
        let alpha = SQRT2 - 1.0;
        let mut sup: f64 = 0.0;
        for (i, &r) in sol.grid.iter().enumerate() {
            if r >= 0.1 {
                sup = sup.max((sol.values[i] - r.powf(alpha)).abs());
            }
        }
        assert!(sup <= 1e-3, "sup deviation from r^alpha = {sup:.3e}");
    }

    #[test]
    fn large_epsilon_limit_is_linear() {
        let sol = solve_g(&prob(1e8, 3, 2.0, 1.0), &GridSpec::default()).unwrap();
        let mut sup: f64 = 0.0;
        for (i, &r) in sol.grid.iter().enumerate() {
            if r >= 0.01 {
                sup = sup.max((sol.values[i] - r).abs());
            }
        }
        assert!(sup <= 1e-3, "sup deviation from r = {sup:.3e}");
    }

    #[test]
    fn solution_between_r_and_r_alpha() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let alpha = SQRT2 - 1.0;
        for (i, &r) in sol.grid.iter().enumerate() {
            if r < 1.0 {
                assert!(sol.values[i] >= r * (1.0 - 1e-9), "g < r at {r}");
                assert!(
                    sol.values[i] <= r.powf(alpha) * (1.0 + 1e-9),
                    "g > r^alpha at {r}"
                );
            }
        }
    }

    #[test]
    fn linearity_of_rescaling() {
        let sol = solve_g(&prob(1e-2, 4, 3.0, 0.5), &GridSpec::default()).unwrap();
        let scaled = sol.rescaled(2.5);
        for i in 0..sol.grid.len() {
            let rel = (scaled.values[i] - 2.5 * sol.values[i]).abs()
                / (2.5 * sol.values[i]).abs();
            assert!(rel <= 1e-15);
        }
        assert!((scaled.boundary_value - 2.5).abs() <= 1e-15);
    }

    #[test]
    fn apply_l_to_r_is_positive_drift() {
        // L r = r^{−1} q(r) > 0 on (0,1).
        let p = prob(1e-3, 3, 2.0, 1.0);
        for &r in &[1e-4, 1e-2, 0.3, 0.9] {
            let exact = p.drift_fraction(r) / r;
            let via_identity = p.apply_to_monomial(1.0, r).unwrap();
            let via_trait = apply_l(&p, &Monomial(1.0), r).unwrap();
            assert!(via_identity > 0.0);
            // The bracket form cancels 1 − 1 + q, so expect a few ulps of q.
            assert!((via_identity - exact).abs() <= 1e-9 * exact.abs());
            assert!((via_trait - exact).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn apply_l_to_power_alpha_k_is_nonpositive() {
        for k in 1..=3u32 {
            let p = GapOdeProblem::with_mode(1e-3, 3, 2.0, 1.0, k).unwrap();
            let ak = p.limit_root().unwrap();
            for &r in &[1e-3, 0.05, 0.5, 0.99] {
                let lv = p.apply_to_monomial(ak, r).unwrap();
                assert!(lv <= 1e-12, "L r^alpha_k = {lv} > 0 at r = {r}, k = {k}");
            }
        }
    }

    #[test]
    fn apply_l_to_solved_profile_vanishes() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        assert!(sol.residual_sup <= 1e-3, "residual {:.3e}", sol.residual_sup);
    }

    #[test]
    fn finite_difference_matches_exact_derivatives_on_envelope() {
        let env = LowerEnvelope {
            epsilon: 1e-3,
            m: 2.0,
            lambda: 1.0,
            alpha: SQRT2 - 1.0,
            beta: SQRT2,
        };
        let p = prob(1e-3, 3, 2.0, 1.0);
        struct NoDerivs<'a>(&'a LowerEnvelope);
        impl RadialFn for NoDerivs<'_> {
            fn eval(&self, r: f64) -> f64 {
                self.0.eval(r)
            }
        }
        for &r in &[0.02, 0.1, 0.5] {
            let exact = apply_l(&p, &env, r).unwrap();
            let fd = apply_l(&p, &NoDerivs(&env), r).unwrap();
            assert!(
                (exact - fd).abs() <= 1e-6 * exact.abs().max(1.0),
                "r = {r}: exact {exact}, fd {fd}"
            );
        }
    }

    #[test]
    fn r0_c0_desk_check() {
        let eps = 1e-3;
        let (r0, c0) = r0_c0(eps, 3, 2.0, 1.0, 1.0, 2.0).unwrap();
        assert!((r0 - eps / 2.0).abs() <= 1e-18);
        let alpha = SQRT2 - 1.0;
        let expected_c0 = (eps / 2.0).powf(alpha - 1.0) / (1.0 - eps / 2.0);
        assert!((c0 - expected_c0).abs() <= 1e-12 * expected_c0);
    }

    #[test]
    fn r0_c0_rejects_b0_endpoint() {
        assert!(r0_c0(1e-3, 3, 2.0, 1.0, 1.0, 3.0).is_err()); // b0 = m+1
        assert!(r0_c0(1e-3, 3, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(r0_c0(1e-3, 3, 2.0, 1.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn p_poly_vanishes_at_one_and_constant_term() {
        let d = 3;
        let m = 2.0;
        for i in 0..100 {
            // Deterministic pseudo-random β in [0.2, 3.2].
            let beta = 0.2 + 3.0 * ((i as f64 * 0.617_924_291) % 1.0);
            assert!(
                p_poly(beta, d, m, 1.0).abs() <= 1e-12,
                "p(1) != 0 for beta = {beta}"
            );
            let expected_p0 = (d as f64 - 2.0 + beta) * (beta - 1.0);
            assert!((p_poly(beta, d, m, 0.0) - expected_p0).abs() <= 1e-12);
        }
    }

    #[test]
    fn p_threshold_simplifies_for_d3_m2() {
        // d−3 = 0 collapses β* to α + 1 = √2.
        let thr = p_threshold(3, 2.0).unwrap();
        assert!((thr - SQRT2).abs() <= 1e-14);
        assert!(p_monotone_nonincreasing(SQRT2, 3, 2.0));
        // At threshold the polynomial stays nonnegative on a fine grid.
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert!(p_poly(SQRT2, 3, 2.0, t) >= -1e-12, "p({t}) < 0");
        }
        assert!(!p_monotone_nonincreasing(SQRT2 - 0.05, 3, 2.0));
    }

    #[test]
    fn certify_clean_profile() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let beta = p_threshold(3, 2.0).unwrap();
        let cert = certify_bounds(&p, &sol, beta, 1.0, 2.0).unwrap();
        assert!(cert.is_valid(), "{cert:?}");
        assert!(cert.upper_linear_cap.nodes_checked > 0);
    }

    #[test]
    fn certify_lemma_setting_with_lambda_two_over_m() {
        let p = prob(1e-3, 3, 2.0, 2.0 / 2.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let beta = p_threshold(3, 2.0).unwrap();
        let cert = certify_bounds(&p, &sol, beta, 1.0, 2.0).unwrap();
        assert!(cert.is_valid());
    }

    #[test]
    fn certify_detects_corrupted_upper_bound() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let mut sol = solve_g(&p, &GridSpec::default()).unwrap();
        let alpha = SQRT2 - 1.0;
        for (i, &r) in sol.grid.clone().iter().enumerate() {
            if r < 0.9 {
                sol.values[i] = 1.1 * r.powf(alpha);
            }
        }
        let beta = p_threshold(3, 2.0).unwrap();
        let cert = certify_bounds(&p, &sol, beta, 1.0, 2.0).unwrap();
        assert!(cert.upper_power.violations > 0);
    }

    #[test]
    fn certify_rejects_mismatched_problem() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let other = prob(1e-4, 3, 2.0, 1.0);
        assert!(matches!(
            certify_bounds(&other, &sol, SQRT2, 1.0, 2.0),
            Err(OdeError::Mismatch(_))
        ));
    }

    #[test]
    fn large_epsilon_linear_branch_met_with_equality() {
        // g → r as ε → ∞, so the linear part of the lower envelope is tight.
        let p = prob(1e8, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let beta = p_threshold(3, 2.0).unwrap();
        let cert = certify_bounds(&p, &sol, beta, 1.0, 2.0).unwrap();
        assert!(cert.is_valid());
        for (i, &r) in sol.grid.iter().enumerate() {
            if r >= 0.01 {
                assert!((sol.values[i] / r - 1.0).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn operator_sign_certificates() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let sub = subsolution_certificate(&p, SQRT2, 1000).unwrap();
        assert!(sub.is_valid(), "{sub:?}");
        let sup = supersolution_certificate(&p, 1.0, 2.0, 1000).unwrap();
        assert!(sup.is_valid(), "{sup:?}");
    }

    #[test]
    fn mode_decay_bounded_by_power() {
        for k in 1..=3u32 {
            let p = GapOdeProblem::with_mode(1e-4, 3, 2.0, 1.0, k).unwrap();
            let report = mode_decay(&p, &GridSpec::default()).unwrap();
            assert!(
                report.sup_ratio <= 1.0 + 1e-3,
                "k = {k}: sup ratio {}",
                report.sup_ratio
            );
        }
    }

    #[test]
    fn mode_one_equals_solve_g() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let report = mode_decay(&p, &GridSpec::default()).unwrap();
        // Identical operator and boundary data: the k = 1 ratio touches 1 at r = 1.
        assert!((report.sup_ratio - 1.0).abs() <= 1e-6);
        assert!(sol.values.last().unwrap() - 1.0 <= 1e-14);
    }

    #[test]
    fn mode_decay_large_epsilon_indicial_limit() {
        // ε → ∞ removes the drift; V → r^{c₊} with c₊ from c²+(d−3)c−k(k+d−3)=0.
        let p = GapOdeProblem::with_mode(1e8, 3, 2.0, 1.0, 2).unwrap();
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let c_plus = p.indicial_root();
        assert!((c_plus - 2.0).abs() <= 1e-12);
        for (i, &r) in sol.grid.iter().enumerate() {
            if r >= 0.1 {
                assert!((sol.values[i] - r.powf(c_plus)).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn uniqueness_integral_diverges_near_origin() {
        let p = prob(1e-3, 3, 2.0, 1.0);
        let spec = GridSpec {
            r_min: Some(1e-6),
            ..GridSpec::default()
        };
        let sol = solve_g(&p, &spec).unwrap();
        let diag = uniqueness_diagnostic(&p, &sol).unwrap();
        assert_eq!(*diag.integral.last().unwrap(), 0.0);
        // Divergence threshold at any radius at or below 1e−4.
        let idx = diag.radii.partition_point(|&r| r < 1e-4);
        assert!(
            diag.integral[idx] >= 1e3,
            "I({:.2e}) = {:.3e}",
            diag.radii[idx],
            diag.integral[idx]
        );
        assert!(diag.at_min >= diag.integral[idx]);
    }

    #[test]
    fn uniqueness_integral_matches_closed_form_in_flat_limit() {
        // With g = r and ε large, I(r) ≈ (1/ε)(r^{−1} − r)/2.
        let p = prob(1e8, 3, 2.0, 1.0);
        let sol = solve_g(&p, &GridSpec::default()).unwrap();
        let diag = uniqueness_diagnostic(&p, &sol).unwrap();
        for (i, &r) in diag.radii.iter().enumerate() {
            if r >= 1e-3 && r <= 0.5 {
                let closed = (1.0 / r - r) / (2.0 * p.epsilon);
                let ratio = diag.integral[i] / closed;
                assert!(
                    (ratio - 1.0).abs() <= 0.1,
                    "r = {r}: ratio to closed form = {ratio}"
                );
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let spec = GridSpec {
            nodes_per_decade: 4,
            ..GridSpec::default()
        };
        assert!(matches!(
            solve_g(&prob(1e-3, 3, 2.0, 1.0), &spec),
            Err(OdeError::GridTooCoarse(_))
        ));
        let spec = GridSpec {
            r_min: Some(0.5),
            ..GridSpec::default()
        };
        assert!(matches!(
            solve_g(&prob(1e-6, 3, 2.0, 1.0), &spec),
            Err(OdeError::GridTooCoarse(_))
        ));
    }

    #[test]
    fn invalid_problem_parameters_rejected() {
        assert!(GapOdeProblem::new(0.0, 3, 2.0, 1.0).is_err());
        assert!(GapOdeProblem::new(1e-3, 2, 2.0, 1.0).is_err());
        assert!(GapOdeProblem::new(1e-3, 3, 1.0, 1.0).is_err());
        assert!(GapOdeProblem::new(1e-3, 3, 2.0, 0.0).is_err());
        assert!(GapOdeProblem::with_mode(1e-3, 3, 2.0, 1.0, 0).is_err());
        assert!(apply_l(&prob(1e-3, 3, 2.0, 1.0), &Monomial(1.0), 0.0).is_err());
    }
}
