//! Running-time bases of approximate exhaustive search and approximate
//! monotone local search.
//!
//! `brute(α) = 1 + exp(-α·H(1/α))` is closed form. `amls(α, c, β)` is the
//! exponential of a max-min problem over `(κ, τ)`; the inner objective is
//! convex in `τ` and the inner minimum is concave in `κ`, so both levels are
//! solved with golden-section search. Every returned value carries a
//! certified error bound derived from secant lines of the convex/concave
//! objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when clamping entropy arguments and checking feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-12;

const MAX_GOLDEN_STEPS: usize = 300;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub c: f64,
    pub beta: f64,
    /// Absolute tolerance on the returned base.
    pub precision: f64,
}

impl BoundParams {
    pub fn new(alpha: f64, c: f64, beta: f64) -> Self {
        BoundParams { alpha, c, beta, precision: 1e-6 }
    }

    pub fn with_precision(mut self, precision: f64) -> Self {
        self.precision = precision;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let named = [("alpha", self.alpha), ("c", self.c), ("beta", self.beta)];
        for (name, v) in named {
            if !v.is_finite() || v < 1.0 {
                return Err(Error::domain(format!("{name} must be a finite real >= 1, got {v}")));
            }
        }
        if !self.precision.is_finite() || self.precision <= 0.0 {
            return Err(Error::domain(format!("precision must be positive, got {}", self.precision)));
        }
        Ok(())
    }
}

/// The evaluated max-min point of `amls`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    /// The base `amls(α, c, β)`.
    pub value: f64,
    pub kappa_star: f64,
    pub tau_star: f64,
    /// Certified bound on `|value - amls(α, c, β)|`.
    pub err_bound: f64,
}

/// Binary entropy in nats with `0·ln 0 = 0`.
pub fn entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("entropy argument must lie in [0, 1], got {x}")));
    }
    Ok(entropy_unchecked(x))
}

fn entropy_unchecked(x: f64) -> f64 {
    let xlnx = |p: f64| if p == 0.0 { 0.0 } else { p * p.ln() };
    -xlnx(x) - xlnx(1.0 - x)
}

/// `1 + exp(-α·H(1/α))`.
pub fn brute_bound(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::domain(format!("alpha must be a finite real >= 1, got {alpha}")));
    }
    Ok(1.0 + (-alpha * entropy_unchecked(1.0 / alpha)).exp())
}

/// Lower end `M_{α,β}(κ)` of the feasible `τ` interval.
pub fn m_lower(alpha: f64, beta: f64, kappa: f64) -> Result<f64> {
    if alpha < 1.0 || beta < 1.0 {
        return Err(Error::domain(format!("alpha and beta must be >= 1, got ({alpha}, {beta})")));
    }
    if alpha < beta {
        let denom = 1.0 - alpha * kappa;
        if denom <= 0.0 {
            return Err(Error::domain(format!(
                "M is singular at alpha*kappa = {} >= 1",
                alpha * kappa
            )));
        }
        Ok((beta - alpha) * kappa / denom)
    } else if alpha == beta {
        Ok(0.0)
    } else {
        Ok((alpha - beta) * kappa / (alpha - 1.0))
    }
}

fn clamp_unit(name: &str, x: f64) -> Result<f64> {
    if !(-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&x) {
        return Err(Error::domain(format!("{name} = {x} falls outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// The inner objective `g_{α,β,c}(κ, τ)`.
pub fn g_value(alpha: f64, beta: f64, c: f64, kappa: f64, tau: f64) -> Result<f64> {
    if kappa < -FEASIBILITY_TOL || kappa > 1.0 / beta + FEASIBILITY_TOL {
        return Err(Error::domain(format!("kappa = {kappa} outside [0, 1/beta]")));
    }
    let lo = m_lower(alpha, beta, kappa.clamp(0.0, 1.0 / beta))?;
    let hi = beta * kappa;
    if tau < lo - FEASIBILITY_TOL || tau > hi + FEASIBILITY_TOL {
        return Err(Error::domain(format!("tau = {tau} outside [{lo}, {hi}] for kappa = {kappa}")));
    }
    let delta = if tau == 1.0 {
        1.0 / alpha
    } else {
        (beta / alpha * kappa - tau / alpha) / (1.0 - tau)
    };
    let gamma = if tau == 0.0 {
        1.0 / alpha
    } else {
        (1.0 - beta / alpha) * kappa / tau + 1.0 / alpha
    };
    let delta = clamp_unit("delta", delta)?;
    let gamma = clamp_unit("gamma", gamma)?;
    let kappa = kappa.clamp(0.0, 1.0);
    Ok((beta * kappa - tau) / alpha * c.ln() - tau * entropy_unchecked(gamma)
        - (1.0 - tau) * entropy_unchecked(delta)
        + entropy_unchecked(kappa))
}

/// Result of a certified one-dimensional search. The true optimum lies in
/// `[lower, upper]`.
#[derive(Debug, Clone, Copy)]
pub struct Certified {
    pub arg: f64,
    pub lower: f64,
    pub upper: f64,
    /// Auxiliary payload of the probe at `arg` (the inner minimizer, for the
    /// outer search).
    pub aux: f64,
}

impl Certified {
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    x: f64,
    lo: f64,
    hi: f64,
    aux: f64,
}

/// Lower bound on a convex function over `[p[0].x, p[3].x]` from four probes.
/// Each probe's true value is only known to lie in `[lo, hi]`.
fn convex_lower_bound(p: &[Probe; 4]) -> f64 {
    // Secant through (i, j), i < j, extended to the right of j / left of i.
    let right = |i: usize, j: usize| {
        let slope = (p[j].lo - p[i].hi) / (p[j].x - p[i].x);
        move |x: f64| p[j].lo + slope * (x - p[j].x)
    };
    let left = |i: usize, j: usize| {
        let slope = (p[i].lo - p[j].hi) / (p[j].x - p[i].x);
        move |x: f64| p[i].lo + slope * (p[i].x - x)
    };
    let piece = |a: f64, b: f64, f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64| {
        let h = |x: f64| f(x).max(g(x));
        let mut best = h(a).min(h(b));
        let (fa, fb, ga, gb) = (f(a), f(b), g(a), g(b));
        let (d1, d2) = (fa - ga, fb - gb);
        if d1 * d2 < 0.0 {
            let t = d1 / (d1 - d2);
            best = best.min(h(a + t * (b - a)));
        }
        best
    };
    let b1 = piece(p[0].x, p[1].x, &left(1, 2), &left(2, 3));
    let b2 = piece(p[1].x, p[2].x, &right(0, 1), &left(2, 3));
    let b3 = piece(p[2].x, p[3].x, &right(0, 1), &right(1, 2));
    b1.min(b2).min(b3)
}

/// Golden-section minimization of a convex function on `[a, b]`. `f`
/// returns `(lo, hi, aux)`: an interval containing the true value plus a
/// payload. Stops once the certified half-width drops below `tol`.
fn golden_min<F>(a: f64, b: f64, tol: f64, mut f: F) -> Result<Certified>
where
    F: FnMut(f64) -> Result<(f64, f64, f64)>,
{
    let mut eval = |x: f64| -> Result<Probe> {
        let (lo, hi, aux) = f(x)?;
        Ok(Probe { x, lo, hi, aux })
    };
    let best_of = |ps: &[Probe]| -> Probe {
        *ps.iter()
            .min_by(|u, v| u.hi.total_cmp(&v.hi))
            .expect("non-empty probe set")
    };
    if b - a <= f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
        let pa = eval(a)?;
        let pb = eval(b)?;
        let best = best_of(&[pa, pb]);
        return Ok(Certified { arg: best.x, lower: pa.lo.min(pb.lo), upper: best.hi, aux: best.aux });
    }
    let mut pa = eval(a)?;
    let mut pb = eval(b)?;
    let mut p1 = eval(b - INV_PHI * (b - a))?;
    let mut p2 = eval(a + INV_PHI * (b - a))?;
    let mut steps = 0;
    loop {
        let probes = [pa, p1, p2, pb];
        let best = best_of(&probes);
        let lower = convex_lower_bound(&probes).min(best.hi);
        let cert = Certified { arg: best.x, lower, upper: best.hi, aux: best.aux };
        let width = pb.x - pa.x;
        let width_floor = 4.0 * f64::EPSILON * pa.x.abs().max(pb.x.abs()).max(1e-300);
        if cert.half_width() <= tol || width <= width_floor || steps >= MAX_GOLDEN_STEPS {
            return Ok(cert);
        }
        steps += 1;
        let mid1 = 0.5 * (p1.lo + p1.hi);
        let mid2 = 0.5 * (p2.lo + p2.hi);
        if mid1 <= mid2 {
            pb = p2;
            p2 = p1;
            p1 = eval(pb.x - INV_PHI * (pb.x - pa.x))?;
        } else {
            pa = p1;
            p1 = p2;
            p2 = eval(pa.x + INV_PHI * (pb.x - pa.x))?;
        }
    }
}

/// Minimum of `g` over `τ ∈ [M(κ), βκ]` as a certified bracket, with the
/// minimizing `τ` in `arg`.
pub fn g_star_certified(alpha: f64, beta: f64, c: f64, kappa: f64, tol: f64) -> Result<Certified> {
    if kappa < -FEASIBILITY_TOL || kappa > 1.0 / beta + FEASIBILITY_TOL {
        return Err(Error::domain(format!("kappa = {kappa} outside [0, 1/beta]")));
    }
    let kappa = kappa.clamp(0.0, 1.0 / beta);
    let lo = m_lower(alpha, beta, kappa)?;
    let hi = beta * kappa;
    if lo > hi + FEASIBILITY_TOL {
        return Err(Error::Internal(format!(
            "empty tau interval [{lo}, {hi}] at kappa = {kappa} (alpha = {alpha}, beta = {beta})"
        )));
    }
    let lo = lo.min(hi);
    let cert = golden_min(lo, hi, tol, |tau| {
        let v = g_value(alpha, beta, c, kappa, tau)?;
        Ok((v, v, tau))
    })?;
    Ok(cert)
}

/// `min_τ g(κ, τ)` to absolute tolerance `precision`, with its minimizer.
pub fn g_star(alpha: f64, beta: f64, c: f64, kappa: f64, precision: f64) -> Result<(f64, f64)> {
    let cert = g_star_certified(alpha, beta, c, kappa, precision)?;
    Ok((cert.value(), cert.arg))
}

/// Evaluates `amls(α, c, β)` with a certified error bound.
pub fn amls_bound(params: BoundParams) -> Result<SaddlePoint> {
    params.validate()?;
    let BoundParams { alpha, c, beta, precision } = params;
    // Log-domain targets. The base is at most 2, so a log half-width of ε/4
    // keeps the base error below ε/2; the inner searches run at ε/16 so the
    // outer bracket, which inherits their uncertainty, can still close.
    let outer_tol = precision / 4.0;
    let inner_tol = precision / 16.0;
    let outer = golden_min(0.0, 1.0 / beta, outer_tol, |kappa| {
        let inner = g_star_certified(alpha, beta, c, kappa, inner_tol)?;
        Ok((-inner.upper, -inner.lower, inner.arg))
    })?;
    // The outer search minimized -g*.
    let log_lo = -outer.upper;
    let log_hi = -outer.lower;
    let log_mid = 0.5 * (log_lo + log_hi);
    let value = log_mid.exp();
    let err_bound = (log_hi.exp() - value).max(value - log_lo.exp());
    Ok(SaddlePoint { value, kappa_star: outer.arg, tau_star: outer.aux, err_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    /// Largest `-Δ²g` over the τ-grids (0 when convex everywhere).
    pub convexity_violation: f64,
    /// Largest `Δ²g*` over the κ-grid (0 when concave everywhere).
    pub concavity_violation: f64,
    pub passed: bool,
}

pub const SHAPE_TOL: f64 = 1e-7;

/// Scans discrete second differences of `g` in `τ` and of `g*` in `κ` on
/// uniform grids with `grid_resolution` points.
pub fn shape_check(params: BoundParams, grid_resolution: usize) -> Result<ShapeReport> {
    params.validate()?;
    if grid_resolution < 10 {
        return Err(Error::domain(format!("grid_resolution must be >= 10, got {grid_resolution}")));
    }
    let BoundParams { alpha, c, beta, .. } = params;
    let r = grid_resolution;
    let kappas: Vec<f64> = (0..r).map(|i| i as f64 / (r - 1) as f64 / beta).collect();
    let per_kappa = crate::par::map(&kappas, |&kappa| -> Result<(f64, f64)> {
        let lo = m_lower(alpha, beta, kappa)?;
        let hi = beta * kappa;
        let mut worst: f64 = 0.0;
        if hi - lo > 0.0 {
            let vals = (0..r)
                .map(|j| g_value(alpha, beta, c, kappa, lo + (hi - lo) * j as f64 / (r - 1) as f64))
                .collect::<Result<Vec<_>>>()?;
            for w in vals.windows(3) {
                worst = worst.max(-(w[0] - 2.0 * w[1] + w[2]));
            }
        }
        let (gs, _) = g_star(alpha, beta, c, kappa, 1e-11)?;
        Ok((worst, gs))
    });
    let per_kappa = per_kappa.into_iter().collect::<Result<Vec<_>>>()?;
    let convexity_violation = per_kappa.iter().map(|p| p.0).fold(0.0, f64::max);
    let concavity_violation = per_kappa
        .windows(3)
        .map(|w| w[0].1 - 2.0 * w[1].1 + w[2].1)
        .fold(0.0, f64::max);
    Ok(ShapeReport {
        convexity_violation,
        concavity_violation,
        passed: convexity_violation <= SHAPE_TOL && concavity_violation <= SHAPE_TOL,
    })
}
