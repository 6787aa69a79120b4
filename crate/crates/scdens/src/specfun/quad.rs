//! Adaptive Gauss-Legendre quadrature.
//!
//! Each panel is evaluated with a low- and a high-order rule; their
//! difference serves as the local error estimate and the worst panel is
//! bisected until the summed estimate meets the tolerance. Gauss nodes are
//! strictly interior, so integrable endpoint singularities (p ~ sqrt near a
//! classical turning point, r^{-1/2} envelopes) are handled without special
//! casing. Semi-infinite ranges are folded to (0, 1) with x = a + t/(1-t).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::{Error, Result};

/// Tolerances and budget for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Relative tolerance on the total integral.
    pub rel_tol: f64,
    /// Absolute tolerance; the effective target is
    /// `max(abs_tol, rel_tol * |integral|)`.
    pub abs_tol: f64,
    /// Maximum number of panel bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            ..Default::default()
        }
    }
}

/// Converged integral value with its certified error bound.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    pub subdivisions: usize,
}

const N_LO: usize = 10;
const N_HI: usize = 21;

/// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
/// iteration on the Legendre recurrence.
fn gauss_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

/// P_n(x) and P_n'(x) via the Bonnet recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rule_lo() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_rule(N_LO))
}

fn rule_hi() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_rule(N_HI))
}

fn panel_estimate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut lo = 0.0;
    for &(x, w) in rule_lo() {
        lo += w * f(c + h * x);
    }
    let mut hi = 0.0;
    for &(x, w) in rule_hi() {
        hi += w * f(c + h * x);
    }
    (h * hi, (h * (hi - lo)).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
///
/// Returns the estimate with a certified error bound, or
/// [`Error::QuadratureNoConverge`] carrying the best estimate when the
/// subdivision budget is exhausted.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, spec: QuadratureSpec) -> Result<QuadResult> {
    integrate_split(&mut f, &[a, b], spec)
}

/// Integrate with interior breakpoints (useful when the integrand has known
/// peaks, e.g. a folded level density split at the level positions).
///
/// `points` must be strictly increasing; panels are seeded between
/// consecutive points.
pub fn integrate_split(f: &mut dyn FnMut(f64) -> f64, points: &[f64], spec: QuadratureSpec) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::Domain("integrate_split needs at least two breakpoints".into()));
    }
    for w in points.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain(format!(
                "breakpoints must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (v, e) = panel_estimate(f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    let mut subdivisions = 0;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                error_bound: total_err,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureNoConverge {
                estimate: total,
                error_bound: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel no longer splittable in f64; accept its estimate as-is.
            total_err -= worst.err;
            continue;
        }
        let (vl, el) = panel_estimate(f, worst.a, mid);
        let (vr, er) = panel_estimate(f, mid, worst.b);
        total += vl + vr - worst.value;
        total_err += el + er - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: vl,
            err: el,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: vr,
            err: er,
        });
        subdivisions += 1;
    }
}

/// Integrate `f` over `[a, +inf)` via the rational substitution
/// `x = a + t/(1-t)`. The integrand must decay at least like `x^{-2}`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, spec: QuadratureSpec) -> Result<QuadResult> {
    let mut g = |t: f64| {
        let om = 1.0 - t;
        let x = a + t / om;
        f(x) / (om * om)
    };
    integrate_split(&mut g, &[0.0, 0.5, 1.0], spec)
}

/// Integrate `f` over `(-inf, b]`.
pub fn integrate_from_neg_inf<F: FnMut(f64) -> f64>(mut f: F, b: f64, spec: QuadratureSpec) -> Result<QuadResult> {
    integrate_to_inf(|x| f(2.0 * b - x), b, spec)
}
