//! Exact one-dimensional solutions on Ω = (0,1) with D = (0,ξ), f(0) = 0 and
//! f(1) = f1 > 0.
//!
//! For finite n the minimizer has constant flux, so u_n' = C₁^{1/(p_n − 1)}
//! with C₁ fixed by u_n(1) = f1. In the limit either u_∞ has slope 1 on D
//! and flux C_∞ on the annulus (f1 > ξ), or slope K = f1/ξ on D and is flat
//! afterwards (f1 < ξ).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::FinitePart;

const LOG_C_BRACKET: f64 = 700.0;
const LOG_C_TOLERANCE: f64 = 1e-12;
const QUADRATURE_TOLERANCE: f64 = 1e-12;
const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Oracle1DProblem {
    xi: f64,
    f1: f64,
    p: FinitePart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCase {
    Case1,
    Case2,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oracle1DSolution {
    pub case_tag: OracleCase,
    pub c_infinity: Option<f64>,
    pub k: Option<f64>,
}

/// C₁(n) and the curve u_n it determines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerNSolution {
    pub n: f64,
    pub log_c1: f64,
    pub c1: f64,
    /// C₁(n)^{1/n}, which tends to K in Case 2.
    pub k_n: f64,
    #[serde(skip)]
    problem: Oracle1DProblem,
}

impl Oracle1DProblem {
    /// `p` is the annulus exponent as a function of x; only the constant and
    /// affine forms are accepted.
    pub fn new(xi: f64, f1: f64, p: FinitePart) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Oracle(format!("ξ = {xi} must lie in (0, 1)")));
        }
        if !(f1 > 0.0 && f1.is_finite()) {
            return Err(Error::Oracle(format!("f(1) = {f1} must be positive; reflect or translate the data first")));
        }
        match &p {
            FinitePart::Constant { .. } => {}
            FinitePart::Affine { b, .. } if b.len() == 1 => {}
            _ => return Err(Error::Oracle("annulus exponent must be constant or affine in x".into())),
        }
        let (lo, hi) = (p.eval([xi, 0.0]), p.eval([1.0, 0.0]));
        if !(lo.min(hi) > 1.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Oracle(format!("annulus exponent must exceed 1 on [ξ, 1], got [{lo}, {hi}]")));
        }
        Ok(Oracle1DProblem { xi, f1, p })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    fn p_at(&self, s: f64) -> f64 {
        self.p.eval([s, 0.0])
    }

    /// Points in (a, b) where the truncated exponent changes formula.
    fn breakpoints(&self, n: Option<f64>, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        if a < self.xi && self.xi < b {
            pts.push(self.xi);
        }
        if let (Some(n), FinitePart::Affine { a: p0, b: slope }) = (n, &self.p) {
            let slope = slope[0];
            if slope != 0.0 {
                let s = (n - p0) / slope;
                if s > a.max(self.xi) && s < b {
                    pts.push(s);
                }
            }
        }
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// ∫_a^b exp(log_c / (q(s) − 1)) ds where q = p_n for finite n, or q = p
    /// with the D part excluded when `n` is `None`.
    fn flux_integral(&self, log_c: f64, n: Option<f64>, a: f64, b: f64) -> f64 {
        let xi = self.xi;
        let q = |s: f64| match n {
            Some(n) if s < xi => n,
            Some(n) => self.p_at(s).min(n),
            None => self.p_at(s),
        };
        let integrand = |s: f64| (log_c / (q(s) - 1.0)).exp();
        let pts = self.breakpoints(n, a, b);
        pts.windows(2).map(|w| adaptive_simpson(&integrand, w[0], w[1], QUADRATURE_TOLERANCE)).sum()
    }
}

/// Simpson's rule with Richardson-corrected recursive bisection.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if !whole.is_finite() {
        return whole;
    }
    // absolute for integrals of order one, relative beyond
    simpson_step(f, a, b, fa, fm, fb, whole, tol * whole.abs().max(1.0), MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1)
}

/// Root in log C of the increasing map `g`, by bisection on [−700, 700].
fn bisect_log_c(g: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = (-LOG_C_BRACKET, LOG_C_BRACKET);
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::Oracle(format!(
            "no sign change for log C in [−{LOG_C_BRACKET}, {LOG_C_BRACKET}] (residuals {glo:e}, {ghi:e})"
        )));
    }
    while hi - lo > LOG_C_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The flux constant C₁(n) with u_n(1) = f1.
pub fn solve_flux_constant(problem: &Oracle1DProblem, n: f64) -> Result<PerNSolution> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::Oracle(format!("n = {n} must be finite and exceed 1")));
    }
    let log_c1 = bisect_log_c(|l| problem.flux_integral(l, Some(n), 0.0, 1.0) - problem.f1)?;
    Ok(PerNSolution { n, log_c1, c1: log_c1.exp(), k_n: (log_c1 / n).exp(), problem: problem.clone() })
}

impl PerNSolution {
    /// u_n(x) = ∫₀ˣ C₁^{1/(p_n − 1)}.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.problem.flux_integral(self.log_c1, Some(self.n), 0.0, x))
    }

    /// Values at `x` sorted ascending, accumulating the integral piecewise.
    pub fn eval_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(xs.len());
        let (mut prev, mut acc) = (0.0, 0.0);
        for &x in xs {
            check_unit(x)?;
            if x < prev {
                return Err(Error::Oracle("evaluation points must be sorted".into()));
            }
            acc += self.problem.flux_integral(self.log_c1, Some(self.n), prev, x);
            prev = x;
            out.push(acc);
        }
        Ok(out)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Oracle(format!("x = {x} lies outside [0, 1]")))
    }
}

pub fn eval_un(problem: &Oracle1DProblem, n: f64, x: f64) -> Result<f64> {
    solve_flux_constant(problem, n)?.eval(x)
}

pub fn solve_limit(problem: &Oracle1DProblem) -> Result<Oracle1DSolution> {
    let (xi, f1) = (problem.xi, problem.f1);
    if f1 > xi {
        let log_c = bisect_log_c(|l| xi + problem.flux_integral(l, None, xi, 1.0) - f1)?;
        Ok(Oracle1DSolution { case_tag: OracleCase::Case1, c_infinity: Some(log_c.exp()), k: None })
    } else if f1 < xi {
        Ok(Oracle1DSolution { case_tag: OracleCase::Case2, c_infinity: None, k: Some(f1 / xi) })
    } else {
        Ok(Oracle1DSolution { case_tag: OracleCase::Boundary, c_infinity: Some(0.0), k: Some(1.0) })
    }
}

pub fn eval_u_infinity(solution: &Oracle1DSolution, problem: &Oracle1DProblem, x: f64) -> Result<f64> {
    check_unit(x)?;
    let xi = problem.xi;
    Ok(match solution.case_tag {
        OracleCase::Case1 => {
            if x <= xi {
                x
            } else {
                let c = solution.c_infinity.unwrap_or(0.0);
                xi + problem.flux_integral(c.ln(), None, xi, x)
            }
        }
        OracleCase::Case2 | OracleCase::Boundary => {
            let k = solution.k.unwrap_or(1.0);
            k * x.min(xi)
        }
    })
}

/// F(u_∞) = ∫_ξ¹ C_∞^{p/(p−1)} / p.
pub fn limit_energy_exact(solution: &Oracle1DSolution, problem: &Oracle1DProblem) -> f64 {
    match (solution.case_tag, solution.c_infinity) {
        (OracleCase::Case1, Some(c)) if c > 0.0 => {
            let lc = c.ln();
            let f = |s: f64| {
                let p = problem.p_at(s);
                (lc * p / (p - 1.0)).exp() / p
            };
            adaptive_simpson(&f, problem.xi, 1.0, QUADRATURE_TOLERANCE)
        }
        _ => 0.0,
    }
}
