//! Problem coordinates and closed-form objects: model parameters, the two
//! critical exponents, the flat maximal solution, the maximal ODE solution
//! for a general absorption nonlinearity, and the operator normalization
//! constant.

use crate::error::{FracError, Result};
use crate::quad::adaptive_simpson;
use statrs::function::gamma::gamma;

/// Parameters of d/dt u + (-Lap)^s u + t^beta u^p = 0 on R^N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    pub s: f64,
    pub beta: f64,
    pub p: f64,
}

impl ModelParams {
    pub fn new(dim: usize, s: f64, beta: f64, p: f64) -> Result<Self> {
        if dim < 1 {
            return Err(FracError::ConfigError("dim must be >= 1".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::ConfigError(format!("s must be in (0,1), got {s}")));
        }
        if beta <= -1.0 {
            return Err(FracError::ConfigError(format!("beta must be > -1, got {beta}")));
        }
        if p <= 1.0 {
            return Err(FracError::ConfigError(format!("p must be > 1, got {p}")));
        }
        Ok(Self { dim, s, beta, p })
    }

    /// Exponent (1+beta)/(p-1) governing the time decay of the flat solution.
    pub fn gamma_exp(&self) -> f64 {
        (1.0 + self.beta) / (self.p - 1.0)
    }

    /// Constant level kappa = ((1+beta)/(p-1))^{1/(p-1)} of the rescaled flat solution.
    pub fn kappa(&self) -> f64 {
        ((1.0 + self.beta) / (self.p - 1.0)).powf(1.0 / (self.p - 1.0))
    }
}

/// The two critical absorption powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExponents {
    /// 1 + 2s(1+beta)/N: solvability threshold for Dirac data.
    pub p_star: f64,
    /// 1 + 2s(1+beta)/(N+2s): absorption- vs diffusion-dominant threshold.
    pub p_double_star: f64,
}

pub fn critical_exponents(params: &ModelParams) -> CriticalExponents {
    let n = params.dim as f64;
    let num = 2.0 * params.s * (1.0 + params.beta);
    CriticalExponents {
        p_star: 1.0 + num / n,
        p_double_star: 1.0 + num / (n + 2.0 * params.s),
    }
}

/// Flat maximal solution U_{p,beta}(t) = ((1+beta)/(p-1))^{1/(p-1)} t^{-(1+beta)/(p-1)}.
pub fn flat_solution_u(params: &ModelParams, t: f64) -> f64 {
    assert!(t > 0.0, "t must be positive");
    params.kappa() * t.powf(-params.gamma_exp())
}

/// Nondecreasing absorption nonlinearity g with g(0) = 0.
pub struct AbsorptionFunction {
    pub evaluator: Box<dyn Fn(f64) -> f64 + Sync + Send>,
    pub descriptor: String,
}

impl AbsorptionFunction {
    pub fn power(p: f64) -> Self {
        Self {
            evaluator: Box::new(move |u: f64| u.powf(p)),
            descriptor: format!("power({p})"),
        }
    }

    pub fn custom(descriptor: &str, g: impl Fn(f64) -> f64 + Sync + Send + 'static) -> Self {
        Self { evaluator: Box::new(g), descriptor: descriptor.to_string() }
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.evaluator)(u)
    }
}

/// Reciprocal-absorption integral G(r) = int_r^inf ds / g(s).
///
/// The body [r, R] uses octave-wide Gauss-Legendre panels (exact to machine
/// precision on power laws); the tail uses the substitution s = 1/sigma and
/// dyadic panels shrinking toward sigma = 0, with a contraction check that
/// flags a non-integrable 1/g.
fn recip_integral(g: &AbsorptionFunction, r: f64) -> Result<f64> {
    assert!(r > 0.0);
    let body_end = (10.0 * r).max(10.0);
    let mut body = 0.0;
    let mut a = r;
    while a < body_end {
        let b = (2.0 * a).min(body_end);
        body += crate::quad::gl16(&|s: f64| 1.0 / g.eval(s), a, b);
        a = b;
    }
    // tail in sigma = 1/s over (0, 1/body_end]
    let h = |sigma: f64| 1.0 / (sigma * sigma * g.eval(1.0 / sigma));
    let mut upper = 1.0 / body_end;
    let mut tail = 0.0;
    let mut prev_inc = f64::INFINITY;
    for j in 0..400 {
        let lower = 0.5 * upper;
        let inc = crate::quad::gl16(&h, lower, upper);
        if !inc.is_finite() {
            return Err(FracError::NonIntegrableTail(format!(
                "1/{} tail integrand not finite",
                g.descriptor
            )));
        }
        tail += inc;
        if inc < 1e-16 * (body + tail).abs().max(1e-300) {
            return Ok(body + tail);
        }
        if j > 5 && inc > 0.97 * prev_inc {
            return Err(FracError::NonIntegrableTail(format!(
                "tail of 1/{} does not contract",
                g.descriptor
            )));
        }
        prev_inc = inc;
        upper = lower;
    }
    Err(FracError::NonIntegrableTail(format!(
        "tail of 1/{} not converged within panel budget",
        g.descriptor
    )))
}

/// Maximal solution U(t) of U' + t^beta g(U) = 0 with U(0) = +inf,
/// computed as the inverse of G at t^{beta+1}/(beta+1).
pub fn maximal_ode_solution(g: &AbsorptionFunction, beta: f64, t: f64) -> Result<f64> {
    assert!(t > 0.0 && beta > -1.0);
    let target = t.powf(beta + 1.0) / (beta + 1.0);
    // G is strictly decreasing; bracket the root of G(r) = target
    let mut lo = 1.0;
    let mut hi = 1.0;
    let mut g_lo = recip_integral(g, lo)?;
    while g_lo < target {
        lo *= 0.25;
        if lo < 1e-300 {
            // G stays below the target down to 0: the ODE solution has hit zero
            return Ok(0.0);
        }
        g_lo = recip_integral(g, lo)?;
    }
    let mut g_hi = recip_integral(g, hi)?;
    while g_hi > target {
        hi *= 4.0;
        if hi > 1e300 {
            return Err(FracError::NotFound("inversion bracket exceeded 1e300".into()));
        }
        g_hi = recip_integral(g, hi)?;
    }
    // bisection to relative 1e-10 on a monotone function
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if recip_integral(g, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-10 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsgoodVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

/// Numerical probe of the beta-weighted Osgood integral
/// int_1^inf s ds / [g(s) (int_s^inf dtau/g(tau))^{beta/(beta+1)}].
pub fn osgood_beta_check(g: &AbsorptionFunction, beta: f64) -> OsgoodVerdict {
    let exponent = beta / (beta + 1.0);
    let integrand = |s: f64| -> f64 {
        let gs = g.eval(s);
        if gs <= 0.0 {
            return f64::INFINITY;
        }
        let tail = match recip_integral(g, s) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        s / (gs * tail.powf(exponent))
    };
    // partial integrals across decades of the upper limit
    let mut partial = 0.0_f64;
    let mut increments = Vec::new();
    let mut prev = 1.0;
    for k in 1..=7 {
        let x = 10f64.powi(k);
        let inc = adaptive_simpson(&integrand, prev, x, 1e-10 * (1.0 + partial.abs()));
        if !inc.is_finite() {
            return OsgoodVerdict::Divergent;
        }
        partial += inc;
        increments.push(inc);
        prev = x;
    }
    let last = *increments.last().unwrap();
    if partial > 0.0 && last / partial < 0.01 {
        return OsgoodVerdict::Finite;
    }
    // divergence: per-decade increments fail to contract over the last two decades
    let n = increments.len();
    if increments[n - 1] >= 0.5 * increments[n - 2] && increments[n - 2] >= 0.5 * increments[n - 3]
    {
        return OsgoodVerdict::Divergent;
    }
    OsgoodVerdict::Inconclusive
}

/// Normalization constant of (-Lap)^s making the Fourier symbol exactly |xi|^{2s}:
/// 4^s s Gamma(N/2 + s) / (pi^{N/2} Gamma(1 - s)).
pub fn frac_constant(dim: usize, s: f64) -> f64 {
    assert!(dim >= 1 && s > 0.0 && s < 1.0);
    let n = dim as f64;
    4f64.powf(s) * s * gamma(n / 2.0 + s)
        / (std::f64::consts::PI.powf(n / 2.0) * gamma(1.0 - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(dim: usize, s: f64, beta: f64, p: f64) -> ModelParams {
        ModelParams::new(dim, s, beta, p).unwrap()
    }

    #[test]
    fn critical_exponents_reference_values() {
        let e = critical_exponents(&params(1, 0.5, 0.0, 2.0));
        assert!((e.p_star - 2.0).abs() < 1e-15);
        assert!((e.p_double_star - 1.5).abs() < 1e-15);

        let e = critical_exponents(&params(2, 0.5, 0.0, 2.0));
        assert!((e.p_star - 1.5).abs() < 1e-15);
        assert!((e.p_double_star - 4.0 / 3.0).abs() < 1e-15);

        let e = critical_exponents(&params(1, 0.5, 1.0, 2.0));
        assert!((e.p_star - 3.0).abs() < 1e-15);
        assert!((e.p_double_star - 2.0).abs() < 1e-15);
    }

    #[test]
    fn critical_exponents_ordering_and_monotonicity() {
        let dims = [1usize, 2, 3];
        let ss = [0.2, 0.4, 0.6, 0.8];
        let betas = [-0.5, 0.0, 0.7, 2.0];
        for &dim in &dims {
            for &s in &ss {
                for &beta in &betas {
                    let e = critical_exponents(&params(dim, s, beta, 2.0));
                    assert!(1.0 < e.p_double_star && e.p_double_star < e.p_star);
                    // increasing in beta and s
                    let eb = critical_exponents(&params(dim, s, beta + 0.1, 2.0));
                    assert!(eb.p_star > e.p_star && eb.p_double_star > e.p_double_star);
                    let es = critical_exponents(&params(dim, s + 0.05, beta, 2.0));
                    assert!(es.p_star > e.p_star && es.p_double_star > e.p_double_star);
                    // p_star decreasing in N
                    let en = critical_exponents(&params(dim + 1, s, beta, 2.0));
                    assert!(en.p_star < e.p_star);
                }
            }
        }
    }

    #[test]
    fn flat_solution_reference_values() {
        let p2 = params(1, 0.5, 0.0, 2.0);
        assert!((flat_solution_u(&p2, 1.0) - 1.0).abs() < 1e-15);
        assert!((flat_solution_u(&p2, 0.5) - 2.0).abs() < 1e-15);
        let p14 = params(1, 0.5, 0.0, 1.4);
        assert!((flat_solution_u(&p14, 1.0) - 2.5f64.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn flat_solution_satisfies_ode() {
        // U' + t^beta U^p = 0 by centered finite differences
        for &(beta, p) in &[(0.0, 2.0), (1.0, 1.5), (-0.5, 3.0)] {
            let mp = params(1, 0.5, beta, p);
            let mut t = 0.1;
            while t <= 10.0 {
                let h = 1e-5 * t;
                let du = (flat_solution_u(&mp, t + h) - flat_solution_u(&mp, t - h)) / (2.0 * h);
                let rhs = -t.powf(beta) * flat_solution_u(&mp, t).powf(p);
                assert!(
                    (du - rhs).abs() <= 1e-6 * rhs.abs(),
                    "ODE residual at t={t}, beta={beta}, p={p}"
                );
                t *= 1.5;
            }
        }
    }

    #[test]
    fn maximal_ode_closed_forms() {
        let g2 = AbsorptionFunction::power(2.0);
        // G(r) = 1/r, inverse of t is 1/t
        assert!((maximal_ode_solution(&g2, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-8);
        // beta = 1: U = (beta+1)/t^{beta+1} = 2 at t = 1
        assert!((maximal_ode_solution(&g2, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn maximal_ode_matches_flat_solution() {
        for &p in &[1.4, 2.0, 3.0] {
            let g = AbsorptionFunction::power(p);
            let mp = params(1, 0.5, 0.0, p);
            let mut t = 0.1;
            while t <= 10.0 {
                let numeric = maximal_ode_solution(&g, 0.0, t).unwrap();
                let exact = flat_solution_u(&mp, t);
                assert!(
                    (numeric - exact).abs() <= 1e-8 * exact,
                    "p={p}, t={t}: {numeric} vs {exact}"
                );
                t *= 2.3;
            }
        }
    }

    #[test]
    fn non_integrable_tail_detected() {
        // g(u) = u log(1+u): 1/g ~ 1/(u log u), not integrable at infinity
        let g = AbsorptionFunction::custom("u*log(1+u)", |u| u * (1.0 + u).ln());
        assert!(maximal_ode_solution(&g, 0.0, 1.0).is_err());
    }

    #[test]
    fn osgood_verdicts() {
        assert_eq!(osgood_beta_check(&AbsorptionFunction::power(3.0), 0.0), OsgoodVerdict::Finite);
        assert_eq!(
            osgood_beta_check(&AbsorptionFunction::power(1.5), 0.0),
            OsgoodVerdict::Divergent
        );
        // g = u^2, beta = 1: integrand s / (s^2 (1/s)^{1/2}) = s^{-1/2}, divergent
        assert_eq!(osgood_beta_check(&AbsorptionFunction::power(2.0), 1.0), OsgoodVerdict::Divergent);
    }

    #[test]
    fn frac_constant_values() {
        assert!((frac_constant(1, 0.5) - 1.0 / PI).abs() < 1e-14);
        // s -> 0 degeneration
        assert!(frac_constant(1, 1e-6) < 1e-5);
        // N = 2, s = 0.5: 2 * 0.5 * Gamma(1.5) / (pi * Gamma(0.5))
        let expect = 2.0 * 0.5 * gamma(1.5) / (PI * gamma(0.5));
        assert!((frac_constant(2, 0.5) - expect).abs() < 1e-14);
    }
}
