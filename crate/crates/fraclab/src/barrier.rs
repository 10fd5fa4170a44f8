//! The 1-D log-corrected power-law barrier: a supersolution
//! w_lambda(t,x) = lambda t^{-(1+beta)/(p-1)} W(t^{-1/2s} x) that dominates
//! solutions from above once lambda exceeds a computable lambda_0, plus the
//! minimal-solution-over-a-ball construction it controls.

use crate::datum::InitialDatum;
use crate::error::{FracError, Result};
use crate::evolve::{solve, SolverConfig, Trajectory};
use crate::fraclap::{quadrature_apply_1d, FarField, QuadSettings};
use crate::kernel::KernelTable;
use crate::model::ModelParams;
use rayon::prelude::*;

/// Barrier parameters: the model coordinates plus the barrier amplitude.
#[derive(Debug, Clone, Copy)]
pub struct BarrierParams {
    pub model: ModelParams,
    pub lambda: f64,
}

/// The amplitude-regime hypothesis p > 1 + 2s(1+beta)/(1+2s) under which the
/// barrier argument runs.
pub fn barrier_hypothesis_ok(model: &ModelParams) -> bool {
    model.p > 1.0 + 2.0 * model.s * (1.0 + model.beta) / (1.0 + 2.0 * model.s)
}

impl BarrierParams {
    pub fn new(model: ModelParams, lambda: f64) -> Result<Self> {
        if model.dim != 1 {
            return Err(FracError::ConfigError("barrier construction is 1-D".into()));
        }
        if !barrier_hypothesis_ok(&model) {
            return Err(FracError::HypothesisViolated(format!(
                "need p > 1 + 2s(1+beta)/(1+2s) = {}, got p = {}",
                1.0 + 2.0 * model.s * (1.0 + model.beta) / (1.0 + 2.0 * model.s),
                model.p
            )));
        }
        if lambda <= 0.0 {
            return Err(FracError::ConfigError("lambda must be positive".into()));
        }
        Ok(Self { model, lambda })
    }
}

/// The barrier profile: W(z) = ln(e + z^2) / (1 + z^{1+2s}) for z >= 0 and
/// W(z) = 1 on the flat branch z < 0.
///
/// A structural caveat, verified exactly by `flat_branch_drag` and its test:
/// the flat branch costs the self-similar residual an irreducible
/// -a (1-o(1)) z^{-2s} / 2s as z -> +infinity (the nonlocal operator sees the
/// plateau at distance z), which eventually dominates every decaying term.
/// The global supersolution inequality therefore cannot hold for the plateau
/// barrier at any amplitude; what is certifiable is the same inequality for
/// the symmetric decaying profile (`find_lambda0` does exactly that), with
/// the plateau side controlled by direct domination checks on trajectories.
pub fn barrier_w(z: f64, s: f64) -> f64 {
    if z < 0.0 {
        1.0
    } else {
        (std::f64::consts::E + z * z).ln() / (1.0 + z.powf(1.0 + 2.0 * s))
    }
}

/// Symmetric decaying profile: the z >= 0 branch of W reflected evenly.
pub fn barrier_w_symmetric(z: f64, s: f64) -> f64 {
    barrier_w(z.abs(), s)
}

/// Analytic derivative of the symmetric profile (odd).
pub fn barrier_w_symmetric_prime(z: f64, s: f64) -> f64 {
    z.signum() * barrier_w_prime(z.abs(), s)
}

/// Analytic derivative of the barrier profile (zero on the flat branch).
pub fn barrier_w_prime(z: f64, s: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        let e = std::f64::consts::E;
        let q = 1.0 + z.powf(1.0 + 2.0 * s);
        2.0 * z / ((e + z * z) * q)
            - (1.0 + 2.0 * s) * z.powf(2.0 * s) * (e + z * z).ln() / (q * q)
    }
}

/// Space-time barrier lambda t^{-(1+beta)/(p-1)} W(t^{-1/2s} x).
pub fn w_lambda(t: f64, x: f64, bp: &BarrierParams) -> f64 {
    assert!(t > 0.0);
    let m = &bp.model;
    bp.lambda * t.powf(-m.gamma_exp()) * barrier_w(t.powf(-1.0 / (2.0 * m.s)) * x, m.s)
}

/// Barrier translated to sit at the edge `a`, decaying in the direction
/// `orientation` (+1: decays to the right of a, -1: to the left).
pub fn w_lambda_translated(t: f64, x: f64, a: f64, orientation: f64, bp: &BarrierParams) -> f64 {
    w_lambda(t, orientation.signum() * (x - a), bp)
}

fn residual_settings(z: f64) -> QuadSettings {
    QuadSettings {
        // panel edge at the distance to the z = 0 kink of W
        breakpoints: if z.abs() > 0.0 { vec![z.abs()] } else { vec![] },
        ..QuadSettings::default()
    }
}

/// The lambda-free part A(z) = (-Lap)^s W - (1/2s) z W'(z) - gamma W(z) of the
/// self-similar residual. W tends to 1 on the left and decays like a
/// log-corrected power on the right, so the frozen-side tail model applies.
pub fn residual_base(z: f64, model: &ModelParams) -> Result<f64> {
    let s = model.s;
    let f = move |y: f64| barrier_w(y, s);
    let lap = quadrature_apply_1d(&f, s, z, &residual_settings(z), FarField::Bounded)?;
    Ok(lap - z * barrier_w_prime(z, s) / (2.0 * s) - model.gamma_exp() * barrier_w(z, s))
}

/// Self-similar residual E(z) = A(z) + lambda^{p-1} W(z)^p of the plateau
/// barrier. E >= 0 everywhere would make it a supersolution; see `barrier_w`
/// for why that fails in the far field regardless of lambda.
pub fn selfsim_residual(z: f64, bp: &BarrierParams) -> Result<f64> {
    let m = &bp.model;
    Ok(residual_base(z, m)?
        + bp.lambda.powf(m.p - 1.0) * barrier_w(z, m.s).powf(m.p))
}

/// Certified residual: the same expression for the symmetric decaying profile.
/// This is the inequality the lambda_0 search certifies; it is even in z and
/// genuinely nonnegative for all z once lambda is large enough, because the
/// drift dominance supplies sigma_0 W while the nonlocal term loses only
/// O(W / ln) at large |z|.
pub fn certified_residual_base(z: f64, model: &ModelParams) -> Result<f64> {
    let s = model.s;
    let f = move |y: f64| barrier_w_symmetric(y, s);
    let lap =
        quadrature_apply_1d(&f, s, z, &residual_settings(z), FarField::PowerDecay(1.0 + 2.0 * s))?;
    Ok(lap - z * barrier_w_symmetric_prime(z, s) / (2.0 * s)
        - model.gamma_exp() * barrier_w_symmetric(z, s))
}

/// Exact far-field cost of the plateau: the (positive) difference between the
/// symmetric-profile and plateau-barrier Laplacians at z > 0,
/// a int_0^inf (1 - W(u)) (z+u)^{-1-2s} du.
pub fn flat_branch_drag(z: f64, s: f64) -> f64 {
    assert!(z > 0.0);
    let a = crate::model::frac_constant(1, s);
    let integrand = |u: f64| (1.0 - barrier_w_symmetric(u, s)) * (z + u).powf(-1.0 - 2.0 * s);
    // 1 - W(u) vanishes like u^{min(2, 1+2s)} at 0 and tends to 1 at infinity
    let far = 1e6;
    let edges = crate::quad::geometric_edges(1e-8, far, 1.25, f64::INFINITY, &[]);
    let body = crate::quad::gl16_panels(&integrand, &edges);
    let tail = (z + far).powf(-2.0 * s) / (2.0 * s);
    a * (body + tail)
}

/// Certified-residual scan cache: z samples with the lambda-free part and the
/// matching W^p, so the residual at any lambda is base + lambda^{p-1} W^p
/// without re-running the quadrature.
#[derive(Debug, Clone)]
pub struct ResidualScan {
    pub z: Vec<f64>,
    pub base: Vec<f64>,
    pub w_pow_p: Vec<f64>,
    pub model: ModelParams,
}

impl ResidualScan {
    pub fn min_residual(&self, lambda: f64) -> f64 {
        let amp = lambda.powf(self.model.p - 1.0);
        self.base
            .iter()
            .zip(self.w_pow_p.iter())
            .map(|(a, b)| a + amp * b)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sample the certified residual base over [z_min, z_max] minus the kink
/// window |z| < 2 cutoff, with extra geometric samples near the kink where
/// the profile bends fastest.
pub fn residual_scan(
    model: &ModelParams,
    z_range: (f64, f64),
    n_uniform: usize,
    settings_cutoff: f64,
) -> Result<ResidualScan> {
    let (z_min, z_max) = z_range;
    assert!(z_min < 0.0 && z_max > 0.0 && n_uniform >= 16);
    let window = 2.0 * settings_cutoff;
    let mut zs = Vec::new();
    for i in 0..=n_uniform {
        let z = z_min + (z_max - z_min) * i as f64 / n_uniform as f64;
        if z.abs() >= window {
            zs.push(z);
        }
    }
    // geometric refinement toward the kink on both sides
    let mut r = 1.0;
    while r >= window {
        zs.push(r);
        zs.push(-r);
        r *= 0.5;
    }
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zs.dedup();
    let base: Result<Vec<f64>> =
        zs.par_iter().map(|&z| certified_residual_base(z, model)).collect();
    let base = base?;
    let w_pow_p =
        zs.iter().map(|&z| barrier_w_symmetric(z, model.s).powf(model.p)).collect();
    Ok(ResidualScan { z: zs, base, w_pow_p, model: *model })
}

/// Smallest lambda for which min_z E(z) >= -tol on the scanned range,
/// located by bisection on the (exactly monotone-in-lambda) cached scan.
pub fn find_lambda0(model: &ModelParams, z_range: (f64, f64), tol: f64) -> Result<f64> {
    BarrierParams::new(*model, 1.0)?;
    let scan = residual_scan(model, z_range, 1000, QuadSettings::default().cutoff)?;
    find_lambda0_on(&scan, tol)
}

pub fn find_lambda0_on(scan: &ResidualScan, tol: f64) -> Result<f64> {
    let ok = |lambda: f64| scan.min_residual(lambda) >= -tol;
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(FracError::NotFound(
                "no lambda <= 1e6 certifies the supersolution inequality".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Solutions from the data k * indicator(B_R(0)) for each k of an increasing
/// list; the last trajectory stands in for the minimal solution over the ball.
pub fn minimal_solution_ball(
    radius: f64,
    k_list: &[f64],
    params: &ModelParams,
    config: &SolverConfig,
    table: &KernelTable,
) -> Result<Vec<Trajectory>> {
    if !barrier_hypothesis_ok(params) {
        return Err(FracError::HypothesisViolated(
            "ball construction runs under p > 1 + 2s(1+beta)/(1+2s)".into(),
        ));
    }
    assert!(k_list.windows(2).all(|w| w[1] > w[0]), "k_list must increase");
    k_list
        .iter()
        .map(|&k| solve(&InitialDatum::indicator(vec![0.0], radius, k), params, config, table))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::build_profile;

    fn model(p: f64) -> ModelParams {
        ModelParams::new(1, 0.5, 0.0, p).unwrap()
    }

    #[test]
    fn w_reference_values_and_envelope() {
        assert!((barrier_w(0.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((barrier_w(-5.0, 0.5) - 1.0).abs() < 1e-15);
        // asymptotics: W(z) z^{1+2s} / ln(z^2) -> 1
        for s in [0.3, 0.5, 0.7] {
            let z = 1e6f64;
            let ratio = barrier_w(z, s) * z.powf(1.0 + 2.0 * s) / (z * z).ln();
            assert!((ratio - 1.0).abs() < 1e-3, "s={s}: {ratio}");
        }
        let mut z = 0.0;
        while z <= 100.0 {
            let w = barrier_w(z, 0.5);
            assert!(w > 0.0 && w <= (std::f64::consts::E + z * z).ln());
            assert!(barrier_w(-z - 0.1, 0.5) <= 1.0);
            z += 0.37;
        }
    }

    #[test]
    fn w_prime_matches_finite_differences() {
        for s in [0.3, 0.5, 0.7] {
            for z in [0.2, 1.0, 3.7, 20.0] {
                let h = 1e-6 * z;
                let fd = (barrier_w(z + h, s) - barrier_w(z - h, s)) / (2.0 * h);
                let an = barrier_w_prime(z, s);
                assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "s={s} z={z}");
            }
        }
    }

    #[test]
    fn w_lambda_scaling_identity() {
        let bp = BarrierParams::new(model(1.8), 2.0).unwrap();
        assert!((w_lambda(1.0, 0.0, &bp) - 2.0).abs() < 1e-15);
        // flat branch: x < 0 gives lambda t^{-gamma}
        let g = bp.model.gamma_exp();
        assert!((w_lambda(0.5, -3.0, &bp) - 2.0 * 0.5f64.powf(-g)).abs() < 1e-13);
        // self-similarity: w(4t, 4^{1/2s} x) = 4^{-gamma} w(t, x)
        for &(t, x) in &[(0.3, 0.7), (1.0, -2.0), (2.0, 5.0)] {
            let lhs = w_lambda(4.0 * t, 4f64.powf(1.0 / (2.0 * bp.model.s)) * x, &bp);
            let rhs = 4f64.powf(-g) * w_lambda(t, x, &bp);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
        }
    }

    #[test]
    fn hypothesis_guard() {
        // threshold at s=0.5, beta=0 is 1.5
        assert!(BarrierParams::new(model(1.4), 1.0).is_err());
        assert!(BarrierParams::new(model(1.8), 1.0).is_ok());
    }

    #[test]
    fn residual_affine_in_lambda_power() {
        let m = model(1.8);
        let bp1 = BarrierParams::new(m, 1.0).unwrap();
        let bp2 = BarrierParams::new(m, 3.0).unwrap();
        for z in [-7.0, -0.5, 0.5, 2.0, 11.0] {
            let e1 = selfsim_residual(z, &bp1).unwrap();
            let e2 = selfsim_residual(z, &bp2).unwrap();
            let exact = (3f64.powf(m.p - 1.0) - 1.0) * barrier_w(z, m.s).powf(m.p);
            assert!((e2 - e1 - exact).abs() < 1e-12 * exact.abs().max(1.0), "z={z}");
        }
    }

    #[test]
    fn residual_flat_branch_limit() {
        // deep in the flat branch the nonlocal term is O(1/|z|) and
        // E -> lambda^{p-1} - gamma
        let m = model(1.8);
        let bp = BarrierParams::new(m, 2.0).unwrap();
        let e = selfsim_residual(-40.0, &bp).unwrap();
        let limit = 2f64.powf(m.p - 1.0) - m.gamma_exp();
        assert!((e - limit).abs() < 0.02, "{e} vs {limit}");
        // W = 1 is the global max on the flat branch, so the nonlocal term
        // pushes E slightly above the limit
        assert!(e > limit);
    }

    #[test]
    fn residual_negative_without_amplitude() {
        let m = model(1.8);
        // lambda -> 0 limit: drop the amplitude term entirely
        assert!(residual_base(-5.0, &m).unwrap() < 0.0);
    }

    #[test]
    fn large_z_drift_dominance() {
        // -(1/2s) z W' - gamma W > 0 for large z when p is above threshold
        let m = model(1.8);
        for z in [20.0, 35.0, 50.0] {
            let v = -z * barrier_w_prime(z, m.s) / (2.0 * m.s)
                - m.gamma_exp() * barrier_w(z, m.s);
            assert!(v > 0.0, "z={z}: {v}");
        }
    }

    #[test]
    fn lambda0_search_and_stability() {
        let m = model(1.8);
        let scan = residual_scan(&m, (-50.0, 50.0), 400, 1e-3).unwrap();
        let lambda0 = find_lambda0_on(&scan, 1e-6).unwrap();
        assert!(lambda0 > 0.0 && lambda0 <= 100.0, "lambda0 = {lambda0}");
        assert!(scan.min_residual(lambda0) >= -1e-6);
        // monotone in lambda
        assert!(scan.min_residual(2.0 * lambda0) > scan.min_residual(lambda0));
        // refinement stability of the estimate
        let fine = residual_scan(&m, (-50.0, 50.0), 800, 5e-4).unwrap();
        let lambda0_fine = find_lambda0_on(&fine, 1e-6).unwrap();
        assert!(
            (lambda0_fine - lambda0).abs() <= 0.1 * lambda0,
            "{lambda0} vs {lambda0_fine}"
        );
        // positivity persists on a 2x wider range within -10 tol
        let wide = residual_scan(&m, (-100.0, 100.0), 400, 1e-3).unwrap();
        assert!(wide.min_residual(lambda0) >= -1e-5);
    }

    #[test]
    fn plateau_drag_identity() {
        // the plateau and symmetric residual bases differ exactly by the
        // (independently integrated) far-field drag of the flat branch
        for s in [0.3, 0.5, 0.7] {
            let m = ModelParams::new(1, s, 0.0, 1.9).unwrap();
            for z in [5.0, 15.0, 40.0] {
                let plateau = residual_base(z, &m).unwrap();
                let symmetric = certified_residual_base(z, &m).unwrap();
                let drag = flat_branch_drag(z, s);
                assert!(drag > 0.0);
                assert!(
                    ((symmetric - plateau) - drag).abs() < 1e-4 * drag.max(1e-6),
                    "s={s} z={z}: sym-plateau={} drag={drag}",
                    symmetric - plateau
                );
            }
        }
    }

    #[test]
    fn plateau_residual_far_field_deficit() {
        // at large z the plateau residual is negative by ~ a z^{-2s}/(2s)
        // for any amplitude: the certificate cannot include the far field
        let m = model(1.8);
        let bp = BarrierParams::new(m, 100.0).unwrap();
        let e = selfsim_residual(45.0, &bp).unwrap();
        assert!(e < 0.0, "expected far-field deficit, got {e}");
        let a = crate::model::frac_constant(1, m.s);
        let lead = -a * 45f64.powf(-2.0 * m.s) / (2.0 * m.s);
        assert!((e - lead).abs() < 0.5 * lead.abs(), "{e} vs {lead}");
    }

    #[test]
    fn ball_solutions_monotone_and_dominated() {
        let m = model(1.8);
        let table = build_profile(0.5, 1, 64.0, 1024).unwrap();
        let grid = GridSpec::new(1, 32.0, 1024).unwrap();
        let mut cfg = SolverConfig::new(grid, 1e-3, 1.0, 256);
        cfg.n_snapshots = 9;
        let trajs = minimal_solution_ball(1.0, &[4.0, 32.0, 256.0], &m, &cfg, &table).unwrap();

        // monotone in k at every snapshot (small slack for the splitting error)
        for w in trajs.windows(2) {
            for (a, b) in w[0].snapshots.iter().zip(w[1].snapshots.iter()) {
                let scale = b.max();
                for (x, y) in a.values.iter().zip(b.values.iter()) {
                    assert!(*x <= *y + 1e-9 * scale);
                }
            }
        }

        // monotone in R
        let trajs_r2 = minimal_solution_ball(2.0, &[4.0, 32.0, 256.0], &m, &cfg, &table).unwrap();
        for (a, b) in trajs.last().unwrap().snapshots.iter().zip(trajs_r2.last().unwrap().snapshots.iter()) {
            let scale = b.max();
            for (x, y) in a.values.iter().zip(b.values.iter()) {
                assert!(*x <= *y + 1e-9 * scale);
            }
        }

        // domination by translated barriers: find the smallest amplitude
        // that sits above u on every snapshot (interior half of the box only;
        // near the wrap boundary the periodic images inflate u above the
        // free-space tail the barrier is built for) and check it is a modest
        // multiple of the flat level, independent of the (saturating) k
        let unit = BarrierParams::new(m, 1.0).unwrap();
        let empirical_amplitude = |traj: &Trajectory, a: f64, orientation: f64| -> f64 {
            let mut amp: f64 = 0.0;
            for snap in &traj.snapshots {
                // before absorption has crushed the core toward the flat
                // solution, the realized tail still scales with k, which the
                // (k-independent) barrier is not meant to cover
                if snap.time < 0.5 {
                    continue;
                }
                for i in 0..snap.grid.len() {
                    let x = snap.grid.coord(i);
                    if x.abs() > 16.0 {
                        continue;
                    }
                    let shape = w_lambda_translated(snap.time, x, a, orientation, &unit);
                    amp = amp.max(snap.values[i] / shape);
                }
            }
            amp
        };
        let u = trajs.last().unwrap();
        let lam_right = empirical_amplitude(u, 1.0, 1.0);
        let lam_left = empirical_amplitude(u, -1.0, -1.0);
        assert!(lam_right.is_finite() && lam_right <= 8.0, "right amplitude {lam_right}");
        assert!(lam_left.is_finite() && lam_left <= 8.0, "left amplitude {lam_left}");
        // flat-branch necessity: the plateau must clear the flat solution level
        assert!(lam_right >= 0.5 * m.kappa() && lam_left >= 0.5 * m.kappa());
        // the amplitude saturates in k (the k -> infinity limit stays dominated)
        let lam_right_small = empirical_amplitude(&trajs[1], 1.0, 1.0);
        assert!(
            lam_right <= 1.5 * lam_right_small.max(m.kappa()),
            "k=256: {lam_right}, k=32: {lam_right_small}"
        );

        // center values grow toward small t; far field stays small
        let center = &trajs.last().unwrap();
        for w in center.snapshots.windows(2) {
            assert!(w[0].value_at(0.0) >= w[1].value_at(0.0) * (1.0 - 1e-9));
        }
        for snap in &center.snapshots {
            assert!(snap.value_at(8.0) <= 0.05 * 256.0);
        }
    }
}
