//! The acceptance suite: sixteen verification criteria, each a desk-scale,
//! quantified surrogate of an asymptotic statement about the absorbed
//! fractional diffusion equation. The criteria share expensive artifacts
//! (kernel tables, saturated Dirac runs) through a context object so the
//! whole suite runs in minutes; every run is recorded and re-checked against
//! the universal flat-solution bound.

use std::path::Path;
use std::time::Instant;

use crate::analysis::{
    admissibility_integral, classify_dichotomy, decay_condition_check, harnack_diagnostic,
    profile_residual, rescale, trace_report, AdmissibilityVerdict, AnalysisThresholds, BallClass,
    DichotomyVerdict,
};
use crate::barrier::{find_lambda0_on, residual_scan};
use crate::datum::InitialDatum;
use crate::error::Result;
use crate::evolve::{saturate_dirac, solve, SolverConfig, Trajectory};
use crate::fraclap::{
    dimension_reduction_check, leibniz_inequality_check, quadrature_apply_1d, spectral_apply,
    verify_weight_bound, weight_phi, FarField, QuadSettings,
};
use crate::grid::{Field, GridSpec};
use crate::kernel::{build_profile, KernelTable};
use crate::model::{flat_solution_u, ModelParams};
use crate::report::{write_curve_csv, write_field_csv};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let mark = if self.passed { "pass" } else { "FAIL" };
        format!(
            "criterion {:02} [{mark}] {} ({:.1}s) — {}",
            self.id, self.name, self.seconds, self.detail
        )
    }
}

/// Shared artifacts: the main kernel table and every trajectory produced by
/// the suite (re-examined by the universal-bound criterion).
pub struct SuiteContext {
    pub table: KernelTable,
    runs: Vec<(String, ModelParams, Trajectory)>,
    dirac_saturated_18: Option<(f64, Trajectory)>,
    dirac_flat_14: Option<Trajectory>,
}

fn reference_params(p: f64) -> ModelParams {
    ModelParams::new(1, 0.5, 0.0, p).expect("reference parameters are valid")
}

/// Grid and schedule of the saturated-Dirac runs: three decades of time so
/// trace curves resolve both the concentration blow-up and the vanishing
/// regular part; the spacing just satisfies the Dirac resolution guard at
/// t_start = 1e-3.
fn dirac_config() -> SolverConfig {
    let grid = GridSpec::new(1, 8.0, 32768).expect("grid is valid");
    let mut config = SolverConfig::new(grid, 1e-3, 1.0, 384);
    config.n_snapshots = 33;
    config
}

impl SuiteContext {
    pub fn new() -> Result<Self> {
        Ok(Self {
            table: build_profile(0.5, 1, 400.0, 4096)?,
            runs: Vec::new(),
            dirac_saturated_18: None,
            dirac_flat_14: None,
        })
    }

    fn record(&mut self, label: &str, params: ModelParams, traj: &Trajectory) {
        self.runs.push((label.to_string(), params, traj.clone()));
    }
}

impl Default for SuiteContext {
    fn default() -> Self {
        Self::new().expect("kernel table build succeeds")
    }
}

fn run<F: FnOnce(&mut SuiteContext) -> Result<(bool, String)>>(
    id: usize,
    name: &'static str,
    ctx: &mut SuiteContext,
    body: F,
) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match body(ctx) {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Criterion 1: the splitting is exact on space-constant data, so a run from
/// the flat maximal solution must track it to near machine precision at every
/// schedule node.
fn c01_flat_exactness(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let params = reference_params(2.0);
    let grid = GridSpec::new(1, 256.0, 4096)?;
    let t0 = 1e-3;
    let mut config = SolverConfig::new(grid, t0, 1.0, 256);
    config.n_snapshots = 257; // keep every node
    let datum = InitialDatum::constant(flat_solution_u(&params, t0));
    let traj = solve(&datum, &params, &config, &ctx.table)?;
    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots {
        let expect = flat_solution_u(&params, snap.time);
        for &v in &snap.values {
            worst = worst.max((v - expect).abs() / expect);
        }
    }
    ctx.record("flat exactness p=2", params, &traj);
    Ok((worst <= 1e-10, format!("max relative deviation {worst:.2e} (tol 1e-10)")))
}

/// Criterion 2: the tabulated s = 1/2 profile against the Cauchy density.
fn c02_kernel_closed_form(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (r, v) in ctx.table.radii.iter().zip(ctx.table.values.iter()) {
        if *r > 20.0 {
            continue;
        }
        let cauchy = 1.0 / (std::f64::consts::PI * (1.0 + r * r));
        worst = worst.max((v - cauchy).abs() / cauchy);
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.2e} on |x| <= 20 (tol 1e-6)")))
}

/// Criterion 3: two-sided kernel bound — the weighted profile
/// H(x)(1 + |x|^{1+2s}) has positive finite extrema of bounded ratio,
/// stable under refinement.
fn c03_kernel_two_sided_bound(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = String::new();
    for &s in &[0.3, 0.5, 0.7] {
        let coarse = build_profile(s, 1, 50.0, 1024)?;
        let fine = build_profile(s, 1, 50.0, 2048)?;
        let weighted = |t: &KernelTable| {
            let expo = 1.0 + 2.0 * t.s;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (r, v) in t.radii.iter().zip(t.values.iter()) {
                let q = v * (1.0 + r.powf(expo));
                lo = lo.min(q);
                hi = hi.max(q);
            }
            (lo, hi)
        };
        let (lo_c, hi_c) = weighted(&coarse);
        let (lo_f, hi_f) = weighted(&fine);
        let ratio = hi_f / lo_f;
        let stable =
            (lo_c - lo_f).abs() <= 0.05 * lo_f && (hi_c - hi_f).abs() <= 0.05 * hi_f;
        let ok = lo_f > 0.0 && hi_f.is_finite() && ratio <= 50.0 && stable;
        pass &= ok;
        detail.push_str(&format!("s={s}: ratio {ratio:.2}, stable {stable}; "));
    }
    Ok((pass, format!("{detail}(ratio tol 50, refinement tol 5%)")))
}

/// Criterion 4: spectral and singular-integral realizations agree on a
/// Gaussian, and the quadrature reproduces the symbol |k|^{2s} on a cosine.
fn c04_operator_cross_validation(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let s = 0.5;
    let grid = GridSpec::new(1, 64.0, 2048)?;
    let field = Field::from_fn(grid, 0.0, |x| (-0.5 * x[0] * x[0]).exp());
    let spec = spectral_apply(&field, s);
    let st = QuadSettings::default();
    let scale = spec.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut worst: f64 = 0.0;
    let mut x = -10.0;
    while x <= 10.0 {
        let q = quadrature_apply_1d(
            &|y: f64| (-0.5 * y * y).exp(),
            s,
            x,
            &st,
            FarField::PowerDecay(8.0),
        )?;
        worst = worst.max((spec.value_at(x) - q).abs() / scale);
        x += 1.0;
    }

    // symbol check at a wavenumber the periodic grid represents exactly
    let k = std::f64::consts::PI;
    let osc = QuadSettings::for_oscillation(k);
    let mut worst_sym: f64 = 0.0;
    for &x in &[0.0, 0.3, 1.1] {
        let q = quadrature_apply_1d(&|y: f64| (k * y).cos(), s, x, &osc, FarField::Bounded)?;
        let expect = k.powf(2.0 * s) * (k * x).cos();
        worst_sym = worst_sym.max((q - expect).abs() / k.powf(2.0 * s));
    }
    let pass = worst <= 1e-2 && worst_sym <= 1e-2;
    Ok((pass, format!("gaussian mismatch {worst:.2e}, symbol mismatch {worst_sym:.2e} (tol 1e-2)")))
}

/// Criterion 5: the 2-D operator on a function of one variable reduces to the
/// 1-D operator — the dimensional consistency of the normalization constant.
fn c05_dimension_reduction(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let st = QuadSettings::default();
    let worst = dimension_reduction_check(
        &|x: f64| (-0.5 * x * x).exp(),
        0.5,
        &[0.0, 1.0, 2.5],
        &st,
        FarField::PowerDecay(8.0),
    )?;
    Ok((worst <= 1e-2, format!("worst relative discrepancy {worst:.2e} at 3 points (tol 1e-2)")))
}

/// Criterion 6: the fractional chain-rule lower bound for powers q = 2, 3 of
/// a smooth compactly supported bump, at 20 sample points.
fn c06_product_rule_inequality(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let bump = |x: f64| if x.abs() >= 1.0 { 0.0 } else { (1.0 - x * x).powi(3) };
    let points: Vec<f64> = (0..20).map(|i| -1.5 + 3.0 * i as f64 / 19.0).collect();
    let mut pass = true;
    for &q in &[2u32, 3] {
        for &x in &points {
            let mut st = QuadSettings::default();
            st.breakpoints = vec![(1.0 - x).abs(), (1.0 + x).abs()];
            pass &= leibniz_inequality_check(&bump, q, 0.5, &[x], &st)?;
        }
    }
    Ok((pass, "q in {2,3} at 20 points, slack 1e-6 x scale".to_string()))
}

/// Criterion 7: the comparison weight has a finite operator-to-weight ratio
/// c6, stable under quadrature refinement, and stays two-sided comparable to
/// the kernel tail shape out to |x| = 50.
fn c07_weight_bound(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let s = 0.5;
    let points: Vec<Vec<f64>> = (0..21).map(|i| vec![-10.0 + i as f64]).collect();
    let st = QuadSettings::default();
    let c6_coarse = verify_weight_bound(s, 1, &points, &st)?;
    let c6_fine = verify_weight_bound(s, 1, &points, &st.refined())?;
    let stable = (c6_coarse - c6_fine).abs() <= 0.1 * c6_fine.max(c6_coarse);

    // two-sided ratio Phi(x) (1 + |x|^{1+2s}) on |x| <= 50
    let expo = 1.0 + 2.0 * s;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=500 {
        let x = -50.0 + 100.0 * i as f64 / 500.0;
        let q = weight_phi(&[x], s) * (1.0 + x.abs().powf(expo));
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let two_sided = lo > 0.0 && hi.is_finite() && hi / lo <= 10.0;
    let pass = c6_fine.is_finite() && c6_fine > 0.0 && stable && two_sided;
    Ok((
        pass,
        format!(
            "c6 = {c6_fine:.4} (refinement drift {:.1}%), weight/kernel-shape ratio {:.2}",
            100.0 * (c6_coarse - c6_fine).abs() / c6_fine,
            hi / lo
        ),
    ))
}

/// Criterion 8: the universal bound — every snapshot of every absorbed run
/// recorded by the suite sits below the flat maximal solution.
fn c08_universal_bound(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut n_snapshots = 0usize;
    for (_, params, traj) in &ctx.runs {
        for snap in &traj.snapshots {
            let bound = flat_solution_u(params, snap.time);
            worst = worst.max(snap.max() / bound);
            n_snapshots += 1;
        }
    }
    Ok((
        worst <= 1.0 + 1e-8,
        format!("max u / U over {} runs, {n_snapshots} snapshots: {worst:.10} (tol 1+1e-8)", ctx.runs.len()),
    ))
}

/// A Dirac-family run in the absorption-dominant regime: the k -> infinity
/// limit is the flat maximal solution, realized by a very large weight whose
/// realization the solver clamps at U(t_start).
fn flat_regime_dirac(p: f64, ctx: &SuiteContext) -> Result<(ModelParams, Trajectory)> {
    let params = reference_params(p);
    let traj = solve(&InitialDatum::dirac(1e10), &params, &dirac_config(), &ctx.table)?;
    Ok((params, traj))
}

/// Criterion 9: the large-weight dichotomy across the second critical
/// exponent p** = 1.5, with profile-level quantitative checks.
fn c09_dichotomy(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let th = AnalysisThresholds::default();
    let mut pass = true;
    let mut detail = String::new();

    // p = 1.4 < p**: the limit is flat at level kappa t^{-gamma}
    let (params14, traj14) = flat_regime_dirac(1.4, ctx)?;
    let v14 = classify_dichotomy(&traj14, &params14, &th);
    let late14 = rescale(&traj14, 1.0);
    let level = late14.sup_on(th.constancy_window);
    let kappa = params14.kappa();
    let level_ok = (level - kappa).abs() <= 0.05 * kappa;
    pass &= v14 == DichotomyVerdict::AbsorptionDominant && level_ok;
    detail.push_str(&format!(
        "p=1.4: {v14:?}, level {level:.4} vs kappa {kappa:.4}; "
    ));
    ctx.record("dichotomy p=1.4", params14, &traj14);
    ctx.dirac_flat_14 = Some(traj14);

    // p = 1.5 = p**: still absorption-dominant (boundary case)
    let (params15, traj15) = flat_regime_dirac(1.5, ctx)?;
    let v15 = classify_dichotomy(&traj15, &params15, &th);
    pass &= v15 == DichotomyVerdict::AbsorptionDominant;
    detail.push_str(&format!("p=1.5 (= p**): {v15:?}; "));
    ctx.record("dichotomy p=1.5", params15, &traj15);

    // p = 1.8 in (p**, p*): the saturated family approaches a decaying
    // self-similar profile
    let params18 = reference_params(1.8);
    let (k_sat, traj18) = saturate_dirac(&params18, &dirac_config(), &ctx.table, 64.0)?;
    let v18 = classify_dichotomy(&traj18, &params18, &th);
    let late = rescale(&traj18, 1.0);
    let decay_ok = decay_condition_check(&late, &params18);
    let residual = profile_residual(&late, &params18, 3.0);
    let v_sup = late.sup_on(3.0);
    let scale = params18.gamma_exp() * v_sup + v_sup.powf(params18.p);
    let res_rel = residual
        .iter()
        .map(|&(_, e)| e.abs())
        .fold(0.0f64, f64::max)
        / scale;
    pass &= v18 == DichotomyVerdict::DiffusionDominant && decay_ok && res_rel <= 0.05;
    detail.push_str(&format!(
        "p=1.8 (k_sat={k_sat}): {v18:?}, decay {decay_ok}, residual {:.1}% (tol 5%)",
        100.0 * res_rel
    ));
    ctx.record("dichotomy p=1.8", params18, &traj18);
    ctx.dirac_saturated_18 = Some((k_sat, traj18));

    Ok((pass, detail))
}

/// Criterion 10: initial-trace classification of balls on the Dirac runs.
fn c10_trace_classification(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let balls = [(0.0, 0.5), (3.0, 0.5)];
    let traj18 = &ctx
        .dirac_saturated_18
        .as_ref()
        .expect("dichotomy criterion runs first")
        .1;
    let rep18 = trace_report(traj18, &balls);
    let center_singular = rep18.balls[0].classification == BallClass::Singular;
    let side_regular = rep18.balls[1].classification == BallClass::Regular
        && rep18.balls[1].trace_mass.is_some();
    let growth = rep18.balls[0].mass_curve[0].1
        / rep18.balls[0].mass_curve.last().unwrap().1.max(1e-300);

    let traj14 = ctx.dirac_flat_14.as_ref().expect("dichotomy criterion runs first");
    let rep14 = trace_report(traj14, &balls);
    let both_singular = rep14
        .balls
        .iter()
        .all(|b| b.classification == BallClass::Singular);

    let pass = center_singular && side_regular && growth >= 10.0 && both_singular;
    Ok((
        pass,
        format!(
            "p=1.8: B(0) {:?} (mass growth {growth:.0}x), B(3) {:?} (trace mass {:.3}); p=1.4: {:?}/{:?}",
            rep18.balls[0].classification,
            rep18.balls[1].classification,
            rep18.balls[1].trace_mass.unwrap_or(f64::NAN),
            rep14.balls[0].classification,
            rep14.balls[1].classification,
        ),
    ))
}

/// Criterion 11: the Dirac admissibility integral converges below the first
/// critical exponent p* = 2 and diverges above it.
fn c11_admissibility(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let eps: Vec<f64> = (1..=6).map(|i| 10f64.powi(-i)).collect();
    let datum = InitialDatum::dirac(1.0);
    let (v_sub, curve_sub) =
        admissibility_integral(&datum, &reference_params(1.8), &ctx.table, &eps);
    let (v_super, curve_super) =
        admissibility_integral(&datum, &reference_params(2.2), &ctx.table, &eps);
    let tail_frac = {
        let n = curve_sub.len();
        (curve_sub[n - 1].1 - curve_sub[n - 2].1) / curve_sub[n - 1].1
    };
    let growth = curve_super.last().unwrap().1 / curve_super[curve_super.len() - 2].1;
    let pass = v_sub == AdmissibilityVerdict::Converges
        && v_super == AdmissibilityVerdict::Diverges
        && tail_frac < 0.05;
    Ok((
        pass,
        format!(
            "p=1.8: {v_sub:?} (last-decade tail {:.1}%); p=2.2: {v_super:?} (last-decade factor {growth:.3})",
            100.0 * tail_frac
        ),
    ))
}

/// Criterion 12: the self-similar barrier admits a certified amplitude
/// lambda0 with nonnegative residual away from the kink, stable under scan
/// refinement.
fn c12_barrier(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let model = reference_params(1.8);
    let tol = 1e-6;
    let coarse = residual_scan(&model, (-50.0, 50.0), 500, 1e-3)?;
    let fine = residual_scan(&model, (-50.0, 50.0), 1000, 5e-4)?;
    let l_coarse = find_lambda0_on(&coarse, tol)?;
    let l_fine = find_lambda0_on(&fine, tol)?;
    let min_res = fine.min_residual(l_fine);
    let stable = (l_coarse - l_fine).abs() <= 0.1 * l_fine.max(l_coarse);
    let pass = l_fine <= 100.0 && min_res >= -tol && stable;
    Ok((
        pass,
        format!(
            "lambda0 = {l_fine:.4} (tol 100), min residual {min_res:.2e}, refinement drift {:.1}%",
            100.0 * (l_coarse - l_fine).abs() / l_fine
        ),
    ))
}

/// Criterion 13: growing capped data drive the solution toward the flat
/// maximal solution — complete blow-up of the initial-value problem without
/// a growth restriction. At a fixed probe time the deficit from U is set by
/// the absorbed history: inverting the flat-ODE memory turns each observed
/// ratio u_n/U into an effective fill level A_n, and the blow-up mechanism
/// shows up as A_n growing without bound in n. The desk check asserts
/// strictly increasing ratios below the universal bound and non-contracting
/// (at least square-root) power growth of the fill levels.
fn c13_blowup(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let params = reference_params(1.3);
    let alpha = 3.0;
    let grid = GridSpec::new(1, 256.0, 4096)?;
    let mut config = SolverConfig::new(grid, 1e-3, 0.5, 256);
    config.n_snapshots = 9;
    let n_list = [4.0, 16.0, 64.0, 160.0];
    let ratios = crate::analysis::blowup_experiment(alpha, &params, &config, &n_list, &ctx.table)?;
    // re-run the largest datum to record it for the universal-bound check
    {
        let n = *n_list.last().unwrap();
        let cap = (1.0 + n).powf(alpha);
        let datum = InitialDatum::density("capped growth", move |x| {
            (1.0 + x[0].abs()).powf(alpha).min(cap)
        });
        let traj = solve(&datum, &params, &config, &ctx.table)?;
        ctx.record("blow-up largest datum", params, &traj);
    }
    let monotone = ratios.windows(2).all(|w| w[1].1 > w[0].1);
    let bounded = ratios.iter().all(|&(_, r)| r <= 1.0 + 1e-8);
    // fill level: r = u/U at time t and the flat ODE give
    // A = U(t) (r^{-(p-1)} - 1)^{-1/(p-1)}
    let pm1 = params.p - 1.0;
    let u_probe = flat_solution_u(&params, 0.5);
    let fill = |r: f64| u_probe * (r.powf(-pm1) - 1.0).powf(-1.0 / pm1);
    let levels: Vec<f64> = ratios.iter().map(|&(_, r)| fill(r)).collect();
    let mut growing = true;
    for i in 1..levels.len() {
        let floor = (ratios[i].0 / ratios[i - 1].0).sqrt();
        growing &= levels[i] >= floor * levels[i - 1];
    }
    let pass = monotone && bounded && growing;
    let listing: Vec<String> = ratios
        .iter()
        .zip(levels.iter())
        .map(|(&(n, r), &a)| format!("n={n}: r={r:.4}, A={a:.1}"))
        .collect();
    Ok((
        pass,
        format!(
            "u_n(0.5,0)/U(0.5) and fill levels: {} (need increasing r <= 1, A growth >= sqrt(n-step))",
            listing.join(", ")
        ),
    ))
}

/// Criterion 14: order preservation and radial monotonicity of the scheme.
fn c14_comparison_and_symmetry(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let params = reference_params(2.0);
    let grid = GridSpec::new(1, 256.0, 4096)?;
    let mut config = SolverConfig::new(grid, 1e-3, 1.0, 256);
    config.n_snapshots = 17;
    let lo = InitialDatum::density("gaussian", |x| (-0.5 * x[0] * x[0]).exp());
    let hi = InitialDatum::density("wide gaussian x2", |x| 2.0 * (-x[0] * x[0] / 8.0).exp());
    let traj_lo = solve(&lo, &params, &config, &ctx.table)?;
    let traj_hi = solve(&hi, &params, &config, &ctx.table)?;

    let mut ordered = true;
    let mut worst_order: f64 = 0.0;
    for (a, b) in traj_lo.snapshots.iter().zip(traj_hi.snapshots.iter()) {
        let scale = b.max();
        for (va, vb) in a.values.iter().zip(b.values.iter()) {
            let deficit = (va - vb) / scale;
            worst_order = worst_order.max(deficit);
            ordered &= deficit <= 1e-10;
        }
    }

    // radial monotonicity and evenness of the radially nonincreasing run
    let mut radial = true;
    let mut worst_radial: f64 = 0.0;
    let n = grid.len();
    for snap in &traj_hi.snapshots {
        let scale = snap.max();
        for j in n / 2..n - 1 {
            let rise = (snap.values[j + 1] - snap.values[j]) / scale;
            worst_radial = worst_radial.max(rise);
            radial &= rise <= 1e-10;
        }
        for j in 1..n / 2 {
            let asym = (snap.values[n / 2 + j] - snap.values[n / 2 - j]).abs() / scale;
            radial &= asym <= 1e-10;
        }
    }
    ctx.record("comparison lower datum", params, &traj_lo);
    ctx.record("comparison upper datum", params, &traj_hi);
    let pass = ordered && radial;
    Ok((
        pass,
        format!(
            "ordering deficit {worst_order:.2e}, radial rise {worst_radial:.2e} (slack 1e-10)"
        ),
    ))
}

/// Criterion 15: the forward-in-time Harnack diagnostic is finite and
/// refinement-stable on the Dirac run, and exactly computable on the flat
/// solution.
fn c15_harnack(ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let (k_sat, traj18) = ctx
        .dirac_saturated_18
        .as_ref()
        .expect("dichotomy criterion runs first");
    let m_coarse = harnack_diagnostic(traj18, 1.0);

    let params = reference_params(1.8);
    let grid_fine = GridSpec::new(1, 8.0, 65536)?;
    let mut config_fine = SolverConfig::new(grid_fine, 1e-3, 1.0, 768);
    config_fine.n_snapshots = 33;
    let traj_fine = solve(&InitialDatum::dirac(*k_sat), &params, &config_fine, &ctx.table)?;
    let m_fine = harnack_diagnostic(&traj_fine, 1.0);
    let stable = (m_coarse - m_fine).abs() <= 0.2 * m_fine.max(m_coarse);
    ctx.record("harnack refined dirac", params, &traj_fine);

    // flat-solution case: with snapshots at (t/4)+, t/2, t the observed
    // constant is U(t/4)/U(t) = 4^{(1+beta)/(p-1)}
    let params_flat = reference_params(2.0);
    let grid_flat = GridSpec::new(1, 8.0, 1024)?;
    let mut config_flat = SolverConfig::new(grid_flat, 0.2502, 1.0, 128);
    config_flat.n_snapshots = 3;
    let datum = InitialDatum::constant(flat_solution_u(&params_flat, 0.2502));
    let traj_flat = solve(&datum, &params_flat, &config_flat, &ctx.table)?;
    let m_flat = harnack_diagnostic(&traj_flat, 1.0);
    let expect = 4f64.powf((1.0 + params_flat.beta) / (params_flat.p - 1.0));
    let flat_ok = (m_flat - expect).abs() <= 0.01 * expect;
    ctx.record("harnack flat", params_flat, &traj_flat);

    let pass = m_coarse.is_finite() && m_coarse > 0.0 && stable && flat_ok;
    Ok((
        pass,
        format!(
            "dirac M = {m_fine:.3} (refinement drift {:.1}%, tol 20%); flat M = {m_flat:.4} vs 4^gamma = {expect:.4}",
            100.0 * (m_coarse - m_fine).abs() / m_fine
        ),
    ))
}

/// The deterministic artifact set emitted by `selftest`: a kernel table, a
/// solver snapshot, and a barrier residual scan, all rebuilt from scratch.
pub fn write_selftest_csvs(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| crate::FracError::ConfigError(format!("cannot create {}: {e}", dir.display())))?;
    let io = |e: std::io::Error| crate::FracError::ConfigError(format!("write failed: {e}"));

    let table = build_profile(0.5, 1, 50.0, 512)?;
    let f = std::fs::File::create(dir.join("kernel_profile.csv")).map_err(io)?;
    table.write_csv(std::io::BufWriter::new(f)).map_err(io)?;

    let params = reference_params(1.8);
    let grid = GridSpec::new(1, 64.0, 1024)?;
    let config = SolverConfig::new(grid, 1e-3, 1.0, 64);
    let datum = InitialDatum::density("gaussian", |x| (-0.5 * x[0] * x[0]).exp());
    let traj = solve(&datum, &params, &config, &table)?;
    let f = std::fs::File::create(dir.join("final_snapshot.csv")).map_err(io)?;
    write_field_csv(std::io::BufWriter::new(f), traj.snapshots.last().unwrap()).map_err(io)?;

    let scan = residual_scan(&params, (-10.0, 10.0), 64, 1e-3)?;
    let rows: Vec<Vec<f64>> = scan
        .z
        .iter()
        .zip(scan.base.iter().zip(scan.w_pow_p.iter()))
        .map(|(&z, (&b, &w))| vec![z, b, w])
        .collect();
    let f = std::fs::File::create(dir.join("barrier_residual.csv")).map_err(io)?;
    write_curve_csv(std::io::BufWriter::new(f), &["z", "residual_base", "w_pow_p"], &rows)
        .map_err(io)?;
    Ok(())
}

/// Criterion 16: the selftest artifact set is byte-identical across runs.
fn c16_determinism(_ctx: &mut SuiteContext) -> Result<(bool, String)> {
    let stamp = std::process::id();
    let base = std::env::temp_dir();
    let dir_a = base.join(format!("fraclab-det-a-{stamp}"));
    let dir_b = base.join(format!("fraclab-det-b-{stamp}"));
    write_selftest_csvs(&dir_a)?;
    write_selftest_csvs(&dir_b)?;
    let mut pass = true;
    let mut checked = Vec::new();
    for name in ["kernel_profile.csv", "final_snapshot.csv", "barrier_residual.csv"] {
        let io = |e: std::io::Error| crate::FracError::ConfigError(format!("read failed: {e}"));
        let a = std::fs::read(dir_a.join(name)).map_err(io)?;
        let b = std::fs::read(dir_b.join(name)).map_err(io)?;
        pass &= a == b;
        checked.push(format!("{name}: {}", if a == b { "identical" } else { "DIFFER" }));
    }
    let _ = std::fs::remove_dir_all(&dir_a);
    let _ = std::fs::remove_dir_all(&dir_b);
    Ok((pass, checked.join(", ")))
}

/// Run the full suite in dependency order and return results sorted by id.
pub fn run_all() -> Result<Vec<CriterionResult>> {
    let mut ctx = SuiteContext::new()?;
    let mut results = vec![
        run(2, "kernel closed form at s = 1/2", &mut ctx, c02_kernel_closed_form),
        run(1, "flat-solution exactness of the splitting", &mut ctx, c01_flat_exactness),
        run(3, "two-sided kernel bound certification", &mut ctx, c03_kernel_two_sided_bound),
        run(4, "operator cross-validation (spectral vs quadrature)", &mut ctx, c04_operator_cross_validation),
        run(5, "dimension reduction of the operator", &mut ctx, c05_dimension_reduction),
        run(6, "fractional product-rule inequality", &mut ctx, c06_product_rule_inequality),
        run(7, "comparison-weight operator bound", &mut ctx, c07_weight_bound),
        run(9, "large-weight dichotomy across p**", &mut ctx, c09_dichotomy),
        run(10, "initial-trace ball classification", &mut ctx, c10_trace_classification),
        run(11, "Dirac admissibility across p*", &mut ctx, c11_admissibility),
        run(12, "self-similar barrier certification", &mut ctx, c12_barrier),
        run(13, "blow-up under growing data", &mut ctx, c13_blowup),
        run(14, "comparison and radial monotonicity", &mut ctx, c14_comparison_and_symmetry),
        run(15, "Harnack-type diagnostic", &mut ctx, c15_harnack),
        run(16, "selftest determinism", &mut ctx, c16_determinism),
        run(8, "universal flat-solution bound on all runs", &mut ctx, c08_universal_bound),
    ];
    results.sort_by_key(|r| r.id);
    Ok(results)
}
