//! One function per subcommand: run the experiment described by the config,
//! write data CSVs, and assemble the verdict report.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fraclab::analysis::{
    admissibility_with, classify_dichotomy, harnack_diagnostic, regime_label, rescale,
    trace_report_with, AdmissibilityVerdict, BallClass, DichotomyVerdict,
};
use fraclab::barrier::{barrier_hypothesis_ok, find_lambda0_on, residual_scan};
use fraclab::datum::InitialDatum;
use fraclab::evolve::{saturate_dirac, solve, Trajectory};
use fraclab::fraclap::{quadrature_apply_1d, spectral_apply, FarField, QuadSettings};
use fraclab::grid::{Field, GridSpec};
use fraclab::kernel::{build_profile, verify_cks, KernelTable};
use fraclab::model::flat_solution_u;
use fraclab::report::{write_curve_csv, write_field_csv, Report, ReportItem};
use fraclab::{FracError, Result};

use crate::config::{Experiment, ExperimentConfig};

fn item(name: &str, passed: bool, detail: String, start: Instant) -> ReportItem {
    ReportItem {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)
        .map_err(|e| FracError::ConfigError(format!("cannot create {}: {e}", dir.display())))?;
    let f = File::create(dir.join(name))
        .map_err(|e| FracError::ConfigError(format!("cannot create {name}: {e}")))?;
    Ok(BufWriter::new(f))
}

fn io_err(e: std::io::Error) -> FracError {
    FracError::ConfigError(format!("write failed: {e}"))
}

fn build_table(config: &ExperimentConfig) -> Result<KernelTable> {
    build_profile(
        config.params.s,
        config.params.dim,
        config.kernel.max_radius,
        config.kernel.n_samples,
    )
}

fn datum_from(config: &ExperimentConfig) -> Result<InitialDatum> {
    let o = &config.options;
    match o.datum.as_str() {
        "gaussian" => {
            let level = o.level;
            Ok(InitialDatum::density("gaussian", move |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                level * (-0.5 * r2).exp()
            }))
        }
        "dirac" => Ok(InitialDatum::dirac(o.weight)),
        "indicator" => Ok(InitialDatum::indicator(
            vec![0.0; config.params.dim],
            o.radius,
            o.level,
        )),
        other => Err(FracError::ConfigError(format!(
            "unknown datum '{other}' (expected gaussian | dirac | indicator)"
        ))),
    }
}

fn dirac_run(config: &ExperimentConfig, table: &KernelTable) -> Result<(f64, Trajectory)> {
    let params = config.model_params()?;
    let solver = config.solver_config()?;
    if config.options.saturate {
        saturate_dirac(&params, &solver, table, config.options.weight)
    } else {
        let k = config.options.weight;
        Ok((k, solve(&InitialDatum::dirac(k), &params, &solver, table)?))
    }
}

fn universal_bound_item(traj: &Trajectory, start: Instant) -> ReportItem {
    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots {
        worst = worst.max(snap.max() / flat_solution_u(&traj.params, snap.time));
    }
    item(
        "universal flat-solution bound",
        worst <= 1.0 + 1e-8,
        format!("max u / U = {worst:.10} (tol 1+1e-8)"),
        start,
    )
}

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let experiment = config.experiment.expect("experiment set by the caller");
    let out_dir = PathBuf::from(&config.output_dir);
    let start = Instant::now();
    let mut report = Report::new(experiment.name(), config.to_text());

    match experiment {
        Experiment::Kernel => run_kernel(config, &out_dir, &mut report)?,
        Experiment::Operator => run_operator(config, &out_dir, &mut report)?,
        Experiment::Evolve => run_evolve(config, &out_dir, &mut report)?,
        Experiment::Dichotomy => run_dichotomy(config, &out_dir, &mut report)?,
        Experiment::Trace => run_trace(config, &out_dir, &mut report)?,
        Experiment::Barrier => run_barrier(config, &out_dir, &mut report)?,
        Experiment::Blowup => run_blowup(config, &out_dir, &mut report)?,
        Experiment::Admissibility => run_admissibility(config, &out_dir, &mut report)?,
        Experiment::Harnack => run_harnack(config, &out_dir, &mut report)?,
        Experiment::Selftest => run_selftest(&out_dir, &mut report)?,
    }

    report.elapsed_seconds = start.elapsed().as_secs_f64();
    report.write_to(&out_dir)?;
    Ok(report)
}

fn run_kernel(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    table.write_csv(out_file(dir, "kernel_profile.csv")?).map_err(io_err)?;

    let mass_tol = if config.params.dim == 1 { 1e-6 } else { 1e-4 };
    report.push(item(
        "unit mass",
        (table.mass - 1.0).abs() <= mass_tol,
        format!("|mass - 1| = {:.2e} (tol {mass_tol:.0e})", (table.mass - 1.0).abs()),
        t0,
    ));

    let t1 = Instant::now();
    let (lo, hi) = verify_cks(&table);
    report.push(item(
        "two-sided kernel bound",
        lo > 0.0 && hi.is_finite() && hi / lo <= 50.0,
        format!("weighted profile in [{lo:.4e}, {hi:.4e}], ratio {:.2} (tol 50)", hi / lo),
        t1,
    ));

    if (config.params.s - 0.5).abs() < 1e-12 && config.params.dim == 1 {
        let t2 = Instant::now();
        let mut worst: f64 = 0.0;
        for (r, v) in table.radii.iter().zip(table.values.iter()) {
            if *r <= 20.0 {
                let cauchy = 1.0 / (std::f64::consts::PI * (1.0 + r * r));
                worst = worst.max((v - cauchy).abs() / cauchy);
            }
        }
        report.push(item(
            "Cauchy closed form",
            worst <= 1e-6,
            format!("max relative error {worst:.2e} on |x| <= 20 (tol 1e-6)"),
            t2,
        ));
    }
    Ok(())
}

fn run_operator(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let s = config.params.s;
    let t0 = Instant::now();
    let grid = GridSpec::new(1, 64.0, 2048)?;
    let field = Field::from_fn(grid, 0.0, |x| (-0.5 * x[0] * x[0]).exp());
    let spec = spectral_apply(&field, s);
    let st = QuadSettings::default();
    let scale = spec.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut x = -10.0;
    while x <= 10.0 {
        let q =
            quadrature_apply_1d(&|y: f64| (-0.5 * y * y).exp(), s, x, &st, FarField::PowerDecay(8.0))?;
        let sp = spec.value_at(x);
        worst = worst.max((sp - q).abs() / scale);
        rows.push(vec![x, sp, q]);
        x += 1.0;
    }
    write_curve_csv(out_file(dir, "operator_comparison.csv")?, &["x", "spectral", "quadrature"], &rows)
        .map_err(io_err)?;
    report.push(item(
        "spectral vs quadrature on a Gaussian",
        worst <= 1e-2,
        format!("max relative mismatch {worst:.2e} (tol 1e-2)"),
        t0,
    ));

    let t1 = Instant::now();
    let k = std::f64::consts::PI;
    let osc = QuadSettings::for_oscillation(k);
    let mut worst_sym: f64 = 0.0;
    for &x in &[0.0, 0.3, 1.1] {
        let q = quadrature_apply_1d(&|y: f64| (k * y).cos(), s, x, &osc, FarField::Bounded)?;
        let expect = k.powf(2.0 * s) * (k * x).cos();
        worst_sym = worst_sym.max((q - expect).abs() / k.powf(2.0 * s));
    }
    report.push(item(
        "Fourier symbol on a cosine",
        worst_sym <= 1e-2,
        format!("max relative mismatch {worst_sym:.2e} at k = pi (tol 1e-2)"),
        t1,
    ));
    Ok(())
}

fn run_evolve(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    let params = config.model_params()?;
    let solver = config.solver_config()?;
    let datum = datum_from(config)?;
    let traj = solve(&datum, &params, &solver, &table)?;

    let mut mass_rows = Vec::new();
    for (i, snap) in traj.snapshots.iter().enumerate() {
        write_field_csv(out_file(dir, &format!("snapshot_{i:02}.csv"))?, snap).map_err(io_err)?;
        mass_rows.push(vec![snap.time, snap.mass(), snap.max()]);
    }
    write_curve_csv(out_file(dir, "mass_curve.csv")?, &["t", "mass", "max"], &mass_rows)
        .map_err(io_err)?;

    report.push(item(
        "run completed",
        true,
        format!("{} snapshots on t in [{:.3e}, {:.3e}]", traj.snapshots.len(), solver.t_start, solver.t_end),
        t0,
    ));
    if solver.absorption_enabled {
        report.push(universal_bound_item(&traj, Instant::now()));
    }
    let t2 = Instant::now();
    let min = traj.snapshots.iter().map(|f| f.min()).fold(f64::INFINITY, f64::min);
    let scale = traj.snapshots[0].max();
    report.push(item(
        "positivity",
        min >= -1e-10 * scale,
        format!("min u = {min:.2e} (slack 1e-10 x initial max)"),
        t2,
    ));
    Ok(())
}

fn run_dichotomy(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    let params = config.model_params()?;
    let th = config.thresholds()?;
    let (k, traj) = dirac_run(config, &table)?;
    let verdict = classify_dichotomy(&traj, &params, &th);

    let t_end = traj.snapshots.last().unwrap().time;
    for (label, t) in [("late", t_end), ("early", t_end / 4.0)] {
        let profile = rescale(&traj, t);
        let rows: Vec<Vec<f64>> = profile
            .eta
            .iter()
            .zip(profile.values.iter())
            .map(|(&e, &v)| vec![e, v])
            .collect();
        write_curve_csv(out_file(dir, &format!("profile_{label}.csv"))?, &["eta", "v"], &rows)
            .map_err(io_err)?;
    }
    report.push(item(
        "dichotomy verdict",
        verdict != DichotomyVerdict::Undetermined,
        format!("{verdict:?} at weight {k} ({})", regime_label(&params)),
        t0,
    ));
    report.push(universal_bound_item(&traj, Instant::now()));
    Ok(())
}

fn run_trace(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    let th = config.thresholds()?;
    let (k, traj) = dirac_run(config, &table)?;
    let balls: Vec<(f64, f64)> = config
        .options
        .ball_centers
        .iter()
        .map(|&c| (c, config.options.ball_radius))
        .collect();
    let rep = trace_report_with(&traj, &balls, &th);
    for (i, ball) in rep.balls.iter().enumerate() {
        let rows: Vec<Vec<f64>> = ball
            .mass_curve
            .iter()
            .zip(ball.absorption_curve.iter())
            .map(|(&(t, m), &(_, a))| vec![t, m, a])
            .collect();
        write_curve_csv(
            out_file(dir, &format!("trace_ball_{i}.csv"))?,
            &["t", "mass", "absorption_tail"],
            &rows,
        )
        .map_err(io_err)?;
        report.push(item(
            &format!("ball B_{}({})", ball.radius, ball.center),
            ball.classification != BallClass::Undetermined,
            format!(
                "{:?}, trace mass {:?}, weight {k}",
                ball.classification, ball.trace_mass
            ),
            t0,
        ));
    }
    report.push(universal_bound_item(&traj, Instant::now()));
    Ok(())
}

fn run_barrier(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let params = config.model_params()?;
    if !barrier_hypothesis_ok(&params) {
        return Err(FracError::HypothesisViolated(
            "barrier construction needs p > 1 + 2s(1+beta)/(1+2s)".into(),
        ));
    }
    let o = &config.options;
    let scan = residual_scan(&params, (-o.z_max, o.z_max), o.scan_samples, 1e-3)?;
    let lambda0 = find_lambda0_on(&scan, o.residual_tol)?;
    let amp = lambda0.powf(params.p - 1.0);
    let rows: Vec<Vec<f64>> = scan
        .z
        .iter()
        .zip(scan.base.iter().zip(scan.w_pow_p.iter()))
        .map(|(&z, (&b, &w))| vec![z, b, w, b + amp * w])
        .collect();
    write_curve_csv(
        out_file(dir, "barrier_scan.csv")?,
        &["z", "residual_base", "w_pow_p", "residual_at_lambda0"],
        &rows,
    )
    .map_err(io_err)?;
    let min_res = scan.min_residual(lambda0);
    report.push(item(
        "certified barrier amplitude",
        min_res >= -o.residual_tol,
        format!("lambda0 = {lambda0:.4}, min residual {min_res:.2e} on |z| <= {}", o.z_max),
        t0,
    ));
    Ok(())
}

fn run_blowup(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    let params = config.model_params()?;
    let solver = config.solver_config()?;
    let o = &config.options;
    let ratios =
        fraclab::analysis::blowup_experiment(o.alpha, &params, &solver, &o.n_list, &table)?;
    let rows: Vec<Vec<f64>> = ratios.iter().map(|&(n, r)| vec![n, r]).collect();
    write_curve_csv(out_file(dir, "blowup_ratios.csv")?, &["n", "ratio_to_flat"], &rows)
        .map_err(io_err)?;
    let monotone = ratios.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    let last = ratios.last().unwrap().1;
    report.push(item(
        "ratios climb toward the flat solution",
        monotone && last <= 1.0 + 1e-8,
        format!("u_n/U at probe time: last = {last:.4}, monotone = {monotone}"),
        t0,
    ));
    Ok(())
}

fn run_admissibility(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    let params = config.model_params()?;
    let th = config.thresholds()?;
    let eps: Vec<f64> =
        (1..=config.options.eps_decades).map(|i| 10f64.powi(-(i as i32))).collect();
    let datum = InitialDatum::dirac(1.0);
    let (verdict, curve) = admissibility_with(&datum, &params, &table, &eps, &th);
    let rows: Vec<Vec<f64>> = curve.iter().map(|&(e, i)| vec![e, i]).collect();
    write_curve_csv(out_file(dir, "admissibility_curve.csv")?, &["eps", "integral"], &rows)
        .map_err(io_err)?;
    report.push(item(
        "Dirac admissibility verdict",
        verdict != AdmissibilityVerdict::Inconclusive,
        format!("{verdict:?} ({})", regime_label(&params)),
        t0,
    ));
    Ok(())
}

fn run_harnack(config: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let t0 = Instant::now();
    let table = build_table(config)?;
    let (k, traj) = dirac_run(config, &table)?;
    let theta = config.options.theta;
    let m = harnack_diagnostic(&traj, theta);
    write_curve_csv(out_file(dir, "harnack.csv")?, &["theta", "m"], &[vec![theta, m]])
        .map_err(io_err)?;
    report.push(item(
        "Harnack diagnostic finite",
        m.is_finite() && m > 0.0,
        format!("M = {m:.4} at theta = {theta}, weight {k}"),
        t0,
    ));
    report.push(universal_bound_item(&traj, Instant::now()));
    Ok(())
}

fn run_selftest(dir: &Path, report: &mut Report) -> Result<()> {
    let results = fraclab::suite::run_all()?;
    for r in &results {
        println!("{}", r.line());
        report.push(ReportItem {
            name: format!("criterion {:02}: {}", r.id, r.name),
            passed: r.passed,
            detail: r.detail.clone(),
            seconds: r.seconds,
        });
    }
    fraclab::suite::write_selftest_csvs(&dir.join("csv"))?;
    Ok(())
}
