use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fbxlab::blowup::{extract_free_boundaries, growth_radii, homogeneity_exponent, nondegeneracy_fit, GrowthFit, Phase};
use fbxlab::energy::{smoothed_energy, smoothed_gradient, total_energy, EnergyBreakdown};
use fbxlab::fields::{AnalyticField, HomogeneousTerm};
use fbxlab::mesh::{assemble_stiffness, Grid, GridFunction, ProblemParams};
use fbxlab::monotonicity::{almgren_frequency, scaled_dirichlet, weiss_energy, ScaledMode};
use fbxlab::solver::{lattice_combine, minimize, solve_aharmonic, BoundaryData, SlitSide};
use fbxlab::spherical::{solve_spectrum, ArcDomain};
use fbxlab::symmetrization::{barrier_curve_csv, barrier_energy, steiner_symmetrize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn out_dir(cfg: &ExperimentConfig, command: &str) -> PathBuf {
    cfg.output.join(command)
}

fn save_field(u: &GridFunction, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    u.save(path)?;
    Ok(())
}

fn energy_csv(cfg: &ExperimentConfig, command: &str, e: &EnergyBreakdown) -> String {
    format!("{}{}\n{}\n", cfg.header(command), EnergyBreakdown::CSV_HEADER, e.csv_row())
}

pub fn solve(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg, "solve");
    let bc = BoundaryData::from_preset(&cfg.bc, &cfg.grid)?;
    let r = minimize(&cfg.params, &bc, &cfg.schedule, &cfg.grid)?;
    save_field(&r.u, &dir.join("field.txt"))?;
    write_file(&dir.join("energy.csv"), &energy_csv(cfg, "solve", &r.energy))?;
    let phases = extract_free_boundaries(&r.u, &cfg.params, None)?;
    write_file(&dir.join("phases.csv"), &format!("{}{}", cfg.header("solve"), phases.to_csv()))?;
    let mut stages = cfg.header("solve");
    stages.push_str("eps,iterations,energy,gradient_norm,converged,line_search_failed\n");
    for s in &r.stages {
        let _ = writeln!(
            stages,
            "{:.6e},{},{:.12e},{:.6e},{},{}",
            s.eps, s.iterations, s.energy, s.gradient_norm, s.converged, s.line_search_failed
        );
    }
    write_file(&dir.join("stages.csv"), &stages)?;
    println!(
        "J = {:.10} separation = {:.6} residual = {:.3e}",
        r.energy.total, phases.separation, r.residual_off_coincidence
    );
    if r.has_warnings() {
        return Err(CliError::Numerical("a smoothing stage ended on a failed line search".into()));
    }
    Ok(())
}

pub fn aharmonic(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg, "aharmonic");
    let bc = BoundaryData::from_preset(&cfg.bc, &cfg.grid)?;
    let u = solve_aharmonic(&cfg.grid, cfg.params.a, &bc, None)?;
    save_field(&u, &dir.join("field.txt"))?;
    let e = total_energy(&u, &cfg.params)?;
    write_file(&dir.join("energy.csv"), &energy_csv(cfg, "aharmonic", &e))?;
    println!("J = {:.10}", e.total);
    Ok(())
}

fn preset_field(name: &str, grid: &Grid, a: f64) -> Result<GridFunction, CliError> {
    let term = match name {
        "zero" => return Ok(GridFunction::zeros(grid, a)?),
        "x1" => HomogeneousTerm::LinearX1,
        "odd" => HomogeneousTerm::OddPower,
        "quadratic" => HomogeneousTerm::Quadratic,
        "mixed" => HomogeneousTerm::MixedOdd,
        "slit" => HomogeneousTerm::Slit(SlitSide::Negative),
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset '{other}' (x1, odd, quadratic, mixed, slit, zero)"
            )))
        }
    };
    Ok(AnalyticField::new(a, term).to_grid(grid))
}

fn fit_row(phase: &str, x0: f64, kind: &str, fit: Result<GrowthFit, fbxlab::Error>) -> String {
    match fit {
        Ok(f) => format!("{phase},{x0:.17e},{kind},{},ok\n", f.csv_row()),
        Err(e) => format!("{phase},{x0:.17e},{kind},,,,{}\n", e.to_string().replace(',', ";")),
    }
}

pub fn diagnose(cfg: &ExperimentConfig, field: Option<&Path>, preset: Option<&str>) -> Result<(), CliError> {
    let dir = out_dir(cfg, "diagnose");
    let (u, source) = match (field, preset) {
        (Some(path), _) => {
            if !path.is_file() {
                return Err(CliError::Usage(format!("field file {} not found", path.display())));
            }
            (GridFunction::load(path)?, format!("field={}", path.display()))
        }
        (None, Some(name)) => (preset_field(name, &cfg.grid, cfg.params.a)?, format!("preset={name}")),
        (None, None) => return Err(CliError::Usage("diagnose needs --field or --preset".into())),
    };
    let p = ProblemParams::new(u.a, cfg.params.lambda_plus, cfg.params.lambda_minus)?;
    let x0 = cfg.x0;
    let reach = 1.0 - x0.abs() - 1e-12;
    let radii: Vec<f64> = cfg
        .radii
        .resolve(&u.grid)
        .into_iter()
        .filter(|&r| r <= reach)
        .collect();
    if radii.len() < 2 {
        return Err(CliError::Usage(format!("fewer than two radii fit about x0 = {x0}")));
    }
    let header = format!(
        "{}# {source} field_a={} field_n={}\n",
        cfg.header("diagnose"),
        u.a,
        u.grid.nx
    );
    let almgren = almgren_frequency(&u, x0, &radii)?;
    write_file(&dir.join("almgren.csv"), &format!("{header}{}", almgren.to_csv()))?;
    let weiss = weiss_energy(&u, x0, &p, &radii)?;
    write_file(&dir.join("weiss.csv"), &format!("{header}{}", weiss.to_csv()))?;
    let scaled = scaled_dirichlet(&u, [x0, 0.0], &radii, ScaledMode::CenteredThin)?;
    write_file(&dir.join("scaled_odd.csv"), &format!("{header}{}", scaled.odd_exponent.to_csv()))?;
    write_file(&dir.join("scaled_even.csv"), &format!("{header}{}", scaled.even_exponent.to_csv()))?;
    let phases = extract_free_boundaries(&u, &p, None)?;
    write_file(&dir.join("phases.csv"), &format!("{header}{}", phases.to_csv()))?;
    let mut fits = header.clone();
    let _ = writeln!(fits, "phase,x0,kind,{},status", GrowthFit::CSV_HEADER);
    for (phase, name) in [(Phase::Positive, "plus"), (Phase::Negative, "minus")] {
        for &g in phases.gamma(phase) {
            let rr = growth_radii(&u.grid, g, phases.separation);
            fits.push_str(&fit_row(name, g, "homogeneity", homogeneity_exponent(&u, g, &rr)));
            fits.push_str(&fit_row(name, g, "nondegeneracy", nondegeneracy_fit(&u, &phases, g, phase, &rr)));
        }
    }
    write_file(&dir.join("fits.csv"), &fits)?;
    println!(
        "almgren slack = {:.3e}  weiss slack = {:.3e}  scaled slack = {:.3e}  free boundary points = {}",
        almgren.slack,
        weiss.slack,
        scaled.odd_exponent.slack,
        phases.gamma_plus.len() + phases.gamma_minus.len()
    );
    Ok(())
}

pub fn spectrum(cfg: &ExperimentConfig, domain: &str, k: usize, elements: usize) -> Result<(), CliError> {
    let dir = out_dir(cfg, "spectrum");
    let dom = ArcDomain::parse(domain)?;
    let spec = solve_spectrum(&dom, cfg.params.a, k, elements)?;
    let header = cfg.header("spectrum");
    write_file(&dir.join("spectrum.csv"), &format!("{header}{}", spec.to_csv()))?;
    for i in 0..k {
        write_file(
            &dir.join(format!("eigenfunction_{}.csv", i + 1)),
            &format!("{header}{}", spec.eigenfunction_csv(i)),
        )?;
    }
    for (i, (l, d)) in spec.eigenvalues.iter().zip(&spec.degrees).enumerate() {
        println!("{} lambda = {l:.8} alpha = {d:.8}", i + 1);
    }
    Ok(())
}

struct SweepRow {
    a: f64,
    lambda: f64,
    energy: f64,
    separation: f64,
    gamma_plus: Vec<f64>,
    gamma_minus: Vec<f64>,
    status: String,
}

fn sweep_entry(cfg: &ExperimentConfig, a: f64, lambda: f64, dir: &Path) -> SweepRow {
    let mut row = SweepRow {
        a,
        lambda,
        energy: f64::NAN,
        separation: f64::NAN,
        gamma_plus: Vec::new(),
        gamma_minus: Vec::new(),
        status: String::new(),
    };
    let mut run = || -> Result<bool, CliError> {
        let p = ProblemParams::new(a, lambda, lambda)?;
        let bc = BoundaryData::from_preset(&cfg.bc, &cfg.grid)?;
        let r = minimize(&p, &bc, &cfg.schedule, &cfg.grid)?;
        save_field(&r.u, &dir.join("field.txt"))?;
        let phases = extract_free_boundaries(&r.u, &p, None)?;
        row.energy = r.energy.total;
        row.separation = phases.separation;
        row.gamma_plus = phases.gamma_plus;
        row.gamma_minus = phases.gamma_minus;
        Ok(r.has_warnings())
    };
    row.status = match run() {
        Ok(false) => "ok".into(),
        Ok(true) => "warning".into(),
        Err(e) => format!("error: {}", e.to_string().replace([',', '\n'], ";")),
    };
    row
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.10e}")).collect::<Vec<_>>().join(";")
}

pub fn sweep(cfg: &ExperimentConfig, a_list: &[f64], lambdas: &[f64], jobs: usize) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let dir = out_dir(cfg, "sweep");
    let entries: Vec<(usize, f64, f64)> = a_list
        .iter()
        .flat_map(|&a| lambdas.iter().map(move |&l| (a, l)))
        .enumerate()
        .map(|(k, (a, l))| (k, a, l))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        entries
            .par_iter()
            .map(|&(k, a, l)| sweep_entry(cfg, a, l, &dir.join(format!("entry_{k:03}"))))
            .collect()
    });
    let mut csv = cfg.header("sweep");
    csv.push_str("a,lambda,energy,separation,gamma_plus,gamma_minus,status\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:.12e},{:.12e},{},{},{}",
            r.a,
            r.lambda,
            r.energy,
            r.separation,
            join(&r.gamma_plus),
            join(&r.gamma_minus),
            r.status
        );
    }
    write_file(&dir.join("sweep.csv"), &csv)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!("{} entries, {failed} not ok", rows.len());
    Ok(())
}

pub fn barrier(cfg: &ExperimentConfig, eps: &[f64]) -> Result<(), CliError> {
    let dir = out_dir(cfg, "barrier");
    let csv = barrier_curve_csv(eps, &cfg.params)?;
    write_file(&dir.join("barrier.csv"), &format!("{}{csv}", cfg.header("barrier")))?;
    for &e in eps {
        println!("eps = {e} J = {:.10}", barrier_energy(e, &cfg.params)?);
    }
    Ok(())
}

pub fn symmetrize(cfg: &ExperimentConfig, field: &Path, level: f64) -> Result<(), CliError> {
    let dir = out_dir(cfg, "symmetrize");
    if !field.is_file() {
        return Err(CliError::Usage(format!("field file {} not found", field.display())));
    }
    let u = GridFunction::load(field)?;
    let (v, rep) = steiner_symmetrize(&u, level)?;
    save_field(&v, &dir.join("field.txt"))?;
    let mut csv = format!("{}# field={} level={level}\n", cfg.header("symmetrize"), field.display());
    if !rep.violating_rows.is_empty() {
        let rows: Vec<String> = rep.violating_rows.iter().map(usize::to_string).collect();
        let _ = writeln!(csv, "# rows above level: {}", rows.join(" "));
    }
    csv.push_str(&rep.to_csv());
    write_file(&dir.join("symmetrize.csv"), &csv)?;
    println!(
        "energy {:.10} -> {:.10} fixed_point = {}",
        rep.energy_before, rep.energy_after, rep.fixed_point
    );
    if rep.energy_after > rep.energy_before + 1e-10 {
        eprintln!("warning: energy increased; the field is probably not at the level on the boundary");
    }
    if !rep.violating_rows.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} rows exceed the level {level}",
            rep.violating_rows.len()
        )));
    }
    Ok(())
}

fn selftest_checks(seed: u64) -> Result<Vec<(&'static str, bool, String)>, fbxlab::Error> {
    let mut out = Vec::new();
    let g = Grid::new(33)?;

    let k = assemble_stiffness(&g, 0.3)?;
    let x1 = GridFunction::from_fn(&g, 0.3, |p| p[0]);
    let ku = k.apply(&x1.values);
    let res = (0..g.len())
        .filter(|&i| {
            let (ii, jj) = (i % g.nx, i / g.nx);
            !g.is_boundary(ii, jj)
        })
        .map(|i| ku[i].abs())
        .fold(0.0, f64::max);
    out.push(("stiffness_linear", res <= 1e-12, format!("{res:e}")));

    let a = 0.5;
    let exact = AnalyticField::new(a, HomogeneousTerm::OddPower).to_grid(&g);
    let bc = BoundaryData::from_grid_function(&exact);
    let u = solve_aharmonic(&g, a, &bc, None)?;
    let err = u.values.iter().zip(&exact.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    out.push(("aharmonic_odd_power", err <= 1e-8, format!("{err:e}")));

    let spec = solve_spectrum(&ArcDomain::UpperSemicircle, a, 1, 256)?;
    let d = (spec.degrees[0] - (1.0 - a)).abs();
    out.push(("spectrum_upper", d <= 1e-3, format!("{d:e}")));

    let p = ProblemParams::new(0.0, 1.0, 0.0)?;
    let eps: f64 = 0.01;
    let want = 2.0 * eps.sqrt() + eps * std::f64::consts::PI * (2.0 * eps.sqrt() - eps);
    let rel = ((barrier_energy(eps, &p)? - want) / want).abs();
    out.push(("barrier_closed_form", rel <= 1e-6, format!("{rel:e}")));

    let p = ProblemParams::new(0.0, 1.0, 1.0)?;
    let u0 = GridFunction::from_fn(&g, 0.0, |q| q[0]);
    let v0 = GridFunction::from_fn(&g, 0.0, |q| q[0] + 0.5);
    let res = lattice_combine(&u0, &v0, &p)?.identity_residual;
    out.push(("lattice_identity", res <= 1e-12, format!("{res:e}")));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cx, cy) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let w = GridFunction::from_fn(&g, 0.2, |[x, y]| {
        1.0 - (1.0 - x * x) * (1.0 - y * y) * (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.1).exp()
    });
    let (_, rep) = steiner_symmetrize(&w, 1.0)?;
    out.push((
        "steiner_decrease",
        rep.energy_after <= rep.energy_before + 1e-10,
        format!("{:e}", rep.energy_after - rep.energy_before),
    ));

    let p = ProblemParams::new(0.2, 1.0, 2.0)?;
    let f = GridFunction::from_fn(&g, 0.2, |[x, y]| 0.3 * x + 0.1 * y - 0.05);
    let eps = 0.2;
    let grad = smoothed_gradient(&f, &p, eps)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let node = rng.random_range(0..g.len());
        let step = 1e-6;
        let mut plus = f.values.clone();
        let mut minus = f.values.clone();
        plus[node] += step;
        minus[node] -= step;
        let fd = (smoothed_energy(&f.with_values(plus)?, &p, eps)? - smoothed_energy(&f.with_values(minus)?, &p, eps)?)
            / (2.0 * step);
        worst = worst.max((fd - grad[node]).abs() / grad[node].abs().max(1e-3));
    }
    out.push(("smoothed_gradient", worst <= 1e-5, format!("{worst:e}")));
    Ok(out)
}

pub fn selftest(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let checks = selftest_checks(cfg.seed)?;
    let mut csv = cfg.header("selftest");
    csv.push_str("check,pass,value\n");
    for (name, pass, value) in &checks {
        println!("{} {name} {value}", if *pass { "PASS" } else { "FAIL" });
        let _ = writeln!(csv, "{name},{pass},{value}");
    }
    write_file(&out_dir(cfg, "selftest").join("selftest.csv"), &csv)?;
    if checks.iter().all(|c| c.1) {
        Ok(())
    } else {
        Err(CliError::Numerical("selftest failed".into()))
    }
}
