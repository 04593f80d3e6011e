use std::path::Path;

use mehler_core::bridge::{interpolate_marginal, normalize, sinkhorn_solve, BridgeProblem};
use mehler_core::kernels::KernelEvaluator;
use mehler_core::quadrature::{propagate, Field};
use mehler_core::spectral::{decompose, to_modal};
use mehler_core::verify::{run_suite, CheckName, SuiteConfig};
use mehler_core::weyl::{log_symbol_h, SymbolPoint};
use mehler_core::{SpectralData64, TimeWindow64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{
    BridgeConfig, KernelEvalConfig, PropagateConfig, SymbolEvalConfig, VerifyConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{coord_header, fmt, write_csv, write_json, Sink};

const MAX_PROBE_ROWS: usize = 10_000_000;

fn field_rows(field: &Field<f64>, columns: &[&[f64]]) -> Vec<Vec<String>> {
    field
        .grid()
        .points()
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.iter()
                .map(|&v| fmt(v))
                .chain(columns.iter().map(|c| fmt(c[i])))
                .collect()
        })
        .collect()
}

fn check_dim(what: &str, got: usize, n: usize) -> CliResult<()> {
    if got != n {
        return Err(CliError::Config(format!(
            "{what} has dimension {got}, rate has {n}"
        )));
    }
    Ok(())
}

pub fn kernel_eval(cfg: &KernelEvalConfig, sink: &Sink) -> CliResult<()> {
    let rate = cfg.rate.build()?;
    let n = rate.dim();
    let dec = decompose(&rate)?;
    let window = cfg.window.build()?;

    let mut probes: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for (i, p) in cfg.probes.iter().enumerate() {
        check_dim(&format!("probe {i} x"), p.x.len(), n)?;
        check_dim(&format!("probe {i} y"), p.y.len(), n)?;
        probes.push((p.x.clone(), p.y.clone(), p.tau.unwrap_or(window.tau())));
    }
    if let Some(g) = &cfg.probe_grid {
        let grid = g.build()?;
        check_dim("probe_grid", grid.dim(), n)?;
        if grid.len().saturating_mul(grid.len()) > MAX_PROBE_ROWS {
            return Err(CliError::Config(format!(
                "probe_grid yields {}² rows, above {MAX_PROBE_ROWS}",
                grid.len()
            )));
        }
        let pts = grid.points();
        for x in &pts {
            for y in &pts {
                probes.push((x.clone(), y.clone(), window.tau()));
            }
        }
    }
    if probes.is_empty() {
        return Err(CliError::Config(
            "no probes: give `probes` or `probe_grid`".into(),
        ));
    }
    if let Some((i, (_, _, tau))) = probes.iter().enumerate().find(|(_, p)| !(p.2 > 0.0)) {
        return Err(CliError::Config(format!(
            "probe {i} has elapsed time {tau}; at t = t0 the kernel degenerates to the delta \
             initial condition and has no pointwise value"
        )));
    }

    let ev = KernelEvaluator::new(dec, window)?;
    let rows = probes
        .par_iter()
        .map(|(x, y, tau)| {
            let ev = ev.with_window(TimeWindow64::new(window.t0(), window.t0() + tau)?)?;
            let lk = ev.log_kernel_original(x, y)?;
            Ok(x.iter()
                .chain(y)
                .map(|&v| fmt(v))
                .chain([fmt(lk), fmt(lk.exp())])
                .collect())
        })
        .collect::<mehler_core::Result<Vec<Vec<String>>>>()?;
    let mut header = coord_header("x", n);
    header.extend(coord_header("y", n));
    header.extend(["log_kappa".to_string(), "kappa".to_string()]);
    write_csv(sink.open("kernel.csv")?, &header, &rows)
}

pub fn symbol_eval(cfg: &SymbolEvalConfig, sink: &Sink) -> CliResult<()> {
    let rate = cfg.rate.build()?;
    let n = rate.dim();
    let dec: SpectralData64 = decompose(&rate)?;
    let window = cfg.window.build()?;
    if cfg.points.is_empty() {
        return Err(CliError::Config("no symbol points given".into()));
    }
    let rows = cfg
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            check_dim(&format!("point {i} x"), p.x.len(), n)?;
            check_dim(&format!("point {i} xi"), p.xi.len(), n)?;
            // the symbol is invariant under the joint rotation of x and ξ
            let modal = SymbolPoint::new(to_modal(&dec, &p.x)?, to_modal(&dec, &p.xi)?)?;
            let lh = log_symbol_h(&dec, &modal, &window)?;
            Ok(p.x
                .iter()
                .chain(&p.xi)
                .map(|&v| fmt(v))
                .chain([fmt(lh), fmt(lh.exp())])
                .collect())
        })
        .collect::<CliResult<Vec<Vec<String>>>>()?;
    let mut header = coord_header("x", n);
    header.extend(coord_header("xi", n));
    header.extend(["log_h".to_string(), "h".to_string()]);
    write_csv(sink.open("symbol.csv")?, &header, &rows)
}

pub fn propagate_cmd(cfg: &PropagateConfig, base: &Path, sink: &Sink) -> CliResult<()> {
    let rate = cfg.rate.build()?;
    let window = cfg.window.build()?;
    let grid = cfg.grid.build()?;
    let out_grid = match &cfg.out_grid {
        Some(g) => g.build()?,
        None => grid.clone(),
    };
    let phi0 = cfg.initial.load(&grid, base)?;
    let phi = propagate(&phi0, &rate, &window, &out_grid)?;

    let m = phi.moments();
    let join = |v: &[f64]| v.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(";");
    eprintln!(
        "mass={} mean={} variance={}",
        fmt(m.mass),
        join(&m.mean),
        join(&m.variance)
    );

    let mut header = coord_header("x", out_grid.dim());
    header.push("value".into());
    write_csv(
        sink.open("field.csv")?,
        &header,
        &field_rows(&phi, &[phi.values()]),
    )
}

pub fn verify_cmd(cfg: &VerifyConfig, sink: &Sink) -> CliResult<()> {
    let checks = match &cfg.checks {
        Some(c) if c.is_empty() => return Err(CliError::Config("empty check selection".into())),
        Some(c) => c.clone(),
        None => CheckName::ALL.to_vec(),
    };
    let suite = SuiteConfig {
        checks,
        rate: cfg.rate.as_ref().map(|r| r.build()).transpose()?,
        sign_override: cfg.sign()?,
    };
    let mut report = run_suite(&suite)?;
    if !cfg.timings {
        report.strip_timings();
    }
    write_json(sink.open("report.json")?, &report)?;
    if report.all_pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

pub fn bridge_cmd(cfg: &BridgeConfig, base: &Path, sink: &Sink) -> CliResult<()> {
    let grid = cfg.grid.build()?;
    let (rho0, mass0) = normalize(&cfg.rho0.load(&grid, base)?)?;
    let (rho1, mass1) = normalize(&cfg.rho1.load(&grid, base)?)?;
    let window = cfg.window.build()?;
    let mut problem = BridgeProblem::new(rho0, rho1, cfg.rate.build()?, window)?;
    if cfg.tol.is_some() || cfg.max_iter.is_some() {
        let (tol, max_iter) = (
            cfg.tol.unwrap_or(problem.tol),
            cfg.max_iter.unwrap_or(problem.max_iter),
        );
        problem = problem.with_tolerance(tol, max_iter);
    }
    let solution = sinkhorn_solve(&problem)?;

    let history: Vec<Vec<String>> = solution
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, &r)| vec![(i + 1).to_string(), fmt(r)])
        .collect();
    write_csv(
        sink.open("residuals.csv")?,
        &["iteration".into(), "residual".into()],
        &history,
    )?;

    let mut header = coord_header("x", grid.dim());
    header.extend(["a".to_string(), "b".to_string()]);
    write_csv(
        sink.open("potentials.csv")?,
        &header,
        &field_rows(&solution.a, &[solution.a.values(), solution.b.values()]),
    )?;

    let mut marginals = Vec::new();
    if solution.converged {
        let mut header = coord_header("x", grid.dim());
        header.push("density".into());
        for (k, &t) in cfg.marginals.iter().enumerate() {
            let m = interpolate_marginal(&problem, &solution, t)?;
            let name = format!("marginal_{k}.csv");
            write_csv(
                sink.open(&name)?,
                &header,
                &field_rows(&m.density, &[m.density.values()]),
            )?;
            marginals.push(json!({ "t": t, "file": name, "renormalization": m.renormalization }));
        }
    }

    let summary = json!({
        "converged": solution.converged,
        "iterations": solution.iterations,
        "final_residual": solution.final_residual(),
        "tol": problem.tol,
        "max_iter": problem.max_iter,
        "log_shift": solution.log_shift,
        "boundary_ratio": problem.boundary_ratio(),
        "input_mass": { "rho0": mass0, "rho1": mass1 },
        "marginals": marginals,
        "metadata": { "version": env!("CARGO_PKG_VERSION") },
    });
    write_json(sink.open("summary.json")?, &summary)?;
    solution.ensure_converged()?;
    Ok(())
}
