use kramers_core::dynamics::{compare_at, time_scale, ComparisonReport, DynamicsSetup, HRun};
use kramers_core::landscape::{analyze, LandscapeReport};
use kramers_core::witten::{assemble, build_grid, effective_matrix, low_spectrum, quasimode0};
use kramers_core::{Grid, Potential, ReducedModel, SymMatrix, WellDecomposition};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{convergence_script, num, Csv, Sink};

pub struct Context<'a> {
    pub config: &'a Config,
    pub sink: Sink,
    pub pool: rayon::ThreadPool,
}

/// Landscape of the configured potential, or the hypothesis failure.
fn landscape(cfg: &Config) -> CliResult<(Potential, LandscapeReport)> {
    let pot = cfg.potential()?;
    let report = analyze(&pot, cfg.domain()?, &cfg.tolerances)?;
    Ok((pot, report))
}

fn validated(cfg: &Config) -> CliResult<(Potential, WellDecomposition)> {
    let (pot, report) = landscape(cfg)?;
    match report.decomposition {
        Some(d) if report.assumptions.all_ok() => Ok((pot, d)),
        _ => Err(CliError::Hypothesis(report.assumptions)),
    }
}

fn grid_for(cfg: &Config, pot: &Potential, d: &WellDecomposition) -> CliResult<Grid> {
    Ok(match cfg.grid_domain() {
        Some(i) => Grid::new(i.lo, i.hi, cfg.grid_n)?,
        None => build_grid(pot, d, cfg.grid_n, cfg.margin)?,
    })
}

pub fn analyze_cmd(ctx: &Context) -> CliResult<()> {
    let (pot, report) = landscape(ctx.config)?;
    #[derive(Serialize)]
    struct Out<'a> {
        potential: &'a str,
        domain: kramers_core::Interval,
        #[serde(flatten)]
        report: &'a LandscapeReport,
    }
    ctx.sink.json("landscape.json", &Out { potential: pot.source(), domain: ctx.config.domain()?, report: &report })?;
    if !report.assumptions.all_ok() {
        return Err(CliError::Hypothesis(report.assumptions));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpectrumEntry {
    h: f64,
    grid: Grid,
    nu_h: f64,
    lambda: Vec<f64>,
    count_below: usize,
    threshold: f64,
    /// `λ_k/ν_h` for `k = 2..N`.
    ratios: Vec<f64>,
    residuals: Vec<f64>,
    a_num: Option<SymMatrix>,
}

fn spectrum_at(cfg: &Config, pot: &Potential, d: &WellDecomposition, h: f64) -> CliResult<SpectrumEntry> {
    let n_wells = d.well_count();
    let w = assemble(pot, h, grid_for(cfg, pot, d)?)?;
    let spec = low_spectrum(&w, n_wells + 1, cfg.eps0)?;
    let nu_h = time_scale(h, d.s);
    let a_num = if n_wells >= 2 {
        let eps = cfg.eps_cut.unwrap_or(d.s / 8.0);
        let q0 = (0..n_wells).map(|n| quasimode0(pot, &w, d, n, eps)).collect::<Result<Vec<_>, _>>()?;
        Some(effective_matrix(&w, &spec, &q0, d.s)?.a_num)
    } else {
        None
    };
    Ok(SpectrumEntry {
        h,
        grid: w.grid,
        nu_h,
        ratios: spec.values[1..n_wells].iter().map(|l| l / nu_h).collect(),
        residuals: spec.residuals(&w),
        lambda: spec.values,
        count_below: spec.count_below,
        threshold: spec.threshold,
        a_num,
    })
}

pub fn spectrum_cmd(ctx: &Context) -> CliResult<()> {
    let cfg = ctx.config;
    let (pot, d) = validated(cfg)?;
    let hs = cfg.h_list()?;
    let entries: Vec<SpectrumEntry> =
        ctx.pool.install(|| hs.par_iter().map(|&h| spectrum_at(cfg, &pot, &d, h)).collect::<CliResult<_>>())?;

    let n = d.well_count();
    let mut header = vec!["h".to_string()];
    header.extend((1..=n + 1).map(|k| format!("lambda_{k}")));
    header.extend((2..=n).map(|k| format!("ratio_{k}")));
    let mut table = Csv::new(header);
    for e in &entries {
        let mut row = vec![num(e.h)];
        row.extend(e.lambda.iter().map(|x| num(*x)));
        row.extend(e.ratios.iter().map(|x| num(*x)));
        table.push(row);
    }
    ctx.sink.csv("spectrum.csv", &table)?;

    #[derive(Serialize)]
    struct Out<'a> {
        decomposition: &'a WellDecomposition,
        eps0: f64,
        entries: &'a [SpectrumEntry],
    }
    ctx.sink.json("spectrum.json", &Out { decomposition: &d, eps0: cfg.eps0, entries: &entries })?;
    Ok(())
}

pub fn reduce_cmd(ctx: &Context) -> CliResult<()> {
    let (_, d) = validated(ctx.config)?;
    let model = ReducedModel::from_decomposition(&d)?;
    #[derive(Serialize)]
    struct Scale {
        h: f64,
        nu_h: f64,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        decomposition: &'a WellDecomposition,
        #[serde(flatten)]
        model: &'a ReducedModel,
        time_scales: Vec<Scale>,
    }
    let time_scales = ctx.config.h_list.iter().map(|&h| Scale { h, nu_h: model.time_scale(h) }).collect();
    ctx.sink.json("reduced.json", &Out { decomposition: &d, model: &model, time_scales })?;
    Ok(())
}

fn dynamics_runs(ctx: &Context) -> CliResult<(Vec<f64>, Vec<f64>, Vec<HRun>)> {
    let cfg = ctx.config;
    let (pot, d) = validated(cfg)?;
    let beta = cfg.beta.clone().ok_or_else(|| CliError::Config("this command needs `beta`".into()))?;
    if beta.len() != d.well_count() {
        return Err(CliError::Config(format!(
            "beta has {} entries, the potential has {} wells",
            beta.len(),
            d.well_count()
        )));
    }
    let model = ReducedModel::from_decomposition(&d)?;
    let mu2 = model.eigenvalues.get(1).copied().unwrap_or(1.0);
    let taus = cfg.tau_grid.resolve(mu2);
    let setup =
        DynamicsSetup { grid_n: cfg.grid_n, grid_domain: cfg.grid_domain(), margin: cfg.margin, eps0: cfg.eps0 };
    let hs = cfg.h_list()?;
    let runs = ctx.pool.install(|| {
        hs.par_iter()
            .map(|&h| compare_at(&pot, &d, &beta, h, &taus, &setup).map_err(CliError::from))
            .collect::<CliResult<Vec<_>>>()
    })?;
    Ok((beta, taus, runs))
}

fn evolution_table(run: &HRun) -> Csv {
    let n = run.alpha.first().map_or(0, Vec::len);
    let mut header = vec!["tau".to_string()];
    header.extend((1..=n).map(|k| format!("m_{k}")));
    header.extend((1..=n).map(|k| format!("alpha_{k}")));
    header.push("l2_error".into());
    let mut table = Csv::new(header);
    for i in 0..run.taus.len() {
        let mut row = vec![num(run.taus[i])];
        row.extend(run.masses[i].iter().map(|x| num(*x)));
        row.extend(run.alpha[i].iter().map(|x| num(*x)));
        row.push(num(run.l2_error[i]));
        table.push(row);
    }
    table
}

pub fn evolve_file_name(h: f64) -> String {
    format!("evolve_h{h}.csv")
}

pub fn evolve_cmd(ctx: &Context) -> CliResult<()> {
    let (_, _, runs) = dynamics_runs(ctx)?;
    for run in &runs {
        ctx.sink.csv(&evolve_file_name(run.h), &evolution_table(run))?;
    }
    Ok(())
}

pub fn sweep_cmd(ctx: &Context) -> CliResult<()> {
    let (beta, taus, runs) = dynamics_runs(ctx)?;
    let report = ComparisonReport::from_runs(&beta, &taus, &runs);
    ctx.sink.json("comparison.json", &report)?;

    let header = ["h", "grid_n", "lambda_2_ratio", "sup_l2_error", "sup_mass_error", "sup_l1_error", "mass_drift"];
    let mut table = Csv::new(header.iter().map(|s| s.to_string()).collect());
    for r in &report.rows {
        table.push(vec![
            num(r.h),
            r.grid_n.to_string(),
            num(r.lambda_2_ratio),
            num(r.sup_l2_error),
            num(r.sup_mass_error),
            num(r.sup_l1_error),
            num(r.mass_drift),
        ]);
    }
    let csv = ctx.sink.csv("convergence.csv", &table)?;
    let script = convergence_script(&csv, &[(4, "sup L2 error"), (5, "sup mass error"), (6, "sup L1 error")]);
    ctx.sink.text("convergence.gp", &script)?;
    Ok(())
}

pub fn graph_cmd(ctx: &Context) -> CliResult<()> {
    let spec = ctx.config.graph()?;
    let model = ReducedModel::from_graph(spec)?;
    #[derive(Serialize)]
    struct Out<'a> {
        vertices: Vec<String>,
        kappa: Option<f64>,
        laplacian: &'a SymMatrix,
        eigenvalues: Vec<f64>,
        /// One eigenvector per entry, matching `eigenvalues`.
        eigenvectors: Vec<Vec<f64>>,
        kernel_vector: Vec<f64>,
    }
    let out = Out {
        vertices: spec.vertices.clone(),
        kappa: model.kappa,
        laplacian: &model.a0,
        eigenvalues: model.eigenvalues.to_vec(),
        eigenvectors: model.eigenvectors.columns().into_iter().map(|c| c.to_vec()).collect(),
        kernel_vector: model.kernel_vector.to_vec(),
    };
    ctx.sink.json("graph.json", &out)?;
    Ok(())
}
