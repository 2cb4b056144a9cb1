use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::{info, warn};
use pltf::eval::binarize;
use pltf::{
    generate_cp, link_prediction_run, make_holdout, sweep_order, CooTable, Error, FitConfig, Method,
    ModelConfig, Obs, PriorDefaults, Tensor,
};
use rayon::prelude::*;

use crate::args::{EvalLinksArgs, FitArgs, GenerateArgs, ModelArgs, RunArgs, SelectArgs};
use crate::error::{io_err, CliError, CliResult};
use crate::manifest::RunManifest;

pub fn generate(a: GenerateArgs) -> CliResult {
    let dims: [usize; 3] = a
        .dims
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Usage("--dims takes exactly three values".into()))?;
    let mut m = RunManifest::new("generate", &a.out)?;
    m.set("dims", dims)?;
    m.set("rank", a.rank)?;
    m.set("prior_a", a.a)?;
    m.set("prior_b", a.b)?;
    m.set("poisson", !a.no_poisson)?;
    m.seed = Some(a.seed);
    m.write()?;

    m.phase("generate");
    let s = generate_cp::<f64>(dims, a.rank, PriorDefaults::new(a.a, a.b), a.seed, !a.no_poisson)?;

    m.phase("write");
    // Every cell is listed so a 1x1x1 draw of 0 still has an entry line.
    CooTable::from_dense(&s.data, false).write_path(m.artifact("data.coo"))?;
    for (f, z) in s.model.factors().iter().zip(&s.factors) {
        CooTable::from_dense(z, false).write_path(m.artifact(&format!("truth_{}.coo", f.name())))?;
    }
    let total: f64 = s.data.values().iter().sum();
    println!(
        "generate dims={}x{}x{} rank={} seed={} total={}",
        dims[0], dims[1], dims[2], a.rank, a.seed, total
    );
    m.finish()
}

fn resolve_model(args: &ModelArgs) -> CliResult<ModelConfig> {
    let mut cfg = match &args.config {
        Some(p) => ModelConfig::read_path(p)?,
        None => ModelConfig::default(),
    };
    if let Some(k) = args.model {
        cfg.kind = k;
    }
    if let Some(r) = args.rank {
        cfg.rank = Some(r);
    }
    if let Some(c) = &args.core_dims {
        cfg.core_dims = Some(c.clone());
    }
    if let Some(v) = args.a {
        cfg.prior_a = Some(v);
    }
    if let Some(v) = args.b {
        cfg.prior_b = Some(v);
    }
    Ok(cfg)
}

/// Data and optional mask as an observation over the given axis names.
fn load_observation(data: &Path, mask: Option<&Path>, names: Option<&[String]>, m: &mut RunManifest) -> CliResult<Obs> {
    m.input(data)?;
    let mut x = CooTable::<f64>::read_path(data)?;
    if let Some(n) = names {
        x = x.with_names(n)?;
    }
    let x = x.to_dense()?;
    let mask = match mask {
        Some(p) => {
            m.input(p)?;
            let t = CooTable::<f64>::read_path(p)?;
            if t.dims() != x.shape() {
                return Err(Error::InvalidObservation(format!(
                    "mask dims {:?} do not match data dims {:?}",
                    t.dims(),
                    x.shape()
                ))
                .into());
            }
            t.with_names(&x.index_names())?.to_dense()?
        }
        None => Tensor::ones(x.indices().to_vec())?,
    };
    Ok(Obs::new(x, mask)?)
}

fn fit_config(r: &RunArgs) -> FitConfig {
    FitConfig {
        method: r.method,
        max_iters: r.iters,
        tol: r.tol,
        seed: r.seed,
        em_prior: r.em_prior,
    }
}

fn record_run(m: &mut RunManifest, r: &RunArgs) -> CliResult {
    m.set("method", r.method.to_string())?;
    m.set("em_prior", r.em_prior.to_string())?;
    m.set("iters", r.iters)?;
    m.set("tol", r.tol)?;
    m.seed = Some(r.seed);
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(io_err(path))
}

pub fn fit(a: FitArgs) -> CliResult {
    let mut m = RunManifest::new("fit", &a.out)?;
    let cfg = resolve_model(&a.model)?;
    for (k, v) in cfg.resolved_pairs() {
        m.set(&k, v)?;
    }
    record_run(&mut m, &a.run)?;
    m.set("write_geo", a.write_geo)?;
    m.write()?;

    m.phase("load");
    if let Some(c) = &a.model.config {
        m.input(c)?;
    }
    let shape = CooTable::<f64>::read_path(&a.data)?.dims();
    let names = cfg.observed_names(shape.len());
    let obs = load_observation(&a.data, a.mask.as_deref(), Some(&names), &mut m)?;
    let model = cfg.build::<f64>(&shape)?;
    m.write()?;

    m.phase("fit");
    let res = pltf::fit(&model, &obs, &fit_config(&a.run))?;

    m.phase("write");
    for (f, s) in model.factors().iter().zip(&res.states) {
        CooTable::from_dense(s.mean(), false).write_path(m.artifact(&format!("factor_{}.coo", f.name())))?;
        if a.write_geo {
            CooTable::from_dense(s.geo_mean(), false)
                .write_path(m.artifact(&format!("factor_{}_L.coo", f.name())))?;
        }
    }
    let column = match res.method {
        Method::Vb => "bound",
        Method::Em => "divergence",
    };
    let mut csv = format!("iter,{column}\n");
    for (i, v) in res.trace().iter().enumerate() {
        writeln!(csv, "{},{}", i + 1, v).unwrap();
    }
    write_text(&m.artifact("trace.csv"), &csv)?;

    let last = res.trace().last().copied().unwrap_or(f64::NAN);
    println!(
        "fit method={} model={} iters={} converged={} {column}={last}",
        res.method, cfg.kind, res.iterations_run, res.converged
    );
    m.finish()
}

pub fn select(a: SelectArgs) -> CliResult {
    let mut m = RunManifest::new("select", &a.out)?;
    m.set("family", a.family.to_string())?;
    m.set("rmin", a.rmin)?;
    m.set("rmax", a.rmax)?;
    m.set("restarts", a.restarts)?;
    m.set("prior_a", a.a)?;
    m.set("prior_b", a.b)?;
    record_run(&mut m, &a.run)?;
    m.write()?;

    m.phase("load");
    let obs = load_observation(&a.data, a.mask.as_deref(), None, &mut m)?;
    m.write()?;

    m.phase("sweep");
    let report = sweep_order(
        a.family,
        &obs,
        a.rmin,
        a.rmax,
        a.restarts,
        PriorDefaults::new(a.a, a.b),
        &fit_config(&a.run),
    )?;

    m.phase("write");
    let mut csv = String::from("order,restart,bound\n");
    for (order, bounds) in report.orders.iter().zip(&report.restart_bounds) {
        for (r, b) in bounds.iter().enumerate() {
            writeln!(csv, "{order},{r},{b}").unwrap();
        }
    }
    writeln!(csv, "# selected_order={}", report.selected_order).unwrap();
    write_text(&m.artifact("sweep.csv"), &csv)?;
    println!("selected_order={}", report.selected_order);
    m.finish()
}

struct Cell {
    run: usize,
    seed: u64,
    missing: f64,
    method: Method,
    rank: usize,
}

pub fn eval_links(a: EvalLinksArgs) -> CliResult {
    if let Some(p) = a.missing.iter().find(|p| !(0.0..100.0).contains(*p)) {
        return Err(CliError::Usage(format!("--missing takes percentages in [0, 100), got {p}")));
    }
    let mut m = RunManifest::new("eval-links", &a.out)?;
    m.set("missing_percent", &a.missing)?;
    m.set("methods", a.methods.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
    m.set("ranks", &a.ranks)?;
    m.set("seeds", (1..=a.seeds).collect::<Vec<_>>())?;
    m.set("family", a.family.to_string())?;
    m.set("prior_a", a.a)?;
    m.set("prior_b", a.b)?;
    m.set("iters", a.iters)?;
    m.set("em_prior", a.em_prior.to_string())?;
    m.write()?;

    m.phase("load");
    m.input(&a.data)?;
    let x = binarize(&CooTable::<f64>::read_path(&a.data)?.to_dense()?);
    let dims: [usize; 3] = x.shape().try_into().map_err(|d: Vec<usize>| {
        Error::InvalidArgument(format!("link prediction needs a 3-way tensor, got {} ways", d.len()))
    })?;
    m.write()?;

    let mut cells = Vec::new();
    for &missing in &a.missing {
        for &method in &a.methods {
            for &rank in &a.ranks {
                for seed in 1..=a.seeds {
                    cells.push(Cell {
                        run: cells.len(),
                        seed,
                        missing: missing / 100.0,
                        method,
                        rank,
                    });
                }
            }
        }
    }

    m.phase("grid");
    let priors = PriorDefaults::new(a.a, a.b);
    let rows = cells
        .par_iter()
        .map(|c| -> CliResult<Option<f64>> {
            let model = a.family.build(dims, c.rank, priors)?;
            let split = make_holdout(model.observed(), c.missing, c.seed)?;
            let config = FitConfig {
                method: c.method,
                max_iters: a.iters,
                tol: 0.0,
                seed: c.seed,
                em_prior: a.em_prior,
            };
            match link_prediction_run(&model, &x, &split, &config) {
                Ok(v) => Ok(Some(v)),
                Err(e @ (Error::SingleClass | Error::EmptyTestSet)) => {
                    warn!("run {}: {e}; auc reported as NA", c.run);
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Vec<_>>();

    m.phase("write");
    let mut csv = String::from("run,seed,missing_fraction,method,rank,auc\n");
    for (c, row) in cells.iter().zip(rows) {
        let auc = match row? {
            Some(v) => v.to_string(),
            None => "NA".to_string(),
        };
        writeln!(csv, "{},{},{},{},{},{auc}", c.run, c.seed, c.missing, c.method, c.rank).unwrap();
        info!("run {} done", c.run);
    }
    write_text(&m.artifact("auc.csv"), &csv)?;
    println!("eval-links runs={}", cells.len());
    m.finish()
}
