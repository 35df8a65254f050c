use super::{BasisArgs, Command, RunConfig, SampleMethod};
use crate::basis::{EigenBasis, FunctionKind, Process};
use crate::error::{OismError, Result};
use crate::generative::{log_density_batch, sample_pf_ode, sample_reverse_sde};
use crate::io::{
    load_model, read_points_csv, save_model, sha256_file, write_density_csv, write_json,
    write_points_csv, ModelFile, ModelProvenance,
};
use crate::pipeline::{default_study_taus, fit_model, loss_study, summarize, FitSettings, LossStudyConfig};
use crate::quadrature::{periodic_nodes, trapezoid};
use crate::targets::{
    bart_simpson, rescale_to_torus, sample_mixture, toy2d, DomainMap, GaussianMixture, Toy2d,
};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

fn merge_basis(cfg: &mut RunConfig, b: &BasisArgs) {
    if let Some(v) = b.basis {
        cfg.basis = v;
    }
    if b.max_freq.is_some() {
        cfg.max_freq = b.max_freq;
    }
    if b.eigenvalue_floor.is_some() {
        cfg.eigenvalue_floor = b.eigenvalue_floor;
    }
    if b.extended_floor.is_some() {
        cfg.extended_floor = b.extended_floor;
    }
    if b.order.is_some() {
        cfg.order = b.order;
    }
    if b.extended_order.is_some() {
        cfg.extended_order = b.extended_order;
    }
}

/// Command-line flags override values from the config file.
pub(super) fn merge(cfg: &mut RunConfig, command: &Command) {
    macro_rules! set {
        ($field:ident, $v:expr) => {
            if let Some(v) = $v {
                cfg.$field = v;
            }
        };
    }
    match command {
        Command::GenData(a) => {
            if a.target.is_some() {
                cfg.target = a.target.clone();
            }
            if a.n.is_some() {
                cfg.n = a.n;
            }
            set!(dimension, a.dimension);
        }
        Command::Fit(a) => {
            if a.data.is_some() {
                cfg.data = a.data.clone();
            }
            merge_basis(cfg, &a.basis);
            set!(shrinkage, a.shrinkage);
            set!(shrink_extended, a.shrink_extended);
            set!(grid_size, a.grid_size);
            if a.schedule.is_some() {
                cfg.schedule = a.schedule;
            }
            if a.map_to_torus {
                cfg.map_to_torus = true;
            }
            set!(margin, a.margin);
        }
        Command::Sample(a) => {
            if a.model.is_some() {
                cfg.model = a.model.clone();
            }
            if a.n.is_some() {
                cfg.n = a.n;
            }
            set!(method, a.method);
            set!(sde_steps, a.sde_steps);
            set!(torus_prior, a.torus_prior);
            if let Some(v) = a.rtol {
                cfg.integrator.rtol = v;
            }
            if let Some(v) = a.atol {
                cfg.integrator.atol = v;
            }
        }
        Command::Density(a) => {
            if a.model.is_some() {
                cfg.model = a.model.clone();
            }
            if a.nodes.is_some() {
                cfg.nodes = a.nodes;
            }
            set!(lo, a.lo);
            set!(hi, a.hi);
            if let Some(v) = a.rtol {
                cfg.integrator.rtol = v;
            }
            if let Some(v) = a.atol {
                cfg.integrator.atol = v;
            }
        }
        Command::LossStudy(a) => {
            if a.target.is_some() {
                cfg.target = a.target.clone();
            }
            set!(sizes, a.sizes.clone());
            set!(replications, a.replications);
            set!(n_data, a.n_data);
            if a.taus.is_some() {
                cfg.taus = a.taus.clone();
            }
            set!(shrink_extended, a.shrink_extended);
        }
        Command::EigenReport(a) => {
            merge_basis(cfg, &a.basis);
            set!(dimension, a.dimension);
        }
    }
}

#[derive(Serialize)]
struct FileRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Provenance<'a> {
    command: &'a str,
    version: &'static str,
    seed: u64,
    run: &'a RunConfig,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    details: serde_json::Value,
}

fn record(path: &Path) -> Result<FileRecord> {
    Ok(FileRecord {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

fn emit_provenance(
    command: &str,
    cfg: &RunConfig,
    main_out: &Path,
    inputs: &[&Path],
    outputs: &[&Path],
    details: serde_json::Value,
) -> Result<()> {
    let prov = Provenance {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        run: cfg,
        inputs: inputs.iter().map(|p| record(p)).collect::<Result<_>>()?,
        outputs: outputs.iter().map(|p| record(p)).collect::<Result<_>>()?,
        details,
    };
    write_json(&sidecar(main_out), &prov)
}

fn out_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn require<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| OismError::Config(format!("missing required setting `{name}`")))
}

fn with_resolved(cfg: &RunConfig, out: &Path) -> RunConfig {
    let mut c = cfg.clone();
    c.out = Some(out.to_path_buf());
    c
}

pub(super) fn dispatch(command: &Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::GenData(_) => gen_data(cfg),
        Command::Fit(_) => fit(cfg),
        Command::Sample(_) => sample(cfg),
        Command::Density(_) => density(cfg),
        Command::LossStudy(_) => study(cfg),
        Command::EigenReport(_) => eigen_report(cfg),
    }
}

fn gen_data(cfg: &RunConfig) -> Result<()> {
    let target = require(&cfg.target, "target")?.clone();
    let n = cfg.n.unwrap_or(2000);
    let out = out_path(cfg, "data.csv");
    let cfg = with_resolved(cfg, &out);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = match target.replace('_', "-").as_str() {
        "bart-simpson" => sample_mixture(&bart_simpson(), n, &mut rng)?,
        "standard-normal" => {
            sample_mixture(&GaussianMixture::standard_normal(cfg.dimension), n, &mut rng)?
        }
        other => {
            let kind: Toy2d = other
                .parse()
                .map_err(|_| OismError::Config(format!("unknown target {target:?}")))?;
            toy2d(kind, n, &mut rng)?
        }
    };
    write_points_csv(&out, &data.points)?;
    emit_provenance(
        "gen-data",
        &cfg,
        &out,
        &[],
        &[&out],
        serde_json::json!({"source": data.source, "domain_map": data.domain_map, "rows": n}),
    )?;
    println!("wrote {} rows to {}", n, out.display());
    Ok(())
}

fn fit(cfg: &RunConfig) -> Result<()> {
    let data_path = require(&cfg.data, "data")?.clone();
    let out = out_path(cfg, "model.json");
    let cfg = with_resolved(cfg, &out);
    let raw = read_points_csv(&data_path)?;
    if raw.nrows() < 2 {
        return Err(OismError::invalid("data set needs at least two rows"));
    }
    let d = raw.ncols();
    let spec = cfg.basis_spec(d)?;
    let process = cfg.process();
    let mut wrapped = 0;
    let (points, map) = match process {
        Process::TruncatedBm if cfg.map_to_torus => {
            let (ds, map) = rescale_to_torus(&raw, cfg.margin)?;
            (ds.points, map)
        }
        Process::TruncatedBm => {
            let mut ds = crate::targets::Dataset::new(raw, "csv");
            if ds.points.iter().any(|v| !v.is_finite()) {
                let row = ds
                    .points
                    .outer_iter()
                    .position(|r| r.iter().any(|v| !v.is_finite()))
                    .unwrap_or(0);
                return Err(OismError::Domain {
                    row,
                    detail: "non-finite coordinate".into(),
                });
            }
            wrapped = ds.wrap_into_torus();
            (ds.points, DomainMap::identity(d))
        }
        Process::Ou => (raw, DomainMap::identity(d)),
    };
    if wrapped > 0 {
        eprintln!("wrapped {wrapped} of {} rows into [-pi, pi]^{d}", points.nrows());
    }
    let settings = FitSettings {
        basis: spec,
        schedule: cfg.schedule(),
        shrinkage: cfg.shrinkage,
        shrink_extended: cfg.shrink_extended,
        grid_size: cfg.grid_size,
    };
    let fit = fit_model(&points, &settings, map)?;
    let diags = fit.model.diagnostics();
    let worst = diags
        .iter()
        .max_by(|a, b| a.condition.total_cmp(&b.condition))
        .expect("nonempty grid");
    let max_res = diags.iter().map(|g| g.residual).fold(0.0, f64::max);
    let regularized = diags.iter().filter(|g| g.regularized).count();
    println!(
        "fitted {} coefficients on {} grid nodes; max condition {:.3e} at tau = {:.4}; max residual {:.3e}; regularized nodes {}",
        fit.model.basis().n_coefficients(),
        diags.len(),
        worst.condition,
        worst.tau,
        max_res,
        regularized
    );
    let provenance = ModelProvenance {
        seed: cfg.seed,
        dataset_hash: Some(sha256_file(&data_path)?),
        shrinkage: cfg.shrinkage,
        shrink_extended: cfg.shrink_extended,
        n_samples: points.nrows(),
    };
    save_model(&out, &ModelFile::from_model(&fit.model, Some(&fit.moments), Some(provenance)))?;
    emit_provenance(
        "fit",
        &cfg,
        &out,
        &[&data_path],
        &[&out],
        serde_json::json!({"wrapped_rows": wrapped, "max_condition": worst.condition, "max_residual": max_res}),
    )
}

fn sample(cfg: &RunConfig) -> Result<()> {
    let model_path = require(&cfg.model, "model")?.clone();
    let out = out_path(cfg, "samples.csv");
    let cfg = with_resolved(cfg, &out);
    let (model, _) = load_model(&model_path)?;
    let n = cfg.n.unwrap_or(1000);
    let pts = match cfg.method {
        SampleMethod::PfOde => sample_pf_ode(&model, n, &cfg.integrator, cfg.torus_prior, cfg.seed)?,
        SampleMethod::ReverseSde => {
            sample_reverse_sde(&model, n, cfg.sde_steps, cfg.torus_prior, cfg.seed)?
        }
    };
    let pts = model.domain_map().invert_rows(&pts);
    write_points_csv(&out, &pts)?;
    emit_provenance("sample", &cfg, &out, &[&model_path], &[&out], serde_json::Value::Null)?;
    println!("wrote {n} samples to {}", out.display());
    Ok(())
}

/// Tensor grid with quadrature weights for a model's domain.
pub(crate) fn density_grid(process: Process, d: usize, nodes: usize, lo: f64, hi: f64) -> Result<(Array2<f64>, Vec<f64>)> {
    if d > 2 {
        return Err(OismError::Unsupported(format!("density grids in dimension {d}")));
    }
    if nodes < 2 {
        return Err(OismError::Config("density grid needs at least two nodes".into()));
    }
    let (axis, w): (Vec<f64>, Vec<f64>) = match process {
        Process::TruncatedBm => {
            let (x, h) = periodic_nodes(nodes);
            let w = vec![h; nodes];
            (x, w)
        }
        Process::Ou => trapezoid(lo, hi, nodes),
    };
    let total = nodes.pow(d as u32);
    let mut pts = Array2::zeros((total, d));
    let mut weights = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut wt = 1.0;
        // last coordinate varies fastest
        for j in (0..d).rev() {
            let k = rem % nodes;
            rem /= nodes;
            pts[[idx, j]] = axis[k];
            wt *= w[k];
        }
        weights.push(wt);
    }
    Ok((pts, weights))
}

fn density(cfg: &RunConfig) -> Result<()> {
    let model_path = require(&cfg.model, "model")?.clone();
    let out = out_path(cfg, "density.csv");
    let cfg = with_resolved(cfg, &out);
    let (model, _) = load_model(&model_path)?;
    let d = model.dimension();
    let nodes = cfg.nodes.unwrap_or(if d == 1 { 4096 } else { 256 });
    let (pts, w) = density_grid(model.process(), d, nodes, cfg.lo, cfg.hi)?;
    let ld = log_density_batch(&model, &pts, &cfg.integrator)?;
    let mass: f64 = ld.iter().zip(&w).map(|(l, w)| l.exp() * w).sum();
    write_density_csv(&out, &pts, &ld)?;
    emit_provenance(
        "density",
        &cfg,
        &out,
        &[&model_path],
        &[&out],
        serde_json::json!({"grid_mass": mass}),
    )?;
    println!("wrote {} grid points to {}; grid mass {:.6}", pts.nrows(), out.display(), mass);
    Ok(())
}

fn study(cfg: &RunConfig) -> Result<()> {
    let target = cfg.target.clone().unwrap_or_else(|| "bart-simpson".into());
    if target.replace('_', "-") != "bart-simpson" {
        return Err(OismError::Unsupported(format!(
            "loss study reference target {target:?}; only bart-simpson has a closed-form marginal score"
        )));
    }
    let out = out_path(cfg, "loss_study.csv");
    let mut cfg = with_resolved(cfg, &out);
    let schedule = cfg.schedule();
    if cfg.schedule.is_none() && cfg.process() != Process::TruncatedBm {
        return Err(OismError::Unsupported("loss study runs on the trig basis only".into()));
    }
    let taus = cfg.taus.clone().unwrap_or_else(|| default_study_taus(&schedule));
    cfg.taus = Some(taus.clone());
    let study_cfg = LossStudyConfig {
        sizes: cfg.sizes.clone(),
        replications: cfg.replications,
        n_data: cfg.n_data,
        taus,
        schedule,
        shrink_extended: cfg.shrink_extended,
        seed: cfg.seed,
    };
    let records = loss_study(&bart_simpson(), &study_cfg)?;
    let mut w = csv::Writer::from_path(&out)?;
    for r in &records {
        w.serialize(r)?;
    }
    w.flush()?;
    let summary_path = {
        let mut s = out.as_os_str().to_owned();
        s.push(".summary.csv");
        PathBuf::from(s)
    };
    let summary = summarize(&records, &study_cfg);
    let mut w = csv::Writer::from_path(&summary_path)?;
    for s in &summary {
        w.serialize(s)?;
        println!(
            "size {:>3} tau {:.4}: sample mean {:.5e} ± {:.1e}, shrinkage {:.5e} ± {:.1e}",
            s.size, s.tau, s.sample_mean_mean, s.sample_mean_se, s.shrinkage_mean, s.shrinkage_se
        );
    }
    w.flush()?;
    emit_provenance(
        "loss-study",
        &cfg,
        &out,
        &[],
        &[&out, &summary_path],
        serde_json::Value::Null,
    )
}

fn eigen_report(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.basis_spec(cfg.dimension)?;
    let basis = EigenBasis::from_spec(&spec)?;
    let nonconst = basis.n_coefficients();
    let frequencies = basis
        .functions()
        .iter()
        .filter(|f| f.kind == FunctionKind::Cos)
        .count();
    let mut report = String::new();
    report += &format!("process: {:?}\n", basis.process());
    report += &format!("dimension: {}\n", basis.dimension());
    report += &format!("basis functions (with constant): {}\n", basis.len());
    report += &format!("non-constant functions: {nonconst}\n");
    if basis.process() == Process::TruncatedBm {
        report += &format!("canonical frequencies (each with cos and sin): {frequencies}\n");
    }
    report += &format!("extended functions: {}\n", basis.extended().len());
    for (i, f) in basis.functions().iter().enumerate() {
        report += &format!(
            "{i:>6} {:<8} {:?} {}\n",
            format!("{:?}", f.kind).to_lowercase(),
            f.index,
            f.eigenvalue
        );
    }
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(report.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        r => r?,
    }
    if let Some(out) = &cfg.out {
        write_json(
            out,
            &serde_json::json!({
                "descriptor": basis.descriptor(),
                "functions": basis.len(),
                "non_constant": nonconst,
                "frequencies": frequencies,
                "extended": basis.extended().len(),
            }),
        )?;
        emit_provenance("eigen-report", cfg, out, &[], &[out], serde_json::Value::Null)?;
    }
    Ok(())
}
