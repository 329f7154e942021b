use std::fs;
use std::path::{Path, PathBuf};

use stadion::benchmark::{
    default_k_max, result_json, run_dataset, summarize, summary_json, BenchmarkConfig,
    RESULT_SUFFIX,
};
use stadion::dataset::{gen_synthetic, load_csv, Dataset, GeneratorSpec, LabeledDataset};
use stadion::partitions::{compare, MeasureId, Partition};
use stadion::report::{paths_csv, paths_json, paths_svg, report_json, report_svg, write_atomic};
use stadion::stability::{paths_for_grid, select_k};

use crate::config::RunConfig;
use crate::{Failure, Fixture, GenArgs};

fn load(cfg: &RunConfig) -> Result<(Dataset, Option<Partition>), Failure> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| Failure::config("data.path is required"))?;
    load_file(path, cfg)
}

fn load_file(path: &Path, cfg: &RunConfig) -> Result<(Dataset, Option<Partition>), Failure> {
    let raw = load_csv(path, &cfg.csv).map_err(Failure::at("load"))?;
    let x = raw.data.standardize().map_err(Failure::at("standardize"))?;
    Ok((x, raw.labels))
}

fn k_max(cfg: &RunConfig, labels: Option<&Partition>) -> Result<usize, Failure> {
    match (cfg.k_max, labels) {
        (Some(k), _) => Ok(k),
        (None, Some(l)) => Ok(default_k_max(l.n_nonempty())),
        (None, None) => Err(Failure::config(
            "stability.kmax is required when no label column is given",
        )),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    fs::create_dir_all(&cfg.out).map_err(|e| {
        Failure::config(format!(
            "cannot create output directory {}: {e}",
            cfg.out.display()
        ))
    })?;
    Ok(&cfg.out)
}

fn write(path: PathBuf, contents: &str) -> Result<(), Failure> {
    write_atomic(&path, contents.as_bytes()).map_err(|e| Failure {
        stage: "write",
        code: 4,
        message: e.to_string(),
    })
}

fn serialized(r: stadion::Result<String>) -> Result<String, Failure> {
    r.map_err(Failure::at("serialize"))
}

pub fn select(cfg: &RunConfig) -> Result<(), Failure> {
    let (x, labels) = load(cfg)?;
    let k_max = k_max(cfg, labels.as_ref())?;
    let grid = cfg.grid(x.n_features())?;
    let report = select_k(
        &cfg.clusterer,
        &x,
        k_max,
        &grid,
        &cfg.params,
        cfg.aggregation,
    )
    .map_err(Failure::at("select"))?;
    let dir = out_dir(cfg)?;
    if cfg.emit.json {
        write(dir.join("report.json"), &serialized(report_json(&report))?)?;
    }
    if cfg.emit.csv {
        write(dir.join("paths.csv"), &paths_csv(&report.paths))?;
    }
    if cfg.emit.svg {
        write(dir.join("paths.svg"), &report_svg(&report))?;
    }
    println!(
        "K = {} ({} aggregation; max {}, mean {})",
        report.k_hat, cfg.aggregation, report.k_hat_max, report.k_hat_mean
    );
    if let (Some(truth), Some(p)) = (&labels, report.reference(report.k_hat)) {
        if let Ok(ari) = compare(MeasureId::ARI1, truth, p) {
            println!("ARI against labels: {ari:.4}");
        }
    }
    Ok(())
}

pub fn paths(cfg: &RunConfig) -> Result<(), Failure> {
    let (x, labels) = load(cfg)?;
    let k_max = k_max(cfg, labels.as_ref())?;
    let grid = cfg.grid(x.n_features())?;
    let g = paths_for_grid(&cfg.clusterer, &x, k_max, &grid, &cfg.params)
        .map_err(Failure::at("paths"))?;
    let paths = &g.set.paths;
    let dir = out_dir(cfg)?;
    if cfg.emit.json {
        write(dir.join("paths.json"), &serialized(paths_json(paths))?)?;
    }
    if cfg.emit.csv {
        write(dir.join("paths.csv"), &paths_csv(paths))?;
    }
    if cfg.emit.svg {
        write(dir.join("paths.svg"), &paths_svg(paths, None))?;
    }
    if let Some(eps) = g.calibrated_eps_max {
        println!("calibrated eps_max = {eps}");
    }
    println!(
        "{} paths over {} noise levels",
        paths.len(),
        g.set.grid.len()
    );
    Ok(())
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let data_err = |message: String| Failure {
        stage: "load",
        code: 3,
        message,
    };
    let entries =
        fs::read_dir(dir).map_err(|e| data_err(format!("cannot list {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(data_err(format!("no .csv files in {}", dir.display())));
    }
    Ok(files)
}

pub fn benchmark(cfg: &RunConfig) -> Result<(), Failure> {
    let dir = cfg
        .data
        .as_ref()
        .ok_or_else(|| Failure::config("data.path (a directory of CSV files) is required"))?;
    if cfg.csv.label_column.is_none() {
        return Err(Failure::config("benchmark needs data.labels_col"));
    }
    let files = csv_files(dir)?;
    let out = out_dir(cfg)?;
    let mut results = Vec::new();
    for file in &files {
        let name = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (x, labels) = load_file(file, cfg).map_err(|mut f| {
            f.message = format!("{name}: {}", f.message);
            f
        })?;
        let labels = labels.ok_or_else(|| Failure {
            stage: "load",
            code: 3,
            message: format!("{name}: missing labels"),
        })?;
        let data = LabeledDataset::new(x, labels).map_err(Failure::at("load"))?;
        let bcfg = BenchmarkConfig {
            algorithm: cfg.clusterer.clone(),
            params: cfg.params.clone(),
            grid: cfg.grid(data.data.n_features())?,
            k_max: cfg.k_max,
            methods: cfg.methods.clone(),
        };
        let result = run_dataset(&name, &data, &bcfg).map_err(Failure::at("benchmark"))?;
        write(
            out.join(format!("{name}{RESULT_SUFFIX}")),
            &serialized(result_json(&result))?,
        )?;
        log::info!("{name}: done");
        results.push(result);
    }
    let summary = summarize(&results);
    write(
        out.join("summary.json"),
        &serialized(summary_json(&summary))?,
    )?;
    println!(
        "{:<20} {:>5} {:>10} {:>9} {:>9}",
        "method", "wins", "mean_rank", "mean_ari", "failures"
    );
    for m in &summary.methods {
        let ari = m
            .mean_ari
            .map_or_else(|| "-".to_string(), |a| format!("{a:.4}"));
        println!(
            "{:<20} {:>5} {:>10.3} {:>9} {:>9}",
            m.method.name(),
            m.wins,
            m.mean_rank,
            ari,
            m.failures
        );
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = match args.fixture {
        Fixture::ThreeBlobs => GeneratorSpec::three_blobs(args.n),
        Fixture::Letters => GeneratorSpec::letters(args.n),
        Fixture::UniformCube => GeneratorSpec::UniformCube {
            dim: args.dim,
            n: args.n,
        },
        Fixture::SingleGaussian => GeneratorSpec::single_gaussian(args.dim, args.n),
        Fixture::Golfball => GeneratorSpec::golfball(args.n),
        Fixture::Correlated => GeneratorSpec::two_correlated_gaussians(args.n),
        Fixture::Corner => GeneratorSpec::four_clusters_corner(),
    };
    let data = gen_synthetic(&spec, args.seed).map_err(Failure::at("generate"))?;
    let csv = data
        .data
        .to_csv(Some(&data.labels))
        .map_err(Failure::at("generate"))?;
    write(args.out.clone(), &csv)?;
    println!(
        "wrote {} rows, {} features, {} classes to {}",
        data.data.n_samples(),
        data.data.n_features(),
        data.n_classes(),
        args.out.display()
    );
    Ok(())
}
