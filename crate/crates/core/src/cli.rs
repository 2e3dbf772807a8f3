//! Command-line front end: `compute`, `perturb`, `eval`, `dist` and `pca`.
//!
//! Exit codes: 0 success, 1 failure (including partial batch failure),
//! 2 usage error. Logging is controlled by `LESI_LOG`.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::descriptor::{
    compute_lesi, compute_shape_dna, read_descriptors, write_descriptors, Descriptor, LesiOptions,
    ShapeDnaNormalization, ShapeDnaOptions, DEFAULT_DIMENSION,
};
use crate::error::{Error, Result};
use crate::eval::{distance_matrix, knn_classify_cv, pca_2d, retrieval_measures, retrieval_table_csv};
use crate::graph::KernelPolicy;
use crate::mesh::{load_mesh, write_mesh, Mesh, MeshFormat, WriteFormat};
use crate::perturb::{random_scale_factors, PerturbKind, PerturbSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lesi", version, about = "Spectral shape descriptors for polygon meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one descriptor per input mesh (JSON lines).
    Compute(ComputeArgs),
    /// Write perturbed copies of the input meshes as OFF files.
    Perturb(PerturbArgs),
    /// Distance matrix, retrieval table and optional PCA / classification reports.
    Eval(EvalArgs),
    /// Pairwise descriptor distance matrix as CSV.
    Dist(SimpleArgs),
    /// 2D PCA coordinates as CSV.
    Pca(SimpleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DescriptorChoice {
    Lesi,
    Shapedna,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Mesh files or directories (searched recursively).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    pub d: usize,
    /// `adaptive` or `fixed:<t>`.
    #[arg(long, default_value = "adaptive", value_parser = parse_kernel)]
    pub kernel: KernelPolicy,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = DescriptorChoice::Lesi)]
    pub descriptor: DescriptorChoice,
    /// Shape-DNA only: divide by the first eigenvalue without taking logs.
    #[arg(long)]
    pub ratio: bool,
    /// CSV of `name,label` overriding the parent-directory class label.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Noise level as a fraction of the bounding-box diagonal.
    #[arg(long, group = "kind")]
    pub noise: Option<f64>,
    #[arg(long, group = "kind")]
    pub scale: Option<f64>,
    /// Comma-separated factors; one is drawn per mesh.
    #[arg(long, group = "kind", value_delimiter = ',')]
    pub scale_random: Option<Vec<f64>>,
    /// Fraction of vertices to keep.
    #[arg(long, group = "kind")]
    pub downsample: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Descriptor file (JSON lines).
    pub descriptors: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Method name for the retrieval table (defaults to the descriptor kind).
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub pca: bool,
    #[arg(long)]
    pub cv: bool,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimpleArgs {
    pub descriptors: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn parse_kernel(s: &str) -> std::result::Result<KernelPolicy, String> {
    if s == "adaptive" {
        return Ok(KernelPolicy::Adaptive);
    }
    let t = s
        .strip_prefix("fixed:")
        .ok_or_else(|| format!("expected 'adaptive' or 'fixed:<t>', got {s:?}"))?
        .parse::<f64>()
        .map_err(|e| e.to_string())?;
    if t > 0.0 && t.is_finite() {
        Ok(KernelPolicy::Fixed(t))
    } else {
        Err(format!("kernel scale must be positive, got {t}"))
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("LESI_LOG", "warn")).try_init();
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Compute(a) => cmd_compute(&a),
        Command::Perturb(a) => cmd_perturb(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Dist(a) => cmd_dist(&a),
        Command::Pca(a) => cmd_pca(&a),
    };
    match outcome {
        Ok(BatchOutcome { failed: 0 }) => EXIT_OK,
        Ok(BatchOutcome { failed }) => {
            error!("{failed} input(s) failed");
            EXIT_FAILURE
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOutcome {
    pub failed: usize,
}

/// A mesh file found under one of the input arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct InputMesh {
    pub path: PathBuf,
    /// Path relative to the input argument it was found under.
    pub relative: PathBuf,
}

fn is_mesh_file(path: &Path) -> bool {
    match MeshFormat::from_path(path) {
        // A TOSCA pair is read once, through its `.vert` file.
        Some(MeshFormat::Tosca) => path.extension().is_some_and(|e| e.eq_ignore_ascii_case("vert")),
        Some(_) => true,
        None => false,
    }
}

/// Expands files and directories into a sorted list of mesh files.
pub fn collect_inputs(inputs: &[PathBuf]) -> Vec<InputMesh> {
    let mut out = Vec::new();
    for root in inputs {
        if root.is_dir() {
            for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
                match entry {
                    Ok(e) if e.file_type().is_file() && is_mesh_file(e.path()) => {
                        let relative = e.path().strip_prefix(root).unwrap_or(e.path()).to_path_buf();
                        out.push(InputMesh {
                            path: e.path().to_path_buf(),
                            relative,
                        });
                    }
                    Ok(_) => {}
                    Err(e) => warn!("skipping unreadable entry under {}: {e}", root.display()),
                }
            }
        } else {
            // Files keep their parent directory so class labels survive mirroring.
            let relative = match (root.parent().and_then(|p| p.file_name()), root.file_name()) {
                (Some(parent), Some(file)) => Path::new(parent).join(file),
                _ => root.clone(),
            };
            out.push(InputMesh {
                path: root.clone(),
                relative,
            });
        }
    }
    out.sort();
    out.dedup();
    out
}

fn default_label(path: &Path) -> String {
    path.parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .unwrap_or("")
        .to_string()
}

fn read_manifest(path: &Path) -> Result<HashMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
    let mut map = HashMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.len() < 2 {
            continue;
        }
        let (name, label) = (rec[0].trim(), rec[1].trim());
        if i == 0 && name.eq_ignore_ascii_case("name") {
            continue;
        }
        map.insert(name.to_string(), label.to_string());
    }
    Ok(map)
}

fn load_labelled(input: &InputMesh, manifest: Option<&HashMap<String, String>>) -> Result<Mesh> {
    let mesh = load_mesh(&input.path)?;
    let label = manifest
        .and_then(|m| m.get(&mesh.name).cloned())
        .unwrap_or_else(|| default_label(&input.path));
    Ok(mesh.with_label(label))
}

pub fn cmd_compute(a: &ComputeArgs) -> std::result::Result<BatchOutcome, CliError> {
    if a.d == 0 {
        return Err(CliError::Usage("--d must be at least 1".into()));
    }
    if a.ratio && a.descriptor != DescriptorChoice::Shapedna {
        return Err(CliError::Usage("--ratio applies to --descriptor shapedna only".into()));
    }
    let inputs = collect_inputs(&a.inputs);
    if inputs.is_empty() {
        return Err(CliError::Usage("no input meshes matched".into()));
    }
    let manifest = a.manifest.as_deref().map(read_manifest).transpose()?;

    let results: Vec<Result<Descriptor>> = inputs
        .par_iter()
        .map(|input| {
            let mesh = load_labelled(input, manifest.as_ref())?;
            match a.descriptor {
                DescriptorChoice::Lesi => {
                    let mut opts = LesiOptions {
                        d: a.d,
                        kernel: a.kernel,
                        normalize: a.normalize,
                        ..Default::default()
                    };
                    opts.eigen.tol = a.tol;
                    opts.eigen.seed = a.seed;
                    compute_lesi(&mesh, &opts)
                }
                DescriptorChoice::Shapedna => {
                    let mut opts = ShapeDnaOptions {
                        d: a.d,
                        normalization: match (a.normalize, a.ratio) {
                            (_, true) => ShapeDnaNormalization::Ratio,
                            (true, false) => ShapeDnaNormalization::LogRatio,
                            (false, false) => ShapeDnaNormalization::None,
                        },
                        ..Default::default()
                    };
                    opts.eigen.tol = a.tol;
                    opts.eigen.seed = a.seed;
                    compute_shape_dna(&mesh, &opts)
                }
            }
        })
        .collect();

    let mut descriptors = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (input, r) in inputs.iter().zip(results) {
        match r {
            Ok(d) => {
                info!("{}: done", input.path.display());
                descriptors.push(d);
            }
            Err(e) => {
                error!("{}: {e}", input.path.display());
                failed += 1;
            }
        }
    }
    write_descriptors(&a.output, &descriptors)?;
    Ok(BatchOutcome { failed })
}

fn perturb_specs(a: &PerturbArgs, count: usize) -> std::result::Result<Vec<PerturbSpec>, CliError> {
    let usage = |e: Error| CliError::Usage(e.to_string());
    let single = |kind| PerturbSpec::new(kind).map(|s| vec![s; count]).map_err(usage);
    match (a.noise, a.scale, &a.scale_random, a.downsample) {
        (Some(level), None, None, None) => single(PerturbKind::Noise { level, seed: a.seed }),
        (None, Some(factor), None, None) => single(PerturbKind::Scale { factor }),
        (None, None, None, Some(ratio)) => single(PerturbKind::Downsample { ratio, seed: a.seed }),
        (None, None, Some(factors), None) => {
            if factors.is_empty() {
                return Err(CliError::Usage("--scale-random needs at least one factor".into()));
            }
            random_scale_factors(count, factors, a.seed)
                .into_iter()
                .map(|factor| PerturbSpec::new(PerturbKind::Scale { factor }).map_err(usage))
                .collect()
        }
        _ => Err(CliError::Usage(
            "choose exactly one of --noise, --scale, --scale-random, --downsample".into(),
        )),
    }
}

pub fn cmd_perturb(a: &PerturbArgs) -> std::result::Result<BatchOutcome, CliError> {
    let inputs = collect_inputs(&a.inputs);
    if inputs.is_empty() {
        return Err(CliError::Usage("no input meshes matched".into()));
    }
    let specs = perturb_specs(a, inputs.len())?;
    let results: Vec<Result<()>> = inputs
        .par_iter()
        .zip(&specs)
        .map(|(input, spec)| {
            let mesh = load_mesh(&input.path)?;
            let out_mesh = spec.apply(&mesh)?;
            let file = format!("{}.off", out_mesh.name);
            let dest = match input.relative.parent() {
                Some(p) => a.output.join(p).join(file),
                None => a.output.join(file),
            };
            write_mesh(&out_mesh, &dest, WriteFormat::Off)
        })
        .collect();
    let mut failed = 0;
    for (input, r) in inputs.iter().zip(results) {
        if let Err(e) = r {
            error!("{}: {e}", input.path.display());
            failed += 1;
        }
    }
    Ok(BatchOutcome { failed })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Evaluation(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn load_for_eval(path: &Path) -> std::result::Result<Vec<Descriptor>, CliError> {
    let descriptors = read_descriptors(path)?;
    if descriptors.is_empty() {
        return Err(CliError::Usage(format!("{} holds no descriptors", path.display())));
    }
    Ok(descriptors)
}

pub fn cmd_eval(a: &EvalArgs) -> std::result::Result<BatchOutcome, CliError> {
    let descriptors = load_for_eval(&a.descriptors)?;
    if let Some(d) = descriptors.iter().find(|d| d.class_label.is_empty()) {
        return Err(CliError::Run(Error::Evaluation(format!(
            "descriptor {:?} has no class label",
            d.mesh_name
        ))));
    }
    let dm = distance_matrix(&descriptors)?;
    write_text(&a.output.join("distances.csv"), &dm.to_csv()?)?;

    let report = retrieval_measures(&dm)?;
    let method = a
        .method
        .clone()
        .unwrap_or_else(|| descriptors[0].kind.as_str().to_string());
    write_text(
        &a.output.join("retrieval.csv"),
        &retrieval_table_csv(&[(method.clone(), report.clone())])?,
    )?;
    write_json(&a.output.join("retrieval.json"), &RetrievalJson { method, report: &report })?;

    if a.pca {
        let p = pca_2d(&descriptors)?;
        write_text(&a.output.join("pca.csv"), &p.to_csv(&descriptors)?)?;
    }
    if a.cv {
        let c = knn_classify_cv(&descriptors, a.k, a.folds, a.repeats, a.seed)?;
        write_json(&a.output.join("classification.json"), &c)?;
        write_text(&a.output.join("confusion.csv"), &c.confusion_csv()?)?;
    }
    Ok(BatchOutcome { failed: 0 })
}

#[derive(Serialize)]
struct RetrievalJson<'a> {
    method: String,
    #[serde(flatten)]
    report: &'a crate::eval::RetrievalReport,
}

pub fn cmd_dist(a: &SimpleArgs) -> std::result::Result<BatchOutcome, CliError> {
    let descriptors = load_for_eval(&a.descriptors)?;
    write_text(&a.output, &distance_matrix(&descriptors)?.to_csv()?)?;
    Ok(BatchOutcome { failed: 0 })
}

pub fn cmd_pca(a: &SimpleArgs) -> std::result::Result<BatchOutcome, CliError> {
    let descriptors = load_for_eval(&a.descriptors)?;
    write_text(&a.output, &pca_2d(&descriptors)?.to_csv(&descriptors)?)?;
    Ok(BatchOutcome { failed: 0 })
}
