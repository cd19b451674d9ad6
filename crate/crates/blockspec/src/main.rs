//! Command line interface: sampling, embedding, partitioning, block-count
//! selection, evaluation, bound checks, and the Monte Carlo studies.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use blockspec::clustering;
use blockspec::diagnostics;
use blockspec::embedding::{self, KnowledgeMode};
use blockspec::evaluation;
use blockspec::harness::{self, ExperimentConfig, Study};
use blockspec::io;
use blockspec::model;
use blockspec::sampler::{self, Seed};
use blockspec::selection::{self, ClustererConfig};

#[derive(Parser)]
#[command(
    name = "blockspec",
    version,
    about = "Adjacency-spectral partitioning of stochastic block model graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Edges,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Hat,
    Check,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rows,
    Columns,
    Neither,
}

impl From<ModeArg> for KnowledgeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rows => KnowledgeMode::RowsDistinct,
            ModeArg::Columns => KnowledgeMode::ColumnsDistinct,
            ModeArg::Neither => KnowledgeMode::Neither,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and its block memberships from model parameters.
    Generate {
        /// Model parameters (TOML: k, rho, modalities, directed).
        #[arg(long)]
        params: PathBuf,
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        /// Seed value.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seed stream (replicate index).
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output graph file.
        #[arg(long)]
        out_graph: PathBuf,
        /// Output membership label file.
        #[arg(long)]
        out_tau: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
    },
    /// Embed adjacency matrices and export the clustering features.
    Embed {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
        /// Embedding dimension per modality (single value broadcasts).
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Rows)]
        mode: ModeArg,
        /// Feature matrix output (plain text, full precision).
        #[arg(long)]
        out: PathBuf,
        /// Optional singular value output, one line per modality.
        #[arg(long)]
        out_sigma: Option<PathBuf>,
    },
    /// Partition with a known number of blocks.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Rows)]
        mode: ModeArg,
        /// Number of blocks.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = clustering::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output block assignment file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the number of blocks.
    SelectK {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Rows)]
        mode: ModeArg,
        /// Residual threshold exponent, in (3/8, 1/2).
        #[arg(long, default_value_t = 0.40)]
        xi: f64,
        /// Centroid separation floor for the part-size estimator.
        #[arg(long, default_value_t = 0.01)]
        zeta: f64,
        /// Minimum part fraction for the part-size estimator, in (0, 1].
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        /// Cap on the examined part counts (default min(2*R_total+2, n)).
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = Estimator::Hat)]
        estimator: Estimator,
        #[arg(long, default_value_t = clustering::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Trace table output; with --estimator both, `_hat`/`_check` are
        /// inserted before the extension.
        #[arg(long)]
        out_trace: PathBuf,
        /// Optional block assignment from the chosen part count.
        #[arg(long)]
        out_assignment: Option<PathBuf>,
    },
    /// Compare an estimated labeling with the truth.
    Evaluate {
        /// True membership label file.
        #[arg(long)]
        truth: PathBuf,
        /// Estimated label file.
        #[arg(long)]
        estimate: PathBuf,
        /// Optional CSV output (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the spectral bounds on one sampled instance.
    CheckBounds {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
        /// Realized membership label file.
        #[arg(long)]
        tau: PathBuf,
        /// Optional CSV output (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study from a configuration file.
    Simulate {
        /// Study override (defaults to the config's study).
        #[arg(long)]
        study: Option<String>,
        /// Study configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Seed value override (stream kept from the config).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_graph(path: &Path, format: GraphFormat) -> anyhow::Result<io::LoadedGraph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading graph file {}", path.display()))?;
    let graph = match format {
        GraphFormat::Edges => io::parse_graph_edges(&text)?,
        GraphFormat::Dense => io::parse_graph_dense(&text)?,
    };
    Ok(graph)
}

fn broadcast_r(r: &[usize], modalities: usize) -> anyhow::Result<Vec<usize>> {
    if r.len() == modalities {
        Ok(r.to_vec())
    } else if r.len() == 1 {
        Ok(vec![r[0]; modalities])
    } else {
        bail!(
            "{} embedding dimensions given for {} modalities",
            r.len(),
            modalities
        )
    }
}

fn embed_graph(
    graph: &io::LoadedGraph,
    r: &[usize],
    mode: KnowledgeMode,
) -> anyhow::Result<(Vec<embedding::ModalityEmbedding>, ndarray::Array2<f64>)> {
    let r = broadcast_r(r, graph.adjacency.len())?;
    let embeddings: Vec<embedding::ModalityEmbedding> = (0..graph.adjacency.len())
        .map(|s| embedding::svd_embed(&graph.adjacency_f64(s), r[s]))
        .collect::<blockspec::Result<_>>()?;
    let z = embedding::assemble_features(&embeddings, mode)?;
    Ok((embeddings, z))
}

fn trace_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_{suffix}{ext}"))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            params,
            n,
            seed,
            stream,
            out_graph,
            out_tau,
            format,
        } => {
            let params = io::load_params(&params)?;
            let sample = sampler::sample_graph(n, &params, Seed::new(seed, stream));
            let graph = io::LoadedGraph::from(&sample);
            io::write_file(&out_graph, |w| match format {
                GraphFormat::Edges => io::write_graph_edges(w, &graph),
                GraphFormat::Dense => io::write_graph_dense(w, &graph),
            })?;
            io::write_file(&out_tau, |w| io::write_labels(w, sample.tau()))?;
            println!(
                "generated n={} modalities={} directed={}",
                sample.n(),
                sample.num_modalities(),
                sample.directed()
            );
        }
        Command::Embed {
            graph,
            format,
            r,
            mode,
            out,
            out_sigma,
        } => {
            let graph = load_graph(&graph, format)?;
            let (embeddings, z) = embed_graph(&graph, &r, mode.into())?;
            io::write_file(&out, |w| io::write_numeric_table(w, &z))?;
            if let Some(path) = out_sigma {
                io::write_file(&path, |w| {
                    for e in &embeddings {
                        let line: Vec<String> =
                            e.sigma.iter().map(|s| format!("{s}")).collect();
                        writeln!(w, "{}", line.join(" "))?;
                    }
                    Ok(())
                })?;
            }
            println!("embedded n={} d={}", z.nrows(), z.ncols());
        }
        Command::Partition {
            graph,
            format,
            r,
            mode,
            k,
            restarts,
            seed,
            stream,
            out,
        } => {
            if k == 0 {
                bail!("k must be at least 1");
            }
            let graph = load_graph(&graph, format)?;
            let (_, z) = embed_graph(&graph, &r, mode.into())?;
            let clustering = clustering::lloyd_cluster(&z, k, restarts, Seed::new(seed, stream));
            let labels = clustering::assignment_from_clustering(&clustering);
            io::write_file(&out, |w| io::write_labels(w, &labels))?;
            println!("objective={}", clustering.objective());
        }
        Command::SelectK {
            graph,
            format,
            r,
            mode,
            xi,
            zeta,
            theta,
            k_max,
            estimator,
            restarts,
            seed,
            stream,
            out_trace,
            out_assignment,
        } => {
            let graph = load_graph(&graph, format)?;
            let (_, z) = embed_graph(&graph, &r, mode.into())?;
            let r_total: usize = broadcast_r(&r, graph.adjacency.len())?.iter().sum();
            let k_max = k_max.unwrap_or_else(|| selection::default_k_max(r_total, z.nrows()));
            let cfg = ClustererConfig::new(Seed::new(seed, stream)).with_restarts(restarts);
            if matches!(estimator, Estimator::Hat | Estimator::Both) {
                let outcome = selection::estimate_k_hat(&z, xi, k_max, &cfg)?;
                let path = if estimator == Estimator::Both {
                    trace_path(&out_trace, "hat")
                } else {
                    out_trace.clone()
                };
                io::write_file(&path, |w| io::write_trace_csv(w, &outcome.trace))?;
                match outcome.k_hat {
                    Some(k) => println!("k_hat={k}"),
                    None => println!("k_hat=none (no K' <= {k_max} met the threshold)"),
                }
                if let (Some(path), Some(clustering)) =
                    (out_assignment.as_ref(), outcome.clustering.as_ref())
                {
                    let labels = clustering::assignment_from_clustering(clustering);
                    io::write_file(path, |w| io::write_labels(w, &labels))?;
                }
            }
            if matches!(estimator, Estimator::Check | Estimator::Both) {
                let outcome = selection::estimate_k_check(&z, zeta, theta, &cfg)?;
                let path = if estimator == Estimator::Both {
                    trace_path(&out_trace, "check")
                } else {
                    out_trace.clone()
                };
                io::write_file(&path, |w| io::write_trace_csv(w, &outcome.trace))?;
                println!("k_check={}", outcome.k_check);
            }
        }
        Command::Evaluate {
            truth,
            estimate,
            out,
        } => {
            let tau = io::load_labels(&truth)?;
            let tau_hat = io::load_labels(&estimate)?;
            let count = evaluation::misassignment_count(&tau, &tau_hat)?;
            let fraction = evaluation::misassignment_fraction(&tau, &tau_hat)?;
            let text = format!("misassignments,fraction\n{count},{fraction}\n");
            match out {
                Some(path) => io::write_file(&path, |w| Ok(w.write_all(text.as_bytes())?))?,
                None => print!("{text}"),
            }
        }
        Command::CheckBounds {
            params,
            graph,
            format,
            tau,
            out,
        } => {
            let params = io::load_params(&params)?;
            let graph = load_graph(&graph, format)?;
            let tau = io::load_labels(&tau)?;
            if tau.len() != graph.n() {
                bail!(
                    "label file has {} entries for a graph on {} vertices",
                    tau.len(),
                    graph.n()
                );
            }
            let factors = params.factorize_all();
            let constants = model::compute_constants(&params, &factors)?;
            let mut reports = Vec::new();
            for (s, factor) in factors.iter().enumerate() {
                let a = graph.adjacency_f64(s);
                let p = diagnostics::probability_matrix(&tau, params.modality(s));
                reports.extend(diagnostics::full_report(&a, &p, factor.rank, &constants));
            }
            let mut buf = Vec::new();
            io::write_bounds_csv(&mut buf, &reports)?;
            match out {
                Some(path) => io::write_file(&path, |w| Ok(w.write_all(&buf)?))?,
                None => std::io::stdout().write_all(&buf)?,
            }
        }
        Command::Simulate {
            study,
            config,
            out,
            workers,
            seed,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(study) = study {
                config.study = study.parse::<Study>()?;
            }
            if let Some(value) = seed {
                config.seed = Seed::new(value, config.seed.stream);
            }
            let output = harness::run_study(&config, workers)?;
            harness::write_study_output(&out, &config, &output)?;
            let failures: usize = output
                .records
                .iter()
                .filter(|r| r.error.is_some())
                .count();
            println!(
                "study={} records={} bound_records={} failures={} out={}",
                config.study,
                output.records.len(),
                output.bound_records.len(),
                failures,
                out.display()
            );
        }
    }
    Ok(())
}
