use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use coordnet::export::{export_gephi, export_gexf};
use coordnet::ingest::{parse_files, write_csv, IngestOptions};
use coordnet::pipeline::{self, load_config, run_pipeline, RunOverrides, EXIT_FATAL};
use coordnet::report::{
    read_json, read_links_csv, write_json, write_links_csv, write_scatter, write_weights_csv,
    CommunitiesFile, IngestSummary,
};
use coordnet::snapshot;
use coordnet::steps::{self, *};
use coordnet::urlcheck::{check_urls, filter_non_facebook, CheckPolicy, PROXY_ENV};
use coordnet_core::record::SchemaMode;
use coordnet_core::stats::link_ranking;
use coordnet_core::{build_graph, BuildOptions, Workers};

#[derive(Parser)]
#[command(
    name = "coordnet",
    version,
    about = "Actor/shared-link network analysis of post exports"
)]
struct Cli {
    /// Worker threads for centrality computations (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Default seed for sampled computations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Only log errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParseArgs {
    /// Reject rows whose optional fields fail to parse; require all headers.
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Degrade unparsable optional fields to absent; require only the core headers.
    #[arg(long)]
    lenient: bool,
    #[arg(long, default_value = "iso", value_parser = ["iso", "dmy"])]
    date_format: String,
}

impl ParseArgs {
    fn options(&self) -> anyhow::Result<IngestOptions> {
        Ok(IngestOptions {
            mode: if self.lenient {
                SchemaMode::Lenient
            } else {
                SchemaMode::Strict
            },
            dates: parse_date_format(&self.date_format)?,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse exports and report accepted/rejected rows.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        parse: ParseArgs,
        /// Ingest report path (stdout when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the merged, deduplicated records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Descriptive statistics.
    Stats {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        parse: ParseArgs,
        /// Comma list of time, actors, types, countries, sponsors, words, links.
        #[arg(long, default_value = "time,actors,types,countries,words,links")]
        report: String,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long, default_value = "day")]
        bucket: String,
        /// Text fields for word counts: message, image_text, title, page_description.
        #[arg(long, default_value = "message")]
        fields: String,
        /// Stopword file replacing the bundled English and Hindi lists.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Count adjacent word pairs instead of single words.
        #[arg(long)]
        bigrams: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Every shared link with its count, as `url,count` CSV.
        #[arg(long)]
        links_csv: Option<PathBuf>,
        /// Word counts as `key,weight` CSV.
        #[arg(long)]
        words_csv: Option<PathBuf>,
    },
    /// Graph construction.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Degree, closeness and betweenness centrality.
    Centrality {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "degree,closeness,betweenness")]
        measures: String,
        /// `exact`, `sampled:<pivots>` or `sampled:<pivots>:<seed>`.
        #[arg(long, default_value = "exact")]
        betweenness_mode: String,
        #[arg(long)]
        top: Option<usize>,
        /// Ranking column: degree, closeness or betweenness.
        #[arg(long, default_value = "degree")]
        rank_by: String,
        /// Write `degree,degree_centrality` rows for every node.
        #[arg(long)]
        scatter: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connected components and per-component summaries.
    Components {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// `exact` or `sampled:<sources>[:<seed>]`; automatic when omitted.
        #[arg(long)]
        distance_mode: Option<String>,
        /// Divide degree by the component's size instead of the whole graph's.
        #[arg(long)]
        local_n: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Girvan-Newman community detection.
    Communities {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = "largest", value_parser = ["largest", "whole"])]
        scope: String,
        /// Sampled edge betweenness, `<pivots>` or `<pivots>:<seed>`.
        #[arg(long)]
        fast: Option<String>,
        #[arg(long)]
        max_removals: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe the most shared non-Facebook links.
    Urlcheck {
        /// `url,count` CSV as written by `stats --links-csv`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        top: usize,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
        #[arg(long, default_value_t = 32)]
        concurrency: usize,
        #[arg(long, default_value_t = 5)]
        max_redirects: u32,
        #[arg(long, default_value_t = 250)]
        per_host_delay_ms: u64,
        /// Do not retry with GET when HEAD is refused.
        #[arg(long)]
        no_get_fallback: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gephi CSV or GEXF output.
    Export {
        #[arg(long)]
        graph: PathBuf,
        /// `communities.json`; restricts output to its nodes and fills the community column.
        #[arg(long)]
        communities: Option<PathBuf>,
        #[arg(long, value_parser = ["gephi-csv", "gexf"])]
        format: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a pipeline config.
    Run { config: PathBuf },
}

#[derive(Subcommand)]
enum GraphAction {
    /// Build the actor/link graph and save a snapshot.
    Build {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        parse: ParseArgs,
        /// Lowercase scheme and host of link URLs before interning.
        #[arg(long)]
        normalize_urls: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            stdout.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    let workers = Workers(cli.threads.unwrap_or(0));
    let seed = cli.seed;
    match cli.command {
        Command::Ingest {
            files,
            parse,
            report,
            csv,
        } => {
            let options = parse.options()?;
            let dataset = parse_files(&files, options)?;
            if let Some(path) = csv {
                write_csv(&dataset.records, options.dates, create(&path)?)?;
            }
            let summary = IngestSummary {
                source_files: dataset.source_files.clone(),
                report: dataset.ingest_report,
            };
            emit(report.as_deref(), &summary)?;
        }
        Command::Stats {
            input,
            parse,
            report,
            k,
            bucket,
            fields,
            stopwords,
            bigrams,
            out,
            links_csv,
            words_csv,
        } => {
            let dataset = parse_files(&input, parse.options()?)?;
            let mut params = StatsParams {
                reports: parse_reports(&report)?,
                k,
                bucket: parse_bucket(&bucket)?,
                ..StatsParams::default()
            };
            params.words.fields = parse_fields(&fields)?;
            params.words.bigrams = bigrams;
            if let Some(path) = stopwords {
                params.words.stopwords = load_stopwords(&path)?;
            }
            let stats = steps::stats(&dataset, &params);
            if let Some(path) = links_csv {
                write_links_csv(&link_ranking(&dataset), create(&path)?)?;
            }
            if let (Some(path), Some(words)) = (words_csv, &stats.words) {
                write_weights_csv(words, create(&path)?)?;
            }
            emit(out.as_deref(), &stats)?;
        }
        Command::Graph {
            action:
                GraphAction::Build {
                    input,
                    parse,
                    normalize_urls,
                    out,
                },
        } => {
            let dataset = parse_files(&input, parse.options()?)?;
            let graph = build_graph(&dataset, BuildOptions { normalize_urls })?;
            log::info!(
                "{} nodes, {} edges, average degree {:.3}",
                graph.node_count(),
                graph.edge_count(),
                graph.average_degree()?
            );
            snapshot::save(&graph, &out).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Centrality {
            graph,
            measures,
            betweenness_mode,
            top,
            rank_by,
            scatter,
            out,
        } => {
            let graph =
                snapshot::load(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let params = CentralityParams {
                measures: measures.parse()?,
                betweenness: parse_betweenness_mode(&betweenness_mode, seed)?,
                top,
                rank_by: parse_rank_by(&rank_by)?,
            };
            let result = steps::centrality(&graph, &params, workers)?;
            if let Some(path) = scatter {
                write_scatter(&result.scatter, create(&path)?)?;
            }
            emit(out.as_deref(), &result.rows)?;
        }
        Command::Components {
            graph,
            top,
            distance_mode,
            local_n,
            out,
        } => {
            let graph =
                snapshot::load(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let params = ComponentsParams {
                top,
                distance: distance_mode
                    .map(|m| parse_distance_mode(&m, seed))
                    .transpose()?,
                local_n,
                seed,
            };
            emit(
                out.as_deref(),
                &steps::components(&graph, &params, workers)?,
            )?;
        }
        Command::Communities {
            graph,
            k,
            scope,
            fast,
            max_removals,
            out,
        } => {
            let graph =
                snapshot::load(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let params = CommunitiesParams {
                k,
                scope: parse_scope(&scope)?,
                fast: fast.map(|f| parse_fast(&f, seed)).transpose()?,
                max_removals,
            };
            let partition = steps::communities(&graph, &params, workers)?;
            emit(out.as_deref(), &CommunitiesFile::new(&partition, &graph))?;
        }
        Command::Urlcheck {
            input,
            top,
            timeout_ms,
            concurrency,
            max_redirects,
            per_host_delay_ms,
            no_get_fallback,
            out,
        } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let links = filter_non_facebook(read_links_csv(file)?);
            let urls: Vec<String> = links.into_iter().take(top).map(|l| l.url).collect();
            let policy = CheckPolicy {
                timeout_ms,
                max_redirects,
                head_then_get: !no_get_fallback,
                concurrency_limit: concurrency.max(1),
                per_host_delay_ms,
                proxy: std::env::var(PROXY_ENV).ok().filter(|p| !p.is_empty()),
            };
            let report = check_urls(&urls, &policy)?;
            log::info!(
                "{} of {} links broken ({:.1}%)",
                report.broken,
                report.checked,
                report.broken_fraction * 100.0
            );
            emit(out.as_deref(), &report)?;
        }
        Command::Export {
            graph,
            communities,
            format,
            out,
        } => {
            let graph =
                snapshot::load(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let partition = match communities {
                Some(path) => Some(read_json::<CommunitiesFile>(&path)?.to_partition(&graph)?),
                None => None,
            };
            match pipeline::ExportFormat::parse(&format)? {
                pipeline::ExportFormat::GephiCsv => {
                    let files = export_gephi(&graph, partition.as_ref(), &out)?;
                    log::info!(
                        "wrote {} and {}",
                        files.nodes_file.display(),
                        files.edges_file.display()
                    );
                }
                pipeline::ExportFormat::Gexf => {
                    let file = export_gexf(&graph, partition.as_ref(), &out.join("graph.gexf"))?;
                    log::info!("wrote {}", file.display());
                }
            }
        }
        Command::Run { config } => {
            let config = load_config(&config)?;
            let command_line = std::env::args().collect::<Vec<_>>().join(" ");
            let outcome = run_pipeline(
                &config,
                &command_line,
                RunOverrides {
                    threads: cli.threads,
                },
            )?;
            log::info!("manifest written to {}", outcome.manifest_path.display());
            return Ok(outcome.exit_code);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(EXIT_FATAL as u8)
        }
    }
}
