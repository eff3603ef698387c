//! Config-driven pipeline runs.
//!
//! A config file has `key = value` settings followed by a `[steps]` section
//! listing one step per line as `name key=value ...`. `#` starts a comment.
//! Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read};
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use coordnet_core::metrics::BetweennessMode;
use coordnet_core::record::SchemaMode;
use coordnet_core::{build_graph, ActorLinkGraph, BuildOptions, Dataset, Workers};

use crate::export::{export_gephi, export_gexf};
use crate::ingest::{parse_files, IngestOptions};
use crate::report::{
    write_json, write_links_csv, write_scatter, write_weights_csv, CommunitiesFile, IngestSummary,
};
use crate::snapshot;
use crate::steps::{self, *};
use crate::urlcheck::{check_urls, CheckPolicy, PROXY_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_FATAL: i32 = 2;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
#[error("{path}:{line}: {message}")]
pub struct ConfigInvalid {
    pub path: String,
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    GephiCsv,
    Gexf,
}

impl ExportFormat {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        match text {
            "gephi-csv" => Ok(ExportFormat::GephiCsv),
            "gexf" => Ok(ExportFormat::Gexf),
            _ => anyhow::bail!("format must be gephi-csv or gexf, got {text:?}"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::GephiCsv => "gephi-csv",
            ExportFormat::Gexf => "gexf",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrlCheckParams {
    pub top: usize,
    pub policy: CheckPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Ingest,
    Stats(StatsParams),
    Graph,
    Centrality {
        params: CentralityParams,
        scatter: bool,
    },
    Components(ComponentsParams),
    Communities(CommunitiesParams),
    UrlCheck(UrlCheckParams),
    Export {
        format: ExportFormat,
        communities: bool,
    },
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Ingest => "ingest",
            Step::Stats(_) => "stats",
            Step::Graph => "graph",
            Step::Centrality { .. } => "centrality",
            Step::Components(_) => "components",
            Step::Communities(_) => "communities",
            Step::UrlCheck(_) => "urlcheck",
            Step::Export { .. } => "export",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepSpec {
    pub line: usize,
    pub step: Step,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub path: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub ingest: IngestOptions,
    pub normalize_urls: bool,
    pub seed: u64,
    pub threads: usize,
    pub steps: Vec<StepSpec>,
}

struct Parser<'a> {
    path: &'a str,
    line: usize,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigInvalid {
        ConfigInvalid {
            path: self.path.to_owned(),
            line: self.line,
            message: message.into(),
        }
    }

    fn value<T>(&self, key: &str, parsed: anyhow::Result<T>) -> Result<T, ConfigInvalid> {
        parsed.map_err(|e| self.err(format!("{key}: {e:#}")))
    }

    fn number<T: std::str::FromStr>(&self, key: &str, text: &str) -> Result<T, ConfigInvalid> {
        text.parse().map_err(|_| {
            self.err(format!(
                "{key}: expected a non-negative integer, got {text:?}"
            ))
        })
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

type RawStep = (usize, String, Vec<(String, String)>);

/// Parses config text. `path` is used for diagnostics and to resolve relative paths.
pub fn parse_config(text: &str, path: &Path) -> Result<PipelineConfig, ConfigInvalid> {
    let base = path.parent().unwrap_or(Path::new(""));
    let shown = path.display().to_string();
    let mut p = Parser {
        path: &shown,
        line: 0,
    };
    let mut config = PipelineConfig {
        path: path.to_owned(),
        inputs: Vec::new(),
        output_dir: resolve(base, "out"),
        ingest: IngestOptions::default(),
        normalize_urls: false,
        seed: 0,
        threads: 0,
        steps: Vec::new(),
    };
    let mut input_lines = Vec::new();
    let mut raw_steps: Vec<RawStep> = Vec::new();
    let mut in_steps = false;
    for (i, raw) in text.lines().enumerate() {
        p.line = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[steps]" {
            if in_steps {
                return Err(p.err("duplicate [steps] section"));
            }
            in_steps = true;
            continue;
        }
        if in_steps {
            let mut words = line.split_whitespace();
            let name = words.next().unwrap_or_default().to_owned();
            let mut params = Vec::new();
            for w in words {
                let (k, v) = w
                    .split_once('=')
                    .ok_or_else(|| p.err(format!("expected key=value, got {w:?}")))?;
                if params.iter().any(|(seen, _): &(String, String)| seen == k) {
                    return Err(p.err(format!("{k} given twice")));
                }
                params.push((k.to_owned(), v.to_owned()));
            }
            raw_steps.push((p.line, name, params));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| p.err(format!("expected key = value, got {line:?}")))?;
        match key {
            "input" => {
                config.inputs.push(resolve(base, value));
                input_lines.push(p.line);
            }
            "output_dir" => config.output_dir = resolve(base, value),
            "schema" => {
                config.ingest.mode = match value {
                    "strict" => SchemaMode::Strict,
                    "lenient" => SchemaMode::Lenient,
                    _ => {
                        return Err(
                            p.err(format!("schema must be strict or lenient, got {value:?}"))
                        )
                    }
                }
            }
            "date_format" => config.ingest.dates = p.value(key, parse_date_format(value))?,
            "normalize_urls" => config.normalize_urls = p.value(key, parse_bool(value))?,
            "seed" => config.seed = p.number(key, value)?,
            "threads" => config.threads = p.number(key, value)?,
            _ => return Err(p.err(format!("unknown setting {key:?}"))),
        }
    }

    for (line, name, params) in raw_steps {
        p.line = line;
        let step = parse_step(&p, &name, params, &config, base)?;
        config.steps.push(StepSpec { line, step });
    }
    validate(&mut p, &config, &input_lines)?;
    Ok(config)
}

fn parse_step(
    p: &Parser<'_>,
    name: &str,
    params: Vec<(String, String)>,
    config: &PipelineConfig,
    base: &Path,
) -> Result<Step, ConfigInvalid> {
    let seed = config.seed;
    let mut step = match name {
        "ingest" => Step::Ingest,
        "graph" => Step::Graph,
        "stats" => Step::Stats(StatsParams::default()),
        "centrality" => Step::Centrality {
            params: CentralityParams::default(),
            scatter: false,
        },
        "components" => Step::Components(ComponentsParams {
            seed,
            ..Default::default()
        }),
        "communities" => Step::Communities(CommunitiesParams::default()),
        "urlcheck" => Step::UrlCheck(UrlCheckParams {
            top: 1000,
            policy: CheckPolicy::default(),
        }),
        "export" => Step::Export {
            format: ExportFormat::GephiCsv,
            communities: false,
        },
        _ => return Err(p.err(format!("unknown step {name:?}"))),
    };
    for (key, value) in params {
        let v = value.as_str();
        let k = key.as_str();
        let unknown = || p.err(format!("{name}: unknown parameter {key:?}"));
        match &mut step {
            Step::Ingest | Step::Graph => return Err(unknown()),
            Step::Stats(s) => match k {
                "reports" => s.reports = p.value(k, parse_reports(v))?,
                "k" => s.k = p.number(k, v)?,
                "bucket" => s.bucket = p.value(k, parse_bucket(v))?,
                "fields" => s.words.fields = p.value(k, parse_fields(v))?,
                "stopwords" => s.words.stopwords = p.value(k, load_stopwords(&resolve(base, v)))?,
                "bigrams" => s.words.bigrams = p.value(k, parse_bool(v))?,
                _ => return Err(unknown()),
            },
            Step::Centrality { params: c, scatter } => match k {
                "measures" => c.measures = p.value(k, v.parse())?,
                "betweenness" => c.betweenness = p.value(k, parse_betweenness_mode(v, seed))?,
                "top" => c.top = Some(p.number(k, v)?),
                "rank_by" => c.rank_by = p.value(k, parse_rank_by(v))?,
                "scatter" => *scatter = p.value(k, parse_bool(v))?,
                _ => return Err(unknown()),
            },
            Step::Components(c) => match k {
                "top" => c.top = p.number(k, v)?,
                "distance" => c.distance = Some(p.value(k, parse_distance_mode(v, seed))?),
                "local_n" => c.local_n = p.value(k, parse_bool(v))?,
                _ => return Err(unknown()),
            },
            Step::Communities(c) => match k {
                "k" => c.k = p.number(k, v)?,
                "scope" => c.scope = p.value(k, parse_scope(v))?,
                "fast" => c.fast = Some(p.value(k, parse_fast(v, seed))?),
                "max_removals" => c.max_removals = Some(p.number(k, v)?),
                _ => return Err(unknown()),
            },
            Step::UrlCheck(u) => match k {
                "top" => u.top = p.number(k, v)?,
                "timeout_ms" => u.policy.timeout_ms = p.number(k, v)?,
                "concurrency" => u.policy.concurrency_limit = p.number(k, v)?,
                "max_redirects" => u.policy.max_redirects = p.number(k, v)?,
                "per_host_delay_ms" => u.policy.per_host_delay_ms = p.number(k, v)?,
                "head_then_get" => u.policy.head_then_get = p.value(k, parse_bool(v))?,
                _ => return Err(unknown()),
            },
            Step::Export {
                format,
                communities,
            } => match k {
                "format" => *format = p.value(k, ExportFormat::parse(v))?,
                "communities" => *communities = p.value(k, parse_bool(v))?,
                _ => return Err(unknown()),
            },
        }
    }
    if let Step::Communities(c) = &step {
        if c.k < 2 {
            return Err(p.err("communities: k must be at least 2"));
        }
    }
    if let Step::UrlCheck(u) = &step {
        if u.policy.concurrency_limit == 0 {
            return Err(p.err("urlcheck: concurrency must be at least 1"));
        }
    }
    Ok(step)
}

fn validate(
    p: &mut Parser<'_>,
    config: &PipelineConfig,
    input_lines: &[usize],
) -> Result<(), ConfigInvalid> {
    if config.steps.is_empty() {
        p.line = 0;
        return Err(p.err("no steps listed under [steps]"));
    }
    let mut done: Vec<&str> = Vec::new();
    let mut exports: Vec<ExportFormat> = Vec::new();
    for spec in &config.steps {
        p.line = spec.line;
        let name = spec.step.name();
        if let Step::Export { format, .. } = spec.step {
            if exports.contains(&format) {
                return Err(p.err(format!("export format {} listed twice", format.as_str())));
            }
            exports.push(format);
        } else if done.contains(&name) {
            return Err(p.err(format!("step {name} listed twice")));
        }
        let needs: &[&str] = match &spec.step {
            Step::Ingest => &[],
            Step::Stats(_) | Step::Graph | Step::UrlCheck(_) => &["ingest"],
            Step::Centrality { .. } | Step::Components(_) | Step::Communities(_) => &["graph"],
            Step::Export {
                communities: true, ..
            } => &["graph", "communities"],
            Step::Export { .. } => &["graph"],
        };
        if let Some(missing) = needs.iter().find(|n| !done.contains(n)) {
            return Err(p.err(format!("step {name} needs an earlier {missing} step")));
        }
        done.push(name);
    }
    if done.contains(&"ingest") && config.inputs.is_empty() {
        p.line = config.steps[0].line;
        return Err(p.err("ingest needs at least one `input = <file>` setting"));
    }
    for (input, &line) in config.inputs.iter().zip(input_lines) {
        if !input.is_file() {
            p.line = line;
            return Err(p.err(format!("input: {} does not exist", input.display())));
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, ConfigInvalid> {
    let text = fs::read_to_string(path).map_err(|e| ConfigInvalid {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    parse_config(&text, path)
}

/// Lowercase hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub name: String,
    pub line: usize,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: String,
    pub config_path: String,
    pub config_sha256: String,
    pub input_digests: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub threads: usize,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub exit_code: i32,
    pub steps: Vec<StepRecord>,
    pub artifacts: Vec<Artifact>,
}

pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

#[derive(Default)]
struct State {
    dataset: Option<Dataset>,
    graph: Option<ActorLinkGraph>,
    partition: Option<coordnet_core::communities::CommunityPartition>,
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    workers: Workers,
    state: State,
    seeds: BTreeMap<String, u64>,
}

impl Runner<'_> {
    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn dataset(&self) -> &Dataset {
        self.state.dataset.as_ref().expect("validated: ingest ran")
    }

    fn graph(&self) -> &ActorLinkGraph {
        self.state.graph.as_ref().expect("validated: graph ran")
    }

    fn record_seed(&mut self, purpose: &str, mode: BetweennessMode) {
        if let BetweennessMode::Sampled { seed, .. } = mode {
            self.seeds.insert(purpose.to_owned(), seed);
        }
    }

    /// Runs one step and returns the artifact names it wrote.
    fn run(&mut self, step: &Step) -> anyhow::Result<Vec<String>> {
        let mut written = Vec::new();
        match step {
            Step::Ingest => {
                let dataset = parse_files(&self.config.inputs, self.config.ingest)?;
                let summary = IngestSummary {
                    source_files: self
                        .config
                        .inputs
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect(),
                    report: dataset.ingest_report.clone(),
                };
                write_json(&self.out("ingest_report.json"), &summary)?;
                written.push("ingest_report.json".into());
                self.state.dataset = Some(dataset);
            }
            Step::Stats(params) => {
                let report = steps::stats(self.dataset(), params);
                write_json(&self.out("stats.json"), &report)?;
                written.push("stats.json".into());
                if params.reports.contains(&StatsKind::Links) {
                    let links = coordnet_core::stats::link_ranking(self.dataset());
                    write_links_csv(&links, create(&self.out("links.csv"))?)?;
                    written.push("links.csv".into());
                }
                if let Some(words) = &report.words {
                    write_weights_csv(words, create(&self.out("words.csv"))?)?;
                    written.push("words.csv".into());
                }
            }
            Step::Graph => {
                let graph = build_graph(
                    self.dataset(),
                    BuildOptions {
                        normalize_urls: self.config.normalize_urls,
                    },
                )?;
                log::info!(
                    "graph: {} nodes, {} edges",
                    graph.node_count(),
                    graph.edge_count()
                );
                snapshot::save(&graph, &self.out("graph.bin"))?;
                written.push("graph.bin".into());
                self.state.graph = Some(graph);
            }
            Step::Centrality { params, scatter } => {
                if params.measures.betweenness {
                    self.record_seed("centrality.betweenness", params.betweenness);
                }
                let out = steps::centrality(self.graph(), params, self.workers)?;
                write_json(&self.out("centrality.json"), &out.rows)?;
                written.push("centrality.json".into());
                if *scatter {
                    write_scatter(&out.scatter, create(&self.out("scatter.csv"))?)?;
                    written.push("scatter.csv".into());
                }
            }
            Step::Components(params) => {
                self.seeds.insert("components.sampling".into(), params.seed);
                if let Some(coordnet_core::components::DistanceMode::Sampled { seed, .. }) =
                    params.distance
                {
                    self.seeds.insert("components.distance".into(), seed);
                }
                let report = steps::components(self.graph(), params, self.workers)?;
                write_json(&self.out("components.json"), &report)?;
                written.push("components.json".into());
            }
            Step::Communities(params) => {
                if let Some(mode) = params.fast {
                    self.record_seed("communities.betweenness", mode);
                }
                let partition = steps::communities(self.graph(), params, self.workers)?;
                write_json(
                    &self.out("communities.json"),
                    &CommunitiesFile::new(&partition, self.graph()),
                )?;
                written.push("communities.json".into());
                self.state.partition = Some(partition);
            }
            Step::UrlCheck(params) => {
                let targets = audit_targets(self.dataset(), params.top);
                let mut policy = params.policy.clone();
                policy.proxy = std::env::var(PROXY_ENV).ok().filter(|p| !p.is_empty());
                let report = check_urls(&targets, &policy)?;
                write_json(&self.out("liveness.json"), &report)?;
                written.push("liveness.json".into());
            }
            Step::Export {
                format,
                communities,
            } => {
                let partition = if *communities {
                    self.state.partition.as_ref()
                } else {
                    None
                };
                match format {
                    ExportFormat::GephiCsv => {
                        export_gephi(self.graph(), partition, &self.out("gephi"))?;
                        written.push("gephi/nodes.csv".into());
                        written.push("gephi/edges.csv".into());
                    }
                    ExportFormat::Gexf => {
                        export_gexf(self.graph(), partition, &self.out("graph.gexf"))?;
                        written.push("graph.gexf".into());
                    }
                }
            }
        }
        Ok(written)
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Overrides from the command line; `None` keeps the config's value.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOverrides {
    pub threads: Option<usize>,
}

/// Runs every step in order and writes the manifest. A failing urlcheck step
/// is logged and the run continues with exit code 1; any other failure stops
/// the run with exit code 2.
pub fn run_pipeline(
    config: &PipelineConfig,
    command_line: &str,
    overrides: RunOverrides,
) -> anyhow::Result<RunOutcome> {
    let started = Utc::now();
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;
    let threads = overrides.threads.unwrap_or(config.threads);
    let mut runner = Runner {
        config,
        workers: Workers(threads),
        state: State::default(),
        seeds: BTreeMap::from([("global".to_owned(), config.seed)]),
    };
    let mut records = Vec::new();
    let mut exit_code = EXIT_OK;
    for spec in &config.steps {
        let name = spec.step.name();
        log::info!("step {name} (line {})", spec.line);
        let mut record = StepRecord {
            name: name.to_owned(),
            line: spec.line,
            status: "ok".into(),
            error: None,
            artifacts: Vec::new(),
        };
        match runner.run(&spec.step) {
            Ok(written) => record.artifacts = written,
            Err(e) => {
                log::error!("step {name} failed: {e:#}");
                record.status = "failed".into();
                record.error = Some(format!("{e:#}"));
                if matches!(spec.step, Step::UrlCheck(_)) {
                    exit_code = EXIT_PARTIAL;
                } else {
                    exit_code = EXIT_FATAL;
                    records.push(record);
                    break;
                }
            }
        }
        records.push(record);
    }

    let mut artifacts = Vec::new();
    for name in records.iter().flat_map(|r| &r.artifacts) {
        let path = config.output_dir.join(name);
        artifacts.push(Artifact {
            path: name.clone(),
            sha256: sha256_file(&path).with_context(|| format!("hashing {}", path.display()))?,
            bytes: fs::metadata(&path)?.len(),
        });
    }
    let mut input_digests = BTreeMap::new();
    for input in &config.inputs {
        input_digests.insert(input.display().to_string(), sha256_file(input)?);
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        command_line: command_line.to_owned(),
        config_path: config.path.display().to_string(),
        config_sha256: sha256_file(&config.path).unwrap_or_default(),
        input_digests,
        seeds: runner.seeds,
        threads,
        started,
        finished: Utc::now(),
        exit_code,
        steps: records,
        artifacts,
    };
    let manifest_path = config.output_dir.join(MANIFEST_FILE);
    write_json(&manifest_path, &manifest)?;
    Ok(RunOutcome {
        exit_code,
        manifest,
        manifest_path,
    })
}
