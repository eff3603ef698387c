//! Analysis steps shared by the subcommands and the pipeline runner.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};

use coordnet_core::communities::{girvan_newman, CommunityPartition, GirvanNewmanConfig, Scope};
use coordnet_core::components::{
    connected_components, top_components_report, DistanceMode, SummaryOptions,
};
use coordnet_core::metrics::{degree_centrality, scatter_rows, top_k, BetweennessMode, Column};
use coordnet_core::record::DateFormat;
use coordnet_core::stats::{
    admin_country_distribution, link_ranking, post_type_distribution, sponsor_distribution,
    time_histogram, top_actors, top_links_crosstab, word_frequency, Bucket, Stopwords, TextField,
    WordFrequencyOptions,
};
use coordnet_core::{ActorLinkGraph, Dataset, Workers};

use crate::report::{centrality_rows, CentralityJsonRow, ComponentsReport, StatsReport};

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_date_format(text: &str) -> anyhow::Result<DateFormat> {
    match text {
        "iso" => Ok(DateFormat::Iso),
        "dmy" => Ok(DateFormat::Dmy),
        _ => bail!("date format must be iso or dmy, got {text:?}"),
    }
}

/// `exact`, `sampled:<n>` or `sampled:<n>:<seed>`; `default_seed` fills a missing seed.
fn parse_sampled(text: &str, default_seed: u64) -> anyhow::Result<Option<(usize, u64)>> {
    let mut parts = text.split(':');
    match parts.next() {
        Some("exact") if parts.next().is_none() => Ok(None),
        Some("sampled") => {
            let n = parts
                .next()
                .ok_or_else(|| anyhow!("{text:?}: missing sample size"))?
                .parse()
                .with_context(|| format!("{text:?}: bad sample size"))?;
            let seed = match parts.next() {
                Some(s) => s.parse().with_context(|| format!("{text:?}: bad seed"))?,
                None => default_seed,
            };
            if parts.next().is_some() {
                bail!("{text:?}: too many fields");
            }
            Ok(Some((n, seed)))
        }
        _ => bail!("expected exact or sampled:<n>[:<seed>], got {text:?}"),
    }
}

pub fn parse_betweenness_mode(text: &str, default_seed: u64) -> anyhow::Result<BetweennessMode> {
    Ok(match parse_sampled(text, default_seed)? {
        None => BetweennessMode::Exact,
        Some((pivots, seed)) => BetweennessMode::Sampled { pivots, seed },
    })
}

pub fn parse_distance_mode(text: &str, default_seed: u64) -> anyhow::Result<DistanceMode> {
    Ok(match parse_sampled(text, default_seed)? {
        None => DistanceMode::Exact,
        Some((pairs, seed)) => DistanceMode::Sampled { pairs, seed },
    })
}

/// `<pivots>` or `<pivots>:<seed>`.
pub fn parse_fast(text: &str, default_seed: u64) -> anyhow::Result<BetweennessMode> {
    parse_betweenness_mode(&format!("sampled:{text}"), default_seed)
}

pub fn parse_scope(text: &str) -> anyhow::Result<Scope> {
    match text {
        "largest" | "largest_component" => Ok(Scope::LargestComponent),
        "whole" | "whole_graph" => Ok(Scope::WholeGraph),
        _ => bail!("scope must be largest or whole, got {text:?}"),
    }
}

pub fn parse_bool(text: &str) -> anyhow::Result<bool> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("expected true or false, got {text:?}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measures {
    pub degree: bool,
    pub closeness: bool,
    pub betweenness: bool,
}

impl FromStr for Measures {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> anyhow::Result<Self> {
        let mut m = Measures {
            degree: false,
            closeness: false,
            betweenness: false,
        };
        for part in split_list(text) {
            match part {
                "degree" => m.degree = true,
                "closeness" => m.closeness = true,
                "betweenness" => m.betweenness = true,
                _ => bail!("unknown measure {part:?}"),
            }
        }
        if !(m.degree || m.closeness || m.betweenness) {
            bail!("no measures selected");
        }
        Ok(m)
    }
}

pub fn parse_rank_by(text: &str) -> anyhow::Result<Column> {
    match text {
        "degree" => Ok(Column::DegreeCentrality),
        "closeness" => Ok(Column::Closeness),
        "betweenness" => Ok(Column::Betweenness),
        _ => bail!("rank-by must be degree, closeness or betweenness, got {text:?}"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralityParams {
    pub measures: Measures,
    pub betweenness: BetweennessMode,
    pub top: Option<usize>,
    pub rank_by: Column,
}

impl Default for CentralityParams {
    fn default() -> Self {
        CentralityParams {
            measures: Measures {
                degree: true,
                closeness: true,
                betweenness: true,
            },
            betweenness: BetweennessMode::Exact,
            top: None,
            rank_by: Column::DegreeCentrality,
        }
    }
}

pub struct CentralityOutput {
    pub rows: Vec<CentralityJsonRow>,
    pub scatter: Vec<(usize, f64)>,
}

/// Rows ranked by `rank_by` (descending, ties by label), cut to `top`.
pub fn centrality(
    graph: &ActorLinkGraph,
    params: &CentralityParams,
    workers: Workers,
) -> anyhow::Result<CentralityOutput> {
    let mut table = degree_centrality(graph, None)?;
    if params.measures.closeness {
        table.fill_closeness(graph, workers);
    }
    if params.measures.betweenness {
        table.fill_betweenness(graph, params.betweenness, workers)?;
    }
    let mut ranked: Vec<_> = top_k(&table, graph, params.rank_by, graph.node_count())?
        .into_iter()
        .map(|r| r.node)
        .collect();
    // Nodes without a value in the ranking column (isolated closeness) go last.
    if ranked.len() < graph.node_count() {
        let seen: BTreeSet<_> = ranked.iter().copied().collect();
        let mut rest: Vec<_> = table
            .rows
            .iter()
            .map(|r| r.node)
            .filter(|n| !seen.contains(n))
            .collect();
        rest.sort_by(|a, b| graph.label(*a).cmp(graph.label(*b)).then(a.cmp(b)));
        ranked.extend(rest);
    }
    if let Some(k) = params.top {
        ranked.truncate(k);
    }
    Ok(CentralityOutput {
        rows: centrality_rows(&table, graph, Some(&ranked)),
        scatter: scatter_rows(&table, graph),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentsParams {
    pub top: usize,
    pub distance: Option<DistanceMode>,
    pub local_n: bool,
    pub seed: u64,
}

impl Default for ComponentsParams {
    fn default() -> Self {
        ComponentsParams {
            top: 10,
            distance: None,
            local_n: false,
            seed: 0,
        }
    }
}

pub fn components(
    graph: &ActorLinkGraph,
    params: &ComponentsParams,
    workers: Workers,
) -> anyhow::Result<ComponentsReport> {
    let options = SummaryOptions {
        distance: params.distance,
        seed: params.seed,
        local_n: params.local_n,
        workers,
        ..SummaryOptions::default()
    };
    Ok(ComponentsReport {
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        component_count: connected_components(graph).len(),
        components: top_components_report(graph, params.top, &options)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommunitiesParams {
    pub k: usize,
    pub scope: Scope,
    pub fast: Option<BetweennessMode>,
    pub max_removals: Option<usize>,
}

impl Default for CommunitiesParams {
    fn default() -> Self {
        CommunitiesParams {
            k: 5,
            scope: Scope::LargestComponent,
            fast: None,
            max_removals: None,
        }
    }
}

pub fn communities(
    graph: &ActorLinkGraph,
    params: &CommunitiesParams,
    workers: Workers,
) -> anyhow::Result<CommunityPartition> {
    let config = GirvanNewmanConfig {
        scope: params.scope,
        target_k: params.k,
        max_removals: params.max_removals,
        betweenness: params.fast.unwrap_or(BetweennessMode::Exact),
        workers,
    };
    let partition = girvan_newman(graph, &config)?;
    if !partition.target_reached {
        log::warn!(
            "stopped after {} removals with {} communities, short of {}",
            partition.removal_log.len(),
            partition.communities.len(),
            params.k
        );
    }
    Ok(partition)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StatsKind {
    Time,
    Actors,
    Types,
    Countries,
    Sponsors,
    Words,
    Links,
}

pub fn parse_reports(text: &str) -> anyhow::Result<BTreeSet<StatsKind>> {
    let mut out = BTreeSet::new();
    for part in split_list(text) {
        out.insert(match part {
            "time" => StatsKind::Time,
            "actors" => StatsKind::Actors,
            "types" => StatsKind::Types,
            "countries" => StatsKind::Countries,
            "sponsors" => StatsKind::Sponsors,
            "words" => StatsKind::Words,
            "links" => StatsKind::Links,
            _ => bail!("unknown report {part:?}"),
        });
    }
    if out.is_empty() {
        bail!("no reports selected");
    }
    Ok(out)
}

pub fn parse_bucket(text: &str) -> anyhow::Result<Bucket> {
    match text {
        "day" => Ok(Bucket::Day),
        "week" => Ok(Bucket::Week),
        "month" => Ok(Bucket::Month),
        _ => bail!("bucket must be day, week or month, got {text:?}"),
    }
}

pub fn parse_fields(text: &str) -> anyhow::Result<Vec<TextField>> {
    let fields: Vec<TextField> = split_list(text)
        .map(|f| TextField::parse(f).ok_or_else(|| anyhow!("unknown text field {f:?}")))
        .collect::<anyhow::Result<_>>()?;
    if fields.is_empty() {
        bail!("no text fields selected");
    }
    Ok(fields)
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn load_stopwords(path: &Path) -> anyhow::Result<Stopwords> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Stopwords::new(
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#')),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsParams {
    pub reports: BTreeSet<StatsKind>,
    pub k: usize,
    pub bucket: Bucket,
    pub words: WordFrequencyOptions,
}

impl Default for StatsParams {
    fn default() -> Self {
        StatsParams {
            reports: [
                StatsKind::Time,
                StatsKind::Actors,
                StatsKind::Types,
                StatsKind::Countries,
                StatsKind::Words,
                StatsKind::Links,
            ]
            .into_iter()
            .collect(),
            k: 50,
            bucket: Bucket::Day,
            words: WordFrequencyOptions::default(),
        }
    }
}

pub fn stats(dataset: &Dataset, params: &StatsParams) -> StatsReport {
    let want = |k| params.reports.contains(&k);
    let words = WordFrequencyOptions {
        k: params.k,
        ..params.words.clone()
    };
    StatsReport {
        time: want(StatsKind::Time).then(|| time_histogram(dataset, params.bucket)),
        actors: want(StatsKind::Actors).then(|| top_actors(dataset, params.k)),
        types: want(StatsKind::Types).then(|| post_type_distribution(dataset)),
        countries: want(StatsKind::Countries).then(|| admin_country_distribution(dataset)),
        sponsors: want(StatsKind::Sponsors).then(|| sponsor_distribution(dataset, params.k)),
        words: want(StatsKind::Words).then(|| word_frequency(dataset, &words)),
        links: want(StatsKind::Links).then(|| top_links_crosstab(dataset, params.k)),
    }
}

/// The ranked, Facebook-free links the liveness audit probes.
pub fn audit_targets(dataset: &Dataset, top: usize) -> Vec<String> {
    crate::urlcheck::filter_non_facebook(link_ranking(dataset))
        .into_iter()
        .take(top)
        .map(|l| l.url)
        .collect()
}
