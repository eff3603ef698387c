//! Seeded synthetic datasets.

use std::collections::HashSet;

use chrono::{Duration, NaiveDate, NaiveTime};
use coordnet_core::record::PostType;
use coordnet_core::{Dataset, PostRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FULL_NODES: usize = 414_490;
pub const FULL_EDGES: usize = 537_225;
pub const FULL_ACTORS: usize = 630;
pub const FULL_MAX_DEGREE: usize = 23_497;

fn noon() -> NaiveTime {
    NaiveTime::from_hms_opt(12, 0, 0).unwrap()
}

pub fn day(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Actor degrees: one hub at `FULL_MAX_DEGREE`, the rest a `1/sqrt(rank)`
/// tail rounded by largest remainder so the total is `FULL_EDGES`.
fn actor_degrees() -> Vec<usize> {
    let rest = FULL_EDGES - FULL_MAX_DEGREE;
    let weights: Vec<f64> = (1..FULL_ACTORS)
        .map(|i| 1.0 / ((i + 1) as f64).sqrt())
        .collect();
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w * rest as f64 / total).collect();
    let mut degrees: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..degrees.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let missing = rest - degrees.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        degrees[i] += 1;
    }
    let mut all = vec![FULL_MAX_DEGREE];
    all.extend(degrees);
    all
}

/// One record per actor/link edge of a bipartite graph with the target
/// node and edge counts: 630 actors, 413,860 links, 537,225 edges.
pub fn full_scale_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = actor_degrees();
    let links = FULL_NODES - FULL_ACTORS;
    let mut stubs: Vec<u32> = degrees
        .iter()
        .enumerate()
        .flat_map(|(a, &d)| std::iter::repeat_n(a as u32, d))
        .collect();
    stubs.shuffle(&mut rng);

    let mut pairs: HashSet<(u32, u32)> = HashSet::with_capacity(FULL_EDGES);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(FULL_EDGES);
    let (first, extra) = stubs.split_at(links);
    for (link, &actor) in first.iter().enumerate() {
        pairs.insert((actor, link as u32));
        edges.push((actor, link as u32));
    }
    for &actor in extra {
        loop {
            let link = rng.random_range(0..links as u32);
            if pairs.insert((actor, link)) {
                edges.push((actor, link));
                break;
            }
        }
    }
    let start = day(2020, 11, 1);
    let records = edges
        .into_iter()
        .map(|(actor, link)| {
            let mut r = PostRecord::new(
                format!("actor-{actor:03}"),
                start + Duration::days(i64::from(link % 120)),
                noon(),
            );
            r.link_original = Some(format!("https://l{link}.example/"));
            r
        })
        .collect();
    Dataset::from_records(records)
}

pub const TYPES: [&str; 6] = [
    "photo",
    "link",
    "native_video",
    "status",
    "live_video",
    "event",
];
pub const COUNTRIES: [&str; 5] = ["IN", "SA", "AU", "PK", "BD"];
pub const CATEGORIES: [&str; 4] = ["NEWS_SITE", "COMMUNITY", "POLITICIAN", "MEDIA_NEWS_COMPANY"];

/// Rows with skewed actors, mixed types, absent values and a 150-day date span.
/// Each actor has one fixed category and country, like a real page.
pub fn stats_records(rows: usize, seed: u64) -> Vec<PostRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actors: Vec<(String, Option<&str>, Option<&str>)> = (0..40)
        .map(|i| {
            let category = (i % 7 != 6).then(|| CATEGORIES[i % CATEGORIES.len()]);
            let country = (i % 9 != 8).then(|| COUNTRIES[(i * i) % COUNTRIES.len()]);
            (format!("Page {i:02} समूह"), category, country)
        })
        .collect();
    let start = day(2020, 11, 1);
    (0..rows)
        .map(|_| {
            let a = (rng.random::<f64>().powi(2) * actors.len() as f64) as usize;
            let (name, category, country) = &actors[a];
            let date = start + Duration::days(rng.random_range(0..150));
            let time = NaiveTime::from_hms_opt(rng.random_range(0..24), rng.random_range(0..60), 0)
                .unwrap();
            let mut r = PostRecord::new(name.clone(), date, time);
            r.page_category = category.map(str::to_owned);
            r.page_admin_top_country = country.map(str::to_owned);
            r.post_type = PostType::parse(TYPES[rng.random_range(0..TYPES.len())]);
            if rng.random_bool(0.8) {
                let l = (rng.random::<f64>().powi(3) * 120.0) as usize;
                r.link_original = Some(format!("https://site{}.example/story/{l}", l % 7));
            }
            r
        })
        .collect()
}

/// Records whose type and country shares are exactly the given per-10,000 counts.
pub fn mix_records(types: &[(&str, usize)], countries: &[(&str, usize)]) -> Vec<PostRecord> {
    let total: usize = types.iter().map(|t| t.1).sum();
    assert_eq!(total, countries.iter().map(|c| c.1).sum::<usize>());
    let expand = |spec: &[(&str, usize)]| -> Vec<String> {
        spec.iter()
            .flat_map(|&(k, n)| std::iter::repeat_n(k.to_owned(), n))
            .collect()
    };
    let types = expand(types);
    let mut countries = expand(countries);
    countries.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    types
        .into_iter()
        .zip(countries)
        .enumerate()
        .map(|(i, (t, c))| {
            let mut r = PostRecord::new(format!("page-{}", i % 97), day(2021, 1, 1), noon());
            r.post_type = PostType::parse(&t);
            r.page_admin_top_country = Some(c);
            r
        })
        .collect()
}
