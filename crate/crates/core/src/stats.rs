//! Descriptive statistics over a dataset.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::record::{Dataset, PostRecord};

pub const UNKNOWN_KEY: &str = "(unknown)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub key: String,
    pub count: u64,
    /// Share of `total`, in percent.
    pub percent: f64,
    /// Share of `present`, in percent; `None` for the unknown bucket.
    pub percent_of_present: Option<f64>,
}

/// Counts per key, most frequent first. Keys beyond the requested `k` are
/// folded into `other_count`, so `Σ entries.count + other_count = total`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub dimension: String,
    pub entries: Vec<DistributionEntry>,
    pub other_count: u64,
    pub total: u64,
    /// Records where the dimension had a value.
    pub present: u64,
}

impl DistributionReport {
    /// Builds a report from per-key counts. `None` keys land in [`UNKNOWN_KEY`].
    pub fn from_counts(
        dimension: &str,
        counts: BTreeMap<Option<String>, u64>,
        k: Option<usize>,
    ) -> DistributionReport {
        let total: u64 = counts.values().sum();
        let present = total - counts.get(&None).copied().unwrap_or(0);
        let pct = |n: u64, d: u64| {
            if d == 0 {
                0.0
            } else {
                n as f64 * 100.0 / d as f64
            }
        };
        let mut entries: Vec<DistributionEntry> = counts
            .into_iter()
            .map(|(key, count)| DistributionEntry {
                percent: pct(count, total),
                percent_of_present: key.as_ref().map(|_| pct(count, present)),
                key: key.unwrap_or_else(|| UNKNOWN_KEY.to_owned()),
                count,
            })
            .collect();
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
        let mut other_count = 0;
        if let Some(k) = k {
            other_count = entries.iter().skip(k).map(|e| e.count).sum();
            entries.truncate(k);
        }
        DistributionReport {
            dimension: dimension.to_owned(),
            entries,
            other_count,
            total,
            present,
        }
    }

    pub fn get(&self, key: &str) -> Option<&DistributionEntry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

fn distribution<'a>(
    dataset: &'a Dataset,
    dimension: &str,
    k: Option<usize>,
    key: impl Fn(&'a PostRecord) -> Option<&'a str>,
) -> DistributionReport {
    let mut counts: BTreeMap<Option<String>, u64> = BTreeMap::new();
    let mut tally: BTreeMap<Option<&str>, u64> = BTreeMap::new();
    for r in &dataset.records {
        *tally.entry(key(r).filter(|s| !s.is_empty())).or_insert(0) += 1;
    }
    for (k, n) in tally {
        counts.insert(k.map(str::to_owned), n);
    }
    DistributionReport::from_counts(dimension, counts, k)
}

/// Posts per `account_name`, top `k`.
pub fn top_actors(dataset: &Dataset, k: usize) -> DistributionReport {
    distribution(dataset, "actor", Some(k), |r| Some(r.account_name.as_str()))
}

/// Posts per type; unrecognized types are their own keys.
pub fn post_type_distribution(dataset: &Dataset) -> DistributionReport {
    distribution(dataset, "post_type", None, |r| Some(r.post_type.as_str()))
}

pub fn admin_country_distribution(dataset: &Dataset) -> DistributionReport {
    distribution(dataset, "admin_country", None, |r| {
        r.page_admin_top_country.as_deref()
    })
}

/// Posts per branded-content sponsor name.
pub fn sponsor_distribution(dataset: &Dataset, k: usize) -> DistributionReport {
    distribution(dataset, "sponsor", Some(k), |r| {
        r.branded_sponsor.as_ref().map(|s| s.name.as_str())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Day,
    /// ISO weeks, starting Monday.
    Week,
    Month,
}

impl Bucket {
    pub fn start_of(self, date: NaiveDate) -> NaiveDate {
        match self {
            Bucket::Day => date,
            Bucket::Week => date - Days::new(u64::from(date.weekday().num_days_from_monday())),
            Bucket::Month => date.with_day(1).expect("day 1 exists"),
        }
    }

    fn next(self, start: NaiveDate) -> NaiveDate {
        match self {
            Bucket::Day => start + Days::new(1),
            Bucket::Week => start + Days::new(7),
            Bucket::Month => start + Months::new(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bucket_start: NaiveDate,
    pub count: u64,
}

/// Posts per calendar bucket from the first to the last post, empty buckets included.
pub fn time_histogram(dataset: &Dataset, bucket: Bucket) -> Vec<HistogramBin> {
    let mut counts: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for r in &dataset.records {
        *counts
            .entry(bucket.start_of(r.post_created_date))
            .or_insert(0) += 1;
    }
    let (Some(&first), Some(&last)) = (counts.keys().next(), counts.keys().next_back()) else {
        return Vec::new();
    };
    let mut bins = Vec::new();
    let mut at = first;
    while at <= last {
        bins.push(HistogramBin {
            bucket_start: at,
            count: counts.get(&at).copied().unwrap_or(0),
        });
        at = bucket.next(at);
    }
    bins
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextField {
    Message,
    ImageText,
    Title,
    PageDescription,
}

impl TextField {
    pub fn parse(name: &str) -> Option<TextField> {
        match name {
            "message" => Some(TextField::Message),
            "image_text" | "imagetext" => Some(TextField::ImageText),
            "title" => Some(TextField::Title),
            "page_description" | "description" => Some(TextField::PageDescription),
            _ => None,
        }
    }

    fn get(self, r: &PostRecord) -> Option<&str> {
        match self {
            TextField::Message => r.message.as_deref(),
            TextField::ImageText => r.image_text.as_deref(),
            TextField::Title => r.title.as_deref(),
            TextField::PageDescription => r.page_description.as_deref(),
        }
    }
}

/// Letters plus combining marks, so Devanagari vowel signs and viramas stay
/// inside their words.
fn is_word_char(c: char) -> bool {
    use GeneralCategory::*;
    c.is_alphabetic()
        || matches!(
            get_general_category(c),
            NonspacingMark | SpacingMark | EnclosingMark
        )
}

/// Splits on non-letter codepoints and lowercases. Tokens are not filtered.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !is_word_char(c))
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
}

/// Lowercased stopwords.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords(
            words
                .into_iter()
                .flat_map(|w| tokenize(w.as_ref()).collect::<Vec<_>>())
                .collect(),
        )
    }

    /// Bundled English and Hindi lists.
    pub fn defaults() -> Self {
        Self::new(ENGLISH_STOPWORDS.iter().chain(HINDI_STOPWORDS))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordFrequencyOptions {
    pub fields: Vec<TextField>,
    pub stopwords: Stopwords,
    pub k: usize,
    /// Count adjacent-word pairs instead of single words.
    pub bigrams: bool,
}

impl Default for WordFrequencyOptions {
    fn default() -> Self {
        WordFrequencyOptions {
            fields: alloc::vec![TextField::Message],
            stopwords: Stopwords::defaults(),
            k: 50,
            bigrams: false,
        }
    }
}

/// Most frequent words over the chosen text fields. Tokens shorter than two
/// codepoints or in the stopword list are dropped before counting.
pub fn word_frequency(dataset: &Dataset, options: &WordFrequencyOptions) -> DistributionReport {
    let mut counts: BTreeMap<Option<String>, u64> = BTreeMap::new();
    let mut kept: Vec<String> = Vec::new();
    for r in &dataset.records {
        for field in &options.fields {
            let Some(text) = field.get(r) else { continue };
            kept.clear();
            kept.extend(
                tokenize(text).filter(|t| t.chars().count() >= 2 && !options.stopwords.contains(t)),
            );
            if options.bigrams {
                for pair in kept.windows(2) {
                    let mut key = pair[0].clone();
                    key.push(' ');
                    key.push_str(&pair[1]);
                    *counts.entry(Some(key)).or_insert(0) += 1;
                }
            } else {
                for t in kept.drain(..) {
                    *counts.entry(Some(t)).or_insert(0) += 1;
                }
            }
        }
    }
    let dimension = if options.bigrams { "bigram" } else { "word" };
    DistributionReport::from_counts(dimension, counts, Some(options.k))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkCount {
    pub url: String,
    pub count: u64,
}

/// Every `link_original` with its share count, most shared first, ties by URL.
pub fn link_ranking(dataset: &Dataset) -> Vec<LinkCount> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in &dataset.records {
        if let Some(url) = r.link_original.as_deref() {
            *counts.entry(url).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<LinkCount> = counts
        .into_iter()
        .map(|(url, count)| LinkCount {
            url: url.to_owned(),
            count,
        })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.url.cmp(&b.url)));
    ranked
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub page_category: String,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTabRow {
    pub link: String,
    pub link_count: u64,
    pub category_counts: Vec<CategoryCount>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCategoryCrossTab {
    pub rows: Vec<CrossTabRow>,
}

/// Top `k` links by share count; per link, distinct sharing pages grouped by
/// page category (pages without a category are not tallied).
pub fn top_links_crosstab(dataset: &Dataset, k: usize) -> LinkCategoryCrossTab {
    let ranked = link_ranking(dataset);
    let wanted: BTreeMap<&str, usize> = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, l)| (l.url.as_str(), i))
        .collect();
    let mut pages: Vec<BTreeSet<(&str, &str)>> = alloc::vec![BTreeSet::new(); wanted.len()];
    for r in &dataset.records {
        let (Some(url), Some(category)) = (r.link_original.as_deref(), r.page_category.as_deref())
        else {
            continue;
        };
        if let Some(&i) = wanted.get(url) {
            pages[i].insert((category, r.account_name.as_str()));
        }
    }
    let rows = ranked
        .into_iter()
        .take(k)
        .zip(pages)
        .map(|(link, pages)| {
            let mut per_category: BTreeMap<&str, u64> = BTreeMap::new();
            for (category, _) in pages {
                *per_category.entry(category).or_insert(0) += 1;
            }
            let mut category_counts: Vec<CategoryCount> = per_category
                .into_iter()
                .map(|(c, count)| CategoryCount {
                    page_category: c.to_owned(),
                    count,
                })
                .collect();
            category_counts.sort_by(|a, b| {
                b.count
                    .cmp(&a.count)
                    .then_with(|| a.page_category.cmp(&b.page_category))
            });
            CrossTabRow {
                link: link.url,
                link_count: link.count,
                category_counts,
            }
        })
        .collect();
    LinkCategoryCrossTab { rows }
}

pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "http",
    "https",
    "www",
    "com",
];

pub const HINDI_STOPWORDS: &[&str] = &[
    "के",
    "का",
    "की",
    "है",
    "हैं",
    "में",
    "और",
    "को",
    "से",
    "पर",
    "यह",
    "ये",
    "वह",
    "वे",
    "था",
    "थे",
    "थी",
    "हो",
    "गया",
    "गई",
    "गए",
    "कर",
    "करने",
    "करें",
    "किया",
    "लिए",
    "एक",
    "भी",
    "तो",
    "ही",
    "नहीं",
    "या",
    "जो",
    "कि",
    "अपने",
    "अपनी",
    "अपना",
    "इस",
    "उस",
    "इसके",
    "उसके",
    "साथ",
    "बाद",
    "तक",
    "जब",
    "तब",
    "अब",
    "कुछ",
    "सब",
    "सभी",
    "रहा",
    "रही",
    "रहे",
    "होता",
    "होती",
    "होने",
    "हुआ",
    "हुई",
    "हुए",
    "वाले",
    "वाली",
    "आप",
    "हम",
    "मैं",
    "तुम",
    "उन",
    "इन",
    "कोई",
    "क्या",
    "क्यों",
    "कैसे",
    "यहाँ",
    "वहाँ",
    "ने",
];
