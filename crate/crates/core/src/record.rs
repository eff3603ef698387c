//! Typed post records for the 40-field CrowdTangle export and the in-memory dataset.
//!
//! Tokenizing CSV is left to the caller; this module turns one row of raw cell
//! strings (already mapped onto [`Field`] slots) into a [`PostRecord`], and back.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{NaiveDate, NaiveTime};
use hashbrown::HashSet;
use serde::{Deserialize, Serialize};

/// One column of the export, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Field {
    AccountName,
    AccountHandle,
    PlatformId,
    PageCategory,
    PageAdminTopCountry,
    PageDescription,
    PageCreated,
    SubscriberCount,
    FollowersAtPosting,
    Date,
    PostCreatedDate,
    PostCreatedTime,
    Type,
    TotalInteraction,
    LikeCount,
    CommentCount,
    ShareCount,
    LoveCount,
    WowCount,
    HahaCount,
    SadCount,
    AngryCount,
    CareCount,
    VideoShareStatus,
    IsVideoOwner,
    VideoPostViewCount,
    VideoTotalViewCount,
    VideoAllCrosspostsViewCount,
    VideoLength,
    PostUrl,
    Message,
    LinkOriginal,
    LinkExpanded,
    ImageText,
    Title,
    Description,
    SponsorPlatformId,
    SponsorName,
    SponsorCategory,
    Score,
}

pub const FIELD_COUNT: usize = 40;

impl Field {
    pub const ALL: [Field; FIELD_COUNT] = [
        Field::AccountName,
        Field::AccountHandle,
        Field::PlatformId,
        Field::PageCategory,
        Field::PageAdminTopCountry,
        Field::PageDescription,
        Field::PageCreated,
        Field::SubscriberCount,
        Field::FollowersAtPosting,
        Field::Date,
        Field::PostCreatedDate,
        Field::PostCreatedTime,
        Field::Type,
        Field::TotalInteraction,
        Field::LikeCount,
        Field::CommentCount,
        Field::ShareCount,
        Field::LoveCount,
        Field::WowCount,
        Field::HahaCount,
        Field::SadCount,
        Field::AngryCount,
        Field::CareCount,
        Field::VideoShareStatus,
        Field::IsVideoOwner,
        Field::VideoPostViewCount,
        Field::VideoTotalViewCount,
        Field::VideoAllCrosspostsViewCount,
        Field::VideoLength,
        Field::PostUrl,
        Field::Message,
        Field::LinkOriginal,
        Field::LinkExpanded,
        Field::ImageText,
        Field::Title,
        Field::Description,
        Field::SponsorPlatformId,
        Field::SponsorName,
        Field::SponsorCategory,
        Field::Score,
    ];

    /// Header name as written by the export tool.
    pub const fn header(self) -> &'static str {
        match self {
            Field::AccountName => "account.name",
            Field::AccountHandle => "account.handle",
            Field::PlatformId => "platformId",
            Field::PageCategory => "Page Category",
            Field::PageAdminTopCountry => "Page Admin Top Country",
            Field::PageDescription => "Page Description",
            Field::PageCreated => "Page Created",
            Field::SubscriberCount => "subscriberCount",
            Field::FollowersAtPosting => "Followers at Posting",
            Field::Date => "date",
            Field::PostCreatedDate => "Post Created Date",
            Field::PostCreatedTime => "Post Created Time",
            Field::Type => "type",
            Field::TotalInteraction => "totalInteraction",
            Field::LikeCount => "statistics.actual.likeCount",
            Field::CommentCount => "statistics.actual.commentCount",
            Field::ShareCount => "statistics.actual.shareCount",
            Field::LoveCount => "statistics.actual.loveCount",
            Field::WowCount => "statistics.actual.wowCount",
            Field::HahaCount => "statistics.actual.hahaCount",
            Field::SadCount => "statistics.actual.sadCount",
            Field::AngryCount => "statistics.actual.angryCount",
            Field::CareCount => "statistics.actual.careCount",
            Field::VideoShareStatus => "Video Share Status",
            Field::IsVideoOwner => "Is Video Owner?",
            Field::VideoPostViewCount => "statistics.actual.videoPostViewCount",
            Field::VideoTotalViewCount => "statistics.actual.videoTotalViewCount",
            Field::VideoAllCrosspostsViewCount => "statistics.actual.videoAllCrosspostsViewCount",
            Field::VideoLength => "Video Length",
            Field::PostUrl => "postUrl",
            Field::Message => "message",
            Field::LinkOriginal => "expandedLinks.original",
            Field::LinkExpanded => "expandedLinks.expanded",
            Field::ImageText => "imageText",
            Field::Title => "title",
            Field::Description => "description",
            Field::SponsorPlatformId => "brandedContentSponsor.platformId",
            Field::SponsorName => "brandedContentSponsor.name",
            Field::SponsorCategory => "brandedContentSponsor.category",
            Field::Score => "score",
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Looks a header up by its normalized form (see [`normalize_header`]).
    pub fn from_header(header: &str) -> Option<Field> {
        let wanted = normalize_header(header);
        Field::ALL
            .iter()
            .copied()
            .find(|f| normalize_header(f.header()) == wanted)
    }
}

/// Lowercases and keeps only alphanumeric characters, so `Page Category`,
/// `page.category` and ` PAGE_CATEGORY ` all compare equal.
pub fn normalize_header(header: &str) -> String {
    header
        .trim()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DateFormat {
    /// `YYYY-MM-DD`
    #[default]
    Iso,
    /// `DD-MM-YYYY`
    Dmy,
}

impl DateFormat {
    fn pattern(self) -> &'static str {
        match self {
            DateFormat::Iso => "%Y-%m-%d",
            DateFormat::Dmy => "%d-%m-%Y",
        }
    }

    /// Parses the leading date token; anything after the first space
    /// (a time-of-day or zone suffix) is ignored.
    pub fn parse(self, text: &str) -> Option<NaiveDate> {
        let token = text.trim().split(' ').next().unwrap_or("");
        NaiveDate::parse_from_str(token, self.pattern()).ok()
    }

    pub fn format(self, date: NaiveDate) -> String {
        date.format(self.pattern()).to_string()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostType {
    Photo,
    Link,
    NativeVideo,
    Status,
    LiveVideo,
    Other(String),
}

impl PostType {
    pub fn parse(text: &str) -> PostType {
        match text {
            "photo" => PostType::Photo,
            "link" => PostType::Link,
            "native_video" => PostType::NativeVideo,
            "status" => PostType::Status,
            "live_video" => PostType::LiveVideo,
            other => PostType::Other(other.to_owned()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            PostType::Photo => "photo",
            PostType::Link => "link",
            PostType::NativeVideo => "native_video",
            PostType::Status => "status",
            PostType::LiveVideo => "live_video",
            PostType::Other(s) => s,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionCounts {
    pub like: Option<u64>,
    pub comment: Option<u64>,
    pub share: Option<u64>,
    pub love: Option<u64>,
    pub wow: Option<u64>,
    pub haha: Option<u64>,
    pub sad: Option<u64>,
    pub angry: Option<u64>,
    pub care: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoViewCounts {
    pub post: Option<u64>,
    pub total: Option<u64>,
    pub crossposts: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandedSponsor {
    pub platform_id: Option<i64>,
    pub name: String,
    pub category: Option<String>,
}

/// One row of the export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub account_name: String,
    pub account_handle: Option<String>,
    pub platform_id: Option<i64>,
    pub page_category: Option<String>,
    pub page_admin_top_country: Option<String>,
    pub page_description: Option<String>,
    pub page_created: Option<NaiveDate>,
    pub subscriber_count: Option<u64>,
    pub followers_at_posting: Option<u64>,
    /// The export's free-form `date` column (a timestamp with zone suffix), kept verbatim.
    pub posted_at: Option<String>,
    pub post_created_date: NaiveDate,
    pub post_created_time: NaiveTime,
    pub post_type: PostType,
    pub total_interactions: Option<u64>,
    pub reactions: ReactionCounts,
    pub video_share_status: Option<String>,
    pub is_video_owner: Option<bool>,
    pub video_views: VideoViewCounts,
    pub video_length: Option<String>,
    pub post_url: Option<String>,
    pub message: Option<String>,
    pub link_original: Option<String>,
    pub link_expanded: Option<String>,
    pub image_text: Option<String>,
    pub title: Option<String>,
    pub description: Option<String>,
    pub branded_sponsor: Option<BrandedSponsor>,
    pub score: Option<f64>,
}

impl PostRecord {
    /// A record with only the required fields set.
    pub fn new(account_name: impl Into<String>, date: NaiveDate, time: NaiveTime) -> Self {
        PostRecord {
            account_name: account_name.into(),
            account_handle: None,
            platform_id: None,
            page_category: None,
            page_admin_top_country: None,
            page_description: None,
            page_created: None,
            subscriber_count: None,
            followers_at_posting: None,
            posted_at: None,
            post_created_date: date,
            post_created_time: time,
            post_type: PostType::Other(String::new()),
            total_interactions: None,
            reactions: ReactionCounts::default(),
            video_share_status: None,
            is_video_owner: None,
            video_views: VideoViewCounts::default(),
            video_length: None,
            post_url: None,
            message: None,
            link_original: None,
            link_expanded: None,
            image_text: None,
            title: None,
            description: None,
            branded_sponsor: None,
            score: None,
        }
    }

    /// Cell strings in canonical [`Field`] order. Absent values are empty strings.
    pub fn to_cells(&self, dates: DateFormat) -> Vec<String> {
        fn text(v: &Option<String>) -> String {
            v.clone().unwrap_or_default()
        }
        fn num<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        let sponsor = self.branded_sponsor.as_ref();
        let r = &self.reactions;
        let cells = [
            self.account_name.clone(),
            text(&self.account_handle),
            num(&self.platform_id),
            text(&self.page_category),
            text(&self.page_admin_top_country),
            text(&self.page_description),
            self.page_created
                .map(|d| dates.format(d))
                .unwrap_or_default(),
            num(&self.subscriber_count),
            num(&self.followers_at_posting),
            text(&self.posted_at),
            dates.format(self.post_created_date),
            self.post_created_time.format("%H:%M:%S").to_string(),
            self.post_type.as_str().to_owned(),
            num(&self.total_interactions),
            num(&r.like),
            num(&r.comment),
            num(&r.share),
            num(&r.love),
            num(&r.wow),
            num(&r.haha),
            num(&r.sad),
            num(&r.angry),
            num(&r.care),
            text(&self.video_share_status),
            match self.is_video_owner {
                Some(true) => "Yes".to_owned(),
                Some(false) => "No".to_owned(),
                None => String::new(),
            },
            num(&self.video_views.post),
            num(&self.video_views.total),
            num(&self.video_views.crossposts),
            text(&self.video_length),
            text(&self.post_url),
            text(&self.message),
            text(&self.link_original),
            text(&self.link_expanded),
            text(&self.image_text),
            text(&self.title),
            text(&self.description),
            sponsor.map(|s| num(&s.platform_id)).unwrap_or_default(),
            sponsor.map(|s| s.name.clone()).unwrap_or_default(),
            sponsor.map(|s| text(&s.category)).unwrap_or_default(),
            num(&self.score),
        ];
        cells.into()
    }

    /// Key used by [`merge_datasets`]: `(platform_id, post_url)` when both are
    /// present, otherwise every field.
    pub fn dedup_key(&self) -> DedupKey {
        match (self.platform_id, &self.post_url) {
            (Some(id), Some(url)) => DedupKey::Post(id, url.clone()),
            _ => {
                let mut key = String::new();
                for cell in self.to_cells(DateFormat::Iso) {
                    key.push_str(&format!("{}:", cell.len()));
                    key.push_str(&cell);
                }
                DedupKey::Fields(key)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DedupKey {
    Post(i64, String),
    Fields(String),
}

/// Why a row did not become a record. The display string is the key used in
/// [`IngestReport::rejection_reasons`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("missing account_name")]
    MissingAccountName,
    #[error("missing post_created_date")]
    MissingDate,
    #[error("invalid post_created_date")]
    InvalidDate,
    #[error("invalid post_created_time")]
    InvalidTime,
    #[error("invalid {0}")]
    InvalidField(&'static str),
    #[error("negative {0}")]
    NegativeCount(&'static str),
}

/// Converts raw cells into records under a schema mode.
///
/// Required fields (`account.name`, `Post Created Date`, `Post Created Time`)
/// reject the row in both modes. Optional fields that fail to parse reject the
/// row in strict mode and degrade to absent in lenient mode.
#[derive(Clone, Copy, Debug, Default)]
pub struct RecordParser {
    pub mode: SchemaMode,
    pub dates: DateFormat,
}

impl RecordParser {
    pub fn new(mode: SchemaMode, dates: DateFormat) -> Self {
        RecordParser { mode, dates }
    }

    /// `cells[f.index()]` is `None` when the column is missing from the header.
    pub fn parse(&self, cells: &[Option<&str>; FIELD_COUNT]) -> Result<PostRecord, Rejection> {
        let cell = |f: Field| cells[f.index()].filter(|s| !s.is_empty());

        let account_name = match cell(Field::AccountName) {
            Some(name) if !name.trim().is_empty() => name.to_owned(),
            _ => return Err(Rejection::MissingAccountName),
        };
        let post_created_date = match cell(Field::PostCreatedDate) {
            None => return Err(Rejection::MissingDate),
            Some(s) => self.dates.parse(s).ok_or(Rejection::InvalidDate)?,
        };
        let post_created_time = cell(Field::PostCreatedTime)
            .and_then(|s| NaiveTime::parse_from_str(s.trim(), "%H:%M:%S").ok())
            .ok_or(Rejection::InvalidTime)?;

        let text = |f: Field| cell(f).map(str::to_owned);
        let count = |f: Field| self.count(cell(f), f);
        let signed = |f: Field| self.optional(cell(f), f, |s| s.trim().parse::<i64>().ok());

        let is_video_owner = self.optional(
            cell(Field::IsVideoOwner).filter(|s| s.trim() != "-"),
            Field::IsVideoOwner,
            |s| match s.trim().to_ascii_lowercase().as_str() {
                "yes" | "true" | "1" => Some(true),
                "no" | "false" | "0" => Some(false),
                _ => None,
            },
        )?;

        let sponsor_id = signed(Field::SponsorPlatformId)?;
        let sponsor_name = text(Field::SponsorName);
        let sponsor_category = text(Field::SponsorCategory);
        let branded_sponsor =
            if sponsor_id.is_some() || sponsor_name.is_some() || sponsor_category.is_some() {
                Some(BrandedSponsor {
                    platform_id: sponsor_id,
                    name: sponsor_name.unwrap_or_default(),
                    category: sponsor_category,
                })
            } else {
                None
            };

        Ok(PostRecord {
            account_name,
            account_handle: text(Field::AccountHandle),
            platform_id: signed(Field::PlatformId)?,
            page_category: text(Field::PageCategory),
            page_admin_top_country: text(Field::PageAdminTopCountry),
            page_description: text(Field::PageDescription),
            page_created: self.optional(cell(Field::PageCreated), Field::PageCreated, |s| {
                self.dates.parse(s)
            })?,
            subscriber_count: count(Field::SubscriberCount)?,
            followers_at_posting: count(Field::FollowersAtPosting)?,
            posted_at: text(Field::Date),
            post_created_date,
            post_created_time,
            post_type: PostType::parse(cell(Field::Type).unwrap_or("")),
            total_interactions: count(Field::TotalInteraction)?,
            reactions: ReactionCounts {
                like: count(Field::LikeCount)?,
                comment: count(Field::CommentCount)?,
                share: count(Field::ShareCount)?,
                love: count(Field::LoveCount)?,
                wow: count(Field::WowCount)?,
                haha: count(Field::HahaCount)?,
                sad: count(Field::SadCount)?,
                angry: count(Field::AngryCount)?,
                care: count(Field::CareCount)?,
            },
            video_share_status: text(Field::VideoShareStatus),
            is_video_owner,
            video_views: VideoViewCounts {
                post: count(Field::VideoPostViewCount)?,
                total: count(Field::VideoTotalViewCount)?,
                crossposts: count(Field::VideoAllCrosspostsViewCount)?,
            },
            video_length: text(Field::VideoLength),
            post_url: text(Field::PostUrl),
            message: text(Field::Message),
            link_original: text(Field::LinkOriginal),
            link_expanded: text(Field::LinkExpanded),
            image_text: text(Field::ImageText),
            title: text(Field::Title),
            description: text(Field::Description),
            branded_sponsor,
            score: self.optional(cell(Field::Score), Field::Score, |s| {
                s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
            })?,
        })
    }

    fn optional<T>(
        &self,
        raw: Option<&str>,
        field: Field,
        parse: impl FnOnce(&str) -> Option<T>,
    ) -> Result<Option<T>, Rejection> {
        let Some(raw) = raw else { return Ok(None) };
        match (parse(raw), self.mode) {
            (Some(v), _) => Ok(Some(v)),
            (None, SchemaMode::Lenient) => Ok(None),
            (None, SchemaMode::Strict) => Err(Rejection::InvalidField(field.header())),
        }
    }

    fn count(&self, raw: Option<&str>, field: Field) -> Result<Option<u64>, Rejection> {
        let Some(raw) = raw else { return Ok(None) };
        let trimmed = raw.trim();
        // Exports sometimes carry integer counts as "12.0".
        let value = trimmed.parse::<i64>().ok().or_else(|| {
            trimmed
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && v.abs() < 9.0e15 && (*v as i64) as f64 == *v)
                .map(|v| v as i64)
        });
        match (value, self.mode) {
            (Some(v), _) if v >= 0 => Ok(Some(v as u64)),
            (_, SchemaMode::Lenient) => Ok(None),
            (Some(_), SchemaMode::Strict) => Err(Rejection::NegativeCount(field.header())),
            (None, SchemaMode::Strict) => Err(Rejection::InvalidField(field.header())),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_accepted: u64,
    pub rows_rejected: u64,
    pub rejection_reasons: BTreeMap<String, u64>,
    /// Invalid UTF-8 sequences replaced with U+FFFD while decoding.
    pub replaced_utf8_sequences: u64,
}

impl IngestReport {
    pub fn accept(&mut self) {
        self.rows_read += 1;
        self.rows_accepted += 1;
    }

    pub fn reject(&mut self, reason: &str) {
        self.rows_read += 1;
        self.rows_rejected += 1;
        *self.rejection_reasons.entry(reason.to_owned()).or_insert(0) += 1;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<PostRecord>,
    pub source_files: Vec<String>,
    pub ingest_report: IngestReport,
}

impl Dataset {
    /// Wraps already-validated records, e.g. synthetic fixtures.
    pub fn from_records(records: Vec<PostRecord>) -> Self {
        let n = records.len() as u64;
        Dataset {
            records,
            source_files: Vec::new(),
            ingest_report: IngestReport {
                rows_read: n,
                rows_accepted: n,
                ..IngestReport::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub const DUPLICATE_REASON: &str = "duplicate";

/// Concatenates datasets, keeping the first occurrence of each [`DedupKey`].
/// Dropped rows move from accepted to rejected under [`DUPLICATE_REASON`].
pub fn merge_datasets(parts: Vec<Dataset>) -> Dataset {
    let mut merged = Dataset::default();
    let mut seen: HashSet<DedupKey> = HashSet::new();
    let mut duplicates = 0u64;
    for part in parts {
        let report = part.ingest_report;
        merged.ingest_report.rows_read += report.rows_read;
        merged.ingest_report.rows_rejected += report.rows_rejected;
        merged.ingest_report.replaced_utf8_sequences += report.replaced_utf8_sequences;
        for (reason, n) in report.rejection_reasons {
            *merged
                .ingest_report
                .rejection_reasons
                .entry(reason)
                .or_insert(0) += n;
        }
        merged.source_files.extend(part.source_files);
        for record in part.records {
            if seen.insert(record.dedup_key()) {
                merged.records.push(record);
            } else {
                duplicates += 1;
            }
        }
    }
    if duplicates > 0 {
        merged.ingest_report.rows_rejected += duplicates;
        *merged
            .ingest_report
            .rejection_reasons
            .entry(DUPLICATE_REASON.to_owned())
            .or_insert(0) += duplicates;
    }
    merged.ingest_report.rows_accepted = merged.records.len() as u64;
    merged
}
