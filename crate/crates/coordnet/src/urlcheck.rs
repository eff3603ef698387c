//! Link liveness audit.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::net::ToSocketAddrs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use coordnet_core::stats::LinkCount;

/// URLs containing this substring are never probed.
pub const FACEBOOK_MARKER: &str = "www.facebook.com";
pub const PROXY_ENV: &str = "COORDNET_PROXY";

pub fn is_facebook(url: &str) -> bool {
    url.contains(FACEBOOK_MARKER)
}

/// Drops Facebook URLs, keeping the ranking order of the rest.
pub fn filter_non_facebook(links: Vec<LinkCount>) -> Vec<LinkCount> {
    links.into_iter().filter(|l| !is_facebook(&l.url)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckPolicy {
    pub timeout_ms: u64,
    pub max_redirects: u32,
    /// Retry with GET when HEAD answers 405 or 501.
    pub head_then_get: bool,
    pub concurrency_limit: usize,
    /// Minimum gap between one request's completion and the next request to the same host.
    pub per_host_delay_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy: Option<String>,
}

impl Default for CheckPolicy {
    fn default() -> Self {
        CheckPolicy {
            timeout_ms: 10_000,
            max_redirects: 5,
            head_then_get: true,
            concurrency_limit: 32,
            per_host_delay_ms: 250,
            proxy: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BrokenReason {
    HttpStatus { code: u16 },
    DnsFailure,
    ConnectFailure,
    Timeout,
    TooManyRedirects,
    InvalidUrl,
}

impl BrokenReason {
    pub fn name(&self) -> &'static str {
        match self {
            BrokenReason::HttpStatus { .. } => "http_status",
            BrokenReason::DnsFailure => "dns_failure",
            BrokenReason::ConnectFailure => "connect_failure",
            BrokenReason::Timeout => "timeout",
            BrokenReason::TooManyRedirects => "too_many_redirects",
            BrokenReason::InvalidUrl => "invalid_url",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Valid,
    Broken { reason: BrokenReason },
}

impl Outcome {
    pub fn is_broken(&self) -> bool {
        matches!(self, Outcome::Broken { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkStatus {
    pub url: String,
    pub outcome: Outcome,
    /// Status of the last response received.
    pub http_status: Option<u16>,
    pub redirects: u32,
    pub checked_at: DateTime<Utc>,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LivenessReport {
    pub checked: usize,
    pub broken: usize,
    pub broken_fraction: f64,
    pub broken_by_reason: BTreeMap<String, usize>,
    /// In input order.
    pub statuses: Vec<LinkStatus>,
    pub policy: CheckPolicy,
}

impl LivenessReport {
    fn from_statuses(statuses: Vec<LinkStatus>, policy: CheckPolicy) -> Self {
        let mut broken_by_reason = BTreeMap::new();
        for s in &statuses {
            if let Outcome::Broken { reason } = &s.outcome {
                *broken_by_reason
                    .entry(reason.name().to_owned())
                    .or_insert(0) += 1;
            }
        }
        let broken = broken_by_reason.values().sum();
        LivenessReport {
            checked: statuses.len(),
            broken,
            broken_fraction: broken as f64 / statuses.len() as f64,
            broken_by_reason,
            statuses,
            policy,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum UrlCheckError {
    #[error("no URLs to check")]
    EmptyInput,
    #[error("invalid proxy {0:?}")]
    InvalidProxy(String),
}

/// Serializes requests per host and spaces them by the configured delay.
struct HostGate {
    slots: Mutex<HashMap<String, HostSlot>>,
    changed: Condvar,
    delay: Duration,
}

struct HostSlot {
    busy: bool,
    ready_at: Instant,
}

struct HostPermit<'a> {
    gate: &'a HostGate,
    host: String,
}

impl HostGate {
    fn new(delay: Duration) -> Self {
        HostGate {
            slots: Mutex::new(HashMap::new()),
            changed: Condvar::new(),
            delay,
        }
    }

    fn acquire(&self, host: &str) -> HostPermit<'_> {
        let mut slots = self.slots.lock().unwrap();
        loop {
            let now = Instant::now();
            let slot = slots.entry(host.to_owned()).or_insert(HostSlot {
                busy: false,
                ready_at: now,
            });
            if slot.busy {
                slots = self.changed.wait(slots).unwrap();
            } else if now < slot.ready_at {
                let wait = slot.ready_at - now;
                slots = self.changed.wait_timeout(slots, wait).unwrap().0;
            } else {
                slot.busy = true;
                return HostPermit {
                    gate: self,
                    host: host.to_owned(),
                };
            }
        }
    }
}

impl Drop for HostPermit<'_> {
    fn drop(&mut self) {
        let mut slots = self.gate.slots.lock().unwrap();
        if let Some(slot) = slots.get_mut(&self.host) {
            slot.busy = false;
            slot.ready_at = Instant::now() + self.gate.delay;
        }
        drop(slots);
        self.gate.changed.notify_all();
    }
}

fn host_key(url: &Url) -> Option<(String, u16)> {
    Some((url.host_str()?.to_owned(), url.port_or_known_default()?))
}

fn classify(err: &ureq::Error) -> BrokenReason {
    match err {
        ureq::Error::Timeout(_) => BrokenReason::Timeout,
        ureq::Error::HostNotFound => BrokenReason::DnsFailure,
        ureq::Error::TooManyRedirects => BrokenReason::TooManyRedirects,
        ureq::Error::BadUri(_) | ureq::Error::Http(_) => BrokenReason::InvalidUrl,
        ureq::Error::Io(e)
            if matches!(
                e.kind(),
                io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock
            ) =>
        {
            BrokenReason::Timeout
        }
        _ => BrokenReason::ConnectFailure,
    }
}

struct Prober<'a> {
    agent: ureq::Agent,
    gate: &'a HostGate,
    policy: &'a CheckPolicy,
}

enum Step {
    Status(u16, Option<String>),
    Failed(BrokenReason, String),
}

impl Prober<'_> {
    fn request(&self, url: &Url, key: &str, get: bool) -> Step {
        let _permit = self.gate.acquire(key);
        let result = if get {
            self.agent.get(url.as_str()).call()
        } else {
            self.agent.head(url.as_str()).call()
        };
        match result {
            Ok(resp) => {
                let location = resp
                    .headers()
                    .get("location")
                    .and_then(|v| v.to_str().ok())
                    .map(str::to_owned);
                Step::Status(resp.status().as_u16(), location)
            }
            Err(e) => Step::Failed(classify(&e), e.to_string()),
        }
    }

    fn probe(&self, url: &str) -> LinkStatus {
        let started = Instant::now();
        let checked_at = Utc::now();
        let mut status = LinkStatus {
            url: url.to_owned(),
            outcome: Outcome::Valid,
            http_status: None,
            redirects: 0,
            checked_at,
            elapsed_ms: 0,
            detail: None,
        };
        let (outcome, detail) = self.follow(url, &mut status);
        status.outcome = outcome;
        status.detail = detail;
        status.elapsed_ms = started.elapsed().as_millis() as u64;
        status
    }

    fn follow(&self, url: &str, status: &mut LinkStatus) -> (Outcome, Option<String>) {
        let broken = |reason, detail: String| (Outcome::Broken { reason }, Some(detail));
        let mut current = match Url::parse(url) {
            Ok(u) => u,
            Err(e) => return broken(BrokenReason::InvalidUrl, e.to_string()),
        };
        loop {
            let Some((host, port)) = host_key(&current) else {
                return broken(BrokenReason::InvalidUrl, format!("no host in {current}"));
            };
            if self.policy.proxy.is_none() {
                if let Err(e) = (host.as_str(), port).to_socket_addrs() {
                    return broken(BrokenReason::DnsFailure, e.to_string());
                }
            }
            let key = format!("{host}:{port}");
            let mut step = self.request(&current, &key, false);
            if self.policy.head_then_get && matches!(step, Step::Status(405 | 501, _)) {
                step = self.request(&current, &key, true);
            }
            let (code, location) = match step {
                Step::Status(code, location) => (code, location),
                Step::Failed(reason, detail) => return broken(reason, detail),
            };
            status.http_status = Some(code);
            match (code, location) {
                (300..=399, Some(location)) => {
                    if status.redirects >= self.policy.max_redirects {
                        return broken(
                            BrokenReason::TooManyRedirects,
                            format!("more than {} redirects", self.policy.max_redirects),
                        );
                    }
                    status.redirects += 1;
                    current = match current.join(&location) {
                        Ok(next) => next,
                        Err(e) => {
                            return broken(
                                BrokenReason::InvalidUrl,
                                format!("redirect to {location:?}: {e}"),
                            )
                        }
                    };
                }
                (code, _) if code >= 400 => {
                    return (
                        Outcome::Broken {
                            reason: BrokenReason::HttpStatus { code },
                        },
                        None,
                    )
                }
                _ => return (Outcome::Valid, None),
            }
        }
    }
}

fn build_agent(policy: &CheckPolicy) -> Result<ureq::Agent, UrlCheckError> {
    let proxy = match &policy.proxy {
        Some(p) => Some(ureq::Proxy::new(p).map_err(|_| UrlCheckError::InvalidProxy(p.clone()))?),
        None => None,
    };
    let config = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(policy.timeout_ms)))
        .max_redirects(0)
        .http_status_as_error(false)
        .user_agent(concat!(
            "coordnet/",
            env!("CARGO_PKG_VERSION"),
            " (link liveness audit)"
        ))
        .proxy(proxy)
        .build();
    Ok(config.into())
}

/// Probes every URL once. Results come back in input order.
pub fn check_urls(urls: &[String], policy: &CheckPolicy) -> Result<LivenessReport, UrlCheckError> {
    if urls.is_empty() {
        return Err(UrlCheckError::EmptyInput);
    }
    let gate = HostGate::new(Duration::from_millis(policy.per_host_delay_ms));
    let prober = Prober {
        agent: build_agent(policy)?,
        gate: &gate,
        policy,
    };
    let next = AtomicUsize::new(0);
    let workers = policy.concurrency_limit.clamp(1, urls.len());
    let mut results: Vec<(usize, LinkStatus)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(url) = urls.get(i) else { break };
                        let status = prober.probe(url);
                        log::debug!("{url}: {:?}", status.outcome);
                        done.push((i, status));
                    }
                    done
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("probe worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    let statuses = results.into_iter().map(|(_, s)| s).collect();
    Ok(LivenessReport::from_statuses(statuses, policy.clone()))
}
