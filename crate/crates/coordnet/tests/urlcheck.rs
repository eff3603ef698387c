mod support;

use std::sync::Arc;
use std::time::Duration;

use coordnet::urlcheck::{check_urls, BrokenReason, CheckPolicy, Outcome, UrlCheckError};
use support::mock_http::{Accounting, MockServer};

fn policy() -> CheckPolicy {
    CheckPolicy {
        timeout_ms: 3000,
        per_host_delay_ms: 0,
        ..CheckPolicy::default()
    }
}

#[test]
fn head_refusal_falls_back_to_get() {
    let accounting = Arc::new(Accounting::default());
    let server = MockServer::start(accounting.clone(), Duration::ZERO);
    let urls = vec![server.url("/no-head")];

    let report = check_urls(&urls, &policy()).unwrap();
    assert_eq!(report.statuses[0].outcome, Outcome::Valid);
    assert_eq!(report.statuses[0].http_status, Some(200));
    let methods: Vec<String> = accounting
        .hits_for(server.port)
        .into_iter()
        .map(|h| h.method)
        .collect();
    assert_eq!(methods, ["HEAD", "GET"]);

    let head_only = CheckPolicy {
        head_then_get: false,
        ..policy()
    };
    let report = check_urls(&urls, &head_only).unwrap();
    assert_eq!(
        report.statuses[0].outcome,
        Outcome::Broken {
            reason: BrokenReason::HttpStatus { code: 405 }
        }
    );
}

#[test]
fn slow_server_times_out() {
    let server = MockServer::start(Arc::new(Accounting::default()), Duration::from_millis(600));
    let fast = CheckPolicy {
        timeout_ms: 150,
        ..policy()
    };
    let report = check_urls(&[server.url("/ok")], &fast).unwrap();
    assert_eq!(
        report.statuses[0].outcome,
        Outcome::Broken {
            reason: BrokenReason::Timeout
        }
    );
    assert_eq!(report.broken_by_reason["timeout"], 1);
}

#[test]
fn redirect_budget_is_respected() {
    let accounting = Arc::new(Accounting::default());
    let server = MockServer::start(accounting.clone(), Duration::ZERO);
    let tight = CheckPolicy {
        max_redirects: 2,
        ..policy()
    };
    let report = check_urls(&[server.url("/loop")], &tight).unwrap();
    assert_eq!(
        report.statuses[0].outcome,
        Outcome::Broken {
            reason: BrokenReason::TooManyRedirects
        }
    );
    assert_eq!(report.statuses[0].redirects, 2);
    assert_eq!(accounting.hits_for(server.port).len(), 3);

    let none = CheckPolicy {
        max_redirects: 0,
        ..policy()
    };
    let report = check_urls(&[server.url("/moved")], &none).unwrap();
    assert!(report.statuses[0].outcome.is_broken());
}

#[test]
fn results_keep_input_order() {
    let server = MockServer::start(Arc::new(Accounting::default()), Duration::from_millis(5));
    let urls: Vec<String> = (0..12)
        .map(|i| server.url(if i % 3 == 0 { "/missing" } else { "/ok" }))
        .collect();
    let report = check_urls(
        &urls,
        &CheckPolicy {
            concurrency_limit: 5,
            ..policy()
        },
    )
    .unwrap();
    let got: Vec<bool> = report
        .statuses
        .iter()
        .map(|s| s.outcome.is_broken())
        .collect();
    let want: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
    assert_eq!(got, want);
    assert!(report.statuses.iter().zip(&urls).all(|(s, u)| &s.url == u));
}

#[test]
fn invalid_proxy_is_an_error() {
    let bad = CheckPolicy {
        proxy: Some("::not a proxy::".into()),
        ..policy()
    };
    assert!(matches!(
        check_urls(&["http://127.0.0.1/".into()], &bad),
        Err(UrlCheckError::InvalidProxy(_))
    ));
}
