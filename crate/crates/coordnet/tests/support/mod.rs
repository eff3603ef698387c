#![allow(dead_code)]

pub mod gexf;
pub mod mock_http;
pub mod oracle;
pub mod synth;

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}
