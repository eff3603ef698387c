//! CSV reading and writing for post exports.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use coordnet_core::record::{DateFormat, Field, RecordParser, SchemaMode, FIELD_COUNT};
use coordnet_core::{merge_datasets, Dataset, PostRecord};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },
    #[error("missing required headers: {}", missing.join(", "))]
    SchemaMismatch { missing: Vec<String> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestOptions {
    pub mode: SchemaMode,
    pub dates: DateFormat,
}

/// Headers that must be present even in lenient mode.
pub const REQUIRED_HEADERS: [Field; 3] = [
    Field::AccountName,
    Field::PostCreatedDate,
    Field::PostCreatedTime,
];

/// Decodes UTF-8, replacing each invalid sequence with U+FFFD.
/// Returns the text and the number of replacements.
pub fn decode_lossy(bytes: &[u8]) -> (String, u64) {
    let mut out = String::with_capacity(bytes.len());
    let mut replaced = 0;
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            out.push(char::REPLACEMENT_CHARACTER);
            replaced += 1;
        }
    }
    (out, replaced)
}

/// Line on which a still-open quoted field starts, if the text ends inside one.
fn unterminated_quote(text: &str) -> Option<u64> {
    let mut in_quotes = false;
    let mut line = 1u64;
    let mut opened_at = 0;
    for c in text.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                if in_quotes {
                    opened_at = line;
                }
            }
            '\n' => line += 1,
            _ => {}
        }
    }
    in_quotes.then_some(opened_at)
}

fn malformed(err: &csv::Error) -> IngestError {
    let line = err.position().map_or(0, csv::Position::line);
    let message = match err.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        _ => err.to_string(),
    };
    IngestError::MalformedCsv { line, message }
}

/// Parses one export. `source` is recorded in `Dataset::source_files`.
pub fn parse_csv<R: Read>(
    mut input: R,
    options: IngestOptions,
    source: Option<&str>,
) -> Result<Dataset, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| IngestError::Io {
        path: PathBuf::from(source.unwrap_or("<stream>")),
        source: e,
    })?;
    let (text, replaced) = decode_lossy(&bytes);
    drop(bytes);
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    if let Some(line) = unterminated_quote(text) {
        return Err(IngestError::MalformedCsv {
            line,
            message: "unbalanced quote".into(),
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| malformed(&e))?.clone();
    let mut column: [Option<usize>; FIELD_COUNT] = [None; FIELD_COUNT];
    for (i, h) in headers.iter().enumerate() {
        if let Some(f) = Field::from_header(h) {
            column[f.index()].get_or_insert(i);
        }
    }
    let required: &[Field] = match options.mode {
        SchemaMode::Strict => &Field::ALL,
        SchemaMode::Lenient => &REQUIRED_HEADERS,
    };
    let missing: Vec<String> = required
        .iter()
        .filter(|f| column[f.index()].is_none())
        .map(|f| f.header().to_owned())
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::SchemaMismatch { missing });
    }

    let parser = RecordParser::new(options.mode, options.dates);
    let mut dataset = Dataset::default();
    dataset.ingest_report.replaced_utf8_sequences = replaced;
    if let Some(s) = source {
        dataset.source_files.push(s.to_owned());
    }
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(malformed(&e)),
        }
        let mut cells: [Option<&str>; FIELD_COUNT] = [None; FIELD_COUNT];
        for (cell, col) in cells.iter_mut().zip(column) {
            *cell = col.and_then(|c| row.get(c));
        }
        match parser.parse(&cells) {
            Ok(record) => {
                dataset.records.push(record);
                dataset.ingest_report.accept();
            }
            Err(reason) => dataset.ingest_report.reject(&reason.to_string()),
        }
    }
    Ok(dataset)
}

pub fn parse_file(path: &Path, options: IngestOptions) -> Result<Dataset, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    parse_csv(
        io::BufReader::new(file),
        options,
        Some(&path.display().to_string()),
    )
}

/// Parses every file and merges them, dropping duplicates.
pub fn parse_files<P: AsRef<Path>>(
    paths: &[P],
    options: IngestOptions,
) -> Result<Dataset, IngestError> {
    let mut parts = Vec::with_capacity(paths.len());
    for p in paths {
        let part = parse_file(p.as_ref(), options)?;
        log::info!(
            "{}: {} accepted, {} rejected",
            p.as_ref().display(),
            part.ingest_report.rows_accepted,
            part.ingest_report.rows_rejected
        );
        parts.push(part);
    }
    Ok(merge_datasets(parts))
}

/// Writes records with all 40 headers, LF line endings and minimal quoting.
pub fn write_csv<W: Write>(records: &[PostRecord], dates: DateFormat, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(Field::ALL.iter().map(|f| f.header()))?;
    for r in records {
        w.write_record(r.to_cells(dates))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header_line() -> String {
        Field::ALL
            .iter()
            .map(|f| f.header())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn row(name: &str, date: &str) -> String {
        let mut cells = vec![String::new(); FIELD_COUNT];
        cells[Field::AccountName.index()] = name.into();
        cells[Field::PostCreatedDate.index()] = date.into();
        cells[Field::PostCreatedTime.index()] = "10:00:00".into();
        cells[Field::Type.index()] = "link".into();
        cells.join(",")
    }

    #[test]
    fn unbalanced_quote_aborts() {
        let text = format!("{}\n\"unterminated,2021-01-01\n", header_line());
        let err = parse_csv(text.as_bytes(), IngestOptions::default(), None).unwrap_err();
        assert!(
            matches!(err, IngestError::MalformedCsv { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn short_row_aborts() {
        let text = format!("{}\na,b\n", header_line());
        let err = parse_csv(text.as_bytes(), IngestOptions::default(), None).unwrap_err();
        assert!(matches!(err, IngestError::MalformedCsv { .. }));
    }

    #[test]
    fn missing_headers_listed() {
        let err = parse_csv(
            "account.name,title\nX,t\n".as_bytes(),
            IngestOptions::default(),
            None,
        )
        .unwrap_err();
        let IngestError::SchemaMismatch { missing } = err else {
            panic!()
        };
        assert_eq!(missing.len(), 38);
        assert!(missing.contains(&"Post Created Date".to_owned()));

        let lenient = IngestOptions {
            mode: SchemaMode::Lenient,
            ..Default::default()
        };
        let err = parse_csv("Account.Name,title\nX,t\n".as_bytes(), lenient, None).unwrap_err();
        let IngestError::SchemaMismatch { missing } = err else {
            panic!()
        };
        assert_eq!(missing, ["Post Created Date", "Post Created Time"]);
    }

    #[test]
    fn lenient_needs_only_core_headers() {
        let text = " ACCOUNT.NAME ,post created date,Post Created Time\nX,2021-02-03,08:09:10\n";
        let lenient = IngestOptions {
            mode: SchemaMode::Lenient,
            ..Default::default()
        };
        let ds = parse_csv(text.as_bytes(), lenient, None).unwrap();
        assert_eq!(ds.records.len(), 1);
        assert_eq!(ds.records[0].account_name, "X");
    }

    #[test]
    fn empty_name_rejected() {
        let text = format!(
            "{}\n{}\n{}\n",
            header_line(),
            row("  ", "2021-01-01"),
            row("A", "2021-01-01")
        );
        let ds = parse_csv(text.as_bytes(), IngestOptions::default(), None).unwrap();
        assert_eq!(
            (
                ds.ingest_report.rows_accepted,
                ds.ingest_report.rows_rejected
            ),
            (1, 1)
        );
        assert_eq!(
            ds.ingest_report.rejection_reasons["missing account_name"],
            1
        );
    }

    #[test]
    fn invalid_utf8_replaced_and_counted() {
        let mut bytes = format!("{}\n", header_line()).into_bytes();
        bytes.extend_from_slice(b"Caf\xff\xfe");
        bytes.extend_from_slice(row("", "2021-01-01").as_bytes());
        bytes.push(b'\n');
        let ds = parse_csv(&bytes[..], IngestOptions::default(), None).unwrap();
        assert_eq!(ds.ingest_report.replaced_utf8_sequences, 2);
        assert_eq!(ds.records[0].account_name, "Caf\u{fffd}\u{fffd}");
    }

    #[test]
    fn quoted_newlines_and_commas() {
        let mut cells: Vec<String> = row("A", "2021-01-01")
            .split(',')
            .map(str::to_owned)
            .collect();
        cells[Field::Message.index()] = "\"line one,\nline \"\"two\"\"\"".into();
        let text = format!("{}\n{}\n", header_line(), cells.join(","));
        let ds = parse_csv(text.as_bytes(), IngestOptions::default(), None).unwrap();
        assert_eq!(
            ds.records[0].message.as_deref(),
            Some("line one,\nline \"two\"")
        );
    }
}
