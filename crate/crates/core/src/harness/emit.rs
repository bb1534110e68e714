use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ResultRecord;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 9] = [
    "experiment_id",
    "kind",
    "params",
    "value",
    "bound_value",
    "ratio",
    "oracle_value",
    "pass",
    "runtime_ms",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn to_csv(records: &[ResultRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn to_json(records: &[ResultRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

pub fn render(records: &[ResultRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => to_json(records),
    }
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn emit(records: &[ResultRecord], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = render(records, format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn parse_csv(text: &str) -> std::result::Result<Vec<ResultRecord>, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_COLUMNS {
        return Err(format!("unexpected header {header:?}"));
    }
    rd.deserialize()
        .map(|r| r.map_err(|e| e.to_string()))
        .collect()
}

pub fn parse_json(text: &str) -> std::result::Result<Vec<ResultRecord>, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        parse_json(&text)
    } else {
        parse_csv(&text)
    };
    parsed.map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRecord {
        ResultRecord {
            experiment_id: "ab12:count".into(),
            kind: "count_curve".into(),
            params: "box=0,0,1;f=0,0,0,1;p=5".into(),
            value: 1.0,
            bound_value: Some(2.0),
            ratio: Some(0.5),
            oracle_value: None,
            pass: true,
            runtime_ms: 3,
        }
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(to_csv(&[]), format!("{}\n", CSV_COLUMNS.join(",")));
        assert_eq!(parse_csv(&to_csv(&[])).unwrap(), vec![]);
        assert_eq!(to_json(&[]), "[]\n");
    }

    #[test]
    fn round_trips() {
        let recs = vec![
            sample(),
            ResultRecord {
                value: 0.1 + 0.2,
                ..sample()
            },
        ];
        let csv = to_csv(&recs[..1]);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.ends_with('\n'));
        assert_eq!(parse_csv(&to_csv(&recs)).unwrap(), recs);
        assert_eq!(parse_json(&to_json(&recs)).unwrap(), recs);
    }

    proptest::proptest! {
        #[test]
        fn floats_survive_both_formats(
            value in proptest::num::f64::NORMAL | proptest::num::f64::ZERO,
            bound in proptest::option::of(proptest::num::f64::POSITIVE),
            id in "[a-z0-9:,;= ]{0,20}",
        ) {
            let r = ResultRecord { value, bound_value: bound, experiment_id: id, ..sample() };
            let recs = vec![r];
            proptest::prop_assert_eq!(&parse_csv(&to_csv(&recs)).unwrap(), &recs);
            proptest::prop_assert_eq!(&parse_json(&to_json(&recs)).unwrap(), &recs);
        }
    }
}
