//! CSV and JSON emission. Every report carries the schema version, the
//! seed and the full parameter set.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::params::ParameterSet;

pub const SCHEMA_VERSION: u32 = 1;

/// A row of a tabular report.
pub trait ReportRow: Serialize {
    const KIND: &'static str;
    fn columns() -> &'static [&'static str];
    fn values(&self) -> Vec<String>;
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `rows` behind the `schema_version`, `seed` and `params` columns.
pub fn write_csv<R: ReportRow, W: std::io::Write>(out: W, seed: u64, params: &ParameterSet, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["schema_version", "seed", "params"];
    header.extend_from_slice(R::columns());
    w.write_record(&header).map_err(csv_err)?;
    let compact = params.compact();
    for r in rows {
        let mut rec = vec![SCHEMA_VERSION.to_string(), seed.to_string(), compact.clone()];
        rec.extend(r.values());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: ReportRow>(seed: u64, params: &ParameterSet, rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, seed, params, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn json_report<R: ReportRow>(seed: u64, params: &ParameterSet, rows: &[R]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "report": R::KIND,
        "seed": seed,
        "params": params,
        "rows": rows,
    })
}

/// Shortest round-trip form of a float.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        name: String,
        x: f64,
    }

    impl ReportRow for Row {
        const KIND: &'static str = "test";
        fn columns() -> &'static [&'static str] {
            &["name", "x"]
        }
        fn values(&self) -> Vec<String> {
            vec![self.name.clone(), fmt_f64(self.x)]
        }
    }

    #[test]
    fn csv_quotes_and_prefixes() {
        let p = ParameterSet::default();
        let rows = [Row { name: "a,\"b\"".into(), x: 0.5 }];
        let text = csv_string(7, &p, &rows).unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["schema_version", "seed", "params", "name", "x"]);
        let rec = r.records().next().unwrap().unwrap();
        assert_eq!(&rec[0], "1");
        assert_eq!(&rec[1], "7");
        assert_eq!(&rec[3], "a,\"b\"");
        assert_eq!(rec[4].parse::<f64>().unwrap(), 0.5);
        assert!(rec[2].contains("lwe_dimension=500"));
    }

    #[test]
    fn json_embeds_params() {
        let p = ParameterSet::default();
        let v = json_report(3, &p, &[Row { name: "n".into(), x: 1.0 }]);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["report"], "test");
        let back: ParameterSet = serde_json::from_value(v["params"].clone()).unwrap();
        assert_eq!(back, p);
    }
}
