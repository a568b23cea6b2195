//! JSON file formats.
//!
//! Counts files look like `{"n": 4, "u": {"12": 5, "13": 1, ...}}` with one
//! key per pair in lexicographic order (`"i,j"` keys once `n >= 10`).
//! Result files follow [`ResultFile`]; floats carry 17 significant digits.

use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{sign_vector, SignVector};
use crate::model::{DataCounts, MatrixParam};
use crate::pairs::{num_pairs, pair_key, pairs, parse_pair_key};
use crate::pipeline::Estimate;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("field `{field}`: {msg}")]
    Schema { field: String, msg: String },
}

fn schema(field: impl Into<String>, msg: impl Into<String>) -> IoError {
    IoError::Schema { field: field.into(), msg: msg.into() }
}

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0))
                .map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

fn f17(v: &[f64]) -> Vec<F17> {
    v.iter().map(|&x| F17(x)).collect()
}

/// Counts keyed by pair, serialized in lexicographic pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMap<'a>(pub &'a DataCounts);

impl Serialize for PairMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = self.0.n();
        let mut map = s.serialize_map(Some(num_pairs(n)))?;
        for ((i, j), c) in pairs(n).into_iter().zip(self.0.counts()) {
            map.serialize_entry(&pair_key(n, i, j), c)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct CountsFile<'a> {
    n: usize,
    u: PairMap<'a>,
}

pub fn counts_to_json(u: &DataCounts) -> String {
    serde_json::to_string_pretty(&CountsFile { n: u.n(), u: PairMap(u) }).expect("serializable") + "\n"
}

fn parse_json(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

/// Parse a counts file. Missing, duplicate or unknown pair keys are schema errors.
pub fn counts_from_json(text: &str) -> Result<DataCounts, IoError> {
    let v = parse_json(text)?;
    let obj = v.as_object().ok_or_else(|| schema("<root>", "expected an object"))?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema("n", "missing or not a nonnegative integer"))? as usize;
    if n < 3 {
        return Err(schema("n", format!("need n >= 3, got {n}")));
    }
    let u_obj = obj
        .get("u")
        .and_then(Value::as_object)
        .ok_or_else(|| schema("u", "missing or not an object"))?;
    let mut counts = vec![None; num_pairs(n)];
    for (key, val) in u_obj {
        let (i, j) = parse_pair_key(n, key)
            .ok_or_else(|| schema(format!("u.{key}"), format!("not a pair key for n = {n}")))?;
        let c = val
            .as_u64()
            .ok_or_else(|| schema(format!("u.{key}"), "count must be a nonnegative integer"))?;
        counts[crate::pairs::pair_index(n, i, j)] = Some(c);
    }
    let mut out = Vec::with_capacity(counts.len());
    for ((i, j), c) in pairs(n).into_iter().zip(counts) {
        out.push(c.ok_or_else(|| schema(format!("u.{}", pair_key(n, i, j)), "missing count"))?);
    }
    DataCounts::new(n, out).map_err(|e| schema("u", e.to_string()))
}

/// Inline counts: comma separated integers in lexicographic pair order, or
/// inline JSON in the counts-file format. `n` is inferred from the length.
pub fn counts_from_inline(text: &str) -> Result<DataCounts, IoError> {
    let t = text.trim();
    if t.starts_with('{') {
        return counts_from_json(t);
    }
    let vals: Vec<u64> = t
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|e| schema("u", format!("inline counts: {e}")))?;
    let n = (3..64)
        .find(|&n| num_pairs(n) == vals.len())
        .ok_or_else(|| schema("u", format!("{} counts is not C(n,2) for any n >= 3", vals.len())))?;
    DataCounts::new(n, vals).map_err(|e| schema("u", e.to_string()))
}

/// Read counts from a file path if it exists, otherwise parse the argument inline.
pub fn load_counts(arg: &str) -> Result<DataCounts, IoError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
        counts_from_json(&text)
    } else {
        counts_from_inline(arg)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

#[derive(Serialize)]
pub struct SolutionRecord {
    pub point_re: Vec<F17>,
    pub point_im: Vec<F17>,
    pub residual: F17,
    pub is_real: bool,
    pub loglik: Option<F17>,
    pub hessian_class: &'static str,
    pub sign_vector: Option<Vec<i8>>,
}

#[derive(Serialize)]
pub struct MleRecord {
    pub q: Vec<F17>,
    pub loglik: F17,
}

#[derive(Serialize)]
pub struct Timings {
    pub monodromy: F17,
    pub homotopy: F17,
    pub analysis: F17,
    pub total: F17,
}

/// Result file of a solve run.
#[derive(Serialize)]
pub struct ResultFile<'a> {
    pub n: usize,
    pub u: PairMap<'a>,
    pub count: usize,
    pub count_real: usize,
    pub implicit_count: usize,
    pub solutions: Vec<SolutionRecord>,
    pub mle: Option<MleRecord>,
    pub timings_ms: Timings,
}

/// Build the result document. With `zero_timings` all timings are written
/// as zero so that repeated runs are byte-identical.
pub fn result_file(est: &Estimate, zero_timings: bool) -> ResultFile<'_> {
    let n = est.u.n();
    let solutions = est
        .solutions
        .iter()
        .map(|s| {
            let sign = s
                .real_point()
                .and_then(|p| MatrixParam::from_point(n, &p).ok())
                .and_then(|m| sign_vector(&m).ok())
                .map(|sv: SignVector| sv.signs());
            SolutionRecord {
                point_re: s.point.iter().map(|z| F17(z.re)).collect(),
                point_im: s.point.iter().map(|z| F17(z.im)).collect(),
                residual: F17(s.residual),
                is_real: s.is_real,
                loglik: s.loglik.map(F17),
                hessian_class: s.hessian_class.as_str(),
                sign_vector: sign,
            }
        })
        .collect();
    let t = if zero_timings { Default::default() } else { est.timings.clone() };
    ResultFile {
        n,
        u: PairMap(&est.u),
        count: est.solutions.len(),
        count_real: est.count_real(),
        implicit_count: est.implicit_count,
        solutions,
        mle: est.mle.as_ref().map(|m| MleRecord { q: f17(&m.implicit.q), loglik: F17(m.loglik) }),
        timings_ms: Timings {
            monodromy: F17(t.monodromy_ms),
            homotopy: F17(t.homotopy_ms),
            analysis: F17(t.analysis_ms),
            total: F17(t.monodromy_ms + t.homotopy_ms + t.analysis_ms),
        },
    }
}

pub fn result_to_json(est: &Estimate, zero_timings: bool) -> String {
    serde_json::to_string_pretty(&result_file(est, zero_timings)).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f17_has_seventeen_digits() {
        let s = serde_json::to_string(&F17(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(serde_json::to_string(&F17(f64::NAN)).unwrap(), "null");
        assert_eq!(serde_json::to_string(&vec![F17(1.0)]).unwrap(), "[1.0000000000000000e0]");
    }

    #[test]
    fn counts_file_layout() {
        let u = DataCounts::new(3, vec![1, 2, 3]).unwrap();
        let text = counts_to_json(&u);
        assert_eq!(text, "{\n  \"n\": 3,\n  \"u\": {\n    \"12\": 1,\n    \"13\": 2,\n    \"23\": 3\n  }\n}\n");
        let big = DataCounts::new(10, (1..=45).collect()).unwrap();
        let text = counts_to_json(&big);
        assert!(text.find("\"1,2\"").unwrap() < text.find("\"1,10\"").unwrap());
        assert_eq!(counts_from_json(&text).unwrap(), big);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = counts_from_json(r#"{"n": 3, "u": {"12": 1, "13": 2}}"#).unwrap_err();
        assert!(err.to_string().contains("u.23"), "{err}");
        let err = counts_from_json(r#"{"n": 3, "u": {"12": 1, "13": -2, "23": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("u.13"), "{err}");
        let err = counts_from_json("{\"n\": 3,\n \"u\": [}").unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }), "{err}");
        assert!(counts_from_json(r#"{"n": 3, "u": {"12": 1, "13": 2, "23": 1, "14": 1}}"#).is_err());
    }

    #[test]
    fn inline_counts() {
        let u = counts_from_inline("1, 2, 3").unwrap();
        assert_eq!((u.n(), u.counts()), (3, &[1u64, 2, 3][..]));
        assert_eq!(counts_from_inline("1,2,3,4,5,6").unwrap().n(), 4);
        assert!(counts_from_inline("1,2,3,4").is_err());
        assert!(counts_from_inline("1,x,3").is_err());
    }

    proptest! {
        #[test]
        fn counts_round_trip(n in 3usize..12, seed in any::<u64>()) {
            let u = crate::dpp::random_counts(n, 1000, seed);
            prop_assert_eq!(counts_from_json(&counts_to_json(&u)).unwrap(), u);
        }

        #[test]
        fn f17_round_trips_doubles(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let s = serde_json::to_string(&F17(x)).unwrap();
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
