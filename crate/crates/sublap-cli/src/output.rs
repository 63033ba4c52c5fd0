//! Deterministic artifact writers: `summary.json`, `results.csv`, plot data.
//!
//! Byte determinism contract: for a fixed experiment, config and seed the
//! bytes of `summary.json` (and every other artifact except
//! `run_meta.json`) are identical across reruns and thread counts. To keep
//! that true, wall-clock data lives in `run_meta.json` only, JSON maps are
//! sorted (serde_json's default map), and every float is printed either by
//! serde_json's shortest round-trip formatter or by the fixed `{:.12e}`
//! format below.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::Failure;

/// One pass/fail record of the run.
#[derive(Debug, Clone)]
pub struct Assertion {
    pub name: String,
    /// The measured number (deviation, ratio, residual, ...).
    pub value: f64,
    /// The bound it is compared against; the direction depends on the
    /// constructor that built the record.
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    /// Passes when `value ≤ tolerance` (and is finite).
    pub fn le(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
        }
    }

    /// Passes when `value ≥ threshold` (and is finite).
    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: threshold,
            pass: value.is_finite() && value >= threshold,
        }
    }

    /// Passes when `value` is exactly `0.0`.
    pub fn exact_zero(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: 0.0,
            pass: value == 0.0,
        }
    }

    /// Passes when a stated condition holds; `value` is reported as-is.
    pub fn holds(name: impl Into<String>, value: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass,
        }
    }
}

/// Plot-data report an experiment wants on disk.
#[derive(Debug, Clone)]
pub enum Plot {
    /// A power-law scan: rows of (x, y) plus the fitted line y = C·x^a.
    Scan {
        stem: String,
        x_axis: String,
        y_axis: String,
        rows: Vec<(f64, f64)>,
        slope: f64,
        constant: f64,
    },
    /// A labeled matrix (for example reverse-Hölder ratios, centers × radii).
    Matrix {
        stem: String,
        rows_name: String,
        cols_name: String,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        cells: Vec<Vec<f64>>,
    },
}

/// Everything one experiment run produces.
#[derive(Debug)]
pub struct ExperimentResult {
    pub experiment: &'static str,
    pub params: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub censored_warnings: Vec<String>,
    pub plots: Vec<Plot>,
}

impl ExperimentResult {
    pub fn new(experiment: &'static str, params: BTreeMap<String, String>) -> Self {
        Self {
            experiment,
            params,
            metrics: BTreeMap::new(),
            assertions: Vec::new(),
            censored_warnings: Vec::new(),
            plots: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn push(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn plot(&mut self, p: Plot) {
        self.plots.push(p);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.censored_warnings.push(message.into());
    }

    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

pub(crate) fn json_number(v: f64) -> Value {
    Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// The `summary.json` document as a string (sorted keys, trailing newline).
pub fn summary_json(res: &ExperimentResult) -> String {
    let mut root = Map::new();
    root.insert(
        "experiment".to_string(),
        Value::String(res.experiment.to_string()),
    );
    let params: Map<String, Value> = res
        .params
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    root.insert("params".to_string(), Value::Object(params));
    let metrics: Map<String, Value> = res
        .metrics
        .iter()
        .map(|(k, v)| (k.clone(), json_number(*v)))
        .collect();
    root.insert("metrics".to_string(), Value::Object(metrics));
    let assertions: Vec<Value> = res
        .assertions
        .iter()
        .map(|a| {
            let mut m = Map::new();
            m.insert("name".to_string(), Value::String(a.name.clone()));
            m.insert("value".to_string(), json_number(a.value));
            m.insert("tolerance".to_string(), json_number(a.tolerance));
            m.insert("pass".to_string(), Value::Bool(a.pass));
            Value::Object(m)
        })
        .collect();
    root.insert("assertions".to_string(), Value::Array(assertions));
    root.insert(
        "censored_warnings".to_string(),
        Value::Array(
            res.censored_warnings
                .iter()
                .map(|w| Value::String(w.clone()))
                .collect(),
        ),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(root))
        .expect("summary document serializes");
    text.push('\n');
    text
}

/// The `results.csv` table: metrics first (sorted), then assertions in
/// run order. UTF-8, '.' decimal separator, '\n' line endings.
pub fn results_csv(res: &ExperimentResult) -> String {
    let mut out = String::from("kind,name,value,tolerance,pass\n");
    for (name, value) in &res.metrics {
        let _ = writeln!(out, "metric,{name},{},,", fmt_float(*value));
    }
    for a in &res.assertions {
        let _ = writeln!(
            out,
            "assertion,{},{},{},{}",
            a.name,
            fmt_float(a.value),
            fmt_float(a.tolerance),
            a.pass
        );
    }
    out
}

fn write_file(path: &Path, bytes: &str) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Renders one plot report into data files plus manifest lines.
///
/// Errors on an empty report. Returns (file name, contents) pairs and the
/// manifest lines describing axes and the fitted line.
pub fn render_plot(plot: &Plot) -> Result<(Vec<(String, String)>, Vec<String>), Failure> {
    match plot {
        Plot::Scan {
            stem,
            x_axis,
            y_axis,
            rows,
            slope,
            constant,
        } => {
            if rows.is_empty() {
                return Err(Failure::Runtime(format!(
                    "plot data '{stem}' is empty; nothing to emit"
                )));
            }
            let mut data = String::new();
            for (x, y) in rows {
                let _ = writeln!(data, "{} {}", fmt_float(*x), fmt_float(*y));
            }
            let (lo, hi) = rows
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
                    (lo.min(*x), hi.max(*x))
                });
            let mut fit = String::new();
            for x in [lo, hi] {
                let _ = writeln!(fit, "{} {}", fmt_float(x), fmt_float(constant * x.powf(*slope)));
            }
            let files = vec![
                (format!("{stem}.dat"), data),
                (format!("{stem}_fit.dat"), fit),
            ];
            let manifest = vec![
                format!("file={stem}.dat kind=scan x={x_axis} y={y_axis}"),
                format!(
                    "file={stem}_fit.dat kind=fit x={x_axis} y={y_axis} model=y=C*x^a C={} a={}",
                    fmt_float(*constant),
                    fmt_float(*slope)
                ),
            ];
            Ok((files, manifest))
        }
        Plot::Matrix {
            stem,
            rows_name,
            cols_name,
            row_labels,
            col_labels,
            cells,
        } => {
            if cells.is_empty() || cells.iter().any(|r| r.len() != col_labels.len()) {
                return Err(Failure::Runtime(format!(
                    "plot matrix '{stem}' is empty or ragged; nothing to emit"
                )));
            }
            if cells.len() != row_labels.len() {
                return Err(Failure::Runtime(format!(
                    "plot matrix '{stem}' has {} rows but {} row labels",
                    cells.len(),
                    row_labels.len()
                )));
            }
            let mut data = String::new();
            for row in cells {
                let line: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
                let _ = writeln!(data, "{}", line.join(" "));
            }
            let files = vec![(format!("{stem}.dat"), data)];
            let manifest = vec![format!(
                "file={stem}.dat kind=matrix rows={rows_name}:{} cols={cols_name}:{}",
                row_labels.join(";"),
                col_labels.join(";")
            )];
            Ok((files, manifest))
        }
    }
}

/// Writes `summary.json`, `results.csv` and all plot artifacts into `out`.
pub fn write_all(out: &Path, res: &ExperimentResult) -> Result<(), Failure> {
    write_file(&out.join("summary.json"), &summary_json(res))?;
    write_file(&out.join("results.csv"), &results_csv(res))?;
    if !res.plots.is_empty() {
        let mut manifest = String::new();
        for plot in &res.plots {
            let (files, lines) = render_plot(plot)?;
            for (name, contents) in files {
                write_file(&out.join(name), &contents)?;
            }
            for line in lines {
                let _ = writeln!(manifest, "{line}");
            }
        }
        write_file(&out.join("plots.manifest"), &manifest)?;
    }
    Ok(())
}

/// Wall-clock metadata, kept out of `summary.json` so summaries stay
/// byte-identical across reruns.
pub fn write_run_meta(out: &Path, elapsed_ms: u128, threads: usize) -> Result<(), Failure> {
    let mut m = Map::new();
    m.insert(
        "elapsed_ms".to_string(),
        Value::Number(Number::from(elapsed_ms as u64)),
    );
    m.insert(
        "threads".to_string(),
        Value::Number(Number::from(threads as u64)),
    );
    let now_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    m.insert(
        "finished_unix_ms".to_string(),
        Value::Number(Number::from(now_ms)),
    );
    let mut text =
        serde_json::to_string_pretty(&Value::Object(m)).expect("metadata serializes");
    text.push('\n');
    write_file(&out.join("run_meta.json"), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentResult {
        let mut params = BTreeMap::new();
        params.insert("mc.seed".to_string(), "7".to_string());
        let mut res = ExperimentResult::new("verify-core", params);
        res.metric("alpha", 0.25);
        res.push(Assertion::le("small", 1e-9, 1e-8));
        res.push(Assertion::ge("big", 4.0, 3.0));
        res.push(Assertion::exact_zero("zero", 0.0));
        res
    }

    #[test]
    fn summary_is_deterministic_and_well_formed() {
        let res = sample();
        let a = summary_json(&res);
        let b = summary_json(&res);
        assert_eq!(a, b);
        let doc: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(doc["experiment"], "verify-core");
        assert_eq!(doc["assertions"][0]["name"], "small");
        assert_eq!(doc["assertions"][0]["pass"], true);
        assert_eq!(doc["params"]["mc.seed"], "7");
        assert!(doc["censored_warnings"].as_array().unwrap().is_empty());
    }

    #[test]
    fn non_finite_values_become_null_and_fail() {
        let mut res = sample();
        res.push(Assertion::le("nan", f64::NAN, 1.0));
        assert!(!res.all_pass());
        let doc: Value = serde_json::from_str(&summary_json(&res)).unwrap();
        assert_eq!(doc["assertions"][3]["value"], Value::Null);
        assert_eq!(doc["assertions"][3]["pass"], false);
    }

    #[test]
    fn csv_uses_dot_decimal_and_unix_newlines() {
        let text = results_csv(&sample());
        assert!(text.starts_with("kind,name,value,tolerance,pass\n"));
        assert!(text.contains("metric,alpha,2.500000000000e-1,,\n"));
        assert!(text.contains("assertion,big,4.000000000000e0,3.000000000000e0,true\n"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn plots_render_and_reject_empty_reports() {
        let scan = Plot::Scan {
            stem: "sigma".to_string(),
            x_axis: "radius".to_string(),
            y_axis: "sigma_mass".to_string(),
            rows: vec![(0.1, 0.01), (0.2, 0.04)],
            slope: 2.0,
            constant: 1.0,
        };
        let (files, manifest) = render_plot(&scan).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].0, "sigma.dat");
        assert_eq!(files[0].1.lines().count(), 2);
        assert!(manifest[1].contains("model=y=C*x^a"));

        let empty = Plot::Scan {
            stem: "void".to_string(),
            x_axis: "x".to_string(),
            y_axis: "y".to_string(),
            rows: vec![],
            slope: 0.0,
            constant: 0.0,
        };
        assert!(matches!(render_plot(&empty), Err(Failure::Runtime(_))));

        let matrix = Plot::Matrix {
            stem: "rh".to_string(),
            rows_name: "center".to_string(),
            cols_name: "radius".to_string(),
            row_labels: vec!["pole".to_string(), "equator".to_string()],
            col_labels: vec!["0.1".to_string()],
            cells: vec![vec![1.5], vec![1.2]],
        };
        let (files, manifest) = render_plot(&matrix).unwrap();
        assert_eq!(files[0].1.lines().count(), 2);
        assert!(manifest[0].contains("rows=center:pole;equator"));
    }
}
