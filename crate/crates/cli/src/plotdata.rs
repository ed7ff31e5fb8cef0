//! Plot-data emission: a CSV plus an axes mapping becomes a JSON document
//! with named series, axis labels and units, ready for any plotting frontend.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct PlotRequest {
    pub csv: PathBuf,
    pub x: String,
    pub y: Vec<String>,
    /// Defaults to the CSV path with the extension `plot.json`.
    pub out: Option<PathBuf>,
    /// Overrides the logarithmic-x hint inferred from the column name.
    pub log_x: Option<bool>,
}

// Label and unit of the columns written by `qmg run`.
fn describe(column: &str) -> (&str, &str) {
    match column {
        "lnc" => ("ln c", "log-price"),
        "Fd" => ("F_d", "probability"),
        "Fs" => ("F_s", "probability"),
        "p" => ("p", "log-price"),
        "q" => ("q", "log-price"),
        "w" => ("W(p, q)", "density"),
        "n" => ("measurements", "count"),
        "survival" => ("S(n)", "probability"),
        "frozen_fraction" => ("frozen fraction", "probability"),
        "sigma" => ("rest-of-world width", "log-price"),
        "fixed_point" => ("fixed point a*", "log-price"),
        "max_intensity" => ("profit intensity", "log-price"),
        "k" => ("level", "index"),
        "energy" => ("eigenvalue", "risk"),
        "lo" | "hi" | "center" => ("winning log-price", "log-price"),
        "count" => ("draws", "count"),
        "round" => ("round", "index"),
        "logprice" => ("log-price", "log-price"),
        "flow" => ("flow", "price"),
        other => (other, ""),
    }
}

fn column(headers: &csv::StringRecord, name: &str, flag: &str) -> Result<usize, CliError> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        CliError::invalid(flag, format!("no column `{name}` (have: {})", headers.iter().collect::<Vec<_>>().join(", ")))
    })
}

/// Writes the plot-data JSON and returns its path.
pub fn emit_plotdata(req: &PlotRequest) -> Result<PathBuf, CliError> {
    let text = fs::read(&req.csv).map_err(|e| CliError::io(&req.csv, e))?;
    let mut reader = csv::Reader::from_reader(text.as_slice());
    let headers = reader.headers().map_err(|e| CliError::Parse { line: 1, column: 1, message: e.to_string() })?.clone();
    if req.y.is_empty() {
        return Err(CliError::invalid("--y", "no series requested"));
    }
    let xi = column(&headers, &req.x, "--x")?;
    let yi = req
        .y
        .iter()
        .enumerate()
        .map(|(k, name)| column(&headers, name, &format!("--y[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let edges = match (column(&headers, "lo", ""), column(&headers, "hi", "")) {
        (Ok(lo), Ok(hi)) => Some((lo, hi)),
        _ => None,
    };

    let mut xs = Vec::new();
    let mut ys = vec![Vec::new(); yi.len()];
    let mut bin_edges = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| CliError::Parse { line, column: 1, message: e.to_string() })?;
        let num = |i: usize| -> Result<f64, CliError> {
            let field = rec.get(i).unwrap_or("");
            field.trim().parse().map_err(|_| CliError::Parse {
                line,
                column: i + 1,
                message: format!("`{field}` in column `{}` is not a number", &headers[i]),
            })
        };
        xs.push(num(xi)?);
        for (k, &i) in yi.iter().enumerate() {
            ys[k].push(num(i)?);
        }
        if let Some((lo, hi)) = edges {
            if bin_edges.is_empty() {
                bin_edges.push(num(lo)?);
            }
            bin_edges.push(num(hi)?);
        }
    }

    let (x_label, x_unit) = describe(&req.x);
    let series: Vec<Value> = req
        .y
        .iter()
        .zip(ys)
        .map(|(name, y)| {
            let (label, unit) = describe(name);
            json!({ "name": name, "label": label, "unit": unit, "x": xs, "y": y })
        })
        .collect();
    let log_x = req.log_x.unwrap_or(req.x == "n");
    let mut doc = json!({
        "source": req.csv.file_name().map(|s| s.to_string_lossy().into_owned()),
        "x": { "column": req.x, "label": x_label, "unit": x_unit },
        "y": {
            "label": describe(&req.y[0]).0,
            "unit": describe(&req.y[0]).1,
        },
        "series": series,
        "hints": {
            "log_x": log_x,
            "style": if edges.is_some() { "histogram" } else { "line" },
        },
    });
    if edges.is_some() {
        doc["bin_edges"] = json!(bin_edges);
    }
    let out = req.out.clone().unwrap_or_else(|| default_out(&req.csv));
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    fs::write(&out, s).map_err(|e| CliError::io(&out, e))?;
    Ok(out)
}

fn default_out(csv: &Path) -> PathBuf {
    csv.with_extension("plot.json")
}
