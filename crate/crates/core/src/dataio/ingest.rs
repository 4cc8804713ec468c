//! CSV ingest and the on-disk panel layout.
//!
//! Input format: one file per variable; first column holds "YYYYQn"
//! labels, remaining columns are countries. Cells may be empty or
//! "n.a" at the head or tail of a column; interior holes are errors.

use super::panel::{RawCountrySeries, SeriesPanel, TransformOptions};
use super::quarter::Quarter;
use super::series::{Axis, Series};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    ExchangeRate,
    InterestRate,
    Cpi,
    Ip,
    Money,
    Unemployment,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::ExchangeRate => "exchange_rate",
            Variable::InterestRate => "interest_rate",
            Variable::Cpi => "cpi",
            Variable::Ip => "ip",
            Variable::Money => "money",
            Variable::Unemployment => "unemployment",
        }
    }

    /// The variables every country must provide.
    pub fn required() -> [Variable; 5] {
        [
            Variable::ExchangeRate,
            Variable::InterestRate,
            Variable::Cpi,
            Variable::Ip,
            Variable::Money,
        ]
    }

    /// The variables that define the country set.
    fn defining() -> [Variable; 4] {
        [
            Variable::InterestRate,
            Variable::Cpi,
            Variable::Ip,
            Variable::Money,
        ]
    }
}

struct VariableFile {
    label: String,
    start: Quarter,
    len: usize,
    columns: BTreeMap<String, Vec<Option<f64>>>,
}

fn parse_cell(raw: &str) -> std::result::Result<Option<f64>, String> {
    let t = raw.trim();
    if t.is_empty() || matches!(t, "n.a" | "n.a." | "na" | "NA" | "n/a" | "N/A" | ".") {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("`{t}` is not a number"))
}

fn read_variable_file(path: &Path, label: &str) -> Result<VariableFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Config(format!(
                "cannot open {label} file {}: {e}",
                path.display()
            )),
            _ => Error::Csv(e),
        })?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::MissingColumn {
            file: label.to_string(),
            column: "<any country>".to_string(),
        });
    }
    let country_names: Vec<String> = headers.iter().skip(1).map(|h| h.to_string()).collect();
    let mut quarters: Vec<Quarter> = Vec::new();
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); country_names.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 2; // 1-based, counting the header
        let q: Quarter = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::Parse {
                file: label.to_string(),
                row,
                message: e.to_string(),
            })?;
        if let Some(&prev) = quarters.last() {
            if q - prev != 1 {
                return Err(Error::Alignment(format!(
                    "{label} file skips from {prev} to {q}"
                )));
            }
        }
        quarters.push(q);
        for (c, cell) in cells.iter_mut().enumerate() {
            let raw = record.get(c + 1).unwrap_or("");
            let v = parse_cell(raw).map_err(|message| Error::Parse {
                file: label.to_string(),
                row,
                message,
            })?;
            cell.push(v);
        }
    }
    if quarters.is_empty() {
        return Err(Error::Alignment(format!("{label} file has no rows")));
    }
    Ok(VariableFile {
        label: label.to_string(),
        start: quarters[0],
        len: quarters.len(),
        columns: country_names.into_iter().zip(cells).collect(),
    })
}

/// Turn a column of optional cells (already cut to the axis span) into a
/// contiguous series; interior holes are reported against `country`.
fn column_to_series(
    axis: &Axis,
    country: &str,
    cells: &[Option<f64>],
) -> Result<Option<Series>> {
    let first = match cells.iter().position(Option::is_some) {
        Some(i) => i,
        None => return Ok(None),
    };
    let stop = cells[first..]
        .iter()
        .position(Option::is_none)
        .map(|i| first + i)
        .unwrap_or(cells.len());
    if let Some(hole) = cells[stop..].iter().position(Option::is_some) {
        let _ = hole;
        return Err(Error::DateGap {
            country: country.to_string(),
            quarter: axis.quarter(stop),
        });
    }
    let values = cells[first..stop].iter().map(|v| v.unwrap()).collect();
    Ok(Some(Series::new(first, values)))
}

pub struct LoadedPanel {
    pub axis: Axis,
    pub countries: BTreeMap<String, RawCountrySeries>,
    /// Exchange-rate columns that are not countries (union rates).
    pub extra_rates: BTreeMap<String, Series>,
}

/// Load and align the per-variable CSVs. The country set is defined by
/// the macro files (which must agree on columns); the exchange-rate
/// file must cover every country except possibly the base, whose rate
/// defaults to 1.
pub fn load_panel(
    files: &BTreeMap<Variable, std::path::PathBuf>,
    base_country: &str,
) -> Result<LoadedPanel> {
    for v in Variable::required() {
        if !files.contains_key(&v) {
            return Err(Error::Config(format!("no file given for {}", v.name())));
        }
    }
    let mut loaded: BTreeMap<Variable, VariableFile> = BTreeMap::new();
    for (&v, path) in files {
        loaded.insert(v, read_variable_file(path, v.name())?);
    }

    // Intersection span across every provided file.
    let start = loaded.values().map(|f| f.start).max().expect("non-empty");
    let end = loaded
        .values()
        .map(|f| f.start + (f.len as i64 - 1))
        .min()
        .expect("non-empty");
    let axis = Axis::from_span(start, end).map_err(|_| {
        Error::Alignment("variable files have no common quarters".to_string())
    })?;

    let country_set: BTreeSet<String> = loaded[&Variable::InterestRate]
        .columns
        .keys()
        .cloned()
        .collect();
    for v in Variable::defining() {
        let file = &loaded[&v];
        for c in &country_set {
            if !file.columns.contains_key(c) {
                return Err(Error::MissingColumn {
                    file: file.label.clone(),
                    column: c.clone(),
                });
            }
        }
        for c in file.columns.keys() {
            if !country_set.contains(c) {
                return Err(Error::MissingColumn {
                    file: "interest_rate".to_string(),
                    column: c.clone(),
                });
            }
        }
    }
    if !country_set.contains(base_country) {
        return Err(Error::Config(format!(
            "base country `{base_country}` has no macro series"
        )));
    }

    let axis_slice = |file: &VariableFile, col: &str| -> Vec<Option<f64>> {
        let offset = (axis.start - file.start) as usize;
        file.columns[col][offset..offset + axis.len].to_vec()
    };

    let fx_file = &loaded[&Variable::ExchangeRate];
    let mut extra_rates = BTreeMap::new();
    for col in fx_file.columns.keys() {
        if !country_set.contains(col) {
            if let Some(series) = column_to_series(&axis, col, &axis_slice(fx_file, col))? {
                extra_rates.insert(col.clone(), series);
            }
        }
    }

    let mut countries = BTreeMap::new();
    for country in &country_set {
        let fx = if fx_file.columns.contains_key(country) {
            column_to_series(&axis, country, &axis_slice(fx_file, country))?.ok_or_else(|| {
                Error::DateGap {
                    country: country.clone(),
                    quarter: axis.start,
                }
            })?
        } else if country == base_country {
            Series::new(0, vec![1.0; axis.len])
        } else {
            return Err(Error::MissingColumn {
                file: "exchange_rate".to_string(),
                column: country.clone(),
            });
        };
        let need = |v: Variable| -> Result<Series> {
            let file = &loaded[&v];
            column_to_series(&axis, country, &axis_slice(file, country))?.ok_or_else(|| {
                Error::DateGap {
                    country: country.clone(),
                    quarter: axis.start,
                }
            })
        };
        let unemployment = match loaded.get(&Variable::Unemployment) {
            Some(file) if file.columns.contains_key(country) => {
                column_to_series(&axis, country, &axis_slice(file, country))?
            }
            _ => None,
        };
        countries.insert(
            country.clone(),
            RawCountrySeries {
                country: country.clone(),
                exchange_rate: fx,
                interest_rate: need(Variable::InterestRate)?,
                cpi: need(Variable::Cpi)?,
                ip: need(Variable::Ip)?,
                money: need(Variable::Money)?,
                unemployment,
            },
        );
    }
    Ok(LoadedPanel {
        axis,
        countries,
        extra_rates,
    })
}

#[derive(Serialize, Deserialize)]
pub struct PanelManifest {
    pub base: String,
    pub start: Quarter,
    pub len: usize,
    pub countries: Vec<String>,
    pub options: TransformOptions,
}

const PANEL_COLUMNS: [&str; 10] = [
    "quarter", "s", "i", "p", "pi", "y_gap", "u_gap", "m", "y", "q",
];

/// Write the transformed panel as per-country CSVs plus a manifest.
pub fn write_panel_dir(panel: &SeriesPanel, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let manifest = PanelManifest {
        base: panel.base.clone(),
        start: panel.axis.start,
        len: panel.axis.len,
        countries: panel.countries.keys().cloned().collect(),
        options: panel.options,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join("manifest.json"), json)?;
    for (name, c) in &panel.countries {
        let mut w = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
        w.write_record(PANEL_COLUMNS)?;
        let fields: [(&str, Option<&Series>); 9] = [
            ("s", Some(&c.s)),
            ("i", Some(&c.i)),
            ("p", Some(&c.p)),
            ("pi", Some(&c.pi)),
            ("y_gap", Some(&c.y_gap)),
            ("u_gap", c.u_gap.as_ref()),
            ("m", Some(&c.m)),
            ("y", Some(&c.y)),
            ("q", Some(&c.q)),
        ];
        for idx in 0..panel.axis.len {
            let mut row = vec![panel.axis.quarter(idx).to_string()];
            for (_, series) in &fields {
                row.push(match series.and_then(|s| s.get(idx)) {
                    Some(v) => format!("{v}"),
                    None => String::new(),
                });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Read a directory written by [`write_panel_dir`].
pub fn read_panel_dir(dir: &Path) -> Result<SeriesPanel> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", manifest_path.display()))
    })?;
    let manifest: PanelManifest = serde_json::from_str(&text)
        .map_err(|e| Error::Parse {
            file: "manifest.json".to_string(),
            row: 0,
            message: e.to_string(),
        })?;
    let axis = Axis::new(manifest.start, manifest.len);
    let mut countries = BTreeMap::new();
    for name in &manifest.countries {
        let path = dir.join(format!("{name}.csv"));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&path)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); PANEL_COLUMNS.len() - 1];
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            for (c, col) in cols.iter_mut().enumerate() {
                let raw = record.get(c + 1).unwrap_or("");
                let v = parse_cell(raw).map_err(|message| Error::Parse {
                    file: format!("{name}.csv"),
                    row: row_idx + 2,
                    message,
                })?;
                col.push(v);
            }
        }
        let take = |label: &str, idx: usize| -> Result<Series> {
            column_to_series(&axis, &format!("{name} ({label})"), &cols[idx])?.ok_or_else(|| {
                Error::MissingColumn {
                    file: format!("{name}.csv"),
                    column: label.to_string(),
                }
            })
        };
        let s = take("s", 0)?;
        let i = take("i", 1)?;
        let p = take("p", 2)?;
        let pi = take("pi", 3)?;
        let y_gap = take("y_gap", 4)?;
        let u_gap = column_to_series(&axis, &format!("{name} (u_gap)"), &cols[5])?;
        let m = take("m", 6)?;
        let y = take("y", 7)?;
        let q = take("q", 8)?;
        countries.insert(
            name.clone(),
            super::panel::CountrySeries {
                s,
                i,
                p,
                pi,
                y_gap,
                u_gap,
                m,
                y,
                q,
            },
        );
    }
    Ok(SeriesPanel {
        axis,
        base: manifest.base,
        countries,
        options: manifest.options,
    })
}
