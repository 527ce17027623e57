use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::ReportBundle;
use crate::error::{Error, Result};

/// Decimal rendering with six significant digits (`inf`/`nan` for
/// non-finite values).
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if v < 0.0 { "-" } else { "" };
    // value = 0.d1d2...d6 * 10^(exp + 1)
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes `histogram.csv`, `codeword_stats.csv`, `error_rates.csv` and
/// `optimal_bounds.csv` into `out_dir`.
pub fn emit_csv(bundle: &ReportBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let path = out_dir.join("histogram.csv");
    let mut w = writer(&path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_err(&path, e));
    wrap(w.write_record(["flat_index", "count"]))?;
    for (i, c) in bundle.histogram.counts().iter().enumerate() {
        wrap(w.write_record([i.to_string(), c.to_string()]))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path.clone());

    let path = out_dir.join("codeword_stats.csv");
    let mut w = writer(&path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_err(&path, e));
    wrap(w.write_record(["scheme", "stat", "value_pct"]))?;
    for s in &bundle.schemes {
        let Some(st) = &s.stats else { continue };
        let mut rows = vec![
            ("min_avg".to_string(), st.min_avg_pct),
            ("mean".to_string(), st.mean_pct),
            ("max_avg".to_string(), st.max_avg_pct),
            ("gap_avg".to_string(), st.gap_avg_pct),
            ("min_worst".to_string(), st.min_worst_pct),
            ("max_worst".to_string(), st.max_worst_pct),
        ];
        rows.extend(
            st.rank_avg_pct
                .iter()
                .enumerate()
                .map(|(i, &v)| (format!("rank{i}"), v)),
        );
        for (stat, v) in rows {
            wrap(w.write_record([s.scheme.name(), stat.as_str(), &format_sig6(v)]))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path.clone());

    let path = out_dir.join("error_rates.csv");
    let mut w = writer(&path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_err(&path, e));
    wrap(w.write_record([
        "scheme",
        "analytic_rate",
        "optimal_rate",
        "increase_pct",
        "mc_rate",
        "mc_stderr",
    ]))?;
    for s in &bundle.schemes {
        let (mc, se) = match &s.monte_carlo {
            Some(e) => (format_sig6(e.value), format_sig6(e.std_error)),
            None => (String::new(), String::new()),
        };
        wrap(w.write_record([
            s.scheme.name().to_string(),
            format_sig6(s.rates.rate),
            format_sig6(s.rates.optimal_rate),
            format_sig6(s.increase_pct),
            mc,
            se,
        ]))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path.clone());

    let path = out_dir.join("optimal_bounds.csv");
    let mut w = writer(&path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_err(&path, e));
    wrap(w.write_record(["scheme", "optimal_rate", "integer_split_rate"]))?;
    for s in &bundle.schemes {
        wrap(w.write_record([
            s.scheme.name().to_string(),
            format_sig6(s.rates.optimal_rate),
            format_sig6(s.rates.integer_split_rate),
        ]))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    Ok(written)
}
