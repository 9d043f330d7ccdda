//! gnuplot data and script for the accuracy figures: mean complaints to
//! audit with error bars, and relative standard deviation, each against
//! background complaints.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::accuracy::{read_csv, AccuracyRow};
use crate::error::FactsError;

pub const DATA_FILE: &str = "accuracy.dat";
pub const SCRIPT_FILE: &str = "accuracy.gp";

/// Data blocks, one per `t`, separated by two blank lines so gnuplot can
/// address them with `index`.
pub fn plot_data(rows: &[AccuracyRow]) -> (String, Vec<u64>) {
    let mut by_t: BTreeMap<u64, Vec<&AccuracyRow>> = BTreeMap::new();
    for r in rows {
        by_t.entry(r.t).or_default().push(r);
    }
    let mut out = String::new();
    for (i, (t, block)) in by_t.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        writeln!(out, "# t={t}\n# background mean std rel_std_pct").unwrap();
        let mut block = block.clone();
        block.sort_by_key(|r| r.background);
        for r in block {
            writeln!(out, "{} {} {} {}", r.background, r.mean, r.std, r.rel_std_pct).unwrap();
        }
    }
    (out, by_t.into_keys().collect())
}

pub fn plot_script(ts: &[u64]) -> String {
    let series = |cols: &str, style: &str| {
        ts.iter()
            .enumerate()
            .map(|(i, t)| format!("'{DATA_FILE}' index {i} using {cols} with {style} title 't={t}'"))
            .collect::<Vec<_>>()
            .join(", \\\n     ")
    };
    format!(
        "set terminal pngcairo size 1200,480\n\
         set output 'accuracy.png'\n\
         set multiplot layout 1,2\n\
         set xlabel 'background complaints'\n\
         set ylabel 'complaints to audit'\n\
         set key top left\n\
         plot {}\n\
         set ylabel 'relative std dev (%)'\n\
         plot {}\n\
         unset multiplot\n",
        series("1:2:3", "yerrorlines"),
        series("1:4", "linespoints"),
    )
}

/// Reads an accuracy CSV and writes the data file and script into `out_dir`.
pub fn emit_plots(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, FactsError> {
    let rows = read_csv(fs::File::open(csv_path)?)?;
    if rows.is_empty() {
        return Err(FactsError::Invalid(format!("{} has no data rows", csv_path.display())));
    }
    fs::create_dir_all(out_dir)?;
    let (data, ts) = plot_data(&rows);
    let data_path = out_dir.join(DATA_FILE);
    let script_path = out_dir.join(SCRIPT_FILE);
    fs::write(&data_path, data)?;
    fs::write(&script_path, plot_script(&ts))?;
    Ok(vec![data_path, script_path])
}
