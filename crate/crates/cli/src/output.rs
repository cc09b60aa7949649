use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use skyline_core::export::{Cell, Format, Table};
use skyline_core::validate::{summary_table, write_json_lines, ValidationReport};

use crate::error::{CliError, Quantity};

/// Columns of the CSV form of validation reports.
pub const REPORT_COLUMNS: [&str; 17] = [
    "target",
    "test",
    "n",
    "replications",
    "statistic",
    "p_value",
    "alpha",
    "pass",
    "mc_estimate",
    "stderr",
    "reference",
    "seed",
    "bin_x_lo",
    "bin_x_hi",
    "bin_h_lo",
    "bin_h_hi",
    "bin",
];

pub fn reports_table(reports: &[ValidationReport]) -> Table {
    let mut t = Table::new("validation", REPORT_COLUMNS);
    let opt = |v: Option<f64>| v.map_or(Cell::Text(String::new()), Cell::Num);
    for r in reports {
        let b = r.bin;
        t.push(vec![
            r.target.clone().into(),
            r.test.to_string().into(),
            r.n.into(),
            r.replications.into(),
            r.statistic.into(),
            r.p_value.into(),
            r.alpha.into(),
            r.pass.into(),
            opt(r.mc_estimate),
            opt(r.stderr),
            opt(r.reference),
            r.seed.into(),
            opt(b.map(|b| b.x_lo)),
            opt(b.map(|b| b.x_hi)),
            opt(b.map(|b| b.h_lo)),
            opt(b.map(|b| b.h_hi)),
            b.is_some().into(),
        ])
        .expect("row matches header");
    }
    t
}

fn open(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes each table to `<out>/<name>.<ext>`, or to stdout with a `# name`
/// line before each CSV table.
pub fn write_tables(tables: &[Table], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            for t in tables {
                let mut w = open(dir, &format!("{}.{}", t.name, format.extension()))?;
                t.write(format, &mut w).quantity(format!("table {}", t.name))?;
                w.flush()?;
            }
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            for t in tables {
                if format == Format::Csv {
                    writeln!(w, "# {}", t.name)?;
                }
                t.write(format, &mut w).quantity(format!("table {}", t.name))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Reports as JSON lines (`validation.jsonl`) or CSV (`validation.csv`); the
/// summary table goes to stderr.
pub fn write_reports(reports: &[ValidationReport], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    eprint!("{}", summary_table(reports));
    let body = |w: &mut dyn Write| -> Result<(), CliError> {
        match format {
            Format::Json => write_json_lines(reports, w).quantity("validation reports"),
            Format::Csv => reports_table(reports).write_csv(w).quantity("validation reports"),
        }
    };
    match out {
        Some(dir) => {
            let ext = match format {
                Format::Json => "jsonl",
                Format::Csv => "csv",
            };
            let mut w = open(dir, &format!("validation.{ext}"))?;
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
