use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A table with named columns; cells are JSON values so that missing
/// entries can be `null`.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

pub fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `{schema_version, config, rows}` with rows as objects keyed by column.
pub fn write_json(out: &mut dyn Write, config: &Map<String, Value>, table: &Table) -> io::Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Object(table.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
        .collect();
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

/// A `# schema_version=1 key=value ...` line, the header, then the rows.
pub fn write_csv(out: &mut dyn Write, config: &Map<String, Value>, table: &Table) -> io::Result<()> {
    write!(out, "# schema_version={SCHEMA_VERSION}")?;
    for (k, v) in config {
        match v {
            Value::String(s) => write!(out, " {k}={s}")?,
            other => write!(out, " {k}={}", csv_cell(other))?,
        }
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_cell))?;
    }
    w.flush()
}

pub fn write_table(out: &mut dyn Write, format: Format, config: &Map<String, Value>, table: &Table) -> io::Result<()> {
    match format {
        Format::Json => write_json(out, config, table),
        Format::Csv => write_csv(out, config, table),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format_sig(n.as_f64().unwrap_or(f64::NAN), 12),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `x` with `digits` significant digits, in the style of C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let sci = format!("{:.*e}", digits - 1, x);
    // Rounding can carry into the next decade; read the exponent back.
    let exp = sci.rsplit('e').next().and_then(|e| e.parse::<i32>().ok()).unwrap_or(exp);
    if exp < -5 || exp >= digits as i32 {
        let (mantissa, e) = sci.split_once('e').unwrap_or((&sci, "0"));
        format!("{}e{}", trim_zeros(mantissa), e)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number, or `null` for non-finite values (which JSON cannot hold).
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}
