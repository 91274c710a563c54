use std::fmt::Write as _;
use std::str::FromStr;

use crate::model::{Body, MetricsRow, ParseKeywordError};
use crate::registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    Text,
}

impl FromStr for TableFormat {
    type Err = ParseKeywordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" => Ok(TableFormat::Text),
            _ => Err(ParseKeywordError {
                kind: "format",
                value: s.to_string(),
            }),
        }
    }
}

pub const CSV_COLUMNS: [&str; 10] = [
    "variable", "category", "body", "year", "baseline", "pi0", "pib", "aw", "rw", "ep",
];

/// Sorted by variable, year, baseline, body, then registry category order.
fn ordered(rows: &[MetricsRow]) -> Vec<&MetricsRow> {
    let mut out: Vec<&MetricsRow> = rows.iter().collect();
    out.sort_by_cached_key(|r| {
        (
            r.variable,
            r.census_year,
            r.baseline_variant,
            r.body,
            registry::category_rank(r.variable, &r.category_code),
        )
    });
    out
}

/// Renders metric rows. CSV and JSON carry full precision (shortest
/// round-trip float formatting); text is the three-decimal table layout.
pub fn render_table(rows: &[MetricsRow], format: TableFormat) -> Vec<u8> {
    let rows = ordered(rows);
    match format {
        TableFormat::Csv => render_csv(&rows),
        TableFormat::Json => serde_json::to_vec(&rows).expect("metrics rows serialize"),
        TableFormat::Text => render_text(&rows).into_bytes(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn render_csv(rows: &[&MetricsRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.variable.as_str().to_string(),
            r.category_code.clone(),
            r.body.as_str().to_string(),
            r.census_year.to_string(),
            r.baseline_variant.as_str().to_string(),
            r.pi0.to_string(),
            r.pib.to_string(),
            opt(r.absolute_weight),
            opt(r.relative_weight),
            r.excess_population.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Rounds half away from zero and groups thousands with commas.
pub fn format_count(value: f64) -> String {
    let rounded = value.round();
    let negative = rounded < 0.0;
    let digits = format!("{:.0}", rounded.abs());
    let mut grouped = String::with_capacity(digits.len() + digits.len() / 3 + 1);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    if negative {
        format!("-{grouped}")
    } else {
        grouped
    }
}

pub fn format_weight(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.3}")).unwrap_or_else(|| "NA".into())
}

fn render_text(rows: &[&MetricsRow]) -> String {
    let mut out = String::new();
    let mut start = 0;
    while start < rows.len() {
        let key = |r: &MetricsRow| (r.variable, r.census_year, r.baseline_variant);
        let k = key(rows[start]);
        let end = start + rows[start..].iter().take_while(|r| key(r) == k).count();
        render_section(&mut out, &rows[start..end]);
        start = end;
    }
    out
}

fn render_section(out: &mut String, rows: &[&MetricsRow]) {
    let first = rows[0];
    let mut bodies: Vec<Body> = rows.iter().map(|r| r.body).collect();
    bodies.dedup();
    let mut categories: Vec<&str> = Vec::new();
    for r in rows {
        if !categories.contains(&r.category_code.as_str()) {
            categories.push(&r.category_code);
        }
    }
    let cell = |cat: &str, body: Body| rows.iter().find(|r| r.category_code == cat && r.body == body);

    let names: Vec<String> = categories
        .iter()
        .map(|c| registry::display_name(first.variable, c))
        .collect();
    let name_w = names.iter().map(|n| n.len()).max().unwrap_or(0).max("Category".len());
    let ep_w: Vec<usize> = bodies
        .iter()
        .map(|b| {
            categories
                .iter()
                .filter_map(|c| cell(c, *b))
                .map(|r| format_count(r.excess_population).len())
                .max()
                .unwrap_or(0)
                .max(2)
        })
        .collect();
    let block_w: Vec<usize> = ep_w.iter().map(|w| 6 + 1 + 6 + 1 + w).collect();

    let _ = writeln!(
        out,
        "{} ({}, baseline {}, unit {})",
        first.variable.display(),
        first.census_year,
        first.baseline_variant,
        first.unit_of_analysis
    );
    let mut line = format!("{:name_w$}", "");
    for (b, w) in bodies.iter().zip(&block_w) {
        let _ = write!(line, " | {:^w$}", b.display(), w = *w);
    }
    let _ = writeln!(out, "{}", line.trim_end());
    let mut line = format!("{:<name_w$}", "Category");
    for w in &ep_w {
        let _ = write!(line, " | {:>6} {:>6} {:>w$}", "AW", "RW", "EP", w = *w);
    }
    let _ = writeln!(out, "{line}");
    let rule_len = line.len();
    let _ = writeln!(out, "{}", "-".repeat(rule_len));
    for (cat, name) in categories.iter().zip(&names) {
        let mut line = format!("{name:<name_w$}");
        for (b, w) in bodies.iter().zip(&ep_w) {
            match cell(cat, *b) {
                Some(r) => {
                    let _ = write!(
                        line,
                        " | {:>6} {:>6} {:>w$}",
                        format_weight(r.absolute_weight),
                        format_weight(r.relative_weight),
                        format_count(r.excess_population),
                        w = *w
                    );
                }
                None => {
                    let _ = write!(line, " | {:>6} {:>6} {:>w$}", "", "", "", w = *w);
                }
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out.push('\n');
}
