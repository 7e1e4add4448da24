use std::path::Path;

use super::run::RunSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Structured,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Self::Text),
            "structured" | "json" => Ok(Self::Structured),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Variant | mean (sd) duration | success rate, one row per variant.
pub fn text_table(summary: &RunSummary) -> String {
    let rows: Vec<[String; 3]> = summary
        .variants
        .iter()
        .map(|v| {
            [
                v.name.clone(),
                format!("{:.1} s ({:.1} s)", v.mean_duration_s, v.sd_duration_s),
                format!("{:.0}%", v.success_rate * 100.0),
            ]
        })
        .collect();
    let header = ["Variant".to_string(), "Duration".to_string(), "Success".to_string()];
    let mut widths = header.clone().map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String; 3]| {
        format!(
            "{:<w0$}  {:>w1$}  {:>w2$}\n",
            cells[0],
            cells[1],
            cells[2],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        )
    };
    let mut out = line(&header);
    out.push_str(&format!("{}\n", "-".repeat(widths.iter().sum::<usize>() + 4)));
    for row in &rows {
        out.push_str(&line(row));
    }
    if !summary.complete {
        out.push_str("(incomplete run)\n");
    }
    out
}

pub fn structured_report(summary: &RunSummary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    text
}

pub fn parse_structured(text: &str) -> Result<RunSummary, serde_json::Error> {
    serde_json::from_str(text)
}

/// Renders the report and writes it to `out`, or returns it for stdout.
pub fn emit_report(summary: &RunSummary, format: ReportFormat, out: Option<&Path>) -> std::io::Result<String> {
    let text = match format {
        ReportFormat::Text => text_table(summary),
        ReportFormat::Structured => structured_report(summary),
    };
    if let Some(path) = out {
        std::fs::write(path, &text)?;
    }
    Ok(text)
}
