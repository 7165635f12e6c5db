//! Summary table: CSV persistence and the fixed-width text report.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::BenchmarkSummary;
use crate::protocol::Role;

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "role",
    "#ALL",
    "Avg.FBR",
    "SNP",
    "Share",
    "#MI",
    "deal_rate_MI",
    "SNP_MI",
    "#CI",
    "deal_rate_CI",
    "SNP_CI",
];

const UNDEF: &str = "undef";
const ABSENT: &str = "-";

/// One role's line of the summary table. Share is a fraction; it prints as
/// a percentage.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub role: Role,
    pub n_all: u64,
    pub avg_fbr: Option<f64>,
    pub snp: f64,
    pub share: Option<f64>,
    pub n_mi: u64,
    pub deal_rate_mi: Option<f64>,
    pub snp_mi: f64,
    pub n_ci: u64,
    pub deal_rate_ci: Option<f64>,
    pub snp_ci: f64,
}

/// Buyer row then seller row. First-bid ratio belongs to the buyer only.
pub fn summary_rows(s: &BenchmarkSummary) -> [SummaryRow; 2] {
    let row = |role: Role| {
        let pick = |b: f64, sv: f64| if role == Role::Buyer { b } else { sv };
        SummaryRow {
            role,
            n_all: s.all.count,
            avg_fbr: if role == Role::Buyer { s.avg_fbr } else { None },
            snp: pick(s.all.snp_b, s.all.snp_s),
            share: if role == Role::Buyer { s.share_b } else { s.share_s },
            n_mi: s.mi.count,
            deal_rate_mi: s.mi.deal_rate(),
            snp_mi: pick(s.mi.snp_b, s.mi.snp_s),
            n_ci: s.ci.count,
            deal_rate_ci: s.ci.deal_rate(),
            snp_ci: pick(s.ci.snp_b, s.ci.snp_s),
        }
    };
    [row(Role::Buyer), row(Role::Seller)]
}

fn opt(v: Option<f64>, digits: usize, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), |x| format!("{x:.digits$}"))
}

fn fields(r: &SummaryRow) -> [String; 11] {
    [
        r.role.to_string(),
        r.n_all.to_string(),
        opt(r.avg_fbr, 4, ABSENT),
        format!("{:.4}", r.snp),
        opt(r.share.map(|s| s * 100.0), 2, UNDEF),
        r.n_mi.to_string(),
        opt(r.deal_rate_mi, 4, ABSENT),
        format!("{:.4}", r.snp_mi),
        r.n_ci.to_string(),
        opt(r.deal_rate_ci, 4, ABSENT),
        format!("{:.4}", r.snp_ci),
    ]
}

pub fn summary_csv(summary: &BenchmarkSummary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).expect("in-memory write");
    for row in summary_rows(summary) {
        w.write_record(fields(&row)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn parse_opt(cell: &str) -> std::result::Result<Option<f64>, String> {
    match cell {
        UNDEF | ABSENT | "" => Ok(None),
        v => v.parse().map(Some).map_err(|_| format!("bad number `{v}`")),
    }
}

fn parse_row(rec: &csv::StringRecord) -> std::result::Result<SummaryRow, String> {
    let cell = |i: usize| rec.get(i).ok_or_else(|| format!("missing column {}", SUMMARY_COLUMNS[i]));
    let count = |i: usize| cell(i)?.parse::<u64>().map_err(|_| format!("bad count in {}", SUMMARY_COLUMNS[i]));
    let num = |i: usize| cell(i)?.parse::<f64>().map_err(|_| format!("bad number in {}", SUMMARY_COLUMNS[i]));
    Ok(SummaryRow {
        role: cell(0)?.parse()?,
        n_all: count(1)?,
        avg_fbr: parse_opt(cell(2)?)?,
        snp: num(3)?,
        share: parse_opt(cell(4)?)?.map(|p| p / 100.0),
        n_mi: count(5)?,
        deal_rate_mi: parse_opt(cell(6)?)?,
        snp_mi: num(7)?,
        n_ci: count(8)?,
        deal_rate_ci: parse_opt(cell(9)?)?,
        snp_ci: num(10)?,
    })
}

pub fn parse_summary_csv(text: &str, path: &Path) -> Result<Vec<SummaryRow>> {
    let err = |message: String| Error::SummaryFormat {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    if headers.iter().ne(SUMMARY_COLUMNS) {
        return Err(err(format!("unexpected header `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            parse_row(&rec).map_err(err)
        })
        .collect()
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_summary_csv(&text, path)
}

/// Label for a summary file: its directory name, or the file stem when the
/// file sits at the top level.
pub fn summary_label(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("summary");
    if stem == "summary" {
        if let Some(dir) = path.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()) {
            return dir.to_string();
        }
    }
    stem.to_string()
}

/// Fixed-width table of labelled summary rows, highest ALL-scope SNP first.
pub fn render_report(entries: &[(String, Vec<SummaryRow>)]) -> String {
    let mut rows: Vec<(&str, &SummaryRow)> = entries
        .iter()
        .flat_map(|(label, rows)| rows.iter().map(move |r| (label.as_str(), r)))
        .collect();
    rows.sort_by(|a, b| b.1.snp.total_cmp(&a.1.snp));

    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max("label".len());
    let widths = [6, 6, 8, 10, 9, 6, 12, 10, 6, 12, 10];
    let mut out = String::new();
    let mut line = |label: &str, cells: &[String]| {
        out.push_str(&format!("{label:<label_width$}"));
        for (cell, w) in cells.iter().zip(widths) {
            out.push_str(&format!("  {cell:>w$}"));
        }
        out.push('\n');
    };
    let header: Vec<String> = SUMMARY_COLUMNS.iter().map(|c| c.to_string()).collect();
    line("label", &header);
    for (label, row) in rows {
        let mut cells = fields(row);
        // Two decimals on screen, as in the published tables.
        cells[3] = format!("{:.2}", row.snp);
        cells[4] = row.share.map_or_else(|| UNDEF.to_string(), |s| format!("{:.2}%", s * 100.0));
        cells[7] = format!("{:.2}", row.snp_mi);
        cells[10] = format!("{:.2}", row.snp_ci);
        line(label, &cells);
    }
    out
}
