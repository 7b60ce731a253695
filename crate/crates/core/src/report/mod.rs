//! Ranking tables, curve exports, attribute matrices and plot scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::RunMeta;
use crate::metrics::{MetricsPoint, MetricsReport, PRCurve, Protocol};
use crate::model::Attribute;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no tracker reports to tabulate")]
    EmptyInput,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// Columns that carry top-3 markers, in table order.
pub const RANKED_COLUMNS: [&str; 6] = ["seq_pr", "seq_re", "seq_f", "frame_pr", "frame_re", "frame_f"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingRow {
    pub tracker: String,
    /// `ST` or `LT`.
    pub term: Option<String>,
    /// `RGB`, `D` or `RGBD`.
    pub modality: Option<String>,
    pub sequence_based: MetricsPoint,
    pub frame_based: MetricsPoint,
    pub fps: Option<f64>,
    /// Rank 1..=3 per entry of [`RANKED_COLUMNS`], `None` outside the top 3.
    pub ranks: [Option<u8>; 6],
}

impl RankingRow {
    fn value(&self, column: usize) -> f64 {
        let p = if column < 3 { &self.sequence_based } else { &self.frame_based };
        [p.pr, p.re, p.f][column % 3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingTable {
    pub rows: Vec<RankingRow>,
}

/// Rows sorted by sequence-based F (descending, ties by name). Within each
/// ranked column the three best cells get ranks 1, 2, 3; equal values are
/// ordered by tracker name.
pub fn ranking_table(entries: &[(MetricsReport, RunMeta)]) -> Result<RankingTable, ReportError> {
    if entries.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut rows: Vec<RankingRow> = entries
        .iter()
        .map(|(r, meta)| RankingRow {
            tracker: r.tracker.clone(),
            term: meta.term.clone(),
            modality: meta.modality.clone(),
            sequence_based: r.sequence_based.best,
            frame_based: r.frame_based.best,
            fps: r.fps.or(meta.fps),
            ranks: [None; 6],
        })
        .collect();
    let by = |c: usize| {
        move |a: &RankingRow, b: &RankingRow| b.value(c).total_cmp(&a.value(c)).then_with(|| a.tracker.cmp(&b.tracker))
    };
    rows.sort_by(by(2));
    for c in 0..RANKED_COLUMNS.len() {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&i, &j| by(c)(&rows[i], &rows[j]));
        for (rank, &i) in order.iter().take(3).enumerate() {
            rows[i].ranks[c] = Some(rank as u8 + 1);
        }
    }
    Ok(RankingTable { rows })
}

fn opt(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or("")
}

fn fps_cell(v: Option<f64>) -> String {
    v.map(|f| format!("{f:.1}")).unwrap_or_default()
}

impl RankingTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tracker,term,modality");
        for c in RANKED_COLUMNS {
            write!(s, ",{c}").unwrap();
        }
        for c in RANKED_COLUMNS {
            write!(s, ",{c}_rank").unwrap();
        }
        s.push_str(",fps\n");
        for r in &self.rows {
            write!(s, "{},{},{}", r.tracker, opt(&r.term), opt(&r.modality)).unwrap();
            for c in 0..6 {
                write!(s, ",{:.3}", r.value(c)).unwrap();
            }
            for rank in r.ranks {
                write!(s, ",{}", rank.map(|k| k.to_string()).unwrap_or_default()).unwrap();
            }
            writeln!(s, ",{}", fps_cell(r.fps)).unwrap();
        }
        s
    }

    /// Markdown table; ranked cells read `0.532 (1)`.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| Tracker | Type | Pr (seq) | Re (seq) | F (seq) | Pr (frame) | Re (frame) | F (frame) | FPS |\n\
             |---|---|---:|---:|---:|---:|---:|---:|---:|\n",
        );
        for r in &self.rows {
            let kind = match (&r.term, &r.modality) {
                (Some(t), Some(m)) => format!("{t}/{m}"),
                (a, b) => format!("{}{}", opt(a), opt(b)),
            };
            write!(s, "| {} | {} |", r.tracker, kind).unwrap();
            for c in 0..6 {
                match r.ranks[c] {
                    Some(k) => write!(s, " {:.3} ({k}) |", r.value(c)).unwrap(),
                    None => write!(s, " {:.3} |", r.value(c)).unwrap(),
                }
            }
            writeln!(s, " {} |", fps_cell(r.fps)).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Json,
}

impl CurveFormat {
    pub fn extension(self) -> &'static str {
        match self {
            CurveFormat::Csv => "csv",
            CurveFormat::Json => "json",
        }
    }
}

impl FromStr for CurveFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(CurveFormat::Csv),
            "json" => Ok(CurveFormat::Json),
            _ => Err(format!("unknown curve format `{s}` (csv, json)")),
        }
    }
}

/// CSV rows `tau,pr,re,f` at six decimals, or the full curve as JSON with
/// exact floats and a `best` entry.
pub fn export_curve(curve: &PRCurve, format: CurveFormat) -> Vec<u8> {
    match format {
        CurveFormat::Csv => {
            let mut s = String::from("tau,pr,re,f\n");
            for p in &curve.points {
                writeln!(s, "{:.6},{:.6},{:.6},{:.6}", p.tau, p.pr, p.re, p.f).unwrap();
            }
            s.into_bytes()
        }
        CurveFormat::Json => {
            let mut v = serde_json::to_vec_pretty(curve).expect("curves serialize");
            v.push(b'\n');
            v
        }
    }
}

/// Best frame-based F per attribute (rows) and tracker (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    pub trackers: Vec<String>,
    pub rows: Vec<(Attribute, Vec<Option<f64>>)>,
}

/// Columns follow the order of `reports`; rows follow the fixed attribute
/// order with `NaN` last.
pub fn attribute_matrix(reports: &[MetricsReport]) -> Result<AttributeMatrix, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    Ok(AttributeMatrix {
        trackers: reports.iter().map(|r| r.tracker.clone()).collect(),
        rows: Attribute::ALL
            .iter()
            .map(|&a| (a, reports.iter().map(|r| r.attributes.get(&a).copied()).collect()))
            .collect(),
    })
}

impl AttributeMatrix {
    /// Absent attributes are empty cells.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("attribute");
        for t in &self.trackers {
            write!(s, ",{t}").unwrap();
        }
        s.push('\n');
        for (a, cells) in &self.rows {
            s.push_str(a.code());
            for c in cells {
                match c {
                    Some(v) => write!(s, ",{v:.3}").unwrap(),
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Path of a curve file relative to the output directory.
pub fn curve_path(tracker: &str, protocol: Protocol, format: CurveFormat) -> String {
    format!("curves/{tracker}.{}.{}", protocol.name(), format.extension())
}

/// Gnuplot scripts for the precision/recall and F/threshold plots of one
/// protocol; they read the CSV curve files and are meant to run from `plots/`.
pub fn plot_scripts(trackers: &[String], protocol: Protocol) -> [(String, String); 2] {
    let p = protocol.name();
    let series = |using: &str| {
        trackers
            .iter()
            .map(|t| format!("'../{}' using {using} with lines title '{t}'", curve_path(t, protocol, CurveFormat::Csv)))
            .collect::<Vec<_>>()
            .join(", \\\n     ")
    };
    let header = |title: &str, out: &str, x: &str, y: &str| {
        format!(
            "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 800,600\n\
             set output '{out}'\nset title '{title}'\nset xlabel '{x}'\nset ylabel '{y}'\n\
             set xrange [0:1]\nset yrange [0:1]\nset grid\n"
        )
    };
    [
        (
            format!("pr.{p}.gp"),
            format!(
                "{}plot {}\n",
                header(&format!("Precision-recall ({p})"), &format!("pr.{p}.png"), "Recall", "Precision"),
                series("3:2")
            ),
        ),
        (
            format!("f.{p}.gp"),
            format!(
                "{}plot {}\n",
                header(&format!("F-score ({p})"), &format!("f.{p}.png"), "Threshold", "F-score"),
                series("1:4")
            ),
        ),
    ]
}

/// Writes ranking, attribute, curve and plot files under `out`.
pub fn write_report(out: &Path, entries: &[(MetricsReport, RunMeta)]) -> Result<(), ReportError> {
    let table = ranking_table(entries)?;
    let reports: Vec<MetricsReport> = table
        .rows
        .iter()
        .map(|row| entries.iter().find(|(r, _)| r.tracker == row.tracker).unwrap().0.clone())
        .collect();
    fs::create_dir_all(out.join("curves"))?;
    fs::create_dir_all(out.join("plots"))?;
    fs::write(out.join("ranking.csv"), table.to_csv())?;
    fs::write(out.join("ranking.md"), table.to_markdown())?;
    fs::write(out.join("attributes.csv"), attribute_matrix(&reports)?.to_csv())?;
    write_curves(out, &reports, &[CurveFormat::Csv, CurveFormat::Json])?;
    let names: Vec<String> = reports.iter().map(|r| r.tracker.clone()).collect();
    for protocol in Protocol::BOTH {
        for (file, body) in plot_scripts(&names, protocol) {
            fs::write(out.join("plots").join(file), body)?;
        }
    }
    Ok(())
}

/// Curve files for both protocols of every report.
pub fn write_curves(out: &Path, reports: &[MetricsReport], formats: &[CurveFormat]) -> Result<(), ReportError> {
    fs::create_dir_all(out.join("curves"))?;
    for r in reports {
        for protocol in Protocol::BOTH {
            for &f in formats {
                fs::write(out.join(curve_path(&r.tracker, protocol, f)), export_curve(r.curve(protocol), f))?;
            }
        }
    }
    Ok(())
}

/// One line per protocol: `<tracker> <protocol> Pr=… Re=… F=… tau=…`.
pub fn summary_lines(report: &MetricsReport) -> Vec<String> {
    Protocol::BOTH
        .iter()
        .map(|&p| {
            let b = report.best(p);
            format!(
                "{} {} Pr={:.3} Re={:.3} F={:.3} tau={:.3}",
                report.tracker,
                p.name(),
                b.pr,
                b.re,
                b.f,
                b.tau
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn report(name: &str, f: f64) -> MetricsReport {
        let p = MetricsPoint { tau: 0.0, pr: f, re: f, f };
        let curve = |protocol| PRCurve {
            protocol,
            points: vec![p],
            best: p,
        };
        MetricsReport {
            tracker: name.into(),
            fps: None,
            sequence_based: curve(Protocol::SequenceBased),
            frame_based: curve(Protocol::FrameBased),
            attributes: BTreeMap::new(),
            frames: 1,
            sequences: 1,
        }
    }

    fn entries(list: &[(&str, f64)]) -> Vec<(MetricsReport, RunMeta)> {
        list.iter().map(|&(n, f)| (report(n, f), RunMeta::default())).collect()
    }

    #[test]
    fn top_three_on_f() {
        let t = ranking_table(&entries(&[("ATCAIS", 0.476), ("DeT", 0.532), ("DDiMP", 0.485), ("x", 0.1)])).unwrap();
        let names: Vec<_> = t.rows.iter().map(|r| r.tracker.as_str()).collect();
        assert_eq!(names, ["DeT", "DDiMP", "ATCAIS", "x"]);
        let ranks: Vec<_> = t.rows.iter().map(|r| r.ranks[2]).collect();
        assert_eq!(ranks, [Some(1), Some(2), Some(3), None]);
        for c in 0..6 {
            assert_eq!(t.rows.iter().filter(|r| r.ranks[c].is_some()).count(), 3);
        }
    }

    #[test]
    fn single_and_tied_rows() {
        let t = ranking_table(&entries(&[("solo", 0.3)])).unwrap();
        assert_eq!(t.rows[0].ranks, [Some(1); 6]);
        let t = ranking_table(&entries(&[("b", 0.5), ("a", 0.5)])).unwrap();
        assert_eq!(t.rows[0].tracker, "a");
        assert_eq!(t.rows[0].ranks[2], Some(1));
        assert_eq!(t.rows[1].ranks[2], Some(2));
        assert!(matches!(ranking_table(&[]), Err(ReportError::EmptyInput)));
    }

    #[test]
    fn csv_and_markdown_shape() {
        let mut e = entries(&[("a", 0.5)]);
        e[0].1.term = Some("LT".into());
        e[0].1.modality = Some("RGBD".into());
        e[0].0.fps = Some(12.345);
        let t = ranking_table(&e).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv.lines().nth(1).unwrap(), "a,LT,RGBD,0.500,0.500,0.500,0.500,0.500,0.500,1,1,1,1,1,1,12.3");
        assert!(t.to_markdown().contains("| a | LT/RGBD | 0.500 (1) |"));
    }

    #[test]
    fn curve_exports() {
        let r = report("t", 0.25);
        let csv = String::from_utf8(export_curve(&r.frame_based, CurveFormat::Csv)).unwrap();
        assert_eq!(csv, "tau,pr,re,f\n0.000000,0.250000,0.250000,0.250000\n");
        let json = export_curve(&r.frame_based, CurveFormat::Json);
        let back: PRCurve = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, r.frame_based);
        assert!(String::from_utf8(json).unwrap().contains("\"best\""));
    }

    #[test]
    fn attribute_cells() {
        let mut r = report("t", 0.5);
        r.attributes.insert(Attribute::BC, 0.75);
        let m = attribute_matrix(&[r]).unwrap();
        let csv = m.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + Attribute::ALL.len());
        assert_eq!(lines[0], "attribute,t");
        assert_eq!(lines[1], "AC,");
        assert_eq!(lines[2], "BC,0.750");
        assert_eq!(*lines.last().unwrap(), "NaN,");
        assert_eq!(m.rows.iter().filter(|(_, c)| c[0].is_some()).count(), 1);
    }

    #[test]
    fn scripts_reference_curve_files() {
        let [(name, body), (fname, _)] = plot_scripts(&["a".into(), "b".into()], Protocol::FrameBased);
        assert_eq!((name.as_str(), fname.as_str()), ("pr.frame-based.gp", "f.frame-based.gp"));
        assert!(body.contains("'../curves/a.frame-based.csv' using 3:2"));
        assert!(body.contains("title 'b'"));
    }
}
