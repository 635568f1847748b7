//! File emitters: audit CSVs, ranking tables, and the rank-mix,
//! contribution and performance reports in CSV, Markdown or JSON.
//! Percentages are printed with one decimal everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::aggregate::RankingRow;
use crate::corpus::{csv_io_error, csv_writer, write_text, AcademicRank, RankLevel, ResearcherId, SdsCode, UdaCode};
use crate::error::{Error, Result};
use crate::normalize::MedianTable;
use crate::score::{ScoreEntry, ScoreTable};
use crate::spinoff::{
    ContributionReport, PerformanceReport, RankMixReport, SelectionResult, SizingPlan,
    PERCENTILE_CLASSES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
            ReportFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format: {other}")),
        }
    }
}

fn pct(share: f64) -> String {
    format!("{:.1}%", share * 100.0)
}

fn signed_points(points: f64) -> String {
    format!("{points:+.1}")
}

pub fn write_medians_csv(medians: &MedianTable, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        year: i32,
        category: &'a str,
        n_cited: usize,
        median: f64,
    }
    let mut w = csv_writer(path)?;
    for ((year, category), cell) in medians.iter() {
        w.serialize(Row { year: *year, category: category.as_str(), n_cited: cell.n_cited, median: cell.median })
            .map_err(|e| csv_io_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct ScoreRecord {
    researcher_id: String,
    university: String,
    sds: String,
    rank: String,
    p_r: f64,
    percentile: f64,
}

pub fn write_scores_csv(scores: &ScoreTable, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for e in scores.entries() {
        w.serialize(ScoreRecord {
            researcher_id: e.researcher.to_string(),
            university: e.university.clone(),
            sds: e.sds.to_string(),
            rank: e.rank.token(),
            p_r: e.p_r,
            percentile: e.percentile,
        })
        .map_err(|e| csv_io_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Re-import a previously exported score table. Publication counts are
/// not part of the export and come back as zero.
pub fn read_scores_csv(path: &Path) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_io_error(path, e))?;
    let mut entries = Vec::new();
    for record in reader.deserialize::<ScoreRecord>() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let rank = AcademicRank::parse_token(&record.rank).map_err(|message| Error::Parse {
            path: path.to_owned(),
            line: 0,
            message,
        })?;
        entries.push(ScoreEntry {
            researcher: ResearcherId::new(record.researcher_id),
            university: record.university,
            sds: SdsCode::new(record.sds),
            rank,
            p_r: record.p_r,
            n_pubs: 0,
            percentile: record.percentile,
        });
    }
    Ok(ScoreTable::from_entries(entries))
}

#[derive(Serialize)]
struct RankingRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    sds: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uda: Option<&'a str>,
    university: &'a str,
    value: f64,
    rank: usize,
    n_active: usize,
    percentile: f64,
}

pub fn write_sds_ranking_csv(
    rankings: &BTreeMap<SdsCode, Vec<RankingRow>>,
    path: &Path,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (sds, rows) in rankings {
        for row in rows {
            w.serialize(RankingRecord {
                sds: Some(sds.as_str()),
                uda: None,
                university: &row.university,
                value: row.value,
                rank: row.rank,
                n_active: row.n_active,
                percentile: row.percentile,
            })
            .map_err(|e| csv_io_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_uda_ranking_csv(
    rankings: &BTreeMap<UdaCode, Vec<RankingRow>>,
    path: &Path,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (uda, rows) in rankings {
        for row in rows {
            w.serialize(RankingRecord {
                sds: None,
                uda: Some(uda.as_str()),
                university: &row.university,
                value: row.value,
                rank: row.rank,
                n_active: row.n_active,
                percentile: row.percentile,
            })
            .map_err(|e| csv_io_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_university_ranking_csv(rows: &[RankingRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(RankingRecord {
            sds: None,
            uda: None,
            university: &row.university,
            value: row.value,
            rank: row.rank,
            n_active: row.n_active,
            percentile: row.percentile,
        })
        .map_err(|e| csv_io_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Figure-style plot data: every university (the spin-off included),
/// best first.
pub fn write_distribution_csv(rows: &[RankingRow], path: &Path) -> Result<()> {
    write_university_ranking_csv(rows, path)
}

pub fn write_plan_csv(plan: &SizingPlan, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        sds_code: &'a str,
        target_count: usize,
    }
    let mut w = csv_writer(path)?;
    for (sds, &target) in &plan.targets {
        w.serialize(Row { sds_code: sds.as_str(), target_count: target })
            .map_err(|e| csv_io_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_selection_csv(selection: &SelectionResult, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        sds_code: &'a str,
        researcher_id: &'a str,
        parent_university: &'a str,
        p_r: f64,
        percentile: f64,
    }
    let mut w = csv_writer(path)?;
    for (sds, sel) in &selection.per_sds {
        for member in &sel.selected {
            w.serialize(Row {
                sds_code: sds.as_str(),
                researcher_id: member.researcher.as_str(),
                parent_university: &member.parent,
                p_r: member.p_r,
                percentile: member.percentile,
            })
            .map_err(|e| csv_io_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn md_separator(n: usize) -> String {
    format!("|{}\n", " --- |".repeat(n))
}

fn json_of<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn render_rank_mix(report: &RankMixReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => json_of(report),
        ReportFormat::Csv => {
            let mut out = String::from(
                "area,full_count,full_share,associate_count,associate_share,assistant_count,assistant_share,total\n",
            );
            let mut push = |label: &str, mix: &crate::spinoff::RankMix| {
                let _ = writeln!(
                    out,
                    "{label},{},{:.1},{},{:.1},{},{:.1},{}",
                    mix.count(RankLevel::Full),
                    mix.share(RankLevel::Full) * 100.0,
                    mix.count(RankLevel::Associate),
                    mix.share(RankLevel::Associate) * 100.0,
                    mix.count(RankLevel::Assistant),
                    mix.share(RankLevel::Assistant) * 100.0,
                    mix.total,
                );
            };
            for (uda, mix) in &report.per_uda {
                push(uda.as_str(), mix);
            }
            push("total", &report.overall);
            push("national", &report.national);
            let _ = writeln!(
                out,
                "diff_points,,{},,{},,{},",
                signed_points(report.delta_points(RankLevel::Full)),
                signed_points(report.delta_points(RankLevel::Associate)),
                signed_points(report.delta_points(RankLevel::Assistant)),
            );
            out
        }
        ReportFormat::Markdown => {
            let mut out = md_row(&[
                "Area".into(),
                "Full professors".into(),
                "Associate professors".into(),
                "Assistant professors".into(),
                "Total".into(),
            ]);
            out.push_str(&md_separator(5));
            let cell = |mix: &crate::spinoff::RankMix, level: RankLevel| {
                format!("{} ({})", mix.count(level), pct(mix.share(level)))
            };
            for (uda, mix) in &report.per_uda {
                out.push_str(&md_row(&[
                    uda.to_string(),
                    cell(mix, RankLevel::Full),
                    cell(mix, RankLevel::Associate),
                    cell(mix, RankLevel::Assistant),
                    mix.total.to_string(),
                ]));
            }
            out.push_str(&md_row(&[
                "Total".into(),
                cell(&report.overall, RankLevel::Full),
                cell(&report.overall, RankLevel::Associate),
                cell(&report.overall, RankLevel::Assistant),
                report.overall.total.to_string(),
            ]));
            out.push_str(&md_row(&[
                "National".into(),
                cell(&report.national, RankLevel::Full),
                cell(&report.national, RankLevel::Associate),
                cell(&report.national, RankLevel::Assistant),
                report.national.total.to_string(),
            ]));
            out.push_str(&md_row(&[
                "Diff. (points)".into(),
                signed_points(report.delta_points(RankLevel::Full)),
                signed_points(report.delta_points(RankLevel::Associate)),
                signed_points(report.delta_points(RankLevel::Assistant)),
                String::new(),
            ]));
            out
        }
    }
}

pub fn render_contributions(report: &ContributionReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => json_of(report),
        ReportFormat::Csv => {
            let mut out = String::from("area,parent,selected,share,pool,concentration\n");
            for row in report.per_uda.iter().chain(std::iter::once(&report.overall)) {
                for p in &row.parents {
                    let _ = writeln!(
                        out,
                        "{},{},{},{:.1},{},{:.2}",
                        row.uda,
                        p.parent,
                        p.selected,
                        p.share * 100.0,
                        p.pool,
                        p.concentration,
                    );
                }
            }
            out
        }
        ReportFormat::Markdown => {
            let parents: Vec<&str> =
                report.overall.parents.iter().map(|p| p.parent.as_str()).collect();
            let mut header = vec!["Area".to_string()];
            header.extend(parents.iter().map(|p| p.to_string()));
            header.push("Selected".into());
            let mut out = md_row(&header);
            out.push_str(&md_separator(header.len()));
            for row in report.per_uda.iter().chain(std::iter::once(&report.overall)) {
                let mut cells = vec![row.uda.to_string()];
                for p in &row.parents {
                    cells.push(format!("{} ({:.2})", pct(p.share), p.concentration));
                }
                cells.push(row.total_selected.to_string());
                out.push_str(&md_row(&cells));
            }
            out
        }
    }
}

pub fn render_performance(report: &PerformanceReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => json_of(report),
        ReportFormat::Csv => {
            let mut out = String::from("group,n,mean_percentile,share_ge_80,share_ge_90\n");
            for row in report
                .per_uda
                .iter()
                .chain(std::iter::once(&report.overall))
                .chain(report.comparisons.iter())
            {
                let _ = writeln!(
                    out,
                    "{},{},{:.1},{:.1},{:.1}",
                    row.label,
                    row.n,
                    row.mean_percentile,
                    row.share_ge_80 * 100.0,
                    row.share_ge_90 * 100.0,
                );
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = md_row(&[
                "Group".into(),
                "Average percentile".into(),
                "Faculty above 80th percentile".into(),
                "Faculty above 90th percentile".into(),
            ]);
            out.push_str(&md_separator(4));
            for row in report
                .per_uda
                .iter()
                .chain(std::iter::once(&report.overall))
                .chain(report.comparisons.iter())
            {
                out.push_str(&md_row(&[
                    row.label.clone(),
                    format!("{:.1}", row.mean_percentile),
                    pct(row.share_ge_80),
                    pct(row.share_ge_90),
                ]));
            }
            out
        }
    }
}

/// The percentile-class table: one column per faculty group, one row per
/// class, each cell "share% (count of total)".
pub fn render_classes(report: &PerformanceReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => json_of(&report.classes),
        ReportFormat::Csv => {
            let mut out = String::from("group,class,count,total,share\n");
            for (label, shares) in &report.classes {
                for s in shares {
                    let _ = writeln!(
                        out,
                        "{label},{},{},{},{:.1}",
                        s.class.label(),
                        s.count,
                        s.total,
                        s.share * 100.0,
                    );
                }
            }
            out
        }
        ReportFormat::Markdown => {
            let mut header = vec!["Percentile class".to_string()];
            header.extend(report.classes.iter().map(|(label, _)| label.clone()));
            let mut out = md_row(&header);
            out.push_str(&md_separator(header.len()));
            for (i, class) in PERCENTILE_CLASSES.iter().enumerate() {
                let mut cells = vec![class.label()];
                for (_, shares) in &report.classes {
                    let s = &shares[i];
                    cells.push(format!("{} ({} of {})", pct(s.share), s.count, s.total));
                }
                out.push_str(&md_row(&cells));
            }
            out
        }
    }
}

/// Write one report in each requested format next to each other.
pub fn write_report_files(
    dir: &Path,
    stem: &str,
    formats: &[ReportFormat],
    render: impl Fn(ReportFormat) -> String,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &format in formats {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        write_text(&path, &render(format))?;
        written.push(path);
    }
    Ok(written)
}
