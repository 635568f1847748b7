//! Corpus ingestion from CSV or JSON-lines files sharing the same field
//! names, and the matching writer used by the synthesizer.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    AcademicRank, Corpus, Publication, PublicationId, RankLevel, Researcher, ResearcherId,
    SdsCode, SubjectCategory, Taxonomy, UdaCode,
};

/// The three input files making up a corpus.
#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub researchers: PathBuf,
    pub publications: PathBuf,
    pub taxonomy: PathBuf,
}

impl CorpusPaths {
    /// Default file names under a single directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            researchers: dir.join("researchers.csv"),
            publications: dir.join("publications.csv"),
            taxonomy: dir.join("taxonomy.csv"),
        }
    }
}

/// Load-time metadata that is not part of the corpus proper.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    /// Publications dropped because their year fell outside the window.
    pub dropped_outside_window: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResearcherRecord {
    id: String,
    university: String,
    sds_code: String,
    rank_level: String,
    confirmed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct PublicationRecord {
    id: String,
    year: i32,
    subject_categories: String,
    citations: u32,
    n_authors: u32,
    author_ids: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaxonomyRecord {
    sds_code: String,
    uda_code: String,
    uda_name: String,
}

enum FileFormat {
    Csv,
    JsonLines,
}

fn detect_format(path: &Path) -> Result<FileFormat> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(FileFormat::Csv),
        Some("jsonl") | Some("ndjson") => Ok(FileFormat::JsonLines),
        _ => Err(Error::UnsupportedFormat { path: path.to_owned() }),
    }
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    match detect_format(path)? {
        FileFormat::Csv => read_csv(path),
        FileFormat::JsonLines => read_jsonl(path),
    }
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::Parse { path: path.to_owned(), line: 0, message: e.to_string() },
        })?;
    let mut out = Vec::new();
    for record in reader.deserialize::<T>() {
        match record {
            Ok(r) => out.push(r),
            Err(e) => {
                // Header row is line 1; csv positions are zero-based byte records.
                let line = e
                    .position()
                    .map(|p| p.line())
                    .unwrap_or(out.len() as u64 + 2);
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: idx as u64 + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Read, validate and assemble a corpus. Publications outside the window
/// are dropped and counted in the report rather than rejected.
pub fn load_corpus(paths: &CorpusPaths, window: (i32, i32)) -> Result<(Corpus, LoadReport)> {
    let mut taxonomy = Taxonomy::new();
    for rec in read_records::<TaxonomyRecord>(&paths.taxonomy)? {
        taxonomy.insert(
            SdsCode::new(rec.sds_code),
            UdaCode::new(rec.uda_code),
            rec.uda_name,
        );
    }

    let mut researchers = Vec::new();
    for rec in read_records::<ResearcherRecord>(&paths.researchers)? {
        let level: RankLevel = rec.rank_level.parse().map_err(|message| Error::Parse {
            path: paths.researchers.clone(),
            line: 0,
            message,
        })?;
        researchers.push(Researcher {
            id: ResearcherId::new(rec.id),
            university: rec.university,
            sds: SdsCode::new(rec.sds_code),
            rank: AcademicRank::new(level, rec.confirmed),
        });
    }

    let mut publications = Vec::new();
    let mut report = LoadReport::default();
    for rec in read_records::<PublicationRecord>(&paths.publications)? {
        if rec.year < window.0 || rec.year > window.1 {
            report.dropped_outside_window += 1;
            continue;
        }
        publications.push(Publication {
            id: PublicationId::new(rec.id),
            year: rec.year,
            subject_categories: split_list(&rec.subject_categories)
                .into_iter()
                .map(SubjectCategory::new)
                .collect(),
            citations: rec.citations,
            n_authors: rec.n_authors,
            author_researcher_ids: split_list(&rec.author_ids)
                .into_iter()
                .map(ResearcherId::new)
                .collect(),
        });
    }

    let corpus = Corpus::new(researchers, publications, taxonomy, window)?;
    Ok((corpus, report))
}

fn join_list<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    items
        .into_iter()
        .map(|s| s.as_ref().to_owned())
        .collect::<Vec<_>>()
        .join(";")
}

/// Write a corpus back out as the three CSV files. Output is byte-stable
/// for a given corpus, so seeded synthetic runs reproduce identical files.
pub fn write_corpus(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<CorpusPaths> {
    let paths = CorpusPaths::in_dir(&dir);
    std::fs::create_dir_all(dir.as_ref()).map_err(|e| Error::io(dir.as_ref(), e))?;

    let mut w = csv_writer(&paths.researchers)?;
    for r in corpus.researchers() {
        w.serialize(ResearcherRecord {
            id: r.id.to_string(),
            university: r.university.clone(),
            sds_code: r.sds.to_string(),
            rank_level: r.rank.level.to_string(),
            confirmed: r.rank.confirmed,
        })
        .map_err(|e| csv_io_error(&paths.researchers, e))?;
    }
    w.flush().map_err(|e| Error::io(&paths.researchers, e))?;

    let mut w = csv_writer(&paths.publications)?;
    for p in corpus.publications() {
        w.serialize(PublicationRecord {
            id: p.id.to_string(),
            year: p.year,
            subject_categories: join_list(p.subject_categories.iter().map(|c| c.as_str())),
            citations: p.citations,
            n_authors: p.n_authors,
            author_ids: join_list(p.author_researcher_ids.iter().map(|a| a.as_str())),
        })
        .map_err(|e| csv_io_error(&paths.publications, e))?;
    }
    w.flush().map_err(|e| Error::io(&paths.publications, e))?;

    let taxonomy = corpus.taxonomy();
    let mut w = csv_writer(&paths.taxonomy)?;
    for sds in taxonomy.sds_codes() {
        let uda = taxonomy.uda_of(sds).expect("taxonomy key");
        w.serialize(TaxonomyRecord {
            sds_code: sds.to_string(),
            uda_code: uda.to_string(),
            uda_name: taxonomy.uda_name(uda).unwrap_or_default().to_owned(),
        })
        .map_err(|e| csv_io_error(&paths.taxonomy, e))?;
    }
    w.flush().map_err(|e| Error::io(&paths.taxonomy, e))?;

    Ok(paths)
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| csv_io_error(path, e))
}

pub(crate) fn csv_io_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Write raw text atomically enough for our purposes.
pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(dir: &Path) -> CorpusPaths {
        let paths = CorpusPaths::in_dir(dir);
        std::fs::write(
            &paths.taxonomy,
            "sds_code,uda_code,uda_name\nMAT/05,01,Mathematics\n",
        )
        .unwrap();
        std::fs::write(
            &paths.researchers,
            "id,university,sds_code,rank_level,confirmed\nr1,U1,MAT/05,full,true\n",
        )
        .unwrap();
        std::fs::write(
            &paths.publications,
            "id,year,subject_categories,citations,n_authors,author_ids\n\
             p1,2005,C1;C2,4,2,r1\n\
             p2,1999,C1,9,1,r1\n",
        )
        .unwrap();
        paths
    }

    #[test]
    fn load_filters_window_and_reports_count() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_fixture(dir.path());
        let (corpus, report) = load_corpus(&paths, (2004, 2008)).unwrap();
        assert_eq!(corpus.publications().len(), 1);
        assert_eq!(report.dropped_outside_window, 1);
        assert_eq!(corpus.publications()[0].subject_categories.len(), 2);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_fixture(dir.path());
        std::fs::write(
            &paths.publications,
            "id,year,subject_categories,citations,n_authors,author_ids\n\
             p1,not-a-year,C1,4,2,r1\n",
        )
        .unwrap();
        let err = load_corpus(&paths, (2004, 2008)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn jsonl_round_trip_matches_csv() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_fixture(dir.path());
        let (from_csv, _) = load_corpus(&paths, (2004, 2008)).unwrap();

        let jl = dir.path().join("researchers.jsonl");
        std::fs::write(
            &jl,
            r#"{"id":"r1","university":"U1","sds_code":"MAT/05","rank_level":"full","confirmed":true}"#,
        )
        .unwrap();
        let mut alt = paths.clone();
        alt.researchers = jl;
        let (from_jsonl, _) = load_corpus(&alt, (2004, 2008)).unwrap();
        assert_eq!(from_csv.researchers(), from_jsonl.researchers());
    }

    #[test]
    fn corpus_write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_fixture(dir.path());
        let (corpus, _) = load_corpus(&paths, (2004, 2008)).unwrap();

        let out = dir.path().join("echo");
        let echoed = write_corpus(&corpus, &out).unwrap();
        let (again, report) = load_corpus(&echoed, (2004, 2008)).unwrap();
        assert_eq!(report.dropped_outside_window, 0);
        assert_eq!(corpus.researchers(), again.researchers());
        assert_eq!(corpus.publications(), again.publications());
        assert_eq!(corpus.taxonomy(), again.taxonomy());
    }

    #[test]
    fn unsupported_extension_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = write_fixture(dir.path());
        paths.researchers = dir.path().join("researchers.parquet");
        std::fs::write(&paths.researchers, "").unwrap();
        assert!(matches!(
            load_corpus(&paths, (2004, 2008)),
            Err(Error::UnsupportedFormat { .. })
        ));
    }
}
