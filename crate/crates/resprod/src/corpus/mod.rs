//! Domain model: researchers, publications, the field taxonomy and the
//! immutable corpus container they live in.

mod diagnostics;
mod load;

pub use diagnostics::{top_share_output, unproductive_share, UnproductiveShares};
pub use load::{load_corpus, write_corpus, CorpusPaths, LoadReport};
pub(crate) use load::{csv_io_error, csv_writer, write_text};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationIssue};

macro_rules! string_code {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(code: impl Into<String>) -> Self {
                Self(code.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(code: &str) -> Self {
                Self(code.to_owned())
            }
        }
    };
}

string_code!(
    /// Subject category of a publication (the journal's category label).
    SubjectCategory
);
string_code!(
    /// Code of a scientific disciplinary sector, the atomic research field.
    SdsCode
);
string_code!(
    /// Code of a university disciplinary area, a grouping of sectors.
    UdaCode
);
string_code!(ResearcherId);
string_code!(PublicationId);

/// Academic rank level; confirmation status is carried separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankLevel {
    Full,
    Associate,
    Assistant,
}

impl RankLevel {
    pub const ALL: [RankLevel; 3] = [RankLevel::Full, RankLevel::Associate, RankLevel::Assistant];

    pub fn as_str(&self) -> &'static str {
        match self {
            RankLevel::Full => "full",
            RankLevel::Associate => "associate",
            RankLevel::Assistant => "assistant",
        }
    }
}

impl fmt::Display for RankLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RankLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(RankLevel::Full),
            "associate" => Ok(RankLevel::Associate),
            "assistant" => Ok(RankLevel::Assistant),
            other => Err(format!("unknown rank level: {other}")),
        }
    }
}

/// One of the six (level, confirmed) rank combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AcademicRank {
    pub level: RankLevel,
    pub confirmed: bool,
}

impl AcademicRank {
    pub const ALL: [AcademicRank; 6] = [
        AcademicRank { level: RankLevel::Full, confirmed: true },
        AcademicRank { level: RankLevel::Full, confirmed: false },
        AcademicRank { level: RankLevel::Associate, confirmed: true },
        AcademicRank { level: RankLevel::Associate, confirmed: false },
        AcademicRank { level: RankLevel::Assistant, confirmed: true },
        AcademicRank { level: RankLevel::Assistant, confirmed: false },
    ];

    pub fn new(level: RankLevel, confirmed: bool) -> Self {
        Self { level, confirmed }
    }

    /// Compact token used in single-column exports, e.g. `full-confirmed`.
    pub fn token(&self) -> String {
        format!(
            "{}-{}",
            self.level,
            if self.confirmed { "confirmed" } else { "probationary" }
        )
    }

    pub fn parse_token(token: &str) -> std::result::Result<Self, String> {
        let (level, status) = token
            .split_once('-')
            .ok_or_else(|| format!("malformed rank token: {token}"))?;
        let confirmed = match status {
            "confirmed" => true,
            "probationary" => false,
            other => return Err(format!("unknown confirmation status: {other}")),
        };
        Ok(Self { level: level.parse()?, confirmed })
    }
}

impl fmt::Display for AcademicRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} professor ({})",
            self.level,
            if self.confirmed { "confirmed" } else { "probationary" }
        )
    }
}

/// A faculty member. Each researcher is classified in exactly one SDS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Researcher {
    pub id: ResearcherId,
    pub university: String,
    pub sds: SdsCode,
    pub rank: AcademicRank,
}

/// A cited work linked to zero or more corpus researchers.
///
/// `n_authors` is the full byline length (including authors outside the
/// corpus); `author_researcher_ids` is the resident subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub id: PublicationId,
    pub year: i32,
    pub subject_categories: Vec<SubjectCategory>,
    pub citations: u32,
    pub n_authors: u32,
    pub author_researcher_ids: Vec<ResearcherId>,
}

/// Maps each SDS to its parent UDA.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    sds_to_uda: BTreeMap<SdsCode, UdaCode>,
    uda_names: BTreeMap<UdaCode, String>,
}

impl Taxonomy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sds: SdsCode, uda: UdaCode, uda_name: impl Into<String>) {
        self.uda_names.entry(uda.clone()).or_insert_with(|| uda_name.into());
        self.sds_to_uda.insert(sds, uda);
    }

    pub fn uda_of(&self, sds: &SdsCode) -> Option<&UdaCode> {
        self.sds_to_uda.get(sds)
    }

    pub fn uda_name(&self, uda: &UdaCode) -> Option<&str> {
        self.uda_names.get(uda).map(String::as_str)
    }

    pub fn contains_sds(&self, sds: &SdsCode) -> bool {
        self.sds_to_uda.contains_key(sds)
    }

    pub fn sds_codes(&self) -> impl Iterator<Item = &SdsCode> {
        self.sds_to_uda.keys()
    }

    pub fn uda_codes(&self) -> impl Iterator<Item = &UdaCode> {
        self.uda_names.keys()
    }

    pub fn sds_in_uda<'a>(&'a self, uda: &'a UdaCode) -> impl Iterator<Item = &'a SdsCode> {
        self.sds_to_uda
            .iter()
            .filter(move |(_, u)| *u == uda)
            .map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.sds_to_uda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sds_to_uda.is_empty()
    }
}

/// Validated, immutable snapshot of a national research population.
///
/// Construction checks referential integrity of every cross-link and
/// collects all violations; afterwards the corpus is safe for concurrent
/// read from any number of workers.
#[derive(Debug, Clone)]
pub struct Corpus {
    researchers: Vec<Researcher>,
    publications: Vec<Publication>,
    taxonomy: Taxonomy,
    window: (i32, i32),
    researcher_index: BTreeMap<ResearcherId, usize>,
    pubs_by_researcher: BTreeMap<ResearcherId, Vec<usize>>,
    universities: BTreeSet<String>,
}

impl Corpus {
    pub fn new(
        researchers: Vec<Researcher>,
        publications: Vec<Publication>,
        taxonomy: Taxonomy,
        window: (i32, i32),
    ) -> Result<Self> {
        let mut issues = Vec::new();
        if window.0 > window.1 {
            issues.push(ValidationIssue::EmptyWindow { first: window.0, last: window.1 });
        }

        let mut researcher_index = BTreeMap::new();
        for (i, r) in researchers.iter().enumerate() {
            if researcher_index.insert(r.id.clone(), i).is_some() {
                issues.push(ValidationIssue::DuplicateResearcherId(r.id.to_string()));
            }
            if !taxonomy.contains_sds(&r.sds) {
                issues.push(ValidationIssue::DanglingSds {
                    researcher: r.id.to_string(),
                    sds: r.sds.to_string(),
                });
            }
        }

        let mut pub_ids = BTreeSet::new();
        let mut pubs_by_researcher: BTreeMap<ResearcherId, Vec<usize>> = BTreeMap::new();
        for (i, p) in publications.iter().enumerate() {
            if !pub_ids.insert(p.id.clone()) {
                issues.push(ValidationIssue::DuplicatePublicationId(p.id.to_string()));
            }
            if p.n_authors == 0 {
                issues.push(ValidationIssue::ZeroAuthors { publication: p.id.to_string() });
            }
            if p.subject_categories.is_empty() {
                issues.push(ValidationIssue::NoSubjectCategories { publication: p.id.to_string() });
            }
            if (p.n_authors as usize) < p.author_researcher_ids.len() {
                issues.push(ValidationIssue::AuthorCountBelowResidents {
                    publication: p.id.to_string(),
                    n_authors: p.n_authors,
                    residents: p.author_researcher_ids.len(),
                });
            }
            if p.year < window.0 || p.year > window.1 {
                issues.push(ValidationIssue::YearOutsideWindow {
                    publication: p.id.to_string(),
                    year: p.year,
                });
            }
            for author in &p.author_researcher_ids {
                if researcher_index.contains_key(author) {
                    pubs_by_researcher.entry(author.clone()).or_default().push(i);
                } else {
                    issues.push(ValidationIssue::DanglingAuthor {
                        publication: p.id.to_string(),
                        researcher: author.to_string(),
                    });
                }
            }
        }

        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }

        let universities = researchers.iter().map(|r| r.university.clone()).collect();
        Ok(Self {
            researchers,
            publications,
            taxonomy,
            window,
            researcher_index,
            pubs_by_researcher,
            universities,
        })
    }

    pub fn researchers(&self) -> &[Researcher] {
        &self.researchers
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn researcher(&self, id: &ResearcherId) -> Option<&Researcher> {
        self.researcher_index.get(id).map(|&i| &self.researchers[i])
    }

    /// Publications naming `id` as a resident author, in input order.
    pub fn publications_of(&self, id: &ResearcherId) -> impl Iterator<Item = &Publication> {
        self.pubs_by_researcher
            .get(id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.publications[i])
    }

    pub fn universities(&self) -> impl Iterator<Item = &str> {
        self.universities.iter().map(String::as_str)
    }

    pub fn has_university(&self, university: &str) -> bool {
        self.universities.contains(university)
    }

    /// Faculty headcount of a university in one SDS.
    pub fn faculty_count(&self, university: &str, sds: &SdsCode) -> usize {
        self.researchers
            .iter()
            .filter(|r| r.university == university && &r.sds == sds)
            .count()
    }

    pub fn researchers_of<'a>(
        &'a self,
        university: &'a str,
    ) -> impl Iterator<Item = &'a Researcher> + 'a {
        self.researchers.iter().filter(move |r| r.university == university)
    }
}
