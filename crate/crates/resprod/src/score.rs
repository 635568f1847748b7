//! Individual productivity and percentile ranking.
//!
//! A researcher's productivity is the sum, over their publications, of the
//! standardized citation impact times the reciprocal of the number of
//! co-authors. Percentiles compare researchers against national colleagues
//! of the same field and rank level on a 0-100 (worst to best) scale.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    AcademicRank, Corpus, PublicationId, RankLevel, Researcher, ResearcherId, SdsCode,
};
use crate::error::{Error, Result};
use crate::normalize::{standardize_publication, MedianTable};

/// Productivity of a single researcher.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResearcherScore {
    pub researcher: ResearcherId,
    pub p_r: f64,
    pub n_pubs: usize,
}

/// Fully resolved score row: productivity plus the national percentile of
/// the researcher within their (SDS, rank level) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub researcher: ResearcherId,
    pub university: String,
    pub sds: SdsCode,
    pub rank: AcademicRank,
    pub p_r: f64,
    pub n_pubs: usize,
    pub percentile: f64,
}

/// Scores and percentiles for every researcher of a corpus.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    entries: BTreeMap<ResearcherId, ScoreEntry>,
    degenerate_cells: BTreeSet<(SdsCode, RankLevel)>,
    undefined_baseline_pubs: BTreeSet<PublicationId>,
}

impl ScoreTable {
    pub fn from_entries(entries: impl IntoIterator<Item = ScoreEntry>) -> Self {
        Self {
            entries: entries.into_iter().map(|e| (e.researcher.clone(), e)).collect(),
            ..Self::default()
        }
    }

    pub fn get(&self, id: &ResearcherId) -> Option<&ScoreEntry> {
        self.entries.get(id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ScoreEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// (SDS, rank) groups holding a single researcher nationally, whose
    /// percentile of 100 is trivial.
    pub fn degenerate_cells(&self) -> impl Iterator<Item = &(SdsCode, RankLevel)> {
        self.degenerate_cells.iter()
    }

    /// Cited publications for which no category had a baseline median.
    pub fn undefined_baseline_pubs(&self) -> impl Iterator<Item = &PublicationId> {
        self.undefined_baseline_pubs.iter()
    }
}

/// Productivity of one researcher per the fractional-counting formula:
/// sum of standardized impact divided by the co-author count, over the
/// researcher's publications in the window.
pub fn researcher_productivity(
    researcher: &Researcher,
    corpus: &Corpus,
    medians: &MedianTable,
) -> ResearcherScore {
    let mut p_r = 0.0;
    let mut n_pubs = 0usize;
    for publication in corpus.publications_of(&researcher.id) {
        let std = standardize_publication(publication, medians);
        p_r += std.value / f64::from(publication.n_authors);
        n_pubs += 1;
    }
    ResearcherScore { researcher: researcher.id.clone(), p_r, n_pubs }
}

/// Mid-rank percentiles of a value multiset, 0 (worst) to 100 (best).
///
/// Ties receive the mean zero-based rank of their tie group, divided by
/// N-1; a singleton population maps to 100. Output is positional: entry
/// `i` is the percentile of `values[i]`.
pub fn midrank_percentiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![100.0];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite scores"));
    let mut out = vec![0.0; n];
    let denom = (n - 1) as f64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let mean_rank = (start + end - 1) as f64 / 2.0;
        let pct = 100.0 * mean_rank / denom;
        for &idx in &order[start..end] {
            out[idx] = pct;
        }
        start = end;
    }
    out
}

/// Score every researcher and attach percentiles computed within each
/// (SDS, rank level) group of the corpus.
pub fn score_corpus(corpus: &Corpus, medians: &MedianTable) -> ScoreTable {
    let mut undefined_baseline_pubs = BTreeSet::new();
    for p in corpus.publications() {
        if standardize_publication(p, medians).undefined_baseline {
            undefined_baseline_pubs.insert(p.id.clone());
        }
    }

    let mut groups: BTreeMap<(SdsCode, RankLevel), Vec<(ResearcherId, f64, usize)>> =
        BTreeMap::new();
    let mut meta: BTreeMap<ResearcherId, (String, AcademicRank)> = BTreeMap::new();
    for r in corpus.researchers() {
        let score = researcher_productivity(r, corpus, medians);
        groups
            .entry((r.sds.clone(), r.rank.level))
            .or_default()
            .push((r.id.clone(), score.p_r, score.n_pubs));
        meta.insert(r.id.clone(), (r.university.clone(), r.rank));
    }

    let mut entries = BTreeMap::new();
    let mut degenerate_cells = BTreeSet::new();
    for ((sds, level), members) in groups {
        if members.len() == 1 {
            degenerate_cells.insert((sds.clone(), level));
        }
        let values: Vec<f64> = members.iter().map(|(_, p_r, _)| *p_r).collect();
        let percentiles = midrank_percentiles(&values);
        for ((id, p_r, n_pubs), percentile) in members.into_iter().zip(percentiles) {
            let (university, rank) = meta.remove(&id).expect("researcher metadata");
            entries.insert(
                id.clone(),
                ScoreEntry { researcher: id, university, sds: sds.clone(), rank, p_r, n_pubs, percentile },
            );
        }
    }

    ScoreTable { entries, degenerate_cells, undefined_baseline_pubs }
}

/// Share of researchers at or above each percentile cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffShare {
    pub cutoff: f64,
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdShares {
    pub total: usize,
    pub at_cutoff: Vec<CutoffShare>,
    /// The "equal to 100" top class, reported alongside the cutoffs.
    pub exactly_top: CutoffShare,
}

/// Fraction of the (optionally university-filtered) researchers whose
/// percentile is at or above each cutoff, plus the percentile-100 class.
pub fn threshold_shares(
    scores: &ScoreTable,
    university: Option<&str>,
    cutoffs: &[f64],
) -> Result<ThresholdShares> {
    let percentiles: Vec<f64> = scores
        .entries()
        .filter(|e| university.is_none_or(|u| e.university == u))
        .map(|e| e.percentile)
        .collect();
    if percentiles.is_empty() {
        return Err(Error::EmptyFilterResult);
    }
    let total = percentiles.len();
    let share_of = |count: usize| count as f64 / total as f64;
    let at_cutoff = cutoffs
        .iter()
        .map(|&cutoff| {
            let count = percentiles.iter().filter(|&&p| p >= cutoff).count();
            CutoffShare { cutoff, count, share: share_of(count) }
        })
        .collect();
    let top_count = percentiles.iter().filter(|&&p| p == 100.0).count();
    Ok(ThresholdShares {
        total,
        at_cutoff,
        exactly_top: CutoffShare { cutoff: 100.0, count: top_count, share: share_of(top_count) },
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::{Publication, SubjectCategory, Taxonomy, UdaCode};
    use crate::normalize::build_median_table;

    /// Table with one assistant researcher per score, used by diagnostics
    /// and aggregation tests that only care about score values.
    pub(crate) fn table_from_p_rs(p_rs: &[f64]) -> ScoreTable {
        ScoreTable::from_entries(p_rs.iter().enumerate().map(|(i, &p_r)| ScoreEntry {
            researcher: ResearcherId::new(format!("r{i}")),
            university: "U1".into(),
            sds: SdsCode::from("S1"),
            rank: AcademicRank::new(RankLevel::Assistant, false),
            p_r,
            n_pubs: 1,
            percentile: 0.0,
        }))
    }

    fn corpus_for_scores() -> Corpus {
        let mut taxonomy = Taxonomy::new();
        taxonomy.insert(SdsCode::from("S1"), UdaCode::from("U"), "Area");
        let researchers = vec![
            Researcher {
                id: ResearcherId::from("solo"),
                university: "U1".into(),
                sds: SdsCode::from("S1"),
                rank: AcademicRank::new(RankLevel::Full, true),
            },
            Researcher {
                id: ResearcherId::from("team"),
                university: "U1".into(),
                sds: SdsCode::from("S1"),
                rank: AcademicRank::new(RankLevel::Full, true),
            },
        ];
        let publications = vec![
            // Cell (2005, C1) cited-only median comes out to 2.
            Publication {
                id: PublicationId::from("m1"),
                year: 2005,
                subject_categories: vec![SubjectCategory::from("C1")],
                citations: 2,
                n_authors: 9,
                author_researcher_ids: vec![],
            },
            Publication {
                id: PublicationId::from("p-solo"),
                year: 2005,
                subject_categories: vec![SubjectCategory::from("C1")],
                citations: 2,
                n_authors: 1,
                author_researcher_ids: vec![ResearcherId::from("solo")],
            },
            Publication {
                id: PublicationId::from("p-team"),
                year: 2005,
                subject_categories: vec![SubjectCategory::from("C1")],
                citations: 2,
                n_authors: 3,
                author_researcher_ids: vec![ResearcherId::from("team")],
            },
        ];
        Corpus::new(researchers, publications, taxonomy, (2004, 2008)).unwrap()
    }

    #[test]
    fn solo_publication_at_the_median_scores_one() {
        let corpus = corpus_for_scores();
        let medians = build_median_table(&corpus);
        let r = corpus.researcher(&ResearcherId::from("solo")).unwrap();
        let score = researcher_productivity(r, &corpus, &medians);
        assert_eq!(score.p_r, 1.0);
        assert_eq!(score.n_pubs, 1);
    }

    #[test]
    fn fractional_counting_divides_by_coauthors() {
        let corpus = corpus_for_scores();
        let medians = build_median_table(&corpus);
        let r = corpus.researcher(&ResearcherId::from("team")).unwrap();
        let score = researcher_productivity(r, &corpus, &medians);
        assert!((score.p_r - 1.0 / 3.0).abs() < 1e-12);
    }

    fn filler(id: &str, year: i32, cat: &str, citations: u32) -> Publication {
        Publication {
            id: PublicationId::from(id),
            year,
            subject_categories: vec![SubjectCategory::from(cat)],
            citations,
            n_authors: 7,
            author_researcher_ids: vec![],
        }
    }

    #[test]
    fn zero_cited_publications_add_nothing() {
        // Cell (2005, C1) holds cited counts {1, 2, 6} so its median is 2;
        // the researcher has the 6-citation paper with 3 authors plus a
        // zero-cited solo paper: 6/2 * 1/3 + 0 = 1.
        let mut taxonomy = Taxonomy::new();
        taxonomy.insert(SdsCode::from("S1"), UdaCode::from("U"), "Area");
        let researcher = Researcher {
            id: ResearcherId::from("r1"),
            university: "U1".into(),
            sds: SdsCode::from("S1"),
            rank: AcademicRank::new(RankLevel::Full, true),
        };
        let publications = vec![
            filler("m1", 2005, "C1", 1),
            filler("m2", 2005, "C1", 2),
            Publication {
                id: PublicationId::from("hit"),
                year: 2005,
                subject_categories: vec![SubjectCategory::from("C1")],
                citations: 6,
                n_authors: 3,
                author_researcher_ids: vec![ResearcherId::from("r1")],
            },
            Publication {
                id: PublicationId::from("dud"),
                year: 2005,
                subject_categories: vec![SubjectCategory::from("C2")],
                citations: 0,
                n_authors: 1,
                author_researcher_ids: vec![ResearcherId::from("r1")],
            },
        ];
        let corpus = Corpus::new(vec![researcher], publications, taxonomy, (2004, 2008)).unwrap();
        let medians = build_median_table(&corpus);
        let r = corpus.researcher(&ResearcherId::from("r1")).unwrap();
        let score = researcher_productivity(r, &corpus, &medians);
        assert!((score.p_r - 1.0).abs() < 1e-12);
        assert_eq!(score.n_pubs, 2);
    }

    #[test]
    fn multidisciplinary_impact_averages_before_fractional_counting() {
        // Medians: (2005, C1) -> 2 and (2005, C2) -> 4. A two-author paper
        // with 4 citations in both categories: mean(4/2, 4/4) / 2 = 0.75.
        let mut taxonomy = Taxonomy::new();
        taxonomy.insert(SdsCode::from("S1"), UdaCode::from("U"), "Area");
        let researcher = Researcher {
            id: ResearcherId::from("r1"),
            university: "U1".into(),
            sds: SdsCode::from("S1"),
            rank: AcademicRank::new(RankLevel::Full, true),
        };
        let publications = vec![
            filler("m1", 2005, "C1", 2),
            filler("m2", 2005, "C2", 4),
            Publication {
                id: PublicationId::from("x"),
                year: 2005,
                subject_categories: vec![SubjectCategory::from("C1"), SubjectCategory::from("C2")],
                citations: 4,
                n_authors: 2,
                author_researcher_ids: vec![ResearcherId::from("r1")],
            },
        ];
        let corpus = Corpus::new(vec![researcher], publications, taxonomy, (2004, 2008)).unwrap();
        // The multidisciplinary paper itself joins both cells, so build
        // the baseline from a reference corpus holding only the fillers
        // to keep the medians at {2, 4}.
        let reference = Corpus::new(
            vec![],
            vec![filler("m1", 2005, "C1", 2), filler("m2", 2005, "C2", 4)],
            Taxonomy::new(),
            (2004, 2008),
        )
        .unwrap();
        let medians = build_median_table(&reference);
        let r = corpus.researcher(&ResearcherId::from("r1")).unwrap();
        let score = researcher_productivity(r, &corpus, &medians);
        assert!((score.p_r - 0.75).abs() < 1e-12);
    }

    #[test]
    fn percentiles_spread_evenly_without_ties() {
        let got = midrank_percentiles(&[0.5, 0.1, 0.9, 0.3, 0.7]);
        assert_eq!(got, vec![50.0, 0.0, 100.0, 25.0, 75.0]);
    }

    #[test]
    fn singleton_group_is_top() {
        assert_eq!(midrank_percentiles(&[42.0]), vec![100.0]);
    }

    #[test]
    fn ties_share_their_mean_rank() {
        let got = midrank_percentiles(&[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(got, vec![0.0, 50.0, 50.0, 100.0]);
    }

    #[test]
    fn score_corpus_marks_degenerate_cells() {
        let corpus = corpus_for_scores();
        let medians = build_median_table(&corpus);
        let table = score_corpus(&corpus, &medians);
        assert_eq!(table.len(), 2);
        // Both researchers share a cell of size two: nothing degenerate.
        assert_eq!(table.degenerate_cells().count(), 0);
        let solo = table.get(&ResearcherId::from("solo")).unwrap();
        let team = table.get(&ResearcherId::from("team")).unwrap();
        assert_eq!(solo.percentile, 100.0);
        assert_eq!(team.percentile, 0.0);
    }

    #[test]
    fn threshold_shares_count_inclusively() {
        let mut entries = Vec::new();
        for (i, pct) in [95.0, 91.0, 85.0, 60.0].into_iter().enumerate() {
            entries.push(ScoreEntry {
                researcher: ResearcherId::new(format!("r{i}")),
                university: "U1".into(),
                sds: SdsCode::from("S1"),
                rank: AcademicRank::new(RankLevel::Full, true),
                p_r: 1.0,
                n_pubs: 1,
                percentile: pct,
            });
        }
        let table = ScoreTable::from_entries(entries);
        let shares = threshold_shares(&table, None, &[90.0, 80.0]).unwrap();
        assert_eq!(shares.at_cutoff[0].share, 0.50);
        assert_eq!(shares.at_cutoff[1].share, 0.75);
        assert_eq!(shares.exactly_top.count, 0);
    }

    #[test]
    fn all_at_top_saturates_every_cutoff() {
        let mut table = table_from_p_rs(&[1.0, 1.0, 1.0]);
        let entries: Vec<ScoreEntry> = table
            .entries()
            .map(|e| ScoreEntry { percentile: 100.0, ..e.clone() })
            .collect();
        table = ScoreTable::from_entries(entries);
        let shares = threshold_shares(&table, None, &[99.0, 50.0, 0.0]).unwrap();
        assert!(shares.at_cutoff.iter().all(|c| c.share == 1.0));
        assert_eq!(shares.exactly_top.share, 1.0);
    }

    #[test]
    fn empty_filter_is_an_error() {
        let table = table_from_p_rs(&[1.0]);
        assert!(matches!(
            threshold_shares(&table, Some("nowhere"), &[50.0]),
            Err(Error::EmptyFilterResult)
        ));
    }
}
