//! End-to-end orchestration: corpus to scores to rankings, and the
//! spin-off procedure on top of them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::aggregate::{
    all_sds_productivities, national_sds_means, rank_universities, sds_productivities,
    university_productivity, CostTable, MeanMode, RankingRow, SdsProductivity,
};
use crate::corpus::{Corpus, ResearcherId, SdsCode, UdaCode};
use crate::error::Result;
use crate::normalize::{build_median_table, MedianTable};
use crate::score::{score_corpus, ScoreEntry, ScoreTable};
use crate::spinoff::{
    build_sizing_plan, contribution_report, performance_report, rank_mix_report,
    select_spinoff_faculty, ContributionReport, PerformanceReport, RankMixReport, RescaleRule,
    SelectionResult, SizingPlan,
};

/// Everything the scoring stage produces.
#[derive(Debug, Clone)]
pub struct ScoreArtifacts {
    pub medians: MedianTable,
    pub scores: ScoreTable,
    pub sds_rows: Vec<SdsProductivity>,
    pub means: BTreeMap<SdsCode, f64>,
    pub sds_rankings: BTreeMap<SdsCode, Vec<RankingRow>>,
    pub uda_rankings: BTreeMap<UdaCode, Vec<RankingRow>>,
    pub university_ranking: Vec<RankingRow>,
}

/// Score a corpus end to end. Medians come from `reference` when given
/// (the corpus is then measured against that baseline), otherwise from
/// the corpus itself.
pub fn run_score(
    corpus: &Corpus,
    reference: Option<&Corpus>,
    costs: &CostTable,
    mean_mode: MeanMode,
) -> ScoreArtifacts {
    let medians = build_median_table(reference.unwrap_or(corpus));
    let scores = score_corpus(corpus, &medians);
    let sds_rows = all_sds_productivities(&scores, costs);
    let means = national_sds_means(&sds_rows, mean_mode);
    let (sds_rankings, uda_rankings, university_ranking) =
        rankings_from_rows(corpus, &sds_rows, &means);
    ScoreArtifacts { medians, scores, sds_rows, means, sds_rankings, uda_rankings, university_ranking }
}

/// Build the three ranking sets from per-(university, SDS) rows.
pub fn rankings_from_rows(
    corpus: &Corpus,
    rows: &[SdsProductivity],
    means: &BTreeMap<SdsCode, f64>,
) -> (
    BTreeMap<SdsCode, Vec<RankingRow>>,
    BTreeMap<UdaCode, Vec<RankingRow>>,
    Vec<RankingRow>,
) {
    let taxonomy = corpus.taxonomy();

    let mut per_sds: BTreeMap<SdsCode, BTreeMap<String, f64>> = BTreeMap::new();
    for row in rows {
        per_sds.entry(row.sds.clone()).or_default().insert(row.university.clone(), row.p_s);
    }
    let sds_rankings =
        per_sds.into_iter().map(|(sds, values)| (sds, rank_universities(&values))).collect();

    let universities: BTreeSet<&str> = rows.iter().map(|r| r.university.as_str()).collect();
    let mut uda_rankings = BTreeMap::new();
    for uda in taxonomy.uda_codes() {
        let mut values = BTreeMap::new();
        for &university in &universities {
            if let Some(p) =
                crate::aggregate::uda_productivity(university, uda, rows, means, taxonomy)
            {
                values.insert(university.to_owned(), p.p_u);
            }
        }
        if !values.is_empty() {
            uda_rankings.insert(uda.clone(), rank_universities(&values));
        }
    }

    let mut overall = BTreeMap::new();
    for &university in &universities {
        if let Some(p) = university_productivity(university, rows, means) {
            overall.insert(university.to_owned(), p.value);
        }
    }
    (sds_rankings, uda_rankings, rank_universities(&overall))
}

/// Whether parent universities keep their pre-selection rosters in the
/// post-spin-off ranking or lose the faculty that departed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParentMode {
    /// Parents are re-scored without the selected researchers.
    #[default]
    Rescored,
    /// Parents keep their pre-selection values for comparison.
    Frozen,
}

#[derive(Debug, Clone)]
pub struct SpinoffParams<'a> {
    pub template: &'a str,
    pub parents: &'a [String],
    pub overrides: &'a [RescaleRule],
    pub spinoff_name: &'a str,
    /// Extra universities to include in the performance comparison.
    pub comparisons: &'a [String],
    pub parent_mode: ParentMode,
    pub mean_mode: MeanMode,
}

#[derive(Debug, Clone)]
pub struct SpinoffArtifacts {
    pub plan: SizingPlan,
    pub selection: SelectionResult,
    pub rank_mix: RankMixReport,
    pub contributions: ContributionReport,
    pub performance: PerformanceReport,
    /// Overall productivity of every university with the spin-off
    /// injected as an additional virtual institution, best first.
    pub distribution: Vec<RankingRow>,
}

/// Size, select and describe the spin-off, then rank it nationally.
pub fn run_spinoff(
    corpus: &Corpus,
    artifacts: &ScoreArtifacts,
    costs: &CostTable,
    params: &SpinoffParams<'_>,
) -> Result<SpinoffArtifacts> {
    let plan = build_sizing_plan(corpus, params.template, params.overrides, costs)?;
    let selection =
        select_spinoff_faculty(&plan, params.parents, &artifacts.scores, params.spinoff_name);

    let taxonomy = corpus.taxonomy();
    let rank_mix = rank_mix_report(&selection, &artifacts.scores, taxonomy);
    let contributions =
        contribution_report(&selection, &artifacts.scores, params.parents, taxonomy);
    let mut comparison_universities: Vec<String> = params.parents.to_vec();
    for extra in params.comparisons {
        if !comparison_universities.contains(extra) {
            comparison_universities.push(extra.clone());
        }
    }
    let performance =
        performance_report(&selection, &artifacts.scores, &comparison_universities, taxonomy);

    let distribution = spinoff_distribution(
        &artifacts.scores,
        &selection,
        costs,
        params.parent_mode,
        params.mean_mode,
    );

    Ok(SpinoffArtifacts { plan, selection, rank_mix, contributions, performance, distribution })
}

/// National overall-productivity distribution with the spin-off present.
pub fn spinoff_distribution(
    scores: &ScoreTable,
    selection: &SelectionResult,
    costs: &CostTable,
    parent_mode: ParentMode,
    mean_mode: MeanMode,
) -> Vec<RankingRow> {
    let selected: BTreeSet<&ResearcherId> =
        selection.members().map(|m| &m.researcher).collect();
    let spinoff = selection.spinoff_name.as_str();

    let entries: Vec<ScoreEntry> = match parent_mode {
        ParentMode::Rescored => scores
            .entries()
            .map(|e| {
                if selected.contains(&e.researcher) {
                    ScoreEntry { university: spinoff.to_owned(), ..e.clone() }
                } else {
                    e.clone()
                }
            })
            .collect(),
        ParentMode::Frozen => scores
            .entries()
            .cloned()
            .chain(scores.entries().filter(|e| selected.contains(&e.researcher)).map(|e| {
                ScoreEntry { university: spinoff.to_owned(), ..e.clone() }
            }))
            .collect(),
    };

    let rows = sds_productivities(entries.iter(), costs);
    let means = national_sds_means(&rows, mean_mode);
    let universities: BTreeSet<&str> = rows.iter().map(|r| r.university.as_str()).collect();
    let mut values = BTreeMap::new();
    for university in universities {
        if let Some(p) = university_productivity(university, &rows, &means) {
            values.insert(university.to_owned(), p.value);
        }
    }
    rank_universities(&values)
}
