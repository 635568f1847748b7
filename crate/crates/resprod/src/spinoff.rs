//! Budding a spin-off university: size it from a template institution,
//! select the best-performing faculty per field from the parent
//! universities, and describe the resulting composition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aggregate::CostTable;
use crate::corpus::{Corpus, RankLevel, ResearcherId, SdsCode, Taxonomy, UdaCode};
use crate::error::{Error, Result};
use crate::score::{ScoreEntry, ScoreTable};

/// Whether a rescale ratio compares faculty headcounts or summed cost
/// equivalents between template and source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RescaleBasis {
    #[default]
    Headcount,
    Cost,
}

/// Replace the template's targets in one UDA with another university's
/// counts, rescaled.
///
/// When `ratio` is absent it defaults to the template/source size ratio
/// over all non-overridden UDAs, on the chosen basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleRule {
    pub uda: UdaCode,
    pub source: String,
    pub ratio: Option<f64>,
    #[serde(default)]
    pub basis: RescaleBasis,
}

/// A rescale rule with its ratio resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedRescale {
    pub uda: UdaCode,
    pub source: String,
    pub ratio: f64,
    pub basis: RescaleBasis,
}

/// Target faculty counts per SDS for the spin-off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingPlan {
    pub template: String,
    pub targets: BTreeMap<SdsCode, usize>,
    pub rescales: Vec<AppliedRescale>,
}

impl SizingPlan {
    pub fn total(&self) -> usize {
        self.targets.values().sum()
    }
}

/// Largest-remainder apportionment of `counts` scaled by `ratio`.
///
/// The rounded scaled total is preserved exactly; leftover seats go to
/// the largest fractional remainders, ties broken toward the larger
/// source count and then by SDS code order.
fn largest_remainder(counts: &[(SdsCode, usize)], ratio: f64) -> Vec<(SdsCode, usize)> {
    let exact_total: f64 = counts.iter().map(|(_, c)| *c as f64 * ratio).sum();
    let total = exact_total.round() as usize;
    let mut floors: Vec<(SdsCode, usize, f64, usize)> = counts
        .iter()
        .map(|(sds, c)| {
            let exact = *c as f64 * ratio;
            (sds.clone(), exact.floor() as usize, exact - exact.floor(), *c)
        })
        .collect();
    let assigned: usize = floors.iter().map(|(_, f, _, _)| *f).sum();
    let mut leftover = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..floors.len()).collect();
    order.sort_by(|&a, &b| {
        floors[b]
            .2
            .partial_cmp(&floors[a].2)
            .expect("finite remainders")
            .then(floors[b].3.cmp(&floors[a].3))
            .then(floors[a].0.cmp(&floors[b].0))
    });
    for idx in order {
        if leftover == 0 {
            break;
        }
        floors[idx].1 += 1;
        leftover -= 1;
    }
    floors.into_iter().map(|(sds, n, _, _)| (sds, n)).collect()
}

fn university_size_in(
    corpus: &Corpus,
    university: &str,
    basis: RescaleBasis,
    costs: &CostTable,
    mut uda_filter: impl FnMut(&UdaCode) -> bool,
) -> f64 {
    corpus
        .researchers_of(university)
        .filter(|r| corpus.taxonomy().uda_of(&r.sds).map(&mut uda_filter).unwrap_or(false))
        .map(|r| match basis {
            RescaleBasis::Headcount => 1.0,
            RescaleBasis::Cost => costs.equivalent(r.rank),
        })
        .sum()
}

/// Build the target counts: the template university's faculty
/// distribution per SDS, with overridden UDAs replaced by a rescaled
/// copy of the source university's distribution there.
pub fn build_sizing_plan(
    corpus: &Corpus,
    template: &str,
    overrides: &[RescaleRule],
    costs: &CostTable,
) -> Result<SizingPlan> {
    if !corpus.has_university(template) {
        return Err(Error::UnknownUniversity(template.to_owned()));
    }
    let overridden: std::collections::BTreeSet<UdaCode> =
        overrides.iter().map(|r| r.uda.clone()).collect();
    let taxonomy = corpus.taxonomy();

    let mut targets: BTreeMap<SdsCode, usize> = BTreeMap::new();
    for r in corpus.researchers_of(template) {
        if taxonomy.uda_of(&r.sds).map(|u| !overridden.contains(u)).unwrap_or(true) {
            *targets.entry(r.sds.clone()).or_default() += 1;
        }
    }

    let mut rescales = Vec::new();
    for rule in overrides {
        if !corpus.has_university(&rule.source) {
            return Err(Error::UnknownUniversity(rule.source.clone()));
        }
        let mut source_counts: BTreeMap<SdsCode, usize> = BTreeMap::new();
        for r in corpus.researchers_of(&rule.source) {
            if taxonomy.uda_of(&r.sds) == Some(&rule.uda) {
                *source_counts.entry(r.sds.clone()).or_default() += 1;
            }
        }
        if source_counts.is_empty() {
            return Err(Error::EmptyRescaleSource {
                uda: rule.uda.to_string(),
                source_university: rule.source.clone(),
            });
        }
        let ratio = match rule.ratio {
            Some(r) => r,
            None => {
                let template_size = university_size_in(corpus, template, rule.basis, costs, |u| {
                    !overridden.contains(u)
                });
                let source_size = university_size_in(corpus, &rule.source, rule.basis, costs, |u| {
                    !overridden.contains(u)
                });
                if source_size == 0.0 {
                    return Err(Error::UndefinedRescaleRatio {
                        uda: rule.uda.to_string(),
                        reason: format!(
                            "source {} has no faculty outside the overridden areas",
                            rule.source
                        ),
                    });
                }
                template_size / source_size
            }
        };
        let counts: Vec<(SdsCode, usize)> = source_counts.into_iter().collect();
        for (sds, n) in largest_remainder(&counts, ratio) {
            if n > 0 {
                targets.insert(sds, n);
            }
        }
        rescales.push(AppliedRescale {
            uda: rule.uda.clone(),
            source: rule.source.clone(),
            ratio,
            basis: rule.basis,
        });
    }

    if targets.is_empty() {
        return Err(Error::EmptyPlan);
    }
    Ok(SizingPlan { template: template.to_owned(), targets, rescales })
}

/// One selected faculty member with provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedMember {
    pub researcher: ResearcherId,
    pub parent: String,
    pub p_r: f64,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdsSelection {
    pub target: usize,
    /// Sorted best first.
    pub selected: Vec<SelectedMember>,
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub spinoff_name: String,
    pub per_sds: BTreeMap<SdsCode, SdsSelection>,
}

impl SelectionResult {
    pub fn members(&self) -> impl Iterator<Item = &SelectedMember> {
        self.per_sds.values().flat_map(|s| s.selected.iter())
    }

    pub fn total_selected(&self) -> usize {
        self.per_sds.values().map(|s| s.selected.len()).sum()
    }

    pub fn total_shortfall(&self) -> usize {
        self.per_sds.values().map(|s| s.shortfall).sum()
    }
}

/// Pick, per SDS, the top scorers among the parents' faculty, pooled
/// across academic ranks. Ties break on researcher id so runs are
/// reproducible. Targets that exceed the candidate pool leave a recorded
/// shortfall instead of back-filling from other fields.
pub fn select_spinoff_faculty(
    plan: &SizingPlan,
    parents: &[String],
    scores: &ScoreTable,
    spinoff_name: &str,
) -> SelectionResult {
    let mut pools: BTreeMap<&SdsCode, Vec<&ScoreEntry>> = BTreeMap::new();
    for entry in scores.entries() {
        if parents.iter().any(|p| *p == entry.university) {
            if let Some(pool) = plan.targets.get_key_value(&entry.sds) {
                pools.entry(pool.0).or_default().push(entry);
            }
        }
    }

    let mut per_sds = BTreeMap::new();
    for (sds, &target) in &plan.targets {
        let mut pool = pools.remove(sds).unwrap_or_default();
        pool.sort_by(|a, b| {
            b.p_r
                .partial_cmp(&a.p_r)
                .expect("finite scores")
                .then_with(|| a.researcher.cmp(&b.researcher))
        });
        let selected: Vec<SelectedMember> = pool
            .into_iter()
            .take(target)
            .map(|e| SelectedMember {
                researcher: e.researcher.clone(),
                parent: e.university.clone(),
                p_r: e.p_r,
                percentile: e.percentile,
            })
            .collect();
        let shortfall = target - selected.len();
        per_sds.insert(sds.clone(), SdsSelection { target, selected, shortfall });
    }
    SelectionResult { spinoff_name: spinoff_name.to_owned(), per_sds }
}

/// Faculty counts per rank level with derived shares.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RankMix {
    pub counts: BTreeMap<RankLevel, usize>,
    pub total: usize,
}

impl RankMix {
    fn add(&mut self, level: RankLevel) {
        *self.counts.entry(level).or_default() += 1;
        self.total += 1;
    }

    pub fn count(&self, level: RankLevel) -> usize {
        self.counts.get(&level).copied().unwrap_or(0)
    }

    pub fn share(&self, level: RankLevel) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(level) as f64 / self.total as f64
        }
    }
}

/// Spin-off faculty composition per academic rank, overall and per UDA,
/// against the national distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankMixReport {
    pub per_uda: BTreeMap<UdaCode, RankMix>,
    pub overall: RankMix,
    pub national: RankMix,
}

impl RankMixReport {
    /// Spin-off share minus national share, in percentage points.
    pub fn delta_points(&self, level: RankLevel) -> f64 {
        (self.overall.share(level) - self.national.share(level)) * 100.0
    }
}

pub fn rank_mix_report(
    selection: &SelectionResult,
    scores: &ScoreTable,
    taxonomy: &Taxonomy,
) -> RankMixReport {
    let mut per_uda: BTreeMap<UdaCode, RankMix> = BTreeMap::new();
    let mut overall = RankMix::default();
    for (sds, sel) in &selection.per_sds {
        let uda = taxonomy.uda_of(sds).cloned().unwrap_or_else(|| UdaCode::from("?"));
        for member in &sel.selected {
            let level = scores
                .get(&member.researcher)
                .map(|e| e.rank.level)
                .expect("selected researcher is scored");
            per_uda.entry(uda.clone()).or_default().add(level);
            overall.add(level);
        }
    }
    let mut national = RankMix::default();
    for entry in scores.entries() {
        national.add(entry.rank.level);
    }
    RankMixReport { per_uda, overall, national }
}

/// One parent's contribution to the spin-off in one UDA.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParentContribution {
    pub parent: String,
    pub selected: usize,
    /// Share of the spin-off's faculty in the UDA coming from this parent.
    pub share: f64,
    /// The parent's faculty headcount in the UDA (its candidate pool).
    pub pool: usize,
    /// Selected share divided by the parent's share of the pooled
    /// faculty; above one means the parent contributes more than its
    /// size would suggest. Zero when it contributes nobody.
    pub concentration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdaContribution {
    pub uda: UdaCode,
    pub total_selected: usize,
    pub parents: Vec<ParentContribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionReport {
    pub per_uda: Vec<UdaContribution>,
    pub overall: UdaContribution,
}

fn contribution_row(
    uda: UdaCode,
    selected_by_parent: &BTreeMap<&str, usize>,
    pool_by_parent: &BTreeMap<&str, usize>,
    parents: &[String],
) -> UdaContribution {
    let total_selected: usize = selected_by_parent.values().sum();
    let total_pool: usize = pool_by_parent.values().sum();
    let rows = parents
        .iter()
        .map(|parent| {
            let selected = selected_by_parent.get(parent.as_str()).copied().unwrap_or(0);
            let pool = pool_by_parent.get(parent.as_str()).copied().unwrap_or(0);
            let share = if total_selected == 0 {
                0.0
            } else {
                selected as f64 / total_selected as f64
            };
            let pool_share =
                if total_pool == 0 { 0.0 } else { pool as f64 / total_pool as f64 };
            let concentration =
                if selected == 0 || pool_share == 0.0 { 0.0 } else { share / pool_share };
            ParentContribution { parent: parent.clone(), selected, share, pool, concentration }
        })
        .collect();
    UdaContribution { uda, total_selected, parents: rows }
}

/// Per-UDA parent shares and concentration indices. UDAs contributing no
/// selected faculty are excluded.
pub fn contribution_report(
    selection: &SelectionResult,
    scores: &ScoreTable,
    parents: &[String],
    taxonomy: &Taxonomy,
) -> ContributionReport {
    let mut selected: BTreeMap<UdaCode, BTreeMap<&str, usize>> = BTreeMap::new();
    for (sds, sel) in &selection.per_sds {
        let uda = taxonomy.uda_of(sds).cloned().unwrap_or_else(|| UdaCode::from("?"));
        for member in &sel.selected {
            *selected.entry(uda.clone()).or_default().entry(member.parent.as_str()).or_default() +=
                1;
        }
    }

    let mut pools: BTreeMap<UdaCode, BTreeMap<&str, usize>> = BTreeMap::new();
    for entry in scores.entries() {
        if let Some(parent) = parents.iter().find(|p| **p == entry.university) {
            if let Some(uda) = taxonomy.uda_of(&entry.sds) {
                *pools.entry(uda.clone()).or_default().entry(parent.as_str()).or_default() += 1;
            }
        }
    }

    let empty = BTreeMap::new();
    let per_uda: Vec<UdaContribution> = selected
        .iter()
        .filter(|(_, by_parent)| by_parent.values().sum::<usize>() > 0)
        .map(|(uda, by_parent)| {
            contribution_row(uda.clone(), by_parent, pools.get(uda).unwrap_or(&empty), parents)
        })
        .collect();

    let mut all_selected: BTreeMap<&str, usize> = BTreeMap::new();
    let mut all_pools: BTreeMap<&str, usize> = BTreeMap::new();
    for by_parent in selected.values() {
        for (p, n) in by_parent {
            *all_selected.entry(p).or_default() += n;
        }
    }
    for by_parent in pools.values() {
        for (p, n) in by_parent {
            *all_pools.entry(p).or_default() += n;
        }
    }
    let overall = contribution_row(UdaCode::from("total"), &all_selected, &all_pools, parents);
    ContributionReport { per_uda, overall }
}

/// Percentile classes reported in the performance tables.
pub const PERCENTILE_CLASSES: [PercentileClass; 7] = [
    PercentileClass::ExactlyTop,
    PercentileClass::AtLeast(99),
    PercentileClass::AtLeast(98),
    PercentileClass::AtLeast(95),
    PercentileClass::AtLeast(90),
    PercentileClass::AtLeast(80),
    PercentileClass::AtLeast(50),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PercentileClass {
    ExactlyTop,
    AtLeast(u8),
}

impl PercentileClass {
    pub fn label(&self) -> String {
        match self {
            PercentileClass::ExactlyTop => "=100".to_owned(),
            PercentileClass::AtLeast(t) => format!(">={t}"),
        }
    }

    fn matches(&self, percentile: f64) -> bool {
        match self {
            PercentileClass::ExactlyTop => percentile == 100.0,
            PercentileClass::AtLeast(t) => percentile >= f64::from(*t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassShare {
    pub class: PercentileClass,
    pub count: usize,
    pub total: usize,
    pub share: f64,
}

fn class_shares(percentiles: &[f64]) -> Vec<ClassShare> {
    let total = percentiles.len();
    PERCENTILE_CLASSES
        .iter()
        .map(|class| {
            let count = percentiles.iter().filter(|&&p| class.matches(p)).count();
            let share = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            ClassShare { class: *class, count, total, share }
        })
        .collect()
}

/// Mean percentile and top-quintile/decile shares for one faculty group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceRow {
    pub label: String,
    pub n: usize,
    pub mean_percentile: f64,
    pub share_ge_80: f64,
    pub share_ge_90: f64,
}

fn performance_row(label: impl Into<String>, percentiles: &[f64]) -> PerformanceRow {
    let n = percentiles.len();
    let mean = if n == 0 { 0.0 } else { percentiles.iter().sum::<f64>() / n as f64 };
    let share = |cut: f64| {
        if n == 0 {
            0.0
        } else {
            percentiles.iter().filter(|&&p| p >= cut).count() as f64 / n as f64
        }
    };
    PerformanceRow {
        label: label.into(),
        n,
        mean_percentile: mean,
        share_ge_80: share(80.0),
        share_ge_90: share(90.0),
    }
}

/// Individual-performance summary of the spin-off faculty per UDA and
/// overall, with full-roster rows for the parents and any comparison
/// universities, plus percentile-class shares for each group.
///
/// All percentiles are the national ones carried by the score table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub per_uda: Vec<PerformanceRow>,
    pub overall: PerformanceRow,
    pub comparisons: Vec<PerformanceRow>,
    pub classes: Vec<(String, Vec<ClassShare>)>,
}

pub fn performance_report(
    selection: &SelectionResult,
    scores: &ScoreTable,
    comparisons: &[String],
    taxonomy: &Taxonomy,
) -> PerformanceReport {
    let mut by_uda: BTreeMap<UdaCode, Vec<f64>> = BTreeMap::new();
    let mut all = Vec::new();
    for (sds, sel) in &selection.per_sds {
        let uda = taxonomy.uda_of(sds).cloned().unwrap_or_else(|| UdaCode::from("?"));
        for member in &sel.selected {
            by_uda.entry(uda.clone()).or_default().push(member.percentile);
            all.push(member.percentile);
        }
    }

    let per_uda = by_uda
        .iter()
        .map(|(uda, percentiles)| performance_row(uda.to_string(), percentiles))
        .collect();
    let overall = performance_row(format!("total {}", selection.spinoff_name), &all);

    let mut comparison_rows = Vec::new();
    let mut classes = vec![(selection.spinoff_name.clone(), class_shares(&all))];
    for university in comparisons {
        let percentiles: Vec<f64> = scores
            .entries()
            .filter(|e| e.university == *university)
            .map(|e| e.percentile)
            .collect();
        comparison_rows.push(performance_row(format!("total {university}"), &percentiles));
        classes.push((university.clone(), class_shares(&percentiles)));
    }

    PerformanceReport { per_uda, overall, comparisons: comparison_rows, classes }
}
