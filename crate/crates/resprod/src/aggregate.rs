//! Aggregation above the individual level: cost-equivalent weights, field
//! productivity, discipline productivity standardized to the national
//! mean, whole-university productivity, and national rankings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{AcademicRank, RankLevel, SdsCode, Taxonomy, UdaCode};
use crate::error::{Error, Result};
use crate::score::{midrank_percentiles, ScoreEntry, ScoreTable};

/// Default yearly average costs in k-euro per rank, used when no salary
/// file is supplied.
pub const DEFAULT_SALARIES: [(RankLevel, bool, f64); 6] = [
    (RankLevel::Full, true, 124.939),
    (RankLevel::Full, false, 94.442),
    (RankLevel::Associate, true, 90.622),
    (RankLevel::Associate, false, 68.469),
    (RankLevel::Assistant, true, 68.844),
    (RankLevel::Assistant, false, 44.899),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostEntry {
    pub yearly_cost_keur: f64,
    pub equivalent: f64,
}

/// Salary-derived weights: each rank's yearly cost as a multiple of the
/// probationary assistant's. The base rank has equivalent exactly 1.
#[derive(Debug, Clone)]
pub struct CostTable {
    entries: BTreeMap<(RankLevel, bool), CostEntry>,
}

impl CostTable {
    /// The rank every other cost is expressed against.
    pub const BASE: AcademicRank = AcademicRank { level: RankLevel::Assistant, confirmed: false };

    pub fn equivalent(&self, rank: AcademicRank) -> f64 {
        self.entries[&(rank.level, rank.confirmed)].equivalent
    }

    pub fn entry(&self, rank: AcademicRank) -> CostEntry {
        self.entries[&(rank.level, rank.confirmed)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (AcademicRank, CostEntry)> + '_ {
        self.entries
            .iter()
            .map(|(&(level, confirmed), &entry)| (AcademicRank::new(level, confirmed), entry))
    }
}

impl Default for CostTable {
    fn default() -> Self {
        let salaries = DEFAULT_SALARIES
            .iter()
            .map(|&(level, confirmed, cost)| (AcademicRank::new(level, confirmed), cost))
            .collect();
        cost_equivalents(&salaries).expect("default salary table is complete")
    }
}

/// Derive cost equivalents from yearly costs. Requires all six ranks with
/// positive costs; equivalents are recomputed, never read from input.
pub fn cost_equivalents(salaries: &BTreeMap<AcademicRank, f64>) -> Result<CostTable> {
    for rank in AcademicRank::ALL {
        match salaries.get(&rank) {
            None => return Err(Error::MissingRank(rank.token())),
            Some(&cost) if cost <= 0.0 => {
                return Err(Error::NonPositiveCost { rank: rank.token(), cost })
            }
            Some(_) => {}
        }
    }
    let base = salaries[&CostTable::BASE];
    let entries = salaries
        .iter()
        .map(|(&rank, &cost)| {
            ((rank.level, rank.confirmed), CostEntry { yearly_cost_keur: cost, equivalent: cost / base })
        })
        .collect();
    Ok(CostTable { entries })
}

#[derive(Debug, Serialize, Deserialize)]
struct SalaryRecord {
    rank_level: String,
    confirmed: bool,
    yearly_cost_keur: f64,
}

/// Read a `salaries.csv` (rank_level, confirmed, yearly_cost_keur).
pub fn load_salaries(path: &Path) -> Result<BTreeMap<AcademicRank, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| crate::corpus::csv_io_error(path, e))?;
    let mut out = BTreeMap::new();
    for record in reader.deserialize::<SalaryRecord>() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let level: RankLevel = record.rank_level.parse().map_err(|message| Error::Parse {
            path: path.to_owned(),
            line: 0,
            message,
        })?;
        out.insert(AcademicRank::new(level, record.confirmed), record.yearly_cost_keur);
    }
    Ok(out)
}

/// Cost-weighted productivity of one university's staff in one SDS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdsProductivity {
    pub university: String,
    pub sds: SdsCode,
    pub p_s: f64,
    pub total_cost: f64,
    pub n_staff: usize,
}

/// Group score entries by (university, SDS) and compute the productivity
/// of every active pair: summed individual productivity divided by summed
/// cost equivalents.
pub fn sds_productivities<'a>(
    entries: impl IntoIterator<Item = &'a ScoreEntry>,
    costs: &CostTable,
) -> Vec<SdsProductivity> {
    let mut groups: BTreeMap<(&str, &SdsCode), (f64, f64, usize)> = BTreeMap::new();
    for e in entries {
        let slot = groups.entry((e.university.as_str(), &e.sds)).or_insert((0.0, 0.0, 0));
        slot.0 += e.p_r;
        slot.1 += costs.equivalent(e.rank);
        slot.2 += 1;
    }
    groups
        .into_iter()
        .map(|((university, sds), (sum_p_r, total_cost, n_staff))| SdsProductivity {
            university: university.to_owned(),
            sds: sds.clone(),
            p_s: sum_p_r / total_cost,
            total_cost,
            n_staff,
        })
        .collect()
}

/// All active (university, SDS) productivities of a score table.
pub fn all_sds_productivities(scores: &ScoreTable, costs: &CostTable) -> Vec<SdsProductivity> {
    sds_productivities(scores.entries(), costs)
}

/// How the national per-SDS baseline averages over active universities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanMode {
    /// Plain arithmetic mean over active universities.
    #[default]
    Unweighted,
    /// Mean weighted by each university's cost mass in the SDS.
    CostWeighted,
}

/// National mean productivity per SDS over the universities active in it.
pub fn national_sds_means(
    rows: &[SdsProductivity],
    mode: MeanMode,
) -> BTreeMap<SdsCode, f64> {
    let mut acc: BTreeMap<SdsCode, (f64, f64)> = BTreeMap::new();
    for row in rows {
        let slot = acc.entry(row.sds.clone()).or_insert((0.0, 0.0));
        match mode {
            MeanMode::Unweighted => {
                slot.0 += row.p_s;
                slot.1 += 1.0;
            }
            MeanMode::CostWeighted => {
                slot.0 += row.p_s * row.total_cost;
                slot.1 += row.total_cost;
            }
        }
    }
    acc.into_iter().map(|(sds, (sum, weight))| (sds, sum / weight)).collect()
}

/// One SDS term of a discipline aggregate: the university's productivity
/// ratio to the national mean and its cost weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdaComponent {
    pub sds: SdsCode,
    pub p_s: f64,
    pub national_mean: f64,
    pub cost: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdaProductivity {
    pub university: String,
    pub uda: UdaCode,
    pub p_u: f64,
    pub components: Vec<UdaComponent>,
    /// SDSs removed from the summation because every active university
    /// scored zero there, leaving no national baseline.
    pub dropped: Vec<SdsCode>,
}

/// Whole-university productivity: the same standardized, cost-weighted
/// summation extended over every SDS the university is active in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversityProductivity {
    pub university: String,
    pub value: f64,
    pub components: Vec<UdaComponent>,
    pub dropped: Vec<SdsCode>,
}

fn weighted_ratio_sum(
    rows: &[&SdsProductivity],
    means: &BTreeMap<SdsCode, f64>,
) -> Option<(f64, Vec<UdaComponent>, Vec<SdsCode>)> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for row in rows {
        let mean = means.get(&row.sds).copied().unwrap_or(0.0);
        if mean == 0.0 {
            dropped.push(row.sds.clone());
        } else {
            kept.push((row, mean));
        }
    }
    let total_cost: f64 = kept.iter().map(|(row, _)| row.total_cost).sum();
    if kept.is_empty() || total_cost == 0.0 {
        return None;
    }
    let mut value = 0.0;
    let components = kept
        .into_iter()
        .map(|(row, mean)| {
            let weight = row.total_cost / total_cost;
            value += row.p_s / mean * weight;
            UdaComponent {
                sds: row.sds.clone(),
                p_s: row.p_s,
                national_mean: mean,
                cost: row.total_cost,
                weight,
            }
        })
        .collect();
    Some((value, components, dropped))
}

/// Discipline productivity of one university, or `None` when the
/// university is not active in the UDA (or every one of its SDSs lost
/// its baseline).
pub fn uda_productivity(
    university: &str,
    uda: &UdaCode,
    rows: &[SdsProductivity],
    means: &BTreeMap<SdsCode, f64>,
    taxonomy: &Taxonomy,
) -> Option<UdaProductivity> {
    let mine: Vec<&SdsProductivity> = rows
        .iter()
        .filter(|r| r.university == university && taxonomy.uda_of(&r.sds) == Some(uda))
        .collect();
    if mine.is_empty() {
        return None;
    }
    let (p_u, components, dropped) = weighted_ratio_sum(&mine, means)?;
    Some(UdaProductivity { university: university.to_owned(), uda: uda.clone(), p_u, components, dropped })
}

pub fn university_productivity(
    university: &str,
    rows: &[SdsProductivity],
    means: &BTreeMap<SdsCode, f64>,
) -> Option<UniversityProductivity> {
    let mine: Vec<&SdsProductivity> =
        rows.iter().filter(|r| r.university == university).collect();
    if mine.is_empty() {
        return None;
    }
    let (value, components, dropped) = weighted_ratio_sum(&mine, means)?;
    Some(UniversityProductivity { university: university.to_owned(), value, components, dropped })
}

/// Position of one university in a national ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingRow {
    pub university: String,
    pub value: f64,
    /// Competition rank: 1 is best, ties share the better rank.
    pub rank: usize,
    pub n_active: usize,
    pub percentile: f64,
}

impl RankingRow {
    /// Display form used in ranking tables, e.g. "1 out of 54".
    pub fn rank_display(&self) -> String {
        format!("{} out of {}", self.rank, self.n_active)
    }
}

/// Rank universities by value, best first. Tied values share the better
/// absolute rank (1, 1, 3) and carry mid-rank percentiles, keeping the
/// two displays each consistent with their own convention.
pub fn rank_universities(values: &BTreeMap<String, f64>) -> Vec<RankingRow> {
    let n_active = values.len();
    let mut rows: Vec<(&String, f64)> = values.iter().map(|(u, &v)| (u, v)).collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite values").then(a.0.cmp(b.0)));
    let percentiles = midrank_percentiles(&rows.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    let mut out: Vec<RankingRow> = Vec::with_capacity(n_active);
    let mut rank = 1;
    for (i, ((university, value), percentile)) in rows.into_iter().zip(percentiles).enumerate() {
        if i > 0 && value < out[i - 1].value {
            rank = i + 1;
        }
        out.push(RankingRow {
            university: university.clone(),
            value,
            rank,
            n_active,
            percentile,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ResearcherId;
    use crate::score::tests::table_from_p_rs;

    #[test]
    fn default_cost_equivalents_match_reference_ratios() {
        let table = CostTable::default();
        let expect = [
            (RankLevel::Full, true, 2.783),
            (RankLevel::Full, false, 2.103),
            (RankLevel::Associate, true, 2.018),
            (RankLevel::Associate, false, 1.525),
            (RankLevel::Assistant, true, 1.533),
            (RankLevel::Assistant, false, 1.000),
        ];
        for (level, confirmed, equivalent) in expect {
            let got = table.equivalent(AcademicRank::new(level, confirmed));
            assert!(
                (got - equivalent).abs() < 0.001,
                "{level}/{confirmed}: {got} vs {equivalent}"
            );
        }
        assert_eq!(table.equivalent(CostTable::BASE), 1.0);
    }

    #[test]
    fn missing_rank_is_rejected() {
        let mut salaries: BTreeMap<AcademicRank, f64> = DEFAULT_SALARIES
            .iter()
            .map(|&(level, confirmed, cost)| (AcademicRank::new(level, confirmed), cost))
            .collect();
        salaries.remove(&AcademicRank::new(RankLevel::Associate, false));
        assert!(matches!(cost_equivalents(&salaries), Err(Error::MissingRank(_))));
        let mut salaries: BTreeMap<AcademicRank, f64> = DEFAULT_SALARIES
            .iter()
            .map(|&(level, confirmed, cost)| (AcademicRank::new(level, confirmed), cost))
            .collect();
        salaries.insert(AcademicRank::new(RankLevel::Full, true), 0.0);
        assert!(matches!(cost_equivalents(&salaries), Err(Error::NonPositiveCost { .. })));
    }

    #[test]
    fn sds_productivity_weights_by_cost() {
        // Researchers with productivity 2.0 (full confirmed) and 1.0
        // (base rank): 3.0 / (2.783... + 1).
        let mut table = table_from_p_rs(&[2.0, 1.0]);
        let mut entries: Vec<ScoreEntry> = table.entries().cloned().collect();
        entries[0].rank = AcademicRank::new(RankLevel::Full, true);
        table = ScoreTable::from_entries(entries);
        let costs = CostTable::default();
        let rows = all_sds_productivities(&table, &costs);
        assert_eq!(rows.len(), 1);
        let full = costs.equivalent(AcademicRank::new(RankLevel::Full, true));
        let expect = 3.0 / (full + 1.0);
        assert!((rows[0].p_s - expect).abs() < 1e-12);
        assert!((rows[0].p_s - 0.7930).abs() < 5e-4);
        assert_eq!(rows[0].n_staff, 2);
    }

    #[test]
    fn single_base_rank_researcher_passes_through() {
        let table = table_from_p_rs(&[1.7]);
        let rows = all_sds_productivities(&table, &CostTable::default());
        assert!((rows[0].p_s - 1.7).abs() < 1e-12);
    }

    #[test]
    fn cloning_staff_leaves_the_ratio_unchanged() {
        let table = table_from_p_rs(&[2.0, 0.5, 0.0]);
        let costs = CostTable::default();
        let base = all_sds_productivities(&table, &costs)[0].p_s;
        let doubled: Vec<ScoreEntry> = table
            .entries()
            .cloned()
            .chain(table.entries().map(|e| ScoreEntry {
                researcher: ResearcherId::new(format!("{}-clone", e.researcher)),
                ..e.clone()
            }))
            .collect();
        let cloned = ScoreTable::from_entries(doubled);
        let p_s = all_sds_productivities(&cloned, &costs)[0].p_s;
        assert!((p_s - base).abs() < 1e-12);
    }

    fn row(university: &str, sds: &str, p_s: f64, cost: f64) -> SdsProductivity {
        SdsProductivity {
            university: university.to_owned(),
            sds: SdsCode::from(sds),
            p_s,
            total_cost: cost,
            n_staff: 1,
        }
    }

    #[test]
    fn national_means_average_active_universities() {
        let rows = vec![row("A", "S1", 0.4, 1.0), row("B", "S1", 0.8, 3.0), row("A", "S2", 0.7, 1.0)];
        let means = national_sds_means(&rows, MeanMode::Unweighted);
        assert!((means[&SdsCode::from("S1")] - 0.6).abs() < 1e-12);
        assert!((means[&SdsCode::from("S2")] - 0.7).abs() < 1e-12);
        let weighted = national_sds_means(&rows, MeanMode::CostWeighted);
        assert!((weighted[&SdsCode::from("S1")] - (0.4 + 0.8 * 3.0) / 4.0).abs() < 1e-12);
    }

    fn two_sds_taxonomy() -> Taxonomy {
        let mut t = Taxonomy::new();
        t.insert(SdsCode::from("S1"), UdaCode::from("D1"), "Area one");
        t.insert(SdsCode::from("S2"), UdaCode::from("D1"), "Area one");
        t
    }

    #[test]
    fn unit_ratios_aggregate_to_one() {
        let rows = vec![row("A", "S1", 0.5, 2.0), row("A", "S2", 0.25, 5.0)];
        let means: BTreeMap<SdsCode, f64> =
            [(SdsCode::from("S1"), 0.5), (SdsCode::from("S2"), 0.25)].into_iter().collect();
        let uda = uda_productivity("A", &UdaCode::from("D1"), &rows, &means, &two_sds_taxonomy())
            .unwrap();
        assert!((uda.p_u - 1.0).abs() < 1e-12);
        let weight_sum: f64 = uda.components.iter().map(|c| c.weight).sum();
        assert!((weight_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_costs_average_the_ratios() {
        // Ratios {2, 0} with equal cost weights: 1.0.
        let rows = vec![row("A", "S1", 1.0, 3.0), row("A", "S2", 0.0, 3.0)];
        let means: BTreeMap<SdsCode, f64> =
            [(SdsCode::from("S1"), 0.5), (SdsCode::from("S2"), 0.25)].into_iter().collect();
        let uda = uda_productivity("A", &UdaCode::from("D1"), &rows, &means, &two_sds_taxonomy())
            .unwrap();
        assert!((uda.p_u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_baseline_sds_is_dropped_with_note() {
        let rows = vec![row("A", "S1", 0.8, 1.0), row("A", "S2", 0.0, 9.0)];
        let means: BTreeMap<SdsCode, f64> =
            [(SdsCode::from("S1"), 0.4), (SdsCode::from("S2"), 0.0)].into_iter().collect();
        let uda = uda_productivity("A", &UdaCode::from("D1"), &rows, &means, &two_sds_taxonomy())
            .unwrap();
        assert_eq!(uda.dropped, vec![SdsCode::from("S2")]);
        // The dropped cost leaves the weight base entirely on S1.
        assert!((uda.p_u - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_sds_university_collapses_to_its_ratio() {
        let rows = vec![row("A", "S1", 0.9, 4.0)];
        let means: BTreeMap<SdsCode, f64> = [(SdsCode::from("S1"), 0.3)].into_iter().collect();
        let uni = university_productivity("A", &rows, &means).unwrap();
        let uda = uda_productivity("A", &UdaCode::from("D1"), &rows, &means, &two_sds_taxonomy())
            .unwrap();
        assert!((uni.value - 3.0).abs() < 1e-12);
        assert!((uni.value - uda.p_u).abs() < 1e-12);
    }

    #[test]
    fn inactive_university_yields_none() {
        let rows = vec![row("A", "S1", 0.9, 4.0)];
        let means: BTreeMap<SdsCode, f64> = [(SdsCode::from("S1"), 0.3)].into_iter().collect();
        assert!(university_productivity("B", &rows, &means).is_none());
        assert!(
            uda_productivity("A", &UdaCode::from("D9"), &rows, &means, &two_sds_taxonomy())
                .is_none()
        );
    }

    #[test]
    fn ranking_orders_best_first() {
        let values: BTreeMap<String, f64> =
            [("A".into(), 3.0), ("B".into(), 2.0), ("C".into(), 1.0)].into_iter().collect();
        let rows = rank_universities(&values);
        assert_eq!(rows.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(
            rows.iter().map(|r| r.percentile).collect::<Vec<_>>(),
            vec![100.0, 50.0, 0.0]
        );
        assert_eq!(rows[0].rank_display(), "1 out of 3");
    }

    #[test]
    fn tied_values_share_the_better_rank() {
        let values: BTreeMap<String, f64> =
            [("A".into(), 2.0), ("B".into(), 2.0), ("C".into(), 1.0)].into_iter().collect();
        let rows = rank_universities(&values);
        assert_eq!(rows.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 1, 3]);
        assert_eq!(rows[0].percentile, rows[1].percentile);
        assert_eq!(rows[0].percentile, 75.0);
    }

    #[test]
    fn rank_display_formats_with_population() {
        let mut values = BTreeMap::new();
        for i in 0..54 {
            values.insert(format!("U{i:02}"), f64::from(i));
        }
        let rows = rank_universities(&values);
        assert_eq!(rows[0].rank_display(), "1 out of 54");
    }
}
