//! Naive reference implementations computed straight from corpus data.
//! Everything here is O(everything * everything) on purpose; no shared
//! indexes, no grouped folds.

use std::collections::BTreeMap;

use resprod::aggregate::CostTable;
use resprod::corpus::{Corpus, Publication, Researcher, SdsCode, SubjectCategory, UdaCode};

fn cited_median(corpus: &Corpus, year: i32, category: &SubjectCategory) -> Option<f64> {
    let mut cited: Vec<u32> = corpus
        .publications()
        .iter()
        .filter(|p| p.year == year && p.citations >= 1 && p.subject_categories.contains(category))
        .map(|p| p.citations)
        .collect();
    if cited.is_empty() {
        return None;
    }
    cited.sort_unstable();
    let n = cited.len();
    Some(if n % 2 == 1 {
        f64::from(cited[n / 2])
    } else {
        (f64::from(cited[n / 2 - 1]) + f64::from(cited[n / 2])) / 2.0
    })
}

fn standardized(reference: &Corpus, publication: &Publication) -> f64 {
    if publication.citations == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut present = 0;
    for category in &publication.subject_categories {
        if let Some(median) = cited_median(reference, publication.year, category) {
            sum += f64::from(publication.citations) / median;
            present += 1;
        }
    }
    if present == 0 {
        0.0
    } else {
        sum / f64::from(present)
    }
}

pub fn p_r(corpus: &Corpus, researcher: &Researcher) -> f64 {
    let mut total = 0.0;
    for publication in corpus.publications() {
        if publication.author_researcher_ids.contains(&researcher.id) {
            total += standardized(corpus, publication) / f64::from(publication.n_authors);
        }
    }
    total
}

/// Percentile of one researcher inside their (SDS, rank level) group,
/// by direct counting: mean zero-based rank of the tie group over N-1.
pub fn percentile(corpus: &Corpus, researcher: &Researcher) -> f64 {
    let own = p_r(corpus, researcher);
    let mut below = 0usize;
    let mut tied = 0usize;
    let mut n = 0usize;
    for other in corpus.researchers() {
        if other.sds != researcher.sds || other.rank.level != researcher.rank.level {
            continue;
        }
        n += 1;
        let value = p_r(corpus, other);
        if value < own {
            below += 1;
        } else if value == own {
            tied += 1;
        }
    }
    if n == 1 {
        return 100.0;
    }
    let mean_rank = below as f64 + (tied as f64 - 1.0) / 2.0;
    100.0 * mean_rank / (n as f64 - 1.0)
}

/// Field productivity by direct summation, `None` when the university
/// has nobody in the SDS.
pub fn p_s(corpus: &Corpus, university: &str, sds: &SdsCode, costs: &CostTable) -> Option<f64> {
    let mut sum = 0.0;
    let mut cost = 0.0;
    let mut staff = 0;
    for r in corpus.researchers() {
        if r.university == university && &r.sds == sds {
            sum += p_r(corpus, r);
            cost += costs.equivalent(r.rank);
            staff += 1;
        }
    }
    if staff == 0 {
        None
    } else {
        Some(sum / cost)
    }
}

fn sds_mean(corpus: &Corpus, sds: &SdsCode, costs: &CostTable) -> Option<f64> {
    let mut values = Vec::new();
    let mut universities: Vec<&str> = corpus.universities().collect();
    universities.sort_unstable();
    for university in universities {
        if let Some(value) = p_s(corpus, university, sds, costs) {
            values.push(value);
        }
    }
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn university_cost_in_sds(corpus: &Corpus, university: &str, sds: &SdsCode, costs: &CostTable) -> f64 {
    corpus
        .researchers()
        .iter()
        .filter(|r| r.university == university && &r.sds == sds)
        .map(|r| costs.equivalent(r.rank))
        .sum()
}

fn ratio_sum_over(
    corpus: &Corpus,
    university: &str,
    sds_list: &[SdsCode],
    costs: &CostTable,
) -> Option<f64> {
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for sds in sds_list {
        let Some(value) = p_s(corpus, university, sds, costs) else { continue };
        let mean = sds_mean(corpus, sds, costs).unwrap_or(0.0);
        if mean == 0.0 {
            continue; // no baseline: dropped, cost excluded
        }
        let cost = university_cost_in_sds(corpus, university, sds, costs);
        terms.push((value / mean, cost));
    }
    let total_cost: f64 = terms.iter().map(|(_, c)| c).sum();
    if terms.is_empty() || total_cost == 0.0 {
        return None;
    }
    Some(terms.iter().map(|(ratio, cost)| ratio * cost / total_cost).sum())
}

pub fn p_u(corpus: &Corpus, university: &str, uda: &UdaCode, costs: &CostTable) -> Option<f64> {
    let sds_list: Vec<SdsCode> = corpus.taxonomy().sds_in_uda(uda).cloned().collect();
    ratio_sum_over(corpus, university, &sds_list, costs)
}

pub fn university_value(corpus: &Corpus, university: &str, costs: &CostTable) -> Option<f64> {
    let sds_list: Vec<SdsCode> = corpus.taxonomy().sds_codes().cloned().collect();
    ratio_sum_over(corpus, university, &sds_list, costs)
}

/// Every active (university, sds) pair and its reference productivity.
pub fn all_p_s(corpus: &Corpus, costs: &CostTable) -> BTreeMap<(String, SdsCode), f64> {
    let mut out = BTreeMap::new();
    for r in corpus.researchers() {
        let key = (r.university.clone(), r.sds.clone());
        if !out.contains_key(&key) {
            let value = p_s(corpus, &r.university, &r.sds, costs).expect("active pair");
            out.insert(key, value);
        }
    }
    out
}
