//! Corpus-level dispersion diagnostics: non-producer shares and the
//! concentration of total output in the top performers.

use crate::error::{Error, Result};
use crate::score::ScoreTable;

use super::Corpus;

/// Fractions of researchers without output and without impact.
///
/// `zero_impact` counts researchers whose publications collected zero
/// citations in total, including those with no publications at all, so
/// it is always at least `no_publication`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnproductiveShares {
    pub no_publication: f64,
    pub zero_impact: f64,
}

pub fn unproductive_share(
    corpus: &Corpus,
    university: Option<&str>,
) -> Result<UnproductiveShares> {
    let mut total = 0usize;
    let mut no_publication = 0usize;
    let mut zero_impact = 0usize;
    for r in corpus.researchers() {
        if let Some(u) = university {
            if r.university != u {
                continue;
            }
        }
        total += 1;
        let mut n_pubs = 0usize;
        let mut citations = 0u64;
        for p in corpus.publications_of(&r.id) {
            n_pubs += 1;
            citations += u64::from(p.citations);
        }
        if n_pubs == 0 {
            no_publication += 1;
        }
        if citations == 0 {
            zero_impact += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyResearcherSet { filter: university.map(str::to_owned) });
    }
    Ok(UnproductiveShares {
        no_publication: no_publication as f64 / total as f64,
        zero_impact: zero_impact as f64 / total as f64,
    })
}

/// Share of total summed productivity produced by the best `top_fraction`
/// of researchers.
///
/// Evaluated on the Lorenz curve: a fractional researcher count at the
/// boundary contributes proportionally, so a uniform score distribution
/// yields exactly `top_fraction` for any population size.
pub fn top_share_output(scores: &ScoreTable, top_fraction: f64) -> Result<f64> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::InvalidTopFraction(top_fraction));
    }
    let mut values: Vec<f64> = scores.entries().map(|e| e.p_r).collect();
    if values.is_empty() {
        return Err(Error::EmptyScoreTable);
    }
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        // Nobody produced anything; every share of nothing is the full share.
        return Ok(1.0);
    }
    let cut = top_fraction * values.len() as f64;
    let whole = cut.floor() as usize;
    let frac = cut - whole as f64;
    let mut sum: f64 = values[..whole].iter().sum();
    if frac > 0.0 && whole < values.len() {
        sum += frac * values[whole];
    }
    Ok(sum / total)
}
