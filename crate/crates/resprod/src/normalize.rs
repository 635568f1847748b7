//! Citation normalization: cited-only medians per (year, subject category)
//! and the standardized impact of each publication.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{Corpus, Publication, PublicationId, SubjectCategory};

/// One baseline cell: the median citation count of cited-only publications
/// in a (year, category) pair, plus how many publications backed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MedianCell {
    pub median: f64,
    pub n_cited: usize,
}

/// Baseline medians keyed by (year, subject category).
///
/// Only publications with at least one citation enter a cell, so every
/// stored median is >= 1. Cells with no cited publication are absent.
#[derive(Debug, Clone, Default)]
pub struct MedianTable {
    cells: BTreeMap<(i32, SubjectCategory), MedianCell>,
}

impl MedianTable {
    pub fn get(&self, year: i32, category: &SubjectCategory) -> Option<MedianCell> {
        self.cells.get(&(year, category.clone())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i32, SubjectCategory), &MedianCell)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Median of a non-empty slice; even counts average the two middle values.
fn median_of(values: &mut [u32]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        f64::from(values[n / 2])
    } else {
        (f64::from(values[n / 2 - 1]) + f64::from(values[n / 2])) / 2.0
    }
}

/// Group every cited publication of the reference corpus by (year,
/// category) and take the median citation count per cell.
///
/// A multidisciplinary publication contributes its citation count to the
/// cell of each of its categories. Zero-cited publications never enter.
pub fn build_median_table(corpus: &Corpus) -> MedianTable {
    let mut groups: BTreeMap<(i32, SubjectCategory), Vec<u32>> = BTreeMap::new();
    for p in corpus.publications() {
        if p.citations == 0 {
            continue;
        }
        for cat in &p.subject_categories {
            groups.entry((p.year, cat.clone())).or_default().push(p.citations);
        }
    }
    let cells = groups
        .into_iter()
        .map(|(key, mut values)| {
            let cell = MedianCell { median: median_of(&mut values), n_cited: values.len() };
            (key, cell)
        })
        .collect();
    MedianTable { cells }
}

/// Standardized impact of one publication: citations divided by the cell
/// median, averaged over the publication's categories.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedScore {
    pub publication: PublicationId,
    pub value: f64,
    /// Set when the publication is cited but every category cell is
    /// absent, leaving no baseline; the value is reported as zero.
    pub undefined_baseline: bool,
}

pub fn standardize_publication(
    publication: &Publication,
    medians: &MedianTable,
) -> StandardizedScore {
    if publication.citations == 0 {
        return StandardizedScore {
            publication: publication.id.clone(),
            value: 0.0,
            undefined_baseline: false,
        };
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for cat in &publication.subject_categories {
        if let Some(cell) = medians.get(publication.year, cat) {
            sum += f64::from(publication.citations) / cell.median;
            present += 1;
        }
    }
    if present == 0 {
        return StandardizedScore {
            publication: publication.id.clone(),
            value: 0.0,
            undefined_baseline: true,
        };
    }
    StandardizedScore {
        publication: publication.id.clone(),
        value: sum / present as f64,
        undefined_baseline: false,
    }
}
