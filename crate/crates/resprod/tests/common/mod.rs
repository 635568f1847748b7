//! Shared test support: a brute-force reference implementation of every
//! aggregate, a random corpus builder, and the selection benchmark
//! fixture. The reference code deliberately re-derives everything from
//! raw corpus data with plain loops, independent of the engine's
//! grouped/indexed computation paths.

pub mod fixture;
pub mod oracle;

use rand::prelude::*;

use resprod::corpus::{
    AcademicRank, Corpus, Publication, PublicationId, RankLevel, Researcher, ResearcherId,
    SdsCode, SubjectCategory, Taxonomy, UdaCode,
};

pub const WINDOW: (i32, i32) = (2004, 2008);

/// Small taxonomy used by random corpora: three areas of three fields.
pub fn random_taxonomy() -> Taxonomy {
    let mut taxonomy = Taxonomy::new();
    for uda_idx in 0..3 {
        for k in 0..3 {
            taxonomy.insert(
                SdsCode::new(format!("S{}", uda_idx * 3 + k + 1)),
                UdaCode::new(format!("D{}", uda_idx + 1)),
                format!("Area {}", uda_idx + 1),
            );
        }
    }
    taxonomy
}

pub const RANDOM_UNIVERSITIES: [&str; 4] = ["UA", "UB", "UC", "UD"];

/// A corpus with arbitrary shapes: multi-category and multi-resident
/// publications, zero-cited papers, researchers without output, and
/// publications whose authors are all outside the corpus.
pub fn random_corpus(rng: &mut StdRng, n_researchers: usize, n_publications: usize) -> Corpus {
    let taxonomy = random_taxonomy();
    let sds_codes: Vec<SdsCode> = taxonomy.sds_codes().cloned().collect();
    let levels = [RankLevel::Full, RankLevel::Associate, RankLevel::Assistant];

    let researchers: Vec<Researcher> = (0..n_researchers)
        .map(|i| Researcher {
            id: ResearcherId::new(format!("r{i:04}")),
            university: RANDOM_UNIVERSITIES[rng.random_range(0..RANDOM_UNIVERSITIES.len())]
                .to_owned(),
            sds: sds_codes[rng.random_range(0..sds_codes.len())].clone(),
            rank: AcademicRank::new(levels[rng.random_range(0..3)], rng.random_bool(0.5)),
        })
        .collect();

    let publications: Vec<Publication> = (0..n_publications)
        .map(|i| {
            let n_categories = rng.random_range(1..=3);
            let mut categories: Vec<SubjectCategory> = Vec::new();
            while categories.len() < n_categories {
                let cat = SubjectCategory::new(format!("C{}", rng.random_range(1..=6)));
                if !categories.contains(&cat) {
                    categories.push(cat);
                }
            }
            // Heavy right tail with a sizeable zero mass.
            let citations = (rng.random::<f64>().powi(4) * 40.0) as u32;
            let n_residents = rng.random_range(0..=3.min(n_researchers));
            let mut resident_idx: Vec<usize> = Vec::new();
            while resident_idx.len() < n_residents {
                let idx = rng.random_range(0..n_researchers);
                if !resident_idx.contains(&idx) {
                    resident_idx.push(idx);
                }
            }
            let author_researcher_ids: Vec<ResearcherId> =
                resident_idx.iter().map(|&idx| researchers[idx].id.clone()).collect();
            let n_authors = rng.random_range(1..=6).max(author_researcher_ids.len() as u32);
            Publication {
                id: PublicationId::new(format!("p{i:05}")),
                year: rng.random_range(WINDOW.0..=WINDOW.1),
                subject_categories: categories,
                citations,
                n_authors,
                author_researcher_ids,
            }
        })
        .collect();

    Corpus::new(researchers, publications, taxonomy, WINDOW)
        .expect("random corpus is structurally valid")
}

pub fn seeded_corpus(seed: u64, n_researchers: usize, n_publications: usize) -> Corpus {
    let mut rng = StdRng::seed_from_u64(seed);
    random_corpus(&mut rng, n_researchers, n_publications)
}
