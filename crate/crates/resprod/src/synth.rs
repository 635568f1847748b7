//! Seeded synthetic corpora with controllable skew, for exercising the
//! whole pipeline without proprietary bibliographic data.
//!
//! Output is a function of the seed alone: each university draws from its
//! own ChaCha substream, so generation stays reproducible even if the
//! per-university work is ever parallelized.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    AcademicRank, Corpus, Publication, PublicationId, RankLevel, Researcher, ResearcherId,
    SdsCode, SubjectCategory, Taxonomy, UdaCode,
};
use crate::error::{Error, Result};

/// Probability of each (level, confirmed) rank combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankMixProbs {
    pub full_confirmed: f64,
    pub full_probationary: f64,
    pub associate_confirmed: f64,
    pub associate_probationary: f64,
    pub assistant_confirmed: f64,
    pub assistant_probationary: f64,
}

impl Default for RankMixProbs {
    fn default() -> Self {
        // Roughly even thirds per level, two thirds confirmed.
        Self {
            full_confirmed: 0.224,
            full_probationary: 0.112,
            associate_confirmed: 0.224,
            associate_probationary: 0.111,
            assistant_confirmed: 0.219,
            assistant_probationary: 0.110,
        }
    }
}

impl RankMixProbs {
    fn as_pairs(&self) -> [(AcademicRank, f64); 6] {
        [
            (AcademicRank::new(RankLevel::Full, true), self.full_confirmed),
            (AcademicRank::new(RankLevel::Full, false), self.full_probationary),
            (AcademicRank::new(RankLevel::Associate, true), self.associate_confirmed),
            (AcademicRank::new(RankLevel::Associate, false), self.associate_probationary),
            (AcademicRank::new(RankLevel::Assistant, true), self.assistant_confirmed),
            (AcademicRank::new(RankLevel::Assistant, false), self.assistant_probationary),
        ]
    }

    fn sum(&self) -> f64 {
        self.as_pairs().iter().map(|(_, p)| p).sum()
    }

    fn sample(&self, rng: &mut impl Rng) -> AcademicRank {
        let draw: f64 = rng.random::<f64>() * self.sum();
        let mut acc = 0.0;
        let pairs = self.as_pairs();
        for (rank, p) in pairs {
            acc += p;
            if draw < acc {
                return rank;
            }
        }
        pairs[5].0
    }
}

/// Generator parameters. The defaults are calibrated so that a
/// ~10k-researcher corpus realizes a non-producer share near 0.168 and
/// has its top 23% of researchers produce about 77% of total output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_universities: usize,
    pub n_udas: usize,
    pub sds_per_uda: usize,
    /// Inclusive faculty headcount range drawn per (university, SDS).
    pub faculty_per_sds: (usize, usize),
    /// Optional per-university size multiplier (empty = all 1.0).
    pub university_scale: Vec<f64>,
    /// Optional per-university shift of log-ability (empty = all 0.0);
    /// non-zero values model a concentrated, competitive system.
    pub university_ability_shift: Vec<f64>,
    pub rank_mix: RankMixProbs,
    /// Share of researchers who publish nothing in the window.
    pub nonproducer_share: f64,
    /// Log-normal sigma of the latent per-researcher ability factor.
    pub ability_sigma: f64,
    /// Mean extra publications per producer (publications = 1 + Poisson
    /// of this rate times ability).
    pub pub_rate: f64,
    /// Location of the log-normal citation draw.
    pub citation_location: f64,
    /// Sigma of the log-normal citation draw (the heavy tail).
    pub citation_sigma: f64,
    /// How strongly ability shifts the citation location (in log space).
    pub citation_ability_weight: f64,
    /// Mean number of co-authors beyond the first.
    pub coauthor_rate: f64,
    /// Probability that a publication also names a second corpus
    /// researcher from the same (university, SDS) cell.
    pub resident_coauthor_prob: f64,
    /// Probability that a publication carries a second subject category.
    pub extra_category_prob: f64,
    pub window: (i32, i32),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_universities: 10,
            n_udas: 5,
            sds_per_uda: 8,
            faculty_per_sds: (20, 30),
            university_scale: Vec::new(),
            university_ability_shift: Vec::new(),
            rank_mix: RankMixProbs::default(),
            nonproducer_share: 0.168,
            ability_sigma: 0.55,
            pub_rate: 2.8,
            citation_location: 0.33,
            citation_sigma: 1.3,
            citation_ability_weight: 1.0,
            coauthor_rate: 3.0,
            resident_coauthor_prob: 0.15,
            extra_category_prob: 0.2,
            window: (2004, 2008),
        }
    }
}

impl SynthConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SynthConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: SynthConfig = toml::from_str(&text).map_err(|e| Error::ConfigParse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InfeasibleConfig(msg));
        if self.n_universities == 0 {
            return fail("n_universities must be at least 1".into());
        }
        if self.n_udas == 0 || self.sds_per_uda == 0 {
            return fail("taxonomy must contain at least one UDA and SDS".into());
        }
        if self.faculty_per_sds.0 > self.faculty_per_sds.1 {
            return fail(format!(
                "faculty_per_sds range {:?} is inverted",
                self.faculty_per_sds
            ));
        }
        if self.faculty_per_sds.1 == 0 {
            return fail("faculty_per_sds upper bound must be positive".into());
        }
        for (name, v) in [
            ("nonproducer_share", self.nonproducer_share),
            ("resident_coauthor_prob", self.resident_coauthor_prob),
            ("extra_category_prob", self.extra_category_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        for (name, v) in [
            ("ability_sigma", self.ability_sigma),
            ("pub_rate", self.pub_rate),
            ("citation_sigma", self.citation_sigma),
            ("coauthor_rate", self.coauthor_rate),
        ] {
            if !v.is_finite() || v < 0.0 {
                return fail(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        let mix_sum = self.rank_mix.sum();
        if (mix_sum - 1.0).abs() > 1e-6 || self.rank_mix.as_pairs().iter().any(|(_, p)| *p < 0.0)
        {
            return fail(format!("rank_mix probabilities must sum to 1, got {mix_sum}"));
        }
        if !self.university_scale.is_empty()
            && self.university_scale.len() != self.n_universities
        {
            return fail("university_scale length must match n_universities".into());
        }
        if self.university_scale.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return fail("university_scale entries must be finite and non-negative".into());
        }
        if !self.university_ability_shift.is_empty()
            && self.university_ability_shift.len() != self.n_universities
        {
            return fail("university_ability_shift length must match n_universities".into());
        }
        if self.window.0 > self.window.1 {
            return fail(format!("window {:?} is empty", self.window));
        }
        Ok(())
    }

    fn scale_of(&self, university: usize) -> f64 {
        self.university_scale.get(university).copied().unwrap_or(1.0)
    }

    fn shift_of(&self, university: usize) -> f64 {
        self.university_ability_shift.get(university).copied().unwrap_or(0.0)
    }

    pub fn university_name(&self, index: usize) -> String {
        format!("U{:02}", index + 1)
    }
}

fn poisson(rng: &mut impl Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let sample: f64 = Poisson::new(lambda).expect("positive rate").sample(rng);
    sample as u64
}

fn home_category(sds: &SdsCode) -> SubjectCategory {
    SubjectCategory::new(format!("C-{sds}"))
}

/// Generate a corpus from the config. Identical configs produce
/// identical corpora, byte for byte once written out.
pub fn generate(config: &SynthConfig) -> Result<Corpus> {
    config.validate()?;

    let mut taxonomy = Taxonomy::new();
    let mut sds_of_uda: Vec<Vec<SdsCode>> = Vec::with_capacity(config.n_udas);
    for uda_idx in 0..config.n_udas {
        let uda = UdaCode::new(format!("UDA{:02}", uda_idx + 1));
        let mut codes = Vec::with_capacity(config.sds_per_uda);
        for k in 0..config.sds_per_uda {
            let sds = SdsCode::new(format!("S{:03}", uda_idx * config.sds_per_uda + k + 1));
            taxonomy.insert(sds.clone(), uda.clone(), format!("Area {:02}", uda_idx + 1));
            codes.push(sds);
        }
        sds_of_uda.push(codes);
    }

    let (first_year, last_year) = config.window;
    let n_years = (last_year - first_year + 1) as u32;
    let mut researchers = Vec::new();
    let mut publications = Vec::new();

    for u in 0..config.n_universities {
        let university = config.university_name(u);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u as u64 + 1);
        let scale = config.scale_of(u);
        let shift = config.shift_of(u);

        for sds_codes in &sds_of_uda {
            for (sds_idx, sds) in sds_codes.iter().enumerate() {
                let lo = config.faculty_per_sds.0;
                let hi = config.faculty_per_sds.1;
                let base = rng.random_range(lo..=hi);
                let headcount = (base as f64 * scale).round() as usize;
                let cell_base = researchers.len();
                for k in 0..headcount {
                    let id = ResearcherId::new(format!("{university}-{sds}-{:03}", k + 1));
                    researchers.push(Researcher {
                        id,
                        university: university.clone(),
                        sds: sds.clone(),
                        rank: config.rank_mix.sample(&mut rng),
                    });
                }
                // Non-producers publish nothing at all, so resident
                // co-authors may only be drawn from fellow producers.
                let producers: Vec<usize> = (0..headcount)
                    .filter(|_| rng.random::<f64>() >= config.nonproducer_share)
                    .collect();
                for (p_idx, &k) in producers.iter().enumerate() {
                    let id = researchers[cell_base + k].id.clone();
                    let ability_z: f64 = Normal::new(shift, config.ability_sigma)
                        .expect("valid sigma")
                        .sample(&mut rng);
                    let ability = ability_z.exp();
                    let n_pubs = 1 + poisson(&mut rng, config.pub_rate * ability) as usize;
                    for j in 0..n_pubs {
                        let year = first_year + rng.random_range(0..n_years) as i32;
                        let mut categories = vec![home_category(sds)];
                        if sds_codes.len() > 1 && rng.random::<f64>() < config.extra_category_prob
                        {
                            let mut other = rng.random_range(0..sds_codes.len() - 1);
                            if other >= sds_idx {
                                other += 1;
                            }
                            categories.push(home_category(&sds_codes[other]));
                        }
                        let log_citations = Normal::new(
                            config.citation_location
                                + config.citation_ability_weight * ability.ln(),
                            config.citation_sigma,
                        )
                        .expect("valid sigma")
                        .sample(&mut rng);
                        let citations = log_citations.exp().min(1.0e6).floor() as u32;
                        let mut n_authors = 1 + poisson(&mut rng, config.coauthor_rate) as u32;
                        let mut author_ids = vec![id.clone()];
                        if producers.len() > 1
                            && rng.random::<f64>() < config.resident_coauthor_prob
                        {
                            let mut other = rng.random_range(0..producers.len() - 1);
                            if other >= p_idx {
                                other += 1;
                            }
                            author_ids
                                .push(researchers[cell_base + producers[other]].id.clone());
                            n_authors = n_authors.max(2);
                        }
                        publications.push(Publication {
                            id: PublicationId::new(format!("{id}-p{:03}", j + 1)),
                            year,
                            subject_categories: categories,
                            citations,
                            n_authors,
                            author_researcher_ids: author_ids,
                        });
                    }
                }
            }
        }
    }

    if researchers.is_empty() {
        return Err(Error::InfeasibleConfig("configuration generates no researchers".into()));
    }
    Corpus::new(researchers, publications, taxonomy, config.window)
}

/// Generate the non-competitive scenario: every university draws its
/// performance from the same family, so top performers spread evenly
/// across institutions. Any configured per-university ability shifts are
/// cleared; size differences are kept.
pub fn uniform_dispersion_scenario(config: &SynthConfig) -> Result<Corpus> {
    let mut cfg = config.clone();
    cfg.university_ability_shift = Vec::new();
    generate(&cfg)
}
