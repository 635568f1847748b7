use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use resprod::aggregate::{self, CostTable, MeanMode};
use resprod::corpus::{load_corpus, write_corpus, CorpusPaths};
use resprod::pipeline::{self, ParentMode, SpinoffParams};
use resprod::report::{self, ReportFormat};
use resprod::spinoff::{RescaleBasis, RescaleRule};
use resprod::synth::{self, SynthConfig};
use resprod::{Corpus, UdaCode};

#[derive(Parser)]
#[command(
    name = "resprod",
    about = "Field-normalized research productivity scoring, rankings and spin-off simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a corpus: medians, individual scores and all rankings.
    Score(ScoreArgs),
    /// Size and select a spin-off university, then report on it.
    Spinoff(SpinoffArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Re-emit rankings from previously exported scores.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Directory holding researchers.csv, publications.csv, taxonomy.csv.
    #[arg(long, value_name = "DIR")]
    input_dir: Option<PathBuf>,

    /// Researchers file (.csv or .jsonl); overrides --input-dir.
    #[arg(long, value_name = "FILE")]
    researchers: Option<PathBuf>,

    /// Publications file (.csv or .jsonl); overrides --input-dir.
    #[arg(long, value_name = "FILE")]
    publications: Option<PathBuf>,

    /// Taxonomy file (.csv or .jsonl); overrides --input-dir.
    #[arg(long, value_name = "FILE")]
    taxonomy: Option<PathBuf>,

    /// First year of the observation window.
    #[arg(long, default_value_t = 2004)]
    first_year: i32,

    /// Last year of the observation window.
    #[arg(long, default_value_t = 2008)]
    last_year: i32,
}

impl CorpusArgs {
    fn paths(&self) -> Result<CorpusPaths, String> {
        let mut paths = match &self.input_dir {
            Some(dir) => CorpusPaths::in_dir(dir),
            None => {
                if self.researchers.is_none()
                    || self.publications.is_none()
                    || self.taxonomy.is_none()
                {
                    return Err(
                        "provide --input-dir or all of --researchers/--publications/--taxonomy"
                            .into(),
                    );
                }
                CorpusPaths::in_dir(".")
            }
        };
        if let Some(p) = &self.researchers {
            paths.researchers = p.clone();
        }
        if let Some(p) = &self.publications {
            paths.publications = p.clone();
        }
        if let Some(p) = &self.taxonomy {
            paths.taxonomy = p.clone();
        }
        Ok(paths)
    }

    fn window(&self) -> (i32, i32) {
        (self.first_year, self.last_year)
    }
}

#[derive(Args, Clone)]
struct ScoringArgs {
    /// Salary table (rank_level, confirmed, yearly_cost_keur); embedded
    /// defaults are used when absent.
    #[arg(long, value_name = "FILE")]
    salaries: Option<PathBuf>,

    /// Directory holding a separate reference corpus for the medians.
    #[arg(long, value_name = "DIR")]
    reference: Option<PathBuf>,

    /// How the national per-SDS mean averages universities.
    #[arg(long, value_enum, default_value_t = MeanModeArg::Unweighted)]
    mean_mode: MeanModeArg,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MeanModeArg {
    Unweighted,
    CostWeighted,
}

impl From<MeanModeArg> for MeanMode {
    fn from(arg: MeanModeArg) -> Self {
        match arg {
            MeanModeArg::Unweighted => MeanMode::Unweighted,
            MeanModeArg::CostWeighted => MeanMode::CostWeighted,
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    #[command(flatten)]
    scoring: ScoringArgs,

    /// Output directory.
    #[arg(long, short, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct SpinoffArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    #[command(flatten)]
    scoring: ScoringArgs,

    /// University whose size and field distribution the plan copies.
    #[arg(long)]
    template: String,

    /// Parent universities supplying candidates (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    parents: Vec<String>,

    /// Name of the simulated spin-off in rankings and reports.
    #[arg(long, default_value = "Spin-off")]
    name: String,

    /// Rescale override "UDA:SOURCE[:RATIO]"; repeatable. Replaces the
    /// template's targets in UDA with SOURCE's rescaled distribution.
    #[arg(long = "rescale", value_name = "RULE")]
    rescales: Vec<String>,

    /// Size basis for default rescale ratios.
    #[arg(long, value_enum, default_value_t = BasisArg::Headcount)]
    rescale_basis: BasisArg,

    /// Extra universities to include in the performance comparison.
    #[arg(long, value_delimiter = ',')]
    compare: Vec<String>,

    /// Whether parents keep their pre-selection rosters in the final
    /// distribution or are re-scored after the departures.
    #[arg(long, value_enum, default_value_t = ParentModeArg::Rescored)]
    parent_mode: ParentModeArg,

    /// Report formats for the table reports (csv, markdown, json).
    #[arg(long, value_delimiter = ',', default_values_t = vec!["csv".to_string(), "markdown".to_string()])]
    formats: Vec<String>,

    /// Output directory.
    #[arg(long, short, value_name = "DIR")]
    out: PathBuf,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BasisArg {
    Headcount,
    Cost,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ParentModeArg {
    Rescored,
    Frozen,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML config; embedded defaults are used when absent.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Clear per-university ability shifts (the non-competitive,
    /// uniformly dispersed scenario).
    #[arg(long)]
    uniform: bool,

    /// Output directory for the corpus files.
    #[arg(long, short, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Previously exported scores.csv to re-import.
    #[arg(long, value_name = "FILE")]
    scores: PathBuf,

    #[command(flatten)]
    scoring: ScoringArgs,

    /// Output directory.
    #[arg(long, short, value_name = "DIR")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Spinoff(args) => cmd_spinoff(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Pipeline(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Usage(String),
    Pipeline(resprod::Error),
}

impl From<resprod::Error> for CliError {
    fn from(e: resprod::Error) -> Self {
        CliError::Pipeline(e)
    }
}

impl From<String> for CliError {
    fn from(message: String) -> Self {
        CliError::Usage(message)
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Pipeline(resprod::Error::io(dir, e)))
}

fn load_inputs(args: &CorpusArgs) -> Result<Corpus, CliError> {
    let paths = args.paths()?;
    let (corpus, report) = load_corpus(&paths, args.window())?;
    if report.dropped_outside_window > 0 {
        eprintln!(
            "note: dropped {} publication(s) outside {}..={}",
            report.dropped_outside_window, args.first_year, args.last_year
        );
    }
    Ok(corpus)
}

fn cost_table(args: &ScoringArgs) -> Result<CostTable, CliError> {
    match &args.salaries {
        Some(path) => {
            let salaries = aggregate::load_salaries(path)?;
            Ok(aggregate::cost_equivalents(&salaries)?)
        }
        None => Ok(CostTable::default()),
    }
}

fn reference_corpus(args: &ScoringArgs, window: (i32, i32)) -> Result<Option<Corpus>, CliError> {
    match &args.reference {
        Some(dir) => {
            let (corpus, _) = load_corpus(&CorpusPaths::in_dir(dir), window)?;
            Ok(Some(corpus))
        }
        None => Ok(None),
    }
}

fn run_score_stage(
    corpus: &Corpus,
    scoring: &ScoringArgs,
    window: (i32, i32),
) -> Result<(pipeline::ScoreArtifacts, CostTable), CliError> {
    let costs = cost_table(scoring)?;
    let reference = reference_corpus(scoring, window)?;
    let artifacts = pipeline::run_score(corpus, reference.as_ref(), &costs, scoring.mean_mode.into());
    Ok((artifacts, costs))
}

fn write_score_outputs(
    artifacts: &pipeline::ScoreArtifacts,
    out: &Path,
) -> Result<(), CliError> {
    report::write_medians_csv(&artifacts.medians, &out.join("medians.csv"))?;
    report::write_scores_csv(&artifacts.scores, &out.join("scores.csv"))?;
    report::write_sds_ranking_csv(&artifacts.sds_rankings, &out.join("sds_ranking.csv"))?;
    report::write_uda_ranking_csv(&artifacts.uda_rankings, &out.join("uda_ranking.csv"))?;
    report::write_university_ranking_csv(
        &artifacts.university_ranking,
        &out.join("university_ranking.csv"),
    )?;
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<(), CliError> {
    let corpus = load_inputs(&args.corpus)?;
    let (artifacts, _) = run_score_stage(&corpus, &args.scoring, args.corpus.window())?;
    ensure_out_dir(&args.out)?;
    write_score_outputs(&artifacts, &args.out)?;
    for (sds, level) in artifacts.scores.degenerate_cells() {
        eprintln!("note: degenerate cell ({sds}, {level}): single researcher ranks 100");
    }
    println!("scored {} researchers into {}", artifacts.scores.len(), args.out.display());
    Ok(())
}

fn parse_rescales(
    raw: &[String],
    basis: BasisArg,
) -> Result<Vec<RescaleRule>, CliError> {
    let basis = match basis {
        BasisArg::Headcount => RescaleBasis::Headcount,
        BasisArg::Cost => RescaleBasis::Cost,
    };
    raw.iter()
        .map(|rule| {
            let mut parts = rule.splitn(3, ':');
            let uda = parts
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| format!("rescale rule '{rule}' is missing the UDA"))?;
            let source = parts
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| format!("rescale rule '{rule}' is missing the source"))?;
            let ratio = parts
                .next()
                .map(|r| {
                    f64::from_str(r)
                        .map_err(|_| format!("rescale rule '{rule}' has a bad ratio '{r}'"))
                })
                .transpose()?;
            Ok(RescaleRule { uda: UdaCode::from(uda), source: source.to_owned(), ratio, basis })
        })
        .collect::<Result<Vec<_>, String>>()
        .map_err(CliError::Usage)
}

fn parse_formats(raw: &[String]) -> Result<Vec<ReportFormat>, CliError> {
    raw.iter()
        .map(|f| f.parse::<ReportFormat>())
        .collect::<Result<Vec<_>, String>>()
        .map_err(CliError::Usage)
}

fn cmd_spinoff(args: SpinoffArgs) -> Result<(), CliError> {
    let corpus = load_inputs(&args.corpus)?;
    for parent in &args.parents {
        if !corpus.has_university(parent) {
            return Err(resprod::Error::UnknownUniversity(parent.clone()).into());
        }
    }
    let overrides = parse_rescales(&args.rescales, args.rescale_basis)?;
    let formats = parse_formats(&args.formats)?;
    let (artifacts, costs) = run_score_stage(&corpus, &args.scoring, args.corpus.window())?;

    let params = SpinoffParams {
        template: &args.template,
        parents: &args.parents,
        overrides: &overrides,
        spinoff_name: &args.name,
        comparisons: &args.compare,
        parent_mode: match args.parent_mode {
            ParentModeArg::Rescored => ParentMode::Rescored,
            ParentModeArg::Frozen => ParentMode::Frozen,
        },
        mean_mode: args.scoring.mean_mode.into(),
    };
    let spin = pipeline::run_spinoff(&corpus, &artifacts, &costs, &params)?;

    ensure_out_dir(&args.out)?;
    write_score_outputs(&artifacts, &args.out)?;
    report::write_plan_csv(&spin.plan, &args.out.join("plan.csv"))?;
    report::write_selection_csv(&spin.selection, &args.out.join("selection.csv"))?;
    report::write_distribution_csv(&spin.distribution, &args.out.join("distribution.csv"))?;
    report::write_report_files(&args.out, "rank_mix", &formats, |f| {
        report::render_rank_mix(&spin.rank_mix, f)
    })?;
    report::write_report_files(&args.out, "contributions", &formats, |f| {
        report::render_contributions(&spin.contributions, f)
    })?;
    report::write_report_files(&args.out, "performance", &formats, |f| {
        report::render_performance(&spin.performance, f)
    })?;
    report::write_report_files(&args.out, "percentile_classes", &formats, |f| {
        report::render_classes(&spin.performance, f)
    })?;

    let shortfall = spin.selection.total_shortfall();
    if shortfall > 0 {
        eprintln!("note: {shortfall} target slot(s) had no candidates");
    }
    println!(
        "selected {} of {} planned faculty into {}",
        spin.selection.total_selected(),
        spin.plan.total(),
        args.out.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => SynthConfig::from_toml_path(path)?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let corpus = if args.uniform {
        synth::uniform_dispersion_scenario(&config)?
    } else {
        synth::generate(&config)?
    };
    ensure_out_dir(&args.out)?;
    write_corpus(&corpus, &args.out)?;
    println!(
        "generated {} researchers, {} publications into {}",
        corpus.researchers().len(),
        corpus.publications().len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let corpus = load_inputs(&args.corpus)?;
    let costs = cost_table(&args.scoring)?;
    let scores = report::read_scores_csv(&args.scores)?;
    let rows = aggregate::all_sds_productivities(&scores, &costs);
    let means = aggregate::national_sds_means(&rows, args.scoring.mean_mode.into());
    let (sds_rankings, uda_rankings, university_ranking) =
        pipeline::rankings_from_rows(&corpus, &rows, &means);

    ensure_out_dir(&args.out)?;
    report::write_sds_ranking_csv(&sds_rankings, &args.out.join("sds_ranking.csv"))?;
    report::write_uda_ranking_csv(&uda_rankings, &args.out.join("uda_ranking.csv"))?;
    report::write_university_ranking_csv(
        &university_ranking,
        &args.out.join("university_ranking.csv"),
    )?;
    println!("re-emitted rankings for {} universities into {}", university_ranking.len(), args.out.display());
    Ok(())
}
