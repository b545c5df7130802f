//! Command line front end: compose, parse, AAAD evaluation, dataset build,
//! statistics, and corpus validation behind one binary.
//!
//! Results go to standard output; every diagnostic goes to standard error.
//! Exit codes: 0 success, 2 input or configuration error, 3 strict parse
//! failure, 4 degenerate AAAD bounds, 5 corpus validation failure.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aufacs::dataset::{
    AnnotationRecord, DatasetStats, FrameRecord, IngestOptions, UnknownPolicy, build, ingest_csv,
    read_records, stats, write_records,
};
use aufacs::{
    AaadError, AaadReport, ActivationVector, AuId, ConflictTable, Corpus, Decomposition,
    ParseError, ParseResult, Parser as TextParser, ProbabilityVector, aaad, aaad_with_bounds,
    bundled_corpus, compose, compose_with_overrides, load_corpus, pair_by_id,
    read_probability_vectors, validate_corpus,
};

const EXIT_INPUT: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "aufacs",
    version,
    about = "Facial action unit text toolkit",
    propagate_version = true
)]
struct Cli {
    /// Corpus file; falls back to $AUFACS_CORPUS, then the bundled corpus
    #[arg(long, global = true, env = "AUFACS_CORPUS", value_name = "PATH")]
    corpus: Option<PathBuf>,
    /// Conflict table file; defaults to the built-in antagonistic pairs
    #[arg(long, global = true, value_name = "PATH")]
    conflicts: Option<PathBuf>,
    /// Seed for paraphrase choice, reference selection, and AAAD shuffling
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output style: human-readable or one machine record per line
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Compose the description for a set of action units
    Compose(ComposeArgs),
    /// Recover constructs and activations from description text
    Parse(ParseArgs),
    /// Evaluate the AAAD metric over paired probability-vector files
    Aaad(AaadArgs),
    /// Build annotation records from AU occurrence CSV files
    Build(BuildArgs),
    /// Summarize category statistics of an annotation records file
    Stats(StatsArgs),
    /// Check the corpus invariants and report each result
    ValidateCorpus,
}

#[derive(Args)]
struct ComposeArgs {
    /// Comma-separated AU numbers, e.g. 15,17
    aus: String,
    /// Paraphrase index per construct (0-4), overriding seeded choice
    #[arg(long, value_delimiter = ',', value_name = "I")]
    paraphrase: Vec<usize>,
    /// Also print the decomposition and chosen paraphrase indices
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct ParseArgs {
    /// Text file to parse; standard input when omitted
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Strict)]
    mode: Mode,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Text must be exactly a sequence of corpus paraphrases
    Strict,
    /// Find corpus paraphrases anywhere in the text
    Lenient,
}

#[derive(Args)]
struct AaadArgs {
    /// Image-derived probability vectors of the evaluation pairs
    #[arg(long, value_name = "PATH")]
    eval_images: PathBuf,
    /// Text-derived probability vectors of the evaluation pairs
    #[arg(long, value_name = "PATH")]
    eval_texts: PathBuf,
    /// Image-derived ground-truth vectors for computed bounds
    #[arg(long, value_name = "PATH", requires = "gt_texts")]
    gt_images: Option<PathBuf>,
    /// Text-derived ground-truth vectors for computed bounds
    #[arg(long, value_name = "PATH", requires = "gt_images")]
    gt_texts: Option<PathBuf>,
    /// Supplied lower normalization bound
    #[arg(long, requires = "cmax", conflicts_with = "gt_images")]
    cmin: Option<f64>,
    /// Supplied upper normalization bound
    #[arg(long, requires = "cmin", conflicts_with = "gt_texts")]
    cmax: Option<f64>,
}

#[derive(Args)]
struct BuildArgs {
    /// AU occurrence CSV files; subject and task default to the file stem
    /// split at the first underscore
    #[arg(required = true, value_name = "CSV")]
    inputs: Vec<PathBuf>,
    /// Write annotation records here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Handling of occurrence value 9
    #[arg(long, value_enum, default_value_t = Unknown::Skip)]
    unknown: Unknown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unknown {
    /// Drop frames containing an unknown cell
    Skip,
    /// Keep such frames with the unknown AUs inactive
    Inactive,
}

#[derive(Args)]
struct StatsArgs {
    /// Annotation records file; standard input when omitted
    input: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure::new(EXIT_INPUT, message)
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("aufacs: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let corpus = resolve_corpus(cli.corpus.as_deref())?;
    match &cli.command {
        Command::Compose(args) => cmd_compose(args, &corpus, &cli),
        Command::Parse(args) => cmd_parse(args, &corpus, &cli),
        Command::Aaad(args) => cmd_aaad(args, &cli),
        Command::Build(args) => cmd_build(args, &corpus, &cli),
        Command::Stats(args) => cmd_stats(args, &cli),
        Command::ValidateCorpus => cmd_validate(&corpus),
    }
}

fn resolve_corpus(path: Option<&Path>) -> CliResult<Corpus> {
    match path {
        Some(path) => load_corpus(path)
            .map_err(|e| invalid(format!("cannot load corpus {}: {e}", path.display()))),
        None => Ok(bundled_corpus()),
    }
}

fn resolve_conflicts(path: Option<&Path>) -> CliResult<ConflictTable> {
    match path {
        Some(path) => ConflictTable::from_path(path).map_err(|e| {
            invalid(format!(
                "cannot load conflict table {}: {e}",
                path.display()
            ))
        }),
        None => Ok(ConflictTable::default()),
    }
}

fn construct_key(decomposition: &Decomposition) -> String {
    decomposition
        .constructs
        .iter()
        .map(|c| {
            c.aus()
                .iter()
                .map(|au| au.number().to_string())
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn index_key(indices: &[usize]) -> String {
    indices
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_compose(args: &ComposeArgs, corpus: &Corpus, cli: &Cli) -> CliResult<()> {
    let mut aus = Vec::new();
    for token in args.aus.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        aus.push(AuId::from_str(token).map_err(|e| invalid(e.to_string()))?);
    }
    if aus.is_empty() {
        return Err(invalid("no action units given"));
    }
    let v = ActivationVector::from_set(aus);

    let (text, decomposition) = if args.paraphrase.is_empty() {
        compose(v, corpus, cli.seed)
    } else {
        compose_with_overrides(v, corpus, &args.paraphrase)
    }
    .map_err(|e| invalid(e.to_string()))?;

    match cli.format {
        Format::Human => {
            println!("{text}");
            if args.verbose {
                for (construct, &index) in decomposition
                    .constructs
                    .iter()
                    .zip(&decomposition.paraphrase_indices)
                {
                    println!("# {construct} [paraphrase {index}]");
                }
                if let Some(seed) = decomposition.seed {
                    println!("# seed {seed}");
                }
            }
        }
        Format::Records => {
            let seed = decomposition
                .seed
                .map(|s| s.to_string())
                .unwrap_or_default();
            println!(
                "constructs={}\tparaphrases={}\tseed={seed}\ttext={text}",
                construct_key(&decomposition),
                index_key(&decomposition.paraphrase_indices),
            );
        }
    }
    Ok(())
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display()))),
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| invalid(format!("cannot read standard input: {e}")))?;
            Ok(text)
        }
    }
}

fn au_list(v: ActivationVector) -> String {
    if v.is_empty() {
        return "none".to_string();
    }
    v.iter()
        .map(|au| au.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_parse_result(result: &ParseResult, format: Format) {
    match format {
        Format::Human => {
            for m in &result.matches {
                println!("{} [paraphrase {}]", m.construct, m.paraphrase_index);
            }
            println!(
                "activation: {} ({})",
                result.activation,
                au_list(result.activation)
            );
            if let Some(residual) = &result.residual {
                println!("residual: {residual}");
            }
        }
        Format::Records => {
            let constructs = result
                .matches
                .iter()
                .map(|m| {
                    m.construct
                        .aus()
                        .iter()
                        .map(|au| au.number().to_string())
                        .collect::<Vec<_>>()
                        .join("+")
                })
                .collect::<Vec<_>>()
                .join(";");
            let paraphrases = index_key(
                &result
                    .matches
                    .iter()
                    .map(|m| m.paraphrase_index)
                    .collect::<Vec<_>>(),
            );
            println!(
                "constructs={constructs}\tparaphrases={paraphrases}\tactivation={}\tresidual={}",
                result.activation,
                result.residual.as_deref().unwrap_or_default(),
            );
        }
    }
}

fn cmd_parse(args: &ParseArgs, corpus: &Corpus, cli: &Cli) -> CliResult<()> {
    let text = read_input(args.input.as_deref())?;
    let parser = TextParser::new(corpus);
    let result = match args.mode {
        Mode::Strict => parser.parse_strict(&text),
        Mode::Lenient => parser.parse_lenient(&text),
    };
    let result = result.map_err(|e| match e {
        ParseError::UnparsableAt { .. } => Failure::new(EXIT_PARSE, e.to_string()),
        other => invalid(other.to_string()),
    })?;
    print_parse_result(&result, cli.format);
    Ok(())
}

fn read_vectors(path: &Path) -> CliResult<Vec<(String, ProbabilityVector)>> {
    let file =
        File::open(path).map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
    read_probability_vectors(BufReader::new(file))
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn aaad_failure(e: AaadError) -> Failure {
    match e {
        AaadError::DegenerateBounds(_) => Failure::new(EXIT_DEGENERATE, e.to_string()),
        other => invalid(other.to_string()),
    }
}

fn print_aaad_report(report: &AaadReport, format: Format) {
    match format {
        Format::Human => println!("{report}"),
        Format::Records => println!(
            "pairs={}\tmean_cosine={}\tc_min={}\tc_max={}\taaad={}\tbounds_warning={}",
            report.pair_cosines.len(),
            report.mean_cosine,
            report.c_min,
            report.c_max,
            report.aaad,
            report.bounds_warning,
        ),
    }
}

fn cmd_aaad(args: &AaadArgs, cli: &Cli) -> CliResult<()> {
    let eval_images = read_vectors(&args.eval_images)?;
    let eval_texts = read_vectors(&args.eval_texts)?;
    let eval_pairs = pair_by_id(eval_images, eval_texts)
        .map_err(|e| invalid(format!("evaluation pairing: {e}")))?;

    let report = match (&args.gt_images, &args.gt_texts, args.cmin, args.cmax) {
        (Some(gt_images), Some(gt_texts), None, None) => {
            let gt_pairs = pair_by_id(read_vectors(gt_images)?, read_vectors(gt_texts)?)
                .map_err(|e| invalid(format!("ground-truth pairing: {e}")))?;
            aaad(&eval_pairs, &gt_pairs, cli.seed).map_err(aaad_failure)?
        }
        (None, None, Some(cmin), Some(cmax)) => {
            aaad_with_bounds(&eval_pairs, cmin, cmax).map_err(aaad_failure)?
        }
        _ => {
            return Err(invalid(
                "provide either --gt-images with --gt-texts, or --cmin with --cmax",
            ));
        }
    };
    print_aaad_report(&report, cli.format);
    Ok(())
}

fn stem_identity(path: &Path) -> (String, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match stem.split_once('_') {
        Some((subject, task)) => (subject.to_string(), task.to_string()),
        None => (stem, String::new()),
    }
}

fn cmd_build(args: &BuildArgs, corpus: &Corpus, cli: &Cli) -> CliResult<()> {
    let conflicts = resolve_conflicts(cli.conflicts.as_deref())?;
    let policy = match args.unknown {
        Unknown::Skip => UnknownPolicy::SkipFrame,
        Unknown::Inactive => UnknownPolicy::TreatInactive,
    };

    let mut frames: Vec<FrameRecord> = Vec::new();
    let mut seen: BTreeSet<(String, String, u64)> = BTreeSet::new();
    for path in &args.inputs {
        let (default_subject, default_task) = stem_identity(path);
        let options = IngestOptions {
            policy,
            default_subject,
            default_task,
        };
        let file = File::open(path)
            .map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
        let batch = ingest_csv(BufReader::new(file), &options)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        for frame in &batch {
            let key = (frame.subject.clone(), frame.task.clone(), frame.frame);
            if !seen.insert(key) {
                return Err(invalid(format!(
                    "{}: duplicate frame {}/{}/{} across inputs",
                    path.display(),
                    frame.subject,
                    frame.task,
                    frame.frame
                )));
            }
        }
        frames.extend(batch);
    }

    let records = build(&frames, corpus, &conflicts, cli.seed)
        .map_err(|e| invalid(format!("build failed: {e}")))?;

    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| invalid(format!("cannot create {}: {e}", path.display())))?;
            let mut writer = BufWriter::new(file);
            write_records(&mut writer, &records)
                .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
            writer
                .flush()
                .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
            if cli.format == Format::Human {
                println!(
                    "wrote {} annotation records from {} frames to {}",
                    records.len(),
                    frames.len(),
                    path.display()
                );
            }
        }
        None => {
            write_records(io::stdout().lock(), &records)
                .map_err(|e| invalid(format!("cannot write records: {e}")))?;
        }
    }
    Ok(())
}

fn read_annotation_records(path: Option<&Path>) -> CliResult<Vec<AnnotationRecord>> {
    match path {
        Some(path) => {
            let file = File::open(path)
                .map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
            read_records(BufReader::new(file))
                .map_err(|e| invalid(format!("{}: {e}", path.display())))
        }
        None => {
            read_records(io::stdin().lock()).map_err(|e| invalid(format!("standard input: {e}")))
        }
    }
}

fn print_stats(s: &DatasetStats, format: Format) {
    match format {
        Format::Human => println!("{s}"),
        Format::Records => {
            let rows = [
                ("individual", &s.individual),
                ("non-conflicting", &s.non_conflicting),
                ("conflicting", &s.conflicting),
            ];
            for (name, slot) in rows {
                println!(
                    "category={name}\tentries={}\toccurrences={}\tdominant={}\tshare={}\ttotal={}",
                    slot.entries,
                    slot.occurrences,
                    slot.dominant_entries,
                    slot.entry_share,
                    s.total_records,
                );
            }
        }
    }
}

fn cmd_stats(args: &StatsArgs, cli: &Cli) -> CliResult<()> {
    let records = read_annotation_records(args.input.as_deref())?;
    print_stats(&stats(&records), cli.format);
    Ok(())
}

fn cmd_validate(corpus: &Corpus) -> CliResult<()> {
    let report = validate_corpus(corpus);
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_VALIDATION,
            format!(
                "corpus validation failed {} checks",
                report.failures().count()
            ),
        ))
    }
}
