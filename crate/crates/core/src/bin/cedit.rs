use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use contrastive_edits::corpus::{load_dataset, pos_statistics, Tagger};
use contrastive_edits::interventions::{edit_dataset, write_edits_jsonl, InterventionCode, InterventionSpec, SingleChoice};
use contrastive_edits::lexicon::{ColorTable, Lexicon, Pos};
use contrastive_edits::report::{self, read_rows, AceReport, ExperimentConfig, Format, Inputs, Thresholds};

#[derive(Parser)]
#[command(name = "cedit", version, about = "Contrastive POS-targeted query edits and ACE retrieval evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit edited queries as JSON lines.
    Edit(EditArgs),
    /// Run a full experiment from a TOML config.
    Run(RunArgs),
    /// Render a results store as Markdown or CSV.
    Render(RenderArgs),
    /// Per-POS token statistics of a dataset.
    Stats(StatsArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// WordNet database directory or JSON-lines lexicon.
    #[arg(long)]
    lexicon: PathBuf,
    /// Use the `tokens` field of each record instead of the built-in tagger.
    #[arg(long)]
    pretagged: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Choice {
    First,
    Seeded,
}

#[derive(Args)]
struct EditArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    colors: PathBuf,
    /// Intervention code, e.g. NOUN-HE or ADJ-SG-A.
    #[arg(long)]
    code: InterventionCode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Token choice for single-token codes.
    #[arg(long, value_enum, default_value = "first")]
    single_choice: Choice,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the substitution map with its matching audit as JSON.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scale: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Markdown,
    Csv,
}

#[derive(Args)]
struct RenderArgs {
    /// results.jsonl written by `run`.
    #[arg(long)]
    results: PathBuf,
    #[arg(long, value_enum, default_value = "markdown")]
    format: RenderFormat,
    #[arg(long, default_value_t = 4.0)]
    high: f64,
    #[arg(long, default_value_t = 1.0)]
    low: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    json: bool,
}

type Res = Result<(), Box<dyn std::error::Error>>;

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn edit(a: EditArgs) -> Res {
    let lexicon = Lexicon::load(&a.data.lexicon)?;
    let colors = ColorTable::load_csv(&a.colors)?;
    let (dataset, _) = load_dataset(&a.data.dataset, a.data.pretagged, &Tagger::new(&lexicon))?;
    let choice = match a.single_choice {
        Choice::First => SingleChoice::First,
        Choice::Seeded => SingleChoice::Seeded,
    };
    let spec = InterventionSpec::new(a.code, a.seed).with_single_choice(choice);
    let batch = edit_dataset(&dataset, &spec, &lexicon, &colors)?;
    let mut out = output(a.out.as_deref())?;
    write_edits_jsonl(&mut out, &batch.edits)?;
    out.flush()?;
    if let Some(path) = a.audit {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &batch.map)?;
    }
    log::info!("{} queries, {} words perturbed", batch.edits.len(), batch.total_n);
    Ok(())
}

fn run(a: RunArgs) -> Res {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(t) = a.threads {
        cfg.threads = t;
    }
    if let Some(d) = a.output_dir {
        cfg.output_dir = d;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(s) = a.scale {
        cfg.scale = s;
    }
    cfg.validate()?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global()?;
    }
    let inputs = Inputs::load(&cfg)?;
    let rep = report::run(&cfg, &inputs)?;
    report::write_reports(&rep, &cfg.output_dir)?;
    print!("{}", rep.render(Format::Markdown)?);
    Ok(())
}

fn render(a: RenderArgs) -> Res {
    let rep = AceReport {
        thresholds: Thresholds { high: a.high, low: a.low },
        rows: read_rows(&a.results)?,
    };
    let format = match a.format {
        RenderFormat::Markdown => Format::Markdown,
        RenderFormat::Csv => Format::Csv,
    };
    let mut out = output(a.out.as_deref())?;
    out.write_all(rep.render(format)?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn stats(a: StatsArgs) -> Res {
    let lexicon = Lexicon::load(&a.data.lexicon)?;
    let (dataset, _) = load_dataset(&a.data.dataset, a.data.pretagged, &Tagger::new(&lexicon))?;
    let s = pos_statistics(&dataset);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&s)?);
        return Ok(());
    }
    println!("queries: {}", s.queries);
    println!("{:<5} {:>8} {:>8}  histogram (tokens per query: queries)", "pos", "total", "mean");
    for pos in Pos::ALL {
        let hist: Vec<String> = s.histograms[&pos].iter().map(|(c, n)| format!("{c}:{n}")).collect();
        println!("{:<5} {:>8} {:>8.3}  {}", pos.as_str(), s.totals[&pos], s.means[&pos], hist.join(" "));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Edit(a) => edit(a),
        Command::Run(a) => run(a),
        Command::Render(a) => render(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
