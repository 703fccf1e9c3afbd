//! `rellink`: ingest a KB, link questions to relations, score predictions.

mod eval;
mod link;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rellink_core::kb::{load_kb, KbStore, Profile, ProfileConfig};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "rellink", version, about = "KB-validated relation linking for questions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a KB and print its size.
    Ingest(KbArgs),
    /// Link each question to KB relations (JSON Lines in, JSON Lines out).
    Link(link::LinkArgs),
    /// Score predictions against gold relations.
    Eval(eval::EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Dbpedia,
    Wikidata,
}

#[derive(Args, Clone)]
pub struct KbArgs {
    /// N-Triples file.
    #[arg(long)]
    kb: PathBuf,
    /// Ontology TSV (subclass / count / label records).
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// Overrides the profile named in --config.
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    /// TOML configuration: profile, prefixes, generator endpoint.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl KbArgs {
    pub fn config(&self) -> Result<ProfileConfig> {
        let mut config = match &self.config {
            Some(path) => ProfileConfig::read(path)?,
            None => ProfileConfig::default(),
        };
        if let Some(profile) = self.profile {
            config.profile = Some(
                match profile {
                    ProfileArg::Dbpedia => "dbpedia",
                    ProfileArg::Wikidata => "wikidata",
                }
                .to_string(),
            );
        }
        Ok(config)
    }

    pub fn load(&self) -> Result<KbStore> {
        let profile = Profile::from_config(&self.config()?)?;
        let triples = open(&self.kb)?;
        let store = match &self.ontology {
            Some(path) => load_kb(triples, Some(open(path)?), profile),
            None => load_kb(triples, None::<BufReader<File>>, profile),
        };
        store.with_context(|| format!("loading {}", self.kb.display()))
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn ingest(args: &KbArgs) -> Result<()> {
    let store = args.load()?;
    let missing = store.triples().filter(|t| !store.contains(t)).count();
    anyhow::ensure!(missing == 0, "{missing} triples not retrievable from the index");
    println!("triples\t{}", store.len());
    println!("predicates\t{}", store.predicates().count());
    println!("lexicon\t{}", store.lexicon_len());
    println!("classes\t{}", store.classes().len());
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Link(args) => link::run(args),
        Command::Eval(args) => eval::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
