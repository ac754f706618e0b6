//! `phlt` — mine tagged sections from USPTO grants, train classifiers,
//! highlight and explain paragraphs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use phlt::cli::{
    cmd_build_corpus, cmd_eval, cmd_explain, cmd_highlight, cmd_stats, cmd_train, AppConfig,
    CliError, OutputFormat,
};
use phlt::models::ModelKind;

#[derive(Parser)]
#[command(name = "phlt", version, about = "Patent paragraph highlighter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Mnb,
    Logreg,
    Svm,
    Nbsvm,
    Forest,
}

impl From<KindArg> for ModelKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::Mnb => ModelKind::Mnb,
            KindArg::Logreg => ModelKind::Logreg,
            KindArg::Svm => ModelKind::Svm,
            KindArg::Nbsvm => ModelKind::Nbsvm,
            KindArg::Forest => ModelKind::Forest,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Html,
}

impl From<FormatArg> for OutputFormat {
    fn from(format: FormatArg) -> Self {
        match format {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Html => OutputFormat::Html,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse ipg* bulk files into a labeled, deduplicated, balanced corpus
    BuildCorpus {
        /// Directory holding ipgYYMMDD.xml or .zip files
        input_dir: PathBuf,
        /// Corpus CSV to write
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also dump extracted segments as newline-delimited JSON
        #[arg(long)]
        dump_segments: Option<PathBuf>,
    },
    /// Descriptive statistics for a corpus file
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Write the JSON report here as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a classifier on a corpus and report held-out scores
    Train {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Model file to write
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// K-fold cross-validation
    Eval {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Build the vocabulary and idf table once on the full corpus
        /// instead of refitting per fold
        #[arg(long)]
        global_features: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Classify each paragraph of a grant XML or plain-text document
    Highlight {
        /// Grant XML or plain text (paragraphs separated by blank lines)
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Classify sentence by sentence instead of whole paragraphs
        #[arg(long)]
        sentences: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Top-k token attributions for one text
    Explain {
        text: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// Use the perturbation surrogate instead of exact linear
        /// attribution
        #[arg(long)]
        surrogate: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<AppConfig, CliError> {
    let mut config = match path {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    if let Some(seed) = seed {
        config.set_seed(seed);
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::BuildCorpus {
            input_dir,
            out,
            config,
            seed,
            dump_segments,
        } => {
            let config = load_config(config.as_ref(), seed)?;
            cmd_build_corpus(&input_dir, &config, &out, dump_segments.as_deref())
        }
        Command::Stats {
            corpus,
            config,
            format,
            out,
        } => {
            let config = load_config(config.as_ref(), None)?;
            cmd_stats(&corpus, &config, format.into(), out.as_deref())
        }
        Command::Train {
            corpus,
            kind,
            model,
            config,
            seed,
            format,
        } => {
            let config = load_config(config.as_ref(), seed)?;
            cmd_train(&corpus, kind.into(), &config, &model, format.into())
        }
        Command::Eval {
            corpus,
            kind,
            folds,
            config,
            seed,
            global_features,
            format,
        } => {
            let config = load_config(config.as_ref(), seed)?;
            cmd_eval(
                &corpus,
                kind.into(),
                folds,
                &config,
                global_features,
                format.into(),
            )
        }
        Command::Highlight {
            input,
            model,
            format,
            sentences,
            config,
        } => {
            let config = load_config(config.as_ref(), None)?;
            cmd_highlight(&model, &input, format.into(), sentences, &config)
        }
        Command::Explain {
            text,
            model,
            top_k,
            surrogate,
            format,
            config,
            seed,
        } => {
            let config = load_config(config.as_ref(), seed)?;
            cmd_explain(&model, &text, top_k, surrogate, format.into(), &config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            print!("{output}");
            if !output.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
