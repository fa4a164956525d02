mod config;

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use seqbert::corpus::{
    conllu_string, load_raw_corpus, parse_conllu, parse_tagged, read_bio, read_conllu, read_tagged, split_corpus,
    split_manifest, tagged_string, AnnotatedSentence, DocumentSet, SplitSpec, SplitUnit,
};
use seqbert::eval::{las_uas, pos_accuracy, span_f1, EvalReport};
use seqbert::model::{
    finetune, labeled_sentences, load_checkpoint, predict_many, pretrain, save_checkpoint, FinetuneOptions, LabelSet,
    LabeledSentence, MetricRow, PretrainOptions, TaskKind,
};
use seqbert::stats::{paired_ttest, stratified_shuffle_test, Metric, PairedSample};
use seqbert::tokenizer::{encode_sentence, pre_tokenize, train_vocab, Vocab};
use seqbert::treecodec::{decode_labels, encode_tree, BracketLabel, DepTree, RepairReport};

use config::RunConfig;

/// Error in how the program was invoked or configured (exit status 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(
    name = "seqbert",
    version,
    about = "Train and evaluate small monolingual BERT models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a WordPiece vocabulary or segment text with one.
    #[command(subcommand)]
    Tokenizer(TokenizerCommand),
    /// Split a raw corpus into train and dev files.
    CorpusSplit(CorpusSplitArgs),
    /// Pre-train an encoder with the masked-LM objective.
    Pretrain(PretrainArgs),
    /// Fine-tune a pre-trained encoder on a token-labeling task.
    Finetune(FinetuneArgs),
    /// Label new text with a fine-tuned model.
    Predict(PredictArgs),
    /// Score predictions against gold annotation.
    Eval(EvalArgs),
    /// Test whether two systems differ significantly.
    Compare(CompareArgs),
    /// Convert between dependency trees and bracket labels.
    #[command(subcommand)]
    Treecode(TreecodeCommand),
}

#[derive(Subcommand)]
enum TokenizerCommand {
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 30_000)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        min_frequency: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read text from standard input and print word pieces, one line per input line.
    Encode {
        #[arg(long)]
        vocab: PathBuf,
        /// Print piece ids instead of pieces.
        #[arg(long)]
        ids: bool,
    },
}

#[derive(Args)]
struct CorpusSplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    train_fraction: f64,
    #[arg(long, value_enum, default_value_t = Unit::Document)]
    unit: Unit,
    /// Directory receiving train.txt, dev.txt and split.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Document,
    File,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `optimizer.learning_rate=5e-5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PretrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Continue from a checkpoint written by an earlier run of the same configuration.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Stop after this global step (the run can be resumed later).
    #[arg(long)]
    stop_after: Option<u64>,
}

#[derive(Args)]
struct FinetuneArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    task: TaskKind,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Conllu,
    Tagged,
    Text,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    task: TaskKind,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Also write the per-sentence scores as CSV.
    #[arg(long)]
    per_sentence: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Test {
    Shuffle,
    Ttest,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_enum)]
    test: Test,
    #[arg(long)]
    metric: Metric,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Annotation layer compared by the accuracy metric on CoNLL-U files.
    #[arg(long, default_value = "upos")]
    task: TaskKind,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum TreecodeCommand {
    /// CoNLL-U on standard input to `word<TAB>label` lines on standard output.
    Encode {
        /// Drop non-projective trees instead of failing.
        #[arg(long)]
        skip_nonprojective: bool,
    },
    /// `word<TAB>label` lines on standard input to CoNLL-U on standard output.
    Decode,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_status(&e))
        }
    }
}

/// The error chain joined by ": ", skipping causes already quoted by the
/// message above them.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn exit_status(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(seqbert::Error::Config(_) | seqbert::Error::Policy(_) | seqbert::Error::InvalidArgument(_)) =
            cause.downcast_ref::<seqbert::Error>()
        {
            return 2;
        }
    }
    1
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Tokenizer(c) => tokenizer(c),
        Command::CorpusSplit(a) => corpus_split(a),
        Command::Pretrain(a) => cmd_pretrain(a),
        Command::Finetune(a) => cmd_finetune(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Treecode(c) => treecode(c),
    }
}

fn read_stdin() -> Result<String> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .context("cannot read standard input")?;
    Ok(s)
}

fn write_file(path: &Path, content: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

fn tokenizer(c: TokenizerCommand) -> Result<()> {
    match c {
        TokenizerCommand::Train {
            corpus,
            size,
            min_frequency,
            out,
        } => {
            let docs = load_raw_corpus(&corpus)?;
            let vocab = train_vocab(&docs, size, min_frequency)?;
            vocab.save(&out)?;
            eprintln!("wrote {} pieces to {}", vocab.len(), out.display());
        }
        TokenizerCommand::Encode { vocab, ids } => {
            let vocab = Vocab::load(&vocab)?;
            let text = read_stdin()?;
            let mut out = String::new();
            for line in text.lines() {
                let words = pre_tokenize(line);
                let seq = encode_sentence(&vocab, &words, false);
                let items: Vec<String> = if ids {
                    seq.ids.iter().map(u32::to_string).collect()
                } else {
                    seq.ids
                        .iter()
                        .map(|&i| vocab.piece(i).unwrap_or("[UNK]").to_string())
                        .collect()
                };
                out.push_str(&items.join(" "));
                out.push('\n');
            }
            std::io::stdout().write_all(out.as_bytes())?;
        }
    }
    Ok(())
}

fn documents_text(docs: &DocumentSet) -> String {
    docs.iter().map(|d| d.text.as_str()).collect::<Vec<_>>().join("\n\n") + "\n"
}

fn corpus_split(a: CorpusSplitArgs) -> Result<()> {
    let spec = SplitSpec {
        train_fraction: a.train_fraction,
        unit: match a.unit {
            Unit::Document => SplitUnit::Document,
            Unit::File => SplitUnit::File,
        },
    };
    let docs = load_raw_corpus(&a.corpus)?;
    let (train, dev) = split_corpus(&docs, &spec)?;
    create_dir(&a.out)?;
    write_file(&a.out.join("train.txt"), documents_text(&train))?;
    write_file(&a.out.join("dev.txt"), documents_text(&dev))?;
    write_file(&a.out.join("split.tsv"), split_manifest(&spec, &train, &dev))?;
    eprintln!("{} train and {} dev documents", train.len(), dev.len());
    Ok(())
}

fn resolve(args: &ConfigArgs) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = Some(o.clone());
    }
    let out = cfg
        .out_dir
        .clone()
        .ok_or_else(|| UsageError("no output directory: pass --out or set out_dir".into()))?;
    Ok((cfg, out))
}

fn cmd_pretrain(a: PretrainArgs) -> Result<()> {
    let (mut cfg, out) = resolve(&a.config)?;
    let train_path = cfg
        .corpus
        .train
        .clone()
        .ok_or_else(|| UsageError("corpus.train is not set".into()))?;
    let docs = load_raw_corpus(&train_path)?;
    let spec = cfg.corpus.split_spec();
    let (train, dev) = match &cfg.corpus.dev {
        Some(d) => (docs, load_raw_corpus(d)?),
        None => split_corpus(&docs, &spec)?,
    };
    let vocab = match &cfg.tokenizer.vocab {
        Some(p) => Vocab::load(p)?,
        None => train_vocab(&train, cfg.tokenizer.size, cfg.tokenizer.min_frequency)?,
    };
    if cfg.model.vocab_size == 0 {
        cfg.model.vocab_size = vocab.len();
    }
    create_dir(&out)?;
    write_file(&out.join("config.toml"), cfg.to_toml())?;
    vocab.save(out.join("vocab.txt"))?;
    if cfg.corpus.dev.is_none() {
        write_file(&out.join("split.tsv"), split_manifest(&spec, &train, &dev))?;
    }
    let resume = match &a.resume {
        Some(p) => Some(load_checkpoint(p, Some(&vocab))?),
        None => None,
    };
    let start = resume.as_ref().map_or(0, |c| c.state.step);
    let options = PretrainOptions {
        phases: cfg.pretrain.phases.clone(),
        eval_interval: cfg.pretrain.eval_interval,
        checkpoint_interval: cfg.pretrain.checkpoint_interval,
        checkpoint_dir: Some(out.join("checkpoints")),
        break_at_documents: cfg.pretrain.break_at_documents,
        max_dev_rows: cfg.pretrain.max_dev_rows,
        seed: cfg.seed,
        stop_after: a.stop_after,
    };
    create_dir(&out.join("checkpoints"))?;
    let outcome = pretrain(
        &train,
        &dev,
        &vocab,
        &cfg.model,
        &cfg.optimizer,
        &cfg.masking,
        &options,
        resume,
    )?;
    let metrics_path = out.join("metrics.csv");
    if start > 0 && metrics_path.exists() {
        let mut f = std::fs::OpenOptions::new()
            .append(true)
            .open(&metrics_path)
            .with_context(|| format!("cannot append to {}", metrics_path.display()))?;
        for r in &outcome.metrics {
            writeln!(f, "{}", r.csv_line())?;
        }
    } else {
        write_file(&metrics_path, MetricRow::csv(&outcome.metrics))?;
    }
    save_checkpoint(&outcome.checkpoint, out.join("model.ckpt"))?;
    if let Some(last) = outcome.metrics.last() {
        eprintln!(
            "step {}: dev loss {:.4}, dev perplexity {:.2}",
            last.step, last.dev_loss, last.dev_perplexity
        );
    }
    Ok(())
}

fn is_conllu(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "conllu")
}

/// Annotated sentences of a task file: BIO for NER, CoNLL-U otherwise.
fn read_task_file(path: &Path, kind: TaskKind) -> Result<Vec<AnnotatedSentence>> {
    let sentences = match kind {
        TaskKind::Ner => read_bio(path)?,
        _ => read_conllu(path)?,
    };
    Ok(sentences)
}

fn task_data(path: &Path, kind: TaskKind) -> Result<Vec<LabeledSentence>> {
    let data = labeled_sentences(&read_task_file(path, kind)?, kind).with_context(|| path.display().to_string())?;
    if data.skipped_nonprojective > 0 {
        eprintln!(
            "{}: skipped {} non-projective trees",
            path.display(),
            data.skipped_nonprojective
        );
    }
    Ok(data.sentences)
}

fn cmd_finetune(a: FinetuneArgs) -> Result<()> {
    let (cfg, out) = resolve(&a.config)?;
    let vocab = Vocab::load(&a.vocab)?;
    let pretrained = load_checkpoint(&a.checkpoint, Some(&vocab))?;
    let train = task_data(&a.train, a.task)?;
    let dev = task_data(&a.dev, a.task)?;
    let labels = LabelSet::from_sequences(a.task, train.iter().chain(&dev).map(|s| s.labels.as_slice()))?;
    let options = FinetuneOptions {
        epochs: cfg.finetune.epochs,
        batch_size: cfg.finetune.batch_size,
        patience: cfg.finetune.patience,
        seed: cfg.seed,
    };
    let outcome = finetune(&pretrained, &vocab, &train, &dev, &labels, &cfg.optimizer, &options)?;
    create_dir(&out)?;
    write_file(&out.join("config.toml"), cfg.to_toml())?;
    let mut history = String::from("epoch,step,lr,train_loss,dev_accuracy\n");
    for r in &outcome.history {
        history.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch, r.step, r.lr, r.train_loss, r.dev_accuracy
        ));
    }
    write_file(&out.join("history.csv"), history)?;
    save_checkpoint(&outcome.checkpoint, out.join("model.ckpt"))?;
    eprintln!(
        "{} labels; best dev accuracy at epoch {} of {}",
        labels.len(),
        outcome.best_epoch,
        outcome.history.len()
    );
    Ok(())
}

fn decode_tree(labels: &[String], sentence: usize) -> Result<(DepTree, RepairReport)> {
    let parsed = labels
        .iter()
        .map(|l| l.parse::<BracketLabel>())
        .collect::<seqbert::Result<Vec<_>>>()
        .with_context(|| format!("sentence {}", sentence + 1))?;
    Ok(decode_labels(&parsed)?)
}

fn predict(a: PredictArgs) -> Result<()> {
    let vocab = Vocab::load(&a.vocab)?;
    let ckpt = load_checkpoint(&a.checkpoint, Some(&vocab))?;
    let kind = ckpt
        .labels
        .as_ref()
        .map(|l| l.kind)
        .ok_or_else(|| UsageError(format!("{} has not been fine-tuned", a.checkpoint.display())))?;
    let format = a.format.unwrap_or(if is_conllu(&a.input) {
        Format::Conllu
    } else {
        Format::Tagged
    });
    let mut sentences: Vec<AnnotatedSentence> = match format {
        Format::Conllu => read_conllu(&a.input)?,
        Format::Tagged => read_tagged(&a.input)?,
        Format::Text => std::fs::read_to_string(&a.input)
            .with_context(|| format!("cannot read {}", a.input.display()))?
            .lines()
            .map(pre_tokenize)
            .filter(|w| !w.is_empty())
            .map(AnnotatedSentence::new)
            .collect(),
    };
    let words: Vec<Vec<String>> = sentences.iter().map(|s| s.words.clone()).collect();
    let predicted = predict_many(&ckpt, &vocab, &words)?;
    let as_conllu = kind == TaskKind::DepBracket || (format == Format::Conllu && kind != TaskKind::Ner);
    let text = if as_conllu {
        let mut repairs = 0;
        for (i, (s, labels)) in sentences.iter_mut().zip(predicted).enumerate() {
            match kind {
                TaskKind::Upos => s.upos = Some(labels),
                TaskKind::Fpos => s.fpos = Some(labels),
                TaskKind::DepBracket => {
                    let (tree, report) = decode_tree(&labels, i)?;
                    repairs += report.total();
                    s.heads = Some(tree.heads);
                    s.deprels = Some(tree.deprels);
                }
                TaskKind::Ner => unreachable!("NER output is tagged"),
            }
        }
        if repairs > 0 {
            eprintln!("decoder repaired {repairs} inconsistencies");
        }
        conllu_string(&sentences)
    } else {
        tagged_string(&words.into_iter().zip(predicted).collect::<Vec<_>>())
    };
    match &a.out {
        Some(p) => write_file(p, text),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

/// One label sequence per sentence: the task layer of a CoNLL-U file or
/// the tag column of a two-column file.
fn label_layer(path: &Path, kind: TaskKind) -> Result<Vec<Vec<String>>> {
    let sentences = if is_conllu(path) {
        read_conllu(path)?
    } else if kind == TaskKind::Ner {
        read_bio(path)?
    } else {
        read_tagged(path)?
    };
    let layer_kind = if is_conllu(path) { kind } else { TaskKind::Ner };
    let data = labeled_sentences(&sentences, layer_kind).with_context(|| path.display().to_string())?;
    Ok(data.sentences.into_iter().map(|s| s.labels).collect())
}

fn trees(path: &Path) -> Result<Vec<DepTree>> {
    read_conllu(path)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let missing = || anyhow::anyhow!("{}: sentence {} has no dependency annotation", path.display(), i + 1);
            let heads = s.heads.ok_or_else(missing)?;
            let deprels = s.deprels.ok_or_else(missing)?;
            DepTree::new(heads, deprels).with_context(|| format!("{}: sentence {}", path.display(), i + 1))
        })
        .collect()
}

fn evaluate(kind: TaskKind, gold: &Path, pred: &Path) -> Result<EvalReport> {
    let report = match kind {
        TaskKind::DepBracket => las_uas(&trees(gold)?, &trees(pred)?)?,
        TaskKind::Ner => span_f1(&label_layer(gold, kind)?, &label_layer(pred, kind)?)?,
        TaskKind::Upos | TaskKind::Fpos => pos_accuracy(&label_layer(gold, kind)?, &label_layer(pred, kind)?)?,
    };
    Ok(report)
}

fn eval(a: EvalArgs) -> Result<()> {
    let report = evaluate(a.task, &a.gold, &a.pred)?;
    if let Some(p) = &a.per_sentence {
        write_file(p, report.per_sentence_csv())?;
    }
    let text = match a.format {
        ReportFormat::Json => report.to_json() + "\n",
        ReportFormat::Table => report.to_table(),
    };
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let verdict = match a.test {
        Test::Shuffle => {
            let r = match a.metric {
                Metric::Las | Metric::Uas => stratified_shuffle_test(
                    &trees(&a.gold)?,
                    &trees(&a.a)?,
                    &trees(&a.b)?,
                    a.metric,
                    a.trials,
                    a.seed,
                )?,
                Metric::Accuracy | Metric::SpanF1 => {
                    let kind = if a.metric == Metric::SpanF1 {
                        TaskKind::Ner
                    } else {
                        a.task
                    };
                    stratified_shuffle_test(
                        &label_layer(&a.gold, kind)?,
                        &label_layer(&a.a, kind)?,
                        &label_layer(&a.b, kind)?,
                        a.metric,
                        a.trials,
                        a.seed,
                    )?
                }
            };
            json!({
                "test": "shuffle",
                "metric": r.metric,
                "diff": r.observed_diff,
                "p": r.p_value,
                "trials": r.n_trials,
                "seed": r.seed,
            })
        }
        Test::Ttest => {
            // per-sentence token accuracy, or per-sentence LAS/UAS for trees
            let (kind, labeled) = match a.metric {
                Metric::Las => (TaskKind::DepBracket, true),
                Metric::Uas => (TaskKind::DepBracket, false),
                Metric::SpanF1 => (TaskKind::Ner, false),
                Metric::Accuracy => (a.task, false),
            };
            let per = |pred: &Path| -> Result<Vec<f64>> {
                let r = evaluate(kind, &a.gold, pred)?;
                Ok(if labeled {
                    r.per_sentence_labeled
                } else {
                    r.per_sentence
                })
            };
            let t = paired_ttest(&PairedSample::new(per(&a.a)?, per(&a.b)?)?)?;
            json!({
                "test": "ttest",
                "metric": a.metric,
                "diff": t.mean_diff,
                "t": t.t,
                "df": t.df,
                "p": t.p,
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(())
}

fn treecode(c: TreecodeCommand) -> Result<()> {
    let stdin = Path::new("<stdin>");
    let text = read_stdin()?;
    let out = match c {
        TreecodeCommand::Encode { skip_nonprojective } => {
            let mut rows = Vec::new();
            for (i, s) in parse_conllu(&text, stdin)?.into_iter().enumerate() {
                let (Some(heads), Some(deprels)) = (s.heads, s.deprels) else {
                    bail!("sentence {} has no dependency annotation", i + 1);
                };
                match encode_tree(&DepTree::new(heads, deprels)?) {
                    Ok(labels) => rows.push((s.words, labels.iter().map(ToString::to_string).collect())),
                    Err(seqbert::Error::NonProjective) if skip_nonprojective => {
                        eprintln!("skipping non-projective sentence {}", i + 1)
                    }
                    Err(e) => return Err(anyhow::Error::new(e).context(format!("sentence {}", i + 1))),
                }
            }
            tagged_string(&rows)
        }
        TreecodeCommand::Decode => {
            let mut sentences = parse_tagged(&text, stdin, None)?;
            let mut repairs = 0;
            for (i, s) in sentences.iter_mut().enumerate() {
                let labels = s.ner.take().unwrap_or_default();
                let (tree, report) = decode_tree(&labels, i)?;
                repairs += report.total();
                s.heads = Some(tree.heads);
                s.deprels = Some(tree.deprels);
            }
            if repairs > 0 {
                eprintln!("decoder repaired {repairs} inconsistencies");
            }
            conllu_string(&sentences)
        }
    };
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}
