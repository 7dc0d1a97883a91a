use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use claimcheck_core::corpus::read_dump;
use claimcheck_core::eval::{ablation_table, evaluate, gold_from_records, AblationRow, EvalReport};
use claimcheck_core::index::IndexedCorpus;
use claimcheck_core::io::{self as cio, read_claims_file, read_jsonl, write_jsonl};
use claimcheck_core::keywords::{read_annotations, ClaimAnnotations};
use claimcheck_core::nn::gradcheck::{gradient_check, random_case};
use claimcheck_core::nn::{
    self, evidence_pairs, generate_nei_pairs, read_pairs, write_pairs, EntailmentModel, ModelConfig, TrainConfig,
};
use claimcheck_core::pipeline::{verify_all, VerdictRecord};
use claimcheck_core::pos::{batch_tag, read_tag_file, write_tag_file, TaggedText};
use claimcheck_core::{Label, Model, RunConfig};

/// Claim verification against a sentence-indexed Wikipedia dump.
#[derive(Parser)]
#[command(name = "claimcheck", version)]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the sentence index from a JSONL dump.
    Index(IndexArgs),
    /// Verify claims and write one verdict line per claim.
    Predict(PredictArgs),
    /// Score verdicts against gold claims.
    Evaluate(EvaluateArgs),
    /// Train the entailment model.
    Train(TrainArgs),
    /// Compare analytic and finite-difference gradients.
    Gradcheck(GradcheckArgs),
    /// POS-tag one text per line into `word_TAG` lines.
    Tag(TagArgs),
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Output index file.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    max_sentence_chars: Option<usize>,
    /// Also replace lowercase he/she/it/they with the page title.
    #[arg(long)]
    lowercase_pronouns: bool,
}

#[derive(Args)]
struct PipelineFlags {
    #[arg(long)]
    point_threshold: Option<u32>,
    #[arg(long)]
    dampen_factor: Option<f64>,
    #[arg(long)]
    type1_limit: Option<usize>,
    #[arg(long)]
    type2_limit: Option<usize>,
    #[arg(long)]
    type3_limit: Option<usize>,
    #[arg(long)]
    max_evidence: Option<usize>,
    /// Skip point-based dampening.
    #[arg(long)]
    no_points: bool,
    /// Skip the merged-candidate REFUTES override.
    #[arg(long)]
    no_merge: bool,
    /// Run the attention model without the convolution branch.
    #[arg(long)]
    no_conv: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    claims: Option<PathBuf>,
    /// Sidecar with NER, constituency and dependency annotations per claim.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Precomputed claim tags, one line per claim.
    #[arg(long)]
    tags: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include candidate counts and distributions in each verdict line.
    #[arg(long)]
    diagnostics: bool,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold claims.
    #[arg(long)]
    claims: Option<PathBuf>,
    /// Verdict file to score.
    #[arg(long)]
    predictions: PathBuf,
    /// JSON report destination; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Extra verdict files for the ablation table, as NAME=PATH.
    #[arg(long, value_parser = parse_named)]
    ablation: Vec<(String, PathBuf)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    /// Labeled claims; verifiable ones give pairs from gold evidence, NOT
    /// ENOUGH INFO ones from sampled sentences.
    #[arg(long)]
    claims: Option<PathBuf>,
    /// Additional premise/hypothesis pair files.
    #[arg(long)]
    pairs: Vec<PathBuf>,
    /// Write the assembled training pairs here.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
    /// Output model file.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 50)]
    embed_dim: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 16)]
    channels: usize,
    #[arg(long, default_value_t = 32)]
    z_dim: usize,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 20)]
    draws: u64,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct TagArgs {
    /// One text per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

fn parse_named(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().with_context(|| format!("no {what} path given (flag or config file)"))
}

fn override_path(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if flag.is_some() {
        slot.clone_from(flag);
    }
}

fn override_val<T: Copy>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    override_val(&mut cfg.seed, cli.seed);
    override_val(&mut cfg.workers, cli.workers);
    Ok(cfg)
}

fn apply_pipeline_flags(cfg: &mut RunConfig, f: &PipelineFlags) {
    override_val(&mut cfg.point_threshold, f.point_threshold);
    override_val(&mut cfg.dampen_factor, f.dampen_factor);
    override_val(&mut cfg.type1_limit, f.type1_limit);
    override_val(&mut cfg.type2_limit, f.type2_limit);
    override_val(&mut cfg.type3_limit, f.type3_limit);
    override_val(&mut cfg.max_evidence, f.max_evidence);
    cfg.no_points |= f.no_points;
    cfg.no_merge |= f.no_merge;
    cfg.no_conv |= f.no_conv;
}

fn cmd_index(mut cfg: RunConfig, args: &IndexArgs) -> Result<()> {
    override_path(&mut cfg.dump, &args.dump);
    override_path(&mut cfg.index, &args.index);
    override_val(&mut cfg.max_sentence_chars, args.max_sentence_chars);
    cfg.lowercase_pronouns |= args.lowercase_pronouns;
    cfg.validate()?;
    let dump = require(&cfg.dump, "dump")?;
    let out = require(&cfg.index, "index")?;

    let ingested = read_dump(cio::open(dump)?, &cfg.ingest_options())?;
    for e in &ingested.bad_records {
        eprintln!("warning: {e}");
    }
    let warnings = ingested.warnings();
    let pages = ingested.pages;
    let index = IndexedCorpus::build(ingested.docs)?;
    index.save(out)?;
    println!("pages {pages}, documents {}, warnings {warnings}", index.len());
    Ok(())
}

fn load_annotations(path: Option<&Path>) -> Result<HashMap<u64, ClaimAnnotations>> {
    match path {
        Some(p) => Ok(read_annotations(cio::open(p)?)?),
        None => Ok(HashMap::new()),
    }
}

fn cmd_predict(mut cfg: RunConfig, args: &PredictArgs) -> Result<()> {
    override_path(&mut cfg.index, &args.index);
    override_path(&mut cfg.model, &args.model);
    override_path(&mut cfg.claims, &args.claims);
    override_path(&mut cfg.annotations, &args.annotations);
    override_path(&mut cfg.tags, &args.tags);
    override_path(&mut cfg.output, &args.output);
    apply_pipeline_flags(&mut cfg, &args.pipeline);
    cfg.validate()?;

    let corpus = IndexedCorpus::load(require(&cfg.index, "index")?)?;
    let model = Model::load(require(&cfg.model, "model")?)?;
    let claims = read_claims_file(require(&cfg.claims, "claims")?)?;
    let annotations = load_annotations(cfg.annotations.as_deref())?;
    let tags: Option<Vec<TaggedText>> = match &cfg.tags {
        Some(p) => Some(read_tag_file(cio::open(p)?)?),
        None => None,
    };

    let mut verdicts = verify_all(
        &claims,
        &annotations,
        tags.as_deref(),
        &corpus,
        &model,
        &cfg.pipeline(),
        cfg.workers,
    )?;
    if !args.diagnostics {
        for v in &mut verdicts {
            v.diagnostics = None;
        }
    }
    let out = require(&cfg.output, "output")?;
    let mut w = cio::create(out)?;
    write_jsonl(&mut w, &verdicts)?;
    w.flush().with_context(|| format!("writing {}", out.display()))?;
    let mut counts = [0usize; 3];
    for v in &verdicts {
        counts[v.predicted_label.index()] += 1;
    }
    println!(
        "claims {}, {} {}, {} {}, {} {}",
        verdicts.len(),
        Label::Supports,
        counts[0],
        Label::Refutes,
        counts[1],
        Label::NotEnoughInfo,
        counts[2]
    );
    Ok(())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    #[serde(flatten)]
    report: &'a EvalReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    ablations: Vec<AblationRow>,
}

fn cmd_evaluate(mut cfg: RunConfig, args: &EvaluateArgs) -> Result<()> {
    override_path(&mut cfg.claims, &args.claims);
    override_path(&mut cfg.output, &args.output);
    let gold = gold_from_records(&read_claims_file(require(&cfg.claims, "claims")?)?)?;
    let score = |path: &Path| -> Result<EvalReport> {
        let preds: Vec<VerdictRecord> = read_jsonl(cio::open(path)?)?;
        evaluate(&preds, &gold).with_context(|| format!("evaluating {}", path.display()))
    };
    let report = score(&args.predictions)?;
    let mut rows = vec![AblationRow {
        name: "Full".into(),
        report: report.clone(),
    }];
    let mut ablations = Vec::new();
    for (name, path) in &args.ablation {
        let row = AblationRow {
            name: name.clone(),
            report: score(path)?,
        };
        rows.push(row.clone());
        ablations.push(row);
    }
    let json = serde_json::to_string_pretty(&ReportFile {
        report: &report,
        ablations,
    })?;
    match &cfg.output {
        Some(p) => std::fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{json}"),
    }
    print!("{}", ablation_table(&rows));
    Ok(())
}

fn cmd_train(mut cfg: RunConfig, args: &TrainArgs) -> Result<()> {
    override_path(&mut cfg.index, &args.index);
    override_path(&mut cfg.claims, &args.claims);
    override_path(&mut cfg.model, &args.model);
    cfg.validate()?;
    let out = require(&cfg.model, "model")?;

    let mut pairs = Vec::new();
    if let Some(claims_path) = &cfg.claims {
        let corpus = IndexedCorpus::load(require(&cfg.index, "index")?)?;
        let claims = read_claims_file(claims_path)?;
        pairs.extend(evidence_pairs(&claims, &corpus));
        let nei: Vec<&str> = claims
            .iter()
            .filter(|c| c.label == Some(Label::NotEnoughInfo))
            .map(|c| c.claim.as_str())
            .collect();
        pairs.extend(generate_nei_pairs(&nei, &corpus, cfg.seed)?);
    }
    for p in &args.pairs {
        let (more, skipped) = read_pairs(cio::open(p)?)?;
        if skipped > 0 {
            eprintln!("warning: skipped {skipped} empty pairs in {}", p.display());
        }
        pairs.extend(more);
    }
    if pairs.is_empty() {
        bail!("no training pairs: give --claims with --index, or --pairs");
    }
    if let Some(p) = &args.pairs_out {
        let mut w = cio::create(p)?;
        write_pairs(&mut w, &pairs)?;
        w.flush()?;
    }

    let config = ModelConfig {
        embed_dim: args.embed_dim,
        hidden: args.hidden,
        channels: args.channels,
        z_dim: args.z_dim,
        ..Default::default()
    };
    let hyper = TrainConfig {
        learning_rate: args.learning_rate,
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: cfg.seed,
    };
    let report = |trace: &[f64]| {
        for (e, l) in trace.iter().enumerate() {
            eprintln!("epoch {:>4}  loss {l:.6}", e + 1);
        }
    };
    let acc = match args.precision {
        Precision::F64 => {
            let o = nn::train::<f64>(&pairs, config, &hyper)?;
            report(&o.loss_trace);
            o.model.save(out)?;
            nn::accuracy(&o.model, &pairs)?
        }
        Precision::F32 => {
            let o = nn::train::<f32>(&pairs, config, &hyper)?;
            report(&o.loss_trace);
            o.model.save(out)?;
            nn::accuracy(&o.model, &pairs)?
        }
    };
    println!("pairs {}, train accuracy {acc:.4}", pairs.len());
    Ok(())
}

fn cmd_gradcheck(cfg: RunConfig, args: &GradcheckArgs) -> Result<()> {
    let mut worst: f64 = 0.0;
    for d in 0..args.draws {
        let conv = d % 2 == 0;
        let (model, pair): (EntailmentModel<f64>, _) = random_case(cfg.seed.wrapping_add(d), conv);
        let r = gradient_check(&model, &pair, args.epsilon)?;
        let group = r
            .groups
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
            .map_or("-", |g| g.name);
        println!(
            "draw {d:>3}  m={:<3} n={:<3} conv={:<5} max rel error {:.3e} ({group})",
            pair.premise.len(),
            pair.hypothesis.len(),
            r.conv_active,
            r.max_rel_error
        );
        worst = worst.max(r.max_rel_error);
    }
    println!("worst {worst:.3e}, tolerance {:.0e}", args.tolerance);
    if worst >= args.tolerance {
        bail!("gradient check failed");
    }
    Ok(())
}

fn cmd_tag(cfg: RunConfig, args: &TagArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let lines: Vec<&str> = text.lines().collect();
    let tagged = batch_tag(&lines, cfg.workers);
    let mut w = cio::create(&args.output)?;
    write_tag_file(&mut w, &tagged)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = base_config(&cli)?;
    match &cli.command {
        Command::Index(a) => cmd_index(cfg, a),
        Command::Predict(a) => cmd_predict(cfg, a),
        Command::Evaluate(a) => cmd_evaluate(cfg, a),
        Command::Train(a) => cmd_train(cfg, a),
        Command::Gradcheck(a) => cmd_gradcheck(cfg, a),
        Command::Tag(a) => cmd_tag(cfg, a),
    }
}
