//! Command-line front end.

use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::brute::{bf_all_explanations, check_duality, BruteBounds, ExplanationSets};
use crate::dl::{classify, DecisionList, ExplanationKind, FeatureSet, FeatureSpace, Instance};
use crate::encode::{dump_dimacs, dump_wcnf, encode, encode_dlsat, EncodingKind};
use crate::enumerate::{enumerate_cxp_lbx, enumerate_marco, ExplanationReport};
use crate::error::ExplainError;
use crate::explain::{one_axp, one_cxp, ExplainSession};
use crate::horn::{check_restricted, horn_axp, RestrictionMode};
use crate::model_io::{generate_random_dl, parse_instances, parse_model, serialize_instances, serialize_model, GeneratorParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dlx", version, about = "Abductive and contrastive explanations for decision lists")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the predicted class and firing rule of each instance.
    Classify(RunConfig),
    /// Compute or enumerate explanations.
    Explain(RunConfig),
    /// Write the explanation query of each instance as WCNF.
    Encode(RunConfig),
    /// Compare SAT-based enumeration with exhaustive enumeration.
    Verify(RunConfig),
    /// Write a seeded random model (and optionally random instances).
    Generate(GenerateConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    OneAxp,
    OneCxp,
    EnumLbx,
    EnumMarcoAxp,
    EnumMarcoCxp,
    Horn,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EncodingArg {
    Main,
    Alternative,
}

impl From<EncodingArg> for EncodingKind {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Main => EncodingKind::Main,
            EncodingArg::Alternative => EncodingKind::Alternative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    JsonLines,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with one column per feature and an optional `class` column.
    #[arg(long)]
    pub instances: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "enum-marco-axp")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "main")]
    pub encoding: EncodingArg,
    /// Time budget per instance, in seconds.
    #[arg(long, default_value_t = 1800.0)]
    pub budget_s: f64,
    #[arg(long, value_enum, default_value = "human")]
    pub format: Format,
    /// Seed for sampled instances when `--instances` is absent.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of sampled instances when `--instances` is absent.
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub bf_max_points: u128,
    #[arg(long, default_value_t = 12)]
    pub bf_max_features: usize,
    /// Exit with status 3 when any budget runs out.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write the satisfiability query for this class.
    #[arg(long)]
    pub dlsat_class: Option<String>,
    /// Include wall-clock times in the output.
    #[arg(long)]
    pub timings: bool,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>) -> Self {
        RunConfig {
            model: model.into(),
            instances: None,
            mode: Mode::EnumMarcoAxp,
            encoding: EncodingArg::Main,
            budget_s: 1800.0,
            format: Format::Human,
            seed: 0,
            samples: 5,
            bf_max_points: 1_000_000,
            bf_max_features: 12,
            strict: false,
            out_dir: None,
            dlsat_class: None,
            timings: false,
        }
    }

    fn bounds(&self) -> BruteBounds {
        BruteBounds {
            max_points: self.bf_max_points,
            max_features: self.bf_max_features,
        }
    }

    fn budget(&self) -> Duration {
        Duration::from_secs_f64(self.budget_s)
    }
}

#[derive(Args, Debug, Clone)]
pub struct GenerateConfig {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub features: usize,
    #[arg(long, default_value_t = 3)]
    pub domain: usize,
    #[arg(long, default_value_t = 12)]
    pub rules: usize,
    #[arg(long, default_value_t = 3)]
    pub max_len: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Where to write the model; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write `--samples` random instances.
    #[arg(long)]
    pub instances_out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

/// Failure carrying its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn parse(message: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }

    fn runtime(message: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_FAIL,
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn load_model(cfg: &RunConfig) -> Result<DecisionList, Failure> {
    let text = read(&cfg.model)?;
    parse_model(&text).map_err(|e| Failure::parse(format!("{}: {e}", cfg.model.display())))
}

/// Instances from `--instances`, or `--samples` seeded random points.
fn load_instances(cfg: &RunConfig, dl: &DecisionList) -> Result<Vec<Instance>, Failure> {
    match &cfg.instances {
        Some(path) => {
            let text = read(path)?;
            parse_instances(&text, dl.space()).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
        }
        None => Ok(sample_instances(dl.space(), cfg.seed, cfg.samples)),
    }
}

pub fn sample_instances(space: &FeatureSpace, seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Instance {
            point: (0..space.num_features()).map(|j| rng.gen_range(0..space.domain_size(j))).collect(),
            label: None,
        })
        .collect()
}

struct Painter {
    color: bool,
}

impl Painter {
    fn new() -> Self {
        Painter {
            color: std::env::var_os("DLX_NO_COLOR").is_none() && std::io::stdout().is_terminal(),
        }
    }

    fn bold(&self, s: &str) -> String {
        if self.color {
            format!("\x1b[1m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

fn names(space: &FeatureSpace, set: &FeatureSet) -> Vec<String> {
    set.iter().map(|&j| space.feature(j).name.clone()).collect()
}

fn rule_name(dl: &DecisionList, k: usize) -> String {
    if dl.is_default(k) {
        "default".to_string()
    } else {
        format!("R{k}")
    }
}

fn run(result: Result<i32, Failure>, err: &mut dyn Write) -> i32 {
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io<T>(r: std::io::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::runtime)
}

/// Parses `args` and runs the selected command.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match cli.command {
        Command::Classify(cfg) => cmd_classify(&cfg, out, err),
        Command::Explain(cfg) if cfg.mode == Mode::Verify => cmd_verify(&cfg, out, err, &sat_enumerator),
        Command::Explain(cfg) => cmd_explain(&cfg, out, err),
        Command::Encode(cfg) => cmd_encode(&cfg, out, err),
        Command::Verify(cfg) => cmd_verify(&cfg, out, err, &sat_enumerator),
        Command::Generate(cfg) => cmd_generate(&cfg, out, err),
    }
}

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    instance: usize,
    class: &'a str,
    rule: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<&'a str>,
}

pub fn cmd_classify(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    run(classify_inner(cfg, out), err)
}

fn classify_inner(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let dl = load_model(cfg)?;
    let instances = load_instances(cfg, &dl)?;
    let space = dl.space();
    let mut labelled = 0;
    let mut mismatches = 0;
    for (idx, inst) in instances.iter().enumerate() {
        let (class, k) = classify(&dl, &inst.point).map_err(Failure::parse)?;
        if let Some(label) = inst.label {
            labelled += 1;
            if label != class {
                mismatches += 1;
            }
        }
        match cfg.format {
            Format::Human => io(writeln!(out, "f={} via {}", space.class_name(class), rule_name(&dl, k)))?,
            Format::JsonLines => {
                let rec = ClassifyRecord {
                    instance: idx,
                    class: space.class_name(class),
                    rule: k,
                    expected: inst.label.map(|c| space.class_name(c)),
                };
                io(writeln!(out, "{}", serde_json::to_string(&rec).map_err(Failure::runtime)?))?;
            }
        }
    }
    if labelled > 0 {
        match cfg.format {
            Format::Human => io(writeln!(out, "mismatches: {mismatches} of {labelled}"))?,
            Format::JsonLines => io(writeln!(out, "{{\"mismatches\":{mismatches},\"labelled\":{labelled}}}"))?,
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExplanationRecord {
    instance: usize,
    class: String,
    kind: String,
    features: Option<Vec<String>>,
    complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
}

#[derive(Serialize)]
struct ReportRecord {
    instance: usize,
    class: String,
    mode: String,
    axps: Vec<Vec<String>>,
    cxps: Vec<Vec<String>>,
    num_axps: usize,
    num_cxps: usize,
    avg_axp_size: f64,
    avg_cxp_size: f64,
    complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
}

fn mode_name(mode: Mode) -> String {
    mode.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn fmt_sets(sets: &[Vec<String>]) -> String {
    let inner: Vec<String> = sets.iter().map(|s| format!("{{{}}}", s.join(", "))).collect();
    format!("{{{}}}", inner.join(", "))
}

pub fn cmd_explain(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    run(explain_inner(cfg, out, err), err)
}

fn check_config(cfg: &RunConfig, dl: &DecisionList) -> Result<(), Failure> {
    if !(cfg.budget_s > 0.0 && cfg.budget_s.is_finite()) {
        return Err(Failure::parse("--budget-s must be positive"));
    }
    if cfg.encoding == EncodingArg::Alternative && dl.space().num_classes() > 2 {
        return Err(Failure::parse(format!(
            "alternative encoding is binary only; model has {} classes",
            dl.space().num_classes()
        )));
    }
    Ok(())
}

fn explain_inner(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let dl = load_model(cfg)?;
    check_config(cfg, &dl)?;
    let instances = load_instances(cfg, &dl)?;
    let space = dl.space();
    let painter = Painter::new();
    let mut sess = ExplainSession::new(&dl, cfg.encoding.into()).map_err(Failure::parse)?;
    let mut exhausted = false;

    for (idx, inst) in instances.iter().enumerate() {
        let start = Instant::now();
        sess.set_deadline(Some(start + cfg.budget()));
        let (class, _) = classify(&dl, &inst.point).map_err(Failure::parse)?;
        let class_name = space.class_name(class).to_string();
        let time = |start: Instant| cfg.timings.then(|| start.elapsed().as_secs_f64());

        let single: Option<(ExplanationKind, Result<FeatureSet, ExplainError>)> = match cfg.mode {
            Mode::OneAxp | Mode::OneCxp => {
                let q = sess.prepare(inst).map_err(Failure::runtime)?;
                Some(if cfg.mode == Mode::OneAxp {
                    (ExplanationKind::Axp, one_axp(&mut sess, &q).map(|e| e.features))
                } else {
                    (ExplanationKind::Cxp, one_cxp(&mut sess, &q).map(|e| e.features))
                })
            }
            Mode::Horn => {
                let mode = if check_restricted(&dl, RestrictionMode::Strict) {
                    RestrictionMode::Strict
                } else {
                    RestrictionMode::Relaxed
                };
                match horn_axp(&dl, inst, mode) {
                    Ok(e) => Some((ExplanationKind::Axp, Ok(e.features))),
                    Err(e) => return Err(Failure::runtime(format!("instance {idx}: {e}"))),
                }
            }
            _ => None,
        };

        if let Some((kind, result)) = single {
            let (features, complete, note) = match result {
                Ok(f) => (Some(names(space, &f)), true, None),
                Err(ExplainError::NoCxpExists) => (None, true, Some("no CXp exists".to_string())),
                Err(ExplainError::Timeout) => {
                    exhausted = true;
                    (None, false, Some("time budget exhausted".to_string()))
                }
                Err(e) => return Err(Failure::runtime(format!("instance {idx}: {e}"))),
            };
            let rec = ExplanationRecord {
                instance: idx,
                class: class_name,
                kind: kind.to_string(),
                features,
                complete,
                note,
                time: time(start),
            };
            match cfg.format {
                Format::JsonLines => io(writeln!(out, "{}", serde_json::to_string(&rec).map_err(Failure::runtime)?))?,
                Format::Human => {
                    let label = painter.bold(&kind.to_string().to_uppercase());
                    let body = match (&rec.features, &rec.note) {
                        (Some(f), _) => format!("{{{}}}", f.join(", ")),
                        (None, Some(n)) => n.clone(),
                        (None, None) => String::new(),
                    };
                    io(writeln!(out, "instance {idx}: class {} {label} {body}", rec.class))?;
                    if let Some(t) = rec.time {
                        io(writeln!(out, "  time {t:.3}s"))?;
                    }
                }
            }
            continue;
        }

        let q = sess.prepare(inst).map_err(Failure::runtime)?;
        let report: ExplanationReport = match cfg.mode {
            Mode::EnumLbx => enumerate_cxp_lbx(&mut sess, &q),
            Mode::EnumMarcoAxp => enumerate_marco(&mut sess, &q, ExplanationKind::Axp),
            Mode::EnumMarcoCxp => enumerate_marco(&mut sess, &q, ExplanationKind::Cxp),
            _ => unreachable!("single-explanation modes handled above"),
        }
        .map_err(|e| Failure::runtime(format!("instance {idx}: {e}")))?;
        if !report.complete {
            exhausted = true;
        }
        let rec = ReportRecord {
            instance: idx,
            class: class_name,
            mode: mode_name(cfg.mode),
            axps: report.axps.iter().map(|s| names(space, s)).collect(),
            cxps: report.cxps.iter().map(|s| names(space, s)).collect(),
            num_axps: report.num_axps(),
            num_cxps: report.num_cxps(),
            avg_axp_size: report.avg_axp_size(),
            avg_cxp_size: report.avg_cxp_size(),
            complete: report.complete,
            time: cfg.timings.then_some(report.elapsed.as_secs_f64()),
        };
        match cfg.format {
            Format::JsonLines => io(writeln!(out, "{}", serde_json::to_string(&rec).map_err(Failure::runtime)?))?,
            Format::Human => {
                let status = if rec.complete { "" } else { " (incomplete)" };
                io(writeln!(out, "instance {idx}: class {}{status}", rec.class))?;
                if cfg.mode != Mode::EnumLbx {
                    io(writeln!(
                        out,
                        "  {} {} (avg size {:.2}): {}",
                        rec.num_axps,
                        painter.bold("AXp"),
                        rec.avg_axp_size,
                        fmt_sets(&rec.axps)
                    ))?;
                }
                io(writeln!(
                    out,
                    "  {} {} (avg size {:.2}): {}",
                    rec.num_cxps,
                    painter.bold("CXp"),
                    rec.avg_cxp_size,
                    fmt_sets(&rec.cxps)
                ))?;
                if let Some(t) = rec.time {
                    io(writeln!(out, "  time {t:.3}s"))?;
                }
            }
        }
    }
    if exhausted && cfg.strict {
        let _ = writeln!(err, "error: time budget exhausted");
        return Ok(EXIT_BUDGET);
    }
    Ok(EXIT_OK)
}

pub fn cmd_encode(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    run(encode_inner(cfg, out), err)
}

fn encode_inner(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let dl = load_model(cfg)?;
    check_config(cfg, &dl)?;
    let instances = load_instances(cfg, &dl)?;
    let dir = cfg
        .out_dir
        .clone()
        .ok_or_else(|| Failure::parse("encode needs --out-dir"))?;
    io(fs::create_dir_all(&dir))?;
    for (idx, inst) in instances.iter().enumerate() {
        let enc = encode(cfg.encoding.into(), &dl, inst).map_err(Failure::parse)?;
        let name = format!("inst{idx}.wcnf");
        io(fs::write(dir.join(&name), dump_wcnf(&enc)))?;
        io(writeln!(
            out,
            "{name}: {} vars, {} hard, {} soft",
            enc.varmap.num_vars(),
            enc.hard.len(),
            enc.soft.len()
        ))?;
    }
    if let Some(class) = &cfg.dlsat_class {
        let target = dl
            .space()
            .class_index(class)
            .ok_or_else(|| Failure::parse(format!("unknown class `{class}`")))?;
        let (vm, clauses) = encode_dlsat(&dl, target);
        let name = format!("dlsat_{class}.cnf");
        io(fs::write(dir.join(&name), dump_dimacs(vm.num_vars(), &clauses)))?;
        io(writeln!(out, "{name}: {} vars, {} clauses", vm.num_vars(), clauses.len()))?;
    }
    Ok(EXIT_OK)
}

/// Explanation sets for one instance, labelled by the procedure that
/// produced them.
pub type EnumeratorOutput = Vec<(String, ExplanationSets)>;

/// Something that computes explanation sets; replaced in tests.
pub type Enumerator = dyn Fn(&DecisionList, &Instance, EncodingKind) -> Result<EnumeratorOutput, ExplainError>;

/// The SAT-based enumerators in every mode. Each AXp/CXp list is compared
/// whole; LBX yields CXps only, so its AXps are left out of the comparison.
pub fn sat_enumerator(dl: &DecisionList, inst: &Instance, kind: EncodingKind) -> Result<EnumeratorOutput, ExplainError> {
    let mut sess = ExplainSession::new(dl, kind)?;
    let mut out = Vec::new();
    for (name, target) in [("enum-marco-axp", ExplanationKind::Axp), ("enum-marco-cxp", ExplanationKind::Cxp)] {
        let q = sess.prepare(inst)?;
        let r = enumerate_marco(&mut sess, &q, target)?;
        if !r.complete {
            return Err(ExplainError::Timeout);
        }
        out.push((name.to_string(), ExplanationSets { axps: r.axps, cxps: r.cxps }));
    }
    let q = sess.prepare(inst)?;
    let r = enumerate_cxp_lbx(&mut sess, &q)?;
    if !r.complete {
        return Err(ExplainError::Timeout);
    }
    out.push(("enum-lbx".to_string(), ExplanationSets { axps: Vec::new(), cxps: r.cxps }));
    Ok(out)
}

/// First disagreement between `enumerator` and the brute-force oracle.
fn find_mismatch(
    dl: &DecisionList,
    inst: &Instance,
    kind: EncodingKind,
    bounds: &BruteBounds,
    enumerator: &Enumerator,
) -> Result<Option<String>, Failure> {
    let truth = bf_all_explanations(dl, inst, bounds).map_err(Failure::parse)?;
    if !check_duality(&truth) {
        return Ok(Some("exhaustive AXps and CXps are not dual".into()));
    }
    let got = enumerator(dl, inst, kind).map_err(Failure::runtime)?;
    let space = dl.space();
    let show = |sets: &[FeatureSet]| fmt_sets(&sets.iter().map(|s| names(space, s)).collect::<Vec<_>>());
    for (name, sets) in got {
        let lbx = name == "enum-lbx";
        if !lbx && sets.axps != truth.axps {
            return Ok(Some(format!("{name}: AXps {} expected {}", show(&sets.axps), show(&truth.axps))));
        }
        if sets.cxps != truth.cxps {
            return Ok(Some(format!("{name}: CXps {} expected {}", show(&sets.cxps), show(&truth.cxps))));
        }
        if !lbx && !check_duality(&sets) {
            return Ok(Some(format!("{name}: AXps and CXps are not dual")));
        }
    }
    Ok(None)
}

/// Drops rules while the disagreement persists.
fn minimize(
    dl: &DecisionList,
    inst: &Instance,
    kind: EncodingKind,
    bounds: &BruteBounds,
    enumerator: &Enumerator,
) -> Result<(DecisionList, String), Failure> {
    let mut current = dl.clone();
    let mut reason = find_mismatch(&current, inst, kind, bounds, enumerator)?.expect("caller saw a mismatch");
    let mut i = 0;
    while i < current.num_rules() {
        let mut rules = current.rules().to_vec();
        rules.remove(i);
        let smaller = DecisionList::new(current.space().clone(), rules, current.default_class());
        let Ok(smaller) = smaller else {
            i += 1;
            continue;
        };
        match find_mismatch(&smaller, inst, kind, bounds, enumerator) {
            Ok(Some(r)) => {
                current = smaller;
                reason = r;
            }
            _ => i += 1,
        }
    }
    Ok((current, reason))
}

pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write, enumerator: &Enumerator) -> i32 {
    run(verify_inner(cfg, out, enumerator), err)
}

fn verify_inner(cfg: &RunConfig, out: &mut dyn Write, enumerator: &Enumerator) -> Result<i32, Failure> {
    let dl = load_model(cfg)?;
    check_config(cfg, &dl)?;
    let instances = load_instances(cfg, &dl)?;
    let bounds = cfg.bounds();
    bounds.check(&dl).map_err(Failure::parse)?;
    let kind: EncodingKind = cfg.encoding.into();
    for (idx, inst) in instances.iter().enumerate() {
        if find_mismatch(&dl, inst, kind, &bounds, enumerator)?.is_some() {
            let (small, reason) = minimize(&dl, inst, kind, &bounds, enumerator)?;
            let one = serialize_instances(small.space(), std::slice::from_ref(inst), false);
            io(writeln!(out, "mismatch on instance {idx}: {reason}"))?;
            io(writeln!(out, "minimized model:"))?;
            io(write!(out, "{}", serialize_model(&small)))?;
            io(writeln!(out, "instance:"))?;
            io(write!(out, "{one}"))?;
            return Ok(EXIT_FAIL);
        }
    }
    io(writeln!(out, "ok: {} instances agree", instances.len()))?;
    Ok(EXIT_OK)
}

pub fn cmd_generate(cfg: &GenerateConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    run(generate_inner(cfg, out), err)
}

fn generate_inner(cfg: &GenerateConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let params = GeneratorParams {
        seed: cfg.seed,
        num_features: cfg.features,
        domain_size: cfg.domain,
        num_rules: cfg.rules,
        max_antecedent_len: cfg.max_len,
        num_classes: cfg.classes,
    };
    let dl = generate_random_dl(&params).map_err(Failure::parse)?;
    let text = serialize_model(&dl);
    match &cfg.out {
        Some(path) => io(fs::write(path, &text))?,
        None => io(write!(out, "{text}"))?,
    }
    if let Some(path) = &cfg.instances_out {
        let insts = sample_instances(dl.space(), cfg.seed, cfg.samples);
        io(fs::write(path, serialize_instances(dl.space(), &insts, false)))?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_match_flags() {
        assert_eq!(mode_name(Mode::EnumMarcoAxp), "enum-marco-axp");
        assert_eq!(mode_name(Mode::OneCxp), "one-cxp");
    }

    #[test]
    fn sampled_instances_are_seeded() {
        let space = FeatureSpace::boolean(6, &["a", "b"]);
        assert_eq!(sample_instances(&space, 7, 4), sample_instances(&space, 7, 4));
        assert_ne!(sample_instances(&space, 7, 4), sample_instances(&space, 8, 4));
    }

    #[test]
    fn bad_arguments_exit_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = ["dlx", "explain", "--model", "m", "--mode", "nope"].map(String::from);
        assert_eq!(main_with(args, &mut out, &mut err), EXIT_PARSE);
    }
}
