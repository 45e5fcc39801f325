//! Command dispatch for the `mcgseq` binary. [`run`] never panics on bad
//! input: it returns an exit code and the text to print.
//!
//! Exit codes: 0 success, 1 domain error (structured JSON on stdout),
//! 2 parse, usage or configuration error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use mcgseq::classify::{
    allowable_assignments, allowable_reason, classify_system, standard_system, Assignment,
};
use mcgseq::family::{parse_blocks, validate_laminar, Label, LaminarFamily, Universe};
use mcgseq::fpword::FPWord;
use mcgseq::manifold::Manifold;
use mcgseq::pi1::{act_pi1, generators};
use mcgseq::sequence::{educe, factor_discrepant, is_discrepant, lift, EductionImage};
use mcgseq::spotted::{spotted_educe, SpottedMarking, SpottedWord};
use mcgseq::suites::{self, SuiteReport};
use mcgseq::systems::{
    act_system, normalize_system_traced, trace_assignment, DEFAULT_SEARCH_LIMIT,
};
use mcgseq::words::{free_reduce, Word};

/// Longest enumeration length accepted without `--allow-long`.
pub const MAX_LEN_GUARD: usize = 6;

/// Marking used by `verify --suite spotted` when no file is given.
pub const REFERENCE_MARKING: &str = "type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1\nspots 3\n";

#[derive(Parser, Debug)]
#[command(name = "mcgseq", version, about = "Mapping class group calculus for reducible 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Manifold description (or spotted marking for spotted commands).
    #[arg(long, global = true)]
    manifold: Option<PathBuf>,
    /// Laminar family, one `block {..}` per line.
    #[arg(long, global = true)]
    family: Option<PathBuf>,
    /// Word file, letters separated by whitespace.
    #[arg(long, global = true)]
    word: Option<PathBuf>,
    /// Assignment file, one `assign <dup> {..} [side]` per line.
    #[arg(long, global = true)]
    assignment: Option<PathBuf>,
    /// Eduction image as JSON, for `lift`.
    #[arg(long, global = true)]
    image: Option<PathBuf>,
    /// Element of pi1(W), for `act-pi1`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    element: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Permit `--max-len` above the guard.
    #[arg(long, global = true)]
    allow_long: bool,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a manifold and optionally a family, word and assignment.
    Validate,
    /// Classify the blocks of a family and test symmetry.
    Classify,
    /// Project a word to the mapping class group of V.
    Educe,
    /// Section word for an eduction image.
    Lift,
    /// Decide whether a word is discrepant.
    KernelTest,
    /// Rewrite a discrepant word without aut and summand swap letters.
    Factor,
    /// Images of pi1 generators, or of `--element`.
    ActPi1,
    /// Image of a family (default: the standard system).
    ActSystem,
    /// Certificate word for a symmetric family and assignment.
    NormalizeSystem,
    /// Project a spotted word to (capped class, spot permutation).
    SpottedEduce,
    /// Run a bundled verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Draw a family as a Graphviz digraph.
    Render,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Exactness,
    Normalization,
    Pi1,
    Relations,
    Spotted,
    All,
}

#[derive(Debug)]
enum Failure {
    Domain(mcgseq::Error),
    Config(String),
}

impl From<mcgseq::Error> for Failure {
    fn from(e: mcgseq::Error) -> Self {
        Failure::Domain(e)
    }
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

struct Emit {
    text: String,
    code: i32,
}

impl Emit {
    fn ok(text: String) -> Self {
        Emit { text, code: 0 }
    }

    fn json(v: &Value) -> Self {
        Emit::ok(json_line(v))
    }
}

fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("values serialize");
    s.push('\n');
    s
}

fn error_json(kind: &str, message: &str) -> String {
    json_line(&json!({ "error": { "kind": kind, "message": message } }))
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: e.to_string() }
                }
                _ => Outcome { code: 2, stdout: error_json("UsageError", e.to_string().trim()) },
            };
        }
    };
    log::debug!("running {:?}", cli.command);
    let (code, text) = match dispatch(&cli) {
        Ok(emit) => (emit.code, emit.text),
        Err(Failure::Config(msg)) => (2, error_json("ConfigError", &msg)),
        Err(Failure::Domain(e)) if e.is_parse() => (2, error_json(e.kind(), &e.to_string())),
        Err(Failure::Domain(e)) => (1, error_json(e.kind(), &e.to_string())),
    };
    match &cli.out {
        Some(path) => match fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new() },
            Err(e) => Outcome {
                code: 2,
                stdout: error_json("ConfigError", &format!("cannot write {}: {e}", path.display())),
            },
        },
        None => Outcome { code, stdout: text },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str, cmd: &str) -> Result<&'a Path, Failure> {
    p.as_deref()
        .ok_or_else(|| Failure::Config(format!("{cmd} requires --{flag}")))
}

fn manifold(cli: &Cli, cmd: &str) -> Result<Manifold, Failure> {
    Ok(Manifold::parse(&read(required(&cli.manifold, "manifold", cmd)?)?)?)
}

fn word(cli: &Cli, m: &Manifold, cmd: &str) -> Result<Word, Failure> {
    Ok(Word::parse(m, &read(required(&cli.word, "word", cmd)?)?)?)
}

fn family(cli: &Cli, u: Universe, cmd: &str) -> Result<LaminarFamily, Failure> {
    Ok(LaminarFamily::parse(u, &read(required(&cli.family, "family", cmd)?)?)?)
}

fn assignment(cli: &Cli, u: Universe, cmd: &str) -> Result<Assignment, Failure> {
    Ok(Assignment::parse(u, &read(required(&cli.assignment, "assignment", cmd)?)?)?)
}

fn only(cli: &Cli, cmd: &str, allowed: &[Format]) -> Result<(), Failure> {
    if allowed.contains(&cli.format) {
        Ok(())
    } else {
        Err(Failure::Config(format!("{cmd} does not support --format {:?}", cli.format).to_lowercase()))
    }
}

fn blocks_json(f: &LaminarFamily) -> Value {
    let u = f.universe();
    Value::from(f.blocks().iter().map(|&b| u.format_block(b)).collect::<Vec<_>>())
}

fn assignment_json(a: &Assignment, u: Universe) -> Value {
    let mut obj = Map::new();
    for (d, t) in a.entries(u) {
        obj.insert(d, Value::String(t));
    }
    Value::Object(obj)
}

fn dispatch(cli: &Cli) -> Result<Emit, Failure> {
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Classify => {
            only(cli, "classify", &[Format::Json, Format::Dot])?;
            let m = manifold(cli, "classify")?;
            let f = family(cli, m.universe(), "classify")?;
            if cli.format == Format::Dot {
                return Ok(Emit::ok(f.to_dot()));
            }
            let class = classify_system(&m, &f)?;
            let mut v = serde_json::to_value(&class).expect("serializable");
            v["census"] = Value::from(class.type_census());
            Ok(Emit::json(&v))
        }
        Command::Educe => {
            only(cli, "educe", &[Format::Json])?;
            let m = manifold(cli, "educe")?;
            let w = word(cli, &m, "educe")?;
            Ok(Emit::json(&educe(&m, &w)?.to_json(&m)))
        }
        Command::Lift => {
            only(cli, "lift", &[Format::Json, Format::Text])?;
            let m = manifold(cli, "lift")?;
            let text = read(required(&cli.image, "image", "lift")?)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| {
                Failure::Domain(mcgseq::Error::parse(e.line(), format!("image JSON: {e}")))
            })?;
            let h = EductionImage::from_json(&m, &v)?;
            let w = lift(&m, &h)?;
            Ok(word_output(cli, &m, &w, json!({ "image": h.to_json(&m) })))
        }
        Command::KernelTest => {
            only(cli, "kernel-test", &[Format::Json])?;
            let m = manifold(cli, "kernel-test")?;
            let w = word(cli, &m, "kernel-test")?;
            Ok(Emit::json(&json!({
                "discrepant": is_discrepant(&m, &w)?,
                "eduction": educe(&m, &w)?.to_json(&m),
            })))
        }
        Command::Factor => {
            only(cli, "factor", &[Format::Json, Format::Text])?;
            let m = manifold(cli, "factor")?;
            let w = word(cli, &m, "factor")?;
            let f = factor_discrepant(&m, &w)?;
            Ok(word_output(cli, &m, &f, json!({ "input": w.format(&m) })))
        }
        Command::ActPi1 => act_pi1_cmd(cli),
        Command::ActSystem => act_system_cmd(cli),
        Command::NormalizeSystem => normalize_cmd(cli),
        Command::SpottedEduce => {
            only(cli, "spotted-educe", &[Format::Json])?;
            let mk = SpottedMarking::parse(&read(required(&cli.manifold, "manifold", "spotted-educe")?)?)?;
            let w = SpottedWord::parse(&mk, &read(required(&cli.word, "word", "spotted-educe")?)?)?;
            Ok(Emit::json(&spotted_educe(&mk, &w)?.to_json(&mk)))
        }
        Command::Verify { suite } => verify(cli, *suite),
        Command::Render => {
            only(cli, "render", &[Format::Dot, Format::Text])?;
            let text = read(required(&cli.family, "family", "render")?)?;
            let u = match &cli.manifold {
                Some(_) => manifold(cli, "render")?.universe(),
                None => infer_universe(&text),
            };
            let f = LaminarFamily::parse(u, &text)?;
            Ok(Emit::ok(if cli.format == Format::Dot { f.to_dot() } else { f.to_string() }))
        }
    }
}

/// Smallest universe containing every label mentioned in a family file.
fn infer_universe(text: &str) -> Universe {
    let (mut k, mut l) = (0, 0);
    let tokens = text
        .split(|c: char| c == '{' || c == '}' || c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty());
    for t in tokens {
        match Label::parse(t) {
            Some(Label::S(i)) => k = k.max(i),
            Some(Label::E(j, _)) => l = l.max(j),
            None => {}
        }
    }
    Universe::new(k, l)
}

fn word_output(cli: &Cli, m: &Manifold, w: &Word, mut extra: Value) -> Emit {
    if cli.format == Format::Text {
        return Emit::ok(format!("{}\n", w.format(m)));
    }
    extra["word"] = Value::String(w.format(m));
    extra["length"] = Value::from(w.len());
    Emit::json(&extra)
}

fn validate(cli: &Cli) -> Result<Emit, Failure> {
    only(cli, "validate", &[Format::Json])?;
    let m = manifold(cli, "validate")?;
    let u = m.universe();
    let mut valid = true;
    let mut report = json!({
        "manifold": {
            "k": m.k(),
            "l": m.l(),
            "types": m.types().iter().map(|t| t.name().to_string()).collect::<Vec<_>>(),
            "labels": u.labels().map(|l| l.to_string()).collect::<Vec<_>>(),
        }
    });
    let mut fam = None;
    if let Some(path) = &cli.family {
        let blocks = parse_blocks(u, &read(path)?)?;
        let diag = validate_laminar(u, &blocks);
        valid &= diag.valid;
        report["family"] = serde_json::to_value(&diag).expect("serializable");
        if diag.valid {
            let f = LaminarFamily::new(u, blocks)?;
            report["family"]["symmetric"] = Value::Bool(classify_system(&m, &f)?.is_symmetric);
            fam = Some(f);
        }
    }
    if let Some(path) = &cli.word {
        let w = Word::parse(&m, &read(path)?)?;
        report["word"] = json!({
            "length": w.len(),
            "reduced": free_reduce(&m, &w).format(&m),
        });
    }
    if cli.assignment.is_some() {
        let a = assignment(cli, u, "validate")?;
        let f = fam.ok_or_else(|| Failure::Config("--assignment needs a valid --family".into()))?;
        let reason = allowable_reason(&m, &f, &a)?;
        valid &= reason.is_none();
        report["assignment"] = json!({ "allowable": reason.is_none(), "reason": reason });
    }
    report["valid"] = Value::Bool(valid);
    Ok(Emit { text: json_line(&report), code: if valid { 0 } else { 1 } })
}

fn act_pi1_cmd(cli: &Cli) -> Result<Emit, Failure> {
    only(cli, "act-pi1", &[Format::Json, Format::Text])?;
    let m = manifold(cli, "act-pi1")?;
    let w = word(cli, &m, "act-pi1")?;
    let probes: Vec<FPWord> = match &cli.element {
        Some(e) => vec![FPWord::parse(&m, e)?],
        None => generators(&m),
    };
    let mut images = Map::new();
    let mut lines = String::new();
    for u in &probes {
        let image = act_pi1(&m, &w, u)?.format(&m);
        lines.push_str(&format!("{} -> {image}\n", u.format(&m)));
        images.insert(u.format(&m), Value::String(image));
    }
    if cli.format == Format::Text {
        return Ok(Emit::ok(lines));
    }
    Ok(Emit::json(&json!({ "word": w.format(&m), "images": images })))
}

fn act_system_cmd(cli: &Cli) -> Result<Emit, Failure> {
    only(cli, "act-system", &[Format::Json, Format::Text, Format::Dot])?;
    let m = manifold(cli, "act-system")?;
    let w = word(cli, &m, "act-system")?;
    let u = m.universe();
    let (source, from_standard) = match &cli.family {
        Some(_) => (family(cli, u, "act-system")?, false),
        None => (standard_system(&m), true),
    };
    let image = act_system(&m, &w, &source)?;
    match cli.format {
        Format::Text => return Ok(Emit::ok(image.to_string())),
        Format::Dot => return Ok(Emit::ok(image.to_dot())),
        Format::Json => {}
    }
    let class = classify_system(&m, &image)?;
    let mut v = json!({
        "word": w.format(&m),
        "blocks": blocks_json(&image),
        "symmetric": class.is_symmetric,
    });
    if from_standard && class.is_symmetric {
        v["assignment"] = assignment_json(&trace_assignment(&m, &w)?, u);
    }
    Ok(Emit::json(&v))
}

fn normalize_cmd(cli: &Cli) -> Result<Emit, Failure> {
    let m = manifold(cli, "normalize-system")?;
    let u = m.universe();
    let target = family(cli, u, "normalize-system")?;
    if cli.format == Format::Dot {
        return Ok(Emit::ok(target.to_dot()));
    }
    let a = match &cli.assignment {
        Some(_) => assignment(cli, u, "normalize-system")?,
        // Without an explicit assignment, take the first allowable one.
        None => allowable_assignments(&m, &target)?
            .into_iter()
            .next()
            .ok_or_else(|| mcgseq::Error::NotAllowable("no allowable assignment".into()))?,
    };
    let n = normalize_system_traced(&m, &target, &a, DEFAULT_SEARCH_LIMIT)?;
    if cli.format == Format::Text {
        return Ok(Emit::ok(format!("{}\n", n.word.format(&m))));
    }
    Ok(Emit::json(&json!({
        "word": n.word.format(&m),
        "length": n.word.len(),
        "states_visited": n.states_visited,
        "needs_summand_swaps": n.needs_summand_swaps,
        "assignment": assignment_json(&a, u),
        "trace": serde_json::to_value(&n.steps).expect("serializable"),
    })))
}

fn verify(cli: &Cli, suite: Suite) -> Result<Emit, Failure> {
    only(cli, "verify", &[Format::Json])?;
    if let Some(n) = cli.max_len {
        if n > MAX_LEN_GUARD && !cli.allow_long {
            return Err(Failure::Config(format!(
                "--max-len {n} exceeds {MAX_LEN_GUARD}; pass --allow-long to run it anyway"
            )));
        }
    }
    let load_manifold = || -> Result<Manifold, Failure> {
        match &cli.manifold {
            Some(_) => manifold(cli, "verify"),
            None => Ok(Manifold::parse(mcgseq::REFERENCE_MANIFOLD)?),
        }
    };
    let load_marking = || -> Result<SpottedMarking, Failure> {
        match &cli.manifold {
            Some(p) => Ok(SpottedMarking::parse(&read(p)?)?),
            None => Ok(SpottedMarking::parse(REFERENCE_MARKING)?),
        }
    };
    let one = |s: Suite| -> Result<SuiteReport, Failure> {
        Ok(match s {
            Suite::Exactness => {
                let n = cli.max_len.unwrap_or(4);
                suites::exactness(&load_manifold()?, n, n.saturating_sub(1))?
            }
            Suite::Normalization => suites::normalization(&load_manifold()?, 50)?,
            Suite::Pi1 => suites::pi1(&load_manifold()?, cli.seed, 300, cli.max_len.unwrap_or(6))?,
            Suite::Relations => suites::relations(&load_manifold()?)?,
            Suite::Spotted => suites::spotted(&load_marking()?, cli.max_len.unwrap_or(3))?,
            Suite::All => unreachable!("expanded by the caller"),
        })
    };
    let reports = match suite {
        Suite::All => {
            if cli.manifold.is_some() {
                return Err(Failure::Config(
                    "--suite all runs on the reference manifold; pass a single suite to use --manifold"
                        .into(),
                ));
            }
            [Suite::Exactness, Suite::Normalization, Suite::Pi1, Suite::Relations, Suite::Spotted]
                .into_iter()
                .map(one)
                .collect::<Result<Vec<_>, _>>()?
        }
        s => vec![one(s)?],
    };
    let passed = reports.iter().all(|r| r.passed);
    let v = if reports.len() == 1 {
        serde_json::to_value(&reports[0])
    } else {
        serde_json::to_value(&reports)
    }
    .expect("serializable");
    Ok(Emit { text: json_line(&v), code: if passed { 0 } else { 1 } })
}
