//! Command-line driver: derive, check, apply, parse.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser as ClapParser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::derive::{derive_dstl_with, DeriveError, DerivedGrammar, TFCOMMONS_SOURCE};
use crate::frontend::{Language, LanguageError, Violation};
use crate::grammar::{parse_grammar, Grammar, GrammarRegistry};
use crate::matcher::{apply, ApplyError, MatchError, Mode};
use crate::parser::{line_col, unparse, ParseError, Parser};

pub mod status {
    pub const OK: u8 = 0;
    pub const NO_MATCH: u8 = 1;
    pub const VIOLATIONS: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const USAGE: u8 = 4;
    pub const GUARD: u8 = 5;
}

#[derive(Debug, ClapParser)]
#[command(name = "dstl", version, about = "Derive transformation languages from grammars and run their rules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Reuse derived grammars stored here, keyed by content hash.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the transformation language of a grammar.
    Derive {
        grammar: PathBuf,
        /// Output file; a `.provenance.tsv` sidecar is written next to it.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a rule against the context conditions.
    Check {
        rule: PathBuf,
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Apply a rule to a model.
    Apply {
        rule: PathBuf,
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Output file for the transformed model (default: stdout).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Parse a file and print its syntax tree.
    Parse {
        file: PathBuf,
        #[arg(short, long)]
        grammar: PathBuf,
        /// Start production (default: the first one).
        #[arg(long)]
        start: Option<String>,
        /// Parse with the transformation language derived from the grammar.
        #[arg(long)]
        derived: bool,
    },
}

/// A failed command: exit status and message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub status: u8,
    pub message: String,
}

fn fail(status: u8, message: impl Into<String>) -> Failure {
    Failure { status, message: message.into() }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        let status = if matches!(e, ParseError::Ambiguous { .. }) { status::GUARD } else { status::PARSE };
        fail(status, e.to_string())
    }
}

impl From<DeriveError> for Failure {
    fn from(e: DeriveError) -> Failure {
        let status = match e {
            DeriveError::Grammar(_) => status::PARSE,
            _ => status::USAGE,
        };
        fail(status, e.to_string())
    }
}

impl From<LanguageError> for Failure {
    fn from(e: LanguageError) -> Failure {
        match e {
            LanguageError::Derive(e) => e.into(),
            LanguageError::Parse(e) => e.into(),
        }
    }
}

impl From<ApplyError> for Failure {
    fn from(e: ApplyError) -> Failure {
        match e {
            ApplyError::Layout(p) => p.into(),
            other => fail(status::GUARD, other.to_string()),
        }
    }
}

impl From<MatchError> for Failure {
    fn from(e: MatchError) -> Failure {
        fail(status::GUARD, e.to_string())
    }
}

/// What a command printed and its exit status.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub status: u8,
    pub stdout: String,
    pub stderr: String,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(status::USAGE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| fail(status::USAGE, format!("{}: {e}", path.display())))
}

fn with_path(path: &Path) -> impl Fn(Failure) -> Failure + '_ {
    move |f| fail(f.status, format!("{}: {}", path.display(), f.message))
}

/// The grammar at `path` plus every other grammar in its directory, which
/// may serve as supergrammars.
fn load_grammar(path: &Path) -> Result<(Grammar, GrammarRegistry, String), Failure> {
    let text = read(path)?;
    let g = parse_grammar(&text).map_err(|e| fail(status::PARSE, format!("{}: {e}", path.display())))?;
    let mut registry = GrammarRegistry::new();
    let mut sources = BTreeMap::new();
    if !g.extends.is_empty() {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| fail(status::USAGE, format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "mc-grammar") && p != path)
            .collect();
        entries.sort();
        for p in entries {
            let Ok(src) = fs::read_to_string(&p) else { continue };
            if let Ok(other) = parse_grammar(&src) {
                sources.insert(other.name.clone(), src);
                registry.insert(other.name.clone(), other);
            }
        }
    }
    let mut key = Sha256::new();
    key.update(env!("CARGO_PKG_VERSION"));
    key.update(TFCOMMONS_SOURCE);
    key.update(&text);
    for (name, src) in &sources {
        key.update(name);
        key.update(src);
    }
    Ok((g, registry, hex::encode(key.finalize())))
}

fn derive_cached(path: &Path, cache: Option<&Path>) -> Result<DerivedGrammar, Failure> {
    let (g, registry, key) = load_grammar(path)?;
    let file = cache.map(|d| d.join(format!("{key}.json")));
    if let Some(hit) = file.as_ref().and_then(|f| fs::read_to_string(f).ok()) {
        if let Ok(d) = serde_json::from_str::<DerivedGrammar>(&hit) {
            return Ok(d);
        }
    }
    let d = derive_dstl_with(&g, &registry).map_err(|e| with_path(path)(e.into()))?;
    if let (Some(dir), Some(file)) = (cache, file) {
        fs::create_dir_all(dir).map_err(|e| fail(status::USAGE, format!("{}: {e}", dir.display())))?;
        let json = serde_json::to_string(&d).map_err(|e| fail(status::USAGE, e.to_string()))?;
        write(&file, &json)?;
    }
    Ok(d)
}

fn language(path: &Path, cache: Option<&Path>) -> Result<Language, Failure> {
    let derived = derive_cached(path, cache)?;
    let models = Parser::new(&derived.source_grammar)?;
    let rules = Parser::new(&derived.grammar)?;
    Ok(Language { derived, models, rules })
}

#[derive(Serialize)]
struct JsonViolation<'a> {
    condition: &'a str,
    message: &'a str,
    line: usize,
    col: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    status: u8,
    violations: Vec<JsonViolation<'a>>,
    applications: Option<usize>,
}

fn violation_lines<'a>(vs: &'a [Violation], text: &str) -> Vec<JsonViolation<'a>> {
    vs.iter()
        .map(|v| {
            let (line, col) = line_col(text, v.span.start);
            JsonViolation { condition: v.condition.as_str(), message: &v.message, line, col }
        })
        .collect()
}

fn summary(format: Format, status: u8, violations: Vec<JsonViolation>, applications: Option<usize>) -> String {
    match format {
        Format::Json => {
            let s = Summary { status, violations, applications };
            serde_json::to_string(&s).expect("summary serializes") + "\n"
        }
        Format::Text => {
            let mut out: String =
                violations.iter().map(|v| format!("{}: {} at {}:{}\n", v.condition, v.message, v.line, v.col)).collect();
            if let Some(n) = applications {
                out.push_str(&format!("applications: {n}\n"));
            }
            out
        }
    }
}

fn provenance_path(out: &Path) -> PathBuf {
    out.with_extension("provenance.tsv")
}

/// Runs one command.
pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let cache = cli.cache_dir.as_deref();
    match &cli.command {
        Command::Derive { grammar, out } => {
            let d = derive_cached(grammar, cache)?;
            let text = format!("{}\n", d.grammar);
            match out {
                Some(path) => {
                    write(path, &text)?;
                    write(&provenance_path(path), &d.provenance_tsv())?;
                    Ok(Outcome {
                        stdout: format!("{} productions written to {}\n", d.grammar.productions.len(), path.display()),
                        ..Outcome::default()
                    })
                }
                None => Ok(Outcome { stdout: text, ..Outcome::default() }),
            }
        }
        Command::Check { rule, grammar, format } => {
            let lang = language(grammar, cache)?;
            let text = read(rule)?;
            let r = lang.parse_rule(&text).map_err(|e| with_path(rule)(e.into()))?;
            let status = if r.is_valid() { status::OK } else { status::VIOLATIONS };
            let stdout = summary(*format, status, violation_lines(&r.violations, &text), None);
            Ok(Outcome { status, stdout, ..Outcome::default() })
        }
        Command::Apply { rule, grammar, model, mode, max_iter, out, format } => {
            let lang = language(grammar, cache)?;
            let rule_text = read(rule)?;
            let r = lang.parse_rule(&rule_text).map_err(|e| with_path(rule)(e.into()))?;
            if !r.is_valid() {
                let stdout = summary(*format, status::VIOLATIONS, violation_lines(&r.violations, &rule_text), None);
                return Ok(Outcome { status: status::VIOLATIONS, stdout, ..Outcome::default() });
            }
            let tree = lang.parse_model(&read(model)?).map_err(|e| with_path(model)(e.into()))?;
            let (result, n) = apply(&lang, &r.ir, &tree, *mode, *max_iter)?;
            let status = if n == 0 { status::NO_MATCH } else { status::OK };
            let report = summary(*format, status, Vec::new(), Some(n));
            let text = unparse(&result.root);
            match out {
                Some(path) => {
                    write(path, &text)?;
                    Ok(Outcome { status, stdout: report, ..Outcome::default() })
                }
                None => Ok(Outcome { status, stdout: text, stderr: report }),
            }
        }
        Command::Parse { file, grammar, start, derived } => {
            let parser = if *derived {
                language(grammar, cache)?.rules
            } else {
                let (g, registry, _) = load_grammar(grammar)?;
                let flat = crate::grammar::flatten_inheritance(&g, &registry).map_err(|e| fail(status::PARSE, e.to_string()))?;
                Parser::new(&flat)?
            };
            let tree = parser.parse(start.as_deref(), &read(file)?).map_err(|e| with_path(file)(e.into()))?;
            Ok(Outcome { stdout: tree.root.dump(), ..Outcome::default() })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { status::USAGE } else { status::OK };
            return Outcome { status, stdout: String::new(), stderr: e.to_string() };
        }
    };
    match run(&cli) {
        Ok(o) => o,
        Err(f) => Outcome { status: f.status, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
    }
}
