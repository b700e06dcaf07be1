//! Command implementations for the `utri` binary.
//!
//! Every command produces a TSV report opened by a `#` header block carrying
//! the field, `d`, verification policy and seed. Commands that produce a file
//! (ideal descriptor, automorphism, decomposition word, random word) prefix
//! the report lines with `#`, so the same text is both a report and a file
//! the readers accept.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use utri::aut::{extremal, AutMap};
use utri::decomp::{eval_word, random_word};
use utri::format::{self, FormatError};
use utri::ideals::{
    correspondence_check, is_abelian, is_lie_ideal, lemma1_suite, mab2, mab3, mab_enumerate, mab_family8,
    maximality_oracle, partition, IdealError, DEFAULT_COSET_BOUND,
};
use utri::series::compare_series;
use utri::{decompose, AdditiveMap, AutError, DecompError, Fe, Field, GfError, IdealDesc, Nt, NtError, Policy};

#[derive(Debug, Parser)]
#[command(name = "utri", version, about = "Unitriangular groups over finite fields: ideals and automorphisms")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Matrix size.
    #[arg(long, global = true, default_value_t = 5)]
    pub d: usize,
    /// Field characteristic.
    #[arg(long, global = true, default_value_t = 2)]
    pub p: u32,
    /// Field degree over the prime field.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: u32,
    /// Seed for every sampled check and random word.
    #[arg(long, global = true, default_value_t = 0xC0FFEE)]
    pub seed: u64,
    /// Sample count for sampled checks.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub samples: usize,
    /// Write the produced file here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group order, Γ-chain dimensions and generators.
    Info,
    /// Lower and upper central series against the Γ chain.
    Series,
    /// Maximal abelian ideals.
    Ideals {
        #[command(subcommand)]
        cmd: IdealsCmd,
    },
    /// Automorphisms.
    Aut {
        #[command(subcommand)]
        cmd: AutCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum IdealsCmd {
    /// Every descriptor of the three families with its maximality verdict.
    Classify,
    /// Run the abelian, ideal, maximality, square and correspondence checks on a descriptor file.
    Verify { file: PathBuf },
    /// Write a descriptor: `partition I J`, `mab2 M C`, `mab3 I C` or `gamma L`.
    Make { family: String, values: Vec<u32> },
}

#[derive(Debug, Subcommand)]
pub enum AutCmd {
    /// Write an automorphism file for a named family.
    ///
    /// Families and values: identity; flip; diag D1..Dd; field J; inner
    /// (d(d−1)/2 entries, row by row); central ((d−1)·k values); extremal,
    /// extremal-odd, extremal-even [A1 A2], default 1 1.
    Make {
        family: String,
        values: Vec<u32>,
    },
    /// Check an automorphism file.
    Verify {
        file: PathBuf,
        /// `relations`, `exhaustive` or `sampled`.
        #[arg(long, default_value = "sampled")]
        policy: String,
    },
    /// Write the composite, first file applied first.
    Compose { first: PathBuf, second: PathBuf },
    /// Factor an automorphism file into family parameters.
    Decompose { file: PathBuf },
    /// Generate a seeded random word, evaluate it and write both.
    Random {
        #[arg(long)]
        len: usize,
        /// Where to write the word; defaults to `<out>.word`.
        #[arg(long)]
        word_out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Nt(#[from] NtError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

/// Result of a command: text for standard output, files to write, and the exit code.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub code: i32,
}

/// Header block plus TSV rows.
struct Report {
    text: String,
    /// Prefix rows with `#` so they can sit in front of a file body.
    commented: bool,
}

impl Report {
    fn new(command: &str, field: &Field, d: usize, policy: &str, seed: Option<u64>, commented: bool) -> Report {
        let mut text = String::new();
        let _ = writeln!(text, "# utri {command}");
        let _ = writeln!(text, "# field\t{field}");
        let _ = writeln!(text, "# d\t{d}");
        let _ = writeln!(text, "# policy\t{policy}");
        match seed {
            Some(s) => {
                let _ = writeln!(text, "# seed\t{s}");
            }
            None => text.push_str("# seed\tnone\n"),
        }
        Report { text, commented }
    }

    fn row<I: IntoIterator<Item = S>, S: ToString>(&mut self, cells: I) {
        if self.commented {
            self.text.push_str("# ");
        }
        let cells: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        self.text.push_str(&cells.join("\t"));
        self.text.push('\n');
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })
}

fn parsed<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Sends `body` to `--out` (with the report on stdout) or everything to stdout.
fn emit(cfg: &RunConfig, report: Report, body: String, code: i32) -> Outcome {
    match &cfg.out {
        Some(path) => Outcome {
            files: vec![(path.clone(), format!("{}{body}", report.text))],
            stdout: report.text,
            code,
        },
        None => Outcome { stdout: format!("{}{body}", report.text), files: Vec::new(), code },
    }
}

fn report_only(report: Report, code: i32) -> Outcome {
    Outcome { stdout: report.text, files: Vec::new(), code }
}

fn make_nt(cfg: &RunConfig) -> Result<Nt, CliError> {
    Ok(Nt::new(cfg.d, Field::new(cfg.p, cfg.k)?)?)
}

fn sampled(cfg: &RunConfig) -> Policy {
    Policy::Sampled { samples: cfg.samples, seed: cfg.seed }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Info => info(cfg),
        Command::Series => series(cfg),
        Command::Ideals { cmd: IdealsCmd::Classify } => classify(cfg),
        Command::Ideals { cmd: IdealsCmd::Verify { file } } => verify_ideal(cfg, file),
        Command::Ideals { cmd: IdealsCmd::Make { family, values } } => make_ideal(cfg, family, values),
        Command::Aut { cmd: AutCmd::Make { family, values } } => make_aut(cfg, family, values),
        Command::Aut { cmd: AutCmd::Verify { file, policy } } => verify_aut(cfg, file, policy),
        Command::Aut { cmd: AutCmd::Compose { first, second } } => compose(cfg, first, second),
        Command::Aut { cmd: AutCmd::Decompose { file } } => decompose_file(cfg, file),
        Command::Aut { cmd: AutCmd::Random { len, word_out } } => random(cfg, *len, word_out.as_ref()),
    }
}

fn info(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let nt = make_nt(cfg)?;
    let mut r = Report::new("info", nt.field(), nt.d(), "none", None, false);
    r.row(["order", &nt.order().to_string()]);
    for (k, g) in nt.gamma_chain().iter().enumerate() {
        r.row(["gamma".to_string(), (k + 1).to_string(), g.dim().to_string()]);
    }
    for (n, g) in nt.generators().iter().enumerate() {
        r.row(["generator".to_string(), (n + 1).to_string(), format!("{g:?}")]);
    }
    Ok(report_only(r, 0))
}

fn series(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let nt = make_nt(cfg)?;
    let s = compare_series(&nt)?;
    let mut r = Report::new("series", nt.field(), nt.d(), "exact", None, false);
    r.row(["term", "lower_dim", "upper_dim", "gamma_dim"]);
    let d = nt.d();
    for k in 1..=d {
        // Upper series term Z_{d−k} is compared with Γ_k.
        r.row([k, s.lower_dims[k - 1], s.upper_dims[d - k], s.gamma_dims[k - 1]]);
    }
    r.row(["lower_equals_gamma", if s.lower_matches_gamma { "true" } else { "false" }]);
    r.row(["upper_equals_gamma", if s.upper_matches_gamma { "true" } else { "false" }]);
    r.row(["verdict", if s.all_equal() { "all-equal" } else { "differ" }]);
    Ok(report_only(r, if s.all_equal() { 0 } else { 1 }))
}

fn classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let nt = make_nt(cfg)?;
    let entries = mab_enumerate(&nt)?;
    let policy = format!("maximality:exhaustive:{DEFAULT_COSET_BOUND}");
    let mut r = Report::new("ideals classify", nt.field(), nt.d(), &policy, None, false);
    r.row(["tag", "dim", "abelian", "lie_ideal", "verdict"]);
    for e in &entries {
        r.row([e.ideal.tag().to_string(), e.ideal.dim().to_string(), e.abelian.to_string(), e.lie_ideal.to_string(), e.verdict.to_string()]);
    }
    if let Err(e @ IdealError::WrongCharacteristic(_)) = mab_family8(&nt) {
        r.row(["note", "family8", "WrongCharacteristic", &e.to_string()]);
    }
    Ok(report_only(r, 0))
}

fn verify_ideal(cfg: &RunConfig, file: &PathBuf) -> Result<Outcome, CliError> {
    let s = parsed(file, format::parse_ideal(&read(file)?))?;
    let nt = s.nt();
    let policy = format!("lemma1:sampled:{}:{}", cfg.samples, cfg.seed);
    let mut r = Report::new("ideals verify", nt.field(), nt.d(), &policy, Some(cfg.seed), false);
    let abelian = is_abelian(&s);
    let lie = is_lie_ideal(&s);
    let maximal = if abelian && lie {
        match maximality_oracle(&s, DEFAULT_COSET_BOUND) {
            Ok(true) => "true",
            Ok(false) => "false",
            Err(_) => "too-large",
        }
    } else {
        "false"
    };
    let lemma = lemma1_suite(&s, cfg.samples, cfg.seed);
    let corr = correspondence_check(&s);
    r.row(["tag", &s.tag().to_string()]);
    r.row(["dim", &s.dim().to_string()]);
    r.row(["abelian", &abelian.to_string()]);
    r.row(["lie_ideal", &lie.to_string()]);
    r.row(["maximal", maximal]);
    r.row(["lemma1", &lemma.passed().to_string(), &format!("checks={}", lemma.checks)]);
    r.row(["correspondence", &corr.to_string()]);
    let ok = abelian && lie && maximal == "true" && lemma.passed() && corr;
    r.row(["verdict", if ok { "passed" } else { "failed" }]);
    Ok(report_only(r, if ok { 0 } else { 1 }))
}

fn count(values: &[u32], n: usize, what: &str) -> Result<(), CliError> {
    if values.len() == n {
        Ok(())
    } else {
        Err(usage(format!("{what} takes {n} values, got {}", values.len())))
    }
}

fn elems(nt: &Nt, values: &[u32]) -> Result<Vec<Fe>, CliError> {
    Ok(values.iter().map(|&v| nt.field().elem(v)).collect::<Result<_, _>>()?)
}

fn make_ideal(cfg: &RunConfig, family: &str, values: &[u32]) -> Result<Outcome, CliError> {
    let nt = make_nt(cfg)?;
    let s: IdealDesc = match family {
        "partition" => {
            count(values, 2, family)?;
            partition(&nt, values[0] as usize, values[1] as usize)?
        }
        "mab2" => {
            count(values, 2, family)?;
            mab2(&nt, values[0] as usize, nt.field().elem(values[1])?)?
        }
        "mab3" => {
            count(values, 2, family)?;
            mab3(&nt, values[0] as usize, nt.field().elem(values[1])?)?
        }
        "gamma" => {
            count(values, 1, family)?;
            IdealDesc::gamma(&nt, values[0] as usize)?
        }
        _ => return Err(usage(format!("unknown ideal family `{family}`"))),
    };
    let mut r = Report::new("ideals make", nt.field(), nt.d(), "none", None, true);
    r.row(["tag", &s.tag().to_string()]);
    r.row(["dim", &s.dim().to_string()]);
    Ok(emit(cfg, r, format::ideal_to_string(&s), 0))
}

fn family_aut(nt: &Nt, family: &str, values: &[u32]) -> Result<AutMap, CliError> {
    let d = nt.d();
    let k = nt.field().k() as usize;
    // Extremal parameters default to (1, 1).
    let pair = |values: &[u32]| -> Result<(Fe, Fe), CliError> {
        if values.is_empty() {
            return Ok((Fe::ONE, Fe::ONE));
        }
        count(values, 2, family)?;
        let v = elems(nt, values)?;
        Ok((v[0], v[1]))
    };
    Ok(match family {
        "identity" => {
            count(values, 0, family)?;
            AutMap::identity(nt)
        }
        "flip" => {
            count(values, 0, family)?;
            AutMap::flip(nt)
        }
        "diag" => {
            count(values, d, family)?;
            AutMap::diag(nt, &elems(nt, values)?)?
        }
        "field" => {
            count(values, 1, family)?;
            AutMap::field(nt, values[0])?
        }
        "inner" => {
            count(values, nt.len(), family)?;
            let v = elems(nt, values)?;
            let positions = (2..=d).flat_map(|i| (1..i).map(move |j| (i, j)));
            let terms: Vec<_> = positions.zip(v).map(|((i, j), x)| (i, j, x)).collect();
            AutMap::inner(nt, &nt.from_terms(&terms)?)?
        }
        "central" => {
            count(values, (d - 1) * k, family)?;
            let v = elems(nt, values)?;
            let lambda: Vec<AdditiveMap> = v.chunks(k).map(|c| AdditiveMap { basis_images: c.to_vec() }).collect();
            AutMap::central(nt, &lambda)?
        }
        "extremal" => {
            let (a1, a2) = pair(values)?;
            extremal(nt, a1, a2)?
        }
        "extremal-odd" => {
            let (a1, a2) = pair(values)?;
            AutMap::extremal_odd(nt, a1, a2)?
        }
        "extremal-even" => {
            let (a1, a2) = pair(values)?;
            AutMap::extremal_even(nt, a1, a2)?
        }
        _ => return Err(usage(format!("unknown automorphism family `{family}`"))),
    })
}

fn make_aut(cfg: &RunConfig, family: &str, values: &[u32]) -> Result<Outcome, CliError> {
    let nt = make_nt(cfg)?;
    let phi = family_aut(&nt, family, values)?;
    let mut r = Report::new("aut make", nt.field(), nt.d(), "none", None, true);
    r.row(["family", family]);
    let vals: Vec<String> = values.iter().map(u32::to_string).collect();
    r.row(["values", if vals.is_empty() { "none".to_string() } else { vals.join(",") }.as_str()]);
    Ok(emit(cfg, r, format::aut_to_string(&phi), 0))
}

fn verify_aut(cfg: &RunConfig, file: &PathBuf, policy: &str) -> Result<Outcome, CliError> {
    let mut phi = parsed(file, format::parse_aut(&read(file)?))?;
    let policy = match policy {
        "sampled" => sampled(cfg),
        other => other.parse::<Policy>().map_err(usage)?,
    };
    let report = phi.verify(policy)?;
    let nt = phi.nt().clone();
    let seed = match policy {
        Policy::Sampled { seed, .. } => Some(seed),
        _ => None,
    };
    let mut r = Report::new("aut verify", nt.field(), nt.d(), &policy.to_string(), seed, false);
    r.row(["abelianization_rank", &report.abelianization_rank.to_string()]);
    r.row(["relations_checked", &report.relations_checked.to_string()]);
    r.row(["pairs_checked", &report.pairs_checked.to_string()]);
    match &report.witness {
        None => r.row(["verdict", "passed"]),
        Some(w) => {
            r.row(["verdict", "failed"]);
            r.row(["witness", &w.to_string()]);
        }
    }
    Ok(report_only(r, if report.passed() { 0 } else { 1 }))
}

fn compose(cfg: &RunConfig, first: &PathBuf, second: &PathBuf) -> Result<Outcome, CliError> {
    let a = parsed(first, format::parse_aut(&read(first)?))?;
    let b = parsed(second, format::parse_aut(&read(second)?))?;
    let c = a.compose(&b)?;
    let nt = c.nt();
    let mut r = Report::new("aut compose", nt.field(), nt.d(), "none", None, true);
    r.row(["first", &first.display().to_string()]);
    r.row(["second", &second.display().to_string()]);
    Ok(emit(cfg, r, format::aut_to_string(&c), 0))
}

fn decompose_file(cfg: &RunConfig, file: &PathBuf) -> Result<Outcome, CliError> {
    let phi = parsed(file, format::parse_aut(&read(file)?))?;
    let nt = phi.nt().clone();
    match decompose(&phi) {
        Ok(dec) => {
            let c = &dec.checks;
            let mut r = Report::new("aut decompose", nt.field(), nt.d(), "relations", None, true);
            r.row(["partitions_preserved", &c.partitions_preserved.to_string()]);
            r.row(["identity_mod_gamma2", &c.identity_mod_gamma2.to_string()]);
            r.row(["identity_mod_last", &c.identity_mod_last.to_string()]);
            r.row(["recomposition", if c.recomposed { "equal" } else { "differs" }]);
            let code = if c.recomposed { 0 } else { 1 };
            Ok(emit(cfg, r, format::decomp_to_string(&dec.word), code))
        }
        Err(DecompError::NotAnAutomorphism { stage, reason }) => {
            let mut r = Report::new("aut decompose", nt.field(), nt.d(), "relations", None, false);
            r.row(["verdict", "not-an-automorphism"]);
            r.row(["stage", &stage.to_string()]);
            r.row(["reason", &reason]);
            Ok(report_only(r, 1))
        }
        Err(e) => Err(e.into()),
    }
}

fn random(cfg: &RunConfig, len: usize, word_out: Option<&PathBuf>) -> Result<Outcome, CliError> {
    let nt = make_nt(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let word = random_word(&nt, len, &mut rng);
    let phi = eval_word(&nt, &word)?;
    let mut r = Report::new("aut random", nt.field(), nt.d(), "none", Some(cfg.seed), true);
    r.row(["len", &len.to_string()]);
    let names: Vec<&str> = word.iter().map(|e| e.name()).collect();
    r.row(["families", &names.join(",")]);
    let word_text = format!("{}{}", r.text, format::word_to_string(&nt, &word));
    let mut out = emit(cfg, r, format::aut_to_string(&phi), 0);
    let word_path = word_out.cloned().or_else(|| {
        cfg.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".word");
            PathBuf::from(s)
        })
    });
    match word_path {
        Some(path) => out.files.push((path, word_text)),
        None => {
            // Both go to stdout: the word as comment lines after the automorphism.
            for line in format::word_to_string(&nt, &word).lines() {
                let _ = writeln!(out.stdout, "# word\t{line}");
            }
        }
    }
    Ok(out)
}
