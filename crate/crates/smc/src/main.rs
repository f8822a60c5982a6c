//! `smc`: command-line front end for smc-core.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Parser, Subcommand, ValueEnum};
use smc_core::coherence::cells::{parse_listing, PEAK_LISTING};
use smc_core::coherence::expansion::EXPANSION_DATA;
use smc_core::coherence::{
    derive_table, expand_kelly, parse_expansions, validate, write_certificate, write_expansions, CellCatalog,
    Certifier, CoherenceError, ExpansionTable, Polygon,
};
use smc_core::rewrite::{normalize_with_budget, DEFAULT_STEP_BUDGET};
use smc_core::{
    local_confluence_report, parse_diagram, render_diagram, verify_termination, Diagram, Format, Interpretation,
    PeakClass, Redex, RenderOptions, RuleSet, Strategy,
};

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0:#}")]
    Input(#[from] anyhow::Error),
    #[error("{0}")]
    Verification(String),
}

type Outcome = Result<String, Failure>;

#[derive(Parser)]
#[command(
    name = "smc",
    version,
    about = "Rewriting and coherence for string diagrams of symmetric monoidal categories"
)]
struct Cli {
    /// Directory with `peaks.txt` and `expansions.txt` replacing the
    /// built-in peak listing and expansion table.
    #[arg(long, global = true, value_name = "DIR")]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normal form of a diagram and the path to it.
    Normalize {
        #[arg(long, default_value = "F")]
        rules: String,
        /// Random strategy with this seed instead of leftmost.
        #[arg(long)]
        seed: Option<u64>,
        expr: String,
    },
    /// Decide whether two diagrams have the same normal form.
    Equal {
        #[arg(long, default_value = "F")]
        rules: String,
        first: String,
        second: String,
    },
    /// Check that every rule strictly decreases the interpretation.
    TerminationCheck {
        #[arg(long, default_value = "F")]
        rules: String,
        /// Interpretation file (`m: 2x+y` lines); defaults to the built-in one.
        #[arg(long)]
        interpretation: Option<PathBuf>,
    },
    /// List the critical peaks with their class and join lengths.
    CriticalPeaks {
        #[arg(long, default_value = "F")]
        rules: String,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Join every critical peak and summarize the classes.
    Confluence {
        #[arg(long, default_value = "F")]
        rules: String,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Certify that all paths of a polygon of morphisms agree.
    Certify {
        #[arg(long, default_value = "F")]
        rules: String,
        /// Polygon file: OBJECT, EDGE and TERMINAL lines.
        #[arg(long, value_name = "FILE")]
        terms: PathBuf,
        /// Keep Kelly and weak Kelly cells instead of expanding them.
        #[arg(long)]
        no_expand: bool,
        /// Write the certificate scripts here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the expansion of a Kelly or weak Kelly cell.
    ExpandKelly {
        #[arg(long, default_value = "F")]
        rules: String,
        /// Peak id (e.g. kelly-3) or source diagram.
        key: Option<String>,
        /// Every entry of the table.
        #[arg(long, conflicts_with = "key")]
        all: bool,
        /// Derive the table from the cells instead of loading it.
        #[arg(long)]
        derive: bool,
    },
    /// Draw diagrams, one expression per line, read from a file or stdin.
    Render {
        #[arg(long, value_enum, default_value = "ascii")]
        format: RenderFormat,
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Ascii,
    Tikz,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn rules(name: &str) -> anyhow::Result<RuleSet> {
    if let Some(r) = RuleSet::by_name(name) {
        return Ok(r);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(anyhow!("unknown rule set {name} (expected M, F, GM or a rule file)"));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    RuleSet::parse(stem, &read(path)?).with_context(|| format!("in {name}"))
}

fn diagram(text: &str) -> anyhow::Result<Diagram> {
    parse_diagram(text).with_context(|| format!("bad diagram {text:?}"))
}

fn budget() -> anyhow::Result<usize> {
    match std::env::var("SMC_STEP_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| anyhow!("SMC_STEP_BUDGET must be a number, got {v:?}")),
        Err(_) => Ok(DEFAULT_STEP_BUDGET),
    }
}

struct Fixtures {
    listing: String,
    expansions: String,
}

impl Fixtures {
    fn load(dir: Option<&Path>) -> anyhow::Result<Fixtures> {
        let mut f = Fixtures { listing: PEAK_LISTING.to_string(), expansions: EXPANSION_DATA.to_string() };
        if let Some(dir) = dir {
            if !dir.is_dir() {
                return Err(anyhow!("fixture directory {} does not exist", dir.display()));
            }
            let listing = dir.join("peaks.txt");
            if listing.exists() {
                f.listing = read(&listing)?;
            }
            let expansions = dir.join("expansions.txt");
            if expansions.exists() {
                f.expansions = read(&expansions)?;
            }
        }
        Ok(f)
    }

    fn catalog(&self, rules: &RuleSet) -> Result<CellCatalog, Failure> {
        parse_listing(&self.listing).context("bad peak listing")?;
        CellCatalog::new(rules, &self.listing)
            .map_err(|e| Failure::Verification(format!("cannot build the cells of {}: {e}", rules.name)))
    }

    fn table(&self, catalog: &CellCatalog) -> Result<ExpansionTable, Failure> {
        parse_expansions(&self.expansions, catalog, true).map_err(|e| match e {
            CoherenceError::Syntax { .. } => Failure::Input(anyhow!("bad expansion table: {e}")),
            _ => Failure::Verification(format!("expansion table does not replay: {e}")),
        })
    }
}

fn label(rules: &RuleSet, r: &Redex) -> String {
    format!("{}@{}", rules.rules[r.rule].name, r.anchor())
}

fn run(cli: Cli) -> Outcome {
    let fixtures = Fixtures::load(cli.fixtures.as_deref())?;
    let mut out = String::new();
    match cli.command {
        Command::Normalize { rules: name, seed, expr } => {
            let rules = rules(&name)?;
            let phi = diagram(&expr)?;
            let strategy = seed.map_or(Strategy::Leftmost, Strategy::Random);
            let (nf, path) = normalize_with_budget(&phi, &rules, strategy, budget()?)
                .map_err(|e| Failure::Verification(e.to_string()))?;
            let _ = writeln!(out, "{nf}");
            for (i, s) in path.steps.iter().enumerate() {
                let _ = writeln!(out, "  {}. {}: {} => {}", i + 1, label(&rules, &s.redex), s.source, s.target);
            }
        }
        Command::Equal { rules: name, first, second } => {
            let rules = rules(&name)?;
            let (a, b) = (diagram(&first)?, diagram(&second)?);
            let nf = |d: &Diagram| {
                normalize_with_budget(d, &rules, Strategy::Leftmost, budget()?)
                    .map(|r| r.0)
                    .map_err(|e| Failure::Verification(e.to_string()))
            };
            let (na, nb) = (nf(&a)?, nf(&b)?);
            if na == nb {
                let _ = writeln!(out, "equal: both normalize to {na}");
            } else {
                return Err(Failure::Verification(format!("not equal: {na} vs {nb}")));
            }
        }
        Command::TerminationCheck { rules: name, interpretation } => {
            let rules = rules(&name)?;
            let interp = match interpretation {
                Some(p) => Interpretation::parse(&read(&p)?).with_context(|| format!("in {}", p.display()))?,
                None => Interpretation::default(),
            };
            let report = verify_termination(&rules, &interp);
            out.push_str(&report.table());
            if !report.all_pass() {
                print!("{out}");
                return Err(Failure::Verification(format!(
                    "{} rules are not decreasing",
                    report.rules.len() - report.passed()
                )));
            }
        }
        Command::CriticalPeaks { rules: name, bound } => {
            let rules = rules(&name)?;
            let names = parse_listing(&fixtures.listing).context("bad peak listing")?;
            let report = local_confluence_report(&rules, bound.unwrap_or(rules.max_lhs_gates()), budget()?)
                .map_err(|e| Failure::Input(anyhow!(e)))?;
            for o in &report.outcomes {
                let (a, b) = (label(&rules, &o.peak.left), label(&rules, &o.peak.right));
                let name = names
                    .iter()
                    .find(|l| {
                        let mut theirs: Vec<String> = l.redexes.iter().map(|(r, k)| format!("{r}@{k}")).collect();
                        let mut mine = vec![a.clone(), b.clone()];
                        theirs.sort();
                        mine.sort();
                        l.source == o.peak.source && theirs == mine
                    })
                    .map_or("-", |l| l.name.as_str());
                let verdict = match &o.result {
                    Ok((j, class)) => {
                        format!("{}  join {}/{}", class.name(), j.left_path.len(), j.right_path.len())
                    }
                    Err(e) => format!("not-joinable  {e}"),
                };
                let _ = writeln!(out, "{}  {a} {b}  {name}  {verdict}", o.peak.source);
            }
            let _ = writeln!(out, "{} peaks", report.outcomes.len());
            if !report.confluent() {
                print!("{out}");
                return Err(Failure::Verification(format!("{} peaks are not joinable", report.failures().count())));
            }
        }
        Command::Confluence { rules: name, bound } => {
            let rules = rules(&name)?;
            let report = local_confluence_report(&rules, bound.unwrap_or(rules.max_lhs_gates()), budget()?)
                .map_err(|e| Failure::Input(anyhow!(e)))?;
            let counts: Vec<String> = PeakClass::ALL.iter().map(|&c| report.count(c).to_string()).collect();
            let _ = writeln!(out, "{} peaks, {}", report.outcomes.len(), counts.join("/"));
            if !report.confluent() {
                for o in report.failures() {
                    let e = o.result.as_ref().err().map(|e| e.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "failing peak {} ({}, {}): {e}",
                        o.peak.source,
                        label(&rules, &o.peak.left),
                        label(&rules, &o.peak.right)
                    );
                }
                print!("{out}");
                return Err(Failure::Verification(format!("{} is not locally confluent", rules.name)));
            }
        }
        Command::Certify { rules: name, terms, no_expand, output } => {
            let rules = rules(&name)?;
            let polygon = Polygon::parse(&read(&terms)?).with_context(|| format!("in {}", terms.display()))?;
            let catalog = fixtures.catalog(&rules)?;
            let table = if no_expand { ExpansionTable::default() } else { fixtures.table(&catalog)? };
            let mut certifier =
                if no_expand { Certifier::new(&catalog) } else { Certifier::expanding(&catalog, &table) };
            let certs = polygon.certify(&mut certifier).map_err(|e| Failure::Verification(e.to_string()))?;
            if certs.is_empty() {
                return Err(Failure::Input(anyhow!("the polygon has no two paths with a common start")));
            }
            let mut script = String::new();
            for c in &certs {
                validate(&c.certificate, &catalog)
                    .map_err(|e| Failure::Verification(format!("certificate does not replay: {e}")))?;
                let _ = writeln!(script, "# {} = {}", c.first.join(","), c.second.join(","));
                script.push_str(&write_certificate(&c.certificate, &rules, Some(&catalog)));
                let cells: Vec<String> = c
                    .certificate
                    .cell_counts()
                    .iter()
                    .filter(|(n, _)| !n.is_plumbing())
                    .map(|(n, k)| format!("{n} x{k}"))
                    .collect();
                let _ = writeln!(
                    out,
                    "{} = {}: {} surgeries, cells {}",
                    c.first.join(","),
                    c.second.join(","),
                    c.certificate.surgeries.len(),
                    if cells.is_empty() { "none".to_string() } else { cells.join(", ") }
                );
            }
            match output {
                Some(path) => {
                    std::fs::write(&path, script).with_context(|| format!("cannot write {}", path.display()))?;
                }
                None => out = script,
            }
        }
        Command::ExpandKelly { rules: name, key, all, derive } => {
            let rules = rules(&name)?;
            let catalog = fixtures.catalog(&rules)?;
            let table = if derive {
                let (f, m) = (fixtures.catalog(&RuleSet::symmetric())?, fixtures.catalog(&RuleSet::monoidal())?);
                let entries = derive_table(&f, &m).map_err(|e| Failure::Verification(e.to_string()))?;
                let text = write_expansions(&entries, &f);
                parse_expansions(&text, &catalog, true).map_err(|e| Failure::Verification(e.to_string()))?
            } else {
                fixtures.table(&catalog)?
            };
            let ids: Vec<String> = match (key, all) {
                (Some(key), _) => {
                    let cert = expand_kelly(&key, &table, &catalog).map_err(|e| Failure::Input(anyhow!(e)))?;
                    let id = table
                        .ids()
                        .find(|id| table.certificate(id, &catalog).ok().as_ref() == Some(&cert))
                        .cloned()
                        .unwrap_or(key);
                    vec![id]
                }
                (None, true) => {
                    catalog.cells.iter().filter(|c| table.get(&c.id).is_some()).map(|c| c.id.clone()).collect()
                }
                (None, false) => return Err(Failure::Input(anyhow!("give a peak id or source, or --all"))),
            };
            let mut entries = Vec::new();
            for id in ids {
                let cert = expand_kelly(&id, &table, &catalog).map_err(|e| Failure::Input(anyhow!(e)))?;
                validate(&cert, &catalog).map_err(|e| Failure::Verification(format!("{id}: {e}")))?;
                entries.push((id, cert));
            }
            out = write_expansions(&entries, &catalog);
        }
        Command::Render { format, file } => {
            let text = match file {
                Some(p) => read(&p)?,
                None => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s).context("cannot read stdin")?;
                    s
                }
            };
            let options = RenderOptions::new(match format {
                RenderFormat::Ascii => Format::Ascii,
                RenderFormat::Tikz => Format::Tikz,
            });
            let exprs: Vec<&str> =
                text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
            if exprs.is_empty() {
                return Err(Failure::Input(anyhow!("no expressions to render")));
            }
            let mut drawn = Vec::new();
            for e in exprs {
                drawn.push(render_diagram(&diagram(e)?, &options));
            }
            out = drawn.join("\n");
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(e @ Failure::Input(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
