use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use twoassoc::associahedron::{enumerate_kr, KCounter};
use twoassoc::audit::{
    count_table, eulerian_checks, run_profile, wn_eulerian_checks, AuditReport, Oracles, Profile,
};
use twoassoc::cache::CountCache;
use twoassoc::series::{solve_f, SeriesSolver, TruncatedSeries};
use twoassoc::two_assoc::{enumerate_wn_with, Limits, NVector, WCounter};
use twoassoc::{RankedPoset, Tree};

#[derive(Parser)]
#[command(
    name = "twoassoc",
    version,
    about = "Face posets of associahedra and 2-associahedra, with exact count and Eulerian checks"
)]
struct Cli {
    /// Directory for the count cache (overrides TWOASSOC_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Neither read nor write the count cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The associahedron K_r.
    Assoc {
        #[command(subcommand)]
        action: AssocAction,
    },
    /// The 2-associahedron W_n.
    Wn {
        #[command(subcommand)]
        action: WnAction,
    },
    /// Face counts of W_n by tree and rank from enumeration, recurrence and series.
    Counts {
        #[arg(long)]
        n: NVector,
        /// Series truncation degree (default |n|).
        #[arg(long)]
        max_degree: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Generating functions.
    Gf {
        #[command(subcommand)]
        action: GfAction,
    },
    /// Verification commands.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
    /// cd-index of the completed poset; runs the Eulerian check first.
    CdIndex {
        #[command(flatten)]
        target: Target,
    },
    /// Runs an audit profile.
    Audit {
        #[arg(long, value_enum, default_value_t = ProfileArg::Desk)]
        profile: ProfileArg,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum AssocAction {
    Enumerate {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=9))]
        r: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum WnAction {
    Enumerate {
        #[arg(long)]
        n: NVector,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Give up beyond this many faces.
        #[arg(long, default_value_t = 250_000)]
        max_faces: usize,
    },
}

#[derive(Subcommand)]
enum GfAction {
    Solve {
        /// Tree in bracket notation, e.g. "(.(..))"; omit for f.
        #[arg(long)]
        tree: Option<Tree>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=40))]
        max_degree: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum VerifyAction {
    /// Full interval, diamond and Möbius checks on the completed poset.
    Eulerian {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Points per line for W_n.
    #[arg(long)]
    n: Option<NVector>,
    /// Number of leaves for K_r.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=8))]
    r: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Smoke,
}

/// Exit status and everything destined for stdout.
struct Outcome {
    text: String,
    ok: bool,
}

enum Failure {
    Input(String),
    Runtime(String),
}

type Run = Result<Outcome, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cache = open_cache(&cli);
    let counter = WCounter::new();
    if let Some(c) = cache.as_mut() {
        if let Err(e) = c.load_into(&counter) {
            eprintln!("warning: cannot read {}: {e}", c.path().display());
        }
        for w in c.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let (result, counter) = dispatch(cli.command, counter);
    if let Some(c) = cache.as_mut() {
        if let Err(e) = c.store_from(&counter) {
            eprintln!("warning: cannot write {}: {e}", c.path().display());
        }
    }
    match result {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn open_cache(cli: &Cli) -> Option<CountCache> {
    if cli.no_cache {
        return None;
    }
    let dir = cli.cache_dir.clone().or_else(CountCache::default_dir)?;
    match CountCache::open(&dir) {
        Ok(c) => Some(c),
        Err(e) => {
            eprintln!("warning: cache disabled, cannot use {}: {e}", dir.display());
            None
        }
    }
}

/// Runs one command; the counter comes back so new values reach the cache.
fn dispatch(command: Command, counter: WCounter) -> (Run, WCounter) {
    match command {
        Command::Assoc {
            action: AssocAction::Enumerate { r, format },
        } => {
            let run = assoc_enumerate(r as usize, format, counter.k_counter());
            (run, counter)
        }
        Command::Wn {
            action:
                WnAction::Enumerate {
                    n,
                    format,
                    max_faces,
                },
        } => (wn_enumerate(&n, format, max_faces), counter),
        Command::Counts {
            n,
            max_degree,
            format,
        } => {
            let oracles = Oracles::with_counter(counter);
            let run = counts(&n, max_degree.unwrap_or(n.total()), format, &oracles);
            (run, oracles.into_counter())
        }
        Command::Gf {
            action:
                GfAction::Solve {
                    tree,
                    max_degree,
                    format,
                },
        } => (gf_solve(tree, max_degree, format), counter),
        Command::Verify {
            action: VerifyAction::Eulerian { target, format },
        } => {
            let run = verify(&target).and_then(|(_, checks)| {
                let report = AuditReport::from_checks(checks);
                Ok(Outcome {
                    ok: report.passed(),
                    text: render_report(&report, format)?,
                })
            });
            (run, counter)
        }
        Command::CdIndex { target } => (cd_index(&target), counter),
        Command::Audit { profile, format } => {
            let profile = match profile {
                ProfileArg::Desk => Profile::Desk,
                ProfileArg::Smoke => Profile::Smoke,
            };
            let oracles = Oracles::with_counter(counter);
            let report = run_profile(profile, &oracles);
            let run = render_report(&report, format).map(|text| Outcome {
                ok: report.passed(),
                text,
            });
            (run, oracles.into_counter())
        }
    }
}

fn render_report(report: &AuditReport, format: Format) -> Result<String, Failure> {
    match format {
        Format::Table => Ok(report.to_table()),
        Format::Json => Ok(report.to_json() + "\n"),
        Format::Dot => Err(Failure::Input("reports come as table or json".into())),
    }
}

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(headers.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

fn poset_output(poset: &RankedPoset, format: Format, table_text: impl FnOnce() -> String) -> String {
    match format {
        Format::Table => table_text(),
        Format::Json => poset.to_json() + "\n",
        Format::Dot => poset.to_dot(),
    }
}

fn assoc_enumerate(r: usize, format: Format, k: &KCounter) -> Run {
    let kr = enumerate_kr(r).map_err(|e| Failure::Runtime(e.to_string()))?;
    let f = solve_f(r as u32).map_err(|e| Failure::Runtime(e.to_string()))?;
    let counts = kr.poset.rank_counts();
    let top = (r as i64 - 2).max(0);
    let mut ok = true;
    let rows: Vec<Vec<String>> = (0..=top)
        .map(|m| {
            let faces = BigInt::from(counts.get(&m).copied().unwrap_or(0));
            let recurrence = k.count_k(m as usize, r);
            let series = f.coefficient(m, &[r as u32]).unwrap_or_default();
            let agree = faces == recurrence && recurrence == series;
            ok &= agree;
            vec![
                m.to_string(),
                faces.to_string(),
                recurrence.to_string(),
                series.to_string(),
                if agree { "AGREE" } else { "DISAGREE" }.to_string(),
            ]
        })
        .collect();
    let text = poset_output(&kr.poset, format, || {
        let mut out = format!("K_{r}: {} faces, dimension {top}\n", kr.poset.len());
        out.push_str(&table(&["rank", "faces", "count_K", "solve_f", "status"], &rows));
        out
    });
    Ok(Outcome { text, ok })
}

fn wn_enumerate(n: &NVector, format: Format, max_faces: usize) -> Run {
    let limits = Limits {
        max_faces,
        ..Limits::default()
    };
    let w = enumerate_wn_with(n, limits).map_err(|e| match e {
        twoassoc::two_assoc::TwoAssocError::TooLarge(_) => Failure::Input(e.to_string()),
        e => Failure::Runtime(e.to_string()),
    })?;
    let text = poset_output(&w.poset, format, || {
        let mut out = format!(
            "W_({n}): {} faces, dimension {}\n",
            w.poset.len(),
            n.top_dim()
        );
        let counts: Vec<Vec<String>> = w
            .poset
            .rank_counts()
            .into_iter()
            .map(|(rank, c)| vec![rank.to_string(), c.to_string()])
            .collect();
        out.push_str(&table(&["rank", "faces"], &counts));
        out.push('\n');
        let faces: Vec<Vec<String>> = (0..w.poset.len())
            .map(|x| {
                vec![
                    x.to_string(),
                    w.poset.rank(x).to_string(),
                    w.poset.label(x).to_string(),
                ]
            })
            .collect();
        out.push_str(&table(&["id", "rank", "face"], &faces));
        out
    });
    Ok(Outcome { text, ok: true })
}

fn counts(n: &NVector, max_degree: u32, format: Format, oracles: &Oracles) -> Run {
    let rows = count_table(n, max_degree, oracles).map_err(Failure::Input)?;
    let ok = rows.iter().all(|r| r.agree());
    let text = match format {
        Format::Table => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.tree.clone(),
                        r.m.to_string(),
                        r.enumerated.to_string(),
                        r.recurrence.to_string(),
                        r.series.to_string(),
                        if r.agree() { "AGREE" } else { "DISAGREE" }.to_string(),
                    ]
                })
                .collect();
            format!("W_({n}), series truncated at degree {max_degree}\n")
                + &table(
                    &["tree", "m", "enumerated", "count_W", "series", "status"],
                    &body,
                )
        }
        Format::Json => {
            let doc = serde_json::json!({
                "n": n.entries(),
                "max_degree": max_degree,
                "rows": rows,
                "agree": ok,
            });
            serde_json::to_string_pretty(&doc).expect("count tables serialise") + "\n"
        }
        Format::Dot => return Err(Failure::Input("counts come as table or json".into())),
    };
    Ok(Outcome { text, ok })
}

fn monomial(n: &[u32]) -> String {
    if n.len() == 1 {
        return match n[0] {
            1 => "x".to_string(),
            k => format!("x^{k}"),
        };
    }
    let parts: Vec<String> = n
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| match e {
            1 => format!("x{}", i + 1),
            e => format!("x{}^{e}", i + 1),
        })
        .collect();
    parts.join(" ")
}

fn gf_solve(tree: Option<Tree>, max_degree: u32, format: Format) -> Run {
    let series: TruncatedSeries = match &tree {
        None => solve_f(max_degree).map_err(|e| Failure::Runtime(e.to_string()))?,
        Some(t) => {
            let solver = SeriesSolver::new(max_degree).map_err(|e| Failure::Input(e.to_string()))?;
            let s = solver.solve(t).map_err(|e| Failure::Runtime(e.to_string()))?;
            (*s).clone()
        }
    };
    let text = match format {
        Format::Table => {
            let name = match &tree {
                None => "f".to_string(),
                Some(t) => format!("F_{t}"),
            };
            let rows: Vec<Vec<String>> = series
                .terms()
                .iter()
                .map(|(n, poly)| vec![monomial(n), poly.to_string()])
                .collect();
            format!("{name} to total degree {max_degree}\n") + &table(&["monomial", "coefficient"], &rows)
        }
        Format::Json => series.to_json() + "\n",
        Format::Dot => return Err(Failure::Input("series come as table or json".into())),
    };
    Ok(Outcome { text, ok: true })
}

/// The completed poset and its Eulerian checks.
fn verify(target: &Target) -> Result<(RankedPoset, Vec<twoassoc::audit::Check>), Failure> {
    match (&target.n, target.r) {
        (Some(n), _) => {
            let w = twoassoc::two_assoc::enumerate_wn(n).map_err(|e| Failure::Runtime(e.to_string()))?;
            let checks = wn_eulerian_checks(&format!("n=({n})"), &w);
            let completed = w
                .poset
                .complete_with_min(-1)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            Ok((completed, checks))
        }
        (None, Some(r)) => {
            let k = enumerate_kr(r as usize).map_err(|e| Failure::Runtime(e.to_string()))?;
            let completed = k
                .poset
                .complete_with_min(-1)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            let checks = eulerian_checks(&format!("r={r}"), &completed);
            Ok((completed, checks))
        }
        (None, None) => Err(Failure::Input("pass --n or --r".into())),
    }
}

fn cd_index(target: &Target) -> Run {
    let (completed, checks) = verify(target)?;
    let report = AuditReport::from_checks(checks);
    if !report.passed() {
        let mut msg = String::from("refusing to compute the cd-index: Eulerian verification failed\n");
        for c in report.failures() {
            let _ = writeln!(msg, "  {} {}: expected {}, observed {}", c.name, c.instance, c.expected, c.observed);
        }
        return Err(Failure::Runtime(msg.trim_end().to_string()));
    }
    let cd = completed
        .cd_index()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(Outcome {
        text: format!("{cd}\n"),
        ok: true,
    })
}
