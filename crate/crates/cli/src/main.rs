use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use bilgrowth::bounds::{bounds_report, LowerCertificate};
use bilgrowth::cache::FrontierCache;
use bilgrowth::depgraph::{build_graph, top_component_check};
use bilgrowth::growth::{brute_force, frontier_dp_with, ratio_check, table_from_frontiers, FrontierOptions, GrowthTable, Norm};
use bilgrowth::numerics::Mode;
use bilgrowth::patterns::{search_patterns_with, SearchOptions, Strategy};
use bilgrowth::registry;
use bilgrowth::system::System;
use bilgrowth::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bilgrowth", version, about = "Growth rates of bilinear maps")]
struct Cli {
    /// Emit JSON instead of human-readable tables.
    #[arg(long, global = true)]
    json: bool,
    /// Emit two columns `n  g(n)^(1/n)` for plotting.
    #[arg(long, global = true)]
    plot_data: bool,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Stamp reports with the generation time.
    #[arg(long, global = true)]
    timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact growth table g_i(n) with witnesses and the adjacent-ratio check.
    Analyze {
        /// System file, or `builtin:NAME`.
        system: String,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
    },
    /// Ranked linear patterns with certified rates.
    Patterns {
        /// System file, or `builtin:NAME`.
        system: String,
        #[arg(long, default_value_t = 6)]
        max_leaves: usize,
        #[arg(long, default_value = "exhaustive")]
        strategy: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Certified lower and upper bounds on the growth rate.
    Bounds {
        /// System file, or `builtin:NAME`.
        system: String,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, default_value_t = 6)]
        max_leaves: usize,
    },
    /// Dependency graph components and order.
    Graph {
        /// System file, or `builtin:NAME`.
        system: String,
        /// Write the graph in DOT format to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Brute-force growth table (any sign class).
    Oracle {
        /// System file, or `builtin:NAME`.
        system: String,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
    },
    /// Check the built-in examples against their expected facts.
    Verify { names: Vec<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

enum Failure {
    Usage(String),
    Verification(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io(_) => Failure::Usage(e.to_string()),
            e => Failure::Compute(e),
        }
    }
}

fn load(arg: &str) -> Result<System, Failure> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return registry::lookup(name)
            .map(|e| e.system())
            .ok_or_else(|| Failure::Usage(format!("unknown built-in system `{name}`")));
    }
    let bytes = std::fs::read(Path::new(arg)).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?;
    System::parse(&bytes).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
}

struct Out {
    json: bool,
    plot: bool,
    stamp: Option<u64>,
}

impl Out {
    fn emit_json(&self, mut v: Value) -> String {
        if let (Some(t), Value::Object(m)) = (self.stamp, &mut v) {
            m.insert("generated_at".into(), json!(t));
        }
        let mut s = serde_json::to_string_pretty(&v).expect("serializable");
        s.push('\n');
        s
    }

    fn header(&self) -> String {
        self.stamp.map(|t| format!("# generated_at {t}\n")).unwrap_or_default()
    }
}

fn plot_data(rates: &[(usize, f64)]) -> String {
    rates.iter().map(|(n, v)| format!("{n}\t{v:.12}\n")).collect()
}

fn table_json(t: &GrowthTable) -> Value {
    json!({
        "mode": t.mode,
        "kind": t.kind,
        "rows": t.rows.iter().map(|r| json!({
            "n": r.n,
            "g_i": r.per_entry.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "g": r.max.to_string(),
            "witnesses": r.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn analyze(out: &Out, sys: System, n_max: usize, mode: ModeArg) -> Result<String, Failure> {
    let float = matches!(mode, ModeArg::Float);
    if n_max == 0 {
        return Err(Failure::Usage("--n-max must be at least 1".into()));
    }
    let general = !sys.is_nonneg();
    let (table, ratio) = if !general {
        let sys = if float { sys.to_mode(Mode::Float) } else { sys };
        let cache = FrontierCache::from_env()?;
        let f = frontier_dp_with(&sys, n_max, &FrontierOptions::default(), cache.as_ref())?;
        let t = table_from_frontiers(&sys, &f);
        let r = if n_max >= 2 { Some(ratio_check(&t, &sys)?) } else { None };
        (t, r)
    } else {
        let sys = if float { sys.to_mode(Mode::Float) } else { sys };
        (brute_force(&sys, n_max, Norm::MaxAbs)?, None)
    };
    if out.plot {
        return Ok(out.header() + &plot_data(&table.empirical_rates()));
    }
    if out.json {
        let mut v = table_json(&table);
        v["ratio_check"] = serde_json::to_value(&ratio).expect("serializable");
        if float {
            v["note"] = json!("uncertified arithmetic");
        }
        return Ok(out.emit_json(v));
    }
    let mut s = out.header();
    if float {
        s.push_str("# uncertified arithmetic\n");
    }
    s.push_str(&table.to_tsv());
    match ratio {
        Some(r) => {
            writeln!(
                s,
                "# ratio check g_i(n+1) <= {} g_i(n): {} (max observed {:.6})",
                r.constant,
                if r.holds { "holds" } else { "VIOLATED" },
                r.max_observed
            )
            .unwrap();
        }
        None if general => s.push_str("# general sign class: g_i(n) is the largest |x_i|\n"),
        None => {}
    }
    Ok(s)
}

fn patterns(out: &Out, sys: System, max_leaves: usize, strategy: &str, tol: f64) -> Result<String, Failure> {
    let strategy: Strategy = strategy.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let opts = SearchOptions { tol, ..SearchOptions::default() };
    let (search, partial) = match search_patterns_with(&sys, max_leaves, strategy, &opts) {
        Ok(s) => (s, false),
        Err(Error::SearchBudget { partial, .. }) => (*partial, true),
        Err(e) => return Err(e.into()),
    };
    if out.json {
        let mut v = serde_json::to_value(&search).expect("serializable");
        v["partial"] = json!(partial);
        return Ok(out.emit_json(v));
    }
    let mut s = out.header();
    if partial {
        s.push_str("# budget exhausted: partial results\n");
    }
    s.push_str("rank\trate_lo\trate_hi\tleaves\ttree\tmark\tchar_poly\n");
    for (i, r) in search.ranked.iter().enumerate() {
        writeln!(
            s,
            "{}\t{:.12}\t{:.12}\t{}\t{}\t{}\t{}",
            i + 1,
            r.rate.0,
            r.rate.1,
            r.pattern.leaves(),
            r.pattern.tree(),
            r.pattern.mark(),
            r.certificate.as_ref().map_or("-".to_string(), |p| p.to_string())
        )
        .unwrap();
    }
    Ok(s)
}

fn bounds(out: &Out, sys: System, n_max: usize, max_leaves: usize) -> Result<String, Failure> {
    let r = bounds_report(&sys, n_max, max_leaves)?;
    if out.plot {
        return Ok(out.header() + &plot_data(&r.empirical));
    }
    if out.json {
        return Ok(out.emit_json(serde_json::to_value(&r).expect("serializable")));
    }
    let mut s = out.header();
    let via = match &r.lower.certificate {
        LowerCertificate::Pattern(p) => format!("pattern {} marked {}", p.pattern.tree(), p.pattern.mark()),
        LowerCertificate::Supermultiplicative { entry, n, g } => {
            format!("g_{entry}({n}) = {g}, entry {entry} supermultiplicative on the table")
        }
        LowerCertificate::None => "none".into(),
    };
    writeln!(s, "lower\t{:.12}\t{via}", r.lower.value).unwrap();
    let w: Vec<String> = r.upper.certificate.w.entries().iter().map(|x| x.to_string()).collect();
    writeln!(s, "upper\t{:.12}\tmu = {}, w = ({})", r.upper.value, r.upper.certificate.mu, w.join(", ")).unwrap();
    s.push_str("# empirical g(n)^(1/n), uncertified\n");
    for (n, v) in &r.empirical {
        writeln!(s, "{n}\t{v:.12}").unwrap();
    }
    Ok(s)
}

fn graph(out: &Out, sys: System, dot: Option<PathBuf>) -> Result<String, Failure> {
    let g = build_graph(&sys);
    if let Some(path) = dot {
        std::fs::write(&path, g.to_dot()).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let top = if sys.is_nonneg() {
        let t = bilgrowth::growth::growth_table(&sys, 12)?;
        Some(top_component_check(&g, &t))
    } else {
        None
    };
    if out.json {
        let mut v = g.to_json();
        v["top_component"] = serde_json::to_value(&top).expect("serializable");
        return Ok(out.emit_json(v));
    }
    let mut s = out.header();
    if g.advisory {
        s.push_str("# general sign class: edges use nonzero coefficients (advisory)\n");
    }
    for (i, c) in g.components().iter().enumerate() {
        let vs: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(s, "C{}\t{{{}}}", i + 1, vs.join(", ")).unwrap();
    }
    for (a, b) in g.order() {
        writeln!(s, "C{} > C{}", a + 1, b + 1).unwrap();
    }
    for e in g.edges() {
        writeln!(s, "{} -> {}\t{}", e.from + 1, e.to + 1, e.label()).unwrap();
    }
    if let Some(top) = top {
        match (&top.component, &top.skipped) {
            (Some(_), _) => {
                for (v, r) in &top.min_ratios {
                    writeln!(s, "min_n g_{v}(n)/g(n)\t{r:.6}").unwrap();
                }
            }
            (None, Some(why)) => writeln!(s, "# top-component check skipped: {why}").unwrap(),
            (None, None) => {}
        }
    }
    Ok(s)
}

fn oracle(out: &Out, sys: System, n_max: usize) -> Result<String, Failure> {
    let t = brute_force(&sys, n_max, Norm::MaxAbs)?;
    if out.plot {
        return Ok(out.header() + &plot_data(&t.empirical_rates()));
    }
    if out.json {
        return Ok(out.emit_json(table_json(&t)));
    }
    Ok(out.header() + &t.to_tsv())
}

fn verify(out: &Out, names: Vec<String>) -> Result<String, Failure> {
    let names: Vec<String> = if names.is_empty() {
        registry::EXAMPLES.iter().map(|e| e.name.to_string()).collect()
    } else {
        names
    };
    let mut checks = Vec::new();
    for n in &names {
        match registry::verify(n) {
            Ok(c) => checks.extend(c),
            Err(Error::Domain(m)) => return Err(Failure::Usage(m)),
            Err(e) => return Err(e.into()),
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let text = if out.json {
        out.emit_json(json!({ "checks": checks, "failed": failed }))
    } else {
        let mut s = out.header();
        for c in &checks {
            let detail = if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) };
            writeln!(s, "{} {}: {}{}", if c.passed { "PASS" } else { "FAIL" }, c.example, c.check, detail).unwrap();
        }
        s
    };
    if failed > 0 {
        print!("{text}");
        return Err(Failure::Verification(format!("{failed} check(s) failed")));
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let out = Out {
        json: cli.json,
        plot: cli.plot_data,
        stamp: cli
            .timestamp
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())),
    };
    match cli.command {
        Command::Analyze { system, n_max, mode } => analyze(&out, load(&system)?, n_max, mode),
        Command::Patterns { system, max_leaves, strategy, tol } => patterns(&out, load(&system)?, max_leaves, &strategy, tol),
        Command::Bounds { system, n_max, max_leaves } => bounds(&out, load(&system)?, n_max, max_leaves),
        Command::Graph { system, dot } => graph(&out, load(&system)?, dot),
        Command::Oracle { system, n_max } => oracle(&out, load(&system)?, n_max),
        Command::Verify { names } => verify(&out, names),
    }
}

fn report_error(json: bool, kind: &str, message: &str) {
    if json {
        eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    } else {
        eprintln!("error: {message}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(text) => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            report_error(json, "usage", &m);
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            report_error(json, "verification", &m);
            ExitCode::from(1)
        }
        Err(Failure::Compute(e)) => {
            report_error(json, "compute", &e.to_string());
            ExitCode::from(1)
        }
    }
}
