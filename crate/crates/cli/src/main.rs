use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use twistdesc::checks::{run_checks, CheckLevel};
use twistdesc::{parse_correlator, CharnumQuery, ConditionSpec, Engine, Error, ExactRational, MemoCache, TableName};

#[derive(Parser)]
#[command(name = "twistdesc", version, about = "Exact twisted descendants and characteristic numbers of rational curves")]
struct Cli {
    /// Cache file, loaded before and written after the command.
    #[arg(long, global = true, env = "TWISTDESC_CACHE")]
    cache: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Plain,
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a correlator such as `tau[c=3]^5 tau[m=1,c=2]`.
    Eval {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
        expr: String,
    },
    /// Count rational curves of degree d in P^r meeting the given conditions.
    Charnum {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        d: u32,
        /// Pass through a general linear subspace of codimension k.
        #[arg(long, value_name = "K")]
        incidence: Vec<u32>,
        /// Tangent to a hyperplane, at a point of a general codimension k+1 subspace of it.
        #[arg(long, value_name = "K")]
        tangent: Vec<u32>,
        #[arg(long, value_name = "N", default_value_t = 0)]
        points: u32,
        #[arg(long, value_name = "N", default_value_t = 0)]
        lines: u32,
        #[arg(long, value_name = "N", default_value_t = 0)]
        tangent_planes: u32,
        #[arg(long, value_name = "N", default_value_t = 0)]
        tangent_at_line: u32,
        #[arg(long, value_name = "N", default_value_t = 0)]
        tangent_at_point: u32,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
    },
    /// Reproduce one of the twisted-cubic tables.
    Table {
        #[arg(value_parser = parse_table)]
        name: TableName,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
    },
    /// Run the randomized identity suites.
    Check {
        #[arg(value_parser = parse_level)]
        level: CheckLevel,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
}

fn parse_table(s: &str) -> Result<TableName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_level(s: &str) -> Result<CheckLevel, String> {
    s.parse()
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::Io(_) | Error::CacheFormat { .. } => 1,
        _ => 3,
    }
}

fn rational_json(v: &ExactRational) -> serde_json::Value {
    json!({ "num": v.numer().to_string(), "den": v.denom().to_string() })
}

fn repeat(n: u32, cond: ConditionSpec) -> impl Iterator<Item = ConditionSpec> {
    std::iter::repeat_n(cond, n as usize)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let cache = Arc::new(MemoCache::new());
    if let Some(path) = &cli.cache {
        if path.exists() {
            cache.load(path)?;
        }
    }
    let engine = Engine::with_cache(cache.clone());
    let code = match cli.command {
        Command::Eval { r, d, format, expr } => {
            let corr = parse_correlator(&expr, r, d)?;
            let value = engine.eval_twisted(&corr)?;
            let top = corr.is_top();
            if !top {
                eprintln!(
                    "warning: not top-dimensional: integrand codimension {}, space dimension {}",
                    corr.codimension(),
                    corr.dimension()
                );
            }
            match format {
                Format::Plain => println!("{value}"),
                Format::Tsv => println!("query\tr\td\tvalue\n{}\t{r}\t{d}\t{value}", expr.trim()),
                Format::Json => println!(
                    "{}",
                    json!({
                        "query": expr.trim(),
                        "r": r,
                        "d": d,
                        "value": rational_json(&value),
                        "top_dimensional": top,
                        "cache_hits": cache.hits(),
                    })
                ),
            }
            ExitCode::SUCCESS
        }
        Command::Charnum { r, d, incidence, tangent, points, lines, tangent_planes, tangent_at_line, tangent_at_point, format } => {
            let mut conditions: Vec<ConditionSpec> = incidence.into_iter().map(ConditionSpec::incidence).collect();
            conditions.extend(tangent.into_iter().map(ConditionSpec::tangency));
            conditions.extend(repeat(points, ConditionSpec::incidence(r)));
            if lines > 0 {
                if r < 2 {
                    return Err(Error::InvalidCondition("--lines needs r >= 2".into()));
                }
                conditions.extend(repeat(lines, ConditionSpec::incidence(r - 1)));
            }
            conditions.extend(repeat(tangent_planes, ConditionSpec::tangency(0)));
            if tangent_at_line > 0 {
                if r < 2 {
                    return Err(Error::InvalidCondition("--tangent-at-line needs r >= 2".into()));
                }
                conditions.extend(repeat(tangent_at_line, ConditionSpec::tangency(r - 2)));
            }
            if tangent_at_point > 0 {
                conditions.extend(repeat(tangent_at_point, ConditionSpec::tangency(r.saturating_sub(1))));
            }
            let q = CharnumQuery::new(r, d, conditions)?;
            let n = engine.characteristic_number(&q)?;
            let kind = if q.is_enumerative() { "characteristic number" } else { "intersection number" };
            match format {
                Format::Plain => {
                    println!("{n}");
                    if !q.is_enumerative() {
                        eprintln!("note: {kind}; enumerativity is only known for d >= 2 and r >= 2");
                    }
                }
                Format::Tsv => println!("r\td\tkind\tvalue\n{r}\t{d}\t{kind}\t{n}"),
                Format::Json => println!("{}", json!({ "r": r, "d": d, "kind": kind, "value": n.to_string() })),
            }
            ExitCode::SUCCESS
        }
        Command::Table { name, format } => {
            let grid = engine.table(name)?;
            match format {
                Format::Plain => print!("{}", grid.to_plain()),
                Format::Tsv => print!("{}", grid.to_tsv()),
                Format::Json => {
                    let (row_var, col_var) = name.axes();
                    let rows: Vec<_> = grid
                        .rows
                        .iter()
                        .map(|row| json!({ row_var: row.index, "values": row.cells.iter().map(|v| v.to_string()).collect::<Vec<_>>() }))
                        .collect();
                    println!("{}", json!({ "table": name.as_str(), "rows_by": row_var, "columns_by": col_var, "rows": rows }));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Check { level, seed } => {
            let report = run_checks(&engine, level, seed);
            for o in &report.outcomes {
                println!("{:<20} {:>4} cases  {}", o.name, o.cases, if o.passed() { "ok" } else { "FAILED" });
                for f in o.failures.iter().take(5) {
                    println!("    {f}");
                }
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
    };
    if let Some(path) = &cli.cache {
        cache.save(path)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
