use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tribrep::baker::{self, GammaModel};
use tribrep::pipeline::{self, Config, SharedAudit};
use tribrep::real::{binet_error_check, compute_constants, first_binet_violation, minimal_poly_check_c_alpha};
use tribrep::reduction::two_stage_reduce;
use tribrep::{two_adic, Equation, Error};

const DEFAULT_OUT: &str = "certificates";

#[derive(Parser, Debug)]
#[command(name = "tribrep", version, about = "Certified repdigit-product verification for shifted Tribonacci blocks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// Flat TOML file with precision, jobs, out, nmax_override, table_range, closed_form_range.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Working digits for the reduction stage.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Certificate output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Search up to this n instead of the certified ceiling (must not be lower).
    #[arg(long = "nmax-override", global = true)]
    nmax_override: Option<u64>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug)]
struct EquationArg {
    /// 1, 2, 3, 4 or bgl
    #[arg(long, short)]
    equation: Equation,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certified constants, the Binet check and the minimal-polynomial audit.
    Constants,
    /// Recompute both valuation tables and audit the closed forms.
    Tables,
    /// 2-adic block-length caps.
    Caps(EquationArg),
    /// Matveev instance, |Gamma| bounds and the initial bound on n.
    Bound(EquationArg),
    /// Both reduction stages for each |Gamma| model.
    Reduce(EquationArg),
    /// Exhaustive search over the certified range.
    Search(EquationArg),
    /// Full pipeline for one equation; writes its certificate.
    Verify(EquationArg),
    /// Full pipeline for every equation.
    VerifyAll,
}

fn load_config(g: &GlobalArgs) -> Result<Config, Error> {
    let mut config = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    if let Some(p) = g.precision {
        config.precision = p;
    }
    if let Some(j) = g.jobs {
        config.jobs = Some(j);
    }
    if let Some(o) = &g.out {
        config.out = Some(o.clone());
    }
    if let Some(n) = g.nmax_override {
        config.nmax_override = Some(n);
    }
    config.validate()?;
    Ok(config)
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> Result<(), Error> {
    if json {
        let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
        println!("{}", serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn shifted(eq: Equation) -> Result<Equation, Error> {
    if eq == Equation::Bgl {
        return Err(Error::InvalidArgument("this command needs a shifted equation (1-4)".into()));
    }
    Ok(eq)
}

/// Returns whether the outcome matched expectation.
fn run(cli: &Cli) -> Result<bool, Error> {
    let config = load_config(&cli.global)?;
    let json = cli.global.json;
    match &cli.command {
        Command::Constants => {
            let consts = compute_constants(config.precision.max(150))?;
            #[derive(Serialize)]
            struct Out {
                entries: Vec<tribrep::real::ConstantEntry>,
                binet_holds_to_1000: bool,
                unshifted_binet_first_failure: Option<u64>,
                minimal_polynomial: tribrep::real::MinimalPolyReport,
            }
            let out = Out {
                entries: consts.dump(50),
                binet_holds_to_1000: binet_error_check(1000)?,
                unshifted_binet_first_failure: first_binet_violation(&consts, 1000, 0)?,
                minimal_polynomial: minimal_poly_check_c_alpha(&consts)?,
            };
            emit(json, &out, || {
                let mut s = String::new();
                for e in &out.entries {
                    s += &format!("{:<10} {}  (radius {})\n", e.name, e.value, e.radius);
                }
                s += &format!("|T_s - c_alpha alpha^(s+1)| < alpha^(-s/2) for s <= 1000: {}\n", out.binet_holds_to_1000);
                s += &format!(
                    "unshifted form first fails at s = {:?}\nc_alpha is annihilated by {}\n",
                    out.unshifted_binet_first_failure, out.minimal_polynomial.annihilating_polynomial
                );
                s
            })?;
            Ok(out.binet_holds_to_1000)
        }
        Command::Tables => {
            let shared = config.install(|| SharedAudit::compute(&config))??;
            let t = &shared.tables;
            emit(json, t, || {
                format!(
                    "tables: {} rows over {}..={}, all consistent: {}\nclosed forms vs direct orders for n <= {}: {} mismatches\nprinted n = 61 (mod 64) branch: {} of {} wrong\n",
                    t.rows, t.range_min, t.range_max, t.all_consistent, t.closed_form_range_max, t.closed_form_mismatch_count,
                    t.printed_plus_branch.mismatches, t.printed_plus_branch.checked
                )
            })?;
            Ok(t.all_consistent && t.closed_form_mismatch_count == 0)
        }
        Command::Caps(a) => {
            let eq = shifted(a.equation)?;
            let caps = config.install(|| two_adic::max_block_lengths_with(eq, config.table_range))??;
            emit(json, &caps, || {
                format!(
                    "{eq}: k <= {}, l <= {} (patterns beyond the caps have v2 >= {})\n",
                    caps.k_max, caps.l_max, caps.certified_min_order
                )
            })?;
            Ok(true)
        }
        Command::Bound(a) => {
            let eq = shifted(a.equation)?;
            let consts = compute_constants(config.precision)?;
            let instance = baker::matveev_instance(eq, &consts)?;
            let bounds = GammaModel::ALL
                .iter()
                .map(|&m| baker::initial_bound(eq, m, &consts))
                .collect::<Result<Vec<_>, _>>()?;
            let out = serde_json::json!({ "matveev": instance, "initial_bounds": bounds });
            emit(json, &out, || {
                let mut s = format!("{eq}: C(3,3) = {}, C*A1*A2*A3 = {}, B = {}\n", instance.c_sd, instance.c_times_a, instance.b);
                for b in &bounds {
                    s += &format!("  {:<16} coefficient {:>9}  n < {}\n", b.model.label(), b.coefficient, b.bound);
                }
                s
            })?;
            Ok(true)
        }
        Command::Reduce(a) => {
            let eq = shifted(a.equation)?;
            let chains = config.install(|| {
                GammaModel::ALL
                    .iter()
                    .map(|&m| two_stage_reduce(eq, m, config.precision).map(|(c, _)| c))
                    .collect::<Result<Vec<_>, _>>()
            })??;
            emit(json, &chains, || {
                let mut s = String::new();
                for c in &chains {
                    s += &format!("{eq} [{}] n < {}", c.model.label(), c.initial.bound);
                    for st in &c.stages {
                        s += &format!(" -> (X0 = {}, q_{} = {}) n < {}", st.x0, st.convergent_index, st.q, st.new_bound);
                    }
                    s.push('\n');
                }
                s
            })?;
            Ok(true)
        }
        Command::Search(a) => {
            let eq = a.equation;
            let n_max = match config.nmax_override {
                Some(n) => n,
                None => pipeline::printed_search_ceiling(eq),
            };
            let report = config.install(|| pipeline::search_only(eq, n_max))??;
            let ok = report.solutions == pipeline::expected_solutions(eq);
            emit(json, &report, || {
                format!(
                    "{eq}: n <= {}, {} candidates, solutions {:?}, digest {}\n",
                    n_max, report.candidates_scanned, report.solutions, report.digest
                )
            })?;
            Ok(ok)
        }
        Command::Verify(a) => {
            let start = Instant::now();
            let mut config = config;
            config.out.get_or_insert_with(|| PathBuf::from(DEFAULT_OUT));
            let cert = pipeline::run_pipeline(a.equation, &config)?;
            eprintln!("{}: {:.2?}", a.equation, start.elapsed());
            if json {
                print!("{}", cert.to_json()?);
            } else {
                println!(
                    "{}: searched n <= {}, solutions {:?}, {} ({})",
                    cert.equation,
                    cert.search.space.n_max,
                    cert.search.solutions,
                    if cert.outcome_confirmed { "confirmed" } else { "UNEXPECTED" },
                    config.out.as_deref().map(|d| d.join(cert.file_name())).unwrap_or_default().display()
                );
            }
            Ok(cert.outcome_confirmed)
        }
        Command::VerifyAll => {
            let start = Instant::now();
            let mut config = config;
            let dir = config.out.get_or_insert_with(|| PathBuf::from(DEFAULT_OUT)).clone();
            let (rows, _) = pipeline::run_all(&config)?;
            eprintln!("verify-all: {:.2?}", start.elapsed());
            emit(json, &rows, || summary_table(&rows, &dir))?;
            Ok(rows.iter().all(|r| r.confirmed))
        }
    }
}

fn summary_table(rows: &[pipeline::SummaryRow], dir: &Path) -> String {
    let mut s = format!("{:<6} {:>8} {:>6} {:>10}  status\n", "eq", "n <", "n_max", "solutions");
    for r in rows {
        let opt = |v: Option<u64>| v.map_or("-".into(), |v| v.to_string());
        s += &format!(
            "{:<6} {:>8} {:>6} {:>10}  {}\n",
            r.equation.to_string(),
            opt(r.final_bound),
            opt(r.n_max),
            r.solutions.map_or("-".into(), |v| v.to_string()),
            match (&r.error, r.confirmed) {
                (Some(e), _) => format!("FAILED: {e}"),
                (None, true) => "ok".into(),
                (None, false) => "UNEXPECTED".into(),
            }
        );
    }
    s += &format!("certificates in {}\n", dir.display());
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
