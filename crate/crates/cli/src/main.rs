use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use subgreedy::bounds::{audit_corollary, g_cc, g_nwf, g_tilde, overlap_lower_bound};
use subgreedy::instances::{predicted_values, tight_instance, TightFamilyParams};
use subgreedy::lp::certificate_report;
use subgreedy::scalar::format_sig12;
use subgreedy::verify::verify_instance;
use subgreedy::{
    format_rat, parse_rat, run_greedy, run_lazy_greedy, ElementId, Error, Instance, Mode, Rat,
    TiePolicy, Value,
};

/// Largest `T` accepted by `lp-cert`; the exact simplex grows quickly past it.
const LP_CERT_MAX_T: usize = 40;

#[derive(Parser)]
#[command(
    name = "subgreedy",
    version,
    about = "Greedy submodular maximization toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run greedy on an instance file and print the trace.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long = "T")]
        t: usize,
        /// first, last, or prefer:i,j,...
        #[arg(long, default_value = "first", value_parser = parse_policy)]
        policy: TiePolicy,
        #[arg(long)]
        lazy: bool,
    },
    /// Write a worst-case instance and print its predicted values.
    GenTight {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, value_parser = parse_rat_arg)]
        alpha: Rat,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check monotonicity, submodularity, curvature and the guarantee.
    VerifyInstance {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, default_value = "first", value_parser = parse_policy)]
        policy: TiePolicy,
    },
    /// Print the closed-form dual certificate with simplex cross-checks.
    LpCert {
        #[arg(long = "T")]
        t: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = parse_rat_arg)]
        alpha: Rat,
    },
    /// Compare the cardinality-only bound with the exhaustive minimum.
    AuditCorollary {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_rat_arg)]
        alpha: Rat,
        /// Where to write the witness instance when a discrepancy is found.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Tabulate the guarantees over a range of n and alpha as CSV.
    Sweep {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        /// Comma-separated curvature values.
        #[arg(long, value_delimiter = ',', value_parser = parse_rat_arg)]
        alpha: Vec<Rat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

fn parse_policy(s: &str) -> Result<TiePolicy, String> {
    match s {
        "first" => Ok(TiePolicy::FirstIndex),
        "last" => Ok(TiePolicy::LastIndex),
        _ => {
            let list = s.strip_prefix("prefer:").ok_or_else(|| {
                format!("unknown policy {s:?}; use first, last or prefer:i,j,...")
            })?;
            list.split(',')
                .map(|x| x.trim().parse::<usize>().map(ElementId))
                .collect::<Result<Vec<_>, _>>()
                .map(TiePolicy::PreferListed)
                .map_err(|e| format!("bad element in {s:?}: {e}"))
        }
    }
}

/// Ways a command can end, mapped onto exit codes.
enum Failure {
    Property,
    Usage(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit(msg) => Failure::Resource(msg),
            Error::MonotonicityViolation { .. } | Error::SubmodularityViolation { .. } => {
                eprintln!("property violated: {e}");
                Failure::Property
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports always serialize")
    );
}

fn write_file(path: &PathBuf, text: &str) -> CmdResult {
    std::fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_solve(path: &PathBuf, t: usize, policy: &TiePolicy, lazy: bool) -> CmdResult {
    let instance = Instance::load(path)?;
    let trace = if lazy {
        run_lazy_greedy(&instance, t, policy)?
    } else {
        run_greedy(&instance, t, policy)?
    };
    print_json(&json!({
        "chosen": trace.chosen,
        "value": trace.final_value(),
        "trace": trace,
    }));
    Ok(())
}

fn cmd_gen_tight(n: usize, t: usize, alpha: Rat, r: Option<usize>, out: &PathBuf) -> CmdResult {
    let params = match r {
        Some(r) => TightFamilyParams::new(n, t, alpha, r)?,
        None => TightFamilyParams::with_default_r(n, t, alpha)?,
    };
    let instance = tight_instance(&params)?;
    let predicted = if params.is_large_t_case() {
        Some(predicted_values(&params)?)
    } else {
        None
    };
    write_file(out, &instance.to_json())?;
    print_json(&json!({
        "out": out,
        "params": params,
        "predicted": predicted,
        "convention": params.convention_note(),
    }));
    Ok(())
}

fn cmd_verify(path: &PathBuf, t: usize, policy: &TiePolicy) -> CmdResult {
    let instance = Instance::load(path)?;
    let report = verify_instance(&instance, t, policy)?;
    print_json(&report);
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

fn cmd_lp_cert(t: usize, m: usize, alpha: &Rat) -> CmdResult {
    if t > LP_CERT_MAX_T {
        return Err(Failure::Resource(format!(
            "lp-cert supports T <= {LP_CERT_MAX_T}, got T={t}"
        )));
    }
    let report = certificate_report(t, alpha, m)?;
    print_json(&report);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

fn cmd_audit(n: usize, alpha: &Rat, witness_out: Option<&PathBuf>) -> CmdResult {
    let report = audit_corollary(n, alpha)?;
    if let (Some(path), Some(witness)) = (witness_out, &report.witness_instance) {
        let instance = Instance::from_doc(witness.instance.clone())?;
        write_file(path, &instance.to_json())?;
    }
    print_json(&report);
    if report.consistent {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

fn exact_cell(v: &Value) -> String {
    match v {
        Value::Exact(r) => format_rat(r),
        Value::Float(x) => format_sig12(*x),
    }
}

fn sweep_csv(n_min: usize, n_max: usize, alphas: &[Rat]) -> Result<String, Failure> {
    if alphas.is_empty() {
        return Err(Failure::Usage("--alpha needs at least one value".into()));
    }
    if n_min < 1 || n_min > n_max {
        return Err(Failure::Usage(format!(
            "need 1 <= n-min <= n-max, got {n_min}..{n_max}"
        )));
    }
    let mut csv = String::from(
        "n,T,alpha,m_lower,g_nwf,g_cc,g_tilde,alpha_exact,g_nwf_exact,g_cc_exact,g_tilde_exact\n",
    );
    for n in n_min..=n_max {
        for alpha in alphas {
            let a = Value::Exact(alpha.clone());
            for t in 1..=n {
                let nwf = g_nwf(t, Mode::Exact)?;
                let cc = g_cc(t, &a)?;
                let tilde = g_tilde(t, &a, n)?;
                writeln!(
                    csv,
                    "{n},{t},{},{},{},{},{},{},{},{},{}",
                    format_sig12(a.to_f64()),
                    overlap_lower_bound(t, n),
                    format_sig12(nwf.to_f64()),
                    format_sig12(cc.to_f64()),
                    format_sig12(tilde.to_f64()),
                    format_rat(alpha),
                    exact_cell(&nwf),
                    exact_cell(&cc),
                    exact_cell(&tilde),
                )
                .expect("writing to a String cannot fail");
            }
        }
    }
    Ok(csv)
}

fn cmd_sweep(n_min: usize, n_max: usize, alphas: &[Rat], out: Option<&PathBuf>) -> CmdResult {
    let csv = sweep_csv(n_min, n_max, alphas)?;
    match out {
        Some(path) => {
            write_file(path, &csv)?;
            print_json(&json!({ "out": path, "rows": csv.lines().count() - 1 }));
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Solve {
            instance,
            t,
            policy,
            lazy,
        } => cmd_solve(&instance, t, &policy, lazy),
        Command::GenTight {
            n,
            t,
            alpha,
            r,
            out,
        } => cmd_gen_tight(n, t, alpha, r, &out),
        Command::VerifyInstance {
            instance,
            t,
            policy,
        } => cmd_verify(&instance, t, &policy),
        Command::LpCert { t, m, alpha } => cmd_lp_cert(t, m, &alpha),
        Command::AuditCorollary {
            n,
            alpha,
            witness_out,
        } => cmd_audit(n, &alpha, witness_out.as_ref()),
        Command::Sweep {
            n_min,
            n_max,
            alpha,
            out,
        } => cmd_sweep(n_min, n_max, &alpha, out.as_ref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("resource limit: {msg}");
            ExitCode::from(3)
        }
    }
}
