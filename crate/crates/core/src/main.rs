use clap::{Parser, Subcommand};
use isoelast::harness::{run_study, Formulation, StudyConfig, CASE_NAMES};
use std::path::PathBuf;
use std::process::ExitCode;

/// Mixed isogeometric elasticity experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a convergence study on a built-in case.
    Run {
        #[arg(long)]
        case: String,
        /// weak | strong; defaults to the case's own formulation.
        #[arg(long)]
        formulation: Option<Formulation>,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        regularity: i32,
        /// Comma separated element counts per direction.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        levels: Vec<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write VTK fields of the finest level.
        #[arg(long)]
        vtk: bool,
        /// Also estimate the inf-sup constants on n = 2, 4, 8.
        #[arg(long)]
        infsup: bool,
        #[arg(long, default_value_t = 41)]
        vtk_resolution: usize,
    },
    /// List the built-in cases.
    Cases,
}

fn init_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("ISOELAST_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("ISOELAST_THREADS must be a number, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match Cli::parse().cmd {
        Cmd::Cases => {
            for c in CASE_NAMES {
                println!("{c}");
            }
            ExitCode::SUCCESS
        }
        Cmd::Run {
            case,
            formulation,
            degree,
            regularity,
            levels,
            lambda,
            mu,
            out,
            vtk,
            infsup,
            vtk_resolution,
        } => {
            let cfg = StudyConfig {
                case,
                formulation,
                p: degree,
                r: regularity,
                levels,
                lambda,
                mu,
                out: Some(out.clone()),
                vtk,
                infsup,
                vtk_resolution,
            };
            match run_study(&cfg) {
                Ok(rep) => {
                    println!(
                        "{:>5} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}",
                        "n", "σ H(div)", "eoc", "u L2", "eoc", "p L2", "eoc"
                    );
                    let f = |v: Option<f64>, w: usize, prec: usize| match v {
                        Some(x) if prec > 3 => format!("{x:>w$.prec$e}"),
                        Some(x) => format!("{x:>w$.prec$}"),
                        None => format!("{:>w$}", "-"),
                    };
                    for r in &rep.rows {
                        println!(
                            "{:>5} {} {} {} {} {} {}",
                            r.n,
                            f(r.err_sigma_hdiv, 12, 4),
                            f(r.eoc_sigma_hdiv, 6, 2),
                            f(r.err_u_l2, 12, 4),
                            f(r.eoc_u_l2, 6, 2),
                            f(r.err_p_l2, 12, 4),
                            f(r.eoc_p_l2, 6, 2),
                        );
                    }
                    if let Some(pk) = rep.stress_peak {
                        println!(
                            "max stress magnitude {:.4e} at ({:.4}, {:.4})",
                            pk.magnitude, pk.x[0], pk.x[1]
                        );
                    }
                    if let Some(est) = &rep.infsup {
                        for e in est {
                            println!(
                                "inf-sup n={}: taylor-hood {:.4}, flux/L2 {:.4}",
                                e.n, e.taylor_hood, e.flux_l2
                            );
                        }
                    }
                    println!("results written to {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
