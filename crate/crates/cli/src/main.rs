use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use purikit::bell::{random_density, StateKind};
use purikit::convergence::{condition_general, condition_x};
use purikit::fixed_points::{find_fixed_points, render_table, Period};
use purikit::io::{parse_state, trajectory_records, MeasureReport};
use purikit::map::{apply_general, iterate, StateInput};
use purikit::measures::{bell_fidelities, concurrence_mixed, max_entangled_fidelity};
use purikit::oracle::{max_entry_deviation, run_protocol};
use purikit::regions::{scan, Family};
use purikit::worked_examples::{run_example, Example};
use purikit::BellDensityMatrix;

#[derive(Parser, Debug)]
#[command(name = "purikit", version, about = "Recurrence entanglement purification toolkit")]
struct Cli {
    /// Seed for randomized commands
    #[arg(long, global = true, env = "PURIKIT_SEED", default_value_t = 0)]
    seed: u64,

    /// Write output here instead of stdout (a `.manifest.json` sidecar is written next to it)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the protocol repeatedly and emit the trajectory
    Iterate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Stop early once the state moves less than this per round
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Evaluate the purification conditions for a state
    Classify {
        #[arg(long)]
        state: PathBuf,
    },
    /// Label a grid over the diagonal simplex
    Regions {
        #[arg(long, value_enum, default_value_t = FamilyArg::Diagonal)]
        family: FamilyArg,
        #[arg(long)]
        eta_a: Option<f64>,
        #[arg(long)]
        eta_b: Option<f64>,
        #[arg(long)]
        eta_c: Option<f64>,
        #[arg(long)]
        eta_d: Option<f64>,
        #[arg(long, default_value_t = purikit::regions::DEFAULT_GRID)]
        grid: usize,
    },
    /// Search for fixed points of the X-state map and report their stability
    FixedPoints {
        /// Seed grid density on the simplex
        #[arg(long, default_value_t = purikit::fixed_points::DEFAULT_GRID_DENSITY)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        period: usize,
    },
    /// Compare the closed-form map with the four-qubit simulation on random states
    OracleCheck {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Concurrence and fidelities of a state
    Measure {
        #[arg(long)]
        state: PathBuf,
    },
    /// Run one of the two worked examples
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        #[arg(long)]
        param: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Iterate { .. } => "iterate",
            Command::Classify { .. } => "classify",
            Command::Regions { .. } => "regions",
            Command::FixedPoints { .. } => "fixed-points",
            Command::OracleCheck { .. } => "oracle-check",
            Command::Measure { .. } => "measure",
            Command::Example { .. } => "example",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum FamilyArg {
    Diagonal,
    Dephasing1,
    Dephasing2,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    seed: u64,
    version: &'a str,
    config: Value,
    timestamp: u64,
}

/// Bad input or a failed check: exit code 2.
#[derive(Debug)]
struct Rejected(String);

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn rejected(msg: impl Into<String>) -> anyhow::Error {
    Rejected(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<purikit::Error>() {
            return if e.is_degenerate() { 3 } else { 2 };
        }
        if cause.is::<Rejected>() {
            return 2;
        }
    }
    1
}

fn read_state(path: &Path) -> anyhow::Result<StateInput> {
    let text = fs::read_to_string(path).map_err(|e| rejected(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text).with_context(|| format!("parsing {}", path.display()))
}

fn density(input: &StateInput) -> BellDensityMatrix {
    match input {
        StateInput::X(s) => s.to_density(),
        StateInput::General(m) => *m,
    }
}

fn pick_format(given: Option<Format>, default: Format, allowed: &[Format], command: &str) -> anyhow::Result<Format> {
    let f = given.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(rejected(format!("{command} does not support --format {f:?}").to_lowercase()))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data");
    s.push('\n');
    s
}

struct Output {
    body: String,
    config: Value,
}

fn family(
    arg: FamilyArg,
    eta_a: Option<f64>,
    eta_b: Option<f64>,
    eta_c: Option<f64>,
    eta_d: Option<f64>,
) -> anyhow::Result<Family> {
    let unused = |name: &str, v: Option<f64>| match v {
        Some(_) => Err(rejected(format!("--{name} does not apply to family {arg:?}").to_lowercase())),
        None => Ok(()),
    };
    match arg {
        FamilyArg::Diagonal => {
            unused("eta-a", eta_a)?;
            unused("eta-b", eta_b)?;
            unused("eta-c", eta_c)?;
            unused("eta-d", eta_d)?;
            Ok(Family::Diagonal)
        }
        FamilyArg::Dephasing1 => {
            unused("eta-c", eta_c)?;
            unused("eta-d", eta_d)?;
            Ok(Family::Dephasing1 {
                eta_a: eta_a.unwrap_or(0.0),
                eta_b: eta_b.unwrap_or(0.0),
            })
        }
        FamilyArg::Dephasing2 => {
            unused("eta-a", eta_a)?;
            unused("eta-b", eta_b)?;
            Ok(Family::Dephasing2 {
                eta_c: eta_c.unwrap_or(0.0),
                eta_d: eta_d.unwrap_or(0.0),
            })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let name = cli.command.name();
    match &cli.command {
        Command::Iterate { state, steps, tol } => {
            pick_format(cli.format, Format::Json, &[Format::Json], name)?;
            let input = read_state(state)?;
            let trajectory = iterate(input, *steps, *tol)?;
            Ok(Output {
                body: to_json(&trajectory_records(&trajectory)),
                config: json!({ "state": state, "steps": steps, "tol": tol }),
            })
        }
        Command::Classify { state } => {
            pick_format(cli.format, Format::Json, &[Format::Json], name)?;
            let classification = match read_state(state)? {
                StateInput::X(s) => condition_x(&s),
                StateInput::General(m) => condition_general(&m),
            };
            Ok(Output {
                body: to_json(&classification),
                config: json!({ "state": state }),
            })
        }
        Command::Regions {
            family: arg,
            eta_a,
            eta_b,
            eta_c,
            eta_d,
            grid,
        } => {
            let format = pick_format(cli.format, Format::Csv, &[Format::Csv, Format::Json], name)?;
            let fam = family(*arg, *eta_a, *eta_b, *eta_c, *eta_d)?;
            let result = scan(fam, *grid)?;
            for r in &result.rejected {
                eprintln!("rejected grid point r = {:?}: {}", r.r, r.report);
            }
            let body = match format {
                Format::Csv => result.to_csv(),
                _ => to_json(&result),
            };
            Ok(Output {
                body,
                config: json!({ "family": fam, "grid": grid, "format": format, "rejected": result.rejected.len() }),
            })
        }
        Command::FixedPoints { grid, period } => {
            let format = pick_format(cli.format, Format::Table, &[Format::Table, Format::Json], name)?;
            let records = find_fixed_points(*grid, Period::try_from(*period)?)?;
            let body = match format {
                Format::Table => render_table(&records),
                _ => to_json(&records),
            };
            Ok(Output {
                body,
                config: json!({ "grid": grid, "period": period, "format": format }),
            })
        }
        Command::OracleCheck { trials, tol } => {
            pick_format(cli.format, Format::Json, &[Format::Json], name)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut agree = 0;
            let mut worst = 0.0f64;
            for _ in 0..*trials {
                let rho = random_density(rng.random(), StateKind::General);
                let closed = apply_general(&rho)?;
                let sim = run_protocol(&rho)?;
                let dev = max_entry_deviation(closed.density().matrix(), sim.state.matrix())
                    .max((closed.success_probability - sim.success_probability).abs());
                worst = worst.max(dev);
                if dev <= *tol {
                    agree += 1;
                }
            }
            println!("{agree}/{trials} agree");
            if agree != *trials {
                return Err(rejected(format!(
                    "{} of {trials} trials disagree (max deviation {worst:e}, tol {tol:e})",
                    trials - agree
                )));
            }
            Ok(Output {
                body: to_json(&json!({ "trials": trials, "agree": agree, "max_deviation": worst, "tol": tol })),
                config: json!({ "trials": trials, "tol": tol }),
            })
        }
        Command::Measure { state } => {
            pick_format(cli.format, Format::Json, &[Format::Json], name)?;
            let rho = density(&read_state(state)?);
            let (value, argmax) = max_entangled_fidelity(&rho);
            let report = MeasureReport {
                concurrence: concurrence_mixed(&rho),
                bell_fidelities: bell_fidelities(&rho),
                max_entangled_fidelity: value,
                argmax,
            };
            Ok(Output {
                body: to_json(&report),
                config: json!({ "state": state }),
            })
        }
        Command::Example { which, param } => {
            pick_format(cli.format, Format::Json, &[Format::Json], name)?;
            let report = run_example(Example::try_from(*which)?, *param)?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("check {} failed: value {} vs target {}", c.name, c.value, c.target);
            }
            let body = to_json(&report);
            if !report.passed() {
                print!("{body}");
                return Err(rejected("example checks failed"));
            }
            Ok(Output {
                body,
                config: json!({ "example": which, "param": param }),
            })
        }
    }
}

fn emit(cli: &Cli, output: &Output) -> anyhow::Result<()> {
    let Some(path) = &cli.out else {
        if cli.command.name() != "oracle-check" {
            print!("{}", output.body);
        }
        return Ok(());
    };
    fs::write(path, &output.body).with_context(|| format!("writing {}", path.display()))?;
    let manifest = RunManifest {
        command: cli.command.name(),
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION"),
        config: output.config.clone(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let mut manifest_path = path.clone().into_os_string();
    manifest_path.push(".manifest.json");
    fs::write(&manifest_path, to_json(&manifest))
        .with_context(|| format!("writing {}", PathBuf::from(&manifest_path).display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
