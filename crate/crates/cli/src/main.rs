use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qfilter::config::ScenarioConfig;
use qfilter::engine::Diagnostics;
use qfilter::ensemble::{run_ensemble, run_trajectory, Scenario};
use qfilter::output::{self, Manifest};
use qfilter::purity::me_purity_profile;
use qfilter::{scenarios, validate, Error};

/// Quantum filtering of a driven two-level system.
#[derive(Parser)]
#[command(name = "qfilter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one conditioned trajectory and write it as CSV.
    Simulate(RunArgs),
    /// Run an ensemble, compare its mean against the master equation.
    Ensemble {
        #[command(flatten)]
        run: RunArgs,
        /// Also write every trajectory to `<out stem>_trajectories/`.
        #[arg(long)]
        dump_trajectories: bool,
        /// Override the number of trajectories.
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Purity of the unconditioned state and of the conditioned ensemble.
    Purity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Run the built-in oracle and invariant checks.
    Validate {
        /// Print the check names without running them.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name; `--scenario list` prints the names.
    #[arg(long)]
    scenario: Option<String>,
    /// Output CSV path; sidecar files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the seed of the scenario.
    #[arg(long)]
    seed: Option<u64>,
}

struct Loaded {
    name: String,
    config: ScenarioConfig,
    out: PathBuf,
}

impl RunArgs {
    fn load(&self) -> qfilter::Result<Loaded> {
        let (name, mut config) = match (&self.config, &self.scenario) {
            (Some(path), None) => {
                let name = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
                (name, ScenarioConfig::load(path)?)
            }
            (None, Some(name)) => {
                let config = scenarios::builtin_config(name).ok_or_else(|| {
                    Error::Config(format!(
                        "unknown scenario {name:?}; built-ins: {}",
                        scenarios::NAMES.join(", ")
                    ))
                })?;
                (name.clone(), config)
            }
            _ => return Err(Error::Config("pass exactly one of --config or --scenario".into())),
        };
        if let Some(seed) = self.seed {
            config.integrator.seed = seed;
        }
        let out = self.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
        Ok(Loaded { name, config, out })
    }
}

impl Loaded {
    fn scenario(&self, trajectories: Option<usize>) -> qfilter::Result<Scenario> {
        let mut config = self.config.clone();
        if let Some(n) = trajectories {
            config.ensemble.n_trajectories = n;
        }
        let sc = config.to_scenario(&self.name)?;
        if sc.step_is_coarse() {
            eprintln!(
                "warning: dt = {} is coarse for rate scales {:?}; results may be inaccurate",
                sc.integrator.dt,
                sc.rate_scales()
            );
        }
        Ok(sc)
    }

    fn write_manifest(&self, command: &str, sc: &Scenario) -> anyhow::Result<()> {
        let mut config = self.config.clone();
        config.ensemble.n_trajectories = sc.n_trajectories;
        let manifest = Manifest::new(command, &self.name, &config);
        let path = output::sidecar_path(&self.out, "manifest.json");
        fs::write(&path, manifest.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn report_diagnostics(d: &Diagnostics) {
    if d.coarse_jump_steps > 0 {
        eprintln!(
            "warning: {} steps had jump probability above {}; reduce dt",
            d.coarse_jump_steps,
            qfilter::engine::JUMP_PROBABILITY_WARNING
        );
    }
    if d.clamped_rates > 0 {
        eprintln!("note: {} steps clamped a negative detection intensity to zero", d.clamped_rates);
    }
}

fn simulate(args: &RunArgs) -> anyhow::Result<()> {
    let loaded = args.load()?;
    let sc = loaded.scenario(None)?;
    let rec = run_trajectory(&sc, 0)?;
    report_diagnostics(&rec.diagnostics);
    let aux = if sc.record_blocks { sc.filter.block_observable_names() } else { Vec::new() };
    let mut w = create(&loaded.out)?;
    output::write_trajectory_csv(&mut w, &rec, sc.detection, &aux)?;
    w.flush()?;
    loaded.write_manifest("simulate", &sc)?;
    println!("wrote {} ({} rows, {} jumps)", loaded.out.display(), rec.len(), rec.diagnostics.jumps);
    Ok(())
}

fn ensemble(args: &RunArgs, dump: bool, trajectories: Option<usize>) -> anyhow::Result<()> {
    let loaded = args.load()?;
    let mut sc = loaded.scenario(trajectories)?;
    sc.keep_trajectories = dump;
    let r = run_ensemble(&sc)?;
    report_diagnostics(&r.diagnostics);

    let mut w = create(&loaded.out)?;
    output::write_ensemble_csv(&mut w, &r)?;
    w.flush()?;

    let plateau = scenarios::plateau_window(&sc.name);
    let metrics = r.metrics();
    let json = output::metrics_json(&r, &metrics, &r.me_transient(plateau), &r.mean_transient(plateau));
    let path = output::sidecar_path(&loaded.out, "metrics.json");
    fs::write(&path, serde_json::to_string_pretty(&json)?)?;
    loaded.write_manifest("ensemble", &sc)?;

    if let Some(recs) = &r.trajectories {
        let dir = output::trajectory_dir(&loaded.out);
        fs::create_dir_all(&dir)?;
        let aux = if sc.record_blocks { sc.filter.block_observable_names() } else { Vec::new() };
        for (i, rec) in recs.iter().enumerate() {
            let mut w = create(&dir.join(format!("trajectory_{i:05}.csv")))?;
            output::write_trajectory_csv(&mut w, rec, sc.detection, &aux)?;
            w.flush()?;
        }
    }

    println!("{}: {} trajectories", r.scenario, r.n_trajectories);
    for m in &metrics {
        println!(
            "  {}: sup-norm {:.4}, rmse {:.4}, max |z| {:.2}",
            m.observable, m.sup_norm, m.rmse, m.max_abs_z
        );
    }
    println!("wrote {}", loaded.out.display());
    Ok(())
}

fn purity(args: &RunArgs, trajectories: Option<usize>) -> anyhow::Result<()> {
    let loaded = args.load()?;
    let sc = loaded.scenario(trajectories)?;
    let profile = me_purity_profile(&sc)?;
    let r = run_ensemble(&sc)?;
    if r.times != profile.times {
        bail!("ensemble and master-equation grids differ");
    }
    let mut w = create(&loaded.out)?;
    writeln!(
        w,
        "t,P_me,dPdt_me_trace,dPdt_me_closed,dPdt_hd_closed,P_cond_mean,P_cond_se"
    )?;
    for k in 0..profile.times.len() {
        let row = [
            profile.times[k],
            profile.purity[k],
            profile.rate_general[k],
            profile.rate_qubit[k],
            profile.conditioned_rate[k],
            r.purity.mean[k],
            r.purity.se[k],
        ];
        let cells: Vec<String> = row.into_iter().map(output::format_number).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    loaded.write_manifest("purity", &sc)?;
    println!("wrote {}", loaded.out.display());
    Ok(())
}

fn run_validate(list: bool) -> ExitCode {
    if list {
        for name in validate::check_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let results = validate::run_checks();
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        let status = if r.passed { "pass" } else { "FAIL" };
        println!("{status}  {:width$}  max deviation {:.3e}", r.name, r.max_deviation);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("failed: {}", failed.join(", "));
        ExitCode::from(1)
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        Some(err) if err.is_divergence() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Simulate(a) | Command::Ensemble { run: a, .. } | Command::Purity { run: a, .. } = &cli.command {
        if a.scenario.as_deref() == Some("list") {
            for name in scenarios::NAMES {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ensemble {
            run,
            dump_trajectories,
            trajectories,
        } => ensemble(run, *dump_trajectories, *trajectories),
        Command::Purity { run, trajectories } => purity(run, *trajectories),
        Command::Validate { list } => return run_validate(*list),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
