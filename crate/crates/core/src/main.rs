use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use citysim::commands;
use citysim::equilibrium::DEFAULT_TOL;
use citysim::scenario::{dump_scenario, load_scenario, preset, Scenario, DEFAULT_PRESET, PRESETS};
use citysim::Result;

#[derive(Parser)]
#[command(name = "citysim", version, about = "Co-evolution of a population and its society")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario (see `citysim presets`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory; defaults to the scenario's `output_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario's max_time.
    #[arg(long, value_name = "T")]
    max_time: Option<f64>,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut sc = match (&self.config, &self.preset) {
            (Some(path), _) => load_scenario(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => preset(DEFAULT_PRESET)?,
        };
        if let Some(s) = self.seed {
            sc.simulation.seed = s;
        }
        if let Some(t) = self.max_time {
            sc.simulation.max_time = t;
        }
        sc.validate()?;
        Ok(sc)
    }

    fn out(&self, sc: &Scenario) -> PathBuf {
        self.out.clone().unwrap_or_else(|| sc.output_dir.clone())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the scenario once per learning-rate multiplier.
    SweepLambda {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,3,10,30")]
        multipliers: Vec<f64>,
        /// Number of consecutive seeds starting at the scenario seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Compare optimal and noisy matching on paired seeds.
    CompareMatching {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Cluster and embed the population snapshots of a finished run.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Run directory holding population_initial.csv and population_final.csv.
        #[arg(long, value_name = "DIR")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Enumerate Nash equilibria of the interaction-matrix game.
    Equilibria {
        #[command(flatten)]
        common: Common,
        /// Interaction-matrix CSV; defaults to the scenario's matrix.
        #[arg(long, value_name = "PATH")]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        max_support: usize,
    },
    /// List presets, or print one as a scenario file.
    Presets {
        #[arg(long)]
        name: Option<String>,
    },
}

fn seed_list(first: u64, n: u64) -> Vec<u64> {
    (first..first + n).collect()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common } => {
            let sc = common.scenario()?;
            let out = common.out(&sc);
            let o = commands::simulate(&sc, &out)?;
            println!(
                "{:?} at t={} with {} people; outputs in {}",
                o.status,
                o.final_time,
                o.final_population.len(),
                out.display()
            );
        }
        Command::SweepLambda { common, multipliers, seeds } => {
            let sc = common.scenario()?;
            let out = common.out(&sc);
            let runs = commands::sweep(&sc, &multipliers, &seed_list(sc.simulation.seed, seeds), &out)?;
            for r in runs {
                let plateau = r.plateau_time.map_or("none".to_string(), |t| t.to_string());
                println!("x{} seed {}: plateau {plateau}, final population {}", r.multiplier, r.seed, r.final_population);
            }
        }
        Command::CompareMatching { common, seeds } => {
            let sc = common.scenario()?;
            let out = common.out(&sc);
            let rep = commands::compare(&sc, &seed_list(sc.simulation.seed, seeds), &out)?;
            println!(
                "minimum population: optimal {:.1}, noisy {:.1} ({:?})",
                rep.min_population.optimal_mean, rep.min_population.alternative_mean, rep.min_population.direction
            );
            println!(
                "convergent happiness: optimal {:.3}, noisy {:.3} ({:?})",
                rep.convergent_happiness.optimal_mean,
                rep.convergent_happiness.alternative_mean,
                rep.convergent_happiness.direction
            );
        }
        Command::Analyze { common, input, k } => {
            let sc = common.scenario()?;
            let input = input.unwrap_or_else(|| sc.output_dir.clone());
            let out = common.out.clone().unwrap_or_else(|| input.join("analysis"));
            for s in commands::analyze(&input, k, sc.simulation.seed, &out)? {
                let sizes: Vec<usize> = s.clusters.iter().map(|c| c.size).collect();
                println!("{}: {} people, cluster sizes {:?}", s.stage, s.population, sizes);
            }
        }
        Command::Equilibria { common, matrix, max_support } => {
            let sc = common.scenario()?;
            let m = match matrix {
                Some(p) => citysim::model::InteractionMatrix::from_csv_path(&p)?,
                None => sc.simulation.load_matrix()?,
            };
            let out = common.out(&sc);
            let rep = commands::equilibria(&m, max_support, DEFAULT_TOL, &out)?;
            println!(
                "{} equilibria ({} pure, {} mixed); degenerate: {}",
                rep.total_count, rep.pure_count, rep.mixed_count, rep.degeneracy.degenerate
            );
        }
        Command::Presets { name: Some(name) } => print!("{}", dump_scenario(&preset(&name)?)?),
        Command::Presets { name: None } => {
            for (name, about) in PRESETS {
                println!("{name:42} {about}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
