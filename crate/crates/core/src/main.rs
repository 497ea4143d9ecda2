use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use tempochain::scenario::config::{
    AttackSpec, ConfigError, DishonestSpec, Format, ScenarioConfig, ScenarioKind, SourceState,
};
use tempochain::scenario::report::{emit_report, render};
use tempochain::scenario::run::{run_scenario, ScenarioError};

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Run a temporal-GHZ blockchain scenario and write its report.
#[derive(Debug, Parser)]
#[command(name = "tempochain", version)]
struct Cli {
    /// TOML file with scenario settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Repeatable `index:strategy` (honest, flip_report, random_report).
    #[arg(long)]
    dishonest: Vec<DishonestSpec>,
    #[arg(long)]
    trials: Option<usize>,
    /// `kind:photon_id` or `kind:live`.
    #[arg(long)]
    attack: Option<AttackSpec>,
    #[arg(long, value_enum)]
    state: Option<SourceState>,
    #[arg(long, alias = "tamper_index")]
    tamper_index: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Cli {
    fn into_config(self) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError::new("config", format!("cannot read {}: {e}", path.display()))
                })?;
                ScenarioConfig::from_toml(&text)?
            }
            None => ScenarioConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$target = v; })*
            };
        }
        apply!(scenario => scenario, seed => seed, blocks => blocks, nodes => nodes,
               trials => trials, attack => attack, state => state,
               tamper_index => tamper_index, format => format);
        if self.out.is_some() {
            cfg.output_path = self.out;
        }
        if !self.dishonest.is_empty() {
            cfg.dishonest = self.dishonest;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.into_config() {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let started = Instant::now();
    let report = match run_scenario(&config) {
        Ok(report) => report,
        Err(ScenarioError::Config(err)) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_ASSERTION);
        }
    };
    eprintln!(
        "{:?} finished in {:.3}s",
        config.scenario,
        started.elapsed().as_secs_f64()
    );

    let written = match &config.output_path {
        Some(path) => emit_report(&report, config.format, path).map_err(|e| e.to_string()),
        None => std::io::stdout()
            .write_all(render(&report, config.format).as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(err) = written {
        eprintln!("error: {err}");
        return ExitCode::from(EXIT_ASSERTION);
    }

    for failure in &report.failures {
        eprintln!("assertion failed: {failure}");
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}
