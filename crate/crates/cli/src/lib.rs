//! Command-line front end for `dephaser-core`: dephasing-function tables,
//! trace-distance curves, the non-Markovianity measure, photon-echo grids
//! and the two reference figures, as CSV or JSON.

pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dephaser_core::figures::{figure_surface, linspace, trace_distance_curves};
use dephaser_core::measures::{exponent_profile, non_markovianity, ScanWindow, DEFAULT_SCAN_POINTS};
use dephaser_core::response::echo_grid;
use dephaser_core::{EngineKind, NonMarkovResult, Scenario, SearchMode, SeriesTail};

pub use config::{Format, RunConfig};
pub use error::CliError;
pub use output::{Report, SeriesOutput};

#[derive(Debug, Parser)]
#[command(
    name = "dephaser",
    version,
    about = "Pure-dephasing dynamics of a two-level system in a Brownian bath",
    after_help = "Settings are resolved as: command-line flags, then --config JSON, then defaults.\n\
                  Run `dephaser reference` for every default and the config-file layout."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate g(t) and its rate: columns t, re_g, im_g, re_gdot, im_gdot
    Gfun(RunArgs),
    /// Trace distance of the maximising pair: columns t2, D, sigma
    Trdist(RunArgs),
    /// Non-Markovianity measure with its growth intervals
    Measure(RunArgs),
    /// Photon-echo kernel on a t1 x t2 grid: columns t1, t2, abs_R, re_R, im_R
    Echo(RunArgs),
    /// Data behind the reference figures (beta = 1, gamma = 0.5, eta = 1)
    Figures {
        which: FigureKind,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print every default and the config-file layout
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    /// D(t2) for t1 = 0, 1 with the high-temperature kernel and with 100 Matsubara terms
    Trd,
    /// high-temperature D(t1, t2) on a 200 x 200 grid
    Trd2t,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Hight,
    FreqQuad,
    TimeQuad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Truncated,
    Resummed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchArg {
    Analytic,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Inverse temperature [default: 1]
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Bath relaxation rate [default: 0.5]
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Coupling strength [default: 1]
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Level splitting [default: 0]
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Matsubara terms of the analytic engine [default: 100]
    #[arg(long, value_name = "K")]
    pub terms: Option<usize>,
    /// Dephasing-function engine [default: analytic]
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// Analytic engine: keep exactly K terms or add the resummed remainder [default: truncated]
    #[arg(long, value_enum)]
    pub tail: Option<TailArg>,
    /// CSV of omega,J samples for the quadrature engines
    #[arg(long, value_name = "PATH")]
    pub spectral_table: Option<PathBuf>,
    /// Preparation time; selects the prepared scenario [default: single interval]
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// End of the time window [default: 10]
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub tmax: Option<f64>,
    /// Samples along the time axis [default: 1000]
    #[arg(long, value_name = "N")]
    pub points: Option<usize>,
    /// Samples per axis of the echo grid [default: 200]
    #[arg(long, value_name = "N")]
    pub grid_points: Option<usize>,
    /// Maximisation over state pairs [default: analytic]
    #[arg(long, value_enum)]
    pub search: Option<SearchArg>,
    /// JSON file with RunConfig fields; flags override it
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl RunArgs {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.beta {
            c.bath.beta = v;
        }
        if let Some(v) = self.gamma {
            c.bath.gamma = v;
        }
        if let Some(v) = self.eta {
            c.bath.eta = v;
        }
        if let Some(v) = self.epsilon {
            c.system.epsilon = v;
        }
        if let Some(v) = self.terms {
            c.bath.matsubara_terms = v;
        }
        if let Some(v) = self.engine {
            c.engine = match v {
                EngineArg::Analytic => EngineKind::Analytic,
                EngineArg::Hight => EngineKind::Hight,
                EngineArg::FreqQuad => EngineKind::FreqQuad,
                EngineArg::TimeQuad => EngineKind::TimeQuad,
            };
        }
        if let Some(v) = self.tail {
            c.tail = match v {
                TailArg::Truncated => SeriesTail::Truncated,
                TailArg::Resummed => SeriesTail::Resummed,
            };
        }
        if let Some(p) = &self.spectral_table {
            c.spectral_table = Some(p.clone());
        }
        if let Some(t1) = self.t1 {
            c.scenario = Scenario::Prepared { t1 };
        }
        if let Some(v) = self.tmax {
            c.window.t_max = v;
        }
        if let Some(v) = self.points {
            c.window.points = v;
        }
        if let Some(v) = self.grid_points {
            c.window.grid_points = v;
        }
        if let Some(v) = self.search {
            c.search = match v {
                SearchArg::Analytic => SearchMode::AnalyticPair,
                SearchArg::Grid => SearchMode::grid_default(),
            };
        }
        self.output.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}

impl OutputArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(p) = &self.out {
            c.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            c.output.format = match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
        }
    }
}

pub fn cmd_gfun(config: &RunConfig) -> Result<SeriesOutput, CliError> {
    let eval = config.evaluator()?;
    let ts = linspace(0.0, config.window.t_max, config.window.points);
    let rows = eval
        .sample_many(&ts)?
        .iter()
        .map(|s| vec![s.t, s.g.re, s.g.im, s.gdot.re, s.gdot.im])
        .collect();
    SeriesOutput::new("gfun", &["t", "re_g", "im_g", "re_gdot", "im_gdot"], rows)
}

/// `D = e^{−E}` for the maximising pair, i.e. normalised to 1 when the pair
/// is prepared, and `σ = dD/dt2`.
pub fn cmd_trdist(config: &RunConfig) -> Result<SeriesOutput, CliError> {
    let eval = config.evaluator()?;
    let ts = linspace(0.0, config.window.t_max, config.window.points);
    let rows = exponent_profile(&eval, config.scenario, &ts)?
        .iter()
        .zip(&ts)
        .map(|(&(e, rate), &t)| {
            let d = (-e).exp();
            vec![t, d, -rate * d]
        })
        .collect();
    SeriesOutput::new("trdist", &["t2", "D", "sigma"], rows)
}

pub fn cmd_measure(config: &RunConfig) -> Result<NonMarkovResult, CliError> {
    let eval = config.evaluator()?;
    let window = ScanWindow::new(config.window.t_max);
    Ok(non_markovianity(&config.system, &eval, config.scenario, window, config.search)?)
}

pub fn cmd_echo(config: &RunConfig) -> Result<SeriesOutput, CliError> {
    let eval = config.evaluator()?;
    let ts = linspace(0.0, config.window.t_max, config.window.grid_points);
    let rows = echo_grid(&eval, &ts, &ts)?
        .iter()
        .map(|k| vec![k.t1, k.t2, k.homodyne(), k.value.re, k.value.im])
        .collect();
    SeriesOutput::new("echo", &["t1", "t2", "abs_R", "re_R", "im_R"], rows)
}

pub fn cmd_figures(which: FigureKind) -> Result<SeriesOutput, CliError> {
    match which {
        FigureKind::Trd => {
            let curves = trace_distance_curves()?;
            let names: Vec<String> = std::iter::once("t2".to_string())
                .chain(curves.iter().map(|c| format!("D_t1_{}_K{}", c.t1, c.terms)))
                .collect();
            let rows = (0..curves[0].t2.len())
                .map(|i| std::iter::once(curves[0].t2[i]).chain(curves.iter().map(|c| c.d[i])).collect())
                .collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            SeriesOutput::new("figures trd", &names, rows)
        }
        FigureKind::Trd2t => {
            let s = figure_surface()?;
            let mut rows = Vec::with_capacity(s.t1.len() * s.t2.len());
            for (i, &t1) in s.t1.iter().enumerate() {
                for (j, &t2) in s.t2.iter().enumerate() {
                    rows.push(vec![t1, t2, s.d[i][j]]);
                }
            }
            SeriesOutput::new("figures trd2t", &["t1", "t2", "D"], rows)
        }
    }
}

pub fn reference_page() -> String {
    let defaults = serde_json::to_string_pretty(&RunConfig::default()).expect("config serialises");
    format!(
        "# dephaser reference\n\
         \n\
         Units: hbar = k_B = 1.\n\
         \n\
         ## Defaults\n\
         \n\
         | setting | flag | default |\n\
         |---|---|---|\n\
         | inverse temperature | --beta | 1 |\n\
         | bath relaxation rate | --gamma | 0.5 |\n\
         | coupling strength | --eta | 1 |\n\
         | level splitting | --epsilon | 0 |\n\
         | Matsubara terms | --terms | 100 |\n\
         | engine | --engine | analytic |\n\
         | Matsubara remainder | --tail | truncated |\n\
         | scenario | --t1 | single interval (a value selects the prepared scenario) |\n\
         | time window end | --tmax | 10 |\n\
         | samples per curve | --points | 1000 |\n\
         | samples per echo-grid axis | --grid-points | 200 |\n\
         | pair maximisation | --search | analytic (grid: 50 x 50 x 8 states) |\n\
         | growth-interval scan | - | {DEFAULT_SCAN_POINTS} points, bisection to 1e-10 |\n\
         | output | --out, --format | stdout, csv |\n\
         \n\
         Precedence: flags, then the --config file, then these defaults.\n\
         \n\
         ## Config file\n\
         \n\
         JSON with the fields below; any subset may be given.\n\
         \n\
         ```json\n{defaults}\n```\n\
         \n\
         `scenario` is `{{\"kind\": \"single-time\"}}` or `{{\"kind\": \"prepared\", \"t1\": 1.0}}`;\n\
         `search` is `{{\"kind\": \"analytic-pair\"}}` or\n\
         `{{\"kind\": \"grid-search\", \"p_steps\": 50, \"c_steps\": 50, \"phase_steps\": 8}}`.\n\
         \n\
         ## Output\n\
         \n\
         CSV: one header line, comma separated, 17 significant digits, LF line endings.\n\
         JSON: an object with `schema_version`, `command`, `columns` and `rows`; `measure`\n\
         reports `n_value`, `growth_intervals`, `argmax_pair`, `scenario`, `search`,\n\
         `truncated` and `warnings` (its CSV form lists the growth intervals).\n\
         Errors: `{{\"error\": {{\"kind\": ..., \"message\": ...}}}}` on stderr and a non-zero exit code.\n"
    )
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // the reader went away (`| head`); nothing left to report
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

/// Parses `args` and runs the command. Help and version requests print to
/// stdout and succeed.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                emit(&e.to_string(), None)?;
                return Ok(());
            }
            let rendered = e.render().to_string();
            let message = rendered.trim().trim_start_matches("error: ");
            return Err(CliError::Usage(message.to_string()));
        }
    };
    match &cli.command {
        Command::Reference => emit(&reference_page(), None),
        Command::Figures { which, output } => {
            let mut c = RunConfig::default();
            output.apply(&mut c);
            let text = cmd_figures(*which)?.render(c.output.format);
            emit(&text, c.output.path.as_ref())
        }
        Command::Gfun(a) | Command::Trdist(a) | Command::Measure(a) | Command::Echo(a) => {
            let config = a.resolve()?;
            let report = match &cli.command {
                Command::Gfun(_) => Report::Series(cmd_gfun(&config)?),
                Command::Trdist(_) => Report::Series(cmd_trdist(&config)?),
                Command::Echo(_) => Report::Series(cmd_echo(&config)?),
                _ => Report::Measure(cmd_measure(&config)?),
            };
            emit(&report.render(config.output.format), config.output.path.as_ref())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunArgs {
        let cli = Cli::try_parse_from(std::iter::once("dephaser").chain(args.iter().copied())).unwrap();
        match cli.command {
            Command::Gfun(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_resolve() {
        let c = parse(&["gfun"]).resolve().unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.window.points, 1000);
        assert_eq!(c.window.t_max, 10.0);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"bath": {"beta": 2.0}, "window": {"points": 7}, "engine": "hight"}"#).unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["gfun", "--config", p]).resolve().unwrap();
        assert_eq!(c.bath.beta, 2.0);
        assert_eq!(c.bath.gamma, 0.5);
        assert_eq!(c.window.points, 7);
        assert_eq!(c.engine, EngineKind::Hight);
        let c = parse(&["gfun", "--config", p, "--beta", "3", "--engine", "analytic"]).resolve().unwrap();
        assert_eq!(c.bath.beta, 3.0);
        assert_eq!(c.window.points, 7);
        assert_eq!(c.engine, EngineKind::Analytic);
    }

    #[test]
    fn unknown_config_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"betta": 2.0}"#).unwrap();
        let err = parse(&["gfun", "--config", path.to_str().unwrap()]).resolve().unwrap_err();
        assert_eq!(err.kind(), "config");
    }

    #[test]
    fn table_with_analytic_engine_is_a_config_error() {
        let err = parse(&["gfun", "--spectral-table", "j.csv"]).resolve().unwrap_err();
        assert_eq!(err.kind(), "config");
        assert!(parse(&["gfun", "--points", "1"]).resolve().is_err());
        assert!(parse(&["gfun", "--t1", "-1"]).resolve().is_err());
    }

    #[test]
    fn reference_page_lists_config_layout() {
        let page = reference_page();
        assert!(page.contains("\"matsubara_terms\": 100"));
        assert!(page.contains("--grid-points"));
    }
}
