//! Command-line front end. Every subcommand is a deterministic function of
//! the configuration and seed; files go to the output directory and short
//! reports go to standard output.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::lightshift::{resonance_field, resonance_power, write_cross_section_csv, zeeman_shifts};
use crate::scenario::Scenario;
use crate::signal::{fit_series, read_trace_csv, write_fit_report, write_trace_csv, Spectrum};
use crate::species::{bare_splittings, larmor_frequency};
use crate::sweep::{run_sweep, spectrum_waterfall, write_map_csv, write_overlay_csv, SweepGrid, SweepMethod};
use crate::units::{gauss_to_mg, ghz_to_rad, mg_to_gauss, rad_to_hz};

#[derive(Debug, Parser)]
#[command(
    name = "spinsync",
    version,
    about = "Light-shift synchronization of alkali hyperfine precession"
)]
pub struct Cli {
    /// TOML configuration file; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Noise seed base (overrides `seed_base`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Eigen,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichArg {
    Gamma,
    Q,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Light-shift and absorption cross-sections over optical detuning.
    Xsection {
        /// Explicit detunings from ν₁ in GHz, instead of the configured range.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        nu_ghz: Option<Vec<f64>>,
    },
    /// Synchronization power for a field, or field for a power.
    Resonance {
        #[arg(long, conflicts_with = "p_mw")]
        b_mg: Option<f64>,
        #[arg(long)]
        p_mw: Option<f64>,
    },
    /// Synthesize a probe trace at (B, P) and fit it.
    Simulate {
        #[arg(long, default_value_t = 0.43)]
        b_mg: f64,
        #[arg(long, default_value_t = 0.0)]
        p_mw: f64,
        /// Record length in seconds (overrides the signal section).
        #[arg(long)]
        duration_s: Option<f64>,
    },
    /// Fit decaying sinusoids to a `t_s,sx` trace file.
    Fit {
        input: PathBuf,
        /// Number of components (overrides the signal section).
        #[arg(long)]
        components: Option<usize>,
    },
    /// Relaxation-rate and Q maps over the configured (B, P) grid.
    Sweep {
        #[arg(long, value_enum, default_value_t = MethodArg::Eigen)]
        method: MethodArg,
        /// Quantity summarized on standard output.
        #[arg(long, value_enum, default_value_t = WhichArg::Gamma)]
        which: WhichArg,
    },
    /// Spectra at one field over a list of powers, on a common scale.
    Waterfall {
        #[arg(long)]
        b_mg: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        p_mw: Option<Vec<f64>>,
    },
    /// Print the complete default configuration.
    Defaults,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    let mut w = create(dir, name)?;
    f(&mut w)?;
    w.flush()?;
    Ok(dir.join(name))
}

/// Execute a parsed command, writing reports to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = cli.out {
        cfg.out_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed_base = seed;
    }
    match cli.command {
        Command::Defaults => {
            write!(out, "{}", RunConfig::default_toml())?;
            Ok(())
        }
        Command::Xsection { nu_ghz } => cmd_xsection(&cfg, nu_ghz, out),
        Command::Resonance { b_mg, p_mw } => cmd_resonance(&cfg, b_mg, p_mw, out),
        Command::Simulate { b_mg, p_mw, duration_s } => {
            if let Some(d) = duration_s {
                cfg.signal.duration_s = d;
            }
            cmd_simulate(&cfg, b_mg, p_mw, out)
        }
        Command::Fit { input, components } => {
            if let Some(n) = components {
                cfg.signal.fit_components = n;
            }
            cmd_fit(&cfg, &input, out)
        }
        Command::Sweep { method, which } => cmd_sweep(&cfg, method, which, out),
        Command::Waterfall { b_mg, p_mw } => cmd_waterfall(&cfg, b_mg, p_mw, out),
    }
}

pub fn cmd_xsection(cfg: &RunConfig, nu_ghz: Option<Vec<f64>>, out: &mut dyn Write) -> Result<()> {
    let species = cfg.build_species()?;
    let nus: Vec<f64> = nu_ghz
        .unwrap_or_else(|| cfg.xsection.frequencies_ghz())
        .into_iter()
        .map(ghz_to_rad)
        .collect();
    if nus.is_empty() {
        return Err(Error::InvalidInput("no detunings requested".into()));
    }
    let path = write_file(&cfg.out_dir, "xsection.csv", |w| {
        write_cross_section_csv(&species, &nus, w)
    })?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

pub fn cmd_resonance(cfg: &RunConfig, b_mg: Option<f64>, p_mw: Option<f64>, out: &mut dyn Write) -> Result<()> {
    let sc = cfg.scenario()?;
    let (b, p) = match (b_mg, p_mw) {
        (_, Some(p)) => (resonance_field(&sc.species, &sc.beam_at(p))?, p),
        (b, None) => {
            let b = mg_to_gauss(b.unwrap_or(cfg.beam.calibration.map_or(0.43, |c| c.b_mg)));
            (b, resonance_power(&sc.species, &sc.beam, b)?)
        }
    };
    let shifts = zeeman_shifts(&sc.species, &sc.beam_at(p))?;
    let (wa, wb) = sc.effective_frequencies(b, p)?;
    let larmor = larmor_frequency(&sc.species, b)?;
    writeln!(out, "b_gauss={b}")?;
    writeln!(out, "b_mg={}", gauss_to_mg(b))?;
    writeln!(out, "p_mw={p}")?;
    for (key, v) in [
        ("larmor", larmor),
        ("delta_a", shifts.delta_a),
        ("delta_b", shifts.delta_b),
        ("omega_a", wa),
        ("omega_b", wb),
    ] {
        writeln!(out, "{key}_rad_s={v}")?;
        writeln!(out, "{key}_hz={}", rad_to_hz(v))?;
    }
    writeln!(out, "scatter_rate_s={}", shifts.scatter_rate)?;
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, b_mg: f64, p_mw: f64, out: &mut dyn Write) -> Result<()> {
    let sc = cfg.scenario()?;
    let series = sc.simulate(mg_to_gauss(b_mg), p_mw, &cfg.signal, cfg.seed_base)?;
    let fit = fit_series(&series, cfg.signal.fit_components)?;
    write_file(&cfg.out_dir, "trace.csv", |w| write_trace_csv(&series, w))?;
    write_file(&cfg.out_dir, "simulate_fit.txt", |w| write_fit_report(&fit, w))?;
    write_fit_report(&fit, out)
}

pub fn cmd_fit(cfg: &RunConfig, input: &Path, out: &mut dyn Write) -> Result<()> {
    cfg.signal.validate()?;
    let file = File::open(input).map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
    let series = read_trace_csv(BufReader::new(file))?;
    let fit = fit_series(&series, cfg.signal.fit_components)?;
    write_file(&cfg.out_dir, "fit_report.txt", |w| write_fit_report(&fit, w))?;
    write_fit_report(&fit, out)
}

pub fn sweep_grid(cfg: &RunConfig, scenario: Scenario, method: MethodArg) -> SweepGrid {
    SweepGrid {
        scenario,
        b_values: cfg.sweep.b_values(),
        p_values: cfg.sweep.p_values(),
        method: match method {
            MethodArg::Eigen => SweepMethod::Eigen,
            MethodArg::Fit => SweepMethod::Fit(cfg.signal),
        },
        seed_base: cfg.seed_base,
    }
}

pub fn cmd_sweep(cfg: &RunConfig, method: MethodArg, which: WhichArg, out: &mut dyn Write) -> Result<()> {
    let grid = sweep_grid(cfg, cfg.scenario()?, method);
    let result = run_sweep(&grid)?;
    write_file(&cfg.out_dir, "sweep_map.csv", |w| write_map_csv(&result, w))?;
    write_file(&cfg.out_dir, "sweep_overlay.csv", |w| write_overlay_csv(&result, w))?;
    let failed = result.cells.iter().filter(|c| c.error.is_some()).count();
    match which {
        WhichArg::Gamma => writeln!(out, "b_mg,p_min_gamma_mw,min_gamma_s,p_resonance_mw")?,
        WhichArg::Q => writeln!(out, "b_mg,p_max_q_mw,max_q_angular,p_resonance_mw")?,
    }
    for (ib, &b) in result.b_values.iter().enumerate() {
        let row = result.row(ib);
        let best = match which {
            WhichArg::Gamma => row
                .iter()
                .filter(|c| c.gamma.is_some())
                .min_by(|x, y| x.gamma.unwrap().total_cmp(&y.gamma.unwrap())),
            WhichArg::Q => row
                .iter()
                .filter(|c| c.q.is_some())
                .max_by(|x, y| qkey(x).total_cmp(&qkey(y))),
        };
        let p_res = result
            .resonance
            .iter()
            .find(|(rb, _)| *rb == b)
            .map(|(_, p)| p.to_string())
            .unwrap_or_default();
        match best {
            Some(c) => {
                let v = match which {
                    WhichArg::Gamma => c.gamma.unwrap(),
                    WhichArg::Q => c.q.unwrap().exported(),
                };
                writeln!(out, "{},{},{},{}", gauss_to_mg(b), c.p, v, p_res)?;
            }
            None => writeln!(out, "{},,,{}", gauss_to_mg(b), p_res)?,
        }
    }
    if failed > 0 {
        writeln!(out, "failed_cells={failed}")?;
    }
    Ok(())
}

fn qkey(c: &crate::sweep::CellRecord) -> f64 {
    c.q.and_then(|q| q.value()).unwrap_or(f64::INFINITY)
}

pub fn cmd_waterfall(cfg: &RunConfig, b_mg: Option<f64>, p_mw: Option<Vec<f64>>, out: &mut dyn Write) -> Result<()> {
    let sc = cfg.scenario()?;
    let b = mg_to_gauss(b_mg.unwrap_or(cfg.waterfall.b_mg));
    let ps = p_mw.unwrap_or_else(|| cfg.waterfall.p_values());
    let spectra = spectrum_waterfall(&sc, b, &ps, &cfg.signal, cfg.seed_base)?;
    let fmax = cfg.waterfall.max_freq_hz;
    let clipped: Vec<Spectrum> = spectra
        .iter()
        .map(|s| {
            let n = s.frequencies.iter().take_while(|&&f| f <= fmax).count();
            Spectrum {
                frequencies: s.frequencies[..n].to_vec(),
                magnitudes: s.magnitudes[..n].to_vec(),
                bin_width: s.bin_width,
            }
        })
        .collect();
    write_file(&cfg.out_dir, "waterfall.csv", |w| {
        crate::sweep::write_waterfall_csv(&ps, &clipped, w)
    })?;
    let (wa0, _) = bare_splittings(&sc.species, b)?;
    writeln!(out, "b_mg={} larmor_hz={}", gauss_to_mg(b), rad_to_hz(wa0))?;
    writeln!(out, "p_mw,peak_hz,peak_magnitude")?;
    for (p, s) in ps.iter().zip(&spectra) {
        let pk = s.peak();
        writeln!(out, "{p},{},{}", pk.frequency, pk.magnitude)?;
    }
    Ok(())
}

/// Parse `args`, run, and return the process exit code: 0 on success, 2 for
/// configuration or usage errors, 3 for numeric failures. Errors are printed
/// to standard error with an `error:` prefix.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
