use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use spacing_lab::cd_kernel::{recurrence_coefficients, unfolded_kernel_error, DEFAULT_QUAD_POINTS};
use spacing_lab::equilibrium::build_measure;
use spacing_lab::experiments::{
    limiting_measure, load_configuration, run_intensity_study, run_rate_study, save_configuration, StudyConfig,
};
use spacing_lab::gaudin::{GaudinParams, GaudinTable};
use spacing_lab::sampling::{sample_replicas, McmcParams, SamplerChoice};
use spacing_lab::spacing::{empirical_spacing_cdf, kolmogorov_distance, select_interval, window_spacings, IntervalSpec};
use spacing_lab::{Ensemble, Error, Model, Result};

#[derive(Parser)]
#[command(name = "spacing-lab", version, about = "Nearest-neighbour spacing statistics for log-gases")]
struct Cli {
    /// Base seed (studies: overrides the seed in the study file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (studies: overrides `out_dir` in the study file).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArg {
    /// Model file; the GUE (`V(t) = t²`) when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl ModelArg {
    fn load(&self) -> Result<Model> {
        match &self.model {
            Some(p) => Model::load(p),
            None => Ok(Model::gue()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw replicas and store one CSV per configuration.
    Sample {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long, default_value = "auto")]
        sampler: SamplerChoice,
        #[arg(long, default_value_t = 2000)]
        burn_in: usize,
        #[arg(long, default_value_t = 50)]
        thinning: usize,
        /// Target directory (default: `<out-dir>/samples`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate density and distribution function of the limiting measure.
    Equilibrium {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build (or reuse) the Gaudin table.
    GaudinTable {
        #[arg(long, default_value_t = 5.0)]
        smax: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long, default_value_t = 40)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kolmogorov distance to the Gaudin law for stored configurations.
    Spacings {
        /// Directory of configuration files.
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value = "q:0.25,0.75")]
        interval: IntervalSpec,
        /// Gaudin table file (default: cached table in the output directory).
        #[arg(long)]
        gaudin: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup error of the unfolded kernel against the sine kernel.
    UniversalityCheck {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long = "n", required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value = "q:0.25,0.75")]
        interval: IntervalSpec,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean Kolmogorov distance per window and log-log rate fit.
    RateStudy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pooled spacing distribution against single replicas.
    IntensityStudy {
        #[arg(long)]
        config: PathBuf,
    },
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cached_table(dir: &Path, params: GaudinParams) -> Result<GaudinTable> {
    fs::create_dir_all(dir)?;
    let (table, status) = GaudinTable::load_or_build(GaudinTable::cache_path(dir, params), params)?;
    info!("Gaudin table: {status:?}");
    Ok(table)
}

fn load_study(cli: &Cli, path: &Path) -> Result<StudyConfig> {
    let mut c = StudyConfig::load(path)?;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        c.out_dir = dir.clone();
    }
    Ok(c)
}

fn run(cli: &Cli) -> Result<()> {
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Sample {
            model,
            n,
            replicas,
            sampler,
            burn_in,
            thinning,
            out,
        } => {
            let model = model.load()?;
            let params = McmcParams {
                burn_in: *burn_in,
                thinning: *thinning,
                ..McmcParams::default()
            };
            let configs = sample_replicas(&model, *n, *replicas, *sampler, &params, seed)?;
            let dir = out.clone().unwrap_or_else(|| out_dir.join("samples"));
            fs::create_dir_all(&dir)?;
            for c in &configs {
                save_configuration(c, dir.join(format!("replica_{:05}.csv", c.stream)))?;
            }
            println!("wrote {} configurations to {}", configs.len(), dir.display());
        }
        Command::Equilibrium { model, nodes, tol, out } => {
            let model = model.load()?;
            let m = match &model.ensemble {
                Ensemble::Invariant { v, .. } => build_measure(v, *nodes, *tol)?,
                Ensemble::Repulsive { .. } => limiting_measure(&model)?,
            };
            let mut csv = String::from("t,density,cdf\n");
            for &(t, d) in m.density_nodes() {
                let _ = writeln!(csv, "{t:?},{d:?},{:?}", m.cdf(t));
            }
            write_output(&out.clone().unwrap_or_else(|| out_dir.join("equilibrium.csv")), &csv)?;
        }
        Command::GaudinTable { smax, step, order, out } => {
            let params = GaudinParams {
                s_max: *smax,
                step: *step,
                order: *order,
            };
            let path = out.clone().unwrap_or_else(|| GaudinTable::cache_path(&out_dir, params));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let (_, status) = GaudinTable::load_or_build(&path, params)?;
            println!("{} ({status:?})", path.display());
        }
        Command::Spacings {
            input,
            model,
            interval,
            gaudin,
            out,
        } => {
            let model = model.load()?;
            let m = limiting_measure(&model)?;
            let table = match gaudin {
                Some(p) => GaudinTable::load(p)?,
                None => cached_table(&out_dir, GaudinParams::default())?,
            };
            let mut files: Vec<PathBuf> = fs::read_dir(input)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            files.retain(|p| p.extension().is_some_and(|e| e == "csv"));
            files.sort();
            let mut csv = String::from("replica_id,n_spacings,ks_distance\n");
            for f in &files {
                let x = load_configuration(f)?;
                let (s, _) = window_spacings(&x, &m, interval)?;
                let d = match empirical_spacing_cdf(&s) {
                    Ok(e) => format!("{:?}", kolmogorov_distance(&e, &table)),
                    Err(Error::NoSpacings) => "NaN".to_string(),
                    Err(e) => return Err(e),
                };
                let _ = writeln!(csv, "{},{},{d}", x.stream, s.len());
            }
            write_output(&out.clone().unwrap_or_else(|| out_dir.join("spacings.csv")), &csv)?;
        }
        Command::UniversalityCheck {
            model,
            sizes,
            interval,
            grid,
            out,
        } => {
            let model = model.load()?;
            let Ensemble::Invariant { v, f } = &model.ensemble else {
                return Err(Error::Domain("the kernel check needs an invariant ensemble".into()));
            };
            let m = build_measure(v, 256, 1e-12)?;
            let mut csv = String::from("N,sup_error\n");
            for &n in sizes {
                let r = recurrence_coefficients(v, f.as_ref(), n, n, DEFAULT_QUAD_POINTS)?;
                let window = select_interval(interval, n, None)?;
                let err = unfolded_kernel_error(&r, &m, window, *grid)?;
                let _ = writeln!(csv, "{n},{err:?}");
            }
            write_output(&out.clone().unwrap_or_else(|| out_dir.join("universality.csv")), &csv)?;
        }
        Command::RateStudy { config } => {
            let c = load_study(cli, config)?;
            let table = cached_table(&c.out_dir, c.gaudin)?;
            let study = run_rate_study(&c, &table)?;
            write_output(&c.out_dir.join("rate_study.csv"), &study.report.to_csv())?;
            write_output(&c.out_dir.join("rate_fit.csv"), &study.fit_csv())?;
        }
        Command::IntensityStudy { config } => {
            let c = load_study(cli, config)?;
            let table = cached_table(&c.out_dir, c.gaudin)?;
            let report = run_intensity_study(&c, &table)?;
            write_output(&c.out_dir.join("intensity_study.csv"), &report.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
