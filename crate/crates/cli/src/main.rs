use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use optomech_core::covariance::{bosonic_physicality, solve_lyapunov, PhysicalityReport};
use optomech_core::dynamics::{LinearModel, Mat12, COMPONENTS};
use optomech_core::entanglement::{analyze, EntanglementReport};
use optomech_core::spectra::{default_grid, linspace, squeezing_spectrum, L_X, L_Y};
use optomech_core::sweep::{emit, run_sweep, Format, SweepSpec};
use optomech_core::{Config, Error, SystemParams};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "optomech", version, about = "Two-mode optomechanical entanglement with an injected atomic medium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the steady state and print it as JSON.
    Steady(Common),
    /// Eigenvalues of the drift matrix, or the drift and diffusion matrices as CSV.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Dump A and D as CSV instead of the eigenvalue report.
        #[arg(long)]
        matrix: bool,
    },
    /// Stationary 12x12 covariance matrix as CSV.
    Covariance(Common),
    /// Duan and partial-transpose criteria for the mirror and field pairs.
    Entangle(Common),
    /// Output squeezing spectrum S_OUT as CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of grid points.
        #[arg(long)]
        grid: Option<usize>,
        /// Half-width of the symmetric grid in Hz (default 3 mechanical frequencies).
        #[arg(long)]
        omega_max: Option<f64>,
        /// Add the two EPR variances as extra columns.
        #[arg(long)]
        variances: bool,
    },
    /// Run a one-dimensional parameter sweep.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Exit 2 for usage and configuration problems, 1 for everything else.
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Versions {
    optomech_core: &'static str,
    optomech_cli: &'static str,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    input: &'a Path,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<&'a SystemParams>,
    versions: Versions,
    outputs: Vec<PathBuf>,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))
}

/// Writes the result to `--out` (plus a manifest) or to standard output.
fn deliver(
    subcommand: &str,
    input: &Path,
    parameters: Option<&SystemParams>,
    out: Option<&Path>,
    body: &[u8],
) -> Result<(), Failure> {
    let Some(out) = out else {
        return std::io::stdout().write_all(body).map_err(|e| Failure::Domain(format!("stdout: {e}")));
    };
    write_file(out, body)?;
    let manifest_file = manifest_path(out);
    let manifest = RunManifest {
        subcommand,
        input,
        parameters,
        versions: Versions { optomech_core: optomech_core::VERSION, optomech_cli: env!("CARGO_PKG_VERSION") },
        outputs: vec![out.to_owned(), manifest_file.clone()],
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Domain(e.to_string()))?;
    write_file(&manifest_file, format!("{text}\n").as_bytes())
}

fn load(path: &Path) -> Result<(Config, SystemParams), Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!("config file not found: {}", path.display())));
    }
    let cfg = Config::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let params = cfg.validate().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((cfg, params))
}

fn json_body<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Domain(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn matrix_rows(out: &mut String, label: &str, m: &Mat12) {
    for (i, name) in COMPONENTS.iter().enumerate() {
        let _ = write!(out, "{label},{name}");
        for j in 0..COMPONENTS.len() {
            let _ = write!(out, ",{}", m[(i, j)]);
        }
        out.push('\n');
    }
}

fn header(first: &[&str]) -> String {
    let mut h = first.join(",");
    for c in COMPONENTS {
        h.push(',');
        h.push_str(c);
    }
    h.push('\n');
    h
}

#[derive(Serialize)]
struct EntangleOutput {
    #[serde(flatten)]
    report: EntanglementReport,
    physicality: PhysicalityReport,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Steady(c) => {
            let (_, p) = load(&c.config)?;
            let s = optomech_core::solve_steady_state(&p)?;
            deliver("steady", &c.config, Some(&p), c.out.as_deref(), &json_body(&s)?)
        }
        Command::Stability { common: c, matrix } => {
            let (_, p) = load(&c.config)?;
            let (_, m) = LinearModel::from_params(&p)?;
            let body = if matrix {
                let mut s = header(&["matrix", "row"]);
                matrix_rows(&mut s, "A", &m.a_mat);
                matrix_rows(&mut s, "D", &m.d_mat);
                s.into_bytes()
            } else {
                json_body(&m.stability()?)?
            };
            deliver("stability", &c.config, Some(&p), c.out.as_deref(), &body)
        }
        Command::Covariance(c) => {
            let (_, p) = load(&c.config)?;
            let (_, m) = LinearModel::from_params(&p)?;
            let cm = solve_lyapunov(&m.a_mat, &m.d_mat)?;
            let mut s = header(&["component"]);
            for (i, name) in COMPONENTS.iter().enumerate() {
                s.push_str(name);
                for j in 0..COMPONENTS.len() {
                    let _ = write!(s, ",{}", cm.v[(i, j)]);
                }
                s.push('\n');
            }
            deliver("covariance", &c.config, Some(&p), c.out.as_deref(), s.as_bytes())
        }
        Command::Entangle(c) => {
            let (_, p) = load(&c.config)?;
            let (_, m) = LinearModel::from_params(&p)?;
            let cm = solve_lyapunov(&m.a_mat, &m.d_mat)?;
            let out = EntangleOutput { report: analyze(&cm)?, physicality: bosonic_physicality(&cm) };
            deliver("entangle", &c.config, Some(&p), c.out.as_deref(), &json_body(&out)?)
        }
        Command::Spectrum { common: c, grid, omega_max, variances } => {
            let (_, p) = load(&c.config)?;
            let omega_grid = match (grid, omega_max) {
                (None, None) => default_grid(p.omega_m),
                (n, w) => {
                    let n = n.unwrap_or(optomech_core::spectra::DEFAULT_GRID_POINTS);
                    let w = w
                        .map(|hz| std::f64::consts::TAU * hz)
                        .unwrap_or_else(|| optomech_core::spectra::DEFAULT_GRID_SPAN * p.omega_m[0].max(p.omega_m[1]));
                    if n < 2 || !(w > 0.0 && w.is_finite()) {
                        return Err(Failure::Usage("--grid must be >= 2 and --omega-max positive".into()));
                    }
                    linspace(-w, w, n)
                }
            };
            let (_, m) = LinearModel::from_params(&p)?;
            let series = squeezing_spectrum(&m, &omega_grid, variances)?;
            let mut s = String::from(if variances { "omega_hz,s_out,var_x,var_y\n" } else { "omega_hz,s_out\n" });
            for (k, (w, v)) in series.omega_grid.iter().zip(&series.s_out).enumerate() {
                let _ = write!(s, "{},{}", w / std::f64::consts::TAU, v);
                if let Some(blocks) = &series.v_out {
                    let b = &blocks[k];
                    let quad = |l: &[f64; 4]| {
                        (0..4)
                            .flat_map(|i| (0..4).map(move |j| (i, j)))
                            .map(|(i, j)| l[i] * b[(i, j)] * l[j])
                            .sum::<f64>()
                    };
                    let _ = write!(s, ",{},{}", quad(&L_X), quad(&L_Y));
                }
                s.push('\n');
            }
            deliver("spectrum", &c.config, Some(&p), c.out.as_deref(), s.as_bytes())
        }
        Command::Sweep { spec, out, format } => {
            if !spec.exists() {
                return Err(Failure::Usage(format!("sweep spec not found: {}", spec.display())));
            }
            let sweep = SweepSpec::load(&spec).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
            let rows = run_sweep(&sweep).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            let mut body = Vec::new();
            emit(&rows, &sweep.outputs, format, &mut body)?;
            deliver("sweep", &spec, None, out.as_deref(), &body)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
