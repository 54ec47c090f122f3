mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Complex geodesics, spherical representations and pluricomplex Poisson
/// kernels on strongly linearly convex domains.
///
/// Exit codes: 0 success, 1 input or I/O error, 2 solver failure,
/// 3 verification failure.
#[derive(Parser, Debug)]
#[command(name = "lempertkit", version, about, long_about = None)]
pub struct Cli {
    /// Seed for every random sample a command draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, env = "LEMPERTKIT_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Progress and timings on stderr; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stationary discs from JSON problem files.
    #[command(subcommand)]
    Geodesic(GeodesicCmd),
    /// Kobayashi distance between two interior points.
    Distance(DistanceArgs),
    /// Kobayashi–Royden metric at an interior point.
    Metric(MetricArgs),
    /// Boundary spherical representation Ψ_p.
    #[command(subcommand)]
    Rep(RepCmd),
    /// Horosphere membership through the image in the ball.
    Horosphere(HorosphereArgs),
    /// Busemann function by the distance limit and by the kernel.
    Busemann(BusemannArgs),
    /// Monge–Ampère checks of the pluricomplex Poisson kernel.
    #[command(subcommand)]
    Ma(MaCmd),
    /// CSV dump of the Poisson kernel or Green function over a real slice.
    Field(FieldArgs),
    /// Burns–Krantz inequalities for a self-map of the disc.
    #[command(subcommand)]
    Rigidity(RigidityCmd),
    /// Seeded property suite with a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct DomainArg {
    /// Domain descriptor: a JSON file, or inline JSON.
    #[arg(long)]
    pub domain: String,
    /// Solver configuration JSON; unspecified fields take defaults.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Args, Debug)]
pub struct OutArg {
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GeodesicCmd {
    /// Solve a stationary problem; exit 0 iff the certificate passes.
    Solve {
        #[command(flatten)]
        domain: DomainArg,
        /// Problem JSON: boundary, interior-point or interior-direction.
        #[arg(long)]
        problem: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Recompute the certificate of a stored pair.
    Certify {
        #[command(flatten)]
        domain: DomainArg,
        /// GeodesicPair JSON written by `geodesic solve`.
        #[arg(long)]
        pair: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub domain: DomainArg,
    #[arg(long)]
    pub z: String,
    #[arg(long)]
    pub w: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    #[command(flatten)]
    pub domain: DomainArg,
    #[arg(long)]
    pub z: String,
    /// Tangent vector.
    #[arg(long)]
    pub v: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct BaseArgs {
    #[command(flatten)]
    pub domain: DomainArg,
    /// Boundary base point p; `ray:<direction>` projects from the anchor.
    #[arg(long)]
    pub p: String,
}

#[derive(Subcommand, Debug)]
pub enum RepCmd {
    /// Ψ_p(z) for z in the closure minus p.
    Map {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        z: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Ψ_p⁻¹(w) for w in the closed ball.
    Inverse {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        w: String,
        #[command(flatten)]
        out: OutArg,
    },
    Horosphere(HorosphereArgs),
    Busemann(BusemannArgs),
}

#[derive(Args, Debug)]
pub struct HorosphereArgs {
    #[command(flatten)]
    pub base: BaseArgs,
    /// Reference point z₀.
    #[arg(long)]
    pub z0: String,
    #[arg(long)]
    pub radius: f64,
    /// Point to classify.
    #[arg(long)]
    pub z: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct BusemannArgs {
    #[command(flatten)]
    pub base: BaseArgs,
    #[arg(long)]
    pub z: String,
    #[arg(long)]
    pub z0: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum MaCmd {
    /// FD Hessian of the kernel at seeded interior samples; exit 3 on FAIL.
    Verify {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Samples are drawn from the domain shrunk by this factor.
        #[arg(long)]
        shrink: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Same as the top-level `field` command.
    Field(FieldArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    /// P_{Ω,p}(z).
    Poisson,
    /// g_Ω(z, w) with pole w.
    Green,
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    #[command(flatten)]
    pub base: BaseArgs,
    /// `a:b:n` for s, optionally `,c:d:m` for t; z = origin + s·u + t·v.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub origin: Option<String>,
    /// First slice direction; e₁ by default.
    #[arg(long)]
    pub u: Option<String>,
    /// Second slice direction; e₂ by default.
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long, value_enum, default_value_t = FieldKind::Poisson)]
    pub kind: FieldKind,
    /// Pole of the Green function.
    #[arg(long)]
    pub w: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum RigidityCmd {
    /// Margins of both inequalities on a disc grid; exit 3 on FAIL.
    Verify {
        /// Self-map JSON: a file, or inline JSON.
        #[arg(long)]
        f: String,
        /// `RADIIxANGLES`, e.g. 64x256.
        #[arg(long, default_value = "64x256")]
        grid: String,
        /// Grid points with |ζ−1| below this are skipped.
        #[arg(long, default_value_t = 1e-3)]
        exclusion: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// rigidity, ma, rep or geodesics.
    pub suite: String,
    /// Domain descriptor; the unit ball in ℂ² by default.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: cannot start {} workers: {e}", cli.jobs);
            return ExitCode::from(io::EXIT_INPUT);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
