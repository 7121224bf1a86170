use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "onofri-lab",
    version,
    about = "Rigidity thresholds, flows and constants of Moser-Trudinger-Onofri inequalities",
    long_about = "Rigidity thresholds, flows and constants of Moser-Trudinger-Onofri inequalities.\n\n\
Exit codes: 0 success, 1 numerical failure, 2 invalid arguments, 3 identity or acceptance failure.\n\
ONOFRI_LAB_JOBS overrides --jobs."
)]
pub struct Cli {
    /// Worker threads for concurrent runs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form constants of the curvature-dimension argument.
    #[command(subcommand)]
    Constants(ConstantsCmd),
    /// Eigenvalues of the Laplacian.
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// Solutions of -½Δu + λ = e^u: multistart rigidity and bifurcation.
    #[command(subcommand)]
    Rigidity(RigidityCmd),
    /// Minimization of the curvature-weighted quotient λ⋆ over zonal fields.
    #[command(name = "lambda-star", subcommand)]
    LambdaStar(LambdaStarCmd),
    /// The mass-preserving flow along which F_λ decreases at rate G_λ.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Weighted Onofri inequalities on the plane.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Numerical checks of the integral identities.
    #[command(subcommand)]
    Identities(IdentitiesCmd),
}

#[derive(Debug, Subcommand)]
pub enum ConstantsCmd {
    /// θ₀(d) = 16(d-1)²/((6-d)(d+2)), where b² - 4ac vanishes.
    Theta0 {
        /// Dimension, decimal or ratio such as 3/2.
        #[arg(long)]
        d: String,
    },
    /// Coefficients a, b, c of the quadratic form in (L u, M u).
    Abc {
        #[arg(long)]
        d: String,
        #[arg(long)]
        theta: String,
    },
    /// δ = b² - 4ac and the sign of 16(d-1)² - (6-d)(d+2)θ.
    Discriminant {
        #[arg(long)]
        d: String,
        #[arg(long)]
        theta: String,
    },
    /// f₁ = 1 - θ₀ + θ₀x, f₂ = d(2-d) + (d-1)²x and their gap.
    Fontenas {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        x: f64,
    },
    /// λ ≤ ½λ₁(1-θ) + (θ/2)(d/(d-1))ρ with the optimal θ.
    CurvatureBound {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        lambda1: f64,
        #[arg(long)]
        theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Circle,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    UnitRadius,
    UnitVolume,
}

/// Circle period or sphere size.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Sphere radius (overrides --normalization).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
    /// Circle period.
    #[arg(long)]
    pub period: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SpectrumCmd {
    /// First positive eigenvalue of -Δ (4π²/L² on the circle, 2/a² on the sphere).
    Lambda1 {
        #[arg(long, value_enum)]
        geometry: GeometryArg,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RigidityArgs {
    /// Comma-separated values of λ.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Bifurcation scan `lo:hi:steps` of the linearization at the constant solution.
    #[arg(long)]
    pub scan: Option<String>,
    /// Random initial fields per λ.
    #[arg(long, default_value_t = 8)]
    pub inits: usize,
    /// Largest amplitude of the random perturbation of log λ.
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    /// Follow the nonconstant branch to each λ instead (circle only).
    #[arg(long)]
    pub nonconstant: bool,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// CSV destination (stdout by default).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum RigidityCmd {
    /// Periodic problem -½u'' + λ = e^u; rigidity below λ = 2π² for unit period.
    Circle(RigidityArgs),
    /// Zonal problem on the sphere; rigidity below λ = λ⋆.
    Sphere(RigidityArgs),
}

#[derive(Debug, Subcommand)]
pub enum LambdaStarCmd {
    /// inf over zonal u of ∫(‖Lu - ½Mu‖² + ρ|∇u|²)e^{-u/2} / ∫|∇u|²e^{-u/2}.
    Sphere {
        #[arg(long, value_enum, default_value = "unit-radius")]
        normalization: NormalizationArg,
        /// Sphere radius (overrides --normalization).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 12)]
        modes: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write the minimizing field as CSV.
        #[arg(long)]
        min_field_file: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FlowCmd {
    /// ∂f/∂t = (Δf + ½|∇f|²)e^{-f/2}; conserves ∫e^f and dF_λ/dt = -G_λ.
    Sphere {
        #[arg(long)]
        lambda: f64,
        /// `cos[:a]`, `legendre:l:a`, `const:c`, `random:seed[:amp]` or `file:path`.
        #[arg(long, default_value = "cos")]
        init: String,
        #[arg(long)]
        t_final: f64,
        #[arg(long, default_value_t = 0.25)]
        safety: f64,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Keep every k-th step in the trace.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Trace CSV destination (stdout by default; a JSON summary then goes to stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Plane discretization shared by the weight commands.
#[derive(Debug, Clone, Args)]
pub struct PlaneArgs {
    /// Node count (default 256, or 192 for Keller-Segel weights).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Truncation radius (default 20, or 12 for Keller-Segel weights).
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum WeightsCmd {
    /// Λ⋆ = inf(-Δ log μ)/(8πμ) for `stereographic`, `gaussian:σ`, `perturbed:a`,
    /// `keller-segel:M` or `ks-selfsim:M:ε`.
    LambdaStar {
        #[arg(long)]
        weight: String,
        #[command(flatten)]
        plane: PlaneArgs,
        /// Write r, mu, g, dg, lap_g as CSV.
        #[arg(long)]
        profile_csv: Option<PathBuf>,
    },
    /// Radial stationary Keller-Segel profile of mass M < 8π.
    SolveKs {
        #[arg(long)]
        mass: f64,
        /// Self-similar drift ε (0 for the plain problem).
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[command(flatten)]
        plane: PlaneArgs,
        #[arg(long)]
        profile_csv: Option<PathBuf>,
    },
    /// e^{-Var h}[1 + ⅛ inf (1+r²)²Δh] for h = a/(1+r²), against the computed Λ⋆.
    Perturbation {
        #[arg(long)]
        amplitude: f64,
        #[command(flatten)]
        plane: PlaneArgs,
    },
    /// Multistart for -(1/8π)Δu + λμ = λe^u μ with ∫e^u dμ = 1.
    El {
        #[arg(long, default_value = "stereographic")]
        weight: String,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        inits: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        #[arg(long, default_value_t = 20.0)]
        radius: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// (1/16π)∫|∇u|² - λ[log∫e^u dμ - ∫u dμ] on the dilations u_σ or a field file.
    Deficit {
        #[arg(long, default_value = "stereographic")]
        weight: String,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        sigma: Option<f64>,
        /// Field CSV (its geometry header must be a plane).
        #[arg(long)]
        field: Option<PathBuf>,
        #[command(flatten)]
        plane: PlaneArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Circle,
    Sphere,
    Plane,
    All,
}

#[derive(Debug, Subcommand)]
pub enum IdentitiesCmd {
    /// Checks every identity of a suite on seeded random fields; exit 3 on any failure.
    Run {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Defaults per suite: 1e-8 circle, 1e-7 sphere, 1e-5 plane.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Plane weight (stereographic by default).
        #[arg(long)]
        weight: Option<String>,
        /// Report CSV destination (stdout by default).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Summary JSON destination.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}
