use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lacewalk::lattice::parse_rational;
use lacewalk::walks::DEFAULT_WORK_LIMIT;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "lacewalk", version, about = "Exact series and numerical audits for the weakly self-avoiding walk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate walks and write the two-point series G.
    Enumerate(RunArgs),
    /// Check G = delta + z Omega D * G + Pi * G exactly.
    Verify(VerifyArgs),
    /// Write the kernel Pi with its decay audit.
    Pi(RunArgs),
    /// Audit the random-walk Green function C_mu (mu from --z, default 1/Omega).
    Green(RunArgs),
    /// Scan F-hat(k) / |k|^2 on the torus grid.
    Infrared(RunArgs),
    /// lambda, mu, E and the two-point identity table at z.
    Decompose(RunArgs),
    /// The bootstrap ratio b(z) over the box.
    Bootstrap(RunArgs),
    /// Run every stage and emit one JSON report.
    Report(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    /// Interaction strength as "p/q" or a finite decimal.
    #[arg(long, default_value = "1/10")]
    pub beta: String,
    /// Truncation order N in z.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    /// Fugacity: "p/q", a decimal, or "auto:<f>zc"; comma-separated for several.
    #[arg(long)]
    pub z: Option<String>,
    /// Radius of the box (sup norm) for tables and the bootstrap.
    #[arg(long = "box", default_value_t = 6)]
    pub box_radius: u32,
    /// Grid size L for the infrared scan.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Torus side carrying G and f.
    #[arg(long, default_value_t = 32)]
    pub torus: usize,
    /// Midpoints per half-axis in the f-hat L1 audit.
    #[arg(long = "l1-grid", default_value_t = 16)]
    pub l1_grid: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long = "work-limit", default_value_t = DEFAULT_WORK_LIMIT)]
    pub work_limit: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// G-series file to check; its meta overrides --dim, --beta and --order.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Pi-series file; when absent Pi comes from a fresh enumeration.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZSpec {
    Exact(BigRational),
    /// A fraction of the estimated critical point.
    Auto(f64),
}

impl ZSpec {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("auto:") {
            let frac = rest
                .strip_suffix("zc")
                .ok_or_else(|| Failure::Usage(format!("z policy {s:?} must look like auto:0.9zc")))?;
            let f: f64 = frac.parse().map_err(|_| Failure::Usage(format!("bad fraction in {s:?}")))?;
            if !(f > 0.0 && f <= 1.0) {
                return Err(Failure::Usage(format!("fraction in {s:?} must lie in (0, 1]")));
            }
            return Ok(ZSpec::Auto(f));
        }
        let z = parse_rational(s).map_err(|e| Failure::Usage(e.to_string()))?;
        if z <= BigRational::zero() {
            return Err(Failure::Usage(format!("z = {z} must be positive")));
        }
        Ok(ZSpec::Exact(z))
    }

    pub fn describe(&self) -> String {
        match self {
            ZSpec::Exact(z) => z.to_string(),
            ZSpec::Auto(f) => format!("auto:{f}zc"),
        }
    }
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: usize,
    pub beta: BigRational,
    pub order: usize,
    pub z: Option<Vec<ZSpec>>,
    pub box_radius: u32,
    pub grid: usize,
    pub torus: usize,
    pub l1_grid: usize,
    pub threads: Option<usize>,
    pub work_limit: u128,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Walk lengths are stored in a byte and coordinates in `i32`.
const MAX_ORDER: usize = 60;
const MAX_DIM: usize = 16;

fn even(name: &str, v: usize, min: usize) -> Result<(), Failure> {
    if v < min || v % 2 == 1 {
        return Err(Failure::Usage(format!("--{name} = {v} must be even and at least {min}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Result<Self, Failure> {
        if a.dim == 0 || a.dim > MAX_DIM {
            return Err(Failure::Usage(format!("--dim = {} must lie in 1..={MAX_DIM}", a.dim)));
        }
        let beta = parse_rational(&a.beta).map_err(|e| Failure::Usage(e.to_string()))?;
        if beta < BigRational::zero() || beta >= BigRational::one() {
            return Err(Failure::Usage(format!("--beta = {beta} must lie in [0, 1)")));
        }
        if a.order > MAX_ORDER {
            return Err(Failure::Usage(format!("--order = {} exceeds {MAX_ORDER}", a.order)));
        }
        if a.box_radius == 0 {
            return Err(Failure::Usage("--box must be at least 1".into()));
        }
        even("grid", a.grid, 2)?;
        even("torus", a.torus, 4)?;
        even("l1-grid", a.l1_grid, 2)?;
        if a.box_radius as usize > a.torus / 2 {
            return Err(Failure::Usage(format!("--box = {} exceeds half the torus side {}", a.box_radius, a.torus / 2)));
        }
        if a.threads == Some(0) {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        if a.work_limit == 0 {
            return Err(Failure::Usage("--work-limit must be positive".into()));
        }
        let z = match &a.z {
            None => None,
            Some(s) => Some(s.split(',').map(ZSpec::parse).collect::<Result<Vec<_>, _>>()?),
        };
        Ok(RunConfig {
            dim: a.dim,
            beta,
            order: a.order,
            z,
            box_radius: a.box_radius,
            grid: a.grid,
            torus: a.torus,
            l1_grid: a.l1_grid,
            threads: a.threads,
            work_limit: a.work_limit,
            out: a.out.clone(),
            format: a.format,
        })
    }

    /// The single fugacity of commands that take one, or `default`.
    pub fn single_z(&self, default: ZSpec) -> Result<ZSpec, Failure> {
        match &self.z {
            None => Ok(default),
            Some(v) if v.len() == 1 => Ok(v[0].clone()),
            Some(_) => Err(Failure::Usage("this command takes a single --z".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_specs() {
        assert_eq!(ZSpec::parse("auto:0.9zc").unwrap(), ZSpec::Auto(0.9));
        assert_eq!(ZSpec::parse("1/10").unwrap(), ZSpec::Exact(lacewalk::lattice::rational(1, 10)));
        assert!(ZSpec::parse("auto:0.9").is_err());
        assert!(ZSpec::parse("auto:1.5zc").is_err());
        assert!(ZSpec::parse("-1/3").is_err());
        assert_eq!(ZSpec::Auto(0.95).describe(), "auto:0.95zc");
    }
}
