//! lacuna: direction-set generation and checking, operator application on
//! F2D1 field files, experiments and plots.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O failure.

use clap::{Parser, Subcommand};
use lacuna::directions::{
    canonical_lacunary, from_json, to_json, verify_order, Direction, DirectionSet,
};
use lacuna::dyadic::RatioQ;
use lacuna::error::CoreError;
use lacuna::experiments::{self, ExpConfig};
use lacuna::field::io::load_f2d1;
use lacuna::multipliers::{self, DirectionalKind};
use lacuna::operators::{self, ScaleGrid};
use lacuna::vectorfield;
use lacuna::Field64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lacuna", version, about = "Directional singular integrals on the discrete torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a canonical lacunary direction set as JSON.
    Gen {
        /// Lacunarity order D >= 0.
        #[arg(long)]
        order: u32,
        /// Constant as a fraction, e.g. 1/2.
        #[arg(long)]
        lambda: String,
        /// Comma-separated per-level ladder lengths (D entries).
        #[arg(long, default_value = "")]
        counts: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a direction-set file against its certificate.
    Check { set: PathBuf },
    /// Apply a named operator to an F2D1 field file.
    Apply {
        /// Operator name; see --help for the registry.
        #[arg(long)]
        op: String,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Direction-set JSON for set-indexed operators.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Single direction angle in revolutions.
        #[arg(long)]
        theta: Option<f64>,
        /// Truncation/averaging radius.
        #[arg(long)]
        eps: Option<f64>,
        /// Half-plane shift.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Dyadic scale index.
        #[arg(long)]
        k: Option<i32>,
        /// Directional projection kind: phi|psi|psi2|low|high.
        #[arg(long)]
        kind: Option<String>,
        /// Cone index (0-based, clockwise) for cone_restrict.
        #[arg(long)]
        cone_index: Option<usize>,
        /// Signs per cone, e.g. "+-0+", for signed_cone_sum.
        #[arg(long)]
        signs: Option<String>,
        /// Vector-field spec JSON for field operators.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Second output (even part) for odd_even_split.
        #[arg(long)]
        out2: Option<PathBuf>,
    },
    /// Run an experiment config and emit CSV.
    Exp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Record wall-clock runtimes (off by default so reruns are
        /// byte-identical).
        #[arg(long)]
        timings: bool,
    },
    /// Render an SVG chart from an experiment CSV.
    Plot {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    lacuna::init_thread_pool_from_env();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CoreError::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn parse_lambda(s: &str) -> Result<RatioQ, CoreError> {
    let err = || CoreError::Config(format!("lambda must be a fraction p/q in (0,1), got `{s}`"));
    let (p, q) = s.split_once('/').ok_or_else(err)?;
    let p: u64 = p.trim().parse().map_err(|_| err())?;
    let q: u64 = q.trim().parse().map_err(|_| err())?;
    let lam = RatioQ::new(p, q);
    if !lam.is_proper() {
        return Err(CoreError::BadLambda(p, q));
    }
    Ok(lam)
}

/// Write via a temp file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CoreError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default(),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn save_field_atomic(f: &Field64, path: &Path) -> Result<(), CoreError> {
    let mut buf = Vec::new();
    lacuna::field::io::write_f2d1(f, &mut buf)?;
    write_atomic(path, &buf)
}

fn load_set(path: &Path) -> Result<DirectionSet, CoreError> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

fn run(cli: Cli) -> Result<(), CoreError> {
    match cli.command {
        Command::Gen { order, lambda, counts, out } => {
            let lam = parse_lambda(&lambda)?;
            let counts: Vec<usize> = if counts.trim().is_empty() {
                Vec::new()
            } else {
                counts
                    .split(',')
                    .map(|c| {
                        c.trim().parse::<usize>().map_err(|_| {
                            CoreError::Config(format!("bad count `{c}` in --counts"))
                        })
                    })
                    .collect::<Result<_, _>>()?
            };
            let set = canonical_lacunary(order, lam, &counts)?;
            write_atomic(&out, to_json(&set)?.as_bytes())?;
            println!("wrote {} directions (order {order}, lambda {lam}) to {}", set.len(), out.display());
            Ok(())
        }
        Command::Check { set } => {
            let set = load_set(&set)?;
            let order = verify_order(&set)?;
            println!("order {order}, OK ({} directions)", set.len());
            Ok(())
        }
        Command::Apply {
            op,
            r#in,
            out,
            set,
            theta,
            eps,
            tau,
            k,
            kind,
            cone_index,
            signs,
            field,
            out2,
        } => {
            let input: Field64 = load_f2d1(&r#in)?;
            let args = ApplyArgs {
                set: set.as_deref().map(load_set).transpose()?,
                theta: theta.map(Direction::from_f64),
                eps,
                tau,
                k,
                kind,
                cone_index,
                signs,
                field: field
                    .as_deref()
                    .map(|p| -> Result<_, CoreError> {
                        let text = std::fs::read_to_string(p)?;
                        vectorfield::parse_spec(&text)
                    })
                    .transpose()?,
            };
            let (main_out, second) = apply_op(&op, &input, &args)?;
            save_field_atomic(&main_out, &out)?;
            if let Some(sec) = second {
                let p2 = out2.ok_or_else(|| {
                    CoreError::Config("odd_even_split needs --out2 for the even part".into())
                })?;
                save_field_atomic(&sec, &p2)?;
            }
            Ok(())
        }
        Command::Exp { config, out, timings } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg: ExpConfig = serde_json::from_str(&text)?;
            let rows = experiments::run_experiment(&cfg)?;
            write_atomic(&out, experiments::to_csv(&rows, timings).as_bytes())?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Plot { r#in, out } => {
            let text = std::fs::read_to_string(&r#in)?;
            let rows = experiments::from_csv(&text)?;
            if rows.is_empty() {
                return Err(CoreError::Config("no rows to plot".into()));
            }
            write_atomic(&out, experiments::plot::render_svg(&rows).as_bytes())?;
            Ok(())
        }
    }
}

struct ApplyArgs {
    set: Option<DirectionSet>,
    theta: Option<Direction>,
    eps: Option<f64>,
    tau: f64,
    k: Option<i32>,
    kind: Option<String>,
    cone_index: Option<usize>,
    signs: Option<String>,
    field: Option<Vec<vectorfield::ScalarLipschitzField>>,
}

impl ApplyArgs {
    fn dir(&self) -> Result<Direction, CoreError> {
        self.theta
            .clone()
            .or_else(|| self.set.as_ref().and_then(|s| s.dirs().first().cloned()))
            .ok_or_else(|| CoreError::Config("operator needs --theta or --set".into()))
    }

    fn set(&self) -> Result<&DirectionSet, CoreError> {
        self.set.as_ref().ok_or_else(|| CoreError::Config("operator needs --set".into()))
    }

    fn eps(&self) -> Result<f64, CoreError> {
        self.eps.ok_or_else(|| CoreError::Config("operator needs --eps".into()))
    }

    fn k(&self) -> Result<i32, CoreError> {
        self.k.ok_or_else(|| CoreError::Config("operator needs --k".into()))
    }

    /// Nearest dyadic radius level for a requested eps on this grid.
    fn level_for(&self, n: usize) -> Result<(ScaleGrid, usize), CoreError> {
        let grid = ScaleGrid::dyadic(n);
        let eps = self.eps()?;
        let lvl = (eps * n as f64).log2().round().max(0.0) as u32;
        let idx = grid
            .levels()
            .iter()
            .position(|&l| l == lvl.min(*grid.levels().last().unwrap()))
            .unwrap();
        Ok((grid, idx))
    }
}

fn real_to_field(r: lacuna::Real64) -> Field64 {
    r.to_complex()
}

fn apply_op(
    name: &str,
    f: &Field64,
    args: &ApplyArgs,
) -> Result<(Field64, Option<Field64>), CoreError> {
    let n = f.width();
    let grid = ScaleGrid::dyadic(n);
    let out = match name {
        "hilbert_dir" => multipliers::hilbert_dir(f, &args.dir()?),
        "half_plane" => multipliers::half_plane(f, &args.dir()?, args.tau),
        "trunc_hilbert_dir" => operators::trunc_hilbert_dir(f, &args.dir()?, args.eps()?),
        "trunc_hilbert_inner" => operators::trunc_hilbert_inner(f, &args.dir()?, args.eps()?),
        "directional_average" => {
            let (grid, idx) = args.level_for(n)?;
            real_to_field(operators::directional_average(f, &args.dir()?, &grid, idx))
        }
        "cone_restrict" => {
            let set = args.set()?;
            let cones = multipliers::cones_of(set)?;
            let idx = args
                .cone_index
                .ok_or_else(|| CoreError::Config("cone_restrict needs --cone-index".into()))?;
            let cone = cones.get(idx).ok_or_else(|| {
                CoreError::Config(format!("cone index {idx} out of range (have {})", cones.len()))
            })?;
            multipliers::cone_restrict(f, cone)
        }
        "signed_cone_sum" => {
            let set = args.set()?;
            let text = args
                .signs
                .as_deref()
                .ok_or_else(|| CoreError::Config("signed_cone_sum needs --signs".into()))?;
            let signs: Vec<i8> = text
                .chars()
                .map(|c| match c {
                    '+' => Ok(1i8),
                    '-' => Ok(-1),
                    '0' => Ok(0),
                    other => Err(CoreError::Config(format!("bad sign `{other}`"))),
                })
                .collect::<Result<_, _>>()?;
            multipliers::signed_cone_sum(f, set, &signs)?
        }
        "lp_radial" => multipliers::lp_radial(f, args.k()?),
        "lp_directional" => {
            let kind = match args.kind.as_deref() {
                Some("phi") => DirectionalKind::Phi,
                Some("psi") => DirectionalKind::Psi,
                Some("psi2") => DirectionalKind::PsiTilde,
                Some("low") => DirectionalKind::LowPass,
                Some("high") => DirectionalKind::HighPass,
                other => {
                    return Err(CoreError::Config(format!(
                        "lp_directional needs --kind phi|psi|psi2|low|high, got {other:?}"
                    )))
                }
            };
            multipliers::lp_directional(f, &args.dir()?, args.k()?, kind)
        }
        "odd_even_split" => {
            let (odd, even) = multipliers::odd_even_split(f, args.set()?)?;
            return Ok((odd, Some(even)));
        }
        "max_hilbert" => real_to_field(operators::max_hilbert(f, args.set()?, false)?.value),
        "max_hilbert_plus" => real_to_field(operators::max_hilbert(f, args.set()?, true)?.value),
        "max_average" => real_to_field(operators::max_average(f, args.set()?, &grid)?.value),
        "max_trunc_hilbert" => {
            real_to_field(operators::max_trunc_hilbert(f, args.set()?, &grid)?.value)
        }
        "square_fn_sfe" => real_to_field(
            operators::square_fn_sfe(f, args.set()?, multipliers::radial_scale_range(n))?,
        ),
        "square_fn_cww" => real_to_field(
            operators::square_fn_cww(f, args.set()?, multipliers::radial_scale_range(n))?,
        ),
        "gamma0_restrict" => vectorfield::gamma0_restrict(f),
        "trunc_hilbert_field" => {
            let lams = args
                .field
                .as_ref()
                .ok_or_else(|| CoreError::Config("trunc_hilbert_field needs --field".into()))?;
            let vf = vectorfield::build_vd(n, lams)?;
            vectorfield::trunc_hilbert_field(f, &vf, args.eps()?)?
        }
        other => return Err(CoreError::UnknownOperator(other.into())),
    };
    Ok((out, None))
}
