use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde_json::{json, Value};

use vecot::io::{
    self, canonical, expr, gen, load, read_json, run, verify, write_json, Field, GenSize, GridData, Problem,
    ProblemFile, RunOptions, VectorData,
};
use vecot::vector_ot::{dual_refinement_study, RefinementSpec};
use vecot::{Error, Result};

#[derive(Parser)]
#[command(name = "vecot", version, about = "Scalar and vector optimal transport with verified duality")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Problem file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Result file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Solver tolerance, overriding VECOT_TOL.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Suppress the summary on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scalar transport and its variants.
    SolveOt {
        #[arg(long, default_value = "plain")]
        variant: String,
    },
    /// Vector transport.
    SolveVot,
    /// Dominance between two vector measures.
    Dominate {
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        nu: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        strong: bool,
        #[arg(long)]
        blackwell: bool,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Grid refinement study of the optimal dual.
    Refine {
        /// Density components in `x`, e.g. "1,2x".
        #[arg(long)]
        density: String,
        /// Target values, `|Y| × d`.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value = "25,100,400")]
        grids: String,
        /// One cost expression in `x` per target atom.
        #[arg(long)]
        cost: Option<String>,
        /// Move an undominated two-atom target onto the grid's boundary.
        #[arg(long)]
        snap: bool,
    },
    /// Chain transport through intermediate measures.
    Chain {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        free_medium: bool,
    },
    /// Value of a zero-sum matrix game.
    Game {
        #[arg(long)]
        restrict: Option<PathBuf>,
    },
    /// Moment problem feasibility.
    Moment {
        #[arg(long = "M")]
        m_matrix: Option<PathBuf>,
        #[arg(long = "m")]
        target: Option<PathBuf>,
    },
    /// Trigonometric moments against the Toeplitz test.
    Trig {
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Convex conjugate and infimal convolution.
    Conj {
        #[arg(long)]
        infconv: Vec<PathBuf>,
    },
    /// Generate a reproducible instance.
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "4,3,2")]
        size: String,
    },
    /// Run the golden suite.
    Verify {
        /// Comma-separated groups to run.
        #[arg(long)]
        only: Option<String>,
    },
}

fn read(path: &Path) -> Result<Value> {
    read_json(path)
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    p.as_ref().ok_or_else(|| Error::InvalidInput(format!("missing --{flag}")))
}

/// Load `--input` as a problem file of one of `kinds`.
fn problem_of(g: &Global, kinds: &[&str]) -> Result<ProblemFile> {
    let p = load(need(&g.input, "input")?)?;
    if !kinds.contains(&p.problem.kind()) {
        return Err(Error::Schema {
            path: "kind".into(),
            msg: format!("expected {}, got {}", kinds.join(" or "), p.problem.kind()),
        });
    }
    Ok(p)
}

fn is_problem_file(v: &Value) -> bool {
    v.get("kind").is_some() && v.get("payload").is_some()
}

fn vector_data(path: &Path) -> Result<VectorData> {
    let v = read(path)?;
    let f = Field::root(&v);
    let values = if v.is_array() { f.nonneg_matrix()? } else { f.get("values")?.nonneg_matrix()? };
    let ref_weights = if v.is_array() { None } else { f.opt("refWeights")?.map(|w| w.weights()).transpose()? };
    Ok(VectorData { values, ref_weights })
}

fn weights(path: &Path) -> Result<Vec<f64>> {
    let v = read(path)?;
    let f = Field::root(&v);
    if v.is_array() {
        f.weights()
    } else {
        f.get("weights")?.weights()
    }
}

fn grid_data(v: &Value) -> Result<GridData> {
    let f = Field::root(v);
    let grid = f.get("grid")?.vec()?;
    let values = f.get("values")?.vec()?;
    Ok(GridData { grid, values })
}

fn emit(g: &Global, v: &Value) -> Result<()> {
    match &g.output {
        Some(p) => write_json(p, v),
        None => {
            print!("{}", canonical(v));
            Ok(())
        }
    }
}

fn solve(g: &Global, file: ProblemFile) -> Result<i32> {
    let opts = RunOptions {
        tol: g.tol.unwrap_or_else(vecot::tol::default_tol),
        seed: g.seed.unwrap_or(0),
    };
    let mut file = file;
    if g.tol.is_some() {
        file.tol = g.tol;
    }
    let out = run(&file, &opts)?;
    if !g.quiet {
        let value = out.result.get("value").and_then(Value::as_f64);
        match value {
            Some(v) => eprintln!("{}: {} value {v}", file.problem.kind(), out.status.name()),
            None => eprintln!("{}: {}", file.problem.kind(), out.status.name()),
        }
    }
    emit(g, &out.result)?;
    Ok(out.status.exit_code())
}

fn refine(g: &Global, density: &str, targets: &Path, grids: &str, cost: Option<&str>, snap: bool) -> Result<i32> {
    let comps = expr::parse_list(density)?;
    let targets = vector_data(targets)?.values;
    if targets.ncols() != comps.len() {
        return Err(Error::DimensionMismatch(format!(
            "density has {} components, targets have {}",
            comps.len(),
            targets.ncols()
        )));
    }
    let costs = match cost {
        Some(c) => expr::parse_list(c)?,
        None => vec![expr::Expr::Num(0.0); targets.nrows()],
    };
    if costs.len() != targets.nrows() {
        return Err(Error::DimensionMismatch("need one cost expression per target atom".into()));
    }
    let grids = grids
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidInput(format!("bad --grids: {e}")))?;
    let density_fn = |x: f64| comps.iter().map(|e| e.eval(x)).collect::<Vec<_>>();
    let cost_fn = |x: f64, y: usize| costs[y].eval(x);
    let report = dual_refinement_study(&RefinementSpec {
        density: &density_fn,
        targets,
        cost: &cost_fn,
        grids,
        snap,
    })?;
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|p| {
            json!({
                "n": p.n, "value": p.value, "dualValue": p.dual_value, "gap": (p.value - p.dual_value).abs(),
                "q": p.q, "targets": io::matrix(&p.targets),
            })
        })
        .collect();
    let trend = format!("{:?}", report.trend).to_lowercase();
    if !g.quiet {
        for p in &report.points {
            eprintln!("N = {:>5}  value {:.9}  q {:.6}", p.n, p.value, p.q);
        }
        eprintln!("trend: {trend}");
    }
    emit(g, &json!({"status": "optimal", "points": points, "trend": trend}))?;
    Ok(0)
}

fn execute(cli: Cli) -> Result<i32> {
    let g = &cli.global;
    match cli.cmd {
        Cmd::SolveOt { variant } => {
            let kind = match variant.as_str() {
                "plain" => "scalar_ot",
                v @ ("partial" | "capacity" | "invariant" | "multi" | "glue" | "local" | "strassen") => v,
                v => return Err(Error::InvalidInput(format!("unknown variant {v:?}"))),
            };
            solve(g, problem_of(g, &[kind])?)
        }
        Cmd::SolveVot => solve(g, problem_of(g, &["vector_ot", "martingale"])?),
        Cmd::Dominate { mu, nu, n, strong, blackwell, samples } => {
            let file = match (&mu, &nu) {
                (Some(a), Some(b)) => ProblemFile {
                    problem: Problem::Dominance {
                        mu: vector_data(a)?,
                        nu: vector_data(b)?,
                        n,
                        strong,
                        blackwell: blackwell.then_some(samples),
                    },
                    tol: None,
                    seed: g.seed,
                },
                _ => {
                    let mut p = problem_of(g, &["dominance"])?;
                    if let Problem::Dominance { n: pn, strong: ps, blackwell: pb, .. } = &mut p.problem {
                        *pn = n.or(*pn);
                        *ps |= strong;
                        if blackwell {
                            *pb = Some(samples);
                        }
                    }
                    p
                }
            };
            solve(g, file)
        }
        Cmd::Refine { density, targets, grids, cost, snap } => {
            refine(g, &density, &targets, &grids, cost.as_deref(), snap)
        }
        Cmd::Chain { n, free_medium } => {
            let mut p = problem_of(g, &["chain"])?;
            if let Problem::Chain { hops, lambda, .. } = &mut p.problem {
                if let Some(n) = n {
                    *hops = n;
                }
                if free_medium {
                    *lambda = None;
                }
            }
            solve(g, p)
        }
        Cmd::Game { restrict } => {
            let v = read(need(&g.input, "input")?)?;
            let mut p = if is_problem_file(&v) {
                ProblemFile::from_value(&v)?
            } else {
                let payoff: Array2<f64> = Field::root(&v).matrix()?;
                ProblemFile::new(Problem::Game { payoff, lambda: None })
            };
            if let (Some(r), Problem::Game { lambda, .. }) = (&restrict, &mut p.problem) {
                *lambda = Some(weights(r)?);
            }
            solve(g, p)
        }
        Cmd::Moment { m_matrix, target } => {
            let p = match (&m_matrix, &target) {
                (Some(a), Some(b)) => {
                    let (ma, mb) = (read(a)?, read(b)?);
                    let payload = json!({"M": ma, "m": mb});
                    ProblemFile::new(Problem::read("moment", &Field::root(&payload))?)
                }
                _ => problem_of(g, &["moment"])?,
            };
            solve(g, p)
        }
        Cmd::Trig { coeffs, grid } => {
            let p = match &coeffs {
                Some(c) => {
                    let payload = json!({"coeffs": read(c)?, "grid": grid});
                    ProblemFile::new(Problem::read("trig", &Field::root(&payload))?)
                }
                None => problem_of(g, &["trig"])?,
            };
            solve(g, p)
        }
        Cmd::Conj { infconv } => {
            let v = read(need(&g.input, "input")?)?;
            let mut p = if is_problem_file(&v) {
                ProblemFile::from_value(&v)?
            } else {
                let payload = json!({"f": v});
                ProblemFile::new(Problem::read("conjugate", &Field::root(&payload))?)
            };
            if let Problem::Conjugate { infconv: list, .. } = &mut p.problem {
                for path in &infconv {
                    list.push(grid_data(&read(path)?)?);
                }
            }
            solve(g, p)
        }
        Cmd::Gen { kind, size } => {
            let mut p = gen(&kind, GenSize::parse(&size)?, g.seed.unwrap_or(0))?;
            p.tol = g.tol;
            if !g.quiet {
                eprintln!("{kind} digest {}", io::digest(&p));
            }
            emit(g, &p.to_value())?;
            Ok(0)
        }
        Cmd::Verify { only } => {
            if let Some(o) = &only {
                let known = io::groups();
                if let Some(bad) = o.split(',').map(str::trim).find(|s| !known.contains(s)) {
                    return Err(Error::InvalidInput(format!(
                        "unknown group {bad:?}, expected one of {}",
                        known.join(", ")
                    )));
                }
            }
            let items = verify(only.as_deref(), g.tol, g.jobs);
            let failed = items.iter().filter(|i| !i.pass).count();
            for i in &items {
                if !g.quiet || !i.pass {
                    println!("{}", i.line());
                }
            }
            println!("{} of {} golden items passed", items.len() - failed, items.len());
            if let Some(path) = &g.output {
                let report: Vec<Value> = items
                    .iter()
                    .map(|i| json!({
                        "group": i.group, "name": i.name, "measured": io::nums(&[i.measured])[0],
                        "expected": i.expected, "tol": i.tol, "pass": i.pass,
                    }))
                    .collect();
                write_json(path, &json!({"items": report, "failed": failed}))?;
            }
            Ok(i32::from(failed > 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(io::exit_code(&e) as u8)
        }
    }
}
