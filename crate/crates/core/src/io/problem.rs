use std::path::Path;

use nalgebra::Complex;
use ndarray::{Array1, Array2};
use serde_json::{json, Map, Value};

use super::json::{matrix, num, nums, read_json, write_json};
use super::schema::Field;
use crate::error::{Error, Result};
use crate::lp::RowKind;
use crate::measures::{FiniteSpace, ScalarMeasure, VectorMeasure};
use crate::scalar_ot::GammaConstraint;

/// Vector measure as stored on disk: values per atom and optional `|μ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorData {
    pub values: Array2<f64>,
    pub ref_weights: Option<Vec<f64>>,
}

impl VectorData {
    pub fn measure(&self) -> Result<VectorMeasure> {
        let space = FiniteSpace::indexed(self.values.nrows());
        match &self.ref_weights {
            Some(w) => VectorMeasure::with_ref_weights(space, self.values.clone(), w.clone()),
            None => VectorMeasure::new(space, self.values.clone()),
        }
    }

    pub fn from_measure(m: &VectorMeasure) -> Self {
        Self {
            values: m.values().clone(),
            ref_weights: None,
        }
    }

    fn read(f: &Field) -> Result<Self> {
        f.only(&["values", "refWeights"])?;
        let values = f.get("values")?.nonneg_matrix()?;
        let ref_weights = f.opt("refWeights")?.map(|w| w.weights()).transpose()?;
        if let Some(w) = &ref_weights {
            if w.len() != values.nrows() {
                return Err(f.err("refWeights must have one entry per atom"));
            }
        }
        Ok(Self { values, ref_weights })
    }

    fn write(&self) -> Value {
        let mut m = Map::new();
        m.insert("values".into(), matrix(&self.values));
        if let Some(w) = &self.ref_weights {
            m.insert("refWeights".into(), nums(w));
        }
        Value::Object(m)
    }
}

/// Convex function samples `(grid, values)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridData {
    fn read(f: &Field) -> Result<Self> {
        f.only(&["grid", "values"])?;
        let grid = f.get("grid")?.vec()?;
        let values = f.get("values")?.vec()?;
        if grid.len() != values.len() {
            return Err(f.err("grid and values differ in length"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::schema(format!("{}.grid", f.path), "must be strictly increasing"));
        }
        Ok(Self { grid, values })
    }

    fn write(&self) -> Value {
        json!({"grid": nums(&self.grid), "values": nums(&self.values)})
    }
}

/// Every problem kind the command line understands.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    ScalarOt { mu: Vec<f64>, nu: Vec<f64>, cost: Array2<f64> },
    Partial { mu: Vec<f64>, nu: Vec<f64>, cost: Array2<f64>, mass: f64 },
    Capacity { mu: Vec<f64>, nu: Vec<f64>, cost: Array2<f64>, cap: Array2<f64>, minimize: bool },
    Invariant { mu: Vec<f64>, map: Vec<usize>, cost: Array2<f64> },
    Multi { marginals: Vec<Vec<f64>>, cost: Vec<f64> },
    Glue { mu: Array2<f64>, nu: Array2<f64>, lambda: Option<Array2<f64>> },
    Local { mu: Vec<f64>, nu: Vec<f64>, cost: Array2<f64>, radius: f64 },
    Strassen { mu: Vec<f64>, nu: Vec<f64>, gamma: Vec<GammaConstraint> },
    VectorOt { mu: VectorData, nu: VectorData, cost: Array2<f64>, eta: Option<Array2<f64>> },
    Dominance { mu: VectorData, nu: VectorData, n: Option<usize>, strong: bool, blackwell: Option<usize> },
    Martingale { mu: Vec<f64>, nu: Vec<f64>, f: Array2<f64>, g: Array2<f64>, cost: Array2<f64> },
    Chain { cost: Array2<f64>, mu: Vec<f64>, nu: Vec<f64>, lambda: Option<Vec<f64>>, hops: usize },
    Game { payoff: Array2<f64>, lambda: Option<Vec<f64>> },
    Moment { m_matrix: Array2<f64>, target: Array1<f64> },
    Trig { coeffs: Vec<Complex<f64>>, grid: usize },
    Conjugate { f: GridData, infconv: Vec<GridData> },
}

pub const KINDS: [&str; 16] = [
    "scalar_ot",
    "partial",
    "capacity",
    "invariant",
    "multi",
    "glue",
    "local",
    "strassen",
    "vector_ot",
    "dominance",
    "martingale",
    "chain",
    "game",
    "moment",
    "trig",
    "conjugate",
];

/// A problem with optional tolerance override and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: Problem,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

fn scalar(f: &Field, key: &str) -> Result<Vec<f64>> {
    let m = f.get(key)?;
    m.only(&["weights"])?;
    m.get("weights")?.weights()
}

fn scalar_value(w: &[f64]) -> Value {
    json!({ "weights": nums(w) })
}

fn row_kind(f: &Field) -> Result<RowKind> {
    match f.str()? {
        "le" => Ok(RowKind::Le),
        "ge" => Ok(RowKind::Ge),
        "eq" => Ok(RowKind::Eq),
        other => Err(f.err(format!("unknown constraint kind {other:?}, expected le, ge or eq"))),
    }
}

fn row_kind_name(k: RowKind) -> &'static str {
    match k {
        RowKind::Le => "le",
        RowKind::Ge => "ge",
        RowKind::Eq => "eq",
    }
}

fn shape(f: &Field, key: &str, m: &Array2<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.dim() != (rows, cols) {
        return Err(Error::schema(
            format!("{}.{key}", f.path),
            format!("expected {rows}x{cols}, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::ScalarOt { .. } => "scalar_ot",
            Problem::Partial { .. } => "partial",
            Problem::Capacity { .. } => "capacity",
            Problem::Invariant { .. } => "invariant",
            Problem::Multi { .. } => "multi",
            Problem::Glue { .. } => "glue",
            Problem::Local { .. } => "local",
            Problem::Strassen { .. } => "strassen",
            Problem::VectorOt { .. } => "vector_ot",
            Problem::Dominance { .. } => "dominance",
            Problem::Martingale { .. } => "martingale",
            Problem::Chain { .. } => "chain",
            Problem::Game { .. } => "game",
            Problem::Moment { .. } => "moment",
            Problem::Trig { .. } => "trig",
            Problem::Conjugate { .. } => "conjugate",
        }
    }

    /// Read a payload of the given kind.
    pub fn read(kind: &str, p: &Field) -> Result<Self> {
        let transport = |extra: &[&str]| -> Result<(Vec<f64>, Vec<f64>, Array2<f64>)> {
            let mut keys = vec!["mu", "nu", "cost"];
            keys.extend_from_slice(extra);
            p.only(&keys)?;
            let mu = scalar(p, "mu")?;
            let nu = scalar(p, "nu")?;
            let cost = p.get("cost")?.matrix()?;
            shape(p, "cost", &cost, mu.len(), nu.len())?;
            Ok((mu, nu, cost))
        };
        Ok(match kind {
            "scalar_ot" => {
                let (mu, nu, cost) = transport(&[])?;
                Problem::ScalarOt { mu, nu, cost }
            }
            "partial" => {
                let (mu, nu, cost) = transport(&["mass"])?;
                let mass = p.get("mass")?.nonneg()?;
                Problem::Partial { mu, nu, cost, mass }
            }
            "capacity" => {
                let (mu, nu, cost) = transport(&["cap", "minimize"])?;
                let cap = p.get("cap")?.nonneg_matrix()?;
                shape(p, "cap", &cap, mu.len(), nu.len())?;
                let minimize = match p.opt("minimize")? {
                    Some(b) => b.value.as_bool().ok_or_else(|| b.err("expected a boolean"))?,
                    None => false,
                };
                Problem::Capacity { mu, nu, cost, cap, minimize }
            }
            "invariant" => {
                p.only(&["mu", "map", "cost"])?;
                let mu = scalar(p, "mu")?;
                let map = p.get("map")?.indices()?;
                let cost = p.get("cost")?.matrix()?;
                shape(p, "cost", &cost, mu.len(), map.len())?;
                if let Some(i) = map.iter().position(|&t| t >= map.len()) {
                    return Err(Error::schema(format!("{}.map[{i}]", p.path), "points outside Y"));
                }
                Problem::Invariant { mu, map, cost }
            }
            "multi" => {
                p.only(&["marginals", "cost"])?;
                let marginals = p
                    .get("marginals")?
                    .items()?
                    .iter()
                    .map(|m| {
                        m.only(&["weights"])?;
                        m.get("weights")?.weights()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let cost = p.get("cost")?.vec()?;
                let cells: usize = marginals.iter().map(Vec::len).product();
                if marginals.is_empty() || cost.len() != cells {
                    return Err(Error::schema(
                        format!("{}.cost", p.path),
                        format!("expected {cells} entries in row-major order"),
                    ));
                }
                Problem::Multi { marginals, cost }
            }
            "glue" => {
                p.only(&["mu", "nu", "lambda"])?;
                let mu = p.get("mu")?.nonneg_matrix()?;
                let nu = p.get("nu")?.nonneg_matrix()?;
                if nu.nrows() != mu.ncols() {
                    return Err(Error::schema(format!("{}.nu", p.path), "rows must match the columns of mu"));
                }
                let lambda = p.opt("lambda")?.map(|l| l.nonneg_matrix()).transpose()?;
                if let Some(l) = &lambda {
                    shape(p, "lambda", l, mu.nrows(), nu.ncols())?;
                }
                Problem::Glue { mu, nu, lambda }
            }
            "local" => {
                let (mu, nu, cost) = transport(&["radius"])?;
                let radius = p.get("radius")?.nonneg()?;
                Problem::Local { mu, nu, cost, radius }
            }
            "strassen" => {
                p.only(&["mu", "nu", "gamma"])?;
                let mu = scalar(p, "mu")?;
                let nu = scalar(p, "nu")?;
                let gamma = p
                    .get("gamma")?
                    .items()?
                    .iter()
                    .map(|g| {
                        g.only(&["coeffs", "kind", "bound"])?;
                        let coeffs = g.get("coeffs")?.matrix()?;
                        shape(g, "coeffs", &coeffs, mu.len(), nu.len())?;
                        Ok(GammaConstraint {
                            coeffs,
                            kind: row_kind(&g.get("kind")?)?,
                            bound: g.get("bound")?.f64()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Problem::Strassen { mu, nu, gamma }
            }
            "vector_ot" => {
                p.only(&["mu", "nu", "cost", "eta"])?;
                let mu = VectorData::read(&p.get("mu")?)?;
                let nu = VectorData::read(&p.get("nu")?)?;
                let cost = p.get("cost")?.matrix()?;
                shape(p, "cost", &cost, mu.values.nrows(), nu.values.nrows())?;
                let eta = p.opt("eta")?.map(|e| e.nonneg_matrix()).transpose()?;
                if let Some(e) = &eta {
                    shape(p, "eta", e, mu.values.nrows(), mu.values.ncols())?;
                }
                Problem::VectorOt { mu, nu, cost, eta }
            }
            "dominance" => {
                p.only(&["mu", "nu", "n", "strong", "blackwell"])?;
                let mu = VectorData::read(&p.get("mu")?)?;
                let nu = VectorData::read(&p.get("nu")?)?;
                if mu.values.ncols() != nu.values.ncols() {
                    return Err(Error::schema(format!("{}.nu.values", p.path), "dimension differs from mu"));
                }
                let n = p.opt("n")?.map(|n| n.usize()).transpose()?;
                let strong = match p.opt("strong")? {
                    Some(b) => b.value.as_bool().ok_or_else(|| b.err("expected a boolean"))?,
                    None => false,
                };
                let blackwell = p.opt("blackwell")?.map(|b| b.usize()).transpose()?;
                Problem::Dominance { mu, nu, n, strong, blackwell }
            }
            "martingale" => {
                let (mu, nu, cost) = transport(&["f", "g"])?;
                let f = p.get("f")?.matrix()?;
                let g = p.get("g")?.matrix()?;
                if f.nrows() != mu.len() || g.nrows() != nu.len() || f.ncols() != g.ncols() {
                    return Err(Error::schema(format!("{}.g", p.path), "f and g must be |X|×d and |Y|×d"));
                }
                Problem::Martingale { mu, nu, f, g, cost }
            }
            "chain" => {
                p.only(&["cost", "mu", "nu", "lambda", "hops"])?;
                let cost = p.get("cost")?.matrix()?;
                let mu = scalar(p, "mu")?;
                let nu = scalar(p, "nu")?;
                let lambda = p.opt("lambda")?.map(|_| scalar(p, "lambda")).transpose()?;
                shape(p, "cost", &cost, mu.len(), mu.len())?;
                let hops = p.get("hops")?.usize()?;
                Problem::Chain { cost, mu, nu, lambda, hops }
            }
            "game" => {
                p.only(&["payoff", "lambda"])?;
                let payoff = p.get("payoff")?.matrix()?;
                let lambda = p.opt("lambda")?.map(|_| scalar(p, "lambda")).transpose()?;
                if let Some(l) = &lambda {
                    if l.len() != payoff.ncols() {
                        return Err(Error::schema(format!("{}.lambda.weights", p.path), "one weight per column"));
                    }
                }
                Problem::Game { payoff, lambda }
            }
            "moment" => {
                p.only(&["M", "m"])?;
                let m_matrix = p.get("M")?.matrix()?;
                let target = p.get("m")?.array1()?;
                if target.len() != m_matrix.nrows() {
                    return Err(Error::schema(format!("{}.m", p.path), "one target per row of M"));
                }
                Problem::Moment { m_matrix, target }
            }
            "trig" => {
                p.only(&["coeffs", "grid"])?;
                let coeffs = p
                    .get("coeffs")?
                    .items()?
                    .iter()
                    .map(|c| {
                        let v = c.vec()?;
                        match v.as_slice() {
                            [re, im] => Ok(Complex::new(*re, *im)),
                            _ => Err(c.err("expected [re, im]")),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() {
                    return Err(Error::schema(format!("{}.coeffs", p.path), "must not be empty"));
                }
                let grid = p.get("grid")?.usize()?;
                Problem::Trig { coeffs, grid }
            }
            "conjugate" => {
                p.only(&["f", "infconv"])?;
                let f = GridData::read(&p.get("f")?)?;
                let infconv = match p.opt("infconv")? {
                    Some(list) => list.items()?.iter().map(GridData::read).collect::<Result<_>>()?,
                    None => Vec::new(),
                };
                Problem::Conjugate { f, infconv }
            }
            other => {
                return Err(Error::schema(
                    "kind",
                    format!("unknown kind {other:?}, expected one of {}", KINDS.join(", ")),
                ))
            }
        })
    }

    /// Payload object.
    pub fn write(&self) -> Value {
        match self {
            Problem::ScalarOt { mu, nu, cost } => {
                json!({"mu": scalar_value(mu), "nu": scalar_value(nu), "cost": matrix(cost)})
            }
            Problem::Partial { mu, nu, cost, mass } => {
                json!({"mu": scalar_value(mu), "nu": scalar_value(nu), "cost": matrix(cost), "mass": num(*mass)})
            }
            Problem::Capacity { mu, nu, cost, cap, minimize } => json!({
                "mu": scalar_value(mu), "nu": scalar_value(nu), "cost": matrix(cost),
                "cap": matrix(cap), "minimize": minimize,
            }),
            Problem::Invariant { mu, map, cost } => {
                json!({"mu": scalar_value(mu), "map": map, "cost": matrix(cost)})
            }
            Problem::Multi { marginals, cost } => json!({
                "marginals": marginals.iter().map(|m| scalar_value(m)).collect::<Vec<_>>(),
                "cost": nums(cost),
            }),
            Problem::Glue { mu, nu, lambda } => {
                let mut m = json!({"mu": matrix(mu), "nu": matrix(nu)});
                if let Some(l) = lambda {
                    m["lambda"] = matrix(l);
                }
                m
            }
            Problem::Local { mu, nu, cost, radius } => {
                json!({"mu": scalar_value(mu), "nu": scalar_value(nu), "cost": matrix(cost), "radius": num(*radius)})
            }
            Problem::Strassen { mu, nu, gamma } => json!({
                "mu": scalar_value(mu), "nu": scalar_value(nu),
                "gamma": gamma.iter().map(|g| json!({
                    "coeffs": matrix(&g.coeffs), "kind": row_kind_name(g.kind), "bound": num(g.bound),
                })).collect::<Vec<_>>(),
            }),
            Problem::VectorOt { mu, nu, cost, eta } => {
                let mut m = json!({"mu": mu.write(), "nu": nu.write(), "cost": matrix(cost)});
                if let Some(e) = eta {
                    m["eta"] = matrix(e);
                }
                m
            }
            Problem::Dominance { mu, nu, n, strong, blackwell } => {
                let mut m = json!({"mu": mu.write(), "nu": nu.write(), "strong": strong});
                if let Some(n) = n {
                    m["n"] = json!(n);
                }
                if let Some(b) = blackwell {
                    m["blackwell"] = json!(b);
                }
                m
            }
            Problem::Martingale { mu, nu, f, g, cost } => json!({
                "mu": scalar_value(mu), "nu": scalar_value(nu), "cost": matrix(cost),
                "f": matrix(f), "g": matrix(g),
            }),
            Problem::Chain { cost, mu, nu, lambda, hops } => {
                let mut m = json!({"cost": matrix(cost), "mu": scalar_value(mu), "nu": scalar_value(nu), "hops": hops});
                if let Some(l) = lambda {
                    m["lambda"] = scalar_value(l);
                }
                m
            }
            Problem::Game { payoff, lambda } => {
                let mut m = json!({"payoff": matrix(payoff)});
                if let Some(l) = lambda {
                    m["lambda"] = scalar_value(l);
                }
                m
            }
            Problem::Moment { m_matrix, target } => json!({"M": matrix(m_matrix), "m": nums(&target.to_vec())}),
            Problem::Trig { coeffs, grid } => json!({
                "coeffs": coeffs.iter().map(|c| nums(&[c.re, c.im])).collect::<Vec<_>>(),
                "grid": grid,
            }),
            Problem::Conjugate { f, infconv } => {
                let mut m = json!({"f": f.write()});
                if !infconv.is_empty() {
                    m["infconv"] = Value::Array(infconv.iter().map(GridData::write).collect());
                }
                m
            }
        }
    }
}

pub(crate) fn scalar_measure(w: &[f64]) -> Result<ScalarMeasure> {
    ScalarMeasure::from_weights(w.to_vec())
}

impl ProblemFile {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            tol: None,
            seed: None,
        }
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let root = Field::root(v);
        root.only(&["kind", "payload", "tol", "seed"])?;
        let kind = root.get("kind")?.str()?;
        let problem = Problem::read(kind, &root.get("payload")?)?;
        let tol = root.opt("tol")?.map(|t| t.nonneg()).transpose()?;
        let seed = root.opt("seed")?.map(|s| s.u64()).transpose()?;
        Ok(Self { problem, tol, seed })
    }

    pub fn to_value(&self) -> Value {
        let mut m = json!({"kind": self.problem.kind(), "payload": self.problem.write()});
        if let Some(t) = self.tol {
            m["tol"] = num(t);
        }
        if let Some(s) = self.seed {
            m["seed"] = json!(s);
        }
        m
    }
}

/// Read and validate a problem file.
pub fn load(path: &Path) -> Result<ProblemFile> {
    ProblemFile::from_value(&read_json(path)?)
}

/// Write a problem file in canonical form.
pub fn save(p: &ProblemFile, path: &Path) -> Result<()> {
    write_json(path, &p.to_value())
}
