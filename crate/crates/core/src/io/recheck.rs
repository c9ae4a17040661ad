use ndarray::Array2;
use serde_json::Value;

use super::problem::{Problem, ProblemFile};
use super::run::marginal_residual;
use super::schema::Field;
use crate::duality::MomentProblem;
use crate::error::Result;
use crate::scalar_ot::{dual_violation, slackness_residual};
use crate::vector_ot::vector_dual_violation;

/// Recompute residuals from a serialized result and return the largest
/// disagreement with the residuals stored in it.
///
/// Residual keys this function does not know are left alone.
pub fn recheck(file: &ProblemFile, result: &Value) -> Result<f64> {
    let r = Field::root(result);
    let Some(stored) = r.opt("diagnostics")?.map(|d| d.opt("residuals")).transpose()?.flatten() else {
        return Ok(0.0);
    };
    let mut fresh: Vec<(&str, f64)> = Vec::new();
    let plan = || r.get("plan")?.matrix();
    let value = || r.get("value")?.f64();
    match &file.problem {
        Problem::ScalarOt { mu, nu, cost } | Problem::Partial { mu, nu, cost, .. } => {
            let p = plan()?;
            let (psi, phi) = (r.get("psi")?.vec()?, r.get("phi")?.vec()?);
            if let Problem::Partial { mass, .. } = &file.problem {
                fresh.push(("mass", (p.sum() - mass).abs()));
            } else {
                fresh.push(("marginals", marginal_residual(&p, mu, nu)));
                fresh.push(("dualFeasibility", dual_violation(cost, &psi, &phi)));
            }
            fresh.push(("cost", ((&p * cost).sum() - value()?).abs()));
            fresh.push(("slackness", slackness_residual(cost, &psi, &phi, &p)));
        }
        Problem::Local { mu, nu, .. } | Problem::Strassen { mu, nu, .. } => {
            if let Some(p) = r.opt("plan")? {
                fresh.push(("marginals", marginal_residual(&p.matrix()?, mu, nu)));
            }
        }
        Problem::Martingale { mu, nu, cost, .. } => {
            if r.opt("plan")?.is_some() {
                let p = plan()?;
                fresh.push(("marginals", marginal_residual(&p, mu, nu)));
                fresh.push(("cost", ((&p * cost).sum() - value()?).abs()));
            }
        }
        Problem::VectorOt { nu, cost, .. } => {
            if r.opt("plan")?.is_some() {
                let p = plan()?;
                let eta = r.get("density")?.matrix()?;
                let phi = r.get("phi")?.matrix()?;
                let target = p.t().dot(&eta);
                let resid = (&target - &nu.values).fold(0.0f64, |a, d| a.max(d.abs()));
                fresh.push(("marginals", resid));
                fresh.push(("cost", ((&p * cost).sum() - value()?).abs()));
                fresh.push(("dualFeasibility", vector_dual_violation(cost, &eta, &r.get("psi")?.vec()?, &phi)));
            }
        }
        Problem::Game { payoff, .. } => {
            let s = ndarray::Array1::from(r.get("row")?.vec()?);
            let t = ndarray::Array1::from(r.get("col")?.vec()?);
            let v = s.dot(&payoff.dot(&t));
            let best_row = payoff.dot(&t).iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let best_col = s.dot(payoff).iter().copied().fold(f64::INFINITY, f64::min);
            fresh.push(("saddle", (best_row - v).max(v - best_col).max(0.0)));
        }
        Problem::Moment { m_matrix, target } => {
            if let Some(w) = r.opt("weights")? {
                let prob = MomentProblem::new(m_matrix.clone(), target.clone())?;
                fresh.push(("moments", prob.residual(&w.vec()?)));
            }
        }
        Problem::Chain { mu, nu, lambda: Some(_), .. } => {
            if let Some(plans) = r.opt("plans")? {
                let plans: Vec<Array2<f64>> = plans.items()?.iter().map(Field::matrix).collect::<Result<_>>()?;
                let first = &plans[0];
                let last = &plans[plans.len() - 1];
                let cols = first.sum_axis(ndarray::Axis(0)).to_vec();
                let rows = last.sum_axis(ndarray::Axis(1)).to_vec();
                fresh.push((
                    "marginals",
                    marginal_residual(first, mu, &cols).max(marginal_residual(last, &rows, nu)),
                ));
            }
        }
        _ => {}
    }
    let mut worst: f64 = 0.0;
    for (key, v) in fresh {
        if let Some(s) = stored.opt(key)? {
            worst = worst.max((s.f64()? - v).abs());
        }
    }
    Ok(worst)
}
