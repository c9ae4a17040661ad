use super::{build_plan_lp, VectorOtProblem};
use crate::error::{Error, Result};
use crate::lp::{self, LpStatus};
use crate::measures::TransportPlan;

/// Vertex plan read as a map where it is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExtraction {
    /// `T(x)` on deterministic rows, `None` on split or empty rows.
    pub map: Vec<Option<usize>>,
    pub split_rows: Vec<usize>,
    pub plan: TransportPlan,
    pub value: f64,
    /// Number of vector-marginal equalities, an upper bound on split rows.
    pub bound: usize,
}

/// Solve the plan LP at a vertex and classify each source atom.
pub fn extract_map(p: &VectorOtProblem) -> Result<MapExtraction> {
    p.normalizer()?;
    let built = build_plan_lp(&p.mu, p.eta.as_ref(), p.nu.values(), Some(&p.cost))?;
    let sol = lp::solve_vertex(&built.lp)?;
    if sol.status == LpStatus::Infeasible {
        return Err(Error::Infeasible(Box::new(sol.farkas.expect("certificate present"))));
    }
    let sol = sol.into_optimal()?;
    let matrix = built.plan(&sol);
    let eps = 1e-12 * matrix.sum().max(1.0);
    let plan = TransportPlan::new(p.mu.space().clone(), p.nu.space().clone(), matrix)?
        .with_density(p.density().clone());
    let split_rows = plan.split_rows(eps);
    let map = plan
        .matrix()
        .rows()
        .into_iter()
        .map(|r| {
            let mut hits = r.iter().enumerate().filter(|(_, &v)| v > eps);
            match (hits.next(), hits.next()) {
                (Some((y, _)), None) => Some(y),
                _ => None,
            }
        })
        .collect();
    Ok(MapExtraction {
        map,
        split_rows,
        plan,
        value: sol.value,
        bound: built.d * built.ys.len(),
    })
}
