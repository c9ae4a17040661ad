use std::time::Instant;

use ndarray::{Array2, Axis};
use serde_json::{json, Value};

use super::json::{indices, matrix, num, nums};
use super::problem::{scalar_measure, Problem, ProblemFile};
use crate::chain::{chain_free_medium, chain_ot, reduced_cost, ChainProblem};
use crate::duality::{
    conjugate, fenchel_check, game_value, game_value_restricted, inf_convolution, moment_feasible, trig_moment,
    GridFunction, MomentProblem,
};
use crate::error::{Error, Result};
use crate::measures::{kernel_apply, TransportPlan};
use crate::scalar_ot::{
    dual_violation, glue_feasible, local_constraint_feasible, slackness_residual, solve_capacity,
    solve_capacity_min, solve_invariant, solve_multimarginal, solve_ot, solve_partial, strassen_feasible,
    Feasibility, OtResult,
};
use crate::vector_ot::{
    blackwell_check, dominates, dominates_n, martingale_polytope, solve_vector_ot, strong_dominates,
    vector_dual_violation, DominanceCert, VectorOtProblem,
};

/// Outcome class of a run, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Optimal | Status::Feasible => 0,
            Status::Infeasible => 2,
        }
    }
}

/// A solved problem ready to be written as a result file.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub result: Value,
}

/// Tolerance and seed applied to a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol: crate::tol::default_tol(),
            seed: 0,
        }
    }
}

/// Largest deviation of a plan's marginals from `mu` and `nu`.
pub fn marginal_residual(plan: &Array2<f64>, mu: &[f64], nu: &[f64]) -> f64 {
    let rows = plan.sum_axis(Axis(1));
    let cols = plan.sum_axis(Axis(0));
    rows.iter()
        .zip(mu)
        .chain(cols.iter().zip(nu))
        .fold(0.0, |a, (p, q)| a.max((p - q).abs()))
}

fn check_gap(value: f64, dual: f64, tol: f64) -> Result<()> {
    if (value - dual).abs() > tol * (1.0 + value.abs()) {
        return Err(Error::NumericalBreakdown(format!(
            "duality gap {:.3e} exceeds tolerance {tol:.1e}",
            (value - dual).abs()
        )));
    }
    Ok(())
}

fn optimal(value: f64, dual: f64, extra: Value, residuals: Value, pivots: usize) -> Value {
    let mut v = json!({
        "value": num(value),
        "dualValue": num(dual),
        "gap": num((value - dual).abs()),
        "diagnostics": {"gap": num((value - dual).abs()), "residuals": residuals, "pivots": pivots},
    });
    merge(&mut v, extra);
    v
}

fn merge(into: &mut Value, extra: Value) {
    if let (Some(a), Value::Object(b)) = (into.as_object_mut(), extra) {
        a.extend(b);
    }
}

fn ot_value(r: &OtResult, c: &Array2<f64>, mu: &[f64], nu: &[f64], tol: f64) -> Result<Value> {
    check_gap(r.value, r.dual_value, tol)?;
    let plan = r.plan.matrix();
    let mut extra = json!({"plan": matrix(plan), "psi": nums(&r.psi), "phi": nums(&r.phi)});
    if let Some(l) = r.extras.lambda {
        extra["lambda"] = num(l);
    }
    if let Some(xi) = &r.extras.xi {
        extra["xi"] = matrix(xi);
    }
    let residuals = json!({
        "marginals": num(marginal_residual(plan, mu, nu)),
        "cost": num((r.plan.cost(c) - r.value).abs()),
        "slackness": num(slackness_residual(c, &r.psi, &r.phi, plan)),
    });
    Ok(optimal(r.value, r.dual_value, extra, residuals, r.pivots))
}

fn plan_feasible(plan: &TransportPlan, mu: &[f64], nu: &[f64]) -> Value {
    json!({
        "plan": matrix(plan.matrix()),
        "diagnostics": {"residuals": {"marginals": num(marginal_residual(plan.matrix(), mu, nu))}},
    })
}

fn cert_value(cert: &DominanceCert) -> Value {
    match cert {
        DominanceCert::Kernel(k) | DominanceCert::ReversedKernel(k) => {
            json!({"type": cert.kind(), "kernel": matrix(k.matrix())})
        }
        DominanceCert::Farkas { psi, phi } => {
            json!({"type": cert.kind(), "psi": matrix(psi), "phi": matrix(phi)})
        }
        DominanceCert::PartitionFamily(f) => json!({"type": cert.kind(), "partitions": f}),
    }
}

/// Solve a problem and build its result object.
pub fn run(file: &ProblemFile, opts: &RunOptions) -> Result<Outcome> {
    let tol = file.tol.unwrap_or(opts.tol);
    let seed = file.seed.unwrap_or(opts.seed);
    let start = Instant::now();
    let (status, mut result) = dispatch(&file.problem, tol, seed)?;
    result["kind"] = json!(file.problem.kind());
    result["status"] = json!(status.name());
    result["tol"] = num(tol);
    let millis = start.elapsed().as_secs_f64() * 1e3;
    match result.get_mut("diagnostics") {
        Some(d) => d["wallMillis"] = num(millis),
        None => result["diagnostics"] = json!({"wallMillis": num(millis)}),
    }
    Ok(Outcome { status, result })
}

fn dispatch(p: &Problem, tol: f64, seed: u64) -> Result<(Status, Value)> {
    use Status::*;
    Ok(match p {
        Problem::ScalarOt { mu, nu, cost } => {
            let r = solve_ot(&scalar_measure(mu)?, &scalar_measure(nu)?, cost)?;
            let mut v = ot_value(&r, cost, mu, nu, tol)?;
            v["diagnostics"]["residuals"]["dualFeasibility"] = num(dual_violation(cost, &r.psi, &r.phi));
            (Optimal, v)
        }
        Problem::Partial { mu, nu, cost, mass } => {
            let r = solve_partial(&scalar_measure(mu)?, &scalar_measure(nu)?, cost, *mass)?;
            let mut v = ot_value(&r, cost, mu, nu, tol)?;
            let plan = r.plan.matrix();
            let over = plan
                .sum_axis(Axis(1))
                .iter()
                .zip(mu)
                .chain(plan.sum_axis(Axis(0)).iter().zip(nu))
                .fold(0.0f64, |a, (p, q)| a.max(p - q));
            v["diagnostics"]["residuals"]["marginals"] = num(over.max(0.0));
            v["diagnostics"]["residuals"]["mass"] = num((plan.sum() - mass).abs());
            (Optimal, v)
        }
        Problem::Capacity { mu, nu, cost, cap, minimize } => {
            let (m, n) = (scalar_measure(mu)?, scalar_measure(nu)?);
            let capacity = TransportPlan::from_matrix(cap.clone())?;
            let sol = if *minimize {
                solve_capacity_min(&m, &n, cost, &capacity)?
            } else {
                solve_capacity(&m, &n, cost, &capacity)?
            };
            match sol {
                Feasibility::Feasible(r) => {
                    let mut v = ot_value(&r, cost, mu, nu, tol)?;
                    let excess = (r.plan.matrix() - cap).fold(0.0f64, |a, &d| a.max(d));
                    v["diagnostics"]["residuals"]["capacity"] = num(excess);
                    (Optimal, v)
                }
                Feasibility::Infeasible(c) => (
                    Infeasible,
                    json!({"certificate": {
                        "type": "kellerer", "psi": nums(&c.psi), "phi": nums(&c.phi),
                        "violation": num(c.violation),
                    }}),
                ),
            }
        }
        Problem::Invariant { mu, map, cost } => {
            let rep = solve_invariant(&scalar_measure(mu)?, map, cost)?;
            let r = &rep.result;
            check_gap(r.value, r.dual_value, tol)?;
            let rows = r.plan.row_sums();
            let resid = rows.iter().zip(mu).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            let mut v = optimal(
                r.value,
                r.dual_value,
                json!({
                    "plan": matrix(r.plan.matrix()), "psi": nums(&r.psi), "phi": nums(&r.phi),
                    "target": nums(&rep.target),
                    "additiveStatus": format!("{:?}", rep.additive_status).to_lowercase(),
                    "additiveValue": rep.additive_value.map_or(Value::Null, num),
                }),
                json!({"marginals": num(resid)}),
                r.pivots,
            );
            v["diagnostics"]["residuals"]["cost"] = num((r.plan.cost(cost) - r.value).abs());
            (Optimal, v)
        }
        Problem::Multi { marginals, cost } => {
            let ms = marginals.iter().map(|w| scalar_measure(w)).collect::<Result<Vec<_>>>()?;
            let r = solve_multimarginal(&ms, cost)?;
            check_gap(r.value, r.dual_value, tol)?;
            let resid = (0..ms.len())
                .flat_map(|k| r.marginal(k).into_iter().zip(marginals[k].clone()))
                .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            let value = optimal(
                r.value,
                r.dual_value,
                json!({
                    "shape": r.shape, "plan": nums(&r.plan),
                    "potentials": r.potentials.iter().map(|p| nums(p)).collect::<Vec<_>>(),
                }),
                json!({"marginals": num(resid)}),
                0,
            );
            (Optimal, value)
        }
        Problem::Glue { mu, nu, lambda } => match glue_feasible(mu, nu, lambda.as_ref())? {
            Feasibility::Feasible(plan) => {
                let xy = plan.sum_axis(Axis(2));
                let yz = plan.sum_axis(Axis(0));
                let mut resid = (&xy - mu).fold(0.0f64, |a, d| a.max(d.abs()));
                resid = resid.max((&yz - nu).fold(0.0f64, |a, d| a.max(d.abs())));
                if let Some(l) = lambda {
                    resid = resid.max((&plan.sum_axis(Axis(1)) - l).fold(0.0f64, |a, d| a.max(d.abs())));
                }
                let nested: Vec<Value> = plan.outer_iter().map(|s| matrix(&s.to_owned())).collect();
                (Feasible, json!({"plan": nested, "diagnostics": {"residuals": {"marginals": num(resid)}}}))
            }
            Feasibility::Infeasible(c) => (
                Infeasible,
                json!({"certificate": {
                    "type": "glue", "psi": matrix(&c.psi), "phi": matrix(&c.phi),
                    "xi": c.xi.as_ref().map_or(Value::Null, matrix),
                    "integral": num(c.integral), "minSum": num(c.min_sum()),
                }}),
            ),
        },
        Problem::Local { mu, nu, cost, radius } => {
            match local_constraint_feasible(&scalar_measure(mu)?, &scalar_measure(nu)?, cost, *radius)? {
                Feasibility::Feasible(plan) => {
                    let mut v = plan_feasible(&plan, mu, nu);
                    let outside: f64 = plan
                        .matrix()
                        .indexed_iter()
                        .filter(|(e, _)| cost[*e] > *radius)
                        .map(|(_, w)| w)
                        .sum();
                    v["diagnostics"]["residuals"]["outside"] = num(outside);
                    (Feasible, v)
                }
                Feasibility::Infeasible(c) => (
                    Infeasible,
                    json!({"certificate": {
                        "type": "local", "psi": nums(&c.psi), "phi": nums(&c.phi), "xi": matrix(&c.xi),
                        "integral": num(c.integral), "minCombination": num(c.min_combination(cost, *radius)),
                    }}),
                ),
            }
        }
        Problem::Strassen { mu, nu, gamma } => {
            match strassen_feasible(&scalar_measure(mu)?, &scalar_measure(nu)?, gamma)? {
                Feasibility::Feasible(plan) => (Feasible, plan_feasible(&plan, mu, nu)),
                Feasibility::Infeasible(c) => (
                    Infeasible,
                    json!({"certificate": {
                        "type": "strassen", "psi": nums(&c.psi), "phi": nums(&c.phi),
                        "lhs": num(c.lhs), "sup": num(c.sup),
                    }}),
                ),
            }
        }
        Problem::VectorOt { mu, nu, cost, eta } => {
            let (m, n) = (mu.measure()?, nu.measure()?);
            let mut prob = VectorOtProblem::new(m.clone(), n.clone(), cost.clone())?;
            if let Some(e) = eta {
                prob = prob.with_density(e.clone())?;
            }
            let density = prob.density().clone();
            match solve_vector_ot(&prob)? {
                Feasibility::Feasible(r) => {
                    check_gap(r.value, r.dual_value, tol)?;
                    let plan = r.plan.matrix();
                    let target = r.plan.vector_target_marginal(&density);
                    let resid = (&target - n.values()).fold(0.0f64, |a, d| a.max(d.abs()));
                    let residuals = json!({
                        "marginals": num(resid),
                        "cost": num((r.plan.cost(cost) - r.value).abs()),
                        "dualFeasibility": num(vector_dual_violation(cost, &density, &r.psi, &r.phi)),
                    });
                    let extra = json!({
                        "plan": matrix(plan), "psi": nums(&r.psi), "phi": matrix(&r.phi), "density": matrix(&density),
                    });
                    (Optimal, optimal(r.value, r.dual_value, extra, residuals, r.pivots))
                }
                Feasibility::Infeasible(c) => (Infeasible, json!({"certificate": cert_value(&c)})),
            }
        }
        Problem::Dominance { mu, nu, n, strong, blackwell } => {
            let (m, v) = (mu.measure()?, nu.measure()?);
            let mut out = json!({});
            let holds = match n {
                Some(k) => {
                    let r = dominates_n(&m, &v, *k)?;
                    out["n"] = json!(k);
                    out["checked"] = json!(r.checked);
                    out["certificate"] = cert_value(&r.cert);
                    if let Some(f) = &r.farkas {
                        out["farkas"] = cert_value(f);
                    }
                    r.holds
                }
                None => {
                    let r = dominates(&m, &v)?;
                    if let DominanceCert::Kernel(k) = &r.cert {
                        let img = kernel_apply(k, &m)?;
                        let resid = (img.values() - v.values()).fold(0.0f64, |a, d| a.max(d.abs()));
                        out["diagnostics"] = json!({"residuals": {"kernel": num(resid)}});
                    }
                    out["certificate"] = cert_value(&r.cert);
                    r.dominates
                }
            };
            out["dominates"] = json!(holds);
            if *strong {
                let s = strong_dominates(&m, &v)?;
                out["strong"] = json!({
                    "strong": s.strong, "totalsMatch": s.totals_match, "checked": s.checked,
                    "witness": s.witness().map_or(Value::Null, |w| json!({"a": indices(&w.a), "b": indices(&w.b)})),
                });
            }
            if let Some(samples) = blackwell {
                let b = blackwell_check(&m, &v, *samples, seed)?;
                out["blackwell"] = json!({
                    "planFeasible": b.plan_feasible, "kernelFeasible": b.kernel_feasible, "agree": b.agree(),
                    "condDens": b.cond_dens.as_deref().map_or(Value::Null, nums),
                    "condDensResidual": num(b.cond_dens_residual),
                    "reversedMarginalError": b.reversed_marginal_error.map_or(Value::Null, num),
                    "densityAverageError": b.density_average_error.map_or(Value::Null, num),
                    "samples": b.samples, "minJensenGap": num(b.min_jensen_gap),
                    "witnessGap": b.witness.as_ref().map_or(Value::Null, |w| num(w.gap)),
                    "passes": b.passes(tol),
                });
            }
            (if holds { Feasible } else { Infeasible }, out)
        }
        Problem::Martingale { mu, nu, f, g, cost } => {
            match martingale_polytope(&scalar_measure(mu)?, &scalar_measure(nu)?, f, g, cost)? {
                Feasibility::Feasible(r) => {
                    check_gap(r.value, r.dual_value, tol)?;
                    let plan = r.plan.matrix();
                    let residuals = json!({
                        "marginals": num(marginal_residual(plan, mu, nu)),
                        "cost": num((r.plan.cost(cost) - r.value).abs()),
                    });
                    let extra = json!({
                        "plan": matrix(plan), "psi": nums(&r.psi), "phi": nums(&r.phi), "zeta": matrix(&r.zeta),
                    });
                    (Optimal, optimal(r.value, r.dual_value, extra, residuals, r.pivots))
                }
                Feasibility::Infeasible(c) => (
                    Infeasible,
                    json!({"certificate": {
                        "type": "martingale", "psi": nums(&c.psi), "phi": nums(&c.phi), "zeta": matrix(&c.zeta),
                        "integral": num(c.integral), "minCombination": num(c.min_combination(f, g)),
                    }}),
                ),
            }
        }
        Problem::Chain { cost, mu, nu, lambda, hops } => {
            let (m, n) = (scalar_measure(mu)?, scalar_measure(nu)?);
            match lambda {
                None => {
                    let value = chain_free_medium(&m, &n, cost, *hops)?;
                    let reduced = reduced_cost(cost, *hops)?;
                    let dual = solve_ot(&m, &n, &reduced)?.value;
                    check_gap(value, dual, tol)?;
                    let extra = json!({"reducedCost": matrix(&reduced), "hops": hops});
                    (Optimal, optimal(value, dual, extra, json!({}), 0))
                }
                Some(l) => {
                    let prob = ChainProblem::new(cost.clone(), m, n, scalar_measure(l)?, *hops)?;
                    match chain_ot(&prob)? {
                        Feasibility::Feasible(r) => {
                            check_gap(r.value, r.dual_bound, tol)?;
                            let first = &r.plans[0];
                            let last = &r.plans[r.plans.len() - 1];
                            let resid = marginal_residual(first, mu, &first.sum_axis(Axis(0)).to_vec())
                                .max(marginal_residual(last, &last.sum_axis(Axis(1)).to_vec(), nu));
                            let extra = json!({
                                "f": nums(&r.fine), "hops": hops,
                                "plans": r.plans.iter().map(matrix).collect::<Vec<_>>(),
                                "intermediates": r.intermediates().iter().map(|v| nums(v)).collect::<Vec<_>>(),
                            });
                            let residuals = json!({"marginals": num(resid)});
                            (Optimal, optimal(r.value, r.dual_bound, extra, residuals, r.pivots))
                        }
                        Feasibility::Infeasible(c) => (
                            Infeasible,
                            json!({"certificate": {"type": "farkas", "y": nums(&c.y), "margin": num(c.margin)}}),
                        ),
                    }
                }
            }
        }
        Problem::Game { payoff, lambda } => {
            let g = match lambda {
                Some(l) => game_value_restricted(payoff, &scalar_measure(l)?)?,
                None => game_value(payoff)?,
            };
            let saddle = g.saddle_violation(payoff);
            let extra = json!({
                "row": nums(&g.row), "col": nums(&g.col), "lower": num(g.lower), "upper": num(g.upper),
            });
            let residuals = json!({"saddle": num(saddle)});
            (Optimal, optimal(g.value, g.upper, extra, residuals, 0))
        }
        Problem::Moment { m_matrix, target } => {
            let prob = MomentProblem::new(m_matrix.clone(), target.clone())?;
            match moment_feasible(&prob)? {
                Feasibility::Feasible(mu) => (
                    Feasible,
                    json!({"weights": nums(&mu), "diagnostics": {"residuals": {"moments": num(prob.residual(&mu))}}}),
                ),
                Feasibility::Infeasible(alpha) => {
                    let (low, integral) = prob.certificate_check(&alpha);
                    (
                        Infeasible,
                        json!({"certificate": {
                            "type": "cone", "alpha": nums(&alpha), "minCombination": num(low), "integral": num(integral),
                        }}),
                    )
                }
            }
        }
        Problem::Trig { coeffs, grid } => {
            let r = trig_moment(coeffs, *grid)?;
            let status = if r.lp_feasible { Feasible } else { Infeasible };
            (
                status,
                json!({
                    "eigenvalues": nums(&r.eigenvalues), "minEig": num(r.min_eig), "norm": num(r.norm),
                    "psd": r.psd, "lpFeasible": r.lp_feasible, "agree": r.agree(),
                    "weights": r.weights.as_deref().map_or(Value::Null, nums),
                }),
            )
        }
        Problem::Conjugate { f, infconv } => {
            let func = GridFunction::new(f.grid.clone(), f.values.clone())?;
            let c = conjugate(&func)?;
            let mut out = json!({
                "conjugate": {"grid": nums(c.function.grid()), "values": nums(c.function.values())},
                "errorBound": num(c.error_bound),
                "convex": c.function.is_convex(1e-12),
            });
            if !infconv.is_empty() {
                let mut fs = vec![func.clone()];
                for g in infconv {
                    fs.push(GridFunction::new(g.grid.clone(), g.values.clone())?);
                }
                let s = inf_convolution(&fs)?;
                out["infConvolution"] = json!({"grid": nums(s.grid()), "values": nums(s.values())});
                if fs.len() == 2 && fs[0].grid() == fs[1].grid() {
                    let r = fenchel_check(&fs[0], &fs[1])?;
                    out["fenchel"] = json!({
                        "primal": num(r.primal), "dual": num(r.dual), "gap": num(r.gap()),
                        "tolerance": num(r.tolerance), "passes": r.passes(),
                    });
                }
            }
            (Feasible, out)
        }
    })
}
