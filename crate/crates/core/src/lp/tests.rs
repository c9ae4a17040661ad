use super::*;
use proptest::prelude::*;

fn le(p: &mut LpProblem, coeffs: &[(usize, f64)], rhs: f64) {
    p.add_row(coeffs.to_vec(), RowKind::Le, rhs);
}

#[test]
fn single_lower_bound() {
    let mut p = LpProblem::new(Sense::Min, vec![1.0]);
    p.add_row(vec![(0, 1.0)], RowKind::Ge, 3.0);
    let s = solve(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.value - 3.0).abs() < 1e-12);
    assert!((s.dual[0] - 1.0).abs() < 1e-12);
}

#[test]
fn contradictory_bounds_give_farkas() {
    let mut p = LpProblem::new(Sense::Min, vec![0.0]);
    p.set_free(0);
    p.add_row(vec![(0, 1.0)], RowKind::Ge, 1.0);
    p.add_row(vec![(0, 1.0)], RowKind::Le, 0.0);
    let s = solve(&p).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
    let cert = s.farkas.unwrap();
    assert!(cert.verify(&p));
    let yb: f64 = cert.y[0] * 1.0 + cert.y[1] * 0.0;
    assert!(yb < -1e-9);
}

#[test]
fn unbounded_ray() {
    let mut p = LpProblem::new(Sense::Max, vec![1.0, 1.0]);
    p.add_row(vec![(0, 1.0), (1, -1.0)], RowKind::Le, 1.0);
    let s = solve(&p).unwrap();
    assert_eq!(s.status, LpStatus::Unbounded);
    let r = s.ray.unwrap();
    assert!(r[0] + r[1] > 0.0 && r[0] - r[1] <= 1e-12 && r.iter().all(|&v| v >= -1e-12));
}

#[test]
fn max_sense_duals() {
    // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6, x ≤ 3
    let mut p = LpProblem::new(Sense::Max, vec![3.0, 2.0]);
    le(&mut p, &[(0, 1.0), (1, 1.0)], 4.0);
    le(&mut p, &[(0, 1.0), (1, 3.0)], 6.0);
    p.set_bounds(0, 0.0, 3.0);
    let s = solve(&p).unwrap();
    assert!((s.value - 11.0).abs() < 1e-12);
    assert!((s.diagnostics.dual_value - 11.0).abs() < 1e-10);
    assert!(s.dual[0] >= 0.0);
}

#[test]
fn equality_rows_have_free_duals() {
    // min x0 + 2 x1 with x0 - x1 = -1: dual of the equality is negative
    let mut p = LpProblem::new(Sense::Min, vec![1.0, 2.0]);
    p.add_row(vec![(0, 1.0), (1, -1.0)], RowKind::Eq, -1.0);
    let s = solve(&p).unwrap();
    assert!((s.value - 2.0).abs() < 1e-12);
    assert!(s.dual[0] < 0.0);
    assert!(s.diagnostics.gap < 1e-12);
}

#[test]
fn free_and_upper_only_variables() {
    let mut p = LpProblem::new(Sense::Min, vec![1.0, -1.0]);
    p.set_free(0);
    p.set_bounds(1, f64::NEG_INFINITY, 2.0);
    p.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Ge, 0.5);
    let s = solve(&p).unwrap();
    assert!((s.primal[1] - 2.0).abs() < 1e-12);
    assert!((s.value - (-1.5 - 2.0)).abs() < 1e-12);
}

#[test]
fn fixed_and_empty_columns_are_presolved() {
    let mut p = LpProblem::new(Sense::Min, vec![1.0, 5.0, -1.0]);
    p.set_bounds(1, 2.0, 2.0);
    p.set_bounds(2, 0.0, 4.0);
    p.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Ge, 3.0);
    let s = solve(&p).unwrap();
    assert_eq!(s.primal, vec![1.0, 2.0, 4.0]);
    assert!((s.value - 7.0).abs() < 1e-12);
}

#[test]
fn empty_row_infeasibility() {
    let mut p = LpProblem::new(Sense::Min, vec![1.0]);
    p.add_row(vec![], RowKind::Ge, 1.0);
    let s = solve(&p).unwrap();
    assert!(s.is_infeasible());
    assert!(s.farkas.unwrap().verify(&p));
}

#[test]
fn redundant_equalities() {
    // transport 2x2 has one redundant marginal row
    let mut p = LpProblem::new(Sense::Min, vec![0.0, 1.0, 1.0, 0.0]);
    p.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Eq, 0.5);
    p.add_row(vec![(2, 1.0), (3, 1.0)], RowKind::Eq, 0.5);
    p.add_row(vec![(0, 1.0), (2, 1.0)], RowKind::Eq, 0.5);
    p.add_row(vec![(1, 1.0), (3, 1.0)], RowKind::Eq, 0.5);
    let s = solve_vertex(&p).unwrap();
    assert!(s.value.abs() < 1e-12);
    assert_eq!(s.primal, vec![0.5, 0.0, 0.0, 0.5]);
}

#[test]
fn permutation_vertex() {
    let mut p = LpProblem::new(Sense::Min, vec![3.0, 1.0, 1.0, 3.0]);
    p.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Eq, 1.0);
    p.add_row(vec![(2, 1.0), (3, 1.0)], RowKind::Eq, 1.0);
    p.add_row(vec![(0, 1.0), (2, 1.0)], RowKind::Eq, 1.0);
    p.add_row(vec![(1, 1.0), (3, 1.0)], RowKind::Eq, 1.0);
    let s = solve_vertex(&p).unwrap();
    assert_eq!(s.primal, vec![0.0, 1.0, 1.0, 0.0]);
}

#[test]
fn degenerate_ties_are_reproducible() {
    let mut p = LpProblem::new(Sense::Min, vec![0.0; 9]);
    for i in 0..3 {
        p.add_row((0..3).map(|j| (3 * i + j, 1.0)).collect(), RowKind::Eq, 1.0);
        p.add_row((0..3).map(|j| (3 * j + i, 1.0)).collect(), RowKind::Eq, 1.0);
    }
    let a = solve_vertex(&p).unwrap();
    let b = solve_vertex(&p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.primal.iter().filter(|&&v| v > 1e-12).count(), 3);
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-10 {
        return None;
    }
    let mut x = [0.0; 3];
    for k in 0..3 {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        x[k] = det(m) / d;
    }
    Some(x)
}

/// Minimum of `c·x` over `{A x ≤ b, 0 ≤ x ≤ 5}` by enumerating vertices.
fn vertex_oracle(c: &[f64; 3], a: &[[f64; 3]], b: &[f64]) -> Option<f64> {
    let mut planes: Vec<([f64; 3], f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        planes.push((e, 5.0));
        e[k] = -1.0;
        planes.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    let n = planes.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [planes[i].0, planes[j].0, planes[k].0];
                let Some(x) = solve3(m, [planes[i].1, planes[j].1, planes[k].1]) else {
                    continue;
                };
                let ok = planes
                    .iter()
                    .all(|(r, h)| r[0] * x[0] + r[1] * x[1] + r[2] * x[2] <= h + 1e-9);
                if ok {
                    let v = c[0] * x[0] + c[1] * x[1] + c[2] * x[2];
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        }
    }
    best
}

#[test]
fn random_three_variable_lps_match_vertex_enumeration() {
    let mut rng = Lcg(42);
    let mut infeasible = 0;
    for _ in 0..300 {
        let c = [rng.next() * 2.0 - 1.0, rng.next() * 2.0 - 1.0, rng.next() * 2.0 - 1.0];
        let rows = 2 + (rng.next() * 4.0) as usize;
        let a: Vec<[f64; 3]> = (0..rows)
            .map(|_| [rng.next() * 4.0 - 2.0, rng.next() * 4.0 - 2.0, rng.next() * 4.0 - 2.0])
            .collect();
        let b: Vec<f64> = (0..rows).map(|_| rng.next() * 4.0 - 1.5).collect();
        let mut p = LpProblem::new(Sense::Min, c.to_vec());
        for k in 0..3 {
            p.set_bounds(k, 0.0, 5.0);
        }
        for (r, &h) in a.iter().zip(&b) {
            le(&mut p, &[(0, r[0]), (1, r[1]), (2, r[2])], h);
        }
        let s = solve(&p).unwrap();
        match vertex_oracle(&c, &a, &b) {
            Some(v) => {
                assert_eq!(s.status, LpStatus::Optimal);
                assert!((s.value - v).abs() <= 1e-8, "{} vs {}", s.value, v);
                assert!(s.diagnostics.gap <= 1e-7 * (1.0 + v.abs()));
            }
            None => {
                infeasible += 1;
                assert_eq!(s.status, LpStatus::Infeasible);
                assert!(s.farkas.unwrap().verify(&p));
            }
        }
    }
    assert!(infeasible > 0);
}

fn transport_lp(mu: &[f64], nu: &[f64], c: &[f64]) -> LpProblem {
    let (n, m) = (mu.len(), nu.len());
    let mut p = LpProblem::new(Sense::Min, c.to_vec());
    for x in 0..n {
        p.add_row((0..m).map(|y| (x * m + y, 1.0)).collect(), RowKind::Eq, mu[x]);
    }
    for y in 0..m {
        p.add_row((0..n).map(|x| (x * m + y, 1.0)).collect(), RowKind::Eq, nu[y]);
    }
    p
}

#[test]
fn random_transport_vertices_are_basic() {
    let mut rng = Lcg(7);
    for _ in 0..40 {
        let (n, m) = (2 + (rng.next() * 5.0) as usize, 2 + (rng.next() * 5.0) as usize);
        let mut mu: Vec<f64> = (0..n).map(|_| rng.next() + 0.1).collect();
        let mut nu: Vec<f64> = (0..m).map(|_| rng.next() + 0.1).collect();
        let (sm, sn): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
        mu.iter_mut().for_each(|v| *v /= sm);
        nu.iter_mut().for_each(|v| *v /= sn);
        let c: Vec<f64> = (0..n * m).map(|_| rng.next()).collect();
        let p = transport_lp(&mu, &nu, &c);
        let s = solve_vertex(&p).unwrap();
        let nz = s.primal.iter().filter(|&&v| v > 1e-12).count();
        assert!(nz <= p.num_rows(), "{nz} nonzeros for {} rows", p.num_rows());
        assert!(s.diagnostics.slackness <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_solutions_satisfy_duality(
        seed in 0u64..10_000,
        n in 2usize..6,
        m in 1usize..5,
    ) {
        let mut rng = Lcg(seed);
        let mut p = LpProblem::new(Sense::Min, (0..n).map(|_| rng.next() * 2.0 - 0.5).collect());
        for j in 0..n {
            p.set_bounds(j, 0.0, 1.0 + rng.next() * 3.0);
        }
        for _ in 0..m {
            let kind = match (rng.next() * 3.0) as u32 {
                0 => RowKind::Le,
                1 => RowKind::Ge,
                _ => RowKind::Eq,
            };
            let coeffs = (0..n).map(|j| (j, rng.next() * 2.0 - 1.0)).collect();
            p.add_row(coeffs, kind, rng.next() - 0.5);
        }
        let s = solve(&p).unwrap();
        match s.status {
            LpStatus::Optimal => {
                let scale = 1.0 + s.value.abs();
                prop_assert!(s.diagnostics.gap <= 1e-7 * scale);
                prop_assert!(s.diagnostics.primal_residual <= 1e-9);
                prop_assert!(s.diagnostics.dual_residual <= 1e-9);
                prop_assert!(s.diagnostics.slackness <= 1e-7);
            }
            LpStatus::Infeasible => prop_assert!(s.farkas.as_ref().unwrap().verify(&p)),
            LpStatus::Unbounded => prop_assert!(false, "bounded box cannot be unbounded"),
        }
        let again = solve(&p).unwrap();
        prop_assert_eq!(s, again);
    }
}
