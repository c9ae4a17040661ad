use ndarray::{array, Array2};

use super::*;
use crate::measures::{kernel_apply, FiniteSpace, ScalarMeasure};
use crate::scalar_ot::solve_ot;

fn comps(c: &[Vec<f64>]) -> VectorMeasure {
    VectorMeasure::from_components(FiniteSpace::indexed(c[0].len()), c).unwrap()
}

/// `((a,1−a),(b,1−b))` in component form.
fn two_point(a: f64, b: f64) -> Array2<f64> {
    array![[a, b], [1.0 - a, 1.0 - b]]
}

#[test]
fn scalar_case_matches_classical() {
    let mu = ScalarMeasure::from_weights(vec![0.2, 0.5, 0.3]).unwrap();
    let nu = ScalarMeasure::from_weights(vec![0.6, 0.4]).unwrap();
    let c = array![[1.0, 3.0], [2.0, 0.5], [0.0, 4.0]];
    let vm = |m: &ScalarMeasure| {
        VectorMeasure::new(m.space().clone(), Array2::from_shape_vec((m.weights().len(), 1), m.weights().to_vec()).unwrap())
            .unwrap()
    };
    let p = VectorOtProblem::new(vm(&mu), vm(&nu), c.clone()).unwrap();
    let v = solve_vector_ot(&p).unwrap().feasible().unwrap();
    let s = solve_ot(&mu, &nu, &c).unwrap();
    assert!((v.value - s.value).abs() < 1e-12);
    assert!(v.gap() < 1e-9);
}

#[test]
fn basis_dominates_everything() {
    let mu = comps(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
    for &(a, b) in &[(0.0, 0.0), (0.3, 0.9), (1.0, 0.5)] {
        let r = dominates_values(&mu, &two_point(a, b)).unwrap();
        assert!(r.dominates, "a={a} b={b}");
    }
    let r = dominates_values(&mu, &two_point(0.4, 1.1)).unwrap();
    assert!(!r.dominates);
    let (low, integral) = r.cert.farkas_check(&mu, &two_point(0.4, 1.1)).unwrap();
    assert!(low >= -1e-12 && integral < -1e-9);
}

#[test]
fn half_mixture_region() {
    let mu = comps(&[vec![1.0, 0.0], vec![0.5, 0.5]]);
    for i in 0..=10 {
        for j in 0..=10 {
            let (a, b) = (i as f64 / 10.0, j as f64 / 10.0);
            let inside = 2.0 * b >= a && 2.0 * b <= a + 1.0;
            let r = dominates_values(&mu, &two_point(a, b)).unwrap();
            assert_eq!(r.dominates, inside, "a={a} b={b}");
            match &r.cert {
                DominanceCert::Kernel(k) => {
                    let img = kernel_apply(k, &mu).unwrap();
                    let err = (img.values() - &two_point(a, b)).mapv(f64::abs).sum();
                    assert!(err < 1e-9);
                }
                cert => {
                    let (low, integral) = cert.farkas_check(&mu, &two_point(a, b)).unwrap();
                    assert!(low >= -1e-12 && integral < -1e-9);
                }
            }
        }
    }
}

#[test]
fn vanishing_density_is_rejected() {
    let space = FiniteSpace::indexed(2);
    let mu = VectorMeasure::with_ref_weights(space.clone(), array![[1.0, 0.0], [0.0, 0.0]], vec![1.0, 1.0]).unwrap();
    let nu = VectorMeasure::new(space, array![[1.0, 0.0], [0.0, 0.0]]).unwrap();
    let p = VectorOtProblem::new(mu, nu, Array2::zeros((2, 2))).unwrap();
    assert!(matches!(p.normalizer(), Err(crate::Error::InvalidInput(_))));
}

#[test]
fn infeasible_vector_problem_yields_farkas() {
    let mu = comps(&[vec![1.0, 0.0], vec![0.5, 0.5]]);
    let nu = VectorMeasure::new(FiniteSpace::indexed(2), two_point(0.9, 0.1)).unwrap();
    let p = VectorOtProblem::new(mu.clone(), nu.clone(), Array2::zeros((2, 2))).unwrap();
    let cert = solve_vector_ot(&p).unwrap().certificate().unwrap();
    let (low, integral) = cert.farkas_check(&mu, nu.values()).unwrap();
    assert!(low >= -1e-12 && integral < -1e-9);
}

#[test]
fn custom_density_plan_constraints() {
    let space = FiniteSpace::indexed(2);
    let mu = VectorMeasure::new(space.clone(), array![[1.0, 1.0], [2.0, 0.0]]).unwrap();
    let eta = array![[1.0, 1.0], [1.0, 0.0]];
    let nu = VectorMeasure::new(space, array![[1.5, 0.5], [1.5, 0.5]]).unwrap();
    let p = VectorOtProblem::new(mu.clone(), nu.clone(), array![[0.0, 1.0], [1.0, 0.0]])
        .unwrap()
        .with_density(eta.clone())
        .unwrap();
    let r = solve_vector_ot(&p).unwrap().feasible().unwrap();
    let pi = r.plan.matrix();
    let rows = pi.dot(&Array2::<f64>::ones((2, 1)));
    for x in 0..2 {
        for i in 0..2 {
            assert!((eta[[x, i]] * rows[[x, 0]] - mu.values()[[x, i]]).abs() < 1e-9);
        }
    }
    let target = r.plan.vector_target_marginal(&eta);
    assert!((&target - nu.values()).mapv(f64::abs).sum() < 1e-9);
    assert!(r.gap() < 1e-9);
    assert!(vector_dual_violation(&p.cost, &eta, &r.psi, &r.phi) < 1e-9);
}

#[test]
fn blackwell_on_equal_pair() {
    let mu = comps(&[vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]);
    let r = blackwell_check(&mu, &mu, 32, 7).unwrap();
    assert!(r.passes(1e-8));
    assert!(!r.restricted());
}

#[test]
fn blackwell_witness_for_failure() {
    let mu = comps(&[vec![1.0, 0.0], vec![0.5, 0.5]]);
    let nu = VectorMeasure::new(FiniteSpace::indexed(2), two_point(0.0, 0.9)).unwrap();
    let r = blackwell_check(&mu, &nu, 16, 3).unwrap();
    assert!(!r.plan_feasible && r.agree());
    assert!(r.witness.unwrap().gap < 0.0);
}

#[test]
fn one_block_partition_is_total_mass() {
    let mu = comps(&[vec![0.2, 0.8], vec![0.5, 0.5]]);
    let nu = comps(&[vec![0.5, 0.1, 0.4], vec![0.3, 0.3, 0.4]]);
    assert!(dominates_n(&mu, &nu, 1).unwrap().holds);
    let off = comps(&[vec![0.5, 0.1, 0.5], vec![0.3, 0.3, 0.4]]);
    assert!(!dominates_n(&mu, &off, 1).unwrap().holds);
}

#[test]
fn assignment_case_is_deterministic() {
    let n = 6;
    let mu = VectorMeasure::new(FiniteSpace::indexed(n), Array2::from_elem((n, 1), 1.0 / n as f64)).unwrap();
    let nu = VectorMeasure::new(FiniteSpace::indexed(3), array![[1.0 / 6.0], [2.0 / 6.0], [3.0 / 6.0]]).unwrap();
    let c = Array2::from_shape_fn((n, 3), |(x, y)| ((x as f64) - 2.0 * y as f64).powi(2));
    let m = extract_map(&VectorOtProblem::new(mu, nu, c).unwrap()).unwrap();
    assert!(m.split_rows.is_empty());
    assert!(m.map.iter().all(Option::is_some));
}

#[test]
fn constant_martingale_is_plain_transport() {
    let mu = ScalarMeasure::from_weights(vec![0.3, 0.7]).unwrap();
    let nu = ScalarMeasure::from_weights(vec![0.5, 0.25, 0.25]).unwrap();
    let c = array![[1.0, 2.0, 0.0], [0.5, 1.0, 3.0]];
    let f = Array2::from_elem((2, 2), 0.5);
    let g = Array2::from_elem((3, 2), 0.5);
    let r = martingale_polytope(&mu, &nu, &f, &g, &c).unwrap().feasible().unwrap();
    assert!((r.value - solve_ot(&mu, &nu, &c).unwrap().value).abs() < 1e-12);
}

#[test]
fn martingale_needs_spread() {
    // a point mass cannot be spread to a measure with a different mean
    let mu = ScalarMeasure::from_weights(vec![1.0]).unwrap();
    let nu = ScalarMeasure::from_weights(vec![0.5, 0.5]).unwrap();
    let f = array![[0.0]];
    let g = array![[1.0], [2.0]];
    let cert = martingale_polytope(&mu, &nu, &f, &g, &Array2::zeros((1, 2)))
        .unwrap()
        .certificate()
        .unwrap();
    assert!(cert.integral < 0.0 && cert.min_combination(&f, &g) >= -1e-12);
}

#[test]
fn whole_space_is_in_range() {
    let mu = comps(&[vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]);
    let mut s = Array2::zeros((3, 2));
    s.row_mut(0).assign(&mu.totals());
    assert!(multi_range(&mu, &s, RangeMode::Relaxed).unwrap().is_some());
    assert!(multi_range(&mu, &s, RangeMode::AtomicExact).unwrap().is_some());
}

#[test]
fn atoms_cannot_be_split() {
    let mu = comps(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
    let s = array![[1.0, 1.0], [1.0, 1.0]];
    assert!(multi_range(&mu, &s, RangeMode::Relaxed).unwrap().is_some());
    assert!(multi_range(&mu, &array![[0.5, 0.5], [1.5, 1.5]], RangeMode::AtomicExact).unwrap().is_none());
    assert!(multi_range(&mu, &array![[0.5, 0.5], [1.5, 1.5]], RangeMode::Relaxed).unwrap().is_some());
}

#[test]
fn slice_of_linear_density() {
    let mu = grid_measure(200, &|x| vec![1.0, 2.0 * x]).unwrap();
    let (lo, hi) = range_slice(&mu, 0.5).unwrap().unwrap();
    assert!((lo - 0.25).abs() < 1e-9 && (hi - 0.75).abs() < 1e-9);
}

#[test]
fn four_atom_counterexample() {
    let mu = comps(&[vec![2.0, 0.0, 2.0, 0.0], vec![1.0, 2.0, 0.0, 1.0]]);
    assert!(dominates(&mu, &mu).unwrap().dominates);
    let s = strong_dominates(&mu, &mu).unwrap();
    assert!(!s.strong && s.totals_match);
    let w = s.witness().unwrap();
    assert_eq!((w.a.as_slice(), w.b.as_slice()), (&[0, 3][..], &[1, 2][..]));
}

#[test]
fn scalar_equal_mass_is_strong() {
    let mu = VectorMeasure::new(FiniteSpace::indexed(3), array![[0.2], [0.3], [0.5]]).unwrap();
    let nu = VectorMeasure::new(FiniteSpace::indexed(2), array![[0.4], [0.6]]).unwrap();
    assert!(strong_dominates(&mu, &nu).unwrap().strong);
}
