use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use orthochain::functionals::{
    classify_good_indices, dyadic_bound, dyadic_point_sum, filtered_bound, good_children,
    rademacher_menchov, strong_functional, strong_functional_at, weak_functional, L,
};
use orthochain::series::{
    build_index_set, build_partition, make_measure, CoefficientSequence, Depth, DiscreteMeasure,
    IndexSet, MeasureKind, PartitionTree,
};
use proptest::prelude::*;

fn set_of(a: Vec<f64>) -> (IndexSet, PartitionTree) {
    let t = build_index_set(&CoefficientSequence::explicit(a).unwrap()).unwrap();
    let tree = build_partition(&t, Depth::Auto).unwrap();
    (t, tree)
}

/// Midpoint-rule integral of `r ↦ m(B(t, r^2))^{-1/2}` on a fine grid, as an
/// independent check of the breakpoint summation.
fn riemann(m: &DiscreteMeasure, t: &IndexSet, center: usize, steps: usize) -> f64 {
    let top = t.diameter().sqrt();
    let h = top / steps as f64;
    (0..steps)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            let mass = orthochain::series::ball_mass(m, t, center, r * r).unwrap();
            h / mass.sqrt()
        })
        .sum()
}

#[test]
fn two_point_values() {
    let (t, tree) = set_of(vec![0.5]);
    let u = make_measure(&t, MeasureKind::Uniform).unwrap();
    assert!((strong_functional(&u, &t).unwrap().value - FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((weak_functional(&u, &t).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((dyadic_bound(&u, &tree).unwrap() - SQRT_2).abs() < 1e-15);
    let p = make_measure(&t, MeasureKind::PointMass(0)).unwrap();
    assert_eq!(weak_functional(&p, &t).unwrap(), 0.5);
    assert_eq!(strong_functional_at(&p, &t, 0).unwrap(), 0.5);
    assert!(strong_functional_at(&p, &t, 1).unwrap().is_infinite());
    assert_eq!(dyadic_bound(&p, &tree).unwrap(), 1.0);
    assert!(strong_functional_at(&p, &t, 2).is_err());
}

#[test]
fn grid_values() {
    let (t, tree) = set_of(vec![0.5; 3]);
    let u = make_measure(&t, MeasureKind::Uniform).unwrap();
    assert_eq!(dyadic_bound(&u, &tree).unwrap(), 2.0);
    let table = classify_good_indices(&u, &tree).unwrap();
    assert_eq!(table.level(1).unwrap().good, vec![0, 1, 2, 3]);
    let fb = filtered_bound(&u, &tree).unwrap();
    assert_eq!(fb.filtered_sum, 1.0);
    assert!((fb.bound - 23.83611624891225).abs() < 1e-12);
    assert!((fb.bound - (L + 1.0) / (1.0 - L / 2.0)).abs() < 1e-15);
    let p = make_measure(&t, MeasureKind::PointMass(2)).unwrap();
    let table = classify_good_indices(&p, &tree).unwrap();
    assert!(table.levels.iter().all(|l| l.good.is_empty()));
    assert!((filtered_bound(&p, &tree).unwrap().bound - 15.224077499274834).abs() < 1e-12);
}

#[test]
fn breakpoint_sum_agrees_with_quadrature() {
    let (t, _) = set_of((1..=12).map(|n| 1.0 / n as f64).collect());
    let m = make_measure(&t, MeasureKind::Dirichlet { seed: 8 }).unwrap();
    for i in 0..t.len() {
        let exact = strong_functional_at(&m, &t, i).unwrap();
        let approx = riemann(&m, &t, i, 200_000);
        assert!(
            (exact - approx).abs() < 1e-4 * exact,
            "t_{i}: {exact} vs {approx}"
        );
    }
}

#[test]
fn rademacher_menchov_values() {
    let c = CoefficientSequence::geometric(0.5, 2).unwrap();
    assert!((rademacher_menchov(&c).value - 0.5419637471622463).abs() < 1e-15);
    let c = CoefficientSequence::explicit(vec![1.0]).unwrap();
    assert!((rademacher_menchov(&c).value - 0.4804530139182014).abs() < 1e-15);
    let small = CoefficientSequence::explicit(vec![1e-6; 5]).unwrap();
    assert!(rademacher_menchov(&small).value < 1e-10);
    let table = rademacher_menchov(&CoefficientSequence::power(1.0, 64).unwrap());
    assert!(table.rows.windows(2).all(|w| w[1].partial > w[0].partial));
}

fn measure_on(n: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec(1e-4f64..1.0, n).prop_map(|w| DiscreteMeasure::normalized(w).unwrap())
}

fn instance() -> impl Strategy<Value = (IndexSet, PartitionTree, DiscreteMeasure)> {
    prop::collection::vec(0.02f64..1.0, 1..24).prop_flat_map(|a| {
        let (t, tree) = set_of(a);
        let n = t.len();
        measure_on(n).prop_map(move |m| (t.clone(), tree.clone(), m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn per_point_integral_is_below_its_dyadic_sum((t, _tree, m) in instance()) {
        for i in 0..t.len() {
            prop_assert!(strong_functional_at(&m, &t, i).unwrap() <= dyadic_point_sum(&m, &t, i).unwrap());
        }
    }

    #[test]
    fn weak_is_below_strong_dyadic_and_filtered((t, tree, m) in instance()) {
        let strong = strong_functional(&m, &t).unwrap().value;
        let weak = weak_functional(&m, &t).unwrap();
        prop_assert!(weak <= strong);
        prop_assert!(weak <= dyadic_bound(&m, &tree).unwrap());
        prop_assert!(weak <= filtered_bound(&m, &tree).unwrap().bound);
    }

    #[test]
    fn good_sets_are_nonempty_cells_and_terminate((_t, tree, m) in instance()) {
        let table = classify_good_indices(&m, &tree).unwrap();
        let sep = tree.separation_depth();
        prop_assert_eq!(table.levels.len() as u32, sep + 1);
        for l in &table.levels {
            let cells = tree.cells(l.level);
            for i in &l.good {
                prop_assert!(cells.iter().any(|c| c.index == *i));
            }
            prop_assert!(l.filtered_sum <= l.full_sum + 1e-15);
        }
        // brute force below the table: one nonempty child per parent
        for k in sep + 2..sep + 5 {
            for parent in tree.cells(k - 1).iter() {
                let r = tree.children(k - 1, parent);
                let masses = std::array::from_fn(|j| m.mass(r[j].clone()));
                prop_assert_eq!(good_children(masses), [false; 4]);
            }
        }
    }

    #[test]
    fn pair_exclusion(p in prop::array::uniform4(0.0f64..1.0)) {
        // both members of a pair cannot exceed half the pair's mass
        let halves = [p[0] + p[2], p[1] + p[3]].map(|x| x / 2.0);
        for j in 0..2 {
            prop_assert!(!(p[j] > halves[j] && p[j + 2] > halves[j]));
        }
        let good = good_children(p);
        for j in 0..4 {
            if good[j] {
                prop_assert!(p[j] <= halves[j % 2]);
            }
        }
    }

    #[test]
    fn strong_is_midpoint_convex((t, _tree, a) in instance(), seed in any::<u64>()) {
        let b = make_measure(&t, MeasureKind::Dirichlet { seed }).unwrap();
        let mid = DiscreteMeasure::normalized(a.weights().iter().zip(b.weights()).map(|(x, y)| 0.5 * (x + y)).collect()).unwrap();
        let f = |m: &DiscreteMeasure| strong_functional(m, &t).unwrap().value;
        prop_assert!(f(&mid) <= 0.5 * (f(&a) + f(&b)) + 1e-12);
    }

    #[test]
    fn adding_mass_near_the_argmax_does_not_raise_it((t, _tree, m) in instance(), extra in 0.01f64..1.0) {
        let s = strong_functional(&m, &t).unwrap();
        let mut w = m.weights().to_vec();
        w[s.argmax] += extra;
        // unnormalized: every ball around the argmax gains mass
        let before = orthochain::functionals::point_integral(t.positions(), m.weights(), s.argmax, t.diameter());
        let after = orthochain::functionals::point_integral(t.positions(), &w, s.argmax, t.diameter());
        prop_assert!(after <= before);
    }
}
