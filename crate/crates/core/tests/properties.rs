use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resolvent_splitting::graph::Graph;
use resolvent_splitting::iteration::{
    apply_t, check_averaged_inequality, recover_solution, solve_x, Splitting,
};
use resolvent_splitting::numerics::{kron_apply, BlockVector as Blocks};
use resolvent_splitting::operators::{MonotoneOperator, OperatorTuple, ProxFunction};
use resolvent_splitting::problems::random_monotone_affine;
use resolvent_splitting::schemes::{
    extended_ryu, minimal_lifting, regular_graph_scheme, regular_graph_scheme_oriented,
};
use resolvent_splitting::simulator::{equivalence_check, simulate, SimOptions};
use resolvent_splitting::{BlockVector, Operators, Rational, Scheme, StopRule};

/// Circulant graph on `n` vertices joining `i` and `i ± s` for each offset.
fn circulant(n: usize, offsets: &[usize]) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for &s in offsets {
            let j = (i + s) % n;
            let e = (i.min(j), i.max(j));
            if i != j && !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn affine_tuple(seed: u64, n: usize, d: usize) -> Operators {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OperatorTuple::new(
        (0..n)
            .map(|_| random_monotone_affine(&mut rng, d).unwrap())
            .collect(),
    )
    .unwrap()
}

fn prox_tuple(n: usize, d: usize) -> Operators {
    OperatorTuple::new(
        (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    MonotoneOperator::prox(
                        d,
                        ProxFunction::L1 {
                            lambda: 0.1 * (i + 1) as f64,
                        },
                    )
                    .unwrap()
                } else {
                    MonotoneOperator::prox(
                        d,
                        ProxFunction::Box {
                            lower: vec![-(i as f64); d],
                            upper: vec![1.0; d],
                        },
                    )
                    .unwrap()
                }
            })
            .collect(),
    )
    .unwrap()
}

fn blocks(blocks: usize, d: usize, data: &[f64]) -> BlockVector {
    Blocks::from_flat(
        blocks,
        d,
        data.iter().cycle().take(blocks * d).copied().collect(),
    )
    .unwrap()
}

fn some_scheme(kind: u8, n: usize, gamma: f64) -> Scheme {
    match kind % 3 {
        0 => minimal_lifting(n, gamma).unwrap(),
        1 => extended_ryu(n, gamma).unwrap(),
        _ => regular_graph_scheme(&Graph::complete(n), gamma).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_builders_are_valid(n in 2usize..16) {
        let half = Rational::new(1, 2);
        for s in [minimal_lifting(n, half).unwrap(), extended_ryu(n, half).unwrap()] {
            prop_assert_eq!(s.n_sum(), Rational::from_integer(n as i64));
            prop_assert!(s.n_matrix().is_strictly_lower_triangular());
            let me: Vec<Rational> = s.m_base().row_sums();
            prop_assert!(me.iter().all(|x| *x == Rational::from_integer(0)));
            // minimal-lifting and extended-Ryu defects are diagonally nonpositive
            let defect = s.defect();
            prop_assert!((0..n).all(|i| defect.get(i, i) <= Rational::from_integer(0)));
        }
    }

    #[test]
    fn circulant_graph_schemes_have_zero_defect(n in 5usize..24, a in 1usize..4, b in 1usize..4) {
        let g = circulant(n, &[a, a + b]);
        prop_assume!(g.is_regular().is_some() && g.is_connected());
        let d = g.is_regular().unwrap() as f64;
        let s = regular_graph_scheme(&g, 0.5).unwrap();
        prop_assert!(s.defect().is_zero());
        prop_assert!(s.validate().is_valid());
        let flip: Vec<bool> = (0..g.edge_count()).map(|j| j % 3 == 0).collect();
        let t = regular_graph_scheme_oriented(&g, &flip, 0.5).unwrap();
        let target = g.laplacian::<f64>().scale(2.0 / d);
        prop_assert!(t.m_matrix().gram().max_abs_diff(&target).unwrap() <= 1e-14);
        prop_assert_eq!(t.gram(), s.gram());
    }

    #[test]
    fn resolvent_outputs_satisfy_inclusions(
        seed in any::<u64>(),
        n in 2usize..7,
        kind in any::<u8>(),
        z in prop::collection::vec(-10.0f64..10.0, 1..12),
    ) {
        let d = 2;
        let s = some_scheme(kind, n, 0.5);
        let ops = affine_tuple(seed, n, d);
        let zb = blocks(s.m(), d, &z);
        let x = solve_x(&s, &ops, &zb).unwrap();
        // x_i + F_i(x_i) = (S z + N x)_i
        let y = kron_apply(&s.derive_s(), &zb).unwrap().add(&kron_apply(s.n_matrix(), &x).unwrap()).unwrap();
        for i in 0..n {
            let fx = ops.get(i).evaluate(x.block(i)).unwrap();
            for ((&xk, &fk), &yk) in x.block(i).iter().zip(&fx).zip(y.block(i)) {
                prop_assert!((xk + fk - yk).abs() <= 1e-9 * (1.0 + yk.abs()));
            }
        }
    }

    #[test]
    fn fixed_point_residual_measures_the_step(
        seed in any::<u64>(),
        n in 2usize..7,
        kind in any::<u8>(),
        gamma in 0.05f64..0.95,
        z in prop::collection::vec(-5.0f64..5.0, 1..12),
    ) {
        let s = some_scheme(kind, n, gamma);
        let ops = affine_tuple(seed, n, 2);
        let zb = blocks(s.m(), 2, &z);
        let sp = Splitting::new(&s, &ops).unwrap();
        let (tz, x) = sp.apply_t(&zb).unwrap();
        let step = tz.sub(&zb).unwrap().norm();
        prop_assert!((step / gamma - sp.fp_residual(&x)).abs() <= 1e-9 * (1.0 + step / gamma));
    }

    #[test]
    fn averaged_inequality_with_prox_operators(
        n in 2usize..7,
        kind in any::<u8>(),
        gamma in 0.05f64..0.95,
        z in prop::collection::vec(-5.0f64..5.0, 2..12),
        w in prop::collection::vec(-5.0f64..5.0, 2..12),
    ) {
        let s = some_scheme(kind, n, gamma);
        let ops = prox_tuple(n, 2);
        let c = check_averaged_inequality(&s, &ops, &blocks(s.m(), 2, &z), &blocks(s.m(), 2, &w)).unwrap();
        prop_assert!(c.lhs <= c.rhs + 1e-9, "lhs {} rhs {}", c.lhs, c.rhs);
        prop_assert!(c.defect_term >= -1e-12);
    }

    #[test]
    fn recover_solution_is_translation_equivariant(
        data in prop::collection::vec(-100.0f64..100.0, 6),
        shift in -50.0f64..50.0,
    ) {
        let x = BlockVector::from_flat(3, 2, data.clone()).unwrap();
        let shifted = BlockVector::from_flat(3, 2, data.iter().map(|v| v + shift).collect()).unwrap();
        let (p, r) = recover_solution(&x);
        let (q, rs) = recover_solution(&shifted);
        prop_assert!((r - rs).abs() <= 1e-9);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a + shift - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn simulator_conserves_v_and_matches_central(seed in any::<u64>(), n in 5usize..14) {
        let g = circulant(n, &[1, 2]);
        let ops = affine_tuple(seed, n, 2);
        let stop = StopRule::new(1e-10, 1e-10, 60).unwrap();
        let t = simulate(&g, &ops, 0.5, &BlockVector::zeros(n, 2), &SimOptions::new(stop)).unwrap();
        for r in &t.records {
            prop_assert!(r.v_drift <= 1e-12, "drift {}", r.v_drift);
        }
        prop_assert!(equivalence_check(&g, &ops, 0.5, 60).unwrap() <= 1e-12);
    }
}

#[test]
fn apply_t_is_deterministic() {
    let s = minimal_lifting(4, 0.5).unwrap();
    let ops = affine_tuple(11, 4, 3);
    let z = blocks(3, 3, &[0.1, -0.4, 2.0, 1.5]);
    assert_eq!(
        apply_t(&s, &ops, &z).unwrap().0,
        apply_t(&s, &ops, &z).unwrap().0
    );
}
