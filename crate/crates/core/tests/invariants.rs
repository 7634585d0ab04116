use mdl_core::coideal::reversible_measure_open;
use mdl_core::duality::{braided_matrix, msasep_matrix, open_matrix, MsasepReading, OpenSign};
use mdl_core::generators::{braided_bond_matrix, build_braided, build_msasep, build_open, BraidedSource};
use mdl_core::qnum::{self, rat, Rational};
use mdl_core::sim::{exact_expectation, run_trajectory};
use mdl_core::states::{Model, StateSpace};
use mdl_core::verify::{check_detailed_balance, check_markov_duality};
use proptest::prelude::*;

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..12, 13i64..20).prop_map(|(p, d)| rat(p, d))
}

fn zero() -> Rational {
    qnum::int(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn msasep_rows_sum_to_zero_and_conserve(l in 2usize..5, n in 1u32..4, q in unit_rational()) {
        let gen = build_msasep(l, n, &q).unwrap();
        prop_assert!(gen.matrix().row_sums().iter().all(|s| *s == zero()));
        prop_assert!(gen.conserves_sectors());
    }

    #[test]
    fn open_rows_sum_to_zero(l in 1usize..4, q in unit_rational(), big_q in unit_rational()) {
        let gen = build_open(l, 1, &q, &big_q).unwrap();
        prop_assert!(gen.matrix().row_sums().iter().all(|s| *s == zero()));
        prop_assert!(gen.conserves_sectors());
    }

    #[test]
    fn braided_bond_is_stochastic(m in 1u32..5, q in unit_rational()) {
        for source in [BraidedSource::ClosedForm, BraidedSource::FusionOracle] {
            prop_assert!(braided_bond_matrix(m, &q, source).unwrap().is_row_stochastic());
        }
    }

    #[test]
    fn msasep_duality_any_q(l in 2usize..4, n in 1u32..3, q in unit_rational()) {
        let r = check_markov_duality(&build_msasep(l, n, &q).unwrap(), &msasep_matrix(l, n, &q, MsasepReading::RightOfEta).unwrap()).unwrap();
        prop_assert!(r.pass, "residual {}", r.max_residual);
    }

    #[test]
    fn open_duality_and_reversibility_any_q(l in 1usize..3, q in unit_rational(), big_q in unit_rational()) {
        let gen = build_open(l, 1, &q, &big_q).unwrap();
        let r = check_markov_duality(&gen, &open_matrix(l, &q, &big_q, OpenSign::Minus).unwrap()).unwrap();
        prop_assert!(r.pass, "duality residual {}", r.max_residual);
        let pi = reversible_measure_open(l, &q, &big_q).unwrap();
        let r = check_detailed_balance(&gen, &pi).unwrap();
        prop_assert!(r.pass, "balance residual {}", r.max_residual);
    }

    #[test]
    fn braided_duality_any_q(m in 1u32..3, q in unit_rational()) {
        let gen = build_braided(2, m, &q, BraidedSource::ClosedForm).unwrap();
        let r = check_markov_duality(&gen, &braided_matrix(2, m, &q).unwrap()).unwrap();
        prop_assert!(r.pass, "residual {}", r.max_residual);
    }

    #[test]
    fn trajectories_stay_in_sector(seed in any::<u64>(), t in 0.0f64..3.0) {
        let gen = build_msasep(4, 2, &rat(1, 3)).unwrap();
        let start = vec![2, 0, 1, 1];
        let tr = run_trajectory(&gen, &start, t, seed).unwrap();
        let space = gen.space();
        prop_assert_eq!(space.sector(&tr.final_state), space.sector(&start));
        prop_assert!(tr.events.windows(2).all(|w| w[0].0 <= w[1].0));
        prop_assert!(tr.events.iter().all(|e| e.0 <= t));
    }

    #[test]
    fn index_round_trip(l in 1usize..4, m in 1u32..4) {
        let space = StateSpace::enumerate(Model::Braided, l.max(2), m).unwrap();
        for i in 0..space.len() {
            prop_assert_eq!(space.index_of(&space.config(i)).unwrap(), i);
        }
    }
}

#[test]
fn exact_expectation_sides_agree() {
    let q = rat(1, 2);
    let gen = build_braided(3, 2, &q, BraidedSource::ClosedForm).unwrap();
    let d = braided_matrix(3, 2, &q).unwrap();
    let ex = exact_expectation(&gen, &d, &[2, 1, 0], &[1, 0, 1], 0.5, 50).unwrap();
    assert!((ex.side1 - ex.side2).abs() <= 1e-12 + 2.0 * ex.remainder_bound);
}
