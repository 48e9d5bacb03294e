use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pursuit::reductions::{cr_to_crp, dominating_set_to_crp, qbf_to_crps, CrpsOptions};
use pursuit::solver::{self, minimax_oracle, Rules, SolveOptions};
use pursuit::suites::{has_dominating_set, random_graph, random_labelled_graph};
use pursuit::{GameSpec, Side, Start, Variant};

fn winner(spec: &GameSpec) -> Side {
    solver::solve(spec, SolveOptions::default()).unwrap().winner
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_agrees_with_minimax_on_fixed_starts(seed in any::<u64>(), nv in 3usize..6, cops in 1usize..3, first_cops in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_labelled_graph(&mut rng, nv);
        let first = if first_cops { Side::Cops } else { Side::Robber };
        let start = Start::Fixed { cops: vec![0; cops], robber: nv - 1, first };
        let spec = GameSpec::new(g, cops, Variant::Crp, start).unwrap();
        prop_assert_eq!(winner(&spec), minimax_oracle(&spec, Rules::Protected, 1 << 20).unwrap());
    }

    #[test]
    fn lowered_classical_game_matches_native_rules(seed in any::<u64>(), nv in 3usize..6, cops in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, nv);
        let start = Start::Fixed { cops: vec![0; cops], robber: nv - 1, first: Side::Robber };
        let spec = GameSpec::new(g, cops, Variant::Cr, start).unwrap();
        prop_assert_eq!(winner(&spec), minimax_oracle(&spec, Rules::NativeCr, 1 << 20).unwrap());
    }

    #[test]
    fn classical_embedding_keeps_winner(seed in any::<u64>(), nv in 3usize..6, cops in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, nv);
        let start = Start::Elective { first: Side::Cops };
        let direct = GameSpec::new(g.clone(), cops, Variant::Cr, start.clone()).unwrap();
        let out = cr_to_crp(&g, cops, start).unwrap();
        prop_assert_eq!(winner(&direct), winner(&out.spec));
    }

    #[test]
    fn dominating_set_instances_decide_domination(seed in any::<u64>(), nv in 3usize..7, k in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, nv);
        let out = dominating_set_to_crp(&g, k).unwrap();
        let expect = if has_dominating_set(&g, k) { Side::Cops } else { Side::Robber };
        prop_assert_eq!(winner(&out.spec), expect);
    }
}

#[test]
fn heaven_layout_does_not_change_winners() {
    for q in pursuit::suites::two_variable_qbfs().iter().step_by(8) {
        let shared = qbf_to_crps(q, CrpsOptions::default()).unwrap();
        let split = qbf_to_crps(q, CrpsOptions { per_gadget_heavens: true, ..Default::default() }).unwrap();
        let expect = if q.evaluate() { Side::Cops } else { Side::Robber };
        assert_eq!(winner(&shared.spec), expect);
        assert_eq!(winner(&split.spec), expect);
    }
}
