use pdcoea_harness::config::{BudgetRule, ExperimentKind, ExperimentSpec, Grid, TargetKind, DEFAULT_C_PP};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = ExperimentSpec> {
    let kind = prop::sample::select(vec![ExperimentKind::RuntimeScaling, ExperimentKind::ErrorThreshold]);
    let budget = prop_oneof![
        (1u64..100_000).prop_map(BudgetRule::Generations),
        (0.01f64..10.0).prop_map(BudgetRule::BoundFactor),
        Just(BudgetRule::Pilot),
    ];
    (
        kind,
        prop::collection::btree_set(4usize..200, 1..4),
        prop::collection::btree_set(1usize..50, 1..3),
        prop::collection::btree_set(1u32..20, 1..3),
        (0.0f64..1.0, 0.0f64..1.0, 0.25f64..0.5),
        1usize..50,
        any::<u64>(),
        budget,
    )
        .prop_map(|(kind, n, lambda, chi, (alpha, beta, epsilon), trials, seed, budget)| ExperimentSpec {
            kind,
            grid: Grid {
                n: n.into_iter().collect(),
                lambda: lambda.into_iter().collect(),
                chi: chi.into_iter().map(|c| c as f64 / 1000.0).collect(),
                delta: vec![],
                alpha: vec![alpha],
                beta: vec![beta],
                epsilon: vec![epsilon],
                r: vec![1.0],
            },
            trials,
            seed,
            budget,
            target: TargetKind::Epsilon,
            c_pp: DEFAULT_C_PP,
            out: None,
        })
}

proptest! {
    #[test]
    fn config_text_round_trips(spec in spec_strategy()) {
        let text = spec.to_config();
        let back = ExperimentSpec::parse(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_config(), text);
    }

    #[test]
    fn cell_count_is_grid_product(spec in spec_strategy()) {
        let g = &spec.grid;
        let cells = g.cells().unwrap();
        prop_assert_eq!(cells.len(), g.n.len() * g.lambda.len() * g.chi.len());
        prop_assert!(cells.windows(2).all(|w| (w[0].n, w[0].lambda) <= (w[1].n, w[1].lambda)));
    }
}
