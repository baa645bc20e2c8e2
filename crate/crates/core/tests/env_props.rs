mod common;

use proptest::prelude::*;

use occucount::env::{
    parse_activation_lines, parse_environment, write_activation_lines, ActivationLine, Arity,
    EnvironmentModel, Foi,
};

fn environment() -> impl Strategy<Value = EnvironmentModel> {
    (1u32..=8, 1usize..=7).prop_flat_map(|(omega, n)| {
        let arity = (1..=omega).prop_flat_map(move |lo| {
            prop_oneof![
                (lo..=omega).prop_map(move |hi| Arity::bounded(lo, hi).unwrap()),
                Just(Arity::unbounded(lo).unwrap()),
            ]
        });
        let m = n * (n - 1) / 2;
        (
            prop::collection::vec(arity, n),
            prop::collection::vec(any::<bool>(), m),
            0..n,
            Just(omega),
        )
            .prop_map(move |(arities, mask, entry, omega)| {
                let fois: Vec<Foi> = arities
                    .into_iter()
                    .enumerate()
                    .map(|(i, arity)| Foi {
                        id: format!("f{i}"),
                        arity,
                        is_entry: i == entry,
                    })
                    .collect();
                let pairs: Vec<(String, String)> = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (format!("f{a}"), format!("f{b}"))))
                    .zip(mask)
                    .filter(|(_, on)| *on)
                    .map(|(p, _)| p)
                    .collect();
                let edges: Vec<(&str, &str)> = pairs
                    .iter()
                    .map(|(a, b)| (a.as_str(), b.as_str()))
                    .collect();
                EnvironmentModel::new(fois, &edges, omega).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn environment_round_trips(env in environment()) {
        let text = env.to_config();
        let back = parse_environment(&text).unwrap();
        prop_assert_eq!(&back, &env);
        prop_assert_eq!(back.to_config(), text);
    }

    #[test]
    fn activation_lines_round_trip(
        env in environment(),
        raw in prop::collection::vec((any::<u64>(), prop::option::of(0u32..=8)), 0..30),
    ) {
        let lines: Vec<ActivationLine> = raw
            .into_iter()
            .map(|(bits, label)| {
                let states = (0..env.len()).map(|i| bits >> i & 1 == 1).collect();
                ActivationLine::new(states, label.map(|l| l.min(env.omega())))
            })
            .collect();
        let text = write_activation_lines(&lines);
        prop_assert_eq!(parse_activation_lines(&text, &env).unwrap(), lines);
    }

    #[test]
    fn arity_clamps_into_range(env in environment()) {
        for i in 0..env.len() {
            let (lo, hi) = env.effective_arity(i);
            prop_assert!(1 <= lo && lo <= hi && hi <= env.omega());
        }
    }
}

#[test]
fn neighbors_are_symmetric() {
    let env = common::load_env("aras_fc.env");
    for f in env.fois() {
        for n in env.neighbors(&f.id).unwrap() {
            assert!(env.neighbors(n).unwrap().contains(f.id.as_str()));
        }
    }
}
