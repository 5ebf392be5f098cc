use multipolar::geometry::Polygon;
use multipolar_cli::config::{RunConfig, StudyKind};
use proptest::prelude::*;

fn polygons() -> impl Strategy<Value = Vec<Polygon>> {
    prop::collection::vec((0.1f64..5.0, -2.0f64..2.0, -3.0f64..3.0), 0..3)
        .prop_map(|v| v.into_iter().map(|(r, m, ph)| Polygon::with_phase(r, m, ph)).collect())
}

proptest! {
    #[test]
    fn serialized_configs_parse_back(
        dimension in 3usize..9,
        lambda0 in -3.0f64..0.9,
        k in prop::option::of(1usize..40),
        polygons in polygons(),
        ratio in 1.01f64..1.5,
        tol in 1e-10f64..1e-3,
        study in prop::option::of(0usize..6),
        seed in any::<u64>(),
        samples in prop::collection::vec((0.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 0..3),
    ) {
        let mut c = RunConfig {
            dimension,
            lambda0,
            k,
            polygons,
            seed,
            ..RunConfig::default()
        };
        c.grid.ratio = ratio;
        c.solver.tol = tol;
        c.study.kind = study.map(|i| StudyKind::ALL[i]);
        c.samples = samples.into_iter().map(|(a, b, s)| [a, b, s]).collect();
        let text = c.serialize();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.serialize(), text);
    }
}
