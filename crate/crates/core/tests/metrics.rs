mod support;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles::{naive_report, MetricFixture};
use valuegraph::datamodel::SteeringCondition;
use valuegraph::metrics::*;
use valuegraph::scoring::{MatrixRow, Orientation, OrientationMatrix};
use valuegraph::Rate;

fn half() -> Rate {
    Rate::new(1.into(), 2.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn report_matches_naive_loops(seed in any::<u64>()) {
        let f = MetricFixture::random(seed);
        let matrix = f.matrix();
        let set = SteeringSet::new(&matrix, "r0", ChangeMode::Role).unwrap();
        let oracle = naive_report(&f);
        match aggregate_report(&f.graph(), &set) {
            Ok(report) => {
                for (m, (e, u)) in report.per_value.iter().zip(&oracle.per_value) {
                    prop_assert_eq!(&m.expected_accuracy, e);
                    prop_assert_eq!(&m.unexpected_frequency, u);
                }
                prop_assert_eq!(&report.macro_expected, &oracle.macro_expected);
                prop_assert_eq!(&report.macro_unexpected, &oracle.macro_unexpected);
                prop_assert!(report.rates_in_unit_interval());
            }
            Err(MetricsError::NoDefinedMetrics) => {
                prop_assert!(oracle.macro_expected.is_none() && oracle.macro_unexpected.is_none());
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn self_change_rate_is_one(seed in any::<u64>()) {
        let f = MetricFixture::random(seed);
        let matrix = f.matrix();
        let set = SteeringSet::new(&matrix, "r0", ChangeMode::Role).unwrap();
        for v in &f.values {
            match change_rate(&set, v, v) {
                Ok(c) => prop_assert!(c.is_one()),
                Err(MetricsError::EmptySteeringSet(_)) => prop_assert!(changed_conditions(&set, v).unwrap().rows.is_empty()),
                Err(e) => prop_assert!(false, "{e}"),
            }
            for w in &f.values {
                if let Ok(c) = change_rate(&set, w, v) {
                    prop_assert!(c >= Rate::zero() && c <= Rate::one());
                }
            }
        }
    }

    #[test]
    fn cell_stats_are_distributions(pairs in prop::collection::vec((-3i64..=3, -3i64..=3), 1..40)) {
        let pairs: Vec<(Orientation, Orientation)> =
            pairs.iter().map(|&(a, b)| (Orientation::new(a, 3).unwrap(), Orientation::new(b, 3).unwrap())).collect();
        let stats = cell_stats(&pairs).unwrap();
        prop_assert!(stats.is_distribution());
        prop_assert!(noise_ratio(&stats) <= half());
    }

    #[test]
    fn inverse_ratio_bounds(changes in prop::collection::vec(-1i8..=1, 0..30)) {
        match within_value_inverse_ratio(&changes) {
            Ok(r) => prop_assert!(r >= Rate::zero() && r <= half()),
            Err(e) => {
                prop_assert_eq!(e, MetricsError::NoChanges);
                prop_assert!(changes.iter().all(|&c| c == 0));
            }
        }
    }
}

#[test]
fn empty_steering_set_is_reported() {
    let o = |s| Some(Orientation::new(s, 2).unwrap());
    let rows = ["r0", "r1", "r2"].iter().map(|r| MatrixRow::new(SteeringCondition::role(*r))).collect();
    let matrix = OrientationMatrix::new(
        vec!["a".into(), "b".into()],
        rows,
        vec![vec![o(0), o(1)], vec![o(0), o(2)], vec![o(0), o(1)]],
    )
    .unwrap();
    let set = SteeringSet::new(&matrix, "r0", ChangeMode::Role).unwrap();
    assert_eq!(change_rate(&set, "b", "a"), Err(MetricsError::EmptySteeringSet("a".into())));
    assert_eq!(change_rate(&set, "b", "b").unwrap(), Rate::one());
    assert_eq!(change_rate(&set, "a", "b").unwrap(), Rate::zero());
}

/// Role rows plus SAE rows on every role, all cells drawn at random.
fn sae_matrix(seed: u64) -> OrientationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<String> = (0..4).map(|i| format!("v{i}")).collect();
    let mut rows = Vec::new();
    for r in 0..6 {
        rows.push(MatrixRow::new(SteeringCondition::role(format!("r{r}"))));
        for f in 0..3 {
            rows.push(MatrixRow::new(SteeringCondition::sae(format!("r{r}"), f, 12, 100.0)));
        }
    }
    let cells = rows
        .iter()
        .map(|_| values.iter().map(|_| Some(Orientation::new(rng.random_range(-2..=2), 2).unwrap())).collect())
        .collect();
    OrientationMatrix::new(values, rows, cells).unwrap()
}

#[test]
fn steering_table_cells_are_distributions() {
    for seed in 0..20 {
        let m = sae_matrix(seed);
        let table = SteeringTable::build(&m, TableKind::Sae, &|_| true).unwrap();
        assert_eq!(table.groups.len(), 3);
        for g in &table.groups {
            for v in &table.values {
                let c = table.cell(g, v).unwrap();
                assert!(c.is_distribution());
                assert_eq!(c.n, 6);
                assert!(noise_ratio(c) <= half());
            }
        }
        assert!(table.noise_by_value().values().all(|r| *r <= half()));
        let train = SteeringTable::build(&m, TableKind::Sae, &|r| r < "r4").unwrap();
        let test = SteeringTable::build(&m, TableKind::Sae, &|r| r >= "r4").unwrap();
        let sim = SimilarityTable::between(&train, &test);
        assert!(sim.cells.values().flat_map(|m| m.values()).all(|c| (0.0..=1.0).contains(c)));
    }
}

#[test]
fn mean_steered_counts_changed_values() {
    let m = sae_matrix(3);
    let set = SteeringSet::new(&m, "r0", ChangeMode::Sae).unwrap();
    // Naive count over the SAE rows on r0.
    let base = m.row_index("role/r0@default").unwrap();
    let mut total = 0usize;
    let mut rows = 0usize;
    for (i, row) in m.rows().iter().enumerate() {
        if row.condition.role_id() == "r0" && row.condition.feature_id().is_some() {
            rows += 1;
            for c in 0..m.columns().len() {
                let (a, b) = (m.cell(i, c).unwrap(), m.cell(base, c).unwrap());
                if a.sum() * i64::from(b.count()) != b.sum() * i64::from(a.count()) {
                    total += 1;
                }
            }
        }
    }
    assert_eq!(mean_steered(&set).unwrap(), Rate::new(total.into(), rows.into()));
}
