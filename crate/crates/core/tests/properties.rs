use num_complex::Complex64;
use proptest::prelude::*;

use plankforge::constructions::{
    block_partition, block_weights, cluster_certificate, main_theorem_sequence, main_theorem_weights, BlockModel,
    NormFamily,
};
use plankforge::cotype::{cotype_ratio, holder_row_check, sign_mean_square};
use plankforge::plank::{
    coverage_mc, parallel_cover, planks_from_sequence, witness_margins, witness_search, Plank, WitnessConfig,
};
use plankforge::space::{pair_vectors, Functional, ProductVector, SpaceKind, SpaceModel, Vector};
use plankforge::summability::{min_on_support, p_transform, validate_weights, ScalarSequence, WeightMatrix};
use plankforge::constructions::ExponentPair;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn space_strategy() -> impl Strategy<Value = SpaceModel> {
    let kind = prop_oneof![
        Just(SpaceKind::EuclideanReal),
        Just(SpaceKind::EuclideanComplex),
        (1.0f64..6.0).prop_map(SpaceKind::Lp),
        Just(SpaceKind::Sup),
    ];
    (kind, 1usize..12).prop_map(|(k, d)| SpaceModel::new(k, d).unwrap())
}

/// Random nonnegative row-stochastic matrix with sparse rows.
fn weights_strategy(horizon: usize) -> impl Strategy<Value = WeightMatrix> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, horizon), 1..8).prop_map(move |rows| {
        let rows = rows
            .into_iter()
            .map(|raw| {
                let raw: Vec<f64> = raw.into_iter().map(|v| if v < 0.4 { 0.0 } else { v }).collect();
                let total: f64 = raw.iter().sum();
                if total == 0.0 {
                    vec![(1, 1.0)]
                } else {
                    raw.iter()
                        .enumerate()
                        .filter(|(_, v)| **v > 0.0)
                        .map(|(m, v)| (m + 1, v / total))
                        .collect()
                }
            })
            .collect();
        WeightMatrix::from_rows(rows).unwrap()
    })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn averaging_bound(w in weights_strategy(12), a in prop::collection::vec(0.0f64..5.0, 12)) {
        let a = ScalarSequence::new(a).unwrap();
        for n in 1..=w.num_rows() {
            let (_, min) = min_on_support(&w, &a, n).unwrap();
            prop_assert!(min <= p_transform(&w, &a, n).unwrap() + 1e-12);
        }
    }

    #[test]
    fn transform_linearity(
        w in weights_strategy(10),
        a in prop::collection::vec(-1.0f64..1.0, 10),
        b in prop::collection::vec(-1.0f64..1.0, 10),
    ) {
        let a = ScalarSequence::new(a).unwrap();
        let b = ScalarSequence::new(b).unwrap();
        let sum = a.add(&b).unwrap();
        for n in 1..=w.num_rows() {
            let lhs = p_transform(&w, &sum, n).unwrap();
            let rhs = p_transform(&w, &a, n).unwrap() + p_transform(&w, &b, n).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn one_hot_rows_reproduce_the_sequence(a in prop::collection::vec(-10.0f64..10.0, 1..30)) {
        let w = WeightMatrix::identity(a.len()).unwrap();
        let s = ScalarSequence::new(a.clone()).unwrap();
        for (n, v) in a.iter().enumerate() {
            prop_assert_eq!(p_transform(&w, &s, n + 1).unwrap(), *v);
        }
    }

    #[test]
    fn sliding_rows_shrink_decaying_sequences(len in 2usize..40, width in 1usize..5) {
        // Row n averages a_m = 1/m uniformly over [n, n + width).
        let horizon = len + width;
        let rows = (1..=len)
            .map(|n| (n..n + width).map(|m| (m, 1.0 / width as f64)).collect())
            .collect();
        let w = WeightMatrix::from_rows(rows).unwrap();
        prop_assert!(validate_weights(&w, 1e-12, 1.1).unwrap().pass);
        let a = ScalarSequence::from_fn(horizon, |m| 1.0 / m as f64).unwrap();
        prop_assert!(p_transform(&w, &a, len).unwrap() < p_transform(&w, &a, 1).unwrap());
    }

    #[test]
    fn holder_duality(space in space_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let f = Functional::new(space.gaussian(s1));
        let v = space.gaussian(s2);
        let z = space.pair(&f, &v).unwrap();
        prop_assert!(z.norm() <= f.dual_norm() * v.norm() * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn norm_homogeneity(space in space_strategy(), s in any::<u64>(), c in -50.0f64..50.0) {
        let v = space.gaussian(s);
        let lhs = v.scaled(c).norm();
        prop_assert!((lhs - c.abs() * v.norm()).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn product_norm_is_component_sum(space in space_strategy(), seeds in prop::collection::vec(any::<u64>(), 1..5)) {
        let comps: Vec<Vector> = seeds.iter().map(|&s| space.gaussian(s)).collect();
        let expected: f64 = comps.iter().map(|c| c.norm_squared()).sum();
        prop_assert_eq!(ProductVector::new(comps).unwrap().norm_squared(), expected);
    }

    #[test]
    fn plank_membership_matches_pairing(d in 1usize..8, complex in any::<bool>(), sx in any::<u64>(), scale in 0.1f64..5.0, sh in any::<u64>()) {
        let space = if complex { SpaceModel::euclidean_complex(d) } else { SpaceModel::euclidean_real(d) }.unwrap();
        let x = space.gaussian(sx).scaled(scale);
        let plank = &planks_from_sequence(std::slice::from_ref(&x)).unwrap()[0];
        prop_assert!((plank.width() * x.norm() - 1.0).abs() <= 1e-12);
        for i in 0..20u64 {
            let h = space.gaussian(sh ^ i).scaled(0.4);
            let z = pair_vectors(&h, &x).unwrap().norm();
            // Skip points within rounding distance of the boundary.
            if (z - 0.5).abs() > 1e-12 {
                prop_assert_eq!(plank.contains(&h).unwrap(), z <= 0.5);
            }
        }
    }

    #[test]
    fn sign_symmetry(space in space_strategy(), seeds in prop::collection::vec(any::<u64>(), 1..7), flip in 0usize..7, p in 1.0f64..4.0) {
        let xs: Vec<Vector> = seeds.iter().map(|&s| space.gaussian(s)).collect();
        let mut flipped = xs.clone();
        let k = flip % xs.len();
        flipped[k] = flipped[k].scaled(-1.0);
        let a = cotype_ratio(&space, &xs, p).unwrap();
        let b = cotype_ratio(&space, &flipped, p).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-12 * a.ratio.max(1.0));
    }

    #[test]
    fn adding_a_vector_never_lowers_the_best_norm(space in space_strategy(), seeds in prop::collection::vec(any::<u64>(), 2..8)) {
        let xs: Vec<Vector> = seeds.iter().map(|&s| space.gaussian(s)).collect();
        let shorter = cotype_ratio(&space, &xs[..xs.len() - 1], 2.0).unwrap();
        let longer = cotype_ratio(&space, &xs, 2.0).unwrap();
        prop_assert!(longer.best_norm >= shorter.best_norm * (1.0 - 1e-12));
    }

    #[test]
    fn euclidean_mean_square(d in 1usize..6, complex in any::<bool>(), seeds in prop::collection::vec(any::<u64>(), 1..9)) {
        let space = if complex { SpaceModel::euclidean_complex(d) } else { SpaceModel::euclidean_real(d) }.unwrap();
        let xs: Vec<Vector> = seeds.iter().map(|&s| space.gaussian(s)).collect();
        let total: f64 = xs.iter().map(|x| x.norm_squared()).sum();
        prop_assert!((sign_mean_square(&space, &xs).unwrap() - total).abs() <= 1e-9 * total.max(1.0));
        prop_assert!(cotype_ratio(&space, &xs, 2.0).unwrap().ratio >= 1.0 - 1e-12);
    }

    #[test]
    fn holder_rows_on_random_weights(w in weights_strategy(9), norms in prop::collection::vec(0.01f64..100.0, 9), p in 2.0f64..8.0) {
        let pair = ExponentPair::from_p(p).unwrap();
        for n in 1..=w.num_rows() {
            prop_assert!(holder_row_check(&w, &norms, pair, n).unwrap().pass);
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn rotations_preserve_norms_and_pairings(d in 1usize..10, complex in any::<bool>(), s in any::<u64>()) {
        let space = if complex { SpaceModel::euclidean_complex(d) } else { SpaceModel::euclidean_real(d) }.unwrap();
        let r = space.random_rotation(s).unwrap();
        let f = space.gaussian(s ^ 1);
        let v = space.gaussian(s ^ 2);
        let rv = r.apply(&v).unwrap();
        let rf = r.apply(&f).unwrap();
        prop_assert!((rv.norm() - v.norm()).abs() <= 1e-9);
        let diff: Complex64 = pair_vectors(&rf, &rv).unwrap() - pair_vectors(&f, &v).unwrap();
        prop_assert!(diff.norm() <= 1e-9);
    }

    #[test]
    fn main_transform_bound_holds(alpha in 0.05f64..0.5, n in 2usize..60, s in any::<u64>(), rotate in any::<bool>()) {
        let fam = NormFamily::power(1.0, alpha).unwrap();
        let space = SpaceModel::euclidean_real(n).unwrap();
        let rotation = rotate.then(|| space.random_rotation(s).unwrap());
        let xs = main_theorem_sequence(space, &fam, n, rotation.as_ref()).unwrap();
        let w = main_theorem_weights(&fam, n).unwrap();
        let f = space.gaussian(s ^ 99);
        let ones = ScalarSequence::from_fn(n, |_| 1.0).unwrap();
        for row in 1..=n {
            let lhs: f64 = w.row(row).unwrap().iter().map(|(m, p)| p * pair_vectors(&xs[m - 1], &f).unwrap().norm_sqr()).sum();
            let s_n = fam.partial_sum(2.0, row).unwrap();
            prop_assert!(lhs <= f.norm_squared() / s_n + 1e-9);
            prop_assert!((p_transform(&w, &ones, row).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn block_rows_stay_in_their_blocks(alpha in 0.1f64..0.5, blocks in 1usize..5, growth in 0.0f64..2.0) {
        let fam = NormFamily::power(1.0, alpha).unwrap();
        let part = block_partition(&fam, 2.0, blocks, growth, 1_000_000).unwrap();
        let sums = part.sums();
        prop_assert!(sums[sums.len() - 1] >= sums[0]);
        for (k, s) in sums.iter().enumerate() {
            prop_assert!(*s >= growth * (k + 1) as f64);
        }
        let w = block_weights(&fam, &part).unwrap();
        for k in 1..=part.num_blocks() {
            let (lo, hi) = part.block(k);
            let row = w.row(k).unwrap();
            for m in 1..=part.horizon() {
                if m < lo || m > hi {
                    prop_assert_eq!(row.weight(m), 0.0);
                }
            }
        }
    }

    #[test]
    fn cluster_surrogate(alpha in 0.2f64..0.5, s in any::<u64>(), count in 1usize..4) {
        let fam = NormFamily::power(1.0, alpha).unwrap();
        let part = block_partition(&fam, 1.5, 3, 1.0, 10_000).unwrap();
        let space = SpaceModel::lp(3.0, part.horizon()).unwrap();
        let model = BlockModel::new(space, &fam, part, None).unwrap();
        let fs: Vec<Functional> = (0..count as u64).map(|i| Functional::new(space.gaussian(s ^ i))).collect();
        for k in 1..=model.partition.num_blocks() {
            let cert = cluster_certificate(&model.weights, &model.xs, &fs, 1.5, k).unwrap();
            let bound: f64 = fs.iter().map(|f| f.dual_norm().powf(1.5)).sum::<f64>() / model.partition.sums()[k - 1];
            prop_assert!(cert.value <= cert.weighted_average + 1e-12);
            prop_assert!(cert.weighted_average <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn coverage_is_monotone_in_planks(d in 1usize..4, seeds in prop::collection::vec(any::<u64>(), 1..5), widths in prop::collection::vec(0.05f64..1.0, 5), seed in any::<u64>()) {
        let space = SpaceModel::euclidean_real(d).unwrap();
        let planks: Vec<Plank> = seeds
            .iter()
            .zip(&widths)
            .map(|(&s, &w)| Plank::new(space.random_unit(s), w, None).unwrap())
            .collect();
        let mut prev = 1.0;
        for k in 0..=planks.len() {
            let r = coverage_mc(space, &planks[..k], 1.0, 500, seed).unwrap();
            prop_assert!(r.uncovered_fraction <= prev);
            prev = r.uncovered_fraction;
        }
    }

    #[test]
    fn parallel_covers_obey_the_width_sum(centres in prop::collection::vec(-1.0f64..1.0, 1..6), widths in prop::collection::vec(0.05f64..1.5, 6), radius in 0.1f64..1.0) {
        let space = SpaceModel::euclidean_real(2).unwrap();
        let e = space.basis(1).unwrap();
        let planks: Vec<Plank> = centres
            .iter()
            .zip(&widths)
            .map(|(&c, &w)| Plank::new(e.clone(), w, Some(e.scaled(c))).unwrap())
            .collect();
        let cover = parallel_cover(&planks, radius).unwrap();
        if cover.covers {
            prop_assert!(cover.width_sum >= cover.diameter);
        }
    }

    #[test]
    fn reported_witnesses_survive_recomputation(d in 2usize..6, count in 1usize..6, s in any::<u64>(), scale in 0.5f64..4.0) {
        let space = SpaceModel::euclidean_real(d).unwrap();
        let xs: Vec<Vector> = (0..count as u64).map(|i| space.random_unit(s ^ i).scaled(scale)).collect();
        let report = witness_search(&xs, &WitnessConfig { restarts: 4, budget: 500, seed: s, ..Default::default() }).unwrap();
        let margins = witness_margins(&xs, &report.witness, 0.5).unwrap();
        let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(report.min_margin, min);
        if report.success {
            prop_assert!(min > 0.0);
        }
    }

    #[test]
    fn weight_text_round_trips(w in weights_strategy(7)) {
        let back = WeightMatrix::parse(&w.to_text(1e-12)).unwrap();
        let json = WeightMatrix::parse(&w.to_json_value().to_string()).unwrap();
        for n in 1..=w.num_rows() {
            let row = w.row(n).unwrap();
            prop_assert_eq!(row.iter().collect::<Vec<_>>(), back.row(n).unwrap().iter().collect::<Vec<_>>());
            prop_assert_eq!(row.iter().collect::<Vec<_>>(), json.row(n).unwrap().iter().collect::<Vec<_>>());
        }
    }
}
