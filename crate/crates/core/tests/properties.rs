use ndarray::{Array2, Axis};
use proptest::prelude::*;
use triway_core::archetypoid::refine;
use triway_core::{
    ada, asymmetry_report, hplot, nearest_profiles, oracle, pam, project, rank_transform, similarity_to_dissimilarity,
    Conditionality, LoadOptions, RankScope, SymmetryDecl, ThreeWayDissimilarity,
};

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(lo..hi, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn sized_matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Array2<f64>> {
    (rows, cols).prop_flat_map(|(r, c)| matrix(r, c, -10.0, 10.0))
}

fn three_way(n: usize, l: usize) -> impl Strategy<Value = ThreeWayDissimilarity> {
    prop::collection::vec(matrix(n, n, 0.0, 20.0), l).prop_map(move |ms| {
        ThreeWayDissimilarity::new(
            (0..n).map(|i| format!("o{i}")).collect(),
            (0..l).map(|i| format!("t{i}")).collect(),
            ms,
            SymmetryDecl::Auto,
            Conditionality::Unconditional,
        )
        .unwrap()
    })
}

fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip_is_exact(d in three_way(4, 2)) {
        let mut buf = Vec::new();
        d.write_long_csv(&mut buf).unwrap();
        let back = ThreeWayDissimilarity::read_long_csv(buf.as_slice(), LoadOptions::default()).unwrap();
        prop_assert_eq!(back.labels(), d.labels());
        prop_assert_eq!(back.occasions(), d.occasions());
        prop_assert_eq!(back.matrices(), d.matrices());
    }

    #[test]
    fn json_round_trip_is_exact(d in three_way(3, 2)) {
        let back = ThreeWayDissimilarity::from_json_str(&d.to_json_string(), LoadOptions::default()).unwrap();
        prop_assert_eq!(back.matrices(), d.matrices());
    }

    #[test]
    fn ranks_ignore_monotone_maps(d in three_way(4, 2)) {
        let mapped = ThreeWayDissimilarity::new(
            d.labels().to_vec(),
            d.occasions().to_vec(),
            d.matrices().iter().map(|m| m.mapv(|v| v.powi(3) + 2.0 * v + 1.0)).collect(),
            SymmetryDecl::Auto,
            Conditionality::Unconditional,
        ).unwrap();
        for scope in [RankScope::Global, RankScope::PerOccasion] {
            let a = rank_transform(&d, scope).unwrap();
            let b = rank_transform(&mapped, scope).unwrap();
            prop_assert_eq!(a.matrices(), b.matrices());
        }
    }

    #[test]
    fn similarity_conversion_is_an_involution(d in three_way(4, 2)) {
        let once = similarity_to_dissimilarity(&d, 20.0).unwrap();
        let twice = similarity_to_dissimilarity(&once, 20.0).unwrap();
        for (a, b) in twice.matrices().iter().zip(d.matrices()) {
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x - y).abs() <= 1e-12 * 20.0);
            }
        }
    }

    #[test]
    fn full_rank_distances_are_sd_of_differences(x in sized_matrix(4..=12, 2..=8)) {
        let m = x.ncols();
        let h = hplot(x.view(), m.min(x.nrows() - 1)).unwrap();
        for i in 0..m {
            for j in (i + 1)..m {
                let sd = oracle::sd_of_difference(x.view(), i, j);
                let dist = (&h.coordinates.row(i) - &h.coordinates.row(j)).mapv(|v| v * v).sum().sqrt();
                prop_assert!((dist - sd).abs() <= 1e-9 * sd.max(1e-12), "{} vs {}", dist, sd);
            }
        }
    }

    #[test]
    fn hplot_scales_with_data(x in sized_matrix(5..=10, 2..=6), a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], b in -5.0..5.0f64) {
        let base = hplot(x.view(), 2).unwrap();
        let moved = hplot(x.mapv(|v| a * v + b).view(), 2).unwrap();
        for j in 0..2 {
            let s = base.coordinates.column(j);
            let t = moved.coordinates.column(j);
            let scale = s.iter().fold(0.0_f64, |m, v| m.max(v.abs())) * a.abs();
            let sign = s.dot(&t).signum();
            for (u, v) in s.iter().zip(t.iter()) {
                prop_assert!(rel_close(sign * v, a.abs() * u, 1e-8, scale));
            }
        }
        for (g, h) in base.gof_cumulative.iter().zip(&moved.gof_cumulative) {
            prop_assert!((g - h).abs() <= 1e-12);
        }
    }

    #[test]
    fn profile_orderings_survive_affine_maps(d in three_way(4, 2), a in 0.1..10.0f64, b in -5.0..5.0f64) {
        let mapped = ThreeWayDissimilarity::new(
            d.labels().to_vec(),
            d.occasions().to_vec(),
            d.matrices().iter().map(|m| m.mapv(|v| a * v + b)).collect(),
            SymmetryDecl::Auto,
            Conditionality::Unconditional,
        ).unwrap();
        let p = project(&d, 2).unwrap();
        let q = project(&mapped, 2).unwrap();
        let ra = asymmetry_report(&p).unwrap();
        let rb = asymmetry_report(&q).unwrap();
        let order = |r: &triway_core::AsymmetryReport| r.scores.iter().map(|s| (s.object, s.occasion)).collect::<Vec<_>>();
        let gaps_ok = ra.scores.windows(2).all(|w| (w[0].score - w[1].score).abs() > 1e-6 * w[0].score.abs());
        if gaps_ok {
            prop_assert_eq!(order(&ra), order(&rb));
        }
        let na = nearest_profiles(&p, 3, false);
        let nb = nearest_profiles(&q, 3, false);
        let distinct = na.windows(2).all(|w| w[1].distance - w[0].distance > 1e-6 * w[1].distance);
        let pa: Vec<_> = na.iter().map(|x| (x.first, x.second)).collect();
        let pb: Vec<_> = nb.iter().map(|x| (x.first, x.second)).collect();
        if distinct && nearest_profiles(&p, 4, false)[3].distance - na[2].distance > 1e-6 * na[2].distance {
            prop_assert_eq!(pa, pb);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ada_is_equivariant(y in sized_matrix(4..=7, 2..=3), k in 1usize..=3, a in 0.1..10.0f64, b in -5.0..5.0f64) {
        let k = k.min(y.nrows());
        let base = ada(y.view(), k).unwrap();
        let moved = ada(y.mapv(|v| a * v + b).view(), k).unwrap();
        let scale = base.rss.max(1e-9 * y.mapv(|v| v * v).sum());
        prop_assert!(rel_close(moved.rss, a * a * base.rss, 1e-6, a * a * scale));
        for row in moved.alphas.rows() {
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.sum() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn ada_is_a_swap_fixed_point(y in sized_matrix(4..=7, 2..=3), k in 1usize..=3) {
        let k = k.min(y.nrows());
        let first = ada(y.view(), k).unwrap();
        let again = refine(y.view(), &first.indices).unwrap();
        prop_assert_eq!(&again.indices, &first.indices);
        prop_assert_eq!(again.trace.len(), 1);
        prop_assert!(first.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn pam_ignores_rigid_motions(y in matrix(7, 2, -10.0, 10.0), k in 1usize..=3, theta in 0.0..6.3f64, shift in (-5.0..5.0f64, -5.0..5.0f64)) {
        let (c, s) = (theta.cos(), theta.sin());
        let mut moved = y.clone();
        for mut row in moved.axis_iter_mut(Axis(0)) {
            let (u, v) = (row[0], row[1]);
            row[0] = c * u - s * v + shift.0;
            row[1] = s * u + c * v + shift.1;
        }
        let a = pam(y.view(), k).unwrap();
        let b = pam(moved.view(), k).unwrap();
        prop_assert!(rel_close(a.objective, b.objective, 1e-9, a.objective.max(1.0)));
    }

    #[test]
    fn pam_objective_is_the_sum_of_nearest_medoid_distances(y in matrix(8, 3, -10.0, 10.0), k in 1usize..=4) {
        let r = pam(y.view(), k).unwrap();
        let mut total = 0.0;
        for (i, &c) in r.assignment.iter().enumerate() {
            let d = (&y.row(i) - &y.row(r.medoids[c])).mapv(|v| v * v).sum().sqrt();
            let nearest = r.medoids.iter()
                .map(|&m| (&y.row(i) - &y.row(m)).mapv(|v| v * v).sum().sqrt())
                .fold(f64::INFINITY, f64::min);
            prop_assert!((d - nearest).abs() <= 1e-12 * nearest.max(1.0));
            total += d;
        }
        prop_assert!((total - r.objective).abs() <= 1e-9 * total.max(1.0));
        prop_assert!(r.medoids.windows(2).all(|w| w[0] < w[1]));
    }
}
