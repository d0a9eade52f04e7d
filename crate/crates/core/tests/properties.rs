use std::f64::consts::PI;

use proptest::prelude::*;

use phsums::complexes::{build_alpha_2d, build_cech_oracle, build_rips, delaunay_2d};
use phsums::geometry::{apply_bilipschitz, geodesic, euclidean, pairwise_distances, BiLipschitzMap, MetricSpace, PointCloud};
use phsums::harness::{barcodes_close, random_probes};
use phsums::persistence::{mst, ph0_reduced, reduce, reduce_dual, Barcode, Interval};
use phsums::sampling::{sample, Measure};
use phsums::statistics::{
    e_alpha_sum, fit_loglog, interleaving_check, mst_alpha_weight, Response, ScalingRow, ScalingTable,
};
use rand::SeedableRng;

fn plane_cloud(max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3..max).prop_map(|pts| {
        PointCloud::new(
            MetricSpace::Euclidean { dim: 2 },
            pts.into_iter().map(|(x, y)| vec![x, y]).collect(),
        )
        .unwrap()
    })
}

fn unit_vector() -> impl Strategy<Value = Vec<f64>> {
    (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(z, t)| {
        let r = (1.0 - z * z).sqrt();
        vec![r * t.cos(), r * t.sin(), z]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euclidean_triangle_inequality(
        a in prop::collection::vec(-5.0..5.0f64, 3),
        b in prop::collection::vec(-5.0..5.0f64, 3),
        c in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        prop_assert!(euclidean(&a, &c) <= euclidean(&a, &b) + euclidean(&b, &c) + 1e-12);
        prop_assert_eq!(euclidean(&a, &b), euclidean(&b, &a));
    }

    #[test]
    fn geodesic_triangle_inequality(a in unit_vector(), b in unit_vector(), c in unit_vector()) {
        prop_assert!(geodesic(&a, &c) <= geodesic(&a, &b) + geodesic(&b, &c) + 1e-12);
        prop_assert!(geodesic(&a, &b) <= PI + 1e-12);
    }

    #[test]
    fn distance_matrix_is_symmetric(seed in any::<u64>()) {
        let cloud = sample(&Measure::UniformSphere { dim: 2 }, 25, seed).unwrap();
        let d = pairwise_distances(&cloud);
        for i in 0..25 {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..25 {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                prop_assert!(d.get(i, j) <= PI + 1e-12);
            }
        }
    }

    #[test]
    fn samples_stay_in_support(seed in any::<u64>()) {
        let cube = sample(&Measure::UniformCube { dim: 3, side: 2.0 }, 50, seed).unwrap();
        prop_assert!(cube.coords().iter().all(|x| (0.0..2.0).contains(x)));
        let ball = sample(&Measure::UniformBall { dim: 3, radius: 0.5 }, 50, seed).unwrap();
        prop_assert!(ball.points().all(|p| euclidean(p, &[0.0; 3]) <= 0.5 + 1e-12));
        let sphere = sample(&Measure::UniformSphere { dim: 3 }, 50, seed).unwrap();
        prop_assert!(sphere.points().all(|p| (euclidean(p, &[0.0; 4]) - 1.0).abs() <= 1e-12));
        prop_assert_eq!(sample(&Measure::UniformSphere { dim: 3 }, 50, seed).unwrap(), sphere);
    }

    #[test]
    fn rotation_invariance(cloud in plane_cloud(25), theta in 0.0..2.0 * PI) {
        let (s, c) = theta.sin_cos();
        let rotation = BiLipschitzMap::Linear { matrix: vec![vec![c, -s], vec![s, c]] };
        let rotated = apply_bilipschitz(&rotation, &cloud).unwrap();
        let a = reduce(&build_alpha_2d(&cloud).unwrap()).unwrap();
        let b = reduce(&build_alpha_2d(&rotated).unwrap()).unwrap();
        prop_assert!(barcodes_close(&a, &b, 1, 1e-9));
    }

    #[test]
    fn alpha_matches_cech(cloud in plane_cloud(14)) {
        let a = reduce(&build_alpha_2d(&cloud).unwrap()).unwrap();
        let c = reduce(&build_cech_oracle(&cloud, 2).unwrap()).unwrap();
        prop_assert!(barcodes_close(&a, &c, 1, 1e-9));
    }

    #[test]
    fn mst_gives_degree_zero(cloud in plane_cloud(40), alpha in 0.1..3.0f64) {
        let d = pairwise_distances(&cloud);
        let tree = mst(&d);
        let rips = reduce(&build_rips(&d, 1, f64::INFINITY).unwrap()).unwrap();
        let mut half: Vec<f64> = tree.edges.iter().map(|e| e.length / 2.0).filter(|&x| x > 0.0).collect();
        half.sort_by(f64::total_cmp);
        let mut deaths: Vec<f64> = rips.intervals(0).iter().map(|i| i.death).collect();
        deaths.sort_by(f64::total_cmp);
        prop_assert_eq!(&half, &deaths);
        let e = e_alpha_sum(&ph0_reduced(&d), 0, alpha).unwrap();
        prop_assert!((e - mst_alpha_weight(&tree, alpha)).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn scale_equivariance(cloud in plane_cloud(30), factor in 0.1..10.0f64, alpha in 0.5..2.0f64) {
        let scaled = apply_bilipschitz(&BiLipschitzMap::UniformScale { factor }, &cloud).unwrap();
        let a = reduce(&build_alpha_2d(&cloud).unwrap()).unwrap();
        let b = reduce(&build_alpha_2d(&scaled).unwrap()).unwrap();
        for i in 0..=1 {
            let ea = e_alpha_sum(&a, i, alpha).unwrap() * factor.powf(alpha);
            let eb = e_alpha_sum(&b, i, alpha).unwrap();
            prop_assert!((ea - eb).abs() <= 1e-9 * ea.max(1.0));
        }
    }

    #[test]
    fn weighted_sum_decreases_in_alpha_on_normalised_barcodes(
        lengths in prop::collection::vec(0.001..1.0f64, 1..40),
        a1 in 0.1..3.0f64,
        a2 in 0.1..3.0f64,
    ) {
        let bc = Barcode::from_parts(
            vec![lengths.iter().map(|&l| Interval::new(0.0, l).unwrap()).collect()],
            vec![],
        );
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        prop_assert!(e_alpha_sum(&bc, 0, hi).unwrap() <= e_alpha_sum(&bc, 0, lo).unwrap() + 1e-12);
    }

    #[test]
    fn cohomology_matches_homology(seed in any::<u64>(), n in 8usize..30, scale in 0.1..0.6f64) {
        let cloud = sample(&Measure::UniformCube { dim: 3, side: 1.0 }, n, seed).unwrap();
        let f = build_rips(&pairwise_distances(&cloud), 3, scale).unwrap();
        prop_assert_eq!(reduce(&f).unwrap(), reduce_dual(&f).unwrap());
    }

    #[test]
    fn builders_are_face_monotone(cloud in plane_cloud(20)) {
        build_alpha_2d(&cloud).unwrap().check_face_monotone().unwrap();
        build_cech_oracle(&cloud, 2).unwrap().check_face_monotone().unwrap();
        build_rips(&pairwise_distances(&cloud), 3, 0.4).unwrap().check_face_monotone().unwrap();
    }

    #[test]
    fn delaunay_is_empty_circle(cloud in plane_cloud(60)) {
        let tri = delaunay_2d(&cloud).unwrap();
        prop_assert!(tri.is_delaunay());
    }

    #[test]
    fn exact_power_law_fits(exponent in -1.0..2.0f64, constant in 0.1..100.0f64) {
        let rows = [100usize, 200, 400, 800]
            .iter()
            .flat_map(|&n| (0..5).map(move |trial| ScalingRow {
                n,
                trial,
                e_alpha: constant * (n as f64).powf(exponent),
                ph_count: n,
                n_spanning: 1,
                elapsed: 0.0,
            }))
            .collect();
        let fit = fit_loglog(&ScalingTable::new(rows), Response::EAlpha).unwrap();
        prop_assert!((fit.slope - exponent).abs() < 1e-10);
        prop_assert!(fit.residuals.iter().all(|r| r.abs() < 1e-10));
    }

    #[test]
    fn interleaving_counts_hold(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cloud = sample(&Measure::UniformCube { dim: 2, side: 1.0 }, 15, seed).unwrap();
        let map = BiLipschitzMap::random_coordinatewise(2, 1.5, 3, (0.0, 1.0), &mut rng);
        let mapped = apply_bilipschitz(&map, &cloud).unwrap();
        let bx = reduce(&build_cech_oracle(&cloud, 2).unwrap()).unwrap();
        let by = reduce(&build_cech_oracle(&mapped, 2).unwrap()).unwrap();
        let probes = random_probes(&mut rng, 1.5, 10, 0.2);
        for i in 0..=1 {
            prop_assert!(interleaving_check(&bx, &by, i, 1.5, &probes).unwrap().passed());
        }
    }
}
