mod common;

use proptest::prelude::*;

use beamfactory::analysis::{
    coverage_probability, delta_stats, dominance_map, gamma_map, local_average, AveragingDomain,
};
use beamfactory::beams::{make_config, SsbId, TxConfig};
use beamfactory::layout::{GridSpec, Point2, Point3, RouteSpec, Visibility};
use beamfactory::link::{extract_path_gain, synthesize_rsrp, MeasurementTrace};
use beamfactory::propagation::{ModelPreset, ShadowingField};
use beamfactory::switchoff::{
    build_problem, dbscan, objective, solve_dbscan, solve_exhaustive, solve_ga, BeamMask, DbscanParams,
    GaParams, SwitchOffProblem,
};

use common::*;

const BEAMS: [&str; 6] = ["B-1-1", "B-1-2", "B-2-3", "B-2-4", "B-3-1", "B-3-7"];

type Burst = (f64, f64, Vec<(&'static str, f64)>);

/// Bursts on a 3 m x 2 m strip with up to six beams each, RSRP on a
/// 0.01 dB lattice.
fn bursts(max: usize) -> impl Strategy<Value = Vec<Burst>> {
    let burst = (
        0u32..3000,
        0u32..2000,
        prop::collection::btree_map(0usize..6, -11_000i32..-4_000, 1..=6),
    )
        .prop_map(|(x, y, m)| {
            (
                x as f64 / 1000.0,
                y as f64 / 1000.0,
                m.into_iter().map(|(k, r)| (BEAMS[k], r as f64 / 100.0)).collect(),
            )
        });
    prop::collection::vec(burst, 1..max)
}

fn strip_grid() -> GridSpec {
    GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, 3, 2).unwrap()
}

fn problem(b: &[Burst], xi: usize) -> SwitchOffProblem {
    build_problem(&trace_b(b), &strip_grid(), xi).unwrap()
}

fn random_mask(n: usize, bits: u64) -> BeamMask {
    let m = BeamMask::from_bits(bits & ((1u64 << n) - 1), n);
    if m.popcount() == 0 {
        BeamMask::from_bits(1, n)
    } else {
        m
    }
}

fn quick_ga() -> GaParams {
    GaParams {
        pop_size: 30,
        generations: 30,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_is_nonnegative_and_zero_when_all_on(b in bursts(30), bits in any::<u64>()) {
        let p = problem(&b, 3);
        let n = p.n_beams();
        prop_assert!(objective(&p, &random_mask(n, bits)).unwrap() >= 0.0);
        prop_assert_eq!(objective(&p, &BeamMask::all_on(n)).unwrap(), 0.0);
    }

    #[test]
    fn exhaustive_bounds_heuristics(b in bursts(20), xi in 1usize..=3, seed in any::<u64>()) {
        let p = problem(&b, xi);
        let ex = solve_exhaustive(&p).unwrap();
        let ga = solve_ga(&p, &quick_ga(), seed).unwrap();
        let db = solve_dbscan(&p, &DbscanParams { min_pts: 2, ..Default::default() }).unwrap();
        prop_assert!(ex.objective <= ga.objective);
        prop_assert!(ex.objective <= db.objective);
        prop_assert!(ga.mask.popcount() <= xi && db.mask.popcount() <= xi);
    }

    #[test]
    fn optimum_non_increasing_in_budget(b in bursts(20)) {
        let mut last = f64::INFINITY;
        for xi in 1..=3 {
            let o = solve_exhaustive(&problem(&b, xi)).unwrap().objective;
            prop_assert!(o <= last);
            last = o;
        }
    }

    #[test]
    fn ga_is_deterministic(b in bursts(20), seed in any::<u64>()) {
        let p = problem(&b, 2);
        prop_assert_eq!(solve_ga(&p, &quick_ga(), seed).unwrap(), solve_ga(&p, &quick_ga(), seed).unwrap());
    }

    #[test]
    fn dbscan_ignores_burst_order(b in bursts(40), rot in 0usize..40) {
        let mut shuffled = b.clone();
        shuffled.rotate_left(rot % b.len());
        shuffled.reverse();
        let params = DbscanParams { min_pts: 3, ..Default::default() };
        let r1 = solve_dbscan(&problem(&b, 2), &params).unwrap();
        let r2 = solve_dbscan(&problem(&shuffled, 2), &params).unwrap();
        prop_assert_eq!(r1.mask, r2.mask);
        prop_assert!((r1.objective - r2.objective).abs() < 1e-9);
    }

    #[test]
    fn dbscan_core_points_ignore_input_order(
        pts in prop::collection::vec((0u32..50, 0u32..50), 1..80),
        rot in 0usize..80,
    ) {
        let pts: Vec<[f64; 3]> = pts.iter().map(|&(x, y)| [x as f64 / 10.0, y as f64 / 10.0, 0.0]).collect();
        let k = rot % pts.len();
        let mut moved = pts.clone();
        moved.rotate_left(k);
        let a = dbscan(&pts, 0.6, 4).unwrap();
        let b = dbscan(&moved, 0.6, 4).unwrap();
        prop_assert_eq!(a.n_clusters, b.n_clusters);
        for i in 0..pts.len() {
            let j = (i + pts.len() - k) % pts.len();
            prop_assert_eq!(a.core[i], b.core[j]);
        }
    }

    #[test]
    fn gaps_are_sorted_and_nonnegative(b in bursts(40)) {
        let stats = delta_stats(&trace_b(&b), 6).unwrap();
        for gaps in &stats.per_burst {
            prop_assert!(gaps.iter().all(|&g| g >= 0.0));
            prop_assert!(gaps.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn gamma_is_antisymmetric(a in bursts(30), b in bursts(30)) {
        let g = strip_grid();
        let ma = local_average(&trace_b(&a), &g, AveragingDomain::Db).unwrap();
        let mb = local_average(&trace_b(&b), &g, AveragingDomain::Db).unwrap();
        let ab = gamma_map(&ma, &mb).unwrap();
        let ba = gamma_map(&mb, &ma).unwrap();
        for (x, y) in ab.cells.iter().zip(&ba.cells) {
            match (x, y) {
                (Some(x), Some(y)) => prop_assert!((x + y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "definedness differs"),
            }
        }
    }

    #[test]
    fn coverage_grows_with_threshold(b in bursts(40), t1 in -110.0f64..-40.0, dt in 0.0f64..30.0) {
        let layout = single_hall(rect(0.0, 0.0, 3.0, 2.0), Visibility::Los, Point3::new(0.0, 0.0, 3.0), 1.5);
        let bins = [(0.0, 2.5), (2.5, 3.0), (3.0, 4.0)];
        let lo = coverage_probability(&trace_b(&b), t1, &bins, &layout).unwrap();
        let hi = coverage_probability(&trace_b(&b), t1 + dt, &bins, &layout).unwrap();
        for (l, h) in lo.iter().zip(&hi) {
            if let (Some(l), Some(h)) = (l.probability, h.probability) {
                prop_assert!(l <= h);
            }
        }
    }

    #[test]
    fn dominance_partition_sums_to_one(b in bursts(40), split in 1usize..6) {
        let ids: Vec<SsbId> = BEAMS.iter().map(|s| s.parse().unwrap()).collect();
        let g = strip_grid();
        let t = trace_b(&b);
        let mut rest: Vec<SsbId> = make_config(TxConfig::B).ids().filter(|i| !ids[..split].contains(i)).collect();
        rest.sort();
        let left = dominance_map(&t, &ids[..split], &g).unwrap();
        let right = dominance_map(&t, &rest, &g).unwrap();
        for (l, r) in left.fractions.iter().zip(&right.fractions) {
            match (l, r) {
                (Some(l), Some(r)) => prop_assert!((l + r - 1.0).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "definedness differs"),
            }
        }
    }

    #[test]
    fn gain_peaks_at_boresight_and_falls_off(k in 0usize..27, daz in 0.0f64..40.0, del in 0.0f64..20.0, step in 0.0f64..5.0) {
        let c = make_config(TxConfig::B);
        let b = &c.beams[k];
        let at = |a: f64, e: f64| c.gain(b, b.boresight_az + a, b.boresight_downtilt + e);
        prop_assert_eq!(at(0.0, 0.0), b.peak_gain);
        prop_assert!(at(daz, del) <= b.peak_gain);
        prop_assert!(at(daz + step, del) <= at(daz, del));
        prop_assert!(at(-daz - step, del) <= at(-daz, del));
        prop_assert!(at(daz, del + step) <= at(daz, del));
        prop_assert!(at(daz, del) >= b.peak_gain - c.floor_db);
    }

    #[test]
    fn route_steps_match_speed(
        wp in prop::collection::vec((0u32..400, 0u32..400), 2..6),
        speed in 0.1f64..2.0,
    ) {
        let wp: Vec<Point2> = wp.iter().map(|&(x, y)| Point2::new(x as f64 / 10.0, y as f64 / 10.0)).collect();
        prop_assume!(wp.windows(2).all(|w| w[0].distance(&w[1]) > 0.0));
        let r = RouteSpec::new("r", wp, speed).unwrap();
        let s = r.sample().unwrap();
        let step = speed * r.sample_period;
        // the closing waypoint may land off the period grid
        let last = &s[s.len() - 2..];
        prop_assert!(last[1].traveled - last[0].traveled <= step + 1e-9);
        for w in s[..s.len() - 1].windows(2) {
            prop_assert!((w[1].traveled - w[0].traveled - step).abs() < 1e-9);
            prop_assert!((w[1].time - w[0].time - r.sample_period).abs() < 1e-9);
            prop_assert!(w[0].position.distance(&w[1].position) <= step + 1e-9);
        }
    }

    #[test]
    fn classification_is_total(x in 0.0f64..40.0, y in -25.0f64..15.0) {
        let layout = two_halls();
        let p = Point2::new(x, y);
        prop_assert_eq!(layout.contains(p), layout.classify_visibility(p).is_ok());
    }

    #[test]
    fn trace_csv_round_trip(b in bursts(30)) {
        let t = trace_b(&b);
        let text = t.to_csv_string();
        let back = MeasurementTrace::read_csv(text.as_bytes()).unwrap();
        prop_assert_eq!(back.len(), t.len());
        for (s, r) in t.samples.iter().zip(&back.samples) {
            prop_assert!((s.time - r.time).abs() < 1e-9);
            prop_assert!(s.position.distance(&r.position) < 1e-9);
            prop_assert_eq!(s.entries.len(), r.entries.len());
            for (e, f) in s.entries.iter().zip(&r.entries) {
                prop_assert_eq!(e.0, f.0);
                prop_assert!((e.1 - f.1).abs() < 1e-9);
            }
        }
        prop_assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn extraction_inverts_synthesis(x in 0.0f64..40.0, y in -25.0f64..15.0, seed in any::<u64>()) {
        let layout = two_halls();
        let p = Point2::new(x, y);
        prop_assume!(layout.contains(p));
        let field = ShadowingField::generate(layout.bounds(), 0.5, 10.0, 1.0, seed).unwrap();
        let s = synth(
            layout.clone(),
            make_config(TxConfig::B),
            ModelPreset::MeasFitLos.model(),
            ModelPreset::MeasFitNlos.model(),
            field,
        );
        let truth = s.realized_path_gain(p).unwrap();
        for e in synthesize_rsrp(&s, p).unwrap() {
            let pg = extract_path_gain(e, p, &s.budget, &s.beams, &layout).unwrap();
            prop_assert!((pg - truth).abs() < 1e-9);
        }
    }

    #[test]
    fn rsrp_falls_along_boresight_ray(col in 1u8..=10, r0 in 1.0f64..20.0, dr in 0.01f64..5.0) {
        // receiver at transmitter height, so the ray stays on the beam axis
        let layout = single_hall(rect(0.0, -60.0, 60.0, 60.0), Visibility::Los, Point3::new(0.0, 0.0, 3.0), 3.0);
        let mut model = ModelPreset::MeasFitLos.model();
        model.sigma = 0.0;
        let s = zero_field_synth(layout, TxConfig::B, model, model);
        let id = SsbId::new(TxConfig::B, 2, col).unwrap();
        let az = s.beams.beam(id).unwrap().boresight_az.to_radians();
        let rsrp = |r: f64| {
            let p = Point2::new(r * az.cos(), r * az.sin());
            s.rsrp_all(p).unwrap().into_iter().find(|e| e.0 == id).unwrap().1
        };
        prop_assert!(rsrp(r0 + dr) < rsrp(r0));
    }
}
