use jlmetric::classical::{activity_rate, snapshot_series, Descriptor};
use jlmetric::ctdg::{nyquist_resolution, read_ctdg, write_ctdg};
use jlmetric::distances::{ks_distance, spearman};
use jlmetric::perturb::{edge_rewire, event_permute, time_perturb, PermuteMode};
use jlmetric::{Ctdg, Event, JlConfig, JlProjector};
use proptest::prelude::*;

fn arb_ctdg(max_events: usize, feature_dim: usize) -> impl Strategy<Value = Ctdg> {
    prop::collection::vec(
        (
            0u32..20,
            0u32..20,
            0u32..50,
            prop::collection::vec(-5.0f64..5.0, feature_dim),
        ),
        3..max_events,
    )
    .prop_map(move |raw| {
        let events = raw
            .into_iter()
            .map(|(s, d, t, f)| Event::new(s, d, t as f64 * 0.25, f))
            .collect();
        Ctdg::new(events, feature_dim).unwrap()
    })
}

fn relabel(g: &Ctdg, offset: u32) -> Ctdg {
    // Reversal plus offset is a bijection on 0..20.
    let map = |v: u32| 19 - v + offset;
    let events = g
        .events()
        .iter()
        .map(|e| Event::new(map(e.src), map(e.dst), e.t, e.features.clone()))
        .collect();
    Ctdg::new(events, g.feature_dim()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ks_invariant_under_monotone_maps(
        a in prop::collection::vec(-10.0f64..10.0, 1..40),
        b in prop::collection::vec(-10.0f64..10.0, 1..40),
    ) {
        let f = |x: &f64| x.exp() * 3.0 + 1.0;
        let fa: Vec<f64> = a.iter().map(f).collect();
        let fb: Vec<f64> = b.iter().map(f).collect();
        prop_assert_eq!(ks_distance(&a, &b).unwrap(), ks_distance(&fa, &fb).unwrap());
    }

    #[test]
    fn spearman_invariant_under_monotone_maps(
        xy in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let fy: Vec<f64> = y.iter().map(|v| v.powi(3) - 2.0).collect();
        match (spearman(&x, &y), spearman(&x, &fy)) {
            (Ok(r), Ok(s)) => {
                prop_assert!((r - s).abs() < 1e-12);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "inconsistent results {:?}", other),
        }
    }

    #[test]
    fn perturbations_preserve_count_and_are_deterministic(
        g in arb_ctdg(60, 2),
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let ops: [&dyn Fn() -> Ctdg; 3] = [
            &|| edge_rewire(&g, p, seed).unwrap(),
            &|| time_perturb(&g, p, seed).unwrap(),
            &|| event_permute(&g, p, seed, PermuteMode::Replace).unwrap(),
        ];
        for op in ops {
            let (a, b) = (op(), op());
            prop_assert_eq!(a.num_events(), g.num_events());
            prop_assert_eq!(&a, &b);
        }
    }

    #[test]
    fn time_perturb_keeps_order_and_range(g in arb_ctdg(60, 0), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let h = time_perturb(&g, p, seed).unwrap();
        let ts: Vec<f64> = h.events().iter().map(|e| e.t).collect();
        prop_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(ts.iter().all(|&t| t >= 0.0 && t <= g.t_max()));
    }

    #[test]
    fn statistics_are_relabel_invariant(g in arb_ctdg(80, 0), offset in 0u32..1000) {
        let Ok(phi) = nyquist_resolution(&g) else { return Ok(()) };
        let h = relabel(&g, offset);
        for d in [Descriptor::MeanDegree, Descriptor::Lcc, Descriptor::Nc] {
            prop_assert_eq!(
                snapshot_series(&g, d, phi).unwrap().values,
                snapshot_series(&h, d, phi).unwrap().values
            );
        }
    }

    #[test]
    fn statistic_bounds(g in arb_ctdg(80, 0)) {
        let activity: f64 = activity_rate(&g).values.iter().sum();
        prop_assert_eq!(activity, 2.0 * g.num_events() as f64);

        let Ok(phi) = nyquist_resolution(&g) else { return Ok(()) };
        let lcc = snapshot_series(&g, Descriptor::Lcc, phi).unwrap();
        let nc = snapshot_series(&g, Descriptor::Nc, phi).unwrap();
        let ple = snapshot_series(&g, Descriptor::Ple, phi).unwrap();
        for i in 0..lcc.len() {
            prop_assert!(lcc.values[i] <= g.num_nodes() as f64);
            if lcc.values[i] > 0.0 {
                prop_assert!(nc.values[i] >= 1.0);
            }
            if ple.valid[i] {
                prop_assert!(ple.values[i] >= 1.0);
            }
        }
    }

    #[test]
    fn jl_distance_in_range(a in arb_ctdg(50, 2), b in arb_ctdg(50, 2), seed in any::<u64>()) {
        let p = JlProjector::for_graphs(JlConfig::default().with_seed(seed), [&a, &b]).unwrap();
        let d = p.distance(&a, &b).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
    }

    #[test]
    fn csv_round_trip(g in arb_ctdg(40, 3)) {
        let mut buf = Vec::new();
        write_ctdg(&g, &mut buf).unwrap();
        prop_assert_eq!(read_ctdg(buf.as_slice()).unwrap(), g);
    }
}
