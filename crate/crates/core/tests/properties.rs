use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use eeprb::experiment::{chsh_single_run, chsh_single_run_k, ArmRecord, Dataset};
use eeprb::moments::{Subset, SUBSETS};
use eeprb::oracle::{
    bell_functional, flipped_joint, maxwell_joint, product_joint, quantum_joint, rho_q_is_density,
    JointDistribution16, BELL_CHSH, BELL_TRIANGLE,
};
use eeprb::station::identify_local;
use eeprb::*;

type Row = ([bool; 4], bool, bool);

fn spin(plus: bool) -> SpinValue {
    SpinValue::from_sign(plus)
}

fn dataset(rows: &[Row]) -> Dataset {
    let s1 = rows
        .iter()
        .map(|(s, w1, _)| ArmRecord::new(spin(s[0]), Some(spin(s[2])), *w1))
        .collect();
    let s2 = rows
        .iter()
        .map(|(s, _, w2)| ArmRecord::new(spin(s[1]), Some(spin(s[3])), *w2))
        .collect();
    Dataset::new(Topology::Eeprb, s1, s2).unwrap()
}

fn rows() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec((any::<[bool; 4]>(), any::<bool>(), any::<bool>()), 1..300)
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn settings() -> impl Strategy<Value = Settings> {
    (angle(), angle(), angle(), angle()).prop_map(|(a, b, c, d)| Settings::new(a, b, c, d))
}

fn check_distribution(d: &JointDistribution16) -> Result<(), TestCaseError> {
    prop_assert!((d.total() - 1.0).abs() < 1e-12);
    for &p in &d.entries {
        prop_assert!(p >= -1e-15);
    }
    for f in [BELL_TRIANGLE, BELL_CHSH] {
        let v = bell_functional(d, |x| f64::from((f.g)(x)));
        prop_assert!(v >= f.lower - 1e-12 && v <= f.upper + 1e-12, "{} = {v}", f.name);
    }
    Ok(())
}

proptest! {
    #[test]
    fn moments_ignore_pair_order(rs in rows(), seed in any::<u64>()) {
        let mut shuffled = rs.clone();
        // Fisher-Yates driven by a simple LCG, enough to scramble the order
        let mut x = seed | 1;
        for i in (1..shuffled.len()).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (x >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(estimate_moments(&dataset(&rs)), estimate_moments(&dataset(&shuffled)));
    }

    #[test]
    fn moments_are_bounded(rs in rows()) {
        let m = estimate_moments(&dataset(&rs));
        for s in SUBSETS {
            prop_assert!(m.k(s).unwrap().abs() <= 1.0);
            if let Some(e) = m.e(s) {
                prop_assert!(e.abs() <= 1.0);
            }
        }
        prop_assert_eq!(m.n_pairs, rs.len() as u64);
        prop_assert!(m.n_coincident <= m.n_pairs);
    }

    #[test]
    fn single_run_chsh_never_exceeds_two(rs in rows()) {
        let m = estimate_moments(&dataset(&rs));
        prop_assert!(chsh_single_run_k(&m).unwrap().abs() <= 2.0);
        if let Some(c) = chsh_single_run(&m) {
            prop_assert!(c.abs() <= 2.0);
        }
    }

    #[test]
    fn all_identified_means_e_equals_k(rs in rows()) {
        let all: Vec<Row> = rs.iter().map(|(s, _, _)| (*s, true, true)).collect();
        let m = estimate_moments(&dataset(&all));
        for s in SUBSETS {
            prop_assert_eq!(m.e(s), m.k(s));
        }
    }

    #[test]
    fn swapping_stations_relabels_moments(rs in rows()) {
        // station 1 <-> station 2 maps S1 <-> S2 and S3 <-> S4
        let swapped: Vec<Row> = rs.iter().map(|(s, w1, w2)| ([s[1], s[0], s[3], s[2]], *w2, *w1)).collect();
        let (m, n) = (estimate_moments(&dataset(&rs)), estimate_moments(&dataset(&swapped)));
        let map = |s: Subset| {
            let b = s.bits();
            let swapped = ((b & 0b0101) << 1) | ((b & 0b1010) >> 1);
            SUBSETS.iter().copied().find(|t| t.bits() == swapped).unwrap()
        };
        for s in SUBSETS {
            prop_assert_eq!(m.k(s), n.k(map(s)));
            prop_assert_eq!(m.e(s), n.e(map(s)));
        }
    }

    #[test]
    fn closed_forms_are_distributions(st in settings(), phi0 in angle(), p in angle(), q in angle()) {
        check_distribution(&quantum_joint(&st))?;
        check_distribution(&flipped_joint(&st))?;
        check_distribution(&maxwell_joint(&st, phi0, 1.0))?;
        check_distribution(&product_joint(&st, Angle(p), Angle(q)))?;
    }

    #[test]
    fn rho_q_positivity_window(q in -2.0..2.0f64) {
        prop_assume!((q + 1.0 / 3.0).abs() > 1e-9 && (q - 1.0).abs() > 1e-9);
        prop_assert_eq!(rho_q_is_density(q), (-1.0 / 3.0..=1.0).contains(&q));
    }

    #[test]
    fn local_window_is_inclusive(tau in 0.0..10.0f64, w in 0.0..10.0f64) {
        prop_assert_eq!(identify_local(tau, w), tau <= w);
        prop_assert!(identify_local(w, w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_prefix_stable(seed in any::<u64>(), a in angle(), n in 1usize..400) {
        // the stream is consumed pair by pair, so a shorter run is a prefix
        let base = RunConfig { seed, n_pairs: 400, ..RunConfig::default() }
            .with_settings(Settings::new(a, 0.0, a + 0.5, 1.0));
        let long = run(&base).unwrap();
        let short = run(&RunConfig { n_pairs: n, ..base.clone() }).unwrap();
        prop_assert_eq!(&long.station1()[..n], short.station1());
        prop_assert_eq!(&long.station2()[..n], short.station2());
        prop_assert_eq!(run(&base).unwrap(), long);
    }

    #[test]
    fn no_retardation_identifies_everything(seed in any::<u64>(), a in angle()) {
        let config = RunConfig {
            seed,
            n_pairs: 300,
            law: RetardationLaw::None,
            identification: IdentificationRule::LocalWindow(0.0),
            ..RunConfig::default()
        }
        .with_settings(Settings::new(a, 0.3, 1.0, 2.0));
        let m = estimate_moments(&run(&config).unwrap());
        prop_assert_eq!(m.n_coincident, 300);
    }

    #[test]
    fn efficiency_only_removes_pairs(seed in any::<u64>(), eta in 0.0..1.0f64) {
        // identical streams up to the efficiency draws: η < 1 keeps a subset
        let full = RunConfig { seed, n_pairs: 500, ..RunConfig::default() };
        let a = run(&full).unwrap();
        let b = run(&RunConfig { eta, ..full.clone() }).unwrap();
        for (x, y) in a.station1().iter().zip(b.station1()) {
            prop_assert_eq!((x.s_first, x.s_second), (y.s_first, y.s_second));
            prop_assert!(x.w || !y.w);
        }
    }
}

#[test]
fn fixed_source_outcomes_follow_malus() {
    // photon 1 at p = 0.2 on a = 0: P(S1 = +1) = cos²(0.2)
    let config = RunConfig {
        source: PolarizationMode::Fixed { p: Angle(0.2), q: Angle(1.1) },
        n_pairs: 200_000,
        seed: 4,
        ..RunConfig::default()
    }
    .with_settings(Settings::new(0.0, 0.0, 0.5, 1.0));
    let m = estimate_moments(&run(&config).unwrap());
    let want = (0.4f64).cos();
    assert_abs_diff_eq!(m.k(Subset::of(&[1])).unwrap(), want, epsilon = 5.0 / (200_000f64).sqrt());
    assert_abs_diff_eq!(m.k(Subset::of(&[2])).unwrap(), (2.2f64).cos(), epsilon = 5.0 / (200_000f64).sqrt());
}
