use lie_kam_core::dynamics::{
    euler_field, from_reduced, throbbing_field, to_reduced, InertiaSpec, ModulationEntry,
};
use lie_kam_core::operators::estimate_diophantine;
use lie_kam_core::sample::{random_series, trial_rng, uniform_on_sphere, SeriesShape};
use lie_kam_core::series::{cauchy_bound_check, NormScale, Series, TruncationSpec};
use proptest::prelude::*;

const RHO: f64 = 2.0;
const R: f64 = 0.5;

fn small(seed: u64, k: u64) -> Series {
    let trunc = TruncationSpec::new(4, 4, 4, 1).unwrap();
    random_series(
        &mut trial_rng(seed, k),
        RHO,
        trunc,
        &SeriesShape::low(2, 2, 1.0),
    )
    .unwrap()
}

/// Box big enough that one bracket or product of two `small` series is exact.
fn roomy(seed: u64, k: u64) -> Series {
    let trunc = TruncationSpec::new(6, 6, 6, 0).unwrap();
    random_series(
        &mut trial_rng(seed, k),
        RHO,
        trunc,
        &SeriesShape::low(2, 2, 1.0),
    )
    .unwrap()
}

fn diff_norm(a: &Series, b: &Series) -> f64 {
    a.sub(b).unwrap().windowed().majorant(R)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>()) {
        let (f, g) = (small(seed, 0), small(seed, 1));
        let sum = f.bracket(&g).unwrap().add(&g.bracket(&f).unwrap()).unwrap();
        prop_assert!(sum.majorant(R) <= 1e-14 * f.majorant(R) * g.majorant(R));
    }

    #[test]
    fn bracket_satisfies_jacobi_on_the_window(seed in any::<u64>()) {
        let (f, g, h) = (small(seed, 0), small(seed, 1), small(seed, 2));
        let cyc = f.bracket(&g.bracket(&h).unwrap()).unwrap()
            .add(&g.bracket(&h.bracket(&f).unwrap()).unwrap()).unwrap()
            .add(&h.bracket(&f.bracket(&g).unwrap()).unwrap()).unwrap();
        let scale = f.majorant(R) * g.majorant(R) * h.majorant(R);
        prop_assert!(cyc.windowed().majorant(R) <= 1e-10 * scale);
    }

    #[test]
    fn bracket_is_a_derivation_of_the_product(seed in any::<u64>()) {
        let (f, g, h) = (roomy(seed, 0), roomy(seed, 1), roomy(seed, 2));
        let lhs = f.bracket(&g.mul(&h).unwrap()).unwrap();
        let rhs = f.bracket(&g).unwrap().mul(&h).unwrap().add(&g.mul(&f.bracket(&h).unwrap()).unwrap()).unwrap();
        let scale = f.majorant(R) * g.majorant(R) * h.majorant(R);
        prop_assert!(diff_norm(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn bracket_matches_finite_differences(seed in any::<u64>(), x in -0.3f64..0.3, th in 0.0f64..6.3, t in 0.0f64..6.3) {
        let (f, g) = (roomy(seed, 0), roomy(seed, 1));
        let b = f.bracket(&g).unwrap();
        let step = 1e-5;
        let d = |s: &Series, dx: f64, dth: f64| {
            (s.evaluate(x + dx, th + dth, t).unwrap() - s.evaluate(x - dx, th - dth, t).unwrap()) / (2.0 * step)
        };
        let fd = (d(&f, step, 0.0) * d(&g, 0.0, step) - d(&f, 0.0, step) * d(&g, step, 0.0)) / RHO;
        let exact = b.evaluate(x, th, t).unwrap();
        prop_assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()), "{exact} vs {fd}");
    }

    #[test]
    fn majorant_is_a_norm(seed in any::<u64>(), c in -3.0f64..3.0) {
        let (f, g) = (small(seed, 0), small(seed, 1));
        prop_assert!(f.add(&g).unwrap().majorant(R) <= f.majorant(R) + g.majorant(R) + 1e-12);
        prop_assert!((f.scale_real(c).majorant(R) - c.abs() * f.majorant(R)).abs() <= 1e-12 * f.majorant(R));
        prop_assert!(f.majorant(0.3) <= f.majorant(R));
    }

    #[test]
    fn majorant_is_submultiplicative(seed in any::<u64>()) {
        let (f, g) = (roomy(seed, 0), roomy(seed, 1));
        prop_assert!(f.mul(&g).unwrap().majorant(R) <= f.majorant(R) * g.majorant(R) * (1.0 + 1e-12));
    }

    #[test]
    fn cauchy_margins_are_nonnegative(seed in any::<u64>(), d in 0.02f64..0.2, delta in 0.02f64..0.2) {
        let (w, z) = (small(seed, 0), small(seed, 1));
        let rep = cauchy_bound_check(&NormScale::default(), &w, Some(&z), R, d, delta).unwrap();
        prop_assert!(rep.all_nonnegative(), "{rep:?}");
    }

    #[test]
    fn chart_round_trip(seed in any::<u64>()) {
        let m = uniform_on_sphere(&mut trial_rng(seed, 0), RHO);
        prop_assume!(m[2].abs() < RHO * (1.0 - 1e-6));
        let (x, th) = to_reduced(&m, RHO).unwrap();
        prop_assert!((x - m[2] / RHO).abs() < 1e-15);
        let back = from_reduced(x, th, RHO).unwrap();
        prop_assert!(back.iter().zip(&m).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn diophantine_estimate_never_grows_with_the_scan(k in 1usize..60) {
        let omega = (5f64.sqrt() - 1.0) / 2.0;
        let a = estimate_diophantine(omega, 1.0, k).unwrap().gamma;
        let b = estimate_diophantine(omega, 1.0, k + 1).unwrap().gamma;
        prop_assert!(b <= a && b > 0.0);
    }
}

#[test]
fn fields_are_tangent_to_the_sphere() {
    let fixed = InertiaSpec::new([1.0, 2.0, 3.0]).unwrap();
    let none = ModulationEntry::default();
    let driven = InertiaSpec::modulated(
        [1.0, 2.0, 3.0],
        [
            ModulationEntry::cosine(0.05, 2.0),
            ModulationEntry::cosine(0.1, 1.0),
            none,
        ],
    )
    .unwrap();
    for k in 0..1000 {
        let m = uniform_on_sphere(&mut trial_rng(9, k), RHO);
        let t = k as f64 * 0.01;
        for f in [euler_field(&m, &fixed), throbbing_field(&m, t, &driven)] {
            let dot: f64 = f.iter().zip(&m).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-14, "M = {m:?}: {dot:e}");
        }
    }
}
