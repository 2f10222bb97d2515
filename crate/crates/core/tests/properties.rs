//! Property-based checks of the core invariants on random fixtures.

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use stftlab::geometry::{cheeger_estimate, connectivity, gluing_bound, CheegerFamily, DomainMask};
use stftlab::io::{self, Container};
use stftlab::norms::{littlewood_paley, modulus_sobolev_ratio, phase_inf_distance, LpMode, Norm};
use stftlab::transforms::{stft, WindowSpec};
use stftlab::{rng, Grid1D, Signal, TFField, TFGrid};

fn grid() -> Grid1D {
    Grid1D::new(16.0, 256).unwrap()
}

fn random(seed: u64) -> Signal {
    rng::random_signal(grid(), &mut rng::stream(seed), 4, 3.0, 2.0).unwrap()
}

fn unimodular() -> impl Strategy<Value = Complex64> {
    (0.0..std::f64::consts::TAU).prop_map(Complex64::cis)
}

fn norms() -> Vec<Norm> {
    vec![
        Norm::Lebesgue { q: 1.0 },
        Norm::l2(),
        Norm::Lebesgue { q: 4.0 },
        Norm::Lebesgue { q: f64::INFINITY },
        Norm::Weighted { p: 2.0, r: 1.0 },
        Norm::Sobolev { s: 1.0, p: 2.0, r: 0.0 },
        Norm::Sobolev { s: 0.5, p: 2.0, r: 1.0 },
    ]
}

fn gaussian_weight(g: TFGrid) -> TFField {
    TFField::from_fn(g, |x, w| Complex64::new((-std::f64::consts::PI * (x * x + w * w) / 2.0).exp(), 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fft_round_trip(seed in any::<u64>(), log_n in 6u32..=12) {
        let g = Grid1D::new(16.0, 1 << log_n).unwrap();
        let f = rng::random_signal(g, &mut rng::stream(seed), 3, 3.0, 1.5).unwrap();
        let back = f.fourier().inverse_fourier();
        prop_assert!(back.sub(&f).unwrap().norm(2.0) <= 1e-10 * f.norm(2.0));
    }

    #[test]
    fn translation_and_modulation_are_isometries(seed in any::<u64>(), k in -64i32..64, m in -64i32..64) {
        let f = random(seed);
        let t = f.translate(f64::from(k) * f.grid().spacing()).unwrap();
        let e = f.modulate(f64::from(m) * f.grid().dual_spacing()).unwrap();
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            prop_assert_eq!(t.norm(p), f.norm(p));
            assert_relative_eq!(e.norm(p), f.norm(p), max_relative = 1e-14);
        }
    }

    #[test]
    fn norms_are_subadditive_and_homogeneous(a in any::<u64>(), b in any::<u64>(), c in unimodular(), r in 0.1f64..10.0) {
        let (f, g) = (random(a), random(b));
        for n in norms() {
            let sum = n.eval(&f.add(&g).unwrap());
            prop_assert!(sum <= (n.eval(&f) + n.eval(&g)) * (1.0 + 1e-10), "{}", n.label());
            assert_relative_eq!(n.eval(&f.scale(c * r)), r * n.eval(&f), max_relative = 1e-10);
        }
    }

    #[test]
    fn phase_distance_is_symmetric_and_phase_invariant(a in any::<u64>(), b in any::<u64>(), mu in unimodular()) {
        let (f, g) = (random(a), random(b));
        for n in [Norm::l2(), Norm::Lebesgue { q: 4.0 }, Norm::Weighted { p: 2.0, r: 1.0 }] {
            let fg = phase_inf_distance(&f, &g, &n, None).unwrap();
            let gf = phase_inf_distance(&g, &f, &n, None).unwrap();
            let rotated = phase_inf_distance(&f.scale(mu), &g, &n, None).unwrap();
            let tol = 1e-8 * (1.0 + fg.distance);
            prop_assert!((fg.distance - gf.distance).abs() <= tol, "{}", n.label());
            prop_assert!((fg.distance - rotated.distance).abs() <= tol, "{}", n.label());
            if n == Norm::l2() {
                prop_assert!((rotated.lambda - fg.lambda * mu.conj()).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn stft_is_an_isometry(seed in any::<u64>()) {
        let f = random(seed);
        let phi = WindowSpec::Gaussian.signal(*f.grid()).unwrap();
        let v = stft(&f, &phi, &TFGrid::full(f.grid())).unwrap();
        assert_relative_eq!(v.norm(2.0), f.norm(2.0) * phi.norm(2.0), max_relative = 1e-4);
    }

    #[test]
    fn modulus_does_not_raise_first_order_sobolev_norm(seed in any::<u64>()) {
        let f = random(seed);
        let ratio = modulus_sobolev_ratio(&f, &Norm::Sobolev { s: 1.0, p: 2.0, r: 0.0 }).unwrap();
        prop_assert!(ratio <= 1.0 + 1e-2, "ratio {ratio}");
    }

    #[test]
    fn low_pass_projections_nest(seed in any::<u64>(), j in -2i32..2) {
        let f = random(seed);
        let inner = littlewood_paley(&f, j, LpMode::Below).unwrap();
        let nested = littlewood_paley(&inner, j + 2, LpMode::Below).unwrap();
        prop_assert!(nested.sub(&inner).unwrap().norm(f64::INFINITY) <= 1e-13 * (1.0 + f.norm(f64::INFINITY)));
        let high = littlewood_paley(&f, j, LpMode::AtOrAbove).unwrap();
        prop_assert!(inner.add(&high).unwrap().sub(&f).unwrap().norm(f64::INFINITY) <= 1e-15 * f.norm(f64::INFINITY));
    }

    #[test]
    fn connectivity_is_at_most_one_half(t1 in 0.0f64..6.3, t2 in 0.0f64..6.3, o1 in -2.0f64..1.0, o2 in -2.0f64..1.0) {
        let g = TFGrid::square(8.0, 64).unwrap();
        let w = gaussian_weight(g);
        let a = DomainMask::half_plane(g, t1, o1);
        let b = DomainMask::half_plane(g, t2, o2);
        if let Ok(lambda) = connectivity(&w, &a, &b) {
            prop_assert!((0.0..=0.5).contains(&lambda), "lambda {lambda}");
        }
        prop_assert_eq!(connectivity(&w, &a, &a).unwrap(), 0.5);
    }

    #[test]
    fn gluing_bound_is_monotone(ca in 0.0f64..10.0, cb in 0.0f64..10.0, lambda in 0.01f64..0.5, dc in 0.0f64..1.0) {
        let base = gluing_bound(ca, cb, lambda).unwrap();
        prop_assert!(gluing_bound(ca + dc, cb, lambda).unwrap() >= base);
        prop_assert!(gluing_bound(ca, cb + dc, lambda).unwrap() >= base);
        prop_assert!(gluing_bound(ca, cb, (lambda + dc).min(0.5)).unwrap() <= base);
    }

    #[test]
    fn io_round_trip_is_exact(seed in any::<u64>()) {
        let f = random(seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        io::write_file(&path, &Container::Signal(f.clone())).unwrap();
        match io::read_file(&path).unwrap() {
            Container::Signal(back) => prop_assert_eq!(back.values(), f.values()),
            _ => prop_assert!(false, "wrong container kind"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cheeger_witness_respects_half_mass_and_families_only_lower(cx in -1.0f64..1.0, cw in -1.0f64..1.0, s in 0.5f64..2.0) {
        let g = TFGrid::square(8.0, 64).unwrap();
        let w = TFField::from_fn(g, |x, y| {
            let (dx, dy) = (x - cx, y - cw);
            Complex64::new((-std::f64::consts::PI * (dx * dx / s + s * dy * dy) / 2.0).exp(), 0.0)
        })
        .unwrap();
        let all = cheeger_estimate(&w, &CheegerFamily::ALL).unwrap();
        let level = cheeger_estimate(&w, &[CheegerFamily::Level]).unwrap();
        prop_assert!(all.value <= level.value);
        prop_assert!(all.best.mass <= 0.5 * all.total_mass * (1.0 + 1e-6));
        prop_assert!(all.value > 0.0 && all.value.is_finite());
    }
}
