use gpz_core::dynamics::{nonlinear_rotation, step_with, Method};
use gpz_core::energy::EnergyDensity;
use gpz_core::norms::{l2_norm, sobolev_norm};
use gpz_core::spectral::divergence;
use gpz_core::{
    energy, gradient, laplacian, make_grid, norms, random_zhidkov, Annuli, Complex64, ComplexField,
    Grid,
};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (
        1usize..=2,
        prop::sample::select(vec![8usize, 16, 32]),
        1.0f64..40.0,
    )
        .prop_map(|(d, n, l)| make_grid(d, n, l).unwrap())
}

fn field_strategy() -> impl Strategy<Value = ComplexField> {
    grid_strategy().prop_flat_map(|g| {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), g.len()).prop_map(move |v| {
            ComplexField::new(
                &g,
                v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
            )
            .unwrap()
        })
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(u in field_strategy()) {
        prop_assert!(close(sobolev_norm(&u, 0.0).unwrap(), l2_norm(&u), 1e-12));
    }

    #[test]
    fn laplacian_is_divergence_of_gradient(u in field_strategy()) {
        let lap = laplacian(&u).unwrap();
        let div = divergence(&gradient(&u).unwrap()).unwrap();
        // Agree up to the Nyquist modes, where i·k is not skew.
        let filtered = |f: &ComplexField| {
            let g = f.grid().clone();
            let n = g.points_per_axis() as i64;
            f.apply_multiplier(|p| {
                let nyquist = (0..g.dim()).any(|a| {
                    let idx = g.unravel(p)[a] as i64;
                    idx == n / 2
                });
                if nyquist { Complex64::default() } else { Complex64::new(1.0, 0.0) }
            })
        };
        prop_assert!(filtered(&lap).max_abs_diff(&filtered(&div)).unwrap() <= 1e-9 * (1.0 + lap.max_abs()));
    }

    #[test]
    fn norms_are_homogeneous(u in field_strategy(), alpha in -3.0f64..3.0) {
        let a = norms(&u, 3).unwrap();
        let b = norms(&u.scale(Complex64::new(alpha, 0.0)), 3).unwrap();
        let s = alpha.abs();
        prop_assert!(close(b.linf, s * a.linf, 1e-12));
        prop_assert!(close(b.l2, s * a.l2, 1e-12));
        prop_assert!(close(b.grad_l2, s * a.grad_l2, 1e-12));
        prop_assert!(close(b.lap_l2, s * a.lap_l2, 1e-12));
        prop_assert!(close(b.fourier_l1, s * a.fourier_l1, 1e-12));
        for (k, v) in &a.zhidkov {
            prop_assert!(close(b.zhidkov[k], s * v, 1e-12));
        }
    }

    #[test]
    fn zhidkov_triangle(u in field_strategy(), seed in 0u64..1000) {
        let v = u.map(|z| Complex64::new(z.im, (seed as f64).sin() * z.re));
        let sum = &u + &v;
        let (nu, nv, ns) = (norms(&u, 3).unwrap(), norms(&v, 3).unwrap(), norms(&sum, 3).unwrap());
        for k in 1..=3 {
            prop_assert!(ns.zhidkov[&k] <= nu.zhidkov[&k] + nv.zhidkov[&k] + 1e-10);
        }
        prop_assert!(ns.l2 <= nu.l2 + nv.l2 + 1e-10);
        prop_assert!(ns.fourier_l1 <= nu.fourier_l1 + nv.fourier_l1 + 1e-10);
    }

    #[test]
    fn energy_is_nonnegative_and_tiles(u in field_strategy()) {
        let r = energy(&u).unwrap();
        prop_assert!(r.kinetic >= 0.0 && r.potential >= 0.0);
        prop_assert!(close(r.total, r.kinetic + r.potential, 1e-14));
        let k: f64 = r.annular_kinetic.iter().sum::<f64>() + r.exterior_kinetic;
        let p: f64 = r.annular_potential.iter().sum::<f64>() + r.exterior_potential;
        prop_assert!(close(k, r.kinetic, 1e-12));
        prop_assert!(close(p, r.potential, 1e-12));
        let d = EnergyDensity::of(&u).unwrap();
        prop_assert!(d.kinetic.iter().chain(&d.potential).all(|&x| x >= 0.0));
    }

    #[test]
    fn annuli_partition_the_lattice(g in grid_strategy()) {
        let a = Annuli::new(&g);
        let total: usize = (0..a.count()).map(|j| a.nodes(j).count()).sum::<usize>()
            + (0..g.len()).filter(|&p| a.annulus_of(p).is_none()).count();
        prop_assert_eq!(total, g.len());
    }

    #[test]
    fn rotation_preserves_modulus(u in field_strategy(), tau in -1.0f64..1.0) {
        let mut v = u.values().to_vec();
        nonlinear_rotation(&mut v, tau);
        for (a, b) in u.values().iter().zip(&v) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-14 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn strang_step_is_reversible(seed in 0u64..500, amp in 0.0f64..0.5, dt in 1e-3f64..5e-2) {
        let g = make_grid(2, 32, 16.0).unwrap();
        let u = random_zhidkov(seed, amp, 4, &g).unwrap();
        // The 2/3 filter discards modes, so exact reversal needs it off.
        let step = |v: &ComplexField, h: f64| step_with(v, h, Method::StrangSplit, false).unwrap();
        let back = step(&step(&u, dt), -dt);
        prop_assert!(back.max_abs_diff(&u).unwrap() < 1e-12);
    }

    #[test]
    fn random_fields_respect_amplitude(seed in 0u64..10_000, amp in 0.0f64..0.5, cutoff in 1usize..6) {
        let g = make_grid(2, 32, 20.0).unwrap();
        let u = random_zhidkov(seed, amp, cutoff, &g).unwrap();
        let sup = u.values().iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max);
        prop_assert!(sup <= amp + 1e-12);
    }
}
