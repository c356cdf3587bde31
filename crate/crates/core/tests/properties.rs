use approx::assert_relative_eq;
use mqr_core::oracle::{self, GridSpec};
use mqr_core::quantize::{self, Branch};
use mqr_core::{heun, model, PhysicalParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = PhysicalParams> {
    (-1.0f64..1.0, -1.0f64..1.0, -10.0f64..10.0)
        .prop_map(|(lm, lt, rot)| PhysicalParams::rotating(10f64.powf(lm), rot, 10f64.powf(lt)).unwrap())
}

proptest! {
    #[test]
    fn closed_forms_match_generic_levels(p in params(), l in -4i32..=4) {
        for (n, cf) in [(1, quantize::closed_form_n1(&p, l).unwrap()), (2, quantize::closed_form_n2(&p, l).unwrap())] {
            let modes = quantize::solve_level(&p, n, l).unwrap();
            prop_assert_eq!(modes.len(), 2);
            for (got, want) in modes.iter().zip([cf.plus, cf.minus]) {
                prop_assert_eq!(got.branch, want.branch);
                prop_assert!((got.xi_star - want.xi_star).abs() <= 1e-13 * want.xi_star.abs());
                prop_assert!((got.omega - want.omega).abs() <= 1e-12 * want.omega.abs());
                let scale = want.energy.abs() + (p.rotation * f64::from(l)).abs() + got.delta / p.mass * 10.0;
                prop_assert!((got.energy - want.energy).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn branches_bracket_the_forbidden_band(p in params(), n in 1u32..=6, l in -4i32..=4) {
        for m in quantize::solve_level(&p, n, l).unwrap() {
            match m.branch {
                Branch::Plus => prop_assert!(m.omega > 0.0f64.max(-4.0 * p.rotation)),
                Branch::Minus => prop_assert!(m.omega < 0.0f64.min(-4.0 * p.rotation)),
            }
        }
    }

    #[test]
    fn delta_round_trips_through_frequency(p in params(), n in 1u32..=6, l in -4i32..=4) {
        for m in quantize::solve_level(&p, n, l).unwrap() {
            let back = model::delta_from_omega(&p, m.omega).unwrap();
            let kappa = (m.omega * (m.omega + 2.0 * p.rotation)).abs() * p.mass * p.mass / (4.0 * m.delta * m.delta);
            prop_assert!((back - m.delta).abs() <= m.delta * 1e-14 * (1.0 + kappa));
            let xi = model::xi_coupling(&p, m.delta).unwrap();
            prop_assert!((xi - m.xi_star).abs() <= 1e-13 * xi.abs());
        }
    }
}

#[test]
fn rotation_limit_is_regular() {
    let at_zero = PhysicalParams::rotating(1.3, 0.0, 0.8).unwrap();
    for n in 1..=5 {
        for l in -3..=3 {
            let a = quantize::solve_level(&at_zero, n, l).unwrap();
            for eps in [1e-6, 1e-8, 1e-10, -1e-8] {
                let b = quantize::solve_level(&at_zero.with_rotation(eps), n, l).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert_relative_eq!(x.omega, y.omega, max_relative = 1e3 * eps.abs() + 1e-15);
                    assert_relative_eq!(x.energy, y.energy, max_relative = 1e3 * eps.abs() + 1e-15);
                }
            }
        }
    }
}

#[test]
fn landau_limit_matches_oscillator_ladder() {
    // with theta = 0 the scaled spectrum is 4 n_r + 2|l| + 2
    let p = PhysicalParams::rotating(1.0, 0.25, 0.0).unwrap();
    let omega = 1.5;
    let varpi = model::delta_from_omega(&p, omega).unwrap();
    for n_r in 0..4 {
        for l in -2..=2i32 {
            let e = quantize::landau_limit(&p, n_r, l, omega).unwrap();
            let lambda = (2.0 * e + 2.0 * 0.25 * f64::from(l) + omega * f64::from(l)) / varpi;
            assert_relative_eq!(
                lambda,
                oracle::oscillator_exact(l.unsigned_abs(), n_r as usize),
                max_relative = 1e-14
            );
        }
    }
}

#[test]
fn domain_truncation_brackets_the_eigenvalue() {
    // Dirichlet walls only raise eigenvalues; a wider box at the same spacing
    // must land between the narrow box and the exact value
    let p = PhysicalParams::rotating(1.0, 1.0, 1.0).unwrap();
    let mode = quantize::solve_level(&p, 2, 1).unwrap()[0];
    let xi = mode.xi_star;
    let narrow = GridSpec::new(6.0, 1200).unwrap();
    let wide = GridSpec::new(12.0, 2400).unwrap();
    let ev = |g: &GridSpec| oracle::lowest_eigenvalues(&oracle::build_operator(1, xi, g).unwrap(), 1).unwrap()[0];
    let (a, b) = (ev(&narrow), ev(&wide));
    assert!(b <= a + 1e-12, "{b} > {a}");
    let exact_on_grid = ev(&GridSpec::new(24.0, 4800).unwrap());
    assert!((b - exact_on_grid).abs() < 1e-9);
    assert!((b - mode.scaled_eigenvalue()).abs() < 1e-3);
}

#[test]
fn wavefunction_nodes_follow_root_order() {
    // the k-th root from the top carries k nodes
    for (n, l_abs) in [(3u32, 0u32), (4, 1), (5, 2), (6, 0)] {
        let roots = quantize::solve_xi(n, l_abs).unwrap();
        let lambda = heun::terminating_eigenvalue(n, l_abs);
        for (i, xi) in roots.iter().rev().enumerate() {
            let s = heun::coefficients(l_abs, *xi, lambda, n as usize);
            let samples = heun::RadialSamples::uniform(&s, n as usize, 20.0, 20001).unwrap();
            assert_eq!(heun::node_count(&samples), i, "n={n} l={l_abs} xi={xi}");
        }
    }
}
