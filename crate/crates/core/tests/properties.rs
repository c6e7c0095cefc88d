//! Randomized invariants over small rings.

use polariton_core::analysis::gce::{density_curve, GceConfig};
use polariton_core::observables::{gaps, rho1_matrix, rho1_profile, total_excitation};
use polariton_core::{build_hamiltonian, lowest_eigenpairs, EigenConfig, LatticeParams, SectorBasis, Session};
use proptest::prelude::*;

fn params(max_sites: usize) -> impl Strategy<Value = LatticeParams> {
    (2..=max_sites, -300.0..300.0f64, 0.0..300.0f64, 0.0..300.0f64)
        .prop_map(|(m, delta, g_l, g_r)| LatticeParams::new(m, 10_000.0, delta, g_l, g_r))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn swap_symmetry_of_observables(p in params(4)) {
        let s = Session::new(EigenConfig::default().with_k(2));
        let a = gaps(&s, &p, p.sites).unwrap();
        let b = gaps(&s, &p.swap_couplings(), p.sites).unwrap();
        prop_assert!((a.charge_gap - b.charge_gap).abs() < 1e-9);
        prop_assert!((a.excitation_gap.unwrap() - b.excitation_gap.unwrap()).abs() < 1e-9);
        let (ba, sa) = s.solve(&p, p.sites).unwrap();
        let (bb, sb) = s.solve(&p.swap_couplings(), p.sites).unwrap();
        if !sa.degenerate && !sb.degenerate {
            let ra = rho1_profile(&sa, &ba).unwrap();
            let rb = rho1_profile(&sb, &bb).unwrap();
            prop_assert!(max_abs_diff(&ra.values, &rb.values) < 1e-9);
        }
    }

    #[test]
    fn sector_solve_conserves_excitations(p in params(4), extra in 0usize..3) {
        let n = p.sites + extra;
        let (basis, state) = Session::default().solve(&p, n).unwrap();
        let total = total_excitation(state.vector(), &basis).unwrap();
        prop_assert!((total - n as f64).abs() < 1e-9);
        let norm: f64 = state.vector().iter().map(|x| x * x).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(state.max_residual() <= 1e-10);
    }

    #[test]
    fn omega_c_shift_with_fixed_detuning(p in params(3), s in -800.0..800.0f64, n in 1usize..5) {
        let basis = SectorBasis::new(p.sites, n).unwrap();
        let cfg = EigenConfig::default().with_k(basis.dim());
        let shifted = p.with_omega_c(p.omega_c + s);
        let a = lowest_eigenpairs(&build_hamiltonian(&p, &basis).unwrap(), &cfg).unwrap();
        let b = lowest_eigenpairs(&build_hamiltonian(&shifted, &basis).unwrap(), &cfg).unwrap();
        // both qubit and resonator move by s, so the vacuum moves by −M s/2
        let offset = n as f64 * s - p.sites as f64 * s / 2.0;
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((y - x - offset).abs() <= 1e-9 * y.abs(), "{x} {y} {offset}");
        }
    }

    #[test]
    fn charge_gap_ignores_omega_c(p in params(3)) {
        let s = Session::default();
        let a = gaps(&s, &p, p.sites).unwrap();
        let b = gaps(&s, &p.with_omega_c(p.omega_c + 500.0), p.sites).unwrap();
        prop_assert!((a.charge_gap - b.charge_gap).abs() <= 1e-9 * a.charge_gap.abs().max(1.0));
        prop_assert!(((b.en_minus - a.en_minus) - 500.0).abs() < 1e-8);
        prop_assert!(((b.en_plus - a.en_plus) - 500.0).abs() < 1e-8);
    }

    #[test]
    fn rho1_matrix_is_symmetric_and_bounded(p in params(4)) {
        let (basis, state) = Session::default().solve(&p, p.sites).unwrap();
        let rho = rho1_matrix(&state, &basis).unwrap();
        for i in 0..p.sites {
            for j in 0..p.sites {
                prop_assert!((rho[i][j] - rho[j][i]).abs() < 1e-9);
            }
        }
        if !state.degenerate {
            prop_assert!(rho.iter().flatten().all(|v| v.abs() <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn gce_filling_never_decreases(p in params(3)) {
        let mus: Vec<f64> = (0..120).map(|i| p.omega_c - 600.0 + 10.0 * i as f64).collect();
        let curve = density_curve(&Session::default(), &p, &GceConfig::new(mus)).unwrap();
        prop_assert!(curve.rows.windows(2).all(|w| w[1].excitations >= w[0].excitations));
    }

    #[test]
    fn rayleigh_quotient_bounds_ground_energy(p in params(3), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let basis = SectorBasis::new(p.sites, p.sites).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let e0 = lowest_eigenpairs(&h, &EigenConfig::default()).unwrap().energy();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let v: Vec<f64> = (0..basis.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hv = h.apply(&v).unwrap();
            let q = v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|a| a * a).sum::<f64>();
            prop_assert!(q >= e0 - 1e-9 * e0.abs());
        }
    }
}
