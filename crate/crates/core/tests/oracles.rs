//! Independent oracles built from explicit small Hilbert spaces.

use nalgebra::{DMatrix, SymmetricEigen};
use polariton_core::analysis::analytic::{delta_eps, effective_u, hopping_element};
use polariton_core::observables::{gaps, rho1_profile};
use polariton_core::{build_hamiltonian, lowest_eigenpairs, EigenConfig, LatticeParams, SectorBasis, Session};

const CAP: usize = 4;
const CELL: usize = 2 * CAP;

/// Cell index of |n, q⟩ with q = 1 for an excited qubit.
fn idx(n: usize, q: usize) -> usize {
    2 * n + q
}

fn annihilate() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(CELL, CELL);
    for n in 1..CAP {
        for q in 0..2 {
            a[(idx(n - 1, q), idx(n, q))] = (n as f64).sqrt();
        }
    }
    a
}

fn raise() -> DMatrix<f64> {
    let mut s = DMatrix::zeros(CELL, CELL);
    for n in 0..CAP {
        s[(idx(n, 1), idx(n, 0))] = 1.0;
    }
    s
}

fn cell_hamiltonian(omega_c: f64, delta: f64, g: f64) -> DMatrix<f64> {
    let omega_z = omega_c - delta;
    let a = annihilate();
    let sp = raise();
    let mut h = DMatrix::zeros(CELL, CELL);
    for n in 0..CAP {
        h[(idx(n, 0), idx(n, 0))] = n as f64 * omega_c - omega_z / 2.0;
        h[(idx(n, 1), idx(n, 1))] = n as f64 * omega_c + omega_z / 2.0;
    }
    let x = &sp * &a * g;
    h + &x + x.transpose()
}

/// Lowest eigenvector of the cell Hamiltonian inside the n-excitation manifold,
/// signed so that the |n, ↓⟩ amplitude is non-negative.
fn lower_polariton(omega_c: f64, delta: f64, g: f64, n: usize) -> DVector {
    let eig = SymmetricEigen::new(cell_hamiltonian(omega_c, delta, g));
    let mut best: Option<(f64, DVector)> = None;
    for (c, &e) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(c).into_owned();
        let weight = v[idx(n, 0)].powi(2) + if n > 0 { v[idx(n - 1, 1)].powi(2) } else { 0.0 };
        if weight > 0.5 && best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, v));
        }
    }
    let mut v = best.expect("manifold present").1;
    if v[idx(n, 0)] < 0.0 {
        v.neg_mut();
    }
    v
}

type DVector = nalgebra::DVector<f64>;

fn product(a: &DVector, b: &DVector) -> DVector {
    a.kronecker(b)
}

#[test]
fn hopping_element_matches_two_cell_fock_space() {
    let eye = DMatrix::<f64>::identity(CELL, CELL);
    // first factor is cell i − 1, second is cell i
    let op = annihilate().kronecker(&eye) * eye.kronecker(&raise());
    for (delta, g) in [(0.0, 150.0), (0.0, 7.0), (60.0, 120.0), (-80.0, 200.0), (300.0, 40.0)] {
        let one = lower_polariton(10_000.0, delta, g, 1);
        let two = lower_polariton(10_000.0, delta, g, 2);
        let mut vac = DVector::zeros(CELL);
        vac[idx(0, 0)] = 1.0;
        let bra = product(&vac, &two);
        let ket = product(&one, &one);
        let brute = bra.dot(&(&op * ket));
        let h = hopping_element(delta, g);
        assert!((brute - h).abs() < 1e-12, "Δ={delta} g={g}: {brute} vs {h}");
    }
}

/// All levels of an isolated cell with n excitations.
fn cell_levels(omega_c: f64, delta: f64, g: f64, n: usize) -> Vec<f64> {
    let omega_z = omega_c - delta;
    if n == 0 {
        return vec![-omega_z / 2.0];
    }
    let centre = n as f64 * omega_c - omega_c / 2.0;
    let half = (delta * delta / 4.0 + g * g * n as f64).sqrt();
    vec![centre - half, centre + half]
}

/// Every sum of cell levels over compositions of `n` into `m` parts.
fn decoupled_spectrum(m: usize, n: usize, omega_c: f64, delta: f64, g: f64) -> Vec<f64> {
    fn walk(m: usize, left: usize, acc: f64, out: &mut Vec<f64>, levels: &dyn Fn(usize) -> Vec<f64>) {
        if m == 0 {
            if left == 0 {
                out.push(acc);
            }
            return;
        }
        for k in 0..=left {
            for e in levels(k) {
                walk(m - 1, left - k, acc + e, out, levels);
            }
        }
    }
    let mut out = Vec::new();
    walk(m, n, 0.0, &mut out, &|k| cell_levels(omega_c, delta, g, k));
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn decoupled_sector_spectrum_is_sum_of_cells() {
    for (m, n, delta, g) in [(3, 3, 0.0, 150.0), (3, 2, -120.0, 90.0), (2, 4, 75.0, 210.0)] {
        let basis = SectorBasis::new(m, n).unwrap();
        for (g_l, g_r) in [(0.0, g), (g, 0.0)] {
            let p = LatticeParams::new(m, 10_000.0, delta, g_l, g_r);
            let h = build_hamiltonian(&p, &basis).unwrap();
            let gs = lowest_eigenpairs(&h, &EigenConfig::default().with_k(basis.dim())).unwrap();
            let oracle = decoupled_spectrum(m, n, 10_000.0, delta, g);
            assert_eq!(oracle.len(), gs.eigenvalues.len());
            for (a, b) in oracle.iter().zip(&gs.eigenvalues) {
                assert!((a - b).abs() <= 1e-9 * a.abs(), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn decoupled_tower_closed_forms() {
    let session = Session::default();
    for delta in [-200.0, 0.0, 140.0] {
        let p = LatticeParams::new(4, 10_000.0, delta, 0.0, 230.0);
        let vac = session.ground_energy(&p, 0).unwrap();
        for n in 1..=2 {
            let e = session.ground_energy(&p, 4 * n).unwrap() - vac;
            let expected = 4.0 * delta_eps(n, delta, 230.0, 10_000.0);
            assert!((e - expected).abs() <= 1e-8 * expected.abs(), "{e} vs {expected}");
        }
        let g = gaps(&session, &p, 4).unwrap();
        let u = effective_u(1, delta, 230.0);
        assert!((g.charge_gap - u).abs() <= 1e-8 * u);
        assert!((g.en_minus - delta_eps(1, delta, 230.0, 10_000.0)).abs() <= 1e-8 * g.en_minus.abs());
        let (basis, state) = session.solve(&p, 4).unwrap();
        let profile = rho1_profile(&state, &basis).unwrap();
        assert!(profile.values[1..].iter().all(|v| v.abs() < 1e-8), "{:?}", profile.values);
    }
}

#[test]
fn coupling_swap_preserves_every_level() {
    for m in [2, 3, 4] {
        let basis = SectorBasis::new(m, m).unwrap();
        let p = LatticeParams::new(m, 10_000.0, 35.0, 40.0, 260.0);
        let k = basis.dim();
        let cfg = EigenConfig::default().with_k(k);
        let a = lowest_eigenpairs(&build_hamiltonian(&p, &basis).unwrap(), &cfg).unwrap();
        let b = lowest_eigenpairs(&build_hamiltonian(&p.swap_couplings(), &basis).unwrap(), &cfg).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-9, "M={m}: {x} vs {y}");
        }
    }
}
