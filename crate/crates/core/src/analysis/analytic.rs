//! Closed forms for an isolated Jaynes-Cummings cell (g_l = 0).
//!
//! The n-excitation doublet lives in {|n−1,↑⟩, |n,↓⟩} with energies
//! ε_{n,±} = (n − ½)ω_c ± Ω_n/2, Ω_n = √(Δ² + 4g²n). Treating the lower
//! polaritons as bosons with an onsite interaction gives the effective
//! Hubbard U used to interpret the charge gap.

use serde::{Deserialize, Serialize};

/// Ω_n(Δ) = √(Δ² + 4g²n).
pub fn rabi_splitting(n: usize, delta: f64, g: f64) -> f64 {
    (delta * delta + 4.0 * g * g * n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcDoublet {
    pub lower: f64,
    pub upper: f64,
}

/// Doublet energies ε_{n,∓}. For n = 0 both entries hold the vacuum
/// energy −ω_z/2.
pub fn jc_spectrum(n: usize, delta: f64, g: f64, omega_c: f64) -> JcDoublet {
    if n == 0 {
        let vacuum = -(omega_c - delta) / 2.0;
        return JcDoublet {
            lower: vacuum,
            upper: vacuum,
        };
    }
    let centre = (n as f64 - 0.5) * omega_c;
    let half = rabi_splitting(n, delta, g) / 2.0;
    JcDoublet {
        lower: centre - half,
        upper: centre + half,
    }
}

/// Energy to put n excitations into the lower polariton,
/// Δε_n = nω_c − Δ/2 − Ω_n/2 (zero for n = 0).
pub fn delta_eps(n: usize, delta: f64, g: f64, omega_c: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * omega_c - delta / 2.0 - rabi_splitting(n, delta, g) / 2.0
}

/// Effective onsite interaction between fillings n and n + 1,
/// U = [Δ − Ω_{n+1} + Ω_n + Ω_1] / 2n.
///
/// # Panics
/// If `n == 0`.
pub fn effective_u(n: usize, delta: f64, g: f64) -> f64 {
    assert!(n >= 1, "effective U needs n ≥ 1");
    (delta - rabi_splitting(n + 1, delta, g) + rabi_splitting(n, delta, g) + rabi_splitting(1, delta, g))
        / (2.0 * n as f64)
}

/// U for the lowest pair of polaritons,
/// Δ/2 + √(Δ² + 4g²) − ½√(Δ² + 8g²).
pub fn effective_u_pair(delta: f64, g: f64) -> f64 {
    delta / 2.0 + (delta * delta + 4.0 * g * g).sqrt() - 0.5 * (delta * delta + 8.0 * g * g).sqrt()
}

/// Lower polariton |n,−⟩ = qubit·|n−1,↑⟩ + photon·|n,↓⟩, with the photon
/// amplitude chosen non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedState {
    pub qubit: f64,
    pub photon: f64,
}

pub fn dressed_lower(n: usize, delta: f64, g: f64) -> DressedState {
    assert!(n >= 1, "dressed states need n ≥ 1");
    let b = g * (n as f64).sqrt();
    let omega = rabi_splitting(n, delta, g);
    // eigenvector (−b, (Ω − Δ)/2), with Ω − Δ rewritten for Δ > 0
    let x = if delta > 0.0 {
        2.0 * b * b / (omega + delta)
    } else {
        (omega - delta) / 2.0
    };
    let norm = (b * b + x * x).sqrt();
    if norm == 0.0 {
        // g = 0 and Δ ≥ 0: the qubit-like state is lowest
        return DressedState {
            qubit: if delta > 0.0 { 1.0 } else { 0.0 },
            photon: if delta > 0.0 { 0.0 } else { 1.0 },
        };
    }
    DressedState {
        qubit: -b / norm,
        photon: x / norm,
    }
}

/// ⟨0,↓|⟨2,−| σ_i⁺ a_{i−1} |1,−⟩|1,−⟩ for neighbouring isolated cells.
pub fn hopping_element(delta: f64, g_r: f64) -> f64 {
    let one = dressed_lower(1, delta, g_r);
    let two = dressed_lower(2, delta, g_r);
    // a_{i−1} keeps the photon part of |1,−⟩; σ_i⁺ maps |1,↓⟩ onto |1,↑⟩
    one.photon * one.photon * two.qubit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_doublet() {
        let d = jc_spectrum(1, 0.0, 150.0, 10_000.0);
        assert_eq!(d.lower, 5_000.0 - 150.0);
        assert_eq!(d.upper, 5_000.0 + 150.0);
        let flat = jc_spectrum(1, 0.0, 0.0, 10_000.0);
        assert_eq!(flat.lower, flat.upper);
        assert_eq!(jc_spectrum(0, 300.0, 50.0, 10_000.0).lower, -(10_000.0 - 300.0) / 2.0);
    }

    #[test]
    fn single_excitation_cost() {
        assert_eq!(delta_eps(1, 0.0, 150.0, 10_000.0), 9_850.0);
        let d = jc_spectrum(2, -40.0, 90.0, 10_000.0);
        let vac = jc_spectrum(0, -40.0, 90.0, 10_000.0);
        assert!((delta_eps(2, -40.0, 90.0, 10_000.0) - (d.lower - vac.lower)).abs() < 1e-9);
    }

    #[test]
    fn resonant_u_and_pair_form_agree() {
        let g = 295.0;
        let expected = (2.0 - 2f64.sqrt()) * g;
        assert!((effective_u(1, 0.0, g) - expected).abs() < 1e-12);
        assert!((effective_u_pair(0.0, g) - expected).abs() < 1e-12);
        assert!((expected - 172.807).abs() < 1e-3);
        for delta in [-900.0, -10.0, 0.0, 35.0, 700.0] {
            assert!((effective_u(1, delta, 120.0) - effective_u_pair(delta, 120.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn u_from_level_differences() {
        // U = (Δε_{n+1} − Δε_n − Δε_1)/n
        for n in 1..5 {
            let (d, g, wc) = (60.0, 140.0, 10_000.0);
            let direct = (delta_eps(n + 1, d, g, wc) - delta_eps(n, d, g, wc) - delta_eps(1, d, g, wc)) / n as f64;
            assert!((direct - effective_u(n, d, g)).abs() < 1e-9);
        }
    }

    #[test]
    fn detuning_limits() {
        assert!(effective_u(1, -1e6, 150.0).abs() < 0.1);
        assert!((effective_u(1, 1e6, 150.0) - 1e6).abs() < 0.1);
    }

    #[test]
    fn u_decreases_with_filling() {
        let u: Vec<f64> = (1..=3).map(|n| effective_u(n, 0.0, 200.0)).collect();
        assert!(u[0] > u[1] && u[1] > u[2]);
    }

    #[test]
    fn resonant_hopping_element() {
        assert!((hopping_element(0.0, 150.0) + 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(hopping_element(1e6, 150.0).abs() < 1e-6);
    }

    #[test]
    fn dressed_states_are_normalized_eigenvectors() {
        for (n, d, g) in [(1, 0.0, 100.0), (2, 500.0, 80.0), (3, -700.0, 30.0)] {
            let s = dressed_lower(n, d, g);
            assert!((s.qubit.powi(2) + s.photon.powi(2) - 1.0).abs() < 1e-14);
            let wc = 10_000.0;
            let wz = wc - d;
            // H in {|n−1,↑⟩, |n,↓⟩}
            let a = (n as f64 - 1.0) * wc + wz / 2.0;
            let dd = n as f64 * wc - wz / 2.0;
            let b = g * (n as f64).sqrt();
            let e = jc_spectrum(n, d, g, wc).lower;
            assert!((a * s.qubit + b * s.photon - e * s.qubit).abs() < 1e-8);
            assert!((b * s.qubit + dd * s.photon - e * s.photon).abs() < 1e-8);
        }
    }
}
