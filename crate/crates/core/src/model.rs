//! Physical parameters of the lattice.
//!
//! Every frequency is stored as ν = ω/2π in MHz with ħ = 1, so energies,
//! gaps and chemical potentials all come out in MHz as well. The qubit
//! splitting is derived from the resonator frequency and the detuning,
//! `omega_z = omega_c - delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition of the ring. Only periodic rings are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Configuration of a multi-connected Jaynes-Cummings ring.
///
/// Qubit `i` couples to resonator `i` with `g_r` and to resonator
/// `(i - 1) mod M` with `g_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    /// Number of qubit-resonator units M.
    pub sites: usize,
    /// Resonator frequency in MHz.
    pub omega_c: f64,
    /// Detuning Δ = ω_c − ω_z in MHz.
    pub delta: f64,
    /// Coupling of qubit i to resonator i−1, in MHz.
    pub g_l: f64,
    /// Coupling of qubit i to resonator i, in MHz.
    pub g_r: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            sites: 8,
            omega_c: 10_000.0,
            delta: 0.0,
            g_l: 150.0,
            g_r: 150.0,
            boundary: Boundary::Periodic,
        }
    }
}

impl LatticeParams {
    pub fn new(sites: usize, omega_c: f64, delta: f64, g_l: f64, g_r: f64) -> Self {
        Self {
            sites,
            omega_c,
            delta,
            g_l,
            g_r,
            boundary: Boundary::Periodic,
        }
    }

    /// Qubit splitting ω_z = ω_c − Δ.
    pub fn omega_z(&self) -> f64 {
        self.omega_c - self.delta
    }

    pub fn with_sites(mut self, sites: usize) -> Self {
        self.sites = sites;
        self
    }

    pub fn with_couplings(mut self, g_l: f64, g_r: f64) -> Self {
        self.g_l = g_l;
        self.g_r = g_r;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_omega_c(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    /// Exchange `g_l` and `g_r`.
    pub fn swap_couplings(self) -> Self {
        Self {
            g_l: self.g_r,
            g_r: self.g_l,
            ..self
        }
    }

    /// Rings with fewer than three sites couple a qubit twice to the same
    /// resonator (M = 1) or to both resonators of the ring (M = 2).
    pub fn is_self_coupling_degenerate(&self) -> bool {
        self.sites <= 2
    }

    /// Check every invariant, returning the parameters unchanged on success.
    pub fn validate(self) -> Result<Self> {
        let fail = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.sites == 0 {
            return fail("M must be ≥ 1");
        }
        for (name, value) in [
            ("omega_c", self.omega_c),
            ("delta", self.delta),
            ("g_l", self.g_l),
            ("g_r", self.g_r),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.omega_c <= 0.0 {
            return fail("omega_c must be > 0");
        }
        if self.g_l < 0.0 {
            return fail("g_l must be ≥ 0");
        }
        if self.g_r < 0.0 {
            return fail("g_r must be ≥ 0");
        }
        if self.omega_z() <= 0.0 {
            return fail("ω_z ≤ 0 (detuning exceeds the resonator frequency)");
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typical_window_is_valid() {
        let p = LatticeParams::new(8, 10_000.0, 0.0, 150.0, 150.0);
        assert_eq!(p.validate(), Ok(p));
    }

    #[test]
    fn empty_lattice_rejected() {
        let err = LatticeParams::new(0, 10_000.0, 0.0, 150.0, 150.0)
            .validate()
            .unwrap_err();
        assert!(err.to_string().contains("M must be ≥ 1"));
    }

    #[test]
    fn nonpositive_qubit_splitting_rejected() {
        let err = LatticeParams::new(4, 10_000.0, 11_000.0, 150.0, 150.0)
            .validate()
            .unwrap_err();
        assert!(err.to_string().contains("ω_z ≤ 0"));
    }

    #[test]
    fn negative_coupling_rejected() {
        let p = LatticeParams::new(4, 10_000.0, 0.0, -1.0, 150.0);
        assert!(p.validate().unwrap_err().to_string().contains("g_l"));
        let p = LatticeParams::new(4, 10_000.0, 0.0, 1.0, -150.0);
        assert!(p.validate().unwrap_err().to_string().contains("g_r"));
    }

    #[test]
    fn validate_is_idempotent_and_swap_is_involution() {
        let p = LatticeParams::new(5, 9_000.0, -250.0, 25.0, 275.0);
        let once = p.validate().unwrap();
        assert_eq!(once.validate().unwrap(), once);
        assert_eq!(p.swap_couplings().swap_couplings(), p);
        assert_eq!(p.swap_couplings().g_l, 275.0);
    }
}
