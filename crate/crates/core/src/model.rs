//! The physical drive: a cavity mode whose frequency is modulated at the
//! boundary frequency, with unbalanced parametric amplification
//! coefficients `alpha(t) = -i a0 zeta(t)` and `beta(t) = i b0 zeta(t)`.
//!
//! Polar phases follow the Heaviside bookkeeping used throughout the crate:
//! `h(x) = 0` for `x >= 0` and `1` otherwise, so the phase of `zeta` is
//! `pi + pi h(sin kt)`. Phases are never reduced modulo `2 pi` here.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the parametric strength `zeta(t)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ZetaMode {
    /// `zeta = omega'(t) / (4 omega(t))` with the derivative taken analytically.
    #[default]
    Exact,
    /// First-order expansion in the modulation depth: `-(eps kappa / 4) sin(kappa t)`.
    Approximate,
}

impl std::str::FromStr for ZetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(ZetaMode::Exact),
            "approximate" | "approx" => Ok(ZetaMode::Approximate),
            other => Err(Error::Validation(format!("unknown zeta mode '{other}'"))),
        }
    }
}

/// Physical inputs of the modulated cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Natural frequency of the mode.
    pub omega0: f64,
    /// Dimensionless modulation depth.
    pub eps_mod: f64,
    /// Boundary oscillation frequency.
    pub kappa: f64,
    pub alpha0_tilde: f64,
    pub beta0_tilde: f64,
    pub zeta_mode: ZetaMode,
}

impl Default for DriveParams {
    /// The operating point of the reference figures: `omega0 = 1`,
    /// `a0 = eps = 10 b0 = 1e-2`, on resonance `kappa = 2 omega0`.
    fn default() -> Self {
        DriveParams {
            omega0: 1.0,
            eps_mod: 0.01,
            kappa: 2.0,
            alpha0_tilde: 0.01,
            beta0_tilde: 1e-3,
            zeta_mode: ZetaMode::Exact,
        }
    }
}

impl DriveParams {
    pub fn new(
        omega0: f64,
        eps_mod: f64,
        kappa: f64,
        alpha0_tilde: f64,
        beta0_tilde: f64,
    ) -> Result<Self> {
        let p = DriveParams {
            omega0,
            eps_mod,
            kappa,
            alpha0_tilde,
            beta0_tilde,
            zeta_mode: ZetaMode::Exact,
        };
        p.validate()?;
        Ok(p)
    }

    /// Balanced amplification (`a0 = b0 = 1`): the Hermitian Law Hamiltonian.
    pub fn hermitian(omega0: f64, eps_mod: f64, kappa: f64) -> Self {
        DriveParams {
            omega0,
            eps_mod,
            kappa,
            alpha0_tilde: 1.0,
            beta0_tilde: 1.0,
            zeta_mode: ZetaMode::Exact,
        }
    }

    pub fn with_zeta_mode(mut self, mode: ZetaMode) -> Self {
        self.zeta_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega0,
            self.eps_mod,
            self.kappa,
            self.alpha0_tilde,
            self.beta0_tilde,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation("drive parameters must be finite".into()));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::Validation(format!("omega0 = {} must be > 0", self.omega0)));
        }
        if self.kappa <= 0.0 {
            return Err(Error::Validation(format!("kappa = {} must be > 0", self.kappa)));
        }
        if !(0.0..1.0).contains(&self.eps_mod) {
            return Err(Error::Validation(format!(
                "eps_mod = {} must satisfy 0 <= eps_mod < 1",
                self.eps_mod
            )));
        }
        for (name, v) in [
            ("alpha0_tilde", self.alpha0_tilde),
            ("beta0_tilde", self.beta0_tilde),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Whether the balanced (Hermitian) case `a0 == b0` is selected.
    pub fn is_hermitian(&self) -> bool {
        self.alpha0_tilde == self.beta0_tilde
    }

    pub fn drive_period(&self) -> f64 {
        2.0 * PI / self.kappa
    }

    /// Modulated frequency `omega0 [1 + eps cos(kappa t)]`.
    pub fn omega(&self, t: f64) -> f64 {
        self.omega0 * (1.0 + self.eps_mod * (self.kappa * t).cos())
    }

    /// Analytic time derivative of [`omega`](Self::omega).
    pub fn omega_dot(&self, t: f64) -> f64 {
        -self.omega0 * self.eps_mod * self.kappa * (self.kappa * t).sin()
    }

    /// Signed real value of the parametric strength.
    pub fn zeta_signed(&self, t: f64) -> f64 {
        match self.zeta_mode {
            ZetaMode::Exact => self.omega_dot(t) / (4.0 * self.omega(t)),
            ZetaMode::Approximate => -0.25 * self.eps_mod * self.kappa * (self.kappa * t).sin(),
        }
    }

    /// Parametric strength in the polar convention `|zeta| e^{i(pi + pi h[sin kt])}`.
    pub fn zeta(&self, t: f64) -> PolarComplex {
        let phase = PI + PI * heaviside((self.kappa * t).sin());
        PolarComplex::new(self.zeta_signed(t).abs(), phase)
    }

    /// Polar `alpha(t)` and `beta(t)` with phases `h pi + pi/2` and `h pi - pi/2`.
    pub fn alpha_beta(&self, t: f64) -> (PolarComplex, PolarComplex) {
        let z = self.zeta_signed(t).abs();
        let h = heaviside((self.kappa * t).sin());
        (
            PolarComplex::new(self.alpha0_tilde * z, h * PI + PI / 2.0),
            PolarComplex::new(self.beta0_tilde * z, h * PI - PI / 2.0),
        )
    }

    /// Cartesian `alpha(t) = -i a0 zeta(t)`.
    pub fn alpha_cartesian(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, -self.alpha0_tilde * self.zeta_signed(t))
    }

    /// Cartesian `beta(t) = i b0 zeta(t)`.
    pub fn beta_cartesian(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, self.beta0_tilde * self.zeta_signed(t))
    }

    /// All drive inputs at `t` in polar form, as consumed by the general
    /// hermitization equations.
    pub fn polar_at(&self, t: f64) -> PolarDrive {
        let (alpha, beta) = self.alpha_beta(t);
        PolarDrive {
            omega: PolarComplex::new(self.omega(t), 0.0),
            alpha,
            beta,
        }
    }
}

/// A complex number kept as modulus and unreduced phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarComplex {
    pub modulus: f64,
    pub phase: f64,
}

impl PolarComplex {
    pub fn new(modulus: f64, phase: f64) -> Self {
        debug_assert!(modulus >= 0.0, "negative modulus {modulus}");
        PolarComplex { modulus, phase }
    }

    pub fn from_complex(z: Complex64) -> Self {
        PolarComplex {
            modulus: z.norm(),
            phase: z.arg(),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.phase)
    }
}

/// General polar drive inputs `(|omega|, phi_omega, |alpha|, phi_alpha, |beta|, phi_beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDrive {
    pub omega: PolarComplex,
    pub alpha: PolarComplex,
    pub beta: PolarComplex,
}

/// `0` for `x >= 0`, `1` for `x < 0`.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        0.0
    } else {
        1.0
    }
}

/// `+1` for `x >= 0`, `-1` for `x < 0` (so `sgn(0) = +1`).
pub fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Reduce a phase into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}
