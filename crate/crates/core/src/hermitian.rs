//! Hermitian counterpart `h = eta H eta^-1 + i (d_t eta) eta^-1` of the
//! drive Hamiltonian, written as `h = 2W K0 + 2T K- + 2V K+`.
//!
//! Hermiticity of `h` (real `W`, `V = T*`) is a set of ODE constraints on the
//! Dyson coordinates `(|z|, Phi, varphi, Lambda)`. They are integrated as
//! `(Phi, varphi, Lambda)` with `chi = Phi^2 - Lambda` and
//! `|z| = -2 Phi / (chi + 1)` derived; the `|z|` equation serves as a monitor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonState;
use crate::error::{Error, Result};
use crate::model::{heaviside, DriveParams, PolarDrive};
use crate::ode::{integrate, IvpOptions, IvpProblem};

/// Default guard on `|chi - 1|`.
pub const CHI_GUARD: f64 = 1e-9;
/// Smallest `|Phi|` accepted by the constraint equations.
pub const PHI_FLOOR: f64 = 1e-12;

/// Dynamical Dyson coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintState {
    pub z_abs: f64,
    pub big_phi: f64,
    pub varphi: f64,
    pub big_lambda: f64,
}

impl ConstraintState {
    /// State with `Lambda = Phi^2 - chi` and `chi = -2 Phi / |z| - 1`.
    pub fn new(z_abs: f64, big_phi: f64, varphi: f64) -> Self {
        let chi = -2.0 * big_phi / z_abs - 1.0;
        ConstraintState {
            z_abs,
            big_phi,
            varphi,
            big_lambda: big_phi * big_phi - chi,
        }
    }

    /// State reconstructed from the integrated triple `(Phi, varphi, Lambda)`.
    pub fn from_integrated(big_phi: f64, varphi: f64, big_lambda: f64) -> Self {
        let chi = big_phi * big_phi - big_lambda;
        ConstraintState {
            z_abs: -2.0 * big_phi / (chi + 1.0),
            big_phi,
            varphi,
            big_lambda,
        }
    }

    pub fn chi(&self) -> f64 {
        self.big_phi * self.big_phi - self.big_lambda
    }

    /// `lambda = Phi e^{-i varphi}`.
    pub fn lambda(&self) -> Complex64 {
        Complex64::from_polar(self.big_phi, -self.varphi)
    }

    /// Drift of the redundant `Lambda` from `Phi^2 - chi(|z|, Phi)`.
    pub fn lambda_drift(&self) -> f64 {
        let chi_z = -2.0 * self.big_phi / self.z_abs - 1.0;
        self.big_lambda - (self.big_phi * self.big_phi - chi_z)
    }

    pub fn to_dyson(&self) -> Result<DysonState> {
        DysonState::new(self.z_abs, self.big_phi, self.varphi)
    }
}

impl From<&DysonState> for ConstraintState {
    fn from(d: &DysonState) -> Self {
        ConstraintState {
            z_abs: d.z_abs,
            big_phi: d.big_phi,
            varphi: d.varphi,
            big_lambda: d.big_lambda,
        }
    }
}

/// Time derivatives of the constraint variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintRates {
    pub z_abs: f64,
    pub big_phi: f64,
    pub varphi: f64,
    pub big_lambda: f64,
}

impl ConstraintRates {
    /// `d lambda / dt` for `lambda = Phi e^{-i varphi}`.
    pub fn lambda_dot(&self, s: &ConstraintState) -> Complex64 {
        Complex64::new(self.big_phi, -s.big_phi * self.varphi) * Complex64::from_polar(1.0, -s.varphi)
    }
}

/// Coefficients of the Hermitian counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitizedCoeffs {
    pub w: f64,
    pub t_abs: f64,
    pub phi_t: f64,
    pub w_c: Complex64,
    pub t_c: Complex64,
    pub v_c: Complex64,
}

impl HermitizedCoeffs {
    pub fn from_polar(w: f64, t_abs: f64, phi_t: f64) -> Self {
        let t_c = Complex64::from_polar(t_abs, phi_t);
        HermitizedCoeffs {
            w,
            t_abs,
            phi_t,
            w_c: Complex64::new(w, 0.0),
            t_c,
            v_c: t_c.conj(),
        }
    }

    /// Coefficients of a Hamiltonian with no Dyson map: `W = omega`, `T = alpha`.
    pub fn free(p: &DriveParams, t: f64) -> Self {
        let a = p.alpha_cartesian(t);
        HermitizedCoeffs {
            w: p.omega(t),
            t_abs: a.norm(),
            phi_t: a.arg(),
            w_c: Complex64::new(p.omega(t), 0.0),
            t_c: a,
            v_c: p.beta_cartesian(t),
        }
    }
}

fn check_guards(chi: f64, big_phi: f64, guard: f64) -> Result<()> {
    if (chi - 1.0).abs() < guard {
        return Err(Error::ChiSingular { chi, guard });
    }
    if big_phi.abs() < PHI_FLOOR {
        return Err(Error::PhiZero(big_phi));
    }
    Ok(())
}

/// `(W, T, V)` of the counterpart for arbitrary complex drive and map rates,
/// before any Hermiticity is imposed.
pub fn coefficients_general(
    s: &ConstraintState,
    omega: Complex64,
    alpha: Complex64,
    beta: Complex64,
    lambda_dot: Complex64,
    big_lambda_dot: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    let big = s.big_lambda;
    if big == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let i = Complex64::i();
    let chi = s.chi();
    let l = s.lambda();
    let lc = l.conj();
    let ldc = lambda_dot.conj();
    let w = -(omega * (l.norm_sqr() + chi)
        + 2.0 * (alpha * l + beta * lc * chi)
        + i * (l * ldc - big_lambda_dot / 2.0))
        / big;
    let t = (omega * lc + alpha + beta * lc * lc + i * ldc / 2.0) / big;
    let v = (omega * l * chi
        + alpha * l * l
        + beta * chi * chi
        + i / 2.0 * (lambda_dot * big - big_lambda_dot * l + ldc * l * l))
        / big;
    Ok((w, t, v))
}

/// Hermiticity constraints for general polar drive inputs.
pub fn constraint_rhs_general(
    s: &ConstraintState,
    drive: &PolarDrive,
    guard: f64,
) -> Result<ConstraintRates> {
    let chi = s.chi();
    let (phi, vp, big, z) = (s.big_phi, s.varphi, s.big_lambda, s.z_abs);
    check_guards(chi, phi, guard)?;
    let (o, po) = (drive.omega.modulus, drive.omega.phase);
    let (a, pa) = (drive.alpha.modulus, drive.alpha.phase);
    let (b, pb) = (drive.beta.modulus, drive.beta.phase);
    let sa = (vp - pa).sin();
    let sb = (vp + pb).sin();
    let osin = o * po.sin();
    let phi2 = phi * phi;

    let d_phi = 2.0 / (chi - 1.0)
        * ((1.0 - phi2) * (phi * osin - a * sa) - b * ((2.0 * chi - 1.0) * phi2 - chi * chi) * sb);
    let d_varphi = 2.0 * o * po.cos()
        + 2.0 / ((1.0 - chi) * phi)
            * (a * (1.0 - phi2) * (vp - pa).cos() + b * (phi2 - chi * chi) * (vp + pb).cos());
    let d_big = -2.0
        * big
        * ((1.0 + 2.0 * phi2 / (chi - 1.0)) * osin
            - 2.0 * phi / (chi - 1.0) * (a * sa - b * (2.0 * chi - 1.0) * sb));
    let d_z = -z * z * ((phi2 + chi) / phi * osin - 2.0 * (a * sa - chi * b * sb)) + z / phi * d_phi;
    Ok(ConstraintRates {
        z_abs: d_z,
        big_phi: d_phi,
        varphi: d_varphi,
        big_lambda: d_big,
    })
}

/// Hermiticity constraints specialised to the modulated-cavity drive.
pub fn constraint_rhs_polar(
    s: &ConstraintState,
    p: &DriveParams,
    t: f64,
    guard: f64,
) -> Result<ConstraintRates> {
    let chi = s.chi();
    let (phi, vp, z) = (s.big_phi, s.varphi, s.z_abs);
    check_guards(chi, phi, guard)?;
    let zeta = p.zeta_signed(t);
    let (a, b) = (p.alpha0_tilde, p.beta0_tilde);
    let phi2 = phi * phi;
    let c = vp.cos();

    let d_phi = 2.0 * zeta / (1.0 - chi)
        * (a * (1.0 - phi2) + b * ((2.0 * chi - 1.0) * phi2 - chi * chi))
        * c;
    let d_varphi = 2.0 * p.omega(t)
        - 2.0 * zeta / ((1.0 - chi) * phi) * (a * (1.0 - phi2) + b * (phi2 - chi * chi)) * vp.sin();
    let d_big = 4.0 * zeta * phi * (phi2 - chi) / (chi - 1.0) * (a - b * (2.0 * chi - 1.0)) * c;
    let d_z = 2.0 * zeta * z * z * (a - b * chi) * c + z / phi * d_phi;
    Ok(ConstraintRates {
        z_abs: d_z,
        big_phi: d_phi,
        varphi: d_varphi,
        big_lambda: d_big,
    })
}

/// `W`, `|T|`, `phi_T` in the polar form of the modulated-cavity drive.
///
/// `phi_T` keeps the Heaviside branch terms unreduced.
pub fn hermitized_coefficients(
    s: &ConstraintState,
    p: &DriveParams,
    t: f64,
    guard: f64,
) -> Result<HermitizedCoeffs> {
    let chi = s.chi();
    if (chi - 1.0).abs() < guard {
        return Err(Error::ChiSingular { chi, guard });
    }
    let zeta = p.zeta_signed(t);
    let (a, b) = (p.alpha0_tilde, p.beta0_tilde);
    let w = p.omega(t) - 2.0 * zeta * s.big_phi / (chi - 1.0) * (a - b) * s.varphi.sin();
    let t_abs = (zeta * (a - b * chi) / (1.0 - chi)).abs();
    let phi_t = heaviside((p.kappa * t).sin()) * PI
        + heaviside(1.0 - chi) * PI
        + heaviside(a - chi * b) * PI
        + PI / 2.0;
    Ok(HermitizedCoeffs::from_polar(w, t_abs, phi_t))
}

/// `W`, `|T|`, `phi_T` for general polar drive inputs; `phi_T` is resolved
/// with the two-argument arctangent and lies in `(-pi, pi]`.
pub fn hermitized_coefficients_general(
    s: &ConstraintState,
    drive: &PolarDrive,
    guard: f64,
) -> Result<HermitizedCoeffs> {
    let chi = s.chi();
    if (chi - 1.0).abs() < guard {
        return Err(Error::ChiSingular { chi, guard });
    }
    let (phi, vp) = (s.big_phi, s.varphi);
    let (o, po) = (drive.omega.modulus, drive.omega.phase);
    let (a, pa) = (drive.alpha.modulus, drive.alpha.phase);
    let (b, pb) = (drive.beta.modulus, drive.beta.phase);
    let osin = o * po.sin();

    let w = o * po.cos() + 2.0 * phi / (chi - 1.0) * (a * (vp - pa).cos() - b * (vp + pb).cos());
    let radicand = a * a + b * b * chi * chi - 2.0 * a * b * chi * (pa + pb).cos()
        + phi * osin * (phi * osin - 2.0 * a * (vp - pa).sin() + 2.0 * b * chi * (vp + pb).sin());
    let t_abs = radicand.max(0.0).sqrt() / (1.0 - chi).abs();
    let num = -(phi * vp.cos() * osin + a * pa.sin() + b * chi * pb.sin());
    let den = phi * vp.sin() * osin - a * pa.cos() + b * chi * pb.cos();
    // tan(phi_T) = num / den; the overall sign of both is fixed by 1 - chi.
    let sg = if 1.0 - chi >= 0.0 { 1.0 } else { -1.0 };
    let phi_t = (-sg * num).atan2(-sg * den);
    Ok(HermitizedCoeffs::from_polar(w, t_abs, phi_t))
}

/// Hermiticity defects `(|Im W|, |V - T*|)` of the general coefficients for
/// a state moving with the given rates.
pub fn hermiticity_defect(
    s: &ConstraintState,
    p: &DriveParams,
    t: f64,
    rates: &ConstraintRates,
) -> Result<(f64, f64)> {
    let (w, tc, v) = coefficients_general(
        s,
        Complex64::new(p.omega(t), 0.0),
        p.alpha_cartesian(t),
        p.beta_cartesian(t),
        rates.lambda_dot(s),
        rates.big_lambda,
    )?;
    Ok((w.im.abs(), (v - tc.conj()).norm()))
}

/// Closed-form Dyson trajectory of the resonant regime: fixed `|z|` and
/// `chi`, `Phi = -|z| (chi + 1) / 2`, `varphi = varphi0 + 2 omega0 t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxDyson {
    pub chi: f64,
    pub z_abs: f64,
    pub varphi0: f64,
}

impl Default for ApproxDyson {
    fn default() -> Self {
        ApproxDyson {
            chi: 1.0002,
            z_abs: 1.0 - 1e-12,
            varphi0: PI / 2.0,
        }
    }
}

impl ApproxDyson {
    pub fn big_phi(&self) -> f64 {
        -0.5 * self.z_abs * (self.chi + 1.0)
    }

    pub fn constraint_state(&self, p: &DriveParams, t: f64) -> ConstraintState {
        let big_phi = self.big_phi();
        ConstraintState {
            z_abs: self.z_abs,
            big_phi,
            varphi: self.varphi0 + 2.0 * p.omega0 * t,
            big_lambda: big_phi * big_phi - self.chi,
        }
    }

    /// Rates implied by the closed form: only `varphi` moves.
    pub fn rates(&self, p: &DriveParams) -> ConstraintRates {
        ConstraintRates {
            varphi: 2.0 * p.omega0,
            ..Default::default()
        }
    }
}

/// Dyson state of the closed-form trajectory at time `t`.
pub fn approx_dyson_trajectory(t: f64, p: &DriveParams, approx: &ApproxDyson) -> Result<DysonState> {
    approx.constraint_state(p, t).to_dyson()
}

/// Integrates the constraint system and refuses to cross `chi = 1` or to
/// reach `Lambda <= 0`.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintSystem {
    pub drive: DriveParams,
    pub guard: f64,
    side: f64,
}

impl ConstraintSystem {
    pub fn new(drive: DriveParams, initial: &ConstraintState, guard: f64) -> Result<Self> {
        let chi = initial.chi();
        if (chi - 1.0).abs() < guard {
            return Err(Error::ChiSingular { chi, guard });
        }
        if initial.big_lambda <= 0.0 {
            return Err(Error::NonPositiveLambda(initial.big_lambda));
        }
        Ok(ConstraintSystem {
            drive,
            guard,
            side: (chi - 1.0).signum(),
        })
    }

    /// State from the packed vector `(Phi, varphi, Lambda)`.
    pub fn unpack(y: &[f64]) -> ConstraintState {
        ConstraintState::from_integrated(y[0], y[1], y[2])
    }

    pub fn pack(s: &ConstraintState) -> [f64; 3] {
        [s.big_phi, s.varphi, s.big_lambda]
    }

    /// Rates at `(t, y)`, failing if the trajectory left its initial branch.
    pub fn rates(&self, t: f64, y: &[f64]) -> Result<(ConstraintState, ConstraintRates)> {
        let s = Self::unpack(y);
        let chi = s.chi();
        if (chi - 1.0).signum() != self.side {
            return Err(Error::ChiSingular {
                chi,
                guard: self.guard,
            });
        }
        if s.big_lambda <= 0.0 {
            return Err(Error::NonPositiveLambda(s.big_lambda));
        }
        let r = constraint_rhs_polar(&s, &self.drive, t, self.guard)?;
        Ok((s, r))
    }

    pub fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let (_, r) = self.rates(t, y)?;
        dy[0] = r.big_phi;
        dy[1] = r.varphi;
        dy[2] = r.big_lambda;
        Ok(())
    }

    /// Trajectory on `grid` (which must start at `t0`).
    pub fn integrate(
        &self,
        initial: &ConstraintState,
        t0: f64,
        grid: Vec<f64>,
        opts: &IvpOptions,
    ) -> Result<Vec<ConstraintState>> {
        let t1 = *grid.last().unwrap_or(&t0);
        if t1 <= t0 {
            return Ok(grid.iter().map(|_| *initial).collect());
        }
        let prob = IvpProblem::new((t0, t1), Self::pack(initial).to_vec(), grid, |t, y, d| {
            self.rhs(t, y, d)
        });
        let sol = integrate(prob, opts)?;
        Ok(sol.states.iter().map(|y| Self::unpack(y)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ZetaMode;

    fn fig1() -> DriveParams {
        DriveParams::default()
    }

    #[test]
    fn identity_map_leaves_hamiltonian() {
        let p = DriveParams::new(1.0, 0.05, 2.0, 0.4, 0.1).unwrap();
        let s = ConstraintState {
            z_abs: 0.5,
            big_phi: 0.0,
            varphi: 0.3,
            big_lambda: 1.0,
        };
        assert_eq!(s.chi(), -1.0);
        let t = 0.7;
        let (w, tc, v) = coefficients_general(
            &s,
            Complex64::new(p.omega(t), 0.0),
            p.alpha_cartesian(t),
            p.beta_cartesian(t),
            Complex64::new(0.0, 0.0),
            0.0,
        )
        .unwrap();
        assert!((w - p.omega(t)).norm() < 1e-15);
        assert!((tc - p.alpha_cartesian(t)).norm() < 1e-15);
        assert!((v - p.beta_cartesian(t)).norm() < 1e-15);
    }

    #[test]
    fn zero_lambda() {
        let s = ConstraintState {
            z_abs: 0.5,
            big_phi: 0.1,
            varphi: 0.0,
            big_lambda: 0.0,
        };
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(
            coefficients_general(&s, z, z, z, z, 0.0),
            Err(Error::ZeroLambda)
        );
    }

    #[test]
    fn hermitian_limit_coefficients() {
        let p = DriveParams::hermitian(1.0, 0.01, 2.0);
        let s = ConstraintState {
            z_abs: 0.5,
            big_phi: 0.0,
            varphi: 0.0,
            big_lambda: 1.0,
        };
        for t in [0.3, 1.1, 2.0] {
            let c = hermitized_coefficients(&s, &p, t, CHI_GUARD).unwrap();
            assert_eq!(c.w, p.omega(t));
            assert!((c.t_abs - p.zeta(t).modulus).abs() < 1e-15);
        }
    }

    #[test]
    fn fig1_t_ratio() {
        let p = fig1();
        let s = ApproxDyson::default().constraint_state(&p, 0.0);
        let t = 0.4;
        let c = hermitized_coefficients(&s, &p, t, CHI_GUARD).unwrap();
        let ratio = c.t_abs / p.zeta(t).modulus;
        assert!((ratio - 44.999).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn cos_zero_freezes_phi_and_lambda() {
        let p = fig1().with_zeta_mode(ZetaMode::Approximate);
        let s = ConstraintState::new(0.5, 0.3, PI / 2.0);
        let r = constraint_rhs_polar(&s, &p, 0.37, CHI_GUARD).unwrap();
        assert!(r.big_phi.abs() < 1e-18 && r.big_lambda.abs() < 1e-18);
    }

    #[test]
    fn zeta_node_gives_free_rotation() {
        let p = fig1();
        let s = ConstraintState::new(0.5, 0.3, 0.4);
        let r = constraint_rhs_polar(&s, &p, 0.0, CHI_GUARD).unwrap();
        assert_eq!(r.varphi, 2.0 * p.omega(0.0));
    }

    #[test]
    fn real_omega_drops_sine_terms() {
        // With |alpha| = |beta| = 0 only the omega terms survive; for a real
        // omega they vanish from Phi and Lambda rates.
        let s = ConstraintState::new(0.5, 0.3, 0.4);
        let drive = PolarDrive {
            omega: crate::model::PolarComplex::new(1.3, 0.0),
            alpha: crate::model::PolarComplex::new(0.0, 0.0),
            beta: crate::model::PolarComplex::new(0.0, 0.0),
        };
        let r = constraint_rhs_general(&s, &drive, CHI_GUARD).unwrap();
        assert_eq!((r.big_phi, r.big_lambda, r.z_abs), (0.0, 0.0, 0.0));
        assert_eq!(r.varphi, 2.6);
    }

    #[test]
    fn guards() {
        let p = fig1();
        let s = ConstraintState::from_integrated(-1.0, 0.0, 0.0);
        assert!(matches!(
            constraint_rhs_polar(&s, &p, 0.3, CHI_GUARD),
            Err(Error::ChiSingular { .. })
        ));
        let s = ConstraintState::from_integrated(0.0, 0.0, 2.0);
        assert!(matches!(
            constraint_rhs_polar(&s, &p, 0.3, CHI_GUARD),
            Err(Error::PhiZero(_))
        ));
    }

    #[test]
    fn polar_and_general_rhs_agree() {
        let p = DriveParams::new(1.0, 0.2, 1.3, 0.7, 0.2).unwrap();
        for (k, t) in [0.1, 0.9, 2.3, 3.9, 5.5].iter().enumerate() {
            let s = ConstraintState::new(0.3 + 0.1 * k as f64, 0.2 - 0.15 * k as f64, 0.3 + k as f64);
            let a = constraint_rhs_polar(&s, &p, *t, CHI_GUARD).unwrap();
            let b = constraint_rhs_general(&s, &p.polar_at(*t), CHI_GUARD).unwrap();
            assert!((a.big_phi - b.big_phi).abs() < 1e-12);
            assert!((a.varphi - b.varphi).abs() < 1e-12);
            assert!((a.big_lambda - b.big_lambda).abs() < 1e-12);
            assert!((a.z_abs - b.z_abs).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_and_general_coefficients_agree() {
        let p = DriveParams::new(1.0, 0.2, 1.3, 0.7, 0.2).unwrap();
        for (k, t) in [0.1, 0.9, 2.3, 3.9, 5.5].iter().enumerate() {
            let s = ConstraintState::new(0.3 + 0.1 * k as f64, 0.2 - 0.15 * k as f64, 0.3 + k as f64);
            let a = hermitized_coefficients(&s, &p, *t, CHI_GUARD).unwrap();
            let b = hermitized_coefficients_general(&s, &p.polar_at(*t), CHI_GUARD).unwrap();
            assert!((a.w - b.w).abs() < 1e-12);
            assert!((a.t_abs - b.t_abs).abs() < 1e-12);
            assert!((a.t_c - b.t_c).norm() < 1e-12);
        }
    }

    #[test]
    fn approximate_trajectory_values() {
        let p = fig1();
        let ad = ApproxDyson {
            chi: 1.0002,
            z_abs: 1.0,
            varphi0: PI / 2.0,
        };
        let d = approx_dyson_trajectory(0.0, &p, &ad).unwrap();
        assert_eq!(d.varphi, PI / 2.0);
        assert!((d.big_phi + 1.0001).abs() < 1e-15);
        assert!(d.eps_map > 1e3);
    }

    #[test]
    fn integrated_trajectory_stays_hermitian() {
        let p = DriveParams::new(1.0, 0.3, 1.3, 0.7, 0.2).unwrap();
        let s0 = ConstraintState::new(0.5, 0.3, 0.4);
        let sys = ConstraintSystem::new(p, &s0, CHI_GUARD).unwrap();
        let grid = crate::ode::uniform_grid(0.0, 10.0, 200);
        let states = sys
            .integrate(&s0, 0.0, grid.clone(), &IvpOptions::rk45(1e-11, 1e-13))
            .unwrap();
        for (t, s) in grid.iter().zip(&states) {
            let r = constraint_rhs_polar(s, &p, *t, CHI_GUARD).unwrap();
            let (im_w, dv) = hermiticity_defect(s, &p, *t, &r).unwrap();
            assert!(im_w < 1e-9 && dv < 1e-9, "t {t}: {im_w} {dv}");
        }
    }
}
