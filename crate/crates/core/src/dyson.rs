//! SU(1,1) algebra of the quadratic Dyson map
//! `eta = exp[eps (a+a + 1/2) + mu a^2 + mu* a+^2]`.
//!
//! With `z = 2 mu / eps = |z| e^{i varphi}` the map is parameterised by
//! `(|z|, Phi, varphi)`, where `lambda = Phi e^{-i varphi}` is the `K+`
//! coefficient of the Gauss decomposition
//! `eta = exp(lambda K+) exp(ln Lambda K0) exp(lambda* K-)`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|Xi|` the hyperbolic ratios are evaluated from their series.
const XI_SERIES: f64 = 1e-6;
/// Relative floor used for degenerate denominators.
const DEGENERATE: f64 = 1e-14;

/// `sinh(x) / x`.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < XI_SERIES {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `tanh(x) / x`.
pub fn tanhc(x: f64) -> f64 {
    if x.abs() < XI_SERIES {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

/// `atanh(x) / x` for `|x| < 1`.
fn atanhc(x: f64) -> f64 {
    if x.abs() < XI_SERIES {
        let x2 = x * x;
        1.0 + x2 / 3.0 + x2 * x2 / 5.0
    } else {
        x.atanh() / x
    }
}

/// Coefficients `(lambda, Lambda, Xi)` of the Gauss decomposition of the
/// map with exponent `eps_map` and squeezing coefficient `mu`.
///
/// Evaluated as `lambda = 2 mu* s / d`, `Lambda = 1 / d^2` with
/// `s = sinh(Xi)/Xi` and `d = cosh(Xi) - eps s`, which stays finite on the
/// removable singularity `Xi = 0`.
pub fn gauss_coefficients(eps_map: f64, mu: Complex64) -> Result<(Complex64, f64, f64)> {
    let mut xi2 = eps_map * eps_map - 4.0 * mu.norm_sqr();
    if xi2 < 0.0 {
        if xi2 > -1e-15 * eps_map * eps_map {
            xi2 = 0.0;
        } else {
            return Err(Error::ImaginaryXi(xi2));
        }
    }
    let xi = xi2.sqrt();
    let s = sinhc(xi);
    let d = xi.cosh() - eps_map * s;
    if d.abs() < DEGENERATE {
        return Err(Error::DegenerateDenominator {
            context: "Gauss coefficients",
            value: d.abs(),
        });
    }
    let lambda = 2.0 * mu.conj() * s / d;
    Ok((lambda, 1.0 / (d * d), xi))
}

/// `Phi` and `chi` for a map with modulus `z_abs` and exponent `eps_map`.
pub fn phi_from_z(z_abs: f64, eps_map: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&z_abs) {
        return Err(Error::OutOfDomain(format!("|z| = {z_abs} outside [0, 1]")));
    }
    let c = (1.0 - z_abs * z_abs).max(0.0).sqrt();
    let g = tanhc(eps_map * c);
    let d = 1.0 - eps_map * g;
    if d.abs() < DEGENERATE {
        return Err(Error::DegenerateDenominator {
            context: "Phi from |z|",
            value: d.abs(),
        });
    }
    let phi = eps_map * z_abs * g / d;
    if z_abs == 0.0 {
        return Err(Error::DivisionByZero("chi = -2 Phi / |z| - 1 at |z| = 0"));
    }
    Ok((phi, -2.0 * phi / z_abs - 1.0))
}

/// Map exponent recovered from `(|z|, Phi)`.
///
/// The logarithm is evaluated as `2 atanh(x)` with
/// `x = c Phi / (Phi + |z|)`, `c = sqrt(1 - |z|^2)`, giving
/// `eps = Phi / (Phi + |z|) * atanh(x) / x`. At `|z| = 1` this is
/// `Phi / (1 + Phi)`. The sign of the result follows the branch of the
/// inputs; the map is only realisable for `|x| < 1`.
pub fn epsilon_from_phi(z_abs: f64, phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z_abs) {
        return Err(Error::OutOfDomain(format!("|z| = {z_abs} outside [0, 1]")));
    }
    let denom = phi + z_abs;
    if denom == 0.0 {
        return Err(Error::OutOfDomain(format!(
            "Phi + |z| = 0 (Phi = {phi}, |z| = {z_abs})"
        )));
    }
    let c = (1.0 - z_abs * z_abs).max(0.0).sqrt();
    let x = c * phi / denom;
    if x.abs() >= 1.0 {
        return Err(Error::OutOfDomain(format!(
            "logarithm argument non-positive for Phi = {phi}, |z| = {z_abs}"
        )));
    }
    Ok(phi / denom * atanhc(x))
}

/// Dyson-map coordinates at one instant. Always built from `(|z|, Phi, varphi)`;
/// every other field is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DysonState {
    pub z_abs: f64,
    pub varphi: f64,
    pub big_phi: f64,
    pub chi: f64,
    pub big_lambda: f64,
    pub eps_map: f64,
    pub mu_abs: f64,
    pub lambda: Complex64,
}

impl DysonState {
    pub fn new(z_abs: f64, big_phi: f64, varphi: f64) -> Result<Self> {
        if z_abs == 0.0 {
            return Err(Error::DivisionByZero("chi = -2 Phi / |z| - 1 at |z| = 0"));
        }
        let eps_map = epsilon_from_phi(z_abs, big_phi)?;
        let chi = -2.0 * big_phi / z_abs - 1.0;
        Ok(DysonState {
            z_abs,
            varphi,
            big_phi,
            chi,
            big_lambda: big_phi * big_phi - chi,
            eps_map,
            mu_abs: 0.5 * eps_map.abs() * z_abs,
            lambda: Complex64::from_polar(big_phi, -varphi),
        })
    }

    /// State with exponent `eps_map`, modulus `z_abs` and phase `varphi`.
    pub fn from_map(eps_map: f64, z_abs: f64, varphi: f64) -> Result<Self> {
        let (big_phi, _) = phi_from_z(z_abs, eps_map)?;
        Self::new(z_abs, big_phi, varphi)
    }

    /// The identity map: `lambda = 0`, `Lambda = 1`, `chi = -1`.
    pub fn identity(z_abs: f64, varphi: f64) -> Self {
        DysonState {
            z_abs,
            varphi,
            big_phi: 0.0,
            chi: -1.0,
            big_lambda: 1.0,
            eps_map: 0.0,
            mu_abs: 0.0,
            lambda: Complex64::new(0.0, 0.0),
        }
    }

    /// `mu = (eps |z| / 2) e^{i varphi}`.
    pub fn mu(&self) -> Complex64 {
        Complex64::from_polar(0.5 * self.eps_map * self.z_abs, self.varphi)
    }

    pub fn xi(&self) -> f64 {
        self.eps_map.abs() * (1.0 - self.z_abs * self.z_abs).max(0.0).sqrt()
    }

    /// Whether `|z|` exceeds the realisability bound `-2 Phi / (1 + Phi^2)`.
    pub fn is_realizable(&self) -> bool {
        self.z_abs > -2.0 * self.big_phi / (1.0 + self.big_phi * self.big_phi)
    }
}

/// Mixing matrix `M` with `eta (a, a+)^T eta^-1 = M (a, a+)^T`.
pub fn bogoliubov_matrix(d: &DysonState) -> Result<Matrix2<Complex64>> {
    if d.big_lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(d.big_lambda));
    }
    let s = 1.0 / d.big_lambda.sqrt();
    let one = Complex64::new(1.0, 0.0);
    Ok(Matrix2::new(
        one * s,
        -d.lambda * s,
        d.lambda.conj() * s,
        Complex64::new(-d.chi * s, 0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map() {
        let (l, big, xi) = gauss_coefficients(0.0, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!((l, big, xi), (Complex64::new(0.0, 0.0), 1.0, 0.0));
    }

    #[test]
    fn pure_scaling() {
        for e0 in [0.05, 0.3, 1.7] {
            let (l, big, xi) = gauss_coefficients(e0, Complex64::new(0.0, 0.0)).unwrap();
            assert_eq!(l, Complex64::new(0.0, 0.0));
            assert!((xi - e0).abs() < 1e-15);
            assert!((big - (2.0 * e0).exp()).abs() < 1e-12 * big);
        }
    }

    #[test]
    fn gauss_matches_textbook_form() {
        let eps = 0.8;
        let mu = Complex64::from_polar(0.3, 0.4);
        let (l, big, xi) = gauss_coefficients(eps, mu).unwrap();
        let den = xi * xi.cosh() - eps * xi.sinh();
        let l_ref = 2.0 * mu.conj() * xi.sinh() / den;
        assert!((l - l_ref).norm() < 1e-13);
        assert!((big - xi * xi / (den * den)).abs() < 1e-12);
    }

    #[test]
    fn small_xi_limit() {
        let eps = 0.4;
        let mu = Complex64::new(0.2 * (1.0 - 1e-16), 0.0);
        let (l, big, _) = gauss_coefficients(eps, mu).unwrap();
        assert!((l.re - 2.0 * mu.re / (1.0 - eps)).abs() < 1e-12);
        assert!((big - 1.0 / (1.0 - eps).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn series_branches_agree() {
        for x in [9.9e-7f64, 1.01e-6] {
            let s = x.sinh() / x;
            let t = x.tanh() / x;
            assert!((sinhc(x) - s).abs() < 1e-12);
            assert!((tanhc(x) - t).abs() < 1e-12);
            assert!((atanhc(x) - x.atanh() / x).abs() < 1e-12);
        }
    }

    #[test]
    fn imaginary_xi_rejected() {
        assert!(matches!(
            gauss_coefficients(0.5, Complex64::new(0.3, 0.0)),
            Err(Error::ImaginaryXi(_))
        ));
    }

    #[test]
    fn degenerate_denominator() {
        // mu = 0, eps -> d = e^{-eps} never vanishes; at |z| = 1 the
        // denominator is 1 - eps.
        let err = gauss_coefficients(1.0, Complex64::new(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateDenominator { .. }));
        assert!(phi_from_z(1.0, 1.0).is_err());
    }

    #[test]
    fn fig1_chi() {
        let d = DysonState::new(1.0, -1.0001, 0.0).unwrap();
        assert!((d.chi - 1.0002).abs() < 1e-12);
        assert!((d.eps_map - (-1.0001 / (1.0 - 1.0001))).abs() < 1e-6);
    }

    #[test]
    fn large_eps_at_unit_modulus() {
        for eps in [1e2, 1e4, 1e6] {
            let (phi, _) = phi_from_z(1.0, eps).unwrap();
            assert!(phi < -1.0 && phi > -1.0 - 2.0 / eps, "eps {eps}: {phi}");
        }
    }

    #[test]
    fn unit_modulus_limit() {
        for phi in [-1.0001, -3.0, 0.2, 4.0] {
            let e = epsilon_from_phi(1.0, phi).unwrap();
            assert!((e - phi / (1.0 + phi)).abs() < 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn round_trip() {
        let eps = epsilon_from_phi(0.5, 0.3).unwrap();
        let (phi, _) = phi_from_z(0.5, eps).unwrap();
        assert!((phi - 0.3).abs() < 1e-10 * 0.3);
        assert_eq!(epsilon_from_phi(0.7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_domain() {
        // Outside the realisable wedge the logarithm argument is negative.
        assert!(matches!(
            epsilon_from_phi(0.999, -1.0001),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(epsilon_from_phi(0.5, -0.5), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn zero_modulus_chi() {
        assert!(matches!(
            phi_from_z(0.0, 0.3),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn dyson_state_invariants() {
        let d = DysonState::new(0.5, 0.3, 0.9).unwrap();
        assert!((d.chi - (-2.0 * 0.3 / 0.5 - 1.0)).abs() < 1e-12);
        assert!((d.chi - (d.lambda.norm_sqr() - d.big_lambda)).abs() < 1e-12);
        let (l, big, _) = gauss_coefficients(d.eps_map, d.mu()).unwrap();
        assert!((l - d.lambda).norm() < 1e-10);
        assert!((big - d.big_lambda).abs() < 1e-10);
        assert!(d.is_realizable());
    }

    #[test]
    fn identity_matrix() {
        let m = bogoliubov_matrix(&DysonState::identity(0.5, 0.0)).unwrap();
        assert_eq!(m, Matrix2::identity());
    }

    #[test]
    fn unit_determinant() {
        let d = DysonState::new(0.8, 0.25, -1.3).unwrap();
        let det = bogoliubov_matrix(&d).unwrap().determinant();
        assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_positive_lambda() {
        let mut d = DysonState::identity(0.5, 0.0);
        d.big_lambda = 0.0;
        assert_eq!(bogoliubov_matrix(&d), Err(Error::NonPositiveLambda(0.0)));
    }
}
