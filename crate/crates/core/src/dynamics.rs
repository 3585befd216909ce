//! Lewis-Riesenfeld evolution of the Hermitian counterpart
//! `h = W (a+a + 1/2) + |T| (e^{i phi_T} a^2 + e^{-i phi_T} a+^2)`.
//!
//! The evolution operator is parameterised by a squeeze `xi = r e^{i phi}`,
//! a displacement `theta` and a rotation angle `Omega~ = int Omega`.
//! [`bogoliubov_ode_oracle`] integrates the equivalent linear mode-mixing
//! equations, which have no polar-coordinate singularity at `r = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonState;
use crate::error::{Error, Result};
use crate::hermitian::{
    hermitized_coefficients, ApproxDyson, ConstraintRates, ConstraintState, ConstraintSystem,
    HermitizedCoeffs, CHI_GUARD,
};
use crate::model::{heaviside, DriveParams};
use crate::ode::{integrate, uniform_grid, IvpOptions, IvpStats};

/// Seed used in place of an exact `r(0) = 0`.
pub const DEFAULT_SEED_R: f64 = 1e-8;
/// Smallest output resolution accepted by [`evolve`].
pub const MIN_POINTS_PER_PERIOD: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeState {
    pub r: f64,
    pub phi: f64,
    pub theta: Complex64,
    pub omega_tilde: f64,
}

impl SqueezeState {
    pub fn new(r: f64, phi: f64) -> Self {
        SqueezeState {
            r,
            phi,
            theta: Complex64::new(0.0, 0.0),
            omega_tilde: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovTriple {
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

impl BogoliubovTriple {
    /// `|u|^2 - |v|^2 - 1`.
    pub fn identity_defect(&self) -> f64 {
        self.u.norm_sqr() - self.v.norm_sqr() - 1.0
    }
}

/// `(dr/dt, dphi/dt)`. The `coth(2r)` pole is avoided by evaluating at
/// `|r| >= 1e-300`; trajectories are expected to start from a seeded `r`.
pub fn squeeze_rhs(s: &SqueezeState, c: &HermitizedCoeffs) -> (f64, f64) {
    let psi = c.phi_t + s.phi;
    let r = if s.r.abs() < 1e-300 { 1e-300 } else { s.r };
    let dr = -2.0 * c.t_abs * psi.sin();
    let dphi = -2.0 * c.w - 4.0 * c.t_abs / (2.0 * r).tanh() * psi.cos();
    (dr, dphi)
}

/// `(dtheta/dt, Omega)` with `i dtheta/dt = Omega theta`.
pub fn rotation_displacement_rhs(s: &SqueezeState, c: &HermitizedCoeffs) -> (Complex64, f64) {
    let omega = c.w + 2.0 * c.t_abs * s.r.tanh() * (c.phi_t + s.phi).cos();
    (Complex64::new(0.0, -omega) * s.theta, omega)
}

/// Bogoliubov coefficients of `U+ a U = u a + v a+ + w` from the initial and
/// current squeeze parameters.
pub fn bogoliubov_uvw(s0: &SqueezeState, s: &SqueezeState) -> BogoliubovTriple {
    let (r0, p0, th0) = (s0.r, s0.phi, s0.theta);
    let (r, p, om) = (s.r, s.phi, s.omega_tilde);
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let u = e(-om) * r0.cosh() * r.cosh() - e(om + p - p0) * r0.sinh() * r.sinh();
    let v = e(om + p) * r0.cosh() * r.sinh() - e(-(om - p0)) * r0.sinh() * r.cosh();
    let w = th0 * e(-om) * r.cosh() + th0.conj() * e(om + p) * r.sinh();
    BogoliubovTriple { u, v, w }
}

/// First and second moments of the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialMoments {
    /// `<a+ a>`
    pub number: f64,
    /// `<a^2>`
    pub a2: Complex64,
    /// `<a>`
    pub a: Complex64,
}

impl InitialMoments {
    pub fn vacuum() -> Self {
        InitialMoments {
            number: 0.0,
            a2: Complex64::new(0.0, 0.0),
            a: Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        *self == Self::vacuum()
    }
}

/// Mean photon number from the initial moments and the Bogoliubov triple.
pub fn mean_photon_general(m: &InitialMoments, b: &BogoliubovTriple) -> Result<f64> {
    if m.number < 0.0 {
        return Err(Error::NegativeMeanPhoton(m.number));
    }
    let (u, v, w) = (b.u, b.v, b.w);
    let n = v.norm_sqr()
        + w.norm_sqr()
        + (u.norm_sqr() + v.norm_sqr()) * m.number
        + (u * v.conj() * m.a2).re * 2.0
        + ((w * v.conj() + u * w.conj()) * m.a).re * 2.0;
    if n < -1e-9 {
        return Err(Error::NegativeMeanPhoton(n));
    }
    Ok(n)
}

/// `|alpha0 - chi beta0| / |chi - 1|`, the factor multiplying the Hermitian
/// squeeze growth rate.
pub fn amplification_factor(alpha0_tilde: f64, beta0_tilde: f64, chi: f64) -> Result<f64> {
    amplification_factor_guarded(alpha0_tilde, beta0_tilde, chi, CHI_GUARD)
}

pub fn amplification_factor_guarded(
    alpha0_tilde: f64,
    beta0_tilde: f64,
    chi: f64,
    guard: f64,
) -> Result<f64> {
    if (chi - 1.0).abs() <= guard {
        return Err(Error::ChiSingular { chi, guard });
    }
    Ok((alpha0_tilde - chi * beta0_tilde).abs() / (chi - 1.0).abs())
}

/// Which closed form of the resonant squeeze degree to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticMode {
    /// Secular growth only: `r0 + R eps omega0 t cos(phi0') / 2`.
    #[default]
    LongTime,
    /// Full solution including the `sin(4 omega0 t)` ripple.
    Oscillatory,
}

impl std::str::FromStr for AnalyticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long_time" | "longtime" => Ok(AnalyticMode::LongTime),
            "oscillatory" => Ok(AnalyticMode::Oscillatory),
            other => Err(Error::Validation(format!("unknown analytic mode '{other}'"))),
        }
    }
}

/// Offset between the squeeze phase and the rotated variable
/// `phi' = phi + pi/2 + h(1 - chi) pi + h(alpha0 - chi beta0) pi`.
pub fn phase_offset(chi: f64, alpha0_tilde: f64, beta0_tilde: f64) -> f64 {
    PI / 2.0 + heaviside(1.0 - chi) * PI + heaviside(alpha0_tilde - chi * beta0_tilde) * PI
}

/// Initial squeeze phase `phi(0)` for a chosen `phi0'`.
pub fn initial_squeeze_phase(phi0_prime: f64, chi: f64, alpha0_tilde: f64, beta0_tilde: f64) -> f64 {
    phi0_prime - phase_offset(chi, alpha0_tilde, beta0_tilde)
}

/// Closed-form `(r, phi)` on parametric resonance `kappa = 2 omega0`.
pub fn analytic_squeeze(
    t: f64,
    p: &DriveParams,
    chi: f64,
    r0: f64,
    phi0_prime: f64,
    mode: AnalyticMode,
) -> Result<(f64, f64)> {
    let two_omega0 = 2.0 * p.omega0;
    if (p.kappa - two_omega0).abs() > 1e-12 * two_omega0.max(1.0) {
        return Err(Error::NotOnResonance {
            kappa: p.kappa,
            two_omega0,
        });
    }
    let rr = amplification_factor(p.alpha0_tilde, p.beta0_tilde, chi)?;
    let w0t = p.omega0 * t;
    let r = match mode {
        AnalyticMode::LongTime => r0 + rr * p.eps_mod * w0t * phi0_prime.cos() / 2.0,
        AnalyticMode::Oscillatory => {
            r0 + p.eps_mod / 8.0
                * rr
                * (phi0_prime.cos() * (4.0 * w0t - (4.0 * w0t).sin())
                    - phi0_prime.sin() * (1.0 - (4.0 * w0t).cos()))
        }
    };
    let phi = phi0_prime - 2.0 * w0t - phase_offset(chi, p.alpha0_tilde, p.beta0_tilde);
    Ok((r, phi))
}

/// Where the Dyson coordinates come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DysonSource {
    /// Closed-form resonant trajectory.
    Approximate(ApproxDyson),
    /// Hermiticity constraints integrated from this initial state.
    Integrated(ConstraintState),
}

/// Drive plus Dyson source: everything needed to evaluate the
/// counterpart coefficients along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientModel {
    pub drive: DriveParams,
    pub source: DysonSource,
    pub guard: f64,
}

impl CoefficientModel {
    pub fn new(drive: DriveParams, source: DysonSource) -> Self {
        CoefficientModel {
            drive,
            source,
            guard: CHI_GUARD,
        }
    }

    /// Number of leading state components taken by the constraint system.
    pub fn constraint_len(&self) -> usize {
        match self.source {
            DysonSource::Approximate(_) => 0,
            DysonSource::Integrated(_) => 3,
        }
    }

    pub fn constraint_y0(&self) -> Vec<f64> {
        match self.source {
            DysonSource::Approximate(_) => Vec::new(),
            DysonSource::Integrated(s) => ConstraintSystem::pack(&s).to_vec(),
        }
    }

    /// `chi` at `t = 0`.
    pub fn initial_chi(&self) -> f64 {
        match self.source {
            DysonSource::Approximate(a) => a.chi,
            DysonSource::Integrated(s) => s.chi(),
        }
    }

    pub fn system(&self) -> Result<Option<ConstraintSystem>> {
        match self.source {
            DysonSource::Approximate(_) => Ok(None),
            DysonSource::Integrated(s) => Ok(Some(ConstraintSystem::new(self.drive, &s, self.guard)?)),
        }
    }

    /// Dyson coordinates at `t` given the constraint block `yc` of the state.
    pub fn state_at(&self, t: f64, yc: &[f64]) -> ConstraintState {
        match self.source {
            DysonSource::Approximate(a) => a.constraint_state(&self.drive, t),
            DysonSource::Integrated(_) => ConstraintSystem::unpack(yc),
        }
    }

    /// Rates of the Dyson coordinates (exact for integrated sources, the
    /// closed-form rates otherwise).
    pub fn rates_at(
        &self,
        sys: Option<&ConstraintSystem>,
        t: f64,
        yc: &[f64],
    ) -> Result<ConstraintRates> {
        match (self.source, sys) {
            (DysonSource::Approximate(a), _) => Ok(a.rates(&self.drive)),
            (DysonSource::Integrated(_), Some(sys)) => Ok(sys.rates(t, yc)?.1),
            (DysonSource::Integrated(_), None) => Err(Error::Validation(
                "integrated source evaluated without its constraint system".into(),
            )),
        }
    }

    pub fn coeffs_at(&self, t: f64, yc: &[f64]) -> Result<HermitizedCoeffs> {
        hermitized_coefficients(&self.state_at(t, yc), &self.drive, t, self.guard)
    }
}

/// Inputs of [`evolve`] and [`bogoliubov_ode_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub model: CoefficientModel,
    pub r0: f64,
    pub phi0: f64,
    pub theta0: Complex64,
    /// Replacement for an exact `r0 = 0`.
    pub seed_r: f64,
    pub t_max: f64,
    pub points_per_period: usize,
    pub rtol: f64,
    pub atol: f64,
    pub moments: InitialMoments,
    /// Negative-control hook: reverses the sign of `dr/dt`.
    pub flip_r_rate: bool,
}

impl EvolveConfig {
    pub fn new(model: CoefficientModel, t_max: f64) -> Self {
        EvolveConfig {
            model,
            r0: 0.0,
            phi0: 0.0,
            theta0: Complex64::new(0.0, 0.0),
            seed_r: DEFAULT_SEED_R,
            t_max,
            points_per_period: MIN_POINTS_PER_PERIOD,
            rtol: 1e-11,
            atol: 1e-13,
            moments: InitialMoments::vacuum(),
            flip_r_rate: false,
        }
    }

    /// Output grid: `points_per_period` samples per drive period over `[0, t_max]`.
    pub fn grid(&self) -> Vec<f64> {
        let period = self.model.drive.drive_period();
        let n = (self.t_max / period * self.points_per_period as f64).ceil() as usize;
        uniform_grid(0.0, self.t_max, n)
    }

    pub fn ode_options(&self) -> IvpOptions {
        IvpOptions::rk45(self.rtol, self.atol).with_initial_step(self.model.drive.drive_period() / 200.0)
    }

    /// Initial squeeze state with the seed applied.
    pub fn initial_squeeze(&self) -> SqueezeState {
        let r = if self.r0 == 0.0 { self.seed_r } else { self.r0 };
        SqueezeState {
            r,
            phi: self.phi0,
            theta: self.theta0,
            omega_tilde: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.drive.validate()?;
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Validation(format!("t_max = {} must be > 0", self.t_max)));
        }
        if self.points_per_period < MIN_POINTS_PER_PERIOD {
            return Err(Error::Validation(format!(
                "points per period {} below {MIN_POINTS_PER_PERIOD}",
                self.points_per_period
            )));
        }
        if self.r0 < 0.0 || !(self.seed_r > 0.0) {
            return Err(Error::Validation("r0 must be >= 0 and seed_r > 0".into()));
        }
        Ok(())
    }
}

/// Full time series of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub constraint: Vec<ConstraintState>,
    pub dyson: Vec<DysonState>,
    pub coeffs: Vec<HermitizedCoeffs>,
    pub squeeze: Vec<SqueezeState>,
    pub bogoliubov: Vec<BogoliubovTriple>,
    pub photon_number: Vec<f64>,
    #[serde(skip)]
    pub stats: IvpStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `| |u|^2 - |v|^2 - 1 |` along the trajectory.
    pub fn max_identity_defect(&self) -> f64 {
        self.bogoliubov
            .iter()
            .map(|b| b.identity_defect().abs())
            .fold(0.0, f64::max)
    }
}

const SQ: usize = 5;

/// Integrate the squeeze, displacement and rotation parameters together
/// with the Dyson coordinates (when integrated).
pub fn evolve(cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let model = cfg.model;
    let sys = model.system()?;
    let nc = model.constraint_len();
    let s0 = cfg.initial_squeeze();
    let mut y0 = model.constraint_y0();
    y0.extend([s0.r, s0.phi, s0.theta.re, s0.theta.im, 0.0]);
    let sign = if cfg.flip_r_rate { -1.0 } else { 1.0 };

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (yc, ys) = y.split_at(nc);
        if let Some(sys) = &sys {
            sys.rhs(t, yc, &mut dy[..nc])?;
        }
        let c = model.coeffs_at(t, yc)?;
        let s = SqueezeState {
            r: ys[0],
            phi: ys[1],
            theta: Complex64::new(ys[2], ys[3]),
            omega_tilde: ys[4],
        };
        let (dr, dphi) = squeeze_rhs(&s, &c);
        let (dtheta, omega) = rotation_displacement_rhs(&s, &c);
        dy[nc] = sign * dr;
        dy[nc + 1] = dphi;
        dy[nc + 2] = dtheta.re;
        dy[nc + 3] = dtheta.im;
        dy[nc + 4] = omega;
        Ok(())
    };
    let grid = cfg.grid();
    let sol = integrate(
        crate::ode::IvpProblem::new((0.0, cfg.t_max), y0, grid, rhs),
        &cfg.ode_options(),
    )?;

    let n = sol.times.len();
    let mut traj = Trajectory {
        times: sol.times.clone(),
        constraint: Vec::with_capacity(n),
        dyson: Vec::with_capacity(n),
        coeffs: Vec::with_capacity(n),
        squeeze: Vec::with_capacity(n),
        bogoliubov: Vec::with_capacity(n),
        photon_number: Vec::with_capacity(n),
        stats: sol.stats,
    };
    let vacuum = cfg.moments.is_vacuum() && cfg.theta0 == Complex64::new(0.0, 0.0);
    for (t, y) in sol.times.iter().zip(&sol.states) {
        let (yc, ys) = y.split_at(nc);
        debug_assert_eq!(ys.len(), SQ);
        let cs = model.state_at(*t, yc);
        let s = SqueezeState {
            r: ys[0],
            phi: ys[1],
            theta: Complex64::new(ys[2], ys[3]),
            omega_tilde: ys[4],
        };
        let b = bogoliubov_uvw(&s0, &s);
        let n_ph = if vacuum {
            s.r.sinh().powi(2)
        } else {
            mean_photon_general(&cfg.moments, &b)?
        };
        traj.dyson.push(cs.to_dyson()?);
        traj.coeffs.push(model.coeffs_at(*t, yc)?);
        traj.constraint.push(cs);
        traj.squeeze.push(s);
        traj.bogoliubov.push(b);
        traj.photon_number.push(n_ph);
    }
    Ok(traj)
}

/// `(u, v)` of the linear mode-mixing equations on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub times: Vec<f64>,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl OracleSolution {
    /// `|v|^2`, the photon number for a vacuum start.
    pub fn photon_number(&self) -> Vec<f64> {
        self.v.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `<a^2>` for a vacuum start.
    pub fn second_moment(&self) -> Vec<Complex64> {
        self.u.iter().zip(&self.v).map(|(u, v)| u * v.conj()).collect()
    }

    pub fn max_identity_defect(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| (u.norm_sqr() - v.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrate `u' = -i (W u + 2|T| e^{-i phi_T} v)`,
/// `v' = i (W v + 2|T| e^{i phi_T} u)` from `(1, 0)`.
pub fn bogoliubov_ode_oracle(cfg: &EvolveConfig) -> Result<OracleSolution> {
    cfg.validate()?;
    let model = cfg.model;
    let sys = model.system()?;
    let nc = model.constraint_len();
    let mut y0 = model.constraint_y0();
    y0.extend([1.0, 0.0, 0.0, 0.0]);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (yc, ys) = y.split_at(nc);
        if let Some(sys) = &sys {
            sys.rhs(t, yc, &mut dy[..nc])?;
        }
        let c = model.coeffs_at(t, yc)?;
        let u = Complex64::new(ys[0], ys[1]);
        let v = Complex64::new(ys[2], ys[3]);
        let k = 2.0 * c.t_abs;
        let du = -Complex64::i() * (c.w * u + k * Complex64::from_polar(1.0, -c.phi_t) * v);
        let dv = Complex64::i() * (c.w * v + k * Complex64::from_polar(1.0, c.phi_t) * u);
        dy[nc] = du.re;
        dy[nc + 1] = du.im;
        dy[nc + 2] = dv.re;
        dy[nc + 3] = dv.im;
        Ok(())
    };
    let sol = integrate(
        crate::ode::IvpProblem::new((0.0, cfg.t_max), y0, cfg.grid(), rhs),
        &cfg.ode_options(),
    )?;
    let mut out = OracleSolution {
        times: sol.times,
        u: Vec::with_capacity(sol.states.len()),
        v: Vec::with_capacity(sol.states.len()),
    };
    for y in &sol.states {
        out.u.push(Complex64::new(y[nc], y[nc + 1]));
        out.v.push(Complex64::new(y[nc + 2], y[nc + 3]));
    }
    Ok(out)
}
