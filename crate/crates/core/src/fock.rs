//! Dense truncated-Fock-space realisations of the Dyson map, the metric and
//! both Hamiltonians, used as brute-force oracles for the algebra.
//!
//! States are trusted while their population in the top [`EDGE_LEVELS`]
//! stays below [`EDGE_THRESHOLD`]. Operator identities involving the
//! non-unitary map are compared on a leading block well below the edge
//! ([`COMPARISON_BLOCK`] for the default dimension), because the map
//! amplifies the truncation error at level `n` roughly like `Lambda^{n/2}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dyson::{gauss_coefficients, sinhc, DysonState};
use crate::dynamics::EvolveConfig;
use crate::error::{Error, Result};
use crate::hermitian::{ConstraintState, ConstraintSystem, HermitizedCoeffs};
use crate::model::DriveParams;
use crate::ode::{integrate, IvpOptions, IvpProblem};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Levels excluded from comparisons at the top of the truncated space.
pub const EDGE_LEVELS: usize = 10;
/// Largest edge population for which a truncated result is trusted.
pub const EDGE_THRESHOLD: f64 = 1e-12;
/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 128;
/// Leading block used for operator comparisons at [`DEFAULT_DIM`].
pub const COMPARISON_BLOCK: usize = 40;
/// Largest 1-norm accepted by [`matrix_exponential`].
pub const MAX_EXPM_NORM: f64 = 1e3;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Ladder operators on `span{|0>, ..., |dim-1>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace {
    pub dim: usize,
    pub a: CMatrix,
    pub adag: CMatrix,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < EDGE_LEVELS + 4 {
            return Err(Error::Validation(format!(
                "Fock dimension {dim} too small (need at least {})",
                EDGE_LEVELS + 4
            )));
        }
        let mut a = CMatrix::zeros(dim, dim);
        for n in 1..dim {
            a[(n - 1, n)] = c((n as f64).sqrt());
        }
        let adag = a.adjoint();
        Ok(FockSpace { dim, a, adag })
    }

    /// Levels below the edge.
    pub fn trusted(&self) -> usize {
        self.dim - EDGE_LEVELS
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim, self.dim)
    }

    /// `a+ a + 1/2`.
    pub fn number_half(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.dim, |n, _| c(n as f64 + 0.5)))
    }

    pub fn number(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.dim, |n, _| c(n as f64)))
    }

    pub fn a2(&self) -> CMatrix {
        &self.a * &self.a
    }

    pub fn adag2(&self) -> CMatrix {
        &self.adag * &self.adag
    }

    pub fn k0(&self) -> CMatrix {
        self.number_half() * c(0.5)
    }

    pub fn kplus(&self) -> CMatrix {
        self.adag2() * c(0.5)
    }

    pub fn kminus(&self) -> CMatrix {
        self.a2() * c(0.5)
    }

    /// Drive Hamiltonian `omega (a+a + 1/2) + alpha a^2 + beta a+^2` at `t`.
    pub fn hamiltonian(&self, p: &DriveParams, t: f64) -> CMatrix {
        self.number_half() * c(p.omega(t))
            + self.a2() * p.alpha_cartesian(t)
            + self.adag2() * p.beta_cartesian(t)
    }

    /// Counterpart `W (a+a + 1/2) + T a^2 + V a+^2`.
    pub fn counterpart(&self, h: &HermitizedCoeffs) -> CMatrix {
        self.number_half() * h.w_c + self.a2() * h.t_c + self.adag2() * h.v_c
    }
}

/// A truncated state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    pub amplitudes: CVector,
    pub edge_population: f64,
}

impl TruncatedState {
    pub fn from_amplitudes(amplitudes: CVector) -> Self {
        let dim = amplitudes.len();
        let edge_population = amplitudes
            .iter()
            .skip(dim.saturating_sub(EDGE_LEVELS))
            .map(|x| x.norm_sqr())
            .sum();
        TruncatedState {
            amplitudes,
            edge_population,
        }
    }

    pub fn vacuum(dim: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[0] = c(1.0);
        Self::from_amplitudes(v)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_trusted(&self) -> bool {
        self.edge_population < EDGE_THRESHOLD
    }

    /// `<a+ a>`.
    pub fn number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, x)| n as f64 * x.norm_sqr())
            .sum()
    }

    /// `<a^2>`.
    pub fn a2(&self) -> Complex64 {
        let psi = &self.amplitudes;
        (0..psi.len().saturating_sub(2))
            .map(|n| psi[n].conj() * psi[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt())
            .sum()
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Pade(13) numerator coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.37;

/// `exp(M)` by scaling and squaring with the degree-13 Pade approximant.
pub fn matrix_exponential(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Validation("matrix exponential of a non-square matrix".into()));
    }
    if !m.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::NormTooLarge(f64::INFINITY));
    }
    let norm = one_norm(m);
    if norm > MAX_EXPM_NORM {
        return Err(Error::NormTooLarge(norm));
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * c(0.5f64.powi(s));
    let id = CMatrix::identity(n, n);
    let b = |k: usize| c(PADE13[k]);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or(Error::NormTooLarge(norm))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// How [`eta_matrix`] builds the Dyson map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaForm {
    /// `exp` of the quadratic generator.
    Exponential,
    /// Product `exp(lambda K+) exp(ln Lambda K0) exp(lambda* K-)`.
    GaussProduct,
}

/// Generator `eps (a+a + 1/2) + mu a^2 + mu* a+^2`.
pub fn eta_generator(eps_map: f64, mu: Complex64, f: &FockSpace) -> CMatrix {
    f.number_half() * c(eps_map) + f.a2() * mu + f.adag2() * mu.conj()
}

/// `exp(x a+^2 / 2)`, exact on the truncated space (lower triangular).
fn exp_kplus(x: Complex64, dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        let mut e = c(1.0);
        m[(n, n)] = e;
        let mut k = 1;
        while n + 2 * k < dim {
            let top = (n + 2 * k) as f64;
            e = e * x * 0.5 / k as f64 * (top * (top - 1.0)).sqrt();
            m[(n + 2 * k, n)] = e;
            k += 1;
        }
    }
    m
}

/// `exp(x a^2 / 2)`, exact on the truncated space (upper triangular).
fn exp_kminus(x: Complex64, dim: usize) -> CMatrix {
    exp_kplus(x, dim).transpose()
}

/// `exp(y K0)` for real `y`.
fn exp_k0(y: f64, dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_fn(dim, |n, _| c((0.5 * y * (n as f64 + 0.5)).exp())))
}

/// Whether the map admits a convergent normal-ordered form, and the edge
/// population of the normalised `eta |0>`.
fn eta_trust(eps_map: f64, mu: Complex64, dim: usize) -> Result<(Complex64, f64)> {
    let (lambda, big_lambda, xi) = gauss_coefficients(eps_map, mu)?;
    let d = xi.cosh() - eps_map * sinhc(xi);
    if d <= 0.0 {
        return Err(Error::TruncationUntrusted(format!(
            "Gauss denominator {d:e} <= 0: the map has no convergent Fock-space matrix"
        )));
    }
    let col = exp_kplus(lambda, dim).column(0).into_owned() * c(big_lambda.powf(0.25));
    let total: f64 = col.iter().map(|x| x.norm_sqr()).sum();
    let edge: f64 = col.iter().skip(dim - EDGE_LEVELS).map(|x| x.norm_sqr()).sum();
    let edge = edge / total;
    if edge >= EDGE_THRESHOLD {
        return Err(Error::TruncationUntrusted(format!(
            "edge population of eta|0> is {edge:e}"
        )));
    }
    Ok((lambda, big_lambda))
}

/// The Dyson map `exp[eps (a+a + 1/2) + mu a^2 + mu* a+^2]` on `f`.
pub fn eta_matrix(eps_map: f64, mu: Complex64, f: &FockSpace, form: EtaForm) -> Result<CMatrix> {
    let (lambda, big_lambda) = eta_trust(eps_map, mu, f.dim)?;
    match form {
        EtaForm::Exponential => matrix_exponential(&eta_generator(eps_map, mu, f)),
        EtaForm::GaussProduct => Ok(exp_kplus(lambda, f.dim)
            * exp_k0(big_lambda.ln(), f.dim)
            * exp_kminus(lambda.conj(), f.dim)),
    }
}

/// Inverse map, built as the exponential of the negated generator or as the
/// reversed product of negated factors.
pub fn eta_inverse(eps_map: f64, mu: Complex64, f: &FockSpace, form: EtaForm) -> Result<CMatrix> {
    let (lambda, big_lambda) = eta_trust(eps_map, mu, f.dim)?;
    match form {
        EtaForm::Exponential => matrix_exponential(&(eta_generator(eps_map, mu, f) * c(-1.0))),
        EtaForm::GaussProduct => Ok(exp_kminus(-lambda.conj(), f.dim)
            * exp_k0(-big_lambda.ln(), f.dim)
            * exp_kplus(-lambda, f.dim)),
    }
}

/// Dyson map of a state.
pub fn eta_of(d: &DysonState, f: &FockSpace, form: EtaForm) -> Result<CMatrix> {
    eta_matrix(d.eps_map, d.mu(), f, form)
}

/// Metric `Theta = eta+ eta`.
pub fn metric(eta: &CMatrix) -> CMatrix {
    eta.adjoint() * eta
}

/// Frobenius norm of the leading `k x k` block.
pub fn block_norm(m: &CMatrix, k: usize) -> f64 {
    m.view((0, 0), (k, k)).norm()
}

/// `||a - b|| / ||b||` on the leading `k x k` block.
pub fn block_relative_error(a: &CMatrix, b: &CMatrix, k: usize) -> f64 {
    block_norm(&(a - b), k) / block_norm(b, k)
}

/// `||H+ Theta - Theta H - i dTheta/dt||_F / ||Theta||_F` on the leading
/// `k x k` block, with the derivative from a central difference of step `h`.
pub fn quasi_hermiticity_residual(
    ham: &CMatrix,
    theta_minus: &CMatrix,
    theta: &CMatrix,
    theta_plus: &CMatrix,
    h: f64,
    k: usize,
) -> f64 {
    let dtheta = (theta_plus - theta_minus) * c(0.5 / h);
    let r = ham.adjoint() * theta - theta.adjoint() * ham - dtheta * Complex64::i();
    block_norm(&r, k) / block_norm(theta, k)
}

/// Residuals of the time-dependent quasi-Hermiticity relation along an
/// integrated Dyson trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiHermiticity {
    pub t: f64,
    /// With the metric of the integrated map.
    pub residual: f64,
    /// With `Theta = I` (a negative control).
    pub control: f64,
}

/// Integrate the constraint system to `t - h`, `t`, `t + h` (landing exactly
/// on each) and evaluate the quasi-Hermiticity residual at `t` on the
/// leading `block x block` block.
#[allow(clippy::too_many_arguments)]
pub fn quasi_hermiticity_along(
    drive: &DriveParams,
    initial: &ConstraintState,
    guard: f64,
    t: f64,
    h: f64,
    f: &FockSpace,
    block: usize,
    opts: &IvpOptions,
) -> Result<QuasiHermiticity> {
    if !(t - h > 0.0) {
        return Err(Error::Validation(format!("need t - h > 0 (t = {t}, h = {h})")));
    }
    let sys = ConstraintSystem::new(*drive, initial, guard)?;
    let opts = opts.with_land_on_grid(true);
    let states = sys.integrate(initial, 0.0, vec![t - h, t, t + h], &opts)?;
    let mut thetas = Vec::with_capacity(3);
    for s in &states {
        let eta = eta_of(&s.to_dyson()?, f, EtaForm::GaussProduct)?;
        thetas.push(metric(&eta));
    }
    let ham = f.hamiltonian(drive, t);
    let k = block.min(f.trusted());
    let residual = quasi_hermiticity_residual(&ham, &thetas[0], &thetas[1], &thetas[2], h, k);
    let id = f.identity();
    let control = quasi_hermiticity_residual(&ham, &id, &id, &id, h, k);
    Ok(QuasiHermiticity {
        t,
        residual,
        control,
    })
}

/// Result of a truncated Schroedinger propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub times: Vec<f64>,
    pub states: Vec<TruncatedState>,
    /// Index of the first output whose edge population is not trusted.
    pub first_untrusted: Option<usize>,
}

impl Propagation {
    /// The states, or [`Error::TruncationUntrusted`] if any of them leaked
    /// into the edge levels.
    pub fn require_trusted(&self) -> Result<&[TruncatedState]> {
        match self.first_untrusted {
            None => Ok(&self.states),
            Some(i) => Err(Error::TruncationUntrusted(format!(
                "edge population {:e} at t = {}",
                self.states[i].edge_population, self.times[i]
            ))),
        }
    }

    /// Number of outputs before the first untrusted one.
    pub fn trusted_len(&self) -> usize {
        self.first_untrusted.unwrap_or(self.states.len())
    }
}

/// Propagate `psi0` under the Hermitian counterpart of `cfg.model` on the
/// output grid of `cfg`, stopping at the end of the first drive period in
/// which the state becomes untrusted.
pub fn propagate(cfg: &EvolveConfig, psi0: &TruncatedState) -> Result<Propagation> {
    propagate_impl(cfg, psi0, true)
}

/// Like [`propagate`] but covers the whole grid; untrusted outputs are
/// only flagged.
pub fn propagate_flagged(cfg: &EvolveConfig, psi0: &TruncatedState) -> Result<Propagation> {
    propagate_impl(cfg, psi0, false)
}

fn propagate_impl(cfg: &EvolveConfig, psi0: &TruncatedState, stop: bool) -> Result<Propagation> {
    if !psi0.is_trusted() {
        return Err(Error::TruncationUntrusted(format!(
            "initial edge population {:e}",
            psi0.edge_population
        )));
    }
    let dim = psi0.amplitudes.len();
    let model = cfg.model;
    let sys = model.system()?;
    let nc = model.constraint_len();
    let mut y0 = model.constraint_y0();
    y0.extend(psi0.amplitudes.iter().map(|x| x.re));
    y0.extend(psi0.amplitudes.iter().map(|x| x.im));
    let ladder: Vec<f64> = (0..dim)
        .map(|n| if n + 2 < dim { (((n + 1) * (n + 2)) as f64).sqrt() } else { 0.0 })
        .collect();

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (yc, ys) = y.split_at(nc);
        if let Some(sys) = &sys {
            sys.rhs(t, yc, &mut dy[..nc])?;
        }
        let h = model.coeffs_at(t, yc)?;
        let (re, im) = ys.split_at(dim);
        let psi = |n: usize| Complex64::new(re[n], im[n]);
        let t_c = h.t_c;
        let v_c = h.v_c;
        for n in 0..dim {
            let mut acc = psi(n) * (h.w * (n as f64 + 0.5));
            if n + 2 < dim {
                acc += t_c * ladder[n] * psi(n + 2);
            }
            if n >= 2 {
                acc += v_c * ladder[n - 2] * psi(n - 2);
            }
            // i dpsi/dt = h psi
            dy[nc + n] = acc.im;
            dy[nc + dim + n] = -acc.re;
        }
        Ok(())
    };
    // Integrate one drive period at a time so the run can stop once the
    // state leaks into the edge, where high levels only cost steps.
    let grid = cfg.grid();
    let opts = cfg.ode_options();
    let chunk = cfg.points_per_period.max(1);
    let to_state = |y: &[f64]| {
        TruncatedState::from_amplitudes(CVector::from_fn(dim, |n, _| {
            Complex64::new(y[nc + n], y[nc + dim + n])
        }))
    };
    let mut times = vec![grid[0]];
    let mut states = vec![to_state(&y0)];
    let mut first_untrusted = None;
    let mut y = y0;
    let mut start = 0;
    while start + 1 < grid.len() && !(stop && first_untrusted.is_some()) {
        let end = (start + chunk).min(grid.len() - 1);
        let seg = grid[start + 1..=end].to_vec();
        let sol = integrate(
            IvpProblem::new((grid[start], grid[end]), y, seg, |t, y, d| rhs(t, y, d)),
            &opts,
        )?;
        for (t, yy) in sol.times.iter().zip(&sol.states) {
            let s = to_state(yy);
            if first_untrusted.is_none() && !s.is_trusted() {
                first_untrusted = Some(states.len());
            }
            times.push(*t);
            states.push(s);
        }
        y = sol.states.last().cloned().unwrap_or_default();
        start = end;
    }
    Ok(Propagation {
        times,
        states,
        first_untrusted,
    })
}

/// Both sides of the metric expectation identity
/// `<Psi| Theta O |Psi> = <psi| o |psi>` with `Psi = eta^-1 psi`,
/// `O = eta^-1 o eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricExpectation {
    pub metric_side: Complex64,
    pub hermitian_side: Complex64,
    /// `<Psi| Theta |Psi>`
    pub metric_norm: f64,
    /// `<psi|psi>`
    pub hermitian_norm: f64,
}

/// Metric expectation with the inverse computed by LU decomposition.
pub fn nonhermitian_expectation(
    eta: &CMatrix,
    psi: &TruncatedState,
    o: &CMatrix,
) -> Result<MetricExpectation> {
    let inv = eta.clone().try_inverse().ok_or(Error::SingularEta)?;
    nonhermitian_expectation_with_inverse(eta, &inv, psi, o)
}

/// Metric expectation with a supplied inverse (the reversed Gauss product,
/// say, which is exact on the truncated space).
pub fn nonhermitian_expectation_with_inverse(
    eta: &CMatrix,
    inv: &CMatrix,
    psi: &TruncatedState,
    o: &CMatrix,
) -> Result<MetricExpectation> {
    let n = eta.nrows();
    let k = n.saturating_sub(EDGE_LEVELS).min(COMPARISON_BLOCK);
    let defect = block_norm(&(eta * inv - CMatrix::identity(n, n)), k) / (k as f64).sqrt();
    if !defect.is_finite() || defect > 1e-8 {
        return Err(Error::SingularEta);
    }
    let big_psi = inv * &psi.amplitudes;
    let big_o = inv * o * eta;
    let theta = metric(eta);
    let metric_side = big_psi.dotc(&(&theta * &big_o * &big_psi));
    let metric_norm = big_psi.dotc(&(&theta * &big_psi)).re;
    Ok(MetricExpectation {
        metric_side,
        hermitian_side: psi.expectation(o),
        metric_norm,
        hermitian_norm: psi.amplitudes.norm_squared(),
    })
}
