//! Explicit Runge-Kutta integration of real first-order systems.
//!
//! Two methods are available: classical RK4 on a fixed step and the
//! Dormand-Prince 5(4) pair with error control and 4th-order dense output.
//! Complex systems are integrated as real systems of doubled dimension.

use crate::error::{Error, Result};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta. Each output interval is split into
    /// the smallest number of equal sub-steps not exceeding `step`, so every
    /// output time is hit exactly.
    Rk4 { step: f64 },
    /// Dormand-Prince 5(4) with local error control.
    Rk45,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// First trial step for [`Method::Rk45`]. Defaults to 1/100 of the span.
    pub initial_step: Option<f64>,
    /// Upper bound on the adaptive step.
    pub max_step: Option<f64>,
    /// Clip adaptive steps so that every output time is a step endpoint
    /// instead of an interpolated point.
    pub land_on_grid: bool,
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            method: Method::Rk45,
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: None,
            max_step: None,
            land_on_grid: false,
            max_steps: 50_000_000,
        }
    }
}

impl IvpOptions {
    pub fn rk4(step: f64) -> Self {
        IvpOptions {
            method: Method::Rk4 { step },
            ..Default::default()
        }
    }

    pub fn rk45(rtol: f64, atol: f64) -> Self {
        IvpOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn with_initial_step(mut self, h: f64) -> Self {
        self.initial_step = Some(h);
        self
    }

    pub fn with_land_on_grid(mut self, on: bool) -> Self {
        self.land_on_grid = on;
        self
    }
}

/// An initial value problem `y' = f(t, y)`, `y(t0) = y0`, sampled on `grid`.
///
/// The right-hand side writes the derivative into its third argument and
/// may fail; failures abort the integration and are returned unchanged.
pub struct IvpProblem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub grid: Vec<f64>,
    pub rhs: F,
}

impl<F> IvpProblem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(t_span: (f64, f64), y0: Vec<f64>, grid: Vec<f64>, rhs: F) -> Self {
        IvpProblem {
            t0: t_span.0,
            t1: t_span.1,
            y0,
            grid,
            rhs,
        }
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }

    fn validate(&self) -> Result<()> {
        if self.y0.is_empty() {
            return Err(Error::Validation("empty state vector".into()));
        }
        if !(self.t1 > self.t0) {
            return Err(Error::Validation(format!(
                "t1 = {} must exceed t0 = {}",
                self.t1, self.t0
            )));
        }
        let mut prev = self.t0;
        for &g in &self.grid {
            if g < prev || g > self.t1 {
                return Err(Error::Validation(format!(
                    "output time {g} outside [{}, {}] or unsorted",
                    self.t0, self.t1
                )));
            }
            prev = g;
        }
        Ok(())
    }
}

/// Counters collected during integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IvpStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest accepted error ratio `err / (atol + rtol |y|)` (adaptive only).
    pub max_error_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvpSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: IvpStats,
}

impl IvpSolution {
    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(|v| v.as_slice())
    }
}

/// Integrate `problem` and return the state at every output time.
pub fn integrate<F>(mut problem: IvpProblem<F>, opts: &IvpOptions) -> Result<IvpSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    problem.validate()?;
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Validation("rtol and atol must be positive".into()));
    }
    match opts.method {
        Method::Rk4 { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Validation(format!("RK4 step {step} must be positive")));
            }
            rk4(&mut problem, step)
        }
        Method::Rk45 => dopri5(&mut problem, opts),
    }
}

fn check_finite(t: f64, y: &[f64]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState(t))
    }
}

fn rk4<F>(p: &mut IvpProblem<F>, step: f64) -> Result<IvpSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = p.dimension();
    let mut stats = IvpStats::default();
    let mut t = p.t0;
    let mut y = p.y0.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut times = Vec::with_capacity(p.grid.len());
    let mut states = Vec::with_capacity(p.grid.len());

    for &target in &p.grid {
        let span = target - t;
        if span > 0.0 {
            let m = (span / step).ceil().max(1.0) as usize;
            let h = span / m as f64;
            let start = t;
            for i in 0..m {
                let ti = if i == 0 { start } else { start + i as f64 * h };
                (p.rhs)(ti, &y, &mut k1)?;
                for j in 0..n {
                    tmp[j] = y[j] + 0.5 * h * k1[j];
                }
                (p.rhs)(ti + 0.5 * h, &tmp, &mut k2)?;
                for j in 0..n {
                    tmp[j] = y[j] + 0.5 * h * k2[j];
                }
                (p.rhs)(ti + 0.5 * h, &tmp, &mut k3)?;
                for j in 0..n {
                    tmp[j] = y[j] + h * k3[j];
                }
                let tn = if i + 1 == m { target } else { start + (i + 1) as f64 * h };
                (p.rhs)(tn, &tmp, &mut k4)?;
                for j in 0..n {
                    y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                stats.rhs_evals += 4;
                stats.steps += 1;
                check_finite(tn, &y)?;
            }
            t = target;
        }
        times.push(target);
        states.push(y.clone());
    }
    Ok(IvpSolution {
        times,
        states,
        stats,
    })
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output polynomial coefficients (Shampine), rows per stage.
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

fn dopri5<F>(p: &mut IvpProblem<F>, opts: &IvpOptions) -> Result<IvpSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = p.dimension();
    let span = p.t1 - p.t0;
    let h_min = 1e-12 * span;
    let h_max = opts.max_step.unwrap_or(span);
    let mut h = opts.initial_step.unwrap_or(span / 100.0).min(h_max);
    let mut stats = IvpStats::default();

    let mut t = p.t0;
    let mut y = p.y0.clone();
    let mut k = vec![vec![0.0; n]; 7];
    let mut y_new = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let mut times = Vec::with_capacity(p.grid.len());
    let mut states = Vec::with_capacity(p.grid.len());
    let mut next = 0;
    // Output times coinciding with the start.
    while next < p.grid.len() && p.grid[next] <= t {
        times.push(p.grid[next]);
        states.push(y.clone());
        next += 1;
    }

    (p.rhs)(t, &y, &mut k[0])?;
    stats.rhs_evals += 1;
    check_finite(t, &k[0])?;

    let end = p.grid.last().copied().unwrap_or(p.t1);
    while next < p.grid.len() && t < end {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::StepRejected { t, h });
        }
        let mut t_target = end;
        if opts.land_on_grid {
            t_target = p.grid[next];
        }
        let h_free = h;
        let mut clipped = false;
        if t + h >= t_target {
            h = t_target - t;
            clipped = true;
        }
        if h < h_min && !clipped {
            return Err(Error::StepRejected { t, h });
        }

        for s in 1..7 {
            for j in 0..n {
                let mut acc = 0.0;
                for (l, kl) in k.iter().enumerate().take(s) {
                    acc += A[s][l] * kl[j];
                }
                tmp[j] = y[j] + h * acc;
            }
            let ts = if s >= 5 { t + h } else { t + C[s] * h };
            if s == 6 {
                y_new.copy_from_slice(&tmp);
            }
            (p.rhs)(ts, &tmp, &mut k[s])?;
        }
        stats.rhs_evals += 6;

        let mut err: f64 = 0.0;
        for j in 0..n {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[j];
            }
            let scale = opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs());
            err = err.max((h * e).abs() / scale);
        }
        if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
            // Treat as a failed step; shrink hard.
            stats.rejected += 1;
            h *= 0.2;
            if h < h_min {
                return Err(Error::NonFiniteState(t));
            }
            continue;
        }

        if err <= 1.0 {
            let t_new = if clipped { t_target } else { t + h };
            // Emit output times inside (t, t_new].
            while next < p.grid.len() && p.grid[next] <= t_new {
                let tg = p.grid[next];
                if tg == t_new {
                    states.push(y_new.clone());
                } else {
                    let theta = (tg - t) / h;
                    states.push(dense(&y, &k, h, theta));
                }
                times.push(tg);
                next += 1;
            }
            stats.steps += 1;
            stats.max_error_ratio = stats.max_error_ratio.max(err);
            t = t_new;
            y.copy_from_slice(&y_new);
            // FSAL: last stage is f(t_new, y_new).
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let proposed = (h * factor).min(h_max);
            // A step clipped to an output time should not shrink the next one.
            h = if clipped { proposed.max(h_free.min(h_max)) } else { proposed };
        } else {
            stats.rejected += 1;
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
            if h < h_min {
                return Err(Error::StepRejected { t, h });
            }
        }
    }

    Ok(IvpSolution {
        times,
        states,
        stats,
    })
}

fn dense(y: &[f64], k: &[Vec<f64>], h: f64, theta: f64) -> Vec<f64> {
    let powers = [theta, theta * theta, theta.powi(3), theta.powi(4)];
    let mut b = [0.0; 7];
    for s in 0..7 {
        b[s] = P[s].iter().zip(powers.iter()).map(|(c, q)| c * q).sum();
    }
    y.iter()
        .enumerate()
        .map(|(j, yj)| yj + h * (0..7).map(|s| b[s] * k[s][j]).sum::<f64>())
        .collect()
}

/// Uniform grid of `n + 1` points covering `[t0, t1]` with exact endpoints.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| {
            if k == n {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / n as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(t1: f64, opts: &IvpOptions) -> f64 {
        let prob = IvpProblem::new((0.0, t1), vec![1.0], vec![t1], |_t, y, d| {
            d[0] = -y[0];
            Ok(())
        });
        integrate(prob, opts).unwrap().states[0][0]
    }

    fn oscillator(opts: &IvpOptions, periods: f64) -> Vec<f64> {
        let t1 = 2.0 * std::f64::consts::PI * periods;
        let prob = IvpProblem::new((0.0, t1), vec![1.0, 0.0], vec![t1], |_t, y, d| {
            d[0] = y[1];
            d[1] = -y[0];
            Ok(())
        });
        integrate(prob, opts).unwrap().states[0].clone()
    }

    #[test]
    fn exponential_decay_adaptive() {
        let y = decay(1.0, &IvpOptions::rk45(1e-9, 1e-12));
        assert!((y - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn oscillator_one_period() {
        let y = oscillator(&IvpOptions::rk45(1e-9, 1e-12), 1.0);
        assert!((y[0] - 1.0).abs() < 1e-7 && y[1].abs() < 1e-7, "{y:?}");
    }

    #[test]
    fn constant_is_bit_exact() {
        for opts in [IvpOptions::rk45(1e-9, 1e-12), IvpOptions::rk4(0.013)] {
            let grid = uniform_grid(0.0, 3.0, 37);
            let prob = IvpProblem::new((0.0, 3.0), vec![0.1, -7.25], grid, |_t, _y, d| {
                d.fill(0.0);
                Ok(())
            });
            let sol = integrate(prob, &opts).unwrap();
            assert_eq!(sol.states.len(), 38);
            for s in &sol.states {
                assert_eq!(s, &vec![0.1, -7.25]);
            }
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = (-2.0f64).exp();
        let e1 = (decay(2.0, &IvpOptions::rk4(0.2)) - exact).abs();
        let e2 = (decay(2.0, &IvpOptions::rk4(0.1)) - exact).abs();
        let ratio = e1 / e2;
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let err = |rtol: f64| {
            let y = oscillator(&IvpOptions::rk45(rtol, rtol * 1e-3), 5.0);
            ((y[0] - 1.0).powi(2) + y[1].powi(2)).sqrt()
        };
        let (loose, tight) = (err(1e-5), err(1e-7));
        assert!(loose / tight >= 10.0, "{loose} vs {tight}");
    }

    #[test]
    fn dense_output_matches_landing() {
        let grid = uniform_grid(0.0, 10.0, 73);
        let run = |land: bool| {
            let prob = IvpProblem::new((0.0, 10.0), vec![1.0, 0.0], grid.clone(), |_t, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            });
            integrate(prob, &IvpOptions::rk45(1e-10, 1e-13).with_land_on_grid(land)).unwrap()
        };
        let (a, b) = (run(false), run(true));
        for (i, t) in grid.iter().enumerate() {
            assert!((a.states[i][0] - t.cos()).abs() < 1e-8);
            assert!((b.states[i][0] - t.cos()).abs() < 1e-8);
        }
        assert!(b.stats.steps >= 73);
    }

    #[test]
    fn rhs_errors_propagate() {
        let prob = IvpProblem::new((0.0, 1.0), vec![1.0], vec![1.0], |t, _y, d| {
            if t > 0.5 {
                return Err(Error::PhiZero(0.0));
            }
            d[0] = 1.0;
            Ok(())
        });
        assert_eq!(
            integrate(prob, &IvpOptions::default()).unwrap_err(),
            Error::PhiZero(0.0)
        );
    }

    #[test]
    fn nonfinite_state_is_reported() {
        let prob = IvpProblem::new((0.0, 1.0), vec![1.0], vec![1.0], |_t, _y, d| {
            d[0] = f64::NAN;
            Ok(())
        });
        assert!(matches!(
            integrate(prob, &IvpOptions::default()),
            Err(Error::NonFiniteState(_))
        ));
    }

    #[test]
    fn blow_up_underflows_step() {
        // y' = y^2 from y = 1 blows up at t = 1.
        let prob = IvpProblem::new((0.0, 2.0), vec![1.0], vec![2.0], |_t, y, d| {
            d[0] = y[0] * y[0];
            Ok(())
        });
        let err = integrate(prob, &IvpOptions::default()).unwrap_err();
        assert!(
            matches!(err, Error::StepRejected { .. } | Error::NonFiniteState(_)),
            "{err:?}"
        );
    }

    #[test]
    fn rejects_bad_problem() {
        let prob = IvpProblem::new((1.0, 0.0), vec![1.0], vec![], |_t, _y, _d| Ok(()));
        assert!(integrate(prob, &IvpOptions::default()).is_err());
        let prob = IvpProblem::new((0.0, 1.0), vec![1.0], vec![0.5, 0.2], |_t, _y, _d| Ok(()));
        assert!(integrate(prob, &IvpOptions::default()).is_err());
    }
}
