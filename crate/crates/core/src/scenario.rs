//! Scenario configuration, single runs, figure presets and parameter sweeps.
//!
//! Configs are flat `key = value` files. `#` starts a comment and
//! `[section]` headers are accepted but carry no meaning.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    amplification_factor_guarded, analytic_squeeze, bogoliubov_ode_oracle, evolve,
    initial_squeeze_phase, AnalyticMode, CoefficientModel, DysonSource, EvolveConfig,
    Trajectory, DEFAULT_SEED_R, MIN_POINTS_PER_PERIOD,
};
use crate::error::{Error, Result};
use crate::fock::{propagate, TruncatedState, DEFAULT_DIM};
use crate::hermitian::{hermiticity_defect, ApproxDyson, ConstraintState, ConstraintSystem, CHI_GUARD};
use crate::model::{wrap_phase, DriveParams, ZetaMode};

/// Where the Dyson coordinates of a run come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    #[default]
    Approximate,
    Integrated,
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approximate" => Ok(SourceKind::Approximate),
            "integrated" => Ok(SourceKind::Integrated),
            other => Err(Error::Validation(format!("unknown dyson_source '{other}'"))),
        }
    }
}

/// Independent photon-number route written to the `N_oracle` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    None,
    /// Linear mode-mixing equations.
    #[default]
    Bogoliubov,
    /// Truncated Schroedinger propagation.
    Fock,
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(OracleKind::None),
            "bogoliubov" => Ok(OracleKind::Bogoliubov),
            "fock" => Ok(OracleKind::Fock),
            other => Err(Error::Validation(format!("unknown oracle '{other}'"))),
        }
    }
}

/// A CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Column {
    Tau,
    RNumeric,
    RAnalytic,
    PhiNumericRaw,
    PhiAnalyticRaw,
    PhiNumeric,
    PhiAnalytic,
    NNumeric,
    NAnalytic,
    NOracle,
    W,
    TAbs,
    PhiT,
    Phi,
    Chi,
    Varphi,
    ResidualHermiticity,
}

impl Column {
    pub const ALL: [Column; 17] = [
        Column::Tau,
        Column::RNumeric,
        Column::RAnalytic,
        Column::PhiNumericRaw,
        Column::PhiAnalyticRaw,
        Column::PhiNumeric,
        Column::PhiAnalytic,
        Column::NNumeric,
        Column::NAnalytic,
        Column::NOracle,
        Column::W,
        Column::TAbs,
        Column::PhiT,
        Column::Phi,
        Column::Chi,
        Column::Varphi,
        Column::ResidualHermiticity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::Tau => "tau",
            Column::RNumeric => "r_numeric",
            Column::RAnalytic => "r_analytic",
            Column::PhiNumericRaw => "phi_numeric_raw",
            Column::PhiAnalyticRaw => "phi_analytic_raw",
            Column::PhiNumeric => "phi_numeric",
            Column::PhiAnalytic => "phi_analytic",
            Column::NNumeric => "N_numeric",
            Column::NAnalytic => "N_analytic",
            Column::NOracle => "N_oracle",
            Column::W => "W",
            Column::TAbs => "T_abs",
            Column::PhiT => "phi_T",
            Column::Phi => "Phi",
            Column::Chi => "chi",
            Column::Varphi => "varphi",
            Column::ResidualHermiticity => "residual_hermiticity",
        }
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Column::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown output column '{s}'")))
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub drive: DriveParams,
    pub chi: f64,
    pub z_abs: f64,
    pub varphi0: f64,
    pub r0: f64,
    pub phi0_prime: f64,
    pub tau_max: f64,
    pub points_per_period: usize,
    pub dyson_source: SourceKind,
    /// Empty means every column.
    pub outputs: Vec<Column>,
    pub seed_r: f64,
    pub oracle: OracleKind,
    pub fock_dim: usize,
    pub rtol: f64,
    pub atol: f64,
    pub chi_guard: f64,
    pub analytic_mode: AnalyticMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let a = ApproxDyson::default();
        ScenarioConfig {
            drive: DriveParams::default(),
            chi: a.chi,
            z_abs: a.z_abs,
            varphi0: a.varphi0,
            r0: 0.0,
            phi0_prime: 0.0,
            tau_max: 50.0,
            points_per_period: MIN_POINTS_PER_PERIOD,
            dyson_source: SourceKind::Approximate,
            outputs: Vec::new(),
            seed_r: DEFAULT_SEED_R,
            oracle: OracleKind::Bogoliubov,
            fock_dim: DEFAULT_DIM,
            rtol: 1e-11,
            atol: 1e-13,
            chi_guard: CHI_GUARD,
            analytic_mode: AnalyticMode::LongTime,
        }
    }
}

/// Keys accepted by [`ScenarioConfig::set`].
pub const KEYS: [&str; 22] = [
    "omega0",
    "eps_mod",
    "kappa",
    "alpha0_tilde",
    "beta0_tilde",
    "zeta_mode",
    "chi",
    "z_abs",
    "varphi0",
    "r0",
    "phi0_prime",
    "tau_max",
    "points_per_period",
    "dyson_source",
    "outputs",
    "seed_r",
    "oracle",
    "fock_dim",
    "rtol",
    "atol",
    "chi_guard",
    "analytic_mode",
];

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Validation(format!("{key}: cannot parse '{v}' as a number")))
}

impl ScenarioConfig {
    /// Apply one `key = value` assignment without validating the result.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "omega0" => self.drive.omega0 = num(key, v)?,
            "eps_mod" => self.drive.eps_mod = num(key, v)?,
            "kappa" => self.drive.kappa = num(key, v)?,
            "alpha0_tilde" => self.drive.alpha0_tilde = num(key, v)?,
            "beta0_tilde" => self.drive.beta0_tilde = num(key, v)?,
            "zeta_mode" => self.drive.zeta_mode = v.parse::<ZetaMode>()?,
            "chi" => self.chi = num(key, v)?,
            "z_abs" => self.z_abs = num(key, v)?,
            "varphi0" => self.varphi0 = num(key, v)?,
            "r0" => self.r0 = num(key, v)?,
            "phi0_prime" => self.phi0_prime = num(key, v)?,
            "tau_max" => self.tau_max = num(key, v)?,
            "points_per_period" => self.points_per_period = num(key, v)?,
            "dyson_source" => self.dyson_source = v.parse()?,
            "outputs" => {
                self.outputs = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "seed_r" => self.seed_r = num(key, v)?,
            "oracle" => self.oracle = v.parse()?,
            "fock_dim" => self.fock_dim = num(key, v)?,
            "rtol" => self.rtol = num(key, v)?,
            "atol" => self.atol = num(key, v)?,
            "chi_guard" => self.chi_guard = num(key, v)?,
            "analytic_mode" => self.analytic_mode = v.parse()?,
            other => return Err(Error::Validation(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Whether `key` takes a plain number (and can be swept).
    pub fn is_numeric_key(key: &str) -> bool {
        KEYS.contains(&key)
            && !matches!(
                key,
                "zeta_mode" | "dyson_source" | "outputs" | "oracle" | "analytic_mode"
            )
    }

    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        let finite = [
            self.chi,
            self.z_abs,
            self.varphi0,
            self.r0,
            self.phi0_prime,
            self.tau_max,
            self.seed_r,
            self.rtol,
            self.atol,
            self.chi_guard,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Validation("all numeric settings must be finite".into()));
        }
        if self.tau_max <= 0.0 {
            return Err(Error::Validation(format!("tau_max = {} must be > 0", self.tau_max)));
        }
        if self.points_per_period < MIN_POINTS_PER_PERIOD {
            return Err(Error::Validation(format!(
                "points_per_period = {} must be >= {MIN_POINTS_PER_PERIOD}",
                self.points_per_period
            )));
        }
        if !(self.z_abs > 0.0 && self.z_abs <= 1.0) {
            return Err(Error::Validation(format!("z_abs = {} must be in (0, 1]", self.z_abs)));
        }
        if self.chi_guard <= 0.0 || (self.chi - 1.0).abs() <= self.chi_guard {
            return Err(Error::Validation(format!(
                "chi = {} must differ from 1 by more than chi_guard = {:e} > 0",
                self.chi, self.chi_guard
            )));
        }
        if self.r0 < 0.0 || self.seed_r <= 0.0 {
            return Err(Error::Validation("r0 must be >= 0 and seed_r > 0".into()));
        }
        if self.rtol <= 0.0 || self.atol <= 0.0 {
            return Err(Error::Validation("rtol and atol must be > 0".into()));
        }
        if self.oracle == OracleKind::Fock && self.fock_dim < 16 {
            return Err(Error::Validation(format!("fock_dim = {} must be >= 16", self.fock_dim)));
        }
        Ok(())
    }

    /// Selected columns in declared order, dropping `N_oracle` when no
    /// oracle runs.
    pub fn columns(&self) -> Vec<Column> {
        let cols: Vec<Column> = if self.outputs.is_empty() {
            Column::ALL.to_vec()
        } else {
            self.outputs.clone()
        };
        cols.into_iter()
            .filter(|c| *c != Column::NOracle || self.oracle != OracleKind::None)
            .collect()
    }

    /// Approximate-map parameters.
    pub fn approx(&self) -> ApproxDyson {
        ApproxDyson {
            chi: self.chi,
            z_abs: self.z_abs,
            varphi0: self.varphi0,
        }
    }

    /// Dyson coordinates at `t = 0`.
    pub fn initial_constraint(&self) -> ConstraintState {
        self.approx().constraint_state(&self.drive, 0.0)
    }

    pub fn coefficient_model(&self) -> CoefficientModel {
        let source = match self.dyson_source {
            SourceKind::Approximate => DysonSource::Approximate(self.approx()),
            SourceKind::Integrated => DysonSource::Integrated(self.initial_constraint()),
        };
        CoefficientModel {
            drive: self.drive,
            source,
            guard: self.chi_guard,
        }
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        let mut cfg = EvolveConfig::new(self.coefficient_model(), self.tau_max);
        cfg.r0 = self.r0;
        cfg.phi0 = self.initial_phi();
        cfg.seed_r = self.seed_r;
        cfg.points_per_period = self.points_per_period;
        cfg.rtol = self.rtol;
        cfg.atol = self.atol;
        cfg
    }

    /// Initial squeeze phase matching `phi0_prime`.
    pub fn initial_phi(&self) -> f64 {
        initial_squeeze_phase(
            self.phi0_prime,
            self.chi,
            self.drive.alpha0_tilde,
            self.drive.beta0_tilde,
        )
    }

    pub fn amplification(&self) -> Result<f64> {
        amplification_factor_guarded(
            self.drive.alpha0_tilde,
            self.drive.beta0_tilde,
            self.chi,
            self.chi_guard,
        )
    }
}

/// Parse a config on top of the defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_config_over(text, ScenarioConfig::default())
}

/// Parse a config on top of `base` (a preset, say).
pub fn parse_config_over(text: &str, base: ScenarioConfig) -> Result<ScenarioConfig> {
    let mut cfg = base;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("malformed section header '{line}'"),
                });
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'key = value', found '{line}'"),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key '{key}'"),
            });
        }
        cfg.set(key, value).map_err(|e| match e {
            Error::Validation(message) => Error::Parse {
                line: line_no,
                message,
            },
            other => other,
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Headline numbers of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunSummary {
    pub final_tau: f64,
    pub final_r: f64,
    pub final_n: f64,
    /// `None` when `chi` is within the guard of 1.
    pub amplification: Option<f64>,
    pub max_identity_defect: f64,
    pub max_residual_hermiticity: f64,
    /// Largest `|N_numeric - N_oracle| / max(N, 1e-6)` over rows where the
    /// oracle is trusted.
    pub oracle_max_rel_diff: Option<f64>,
}

/// Outcome of one run. Simulation failures are recorded in `error` rather
/// than returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub config: ScenarioConfig,
    pub summary: Option<RunSummary>,
    pub header: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// Values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// The time series as CSV text.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_number(&mut out, *x);
            }
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, round-trip safe, locale independent.
fn write_number(out: &mut String, x: f64) {
    if x.is_nan() {
        out.push_str("NaN");
    } else {
        let _ = write!(out, "{x:.16e}");
    }
}

struct Series {
    n_oracle: Vec<f64>,
    residual: Vec<f64>,
}

fn oracle_series(cfg: &ScenarioConfig, ecfg: &EvolveConfig, traj: &Trajectory) -> Result<Vec<f64>> {
    let n = traj.len();
    match cfg.oracle {
        OracleKind::None => Ok(vec![f64::NAN; n]),
        OracleKind::Bogoliubov => {
            let mut oc = *ecfg;
            oc.r0 = 0.0;
            Ok(bogoliubov_ode_oracle(&oc)?.photon_number())
        }
        OracleKind::Fock => {
            let prop = propagate(ecfg, &TruncatedState::vacuum(cfg.fock_dim))?;
            let window = cfg.fock_dim as f64 / 20.0;
            Ok((0..n)
                .map(|i| {
                    if i < prop.trusted_len() && traj.photon_number[i] <= window {
                        prop.states[i].number()
                    } else {
                        f64::NAN
                    }
                })
                .collect())
        }
    }
}

fn residual_series(cfg: &ScenarioConfig, traj: &Trajectory) -> Result<Vec<f64>> {
    let model = cfg.coefficient_model();
    let sys: Option<ConstraintSystem> = model.system()?;
    traj.times
        .iter()
        .zip(&traj.constraint)
        .map(|(t, s)| {
            let rates = model.rates_at(sys.as_ref(), *t, &ConstraintSystem::pack(s))?;
            let (im_w, v_t) = hermiticity_defect(s, &cfg.drive, *t, &rates)?;
            Ok(im_w.max(v_t))
        })
        .collect()
}

fn simulate(cfg: &ScenarioConfig) -> Result<(Vec<Vec<f64>>, RunSummary)> {
    let ecfg = cfg.evolve_config();
    let traj = evolve(&ecfg)?;
    let extra = Series {
        n_oracle: oracle_series(cfg, &ecfg, &traj)?,
        residual: residual_series(cfg, &traj)?,
    };
    let cols = cfg.columns();
    let r_start = ecfg.initial_squeeze().r;
    let mut rows = Vec::with_capacity(traj.len());
    let mut oracle_diff: Option<f64> = None;
    for i in 0..traj.len() {
        let t = traj.times[i];
        let s = &traj.squeeze[i];
        let cs = &traj.constraint[i];
        let c = &traj.coeffs[i];
        let (ra, pa) = analytic_squeeze(t, &cfg.drive, cfg.chi, r_start, cfg.phi0_prime, cfg.analytic_mode)
            .unwrap_or((f64::NAN, f64::NAN));
        let n_num = traj.photon_number[i];
        let n_or = extra.n_oracle[i];
        if n_or.is_finite() {
            let d = (n_num - n_or).abs() / n_num.max(1e-6);
            oracle_diff = Some(oracle_diff.map_or(d, |x| x.max(d)));
        }
        let row = cols
            .iter()
            .map(|col| match col {
                Column::Tau => t,
                Column::RNumeric => s.r,
                Column::RAnalytic => ra,
                Column::PhiNumericRaw => s.phi,
                Column::PhiAnalyticRaw => pa,
                Column::PhiNumeric => wrap_phase(s.phi),
                Column::PhiAnalytic => wrap_phase(pa),
                Column::NNumeric => n_num,
                Column::NAnalytic => ra.sinh().powi(2),
                Column::NOracle => n_or,
                Column::W => c.w,
                Column::TAbs => c.t_abs,
                Column::PhiT => c.phi_t,
                Column::Phi => cs.big_phi,
                Column::Chi => cs.chi(),
                Column::Varphi => cs.varphi,
                Column::ResidualHermiticity => extra.residual[i],
            })
            .collect();
        rows.push(row);
    }
    let last = traj.len() - 1;
    let summary = RunSummary {
        final_tau: traj.times[last],
        final_r: traj.squeeze[last].r,
        final_n: traj.photon_number[last],
        amplification: cfg.amplification().ok(),
        max_identity_defect: traj.max_identity_defect(),
        max_residual_hermiticity: extra.residual.iter().copied().fold(0.0, f64::max),
        oracle_max_rel_diff: oracle_diff,
    };
    Ok((rows, summary))
}

/// Run one scenario.
pub fn run(cfg: &ScenarioConfig, label: &str) -> RunRecord {
    let start = Instant::now();
    let header = cfg.columns().iter().map(|c| c.name().to_string()).collect();
    let outcome = cfg.validate().and_then(|_| simulate(cfg));
    let (rows, summary, error) = match outcome {
        Ok((rows, s)) => (rows, Some(s), None),
        Err(e) => (Vec::new(), None, Some(e.to_string())),
    };
    RunRecord {
        label: label.to_string(),
        config: cfg.clone(),
        summary,
        header,
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
        error,
    }
}

/// Figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(Error::Validation(format!("unknown preset '{other}'"))),
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    /// Base config that a user file is layered on.
    pub fn base(self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        if self == Preset::Fig3 {
            cfg.tau_max = 25.0;
        }
        cfg
    }

    /// Labelled series making up the figure, derived from `cfg`.
    pub fn series(self, cfg: &ScenarioConfig) -> Vec<(String, ScenarioConfig)> {
        match self {
            Preset::Fig1 | Preset::Fig2 => vec![(self.name().to_string(), cfg.clone())],
            Preset::Fig3 => {
                let mut b3 = cfg.clone();
                b3.drive.beta0_tilde = 1e-3;
                let mut b4 = cfg.clone();
                b4.drive.beta0_tilde = 1e-4;
                let mut herm = cfg.clone();
                herm.drive.alpha0_tilde = 1.0;
                herm.drive.beta0_tilde = 1.0;
                vec![
                    ("fig3_beta1e-3".to_string(), b3),
                    ("fig3_beta1e-4".to_string(), b4),
                    ("fig3_hermitian".to_string(), herm),
                ]
            }
        }
    }

    /// Gnuplot script for the CSV files named in `labels`.
    pub fn plot_script(self, labels: &[String]) -> String {
        let head = "set datafile separator ','\nset datafile columnheaders\nset xlabel 'tau'\n";
        match self {
            Preset::Fig1 => format!(
                "{head}set ylabel 'phi'\nset terminal pngcairo\nset output 'fig1.png'\n\
                 plot '{0}.csv' using (column('tau')):(column('phi_numeric_raw')) with lines title 'numerical', \\\n     \
                 '{0}.csv' using (column('tau')):(column('phi_analytic_raw')) with lines dt 2 title 'analytical'\n",
                labels[0]
            ),
            Preset::Fig2 => format!(
                "{head}set ylabel 'r'\nset terminal pngcairo\nset output 'fig2.png'\n\
                 plot '{0}.csv' using (column('tau')):(column('r_numeric')) with lines title 'numerical', \\\n     \
                 '{0}.csv' using (column('tau')):(column('r_analytic')) with lines dt 2 title 'analytical'\n",
                labels[0]
            ),
            Preset::Fig3 => format!(
                "{head}set ylabel 'N'\nset terminal pngcairo\nset output 'fig3.png'\nset logscale y\n\
                 set multiplot\n\
                 plot '{0}.csv' using (column('tau')):(column('N_numeric')) with lines title 'beta0 = 1e-3', \\\n     \
                 '{1}.csv' using (column('tau')):(column('N_numeric')) with lines dt 3 title 'beta0 = 1e-4'\n\
                 set origin 0.15, 0.5\nset size 0.4, 0.4\nunset logscale y\nunset xlabel\nunset ylabel\n\
                 plot '{2}.csv' using (column('tau')):(column('N_numeric')) with lines title 'hermitian'\n\
                 unset multiplot\n",
                labels[0], labels[1], labels[2]
            ),
        }
    }
}

/// Generic script for a non-preset run.
pub fn generic_plot_script(label: &str) -> String {
    format!(
        "set datafile separator ','\nset datafile columnheaders\nset xlabel 'tau'\n\
         set terminal pngcairo\nset output '{label}.png'\nset multiplot layout 2,1\n\
         set ylabel 'r'\nplot '{label}.csv' using (column('tau')):(column('r_numeric')) with lines title 'r'\n\
         set ylabel 'N'\nplot '{label}.csv' using (column('tau')):(column('N_numeric')) with lines title 'N'\n\
         unset multiplot\n"
    )
}

/// Write `<label>.csv` and `<label>.json` into `dir`.
pub fn write_record(dir: &Path, rec: &RunRecord) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", rec.label));
    fs::write(&csv, rec.to_csv())?;
    let json = dir.join(format!("{}.json", rec.label));
    let text = serde_json::to_string_pretty(rec).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&json, text)?;
    Ok(vec![csv, json])
}

/// Run a preset (or a plain config when `preset` is `None`) and write its
/// CSV, JSON and plot files into `dir`.
pub fn run_to_dir(cfg: &ScenarioConfig, preset: Option<Preset>, dir: &Path) -> Result<Vec<RunRecord>> {
    let (series, script, script_name) = match preset {
        Some(p) => {
            let series = p.series(cfg);
            let labels: Vec<String> = series.iter().map(|(l, _)| l.clone()).collect();
            (series, p.plot_script(&labels), format!("{}.gp", p.name()))
        }
        None => (
            vec![("run".to_string(), cfg.clone())],
            generic_plot_script("run"),
            "run.gp".to_string(),
        ),
    };
    let records: Vec<RunRecord> = series.iter().map(|(l, c)| run(c, l)).collect();
    for rec in &records {
        write_record(dir, rec)?;
    }
    fs::write(dir.join(script_name), script)?;
    Ok(records)
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub amplification: Option<f64>,
    pub final_r: Option<f64>,
    pub final_n: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: String,
    pub records: Vec<RunRecord>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn summary_csv(&self) -> String {
        let mut out = format!("{},amplification,r_final,N_final,status\n", self.axis);
        for r in &self.rows {
            out.push_str(&r.value);
            for x in [r.amplification, r.final_r, r.final_n] {
                out.push(',');
                write_number(&mut out, x.unwrap_or(f64::NAN));
            }
            match &r.error {
                None => out.push_str(",ok\n"),
                Some(e) => {
                    let _ = writeln!(out, ",\"failed: {}\"", e.replace('"', "'"));
                }
            }
        }
        out
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }
}

/// Run `base` once per value of `axis`, on up to `workers` threads.
pub fn sweep(base: &ScenarioConfig, axis: &str, values: &[String], workers: usize) -> Result<SweepResult> {
    if !ScenarioConfig::is_numeric_key(axis) {
        return Err(Error::Validation(format!("'{axis}' is not a numeric config key")));
    }
    if values.is_empty() {
        return Err(Error::Validation("sweep needs at least one value".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Validation(e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let label = format!("{axis}_{i:03}");
                let mut cfg = base.clone();
                match cfg.set(axis, v) {
                    Ok(()) => run(&cfg, &label),
                    Err(e) => RunRecord {
                        label,
                        config: cfg,
                        summary: None,
                        header: Vec::new(),
                        rows: Vec::new(),
                        wall_time_s: 0.0,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let rows = values
        .iter()
        .zip(&records)
        .map(|(v, rec)| SweepRow {
            value: v.trim().to_string(),
            amplification: rec.summary.as_ref().and_then(|s| s.amplification),
            final_r: rec.summary.as_ref().map(|s| s.final_r),
            final_n: rec.summary.as_ref().map(|s| s.final_n),
            error: rec.error.clone(),
        })
        .collect();
    Ok(SweepResult {
        axis: axis.to_string(),
        records,
        rows,
    })
}

/// Write per-cell outputs and `sweep_<axis>.csv` into `dir`.
pub fn write_sweep(dir: &Path, res: &SweepResult) -> Result<PathBuf> {
    for rec in &res.records {
        if rec.is_ok() {
            write_record(dir, rec)?;
        }
    }
    let path = dir.join(format!("sweep_{}.csv", res.axis));
    fs::write(&path, res.summary_csv())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("").unwrap(), ScenarioConfig::default());
        assert_eq!(parse_config("# nothing\n\n[drive]\n").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn override_beta() {
        let c = parse_config("beta0_tilde = 1e-4  # dotted line\n").unwrap();
        assert_eq!(c.drive.beta0_tilde, 1e-4);
        assert_eq!(c.drive.alpha0_tilde, 0.01);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(parse_config("eps_mod = 1.5"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("points_per_period = 20"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("tau_max = 0"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("chi = 1"), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert_eq!(
            parse_config("omega0 = 1\nbogus = 3\n"),
            Err(Error::Parse {
                line: 2,
                message: "unknown key 'bogus'".into()
            })
        );
        assert!(matches!(parse_config("\n\nomega0 1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_config("kappa = two"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("[drive"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn enum_keys() {
        let c = parse_config(
            "dyson_source = integrated\noracle = none\nzeta_mode = approximate\n\
             analytic_mode = oscillatory\noutputs = tau, r_numeric, N_oracle",
        )
        .unwrap();
        assert_eq!(c.dyson_source, SourceKind::Integrated);
        assert_eq!(c.drive.zeta_mode, ZetaMode::Approximate);
        assert_eq!(c.analytic_mode, AnalyticMode::Oscillatory);
        assert_eq!(c.columns(), vec![Column::Tau, Column::RNumeric]);
        assert!(parse_config("outputs = tau, nope").is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let mut c = ScenarioConfig::default();
        for k in KEYS {
            let v = match k {
                "zeta_mode" => "exact",
                "dyson_source" => "approximate",
                "outputs" => "tau",
                "oracle" => "bogoliubov",
                "analytic_mode" => "long_time",
                "points_per_period" | "fock_dim" => "256",
                _ => "0.5",
            };
            c.set(k, v).unwrap();
        }
    }

    #[test]
    fn csv_format() {
        let mut s = String::new();
        write_number(&mut s, 0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let mut s = String::new();
        write_number(&mut s, f64::NAN);
        assert_eq!(s, "NaN");
    }

    #[test]
    fn short_run_is_deterministic() {
        let cfg = parse_config("tau_max = 2").unwrap();
        let a = run(&cfg, "a");
        let b = run(&cfg, "b");
        assert!(a.is_ok(), "{:?}", a.error);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.header.len(), 17);
        assert!(a.rows.iter().all(|r| r.len() == a.header.len()));
        let s = a.summary.unwrap();
        assert!((s.amplification.unwrap() - 44.999).abs() < 1e-3);
        assert!(s.oracle_max_rel_diff.unwrap() < 1e-4);
    }

    #[test]
    fn simulation_error_recorded() {
        // The Fig-1 map integrated from its closed-form start crosses chi = 1.
        let cfg = parse_config("dyson_source = integrated\ntau_max = 50").unwrap();
        let rec = run(&cfg, "x");
        assert!(!rec.is_ok());
        assert!(rec.rows.is_empty());
    }

    #[test]
    fn off_resonance_analytic_is_nan() {
        let cfg = parse_config("kappa = 2.1\ntau_max = 1\noracle = none").unwrap();
        let rec = run(&cfg, "x");
        assert!(rec.column("r_analytic").unwrap().iter().all(|x| x.is_nan()));
        assert!(rec.column("N_oracle").is_none());
    }

    #[test]
    fn sweep_rejects_bad_axis() {
        let c = ScenarioConfig::default();
        assert!(sweep(&c, "oracle", &["none".into()], 1).is_err());
        assert!(sweep(&c, "nope", &["1".into()], 1).is_err());
    }

    #[test]
    fn fig3_series() {
        let p = Preset::Fig3;
        let s = p.series(&p.base());
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].1.amplification().unwrap(), 1.0);
        assert!(p.plot_script(&s.iter().map(|x| x.0.clone()).collect::<Vec<_>>()).contains("fig3_hermitian.csv"));
    }
}
