//! Figure presets, parameter sweeps, run configuration and data export.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity_array::{self, ArrayConfig, ArrayInitialState, ArrayModes};
use crate::coherent::{
    max_scan_window, maximize_over_time, InitialAngles, TwoPhotonKet, TwoPhotonPropagator, TwoPhotonState,
    MAX_SCAN_POINTS,
};
use crate::error::{Error, Result};
use crate::fock::{BasisKet, SystemParams};
use crate::metrics;
use crate::open_system::{self, build_liouvillian, coherence_state, default_dt, DecayRates, MomentVector};

pub const SCHEMA_VERSION: &str = "1";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Samples on the time axis of the dissipative figures, spacing 0.5 on [0, 1200].
pub const DYNAMICS_SAMPLES: usize = 2401;
pub const DYNAMICS_T_END: f64 = 1200.0;

/// Named table of numbers plus everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureDataset {
    pub figure: String,
    pub provenance: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureDataset {
    pub fn new(figure: impl Into<String>, columns: Vec<String>) -> Self {
        let mut provenance = BTreeMap::new();
        provenance.insert("schema_version".to_string(), SCHEMA_VERSION.to_string());
        provenance.insert("code_version".to_string(), CODE_VERSION.to_string());
        FigureDataset {
            figure: figure.into(),
            provenance,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Invariant(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::Invariant(format!("non-finite value {bad} in dataset {}", self.figure)));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Builds rows from equally long column series.
    pub fn from_series(figure: impl Into<String>, columns: Vec<String>, series: Vec<Vec<f64>>) -> Result<Self> {
        let mut ds = FigureDataset::new(figure, columns);
        if series.len() != ds.columns.len() {
            return Err(Error::Invariant("series count differs from column count".into()));
        }
        let len = series.first().map_or(0, Vec::len);
        if series.iter().any(|s| s.len() != len) {
            return Err(Error::Invariant("column series differ in length".into()));
        }
        for i in 0..len {
            ds.push_row(series.iter().map(|s| s[i]).collect())?;
        }
        Ok(ds)
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.provenance.insert(key.into(), value.to_string());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig7,
    Fig8,
    Fig9a,
    Fig9b,
    Fig10,
    Fig11,
    Fig12,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9a,
        FigureId::Fig9b,
        FigureId::Fig10,
        FigureId::Fig11,
        FigureId::Fig12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9a => "fig9a",
            FigureId::Fig9b => "fig9b",
            FigureId::Fig10 => "fig10",
            FigureId::Fig11 => "fig11",
            FigureId::Fig12 => "fig12",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::validation(format!("unknown figure id '{s}'")))
    }
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// A two-cavity run: Hamiltonian, reservoir, and the initial state
/// `ε|ψ(θ,φ)⟩⟨ψ| + (1−ε)(cos²θ|20⟩⟨20| + sin²θ|02⟩⟨02|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub rates: DecayRates,
    pub angles: InitialAngles,
    pub epsilon: f64,
}

impl Scenario {
    pub fn closed(params: SystemParams, angles: InitialAngles) -> Self {
        Scenario {
            params,
            rates: DecayRates::none(),
            angles,
            epsilon: 1.0,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.rates == DecayRates::none()
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.rates.validate()?;
        self.angles.validate()?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::validation(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }

    fn mixture(&self) -> Vec<(f64, TwoPhotonState)> {
        let c2 = self.angles.theta.cos().powi(2);
        vec![
            (self.epsilon, self.angles.state()),
            ((1.0 - self.epsilon) * c2, TwoPhotonState::basis(TwoPhotonKet::TwoZero)),
            ((1.0 - self.epsilon) * (1.0 - c2), TwoPhotonState::basis(TwoPhotonKet::ZeroTwo)),
        ]
    }

    /// Integration step used for dissipative runs.
    pub fn step(&self, dt: Option<f64>) -> f64 {
        dt.unwrap_or_else(|| default_dt(&self.params, &self.rates))
    }

    /// `(P20, P11, P02)` at each of `times`.
    pub fn populations(&self, times: &[f64], dt: Option<f64>) -> Result<Vec<[f64; 3]>> {
        self.validate()?;
        if self.is_closed() {
            let prop = TwoPhotonPropagator::new(&self.params)?;
            let mix = self.mixture();
            Ok(times
                .iter()
                .map(|&t| {
                    let mut out = [0.0; 3];
                    for (w, s) in &mix {
                        if *w == 0.0 {
                            continue;
                        }
                        for (o, p) in out.iter_mut().zip(prop.evolve(s, t).populations()) {
                            *o += w * p;
                        }
                    }
                    out
                })
                .collect())
        } else {
            let lv = build_liouvillian(&self.params, &self.rates)?;
            let rho0 = coherence_state(&self.angles, self.epsilon)?;
            let traj = open_system::propagate_trajectory(&lv, &rho0, times, self.step(dt))?;
            Ok(traj
                .iter()
                .map(|r| {
                    [
                        r.population(BasisKet::TwoZero),
                        r.population(BasisKet::OneOne),
                        r.population(BasisKet::ZeroTwo),
                    ]
                })
                .collect())
        }
    }
}

/// Column summary of one scenario: maxima over the window, values at its
/// end, and the time after which P11 stays within 0.01 of its final value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSummary {
    pub max_p11: f64,
    pub max_localised: f64,
    pub final_p11: f64,
    pub final_localised: f64,
    pub settle_time: f64,
}

pub const SUMMARY_COLUMNS: [&str; 5] = ["max_p11", "max_localised", "final_p11", "final_localised", "settle_time"];

pub fn summarize(scenario: &Scenario, t_end: f64, dt: Option<f64>) -> Result<ScenarioSummary> {
    let times = linspace(0.0, t_end, DYNAMICS_SAMPLES);
    let pops = scenario.populations(&times, dt)?;
    let p11: Vec<f64> = pops.iter().map(|p| p[1]).collect();
    let loc: Vec<f64> = pops.iter().map(|p| p[0] + p[2]).collect();
    let (max_p11, max_localised) = if scenario.is_closed() {
        let prop = TwoPhotonPropagator::new(&scenario.params)?;
        let mix = scenario.mixture();
        let pop_at = |t: f64| -> [f64; 3] {
            let mut out = [0.0; 3];
            for (w, s) in &mix {
                for (o, p) in out.iter_mut().zip(prop.evolve(s, t).populations()) {
                    *o += w * p;
                }
            }
            out
        };
        (
            maximize_over_time(|t| pop_at(t)[1], t_end, MAX_SCAN_POINTS).value,
            maximize_over_time(|t| pop_at(t)[0] + pop_at(t)[2], t_end, MAX_SCAN_POINTS).value,
        )
    } else {
        (
            p11.iter().copied().fold(f64::MIN, f64::max),
            loc.iter().copied().fold(f64::MIN, f64::max),
        )
    };
    let final_p11 = *p11.last().unwrap_or(&0.0);
    let settle_idx = p11.iter().rposition(|v| (v - final_p11).abs() > 0.01).map_or(0, |i| i + 1);
    Ok(ScenarioSummary {
        max_p11,
        max_localised,
        final_p11,
        final_localised: *loc.last().unwrap_or(&0.0),
        settle_time: times.get(settle_idx).copied().unwrap_or(0.0),
    })
}

/// max_t P11 over the standard window for closed dynamics.
fn closed_max_p11(params: &SystemParams, s0: &TwoPhotonState) -> Result<f64> {
    Ok(crate::coherent::max_delocalisation(params, s0)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossDamping {
    Off,
    Max,
    Value,
}

impl FromStr for CrossDamping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(CrossDamping::Off),
            "max" => Ok(CrossDamping::Max),
            "value" => Ok(CrossDamping::Value),
            other => Err(Error::validation(format!("cross-damping must be off|max|value, got '{other}'"))),
        }
    }
}

/// Parameters shared by the command-line verbs. Every field is optional so
/// that a file and command-line flags can be layered with [`RunConfig::merge`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub omega1: Option<f64>,
    #[serde(rename = "J")]
    pub coupling: Option<f64>,
    pub k: Option<f64>,
    pub delta: Option<f64>,
    pub chi1: Option<f64>,
    pub chi2: Option<f64>,
    pub gamma11: Option<f64>,
    pub gamma22: Option<f64>,
    pub cross_damping: Option<CrossDamping>,
    pub gamma12: Option<f64>,
    pub gamma21: Option<f64>,
    pub gamma_d: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub s: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub variable: Option<SweepVariable>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident; $($f:ident),*) => {
        RunConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Values set in `over` win.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        let base = self;
        merge_fields!(base, over; omega1, coupling, k, delta, chi1, chi2, gamma11, gamma22, cross_damping,
            gamma12, gamma21, gamma_d, theta, phi, epsilon, n, r, s, t_end, dt, variable, start, stop, count, values)
    }

    /// Deformed model with χ_m = ω_m k and ω₂ = ω₁ − Δ, unless χ₁ or χ₂ is
    /// given, in which case the Kerr model with linear coupling is used.
    pub fn system_params(&self) -> Result<SystemParams> {
        let omega1 = self.omega1.unwrap_or(1.0);
        let delta = self.delta.unwrap_or(0.0);
        let coupling = self.coupling.unwrap_or(0.05);
        let p = if self.chi1.is_some() || self.chi2.is_some() {
            if self.k.is_some_and(|k| k != 0.0) {
                return Err(Error::validation("give either k or chi1/chi2, not both"));
            }
            SystemParams::kerr(
                omega1,
                omega1 - delta,
                self.chi1.unwrap_or(0.0),
                self.chi2.unwrap_or(0.0),
                coupling,
            )
        } else {
            SystemParams::deformed_detuned(omega1, delta, self.k.unwrap_or(0.0), coupling)
        };
        p.validate()?;
        Ok(p)
    }

    pub fn decay_rates(&self) -> Result<DecayRates> {
        let g11 = self.gamma11.unwrap_or(0.0);
        let g22 = self.gamma22.unwrap_or(0.0);
        let (g12, g21) = match self.cross_damping.unwrap_or(CrossDamping::Off) {
            CrossDamping::Off => (0.0, 0.0),
            CrossDamping::Max => {
                let c = (g11 * g22).sqrt();
                (c, c)
            }
            CrossDamping::Value => match (self.gamma12, self.gamma21) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) | (None, Some(a)) => (a, a),
                (None, None) => {
                    return Err(Error::validation("cross-damping 'value' needs gamma12 and/or gamma21"));
                }
            },
        };
        let rates = DecayRates {
            gamma11: g11,
            gamma22: g22,
            gamma12: g12,
            gamma21: g21,
            gamma_d: self.gamma_d.unwrap_or(0.0),
        };
        rates.validate()?;
        Ok(rates)
    }

    pub fn angles(&self) -> Result<InitialAngles> {
        InitialAngles::new(self.theta.unwrap_or(FRAC_PI_4), self.phi.unwrap_or(0.0))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let s = Scenario {
            params: self.system_params()?,
            rates: self.decay_rates()?,
            angles: self.angles()?,
            epsilon: self.epsilon.unwrap_or(1.0),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(self.n.unwrap_or(29), self.omega1.unwrap_or(1.0), self.coupling.unwrap_or(0.1))
    }

    pub fn array_initial(&self) -> Result<ArrayInitialState> {
        ArrayInitialState::new(
            self.r.unwrap_or(15),
            self.s.unwrap_or(16),
            self.theta.unwrap_or(FRAC_PI_4),
            self.phi.unwrap_or(0.0),
        )
    }

    fn t_end_for(&self, scenario: &Scenario) -> Result<f64> {
        let t = match self.t_end {
            Some(t) => t,
            None if scenario.is_closed() => max_scan_window(&scenario.params),
            None => DYNAMICS_T_END,
        };
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::validation(format!("t-end must be positive, got {t}")));
        }
        Ok(t)
    }

    fn record(&self, ds: &mut FigureDataset) {
        if let Ok(serde_json::Value::Object(mut map)) = serde_json::to_value(self) {
            map.retain(|_, v| !v.is_null());
            ds.note("config", serde_json::Value::Object(map));
        }
    }
}

fn record_scenario(ds: &mut FigureDataset, prefix: &str, s: &Scenario) {
    let p = &s.params;
    let r = &s.rates;
    for (key, value) in [
        ("omega1", p.omega1),
        ("omega2", p.omega2),
        ("chi1", p.chi1),
        ("chi2", p.chi2),
        ("k", p.k),
        ("J", p.coupling),
        ("gamma11", r.gamma11),
        ("gamma22", r.gamma22),
        ("gamma12", r.gamma12),
        ("gamma21", r.gamma21),
        ("gamma_d", r.gamma_d),
        ("theta", s.angles.theta),
        ("phi", s.angles.phi),
        ("epsilon", s.epsilon),
    ] {
        ds.note(format!("{prefix}{key}"), value);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Delta,
    Epsilon,
    Time,
    K,
    GammaD,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Delta => "delta",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::Time => "time",
            SweepVariable::K => "k",
            SweepVariable::GammaD => "gamma_d",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "delta" => Ok(SweepVariable::Delta),
            "epsilon" => Ok(SweepVariable::Epsilon),
            "time" | "t" => Ok(SweepVariable::Time),
            "k" => Ok(SweepVariable::K),
            "gamma_d" => Ok(SweepVariable::GammaD),
            other => Err(Error::validation(format!(
                "sweep variable must be delta|epsilon|time|k|gamma_d, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepRange {
    Linear { start: f64, stop: f64, count: usize },
    Values(Vec<f64>),
}

impl SweepRange {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            SweepRange::Linear { start, stop, count } => {
                if *count < 2 {
                    return Err(Error::validation(format!("sweep count must be >= 2, got {count}")));
                }
                if !(start < stop) || !start.is_finite() || !stop.is_finite() {
                    return Err(Error::validation(format!("sweep needs start < stop, got {start}..{stop}")));
                }
                Ok(linspace(*start, *stop, *count))
            }
            SweepRange::Values(v) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::validation("explicit sweep values must be finite and non-empty"));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub range: SweepRange,
    pub base: RunConfig,
}

impl SweepSpec {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let variable = cfg
            .variable
            .ok_or_else(|| Error::validation("sweep needs a variable (delta|epsilon|time|k|gamma_d)"))?;
        let range = match (&cfg.values, cfg.start, cfg.stop, cfg.count) {
            (Some(v), _, _, _) => SweepRange::Values(v.clone()),
            (None, Some(start), Some(stop), Some(count)) => SweepRange::Linear { start, stop, count },
            _ => return Err(Error::validation("sweep needs explicit values or start, stop and count")),
        };
        Ok(SweepSpec {
            variable,
            range,
            base: cfg.clone(),
        })
    }
}

/// One row per sweep point. Time sweeps tabulate populations; the other
/// variables tabulate [`summarize`] for each point, evaluated in parallel.
pub fn run_sweep(spec: &SweepSpec) -> Result<FigureDataset> {
    let points = spec.range.points()?;
    let var = spec.variable.name();
    let mut ds = if spec.variable == SweepVariable::Time {
        if points.windows(2).any(|w| w[1] < w[0]) || points[0] < 0.0 {
            return Err(Error::validation("time sweep points must be non-negative and non-decreasing"));
        }
        let scenario = spec.base.scenario()?;
        let pops = scenario.populations(&points, spec.base.dt)?;
        let columns = ["time", "p20", "p11", "p02", "p_localised"].map(String::from).to_vec();
        let mut ds = FigureDataset::new("sweep", columns);
        for (t, p) in points.iter().zip(pops) {
            ds.push_row(vec![*t, p[0], p[1], p[2], p[0] + p[2]])?;
        }
        if !scenario.is_closed() {
            ds.note("dt", scenario.step(spec.base.dt));
        }
        ds
    } else {
        let rows: Vec<Result<Vec<f64>>> = points
            .par_iter()
            .map(|&x| {
                let mut cfg = spec.base.clone();
                match spec.variable {
                    SweepVariable::Delta => cfg.delta = Some(x),
                    SweepVariable::Epsilon => cfg.epsilon = Some(x),
                    SweepVariable::K => cfg.k = Some(x),
                    SweepVariable::GammaD => cfg.gamma_d = Some(x),
                    SweepVariable::Time => unreachable!(),
                }
                let scenario = cfg.scenario()?;
                let t_end = cfg.t_end_for(&scenario)?;
                let s = summarize(&scenario, t_end, cfg.dt)?;
                Ok(vec![
                    x,
                    s.max_p11,
                    s.max_localised,
                    s.final_p11,
                    s.final_localised,
                    s.settle_time,
                ])
            })
            .collect();
        let mut columns = vec![var.to_string()];
        columns.extend(SUMMARY_COLUMNS.iter().map(|c| c.to_string()));
        let mut ds = FigureDataset::new("sweep", columns);
        for row in rows {
            ds.push_row(row?)?;
        }
        ds
    };
    ds.note("sweep_variable", var);
    ds.note("sweep_points", points.len());
    spec.base.record(&mut ds);
    Ok(ds)
}

/// Closed-system population trajectory on `[0, t_end]`.
pub fn run_evolve(cfg: &RunConfig) -> Result<FigureDataset> {
    let scenario = cfg.scenario()?;
    if !scenario.is_closed() {
        return Err(Error::validation("evolve is for closed dynamics; use master for decay or dephasing"));
    }
    let t_end = cfg.t_end_for(&scenario)?;
    let step = cfg.dt.unwrap_or(t_end / (DYNAMICS_SAMPLES - 1) as f64);
    if !(step > 0.0) {
        return Err(Error::validation(format!("dt must be positive, got {step}")));
    }
    let count = (t_end / step).round() as usize + 1;
    let times = linspace(0.0, t_end, count.max(2));
    let pops = scenario.populations(&times, None)?;
    let columns = ["t", "p20", "p11", "p02", "p_localised"].map(String::from).to_vec();
    let mut ds = FigureDataset::new("evolve", columns);
    for (t, p) in times.iter().zip(pops) {
        ds.push_row(vec![*t, p[0], p[1], p[2], p[0] + p[2]])?;
    }
    record_scenario(&mut ds, "", &scenario);
    ds.note("grid", format!("linspace(0, {t_end}, {})", times.len()));
    cfg.record(&mut ds);
    Ok(ds)
}

/// Master-equation trajectory: populations, photon numbers and purity.
pub fn run_master(cfg: &RunConfig) -> Result<FigureDataset> {
    let scenario = cfg.scenario()?;
    let t_end = cfg.t_end.unwrap_or(DYNAMICS_T_END);
    if !(t_end > 0.0) {
        return Err(Error::validation(format!("t-end must be positive, got {t_end}")));
    }
    let dt = scenario.step(cfg.dt);
    let lv = build_liouvillian(&scenario.params, &scenario.rates)?;
    let rho0 = coherence_state(&scenario.angles, scenario.epsilon)?;
    let times = linspace(0.0, t_end, DYNAMICS_SAMPLES);
    let traj = open_system::propagate_trajectory(&lv, &rho0, &times, dt)?;
    let columns = ["t", "rho44", "rho55", "rho66", "n1", "n2", "purity"]
        .map(String::from)
        .to_vec();
    let mut ds = FigureDataset::new("master", columns);
    for (t, rho) in times.iter().zip(&traj) {
        let m = MomentVector::from_density(rho);
        ds.push_row(vec![
            *t,
            rho.population(BasisKet::TwoZero),
            rho.population(BasisKet::OneOne),
            rho.population(BasisKet::ZeroTwo),
            m.n1,
            m.n2,
            rho.purity(),
        ])?;
    }
    record_scenario(&mut ds, "", &scenario);
    ds.note("dt", dt);
    ds.note("grid", format!("linspace(0, {t_end}, {DYNAMICS_SAMPLES})"));
    cfg.record(&mut ds);
    Ok(ds)
}

/// Coincidence matrix of the array at `t_end` as (m, n, P) triples.
pub fn run_array(cfg: &RunConfig) -> Result<FigureDataset> {
    let array = cfg.array_config()?;
    let init = cfg.array_initial()?;
    let t = cfg.t_end.unwrap_or(83.57);
    let p = cavity_array::joint_probability(&array, &init, t)?;
    let mut ds = FigureDataset::new("array", ["m", "n", "P"].map(String::from).to_vec());
    for m in 0..array.n {
        for n in 0..array.n {
            ds.push_row(vec![(m + 1) as f64, (n + 1) as f64, p[(m, n)]])?;
        }
    }
    ds.note("N", array.n);
    ds.note("omega", array.omega);
    ds.note("J", array.coupling);
    ds.note("r", init.r);
    ds.note("s", init.s);
    ds.note("theta", init.theta);
    ds.note("phi", init.phi);
    ds.note("t", t);
    ds.note("S", fmt_sig12(cavity_array::delocalisation_degree(&p)));
    ds.note("concurrence", fmt_sig12(metrics::concurrence(init.theta)));
    cfg.record(&mut ds);
    Ok(ds)
}

fn preset(delta: f64, k: f64, coupling: f64) -> SystemParams {
    SystemParams::deformed_detuned(1.0, delta, k, coupling)
}

fn detuning_grid() -> Vec<f64> {
    // step 0.005 on [-2, 2]
    (0..=800).map(|i| -2.0 + i as f64 * 0.005).collect()
}

fn closed_max_table(
    figure: FigureId,
    couplings: &[f64],
    states: &[(&str, TwoPhotonState)],
) -> Result<FigureDataset> {
    let deltas = detuning_grid();
    let mut columns = vec!["delta".to_string()];
    let mut jobs = Vec::new();
    for &j in couplings {
        for (label, s) in states {
            columns.push(if couplings.len() == 1 {
                format!("max_p11_{label}")
            } else {
                format!("max_p11_{label}_J{j}")
            });
            jobs.push((j, *s));
        }
    }
    let series: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|(j, s)| deltas.iter().map(|&d| closed_max_p11(&preset(d, 0.0, *j), s)).collect())
        .collect();
    let mut all = vec![deltas];
    for s in series {
        all.push(s?);
    }
    let mut ds = FigureDataset::from_series(figure.name(), columns, all)?;
    ds.note("omega1", 1.0);
    ds.note("k", 0.0);
    ds.note("J", format!("{couplings:?}"));
    ds.note("grid", "delta = -2 + 0.005 i, i = 0..800");
    ds.note(
        "time_max",
        format!("{MAX_SCAN_POINTS}-point grid on [0, 20 pi / J_eff] + golden-section refinement"),
    );
    Ok(ds)
}

/// Dissipative ρ-trajectories on the standard [0, 1200] grid, one column per
/// scenario; `observable` maps (P20, P11, P02) to the tabulated value.
fn dynamics_table(
    figure: FigureId,
    runs: Vec<(String, Scenario)>,
    observable: fn(&[f64; 3]) -> f64,
) -> Result<FigureDataset> {
    let times = linspace(0.0, DYNAMICS_T_END, DYNAMICS_SAMPLES);
    let series: Vec<Result<Vec<f64>>> = runs
        .par_iter()
        .map(|(_, sc)| Ok(sc.populations(&times, None)?.iter().map(observable).collect()))
        .collect();
    let mut columns = vec!["t".to_string()];
    let mut all = vec![times];
    for ((name, _), s) in runs.iter().zip(series) {
        columns.push(name.clone());
        all.push(s?);
    }
    let mut ds = FigureDataset::from_series(figure.name(), columns, all)?;
    for (name, sc) in &runs {
        record_scenario(&mut ds, &format!("{name}."), sc);
        ds.note(format!("{name}.dt"), sc.step(None));
    }
    ds.note("grid", format!("linspace(0, {DYNAMICS_T_END}, {DYNAMICS_SAMPLES})"));
    Ok(ds)
}

fn plus_minus() -> [(&'static str, InitialAngles); 2] {
    [("minus", InitialAngles::MINUS), ("plus", InitialAngles::PLUS)]
}

fn dephasing_scenario(params: SystemParams, gamma_d: f64, angles: InitialAngles) -> Scenario {
    Scenario {
        params,
        rates: DecayRates::dephasing(gamma_d),
        angles,
        epsilon: 1.0,
    }
}

fn p11(p: &[f64; 3]) -> f64 {
    p[1]
}

fn localised(p: &[f64; 3]) -> f64 {
    p[0] + p[2]
}

const ARRAY_STATES: [(&str, f64, f64); 3] = [
    ("theta0", 0.0, 0.0),
    ("theta_pi4_phi0", FRAC_PI_4, 0.0),
    ("theta_pi4_phipi", FRAC_PI_4, PI),
];

/// Time axis of the S(t) preset.
pub const ARRAY_T_END: f64 = 200.0;
pub const ARRAY_SAMPLES: usize = 2001;

/// Regenerates the dataset behind one of the figures.
pub fn run_figure(id: FigureId) -> Result<FigureDataset> {
    let mut ds = match id {
        FigureId::Fig1 => closed_max_table(
            id,
            &[0.3],
            &[("plus", TwoPhotonState::plus()), ("minus", TwoPhotonState::minus())],
        )?,
        FigureId::Fig2 => closed_max_table(id, &[0.1, 0.4, 0.7], &[("minus", TwoPhotonState::minus())])?,
        FigureId::Fig3 => closed_max_table(
            id,
            &[0.1, 0.4, 0.7],
            &[("20", TwoPhotonState::basis(TwoPhotonKet::TwoZero))],
        )?,
        FigureId::Fig7 => {
            let runs = [0.0, 0.1]
                .into_iter()
                .map(|k| {
                    let sc = Scenario {
                        params: preset(0.0, k, 0.05),
                        rates: DecayRates::maximal_interference(0.005, 0.005),
                        angles: InitialAngles::PLUS,
                        epsilon: 1.0,
                    };
                    (format!("localised_k{k}"), sc)
                })
                .collect();
            dynamics_table(id, runs, localised)?
        }
        FigureId::Fig8 => {
            let mut runs = Vec::new();
            for (label, angles) in plus_minus() {
                for gd in [0.0, 0.005, 0.05] {
                    runs.push((
                        format!("rho55_{label}_gd{gd}"),
                        dephasing_scenario(preset(0.0, 0.0, 0.05), gd, angles),
                    ));
                }
            }
            dynamics_table(id, runs, p11)?
        }
        FigureId::Fig9a => {
            let mut runs = Vec::new();
            for (label, angles) in plus_minus() {
                for k in [0.0, 0.1, 0.3] {
                    runs.push((
                        format!("rho55_{label}_k{k}"),
                        dephasing_scenario(preset(0.0, k, 0.05), 0.05, angles),
                    ));
                }
            }
            dynamics_table(id, runs, p11)?
        }
        FigureId::Fig9b => {
            let mut runs = Vec::new();
            for (label, angles) in plus_minus() {
                for d in [0.0, 0.3, -0.5] {
                    runs.push((
                        format!("rho55_{label}_delta{d}"),
                        dephasing_scenario(preset(d, 0.0, 0.05), 0.05, angles),
                    ));
                }
            }
            dynamics_table(id, runs, p11)?
        }
        FigureId::Fig10 => {
            let params = preset(0.0, 0.0, 0.05);
            let eps = linspace(0.0, 1.0, 21);
            let t_max = max_scan_window(&params);
            let series: Vec<Result<Vec<f64>>> = plus_minus()
                .par_iter()
                .map(|(_, angles)| {
                    eps.iter()
                        .map(|&e| {
                            let sc = Scenario {
                                params,
                                rates: DecayRates::none(),
                                angles: *angles,
                                epsilon: e,
                            };
                            Ok(summarize(&sc, t_max, None)?.max_p11)
                        })
                        .collect()
                })
                .collect();
            let mut all = vec![eps];
            for s in series {
                all.push(s?);
            }
            let columns = ["epsilon", "max_rho55_minus", "max_rho55_plus"].map(String::from).to_vec();
            let mut ds = FigureDataset::from_series(id.name(), columns, all)?;
            ds.note("omega1", 1.0);
            ds.note("J", 0.05);
            ds.note("k", 0.0);
            ds.note("delta", 0.0);
            ds.note("theta", FRAC_PI_4);
            ds.note("grid", "epsilon = linspace(0, 1, 21)");
            ds.note("time_window", t_max);
            ds
        }
        FigureId::Fig11 => {
            let cfg = ArrayConfig::new(29, 1.0, 0.1)?;
            let t = 83.57;
            let mats = ARRAY_STATES
                .iter()
                .map(|&(_, theta, phi)| cavity_array::joint_probability(&cfg, &ArrayInitialState::new(15, 16, theta, phi)?, t))
                .collect::<Result<Vec<_>>>()?;
            let mut columns = vec!["m".to_string(), "n".to_string()];
            columns.extend(ARRAY_STATES.iter().map(|(name, _, _)| format!("P_{name}")));
            let mut ds = FigureDataset::new(id.name(), columns);
            for m in 0..cfg.n {
                for n in 0..cfg.n {
                    let mut row = vec![(m + 1) as f64, (n + 1) as f64];
                    row.extend(mats.iter().map(|p| p[(m, n)]));
                    ds.push_row(row)?;
                }
            }
            for ((name, theta, _), p) in ARRAY_STATES.iter().zip(&mats) {
                ds.note(format!("S_{name}"), fmt_sig12(cavity_array::delocalisation_degree(p)));
                ds.note(format!("concurrence_{name}"), fmt_sig12(metrics::concurrence(*theta)));
            }
            ds.note("N", 29);
            ds.note("r", 15);
            ds.note("s", 16);
            ds.note("J", 0.1);
            ds.note("omega", 1.0);
            ds.note("t", t);
            ds
        }
        FigureId::Fig12 => {
            let cfg = ArrayConfig::new(29, 1.0, 0.1)?;
            let modes = ArrayModes::new(&cfg)?;
            let times = linspace(0.0, ARRAY_T_END, ARRAY_SAMPLES);
            let sources = ARRAY_STATES
                .iter()
                .map(|&(_, theta, phi)| ArrayInitialState::new(15, 16, theta, phi)?.source(cfg.n))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Result<Vec<f64>>> = times
                .par_iter()
                .map(|&t| {
                    let g = modes.green(t);
                    let mut row = vec![t];
                    for src in &sources {
                        row.push(cavity_array::delocalisation_degree(&cavity_array::coincidence_matrix(&g, src)?));
                    }
                    Ok(row)
                })
                .collect();
            let mut columns = vec!["t".to_string()];
            columns.extend(ARRAY_STATES.iter().map(|(name, _, _)| format!("S_{name}")));
            let mut ds = FigureDataset::new(id.name(), columns);
            for row in rows {
                ds.push_row(row?)?;
            }
            ds.note("N", 29);
            ds.note("r", 15);
            ds.note("s", 16);
            ds.note("J", 0.1);
            ds.note("omega", 1.0);
            ds.note("grid", format!("linspace(0, {ARRAY_T_END}, {ARRAY_SAMPLES})"));
            ds
        }
    };
    ds.note("figure", id.name());
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::validation(format!("format must be csv or json, got '{other}'"))),
        }
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal text of `x` rounded to 12 significant digits, with an
/// exponent only for very small or very large magnitudes.
pub fn fmt_sig12(x: f64) -> String {
    let r = round_sig12(x);
    if r == 0.0 {
        return "0".to_string();
    }
    let exp = r.abs().log10().floor();
    if (-5.0..12.0).contains(&exp) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn to_csv(ds: &FigureDataset) -> String {
    let mut out = ds.columns.join(",");
    out.push('\n');
    for row in &ds.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_sig12(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(ds: &FigureDataset) -> String {
    let rounded = FigureDataset {
        rows: ds
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| round_sig12(x)).collect())
            .collect(),
        ..ds.clone()
    };
    let mut s = serde_json::to_string_pretty(&rounded).expect("dataset serialises");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> std::result::Result<FigureDataset, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn import_json(path: &Path) -> Result<FigureDataset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ds = from_json(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if ds.rows.iter().any(|r| r.len() != ds.columns.len()) {
        return Err(Error::validation(format!("{}: row length differs from column count", path.display())));
    }
    Ok(ds)
}

pub fn export(ds: &FigureDataset, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => to_csv(ds),
        ExportFormat::Json => to_json(ds),
    };
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
