//! Named scenarios, their configuration files and CSV output.
//!
//! A configuration is a flat list of `section.key = value` lines with SI
//! units. Keys ending in `_hz` hold ordinary frequencies ω/2π. `#` starts a
//! comment. Optional quantities accept `auto`, meaning "derive it".

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cavity::{CavityGeometry, CavityOverrides, CavityParams, MirrorCoating};
use crate::constants::{from_hz, to_hz, PhysicalConstants};
use crate::coupling::{collective_coupling, dispersive_shift, load_to_nearest_site, LatticeConfig, ModeFunction};
use crate::ensemble::{thermal_widths, DensityProfile, TrapConfig, TrapKind};
use crate::error::Error;
use crate::heating::{
    broad_line_check, heating_peak_positions, heating_scan, scattering_budget, sigma_peak, HeatingScenario,
    ProbeSettings,
};
use crate::hyperfine::{anticrossing, eigenmodes, resonant_n2, HyperfineParams};
use crate::numerics::{arange, linspace};
use crate::spectrum::{
    dressed_energies, shifted_lorentzian, spectrum_map_vs_detuning, spectrum_map_vs_n, transmission, DetuningPoint,
    SpectrumGrid,
};

pub const PRESETS: &[&str] =
    &["cavity-report", "fig2b", "fig2c", "fig3a", "fig3b", "fig4", "suppfig2", "suppfig3"];

/// Range constraint attached to a numeric key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Any,
    Positive,
    NonNegative,
    /// In [0, 1].
    Fraction,
    /// Integer ≥ the given value.
    Integer(i64),
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Number(Bound),
    /// A number or `auto`.
    Optional(Bound),
    Choice(&'static [&'static str]),
}

struct KeySpec {
    name: &'static str,
    unit: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn key(name: &'static str, unit: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec { name, unit, kind, default }
}

use Bound::*;
use Kind::*;

const PROFILES: &[&str] = &["gaussian", "thomas_fermi", "point"];

const SCHEMA: &[KeySpec] = &[
    key("cavity.d", "m", Number(Positive), "38.6e-6"),
    key("cavity.r1", "m", Number(Positive), "450e-6"),
    key("cavity.r2", "m", Number(Positive), "150e-6"),
    key("cavity.wavelength", "m", Number(Positive), "780.2e-9"),
    key("cavity.transmission", "1", Number(Fraction), "31e-6"),
    key("cavity.loss", "1", Number(Fraction), "56e-6"),
    key("cavity.finesse", "1", Optional(Positive), "37000"),
    key("cavity.kappa_hz", "Hz", Optional(Positive), "auto"),
    key("cavity.g0_hz", "Hz", Optional(Positive), "auto"),
    key("cavity.measured_transmission", "1", Number(Fraction), "0.094"),
    key("atoms.n", "1", Number(Positive), "1000"),
    key("atoms.profile", "", Choice(PROFILES), "gaussian"),
    key("atoms.sigma_x", "m", Optional(Positive), "auto"),
    key("atoms.sigma_y", "m", Optional(Positive), "auto"),
    key("atoms.sigma_z", "m", Optional(Positive), "auto"),
    key("atoms.temperature", "K", Optional(Positive), "auto"),
    key("atoms.radius_x", "m", Optional(Positive), "auto"),
    key("atoms.radius_y", "m", Optional(Positive), "auto"),
    key("atoms.radius_z", "m", Optional(Positive), "auto"),
    key("atoms.g_bar_1_hz", "Hz", Number(NonNegative), "200e6"),
    key("probe.n_res", "1", Number(NonNegative), "5.5e-2"),
    key("probe.delta_l_hz", "Hz", Number(Any), "0"),
    key("probe.delta_c_hz", "Hz", Number(Any), "0"),
    key("probe.x_start", "m", Number(NonNegative), "1e-6"),
    key("probe.x_stop", "m", Number(NonNegative), "37e-6"),
    key("probe.x_step", "m", Number(Positive), "0.1e-6"),
    key("probe.delta_l_start_hz", "Hz", Number(Any), "-13e9"),
    key("probe.delta_l_stop_hz", "Hz", Number(Any), "13e9"),
    key("probe.delta_l_points", "1", Number(Integer(2)), "2001"),
    key("probe.n_start", "1", Number(NonNegative), "10"),
    key("probe.n_stop", "1", Number(NonNegative), "1000"),
    key("probe.n_step", "1", Number(Positive), "30"),
    key("probe.delta_c_start_hz", "Hz", Number(Any), "-20e9"),
    key("probe.delta_c_stop_hz", "Hz", Number(Any), "20e9"),
    key("probe.delta_c_step_hz", "Hz", Number(Positive), "1e9"),
    key("lattice.lambda_d", "m", Number(Positive), "830.6e-9"),
    key("lattice.nu_x_hz", "Hz", Number(Positive), "100e3"),
    key("lattice.nu_yz_hz", "Hz", Number(Positive), "4.8e3"),
    key("hyperfine.delta_hfs_hz", "Hz", Number(Positive), "6.8e9"),
    key("hyperfine.g1_hz", "Hz", Number(Positive), "200e6"),
    key("hyperfine.alpha", "1", Number(NonNegative), "0"),
    key("hyperfine.beta", "1", Number(NonNegative), "1"),
    key("hyperfine.fraction", "1", Number(Fraction), "0.0025"),
    key("hyperfine.k_max", "1", Number(Integer(1)), "3"),
    key("hyperfine.delta_c_hz", "Hz", Number(Any), "0"),
    key("hyperfine.n2_start", "1", Number(NonNegative), "200"),
    key("hyperfine.n2_stop", "1", Number(NonNegative), "2000"),
    key("hyperfine.n2_step", "1", Number(Positive), "10"),
    key("heating.n_res", "1", Number(NonNegative), "3.9e-3"),
    key("heating.t_int", "s", Number(NonNegative), "10e-3"),
    key("heating.t_tof", "s", Number(NonNegative), "2.8e-3"),
    key("heating.sigma_ref_x", "m", Number(NonNegative), "7e-6"),
    key("heating.sigma_ref_z", "m", Number(NonNegative), "7e-6"),
    key("heating.c0", "1", Optional(NonNegative), "auto"),
    key("heating.w", "m", Optional(Positive), "auto"),
    key("heating.z_start", "m", Number(Any), "-20e-6"),
    key("heating.z_stop", "m", Number(Any), "20e-6"),
    key("heating.z_step", "m", Number(Positive), "0.5e-6"),
];

fn preset_overrides(name: &str) -> &'static [(&'static str, &'static str)] {
    match name {
        "fig2b" => &[
            ("atoms.sigma_x", "65e-9"),
            ("atoms.sigma_y", "1.35e-6"),
            ("atoms.sigma_z", "0.9e-6"),
        ],
        "fig2c" => &[
            ("atoms.n", "600"),
            ("atoms.temperature", "10e-6"),
            ("probe.delta_l_hz", "-100e9"),
            ("probe.delta_c_hz", "-100e9"),
            ("probe.x_start", "14e-6"),
            ("probe.x_stop", "16e-6"),
            ("probe.x_step", "40e-9"),
        ],
        "fig3b" => &[("atoms.n", "750")],
        "fig4" => &[
            ("atoms.n", "800"),
            ("cavity.kappa_hz", "53e6"),
            ("heating.c0", "145"),
            ("heating.w", "3.9e-6"),
        ],
        "suppfig3" => &[
            ("atoms.n", "800"),
            ("cavity.kappa_hz", "53e6"),
            ("heating.c0", "145"),
            ("heating.w", "3.9e-6"),
            ("heating.z_start", "-25e-6"),
            ("heating.z_stop", "25e-6"),
            ("heating.z_step", "0.05e-6"),
        ],
        _ => &[],
    }
}

/// Problems with a configuration, reported before any computation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown scenario '{0}' (known: {list})", list = PRESETS.join(", "))]
    UnknownScenario(String),
    #[error("line {line}: expected 'section.key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing key '{0}'")]
    Missing(&'static str),
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

/// Anything that stops a scenario run.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid parameter: {0}")]
    Physics(Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("output error: {0}")]
    Io(String),
}

impl From<Error> for ScenarioError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            ScenarioError::Numerical(e)
        } else {
            ScenarioError::Physics(e)
        }
    }
}

impl ScenarioError {
    /// 2 for configuration problems, 3 for numerical non-convergence, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) | ScenarioError::Physics(_) => 2,
            ScenarioError::Numerical(_) => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Number(f64),
    Auto,
    Choice(&'static str),
}

/// A fully resolved scenario: preset defaults, then file entries, then
/// command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    scenario: &'static str,
    values: BTreeMap<&'static str, Value>,
}

fn spec_for(name: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|k| k.name == name)
}

fn parse_value(spec: &'static KeySpec, raw: &str) -> Result<Value, ConfigError> {
    let raw = raw.trim();
    let number = |bound: Bound| -> Result<f64, ConfigError> {
        let v: f64 = raw.parse().map_err(|_| invalid(spec.name, format!("'{raw}' is not a number")))?;
        if !v.is_finite() {
            return Err(invalid(spec.name, "must be finite"));
        }
        let ok = match bound {
            Any => true,
            Positive => v > 0.0,
            NonNegative => v >= 0.0,
            Fraction => (0.0..=1.0).contains(&v),
            Integer(min) => v.fract() == 0.0 && v >= min as f64,
        };
        if !ok {
            let need = match bound {
                Any => unreachable!(),
                Positive => "> 0".to_string(),
                NonNegative => ">= 0".to_string(),
                Fraction => "in [0, 1]".to_string(),
                Integer(min) => format!("an integer >= {min}"),
            };
            return Err(invalid(spec.name, format!("must be {need}, got {raw}")));
        }
        Ok(v)
    };
    match spec.kind {
        Number(b) => number(b).map(Value::Number),
        Optional(_) if raw == "auto" => Ok(Value::Auto),
        Optional(b) => number(b).map(Value::Number),
        Choice(options) => options
            .iter()
            .find(|o| **o == raw)
            .map(|o| Value::Choice(o))
            .ok_or_else(|| invalid(spec.name, format!("'{raw}' is not one of {}", options.join(", ")))),
    }
}

fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return None;
    }
    Some((k, v))
}

impl ScenarioConfig {
    /// Defaults of a named scenario.
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let scenario =
            PRESETS.iter().find(|p| **p == name).ok_or_else(|| ConfigError::UnknownScenario(name.to_string()))?;
        let mut values = BTreeMap::new();
        for spec in SCHEMA {
            values.insert(spec.name, parse_value(spec, spec.default).expect("schema defaults parse"));
        }
        let mut config = Self { scenario, values };
        for (k, v) in preset_overrides(scenario) {
            config.set(k, v).expect("preset overrides parse");
        }
        Ok(config)
    }

    /// Parses a configuration file. It must name its scenario with
    /// `scenario.name = …`; every other key overrides that scenario's default.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        let mut scenario = None;
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) =
                split_assignment(content).ok_or_else(|| ConfigError::Syntax { line: i + 1, text: line.to_string() })?;
            if k == "scenario.name" {
                scenario = Some(v);
            } else {
                entries.push((k, v));
            }
        }
        let mut config = Self::preset(scenario.ok_or(ConfigError::Missing("scenario.name"))?)?;
        for (k, v) in entries {
            config.set(k, v)?;
        }
        Ok(config)
    }

    /// Overrides one key. The scenario itself cannot be changed this way.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if key == "scenario.name" {
            return Err(invalid(key, "choose the scenario by name or in the config file"));
        }
        let spec = spec_for(key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        self.values.insert(spec.name, parse_value(spec, value)?);
        Ok(())
    }

    /// Applies a `section.key=value` assignment.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = split_assignment(assignment)
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: assignment.to_string() })?;
        self.set(k, v)
    }

    pub fn scenario(&self) -> &'static str {
        self.scenario
    }

    /// `section.key = value  # unit` lines in schema order.
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec![format!("scenario.name = {}", self.scenario)];
        for spec in SCHEMA {
            let v = match self.values[spec.name] {
                Value::Number(x) => format_number(x),
                Value::Auto => "auto".to_string(),
                Value::Choice(c) => c.to_string(),
            };
            if spec.unit.is_empty() {
                out.push(format!("{} = {v}", spec.name));
            } else {
                out.push(format!("{} = {v}  # {}", spec.name, spec.unit));
            }
        }
        out
    }

    fn num(&self, key: &'static str) -> f64 {
        match self.values[key] {
            Value::Number(v) => v,
            _ => unreachable!("{key} is always numeric"),
        }
    }

    fn opt(&self, key: &'static str) -> Option<f64> {
        match self.values[key] {
            Value::Number(v) => Some(v),
            _ => None,
        }
    }

    fn choice(&self, key: &'static str) -> &'static str {
        match self.values[key] {
            Value::Choice(c) => c,
            _ => unreachable!("{key} is a choice"),
        }
    }

    fn sweep(&self, start: &'static str, stop: &'static str, step: &'static str) -> Result<Vec<f64>, ConfigError> {
        let values = arange(self.num(start), self.num(stop), self.num(step));
        if values.is_empty() {
            return Err(invalid(start, format!("empty sweep: {start} is above {stop}")));
        }
        Ok(values)
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

/// One output table; every cell is already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    /// `(column, unit)` pairs.
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, columns: &[(&'static str, &'static str)]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|&v| format_number(v)).collect());
    }

    fn push_quantity(&mut self, name: &str, value: f64, unit: &str) {
        self.rows.push(vec![name.to_string(), format_number(value), unit.to_string()]);
    }

    /// The table as CSV, preceded by a `#` block echoing `config`.
    pub fn to_csv(&self, config: &ScenarioConfig) -> String {
        let mut s = String::new();
        writeln!(s, "# cqed-lab {} / table {}", env!("CARGO_PKG_VERSION"), self.name).unwrap();
        for line in config.echo() {
            writeln!(s, "# {line}").unwrap();
        }
        let units: Vec<String> = self.columns.iter().map(|(c, u)| format!("{c} [{u}]")).collect();
        writeln!(s, "# columns: {}", units.join(", ")).unwrap();
        let names: Vec<&str> = self.columns.iter().map(|(c, _)| *c).collect();
        writeln!(s, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }

    pub fn file_name(&self, config: &ScenarioConfig) -> String {
        format!("{}_{}.csv", config.scenario(), self.name)
    }
}

const QUANTITY_COLUMNS: &[(&str, &str)] = &[("quantity", "-"), ("value", "-"), ("unit", "-")];

struct Resolved {
    constants: PhysicalConstants,
    cavity: CavityParams,
    geometry: CavityGeometry,
    coating: MirrorCoating,
}

fn resolve_cavity(c: &ScenarioConfig) -> Result<Resolved, ScenarioError> {
    let constants = PhysicalConstants::default();
    let geometry = CavityGeometry::new(
        c.num("cavity.d"),
        c.num("cavity.r1"),
        c.num("cavity.r2"),
        c.num("cavity.wavelength"),
    )
    .map_err(|e| invalid("cavity.d / cavity.r1 / cavity.r2", e.to_string()))?;
    let coating = MirrorCoating::new(c.num("cavity.transmission"), c.num("cavity.loss"))
        .map_err(|e| invalid("cavity.transmission / cavity.loss", e.to_string()))?;
    let overrides = CavityOverrides {
        finesse: c.opt("cavity.finesse"),
        kappa: c.opt("cavity.kappa_hz").map(from_hz),
        g0: c.opt("cavity.g0_hz").map(from_hz),
    };
    let cavity = CavityParams::derive(&geometry, &coating, &constants, overrides)?;
    Ok(Resolved { constants, cavity, geometry, coating })
}

fn lattice(c: &ScenarioConfig) -> Result<LatticeConfig, ScenarioError> {
    let nu = [c.num("lattice.nu_x_hz"), c.num("lattice.nu_yz_hz"), c.num("lattice.nu_yz_hz")];
    LatticeConfig::new(c.num("lattice.lambda_d"), nu, c.num("cavity.wavelength"))
        .map_err(|e| invalid("lattice.lambda_d", e.to_string()).into())
}

/// Cloud shape at the origin; the caller moves it to the lattice site.
fn cloud(c: &ScenarioConfig, r: &Resolved, lattice: &LatticeConfig) -> Result<DensityProfile, ScenarioError> {
    let n = c.num("atoms.n");
    match c.choice("atoms.profile") {
        "point" => Ok(DensityProfile::point(n, [0.0; 3])?),
        "thomas_fermi" => {
            let keys = ["atoms.radius_x", "atoms.radius_y", "atoms.radius_z"];
            let mut radii = [0.0; 3];
            for (i, k) in keys.iter().enumerate() {
                radii[i] = c.opt(k).ok_or_else(|| invalid(k, "required for a thomas_fermi profile"))?;
            }
            Ok(DensityProfile::thomas_fermi(n, [0.0; 3], radii)?)
        }
        _ => {
            let keys = ["atoms.sigma_x", "atoms.sigma_y", "atoms.sigma_z"];
            let thermal = match c.opt("atoms.temperature") {
                Some(t) => {
                    let trap = TrapConfig::new(lattice.nu, TrapKind::Lattice)?;
                    Some(thermal_widths(&trap, t, &r.constants)?)
                }
                None => None,
            };
            let mut sigma = [0.0; 3];
            for (i, k) in keys.iter().enumerate() {
                sigma[i] = match (c.opt(k), thermal) {
                    (Some(s), _) => s,
                    (None, Some(t)) => t[i],
                    (None, None) => return Err(invalid(k, "set the width or atoms.temperature").into()),
                };
            }
            Ok(DensityProfile::gaussian(n, [0.0; 3], sigma)?)
        }
    }
}

struct LoadedPoint {
    x_a: f64,
    site: usize,
    site_center: f64,
    g_n: f64,
    g_bar_1: f64,
    axial: f64,
    transverse: f64,
}

fn lattice_scan(c: &ScenarioConfig) -> Result<(Resolved, Vec<LoadedPoint>), ScenarioError> {
    let r = resolve_cavity(c)?;
    let lattice = lattice(c)?;
    let profile = cloud(c, &r, &lattice)?;
    let positions = c.sweep("probe.x_start", "probe.x_stop", "probe.x_step")?;
    let d = r.geometry.d;
    if let Some(x) = positions.iter().find(|&&x| x > d) {
        return Err(invalid("probe.x_stop", format!("position {x:e} m lies beyond the far mirror at {d:e} m")).into());
    }
    let mode = ModeFunction::new(r.cavity.g0, r.geometry.wavelength, r.cavity.mode)?;
    let points = positions
        .par_iter()
        .map(|&x_a| {
            let (site, site_center) = load_to_nearest_site(x_a, &lattice, d)?;
            let cr = collective_coupling(&profile.clone().with_center([site_center, 0.0, 0.0]), &mode)?;
            Ok(LoadedPoint {
                x_a,
                site,
                site_center,
                g_n: cr.g_n,
                g_bar_1: cr.g_bar_1,
                axial: cr.axial_factor,
                transverse: cr.transverse_factor,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok((r, points))
}

fn run_cavity_report(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let r = resolve_cavity(c)?;
    let p = &r.cavity;
    let mut t = Table::new("parameters", QUANTITY_COLUMNS);
    t.push_quantity("finesse", p.finesse, "1");
    t.push_quantity("finesse_from_coatings", crate::cavity::finesse(&r.coating)?, "1");
    t.push_quantity("kappa", to_hz(p.kappa), "Hz");
    t.push_quantity("w0", p.w0, "m");
    t.push_quantity("waist_position", p.waist_position, "m");
    t.push_quantity("rayleigh_length", p.rayleigh_length, "m");
    t.push_quantity("radius_variation", p.mode.max_radius_variation(), "1");
    t.push_quantity("g0", to_hz(p.g0), "Hz");
    t.push_quantity("gamma", to_hz(r.constants.gamma), "Hz");
    t.push_quantity("C0", p.c0, "1");
    t.push_quantity("n0", p.n0, "1");
    t.push_quantity("resonant_transmission", p.resonant_transmission, "1");
    let measured = c.num("cavity.measured_transmission");
    t.push_quantity("external_loss", r.coating.infer_external_loss(measured)?, "1");
    Ok(vec![t])
}

fn run_fig2b(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let (r, points) = lattice_scan(c)?;
    let n_res = c.num("probe.n_res");
    let point = DetuningPoint { delta_l: from_hz(c.num("probe.delta_l_hz")), delta_c: from_hz(c.num("probe.delta_c_hz")) };
    let mut t = Table::new(
        "scan",
        &[
            ("x_a", "m"),
            ("site", "1"),
            ("site_center", "m"),
            ("g_n_hz", "Hz"),
            ("g_bar_1_hz", "Hz"),
            ("axial_factor", "1"),
            ("transverse_factor", "1"),
            ("photons", "1"),
        ],
    );
    for p in &points {
        let photons = n_res * transmission(point, p.g_n, r.cavity.kappa, r.constants.gamma);
        t.push(&[
            p.x_a,
            p.site as f64,
            p.site_center,
            to_hz(p.g_n),
            to_hz(p.g_bar_1),
            p.axial,
            p.transverse,
            photons,
        ]);
    }
    Ok(vec![t])
}

fn run_fig2c(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let (r, points) = lattice_scan(c)?;
    let point = DetuningPoint { delta_l: from_hz(c.num("probe.delta_l_hz")), delta_c: from_hz(c.num("probe.delta_c_hz")) };
    if point.delta_l == 0.0 {
        return Err(invalid("probe.delta_l_hz", "must be non-zero for the dispersive prediction").into());
    }
    let mut t = Table::new(
        "scan",
        &[
            ("x_a", "m"),
            ("site", "1"),
            ("site_center", "m"),
            ("g_n_hz", "Hz"),
            ("shift_hz", "Hz"),
            ("transmission", "1"),
            ("lorentzian", "1"),
        ],
    );
    for p in &points {
        let shift = dispersive_shift(p.g_n, point.delta_l)?;
        t.push(&[
            p.x_a,
            p.site as f64,
            p.site_center,
            to_hz(p.g_n),
            to_hz(shift),
            transmission(point, p.g_n, r.cavity.kappa, r.constants.gamma),
            shifted_lorentzian(point, shift, r.cavity.kappa),
        ]);
    }
    Ok(vec![t])
}

fn probe_axis(c: &ScenarioConfig) -> Vec<f64> {
    linspace(
        from_hz(c.num("probe.delta_l_start_hz")),
        from_hz(c.num("probe.delta_l_stop_hz")),
        c.num("probe.delta_l_points") as usize,
    )
}

fn check_probe_axis(c: &ScenarioConfig) -> Result<(), ConfigError> {
    if c.num("probe.delta_l_stop_hz") <= c.num("probe.delta_l_start_hz") {
        return Err(invalid("probe.delta_l_stop_hz", "must exceed probe.delta_l_start_hz"));
    }
    Ok(())
}

fn map_table(grid: &SpectrumGrid, axis2: (&'static str, &'static str), hz: bool) -> Table {
    let mut t = Table::new("map", &[axis2, ("delta_l_hz", "Hz"), ("transmission", "1")]);
    for (a2, row) in grid.axis2.iter().zip(&grid.rows) {
        let a2 = if hz { to_hz(*a2) } else { *a2 };
        for (dl, v) in grid.axis1.iter().zip(row) {
            t.push(&[a2, to_hz(*dl), *v]);
        }
    }
    t
}

/// Lowest and highest resonance of each row, NaN where a row shows fewer than two.
fn outer_peaks(grid: &SpectrumGrid, prominence: f64) -> Result<Vec<(f64, f64)>, ScenarioError> {
    Ok(grid
        .peak_loci(prominence)?
        .iter()
        .map(|peaks| match (peaks.first(), peaks.last()) {
            (Some(a), Some(b)) if peaks.len() >= 2 => (a.x, b.x),
            (Some(a), _) => (a.x, a.x),
            _ => (f64::NAN, f64::NAN),
        })
        .collect())
}

fn run_fig3a(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let r = resolve_cavity(c)?;
    check_probe_axis(c)?;
    let ns = c.sweep("probe.n_start", "probe.n_stop", "probe.n_step")?;
    let g1 = from_hz(c.num("atoms.g_bar_1_hz"));
    let delta_c = from_hz(c.num("probe.delta_c_hz"));
    let grid = spectrum_map_vs_n(&ns, &probe_axis(c), g1, r.cavity.kappa, r.constants.gamma, delta_c)?;
    let mut peaks = Table::new(
        "peaks",
        &[("n", "1"), ("lower_hz", "Hz"), ("upper_hz", "Hz"), ("dressed_minus_hz", "Hz"), ("dressed_plus_hz", "Hz")],
    );
    for (&n, (lo, hi)) in ns.iter().zip(outer_peaks(&grid, 0.01)?) {
        let (ep, em) = dressed_energies(delta_c, n.sqrt() * g1);
        peaks.push(&[n, to_hz(lo), to_hz(hi), to_hz(em), to_hz(ep)]);
    }
    Ok(vec![map_table(&grid, ("n", "1"), false), peaks])
}

fn run_fig3b(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let r = resolve_cavity(c)?;
    check_probe_axis(c)?;
    let dcs: Vec<f64> =
        c.sweep("probe.delta_c_start_hz", "probe.delta_c_stop_hz", "probe.delta_c_step_hz")?.into_iter().map(from_hz).collect();
    let g1 = from_hz(c.num("atoms.g_bar_1_hz"));
    let n = c.num("atoms.n");
    let grid = spectrum_map_vs_detuning(&dcs, &probe_axis(c), n, g1, r.cavity.kappa, r.constants.gamma)?;
    let mut peaks = Table::new(
        "peaks",
        &[
            ("delta_c_hz", "Hz"),
            ("lower_hz", "Hz"),
            ("upper_hz", "Hz"),
            ("dressed_minus_hz", "Hz"),
            ("dressed_plus_hz", "Hz"),
        ],
    );
    // the atom-like branch is faint far from resonance, so keep every maximum
    for (&dc, (lo, hi)) in dcs.iter().zip(outer_peaks(&grid, 0.0)?) {
        let (ep, em) = dressed_energies(dc, n.sqrt() * g1);
        peaks.push(&[to_hz(dc), to_hz(lo), to_hz(hi), to_hz(em), to_hz(ep)]);
    }
    Ok(vec![map_table(&grid, ("delta_c_hz", "Hz"), true), peaks])
}

fn heating_setup(c: &ScenarioConfig) -> Result<(HeatingScenario, Vec<f64>), ScenarioError> {
    let r = resolve_cavity(c)?;
    let probe = ProbeSettings {
        n_res: c.num("heating.n_res"),
        t_int: c.num("heating.t_int"),
        t_tof: c.num("heating.t_tof"),
        sigma_ref: [c.num("heating.sigma_ref_x"), c.num("heating.sigma_ref_z")],
    };
    let scenario = HeatingScenario {
        n: c.num("atoms.n"),
        c0: c.opt("heating.c0").unwrap_or(r.cavity.c0),
        w: c.opt("heating.w").unwrap_or(r.cavity.w0),
        kappa: r.cavity.kappa,
        probe,
        constants: r.constants,
    };
    if scenario.n < 1.0 {
        return Err(invalid("atoms.n", "the heating model needs at least one atom").into());
    }
    let zs = c.sweep("heating.z_start", "heating.z_stop", "heating.z_step")?;
    Ok((scenario, zs))
}

fn run_fig4(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let (s, zs) = heating_setup(c)?;
    let scan = heating_scan(&zs, &s)?;
    let mut t = Table::new(
        "scan",
        &[
            ("z_a", "m"),
            ("c_n", "1"),
            ("g_n_hz", "Hz"),
            ("transmission", "1"),
            ("sigma_x", "m"),
            ("sigma_z", "m"),
        ],
    );
    for p in &scan {
        t.push(&[p.z_a, p.c_n, to_hz(p.g_n), p.transmission, p.sigma_x, p.sigma_z]);
    }

    let k = &s.constants;
    let mut summary = Table::new("summary", QUANTITY_COLUMNS);
    summary.push_quantity("z_peak", heating_peak_positions(s.n, s.c0, s.w)?, "m");
    summary.push_quantity("sigma_peak", sigma_peak(&s.probe, s.kappa, s.n, k), "m");
    let peak = s.evaluate(heating_peak_positions(s.n, s.c0, s.w)?)?;
    summary.push_quantity("gamma_sp_peak", peak.gamma_sp, "1/s");
    let budget = scattering_budget(s.probe.n_res, s.kappa, s.probe.t_int, s.n, k.gamma)?;
    summary.push_quantity("n_sp_peak", budget.n_sp, "1");
    summary.push_quantity("p_exc_peak", budget.p_exc, "1");
    summary.push_quantity("survival", budget.survival, "1");
    let axis = s.evaluate(0.0)?;
    summary.push_quantity("gamma_sp_axis", axis.gamma_sp, "1/s");
    summary.push_quantity("photons_axis", axis.gamma_sp * s.n * s.probe.t_int, "1");
    summary.push_quantity("broad_line_ratio", broad_line_check(k), "1");
    Ok(vec![t, summary])
}

fn run_suppfig3(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let (s, zs) = heating_setup(c)?;
    let scan = heating_scan(&zs, &s)?;
    let mut t = Table::new(
        "scan",
        &[
            ("z_a", "m"),
            ("c_n", "1"),
            ("d_p", "kg^2 m^2/s^3"),
            ("gamma_sp", "1/s"),
            ("sigma_x", "m"),
            ("sigma_z", "m"),
        ],
    );
    for p in &scan {
        t.push(&[p.z_a, p.c_n, p.d_p, p.gamma_sp, p.sigma_x, p.sigma_z]);
    }
    Ok(vec![t])
}

fn run_suppfig2(c: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let fraction = c.num("hyperfine.fraction");
    let base = HyperfineParams {
        delta_hfs: from_hz(c.num("hyperfine.delta_hfs_hz")),
        g1: from_hz(c.num("hyperfine.g1_hz")),
        alpha: c.num("hyperfine.alpha"),
        beta: c.num("hyperfine.beta"),
        n1: 0.0,
        n2: 0.0,
        delta_c: from_hz(c.num("hyperfine.delta_c_hz")),
        k_max: c.num("hyperfine.k_max") as usize,
    };
    base.validate()?;
    let n2s = c.sweep("hyperfine.n2_start", "hyperfine.n2_stop", "hyperfine.n2_step")?;
    let spectra = n2s
        .par_iter()
        .map(|&n2| eigenmodes(&base.with_n2_fraction(n2, fraction)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut levels =
        Table::new("levels", &[("n2", "1"), ("n1", "1"), ("level", "1"), ("delta_hz", "Hz"), ("weight", "1")]);
    for (&n2, spec) in n2s.iter().zip(&spectra) {
        for (i, (d, w)) in spec.deltas.iter().zip(&spec.weights).enumerate() {
            levels.push(&[n2, fraction * n2, i as f64, to_hz(*d), *w]);
        }
    }

    let mut summary = Table::new("anticrossing", QUANTITY_COLUMNS);
    summary.push_quantity("n2_double_resonance", resonant_n2(&base), "1");
    let range = (n2s[0], *n2s.last().unwrap());
    if range.1 <= range.0 {
        return Err(invalid("hyperfine.n2_stop", "the sweep needs at least two points").into());
    }
    let ac = anticrossing(&base, fraction, range)?;
    summary.push_quantity("n2_min_gap", ac.n2, "1");
    summary.push_quantity("delta_center_hz", to_hz(ac.delta_center), "Hz");
    summary.push_quantity("gap_hz", to_hz(ac.gap), "Hz");
    summary.push_quantity("beta_g1_sqrt_n1_hz", to_hz(base.beta * base.g1 * (fraction * ac.n2).sqrt()), "Hz");
    Ok(vec![levels, summary])
}

/// Runs the configured scenario. Nothing is written; all tables are
/// complete on success.
pub fn run(config: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    match config.scenario {
        "cavity-report" => run_cavity_report(config),
        "fig2b" => run_fig2b(config),
        "fig2c" => run_fig2c(config),
        "fig3a" => run_fig3a(config),
        "fig3b" => run_fig3b(config),
        "fig4" => run_fig4(config),
        "suppfig2" => run_suppfig2(config),
        "suppfig3" => run_suppfig3(config),
        other => unreachable!("unregistered scenario {other}"),
    }
}

/// Writes every table into `dir` (created if needed) and returns the paths.
pub fn write_tables(dir: &Path, config: &ScenarioConfig, tables: &[Table]) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for t in tables {
        let path = dir.join(t.file_name(config));
        std::fs::write(&path, t.to_csv(config)).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for p in PRESETS {
            let c = ScenarioConfig::preset(p).unwrap();
            assert_eq!(c.scenario(), *p);
            assert_eq!(c.echo().len(), SCHEMA.len() + 1);
        }
        assert!(matches!(ScenarioConfig::preset("fig9"), Err(ConfigError::UnknownScenario(_))));
    }

    #[test]
    fn file_parsing() {
        let text = "# comment\nscenario.name = fig4\natoms.n = 500 # trailing\n\nheating.w = auto\n";
        let c = ScenarioConfig::from_text(text).unwrap();
        assert_eq!(c.num("atoms.n"), 500.0);
        assert_eq!(c.opt("heating.w"), None);
        assert_eq!(c.opt("heating.c0"), Some(145.0));
        assert!(matches!(ScenarioConfig::from_text("atoms.n = 1"), Err(ConfigError::Missing(_))));
        assert!(matches!(
            ScenarioConfig::from_text("scenario.name = fig4\natoms.m = 1"),
            Err(ConfigError::UnknownKey(k)) if k == "atoms.m"
        ));
        assert!(matches!(
            ScenarioConfig::from_text("scenario.name = fig4\nnonsense"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn constraints_name_the_key() {
        let mut c = ScenarioConfig::preset("fig4").unwrap();
        let e = c.apply("cavity.d=-1").unwrap_err();
        assert!(e.to_string().contains("cavity.d") && e.to_string().contains("> 0"));
        assert!(c.apply("hyperfine.k_max=2.5").is_err());
        assert!(c.apply("atoms.profile=cube").is_err());
        assert!(c.apply("scenario.name=fig2b").is_err());
        assert!(c.apply("atoms.n=inf").is_err());
    }

    #[test]
    fn empty_sweep_rejected() {
        let mut c = ScenarioConfig::preset("fig4").unwrap();
        c.apply("heating.z_stop=-30e-6").unwrap();
        let e = run(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn cavity_report_values() {
        let c = ScenarioConfig::preset("cavity-report").unwrap();
        let t = &run(&c).unwrap()[0];
        let get = |name: &str| -> f64 { t.rows.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
        assert!((get("kappa") / 1e6 - 52.5).abs() < 0.1);
        assert!((get("w0") - 3.87e-6).abs() < 0.01e-6);
        assert!((get("g0") / 1e6 - 214.0).abs() < 1.0);
    }

    #[test]
    fn unstable_cavity_is_config_error() {
        let mut c = ScenarioConfig::preset("cavity-report").unwrap();
        c.apply("cavity.d=200e-6").unwrap();
        let e = run(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("cavity.d"));
    }
}
