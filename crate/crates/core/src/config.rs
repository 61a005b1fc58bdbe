//! Plain-text run configuration: dotted `key = value` lines, `#` comments.
//! One file fully determines a run; the canonical serialization feeds the
//! config hash that keys journals and caches.
//!
//! ```text
//! schema_version = 1
//! geometry.kind = ncf
//! geometry.d_in_nm = 100
//! geometry.d_out_nm = 360
//! geometry.core = water
//! geometry.background = vacuum
//! source.orientation = radial
//! source.r_in_nm = 0
//! source.wavelength_nm = 620
//! tier = fast
//! sweep.parameter = d_out
//! sweep.values_nm = 300:1000:20
//! ```

use crate::scene::{
    DipoleSource, LayeredCylinderProfile, Material, Orientation, SceneError, SimulationDomain,
};
use crate::util::fnv1a64_hex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing key '{0}'")]
    Missing(String),
    #[error("key '{key}': {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Scene(String),
}

impl From<SceneError> for ConfigError {
    fn from(e: SceneError) -> Self {
        ConfigError::Scene(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Fast,
    Accurate,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Fast => "fast",
            Tier::Accurate => "accurate",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "fast" => Ok(Tier::Fast),
            "accurate" => Ok(Tier::Accurate),
            other => Err(format!("unknown tier '{other}' (fast|accurate)")),
        }
    }

    /// Preset simulation domain for this tier. The accurate preset keeps
    /// the +-4 um monitor distance of the desk-scale default with a
    /// transverse extent sized to the guided-mode decay lengths.
    pub fn domain(self) -> SimulationDomain {
        match self {
            Tier::Fast => {
                let mut d = SimulationDomain::new([2200.0, 2200.0, 6400.0], 20.0);
                d.monitor_z_offsets_nm = vec![2400.0];
                d
            }
            Tier::Accurate => {
                let mut d = SimulationDomain::new([2400.0, 2400.0, 9000.0], 10.0);
                d.monitor_z_offsets_nm = vec![4000.0];
                d
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Onf,
    Ncf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub kind: GeometryKind,
    /// ONF diameter, nm.
    pub diameter_nm: Option<f64>,
    /// NCF inner/outer diameters, nm.
    pub d_in_nm: Option<f64>,
    pub d_out_nm: Option<f64>,
    /// NCF core medium.
    pub core: Option<String>,
    /// Background medium (ONF cladding medium / NCF outside).
    pub background: String,
    pub orientation: Orientation,
    pub r_in_nm: f64,
    pub azimuth_rad: f64,
    pub wavelength_nm: f64,
    pub tier: Tier,
    /// Optional domain overrides.
    pub dx_nm: Option<f64>,
    pub extents_um: Option<[f64; 3]>,
    pub pml_cells: Option<usize>,
    /// Monitor-plane distance override, um from the source.
    pub monitor_um: Option<f64>,
    /// Index overrides by material name.
    pub indices: BTreeMap<String, f64>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// One of diameter, d_in, d_out, r_in, orientation, medium.
    pub parameter: String,
    /// Numeric values (nm) for numeric parameters.
    pub values_nm: Vec<f64>,
    /// Discrete values for orientation/medium sweeps.
    pub discrete: Vec<String>,
}

fn default_config(kind: GeometryKind) -> RunConfig {
    RunConfig {
        schema_version: SCHEMA_VERSION,
        kind,
        diameter_nm: None,
        d_in_nm: None,
        d_out_nm: None,
        core: None,
        background: "vacuum".into(),
        orientation: Orientation::Radial,
        r_in_nm: 0.0,
        azimuth_rad: 0.0,
        wavelength_nm: crate::scene::DEFAULT_WAVELENGTH_NM,
        tier: Tier::Fast,
        dx_nm: None,
        extents_um: None,
        pml_cells: None,
        monitor_um: None,
        indices: BTreeMap::new(),
        sweep: None,
    }
}

impl RunConfig {
    pub fn onf(diameter_nm: f64, clad: &str) -> Self {
        let mut c = default_config(GeometryKind::Onf);
        c.diameter_nm = Some(diameter_nm);
        c.background = clad.to_string();
        c
    }

    pub fn ncf(d_in_nm: f64, d_out_nm: f64, core: &str, background: &str) -> Self {
        let mut c = default_config(GeometryKind::Ncf);
        c.d_in_nm = Some(d_in_nm);
        c.d_out_nm = Some(d_out_nm);
        c.core = Some(core.to_string());
        c.background = background.to_string();
        c
    }

    /// Parse the `key = value` format; unknown keys and malformed values
    /// are errors carrying the line number.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: "empty key or value".to_string(),
                });
            }
            pairs.push((line_no, key.to_string(), value.to_string()));
        }

        let kind = pairs
            .iter()
            .find(|(_, k, _)| k == "geometry.kind")
            .map(|(l, _, v)| match v.as_str() {
                "onf" => Ok(GeometryKind::Onf),
                "ncf" => Ok(GeometryKind::Ncf),
                other => Err(ConfigError::Parse {
                    line: *l,
                    message: format!("geometry.kind must be onf or ncf, got '{other}'"),
                }),
            })
            .transpose()?
            .ok_or_else(|| ConfigError::Missing("geometry.kind".into()))?;
        let mut cfg = default_config(kind);
        let mut sweep_param: Option<String> = None;
        let mut sweep_values: Vec<f64> = Vec::new();
        let mut sweep_discrete: Vec<String> = Vec::new();

        for (line, key, value) in pairs {
            let err = |message: String| ConfigError::Parse { line, message };
            let num = |v: &str| -> Result<f64, ConfigError> {
                v.parse::<f64>()
                    .map_err(|_| err(format!("expected a number, got '{v}'")))
                    .and_then(|x| {
                        if x.is_finite() {
                            Ok(x)
                        } else {
                            Err(err(format!("non-finite number '{v}'")))
                        }
                    })
            };
            match key.as_str() {
                "schema_version" => {
                    let v = num(&value)? as u32;
                    if v != SCHEMA_VERSION {
                        return Err(err(format!(
                            "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
                        )));
                    }
                }
                "geometry.kind" => {}
                "geometry.diameter_nm" => cfg.diameter_nm = Some(num(&value)?),
                "geometry.d_in_nm" => cfg.d_in_nm = Some(num(&value)?),
                "geometry.d_out_nm" => cfg.d_out_nm = Some(num(&value)?),
                "geometry.core" => cfg.core = Some(value),
                "geometry.background" | "geometry.clad" => cfg.background = value,
                "source.orientation" => {
                    cfg.orientation =
                        Orientation::parse(&value).map_err(|e| err(e.to_string()))?
                }
                "source.r_in_nm" => cfg.r_in_nm = num(&value)?,
                "source.azimuth_rad" => cfg.azimuth_rad = num(&value)?,
                "source.wavelength_nm" => cfg.wavelength_nm = num(&value)?,
                "tier" => cfg.tier = Tier::parse(&value).map_err(|m| err(m))?,
                "domain.dx_nm" => cfg.dx_nm = Some(num(&value)?),
                "domain.pml_cells" => cfg.pml_cells = Some(num(&value)? as usize),
                "domain.monitor_um" => cfg.monitor_um = Some(num(&value)?),
                "domain.extents_um" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(err(format!(
                            "extents_um needs three numbers, got '{value}'"
                        )));
                    }
                    let mut e = [0.0; 3];
                    for (a, p) in e.iter_mut().zip(parts) {
                        *a = num(p)?;
                    }
                    cfg.extents_um = Some(e);
                }
                "sweep.parameter" => sweep_param = Some(value),
                "sweep.values_nm" => {
                    sweep_values = parse_values(&value).map_err(|m| err(m))?;
                }
                "sweep.values" => {
                    sweep_discrete = value.split_whitespace().map(|s| s.to_string()).collect();
                }
                k if k.starts_with("indices.") => {
                    let name = k.trim_start_matches("indices.").to_string();
                    let v = num(&value)?;
                    if !(v >= 1.0) {
                        return Err(err(format!("index for {name} must be >= 1, got {v}")));
                    }
                    cfg.indices.insert(name, v);
                }
                other => {
                    return Err(err(format!("unknown key '{other}'")));
                }
            }
        }

        if let Some(parameter) = sweep_param {
            cfg.sweep = Some(SweepConfig {
                parameter,
                values_nm: sweep_values,
                discrete: sweep_discrete,
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.kind {
            GeometryKind::Onf => {
                let d = self
                    .diameter_nm
                    .ok_or_else(|| ConfigError::Missing("geometry.diameter_nm".into()))?;
                if !(d > 0.0) {
                    return Err(ConfigError::Value {
                        key: "geometry.diameter_nm".into(),
                        message: format!("must be positive, got {d}"),
                    });
                }
            }
            GeometryKind::Ncf => {
                let d_in =
                    self.d_in_nm.ok_or_else(|| ConfigError::Missing("geometry.d_in_nm".into()))?;
                let d_out =
                    self.d_out_nm.ok_or_else(|| ConfigError::Missing("geometry.d_out_nm".into()))?;
                if !(d_in > 0.0 && d_in < d_out) {
                    return Err(ConfigError::Value {
                        key: "geometry.d_in_nm".into(),
                        message: format!("requires 0 < d_in < d_out, got {d_in} vs {d_out}"),
                    });
                }
                if self.core.is_none() {
                    return Err(ConfigError::Missing("geometry.core".into()));
                }
            }
        }
        if !(self.wavelength_nm > 0.0) {
            return Err(ConfigError::Value {
                key: "source.wavelength_nm".into(),
                message: format!("must be positive, got {}", self.wavelength_nm),
            });
        }
        if self.r_in_nm < 0.0 {
            return Err(ConfigError::Value {
                key: "source.r_in_nm".into(),
                message: format!("must be >= 0, got {}", self.r_in_nm),
            });
        }
        if let Some(sweep) = &self.sweep {
            let numeric = matches!(
                sweep.parameter.as_str(),
                "diameter" | "d_in" | "d_out" | "r_in"
            );
            let discrete = matches!(sweep.parameter.as_str(), "orientation" | "medium");
            if !numeric && !discrete {
                return Err(ConfigError::Value {
                    key: "sweep.parameter".into(),
                    message: format!(
                        "unknown parameter '{}' (diameter|d_in|d_out|r_in|orientation|medium)",
                        sweep.parameter
                    ),
                });
            }
            if numeric {
                if sweep.values_nm.is_empty() {
                    return Err(ConfigError::Value {
                        key: "sweep.values_nm".into(),
                        message: "numeric sweep needs a non-empty value list".into(),
                    });
                }
                if !sweep.values_nm.windows(2).all(|w| w[1] > w[0]) {
                    return Err(ConfigError::Value {
                        key: "sweep.values_nm".into(),
                        message: "values must be strictly increasing".into(),
                    });
                }
            } else if sweep.discrete.is_empty() {
                return Err(ConfigError::Value {
                    key: "sweep.values".into(),
                    message: "discrete sweep needs a non-empty value list".into(),
                });
            }
        }
        Ok(())
    }

    fn material(&self, name: &str) -> Result<Material, ConfigError> {
        if let Some(&n) = self.indices.get(name) {
            return Ok(Material::new(name, n).map_err(|e| ConfigError::Scene(e.to_string()))?);
        }
        Ok(Material::by_name(name)?)
    }

    /// Build the scene triple, with an optional swept-value override.
    pub fn scene(
        &self,
        override_value: Option<&SweptValue>,
    ) -> Result<(LayeredCylinderProfile, DipoleSource, SimulationDomain), ConfigError> {
        let mut cfg = self.clone();
        if let Some(v) = override_value {
            cfg.apply_value(v)?;
        }
        let mut profile = match cfg.kind {
            GeometryKind::Onf => LayeredCylinderProfile::onf(
                cfg.diameter_nm.expect("validated"),
                cfg.material(&cfg.background)?,
            )?,
            GeometryKind::Ncf => LayeredCylinderProfile::ncf(
                cfg.d_in_nm.expect("validated"),
                cfg.d_out_nm.expect("validated"),
                cfg.material(cfg.core.as_deref().expect("validated"))?,
                cfg.material(&cfg.background)?,
            )?,
        };
        // Index overrides also apply to the silica wall itself.
        let silica_idx = profile.layers.len() - 1;
        profile.layers[silica_idx].material = cfg.material("silica")?;
        let r_in = match cfg.kind {
            // The paper's ONF dipole sits on the fiber surface.
            GeometryKind::Onf => cfg.diameter_nm.expect("validated") / 2.0,
            GeometryKind::Ncf => cfg.r_in_nm,
        };
        let source =
            DipoleSource::new(r_in, cfg.azimuth_rad, 0.0, cfg.orientation, cfg.wavelength_nm)?;
        if cfg.kind == GeometryKind::Ncf && r_in >= cfg.d_in_nm.expect("validated") / 2.0 {
            return Err(ConfigError::Value {
                key: "source.r_in_nm".into(),
                message: format!(
                    "dipole offset {r_in} nm must stay inside the core (radius {} nm)",
                    cfg.d_in_nm.expect("validated") / 2.0
                ),
            });
        }
        let mut domain = cfg.tier.domain();
        if let Some(dx) = cfg.dx_nm {
            domain.dx_nm = dx;
        }
        if let Some(e) = cfg.extents_um {
            domain.extents_nm = [e[0] * 1000.0, e[1] * 1000.0, e[2] * 1000.0];
        }
        if let Some(p) = cfg.pml_cells {
            domain.pml_cells = p;
        }
        if let Some(m) = cfg.monitor_um {
            domain.monitor_z_offsets_nm = vec![m * 1000.0];
        }
        domain.validate()?;
        Ok((profile, source, domain))
    }

    pub fn apply_value(&mut self, v: &SweptValue) -> Result<(), ConfigError> {
        match v {
            SweptValue::Number(param, x) => match param.as_str() {
                "diameter" => self.diameter_nm = Some(*x),
                "d_in" => self.d_in_nm = Some(*x),
                "d_out" => self.d_out_nm = Some(*x),
                "r_in" => self.r_in_nm = *x,
                other => {
                    return Err(ConfigError::Value {
                        key: "sweep.parameter".into(),
                        message: format!("unknown numeric parameter '{other}'"),
                    })
                }
            },
            SweptValue::Discrete(param, s) => match param.as_str() {
                "orientation" => {
                    self.orientation =
                        Orientation::parse(s).map_err(|e| ConfigError::Scene(e.to_string()))?
                }
                "medium" => match self.kind {
                    GeometryKind::Onf => self.background = s.clone(),
                    GeometryKind::Ncf => self.core = Some(s.clone()),
                },
                other => {
                    return Err(ConfigError::Value {
                        key: "sweep.parameter".into(),
                        message: format!("unknown discrete parameter '{other}'"),
                    })
                }
            },
        }
        self.validate()
    }

    /// Medium label used in output rows: the ONF cladding medium or the
    /// NCF core medium.
    pub fn medium_label(&self) -> String {
        match self.kind {
            GeometryKind::Onf => self.background.clone(),
            GeometryKind::Ncf => self.core.clone().unwrap_or_default(),
        }
    }

    /// Canonical text form: sorted keys, one per line. Parsing it back
    /// yields an equal config.
    pub fn canonical_string(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        lines.push(format!("schema_version = {}", self.schema_version));
        lines.push(format!(
            "geometry.kind = {}",
            match self.kind {
                GeometryKind::Onf => "onf",
                GeometryKind::Ncf => "ncf",
            }
        ));
        if let Some(d) = self.diameter_nm {
            lines.push(format!("geometry.diameter_nm = {d}"));
        }
        if let Some(d) = self.d_in_nm {
            lines.push(format!("geometry.d_in_nm = {d}"));
        }
        if let Some(d) = self.d_out_nm {
            lines.push(format!("geometry.d_out_nm = {d}"));
        }
        if let Some(c) = &self.core {
            lines.push(format!("geometry.core = {c}"));
        }
        lines.push(format!("geometry.background = {}", self.background));
        lines.push(format!("source.orientation = {}", self.orientation.as_str()));
        lines.push(format!("source.r_in_nm = {}", self.r_in_nm));
        if self.azimuth_rad != 0.0 {
            lines.push(format!("source.azimuth_rad = {}", self.azimuth_rad));
        }
        lines.push(format!("source.wavelength_nm = {}", self.wavelength_nm));
        lines.push(format!("tier = {}", self.tier.as_str()));
        if let Some(dx) = self.dx_nm {
            lines.push(format!("domain.dx_nm = {dx}"));
        }
        if let Some(e) = self.extents_um {
            lines.push(format!("domain.extents_um = {} {} {}", e[0], e[1], e[2]));
        }
        if let Some(p) = self.pml_cells {
            lines.push(format!("domain.pml_cells = {p}"));
        }
        if let Some(m) = self.monitor_um {
            lines.push(format!("domain.monitor_um = {m}"));
        }
        for (name, v) in &self.indices {
            lines.push(format!("indices.{name} = {v}"));
        }
        if let Some(sw) = &self.sweep {
            lines.push(format!("sweep.parameter = {}", sw.parameter));
            if !sw.values_nm.is_empty() {
                let vals: Vec<String> = sw.values_nm.iter().map(|v| v.to_string()).collect();
                lines.push(format!("sweep.values_nm = {}", vals.join(" ")));
            }
            if !sw.discrete.is_empty() {
                lines.push(format!("sweep.values = {}", sw.discrete.join(" ")));
            }
        }
        lines.join("\n") + "\n"
    }

    pub fn hash(&self) -> String {
        fnv1a64_hex(self.canonical_string().as_bytes())
    }

    /// The swept value list as typed values.
    pub fn swept_values(&self) -> Vec<SweptValue> {
        match &self.sweep {
            None => Vec::new(),
            Some(sw) => {
                if !sw.values_nm.is_empty() {
                    sw.values_nm
                        .iter()
                        .map(|&v| SweptValue::Number(sw.parameter.clone(), v))
                        .collect()
                } else {
                    sw.discrete
                        .iter()
                        .map(|s| SweptValue::Discrete(sw.parameter.clone(), s.clone()))
                        .collect()
                }
            }
        }
    }
}

/// A single swept value: (parameter name, value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweptValue {
    Number(String, f64),
    Discrete(String, String),
}

impl SweptValue {
    pub fn label(&self) -> String {
        match self {
            SweptValue::Number(_, x) => crate::util::fmt_f64(*x),
            SweptValue::Discrete(_, s) => s.clone(),
        }
    }

    pub fn numeric(&self) -> Option<f64> {
        match self {
            SweptValue::Number(_, x) => Some(*x),
            SweptValue::Discrete(..) => None,
        }
    }
}

/// Value list syntax: either whitespace-separated numbers or a
/// `start:end:step` range (inclusive of both ends when step divides).
fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range must be start:end:step, got '{text}'"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'")))
            .collect::<Result<_, _>>()?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || end < start {
            return Err(format!("range needs end >= start and step > 0, got '{text}'"));
        }
        let n = ((end - start) / step).round() as usize;
        let mut out = Vec::with_capacity(n + 1);
        let mut v = start;
        let mut i = 0usize;
        while v <= end + 1e-9 {
            out.push(start + i as f64 * step);
            i += 1;
            v = start + i as f64 * step;
            if i > 1_000_000 {
                return Err("range produces too many values".into());
            }
        }
        Ok(out)
    } else {
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|p| p.parse::<f64>().map_err(|_| format!("bad number '{p}'")))
            .collect::<Result<_, _>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        Ok(vals)
    }
}
