//! Simulation config files (TOML).
//!
//! A config carries `schema_version = 1`, the model variant, geometry,
//! materials, process data, one boundary block per label, probes, output
//! settings, solver settings and an optional calibration block. See
//! `configs/` at the repository root for complete examples.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{Material, PowderSpec, PropertyTable};
use crate::mesh::{BoundaryLabel, DomainVariant, GeometrySpec, Layering};
use crate::process::ProcessSpec;
use crate::solver::{BoundaryCondition, RegionMaterials, SolverSettings, TimeSeries};
use crate::vda::{geometric_factors, Shape, VdaParams, VdaVariant};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelVariant {
    #[serde(rename = "hf")]
    Hf,
    #[serde(rename = "htc-pp")]
    HtcPp,
    #[serde(rename = "vda-pp")]
    VdaPp,
    #[serde(rename = "vda-p")]
    VdaP,
}

impl ModelVariant {
    pub fn domain(self) -> DomainVariant {
        match self {
            ModelVariant::Hf => DomainVariant::Hf,
            ModelVariant::HtcPp | ModelVariant::VdaPp => DomainVariant::Pp,
            ModelVariant::VdaP => DomainVariant::P,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Hf => "hf",
            ModelVariant::HtcPp => "htc-pp",
            ModelVariant::VdaPp => "vda-pp",
            ModelVariant::VdaP => "vda-p",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<PropertyTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specific_heat: Option<PropertyTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductivity: Option<PropertyTable>,
    /// Name of the bulk material this powder is made of.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powder_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub porosity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particle_diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas_conductivity: Option<PropertyTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub part: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundarySpec {
    Adiabatic,
    Convection {
        h: f64,
        ambient: TimeSeries,
        #[serde(default)]
        emissivity: f64,
    },
    Radiation {
        emissivity: f64,
        ambient: TimeSeries,
    },
    Vda {
        variant: VdaVariant,
        thickness: f64,
        #[serde(default)]
        h_sp: f64,
        #[serde(default)]
        h_pp: f64,
        far_temperature: f64,
        material: String,
        #[serde(default = "plane")]
        shape: Shape,
        #[serde(default)]
        face_averaged: bool,
    },
    Dirichlet {
        temperature: TimeSeries,
    },
}

fn plane() -> Shape {
    Shape::Plane
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub name: String,
    pub point: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory, relative to the config file unless absolute.
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_probe_file")]
    pub probes: String,
    #[serde(default = "default_ledger_file")]
    pub ledger: String,
    #[serde(default = "default_summary_file")]
    pub summary: String,
    /// Write a VTK snapshot every this many steps (0 disables snapshots).
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("output")
}
fn default_probe_file() -> String {
    "probes.csv".into()
}
fn default_ledger_file() -> String {
    "energy.csv".into()
}
fn default_summary_file() -> String {
    "summary.txt".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            probes: default_probe_file(),
            ledger: default_ledger_file(),
            summary: default_summary_file(),
            snapshot_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationParameter {
    /// Dotted config path of the value being fitted, e.g. `boundary.bed_part.h`.
    pub path: String,
    /// Further paths that always take the same value as `path`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linked: Vec<String>,
    pub lower: f64,
    pub upper: f64,
    pub initial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Reference probe CSV, relative to the config file unless absolute.
    pub reference: PathBuf,
    pub parameters: Vec<CalibrationParameter>,
    pub probes: Vec<String>,
    #[serde(default)]
    pub validation: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_step0")]
    pub initial_step: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_cal_tol")]
    pub tolerance: f64,
    #[serde(default = "default_budget")]
    pub max_evaluations: usize,
    #[serde(default = "default_overlay")]
    pub overlay: String,
    #[serde(default = "default_trace")]
    pub trace: String,
}

fn default_step0() -> f64 {
    0.25
}
fn default_shrink() -> f64 {
    0.5
}
fn default_cal_tol() -> f64 {
    1e-3
}
fn default_budget() -> usize {
    200
}
fn default_overlay() -> String {
    "calibrated.toml".into()
}
fn default_trace() -> String {
    "calibration_trace.csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub schema_version: u32,
    pub variant: ModelVariant,
    /// Initial temperature of the whole domain and of fresh material (degC).
    pub initial_temperature: f64,
    pub geometry: GeometrySpec,
    pub materials: BTreeMap<String, MaterialSpec>,
    pub regions: RegionSpec,
    pub process: ProcessSpec,
    pub boundary: BTreeMap<String, BoundarySpec>,
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSpec>,
}

/// Parse a TOML document into a raw value tree.
pub fn parse_document(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(e.to_string()))
}

/// Apply `key=value` overrides with dotted keys; values are TOML literals,
/// falling back to plain strings. Numeric segments index arrays.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{o}' must look like key=value")))?;
        let value = parse_literal(raw.trim());
        set_path(doc, key.trim(), value)?;
    }
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Read a config document, resolving `extends = "other.toml"` (relative
/// to the including file) by merging this document over the other one.
/// Relative paths of the parent (output directory, calibration reference)
/// are rebased so they keep pointing at the same files.
pub fn load_document(path: &Path, depth: usize) -> Result<toml::Table> {
    if depth > 8 {
        return Err(Error::Config(format!(
            "{}: extends chain is too deep",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut doc =
        parse_document(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let Some(parent) = doc.remove("extends") else {
        return Ok(doc);
    };
    let toml::Value::String(parent) = parent else {
        return Err(Error::Config(format!(
            "{}: extends must be a file name",
            path.display()
        )));
    };
    let dir = path.parent().unwrap_or(Path::new(""));
    let parent_path = dir.join(&parent);
    let mut base = load_document(&parent_path, depth + 1)?;
    let parent_dir = parent_path.parent().unwrap_or(Path::new("")).to_path_buf();
    for key in [["output", "directory"], ["calibration", "reference"]] {
        if let Some(toml::Value::Table(t)) = base.get_mut(key[0]) {
            if let Some(toml::Value::String(p)) = t.get_mut(key[1]) {
                if Path::new(p.as_str()).is_relative() && parent_dir != dir {
                    *p = relative_to(&parent_dir.join(p.as_str()), dir)
                        .to_string_lossy()
                        .into_owned();
                }
            }
        }
    }
    merge(&mut base, doc);
    Ok(base)
}

fn relative_to(target: &Path, dir: &Path) -> PathBuf {
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let (t, d) = (abs(target), abs(dir));
    let common = t
        .components()
        .zip(d.components())
        .take_while(|(a, b)| a == b)
        .count();
    let mut out = PathBuf::new();
    for _ in d.components().skip(common) {
        out.push("..");
    }
    for c in t.components().skip(common) {
        out.push(c);
    }
    out
}

/// Merge `over` into `base`: tables recursively, everything else replaced.
pub fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Set a dotted path inside a document, creating intermediate tables.
pub fn set_path(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed key '{key}'")));
    }
    let mut slot = doc
        .entry(parts[0].to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    for part in &parts[1..] {
        slot = match slot {
            toml::Value::Table(t) => t
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = part.parse().map_err(|_| {
                    Error::Config(format!("'{part}' in '{key}' is not an array index"))
                })?;
                let len = a.len();
                a.get_mut(i).ok_or_else(|| {
                    Error::Config(format!("index {i} out of range (length {len}) in '{key}'"))
                })?
            }
            _ => {
                return Err(Error::Config(format!(
                    "'{key}' passes through a non-table value"
                )))
            }
        };
    }
    *slot = value;
    Ok(())
}

/// Read a dotted path as a number.
pub fn get_number(doc: &toml::Table, key: &str) -> Option<f64> {
    let mut parts = key.split('.');
    let mut v = doc.get(parts.next()?)?;
    for p in parts {
        v = match v {
            toml::Value::Table(t) => t.get(p)?,
            toml::Value::Array(a) => a.get(p.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl FromStr for SimulationConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let cfg: SimulationConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SimulationConfig {
    pub fn from_document(doc: toml::Table) -> Result<Self> {
        let cfg: SimulationConfig = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a file and apply overrides before validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let mut doc = load_document(path, 0)?;
        apply_overrides(&mut doc, overrides)?;
        Self::from_document(doc).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn layering(&self) -> Layering {
        Layering {
            layer_thickness: self.process.layer_thickness,
            layers_per_lump: self.process.layers_per_lump,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !self.initial_temperature.is_finite() {
            return Err(Error::Config("initial_temperature must be finite".into()));
        }
        let materials = self.build_materials()?;
        let domain = self.variant.domain();
        let need = |name: &Option<String>, what: &str| -> Result<()> {
            let n = name.as_ref().ok_or_else(|| {
                Error::Config(format!(
                    "variant {} needs regions.{what}",
                    self.variant.as_str()
                ))
            })?;
            if !materials.contains_key(n) {
                return Err(Error::Config(format!(
                    "regions.{what} names unknown material '{n}'"
                )));
            }
            Ok(())
        };
        need(&Some(self.regions.part.clone()), "part")?;
        if domain != DomainVariant::P {
            need(&self.regions.base, "base")?;
        }
        if domain == DomainVariant::Hf {
            need(&self.regions.bed, "bed")?;
        }
        let mut labels = BTreeMap::new();
        for (name, spec) in &self.boundary {
            let label: BoundaryLabel = name
                .parse()
                .map_err(|e| Error::Config(format!("boundary.{name}: {e}")))?;
            if !domain.labels().contains(&label) {
                return Err(Error::Config(format!(
                    "boundary.{name} does not exist in the {} model",
                    self.variant.as_str()
                )));
            }
            labels.insert(label, spec);
        }
        for l in domain.labels() {
            let spec = labels.get(l).ok_or_else(|| {
                Error::Config(format!(
                    "boundary.{l} is required by the {} model",
                    self.variant.as_str()
                ))
            })?;
            let reduced = matches!(
                l,
                BoundaryLabel::BedPart | BoundaryLabel::BedBase | BoundaryLabel::BasePart
            );
            let is_vda = matches!(spec, BoundarySpec::Vda { .. });
            match self.variant {
                ModelVariant::VdaPp | ModelVariant::VdaP if reduced && !is_vda => {
                    return Err(Error::Config(format!(
                        "boundary.{l} must be a vda block in the {} model",
                        self.variant.as_str()
                    )))
                }
                ModelVariant::HtcPp if reduced && is_vda => {
                    return Err(Error::Config(format!(
                        "boundary.{l} must be a convection block in the htc-pp model"
                    )))
                }
                _ => {}
            }
        }
        for (name, spec) in &self.boundary {
            self.boundary_condition(spec, &materials)
                .map_err(|e| Error::Config(format!("boundary.{name}: {e}")))?;
        }
        self.geometry_check()?;
        let mut names = std::collections::BTreeSet::new();
        for p in &self.probes {
            if !names.insert(&p.name) {
                return Err(Error::Config(format!("duplicate probe name '{}'", p.name)));
            }
            if p.name.contains(',') || p.name.is_empty() {
                return Err(Error::Config(format!(
                    "probe name '{}' is not a valid column name",
                    p.name
                )));
            }
            if !self.point_in_solid(p.point) {
                return Err(Error::Config(format!(
                    "probe '{}' at {:?} lies outside the final part/plate volume",
                    p.name, p.point
                )));
            }
        }
        if let Some(cal) = &self.calibration {
            if cal.parameters.is_empty() || cal.probes.is_empty() {
                return Err(Error::Config(
                    "calibration needs parameters and probes".into(),
                ));
            }
            for p in &cal.parameters {
                if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                    return Err(Error::Config(format!(
                        "calibration parameter {} has invalid bounds",
                        p.path
                    )));
                }
                if !(p.lower..=p.upper).contains(&p.initial) {
                    return Err(Error::Config(format!(
                        "calibration parameter {} starts outside its bounds",
                        p.path
                    )));
                }
            }
            for v in &cal.validation {
                if cal.probes.contains(v) {
                    return Err(Error::Config(format!(
                        "probe '{v}' is used for both calibration and validation"
                    )));
                }
            }
            for n in cal.probes.iter().chain(&cal.validation) {
                if !names.contains(n) {
                    return Err(Error::Config(format!(
                        "calibration refers to unknown probe '{n}'"
                    )));
                }
            }
        }
        Ok(())
    }

    fn geometry_check(&self) -> Result<()> {
        self.layering().counts(self.geometry.part.height)?;
        Ok(())
    }

    /// Whether a point lies in the final solid (part, or plate for models
    /// that include it), boundaries included.
    pub fn point_in_solid(&self, p: [f64; 3]) -> bool {
        let g = &self.geometry;
        let eps = 1e-12;
        let inside = |v: f64, lo: f64, hi: f64| v >= lo - eps && v <= hi + eps;
        if self.variant.domain() != DomainVariant::P
            && inside(p[0], g.plate.x[0], g.plate.x[1])
            && inside(p[1], g.plate.y[0], g.plate.y[1])
            && inside(p[2], -g.plate.thickness, 0.0)
        {
            return true;
        }
        let Ok((_, lumps)) = self.layering().counts(g.part.height) else {
            return false;
        };
        let dz = self.layering().lump_thickness();
        (0..lumps).any(|l| {
            let (ox, oy) = (
                l as f64 * g.part.offset_per_lump[0],
                l as f64 * g.part.offset_per_lump[1],
            );
            inside(p[0], g.part.footprint.x[0] + ox, g.part.footprint.x[1] + ox)
                && inside(p[1], g.part.footprint.y[0] + oy, g.part.footprint.y[1] + oy)
                && inside(p[2], l as f64 * dz, (l + 1) as f64 * dz)
        })
    }

    /// Resolve every named material; powders after their bulk materials.
    pub fn build_materials(&self) -> Result<BTreeMap<String, Material>> {
        let mut out = BTreeMap::new();
        for (name, m) in &self.materials {
            if m.powder_of.is_none() {
                let (Some(d), Some(c), Some(k)) = (&m.density, &m.specific_heat, &m.conductivity)
                else {
                    return Err(Error::Config(format!(
                        "materials.{name} needs density, specific_heat and conductivity"
                    )));
                };
                if m.porosity.is_some()
                    || m.particle_diameter.is_some()
                    || m.gas_conductivity.is_some()
                {
                    return Err(Error::Config(format!(
                        "materials.{name}: powder data needs powder_of"
                    )));
                }
                let mat = Material::bulk(name.clone(), d.clone(), c.clone(), k.clone())
                    .map_err(|e| Error::Config(format!("materials.{name}: {e}")))?;
                out.insert(name.clone(), mat);
            }
        }
        for (name, m) in &self.materials {
            if let Some(of) = &m.powder_of {
                if m.density.is_some() || m.specific_heat.is_some() || m.conductivity.is_some() {
                    return Err(Error::Config(format!(
                        "materials.{name}: a powder takes its tables from the bulk material"
                    )));
                }
                let bulk = out.get(of).ok_or_else(|| {
                    Error::Config(format!("materials.{name}: unknown bulk material '{of}'"))
                })?;
                let (Some(phi), Some(dp), Some(kg)) =
                    (m.porosity, m.particle_diameter, &m.gas_conductivity)
                else {
                    return Err(Error::Config(format!(
                        "materials.{name} needs porosity, particle_diameter and gas_conductivity"
                    )));
                };
                let spec = PowderSpec::new(phi, dp, kg.clone())
                    .map_err(|e| Error::Config(format!("materials.{name}: {e}")))?;
                let mat = Material::powder_of(name.clone(), bulk, spec)
                    .map_err(|e| Error::Config(format!("materials.{name}: {e}")))?;
                out.insert(name.clone(), mat);
            }
        }
        Ok(out)
    }

    pub fn region_materials(&self, materials: &BTreeMap<String, Material>) -> RegionMaterials {
        let get = |n: &Option<String>| n.as_ref().and_then(|n| materials.get(n).cloned());
        RegionMaterials {
            part: materials.get(&self.regions.part).cloned(),
            base: get(&self.regions.base),
            bed: get(&self.regions.bed),
        }
    }

    pub fn boundary_condition(
        &self,
        spec: &BoundarySpec,
        materials: &BTreeMap<String, Material>,
    ) -> Result<BoundaryCondition> {
        let bc = match spec {
            BoundarySpec::Adiabatic => BoundaryCondition::Adiabatic,
            BoundarySpec::Convection {
                h,
                ambient,
                emissivity,
            } => BoundaryCondition::Robin {
                h: *h,
                ambient: ambient.clone(),
                emissivity: *emissivity,
            },
            BoundarySpec::Radiation {
                emissivity,
                ambient,
            } => BoundaryCondition::Robin {
                h: 0.0,
                ambient: ambient.clone(),
                emissivity: *emissivity,
            },
            BoundarySpec::Vda {
                variant,
                thickness,
                h_sp,
                h_pp,
                far_temperature,
                material,
                shape,
                face_averaged,
            } => {
                let mat = materials
                    .get(material)
                    .ok_or_else(|| Error::Config(format!("unknown wall material '{material}'")))?;
                let (f_volume, f_surface) = geometric_factors(*shape, *thickness)?;
                BoundaryCondition::Vda {
                    params: VdaParams {
                        variant: *variant,
                        thickness: *thickness,
                        h_sp: *h_sp,
                        h_pp: *h_pp,
                        far_temperature: *far_temperature,
                        f_volume,
                        f_surface,
                    },
                    material: mat.clone(),
                    face_averaged: *face_averaged,
                }
            }
            BoundarySpec::Dirichlet { temperature } => BoundaryCondition::Dirichlet {
                temperature: temperature.clone(),
            },
        };
        bc.validate()?;
        Ok(bc)
    }

    pub fn boundary_conditions(
        &self,
        materials: &BTreeMap<String, Material>,
    ) -> Result<BTreeMap<BoundaryLabel, BoundaryCondition>> {
        self.boundary
            .iter()
            .map(|(name, spec)| Ok((name.parse()?, self.boundary_condition(spec, materials)?)))
            .collect()
    }

    /// Resolve a path given in the config relative to the config's directory.
    pub fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }
}
