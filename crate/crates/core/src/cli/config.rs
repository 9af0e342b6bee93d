//! Run-configuration schema. Units are carried in key suffixes; indices are 1-based.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::Value;

use crate::anharmonic::ChiMatrix;
use crate::constants::{MHZ, MICRON};
use crate::dynamics::ThermalEnvironment;
use crate::error::{Error, Result};
use crate::potential::{
    axial_from_lambdas, curvature_for_frequency, symmetric_cubic, symmetric_quartic, AxialPotential, Potential,
    TrapModel3D,
};
use crate::species::IonSpecies;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// extra species by label; `Be9`, `Mg24` and `MgH` are built in
    #[serde(default)]
    pub species: BTreeMap<String, SpeciesDef>,
    /// species labels in increasing-z order
    #[serde(default)]
    pub chain: Vec<String>,
    pub potential: Option<PotentialDef>,
    pub environment: Option<EnvironmentDef>,
    /// externally supplied cross-coupling matrix, used instead of computing one
    pub chi_table: Option<ChiTableDef>,
    pub modes: Option<ModesDef>,
    pub coherence: Option<CoherenceDef>,
    pub gate: Option<GateDef>,
    pub scan: Option<ScanDef>,
    pub null: Option<NullDef>,
    pub sensitivity: Option<SensitivityDef>,
    pub flop: Option<FlopDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesDef {
    pub mass_u: f64,
    #[serde(default = "one")]
    pub charge: i32,
}

fn one() -> i32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDef {
    pub kappa2_v_per_m2: Option<f64>,
    /// alternative to `kappa2_v_per_m2`: axial frequency of `reference`
    pub axial_mhz: Option<f64>,
    pub reference: Option<String>,
    /// signed characteristic lengths keyed by order
    #[serde(default)]
    pub lambdas_um: BTreeMap<String, f64>,
    /// raw coefficients keyed by order, V/m^n
    #[serde(default)]
    pub kappas: BTreeMap<String, f64>,
    #[serde(default)]
    pub field_v_per_m: f64,
    #[serde(default)]
    pub origin_um: f64,
    #[serde(default)]
    pub pseudo_gradient_ev_per_m: f64,
    pub gradient_reference: Option<String>,
    /// radial frequencies of `reference`; turns on the 3D model
    pub radial_mhz: Option<[f64; 2]>,
    pub radial_mass_scaling: Option<bool>,
    /// V/m^3 entries, axes written as letters, e.g. "xxz"
    #[serde(default)]
    pub cubic: Vec<TensorEntryDef>,
    /// V/m^4 entries
    #[serde(default)]
    pub quartic: Vec<TensorEntryDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntryDef {
    pub axes: String,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentDef {
    pub temperature_mk: Option<f64>,
    pub nbar: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiTableDef {
    pub matrix_hz: Vec<Vec<f64>>,
    pub frequencies_mhz: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesDef {
    /// wavevector difference for a Lamb-Dicke table, 1/um
    pub delta_k_per_um: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceDef {
    pub mode: usize,
    #[serde(default = "one_u32")]
    pub n_upper: u32,
    pub t_max_ms: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn one_u32() -> u32 {
    1
}

fn default_points() -> usize {
    401
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDef {
    pub mode: usize,
    /// delta / 2 pi for each row of the output table
    pub detuning_khz: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    Com,
    Length,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDef {
    pub kind: ScanKind,
    pub species: String,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullDef {
    pub pair: [String; 2],
    #[serde(default = "in_phase")]
    pub label: String,
    pub family: FamilyDef,
    pub bracket: [f64; 2],
    pub gradient: Option<GradientDef>,
}

fn in_phase() -> String {
    "in-phase".into()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDef {
    /// `kappa_n -> kappa_n (1 - p)`
    pub scale_kappa: Option<u32>,
    /// `kappa_n -> kappa_n + p * rate`, V/m^n
    #[serde(default)]
    pub kappa_rates: BTreeMap<String, f64>,
    #[serde(default)]
    pub field_rate_v_per_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientDef {
    /// out-of-phase order shift to reproduce at the null
    pub measured_hz: f64,
    pub reference: String,
    pub bracket_ev_per_m: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityDef {
    pub field_v_per_m: f64,
    pub mode: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlopDef {
    pub eta: [f64; 2],
    /// carrier Rabi frequency / 2 pi
    pub omega0_khz: f64,
    /// omitted: no decay
    pub decay_time_us: Option<f64>,
    pub fock: Option<usize>,
    pub nbar: Option<f64>,
    pub t_max_us: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn cfg_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

/// Parses and schema-checks a config document after applying `key.path=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| cfg_err("<document>", e.to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        cfg_err(&path, e.into_inner().to_string())
    })?;
    if cfg.version != SCHEMA_VERSION {
        return Err(cfg_err("version", format!("unsupported version {}, expected {SCHEMA_VERSION}", cfg.version)));
    }
    Ok(cfg)
}

/// `a.b.2.c=value`; the value is read as JSON when it parses, otherwise as a string.
fn apply_override(doc: &mut Value, arg: &str) -> Result<()> {
    let (key, raw) = arg.split_once('=').ok_or_else(|| cfg_err(arg, "override must look like key.path=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(cfg_err(key, "empty path segment"));
    }
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| cfg_err(key, format!("`{part}` is not an array index")))?;
                let len = items.len();
                items.get_mut(idx).ok_or_else(|| cfg_err(key, format!("index {idx} beyond length {len}")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert_with(|| if last { Value::Null } else { Value::Object(Default::default()) }),
            _ => return Err(cfg_err(key, format!("`{part}` descends into a scalar"))),
        };
    }
    *cur = value;
    Ok(())
}

fn builtin(label: &str) -> Option<IonSpecies> {
    match label {
        "Be9" => Some(IonSpecies::beryllium9()),
        "Mg24" => Some(IonSpecies::magnesium24()),
        "MgH" => Some(IonSpecies::magnesium_hydride()),
        _ => None,
    }
}

fn order_key(path: &str, key: &str) -> Result<u32> {
    match key.parse::<u32>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(cfg_err(path, format!("`{key}` is not an expansion order >= 2"))),
    }
}

fn tensor_axes<const R: usize>(path: &str, axes: &str) -> Result<[usize; R]> {
    let idx: Vec<usize> = axes
        .chars()
        .map(|c| match c {
            'x' => Ok(0),
            'y' => Ok(1),
            'z' => Ok(2),
            _ => Err(cfg_err(path, format!("axis `{c}` is not x, y or z"))),
        })
        .collect::<Result<_>>()?;
    idx.try_into().map_err(|_| cfg_err(path, format!("`{axes}` needs exactly {R} axes")))
}

/// One-based index into a list of `len` items.
pub fn one_based(path: &str, index: usize, len: usize) -> Result<usize> {
    if index == 0 || index > len {
        return Err(cfg_err(path, format!("index {index} outside 1..={len}")));
    }
    Ok(index - 1)
}

impl RunConfig {
    pub fn section<'a, T>(&self, name: &str, s: &'a Option<T>) -> Result<&'a T> {
        s.as_ref().ok_or_else(|| cfg_err(name, "section is required for this command"))
    }

    pub fn species_by_label(&self, path: &str, label: &str) -> Result<IonSpecies> {
        if let Some(d) = self.species.get(label) {
            return IonSpecies::new(label, d.mass_u, d.charge).map_err(|e| cfg_err(&format!("species.{label}"), e.to_string()));
        }
        builtin(label).ok_or_else(|| cfg_err(path, format!("unknown species `{label}`")))
    }

    pub fn chain_species(&self) -> Result<Vec<IonSpecies>> {
        if self.chain.is_empty() {
            return Err(cfg_err("chain", "at least one ion is required"));
        }
        self.chain.iter().enumerate().map(|(i, l)| self.species_by_label(&format!("chain.{i}"), l)).collect()
    }

    pub fn potential(&self) -> Result<Potential> {
        let p = self.section("potential", &self.potential)?;
        let reference = match &p.reference {
            Some(l) => Some(self.species_by_label("potential.reference", l)?),
            None => None,
        };
        let kappa2 = match (p.kappa2_v_per_m2, p.axial_mhz) {
            (Some(k), None) => k,
            (None, Some(f)) => {
                let r = reference.as_ref().ok_or_else(|| cfg_err("potential.reference", "needed with axial_mhz"))?;
                curvature_for_frequency(r, f * MHZ)
            }
            _ => return Err(cfg_err("potential", "give exactly one of kappa2_v_per_m2 and axial_mhz")),
        };
        let at = |field: &str, e: Error| cfg_err(&format!("potential.{field}"), e.to_string());
        let lambdas: BTreeMap<u32, f64> = p
            .lambdas_um
            .iter()
            .map(|(k, v)| Ok((order_key("potential.lambdas_um", k)?, v * MICRON)))
            .collect::<Result<_>>()?;
        let mut axial = axial_from_lambdas(kappa2, &lambdas).map_err(|e| at("lambdas_um", e))?;
        for (k, v) in &p.kappas {
            let n = order_key("potential.kappas", k)?;
            if n == 2 {
                return Err(cfg_err("potential.kappas", "set kappa_2 with kappa2_v_per_m2"));
            }
            axial.set_kappa(n, axial.kappa(n) + v).map_err(|e| at("kappas", e))?;
        }
        axial = axial.with_field(p.field_v_per_m).with_origin(p.origin_um * MICRON);
        if p.pseudo_gradient_ev_per_m != 0.0 {
            let label = p
                .gradient_reference
                .as_ref()
                .ok_or_else(|| cfg_err("potential.gradient_reference", "needed with a pseudopotential gradient"))?;
            let r = self.species_by_label("potential.gradient_reference", label)?;
            axial = axial.with_pseudo_gradient(p.pseudo_gradient_ev_per_m, &r);
        }
        self.trap(p, axial, reference)
    }

    fn trap(&self, p: &PotentialDef, axial: AxialPotential, reference: Option<IonSpecies>) -> Result<Potential> {
        let Some([fx, fy]) = p.radial_mhz else {
            if !p.cubic.is_empty() || !p.quartic.is_empty() || p.radial_mass_scaling.is_some() {
                return Err(cfg_err("potential.radial_mhz", "trap tensors need the 3D model"));
            }
            return Ok(axial.into());
        };
        let r = reference.ok_or_else(|| cfg_err("potential.reference", "needed with radial_mhz"))?;
        let curv = [curvature_for_frequency(&r, fx * MHZ), curvature_for_frequency(&r, fy * MHZ)];
        let mut trap = TrapModel3D::new(axial, curv, &r).map_err(|e| cfg_err("potential.radial_mhz", e.to_string()))?;
        if let Some(on) = p.radial_mass_scaling {
            trap = trap.with_mass_scaling(on);
        }
        if !p.cubic.is_empty() {
            let entries = p
                .cubic
                .iter()
                .enumerate()
                .map(|(i, e)| Ok((tensor_axes::<3>(&format!("potential.cubic.{i}.axes"), &e.axes)?, e.value)))
                .collect::<Result<Vec<_>>>()?;
            trap = trap.with_cubic(symmetric_cubic(&entries)).map_err(|e| cfg_err("potential.cubic", e.to_string()))?;
        }
        if !p.quartic.is_empty() {
            let entries = p
                .quartic
                .iter()
                .enumerate()
                .map(|(i, e)| Ok((tensor_axes::<4>(&format!("potential.quartic.{i}.axes"), &e.axes)?, e.value)))
                .collect::<Result<Vec<_>>>()?;
            trap = trap
                .with_quartic(symmetric_quartic(&entries))
                .map_err(|e| cfg_err("potential.quartic", e.to_string()))?;
        }
        Ok(trap.into())
    }

    pub fn environment(&self) -> Result<ThermalEnvironment> {
        let e = self.section("environment", &self.environment)?;
        match (e.temperature_mk, &e.nbar) {
            (Some(t), None) if t >= 0.0 => Ok(ThermalEnvironment::Temperature(t * 1e-3)),
            (Some(_), None) => Err(cfg_err("environment.temperature_mk", "must be non-negative")),
            (None, Some(n)) => Ok(ThermalEnvironment::Occupations(n.clone())),
            _ => Err(cfg_err("environment", "give exactly one of temperature_mk and nbar")),
        }
    }

    pub fn chi_table(&self) -> Option<Result<ChiMatrix>> {
        self.chi_table.as_ref().map(|t| {
            let n = t.frequencies_mhz.len();
            if t.matrix_hz.len() != n || t.matrix_hz.iter().any(|r| r.len() != n) {
                return Err(cfg_err("chi_table.matrix_hz", format!("must be {n}x{n} to match frequencies_mhz")));
            }
            let m = DMatrix::from_fn(n, n, |i, j| t.matrix_hz[i][j]);
            ChiMatrix::from_table(m, t.frequencies_mhz.iter().map(|f| f * MHZ).collect())
                .map_err(|e| cfg_err("chi_table", e.to_string()))
        })
    }
}
