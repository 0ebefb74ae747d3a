//! Temperature-dependent thermal properties.
//!
//! Tables are piecewise linear in temperature (degC) and clamp to the end
//! values outside their range. Powder phases are derived from a bulk
//! material: density scales with `1 - porosity`, specific heat is the bulk
//! value, and conductivity follows the spherical-particle mixture rule with a
//! radiative contribution between particles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stefan-Boltzmann constant, W/(m^2 K^4).
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;

/// Offset between degC and K.
pub const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PropertyTable {
    temperatures: Vec<f64>,
    values: Vec<f64>,
}

impl PropertyTable {
    pub fn new(breakpoints: &[(f64, f64)]) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidTable(
                "table needs at least one breakpoint".into(),
            ));
        }
        for (i, &(t, v)) in breakpoints.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::InvalidTable(format!(
                    "non-finite breakpoint ({t}, {v}) at index {i}"
                )));
            }
            if i > 0 && t <= breakpoints[i - 1].0 {
                return Err(Error::InvalidTable(format!(
                    "temperatures must be strictly increasing ({} then {t})",
                    breakpoints[i - 1].0
                )));
            }
        }
        Ok(Self {
            temperatures: breakpoints.iter().map(|p| p.0).collect(),
            values: breakpoints.iter().map(|p| p.1).collect(),
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(&[(20.0, value)])
    }

    /// Same table with every value checked to be strictly positive.
    pub fn positive(self, what: &str) -> Result<Self> {
        if let Some(v) = self.values.iter().find(|v| **v <= 0.0) {
            return Err(Error::InvalidTable(format!(
                "{what} must be positive, found {v}"
            )));
        }
        Ok(self)
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.temperatures
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn interpolate(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite temperature {t}")));
        }
        Ok(self.at(t))
    }

    /// Unchecked lookup for hot loops; a NaN temperature yields NaN.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let ts = &self.temperatures;
        let n = ts.len();
        if t.is_nan() {
            return f64::NAN;
        }
        if n == 1 || t <= ts[0] {
            return self.values[0];
        }
        if t >= ts[n - 1] {
            return self.values[n - 1];
        }
        // first index with ts[i] > t, guaranteed in 1..n
        let i = ts.partition_point(|&x| x <= t);
        let (t0, t1) = (ts[i - 1], ts[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

impl TryFrom<Vec<[f64; 2]>> for PropertyTable {
    type Error = Error;

    fn try_from(points: Vec<[f64; 2]>) -> Result<Self> {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        PropertyTable::new(&pts)
    }
}

impl From<PropertyTable> for Vec<[f64; 2]> {
    fn from(t: PropertyTable) -> Self {
        t.breakpoints().map(|(a, b)| [a, b]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowderSpec {
    porosity: f64,
    particle_diameter: f64,
    gas_conductivity: PropertyTable,
}

impl PowderSpec {
    pub fn new(
        porosity: f64,
        particle_diameter: f64,
        gas_conductivity: PropertyTable,
    ) -> Result<Self> {
        if !(porosity > 0.0 && porosity < 1.0) {
            return Err(Error::InvalidInput(format!(
                "porosity must be in (0,1), got {porosity}"
            )));
        }
        if !(particle_diameter > 0.0 && particle_diameter.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "particle diameter must be positive, got {particle_diameter}"
            )));
        }
        let gas_conductivity = gas_conductivity.positive("gas conductivity")?;
        Ok(Self {
            porosity,
            particle_diameter,
            gas_conductivity,
        })
    }

    pub fn porosity(&self) -> f64 {
        self.porosity
    }

    pub fn particle_diameter(&self) -> f64 {
        self.particle_diameter
    }

    pub fn gas_conductivity(&self) -> &PropertyTable {
        &self.gas_conductivity
    }
}

pub fn powder_density(solid_density: f64, porosity: f64) -> Result<f64> {
    if !(solid_density > 0.0) {
        return Err(Error::InvalidInput(format!(
            "solid density must be positive, got {solid_density}"
        )));
    }
    if !(0.0..1.0).contains(&porosity) {
        return Err(Error::InvalidInput(format!(
            "porosity must be in [0,1), got {porosity}"
        )));
    }
    Ok(solid_density * (1.0 - porosity))
}

/// Radiative conductivity between particles, `4/3 sigma T^3 D` with T in K.
pub fn radiative_conductivity(temperature: f64, particle_diameter: f64) -> f64 {
    let tk = temperature + KELVIN_OFFSET;
    4.0 / 3.0 * STEFAN_BOLTZMANN * tk * tk * tk * particle_diameter
}

/// Effective conductivity of a packed bed of spherical particles.
pub fn powder_conductivity(
    k_solid: f64,
    k_gas: f64,
    porosity: f64,
    particle_diameter: f64,
    temperature: f64,
) -> Result<f64> {
    if !(k_gas > 0.0) || !(k_solid > 0.0) {
        return Err(Error::InvalidInput(format!(
            "conductivities must be positive (solid {k_solid}, gas {k_gas})"
        )));
    }
    if k_gas >= k_solid {
        return Err(Error::InvalidInput(format!(
            "gas conductivity {k_gas} must be below solid conductivity {k_solid}"
        )));
    }
    if !(porosity > 0.0 && porosity < 1.0) {
        return Err(Error::InvalidInput(format!(
            "porosity must be in (0,1), got {porosity}"
        )));
    }
    if !(particle_diameter > 0.0) {
        return Err(Error::InvalidInput(format!(
            "particle diameter must be positive, got {particle_diameter}"
        )));
    }
    if !temperature.is_finite() || temperature + KELVIN_OFFSET <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "invalid temperature {temperature}"
        )));
    }
    Ok(powder_conductivity_unchecked(
        k_solid,
        k_gas,
        porosity,
        particle_diameter,
        temperature,
    ))
}

#[inline]
fn powder_conductivity_unchecked(
    k_solid: f64,
    k_gas: f64,
    porosity: f64,
    diameter: f64,
    temperature: f64,
) -> f64 {
    let k_rad = radiative_conductivity(temperature, diameter);
    let root = (1.0 - porosity).sqrt();
    let contrast = 2.0 / (1.0 - k_gas / k_solid);
    let ratio = (1.0 - root) * (1.0 + porosity * k_rad / k_gas)
        + root * contrast * (contrast * (k_solid / k_gas).ln() - 1.0)
        + root * k_rad / k_gas;
    k_gas * ratio
}

/// A named material phase with its three thermal property curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    name: String,
    density: PropertyTable,
    specific_heat: PropertyTable,
    conductivity: PropertyTable,
    powder: Option<PowderSpec>,
}

impl Material {
    pub fn bulk(
        name: impl Into<String>,
        density: PropertyTable,
        specific_heat: PropertyTable,
        conductivity: PropertyTable,
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            density: density.positive("density")?,
            specific_heat: specific_heat.positive("specific heat")?,
            conductivity: conductivity.positive("conductivity")?,
            powder: None,
        })
    }

    /// Powder phase of `bulk`. The solid conductivity must stay above the gas
    /// conductivity over both tables' ranges.
    pub fn powder_of(name: impl Into<String>, bulk: &Material, spec: PowderSpec) -> Result<Self> {
        if bulk.powder.is_some() {
            return Err(Error::InvalidInput(format!(
                "material '{}' is already a powder phase",
                bulk.name
            )));
        }
        let probes: Vec<f64> = bulk
            .conductivity
            .breakpoints()
            .map(|p| p.0)
            .chain(spec.gas_conductivity.breakpoints().map(|p| p.0))
            .collect();
        for t in probes {
            let (ks, kg) = (bulk.conductivity.at(t), spec.gas_conductivity.at(t));
            if kg >= ks {
                return Err(Error::InvalidInput(format!(
                    "gas conductivity {kg} not below solid conductivity {ks} at {t} degC"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            density: bulk.density.clone(),
            specific_heat: bulk.specific_heat.clone(),
            conductivity: bulk.conductivity.clone(),
            powder: Some(spec),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn powder(&self) -> Option<&PowderSpec> {
        self.powder.as_ref()
    }

    #[inline]
    pub fn density(&self, t: f64) -> f64 {
        let rho = self.density.at(t);
        match &self.powder {
            Some(p) => rho * (1.0 - p.porosity),
            None => rho,
        }
    }

    #[inline]
    pub fn specific_heat(&self, t: f64) -> f64 {
        self.specific_heat.at(t)
    }

    #[inline]
    pub fn conductivity(&self, t: f64) -> f64 {
        let ks = self.conductivity.at(t);
        match &self.powder {
            Some(p) => powder_conductivity_unchecked(
                ks,
                p.gas_conductivity.at(t),
                p.porosity,
                p.particle_diameter,
                t,
            ),
            None => ks,
        }
    }

    /// Volumetric heat capacity rho*c, J/(m^3 degC).
    #[inline]
    pub fn capacity(&self, t: f64) -> f64 {
        self.density(t) * self.specific_heat(t)
    }

    /// True when no property varies with temperature.
    pub fn is_constant(&self) -> bool {
        self.powder.is_none()
            && self.density.is_constant()
            && self.specific_heat.is_constant()
            && self.conductivity.is_constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m300_conductivity() -> PropertyTable {
        PropertyTable::new(&[(20.0, 14.2), (600.0, 21.0), (1300.0, 28.6), (1600.0, 28.6)]).unwrap()
    }

    #[test]
    fn m300_conductivity_lookup() {
        let k = m300_conductivity();
        assert_eq!(k.interpolate(20.0).unwrap(), 14.2);
        assert!((k.interpolate(310.0).unwrap() - 17.6).abs() < 1e-12);
        assert_eq!(k.interpolate(2000.0).unwrap(), 28.6);
        assert_eq!(k.interpolate(-50.0).unwrap(), 14.2);
    }

    #[test]
    fn non_finite_temperature_is_an_error() {
        assert!(m300_conductivity().interpolate(f64::NAN).is_err());
        assert!(m300_conductivity().interpolate(f64::INFINITY).is_err());
    }

    #[test]
    fn table_validation() {
        assert!(PropertyTable::new(&[]).is_err());
        assert!(PropertyTable::new(&[(20.0, 1.0), (20.0, 2.0)]).is_err());
        assert!(PropertyTable::new(&[(30.0, 1.0), (20.0, 2.0)]).is_err());
        assert!(PropertyTable::new(&[(20.0, f64::NAN)]).is_err());
        assert!(PropertyTable::constant(-1.0)
            .unwrap()
            .positive("density")
            .is_err());
    }

    #[test]
    fn powder_density_examples() {
        assert!((powder_density(8100.0, 0.46).unwrap() - 4374.0).abs() < 1e-9);
        assert_eq!(powder_density(1000.0, 0.0).unwrap(), 1000.0);
        assert_eq!(powder_density(8100.0, 0.5).unwrap(), 4050.0);
        assert!(powder_density(8100.0, 1.0).is_err());
        assert!(powder_density(8100.0, -0.1).is_err());
    }

    #[test]
    fn powder_conductivity_errors() {
        assert!(powder_conductivity(0.02, 0.02, 0.4, 3e-5, 20.0).is_err());
        assert!(powder_conductivity(0.01, 0.02, 0.4, 3e-5, 20.0).is_err());
        assert!(powder_conductivity(10.0, 0.02, 1.2, 3e-5, 20.0).is_err());
        assert!(powder_conductivity(10.0, 0.02, 0.4, 0.0, 20.0).is_err());
        assert!(powder_conductivity(10.0, -0.02, 0.4, 3e-5, 20.0).is_err());
    }

    #[test]
    fn powder_material_scales_density_and_keeps_specific_heat() {
        let bulk = Material::bulk(
            "m300",
            PropertyTable::constant(8100.0).unwrap(),
            PropertyTable::constant(500.0).unwrap(),
            m300_conductivity(),
        )
        .unwrap();
        let gas = PropertyTable::constant(0.0177).unwrap();
        let powder = Material::powder_of(
            "m300_powder",
            &bulk,
            PowderSpec::new(0.46, 3e-5, gas).unwrap(),
        )
        .unwrap();
        assert!((powder.density(100.0) - 4374.0).abs() < 1e-9);
        assert_eq!(powder.specific_heat(100.0), 500.0);
        let k = powder.conductivity(100.0);
        assert!(k > 0.0177 && k < bulk.conductivity(100.0));
        assert!(!powder.is_constant());
        assert!(Material::powder_of(
            "again",
            &powder,
            PowderSpec::new(0.4, 3e-5, PropertyTable::constant(0.02).unwrap()).unwrap()
        )
        .is_err());
    }

    #[test]
    fn stefan_boltzmann_is_fixed() {
        assert_eq!(STEFAN_BOLTZMANN, 5.67e-8);
    }
}
