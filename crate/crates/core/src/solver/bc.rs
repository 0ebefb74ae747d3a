use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{Material, PropertyTable, KELVIN_OFFSET, STEFAN_BOLTZMANN};
use crate::vda::VdaParams;

/// A temperature that is constant or tabulated against time (linear in
/// between, clamped outside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSeries {
    Constant(f64),
    Table(PropertyTable),
}

impl TimeSeries {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            TimeSeries::Constant(v) => *v,
            TimeSeries::Table(tab) => tab.at(t),
        }
    }

    fn validate(&self) -> Result<()> {
        if let TimeSeries::Constant(v) = self {
            if !v.is_finite() {
                return Err(Error::InvalidInput("temperature must be finite".into()));
            }
        }
        Ok(())
    }
}

impl From<f64> for TimeSeries {
    fn from(v: f64) -> Self {
        TimeSeries::Constant(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Adiabatic,
    /// Newton cooling plus optional linearized radiation to the same ambient.
    Robin {
        h: f64,
        ambient: TimeSeries,
        emissivity: f64,
    },
    Vda {
        params: VdaParams,
        material: Material,
        face_averaged: bool,
    },
    Dirichlet {
        temperature: TimeSeries,
    },
}

impl BoundaryCondition {
    pub fn convection(h: f64, ambient: f64) -> Self {
        BoundaryCondition::Robin {
            h,
            ambient: ambient.into(),
            emissivity: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundaryCondition::Adiabatic => Ok(()),
            BoundaryCondition::Robin {
                h,
                ambient,
                emissivity,
            } => {
                if !(*h >= 0.0 && h.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "heat transfer coefficient must be >= 0, got {h}"
                    )));
                }
                if !(0.0..=1.0).contains(emissivity) {
                    return Err(Error::InvalidInput(format!(
                        "emissivity must lie in [0, 1], got {emissivity}"
                    )));
                }
                ambient.validate()
            }
            BoundaryCondition::Vda { params, .. } => params.validate(),
            BoundaryCondition::Dirichlet { temperature } => temperature.validate(),
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, BoundaryCondition::Robin { emissivity, .. } if *emissivity > 0.0)
    }
}

/// Linearized radiation coefficient `eps sigma (T^2 + Ta^2)(T + Ta)` with
/// both temperatures converted to kelvin.
pub fn radiation_coefficient(emissivity: f64, t: f64, t_amb: f64) -> f64 {
    let tk = t + KELVIN_OFFSET;
    let ta = t_amb + KELVIN_OFFSET;
    emissivity * STEFAN_BOLTZMANN * (tk * tk + ta * ta) * (tk + ta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radiation_values() {
        assert_eq!(radiation_coefficient(0.0, 500.0, 20.0), 0.0);
        let h = radiation_coefficient(1.0, 20.0, 20.0);
        let expect = 4.0 * STEFAN_BOLTZMANN * 293.15f64.powi(3);
        assert!((h - expect).abs() < 1e-12);
        assert!((h - 5.71).abs() < 0.01);
        // secant form reproduces the nonlinear flux exactly
        let (t, ta) = (700.0, 20.0);
        let exact = STEFAN_BOLTZMANN * ((t + KELVIN_OFFSET).powi(4) - (ta + KELVIN_OFFSET).powi(4));
        assert!((radiation_coefficient(1.0, t, ta) * (t - ta) - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn time_series_interpolates() {
        let s = TimeSeries::Table(PropertyTable::new(&[(0.0, 20.0), (100.0, 120.0)]).unwrap());
        assert_eq!(s.at(50.0), 70.0);
        assert_eq!(s.at(500.0), 120.0);
        assert_eq!(TimeSeries::Constant(3.0).at(9.0), 3.0);
    }

    #[test]
    fn invalid_conditions() {
        assert!(BoundaryCondition::convection(-1.0, 20.0)
            .validate()
            .is_err());
        let bad = BoundaryCondition::Robin {
            h: 1.0,
            ambient: 20.0.into(),
            emissivity: 1.5,
        };
        assert!(bad.validate().is_err());
    }
}
