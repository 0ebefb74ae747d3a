//! Printing/cooling time-step schedules and the lumped layer heat source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Printing,
    Cooling,
    FinalCooldown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub kind: StepKind,
    pub dt: f64,
    /// Element layer activated by a printing step.
    pub layer: Option<usize>,
    pub power: f64,
    pub absorption: f64,
}

impl Step {
    /// Absorbed power, zero outside printing steps.
    pub fn absorbed_power(&self) -> f64 {
        match self.kind {
            StepKind::Printing => self.absorption * self.power,
            _ => 0.0,
        }
    }
}

/// Geometric ramp of time steps after the last layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CooldownSpec {
    /// Simulated time horizon of the cooldown phase (s). Zero disables it.
    pub duration: f64,
    #[serde(default = "default_first_dt")]
    pub first_dt: f64,
    #[serde(default = "default_growth")]
    pub growth: f64,
    /// Stop early once every temperature is this close to ambient (degC).
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_first_dt() -> f64 {
    10.0
}
fn default_growth() -> f64 {
    1.5
}
fn default_tolerance() -> f64 {
    1.0
}

impl Default for CooldownSpec {
    fn default() -> Self {
        Self {
            duration: 0.0,
            first_dt: default_first_dt(),
            growth: default_growth(),
            tolerance: default_tolerance(),
        }
    }
}

/// Process parameters as given in the config file.
///
/// The scan time is either explicit (`scan_time`) or derived from
/// `scan_area / (scan_speed * hatch_spacing)`. Odd layers (1st, 3rd, ...)
/// use `recoat_time`; even layers use `recoat_time_even` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub power: f64,
    pub absorption: f64,
    pub layer_thickness: f64,
    #[serde(default = "default_lump")]
    pub layers_per_lump: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hatch_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_area: Option<f64>,
    pub recoat_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recoat_time_even: Option<f64>,
    #[serde(default)]
    pub cooldown: CooldownSpec,
}

fn default_lump() -> usize {
    1
}

impl ProcessSpec {
    pub fn resolved_scan_time(&self) -> Result<f64> {
        if let Some(t) = self.scan_time {
            return Ok(t);
        }
        match (self.scan_speed, self.hatch_spacing, self.scan_area) {
            (Some(v), Some(h), Some(a)) => {
                if !(v > 0.0 && h > 0.0 && a > 0.0) {
                    return Err(Error::Schedule(
                        "scan speed, hatch spacing and area must be positive".into(),
                    ));
                }
                Ok(a / (v * h))
            }
            _ => Err(Error::Schedule(
                "give either scan_time or all of scan_speed, hatch_spacing, scan_area".into(),
            )),
        }
    }

    /// Schedule for `n_layers` physical layers grouped `layers_per_lump` at a time.
    pub fn schedule(&self, n_layers: usize) -> Result<ProcessSchedule> {
        if self.layers_per_lump == 0 || !n_layers.is_multiple_of(self.layers_per_lump) {
            return Err(Error::Schedule(format!(
                "{n_layers} layers cannot be grouped in lumps of {}",
                self.layers_per_lump
            )));
        }
        let scan = self.resolved_scan_time()?;
        let lump = self.layers_per_lump;
        let odd = self.recoat_time;
        let even = self.recoat_time_even.unwrap_or(odd);
        // physical layers are numbered from 1
        let recoat: Vec<f64> = (0..n_layers / lump)
            .map(|l| {
                (l * lump + 1..=(l + 1) * lump)
                    .map(|i| if i % 2 == 1 { odd } else { even })
                    .sum()
            })
            .collect();
        build_schedule_lumped(
            n_layers / lump,
            scan * lump as f64,
            &recoat,
            self.power,
            self.absorption,
            self.cooldown,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSchedule {
    steps: Vec<Step>,
    cooldown_tolerance: f64,
}

impl ProcessSchedule {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).sum()
    }

    /// End time of the last printing or cooling step.
    pub fn printing_end(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.kind != StepKind::FinalCooldown)
            .map(|s| s.dt)
            .sum()
    }

    pub fn n_layers(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.kind == StepKind::Printing)
            .count()
    }

    pub fn cooldown_tolerance(&self) -> f64 {
        self.cooldown_tolerance
    }

    pub fn total_input_energy(&self) -> f64 {
        self.steps.iter().map(|s| s.absorbed_power() * s.dt).sum()
    }
}

/// Printing step followed by one cooling step per layer, then the cooldown
/// ramp. `recoat_odd` applies to layers 1, 3, ...; `recoat_even` to 2, 4, ...
pub fn build_schedule(
    n_layers: usize,
    scan_time: f64,
    recoat_odd: f64,
    recoat_even: f64,
    power: f64,
    absorption: f64,
    cooldown: CooldownSpec,
) -> Result<ProcessSchedule> {
    let recoat: Vec<f64> = (1..=n_layers)
        .map(|i| if i % 2 == 1 { recoat_odd } else { recoat_even })
        .collect();
    build_schedule_lumped(n_layers, scan_time, &recoat, power, absorption, cooldown)
}

fn build_schedule_lumped(
    n_layers: usize,
    scan_time: f64,
    recoat: &[f64],
    power: f64,
    absorption: f64,
    cooldown: CooldownSpec,
) -> Result<ProcessSchedule> {
    if n_layers == 0 {
        return Err(Error::Schedule("at least one layer is required".into()));
    }
    if !(scan_time > 0.0 && scan_time.is_finite()) {
        return Err(Error::Schedule(format!(
            "scan time must be positive, got {scan_time}"
        )));
    }
    if let Some(r) = recoat.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Schedule(format!(
            "recoat time must be positive, got {r}"
        )));
    }
    if !(power >= 0.0 && power.is_finite()) {
        return Err(Error::Schedule(format!(
            "power must be non-negative, got {power}"
        )));
    }
    if !(absorption > 0.0 && absorption <= 1.0) {
        return Err(Error::Schedule(format!(
            "absorption must lie in (0, 1], got {absorption}"
        )));
    }
    let mut steps = Vec::with_capacity(2 * n_layers);
    for (layer, &dt_cool) in recoat.iter().enumerate().take(n_layers) {
        steps.push(Step {
            kind: StepKind::Printing,
            dt: scan_time,
            layer: Some(layer),
            power,
            absorption,
        });
        steps.push(Step {
            kind: StepKind::Cooling,
            dt: dt_cool,
            layer: None,
            power: 0.0,
            absorption,
        });
    }
    if cooldown.duration > 0.0 {
        if !(cooldown.first_dt > 0.0 && cooldown.growth >= 1.0) {
            return Err(Error::Schedule(
                "cooldown needs first_dt > 0 and growth >= 1".into(),
            ));
        }
        let mut t = 0.0;
        let mut dt = cooldown.first_dt;
        while t < cooldown.duration * (1.0 - 1e-12) {
            let step = dt.min(cooldown.duration - t);
            steps.push(Step {
                kind: StepKind::FinalCooldown,
                dt: step,
                layer: None,
                power: 0.0,
                absorption,
            });
            t += step;
            dt *= cooldown.growth;
        }
    } else if cooldown.duration < 0.0 {
        return Err(Error::Schedule(
            "cooldown duration must be non-negative".into(),
        ));
    }
    Ok(ProcessSchedule {
        steps,
        cooldown_tolerance: cooldown.tolerance,
    })
}

/// Uniform volumetric source over the layer swept by the laser (W/m^3).
pub fn source_density(step: &Step, pool_volume: f64) -> Result<f64> {
    if !(pool_volume > 0.0) {
        return Err(Error::Schedule(format!(
            "layer volume must be positive, got {pool_volume}"
        )));
    }
    Ok(step.absorbed_power() / pool_volume)
}
