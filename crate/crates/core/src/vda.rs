//! Virtual-domain walls: a 1D transient slab standing in for an excluded
//! region (powder bed or build plate), condensed into a Robin condition
//! `q = h_loss * (T_solid - T_loss)` at the solid surface.
//!
//! Contact walls couple to the solid through `h_sp` and to the far
//! temperature `T0` through `h_pp`. The Dirichlet wall ties its first node to
//! the solid temperature and its last node to `T0`.
//!
//! Scaled inputs follow the usual closed-form convention:
//! `m = rho c F_volume s / dt` and `k_hat = k F_volume / s`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::Material;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VdaVariant {
    /// One linear element, contact at both ends ("1E-Q1").
    OneLinear,
    /// Two linear elements ("2E-Q1").
    TwoLinear,
    /// One quadratic element ("1E-Q2").
    OneQuadratic,
    /// One linear element, solid-side node at the solid temperature and far
    /// node fixed at `T0` ("1E-Q1-D").
    Dirichlet,
    /// `elements` Lagrange elements of order 1 or 2 with contact ends
    /// ("GENERAL-<n>E-Q<p>").
    General { elements: usize, order: u8 },
}

impl VdaVariant {
    /// (elements, order, dirichlet ends)
    pub fn discretization(self) -> (usize, u8, bool) {
        match self {
            VdaVariant::OneLinear => (1, 1, false),
            VdaVariant::TwoLinear => (2, 1, false),
            VdaVariant::OneQuadratic => (1, 2, false),
            VdaVariant::Dirichlet => (1, 1, true),
            VdaVariant::General { elements, order } => (elements, order, false),
        }
    }

    pub fn n_nodes(self) -> usize {
        let (n, p, _) = self.discretization();
        n * p as usize + 1
    }

    /// Number of stored temperatures per wall.
    pub fn state_len(self) -> usize {
        let (_, _, d) = self.discretization();
        if d {
            self.n_nodes() - 1
        } else {
            self.n_nodes()
        }
    }

    pub fn is_contact(self) -> bool {
        !self.discretization().2
    }

    fn validate(self) -> Result<()> {
        if let VdaVariant::General { elements, order } = self {
            if elements == 0 || !(order == 1 || order == 2) {
                return Err(Error::InvalidInput(format!(
                    "general wall needs >= 1 element of order 1 or 2, got {elements} x Q{order}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for VdaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VdaVariant::OneLinear => f.write_str("1E-Q1"),
            VdaVariant::TwoLinear => f.write_str("2E-Q1"),
            VdaVariant::OneQuadratic => f.write_str("1E-Q2"),
            VdaVariant::Dirichlet => f.write_str("1E-Q1-D"),
            VdaVariant::General { elements, order } => write!(f, "GENERAL-{elements}E-Q{order}"),
        }
    }
}

impl FromStr for VdaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = match s.to_ascii_uppercase().as_str() {
            "1E-Q1" => VdaVariant::OneLinear,
            "2E-Q1" => VdaVariant::TwoLinear,
            "1E-Q2" => VdaVariant::OneQuadratic,
            "1E-Q1-D" => VdaVariant::Dirichlet,
            other => {
                let rest = other
                    .strip_prefix("GENERAL-")
                    .ok_or_else(|| Error::Config(format!("unknown wall variant '{s}'")))?;
                let (n, p) = rest.split_once("E-Q").ok_or_else(|| {
                    Error::Config(format!("malformed general wall variant '{s}'"))
                })?;
                let elements = n
                    .parse()
                    .map_err(|_| Error::Config(format!("bad element count in '{s}'")))?;
                let order = p
                    .parse()
                    .map_err(|_| Error::Config(format!("bad order in '{s}'")))?;
                VdaVariant::General { elements, order }
            }
        };
        v.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(v)
    }
}

impl Serialize for VdaVariant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VdaVariant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Plane,
    Cylinder { radius: f64 },
    Sphere { radius: f64 },
}

/// Correction factors `(F_volume, F_surface)` for a wall of thickness `s`
/// wrapped around a convex solid of radius `radius`.
pub fn geometric_factors(shape: Shape, thickness: f64) -> Result<(f64, f64)> {
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "wall thickness must be positive, got {thickness}"
        )));
    }
    let check = |r: f64| {
        if r > 0.0 && r.is_finite() {
            Ok(r)
        } else {
            Err(Error::InvalidInput(format!(
                "radius must be positive, got {r}"
            )))
        }
    };
    let s = thickness;
    Ok(match shape {
        Shape::Plane => (1.0, 1.0),
        Shape::Cylinder { radius } => {
            let r = check(radius)?;
            (((r + s).powi(2) - r * r) / (2.0 * r * s), (r + s) / r)
        }
        Shape::Sphere { radius } => {
            let r = check(radius)?;
            (
                ((r + s).powi(3) - r.powi(3)) / (3.0 * r * r * s),
                (r + s).powi(2) / (r * r),
            )
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinCoefficients {
    pub h_loss: f64,
    pub t_loss: f64,
}

impl RobinCoefficients {
    pub fn flux(&self, t_solid: f64) -> f64 {
        self.h_loss * (t_solid - self.t_loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdaParams {
    pub variant: VdaVariant,
    pub thickness: f64,
    pub h_sp: f64,
    pub h_pp: f64,
    pub far_temperature: f64,
    pub f_volume: f64,
    pub f_surface: f64,
}

impl VdaParams {
    pub fn validate(&self) -> Result<()> {
        self.variant.validate()?;
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "wall thickness must be positive, got {}",
                self.thickness
            )));
        }
        if self.variant.is_contact() && !(self.h_sp > 0.0 && self.h_pp > 0.0) {
            return Err(Error::InvalidInput(format!(
                "contact wall needs h_sp, h_pp > 0, got {} and {}",
                self.h_sp, self.h_pp
            )));
        }
        if !self.far_temperature.is_finite() {
            return Err(Error::InvalidInput("far temperature must be finite".into()));
        }
        if !(self.f_volume > 0.0 && self.f_surface > 0.0) {
            return Err(Error::InvalidInput(
                "correction factors must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Vec<f64> {
        vec![self.far_temperature; self.variant.state_len()]
    }

    /// Temperature at which the wall properties are frozen for a step.
    pub fn property_temperature(&self, state: &[f64]) -> f64 {
        let sum: f64 = state.iter().sum();
        if self.variant.is_contact() {
            sum / state.len() as f64
        } else {
            (sum + self.far_temperature) / (state.len() + 1) as f64
        }
    }

    /// Scaled inputs `(m, k_hat)` for a material evaluated at `temp`.
    pub fn scaled(&self, material: &Material, temp: f64, dt: f64) -> Result<(f64, f64)> {
        if !(dt > 0.0) {
            return Err(Error::SingularWall(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let rho_c = material.capacity(temp);
        let k = material.conductivity(temp);
        if !(rho_c > 0.0 && k > 0.0) {
            return Err(Error::SingularWall(format!(
                "non-positive wall properties at {temp} degC: rho*c = {rho_c}, k = {k}"
            )));
        }
        Ok((
            rho_c * self.f_volume * self.thickness / dt,
            k * self.f_volume / self.thickness,
        ))
    }

    /// Condensed step for one wall: Robin pair (with `F_surface` applied)
    /// plus what is needed to advance the wall afterwards.
    pub fn prepare(&self, material: &Material, dt: f64, state: &[f64]) -> Result<WallStep> {
        let temp = self.property_temperature(state);
        let (m, k_hat) = self.scaled(material, temp, dt)?;
        let matrices = WallMatrices::scaled(self.variant, m, k_hat)?;
        let mut step = condense(&matrices, self.h_sp, self.h_pp, self.far_temperature, state)?;
        // the closed forms keep full precision where the wall matrix is
        // nearly singular (large k_hat against small m and h_pp)
        if !matches!(self.variant, VdaVariant::General { .. }) {
            step.robin = closed_form(
                self.variant,
                m,
                k_hat,
                self.h_sp,
                self.h_pp,
                state,
                self.far_temperature,
            )?;
        }
        step.robin.h_loss *= self.f_surface;
        Ok(step)
    }
}

/// Lumped mass (diagonal) and conductivity matrices of the 1D wall.
#[derive(Debug, Clone, PartialEq)]
pub struct WallMatrices {
    pub variant: VdaVariant,
    pub mass: DVector<f64>,
    pub stiffness: DMatrix<f64>,
}

impl WallMatrices {
    /// Matrices for total wall mass `mass_total` (per unit area) and
    /// conductance `conductance` (`k / s`).
    fn assemble(variant: VdaVariant, mass_total: f64, conductance: f64) -> Result<Self> {
        variant.validate()?;
        let (n, p, _) = variant.discretization();
        let nn = variant.n_nodes();
        let mut mass = DVector::zeros(nn);
        let mut stiffness = DMatrix::zeros(nn, nn);
        let me = mass_total / n as f64;
        let ke = conductance * n as f64;
        for e in 0..n {
            let o = e * p as usize;
            if p == 1 {
                mass[o] += 0.5 * me;
                mass[o + 1] += 0.5 * me;
                for (a, b, v) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
                    stiffness[(o + a, o + b)] += ke * v;
                }
            } else {
                let w = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
                let kref = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
                for a in 0..3 {
                    mass[o + a] += w[a] * me;
                    for b in 0..3 {
                        stiffness[(o + a, o + b)] += ke * kref[a][b] / 3.0;
                    }
                }
            }
        }
        Ok(Self {
            variant,
            mass,
            stiffness,
        })
    }

    /// Matrices already divided by the time step: `mass = M / dt`, built
    /// from the scaled inputs `m` and `k_hat`.
    pub fn scaled(variant: VdaVariant, m: f64, k_hat: f64) -> Result<Self> {
        if !(m >= 0.0 && k_hat > 0.0 && m.is_finite() && k_hat.is_finite()) {
            return Err(Error::SingularWall(format!(
                "invalid scaled wall inputs m = {m}, k_hat = {k_hat}"
            )));
        }
        Self::assemble(variant, m, k_hat)
    }
}

/// Dimensional wall matrices: `M = rho c F_volume * (lumped lengths)` and
/// `K = k F_volume * (1D stiffness)`.
pub fn wall_matrices(params: &VdaParams, rho_c: f64, k: f64) -> Result<WallMatrices> {
    params.validate()?;
    if !(rho_c > 0.0 && k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wall properties must be positive: rho*c = {rho_c}, k = {k}"
        )));
    }
    WallMatrices::assemble(
        params.variant,
        rho_c * params.f_volume * params.thickness,
        k * params.f_volume / params.thickness,
    )
}

/// Condensed wall for one step. The new wall temperatures depend affinely on
/// the solid temperature: `T = base + slope * T_solid`.
#[derive(Debug, Clone, PartialEq)]
pub struct WallStep {
    pub robin: RobinCoefficients,
    base: Vec<f64>,
    slope: Vec<f64>,
}

impl WallStep {
    pub fn advance(&self, t_solid: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.slope)
            .map(|(b, g)| b + g * t_solid)
            .collect()
    }

    pub fn advance_into(&self, t_solid: f64, out: &mut [f64]) {
        for ((o, b), g) in out.iter_mut().zip(&self.base).zip(&self.slope) {
            *o = b + g * t_solid;
        }
    }
}

/// Static condensation of the wall system. `mats.mass` must already be
/// divided by the time step (see [`WallMatrices::scaled`]).
pub fn condense(
    mats: &WallMatrices,
    h_sp: f64,
    h_pp: f64,
    t0: f64,
    state: &[f64],
) -> Result<WallStep> {
    let nn = mats.mass.len();
    let contact = mats.variant.is_contact();
    if state.len() != mats.variant.state_len() {
        return Err(Error::InvalidInput(format!(
            "wall state has {} values, variant {} needs {}",
            state.len(),
            mats.variant,
            mats.variant.state_len()
        )));
    }
    if contact {
        // unknowns: all wall nodes. The solid coupling h_sp e0 e0^T is kept
        // out of the factorized matrix and added back by Sherman-Morrison,
        // which avoids h_sp - h_sp^2 g0 cancelling when h_sp dominates.
        let mut a = mats.stiffness.clone();
        let mut b = DVector::zeros(nn);
        for i in 0..nn {
            a[(i, i)] += mats.mass[i];
            b[i] = mats.mass[i] * state[i];
        }
        a[(nn - 1, nn - 1)] += h_pp;
        b[nn - 1] += h_pp * t0;
        let lu = a.lu();
        let singular = || Error::SingularWall(format!("{} wall matrix is singular", mats.variant));
        let u = lu.solve(&b).ok_or_else(singular)?;
        let mut e0 = DVector::zeros(nn);
        e0[0] = 1.0;
        let v = lu.solve(&e0).ok_or_else(singular)?;
        let a0 = v[0];
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(singular());
        }
        let den = 1.0 + h_sp * a0;
        let h_loss = h_sp / den;
        let t_loss = u[0];
        let base = u
            .iter()
            .zip(v.iter())
            .map(|(ui, vi)| ui - vi * h_sp * u[0] / den)
            .collect();
        let slope = v.iter().map(|vi| vi * h_sp / den).collect();
        finish(h_loss, t_loss, base, slope)
    } else {
        // node 0 follows the solid, node nn-1 is held at t0, the rest condense
        let ni = nn - 2;
        let k = &mats.stiffness;
        let (base_i, slope_i) = if ni > 0 {
            let mut a = DMatrix::zeros(ni, ni);
            let mut b = DVector::zeros(ni);
            let mut c = DVector::zeros(ni);
            for i in 0..ni {
                for j in 0..ni {
                    a[(i, j)] = k[(i + 1, j + 1)];
                }
                a[(i, i)] += mats.mass[i + 1];
                b[i] = mats.mass[i + 1] * state[i + 1] - k[(i + 1, nn - 1)] * t0;
                c[i] = -k[(i + 1, 0)];
            }
            let lu = a.lu();
            let bi = lu
                .solve(&b)
                .ok_or_else(|| Error::SingularWall("interior wall matrix is singular".into()))?;
            let ci = lu
                .solve(&c)
                .ok_or_else(|| Error::SingularWall("interior wall matrix is singular".into()))?;
            (bi, ci)
        } else {
            (DVector::zeros(0), DVector::zeros(0))
        };
        // flux into the wall at node 0: (M00/dt)(T - T^n) + K00 T + sum K0j Tj
        let mut h_loss = mats.mass[0] + k[(0, 0)];
        let mut ht = mats.mass[0] * state[0] - k[(0, nn - 1)] * t0;
        for i in 0..ni {
            h_loss += k[(0, i + 1)] * slope_i[i];
            ht -= k[(0, i + 1)] * base_i[i];
        }
        let mut base = vec![0.0];
        let mut slope = vec![1.0];
        base.extend(base_i.iter());
        slope.extend(slope_i.iter());
        finish(h_loss, ht / h_loss, base, slope)
    }
}

fn finish(h_loss: f64, t_loss: f64, base: Vec<f64>, slope: Vec<f64>) -> Result<WallStep> {
    if !(h_loss > 0.0 && h_loss.is_finite() && t_loss.is_finite()) {
        return Err(Error::SingularWall(format!(
            "degenerate condensed coefficient h_loss = {h_loss}"
        )));
    }
    Ok(WallStep {
        robin: RobinCoefficients { h_loss, t_loss },
        base,
        slope,
    })
}

/// Closed-form condensation for the four named discretizations.
///
/// `state` holds the previous wall temperatures from the solid side outward
/// (for the Dirichlet wall: the previous solid temperature only).
pub fn closed_form(
    variant: VdaVariant,
    m: f64,
    k: f64,
    hs: f64,
    hp: f64,
    state: &[f64],
    t0: f64,
) -> Result<RobinCoefficients> {
    let all_finite = [m, k, hs, hp, t0]
        .iter()
        .chain(state)
        .all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::InvalidInput(
            "closed form needs finite inputs".into(),
        ));
    }
    if state.len() != variant.state_len() {
        return Err(Error::InvalidInput(format!(
            "wall state has {} values, variant {variant} needs {}",
            state.len(),
            variant.state_len()
        )));
    }
    let (h, ht) = match variant {
        VdaVariant::OneLinear => {
            let (ts, tp) = (state[0], state[1]);
            let den = 4.0 * (hs + hp + m) * k + (4.0 * hs + 2.0 * m) * hp + 2.0 * m * hs + m * m;
            let h = (4.0 * hs * (hp + m) * k + 2.0 * m * hs * hp + m * m * hs) / den;
            let ht = (4.0 * hs * hp * k * t0
                + 2.0 * m * hs * k * tp
                + (2.0 * k + 2.0 * hp + m) * m * hs * ts)
                / den;
            (h, ht)
        }
        VdaVariant::TwoLinear => {
            let (ts, tm, tp) = (state[0], state[1], state[2]);
            let (k2, m2, m3) = (k * k, m * m, m * m * m);
            let den = 128.0 * (hs + hp + m) * k2
                + ((128.0 * hs + 64.0 * m) * hp + 64.0 * m * hs + 24.0 * m2) * k
                + (16.0 * m * hs + 4.0 * m2) * hp
                + 4.0 * m2 * hs
                + m3;
            let h = (128.0 * (hp + m) * hs * k2
                + (64.0 * hp + 24.0 * m) * m * hs * k
                + 4.0 * m2 * hs * hp
                + m3 * hs)
                / den;
            let ht = (128.0 * hs * hp * k2 * t0
                + 32.0 * m * hs * k2 * tp
                + (64.0 * m * hs * k2 + (32.0 * m * hs * hp + 8.0 * m2 * hs) * k) * tm
                + (32.0 * m * hs * k2
                    + (32.0 * m * hs * hp + 16.0 * m2 * hs) * k
                    + 4.0 * m2 * hs * hp
                    + m3 * hs)
                    * ts)
                / den;
            (h, ht)
        }
        VdaVariant::OneQuadratic => {
            let (ts, tm, tp) = (state[0], state[1], state[2]);
            let (k2, m2, m3) = (k * k, m * m, m * m * m);
            let den = 288.0 * (hs + hp + m) * k2
                + ((288.0 * hs + 132.0 * m) * hp + 132.0 * m * hs + 36.0 * m2) * k
                + (36.0 * m * hs + 6.0 * m2) * hp
                + 6.0 * m2 * hs
                + m3;
            let h = (288.0 * (hp + m) * hs * k2
                + (132.0 * hp + 36.0 * m) * m * hs * k
                + 6.0 * m2 * hs * hp
                + m3 * hs)
                / den;
            // far-node term is (48 m k - 2 m^2) h_sp k; see the project notes
            let ht = ((288.0 * k2 - 12.0 * m * k) * hs * hp * t0
                + (48.0 * m * k - 2.0 * m2) * hs * k * tp
                + (192.0 * m * hs * k2 + (96.0 * m * hs * hp + 16.0 * m2 * hs) * k) * tm
                + (48.0 * m * hs * k2
                    + (48.0 * m * hs * hp + 22.0 * m2 * hs) * k
                    + 6.0 * m2 * hs * hp
                    + m3 * hs)
                    * ts)
                / den;
            (h, ht)
        }
        VdaVariant::Dirichlet => {
            let h = 0.5 * m + k;
            (h, 0.5 * m * state[0] + k * t0)
        }
        VdaVariant::General { .. } => {
            return Err(Error::InvalidInput(format!("no closed form for {variant}")));
        }
    };
    if !(h > 0.0) {
        return Err(Error::SingularWall(format!(
            "degenerate closed-form h_loss = {h}"
        )));
    }
    Ok(RobinCoefficients {
        h_loss: h,
        t_loss: ht / h,
    })
}

/// Condense and advance in one call, for callers that do not keep the
/// [`WallStep`]: returns the new wall temperatures after the solid reached
/// `t_solid`.
pub fn advance_state(
    params: &VdaParams,
    material: &Material,
    dt: f64,
    state: &[f64],
    t_solid: f64,
) -> Result<Vec<f64>> {
    Ok(params.prepare(material, dt, state)?.advance(t_solid))
}

/// Flat per-integration-point storage of wall temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct VdaWallState {
    stride: usize,
    data: Vec<f64>,
}

impl VdaWallState {
    pub fn new(n_points: usize, params: &VdaParams) -> Self {
        let stride = params.variant.state_len();
        Self {
            stride,
            data: vec![params.far_temperature; n_points * stride],
        }
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn n_points(&self) -> usize {
        self.data.len() / self.stride.max(1)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::PropertyTable;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn one_linear_matrices() {
        let p = VdaParams {
            variant: VdaVariant::OneLinear,
            thickness: 1.0,
            h_sp: 1.0,
            h_pp: 1.0,
            far_temperature: 0.0,
            f_volume: 1.0,
            f_surface: 1.0,
        };
        let w = wall_matrices(&p, 2.0, 3.0).unwrap();
        assert_eq!(w.mass.as_slice(), &[1.0, 1.0]);
        assert_eq!(w.stiffness[(0, 0)], 3.0);
        assert_eq!(w.stiffness[(0, 1)], -3.0);
        let p2 = VdaParams { f_volume: 2.0, ..p };
        let w2 = wall_matrices(&p2, 2.0, 3.0).unwrap();
        assert_eq!(w2.mass, w.mass * 2.0);
        assert_eq!(w2.stiffness, w.stiffness * 2.0);
        let p3 = VdaParams {
            variant: VdaVariant::TwoLinear,
            ..p
        };
        let w3 = wall_matrices(&p3, 2.0, 3.0).unwrap();
        assert_eq!(w3.mass.len(), 3);
        for i in 0..3 {
            assert!(w3.stiffness.row(i).sum().abs() < 1e-14);
        }
    }

    #[test]
    fn dirichlet_closed_form_example() {
        let r = closed_form(VdaVariant::Dirichlet, 1.0, 1.0, 0.0, 0.0, &[100.0], 20.0).unwrap();
        assert_eq!(r.h_loss, 1.5);
        assert!((r.h_loss * r.t_loss - 70.0).abs() < 1e-12);
        assert!((r.t_loss - 46.666666666666664).abs() < 1e-12);
    }

    #[test]
    fn named_variants_match_numeric_condensation() {
        let (m, k, hs, hp, t0) = (37.0, 12.5, 800.0, 15.0, 25.0);
        for (v, st) in [
            (VdaVariant::OneLinear, vec![300.0, 80.0]),
            (VdaVariant::TwoLinear, vec![300.0, 150.0, 80.0]),
            (VdaVariant::OneQuadratic, vec![300.0, 150.0, 80.0]),
            (VdaVariant::Dirichlet, vec![300.0]),
        ] {
            let a = closed_form(v, m, k, hs, hp, &st, t0).unwrap();
            let b = condense(&WallMatrices::scaled(v, m, k).unwrap(), hs, hp, t0, &st).unwrap();
            assert!(rel(a.h_loss, b.robin.h_loss) < 1e-12, "{v}");
            assert!(rel(a.t_loss, b.robin.t_loss) < 1e-12, "{v}");
        }
    }

    #[test]
    fn zero_mass_gives_series_resistance() {
        let (k, hs, hp, t0) = (4.0, 100.0, 10.0, 20.0);
        let series = 1.0 / (1.0 / hs + 1.0 / k + 1.0 / hp);
        let r = closed_form(VdaVariant::OneLinear, 0.0, k, hs, hp, &[500.0, 90.0], t0).unwrap();
        assert!(rel(r.h_loss, series) < 1e-14);
        assert!(rel(r.t_loss, t0) < 1e-14);
    }

    #[test]
    fn equilibrium_has_zero_flux() {
        for v in [
            VdaVariant::OneLinear,
            VdaVariant::TwoLinear,
            VdaVariant::OneQuadratic,
            VdaVariant::Dirichlet,
        ] {
            let st = vec![20.0; v.state_len()];
            let r = closed_form(v, 5.0, 3.0, 100.0, 7.0, &st, 20.0).unwrap();
            assert!(r.flux(20.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn advance_keeps_equilibrium() {
        let mat = Material::bulk(
            "w",
            PropertyTable::constant(1000.0).unwrap(),
            PropertyTable::constant(500.0).unwrap(),
            PropertyTable::constant(0.2).unwrap(),
        )
        .unwrap();
        let p = VdaParams {
            variant: VdaVariant::OneQuadratic,
            thickness: 0.01,
            h_sp: 1000.0,
            h_pp: 10.0,
            far_temperature: 90.0,
            f_volume: 1.0,
            f_surface: 1.0,
        };
        let mut st = p.initial_state();
        for _ in 0..10 {
            st = advance_state(&p, &mat, 5.0, &st, 90.0).unwrap();
        }
        assert!(st.iter().all(|t| (t - 90.0).abs() < 1e-10));
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            VdaVariant::OneLinear,
            VdaVariant::TwoLinear,
            VdaVariant::OneQuadratic,
            VdaVariant::Dirichlet,
            VdaVariant::General {
                elements: 8,
                order: 2,
            },
        ] {
            assert_eq!(v.to_string().parse::<VdaVariant>().unwrap(), v);
        }
        assert!("3E-Q7".parse::<VdaVariant>().is_err());
        assert!("GENERAL-0E-Q1".parse::<VdaVariant>().is_err());
    }

    #[test]
    fn factor_examples() {
        assert_eq!(geometric_factors(Shape::Plane, 0.1).unwrap(), (1.0, 1.0));
        let (fv, fs) = geometric_factors(Shape::Cylinder { radius: 0.01 }, 0.01).unwrap();
        assert!((fv - 1.5).abs() < 1e-14 && (fs - 2.0).abs() < 1e-14);
        let (fv, fs) = geometric_factors(Shape::Sphere { radius: 1.0 }, 1.0).unwrap();
        assert!((fv - 7.0 / 3.0).abs() < 1e-14 && (fs - 4.0).abs() < 1e-14);
        assert!(geometric_factors(Shape::Cylinder { radius: 0.0 }, 0.01).is_err());
        assert!(geometric_factors(Shape::Plane, 0.0).is_err());
    }
}
