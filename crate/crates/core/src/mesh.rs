//! Structured hexahedral meshes of the build volume.
//!
//! The grid is a tensor product of three strictly increasing coordinate
//! arrays. Every cell is either void or belongs to one region (part, base
//! plate or powder bed). Part and bed cells carry the index of the element
//! layer that activates them; base cells are active from the start.
//!
//! The plate top sits at `z = 0`. Element layers stack upwards from there,
//! so a cell's level is `k - plate_levels`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Part,
    Base,
    Bed,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Part, Region::Base, Region::Bed];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Part => "part",
            Region::Base => "base",
            Region::Bed => "bed",
        }
    }

    /// Integer code used in snapshot files.
    pub fn code(self) -> i32 {
        match self {
            Region::Part => 0,
            Region::Base => 1,
            Region::Bed => 2,
        }
    }
}

/// Which regions form the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainVariant {
    /// Part, plate and powder bed.
    Hf,
    /// Part and plate.
    Pp,
    /// Part only.
    P,
}

impl DomainVariant {
    pub fn includes(self, region: Region) -> bool {
        match self {
            DomainVariant::Hf => true,
            DomainVariant::Pp => region != Region::Bed,
            DomainVariant::P => region == Region::Part,
        }
    }

    pub fn required_region(self) -> Region {
        match self {
            DomainVariant::Hf => Region::Bed,
            DomainVariant::Pp => Region::Base,
            DomainVariant::P => Region::Part,
        }
    }

    /// Labels that can appear on the boundary of this domain.
    pub fn labels(self) -> &'static [BoundaryLabel] {
        use BoundaryLabel::*;
        match self {
            DomainVariant::Hf => &[AirPart, AirBed, LatBed, LatBase, Down],
            DomainVariant::Pp => &[AirPart, BedPart, BedBase, LatBase, Down],
            DomainVariant::P => &[AirPart, BedPart, BasePart],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryLabel {
    AirPart,
    AirBed,
    LatBed,
    LatBase,
    Down,
    BedPart,
    BedBase,
    BasePart,
    /// Mirror plane of a reduced model; always adiabatic.
    Symmetry,
}

impl BoundaryLabel {
    pub const ALL: [BoundaryLabel; 9] = [
        BoundaryLabel::AirPart,
        BoundaryLabel::AirBed,
        BoundaryLabel::LatBed,
        BoundaryLabel::LatBase,
        BoundaryLabel::Down,
        BoundaryLabel::BedPart,
        BoundaryLabel::BedBase,
        BoundaryLabel::BasePart,
        BoundaryLabel::Symmetry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryLabel::AirPart => "air_part",
            BoundaryLabel::AirBed => "air_bed",
            BoundaryLabel::LatBed => "lat_bed",
            BoundaryLabel::LatBase => "lat_base",
            BoundaryLabel::Down => "down",
            BoundaryLabel::BedPart => "bed_part",
            BoundaryLabel::BedBase => "bed_base",
            BoundaryLabel::BasePart => "base_part",
            BoundaryLabel::Symmetry => "symmetry",
        }
    }
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundaryLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown boundary label '{s}'")))
    }
}

/// Local face numbering: -x, +x, -y, +y, -z, +z.
pub const FACE_NODES: [[usize; 4]; 6] = [
    [0, 2, 4, 6],
    [1, 3, 5, 7],
    [0, 1, 4, 5],
    [2, 3, 6, 7],
    [0, 1, 2, 3],
    [4, 5, 6, 7],
];

pub fn face_axis(face: u8) -> usize {
    (face / 2) as usize
}

pub fn face_is_positive(face: u8) -> bool {
    face % 2 == 1
}

pub fn face_normal(face: u8) -> [f64; 3] {
    let mut n = [0.0; 3];
    n[face_axis(face)] = if face_is_positive(face) { 1.0 } else { -1.0 };
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Symmetry {
    #[serde(default)]
    pub x_min: bool,
    #[serde(default)]
    pub y_min: bool,
}

impl Symmetry {
    /// How many mirrored copies the modelled domain stands for.
    pub fn multiplicity(self) -> f64 {
        let mut m = 1.0;
        if self.x_min {
            m *= 2.0;
        }
        if self.y_min {
            m *= 2.0;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    cells: Vec<Option<Region>>,
    layers: Vec<Option<u32>>,
    active: Vec<bool>,
    plate_levels: usize,
    n_layers: usize,
    activated_layers: usize,
    symmetry: Symmetry,
}

fn check_increasing(name: &str, c: &[f64]) -> Result<()> {
    if c.len() < 2 {
        return Err(Error::Mesh(format!(
            "{name} needs at least two coordinates"
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Mesh(format!("{name} has non-finite coordinates")));
    }
    if c.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Mesh(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl StructuredMesh {
    /// Assemble a mesh from explicit arrays. `cells` and `layers` are indexed
    /// by `i + nx * (j + ny * k)`; the first `plate_levels` z-levels lie below
    /// the plate top.
    pub fn from_parts(
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
        cells: Vec<Option<Region>>,
        layers: Vec<Option<u32>>,
        plate_levels: usize,
        symmetry: Symmetry,
    ) -> Result<Self> {
        check_increasing("x", &x)?;
        check_increasing("y", &y)?;
        check_increasing("z", &z)?;
        let n = (x.len() - 1) * (y.len() - 1) * (z.len() - 1);
        if cells.len() != n || layers.len() != n {
            return Err(Error::Mesh(format!(
                "expected {n} cells, got {} regions and {} layer indices",
                cells.len(),
                layers.len()
            )));
        }
        if plate_levels >= z.len() {
            return Err(Error::Mesh("plate levels exceed the z resolution".into()));
        }
        let mut n_layers = 0usize;
        for (c, (r, l)) in cells.iter().zip(&layers).enumerate() {
            match (r, l) {
                (Some(Region::Base), None) | (None, None) => {}
                (Some(Region::Base), Some(_)) => {
                    return Err(Error::Mesh(format!("base cell {c} must not carry a layer")))
                }
                (Some(_), Some(l)) => n_layers = n_layers.max(*l as usize + 1),
                (Some(r), None) => {
                    return Err(Error::Mesh(format!("{} cell {c} has no layer", r.as_str())))
                }
                (None, Some(_)) => {
                    return Err(Error::Mesh(format!("void cell {c} carries a layer")))
                }
            }
        }
        let active = cells.iter().map(|r| *r == Some(Region::Base)).collect();
        Ok(Self {
            x,
            y,
            z,
            cells,
            layers,
            active,
            plate_levels,
            n_layers,
            activated_layers: 0,
            symmetry,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn cell_dims(&self) -> [usize; 3] {
        [self.x.len() - 1, self.y.len() - 1, self.z.len() - 1]
    }

    pub fn node_dims(&self) -> [usize; 3] {
        [self.x.len(), self.y.len(), self.z.len()]
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.x.len() * self.y.len() * self.z.len()
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn activated_layers(&self) -> usize {
        self.activated_layers
    }

    pub fn plate_levels(&self) -> usize {
        self.plate_levels
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [nx, ny, _] = self.cell_dims();
        i + nx * (j + ny * k)
    }

    #[inline]
    pub fn cell_ijk(&self, c: usize) -> [usize; 3] {
        let [nx, ny, _] = self.cell_dims();
        [c % nx, (c / nx) % ny, c / (nx * ny)]
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.x.len() * (j + self.y.len() * k)
    }

    pub fn node_coords(&self, n: usize) -> [f64; 3] {
        let (nx, ny) = (self.x.len(), self.y.len());
        [self.x[n % nx], self.y[(n / nx) % ny], self.z[n / (nx * ny)]]
    }

    /// Global node ids of a cell in local order `ix + 2 iy + 4 iz`.
    #[inline]
    pub fn cell_nodes(&self, c: usize) -> [usize; 8] {
        let [i, j, k] = self.cell_ijk(c);
        let mut out = [0; 8];
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.node_index(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        }
        out
    }

    /// Lower corner and edge lengths of a cell.
    #[inline]
    pub fn cell_box(&self, c: usize) -> ([f64; 3], [f64; 3]) {
        let [i, j, k] = self.cell_ijk(c);
        (
            [self.x[i], self.y[j], self.z[k]],
            [
                self.x[i + 1] - self.x[i],
                self.y[j + 1] - self.y[j],
                self.z[k + 1] - self.z[k],
            ],
        )
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        let (_, h) = self.cell_box(c);
        h[0] * h[1] * h[2]
    }

    pub fn face_area(&self, c: usize, face: u8) -> f64 {
        let (_, h) = self.cell_box(c);
        match face_axis(face) {
            0 => h[1] * h[2],
            1 => h[0] * h[2],
            _ => h[0] * h[1],
        }
    }

    #[inline]
    pub fn region(&self, c: usize) -> Option<Region> {
        self.cells[c]
    }

    #[inline]
    pub fn layer(&self, c: usize) -> Option<u32> {
        self.layers[c]
    }

    #[inline]
    pub fn is_active(&self, c: usize) -> bool {
        self.active[c]
    }

    pub fn active_flags(&self) -> &[bool] {
        &self.active
    }

    pub fn has_region(&self, r: Region) -> bool {
        self.cells.contains(&Some(r))
    }

    pub fn count_region(&self, r: Region) -> usize {
        self.cells.iter().filter(|c| **c == Some(r)).count()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn layer_cells(&self, layer: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_cells()).filter(move |&c| self.layers[c] == Some(layer as u32))
    }

    /// Modelled volume of the part cells of one layer.
    pub fn layer_part_volume(&self, layer: usize) -> f64 {
        self.layer_cells(layer)
            .filter(|&c| self.cells[c] == Some(Region::Part))
            .map(|c| self.cell_volume(c))
            .sum()
    }

    /// Level of z-slab `k` relative to the plate top (negative inside the plate).
    #[inline]
    pub fn level(&self, k: usize) -> isize {
        k as isize - self.plate_levels as isize
    }

    fn neighbor(&self, c: usize, face: u8) -> Option<usize> {
        let [i, j, k] = self.cell_ijk(c);
        let dims = self.cell_dims();
        let mut ijk = [i, j, k];
        let axis = face_axis(face);
        if face_is_positive(face) {
            if ijk[axis] + 1 >= dims[axis] {
                return None;
            }
            ijk[axis] += 1;
        } else {
            if ijk[axis] == 0 {
                return None;
            }
            ijk[axis] -= 1;
        }
        Some(self.cell_index(ijk[0], ijk[1], ijk[2]))
    }

    /// Activate every cell of `layer`; layers must be activated in order.
    pub fn activate_layer(&mut self, layer: usize) -> Result<Vec<usize>> {
        if layer >= self.n_layers {
            return Err(Error::Activation(format!(
                "layer {layer} does not exist (mesh has {} layers)",
                self.n_layers
            )));
        }
        if layer < self.activated_layers {
            return Err(Error::Activation(format!(
                "layer {layer} is already active"
            )));
        }
        if layer > self.activated_layers {
            return Err(Error::Activation(format!(
                "layer {layer} activated before layer {}",
                self.activated_layers
            )));
        }
        let cells: Vec<usize> = self.layer_cells(layer).collect();
        for &c in &cells {
            self.active[c] = true;
        }
        self.activated_layers += 1;
        Ok(cells)
    }

    /// Candidate cells whose closed box contains `p`.
    pub fn locate(&self, p: [f64; 3]) -> Vec<usize> {
        fn spans(c: &[f64], v: f64) -> Vec<usize> {
            let eps = 1e-12 * (c[c.len() - 1] - c[0]).abs().max(1.0);
            (0..c.len() - 1)
                .filter(|&i| v >= c[i] - eps && v <= c[i + 1] + eps)
                .collect()
        }
        let (xs, ys, zs) = (
            spans(&self.x, p[0]),
            spans(&self.y, p[1]),
            spans(&self.z, p[2]),
        );
        let mut out = Vec::new();
        for &k in &zs {
            for &j in &ys {
                for &i in &xs {
                    out.push(self.cell_index(i, j, k));
                }
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{} x {} x {} cells ({} nodes): part {}, base {}, bed {}, {} element layers",
            self.x.len() - 1,
            self.y.len() - 1,
            self.z.len() - 1,
            self.n_nodes(),
            self.count_region(Region::Part),
            self.count_region(Region::Base),
            self.count_region(Region::Bed),
            self.n_layers
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    fn shifted(&self, dx: f64, dy: f64) -> Rect {
        Rect {
            x: [self.x[0] + dx, self.x[1] + dx],
            y: [self.y[0] + dy, self.y[1] + dy],
        }
    }

    fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x[0] && px <= self.x[1] && py >= self.y[0] && py <= self.y[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    /// Footprint of the first element layer.
    pub footprint: Rect,
    pub height: f64,
    /// Footprint shift applied per element layer (stair-stepped overhangs).
    #[serde(default)]
    pub offset_per_lump: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshResolution {
    /// Target in-plane element size over the part envelope.
    pub part_xy: f64,
    /// Geometric growth ratio away from the part (and down into the plate).
    #[serde(default = "default_grading")]
    pub grading: f64,
    /// Cap on the in-plane size of graded cells.
    pub max_xy: f64,
    /// Size of the plate's top cell layer.
    pub plate_top_dz: f64,
    /// Cap on plate cell thickness.
    pub plate_max_dz: f64,
}

fn default_grading() -> f64 {
    1.3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub plate: PlateSpec,
    pub part: PartSpec,
    pub mesh: MeshResolution,
    #[serde(default)]
    pub symmetry: Symmetry,
}

/// Physical layering of the part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layering {
    pub layer_thickness: f64,
    pub layers_per_lump: usize,
}

impl Layering {
    pub fn lump_thickness(&self) -> f64 {
        self.layer_thickness * self.layers_per_lump as f64
    }

    /// Number of physical layers and of element layers for a part height.
    pub fn counts(&self, height: f64) -> Result<(usize, usize)> {
        if !(self.layer_thickness > 0.0) || self.layers_per_lump == 0 {
            return Err(Error::Mesh(
                "layer thickness and layers per lump must be positive".into(),
            ));
        }
        let layers_f = height / self.layer_thickness;
        let layers = layers_f.round();
        if layers < 1.0 {
            return Err(Error::Mesh(format!("part height {height} holds no layers")));
        }
        if (layers_f - layers).abs() > 1e-6 * layers.max(1.0) {
            return Err(Error::Mesh(format!(
                "part height {height} is not a multiple of the layer thickness {}",
                self.layer_thickness
            )));
        }
        let layers = layers as usize;
        if !layers.is_multiple_of(self.layers_per_lump) {
            return Err(Error::Mesh(format!(
                "{layers} layers cannot be grouped in lumps of {}",
                self.layers_per_lump
            )));
        }
        Ok((layers, layers / self.layers_per_lump))
    }
}

fn grid_tol(a: f64, b: f64) -> f64 {
    1e-9 * (a.abs() + b.abs()).max(1e-3)
}

/// Uniform subdivision of `[a, b]` with cells no larger than `h`, excluding `a`.
fn push_uniform(out: &mut Vec<f64>, a: f64, b: f64, h: f64) {
    let n = ((b - a) / h - 1e-9).ceil().max(1.0) as usize;
    for i in 1..=n {
        out.push(if i == n {
            b
        } else {
            a + (b - a) * i as f64 / n as f64
        });
    }
}

/// Cell sizes growing geometrically from `h0 * ratio` up to `hmax`, covering
/// `length`; a short remainder is merged into the last cell.
fn graded_sizes(length: f64, h0: f64, ratio: f64, hmax: f64) -> Vec<f64> {
    let mut sizes = Vec::new();
    if length <= grid_tol(length, 0.0) {
        return sizes;
    }
    let mut h = h0;
    let mut covered = 0.0;
    while covered < length {
        h = (h * ratio).min(hmax).max(h0);
        let rest = length - covered;
        if rest <= h * 1.5 {
            sizes.push(rest);
            break;
        }
        sizes.push(h);
        covered += h;
    }
    sizes
}

fn axis_coords(lo: f64, hi: f64, breaks: &[f64], h: f64, ratio: f64, hmax: f64) -> Vec<f64> {
    let mut fine: Vec<f64> = breaks.to_vec();
    fine.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fine.dedup_by(|a, b| (*a - *b).abs() <= grid_tol(*a, *b));
    let (f0, f1) = (fine[0], fine[fine.len() - 1]);
    let mut out = Vec::new();
    // graded run from lo up to the fine envelope, built outward and reversed
    let left = graded_sizes(f0 - lo, h, ratio, hmax);
    let mut pos = f0;
    let mut left_pts = Vec::new();
    for s in &left {
        pos -= s;
        left_pts.push(pos);
    }
    if let Some(last) = left_pts.last_mut() {
        *last = lo;
    }
    left_pts.reverse();
    out.extend(left_pts);
    out.push(f0);
    for w in fine.windows(2) {
        push_uniform(&mut out, w[0], w[1], h);
    }
    let right = graded_sizes(hi - f1, h, ratio, hmax);
    let mut pos = f1;
    for (i, s) in right.iter().enumerate() {
        pos += s;
        out.push(if i + 1 == right.len() { hi } else { pos });
    }
    out
}

/// Build the mesh for one domain variant.
pub fn build_mesh(
    geom: &GeometrySpec,
    layering: Layering,
    variant: DomainVariant,
) -> Result<StructuredMesh> {
    let res = geom.mesh;
    for (name, v) in [
        ("part_xy", res.part_xy),
        ("max_xy", res.max_xy),
        ("plate_top_dz", res.plate_top_dz),
        ("plate_max_dz", res.plate_max_dz),
        ("plate thickness", geom.plate.thickness),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Mesh(format!("{name} must be positive, got {v}")));
        }
    }
    if !(res.grading >= 1.0) {
        return Err(Error::Mesh(format!(
            "grading ratio must be >= 1, got {}",
            res.grading
        )));
    }
    let (_, lumps) = layering.counts(geom.part.height)?;
    let lump_dz = layering.lump_thickness();
    let plate = geom.plate;
    if plate.x[1] <= plate.x[0] || plate.y[1] <= plate.y[0] {
        return Err(Error::Mesh("plate extent must be positive".into()));
    }

    let footprints: Vec<Rect> = (0..lumps)
        .map(|l| {
            geom.part.footprint.shifted(
                l as f64 * geom.part.offset_per_lump[0],
                l as f64 * geom.part.offset_per_lump[1],
            )
        })
        .collect();
    for (l, fp) in footprints.iter().enumerate() {
        if fp.x[1] <= fp.x[0] || fp.y[1] <= fp.y[0] {
            return Err(Error::Mesh(
                "part footprint must have positive extent".into(),
            ));
        }
        let tol = grid_tol(plate.x[1], plate.y[1]);
        if fp.x[0] < plate.x[0] - tol
            || fp.x[1] > plate.x[1] + tol
            || fp.y[0] < plate.y[0] - tol
            || fp.y[1] > plate.y[1] + tol
        {
            return Err(Error::Mesh(format!(
                "footprint of element layer {l} exceeds the plate bounds"
            )));
        }
    }
    let sym = geom.symmetry;
    // a mirror plane must cut the part as well as the plate
    if sym.x_min
        && footprints
            .iter()
            .any(|f| (f.x[0] - plate.x[0]).abs() > 1e-12)
    {
        return Err(Error::Mesh(
            "x symmetry plane must coincide with a part face".into(),
        ));
    }
    if sym.y_min
        && footprints
            .iter()
            .any(|f| (f.y[0] - plate.y[0]).abs() > 1e-12)
    {
        return Err(Error::Mesh(
            "y symmetry plane must coincide with a part face".into(),
        ));
    }

    let xb: Vec<f64> = footprints.iter().flat_map(|f| f.x).collect();
    let yb: Vec<f64> = footprints.iter().flat_map(|f| f.y).collect();
    let (x, y) = if variant == DomainVariant::P {
        let env = |b: &[f64]| {
            let lo = b.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (x0, x1) = env(&xb);
        let (y0, y1) = env(&yb);
        (
            axis_coords(x0, x1, &xb, res.part_xy, res.grading, res.max_xy),
            axis_coords(y0, y1, &yb, res.part_xy, res.grading, res.max_xy),
        )
    } else {
        (
            axis_coords(
                plate.x[0],
                plate.x[1],
                &xb,
                res.part_xy,
                res.grading,
                res.max_xy,
            ),
            axis_coords(
                plate.y[0],
                plate.y[1],
                &yb,
                res.part_xy,
                res.grading,
                res.max_xy,
            ),
        )
    };

    let mut z = Vec::new();
    let plate_levels = if variant == DomainVariant::P {
        z.push(0.0);
        0
    } else {
        let sizes = graded_sizes(
            plate.thickness,
            res.plate_top_dz / res.grading,
            res.grading,
            res.plate_max_dz,
        );
        let mut pos = 0.0;
        let mut pts = vec![0.0];
        for s in &sizes {
            pos -= s;
            pts.push(pos);
        }
        *pts.last_mut().unwrap() = -plate.thickness;
        pts.reverse();
        z.extend(pts);
        sizes.len()
    };
    for l in 1..=lumps {
        z.push(l as f64 * lump_dz);
    }

    let (nx, ny, nz) = (x.len() - 1, y.len() - 1, z.len() - 1);
    let mut cells = vec![None; nx * ny * nz];
    let mut layers = vec![None; nx * ny * nz];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = i + nx * (j + ny * k);
                let (xc, yc) = (0.5 * (x[i] + x[i + 1]), 0.5 * (y[j] + y[j + 1]));
                if k < plate_levels {
                    cells[c] = Some(Region::Base);
                    continue;
                }
                let l = k - plate_levels;
                if footprints[l].contains(xc, yc) {
                    cells[c] = Some(Region::Part);
                    layers[c] = Some(l as u32);
                } else if variant == DomainVariant::Hf {
                    cells[c] = Some(Region::Bed);
                    layers[c] = Some(l as u32);
                }
            }
        }
    }
    let mesh = StructuredMesh::from_parts(x, y, z, cells, layers, plate_levels, sym)?;
    log::info!("mesh ({variant:?}): {}", mesh.summary());
    Ok(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub face: u8,
    pub area: f64,
    pub normal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFaceSet {
    pub label: BoundaryLabel,
    pub faces: Vec<BoundaryFace>,
}

impl BoundaryFaceSet {
    pub fn area(&self) -> f64 {
        self.faces.iter().map(|f| f.area).sum()
    }
}

#[inline]
fn open(mesh: &StructuredMesh, variant: DomainVariant, c: usize) -> bool {
    matches!(mesh.cells[c], Some(r) if variant.includes(r)) && mesh.active[c]
}

/// Label of one face of an open cell, or `None` for interior faces.
fn classify_face(
    mesh: &StructuredMesh,
    variant: DomainVariant,
    c: usize,
    face: u8,
) -> Option<BoundaryLabel> {
    use BoundaryLabel::*;
    let region = mesh.cells[c]?;
    let axis = face_axis(face);
    let up = axis == 2 && face_is_positive(face);
    let down = axis == 2 && !face_is_positive(face);
    match mesh.neighbor(c, face) {
        Some(n) if open(mesh, variant, n) => None,
        None => {
            let sym = mesh.symmetry;
            if !face_is_positive(face) && ((axis == 0 && sym.x_min) || (axis == 1 && sym.y_min)) {
                return Some(Symmetry);
            }
            Some(match region {
                Region::Base if down => Down,
                Region::Base if up => covered_plate_label(variant),
                Region::Base => LatBase,
                Region::Bed if up => AirBed,
                Region::Bed if down => Down,
                Region::Bed => LatBed,
                Region::Part if up => AirPart,
                Region::Part if down => BasePart,
                Region::Part if variant == DomainVariant::Hf => LatBed,
                Region::Part => BedPart,
            })
        }
        Some(n) => Some(match region {
            Region::Part if up => {
                let [_, _, k] = mesh.cell_ijk(n);
                let level = mesh.level(k);
                if level >= 0 && (level as usize) < mesh.activated_layers {
                    BedPart
                } else {
                    AirPart
                }
            }
            Region::Part if down && mesh.cells[n] == Some(Region::Base) => BasePart,
            Region::Part => BedPart,
            Region::Base if up => covered_plate_label(variant),
            Region::Base => LatBase,
            Region::Bed if up => AirBed,
            Region::Bed => LatBed,
        }),
    }
}

fn covered_plate_label(variant: DomainVariant) -> BoundaryLabel {
    if variant == DomainVariant::Hf {
        BoundaryLabel::AirBed
    } else {
        BoundaryLabel::BedBase
    }
}

fn check_variant(mesh: &StructuredMesh, variant: DomainVariant) -> Result<()> {
    let need = variant.required_region();
    if !mesh.has_region(need) {
        return Err(Error::Mesh(format!(
            "variant {variant:?} needs {} cells, which this mesh lacks",
            need.as_str()
        )));
    }
    Ok(())
}

/// Boundary of the active domain, maintained incrementally across layer
/// activations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryState {
    variant: DomainVariant,
    faces: BTreeMap<(usize, u8), BoundaryLabel>,
}

impl BoundaryState {
    pub fn classify(mesh: &StructuredMesh, variant: DomainVariant) -> Result<Self> {
        check_variant(mesh, variant)?;
        let mut faces = BTreeMap::new();
        for c in 0..mesh.n_cells() {
            if open(mesh, variant, c) {
                for f in 0..6u8 {
                    if let Some(l) = classify_face(mesh, variant, c, f) {
                        faces.insert((c, f), l);
                    }
                }
            }
        }
        Ok(Self { variant, faces })
    }

    pub fn variant(&self) -> DomainVariant {
        self.variant
    }

    /// Reclassify the cells touched by the activation of `layer`: the layer
    /// itself and the level directly below it.
    pub fn update_after_activation(&mut self, mesh: &StructuredMesh, layer: usize) {
        let [nx, ny, _] = mesh.cell_dims();
        let k_top = mesh.plate_levels + layer;
        let k_lo = k_top.saturating_sub(1);
        for k in k_lo..=k_top {
            for j in 0..ny {
                for i in 0..nx {
                    let c = mesh.cell_index(i, j, k);
                    for f in 0..6u8 {
                        self.faces.remove(&(c, f));
                    }
                    if open(mesh, self.variant, c) {
                        for f in 0..6u8 {
                            if let Some(l) = classify_face(mesh, self.variant, c, f) {
                                self.faces.insert((c, f), l);
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn label_of(&self, cell: usize, face: u8) -> Option<BoundaryLabel> {
        self.faces.get(&(cell, face)).copied()
    }

    /// All faces in deterministic (cell, face) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u8, BoundaryLabel)> + '_ {
        self.faces.iter().map(|(&(c, f), &l)| (c, f, l))
    }

    pub fn face_sets(&self, mesh: &StructuredMesh) -> Vec<BoundaryFaceSet> {
        let mut sets: BTreeMap<BoundaryLabel, Vec<BoundaryFace>> = BTreeMap::new();
        for (c, f, l) in self.iter() {
            sets.entry(l).or_default().push(BoundaryFace {
                cell: c,
                face: f,
                area: mesh.face_area(c, f),
                normal: face_normal(f),
            });
        }
        sets.into_iter()
            .map(|(label, faces)| BoundaryFaceSet { label, faces })
            .collect()
    }
}

/// From-scratch boundary classification of the current activation state.
pub fn classify_boundary(
    mesh: &StructuredMesh,
    variant: DomainVariant,
) -> Result<Vec<BoundaryFaceSet>> {
    Ok(BoundaryState::classify(mesh, variant)?.face_sets(mesh))
}
