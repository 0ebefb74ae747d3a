use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bc::{radiation_coefficient, BoundaryCondition};
use super::fe::{self, ElementTerms};
use super::sparse::{conjugate_gradient, CsrMatrix};
use crate::error::{Error, Result};
use crate::materials::Material;
use crate::mesh::{
    BoundaryLabel, BoundaryState, DomainVariant, Region, StructuredMesh, FACE_NODES,
};
use crate::process::{source_density, Step, StepKind};
use crate::vda::WallStep;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_cg_tol")]
    pub cg_tolerance: f64,
    #[serde(default = "default_picard_tol")]
    pub picard_tolerance: f64,
    #[serde(default = "default_picard_max")]
    pub picard_max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_cg_tol() -> f64 {
    1e-9
}
fn default_picard_tol() -> f64 {
    1e-6
}
fn default_picard_max() -> usize {
    25
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            cg_tolerance: default_cg_tol(),
            picard_tolerance: default_picard_tol(),
            picard_max_iterations: default_picard_max(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RegionMaterials {
    pub part: Option<Material>,
    pub base: Option<Material>,
    pub bed: Option<Material>,
}

impl RegionMaterials {
    pub fn get(&self, r: Region) -> Option<&Material> {
        match r {
            Region::Part => self.part.as_ref(),
            Region::Base => self.base.as_ref(),
            Region::Bed => self.bed.as_ref(),
        }
    }
}

/// Extra volumetric source `r(x, t)` in W/m^3, evaluated at quadrature points.
pub type SourceFn = Box<dyn Fn([f64; 3], f64) -> f64 + Send + Sync>;

pub struct SolverSetup {
    pub mesh: StructuredMesh,
    pub variant: DomainVariant,
    pub materials: RegionMaterials,
    pub boundary_conditions: BTreeMap<BoundaryLabel, BoundaryCondition>,
    /// Initial temperature of the domain and of newly activated material.
    pub initial_temperature: f64,
    pub settings: SolverSettings,
}

/// Energy exchanged during one step (J, modelled domain only).
#[derive(Debug, Clone, PartialEq)]
pub struct StepEnergy {
    pub input: f64,
    /// Heat leaving through each labelled boundary, aligned with
    /// [`ThermalSolver::ledger_labels`].
    pub boundary: Vec<f64>,
    pub stored: f64,
    pub residual: f64,
}

impl StepEnergy {
    pub fn boundary_total(&self) -> f64 {
        self.boundary.iter().sum()
    }

    /// Residual relative to the larger of the exchanged energies and 1 J.
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / self.input.abs().max(self.stored.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub index: usize,
    pub time: f64,
    pub dt: f64,
    pub kind: StepKind,
    pub picard_iterations: usize,
    pub cg_iterations: usize,
    pub max_temperature: f64,
    pub energy: StepEnergy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub time: f64,
    pub input: f64,
    pub boundary: Vec<f64>,
    pub stored: f64,
    pub residual: f64,
}

struct Layout {
    node_dof: Vec<usize>,
    dof_node: Vec<usize>,
    open_cells: Vec<usize>,
    cell_slot: Vec<usize>,
    matrix: CsrMatrix,
    cell_pos: Vec<[usize; 64]>,
}

const NONE: usize = usize::MAX;

impl Layout {
    fn build(mesh: &StructuredMesh, variant: DomainVariant) -> Self {
        let open_cells: Vec<usize> = (0..mesh.n_cells())
            .filter(|&c| mesh.is_active(c) && mesh.region(c).is_some_and(|r| variant.includes(r)))
            .collect();
        let mut node_dof = vec![NONE; mesh.n_nodes()];
        let mut cell_slot = vec![NONE; mesh.n_cells()];
        for (s, &c) in open_cells.iter().enumerate() {
            cell_slot[c] = s;
            for n in mesh.cell_nodes(c) {
                node_dof[n] = 0;
            }
        }
        let mut dof_node = Vec::new();
        for (n, d) in node_dof.iter_mut().enumerate() {
            if *d == 0 {
                *d = dof_node.len();
                dof_node.push(n);
            }
        }
        let mut rows = vec![Vec::with_capacity(27); dof_node.len()];
        for &c in &open_cells {
            let dofs = mesh.cell_nodes(c).map(|n| node_dof[n]);
            for &a in &dofs {
                rows[a].extend_from_slice(&dofs);
            }
        }
        let matrix = CsrMatrix::from_rows(rows);
        let cell_pos = open_cells
            .iter()
            .map(|&c| {
                let dofs = mesh.cell_nodes(c).map(|n| node_dof[n]);
                let mut p = [0usize; 64];
                for a in 0..8 {
                    for b in 0..8 {
                        p[a * 8 + b] = matrix
                            .position(dofs[a], dofs[b])
                            .expect("pattern covers cell");
                    }
                }
                p
            })
            .collect();
        Self {
            node_dof,
            dof_node,
            open_cells,
            cell_slot,
            matrix,
            cell_pos,
        }
    }

    fn n(&self) -> usize {
        self.dof_node.len()
    }
}

/// One assembled boundary face, kept for the energy audit.
struct FaceTerm {
    label_slot: usize,
    nodes: [usize; 4],
    area: f64,
    h: [f64; 4],
    t_loss: [f64; 4],
}

struct Assembly {
    rhs: Vec<f64>,
    capacity: Vec<f64>,
    load: Vec<f64>,
    faces: Vec<FaceTerm>,
    fixed: Vec<Option<f64>>,
    fixed_label: Vec<usize>,
}

/// Prepared walls of one VDA face for the current step.
struct VdaFace {
    key: (usize, u8),
    walls: Vec<WallStep>,
}

pub struct ThermalSolver {
    mesh: StructuredMesh,
    variant: DomainVariant,
    boundary: BoundaryState,
    materials: RegionMaterials,
    bcs: BTreeMap<BoundaryLabel, BoundaryCondition>,
    labels: Vec<BoundaryLabel>,
    settings: SolverSettings,
    initial_temperature: f64,
    temps: Vec<f64>,
    time: f64,
    step_index: usize,
    layout: Layout,
    vda_state: BTreeMap<(usize, u8), Vec<f64>>,
    source: Option<SourceFn>,
    pool: Option<rayon::ThreadPool>,
    nonlinear: bool,
    ledger: Vec<LedgerRow>,
}

impl ThermalSolver {
    pub fn new(setup: SolverSetup) -> Result<Self> {
        let SolverSetup {
            mesh,
            variant,
            materials,
            boundary_conditions: bcs,
            initial_temperature,
            settings,
        } = setup;
        if !initial_temperature.is_finite() {
            return Err(Error::InvalidInput(
                "initial temperature must be finite".into(),
            ));
        }
        let boundary = BoundaryState::classify(&mesh, variant)?;
        let mut nonlinear = false;
        for r in Region::ALL {
            if variant.includes(r) && mesh.has_region(r) {
                let m = materials.get(r).ok_or_else(|| {
                    Error::InvalidInput(format!("no material for region {}", r.as_str()))
                })?;
                nonlinear |= !m.is_constant();
            }
        }
        for (l, bc) in &bcs {
            bc.validate()
                .map_err(|e| Error::InvalidInput(format!("boundary {l}: {e}")))?;
            nonlinear |= bc.is_nonlinear();
        }
        if !(settings.cg_tolerance > 0.0
            && settings.picard_tolerance > 0.0
            && settings.picard_max_iterations > 0)
        {
            return Err(Error::InvalidInput(
                "solver tolerances and iteration cap must be positive".into(),
            ));
        }
        let pool = match settings.threads {
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?,
            ),
            None => None,
        };
        let labels = bcs.keys().copied().collect();
        let layout = Layout::build(&mesh, variant);
        let mut temps = vec![f64::NAN; mesh.n_nodes()];
        for &n in &layout.dof_node {
            temps[n] = initial_temperature;
        }
        let mut s = Self {
            mesh,
            variant,
            boundary,
            materials,
            bcs,
            labels,
            settings,
            initial_temperature,
            temps,
            time: 0.0,
            step_index: 0,
            layout,
            vda_state: BTreeMap::new(),
            source: None,
            pool,
            nonlinear,
            ledger: Vec::new(),
        };
        s.sync_vda_states()?;
        Ok(s)
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    pub fn mesh(&self) -> &StructuredMesh {
        &self.mesh
    }

    pub fn variant(&self) -> DomainVariant {
        self.variant
    }

    pub fn boundary(&self) -> &BoundaryState {
        &self.boundary
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n()
    }

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinear
    }

    /// Nodal temperatures over the whole grid; inactive nodes are NaN.
    pub fn temperatures(&self) -> &[f64] {
        &self.temps
    }

    pub fn ledger_labels(&self) -> &[BoundaryLabel] {
        &self.labels
    }

    /// Cumulative energy ledger, one row per completed step.
    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }

    pub fn max_temperature(&self) -> f64 {
        self.layout
            .dof_node
            .iter()
            .map(|&n| self.temps[n])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_temperature(&self) -> f64 {
        self.layout
            .dof_node
            .iter()
            .map(|&n| self.temps[n])
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation of any active node from `reference`.
    pub fn max_deviation(&self, reference: f64) -> f64 {
        self.layout
            .dof_node
            .iter()
            .map(|&n| (self.temps[n] - reference).abs())
            .fold(0.0, f64::max)
    }

    /// Temperature at a point by trilinear interpolation in an active cell,
    /// NaN when no active cell contains it.
    pub fn probe(&self, p: [f64; 3]) -> f64 {
        for c in self.mesh.locate(p) {
            if self.layout.cell_slot[c] == NONE {
                continue;
            }
            let (o, h) = self.mesh.cell_box(c);
            let xi = [0, 1, 2].map(|d| ((p[d] - o[d]) / h[d]).clamp(0.0, 1.0));
            let vals = self.mesh.cell_nodes(c).map(|n| self.temps[n]);
            return fe::interpolate(&vals, xi);
        }
        f64::NAN
    }

    /// Activate an element layer and extend the temperature field with the
    /// initial temperature on the new nodes.
    pub fn activate_layer(&mut self, layer: usize) -> Result<Vec<usize>> {
        let cells = self.mesh.activate_layer(layer)?;
        self.boundary.update_after_activation(&self.mesh, layer);
        self.layout = Layout::build(&self.mesh, self.variant);
        for &n in &self.layout.dof_node {
            if self.temps[n].is_nan() {
                self.temps[n] = self.initial_temperature;
            }
        }
        self.sync_vda_states()?;
        Ok(cells)
    }

    fn sync_vda_states(&mut self) -> Result<()> {
        let mut next = BTreeMap::new();
        for (c, f, l) in self.boundary.iter() {
            if let Some(BoundaryCondition::Vda {
                params,
                face_averaged,
                ..
            }) = self.bcs.get(&l)
            {
                let walls = if *face_averaged { 1 } else { 4 };
                let state = self.vda_state.remove(&(c, f)).unwrap_or_else(|| {
                    vec![params.far_temperature; walls * params.variant.state_len()]
                });
                next.insert((c, f), state);
            }
        }
        self.vda_state = next;
        Ok(())
    }

    /// Run one schedule step: activate its layer (printing steps), solve
    /// with Picard iterations, update wall states and the energy ledger.
    pub fn step(&mut self, step: &Step) -> Result<StepReport> {
        let idx = self.step_index;
        let t_new = self.time + step.dt;
        self.step_inner(step).map_err(|e| e.at_step(idx, t_new))
    }

    fn prepare_vda(&self, dt: f64) -> Result<Vec<VdaFace>> {
        let mut out = Vec::with_capacity(self.vda_state.len());
        for (&key, state) in &self.vda_state {
            let label = self
                .boundary
                .label_of(key.0, key.1)
                .expect("wall state tracks current boundary faces");
            let Some(BoundaryCondition::Vda {
                params, material, ..
            }) = self.bcs.get(&label)
            else {
                unreachable!("wall state exists only for wall boundaries")
            };
            let stride = params.variant.state_len();
            let walls = state
                .chunks(stride)
                .map(|s| params.prepare(material, dt, s))
                .collect::<Result<Vec<_>>>()?;
            out.push(VdaFace { key, walls });
        }
        Ok(out)
    }

    fn step_inner(&mut self, step: &Step) -> Result<StepReport> {
        if !(step.dt > 0.0 && step.dt.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "time step must be positive, got {}",
                step.dt
            )));
        }
        let mut heated: Vec<usize> = Vec::new();
        let mut density = 0.0;
        if step.kind == StepKind::Printing {
            let layer = step
                .layer
                .ok_or_else(|| Error::InvalidInput("printing step without a layer".into()))?;
            let cells = self.activate_layer(layer)?;
            heated = cells
                .into_iter()
                .filter(|&c| self.mesh.region(c) == Some(Region::Part))
                .collect();
            let modelled: f64 = heated.iter().map(|&c| self.mesh.cell_volume(c)).sum();
            density = source_density(step, modelled * self.mesh.symmetry().multiplicity())?;
        }
        if self.layout.n() == 0 {
            return Err(Error::InvalidInput("the active domain is empty".into()));
        }
        let dt = step.dt;
        let t_new = self.time + dt;
        let vda = self.prepare_vda(dt)?;
        let mut heated_flag = vec![false; self.mesh.n_cells()];
        for &c in &heated {
            heated_flag[c] = true;
        }

        let old = self.temps.clone();
        let mut iterate = old.clone();
        let n = self.layout.n();
        let mut x = vec![0.0; n];
        let mut cg_total = 0;
        let mut picard = 0;
        let mut converged = false;
        let mut change;
        let mut assembly;
        let mut original;
        loop {
            picard += 1;
            assembly = self.assemble(&iterate, &old, dt, t_new, density, &heated_flag, &vda)?;
            original = if assembly.fixed.iter().any(|f| f.is_some()) {
                Some(self.layout.matrix.clone())
            } else {
                None
            };
            let mut rhs = assembly.rhs.clone();
            self.layout.matrix.eliminate(&mut rhs, &assembly.fixed);
            for (d, &node) in self.layout.dof_node.iter().enumerate() {
                x[d] = assembly.fixed[d].unwrap_or(iterate[node]);
            }
            let stats = conjugate_gradient(
                &self.layout.matrix,
                &rhs,
                &mut x,
                self.settings.cg_tolerance,
            )?;
            cg_total += stats.iterations;
            let mut diff: f64 = 0.0;
            let mut scale: f64 = 1.0;
            for (d, &node) in self.layout.dof_node.iter().enumerate() {
                if !x[d].is_finite() {
                    return Err(Error::InvalidInput(
                        "non-finite temperature in solution".into(),
                    ));
                }
                diff = diff.max((x[d] - iterate[node]).abs());
                scale = scale.max(x[d].abs());
                iterate[node] = x[d];
            }
            change = diff / scale;
            if !self.nonlinear || change <= self.settings.picard_tolerance {
                converged = true;
                break;
            }
            if picard >= self.settings.picard_max_iterations {
                break;
            }
        }
        if !converged {
            return Err(Error::PicardNotConverged {
                iterations: picard,
                change,
            });
        }
        self.temps = iterate;

        let energy = self.audit(
            &assembly,
            original.as_ref().unwrap_or(&self.layout.matrix),
            &old,
            dt,
        );
        self.advance_vda(&vda);
        self.time = t_new;
        self.step_index += 1;
        let mut row = self.ledger.last().cloned().unwrap_or(LedgerRow {
            time: 0.0,
            input: 0.0,
            boundary: vec![0.0; self.labels.len()],
            stored: 0.0,
            residual: 0.0,
        });
        row.time = t_new;
        row.input += energy.input;
        for (a, b) in row.boundary.iter_mut().zip(&energy.boundary) {
            *a += b;
        }
        row.stored += energy.stored;
        row.residual += energy.residual;
        self.ledger.push(row);
        Ok(StepReport {
            index: self.step_index - 1,
            time: t_new,
            dt,
            kind: step.kind,
            picard_iterations: picard,
            cg_iterations: cg_total,
            max_temperature: self.max_temperature(),
            energy,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &mut self,
        iterate: &[f64],
        old: &[f64],
        dt: f64,
        t_new: f64,
        density: f64,
        heated: &[bool],
        vda: &[VdaFace],
    ) -> Result<Assembly> {
        let mesh = &self.mesh;
        let materials = &self.materials;
        let source = self.source.as_ref();
        let compute = |&c: &usize| -> ElementTerms {
            let nodes = mesh.cell_nodes(c);
            let temps = nodes.map(|n| iterate[n]);
            let (o, h) = mesh.cell_box(c);
            let mat = materials
                .get(mesh.region(c).expect("open cell has a region"))
                .expect("validated");
            let base = if heated[c] { density } else { 0.0 };
            let qp = source.map(|_| fe::quadrature_points(o, h));
            fe::element_terms(
                h,
                &temps,
                1.0,
                |t| (mat.capacity(t), mat.conductivity(t)),
                |q| base + source.map_or(0.0, |s| s(qp.as_ref().unwrap()[q], t_new)),
            )
        };
        let open = &self.layout.open_cells;
        let terms: Vec<ElementTerms> = match &self.pool {
            Some(pool) => pool.install(|| open.par_iter().map(compute).collect()),
            None => open.par_iter().map(compute).collect(),
        };

        let n = self.layout.n();
        let layout = &mut self.layout;
        layout.matrix.clear();
        let mut rhs = vec![0.0; n];
        let mut capacity = vec![0.0; n];
        let mut load = vec![0.0; n];
        for (slot, t) in terms.iter().enumerate() {
            let c = layout.open_cells[slot];
            let pos = &layout.cell_pos[slot];
            let nodes = mesh.cell_nodes(c);
            for a in 0..8 {
                let d = layout.node_dof[nodes[a]];
                for b in 0..8 {
                    layout.matrix.add_at(pos[a * 8 + b], t.k[a][b]);
                }
                layout.matrix.add_at(pos[a * 8 + a], t.m[a] / dt);
                capacity[d] += t.m[a];
                load[d] += t.f[a];
                rhs[d] += t.f[a] + t.m[a] / dt * old[nodes[a]];
            }
        }

        let quad = fe::quad_rule();
        let mut faces = Vec::new();
        let mut fixed = vec![None; n];
        let mut fixed_label = vec![NONE; n];
        let mut vda_iter = vda.iter().peekable();
        for (c, f, label) in self.boundary.iter() {
            if label == BoundaryLabel::Symmetry {
                continue;
            }
            let bc = self.bcs.get(&label).ok_or_else(|| {
                Error::InvalidInput(format!("no boundary condition for label {label}"))
            })?;
            let slot = layout.cell_slot[c];
            let label_slot = self
                .labels
                .binary_search(&label)
                .expect("label has a condition");
            let cell_nodes = mesh.cell_nodes(c);
            let local = FACE_NODES[f as usize];
            let nodes = local.map(|a| cell_nodes[a]);
            let (h, tl) = match bc {
                BoundaryCondition::Adiabatic => continue,
                BoundaryCondition::Dirichlet { temperature } => {
                    let v = temperature.at(t_new);
                    for &node in &nodes {
                        let d = layout.node_dof[node];
                        if fixed[d].is_none() {
                            fixed[d] = Some(v);
                            fixed_label[d] = label_slot;
                        }
                    }
                    continue;
                }
                BoundaryCondition::Robin {
                    h,
                    ambient,
                    emissivity,
                } => {
                    let ta = ambient.at(t_new);
                    let mut hq = [*h; 4];
                    if *emissivity > 0.0 {
                        for (q, hv) in hq.iter_mut().enumerate() {
                            let t: f64 = (0..4).map(|i| quad.n[q][i] * iterate[nodes[i]]).sum();
                            *hv += radiation_coefficient(*emissivity, t, ta);
                        }
                    }
                    (hq, [ta; 4])
                }
                BoundaryCondition::Vda { .. } => {
                    let face = vda_iter.next().expect("prepared wall for each wall face");
                    debug_assert_eq!(face.key, (c, f));
                    let mut hq = [0.0; 4];
                    let mut tq = [0.0; 4];
                    for q in 0..4 {
                        let w = &face.walls[if face.walls.len() == 1 { 0 } else { q }];
                        hq[q] = w.robin.h_loss;
                        tq[q] = w.robin.t_loss;
                    }
                    (hq, tq)
                }
            };
            let area = mesh.face_area(c, f);
            let pos = &layout.cell_pos[slot];
            for q in 0..4 {
                let w = 0.25 * area * h[q];
                for i in 0..4 {
                    let ni = quad.n[q][i];
                    rhs[layout.node_dof[nodes[i]]] += w * tl[q] * ni;
                    for j in 0..4 {
                        layout
                            .matrix
                            .add_at(pos[local[i] * 8 + local[j]], w * ni * quad.n[q][j]);
                    }
                }
            }
            faces.push(FaceTerm {
                label_slot,
                nodes,
                area,
                h,
                t_loss: tl,
            });
        }
        Ok(Assembly {
            rhs,
            capacity,
            load,
            faces,
            fixed,
            fixed_label,
        })
    }

    fn audit(&self, asm: &Assembly, original: &CsrMatrix, old: &[f64], dt: f64) -> StepEnergy {
        let layout = &self.layout;
        let quad = fe::quad_rule();
        let input = dt * asm.load.iter().sum::<f64>();
        let mut boundary = vec![0.0; self.labels.len()];
        for face in &asm.faces {
            let mut e = 0.0;
            for q in 0..4 {
                let t: f64 = (0..4)
                    .map(|i| quad.n[q][i] * self.temps[face.nodes[i]])
                    .sum();
                e += 0.25 * face.area * face.h[q] * (t - face.t_loss[q]);
            }
            boundary[face.label_slot] += dt * e;
        }
        // reactions at prescribed nodes: A T - b is the heat the constraint
        // supplies, so its negative leaves through the fixing label
        for d in 0..layout.n() {
            if asm.fixed[d].is_some() {
                let ax: f64 = original
                    .row(d)
                    .map(|(j, v)| v * self.temps[layout.dof_node[j]])
                    .sum();
                boundary[asm.fixed_label[d]] += dt * (asm.rhs[d] - ax);
            }
        }
        let stored: f64 = layout
            .dof_node
            .iter()
            .enumerate()
            .map(|(d, &node)| asm.capacity[d] * (self.temps[node] - old[node]))
            .sum();
        let residual = input - boundary.iter().sum::<f64>() - stored;
        StepEnergy {
            input,
            boundary,
            stored,
            residual,
        }
    }

    fn advance_vda(&mut self, vda: &[VdaFace]) {
        let quad = fe::quad_rule();
        for face in vda {
            let (c, f) = face.key;
            let cell_nodes = self.mesh.cell_nodes(c);
            let nodes = FACE_NODES[f as usize].map(|a| cell_nodes[a]);
            let state = self
                .vda_state
                .get_mut(&face.key)
                .expect("state for prepared face");
            if face.walls.len() == 1 {
                let t = nodes.iter().map(|&n| self.temps[n]).sum::<f64>() / 4.0;
                face.walls[0].advance_into(t, state);
            } else {
                let stride = state.len() / 4;
                for q in 0..4 {
                    let t: f64 = (0..4).map(|i| quad.n[q][i] * self.temps[nodes[i]]).sum();
                    face.walls[q].advance_into(t, &mut state[q * stride..(q + 1) * stride]);
                }
            }
        }
    }

    /// Stored wall temperatures of one boundary face, if it carries a wall.
    pub fn wall_state(&self, cell: usize, face: u8) -> Option<&[f64]> {
        self.vda_state.get(&(cell, face)).map(|v| v.as_slice())
    }
}
