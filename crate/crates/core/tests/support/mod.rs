#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;

use pbf_vda::config::SimulationConfig;
use pbf_vda::materials::{Material, PropertyTable};
use pbf_vda::mesh::{BoundaryLabel, DomainVariant, Region, StructuredMesh, Symmetry};
use pbf_vda::process::{Step, StepKind};
use pbf_vda::solver::{
    BoundaryCondition, RegionMaterials, SolverSettings, SolverSetup, ThermalSolver, TimeSeries,
};
use pbf_vda::vda::VdaVariant;

use oracle::{WallInputs, WallSpec};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn config_path(name: &str) -> PathBuf {
    repo_root().join("configs").join(name)
}

pub fn load_config(name: &str, overrides: &[&str]) -> SimulationConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    SimulationConfig::load(&config_path(name), &o).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn constant_material(name: &str, rho: f64, cp: f64, k: f64) -> Material {
    Material::bulk(
        name,
        PropertyTable::constant(rho).unwrap(),
        PropertyTable::constant(cp).unwrap(),
        PropertyTable::constant(k).unwrap(),
    )
    .unwrap()
}

/// A step that only advances time.
pub fn idle_step(dt: f64) -> Step {
    Step {
        kind: StepKind::Cooling,
        dt,
        layer: None,
        power: 0.0,
        absorption: 1.0,
    }
}

/// Uniform coordinates `a + (b - a) i / n`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Single-cell cross-section column of `n` plate cells over `[z0, z1]`,
/// already active.
pub fn plate_column(width: f64, z0: f64, z1: f64, n: usize) -> StructuredMesh {
    StructuredMesh::from_parts(
        vec![0.0, width],
        vec![0.0, width],
        linspace(z0, z1, n),
        vec![Some(Region::Base); n],
        vec![None; n],
        n,
        Symmetry::default(),
    )
    .unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn oracle_spec(v: VdaVariant) -> WallSpec {
    let (elements, order, held_ends) = v.discretization();
    WallSpec {
        elements,
        order: order as usize,
        held_ends,
    }
}

/// One random set of scaled wall inputs: previous wall temperatures from the
/// solid side outward, and the solid temperature for the step.
#[derive(Debug, Clone)]
pub struct WallDraw {
    pub inputs: WallInputs,
    pub state: Vec<f64>,
    pub t_solid: f64,
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn draw_wall(rng: &mut impl Rng, v: VdaVariant) -> WallDraw {
    let inputs = WallInputs {
        m: log_uniform(rng, 1e-2, 1e4),
        k_hat: log_uniform(rng, 1e-1, 1e4),
        h_sp: log_uniform(rng, 1.0, 1e5),
        h_pp: log_uniform(rng, 1.0, 1e5),
        t0: rng.random_range(20.0..200.0),
    };
    WallDraw {
        inputs,
        state: (0..v.state_len())
            .map(|_| rng.random_range(20.0..1500.0))
            .collect(),
        t_solid: rng.random_range(20.0..1600.0),
    }
}

pub fn settings() -> SolverSettings {
    SolverSettings {
        cg_tolerance: 1e-12,
        ..Default::default()
    }
}

pub fn solver(
    mesh: StructuredMesh,
    variant: DomainVariant,
    materials: RegionMaterials,
    bcs: Vec<(BoundaryLabel, BoundaryCondition)>,
    t_init: f64,
) -> ThermalSolver {
    ThermalSolver::new(SolverSetup {
        mesh,
        variant,
        materials,
        boundary_conditions: bcs.into_iter().collect::<BTreeMap<_, _>>(),
        initial_temperature: t_init,
        settings: settings(),
    })
    .unwrap()
}

pub fn base_only(m: Material) -> RegionMaterials {
    RegionMaterials {
        base: Some(m),
        ..Default::default()
    }
}

/// L2 error of T = T0 + zeta^2 t on a column of n cells, sampled at the
/// two-point Gauss abscissae of every cell.
pub fn mms_error(n: usize) -> f64 {
    let (t0, len, t_end) = (20.0, 1.0, 0.5);
    let (rho_c, k) = (3.0, 2.0);
    let mesh = plate_column(1.0, -len, 0.0, n);
    let top = PropertyTable::new(&[(0.0, t0), (t_end, t0 + len * len * t_end)]).unwrap();
    let mut s = solver(
        mesh,
        DomainVariant::Pp,
        base_only(constant_material("m", rho_c, 1.0, k)),
        vec![
            (
                BoundaryLabel::Down,
                BoundaryCondition::Dirichlet {
                    temperature: t0.into(),
                },
            ),
            (
                BoundaryLabel::BedBase,
                BoundaryCondition::Dirichlet {
                    temperature: TimeSeries::Table(top),
                },
            ),
            (BoundaryLabel::LatBase, BoundaryCondition::Adiabatic),
        ],
        t0,
    )
    .with_source(Box::new(move |p: [f64; 3], t: f64| {
        let zeta = p[2] + len;
        rho_c * zeta * zeta - 2.0 * k * t
    }));
    let steps = 10;
    for _ in 0..steps {
        s.step(&idle_step(t_end / steps as f64)).unwrap();
    }
    let h = len / n as f64;
    let g = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
    let mut sum = 0.0;
    for c in 0..n {
        for xi in g {
            let z = -len + (c as f64 + xi) * h;
            let zeta = z + len;
            let exact = t0 + zeta * zeta * t_end;
            let e = s.probe([0.5, 0.5, z]) - exact;
            sum += e * e * 0.5 * h;
        }
    }
    sum.sqrt()
}
