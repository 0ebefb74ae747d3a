use proptest::prelude::*;

use pbf_vda::mesh::{
    build_mesh, face_normal, BoundaryLabel, BoundaryState, DomainVariant, GeometrySpec, Layering,
    MeshResolution, PartSpec, PlateSpec, Rect, Region, Symmetry,
};

#[derive(Debug, Clone)]
struct Case {
    geom: GeometrySpec,
    lumps: usize,
    variant: DomainVariant,
}

const DZ: f64 = 0.001;

fn case() -> impl Strategy<Value = Case> {
    (
        (0.02f64..0.05, 0.02f64..0.05, 0.003f64..0.012),
        (any::<bool>(), any::<bool>()),
        (
            0.002f64..0.006,
            0.002f64..0.006,
            0.001f64..0.006,
            0.001f64..0.006,
        ),
        (0.0f64..0.0015, -0.0015f64..0.0015),
        1usize..6,
        (0.0008f64..0.003, 1.0f64..2.0),
        prop_oneof![
            Just(DomainVariant::Hf),
            Just(DomainVariant::Pp),
            Just(DomainVariant::P)
        ],
    )
        .prop_map(
            |((lx, ly, t), (sx, sy), (wx, wy, ox, oy), (dx, dy), lumps, (h, ratio), variant)| {
                let x0 = if sx { 0.0 } else { ox };
                let y0 = if sy { 0.0 } else { oy };
                let dx = if sx { 0.0 } else { dx };
                let dy = if sy {
                    0.0
                } else {
                    dy.abs().min(oy / lumps as f64) * dy.signum()
                };
                let geom = GeometrySpec {
                    plate: PlateSpec {
                        x: [0.0, lx],
                        y: [0.0, ly],
                        thickness: t,
                    },
                    part: PartSpec {
                        footprint: Rect {
                            x: [x0, x0 + wx],
                            y: [y0, y0 + wy],
                        },
                        height: lumps as f64 * DZ,
                        offset_per_lump: [dx, dy],
                    },
                    mesh: MeshResolution {
                        part_xy: h,
                        grading: ratio,
                        max_xy: 0.01,
                        plate_top_dz: 0.001,
                        plate_max_dz: 0.004,
                    },
                    symmetry: Symmetry {
                        x_min: sx,
                        y_min: sy,
                    },
                };
                Case {
                    geom,
                    lumps,
                    variant,
                }
            },
        )
}

fn layering() -> Layering {
    Layering {
        layer_thickness: DZ,
        layers_per_lump: 1,
    }
}

fn faces(s: &BoundaryState) -> Vec<(usize, u8, BoundaryLabel)> {
    s.iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_boundary_matches_reclassification(c in case()) {
        let mut mesh = build_mesh(&c.geom, layering(), c.variant).unwrap();
        prop_assert_eq!(mesh.n_layers(), c.lumps);
        let mut state = BoundaryState::classify(&mesh, c.variant).unwrap();
        for layer in 0..mesh.n_layers() {
            mesh.activate_layer(layer).unwrap();
            state.update_after_activation(&mesh, layer);
            let fresh = BoundaryState::classify(&mesh, c.variant).unwrap();
            prop_assert_eq!(faces(&state), faces(&fresh), "after layer {}", layer);
        }
    }

    /// The boundary of the active domain, symmetry planes included, is a
    /// closed surface: area-weighted normals cancel.
    #[test]
    fn boundary_is_closed_and_labels_belong_to_variant(c in case()) {
        let mut mesh = build_mesh(&c.geom, layering(), c.variant).unwrap();
        let mut state = BoundaryState::classify(&mesh, c.variant).unwrap();
        for layer in 0..mesh.n_layers() {
            mesh.activate_layer(layer).unwrap();
            state.update_after_activation(&mesh, layer);
            let mut sum = [0.0f64; 3];
            let mut total = 0.0;
            for (cell, f, label) in state.iter() {
                prop_assert!(
                    c.variant.labels().contains(&label) || label == BoundaryLabel::Symmetry,
                    "{:?} on {:?}", label, c.variant
                );
                let a = mesh.face_area(cell, f);
                let n = face_normal(f);
                for d in 0..3 {
                    sum[d] += a * n[d];
                }
                total += a;
            }
            prop_assert!(total > 0.0);
            for d in 0..3 {
                prop_assert!(sum[d].abs() <= 1e-9 * total, "axis {}: {:?}", d, sum);
            }
        }
    }

    #[test]
    fn part_layers_follow_the_footprint(c in case()) {
        let mesh = build_mesh(&c.geom, layering(), c.variant).unwrap();
        for layer in 0..mesh.n_layers() {
            let v = mesh.layer_part_volume(layer);
            let fp = c.geom.part.footprint;
            let expect = (fp.x[1] - fp.x[0]) * (fp.y[1] - fp.y[0]) * DZ;
            prop_assert!((v - expect).abs() <= 1e-9 * expect, "layer {}: {} vs {}", layer, v, expect);
        }
        if c.variant != DomainVariant::Hf {
            prop_assert_eq!(mesh.count_region(Region::Bed), 0);
        }
        if c.variant == DomainVariant::P {
            prop_assert_eq!(mesh.count_region(Region::Base), 0);
        }
    }
}
