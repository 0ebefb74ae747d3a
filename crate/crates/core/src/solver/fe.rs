//! Trilinear hexahedra on axis-aligned boxes, 2-point Gauss rules.
//!
//! Local node `a = ix + 2 iy + 4 iz`; reference coordinates run over [0, 1].
//! Face nodes follow [`crate::mesh::FACE_NODES`], whose order enumerates the
//! two free axes with the lower axis fastest, so local face node
//! `c = u + 2 v`.

use std::sync::OnceLock;

pub const GAUSS: [f64; 2] = [
    0.5 - 0.5 / 1.732_050_807_568_877_2,
    0.5 + 0.5 / 1.732_050_807_568_877_2,
];

pub struct HexRule {
    /// Shape values per quadrature point.
    pub n: [[f64; 8]; 8],
    /// Reference gradients per quadrature point.
    pub dn: [[[f64; 3]; 8]; 8],
    /// Quadrature point coordinates in [0, 1]^3.
    pub xi: [[f64; 3]; 8],
}

pub struct QuadRule {
    pub n: [[f64; 4]; 4],
    pub uv: [[f64; 2]; 4],
}

fn lin(bit: usize, t: f64) -> f64 {
    if bit == 1 {
        t
    } else {
        1.0 - t
    }
}

fn dlin(bit: usize) -> f64 {
    if bit == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn hex_rule() -> &'static HexRule {
    static RULE: OnceLock<HexRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut r = HexRule {
            n: [[0.0; 8]; 8],
            dn: [[[0.0; 3]; 8]; 8],
            xi: [[0.0; 3]; 8],
        };
        for q in 0..8 {
            let p = [GAUSS[q & 1], GAUSS[(q >> 1) & 1], GAUSS[(q >> 2) & 1]];
            r.xi[q] = p;
            for a in 0..8 {
                let b = [a & 1, (a >> 1) & 1, (a >> 2) & 1];
                let l = [lin(b[0], p[0]), lin(b[1], p[1]), lin(b[2], p[2])];
                r.n[q][a] = l[0] * l[1] * l[2];
                r.dn[q][a] = [
                    dlin(b[0]) * l[1] * l[2],
                    l[0] * dlin(b[1]) * l[2],
                    l[0] * l[1] * dlin(b[2]),
                ];
            }
        }
        r
    })
}

pub fn quad_rule() -> &'static QuadRule {
    static RULE: OnceLock<QuadRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut r = QuadRule {
            n: [[0.0; 4]; 4],
            uv: [[0.0; 2]; 4],
        };
        for q in 0..4 {
            let p = [GAUSS[q & 1], GAUSS[(q >> 1) & 1]];
            r.uv[q] = p;
            for c in 0..4 {
                r.n[q][c] = lin(c & 1, p[0]) * lin((c >> 1) & 1, p[1]);
            }
        }
        r
    })
}

/// Trilinear interpolation inside a box with reference coordinates `xi`.
pub fn interpolate(values: &[f64; 8], xi: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for (a, v) in values.iter().enumerate() {
        s += v * lin(a & 1, xi[0]) * lin((a >> 1) & 1, xi[1]) * lin((a >> 2) & 1, xi[2]);
    }
    s
}

/// Per-element contributions: conductivity matrix, lumped capacity
/// (already divided by dt) and load vector.
#[derive(Debug, Clone, Copy)]
pub struct ElementTerms {
    pub k: [[f64; 8]; 8],
    pub m: [f64; 8],
    pub f: [f64; 8],
}

/// Integrate one box element. `props(T)` returns `(rho*c, k)`; `source(q)`
/// gives the volumetric source at quadrature point `q`.
pub fn element_terms(
    h: [f64; 3],
    temps: &[f64; 8],
    dt: f64,
    props: impl Fn(f64) -> (f64, f64),
    source: impl Fn(usize) -> f64,
) -> ElementTerms {
    let rule = hex_rule();
    let w = h[0] * h[1] * h[2] / 8.0;
    let inv2 = [
        1.0 / (h[0] * h[0]),
        1.0 / (h[1] * h[1]),
        1.0 / (h[2] * h[2]),
    ];
    let mut out = ElementTerms {
        k: [[0.0; 8]; 8],
        m: [0.0; 8],
        f: [0.0; 8],
    };
    for q in 0..8 {
        let n = &rule.n[q];
        let t: f64 = (0..8).map(|a| n[a] * temps[a]).sum();
        let (rc, k) = props(t);
        let r = source(q);
        let dn = &rule.dn[q];
        let kw = k * w;
        for a in 0..8 {
            out.m[a] += rc * n[a] * w / dt;
            out.f[a] += r * n[a] * w;
            let ga = [dn[a][0] * inv2[0], dn[a][1] * inv2[1], dn[a][2] * inv2[2]];
            for b in a..8 {
                let v = kw * (ga[0] * dn[b][0] + ga[1] * dn[b][1] + ga[2] * dn[b][2]);
                out.k[a][b] += v;
            }
        }
    }
    for a in 0..8 {
        for b in 0..a {
            out.k[a][b] = out.k[b][a];
        }
    }
    out
}

/// Physical coordinates of the quadrature points of a box.
pub fn quadrature_points(origin: [f64; 3], h: [f64; 3]) -> [[f64; 3]; 8] {
    let rule = hex_rule();
    let mut p = [[0.0; 3]; 8];
    for q in 0..8 {
        for d in 0..3 {
            p[q][d] = origin[d] + h[d] * rule.xi[q][d];
        }
    }
    p
}
