//! Brute-force references for the test suite. Nothing here calls into the
//! library's wall or solver code: the 1D wall is rebuilt from Lagrange
//! shape functions and solved as one dense augmented system in exact
//! rational arithmetic, so its only error is the final rounding.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Wall discretization: number of elements, polynomial order, and whether the
/// ends are held (solid side at the solid temperature, far side at T0) instead
/// of coupled through contact coefficients.
#[derive(Debug, Clone, Copy)]
pub struct WallSpec {
    pub elements: usize,
    pub order: usize,
    pub held_ends: bool,
}

impl WallSpec {
    pub fn nodes(&self) -> usize {
        self.elements * self.order + 1
    }

    /// Stored values per wall: every node, or all but the far node.
    pub fn state_len(&self) -> usize {
        if self.held_ends {
            self.nodes() - 1
        } else {
            self.nodes()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WallInputs {
    /// rho c s / dt (per unit area).
    pub m: f64,
    /// k / s.
    pub k_hat: f64,
    pub h_sp: f64,
    pub h_pp: f64,
    pub t0: f64,
}

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite input")
}

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Polynomial coefficients, lowest degree first.
type Poly = Vec<Q>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_diff(a: &Poly) -> Poly {
    if a.len() <= 1 {
        return vec![Q::zero()];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * qi(i as i64))
        .collect()
}

fn integrate_unit(a: &Poly) -> Q {
    a.iter()
        .enumerate()
        .map(|(i, c)| c / qi(i as i64 + 1))
        .sum()
}

/// Lagrange basis on the equispaced nodes i / order of [0, 1].
fn lagrange(order: usize) -> Vec<Poly> {
    let pts: Vec<Q> = (0..=order)
        .map(|i| qi(i as i64) / qi(order as i64))
        .collect();
    (0..=order)
        .map(|a| {
            let mut p: Poly = vec![Q::one()];
            for b in 0..=order {
                if b != a {
                    let d = &pts[a] - &pts[b];
                    p = poly_mul(&p, &vec![-&pts[b] / &d, Q::one() / &d]);
                }
            }
            p
        })
        .collect()
}

/// Row-sum lumped mass and stiffness of the whole wall, integrated exactly.
fn wall_system(spec: WallSpec, m: &Q, k_hat: &Q) -> (Vec<Q>, Vec<Vec<Q>>) {
    let nn = spec.nodes();
    let me = m / qi(spec.elements as i64);
    let ke = k_hat * qi(spec.elements as i64);
    let n = lagrange(spec.order);
    let dn: Vec<Poly> = n.iter().map(poly_diff).collect();
    let mut mass = vec![Q::zero(); nn];
    let mut k = vec![vec![Q::zero(); nn]; nn];
    for e in 0..spec.elements {
        let o = e * spec.order;
        for a in 0..=spec.order {
            mass[o + a] += &me * integrate_unit(&n[a]);
            for b in 0..=spec.order {
                k[o + a][o + b] += &ke * integrate_unit(&poly_mul(&dn[a], &dn[b]));
            }
        }
    }
    (mass, k)
}

/// Exact Gaussian elimination; `None` if singular.
fn exact_solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    let mut x = vec![Q::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for c in r + 1..n {
            s -= &a[r][c] * &x[c];
        }
        x[r] = s / &a[r][r];
    }
    Some(x)
}

fn f(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

/// One backward-Euler step of the wall with the solid temperature
/// prescribed, solved in exact arithmetic. Unknown 0 is the solid node; the
/// rest are the wall nodes. Returns the heat flux into the wall and the new
/// stored wall values, each rounded once.
pub fn wall_direct_solve(
    spec: WallSpec,
    p: WallInputs,
    state: &[f64],
    t_solid: f64,
) -> Option<(f64, Vec<f64>)> {
    assert_eq!(state.len(), spec.state_len());
    let nn = spec.nodes();
    let (mass, k) = wall_system(spec, &q(p.m), &q(p.k_hat));
    let (h_sp, h_pp, t0) = (q(p.h_sp), q(p.h_pp), q(p.t0));
    let old: Vec<Q> = (0..nn)
        .map(|i| {
            if i < state.len() {
                q(state[i])
            } else {
                t0.clone()
            }
        })
        .collect();
    let n = nn + 1;
    let mut a = vec![vec![Q::zero(); n]; n];
    let mut b = vec![Q::zero(); n];
    a[0][0] = Q::one();
    b[0] = q(t_solid);
    for i in 0..nn {
        let r = i + 1;
        a[r][r] += &mass[i];
        b[r] += &mass[i] * &old[i];
        for j in 0..nn {
            a[r][j + 1] += &k[i][j];
        }
    }
    if spec.held_ends {
        a[1] = vec![Q::zero(); n];
        a[1][0] = -Q::one();
        a[1][1] = Q::one();
        b[1] = Q::zero();
        a[nn] = vec![Q::zero(); n];
        a[nn][nn] = Q::one();
        b[nn] = t0.clone();
    } else {
        a[1][1] += &h_sp;
        a[1][0] -= &h_sp;
        a[nn][nn] += &h_pp;
        b[nn] += &h_pp * &t0;
    }
    let x = exact_solve(a, b)?;
    let w = &x[1..];
    let flux = if spec.held_ends {
        let mut r = &mass[0] * (&w[0] - &old[0]);
        for j in 0..nn {
            r += &k[0][j] * &w[j];
        }
        r
    } else {
        &h_sp * (q(t_solid) - &w[0])
    };
    Some((f(&flux), w[..spec.state_len()].iter().map(f).collect()))
}

/// Integrate the wall over one interval of length dt in `substeps` equal
/// backward-Euler steps with the solid held at `t_solid`; returns the flux
/// at the end of the interval.
pub fn wall_substepped(
    spec: WallSpec,
    p: WallInputs,
    state: &[f64],
    t_solid: f64,
    substeps: usize,
) -> Option<f64> {
    let fine = WallInputs {
        m: p.m * substeps as f64,
        ..p
    };
    let mut s = state.to_vec();
    let mut q = 0.0;
    for _ in 0..substeps {
        let (qq, next) = wall_direct_solve(spec, fine, &s, t_solid)?;
        q = qq;
        s = next;
    }
    Some(q)
}

/// Steady conduction through a plane wall: flux and linear profile.
pub fn slab_analytic(t_left: f64, t_right: f64, k: f64, s: f64) -> (f64, impl Fn(f64) -> f64) {
    assert!(k > 0.0 && s > 0.0);
    let q = k * (t_left - t_right) / s;
    (q, move |x: f64| t_left + (t_right - t_left) * x / s)
}

/// Observed convergence orders between successive refinements.
pub fn observed_orders(h: &[f64], err: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(err.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Richardson estimate of the error of a first-order result `coarse`, given
/// the same quantity computed with half the step.
pub fn richardson_error(coarse: f64, half: f64) -> f64 {
    2.0 * (coarse - half)
}

#[test]
fn shape_functions_partition_unity() {
    for order in 1..=3 {
        let n = lagrange(order);
        let mut sum = vec![Q::zero(); order + 1];
        for p in &n {
            for (s, c) in sum.iter_mut().zip(p) {
                *s += c;
            }
        }
        assert!(sum[0].is_one() && sum[1..].iter().all(Zero::is_zero));
    }
}
