use std::cell::RefCell;

use proptest::prelude::*;

use pbf_vda::calibrate::{error_metrics, pattern_search, SearchOptions};
use pbf_vda::materials::{powder_conductivity, powder_density, PropertyTable};
use pbf_vda::probes::ProbeSeries;

fn table() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1.0f64..200.0, 0.1f64..100.0), 1..8).prop_map(|v| {
        let mut t = 0.0;
        v.into_iter()
            .map(|(dt, val)| {
                t += dt;
                (t, val)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn table_interpolation_stays_in_range(pts in table(), t in -100.0f64..2000.0) {
        let tab = PropertyTable::new(&pts).unwrap();
        let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let v = tab.at(t);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        if t <= pts[0].0 {
            prop_assert_eq!(v, pts[0].1);
        }
        if t >= pts[pts.len() - 1].0 {
            prop_assert_eq!(v, pts[pts.len() - 1].1);
        }
    }

    #[test]
    fn table_hits_breakpoints_and_midpoints(pts in table()) {
        let tab = PropertyTable::new(&pts).unwrap();
        for p in &pts {
            prop_assert!((tab.at(p.0) - p.1).abs() <= 1e-12 * p.1.abs());
        }
        for w in pts.windows(2) {
            let mid = tab.at(0.5 * (w[0].0 + w[1].0));
            prop_assert!((mid - 0.5 * (w[0].1 + w[1].1)).abs() <= 1e-9 * mid.abs().max(1.0));
        }
    }

    #[test]
    fn powder_sits_between_gas_and_solid(
        k_gas in 0.005f64..0.1,
        contrast in 50.0f64..5000.0,
        porosity in 0.3f64..0.7,
        d in 10e-6f64..100e-6,
        t in 20.0f64..1600.0,
    ) {
        let k_solid = k_gas * contrast;
        let k = powder_conductivity(k_solid, k_gas, porosity, d, t).unwrap();
        prop_assert!(k > k_gas && k < k_solid, "{} not in ({}, {})", k, k_gas, k_solid);
    }

    #[test]
    fn powder_is_lighter_than_bulk(rho in 1000.0f64..20000.0, porosity in 0.0f64..0.99) {
        let r = powder_density(rho, porosity).unwrap();
        prop_assert!(r > 0.0 && r <= rho);
    }

    /// Compass search on a random convex quadratic: never leaves the box and
    /// never returns a point worse than the start.
    #[test]
    fn pattern_search_respects_bounds(
        c in prop::collection::vec(-2.0f64..12.0, 2),
        w in prop::collection::vec(0.1f64..10.0, 2),
        x0 in prop::collection::vec(0.0f64..10.0, 2),
    ) {
        let bounds = [[0.0, 10.0], [0.0, 10.0]];
        let seen = RefCell::new(Vec::new());
        let f = |x: &[f64]| {
            seen.borrow_mut().push(x.to_vec());
            Ok(w[0] * (x[0] - c[0]).powi(2) + w[1] * (x[1] - c[1]).powi(2))
        };
        let start = w[0] * (x0[0] - c[0]).powi(2) + w[1] * (x0[1] - c[1]).powi(2);
        let r = pattern_search(f, &bounds, &x0, SearchOptions::default()).unwrap();
        prop_assert!(r.best.value <= start);
        prop_assert!(r.history.len() <= 200);
        for x in seen.borrow().iter() {
            for (v, b) in x.iter().zip(&bounds) {
                prop_assert!(*v >= b[0] && *v <= b[1], "{:?}", x);
            }
        }
    }

    /// Halving the output interval moves MAE by no more than the Lipschitz
    /// bound of the error signal times the interval.
    #[test]
    fn metrics_are_stable_under_output_refinement(a in 0.5f64..5.0, omega in 0.001f64..0.01, dt in 5.0f64..50.0) {
        let err = |t: f64| a * (omega * t).sin();
        let lipschitz = a * omega;
        let reference = series(0.0, 2000.0, 1.0, |t| 200.0 + 50.0 * (t / 500.0).cos());
        let make = |step: f64| series(0.0, 2000.0, step, |t| 200.0 + 50.0 * (t / 500.0).cos() + err(t));
        let ch = vec!["p".to_string()];
        let coarse = error_metrics(&make(dt), &reference, &ch, None).unwrap();
        let fine = error_metrics(&make(dt / 2.0), &reference, &ch, None).unwrap();
        prop_assert!((coarse.mae - fine.mae).abs() <= lipschitz * dt + 1e-9);
    }
}

fn series(t0: f64, t1: f64, dt: f64, f: impl Fn(f64) -> f64) -> ProbeSeries {
    let mut s = ProbeSeries::new(vec!["p".to_string()]);
    let n = ((t1 - t0) / dt).floor() as usize;
    for i in 0..=n {
        let t = t0 + i as f64 * dt;
        s.push(t, vec![f(t)]);
    }
    s
}

#[test]
fn identical_series_have_zero_error() {
    let s = series(0.0, 100.0, 1.0, |t| 20.0 + t);
    let m = error_metrics(&s, &s, &["p".to_string()], None).unwrap();
    assert_eq!((m.mae, m.mre), (0.0, 0.0));
}

/// Ti64 powder at room temperature: bulk 6.7 W/(m K), argon, 54 % relative
/// density. The tabulated value is 0.288.
#[test]
fn ti64_powder_spot_value() {
    let k = powder_conductivity(6.7, 0.0177, 0.46, 45e-6, 20.0).unwrap();
    assert!((k - 0.288).abs() <= 0.15 * 0.288, "{k}");
}
