//! Error metrics against reference probe data, the powder-conductivity
//! rule of thumb for bed HTCs, and bound-constrained compass search.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{set_path, CalibrationSpec, SimulationConfig};
use crate::error::{Error, Result};
use crate::materials::PropertyTable;
use crate::probes::ProbeSeries;
use crate::simulation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// Mean absolute error (degC).
    pub mae: f64,
    /// Mean relative error in percent, over samples with a non-zero reference.
    pub mre: f64,
    /// Sum of squared errors (degC^2), the calibration objective.
    pub sse: f64,
    pub samples: usize,
}

fn lerp_at(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let (first, last) = (*times.first()?, *times.last()?);
    if t < first || t > last {
        return None;
    }
    let i = times.partition_point(|&x| x < t);
    if i < times.len() && times[i] == t {
        return Some(values[i]);
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let w = (t - t0) / (t1 - t0);
    Some(values[i - 1] * (1.0 - w) + values[i] * w)
}

/// Compare `sim` against `reference` on the named channels. The reference is
/// interpolated linearly to the simulation sample times; samples outside the
/// reference range or the optional time window, and NaN samples, are skipped.
pub fn error_metrics(
    sim: &ProbeSeries,
    reference: &ProbeSeries,
    channels: &[String],
    window: Option<[f64; 2]>,
) -> Result<ErrorMetrics> {
    if reference.times().windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Metrics(
            "reference times must increase strictly".into(),
        ));
    }
    let (mut abs_sum, mut rel_sum, mut sse) = (0.0, 0.0, 0.0);
    let (mut n, mut n_rel, mut zeros) = (0usize, 0usize, 0usize);
    for ch in channels {
        let s = sim
            .channel(ch)
            .ok_or_else(|| Error::Metrics(format!("simulation has no probe '{ch}'")))?;
        let r = reference
            .channel(ch)
            .ok_or_else(|| Error::Metrics(format!("reference has no probe '{ch}'")))?;
        for (&t, &v) in sim.times().iter().zip(&s) {
            if let Some([a, b]) = window {
                if t < a || t > b {
                    continue;
                }
            }
            let Some(rv) = lerp_at(reference.times(), &r, t) else {
                continue;
            };
            if v.is_nan() || rv.is_nan() {
                continue;
            }
            abs_sum += (v - rv).abs();
            sse += (v - rv) * (v - rv);
            n += 1;
            if rv != 0.0 {
                rel_sum += ((v - rv) / rv).abs();
                n_rel += 1;
            } else {
                zeros += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::Metrics("no overlapping samples to compare".into()));
    }
    if zeros > 0 {
        log::warn!("{zeros} samples with a 0 degC reference left out of the relative error");
    }
    Ok(ErrorMetrics {
        mae: abs_sum / n as f64,
        mre: if n_rel > 0 {
            100.0 * rel_sum / n_rel as f64
        } else {
            f64::NAN
        },
        sse,
        samples: n,
    })
}

/// HTC estimate `mean over [t_lo, t_hi] of k_powder(T) / thickness`, with
/// the mean taken exactly over the piecewise-linear table.
pub fn rule_of_thumb_htc(
    powder_conductivity: &PropertyTable,
    thickness: f64,
    range: [f64; 2],
) -> Result<f64> {
    let [a, b] = range;
    if !(thickness > 0.0) || !(b > a) {
        return Err(Error::InvalidInput(
            "rule of thumb needs thickness > 0 and an increasing range".into(),
        ));
    }
    let mut pts: Vec<f64> = vec![a, b];
    pts.extend(
        powder_conductivity
            .breakpoints()
            .map(|p| p.0)
            .filter(|&t| t > a && t < b),
    );
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let integral: f64 = pts
        .windows(2)
        .map(|w| {
            0.5 * (powder_conductivity.at(w[0]) + powder_conductivity.at(w[1])) * (w[1] - w[0])
        })
        .sum();
    Ok(integral / (b - a) / thickness)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Initial step in the unit-scaled parameter box.
    pub initial_step: f64,
    pub shrink: f64,
    /// Stop once the scaled step falls below this.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            shrink: 0.5,
            tolerance: 1e-3,
            max_evaluations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Evaluation,
    /// Every distinct objective evaluation, in order.
    pub history: Vec<Evaluation>,
    /// True when the step tolerance was reached within the budget.
    pub converged: bool,
    pub final_step: f64,
}

/// Compass search on the box `bounds`, polling `+step` before `-step` along
/// each coordinate in order and moving to the first improving point.
/// Repeated points are served from a cache and do not count as evaluations.
/// A failure at the start point aborts; failures at poll points count as
/// non-improving.
pub fn pattern_search(
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    bounds: &[[f64; 2]],
    x0: &[f64],
    opts: SearchOptions,
) -> Result<SearchResult> {
    let n = bounds.len();
    if n == 0 || x0.len() != n {
        return Err(Error::Calibration(
            "start point and bounds must have the same non-zero length".into(),
        ));
    }
    for (b, &x) in bounds.iter().zip(x0) {
        if !(b[0].is_finite() && b[1].is_finite() && b[0] < b[1]) || !(b[0]..=b[1]).contains(&x) {
            return Err(Error::Calibration(format!(
                "start {x} is not inside bounds {b:?}"
            )));
        }
    }
    if !(opts.initial_step > 0.0 && opts.shrink > 0.0 && opts.shrink < 1.0 && opts.tolerance > 0.0)
        || opts.max_evaluations == 0
    {
        return Err(Error::Calibration("invalid search options".into()));
    }
    let to_x = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(bounds)
            .map(|(u, b)| b[0] + u * (b[1] - b[0]))
            .collect()
    };
    let key = |u: &[f64]| -> Vec<i64> { u.iter().map(|v| (v * 1e10).round() as i64).collect() };

    let mut cache: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut history = Vec::new();
    let mut eval = |u: &[f64], history: &mut Vec<Evaluation>| -> Result<Option<f64>> {
        let k = key(u);
        if let Some(&v) = cache.get(&k) {
            return Ok(Some(v));
        }
        if history.len() >= opts.max_evaluations {
            return Ok(None);
        }
        let x = to_x(u);
        let v = match objective(&x) {
            Ok(v) if !v.is_nan() => v,
            Ok(_) => f64::INFINITY,
            Err(e) if !history.is_empty() => {
                log::warn!("objective failed at {x:?}: {e}");
                f64::INFINITY
            }
            Err(e) => return Err(e),
        };
        log::info!(
            "evaluation {}: x = {x:?}, objective = {v}",
            history.len() + 1
        );
        cache.insert(k, v);
        history.push(Evaluation { x, value: v });
        Ok(Some(v))
    };

    let mut u: Vec<f64> = x0
        .iter()
        .zip(bounds)
        .map(|(x, b)| (x - b[0]) / (b[1] - b[0]))
        .collect();
    let mut fu = eval(&u, &mut history)?.expect("budget allows one evaluation");
    let mut step = opts.initial_step;
    let mut converged = false;
    'outer: loop {
        if step < opts.tolerance {
            converged = true;
            break;
        }
        let mut improved = false;
        'poll: for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut c = u.clone();
                c[i] = (c[i] + sign * step).clamp(0.0, 1.0);
                if key(&c) == key(&u) {
                    continue;
                }
                let Some(fc) = eval(&c, &mut history)? else {
                    break 'outer;
                };
                if fc < fu {
                    u = c;
                    fu = fc;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= opts.shrink;
        }
    }
    Ok(SearchResult {
        best: Evaluation {
            x: to_x(&u),
            value: fu,
        },
        history,
        converged,
        final_step: step,
    })
}

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub search: SearchResult,
    pub parameters: Vec<String>,
    pub calibration_error: ErrorMetrics,
    pub validation_error: Option<ErrorMetrics>,
    pub trace_path: PathBuf,
    pub overlay_path: PathBuf,
}

fn with_values(base: &toml::Table, paths: &[Vec<String>], x: &[f64]) -> Result<SimulationConfig> {
    let mut doc = base.clone();
    for (group, v) in paths.iter().zip(x) {
        for p in group {
            set_path(&mut doc, p, toml::Value::Float(*v))?;
        }
    }
    SimulationConfig::from_document(doc)
}

/// Fit the calibration parameters of `config` to its reference data and
/// write the search trace and an overlay with the best values into `out_dir`.
pub fn calibrate(
    config: &SimulationConfig,
    config_dir: &Path,
    out_dir: &Path,
) -> Result<CalibrationOutcome> {
    let spec: &CalibrationSpec = config
        .calibration
        .as_ref()
        .ok_or_else(|| Error::Calibration("the config has no calibration block".into()))?;
    let reference = ProbeSeries::read_csv(&SimulationConfig::resolve(config_dir, &spec.reference))?;
    let mut base = toml::Table::try_from(config).map_err(|e| Error::Config(e.to_string()))?;
    base.remove("calibration");
    let paths: Vec<String> = spec.parameters.iter().map(|p| p.path.clone()).collect();
    let groups: Vec<Vec<String>> = spec
        .parameters
        .iter()
        .map(|p| {
            std::iter::once(p.path.clone())
                .chain(p.linked.iter().cloned())
                .collect()
        })
        .collect();
    let bounds: Vec<[f64; 2]> = spec.parameters.iter().map(|p| [p.lower, p.upper]).collect();
    let x0: Vec<f64> = spec.parameters.iter().map(|p| p.initial).collect();
    let opts = SearchOptions {
        initial_step: spec.initial_step,
        shrink: spec.shrink,
        tolerance: spec.tolerance,
        max_evaluations: spec.max_evaluations,
    };
    let objective = |x: &[f64]| -> Result<f64> {
        let cfg = with_values(&base, &groups, x)?;
        let run = simulation::run(&cfg)?;
        Ok(error_metrics(&run.probes, &reference, &spec.probes, spec.window)?.sse)
    };
    let search = pattern_search(objective, &bounds, &x0, opts)?;

    let best_cfg = with_values(&base, &groups, &search.best.x)?;
    let best_run = simulation::run(&best_cfg)?;
    let calibration_error = error_metrics(&best_run.probes, &reference, &spec.probes, spec.window)?;
    let validation_error = if spec.validation.is_empty() {
        None
    } else {
        Some(error_metrics(
            &best_run.probes,
            &reference,
            &spec.validation,
            spec.window,
        )?)
    };

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let trace_path = out_dir.join(&spec.trace);
    let mut trace = String::from("evaluation");
    for p in &paths {
        write!(trace, ",{p}").unwrap();
    }
    trace.push_str(",objective\n");
    for (i, e) in search.history.iter().enumerate() {
        write!(trace, "{}", i + 1).unwrap();
        for v in &e.x {
            write!(trace, ",{v:?}").unwrap();
        }
        writeln!(trace, ",{:?}", e.value).unwrap();
    }
    std::fs::write(&trace_path, trace).map_err(|e| Error::io(&trace_path, e))?;

    let overlay_path = out_dir.join(&spec.overlay);
    let mut overlay = toml::Table::new();
    for (group, v) in groups.iter().zip(&search.best.x) {
        for p in group {
            set_path(&mut overlay, p, toml::Value::Float(*v))?;
        }
    }
    let text = toml::to_string(&overlay).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&overlay_path, text).map_err(|e| Error::io(&overlay_path, e))?;

    Ok(CalibrationOutcome {
        search,
        parameters: paths,
        calibration_error,
        validation_error,
        trace_path,
        overlay_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(times: &[f64], vals: &[f64]) -> ProbeSeries {
        let mut s = ProbeSeries::new(vec!["p".into()]);
        for (t, v) in times.iter().zip(vals) {
            s.push(*t, vec![*v]);
        }
        s
    }

    #[test]
    fn metrics_interpolate_reference() {
        let reference = series(&[0.0, 10.0], &[100.0, 200.0]);
        let sim = series(&[0.0, 5.0, 20.0], &[110.0, 160.0, f64::NAN]);
        let m = error_metrics(&sim, &reference, &["p".into()], None).unwrap();
        assert_eq!(m.samples, 2);
        assert!((m.mae - 10.0).abs() < 1e-12);
        assert!((m.mre - 50.0 * (0.1 + 10.0 / 150.0)).abs() < 1e-12);
        assert!((m.sse - 200.0).abs() < 1e-9);
        let w = error_metrics(&sim, &reference, &["p".into()], Some([1.0, 9.0])).unwrap();
        assert_eq!(w.samples, 1);
        assert!(error_metrics(&sim, &reference, &["q".into()], None).is_err());
    }

    #[test]
    fn constant_offset() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let r: Vec<f64> = t.iter().map(|x| 250.0 + (x * 0.3).sin()).collect();
        let reference = series(&t, &r);
        let sim = series(&t, &r.iter().map(|v| v + 5.0).collect::<Vec<_>>());
        let same = error_metrics(&reference, &reference, &["p".into()], None).unwrap();
        assert_eq!((same.mae, same.mre), (0.0, 0.0));
        let m = error_metrics(&sim, &reference, &["p".into()], None).unwrap();
        assert!((m.mae - 5.0).abs() < 1e-12);
        assert!((m.mre - 2.0).abs() < 0.02);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let r = pattern_search(
            |x| Ok((x[0] - 3.0).powi(2)),
            &[[0.0, 10.0]],
            &[0.0],
            SearchOptions::default(),
        )
        .unwrap();
        assert!((r.best.x[0] - 3.0).abs() <= 1e-3 * 10.0);
    }

    #[test]
    fn poll_failures_do_not_abort() {
        let r = pattern_search(
            |x| {
                if x[0] > 0.6 {
                    Err(Error::Calibration("boom".into()))
                } else {
                    Ok((x[0] - 0.5).powi(2))
                }
            },
            &[[0.0, 1.0]],
            &[0.1],
            SearchOptions::default(),
        )
        .unwrap();
        assert!((r.best.x[0] - 0.5).abs() < 2e-3);
        assert!(pattern_search(
            |_| Err(Error::Calibration("x".into())),
            &[[0.0, 1.0]],
            &[0.5],
            SearchOptions::default()
        )
        .is_err());
    }

    #[test]
    fn rule_of_thumb_constant_table() {
        let k = PropertyTable::new(&[(0.0, 0.3), (1000.0, 0.3)]).unwrap();
        let h = rule_of_thumb_htc(&k, 0.01, [200.0, 400.0]).unwrap();
        assert!((h - 30.0).abs() < 1e-12);
    }

    #[test]
    fn compass_search_finds_quadratic_minimum() {
        let r = pattern_search(
            |x| Ok((x[0] - 0.3).powi(2) + 2.0 * (x[1] + 1.2).powi(2)),
            &[[-1.0, 1.0], [-2.0, 2.0]],
            &[0.9, 1.5],
            SearchOptions::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.best.x[0] - 0.3).abs() < 5e-3);
        assert!((r.best.x[1] + 1.2).abs() < 1e-2);
        assert!(r.history.len() <= 200);
    }

    #[test]
    fn budget_is_respected() {
        let opts = SearchOptions {
            max_evaluations: 5,
            ..Default::default()
        };
        let r = pattern_search(|x| Ok(-x[0]), &[[0.0, 1.0]], &[0.0], opts).unwrap();
        assert!(r.history.len() <= 5);
    }
}
