//! Continuous extension across singular points by probing along rays and
//! extrapolating to zero distance.

use crate::richardson::richardson_limit;

/// A ray from the base point with decreasing steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub direction: Vec<f64>,
    pub steps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extended {
    pub f: Vec<f64>,
    pub b: Vec<f64>,
    pub error: f64,
    pub probe: usize,
}

/// Longest run of consecutive indices that all succeeded.
fn longest_run<T>(vals: &[Option<T>]) -> (usize, usize) {
    let (mut best, mut start) = ((0, 0), 0);
    for i in 0..=vals.len() {
        if i == vals.len() || vals[i].is_none() {
            if i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i + 1;
        }
    }
    best
}

/// Evaluates `eval(probe, step)` along every probe, extrapolates each probe's
/// longest run of successes and keeps the estimate with the smallest error
/// indicator. `eval` returns (f, b) or `None` where recovery failed.
pub fn extend_with<F>(probes: &[Probe], order: u32, max_error: f64, eval: F) -> Option<Extended>
where
    F: Fn(usize, f64) -> Option<(Vec<f64>, Vec<f64>)>,
{
    let mut best: Option<Extended> = None;
    for (pi, probe) in probes.iter().enumerate() {
        let vals: Vec<Option<(Vec<f64>, Vec<f64>)>> = probe.steps.iter().map(|&t| eval(pi, t)).collect();
        let (s, e) = longest_run(&vals);
        if e - s < 3 {
            continue;
        }
        let fs: Vec<(f64, Vec<f64>)> = (s..e).map(|i| (probe.steps[i], vals[i].as_ref().unwrap().0.clone())).collect();
        let Ok(ext) = richardson_limit(&fs, order) else { continue };
        let size = ext.value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(ext.error.is_finite() && ext.error <= max_error * (1.0 + size)) {
            continue;
        }
        if best.as_ref().is_some_and(|b| b.error <= ext.error) {
            continue;
        }
        let bs: Vec<(f64, Vec<f64>)> = (s..e).map(|i| (probe.steps[i], vals[i].as_ref().unwrap().1.clone())).collect();
        let b = richardson_limit(&bs, order).map(|r| r.value).unwrap_or_else(|_| vec![f64::NAN; bs[0].1.len()]);
        best = Some(Extended { f: ext.value, b, error: ext.error, probe: pi });
    }
    best
}
