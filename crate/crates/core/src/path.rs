//! Adaptive stepping along a parameter interval.

use serde::{Deserialize, Serialize};

/// Step-size policy for discrete paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    /// Largest allowed distance between consecutive points.
    pub max_step: f64,
    /// Uniform steps tried first.
    pub initial_steps: usize,
    /// Smallest parameter increment before giving up.
    pub min_dt: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { max_step: 0.2, initial_steps: 8, min_dt: 1e-9 }
    }
}

/// Walks `s` from 0 to 1, calling `advance(prev, s)` for candidate states and
/// halving the increment whenever a candidate is missing or farther than
/// `max_step` from its predecessor. Returns every accepted state (including
/// `start`) or the parameter value where the step size collapsed.
pub(crate) fn trace_adaptive<S: Clone>(
    start: S,
    mut advance: impl FnMut(&S, f64) -> Option<S>,
    dist: impl Fn(&S, &S) -> f64,
    cfg: &StepConfig,
) -> Result<Vec<S>, f64> {
    let mut out = vec![start];
    let mut s = 0.0;
    let base = 1.0 / cfg.initial_steps.max(1) as f64;
    let mut ds = base;
    while s < 1.0 {
        let next = if s + ds >= 1.0 - 1e-15 { 1.0 } else { s + ds };
        let prev = out.last().expect("nonempty");
        match advance(prev, next) {
            Some(cand) if dist(prev, &cand) <= cfg.max_step => {
                out.push(cand);
                s = next;
                ds = (ds * 1.5).min(base);
            }
            _ => {
                ds *= 0.5;
                if ds < cfg.min_dt {
                    return Err(s);
                }
            }
        }
    }
    Ok(out)
}
