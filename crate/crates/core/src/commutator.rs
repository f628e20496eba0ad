//! The commutator map `(A, B) ↦ [A, B]` on SU(2): closed-form solutions,
//! randomized fiber samples, and continuation of solutions along moving
//! targets.
//!
//! For a non-central target `c = exp(θ n)` the fiber has an explicit shape:
//! `A` ranges over the great 2-sphere orthogonal to
//! `u = (−sin(θ/2), cos(θ/2)·n)`, and for each such `A` the admissible `B`
//! form one coset `h·Z(A)` of the centralizer, a great circle. Continuation
//! projects onto that sphere and then onto the nearest point of the circle,
//! so every tracked point is an exact solution up to rounding.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq;
use crate::path::{trace_adaptive, StepConfig};
use crate::su2::{
    align_conjugator, commutator, exp_unchecked, geodesic_unchecked, haar_random, random_axis, GroupElement, Vec3,
};

/// Targets closer than this angle to `1` are treated as the identity fiber.
pub const SNAP_ANGLE: f64 = 1e-6;

pub type Pair = (GroupElement, GroupElement);

/// Closed-form `(A, B)` with `[A, B] = c`.
///
/// Uses the trace-zero normal form `A = i`, `B = −cos(θ/2)·i + sin(θ/2)·j`,
/// whose commutator is `cos θ + sin θ·k`, then conjugates onto `c`.
pub fn solve_commutator(c: GroupElement) -> Pair {
    if c.axis().is_none() && c.w > 0.0 {
        return (GroupElement::IDENTITY, GroupElement::IDENTITY);
    }
    let half = 0.5 * c.angle();
    let (s, co) = half.sin_cos();
    let a = GroupElement::I;
    let b = GroupElement::new(0.0, -co, s, 0.0);
    let normal = commutator(a, b);
    let g = align_conjugator(normal, c, 1e-8).unwrap_or(GroupElement::IDENTITY);
    (a.conjugated_by(g), b.conjugated_by(g))
}

/// Trace of `[A, B]` from `tr A`, `tr B`, `tr AB`.
pub fn fricke_trace(ta: f64, tb: f64, tab: f64) -> Result<f64> {
    for v in [ta, tb, tab] {
        if !(-2.0 - 1e-9..=2.0 + 1e-9).contains(&v) {
            return Err(Error::OutOfRange { value: v, min: -2.0, max: 2.0 });
        }
    }
    Ok(ta * ta + tb * tb + tab * tab - ta * tb * tab - 2.0)
}

const SAMPLE_RESTARTS: usize = 20;
const SAMPLE_ITERATIONS: usize = 100;

/// A random point of `μ⁻¹(c)`: Haar-random start, then damped least squares
/// on `[A, B] − c`. The identity fiber is sampled directly as a random pair
/// in a random maximal torus.
pub fn sample_fiber<R: Rng + ?Sized>(c: GroupElement, rng: &mut R, tol: f64) -> Result<Pair> {
    if c.axis().is_none() && c.w > 0.0 {
        let axis = random_axis(rng);
        let ta = rng.random_range(0.0..std::f64::consts::TAU);
        let tb = rng.random_range(0.0..std::f64::consts::TAU);
        return Ok((exp_unchecked(axis, ta), exp_unchecked(axis, tb)));
    }
    let residual = |p: &[GroupElement]| vec![lsq::block(commutator(p[0], p[1]), c)];
    let mut best = f64::INFINITY;
    for _ in 0..SAMPLE_RESTARTS {
        let start = [haar_random(rng), haar_random(rng)];
        let out = lsq::solve(&start, &[true, true], &residual, tol, SAMPLE_ITERATIONS);
        if out.converged {
            return Ok((out.point[0], out.point[1]));
        }
        best = best.min(out.residual);
    }
    Err(Error::NotConverged { best, iterations: SAMPLE_RESTARTS * SAMPLE_ITERATIONS })
}

/// Axis used for the solution sphere; any axis serves for `c = −1`.
fn target_axis(c: GroupElement) -> Option<Vec3> {
    match c.axis() {
        Some(n) => Some(n),
        None if c.w < 0.0 => Some([1.0, 0.0, 0.0]),
        None => None,
    }
}

fn sphere_normal(c: GroupElement, n: Vec3) -> GroupElement {
    let (s, co) = (0.5 * c.angle()).sin_cos();
    GroupElement::raw(-s, co * n[0], co * n[1], co * n[2])
}

fn project_off(p: GroupElement, u: GroupElement) -> Option<GroupElement> {
    let d = p.dot(u);
    let q = GroupElement::raw(p.w - d * u.w, p.x - d * u.x, p.y - d * u.y, p.z - d * u.z);
    if q.norm() < 1e-8 {
        None
    } else {
        Some(GroupElement::new(q.w, q.x, q.y, q.z))
    }
}

/// Nearest point of the coset circle `{B : B A⁻¹ B⁻¹ = A⁻¹c}` to `b_prev`.
fn coset_point(a: GroupElement, b_prev: GroupElement, c: GroupElement) -> Option<GroupElement> {
    let axis = a.axis()?;
    let a_inv = a.inverse();
    let h = align_conjugator(a_inv, a_inv * c, 1e-8).ok()?;
    let ha = h * GroupElement::raw(0.0, axis[0], axis[1], axis[2]);
    let p = b_prev.dot(h);
    let q = b_prev.dot(ha);
    let r = p.hypot(q);
    if r < 1e-8 {
        return None;
    }
    Some(GroupElement::new(
        (p * h.w + q * ha.w) / r,
        (p * h.x + q * ha.x) / r,
        (p * h.y + q * ha.y) / r,
        (p * h.z + q * ha.z) / r,
    ))
}

/// Random point of `μ⁻¹(c)` from the explicit fiber geometry: a random `A`
/// on the solution sphere, then a random `B` on its coset circle.
pub(crate) fn random_fiber_point<R: Rng + ?Sized>(c: GroupElement, rng: &mut R) -> Pair {
    let Some(n) = target_axis(c) else {
        let axis = random_axis(rng);
        let ta = rng.random_range(0.0..std::f64::consts::TAU);
        let tb = rng.random_range(0.0..std::f64::consts::TAU);
        return (exp_unchecked(axis, ta), exp_unchecked(axis, tb));
    };
    let u = sphere_normal(c, n);
    loop {
        let Some(a) = project_off(haar_random(rng), u) else { continue };
        if let Some(b) = coset_point(a, haar_random(rng), c) {
            return (a, b);
        }
    }
}

/// Exact point of `μ⁻¹(c)` near `(a, b)` for non-central `c`.
pub(crate) fn fiber_retract(a: GroupElement, b: GroupElement, c: GroupElement) -> Option<Pair> {
    let n = target_axis(c)?;
    let u = sphere_normal(c, n);
    let a = project_off(a, u)?;
    let b = coset_point(a, b, c)?;
    Some((a, b))
}

/// Snaps a nearly commuting pair onto the commuting locus.
pub(crate) fn commuting_retract(a: GroupElement, b: GroupElement) -> Option<Pair> {
    match a.axis() {
        Some(axis) if a.central_distance() > 1e-9 => {
            let s = crate::su2::dot3(b.vector(), axis);
            let q = GroupElement::raw(b.w, axis[0] * s, axis[1] * s, axis[2] * s);
            if q.norm() < 1e-9 {
                return None;
            }
            Some((a, GroupElement::new(q.w, q.x, q.y, q.z)))
        }
        _ => Some((GroupElement::central(a.w), b)),
    }
}

/// Path `s ↦ (A(s), B(s))` inside one maximal torus from a commuting pair
/// (`s = 0`) to `(1, 1)` (`s = 1`). `hint` fixes the torus when given.
pub(crate) fn contraction(a: GroupElement, b: GroupElement, hint: Option<Vec3>) -> Option<impl Fn(f64) -> Pair> {
    let axis = hint
        .or_else(|| if a.central_distance() > 1e-9 { a.axis() } else { None })
        .or_else(|| b.axis())
        .unwrap_or([1.0, 0.0, 0.0]);
    let off_torus = |u: GroupElement| {
        let v = u.vector();
        let along = crate::su2::dot3(v, axis);
        crate::su2::norm3([v[0] - along * axis[0], v[1] - along * axis[1], v[2] - along * axis[2]])
    };
    if off_torus(a) > 1e-6 || off_torus(b) > 1e-6 {
        return None;
    }
    let alpha = a.signed_angle_about(axis);
    let beta = b.signed_angle_about(axis);
    Some(move |s: f64| (exp_unchecked(axis, (1.0 - s) * alpha), exp_unchecked(axis, (1.0 - s) * beta)))
}

/// One point of a fiber continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberNode {
    pub t: f64,
    pub a: GroupElement,
    pub b: GroupElement,
    /// Target commutator at this node.
    pub target: GroupElement,
}

/// Discrete path of pairs with bounded residual and step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberPath {
    pub nodes: Vec<FiberNode>,
    pub max_residual: f64,
    pub max_step: f64,
}

fn pair_step(x: &FiberNode, y: &FiberNode) -> f64 {
    x.a.geodesic_distance(y.a).max(x.b.geodesic_distance(y.b))
}

impl FiberPath {
    fn from_nodes(nodes: Vec<FiberNode>) -> FiberPath {
        let max_residual = nodes.iter().map(|n| commutator(n.a, n.b).distance(n.target)).fold(0.0, f64::max);
        let max_step = nodes.windows(2).map(|w| pair_step(&w[0], &w[1])).fold(0.0, f64::max);
        FiberPath { nodes, max_residual, max_step }
    }

    /// Number of steps between consecutive nodes.
    pub fn steps(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Re-checks the stated bounds from scratch.
    pub fn verify(&self, tol: f64, step_bound: f64) -> bool {
        self.max_residual <= tol
            && self.max_step <= step_bound
            && self.nodes.iter().all(|n| commutator(n.a, n.b).distance(n.target) <= self.max_residual)
            && self.nodes.windows(2).all(|w| pair_step(&w[0], &w[1]) <= self.max_step)
    }
}

/// Continues a solution of `[A, B] = c_path(t)` from `(a0, b0)` at `t = 0`
/// to `(a1, b1)` at `t = 1`, finishing with a leg inside the final fiber.
pub fn fiber_path(
    start: Pair,
    end: Pair,
    c_path: &dyn Fn(f64) -> GroupElement,
    steps: usize,
    tol: f64,
) -> Result<FiberPath> {
    for (t, (a, b)) in [(0.0, start), (1.0, end)] {
        let r = commutator(a, b).distance(c_path(t));
        if r >= tol {
            return Err(Error::ResidualTooLarge { residual: r, tol });
        }
    }
    let cfg = StepConfig { initial_steps: steps.max(1), ..StepConfig::default() };
    let targets = |t: f64| vec![c_path(t)];
    let embed = |t: f64, p: &[Pair]| FiberNode { t, a: p[0].0, b: p[0].1, target: c_path(t) };
    let tracker = PairTracker { targets: &targets, embed: &embed, dist: &pair_step, cfg, stage: "fiber" };
    let nodes = tracker.run(&[start], Some(&[end]))?;
    let path = FiberPath::from_nodes(nodes);
    if path.max_residual >= tol {
        return Err(Error::ResidualTooLarge { residual: path.max_residual, tol });
    }
    Ok(path)
}

type Node = (f64, Vec<Pair>);

/// Continues several pairs at once, pair `j` following `targets(t)[j]`, and
/// reports progress as embedded states `S`. All targets must become singular
/// (identity) together; singular endpoints are reached as limits and then
/// snapped onto the commuting locus.
pub(crate) struct PairTracker<'a, S> {
    pub targets: &'a dyn Fn(f64) -> Vec<GroupElement>,
    pub embed: &'a dyn Fn(f64, &[Pair]) -> S,
    pub dist: &'a dyn Fn(&S, &S) -> f64,
    pub cfg: StepConfig,
    pub stage: &'a str,
}

const SINGULAR_PROBES: usize = 256;

impl<S> PairTracker<'_, S> {
    fn fail(&self, t: f64) -> Error {
        Error::ContinuationFailed { stage: self.stage.to_string(), t }
    }

    fn node_dist(&self, x: &Node, y: &Node) -> f64 {
        (self.dist)(&(self.embed)(x.0, &x.1), &(self.embed)(y.0, &y.1))
    }

    fn singular(&self, t: f64) -> Result<bool> {
        let cs = (self.targets)(t);
        let flags: Vec<bool> = cs.iter().map(|c| c.w > 0.0 && c.angle() < SNAP_ANGLE).collect();
        if flags.iter().all(|&f| f) {
            Ok(true)
        } else if flags.iter().any(|&f| f) {
            Err(self.fail(t))
        } else {
            Ok(false)
        }
    }

    fn snap(&self, pairs: &[Pair], t: f64) -> Result<Vec<Pair>> {
        pairs.iter().map(|&(a, b)| commuting_retract(a, b).ok_or_else(|| self.fail(t))).collect()
    }

    fn trace(&self, start: Node, advance: impl FnMut(&Node, f64) -> Option<Node>) -> Result<Vec<Node>> {
        let t0 = start.0;
        trace_adaptive(start, advance, |x, y| self.node_dist(x, y), &self.cfg).map_err(|s| self.fail(t0 + s))
    }

    /// Tracks from `t0` to `t1`; snaps at `t1` when that end is singular.
    fn track(&self, t0: f64, t1: f64, start: Vec<Pair>) -> Result<Vec<Node>> {
        let end_singular = self.singular(t1)?;
        self.trace((t0, start), |prev, s| {
            let t = t0 + s * (t1 - t0);
            if s == 1.0 && end_singular {
                let pairs = prev.1.iter().map(|&(a, b)| commuting_retract(a, b)).collect::<Option<Vec<_>>>()?;
                return Some((t1, pairs));
            }
            let cs = (self.targets)(t);
            let pairs =
                prev.1.iter().zip(&cs).map(|(&(a, b), &c)| fiber_retract(a, b, c)).collect::<Option<Vec<_>>>()?;
            Some((t, pairs))
        })
    }

    /// Moves each pair in turn through commuting pairs, via `(1, 1)`.
    fn commuting_legs(&self, t: f64, from: &[Pair], to: &[Pair]) -> Result<Vec<Node>> {
        let mut out = Vec::new();
        let mut cur = from.to_vec();
        for j in 0..from.len() {
            let down = contraction(cur[j].0, cur[j].1, None).ok_or_else(|| self.fail(t))?;
            let up = contraction(to[j].0, to[j].1, None).ok_or_else(|| self.fail(t))?;
            let base = cur.clone();
            let leg = self.trace((t, base.clone()), |_, s| {
                let mut pairs = base.clone();
                pairs[j] = if s <= 0.5 { down(2.0 * s) } else { up(2.0 - 2.0 * s) };
                Some((t, pairs))
            })?;
            cur = leg.last().expect("nonempty").1.clone();
            cur[j] = to[j];
            out.extend(leg.into_iter().skip(1));
        }
        Ok(out)
    }

    /// Moves each pair in turn inside its (non-singular) fiber at parameter `t`.
    fn fiber_legs(&self, t: f64, from: &[Pair], to: &[Pair]) -> Result<Vec<Node>> {
        let cs = (self.targets)(t);
        let mut out = Vec::new();
        let mut cur = from.to_vec();
        for j in 0..from.len() {
            let c = cs[j];
            let n = target_axis(c).ok_or_else(|| self.fail(t))?;
            let u = sphere_normal(c, n);
            let a0 = project_off(cur[j].0, u).ok_or_else(|| self.fail(t))?;
            let a1 = project_off(to[j].0, u).ok_or_else(|| self.fail(t))?;
            let mut waypoints = vec![a0];
            if a0.dot(a1) < -1.0 + 1e-6 {
                waypoints.push(orthogonal_in_sphere(u, a0));
            }
            waypoints.push(a1);
            for w in waypoints.windows(2) {
                let (p, q) = (w[0], w[1]);
                let base = cur.clone();
                let leg = self.trace((t, base), |prev, s| {
                    let a = geodesic_unchecked(p, q, s);
                    let b = coset_point(a, prev.1[j].1, c)?;
                    let mut pairs = prev.1.clone();
                    pairs[j] = (a, b);
                    Some((t, pairs))
                })?;
                cur = leg.last().expect("nonempty").1.clone();
                out.extend(leg.into_iter().skip(1));
            }
            // Rotate inside the coset circle to the requested B.
            let axis = a1.axis().ok_or_else(|| self.fail(t))?;
            let b_start = cur[j].1;
            let z = b_start.inverse() * to[j].1;
            let phi = z.signed_angle_about(axis);
            let base = cur.clone();
            let leg = self.trace((t, base.clone()), |_, s| {
                let mut pairs = base.clone();
                pairs[j] = (a1, b_start * exp_unchecked(axis, s * phi));
                Some((t, pairs))
            })?;
            cur = leg.last().expect("nonempty").1.clone();
            cur[j] = to[j];
            out.extend(leg.into_iter().skip(1));
        }
        Ok(out)
    }

    fn hold(&self, pairs: Vec<Pair>) -> Result<Vec<Node>> {
        self.trace((0.0, pairs.clone()), |_, s| Some((s, pairs.clone())))
    }

    fn push_jump(&self, out: &mut Vec<Node>, node: Node) -> Result<()> {
        if let Some(last) = out.last() {
            if self.node_dist(last, &node) > self.cfg.max_step {
                return Err(self.fail(node.0));
            }
        }
        out.push(node);
        Ok(())
    }

    /// Runs the continuation from `start` at `t = 0`. With `end`, the path
    /// finishes exactly there; otherwise it stops wherever tracking lands.
    pub fn run(&self, start: &[Pair], end: Option<&[Pair]>) -> Result<Vec<S>> {
        let probes: Vec<bool> =
            (0..=SINGULAR_PROBES).map(|i| self.singular(i as f64 / SINGULAR_PROBES as f64)).collect::<Result<_>>()?;
        let (s0, s1) = (probes[0], probes[SINGULAR_PROBES]);
        let interior = &probes[1..SINGULAR_PROBES];
        let mut nodes: Vec<Node> = vec![(0.0, start.to_vec())];

        if s0 && s1 && interior.iter().all(|&f| f) {
            let snapped = self.snap(start, 0.0)?;
            self.push_jump(&mut nodes, (0.0, snapped.clone()))?;
            nodes.extend(self.hold(snapped)?.into_iter().skip(1));
            if let Some(end) = end {
                let last = nodes.last().expect("nonempty").1.clone();
                nodes.extend(self.commuting_legs(1.0, &last, end)?);
            }
        } else if let Some(i) = interior.iter().position(|&f| f) {
            return Err(self.fail((i + 1) as f64 / SINGULAR_PROBES as f64));
        } else if !s0 {
            nodes = self.track(0.0, 1.0, start.to_vec())?;
            if let Some(end) = end {
                let last = nodes.last().expect("nonempty").1.clone();
                if s1 {
                    nodes.extend(self.commuting_legs(1.0, &last, end)?);
                } else {
                    nodes.extend(self.fiber_legs(1.0, &last, end)?);
                }
            }
        } else {
            // Singular start: build the departing branch backwards from a
            // regular fiber, then join it through commuting pairs.
            let snapped = self.snap(start, 0.0)?;
            self.push_jump(&mut nodes, (0.0, snapped.clone()))?;
            let (anchor_t, anchor) = if s1 {
                let cs = (self.targets)(0.5);
                (0.5, cs.iter().map(|&c| solve_commutator(c)).collect::<Vec<_>>())
            } else {
                let cs = (self.targets)(1.0);
                let pairs = match end {
                    Some(e) => e.to_vec(),
                    None => cs.iter().map(|&c| solve_commutator(c)).collect(),
                };
                (1.0, pairs)
            };
            let back = self.track(anchor_t, 0.0, anchor.clone())?;
            let joined = back.last().expect("nonempty").1.clone();
            nodes.extend(self.commuting_legs(0.0, &snapped, &joined)?);
            nodes.extend(back.into_iter().rev().skip(1));
            if s1 {
                let fwd = self.track(anchor_t, 1.0, anchor)?;
                nodes.extend(fwd.into_iter().skip(1));
                if let Some(end) = end {
                    let last = nodes.last().expect("nonempty").1.clone();
                    nodes.extend(self.commuting_legs(1.0, &last, end)?);
                }
            }
        }
        Ok(nodes.iter().map(|(t, p)| (self.embed)(*t, p)).collect())
    }
}

/// A unit vector orthogonal to both `u` and `a` (both unit, orthogonal).
fn orthogonal_in_sphere(u: GroupElement, a: GroupElement) -> GroupElement {
    let basis = [GroupElement::IDENTITY, GroupElement::I, GroupElement::J, GroupElement::K];
    basis
        .iter()
        .map(|&e| {
            let du = e.dot(u);
            let da = e.dot(a);
            GroupElement::raw(
                e.w - du * u.w - da * a.w,
                e.x - du * u.x - da * a.x,
                e.y - du * u.y - da * a.y,
                e.z - du * u.z - da * a.z,
            )
        })
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .map(|q| GroupElement::new(q.w, q.x, q.y, q.z))
        .expect("four candidates")
}
