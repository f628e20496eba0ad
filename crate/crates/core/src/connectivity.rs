//! Path certificates between representations, staged paths to the canonical
//! representative of each component, and a sampling census of components.
//!
//! Staged route for a fixed point `ρ` with label `L`:
//!
//! 1. `B₁ → 1` along a one-parameter subgroup while `(A₂, B₂)` follows the
//!    moving fiber over `[A₁,B₁(t)]⁻¹[A₃,B₃]⁻¹`.
//! 2. A global conjugation puts `A₁` (or `X` when `A₁` is central) on the
//!    `i`-axis circle.
//! 3. `X` is rotated onto its canonical value at constant trace while
//!    `(A₃, B₃)` and `(A₂, B₂)` follow the fibers over `XA₁⁻¹` and its
//!    inverse, then both pairs move inside their fibers to the canonical
//!    pairs.
//!
//! Central points instead bring `X` onto `A₁`, then contract the commuting
//! pairs and finally `A₁` to the identity.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commutator::{contraction, Pair, PairTracker, SNAP_ANGLE};
use crate::components::{
    canonical_representative, canonical_torus_representative, classify_fix, classify_torus, count_fix, count_torus,
    enumerate_fix_labels, enumerate_torus_labels, random_central_rep, random_central_torus_rep,
    randomized_representative, randomized_torus_representative, CentralKind, ComponentLabel, TorusCentralKind,
    TorusLabel, CENTRAL_SNAP,
};
use crate::error::{Error, Result};
use crate::path::{trace_adaptive, StepConfig};
use crate::su2::{align_conjugator, commutator, exp_unchecked, geodesic_unchecked, nan_max, GroupElement};
use crate::varieties::{derived_x, project_to_variety, system_residual, RepDocument, SurfaceRep, System, TorusRep};

/// Budgets and bounds for path construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    /// Residual every certified point must stay below.
    pub tol: f64,
    /// Largest geodesic move of any coordinate between consecutive points.
    pub max_step: f64,
    /// Bisection depth for [`probe_path`].
    pub depth: usize,
    /// Projection iterations per point.
    pub iters: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { tol: 1e-7, max_step: 0.2, depth: 12, iters: 100 }
    }
}

/// Largest geodesic distance between corresponding coordinates.
pub fn point_distance(p: &TorusRep, q: &TorusRep) -> f64 {
    p.coords().iter().zip(q.coords()).map(|(u, v)| u.geodesic_distance(v)).fold(0.0, nan_max)
}

/// Label text of a point for `system`; the surface variety is connected, so
/// every surface point is `central`.
pub fn label_of(system: System, point: &TorusRep, n: i64, tol: f64) -> Result<String> {
    match system {
        System::Surface => {
            let r = system_residual(System::Surface, point, n).max;
            if r >= tol {
                return Err(Error::ResidualTooLarge { residual: r, tol });
            }
            Ok(ComponentLabel::Central.to_string())
        }
        System::Fix => Ok(classify_fix(&point.rep, n, tol)?.to_string()),
        System::Torus => Ok(classify_torus(point, n, tol)?.to_string()),
    }
}

/// A discrete path of representations with residual and step bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCertificate {
    pub system: System,
    pub n: i64,
    /// Residual acceptance bound.
    pub tolerance: f64,
    /// Step acceptance bound.
    pub step_bound: f64,
    /// Largest residual over the points.
    pub max_residual: f64,
    /// Largest step between consecutive points.
    pub max_step: f64,
    /// Labels of the first and last point.
    pub labels: [String; 2],
    pub points: Vec<TorusRep>,
}

pub const CERT_FORMAT: &str = "repvar-cert-1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertFile {
    format: String,
    system: System,
    n: i64,
    tolerance: f64,
    step_bound: f64,
    max_residual: f64,
    max_step: f64,
    labels: [String; 2],
    points: Vec<serde_json::Value>,
}

impl PathCertificate {
    fn from_points(system: System, n: i64, cfg: &PathConfig, points: Vec<TorusRep>) -> Result<PathCertificate> {
        let max_residual = points.iter().map(|p| system_residual(system, p, n).max).fold(0.0, nan_max);
        if max_residual >= cfg.tol {
            return Err(Error::ResidualTooLarge { residual: max_residual, tol: cfg.tol });
        }
        let max_step = points.windows(2).map(|w| point_distance(&w[0], &w[1])).fold(0.0, nan_max);
        let first = label_of(system, &points[0], n, cfg.tol)?;
        let last = label_of(system, points.last().expect("nonempty"), n, cfg.tol)?;
        Ok(PathCertificate {
            system,
            n,
            tolerance: cfg.tol,
            step_bound: cfg.max_step,
            max_residual,
            max_step,
            labels: [first, last],
            points,
        })
    }

    pub fn to_json(&self) -> String {
        let file = CertFile {
            format: CERT_FORMAT.to_string(),
            system: self.system,
            n: self.n,
            tolerance: self.tolerance,
            step_bound: self.step_bound,
            max_residual: self.max_residual,
            max_step: self.max_step,
            labels: self.labels.clone(),
            points: self
                .points
                .iter()
                .map(|p| match self.system {
                    System::Torus => RepDocument::torus(self.n, *p),
                    _ => RepDocument::surface(self.n, p.rep),
                })
                .map(|d| d.to_value())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<PathCertificate> {
        let f: CertFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.format != CERT_FORMAT {
            return Err(Error::Parse(format!("format: expected {CERT_FORMAT:?}, found {:?}", f.format)));
        }
        let points = f
            .points
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                RepDocument::from_value(v).map(|d| d.torus_rep()).map_err(|e| Error::Parse(format!("points[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PathCertificate {
            system: f.system,
            n: f.n,
            tolerance: f.tolerance,
            step_bound: f.step_bound,
            max_residual: f.max_residual,
            max_step: f.max_step,
            labels: f.labels,
            points,
        })
    }
}

/// One failed check in [`verify_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    /// Offending point (or first point of the offending step).
    pub index: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub valid: bool,
    pub issues: Vec<Issue>,
    pub max_residual: f64,
    pub max_step: f64,
}

/// `x > bound`, with NaN on either side counting as exceeding.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn exceeds(x: f64, bound: f64) -> bool {
    !(x <= bound)
}

/// Re-evaluates every certificate invariant from the points alone.
pub fn verify_certificate(cert: &PathCertificate) -> VerifyReport {
    let mut issues = Vec::new();
    let mut issue = |index: Option<usize>, message: String| issues.push(Issue { index, message });
    let mut max_residual: f64 = 0.0;
    let mut max_step: f64 = 0.0;
    if cert.points.is_empty() {
        issue(None, "certificate has no points".into());
    }
    if !exceeds(cert.tolerance, 0.0) || exceeds(cert.max_residual, cert.tolerance) {
        issue(None, format!("stated residual {:e} exceeds tolerance {:e}", cert.max_residual, cert.tolerance));
    }
    if exceeds(cert.max_step, cert.step_bound) {
        issue(None, format!("stated step {} exceeds step bound {}", cert.max_step, cert.step_bound));
    }
    for (i, p) in cert.points.iter().enumerate() {
        if let Some(u) = p.coords().iter().find(|u| !u.norm().is_finite() || (u.norm() - 1.0).abs() > 1e-9) {
            issue(Some(i), format!("coordinate {u} is not a unit quaternion"));
        }
        let r = system_residual(cert.system, p, cert.n).max;
        max_residual = nan_max(max_residual, r);
        if exceeds(r, cert.max_residual) {
            issue(Some(i), format!("residual {r:e} exceeds stated {:e}", cert.max_residual));
        }
    }
    for (i, w) in cert.points.windows(2).enumerate() {
        let d = point_distance(&w[0], &w[1]);
        max_step = nan_max(max_step, d);
        if exceeds(d, cert.max_step) {
            issue(Some(i), format!("step {d} exceeds stated {}", cert.max_step));
        }
    }
    if cert.labels[0] != cert.labels[1] {
        issue(None, format!("endpoint labels differ: {} vs {}", cert.labels[0], cert.labels[1]));
    }
    let last = cert.points.len().saturating_sub(1);
    for (i, p) in cert.points.iter().enumerate() {
        match label_of(cert.system, p, cert.n, cert.tolerance) {
            Ok(l) if l != cert.labels[0] || (i == last && l != cert.labels[1]) => {
                issue(Some(i), format!("label {l} differs from {}", cert.labels[0]));
            }
            Ok(_) => {}
            Err(e) if i == 0 || i == last => issue(Some(i), format!("endpoint not classifiable: {e}")),
            Err(_) => {}
        }
    }
    VerifyReport { valid: issues.is_empty(), issues, max_residual, max_step }
}

/// Blind search for a path: per-coordinate geodesic midpoints projected
/// back onto the variety, refined until every step fits.
pub fn probe_path(r0: &TorusRep, r1: &TorusRep, system: System, n: i64, cfg: &PathConfig) -> Result<PathCertificate> {
    let l0 = label_of(system, r0, n, cfg.tol)?;
    let l1 = label_of(system, r1, n, cfg.tol)?;
    if l0 != l1 {
        return Err(Error::LabelMismatch { left: l0, right: l1 });
    }
    let mut points = vec![*r0];
    refine(r0, r1, 0, system, n, cfg, &l0, &mut points)?;
    PathCertificate::from_points(system, n, cfg, points)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    p: &TorusRep,
    q: &TorusRep,
    depth: usize,
    system: System,
    n: i64,
    cfg: &PathConfig,
    label: &str,
    out: &mut Vec<TorusRep>,
) -> Result<()> {
    if point_distance(p, q) <= cfg.max_step {
        out.push(*q);
        return Ok(());
    }
    if depth >= cfg.depth {
        return Err(Error::BudgetExhausted { depth });
    }
    let (pc, qc) = (p.coords(), q.coords());
    if pc.iter().zip(&qc).any(|(u, v)| u.dot(*v) < -1.0 + 1e-12) {
        return Err(Error::AntipodalGeodesic);
    }
    let mid: Vec<GroupElement> = pc.iter().zip(&qc).map(|(u, v)| geodesic_unchecked(*u, *v, 0.5)).collect();
    let proj = project_to_variety(&TorusRep::from_coords(&mid), n, system, cfg.tol * 1e-3, cfg.iters)?;
    if let Ok(l) = label_of(system, &proj.rep, n, cfg.tol) {
        if l != label {
            return Err(Error::LabelMismatch { left: label.to_string(), right: l });
        }
    }
    refine(p, &proj.rep, depth + 1, system, n, cfg, label, out)?;
    refine(&proj.rep, q, depth + 1, system, n, cfg, label, out)
}

/// Accumulates path segments.
struct Builder<'a> {
    cfg: &'a PathConfig,
    points: Vec<TorusRep>,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a PathConfig, start: TorusRep) -> Self {
        Builder { cfg, points: vec![start] }
    }

    fn current(&self) -> TorusRep {
        *self.points.last().expect("nonempty")
    }

    fn step_config(&self) -> StepConfig {
        StepConfig { max_step: self.cfg.max_step, ..StepConfig::default() }
    }

    fn append(&mut self, stage: &str, pts: impl IntoIterator<Item = TorusRep>) -> Result<()> {
        for p in pts {
            if point_distance(&self.current(), &p) > self.cfg.max_step {
                return Err(Error::ContinuationFailed { stage: stage.to_string(), t: 0.0 });
            }
            self.points.push(p);
        }
        Ok(())
    }

    /// Appends an explicitly parametrized leg `s ↦ f(s)`, `s ∈ [0, 1]`.
    fn explicit(&mut self, stage: &str, f: impl Fn(f64) -> TorusRep) -> Result<()> {
        let pts = trace_adaptive(f(0.0), |_, s| Some(f(s)), point_distance, &self.step_config())
            .map_err(|t| Error::ContinuationFailed { stage: stage.to_string(), t })?;
        self.append(stage, pts)
    }

    /// Appends a tracked leg; the first embedded node repeats the current point.
    fn tracked(
        &mut self,
        stage: &str,
        targets: &dyn Fn(f64) -> Vec<GroupElement>,
        embed: &dyn Fn(f64, &[Pair]) -> TorusRep,
        start: &[Pair],
        end: Option<&[Pair]>,
    ) -> Result<()> {
        let dist = |p: &TorusRep, q: &TorusRep| point_distance(p, q);
        let tracker = PairTracker { targets, embed, dist: &dist, cfg: self.step_config(), stage };
        let pts = tracker.run(start, end)?;
        self.append(stage, pts.into_iter().skip(1))
    }
}

const X_AXIS: [f64; 3] = [1.0, 0.0, 0.0];

fn is_singular(c: GroupElement) -> bool {
    c.w > 0.0 && c.angle() < SNAP_ANGLE
}

fn positive(g: GroupElement) -> GroupElement {
    if g.w < 0.0 {
        -g
    } else {
        g
    }
}

/// Routes for `B₁ → 1`: straight, then detours through coordinate points.
fn b1_routes(b1: GroupElement) -> Vec<Box<dyn Fn(f64) -> GroupElement>> {
    let mut routes: Vec<Box<dyn Fn(f64) -> GroupElement>> =
        vec![Box::new(move |t: f64| if t >= 1.0 { GroupElement::IDENTITY } else { b1.powf(1.0 - t, X_AXIS) })];
    let one = GroupElement::IDENTITY;
    for w in [GroupElement::I, GroupElement::J, GroupElement::K, -GroupElement::I, -GroupElement::J, -GroupElement::K] {
        if b1.dot(w) < -0.99 {
            continue;
        }
        routes.push(Box::new(move |t: f64| {
            if t >= 1.0 {
                one
            } else if t < 0.5 {
                geodesic_unchecked(b1, w, 2.0 * t)
            } else {
                geodesic_unchecked(w, one, 2.0 * t - 1.0)
            }
        }));
    }
    routes
}

/// Stage 1: `B₁ → 1` with `(A₂, B₂)` following its moving fiber.
fn release_b1(b: &mut Builder) -> Result<()> {
    let r = b.current();
    let (a1, b1) = r.rep.pair(0);
    if b1 == GroupElement::IDENTITY {
        return Ok(());
    }
    let c3_inv = commutator(r.rep.a[2], r.rep.b[2]).inverse();
    let mut last_err = None;
    for route in b1_routes(b1) {
        let targets = |t: f64| vec![commutator(a1, route(t)).inverse() * c3_inv];
        let embed = |t: f64, p: &[Pair]| {
            let mut q = r;
            q.rep.b[0] = route(t);
            (q.rep.a[1], q.rep.b[1]) = p[0];
            q
        };
        match b.tracked("release-b1", &targets, &embed, &[r.rep.pair(1)], None) {
            Ok(()) => return Ok(()),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one route"))
}

/// Stage 2: global conjugation putting `A₁` (or `X`) on the `i`-axis circle.
fn align_globally(b: &mut Builder) -> Result<()> {
    let r = b.current();
    let a1 = r.rep.a[0];
    let u = if a1.central_distance() > 1e-9 { a1 } else { derived_x(&r.rep) };
    if u.central_distance() <= 1e-9 {
        return Ok(());
    }
    let target = exp_unchecked(X_AXIS, u.angle());
    let g = positive(align_conjugator(u, target, 1e-6)?);
    b.explicit("align", |s| r.conjugated_by(geodesic_unchecked(GroupElement::IDENTITY, g, s)))
}

/// Tracks `(A₃, B₃)` over `Y(t)` and `(A₂, B₂)` over `Y(t)⁻¹`, optionally
/// finishing at given pairs.
fn track_y(b: &mut Builder, stage: &str, y_at: &dyn Fn(f64) -> GroupElement, end: Option<[Pair; 2]>) -> Result<()> {
    let r = b.current();
    let targets = |t: f64| {
        let y = y_at(t);
        vec![y, y.inverse()]
    };
    let embed = |_: f64, p: &[Pair]| {
        let mut q = r;
        (q.rep.a[2], q.rep.b[2]) = p[0];
        (q.rep.a[1], q.rep.b[1]) = p[1];
        q
    };
    let start = [r.rep.pair(2), r.rep.pair(1)];
    b.tracked(stage, &targets, &embed, &start, end.as_ref().map(|e| &e[..]))
}

/// Stage 3 for off-central labels.
fn rotate_x(b: &mut Builder, canon: &SurfaceRep) -> Result<()> {
    let r = b.current();
    let a1 = r.rep.a[0];
    let x = derived_x(&r.rep);
    let x_star = derived_x(canon);
    let h = if x.central_distance() <= 1e-9 {
        GroupElement::IDENTITY
    } else {
        positive(align_conjugator(x, x_star, 1e-6)?)
    };
    let y_at = |t: f64| x.conjugated_by(geodesic_unchecked(GroupElement::IDENTITY, h, t)) * a1.inverse();
    track_y(b, "rotate-x", &y_at, Some([canon.pair(2), canon.pair(1)]))
}

/// Contracts the commuting pair `i` to `(1, 1)` inside one maximal torus.
fn contract_pair(b: &mut Builder, i: usize, hint: Option<[f64; 3]>) -> Result<()> {
    let r = b.current();
    let (a, bb) = r.rep.pair(i);
    let c = contraction(a, bb, hint).ok_or_else(|| Error::ContinuationFailed { stage: "contract".into(), t: 0.0 })?;
    b.explicit("contract", |s| {
        let mut q = r;
        (q.rep.a[i], q.rep.b[i]) = c(s);
        q
    })
}

/// Central route after stage 1: bring `[A₃,B₃]` to `1`, then contract.
fn collapse_central(b: &mut Builder, n: i64) -> Result<()> {
    let m = n.unsigned_abs() as i64;
    let r = b.current();
    let a1 = r.rep.a[0];
    let a1_central_power = m == 0 || a1.pow(m).central_distance() < CENTRAL_SNAP;
    let y = commutator(r.rep.a[2], r.rep.b[2]);
    if !is_singular(y) {
        if m == 0 {
            let y_at = |t: f64| if t >= 1.0 { GroupElement::IDENTITY } else { y.powf(1.0 - t, X_AXIS) };
            track_y(b, "collapse-y", &y_at, None)?;
        } else if a1_central_power {
            let x = derived_x(&r.rep);
            let h = positive(align_conjugator(x, a1, 1e-6)?);
            let y_at = |t: f64| {
                if t >= 1.0 {
                    GroupElement::IDENTITY
                } else {
                    x.conjugated_by(geodesic_unchecked(GroupElement::IDENTITY, h, t)) * a1.inverse()
                }
            };
            track_y(b, "collapse-y", &y_at, None)?;
        } else {
            return Err(Error::ContinuationFailed { stage: "collapse-y".into(), t: 0.0 });
        }
    }
    let hint = if a1_central_power { None } else { a1.axis() };
    contract_pair(b, 2, hint)?;
    contract_pair(b, 1, None)?;
    let r = b.current();
    b.explicit("contract-a1", |s| {
        let mut q = r;
        q.rep.a[0] = if s >= 1.0 { GroupElement::IDENTITY } else { a1.powf(1.0 - s, X_AXIS) };
        q
    })
}

fn fix_route(b: &mut Builder, n: i64, label: ComponentLabel) -> Result<()> {
    release_b1(b)?;
    match label {
        ComponentLabel::Central => collapse_central(b, n),
        ComponentLabel::Off { .. } => {
            let canon = canonical_representative(n, label)?;
            align_globally(b)?;
            rotate_x(b, &canon)
        }
    }
}

/// Replaces a final point that agrees with `target` to rounding by `target`.
fn land_on(b: &mut Builder, target: TorusRep) -> Result<()> {
    let d = point_distance(&b.current(), &target);
    if d > 1e-6 {
        return Err(Error::ContinuationFailed { stage: "landing".into(), t: 1.0 });
    }
    if d > 0.0 {
        b.points.push(target);
    }
    Ok(())
}

/// Staged path from a fixed point to the canonical representative of its
/// component.
pub fn canonical_path(rep: &SurfaceRep, n: i64, cfg: &PathConfig) -> Result<PathCertificate> {
    let label = classify_fix(rep, n, cfg.tol)?;
    let mut b = Builder::new(cfg, TorusRep::from_surface(*rep));
    fix_route(&mut b, n, label)?;
    land_on(&mut b, TorusRep::from_surface(canonical_representative(n, label)?))?;
    PathCertificate::from_points(System::Fix, n, cfg, b.points)
}

/// `T → 1` from `T = −1` with everything else trivial.
fn lift_t(b: &mut Builder) -> Result<()> {
    let r = b.current();
    b.explicit("t-to-one", |s| {
        let mut q = r;
        q.t = if s <= 0.0 {
            GroupElement::MINUS_IDENTITY
        } else {
            exp_unchecked(X_AXIS, std::f64::consts::PI * (1.0 - s))
        };
        q
    })
}

/// Path inside the closure of `{T·Xⁿ = s}` to `(s, trivial)`.
fn twisted_route(b: &mut Builder, n: i64, s: f64) -> Result<()> {
    let r = b.current();
    let (a1, b1) = r.rep.pair(0);
    let c = commutator(b1, a1);
    let targets = |_: f64| vec![c];
    let embed = |_: f64, p: &[Pair]| {
        let mut q = r;
        (q.rep.a[2], q.rep.b[2]) = p[0];
        q
    };
    b.tracked("twisted-a3b3", &targets, &embed, &[r.rep.pair(2)], Some(&[(b1, a1)]))?;
    contract_pair(b, 1, r.t.axis())?;
    let r = b.current();
    let sign = GroupElement::central(s);
    b.explicit("twisted-a1", |u| {
        let a = if u >= 1.0 { GroupElement::IDENTITY } else { a1.powf(1.0 - u, X_AXIS) };
        let mut q = r;
        q.rep.a[0] = a;
        q.rep.b[2] = a;
        q.t = sign * b1 * a.pow(-n) * b1.inverse();
        q
    })?;
    let r = b.current();
    b.explicit("twisted-b1", |u| {
        let bb = if u >= 1.0 { GroupElement::IDENTITY } else { b1.powf(1.0 - u, X_AXIS) };
        let mut q = r;
        q.rep.b[0] = bb;
        q.rep.a[2] = bb;
        q
    })
}

/// Path through mutually commuting 7-tuples to the trivial point.
fn commuting_route(b: &mut Builder, axis: [f64; 3]) -> Result<()> {
    let r = b.current();
    let coords = r.coords();
    let mut angles = [0.0; 7];
    for (k, u) in coords.iter().enumerate() {
        let v = u.vector();
        let along = crate::su2::dot3(v, axis);
        let off = crate::su2::norm3([v[0] - along * axis[0], v[1] - along * axis[1], v[2] - along * axis[2]]);
        if off > 1e-6 {
            return Err(Error::ContinuationFailed { stage: "commuting".into(), t: 0.0 });
        }
        angles[k] = u.signed_angle_about(axis);
    }
    b.explicit("commuting", |s| TorusRep::from_coords(&angles.map(|a| exp_unchecked(axis, (1.0 - s) * a))))
}

fn all_commute(coords: &[GroupElement], tol: f64) -> bool {
    (0..coords.len())
        .all(|i| (i + 1..coords.len()).all(|j| commutator(coords[i], coords[j]).distance(GroupElement::IDENTITY) < tol))
}

/// Staged path from a point of the mapping-torus variety to the canonical
/// representative of its component.
pub fn canonical_torus_path(trep: &TorusRep, n: i64, cfg: &PathConfig) -> Result<PathCertificate> {
    let label = classify_torus(trep, n, cfg.tol)?;
    let mut b = Builder::new(cfg, *trep);
    let t = trep.t;
    let txn = t * derived_x(&trep.rep).pow(n);
    if t.central_distance() < CENTRAL_SNAP {
        let eps = if t.w > 0.0 { 1.0 } else { -1.0 };
        let mut snapped = *trep;
        snapped.t = GroupElement::central(eps);
        if snapped != *trep {
            b.append("snap-t", [snapped])?;
        }
        let fix_label = label.split().map(|(_, l)| l).unwrap_or(ComponentLabel::Central);
        fix_route(&mut b, n, fix_label)?;
        if label == TorusLabel::Central && eps < 0.0 {
            lift_t(&mut b)?;
        }
    } else if txn.central_distance() < CENTRAL_SNAP {
        let s = if txn.w > 0.0 { 1.0 } else { -1.0 };
        twisted_route(&mut b, n, s)?;
        if s < 0.0 {
            lift_t(&mut b)?;
        }
    } else if all_commute(&trep.coords(), CENTRAL_SNAP) {
        commuting_route(&mut b, t.axis().expect("non-central"))?;
    } else {
        return Err(Error::ContinuationFailed { stage: "torus-stratum".into(), t: 0.0 });
    }
    land_on(&mut b, canonical_torus_representative(n, label)?)?;
    PathCertificate::from_points(System::Torus, n, cfg, b.points)
}

/// Sample-count and path statistics for one label.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelStats {
    pub label: String,
    pub samples: usize,
    /// Samples whose classification matched the label they were drawn from.
    pub classified: usize,
    /// Samples joined to the canonical representative by a verified certificate.
    pub certified: usize,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub format: String,
    pub system: System,
    pub n: i64,
    pub seed: u64,
    pub samples_per_label: usize,
    pub per_label: Vec<LabelStats>,
    /// Distinct labels among classified samples.
    pub labels_observed: usize,
    /// Classes of the union-find over certified samples and canonical points.
    pub estimated_components: usize,
    pub expected_components: u64,
    /// Samples that could not be joined to any canonical point.
    pub unresolved: usize,
    /// Verified certificates whose endpoints carry different labels.
    pub cross_label_certificates: usize,
    pub agreement: bool,
}

/// Per-sample generator: a pure function of the master seed and the index.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const CENTRAL_KINDS: [CentralKind; 3] = [CentralKind::Abelian, CentralKind::Generic, CentralKind::Diagonal];

const TORUS_CENTRAL_KINDS: [TorusCentralKind; 9] = [
    TorusCentralKind::Commuting,
    TorusCentralKind::Twisted(1),
    TorusCentralKind::Twisted(-1),
    TorusCentralKind::Lifted(1, CentralKind::Abelian),
    TorusCentralKind::Lifted(1, CentralKind::Generic),
    TorusCentralKind::Lifted(1, CentralKind::Diagonal),
    TorusCentralKind::Lifted(-1, CentralKind::Abelian),
    TorusCentralKind::Lifted(-1, CentralKind::Generic),
    TorusCentralKind::Lifted(-1, CentralKind::Diagonal),
];

struct SampleOutcome {
    label: usize,
    classified: Option<String>,
    certificate: Option<[String; 2]>,
}

fn run_sample(
    system: System,
    n: i64,
    label_index: usize,
    j: usize,
    seed: u64,
    index: u64,
    cfg: &PathConfig,
) -> SampleOutcome {
    let mut rng = sample_rng(seed, index);
    let mut out = SampleOutcome { label: label_index, classified: None, certificate: None };
    let point = match system {
        System::Torus => {
            let label = enumerate_torus_labels(n)[label_index];
            match label {
                TorusLabel::Central => {
                    Ok(random_central_torus_rep(n, TORUS_CENTRAL_KINDS[j % TORUS_CENTRAL_KINDS.len()], &mut rng))
                }
                _ => randomized_torus_representative(n, label, &mut rng),
            }
        }
        _ => {
            let label = enumerate_fix_labels(n)[label_index];
            let rep = match label {
                ComponentLabel::Central => Ok(random_central_rep(n, CENTRAL_KINDS[j % CENTRAL_KINDS.len()], &mut rng)),
                _ => randomized_representative(n, label, &mut rng),
            };
            rep.map(TorusRep::from_surface)
        }
    };
    let Ok(point) = point else { return out };
    let system = if system == System::Torus { System::Torus } else { System::Fix };
    out.classified = label_of(system, &point, n, cfg.tol).ok();
    if out.classified.is_none() {
        return out;
    }
    let cert = match system {
        System::Torus => canonical_torus_path(&point, n, cfg),
        _ => canonical_path(&point.rep, n, cfg),
    };
    if let Ok(cert) = cert {
        if verify_certificate(&cert).valid {
            out.certificate = Some(cert.labels);
        }
    }
    out
}

/// Draws `samples_per_label` points per label, classifies them, and joins
/// each to its canonical representative by a verified staged path. The
/// surface system is treated as the fixed-point system.
pub fn census(n: i64, system: System, samples_per_label: usize, seed: u64, cfg: &PathConfig) -> CensusReport {
    let labels: Vec<String> = match system {
        System::Torus => enumerate_torus_labels(n).iter().map(|l| l.to_string()).collect(),
        _ => enumerate_fix_labels(n).iter().map(|l| l.to_string()).collect(),
    };
    let expected = match system {
        System::Torus => count_torus(n),
        _ => count_fix(n),
    };
    let total = labels.len() * samples_per_label;
    let outcomes: Vec<SampleOutcome> = (0..total)
        .into_par_iter()
        .map(|i| run_sample(system, n, i / samples_per_label, i % samples_per_label, seed, i as u64, cfg))
        .collect();

    // Nodes: one per canonical representative, then one per sample.
    let index_of: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut components = UnionFind::<usize>::new(labels.len() + total);
    let mut resolved = vec![false; labels.len() + total];
    let mut cross = 0;
    let mut unresolved = 0;
    let mut observed = std::collections::BTreeSet::new();
    let mut stats: Vec<LabelStats> = labels
        .iter()
        .map(|l| LabelStats { label: l.clone(), samples: 0, classified: 0, certified: 0, success_rate: 0.0 })
        .collect();
    for (i, o) in outcomes.iter().enumerate() {
        let node = labels.len() + i;
        let st = &mut stats[o.label];
        st.samples += 1;
        if let Some(c) = &o.classified {
            observed.insert(c.clone());
            if *c == labels[o.label] {
                st.classified += 1;
            }
        }
        match &o.certificate {
            Some([a, b]) if a != b => cross += 1,
            Some([a, _]) => match index_of.get(a.as_str()) {
                Some(&canon) => {
                    components.union(node, canon);
                    resolved[node] = true;
                    resolved[canon] = true;
                    if *a == labels[o.label] {
                        stats[o.label].certified += 1;
                    }
                }
                None => unresolved += 1,
            },
            None => unresolved += 1,
        }
    }
    for st in &mut stats {
        st.success_rate = if st.samples == 0 { 0.0 } else { st.certified as f64 / st.samples as f64 };
    }
    let mut roots = std::collections::BTreeSet::new();
    for (i, _) in resolved.iter().enumerate().filter(|(_, &r)| r) {
        roots.insert(components.find_mut(i));
    }
    let estimated = roots.len();
    let agreement = estimated as u64 == expected
        && observed.len() == labels.len()
        && cross == 0
        && (unresolved as f64) <= 0.05 * total as f64;
    CensusReport {
        format: "repvar-census-1".into(),
        system,
        n,
        seed,
        samples_per_label,
        per_label: stats,
        labels_observed: observed.len(),
        estimated_components: estimated,
        expected_components: expected,
        unresolved,
        cross_label_certificates: cross,
        agreement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::Sign;
    use crate::varieties::fixed_point_residual;

    fn cfg() -> PathConfig {
        PathConfig::default()
    }

    fn check(cert: &PathCertificate) {
        let report = verify_certificate(cert);
        assert!(report.valid, "{:?}", report.issues);
    }

    #[test]
    fn canonical_rep_gives_trivial_path() {
        let label = ComponentLabel::Off { sign: Sign::Plus, k: 0, l: 1 };
        let rep = canonical_representative(2, label).unwrap();
        let cert = canonical_path(&rep, 2, &cfg()).unwrap();
        check(&cert);
        let canon = TorusRep::from_surface(rep);
        assert!(cert.points.iter().all(|p| point_distance(p, &canon) < 1e-9));
    }

    #[test]
    fn staged_paths_for_every_label() {
        for n in [1, 2, 3, 4, -3] {
            for (i, label) in enumerate_fix_labels(n).into_iter().enumerate() {
                for seed in 0..5u64 {
                    let mut rng = sample_rng(seed, i as u64);
                    let rep = randomized_representative(n, label, &mut rng).unwrap();
                    let cert = canonical_path(&rep, n, &cfg()).unwrap_or_else(|e| panic!("{n} {label} {seed}: {e}"));
                    check(&cert);
                    assert_eq!(cert.labels[0], label.to_string());
                    let last = cert.points.last().unwrap();
                    assert_eq!(last.rep, canonical_representative(n, label).unwrap());
                }
            }
        }
    }

    #[test]
    fn staged_paths_for_central_kinds() {
        for n in [0, 1, 2, 3] {
            for kind in CENTRAL_KINDS {
                for seed in 0..5u64 {
                    let rep = random_central_rep(n, kind, &mut sample_rng(seed, 7));
                    assert!(fixed_point_residual(&rep, n).max < 1e-9);
                    let cert = canonical_path(&rep, n, &cfg()).unwrap_or_else(|e| panic!("{n} {kind:?} {seed}: {e}"));
                    check(&cert);
                    assert_eq!(cert.points.last().unwrap().rep, SurfaceRep::trivial());
                }
            }
        }
    }

    #[test]
    fn torus_paths_for_every_kind() {
        for n in [1, 2, 3] {
            for kind in TORUS_CENTRAL_KINDS {
                for seed in 0..3u64 {
                    let t = random_central_torus_rep(n, kind, &mut sample_rng(seed, 11));
                    let cert =
                        canonical_torus_path(&t, n, &cfg()).unwrap_or_else(|e| panic!("{n} {kind:?} {seed}: {e}"));
                    check(&cert);
                    assert_eq!(*cert.points.last().unwrap(), TorusRep::trivial());
                }
            }
            for label in enumerate_torus_labels(n).into_iter().skip(1) {
                let t = randomized_torus_representative(n, label, &mut sample_rng(1, 3)).unwrap();
                let cert = canonical_torus_path(&t, n, &cfg()).unwrap();
                check(&cert);
                assert_eq!(cert.labels[1], label.to_string());
            }
        }
    }

    #[test]
    fn probe_examples() {
        let label = ComponentLabel::Off { sign: Sign::Plus, k: 0, l: 1 };
        let r = TorusRep::from_surface(randomized_representative(2, label, &mut sample_rng(1, 1)).unwrap());
        let cert = probe_path(&r, &r, System::Fix, 2, &cfg()).unwrap();
        assert_eq!(cert.points.len(), 2);
        check(&cert);
        let other = ComponentLabel::Off { sign: Sign::Plus, k: 1, l: 0 };
        let q = TorusRep::from_surface(canonical_representative(2, other).unwrap());
        assert!(matches!(probe_path(&r, &q, System::Fix, 2, &cfg()), Err(Error::LabelMismatch { .. })));
    }

    #[test]
    fn probe_between_same_label_samples() {
        let label = ComponentLabel::Off { sign: Sign::Plus, k: 0, l: 1 };
        let canon = TorusRep::from_surface(canonical_representative(2, label).unwrap());
        // A nearby point: conjugate slightly.
        let g = exp_unchecked([0.0, 0.6, 0.8], 0.5);
        let near = canon.conjugated_by(g);
        let cert = probe_path(&canon, &near, System::Fix, 2, &cfg()).unwrap();
        check(&cert);
    }

    #[test]
    fn verification_catches_corruption() {
        let rep =
            randomized_representative(3, ComponentLabel::Off { sign: Sign::Minus, k: 0, l: 1 }, &mut sample_rng(2, 2))
                .unwrap();
        let cert = canonical_path(&rep, 3, &cfg()).unwrap();
        check(&cert);
        let mut bad = cert.clone();
        let k = bad.points.len() / 2;
        bad.points[k].rep.a[1] = bad.points[k].rep.a[1] * exp_unchecked(X_AXIS, 0.01);
        let report = verify_certificate(&bad);
        assert!(!report.valid);
        assert!(report.issues.iter().any(|i| i.index == Some(k)));
        let mut bad = cert.clone();
        bad.labels[1] = "(-,1,0)".into();
        assert!(!verify_certificate(&bad).valid);
        let mut bad = cert.clone();
        bad.points[k].rep.b[2] = GroupElement::raw(f64::NAN, 0.0, 0.0, 0.0);
        assert!(!verify_certificate(&bad).valid);
    }

    #[test]
    fn certificate_file_round_trip() {
        let rep = randomized_representative(2, ComponentLabel::Central, &mut sample_rng(3, 3)).unwrap();
        let cert = canonical_path(&rep, 2, &cfg()).unwrap();
        let back = PathCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back.points, cert.points);
        assert!(verify_certificate(&back).valid);
        assert!(PathCertificate::from_json("{}").is_err());
    }

    #[test]
    fn small_census() {
        let report = census(2, System::Fix, 6, 42, &cfg());
        assert!(report.agreement, "{report:?}");
        assert_eq!(report.estimated_components, 3);
        let again = census(2, System::Fix, 6, 42, &cfg());
        assert_eq!(report, again);
    }
}
