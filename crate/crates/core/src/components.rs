//! Component labels, closed-form counts, classifiers, and representatives
//! for every component.
//!
//! A fixed point with `A₁ⁿ = Xⁿ = ±1` carries the integers `(k, ℓ)` read
//! off from the angles of `A₁` and `X = [A₃,B₃]A₁`; all other fixed points,
//! and the diagonal `k = ℓ`, lie in the component of the trivial
//! representation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::commutator::{random_fiber_point, solve_commutator};
use crate::error::{Error, Result};
use crate::su2::{commutator, exp_unchecked, haar_random, random_axis, GroupElement};
use crate::varieties::{derived_x, fixed_point_residual, random_surface_rep, torus_residual, SurfaceRep, TorusRep};

/// `A₁ⁿ` closer than this to `±1` counts as central.
pub const CENTRAL_SNAP: f64 = 1e-6;
/// Beyond this distance `A₁ⁿ` is certainly not central.
pub const CENTRAL_GAP: f64 = 1e-4;
/// Largest distance from an integer accepted when rounding `k` and `ℓ`.
pub const ROUNDING_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    fn parse(s: &str) -> Result<Sign> {
        match s {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("expected + or -, found {s:?}"))),
        }
    }
}

/// Component of the fixed-point set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentLabel {
    Central,
    Off { sign: Sign, k: u32, l: u32 },
}

/// Component of the mapping-torus variety.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TorusLabel {
    Central,
    Off { eps: i8, sign: Sign, k: u32, l: u32 },
}

impl TorusLabel {
    /// The surface label and `ε`, for off-central labels.
    pub fn split(self) -> Option<(i8, ComponentLabel)> {
        match self {
            TorusLabel::Central => None,
            TorusLabel::Off { eps, sign, k, l } => Some((eps, ComponentLabel::Off { sign, k, l })),
        }
    }

    pub fn lift(eps: i8, label: ComponentLabel) -> TorusLabel {
        match label {
            ComponentLabel::Central => TorusLabel::Central,
            ComponentLabel::Off { sign, k, l } => TorusLabel::Off { eps, sign, k, l },
        }
    }
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentLabel::Central => f.write_str("central"),
            ComponentLabel::Off { sign, k, l } => write!(f, "({},{k},{l})", sign.symbol()),
        }
    }
}

impl fmt::Display for TorusLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.split() {
            None => f.write_str("central"),
            Some((eps, label)) => write!(f, "eps={},{label}", if eps > 0 { "+1" } else { "-1" }),
        }
    }
}

fn parse_off(s: &str) -> Result<ComponentLabel> {
    let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(s);
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    let [sign, k, l] = parts[..] else {
        return Err(Error::Parse(format!("expected sign,k,l in {s:?}")));
    };
    let int = |v: &str| v.parse::<u32>().map_err(|_| Error::Parse(format!("bad index {v:?} in {s:?}")));
    Ok(ComponentLabel::Off { sign: Sign::parse(sign)?, k: int(k)?, l: int(l)? })
}

impl FromStr for ComponentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<ComponentLabel> {
        let s = s.trim();
        if s == "central" {
            Ok(ComponentLabel::Central)
        } else {
            parse_off(s)
        }
    }
}

impl FromStr for TorusLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<TorusLabel> {
        let s = s.trim();
        if s == "central" {
            return Ok(TorusLabel::Central);
        }
        let rest = s.strip_prefix("eps=").ok_or_else(|| Error::Parse(format!("expected eps= in {s:?}")))?;
        let (eps, rest) = rest.split_once(',').ok_or_else(|| Error::Parse(format!("missing label in {s:?}")))?;
        let eps = match eps {
            "+1" | "1" => 1,
            "-1" => -1,
            _ => return Err(Error::Parse(format!("eps must be +1 or -1 in {s:?}"))),
        };
        Ok(TorusLabel::lift(eps, parse_off(rest)?))
    }
}

/// Number of components of the fixed-point set of `Φⁿ`: `⌊n²/2⌋ + 1`.
pub fn count_fix(n: i64) -> u64 {
    let m = n.unsigned_abs();
    m * m / 2 + 1
}

/// Number of components of the fixed set in the character variety; the
/// same value as [`count_fix`].
pub fn count_fix_char(n: i64) -> u64 {
    let m = n.unsigned_abs();
    if m.is_multiple_of(2) {
        m * m / 2 + 1
    } else {
        (m * m).div_ceil(2)
    }
}

/// Number of components of the mapping-torus variety: `2⌊n²/2⌋ + 1`.
pub fn count_torus(n: i64) -> u64 {
    let m = n.unsigned_abs();
    2 * (m * m / 2) + 1
}

/// Largest admissible index for `sign`, or `None` when no index exists.
fn index_bound(n: i64, sign: Sign) -> Option<u32> {
    let m = n.unsigned_abs();
    match sign {
        Sign::Plus if m > 0 => Some((m / 2) as u32),
        Sign::Minus if m > 0 => Some(((m - 1) / 2) as u32),
        _ => None,
    }
}

pub fn label_in_range(n: i64, label: ComponentLabel) -> bool {
    match label {
        ComponentLabel::Central => true,
        ComponentLabel::Off { sign, k, l } => k != l && index_bound(n, sign).is_some_and(|b| k <= b && l <= b),
    }
}

pub fn enumerate_fix_labels(n: i64) -> Vec<ComponentLabel> {
    let mut out = vec![ComponentLabel::Central];
    for sign in [Sign::Plus, Sign::Minus] {
        let Some(b) = index_bound(n, sign) else { continue };
        for k in 0..=b {
            for l in (0..=b).filter(|&l| l != k) {
                out.push(ComponentLabel::Off { sign, k, l });
            }
        }
    }
    out
}

pub fn enumerate_torus_labels(n: i64) -> Vec<TorusLabel> {
    let off: Vec<ComponentLabel> = enumerate_fix_labels(n).into_iter().skip(1).collect();
    let mut out = vec![TorusLabel::Central];
    for eps in [1, -1] {
        out.extend(off.iter().map(|&l| TorusLabel::lift(eps, l)));
    }
    out
}

fn quantized(angle: f64, m: u64, sign: Sign) -> Result<u32> {
    let v = match sign {
        Sign::Plus => m as f64 * angle / std::f64::consts::TAU,
        Sign::Minus => (m as f64 * angle / std::f64::consts::PI - 1.0) / 2.0,
    };
    let r = v.round();
    if (v - r).abs() > ROUNDING_SLACK || r < 0.0 {
        return Err(Error::Unclassifiable(format!("index {v:.4} is not near an integer")));
    }
    Ok(r as u32)
}

fn central_state(u: GroupElement) -> Result<Option<Sign>> {
    let d = u.central_distance();
    if d < CENTRAL_SNAP {
        Ok(Some(if u.w > 0.0 { Sign::Plus } else { Sign::Minus }))
    } else if d < CENTRAL_GAP {
        Err(Error::Unclassifiable(format!("distance {d:.2e} to the center is inside the ambiguity band")))
    } else {
        Ok(None)
    }
}

fn classify_fix_unchecked(rep: &SurfaceRep, n: i64) -> Result<ComponentLabel> {
    let m = n.unsigned_abs();
    if m == 0 {
        return Ok(ComponentLabel::Central);
    }
    let a1 = rep.a[0];
    let Some(sign) = central_state(a1.pow(m as i64))? else {
        return Ok(ComponentLabel::Central);
    };
    let k = quantized(a1.angle(), m, sign)?;
    let l = quantized(derived_x(rep).angle(), m, sign)?;
    let label = if k == l { ComponentLabel::Central } else { ComponentLabel::Off { sign, k, l } };
    if !label_in_range(n, label) {
        return Err(Error::Unclassifiable(format!("{label} is out of range")));
    }
    Ok(label)
}

/// Label of a fixed point of `Φⁿ`.
pub fn classify_fix(rep: &SurfaceRep, n: i64, tol: f64) -> Result<ComponentLabel> {
    let r = fixed_point_residual(rep, n).max;
    if r >= tol {
        return Err(Error::ResidualTooLarge { residual: r, tol });
    }
    classify_fix_unchecked(rep, n)
}

/// Label of a point of the mapping-torus variety.
pub fn classify_torus(trep: &TorusRep, n: i64, tol: f64) -> Result<TorusLabel> {
    let r = torus_residual(trep, n).max;
    if r >= tol {
        return Err(Error::ResidualTooLarge { residual: r, tol });
    }
    if n == 0 {
        return Ok(TorusLabel::Central);
    }
    match central_state(trep.t)? {
        None => Ok(TorusLabel::Central),
        Some(eps) => {
            let eps = if eps == Sign::Plus { 1 } else { -1 };
            Ok(TorusLabel::lift(eps, classify_fix_unchecked(&trep.rep, n)?))
        }
    }
}

/// Angles of `A₁` and `X` prescribed by an off-central label.
fn label_angles(n: i64, sign: Sign, k: u32, l: u32) -> (f64, f64) {
    let m = n.unsigned_abs() as f64;
    let pi = std::f64::consts::PI;
    match sign {
        Sign::Plus => (2.0 * pi * k as f64 / m, 2.0 * pi * l as f64 / m),
        Sign::Minus => ((2 * k + 1) as f64 * pi / m, (2 * l + 1) as f64 * pi / m),
    }
}

fn check_label(n: i64, label: ComponentLabel) -> Result<()> {
    if label_in_range(n, label) {
        Ok(())
    } else {
        Err(Error::LabelOutOfRange { label: label.to_string(), n })
    }
}

/// Fixed point with `A₁`, `X` on the `i`-axis circle, `B₁ = 1`, and the
/// remaining pairs from the closed-form commutator solver.
pub fn canonical_representative(n: i64, label: ComponentLabel) -> Result<SurfaceRep> {
    check_label(n, label)?;
    let ComponentLabel::Off { sign, k, l } = label else {
        return Ok(SurfaceRep::trivial());
    };
    let (ta, tx) = label_angles(n, sign, k, l);
    let axis = [1.0, 0.0, 0.0];
    let a1 = exp_unchecked(axis, ta);
    let x = exp_unchecked(axis, tx);
    let p3 = solve_commutator(x * a1.inverse());
    let p2 = solve_commutator(commutator(p3.0, p3.1).inverse());
    Ok(SurfaceRep::from_pairs([(a1, GroupElement::IDENTITY), p2, p3]))
}

pub fn canonical_torus_representative(n: i64, label: TorusLabel) -> Result<TorusRep> {
    match label.split() {
        None => Ok(TorusRep::trivial()),
        Some((eps, l)) => {
            if eps != 1 && eps != -1 {
                return Err(Error::LabelOutOfRange { label: label.to_string(), n });
            }
            Ok(TorusRep::new(GroupElement::central(eps as f64), canonical_representative(n, l)?))
        }
    }
}

/// Completes `A₁`, `X` with random `B₁` and random fiber points.
fn complete_random<R: Rng + ?Sized>(a1: GroupElement, x: GroupElement, rng: &mut R) -> SurfaceRep {
    let b1 = haar_random(rng);
    let p3 = random_fiber_point(x * a1.inverse(), rng);
    let c2 = commutator(a1, b1).inverse() * commutator(p3.0, p3.1).inverse();
    let p2 = random_fiber_point(c2, rng);
    SurfaceRep::from_pairs([(a1, b1), p2, p3])
}

/// Kinds of central fixed points drawn by [`randomized_representative`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CentralKind {
    /// All six images in one maximal torus.
    Abelian,
    /// `A₁ⁿ` non-central; `A₃`, `B₃` in the torus of `A₁`.
    Generic,
    /// `A₁ⁿ = Xⁿ = ±1` with equal indices.
    Diagonal,
}

pub fn random_abelian_rep<R: Rng + ?Sized>(rng: &mut R) -> SurfaceRep {
    let axis = random_axis(rng);
    let mut g = [GroupElement::IDENTITY; 6];
    for u in &mut g {
        *u = exp_unchecked(axis, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    }
    SurfaceRep::from_images(g)
}

/// Random central fixed point of the given kind.
pub fn random_central_rep<R: Rng + ?Sized>(n: i64, kind: CentralKind, rng: &mut R) -> SurfaceRep {
    let m = n.unsigned_abs();
    match kind {
        CentralKind::Abelian => random_abelian_rep(rng),
        CentralKind::Generic => loop {
            let a1 = haar_random(rng);
            if m > 0 && a1.pow(m as i64).central_distance() < 10.0 * CENTRAL_GAP {
                continue;
            }
            let axis = a1.axis().expect("non-central");
            let a3 = exp_unchecked(axis, rng.random_range(-3.0..3.0));
            let b3 = exp_unchecked(axis, rng.random_range(-3.0..3.0));
            let b1 = haar_random(rng);
            let p2 = random_fiber_point(commutator(a1, b1).inverse(), rng);
            return SurfaceRep::from_pairs([(a1, b1), p2, (a3, b3)]);
        },
        CentralKind::Diagonal => {
            if m == 0 {
                return random_abelian_rep(rng);
            }
            let sign =
                if rng.random_bool(0.5) || index_bound(n, Sign::Minus).is_none() { Sign::Plus } else { Sign::Minus };
            let b = index_bound(n, sign).expect("m > 0");
            let k = rng.random_range(0..=b);
            let (ta, _) = label_angles(n, sign, k, k);
            let a1 = exp_unchecked(random_axis(rng), ta);
            let x = exp_unchecked(random_axis(rng), ta);
            complete_random(a1, x, rng)
        }
    }
}

/// Random point with the given label, globally conjugated at random.
pub fn randomized_representative<R: Rng + ?Sized>(n: i64, label: ComponentLabel, rng: &mut R) -> Result<SurfaceRep> {
    check_label(n, label)?;
    let rep = match label {
        ComponentLabel::Central => random_abelian_rep(rng),
        ComponentLabel::Off { sign, k, l } => {
            let (ta, tx) = label_angles(n, sign, k, l);
            let a1 = exp_unchecked(random_axis(rng), ta);
            let x = exp_unchecked(random_axis(rng), tx);
            complete_random(a1, x, rng)
        }
    };
    Ok(rep.conjugated_by(haar_random(rng)))
}

/// Kinds of central torus points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TorusCentralKind {
    /// `T = ±1` over a central fixed point.
    Lifted(i8, CentralKind),
    /// Seven mutually commuting elements, `T` non-central.
    Commuting,
    /// `T·Xⁿ = ±1`.
    Twisted(i8),
}

/// Random torus point with `T·Xⁿ = s`: `X = B₁A₁B₁⁻¹`, `T = s·B₁A₁⁻ⁿB₁⁻¹`,
/// `A₂`, `B₂` in the torus of `T`. For `n = 0` this forces `T = s` over an
/// arbitrary surface point.
pub fn random_twisted_rep<R: Rng + ?Sized>(n: i64, s: i8, rng: &mut R) -> TorusRep {
    if n == 0 {
        return TorusRep::new(GroupElement::central(s as f64), random_surface_rep(rng));
    }
    loop {
        let a1 = haar_random(rng);
        let b1 = haar_random(rng);
        let t = GroupElement::central(s as f64) * b1 * a1.pow(-n) * b1.inverse();
        let Some(axis) = t.axis() else { continue };
        if t.central_distance() < 10.0 * CENTRAL_GAP {
            continue;
        }
        let p3 = random_fiber_point(commutator(a1, b1).inverse(), rng);
        let a2 = exp_unchecked(axis, rng.random_range(-3.0..3.0));
        let b2 = exp_unchecked(axis, rng.random_range(-3.0..3.0));
        return TorusRep::new(t, SurfaceRep::from_pairs([(a1, b1), (a2, b2), p3]));
    }
}

pub fn random_commuting_torus_rep<R: Rng + ?Sized>(rng: &mut R) -> TorusRep {
    let rep = random_abelian_rep(rng);
    let axis = rep.a[0].axis().unwrap_or([1.0, 0.0, 0.0]);
    let t = exp_unchecked(axis, rng.random_range(0.1..3.0));
    TorusRep::new(t, rep)
}

pub fn random_central_torus_rep<R: Rng + ?Sized>(n: i64, kind: TorusCentralKind, rng: &mut R) -> TorusRep {
    let rep = match kind {
        TorusCentralKind::Lifted(eps, k) => {
            TorusRep::new(GroupElement::central(eps as f64), random_central_rep(n, k, rng))
        }
        TorusCentralKind::Commuting => random_commuting_torus_rep(rng),
        TorusCentralKind::Twisted(s) => random_twisted_rep(n, s, rng),
    };
    rep.conjugated_by(haar_random(rng))
}

pub fn randomized_torus_representative<R: Rng + ?Sized>(n: i64, label: TorusLabel, rng: &mut R) -> Result<TorusRep> {
    match label.split() {
        None => Ok(random_central_torus_rep(n, TorusCentralKind::Commuting, rng)),
        Some((eps, l)) => Ok(TorusRep::new(GroupElement::central(eps as f64), randomized_representative(n, l, rng)?)),
    }
}
