//! SU(2) realized as unit quaternions `w + x·i + y·j + z·k`.
//!
//! Every constructor and binary operation renormalizes, so values stay on the
//! unit 3-sphere to working precision. The trace of the corresponding 2×2
//! matrix is `2w`, and the rotation angle of an element is the `θ ∈ [0, π]`
//! with `cos θ = w`.

use std::fmt;
use std::ops::{Mul, Neg};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this vector-part magnitude an element is treated as exactly `±1`
/// when an axis is required.
pub const AXIS_EPS: f64 = 1e-14;

/// A 3-vector used for rotation axes.
pub type Vec3 = [f64; 3];

pub(crate) fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// A unit vector orthogonal to `a` (which must be nonzero).
pub(crate) fn orthogonal_axis(a: Vec3) -> Vec3 {
    let n = norm3(a);
    let a = scale3(a, 1.0 / n);
    if let Some(i) = (0..3).find(|&i| a[i].abs() < 1e-9) {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        return e;
    }
    let j = (0..3).min_by(|&p, &q| a[p].abs().total_cmp(&a[q].abs())).unwrap_or(0);
    let mut e = [0.0; 3];
    e[j] = 1.0;
    let c = cross3(a, e);
    scale3(c, 1.0 / norm3(c))
}

/// An element of SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct GroupElement {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for GroupElement {
    fn from(q: [f64; 4]) -> Self {
        GroupElement::new(q[0], q[1], q[2], q[3])
    }
}

impl From<GroupElement> for [f64; 4] {
    fn from(u: GroupElement) -> Self {
        u.to_array()
    }
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const MINUS_IDENTITY: GroupElement = GroupElement { w: -1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: GroupElement = GroupElement { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: GroupElement = GroupElement { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: GroupElement = GroupElement { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    /// Builds an element from raw components, projecting onto the unit sphere.
    ///
    /// A zero quaternion maps to the identity.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        GroupElement { w, x, y, z }.normalized()
    }

    /// Builds `±1`.
    pub fn central(sign: f64) -> Self {
        if sign < 0.0 {
            Self::MINUS_IDENTITY
        } else {
            Self::IDENTITY
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub(crate) fn raw(w: f64, x: f64, y: f64, z: f64) -> Self {
        GroupElement { w, x, y, z }
    }

    pub(crate) fn from_scalar_vector(w: f64, v: Vec3) -> Self {
        GroupElement::new(w, v[0], v[1], v[2])
    }

    /// Euclidean norm of the underlying quaternion.
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    fn normalized(self) -> Self {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Self::IDENTITY;
        }
        GroupElement { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    /// Four-dimensional inner product of the quaternion components.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn vector(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    /// Matrix trace `2w`.
    pub fn trace(self) -> f64 {
        2.0 * self.w
    }

    /// Rotation angle in `[0, π]`; `cos(angle) = w`.
    pub fn angle(self) -> f64 {
        norm3(self.vector()).atan2(self.w)
    }

    /// Unit axis of the maximal torus through `self`, or `None` for `±1`.
    pub fn axis(self) -> Option<Vec3> {
        let v = self.vector();
        let n = norm3(v);
        if n < AXIS_EPS {
            None
        } else {
            Some(scale3(v, 1.0 / n))
        }
    }

    /// Signed angle of `self` along the circle `cos t + sin t·axis`.
    ///
    /// Only meaningful when `self` lies on that circle.
    pub fn signed_angle_about(self, axis: Vec3) -> f64 {
        dot3(self.vector(), axis).atan2(self.w)
    }

    pub fn inverse(self) -> Self {
        GroupElement { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// `g · self · g⁻¹`.
    pub fn conjugated_by(self, g: Self) -> Self {
        g * self * g.inverse()
    }

    /// Integer power by exact angle scaling.
    pub fn pow(self, n: i64) -> Self {
        let theta = self.angle();
        let v = self.vector();
        let s = norm3(v);
        let t = n as f64 * theta;
        if s < AXIS_EPS {
            return GroupElement::raw(t.cos(), 0.0, 0.0, 0.0).normalized();
        }
        let k = t.sin() / s;
        GroupElement::raw(t.cos(), v[0] * k, v[1] * k, v[2] * k).normalized()
    }

    /// Real power along the one-parameter subgroup through `self`; for `self = ±1`
    /// the subgroup with the given fallback axis is used.
    pub fn powf(self, t: f64, fallback_axis: Vec3) -> Self {
        let theta = self.angle();
        let axis = self.axis().unwrap_or(fallback_axis);
        exp_unchecked(axis, t * theta)
    }

    /// Frobenius distance of the 4-vectors, the residual norm used throughout.
    pub fn distance(self, other: Self) -> f64 {
        let d = [self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]).sqrt()
    }

    /// Great-circle distance on the unit 3-sphere, in `[0, π]`.
    pub fn geodesic_distance(self, other: Self) -> f64 {
        (self.inverse() * other).angle()
    }

    /// True iff `self` is within `tol` of `+1` or `-1`.
    pub fn is_central(self, tol: f64) -> bool {
        self.central_sign(tol).is_some()
    }

    /// `Some(+1.0)` or `Some(-1.0)` when within `tol` of that central element.
    pub fn central_sign(self, tol: f64) -> Option<f64> {
        let dp = self.distance(Self::IDENTITY);
        let dm = self.distance(Self::MINUS_IDENTITY);
        if dp.min(dm) >= tol {
            None
        } else if dp <= dm {
            Some(1.0)
        } else {
            Some(-1.0)
        }
    }

    /// Distance to the center `{±1}`.
    pub fn central_distance(self) -> f64 {
        self.distance(Self::IDENTITY).min(self.distance(Self::MINUS_IDENTITY))
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, v: GroupElement) -> GroupElement {
        let u = self;
        GroupElement::raw(
            u.w * v.w - u.x * v.x - u.y * v.y - u.z * v.z,
            u.w * v.x + u.x * v.w + u.y * v.z - u.z * v.y,
            u.w * v.y - u.x * v.z + u.y * v.w + u.z * v.x,
            u.w * v.z + u.x * v.y - u.y * v.x + u.z * v.w,
        )
        .normalized()
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;

    fn neg(self) -> GroupElement {
        GroupElement::raw(-self.w, -self.x, -self.y, -self.z)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.w, self.x, self.y, self.z)
    }
}

/// `max` that lets NaN through instead of discarding it.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Quaternion product `u·v`.
pub fn multiply(u: GroupElement, v: GroupElement) -> GroupElement {
    u * v
}

/// Group commutator `a·b·a⁻¹·b⁻¹`.
pub fn commutator(a: GroupElement, b: GroupElement) -> GroupElement {
    a * b * a.inverse() * b.inverse()
}

pub(crate) fn exp_unchecked(axis: Vec3, theta: f64) -> GroupElement {
    let (s, c) = theta.sin_cos();
    GroupElement::raw(c, axis[0] * s, axis[1] * s, axis[2] * s).normalized()
}

/// `cos θ + sin θ·(axis · (i, j, k))`.
pub fn exp_axis_angle(axis: Vec3, theta: f64) -> Result<GroupElement> {
    let n = norm3(axis);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitAxis(n));
    }
    Ok(exp_unchecked(scale3(axis, 1.0 / n), theta))
}

/// Constant-speed shortest path from `u` (t = 0) to `v` (t = 1).
///
/// Antipodal pairs have no unique shortest path and are rejected.
pub fn geodesic(u: GroupElement, v: GroupElement, t: f64) -> Result<GroupElement> {
    if u.distance(-v) < 1e-9 {
        return Err(Error::AntipodalGeodesic);
    }
    Ok(geodesic_unchecked(u, v, t))
}

pub(crate) fn geodesic_unchecked(u: GroupElement, v: GroupElement, t: f64) -> GroupElement {
    let d = u.inverse() * v;
    match d.axis() {
        None => u,
        Some(axis) => u * exp_unchecked(axis, t * d.angle()),
    }
}

/// Haar-uniform element: a normalized standard Gaussian 4-vector.
pub fn haar_random<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if n > 1e-6 {
            return GroupElement::new(q[0], q[1], q[2], q[3]);
        }
    }
}

/// Uniform random unit 3-vector.
pub fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v: Vec3 = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = norm3(v);
        if n > 1e-6 {
            return scale3(v, 1.0 / n);
        }
    }
}

/// Rotation quaternion `g` with `g·a·g⁻¹ = b` on unit pure quaternions.
fn rotation_between(a: Vec3, b: Vec3) -> GroupElement {
    let d = dot3(a, b);
    if d >= 0.0 {
        let c = cross3(a, b);
        return GroupElement::from_scalar_vector(1.0 + d, c);
    }
    // Half-turn to -a first; the remaining rotation is then well conditioned.
    let half_turn = GroupElement::from_scalar_vector(0.0, orthogonal_axis(a));
    let minus_a = scale3(a, -1.0);
    let c = cross3(minus_a, b);
    GroupElement::from_scalar_vector(1.0 + dot3(minus_a, b), c) * half_turn
}

/// Finds `g` with `g·c0·g⁻¹ = c1` for elements of equal trace.
///
/// Equal central elements give the identity; otherwise `g` rotates the axis of
/// `c0` onto the axis of `c1` about their cross product (half-turn about a
/// coordinate-derived orthogonal axis when they are anti-parallel).
pub fn align_conjugator(c0: GroupElement, c1: GroupElement, tol: f64) -> Result<GroupElement> {
    let (t0, t1) = (c0.trace(), c1.trace());
    if (t0 - t1).abs() > tol {
        return Err(Error::TraceMismatch { left: t0, right: t1 });
    }
    match (c0.axis(), c1.axis()) {
        (None, None) => Ok(GroupElement::IDENTITY),
        (Some(a), Some(b)) => Ok(rotation_between(a, b)),
        _ => Err(Error::NotConjugate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(u: GroupElement, v: GroupElement, tol: f64) -> bool {
        u.distance(v) < tol
    }

    #[test]
    fn quaternion_table() {
        let (i, j, k) = (GroupElement::I, GroupElement::J, GroupElement::K);
        assert!(close(i * j, k, 1e-15));
        assert!(close(j * k, i, 1e-15));
        assert!(close(k * i, j, 1e-15));
        assert!(close(i * i, GroupElement::MINUS_IDENTITY, 1e-15));
        assert!(close(GroupElement::IDENTITY * i, i, 1e-15));
    }

    #[test]
    fn inverse_basics() {
        assert_eq!(GroupElement::IDENTITY.inverse(), GroupElement::IDENTITY);
        assert!(close(GroupElement::I.inverse(), -GroupElement::I, 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u = haar_random(&mut rng);
            assert!(close(u * u.inverse(), GroupElement::IDENTITY, 1e-12));
        }
    }

    #[test]
    fn commutator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = haar_random(&mut rng);
        assert!(close(commutator(u, u), GroupElement::IDENTITY, 1e-12));
        // i·j·(−i)·(−j) = k·k = −1
        let oracle = GroupElement::I * GroupElement::J * (-GroupElement::I) * (-GroupElement::J);
        assert!(close(oracle, GroupElement::MINUS_IDENTITY, 1e-15));
        assert!(close(commutator(GroupElement::I, GroupElement::J), oracle, 1e-15));
        assert!(close(commutator(u.pow(3), u.pow(-5)), GroupElement::IDENTITY, 1e-12));
    }

    #[test]
    fn exp_axis_angle_examples() {
        let e1 = [1.0, 0.0, 0.0];
        assert!(close(exp_axis_angle([0.0, 0.6, 0.8], 0.0).unwrap(), GroupElement::IDENTITY, 1e-15));
        assert!(close(exp_axis_angle(e1, std::f64::consts::PI).unwrap(), GroupElement::MINUS_IDENTITY, 1e-15));
        assert!(close(exp_axis_angle(e1, std::f64::consts::FRAC_PI_2).unwrap(), GroupElement::I, 1e-15));
        assert!(matches!(exp_axis_angle([1.0, 1.0, 0.0], 0.3), Err(Error::NonUnitAxis(_))));
    }

    #[test]
    fn geodesic_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_random(&mut rng);
        assert!(close(geodesic(u, u, 0.37).unwrap(), u, 1e-15));
        assert!(close(geodesic(GroupElement::IDENTITY, GroupElement::I, 1.0).unwrap(), GroupElement::I, 1e-15));
        let mid = geodesic(GroupElement::IDENTITY, GroupElement::I, 0.5).unwrap();
        let expected = exp_axis_angle([1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_4).unwrap();
        assert!(close(mid, expected, 1e-15));
        assert!((mid.angle() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(matches!(geodesic(u, -u, 0.5), Err(Error::AntipodalGeodesic)));
    }

    #[test]
    fn haar_is_deterministic_and_has_the_right_moments() {
        let a = haar_random(&mut ChaCha8Rng::seed_from_u64(11));
        let b = haar_random(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 100_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let t = haar_random(&mut rng).trace();
            m1 += t;
            m2 += t * t;
        }
        assert!((m1 / n as f64).abs() < 0.05);
        assert!((m2 / n as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn align_conjugator_examples() {
        let g = align_conjugator(GroupElement::I, GroupElement::I, 1e-9).unwrap();
        assert_eq!(g, GroupElement::IDENTITY);
        let g = align_conjugator(GroupElement::I, GroupElement::J, 1e-9).unwrap();
        assert!(close(GroupElement::I.conjugated_by(g), GroupElement::J, 1e-12));
        assert!(matches!(
            align_conjugator(GroupElement::I, GroupElement::IDENTITY, 1e-9),
            Err(Error::TraceMismatch { .. })
        ));
        // anti-parallel axes
        let g = align_conjugator(GroupElement::I, -GroupElement::I, 1e-9).unwrap();
        assert!(close(GroupElement::I.conjugated_by(g), -GroupElement::I, 1e-12));
        let e = GroupElement::new(0.3, 0.4, 0.5, 0.6);
        let f = GroupElement::new(0.3, -0.4, -0.5, -0.6);
        let g = align_conjugator(e, f, 1e-9).unwrap();
        assert!(close(e.conjugated_by(g), f, 1e-12));
    }

    #[test]
    fn is_central_examples() {
        assert!(GroupElement::IDENTITY.is_central(1e-9));
        assert!(GroupElement::MINUS_IDENTITY.is_central(1e-9));
        assert!(!GroupElement::I.is_central(1e-9));
        assert!(exp_axis_angle([1.0, 0.0, 0.0], 1e-12).unwrap().is_central(1e-9));
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let u = haar_random(&mut rng);
            let mut acc = GroupElement::IDENTITY;
            for n in 0..12 {
                assert!(close(u.pow(n), acc, 1e-12));
                assert!(close(u.pow(-n), acc.inverse(), 1e-12));
                acc = acc * u;
            }
        }
        assert!(close(GroupElement::MINUS_IDENTITY.pow(3), GroupElement::MINUS_IDENTITY, 1e-15));
        assert!(close(GroupElement::MINUS_IDENTITY.pow(2), GroupElement::IDENTITY, 1e-15));
    }

    #[test]
    fn long_products_stay_on_the_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let factors: Vec<_> = (0..64).map(|_| haar_random(&mut rng)).collect();
        let mut acc = GroupElement::IDENTITY;
        for step in 0..1_000_000 {
            acc = acc * factors[step % factors.len()];
        }
        assert!((acc.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serializes_as_component_array() {
        let s = serde_json::to_string(&GroupElement::I).unwrap();
        assert_eq!(s, "[0.0,1.0,0.0,0.0]");
        let back: GroupElement = serde_json::from_str("[0.0,0.0,1.0,0.0]").unwrap();
        assert_eq!(back, GroupElement::J);
    }
}
