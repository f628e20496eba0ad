//! Representation tuples, the defining equation systems, and solvers that
//! push tuples onto the solution sets.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::commutator::random_fiber_point;
use crate::error::{Error, Result};
use crate::lsq;
use crate::su2::{commutator, haar_random, nan_max, GroupElement};
use crate::words::{evaluate, phi_substitution, Generator, Representation};

/// Images of `α₁, β₁, α₂, β₂, α₃, β₃`, stored as `a[i] = Aᵢ₊₁`, `b[i] = Bᵢ₊₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRep {
    pub a: [GroupElement; 3],
    pub b: [GroupElement; 3],
}

impl SurfaceRep {
    pub fn trivial() -> SurfaceRep {
        SurfaceRep { a: [GroupElement::IDENTITY; 3], b: [GroupElement::IDENTITY; 3] }
    }

    pub fn from_pairs(pairs: [(GroupElement, GroupElement); 3]) -> SurfaceRep {
        SurfaceRep { a: pairs.map(|p| p.0), b: pairs.map(|p| p.1) }
    }

    pub fn pair(&self, i: usize) -> (GroupElement, GroupElement) {
        (self.a[i], self.b[i])
    }

    /// The six images in generator order.
    pub fn images(&self) -> [GroupElement; 6] {
        [self.a[0], self.b[0], self.a[1], self.b[1], self.a[2], self.b[2]]
    }

    pub fn from_images(g: [GroupElement; 6]) -> SurfaceRep {
        SurfaceRep { a: [g[0], g[2], g[4]], b: [g[1], g[3], g[5]] }
    }

    /// Simultaneous conjugation `g·ρ·g⁻¹`.
    pub fn conjugated_by(&self, g: GroupElement) -> SurfaceRep {
        SurfaceRep::from_images(self.images().map(|u| u.conjugated_by(g)))
    }
}

impl Representation for SurfaceRep {
    fn image(&self, g: Generator) -> Option<GroupElement> {
        g.surface_index().map(|i| self.images()[i])
    }
}

/// A point `(T, ρ)` of the mapping-torus system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusRep {
    pub t: GroupElement,
    pub rep: SurfaceRep,
}

impl TorusRep {
    pub fn new(t: GroupElement, rep: SurfaceRep) -> TorusRep {
        TorusRep { t, rep }
    }

    /// The embedding `ρ ↦ (1, ρ)`.
    pub fn from_surface(rep: SurfaceRep) -> TorusRep {
        TorusRep { t: GroupElement::IDENTITY, rep }
    }

    pub fn trivial() -> TorusRep {
        TorusRep::from_surface(SurfaceRep::trivial())
    }

    pub fn coords(&self) -> [GroupElement; 7] {
        let g = self.rep.images();
        [self.t, g[0], g[1], g[2], g[3], g[4], g[5]]
    }

    pub fn from_coords(c: &[GroupElement]) -> TorusRep {
        TorusRep { t: c[0], rep: SurfaceRep::from_images([c[1], c[2], c[3], c[4], c[5], c[6]]) }
    }

    pub fn conjugated_by(&self, g: GroupElement) -> TorusRep {
        TorusRep { t: self.t.conjugated_by(g), rep: self.rep.conjugated_by(g) }
    }
}

impl Representation for TorusRep {
    fn image(&self, g: Generator) -> Option<GroupElement> {
        match g {
            Generator::Tau => Some(self.t),
            _ => self.rep.image(g),
        }
    }
}

/// Which solution set a point is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Surface,
    Fix,
    Torus,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Surface => "surface",
            System::Fix => "fix",
            System::Torus => "torus",
        })
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<System> {
        match s {
            "surface" => Ok(System::Surface),
            "fix" => Ok(System::Fix),
            "torus" => Ok(System::Torus),
            _ => Err(Error::Parse(format!("unknown system {s:?}"))),
        }
    }
}

/// Per-equation residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<(String, f64)>,
    pub max: f64,
}

impl ResidualReport {
    fn from_equations(eqs: &[(&'static str, GroupElement, GroupElement)]) -> ResidualReport {
        let mut entries: Vec<(String, f64)> = Vec::new();
        for &(tag, lhs, rhs) in eqs {
            let r = lhs.distance(rhs);
            match entries.iter_mut().find(|e| e.0 == tag) {
                Some(e) => e.1 = nan_max(e.1, r),
                None => entries.push((tag.to_string(), r)),
            }
        }
        let max = entries.iter().map(|e| e.1).fold(0.0, nan_max);
        ResidualReport { entries, max }
    }

    pub fn get(&self, tag: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == tag).map(|e| e.1)
    }
}

/// `X = [A₃, B₃]·A₁`.
pub fn derived_x(rep: &SurfaceRep) -> GroupElement {
    commutator(rep.a[2], rep.b[2]) * rep.a[0]
}

fn relator_value(rep: &SurfaceRep) -> GroupElement {
    commutator(rep.a[0], rep.b[0]) * commutator(rep.a[1], rep.b[1]) * commutator(rep.a[2], rep.b[2])
}

type Equations = Vec<(&'static str, GroupElement, GroupElement)>;

fn surface_equations(rep: &SurfaceRep) -> Equations {
    vec![("relator", relator_value(rep), GroupElement::IDENTITY)]
}

fn fix_equations(rep: &SurfaceRep, n: i64) -> Equations {
    let x = derived_x(rep);
    let xn = x.pow(n);
    let conj = |u: GroupElement| xn * u * xn.inverse();
    vec![
        ("a1", conj(rep.a[0]), rep.a[0]),
        ("b1", rep.a[0].pow(n) * xn.inverse(), GroupElement::IDENTITY),
        ("a3", conj(rep.a[2]), rep.a[2]),
        ("b3", conj(rep.b[2]), rep.b[2]),
        ("relator", relator_value(rep), GroupElement::IDENTITY),
    ]
}

fn torus_equations(trep: &TorusRep, n: i64) -> Equations {
    let rep = &trep.rep;
    let t = trep.t;
    let xn = derived_x(rep).pow(n);
    let txn = t * xn;
    let one = GroupElement::IDENTITY;
    vec![
        ("relator", relator_value(rep), one),
        ("b", commutator(rep.a[0], txn), one),
        ("c", commutator(rep.b[0].inverse(), t.inverse()), rep.a[0].pow(n) * xn.inverse()),
        ("d", commutator(rep.a[1], t), one),
        ("d", commutator(rep.b[1], t), one),
        ("e", commutator(rep.a[2], txn), one),
        ("e", commutator(rep.b[2], txn), one),
    ]
}

fn system_equations(system: System, trep: &TorusRep, n: i64) -> Equations {
    match system {
        System::Surface => surface_equations(&trep.rep),
        System::Fix => fix_equations(&trep.rep, n),
        System::Torus => torus_equations(trep, n),
    }
}

/// `‖[A₁,B₁][A₂,B₂][A₃,B₃] − 1‖`.
pub fn surface_residual(rep: &SurfaceRep) -> ResidualReport {
    ResidualReport::from_equations(&surface_equations(rep))
}

/// Residuals of the fixed-point system of `Φⁿ` (tags `a1`, `b1`, `a3`, `b3`, `relator`).
pub fn fixed_point_residual(rep: &SurfaceRep, n: i64) -> ResidualReport {
    ResidualReport::from_equations(&fix_equations(rep, n))
}

/// Residuals of the mapping-torus system (tags `relator`, `b`, `c`, `d`, `e`).
///
/// Equation `b` is `[A₁, T·Xⁿ] = 1`, the form obtained from the relation
/// `τ⁻¹·α₁·τ = Φⁿ(α₁)`.
pub fn torus_residual(trep: &TorusRep, n: i64) -> ResidualReport {
    ResidualReport::from_equations(&torus_equations(trep, n))
}

/// Residual of `trep` for `system`; `T` is ignored for the surface systems.
pub fn system_residual(system: System, trep: &TorusRep, n: i64) -> ResidualReport {
    ResidualReport::from_equations(&system_equations(system, trep, n))
}

/// Haar-random `A₁, B₁, A₂, B₂` completed by a random point of the fiber
/// over `([A₁,B₁][A₂,B₂])⁻¹`.
pub fn random_surface_rep<R: Rng + ?Sized>(rng: &mut R) -> SurfaceRep {
    let p1 = (haar_random(rng), haar_random(rng));
    let p2 = (haar_random(rng), haar_random(rng));
    let c = (commutator(p1.0, p1.1) * commutator(p2.0, p2.1)).inverse();
    SurfaceRep::from_pairs([p1, p2, random_fiber_point(c, rng)])
}

/// Result of [`project_to_variety`].
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub rep: TorusRep,
    pub residual: f64,
    pub iterations: usize,
    /// Largest geodesic displacement of any coordinate.
    pub distance: f64,
}

/// Damped least squares onto the solution set of `system`. `T` moves only
/// for the torus system.
pub fn project_to_variety(start: &TorusRep, n: i64, system: System, tol: f64, max_iter: usize) -> Result<Projection> {
    let mut free = [true; 7];
    free[0] = system == System::Torus;
    let residual = |c: &[GroupElement]| {
        system_equations(system, &TorusRep::from_coords(c), n)
            .iter()
            .map(|&(_, l, r)| lsq::block(l, r))
            .collect::<lsq::Blocks>()
    };
    let coords = start.coords();
    let out = lsq::solve(&coords, &free, &residual, tol, max_iter);
    if !out.converged {
        return Err(Error::NotConverged { best: out.residual, iterations: out.iterations });
    }
    let distance = coords.iter().zip(&out.point).map(|(u, v)| u.geodesic_distance(*v)).fold(0.0, f64::max);
    Ok(Projection {
        rep: TorusRep::from_coords(&out.point),
        residual: out.residual,
        iterations: out.iterations,
        distance,
    })
}

const INTERTWINER_STARTS: [GroupElement; 5] =
    [GroupElement::IDENTITY, GroupElement::MINUS_IDENTITY, GroupElement::I, GroupElement::J, GroupElement::K];

/// Intertwiner gap `max_g ‖ρ(Φⁿ(g)) − T⁻¹ρ(g)T‖` for a given `T`.
pub fn intertwiner_gap(rep: &SurfaceRep, n: i64, t: GroupElement) -> f64 {
    let phi = phi_substitution(n);
    Generator::SURFACE
        .iter()
        .map(|&g| {
            let pulled = evaluate(&phi.image(g), rep).expect("surface word");
            let img = rep.image(g).expect("surface generator");
            pulled.distance(t.inverse() * img * t)
        })
        .fold(0.0, f64::max)
}

/// Finds `T` with `Φⁿ*ρ = T⁻¹ρT`, best over several starts.
pub fn solve_intertwiner(rep: &SurfaceRep, n: i64, tol: f64) -> Result<GroupElement> {
    let phi = phi_substitution(n);
    let targets: Vec<(GroupElement, GroupElement)> = Generator::SURFACE
        .iter()
        .map(|&g| (evaluate(&phi.image(g), rep).expect("surface word"), rep.image(g).expect("surface generator")))
        .collect();
    let residual = |c: &[GroupElement]| {
        let t = c[0];
        targets.iter().map(|&(p, img)| lsq::block(p, t.inverse() * img * t)).collect::<lsq::Blocks>()
    };
    let mut best: Option<(f64, GroupElement)> = None;
    for start in INTERTWINER_STARTS {
        let out = lsq::solve(&[start], &[true], &residual, tol, 200);
        if best.is_none_or(|(r, _)| out.residual < r) {
            best = Some((out.residual, out.point[0]));
        }
    }
    let (gap, t) = best.expect("nonempty starts");
    if gap < tol {
        Ok(t)
    } else {
        Err(Error::NoIntertwiner { gap })
    }
}

/// Shape of the stabilizer of `ρ` under conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CentralizerType {
    FullGroup,
    Circle,
    CenterOnly,
}

pub fn centralizer_type(rep: &SurfaceRep, tol: f64) -> CentralizerType {
    let g = rep.images();
    if g.iter().all(|u| u.is_central(tol)) {
        return CentralizerType::FullGroup;
    }
    let abelian = (0..6).all(|i| (i + 1..6).all(|j| commutator(g[i], g[j]).distance(GroupElement::IDENTITY) < tol));
    if abelian {
        CentralizerType::Circle
    } else {
        CentralizerType::CenterOnly
    }
}

pub const REP_FORMAT: &str = "repvar-1";

/// A representation file: `n`, optional `T`, and the six surface images.
#[derive(Clone, Debug, PartialEq)]
pub struct RepDocument {
    pub n: i64,
    pub t: Option<GroupElement>,
    pub rep: SurfaceRep,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepFile {
    format: String,
    n: i64,
    #[serde(rename = "T")]
    t: Option<[f64; 4]>,
    #[serde(rename = "A")]
    a: [[f64; 4]; 3],
    #[serde(rename = "B")]
    b: [[f64; 4]; 3],
}

fn unit_from(v: [f64; 4], what: &str) -> Result<GroupElement> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !v.iter().all(|x| x.is_finite()) || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Parse(format!("{what}: not a unit quaternion (norm {norm})")));
    }
    Ok(GroupElement::raw(v[0], v[1], v[2], v[3]))
}

impl RepDocument {
    pub fn surface(n: i64, rep: SurfaceRep) -> RepDocument {
        RepDocument { n, t: None, rep }
    }

    pub fn torus(n: i64, trep: TorusRep) -> RepDocument {
        RepDocument { n, t: Some(trep.t), rep: trep.rep }
    }

    pub fn torus_rep(&self) -> TorusRep {
        TorusRep { t: self.t.unwrap_or(GroupElement::IDENTITY), rep: self.rep }
    }

    pub(crate) fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(RepFile {
            format: REP_FORMAT.to_string(),
            n: self.n,
            t: self.t.map(|t| t.to_array()),
            a: self.rep.a.map(|u| u.to_array()),
            b: self.rep.b.map(|u| u.to_array()),
        })
        .expect("plain data")
    }

    pub(crate) fn from_value(v: serde_json::Value) -> Result<RepDocument> {
        let f: RepFile = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
        if f.format != REP_FORMAT {
            return Err(Error::Parse(format!("format: expected {REP_FORMAT:?}, found {:?}", f.format)));
        }
        let t = f.t.map(|t| unit_from(t, "T")).transpose()?;
        let mut a = [GroupElement::IDENTITY; 3];
        let mut b = [GroupElement::IDENTITY; 3];
        for i in 0..3 {
            a[i] = unit_from(f.a[i], &format!("A[{i}]"))?;
            b[i] = unit_from(f.b[i], &format!("B[{i}]"))?;
        }
        Ok(RepDocument { n: f.n, t, rep: SurfaceRep { a, b } })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<RepDocument> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        RepDocument::from_value(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutator::solve_commutator;
    use crate::su2::{exp_unchecked, random_axis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn abelian<R: Rng>(rng: &mut R) -> SurfaceRep {
        let axis = random_axis(rng);
        let mut g = [GroupElement::IDENTITY; 6];
        for u in &mut g {
            *u = exp_unchecked(axis, rng.random_range(-3.2..3.2));
        }
        SurfaceRep::from_images(g)
    }

    #[test]
    fn derived_x_examples() {
        assert_eq!(derived_x(&SurfaceRep::trivial()), GroupElement::IDENTITY);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rep = random_surface_rep(&mut rng);
        rep.a[2] = GroupElement::IDENTITY;
        rep.b[2] = GroupElement::IDENTITY;
        assert_eq!(derived_x(&rep), rep.a[0]);
        let rep = random_surface_rep(&mut rng);
        let g = haar_random(&mut rng);
        assert!((derived_x(&rep).trace() - derived_x(&rep.conjugated_by(g)).trace()).abs() < 1e-12);
    }

    #[test]
    fn surface_residual_examples() {
        assert_eq!(surface_residual(&SurfaceRep::trivial()).max, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert!(surface_residual(&random_surface_rep(&mut rng)).max < 1e-10);
        }
        // [A₂,B₂] ↦ −[A₂,B₂] by a half-turn on A₂ in the normal form.
        let (a, b) = solve_commutator(GroupElement::MINUS_IDENTITY);
        let rep = SurfaceRep::from_pairs([
            (GroupElement::IDENTITY, GroupElement::IDENTITY),
            (GroupElement::IDENTITY, GroupElement::IDENTITY),
            (a, b),
        ]);
        assert!((surface_residual(&rep).max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn abelian_reps_are_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let rep = abelian(&mut rng);
            for n in -8..=8 {
                assert!(fixed_point_residual(&rep, n).max < 1e-10);
            }
        }
        assert_eq!(fixed_point_residual(&SurfaceRep::trivial(), 5).max, 0.0);
    }

    #[test]
    fn torus_residual_examples() {
        assert_eq!(torus_residual(&TorusRep::trivial(), 3).max, 0.0);
        let t = TorusRep::new(GroupElement::I, SurfaceRep::trivial());
        let r = torus_residual(&t, 1);
        assert_eq!(r.get("c"), Some(0.0));
        assert_eq!(r.max, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let rep = abelian(&mut rng);
            for eps in [GroupElement::IDENTITY, GroupElement::MINUS_IDENTITY] {
                let f = fixed_point_residual(&rep, 2).max;
                assert!(torus_residual(&TorusRep::new(eps, rep), 2).max <= 2.0 * f.max(1e-12));
            }
        }
    }

    #[test]
    fn residuals_are_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let t = TorusRep::new(haar_random(&mut rng), random_surface_rep(&mut rng));
            let g = haar_random(&mut rng);
            let u = t.conjugated_by(g);
            for n in [-2, 1, 3] {
                for sys in [System::Surface, System::Fix, System::Torus] {
                    let (p, q) = (system_residual(sys, &t, n), system_residual(sys, &u, n));
                    for (x, y) in p.entries.iter().zip(&q.entries) {
                        assert!((x.1 - y.1).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn torus_equations_match_word_relations() {
        // (T, ρ) solves the torus system iff ρ(Φⁿ(g)) = T⁻¹ρ(g)T.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let a1 = haar_random(&mut rng);
            let b1 = haar_random(&mut rng);
            let n = rng.random_range(1..5);
            let (a3, b3) = (b1, a1);
            let t = b1 * a1.pow(-n) * b1.inverse();
            let axis = t.axis().unwrap();
            let a2 = exp_unchecked(axis, 0.3);
            let b2 = exp_unchecked(axis, -1.1);
            let rep = SurfaceRep::from_pairs([(a1, b1), (a2, b2), (a3, b3)]);
            assert!(torus_residual(&TorusRep::new(t, rep), n).max < 1e-10);
            assert!(intertwiner_gap(&rep, n, t) < 1e-10);
        }
    }

    #[test]
    fn projection_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let start = TorusRep::from_surface(random_surface_rep(&mut rng));
        let p = project_to_variety(&start, 1, System::Surface, 1e-9, 100).unwrap();
        assert_eq!(p.iterations, 0);
        assert_eq!(p.rep, start);
        let mut moved = start;
        for u in moved.rep.a.iter_mut().chain(moved.rep.b.iter_mut()) {
            *u = *u * exp_unchecked(random_axis(&mut rng), 1e-3);
        }
        let p = project_to_variety(&moved, 1, System::Surface, 1e-9, 100).unwrap();
        assert!(surface_residual(&p.rep.rep).max < 1e-9);
        let wild = TorusRep::from_coords(&[(); 7].map(|_| haar_random(&mut rng)));
        match project_to_variety(&wild, 1, System::Torus, 1e-9, 100) {
            Ok(p) => assert!(torus_residual(&p.rep, 1).max < 1e-9),
            Err(e) => assert!(matches!(e, Error::NotConverged { .. })),
        }
    }

    #[test]
    fn intertwiner_examples() {
        let rep = SurfaceRep::trivial();
        let t = solve_intertwiner(&rep, 2, 1e-9).unwrap();
        assert!(intertwiner_gap(&rep, 2, t) < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let err = solve_intertwiner(&random_surface_rep(&mut rng), 1, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NoIntertwiner { gap } if gap > 1e-3));
    }

    #[test]
    fn centralizer_examples() {
        assert_eq!(centralizer_type(&SurfaceRep::trivial(), 1e-9), CentralizerType::FullGroup);
        let rep = SurfaceRep::from_images([
            GroupElement::I,
            GroupElement::IDENTITY,
            GroupElement::MINUS_IDENTITY,
            -GroupElement::I,
            GroupElement::I,
            GroupElement::IDENTITY,
        ]);
        assert_eq!(centralizer_type(&rep, 1e-9), CentralizerType::Circle);
        let (a, b) = solve_commutator(GroupElement::MINUS_IDENTITY);
        let rep = SurfaceRep::from_pairs([(a, b), (a, b), (GroupElement::IDENTITY, GroupElement::IDENTITY)]);
        assert_eq!(centralizer_type(&rep, 1e-9), CentralizerType::CenterOnly);
    }

    #[test]
    fn rep_file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let doc = RepDocument::torus(3, TorusRep::new(haar_random(&mut rng), random_surface_rep(&mut rng)));
        let back = RepDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back.n, 3);
        assert!(back.t.unwrap().distance(doc.t.unwrap()) < 1e-15);
        let doc = RepDocument::surface(-2, SurfaceRep::trivial());
        assert!(doc.to_json().contains("\"T\": null"));
        assert_eq!(RepDocument::from_json(&doc.to_json()).unwrap(), doc);
        assert!(RepDocument::from_json("{\"format\":\"repvar-0\"}").is_err());
        let bad = doc.to_json().replace("1.0", "2.0");
        assert!(RepDocument::from_json(&bad).is_err());
    }
}
