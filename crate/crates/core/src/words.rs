//! Free-group words over the mapping-torus generators and the action of
//! powers of the bounding-pair map on the surface generators.
//!
//! Words are stored run-length encoded as `(generator, exponent)` pairs and
//! composed left to right: `uv` means `u` is traversed first. Evaluation at a
//! representation multiplies the images in the same order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::GroupElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Tau,
    A1,
    B1,
    A2,
    B2,
    A3,
    B3,
}

impl Generator {
    pub const ALL: [Generator; 7] =
        [Generator::Tau, Generator::A1, Generator::B1, Generator::A2, Generator::B2, Generator::A3, Generator::B3];

    /// The six surface generators in standard order `a1 b1 a2 b2 a3 b3`.
    pub const SURFACE: [Generator; 6] =
        [Generator::A1, Generator::B1, Generator::A2, Generator::B2, Generator::A3, Generator::B3];

    pub fn symbol(self) -> &'static str {
        match self {
            Generator::Tau => "tau",
            Generator::A1 => "a1",
            Generator::B1 => "b1",
            Generator::A2 => "a2",
            Generator::B2 => "b2",
            Generator::A3 => "a3",
            Generator::B3 => "b3",
        }
    }

    /// Position among [`Generator::SURFACE`], `None` for `tau`.
    pub fn surface_index(self) -> Option<usize> {
        Generator::SURFACE.iter().position(|&g| g == self)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.symbol() == s)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{s}`")))
    }
}

/// A freely reduced word. Construction always reduces, so `==` is equality in
/// the free group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<(Generator, i64)>,
}

/// Merges adjacent runs and drops zero exponents.
pub fn free_reduce(letters: impl IntoIterator<Item = (Generator, i64)>) -> Word {
    let mut out: Vec<(Generator, i64)> = Vec::new();
    for (g, e) in letters {
        if e == 0 {
            continue;
        }
        match out.last_mut() {
            Some((last, exp)) if *last == g => {
                *exp += e;
                if *exp == 0 {
                    out.pop();
                }
            }
            _ => out.push((g, e)),
        }
    }
    Word { letters: out }
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn generator(g: Generator) -> Word {
        Word { letters: vec![(g, 1)] }
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (Generator, i64)>) -> Word {
        free_reduce(letters)
    }

    pub fn letters(&self) -> &[(Generator, i64)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of letters counted with multiplicity.
    pub fn len(&self) -> usize {
        self.letters.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, g: Generator) -> bool {
        self.letters.iter().any(|&(h, _)| h == g)
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        free_reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let reps = n.unsigned_abs() as usize;
        free_reduce(std::iter::repeat_n(base.letters.iter().copied(), reps).flatten())
    }

    /// `self · other · self⁻¹`.
    pub fn conjugate(&self, other: &Word) -> Word {
        self.concat(other).concat(&self.inverse())
    }
}

impl std::ops::Mul for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (idx, &(g, e)) in self.letters.iter().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            if e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            let (sym, exp) = match token.split_once('^') {
                Some((sym, exp)) => {
                    let e = exp.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in `{token}`")))?;
                    (sym, e)
                }
                None => (token, 1),
            };
            letters.push((sym.parse::<Generator>()?, exp));
        }
        Ok(free_reduce(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `∏ᵢ [aᵢ, bᵢ]`, the surface relator.
pub fn relator() -> Word {
    use Generator::*;
    Word::from_letters([
        (A1, 1),
        (B1, 1),
        (A1, -1),
        (B1, -1),
        (A2, 1),
        (B2, 1),
        (A2, -1),
        (B2, -1),
        (A3, 1),
        (B3, 1),
        (A3, -1),
        (B3, -1),
    ])
}

/// `[a3, b3]·a1`, the loop fixed by the bounding-pair map.
pub fn chi() -> Word {
    use Generator::*;
    Word::from_letters([(A3, 1), (B3, 1), (A3, -1), (B3, -1), (A1, 1)])
}

/// A homomorphism of the free group on the generators fixing `tau`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    images: [Word; 6],
}

impl Substitution {
    pub fn identity() -> Substitution {
        Substitution { images: Generator::SURFACE.map(Word::generator) }
    }

    /// Images of `a1 b1 a2 b2 a3 b3`, in that order.
    pub fn from_images(images: [Word; 6]) -> Substitution {
        Substitution { images }
    }

    pub fn image(&self, g: Generator) -> Word {
        match g.surface_index() {
            Some(i) => self.images[i].clone(),
            None => Word::generator(g),
        }
    }

    pub fn images(&self) -> &[Word; 6] {
        &self.images
    }

    /// Homomorphic image of `w`, freely reduced.
    pub fn apply(&self, w: &Word) -> Word {
        let mut letters = Vec::new();
        for &(g, e) in w.letters() {
            let img = self.image(g).pow(e);
            letters.extend_from_slice(img.letters());
        }
        free_reduce(letters)
    }
}

/// See [`Substitution::apply`].
pub fn apply_substitution(s: &Substitution, w: &Word) -> Word {
    s.apply(w)
}

/// `g ↦ s1(s2(g))`: apply `s2` first, then `s1`.
pub fn compose_substitution(s1: &Substitution, s2: &Substitution) -> Substitution {
    Substitution { images: Generator::SURFACE.map(|g| s1.apply(&s2.image(g))) }
}

/// Twist about the first curve of the bounding pair: only `b1` moves, to `b1 a1`.
pub fn first_curve_twist() -> Substitution {
    use Generator::*;
    let mut images = Generator::SURFACE.map(Word::generator);
    images[1] = Word::from_letters([(B1, 1), (A1, 1)]);
    Substitution::from_images(images)
}

pub fn first_curve_twist_inverse() -> Substitution {
    use Generator::*;
    let mut images = Generator::SURFACE.map(Word::generator);
    images[1] = Word::from_letters([(B1, 1), (A1, -1)]);
    Substitution::from_images(images)
}

/// Twist about the second curve, conjugating the `a1, a3, b3` side by `chi⁻¹`.
pub fn second_curve_twist() -> Substitution {
    let chi = chi();
    let chi_inv = chi.inverse();
    let g = Word::generator;
    Substitution::from_images([
        chi_inv.conjugate(&g(Generator::A1)),
        g(Generator::B1).concat(&chi),
        g(Generator::A2),
        g(Generator::B2),
        chi_inv.conjugate(&g(Generator::A3)),
        chi_inv.conjugate(&g(Generator::B3)),
    ])
}

pub fn second_curve_twist_inverse() -> Substitution {
    let chi = chi();
    let g = Word::generator;
    Substitution::from_images([
        chi.conjugate(&g(Generator::A1)),
        g(Generator::B1).concat(&chi.inverse()),
        g(Generator::A2),
        g(Generator::B2),
        chi.conjugate(&g(Generator::A3)),
        chi.conjugate(&g(Generator::B3)),
    ])
}

/// Action of the `n`-th power of the bounding-pair map on the surface generators.
///
/// For `n ≥ 0` this is the closed-form table; negative powers compose the
/// inverse map (second twist after the inverse first twist) `|n|` times.
pub fn phi_substitution(n: i64) -> Substitution {
    if n < 0 {
        let step = compose_substitution(&second_curve_twist(), &first_curve_twist_inverse());
        return (0..n.unsigned_abs()).fold(Substitution::identity(), |acc, _| compose_substitution(&step, &acc));
    }
    let chi_n = chi().pow(n);
    let g = Word::generator;
    Substitution::from_images([
        chi_n.conjugate(&g(Generator::A1)),
        g(Generator::B1).concat(&g(Generator::A1).pow(n)).concat(&chi_n.inverse()),
        g(Generator::A2),
        g(Generator::B2),
        chi_n.conjugate(&g(Generator::A3)),
        chi_n.conjugate(&g(Generator::B3)),
    ])
}

/// Anything that assigns group elements to generators.
pub trait Representation {
    /// Image of `g`; `None` when the representation has no value for it.
    fn image(&self, g: Generator) -> Option<GroupElement>;
}

/// Product of generator images, left to right, exponents applied by exact powers.
pub fn evaluate<R: Representation + ?Sized>(w: &Word, rep: &R) -> Result<GroupElement> {
    let mut acc = GroupElement::IDENTITY;
    for &(g, e) in w.letters() {
        let img = rep.image(g).ok_or(Error::MissingTau)?;
        acc = acc * img.pow(e);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Generator::*;

    #[test]
    fn free_reduction_examples() {
        assert!(Word::from_letters([(A1, 1), (A1, -1)]).is_identity());
        assert_eq!(Word::from_letters([(A1, 1), (A1, 2)]), Word::from_letters([(A1, 3)]));
        assert!(chi().concat(&chi().inverse()).is_identity());
        let w = Word::from_letters([(A1, 1), (B1, 2), (B1, -2), (A1, -1), (A2, 0)]);
        assert!(w.is_identity());
    }

    #[test]
    fn text_form_round_trip() {
        let w: Word = "a1 b1^-1 a3^2".parse().unwrap();
        assert_eq!(w.to_string(), "a1 b1^-1 a3^2");
        assert_eq!(Word::identity().to_string(), "1");
        assert_eq!("1".parse::<Word>().unwrap(), Word::identity());
        assert_eq!(chi().to_string(), "a3 b3 a3^-1 b3^-1 a1");
        assert!("a4".parse::<Word>().is_err());
        assert!("a1^x".parse::<Word>().is_err());
    }

    #[test]
    fn relator_and_chi_shapes() {
        assert_eq!(relator().len(), 12);
        assert_eq!(chi(), "a3 b3 a3^-1 b3^-1 a1".parse().unwrap());
    }

    #[test]
    fn phi_one_table_rows() {
        let phi = phi_substitution(1);
        assert_eq!(phi.image(B2), Word::generator(B2));
        assert_eq!(phi.image(A2), Word::generator(A2));
        let expected_b1 = Word::from_letters([(B1, 1), (A1, 1)]).concat(&chi().inverse());
        assert_eq!(phi.image(B1), expected_b1);
        assert_eq!(phi.image(A3), chi().conjugate(&Word::generator(A3)));
        assert_eq!(phi.image(Tau), Word::generator(Tau));
    }

    #[test]
    fn phi_one_is_twist_composite() {
        let composite = compose_substitution(&first_curve_twist(), &second_curve_twist_inverse());
        assert_eq!(composite, phi_substitution(1));
    }

    #[test]
    fn twists_are_mutually_inverse() {
        let id = Substitution::identity();
        assert_eq!(compose_substitution(&first_curve_twist(), &first_curve_twist_inverse()), id);
        assert_eq!(compose_substitution(&second_curve_twist(), &second_curve_twist_inverse()), id);
        assert_eq!(compose_substitution(&second_curve_twist_inverse(), &second_curve_twist()), id);
    }

    #[test]
    fn phi_zero_and_identity_substitution() {
        assert_eq!(phi_substitution(0), Substitution::identity());
        let w: Word = "a1 b1 b1^-1 a3^2".parse().unwrap();
        assert_eq!(Substitution::identity().apply(&w), w);
    }

    #[test]
    fn composition_examples() {
        let id = Substitution::identity();
        let s = phi_substitution(3);
        assert_eq!(compose_substitution(&id, &s), s);
        assert_eq!(compose_substitution(&phi_substitution(1), &phi_substitution(-1)), id);
        assert_eq!(compose_substitution(&phi_substitution(1), &phi_substitution(1)), phi_substitution(2));
        assert_eq!(compose_substitution(&phi_substitution(2), &phi_substitution(3)), phi_substitution(5));
    }

    #[test]
    fn chi_is_fixed() {
        for n in -8..=8 {
            assert_eq!(phi_substitution(n).apply(&chi()), chi(), "n = {n}");
        }
    }

    #[test]
    fn power_law() {
        for m in -4..=4 {
            for n in -4..=4 {
                let lhs = phi_substitution(m + n);
                let rhs = compose_substitution(&phi_substitution(m), &phi_substitution(n));
                assert_eq!(lhs, rhs, "m = {m}, n = {n}");
            }
        }
    }

    #[test]
    fn negative_powers_follow_the_closed_form() {
        // The n >= 0 table, read with negative n, matches the composed inverse.
        for n in 1..=4i64 {
            let chi_n = chi().pow(-n);
            let phi = phi_substitution(-n);
            assert_eq!(phi.image(A1), chi_n.conjugate(&Word::generator(A1)));
            let b1 = Word::generator(B1).concat(&Word::generator(A1).pow(-n)).concat(&chi_n.inverse());
            assert_eq!(phi.image(B1), b1);
        }
    }

    struct Fixed([GroupElement; 6]);

    impl Representation for Fixed {
        fn image(&self, g: Generator) -> Option<GroupElement> {
            g.surface_index().map(|i| self.0[i])
        }
    }

    #[test]
    fn evaluation_basics() {
        let rep = Fixed([
            GroupElement::I,
            GroupElement::J,
            GroupElement::K,
            GroupElement::IDENTITY,
            GroupElement::IDENTITY,
            GroupElement::IDENTITY,
        ]);
        assert_eq!(evaluate(&Word::identity(), &rep).unwrap(), GroupElement::IDENTITY);
        assert!(evaluate(&chi(), &rep).unwrap().distance(GroupElement::I) < 1e-15);
        assert_eq!(evaluate(&Word::generator(Tau), &rep), Err(Error::MissingTau));
    }
}
