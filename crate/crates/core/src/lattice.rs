//! Exact model of the second homology of the n-fold blow-up of the projective
//! plane.
//!
//! Every class is stored as `(a0; a1, ..., an)` and denotes
//! `a0 L - a1 E1 - ... - an En`. With this convention the exceptional class
//! `E1` is stored as `(0; -1, 0, ..., 0)` and the area of `Ei` under the
//! blow-up form of capacities `delta` is `delta_i`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational scalar used for every non-integral coefficient.
pub type Rational = BigRational;

pub const MAX_BALLS: usize = 12;

/// Weights of the simple roots `r0, ..., r8` in the expansion of `D9`.
pub const D9_MULTIPLICITIES: [i64; 9] = [3, 2, 4, 6, 5, 4, 3, 2, 1];

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `p/q` or `p`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        Ok(Rational::new(p, q))
    } else {
        BigInt::from_str(t).map(Rational::from_integer).map_err(|_| Error::Parse(format!("bad rational `{t}`")))
    }
}

pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BALLS {
        Err(Error::InvalidBallCount(n))
    } else {
        Ok(())
    }
}

fn check_same(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(Error::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

/// Splits `(a0; a1,...,an)` into its coefficient strings.
fn split_class(s: &str) -> Result<(String, Vec<String>)> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("class `{t}` must look like (a0; a1,...,an)")))?;
    let (head, tail) = inner.split_once(';').ok_or_else(|| Error::Parse(format!("class `{t}` is missing `;`")))?;
    let rest: Vec<String> = tail.split(',').map(|x| x.trim().to_string()).collect();
    if rest.iter().any(|x| x.is_empty()) {
        return Err(Error::Parse(format!("class `{t}` has an empty coefficient")));
    }
    check_n(rest.len())?;
    Ok((head.trim().to_string(), rest))
}

/// Integral class `a0 L - sum ai Ei`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HClass {
    a0: i64,
    a: Vec<i64>,
}

impl HClass {
    pub fn new(a0: i64, a: Vec<i64>) -> Result<Self> {
        check_n(a.len())?;
        Ok(HClass { a0, a })
    }

    /// Unchecked constructor for internal use where `n` is known to be valid.
    pub(crate) fn raw(a0: i64, a: Vec<i64>) -> Self {
        debug_assert!(!a.is_empty() && a.len() <= MAX_BALLS);
        HClass { a0, a }
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(0, vec![0; n])
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(1, vec![0; n])
    }

    /// The exceptional class `Ei` (1-based).
    pub fn exceptional(n: usize, i: usize) -> Result<Self> {
        check_n(n)?;
        if i == 0 || i > n {
            return Err(Error::InvalidIndexSet(format!("E{i} does not exist for n = {n}")));
        }
        let mut a = vec![0; n];
        a[i - 1] = -1;
        Ok(HClass { a0: 0, a })
    }

    /// `D_n = 3L - (E1 + ... + En)`, the Poincare dual of `c1`.
    pub fn anticanonical(n: usize) -> Result<Self> {
        Self::new(3, vec![1; n])
    }

    pub fn d9() -> Self {
        HClass::raw(3, vec![1; 9])
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a0(&self) -> i64 {
        self.a0
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn self_intersection(&self) -> i64 {
        self.a0 * self.a0 - self.a.iter().map(|x| x * x).sum::<i64>()
    }

    /// `c1(A) = A . D_n = 3 a0 - sum ai`.
    pub fn c1(&self) -> i64 {
        3 * self.a0 - self.a.iter().sum::<i64>()
    }

    pub fn scaled(&self, k: i64) -> Self {
        HClass { a0: k * self.a0, a: self.a.iter().map(|x| k * x).collect() }
    }

    pub fn to_pd(&self) -> PDClass {
        PDClass { c0: int(self.a0), c: self.a.iter().map(|&x| int(x)).collect() }
    }

    /// Coefficients `(a1, ..., an)` viewed as a vector in capacity space.
    pub fn normal(&self) -> Vec<Rational> {
        self.a.iter().map(|&x| int(x)).collect()
    }
}

impl Add for &HClass {
    type Output = HClass;
    /// Panics if the ball counts differ.
    fn add(self, rhs: &HClass) -> HClass {
        assert_eq!(self.n(), rhs.n(), "adding classes of different rank");
        HClass { a0: self.a0 + rhs.a0, a: self.a.iter().zip(&rhs.a).map(|(x, y)| x + y).collect() }
    }
}

impl Sub for &HClass {
    type Output = HClass;
    fn sub(self, rhs: &HClass) -> HClass {
        self + &(-rhs)
    }
}

impl Neg for &HClass {
    type Output = HClass;
    fn neg(self) -> HClass {
        self.scaled(-1)
    }
}

impl fmt::Display for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; ", self.a0)?;
        for (i, x) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for HClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = split_class(s)?;
        let parse_int = |t: &str| -> Result<i64> {
            let q = parse_rational(t)?;
            if !q.is_integer() {
                return Err(Error::Parse(format!("homology coefficient `{t}` is not an integer")));
            }
            i64::try_from(q.to_integer()).map_err(|_| Error::Parse(format!("coefficient `{t}` overflows")))
        };
        let a0 = parse_int(&head)?;
        let a = rest.iter().map(|t| parse_int(t)).collect::<Result<Vec<_>>>()?;
        HClass::new(a0, a)
    }
}

#[derive(Serialize, Deserialize)]
struct ClassJson {
    a0: String,
    a: Vec<String>,
}

impl Serialize for HClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassJson { a0: self.a0.to_string(), a: self.a.iter().map(|x| x.to_string()).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ClassJson::deserialize(d)?;
        let text = format!("({}; {})", raw.a0, raw.a.join(","));
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Rational class `c0 L - sum ci Ei`, the Poincare dual of a (possibly
/// unnormalized) blow-up form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PDClass {
    c0: Rational,
    c: Vec<Rational>,
}

impl PDClass {
    pub fn new(c0: Rational, c: Vec<Rational>) -> Result<Self> {
        check_n(c.len())?;
        Ok(PDClass { c0, c })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn c0(&self) -> &Rational {
        &self.c0
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    /// Intersection pairing with an integral class.
    pub fn pairing(&self, a: &HClass) -> Result<Rational> {
        check_same(self.n(), a.n())?;
        // accumulate over a common denominator, reducing once
        let den = self.c.iter().fold(self.c0.denom().clone(), |acc, x| acc.lcm(x.denom()));
        let term = |x: &Rational, k: i64| x.numer() * (&den / x.denom()) * k;
        let mut acc = term(&self.c0, a.a0);
        for (ci, &ai) in self.c.iter().zip(&a.a) {
            if ai != 0 {
                acc -= term(ci, ai);
            }
        }
        Ok(Rational::new(acc, den))
    }

    /// Self-pairing `c0^2 - sum ci^2`.
    pub fn square(&self) -> Rational {
        self.c.iter().fold(&self.c0 * &self.c0, |acc, x| acc - x * x)
    }

    /// `self + t * a`.
    pub fn add_scaled(&self, t: &Rational, a: &HClass) -> Result<PDClass> {
        check_same(self.n(), a.n())?;
        Ok(PDClass {
            c0: &self.c0 + t * BigInt::from(a.a0),
            c: self.c.iter().zip(&a.a).map(|(x, &y)| x + t * BigInt::from(y)).collect(),
        })
    }

    /// Membership in the reduced chamber: `c0 >= c1 + c2 + c3` and
    /// `c1 >= ... >= c9 > 0`. Always false unless `n = 9`.
    pub fn is_reduced(&self) -> bool {
        if self.n() != 9 {
            return false;
        }
        let c = &self.c;
        self.c0 >= &c[0] + &c[1] + &c[2] && c.windows(2).all(|w| w[0] >= w[1]) && c[8].is_positive()
    }
}

impl fmt::Display for PDClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; ", self.c0)?;
        for (i, x) in self.c.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for PDClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = split_class(s)?;
        let c0 = parse_rational(&head)?;
        let c = rest.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>>>()?;
        PDClass::new(c0, c)
    }
}

impl Serialize for PDClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassJson { a0: self.c0.to_string(), a: self.c.iter().map(|x| x.to_string()).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PDClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ClassJson::deserialize(d)?;
        let text = format!("({}; {})", raw.a0, raw.a.join(","));
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Ball capacities `(delta_1, ..., delta_n)`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CapacityVector {
    delta: Vec<Rational>,
}

impl CapacityVector {
    pub fn new(delta: Vec<Rational>) -> Result<Self> {
        check_n(delta.len())?;
        if let Some((index, value)) = delta.iter().enumerate().find(|(_, d)| !d.is_positive()) {
            return Err(Error::NonPositiveCapacity { index: index + 1, value: value.to_string() });
        }
        Ok(CapacityVector { delta })
    }

    /// `n` copies of the same capacity.
    pub fn uniform(n: usize, value: Rational) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn n(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &[Rational] {
        &self.delta
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.delta
    }

    pub fn sum(&self) -> Rational {
        self.delta.iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    /// `PD[omega_delta] = L - sum delta_i E_i`.
    pub fn pd_class(&self) -> PDClass {
        PDClass { c0: Rational::one(), c: self.delta.clone() }
    }

    /// `omega_delta(A) = a0 - sum delta_i a_i`.
    pub fn area(&self, a: &HClass) -> Result<Rational> {
        check_same(self.n(), a.n())?;
        let mut acc = int(a.a0);
        for (d, &ai) in self.delta.iter().zip(&a.a) {
            acc -= d * BigInt::from(ai);
        }
        Ok(acc)
    }

    /// Largest `|delta_i - 1/3|`.
    pub fn sup_distance_to_monotone(&self) -> Rational {
        let third = rational(1, 3);
        self.delta.iter().map(|d| (d - &third).abs()).max().unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for CapacityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.delta.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for CapacityVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let delta = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        CapacityVector::new(delta)
    }
}

impl Serialize for CapacityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.delta.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CapacityVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.join(",").parse().map_err(serde::de::Error::custom)
    }
}

/// Characteristic numbers of a class on the 9-fold blow-up.
///
/// For integral classes `A.A` and `c1(A)` always have the same parity
/// (`x^2 = x mod 2`), so `k(A)` and the genus defect are integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInvariants {
    pub self_int: i64,
    pub c1: i64,
    /// `k(A) = (A.A + c1(A)) / 2`.
    pub k: i64,
    /// Adjunction bound `1 + (A.A - c1(A)) / 2`.
    pub genus_defect: i64,
    /// `2 - 2 c1(A)`.
    pub codim: i64,
}

/// `A . B = a0 b0 - sum ai bi`.
pub fn intersect(a: &HClass, b: &HClass) -> Result<i64> {
    check_same(a.n(), b.n())?;
    Ok(a.a0 * b.a0 - a.a.iter().zip(&b.a).map(|(x, y)| x * y).sum::<i64>())
}

pub fn class_invariants(a: &HClass) -> Result<ClassInvariants> {
    if a.n() != 9 {
        return Err(Error::RequiresNineBalls(a.n()));
    }
    let self_int = a.self_intersection();
    let c1 = a.c1();
    debug_assert_eq!((self_int - c1).rem_euclid(2), 0);
    Ok(ClassInvariants {
        self_int,
        c1,
        k: (self_int + c1) / 2,
        genus_defect: 1 + (self_int - c1) / 2,
        codim: 2 - 2 * c1,
    })
}

/// `omega(A)` for the form whose Poincare dual is `pd`.
pub fn area(pd: &PDClass, a: &HClass) -> Result<Rational> {
    pd.pairing(a)
}

/// Reflection in the (-2)-class `root`: `B + (root . B) root`.
pub fn reflect(root: &HClass, b: &HClass) -> Result<HClass> {
    let sq = root.self_intersection();
    if sq != -2 {
        return Err(Error::NotARoot(sq));
    }
    let t = intersect(root, b)?;
    Ok(b + &root.scaled(t))
}

/// Simple roots `r0 = L - E1 - E2 - E3`, `ri = Ei - E(i+1)`, together with `D9`.
pub fn simple_roots() -> ([HClass; 9], HClass) {
    let roots = std::array::from_fn(|i| {
        let mut a = vec![0; 9];
        if i == 0 {
            a[..3].fill(1);
            HClass::raw(1, a)
        } else {
            a[i - 1] = -1;
            a[i] = 1;
            HClass::raw(0, a)
        }
    });
    (roots, HClass::d9())
}

/// `sum_i weights[i] * roots[i]`.
pub fn combine(weights: &[i64], roots: &[HClass]) -> Result<HClass> {
    let first = roots.first().ok_or_else(|| Error::Parse("no classes to combine".into()))?;
    if weights.len() != roots.len() {
        return Err(Error::LengthMismatch { expected: roots.len(), got: weights.len() });
    }
    let mut acc = HClass::zero(first.n())?;
    for (w, r) in weights.iter().zip(roots) {
        check_same(acc.n(), r.n())?;
        acc = &acc + &r.scaled(*w);
    }
    Ok(acc)
}

/// One letter of a Cremona reduction word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CremonaMove {
    /// Reorders the exceptional coefficients; entry `j` is the (1-based)
    /// index that moved into position `j + 1`.
    Permute(Vec<usize>),
    /// The quadratic transformation based at the first three points,
    /// i.e. reflection in `r0`.
    Quadratic,
}

impl fmt::Display for CremonaMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CremonaMove::Quadratic => write!(f, "r0"),
            CremonaMove::Permute(p) => {
                let idx: Vec<String> = p.iter().map(|i| i.to_string()).collect();
                write!(f, "sort[{}]", idx.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CremonaReduction {
    pub class: PDClass,
    pub word: Vec<CremonaMove>,
    /// False when the run stopped because a coefficient became non-positive.
    pub reduced: bool,
}

/// Sorts and applies quadratic transformations until the class is reduced
/// or some coefficient is no longer positive.
///
/// Each quadratic move replaces `c0` by `2 c0 - c1 - c2 - c3 < c0`, and all
/// coefficients stay in a fixed lattice `(1/N) Z`, so the loop terminates.
pub fn cremona_reduce(pd: &PDClass) -> Result<CremonaReduction> {
    if pd.n() != 9 {
        return Err(Error::RequiresNineBalls(pd.n()));
    }
    if !pd.c0.is_positive() {
        return Err(Error::NonPositiveLineCoefficient(pd.c0.to_string()));
    }
    let mut c0 = pd.c0.clone();
    let mut c = pd.c.clone();
    let mut word = Vec::new();
    loop {
        let mut order: Vec<usize> = (0..9).collect();
        // stable: ties keep index order
        order.sort_by(|&i, &j| c[j].cmp(&c[i]));
        if order.iter().enumerate().any(|(pos, &i)| pos != i) {
            c = order.iter().map(|&i| c[i].clone()).collect();
            word.push(CremonaMove::Permute(order.iter().map(|i| i + 1).collect()));
        }
        if !c0.is_positive() || !c[8].is_positive() {
            break;
        }
        let s = &c[0] + &c[1] + &c[2];
        if s <= c0 {
            break;
        }
        let (x1, x2, x3) = (c[0].clone(), c[1].clone(), c[2].clone());
        c[0] = &c0 - &x2 - &x3;
        c[1] = &c0 - &x1 - &x3;
        c[2] = &c0 - &x1 - &x2;
        c0 = &c0 + &c0 - s;
        word.push(CremonaMove::Quadratic);
    }
    let class = PDClass { c0, c };
    let reduced = class.is_reduced();
    Ok(CremonaReduction { class, word, reduced })
}

/// `D9(I) = 3L - sum_{i not in I} Ei` in the rank `n + 1` lattice, for
/// `|I| = n - 9` (1-based indices).
pub fn d9_generalized(n: usize, excluded: &[usize]) -> Result<HClass> {
    check_n(n)?;
    if n < 9 {
        return Err(Error::InvalidIndexSet(format!("n = {n} is below 9")));
    }
    if excluded.len() != n - 9 {
        return Err(Error::InvalidIndexSet(format!("expected {} excluded indices, got {}", n - 9, excluded.len())));
    }
    let mut a = vec![1; n];
    for &i in excluded {
        if i == 0 || i > n {
            return Err(Error::InvalidIndexSet(format!("index {i} outside 1..={n}")));
        }
        if a[i - 1] == 0 {
            return Err(Error::InvalidIndexSet(format!("index {i} repeated")));
        }
        a[i - 1] = 0;
    }
    HClass::new(3, a)
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::negative_classes::enumerate_neg2_roots;
    use proptest::prelude::*;

    fn arb_class() -> impl Strategy<Value = HClass> {
        (-20i64..=20, proptest::collection::vec(-20i64..=20, 9)).prop_map(|(a0, a)| HClass::new(a0, a).unwrap())
    }

    fn arb_capacities() -> impl Strategy<Value = CapacityVector> {
        proptest::collection::vec((1i64..=60, 1i64..=60), 9)
            .prop_map(|v| CapacityVector::new(v.into_iter().map(|(p, q)| rational(p, q * 10)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn intersection_is_symmetric_and_bilinear(a in arb_class(), b in arb_class(), c in arb_class(), k in -5i64..=5) {
            prop_assert_eq!(intersect(&a, &b).unwrap(), intersect(&b, &a).unwrap());
            let lhs = intersect(&(&a.scaled(k) + &b), &c).unwrap();
            prop_assert_eq!(lhs, k * intersect(&a, &c).unwrap() + intersect(&b, &c).unwrap());
        }

        #[test]
        fn reflection_is_an_involutive_isometry(b in arb_class(), c in arb_class(), idx in 0usize..1044) {
            let roots = enumerate_neg2_roots(3).unwrap();
            let r = &roots[idx % roots.len()].cls;
            let rb = reflect(r, &b).unwrap();
            prop_assert_eq!(reflect(r, &rb).unwrap(), b.clone());
            let rc = reflect(r, &c).unwrap();
            prop_assert_eq!(intersect(&rb, &rc).unwrap(), intersect(&b, &c).unwrap());
            prop_assert_eq!(rb.c1(), b.c1());
        }

        #[test]
        fn area_matches_direct_formula(d in arb_capacities(), a in arb_class()) {
            let mut direct = int(a.a0());
            for (x, &ai) in d.delta().iter().zip(a.a()) {
                direct -= x * int(ai);
            }
            prop_assert_eq!(d.area(&a).unwrap(), direct.clone());
            prop_assert_eq!(d.pd_class().pairing(&a).unwrap(), direct);
        }

        #[test]
        fn cremona_terminates_and_is_idempotent(d in arb_capacities()) {
            let red = cremona_reduce(&d.pd_class()).unwrap();
            if red.reduced {
                prop_assert!(red.class.is_reduced());
                let again = cremona_reduce(&red.class).unwrap();
                prop_assert!(again.word.is_empty());
                prop_assert_eq!(again.class, red.class.clone());
            }
            // quadratic moves are isometries
            if red.class.c0() > &Rational::zero() {
                prop_assert_eq!(red.class.square(), d.pd_class().square());
            }
        }
    }
}
