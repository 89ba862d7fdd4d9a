//! Walls, chambers and wall-crossing sequences in the space of nine ball
//! capacities.
//!
//! A class `A` defines the wall `{delta : omega_delta(A) = 0}`. The walls
//! considered are the 437 classes of square at most -3 and the positive
//! (-2)-roots. Since `omega_delta(r + m D9) = omega_delta(r) + m omega_delta(D9)`,
//! only finitely many root walls can be non-positive at a point where
//! `omega_delta(D9) > 0`; [`level_bound`] computes how many levels matter.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{int, rational, simple_roots, CapacityVector, HClass, PDClass, Rational};
use crate::negative_classes::{
    classify_negative, enumerate_le_minus3, exceptional_representatives, is_positive_root, positive_roots_at_level,
    ElementaryRoot, FamilyTag,
};
use crate::numbers_game::{lattice_init, Strategy, E8_AFFINE_WEIGHTS};

pub const DEFAULT_MAX_A0: i64 = 30;
pub const DEFAULT_STEPS: usize = 200;

/// Evaluates areas at a fixed capacity vector using a common denominator,
/// so each evaluation is a single integer dot product.
pub struct AreaEvaluator {
    den: BigInt,
    num: Vec<BigInt>,
}

impl AreaEvaluator {
    pub fn new(delta: &CapacityVector) -> Self {
        let den = delta.delta().iter().fold(BigInt::one(), |acc, d| acc.lcm(d.denom()));
        let num = delta.delta().iter().map(|d| d.numer() * (&den / d.denom())).collect();
        AreaEvaluator { den, num }
    }

    /// `omega(A)` scaled by the common denominator.
    fn scaled(&self, a: &HClass) -> BigInt {
        let mut acc = &self.den * a.a0();
        for (x, &ai) in self.num.iter().zip(a.a()) {
            if ai != 0 {
                acc -= x * ai;
            }
        }
        acc
    }

    pub fn area(&self, a: &HClass) -> Rational {
        Rational::new(self.scaled(a), self.den.clone())
    }

    pub fn sign(&self, a: &HClass) -> i8 {
        let s = self.scaled(a);
        if s.is_positive() {
            1
        } else if s.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// A wall together with its family in the classification.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wall {
    pub class: HClass,
    pub family: FamilyTag,
}

impl Wall {
    pub fn new(class: HClass) -> Self {
        let family = classify_negative(&class);
        Wall { class, family }
    }

    pub fn is_root(&self) -> bool {
        self.family.is_root()
    }
}

impl fmt::Display for Wall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.class, self.family.name())
    }
}

fn le3_walls() -> impl Iterator<Item = Wall> {
    let le3 = enumerate_le_minus3();
    (0..le3.len()).map(move |i| Wall::new(le3[i].clone()))
}

fn root_walls(max_m: u32) -> impl Iterator<Item = Wall> {
    (0..=max_m).flat_map(|m| {
        positive_roots_at_level(m).into_iter().map(|r| Wall { family: FamilyTag::from(&r), class: r.cls })
    })
}

/// Classes of square at most -3 followed by positive roots of level `<= max_m`.
pub fn walls_up_to(max_m: u32) -> Vec<Wall> {
    le3_walls().chain(root_walls(max_m)).collect()
}

fn require_nine(n: usize) -> Result<()> {
    if n != 9 {
        Err(Error::RequiresNineBalls(n))
    } else {
        Ok(())
    }
}

/// Smallest `M` such that every positive root of level `m > M` has strictly
/// positive area at `delta`.
pub fn level_bound(delta: &CapacityVector) -> Result<u32> {
    require_nine(delta.n())?;
    let d9_area = delta.area(&HClass::d9())?;
    if !d9_area.is_positive() {
        return Err(Error::OutsideFiniteRegime(d9_area.to_string()));
    }
    let eval = AreaEvaluator::new(delta);
    let max_abs = ElementaryRoot::all()
        .iter()
        .filter(|r| !matches!(r, ElementaryRoot::MinusRijk(..)))
        .map(|r| eval.area(&r.class()).abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let ratio = (max_abs / d9_area).ceil().to_integer();
    ratio.to_u32().ok_or_else(|| Error::OutsideFiniteRegime("level bound overflows".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

/// Signs of all walls that can be non-positive at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChamberSignature {
    pub level_bound: u32,
    pub signs: BTreeMap<Wall, Sign>,
    pub on_wall: Vec<Wall>,
}

impl ChamberSignature {
    pub fn is_interior(&self) -> bool {
        self.on_wall.is_empty()
    }

    pub fn sign_of(&self, class: &HClass) -> Option<Sign> {
        self.signs.get(&Wall::new(class.clone())).copied()
    }

    pub fn negative_walls(&self) -> Vec<&Wall> {
        self.signs.iter().filter(|(_, s)| **s == Sign::Negative).map(|(w, _)| w).collect()
    }
}

fn signature_at_level(delta: &CapacityVector, level: u32) -> ChamberSignature {
    let eval = AreaEvaluator::new(delta);
    let mut signs = BTreeMap::new();
    let mut on_wall = Vec::new();
    for wall in le3_walls().chain(root_walls(level)) {
        match eval.sign(&wall.class) {
            1 => {
                signs.insert(wall, Sign::Positive);
            }
            -1 => {
                signs.insert(wall, Sign::Negative);
            }
            _ => on_wall.push(wall),
        }
    }
    ChamberSignature { level_bound: level, signs, on_wall }
}

pub fn chamber_signature(delta: &CapacityVector) -> Result<ChamberSignature> {
    let level = level_bound(delta)?;
    Ok(signature_at_level(delta, level))
}

/// Walls with strictly opposite signs at `d1` and `d2`, checked over the
/// larger of the two level bounds. Errors if a wall passes through either
/// endpoint.
pub fn separating_walls(d1: &CapacityVector, d2: &CapacityVector) -> Result<Vec<Wall>> {
    let level = level_bound(d1)?.max(level_bound(d2)?);
    let (e1, e2) = (AreaEvaluator::new(d1), AreaEvaluator::new(d2));
    let mut out = Vec::new();
    for wall in le3_walls().chain(root_walls(level)) {
        let (s1, s2) = (e1.sign(&wall.class), e2.sign(&wall.class));
        if s1 == 0 || s2 == 0 {
            let point = if s1 == 0 { d1 } else { d2 };
            return Err(Error::OnWall { wall: wall.to_string(), point: point.to_string() });
        }
        if s1 != s2 {
            out.push(wall);
        }
    }
    Ok(out)
}

/// Root walls with opposite signs at two points. Walls of square at most -3
/// are ignored; a root wall through either point is an error.
fn root_sign_changes(d1: &CapacityVector, d2: &CapacityVector) -> Result<Vec<Wall>> {
    let level = level_bound(d1)?.max(level_bound(d2)?);
    let (e1, e2) = (AreaEvaluator::new(d1), AreaEvaluator::new(d2));
    let mut out = Vec::new();
    for wall in root_walls(level) {
        let (s1, s2) = (e1.sign(&wall.class), e2.sign(&wall.class));
        if s1 == 0 || s2 == 0 {
            let point = if s1 == 0 { d1 } else { d2 };
            return Err(Error::OnWall { wall: wall.to_string(), point: point.to_string() });
        }
        if s1 != s2 {
            out.push(wall);
        }
    }
    Ok(out)
}

/// `pd + omega(A) A`, the image of `pd` under reflection in the positive root `A`.
pub fn wall_cross_step(pd: &PDClass, root: &HClass) -> Result<PDClass> {
    if !is_positive_root(root) {
        return Err(Error::NotPositiveRoot(root.to_string()));
    }
    let a = pd.pairing(root)?;
    if !a.is_positive() {
        return Err(Error::NonPositiveArea { class: root.to_string(), area: a.to_string() });
    }
    pd.add_scaled(&a, root)
}

/// Rescales to `L`-coefficient 1 and reads off the capacities.
pub fn normalize(pd: &PDClass) -> Result<CapacityVector> {
    if !pd.c0().is_positive() {
        return Err(Error::NonPositiveLineCoefficient(pd.c0().to_string()));
    }
    CapacityVector::new(pd.c().iter().map(|c| c / pd.c0()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub step: usize,
    pub fired_node: usize,
    pub crossed: HClass,
    pub pd_unnormalized: PDClass,
    pub delta: CapacityVector,
    #[serde(with = "rational_string")]
    pub area_before: Rational,
    #[serde(with = "rational_string")]
    pub area_after: Rational,
    pub invariant_value: i64,
    #[serde(with = "rational_string")]
    pub sup_distance_to_monotone: Rational,
    /// Walls passing through `delta`. A further step from such a point is refused.
    pub on_walls: Vec<HClass>,
}

pub(crate) mod rational_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        crate::lattice::parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

/// Capacities strictly inside the reduced chamber and inside `sum < 1`,
/// off every wall: `delta_i = (100 - i) / 1000`.
pub fn default_delta0() -> CapacityVector {
    CapacityVector::new((1..=9).map(|i| rational(100 - i, 1000)).collect()).expect("positive")
}

/// Checks the requirements on a sequence start and reports whether it lies
/// strictly inside the reduced chamber.
fn validate_start(delta0: &CapacityVector) -> Result<bool> {
    require_nine(delta0.n())?;
    if delta0.sum() >= Rational::one() {
        return Err(Error::InvalidStart(format!("sum of capacities {} is not below 1", delta0.sum())));
    }
    let pd0 = delta0.pd_class();
    if !pd0.is_reduced() {
        return Err(Error::InvalidStart("capacities are not reduced (sort them in decreasing order)".into()));
    }
    let sig = chamber_signature(delta0)?;
    if let Some(w) = sig.on_wall.first() {
        return Err(Error::InvalidStart(format!("starting point lies on the wall {w}")));
    }
    if let Some(w) = sig.negative_walls().first() {
        return Err(Error::InvalidStart(format!("starting point has negative area on {w}")));
    }
    let (roots, _) = simple_roots();
    Ok(roots.iter().all(|r| pd0.pairing(r).map(|a| a.is_positive()).unwrap_or(false)))
}

/// Follows the chambers visited by the numbers game from `delta0`, crossing
/// one positive (-2)-wall per move.
///
/// After `k` moves the unnormalized class is `w(pd0)` and the node classes
/// are `w(r_i)` for the same composite reflection `w`, so the area crossed
/// at a node always equals `pd0 . r_i`. When `delta0` is strictly inside the
/// reduced chamber no root wall ever passes through the sequence and only
/// the 437 classes of square at most -3 need checking for incidences.
pub fn generate_sequence(delta0: &CapacityVector, steps: usize, strategy: Strategy) -> Result<Vec<SequenceRecord>> {
    let strictly_inside = validate_start(delta0)?;
    let le3 = enumerate_le_minus3();
    let mut chooser = strategy.chooser();
    let mut lattice = lattice_init();
    let mut pd = delta0.pd_class();
    let mut on_walls: Vec<HClass> = Vec::new();
    let mut records = Vec::with_capacity(steps);
    for step in 1..=steps {
        if let Some(w) = on_walls.first() {
            return Err(Error::LandedOnWall { step: step - 1, wall: w.to_string() });
        }
        let values = lattice.values();
        let node = chooser.choose(&values).ok_or(Error::GameStuck)?;
        let (next, crossed) = lattice.fire(node)?;
        lattice = next;
        let area_before = pd.pairing(&crossed)?;
        if !area_before.is_positive() {
            return Err(Error::LandedOnWall { step: step - 1, wall: crossed.to_string() });
        }
        let next_pd = wall_cross_step(&pd, &crossed)?;
        let area_after = next_pd.pairing(&crossed)?;
        debug_assert_eq!(area_after, -area_before.clone());
        let delta = normalize(&next_pd)?;
        on_walls = if strictly_inside {
            let eval = AreaEvaluator::new(&delta);
            le3.iter().filter(|a| eval.sign(a) == 0).cloned().collect()
        } else {
            chamber_signature(&delta)?.on_wall.into_iter().map(|w| w.class).collect()
        };
        let invariant_value = lattice.values().iter().zip(E8_AFFINE_WEIGHTS).map(|(x, w)| x * w).sum();
        records.push(SequenceRecord {
            step,
            fired_node: node,
            crossed,
            sup_distance_to_monotone: delta.sup_distance_to_monotone(),
            pd_unnormalized: next_pd.clone(),
            delta,
            area_before,
            area_after,
            invariant_value,
            on_walls: on_walls.clone(),
        });
        pd = next_pd;
    }
    Ok(records)
}

/// Why a capacity vector is or is not admissible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    NonPositiveSquare {
        #[serde(with = "rational_string")]
        square: Rational,
    },
    ViolatedClass {
        class: HClass,
        #[serde(with = "rational_string")]
        area: Rational,
    },
    /// Every exceptional class with `a0 <= max_a0` has positive area.
    Verified { max_a0: i64, orbit_representatives: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub certificate: Certificate,
    /// Verdict of Cremona reduction: the reduced form has positive
    /// coefficients and positive square.
    pub cremona_admissible: bool,
}

impl Admissibility {
    pub fn agrees(&self) -> bool {
        self.admissible == self.cremona_admissible
    }
}

/// Bounded test: positive square and positive area on every exceptional
/// class with `a0 <= max_a0`.
///
/// Pairing the decreasingly sorted capacities with decreasingly sorted
/// coefficients minimises the area over a permutation orbit, so only the
/// sorted representatives are checked.
pub fn is_admissible(delta: &CapacityVector, max_a0: i64) -> Result<Admissibility> {
    require_nine(delta.n())?;
    let pd = delta.pd_class();
    let square = pd.square();
    let cremona_admissible = {
        let red = crate::lattice::cremona_reduce(&pd)?;
        red.reduced && square.is_positive()
    };
    if !square.is_positive() {
        return Ok(Admissibility {
            admissible: false,
            certificate: Certificate::NonPositiveSquare { square },
            cremona_admissible,
        });
    }
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&i, &j| delta.delta()[j].cmp(&delta.delta()[i]));
    let sorted = CapacityVector::new(order.iter().map(|&i| delta.delta()[i].clone()).collect())?;
    let eval = AreaEvaluator::new(&sorted);
    let reps = exceptional_representatives(max_a0)?;
    for rep in reps.iter() {
        if eval.sign(rep) <= 0 {
            let mut a = vec![0; 9];
            for (pos, &i) in order.iter().enumerate() {
                a[i] = rep.a()[pos];
            }
            let class = HClass::new(rep.a0(), a)?;
            let area = delta.area(&class)?;
            return Ok(Admissibility {
                admissible: false,
                certificate: Certificate::ViolatedClass { class, area },
                cremona_admissible,
            });
        }
    }
    Ok(Admissibility {
        admissible: true,
        certificate: Certificate::Verified { max_a0, orbit_representatives: reps.len() },
        cremona_admissible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictionDirection {
    PlusToMinusOnly,
    MinusToPlusOnly,
    Both,
}

/// Which restrictions exist across a hyperplane with the given normal.
pub fn restriction_direction(normal: &[Rational]) -> Result<RestrictionDirection> {
    let pos = normal.iter().any(|x| x.is_positive());
    let neg = normal.iter().any(|x| x.is_negative());
    match (pos, neg) {
        (false, false) => Err(Error::ZeroNormal),
        (true, false) => Ok(RestrictionDirection::PlusToMinusOnly),
        (false, true) => Ok(RestrictionDirection::MinusToPlusOnly),
        (true, true) => Ok(RestrictionDirection::Both),
    }
}

/// Explicit points `(x_plus, x_minus)` with `x_plus . n > c > x_minus . n`
/// and `x_plus - x_minus` (if `plus_to_minus`) or `x_minus - x_plus`
/// (otherwise) in the closed positive orthant. `None` when no such pair
/// exists.
pub fn restriction_witness(
    normal: &[Rational],
    offset: &Rational,
    plus_to_minus: bool,
) -> Result<Option<(Vec<Rational>, Vec<Rational>)>> {
    restriction_direction(normal)?;
    let wanted = |x: &Rational| if plus_to_minus { x.is_positive() } else { x.is_negative() };
    let Some(i) = normal.iter().position(wanted) else {
        return Ok(None);
    };
    let point = |level: Rational| {
        let mut x = vec![Rational::zero(); normal.len()];
        x[i] = level / &normal[i];
        x
    };
    Ok(Some((point(offset + Rational::one()), point(offset - Rational::one()))))
}

/// Comparable capacities on either side of a single (-2)-wall:
/// `x_minus < x_plus`, with the wall's area positive at `x_minus` and
/// negative at `x_plus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionPair {
    pub wall: HClass,
    pub x_plus: CapacityVector,
    pub x_minus: CapacityVector,
    #[serde(with = "rational_string")]
    pub epsilon: Rational,
    /// `x_plus - x_minus = k n` with `n` the wall's exceptional coefficients.
    #[serde(with = "rational_string")]
    pub k: Rational,
}

impl RestrictionPair {
    /// Re-checks every property of the pair. Walls of square at most -3 may
    /// pass through the endpoints; root walls may not.
    pub fn verify(&self, max_a0: i64) -> Result<()> {
        let fail = |msg: String| Err(Error::NoComparablePair(msg));
        let (am, ap) = (self.x_minus.area(&self.wall)?, self.x_plus.area(&self.wall)?);
        if !(am.is_positive() && ap.is_negative()) {
            return fail(format!("areas {am} and {ap} do not straddle the wall"));
        }
        let diff: Vec<Rational> = self.x_plus.delta().iter().zip(self.x_minus.delta()).map(|(p, m)| p - m).collect();
        if diff.iter().any(|x| x.is_negative()) || diff.iter().all(|x| x.is_zero()) {
            return fail("x_plus - x_minus is not a non-zero vector of the positive orthant".into());
        }
        let roots = root_sign_changes(&self.x_minus, &self.x_plus)?;
        if roots.len() != 1 || roots[0].class != self.wall {
            return fail(format!("{} (-2)-walls separate the pair", roots.len()));
        }
        for x in [&self.x_minus, &self.x_plus] {
            if !is_admissible(x, max_a0)?.admissible {
                return fail(format!("{x} is not admissible"));
            }
        }
        Ok(())
    }
}

fn dot(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter().zip(y).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

fn shift(x: &CapacityVector, t: &Rational, n: &[Rational]) -> Result<CapacityVector> {
    CapacityVector::new(x.delta().iter().zip(n).map(|(a, b)| a + t * b).collect())
}

/// Builds a comparable pair across the positive root `wall`, starting from
/// `near` on its positive side.
///
/// The foot point `x_w` is reached from `near` along the wall normal `n`.
/// With `s` the distance (in units of `n`) from `x_w` to the closest other
/// wall along the same line, the pair is `x_w -+ (k/2) n` with
/// `k = epsilon * min(s, t) / 2`, `t` being the distance back to `near`.
/// `k` is halved while a higher-level root still separates the pair or an
/// endpoint fails the admissibility check.
pub fn comparable_pair(wall: &HClass, near: &CapacityVector, epsilon: &Rational) -> Result<RestrictionPair> {
    require_nine(near.n())?;
    if !is_positive_root(wall) {
        return Err(Error::NotPositiveRoot(wall.to_string()));
    }
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(Error::NoComparablePair(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    let area = near.area(wall)?;
    if !area.is_positive() {
        return Err(Error::NonPositiveArea { class: wall.to_string(), area: area.to_string() });
    }
    let n = wall.normal();
    let to_wall = &area / dot(&n, &n);
    let foot = shift(near, &to_wall, &n)?;
    let level = level_bound(&foot)? + 1;
    let eval = AreaEvaluator::new(&foot);
    let mut reach = to_wall.clone();
    for other in walls_up_to(level) {
        if &other.class == wall {
            continue;
        }
        let a = eval.area(&other.class);
        if a.is_zero() {
            if other.is_root() {
                return Err(Error::NoComparablePair(format!("foot point also lies on the root wall {other}")));
            }
            continue;
        }
        let slope = dot(&other.class.normal(), &n);
        if !slope.is_zero() {
            reach = reach.min((a / slope).abs());
        }
    }
    let mut k = epsilon * reach / int(2);
    let half = rational(1, 2);
    for _ in 0..64 {
        let x_minus = shift(&foot, &-(&k * &half), &n)?;
        let x_plus = shift(&foot, &(&k * &half), &n)?;
        if !root_sign_changes(near, &x_minus)?.is_empty() {
            return Err(Error::NoComparablePair(format!("a (-2)-wall separates {near} from the wall {wall}")));
        }
        let pair = RestrictionPair { wall: wall.clone(), x_plus, x_minus, epsilon: epsilon.clone(), k: k.clone() };
        match pair.verify(DEFAULT_MAX_A0) {
            Ok(()) => return Ok(pair),
            Err(Error::NoComparablePair(_)) | Err(Error::OnWall { .. }) => k = &k * &half,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoComparablePair(format!("no admissible pair within epsilon {epsilon} of {wall}")))
}

/// Comparable pair for one transition of a wall-crossing sequence: from the
/// chamber of `before` across `crossed` into the chamber of its reflection.
///
/// The starting point is taken on the segment from `before` to its mirror
/// image (that segment crosses no other root wall), moving closer to the
/// wall until the foot point construction succeeds.
pub fn transition_pair(before: &PDClass, crossed: &HClass, epsilon: &Rational) -> Result<RestrictionPair> {
    let area = before.pairing(crossed)?;
    let mut gap = rational(1, 4);
    let mut last = None;
    for _ in 0..32 {
        let s = rational(1, 2) - &gap;
        let near = normalize(&before.add_scaled(&(&s * &area), crossed)?)?;
        match comparable_pair(crossed, &near, epsilon) {
            Ok(pair) => return Ok(pair),
            Err(e @ Error::NoComparablePair(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
        gap /= int(2);
    }
    Err(last.unwrap_or_else(|| Error::NoComparablePair(crossed.to_string())))
}
