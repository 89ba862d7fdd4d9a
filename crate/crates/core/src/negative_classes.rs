//! Negative self-intersection classes on the 9-fold blow-up that can carry
//! walls: the finitely many classes of square at most -3, the positive
//! (-2)-roots `+-r + m D9`, and exceptional classes.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::HClass;

const N: usize = 9;

/// All `k`-subsets of `1..=n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n - i + 1 < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `a0 L - sum_{i in I} Ei`.
fn line_minus(a0: i64, indices: &[usize]) -> HClass {
    let mut a = vec![0; N];
    for &i in indices {
        a[i - 1] = 1;
    }
    HClass::raw(a0, a)
}

/// Elementary roots `r_ijk = L - Ei - Ej - Ek` (either sign) and
/// `r_ij = Ei - Ej`. Indices are 1-based; `r_ij` uses ordered pairs so the
/// sign is carried by the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementaryRoot {
    PlusRijk(usize, usize, usize),
    MinusRijk(usize, usize, usize),
    Rij(usize, usize),
}

impl ElementaryRoot {
    pub fn class(&self) -> HClass {
        match *self {
            ElementaryRoot::PlusRijk(i, j, k) => line_minus(1, &[i, j, k]),
            ElementaryRoot::MinusRijk(i, j, k) => -&line_minus(1, &[i, j, k]),
            ElementaryRoot::Rij(i, j) => {
                let mut a = vec![0; N];
                a[i - 1] = -1;
                a[j - 1] = 1;
                HClass::raw(0, a)
            }
        }
    }

    /// Smallest level at which `self + m D9` is a positive root.
    pub fn min_level(&self) -> u32 {
        match self {
            ElementaryRoot::PlusRijk(..) => 0,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |i: usize| (1..=N).contains(&i);
        let good = match *self {
            ElementaryRoot::PlusRijk(i, j, k) | ElementaryRoot::MinusRijk(i, j, k) => {
                ok(i) && ok(j) && ok(k) && i < j && j < k
            }
            ElementaryRoot::Rij(i, j) => ok(i) && ok(j) && i != j,
        };
        if good {
            Ok(())
        } else {
            Err(Error::InvalidIndexSet(format!("{self:?}")))
        }
    }

    /// The 84 `+r_ijk`, the 84 `-r_ijk` and the 72 ordered `r_ij`.
    pub fn all() -> Vec<ElementaryRoot> {
        let triples = subsets(N, 3);
        let mut out: Vec<ElementaryRoot> = triples.iter().map(|t| ElementaryRoot::PlusRijk(t[0], t[1], t[2])).collect();
        out.extend(triples.iter().map(|t| ElementaryRoot::MinusRijk(t[0], t[1], t[2])));
        for i in 1..=N {
            for j in 1..=N {
                if i != j {
                    out.push(ElementaryRoot::Rij(i, j));
                }
            }
        }
        out
    }
}

impl fmt::Display for ElementaryRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryRoot::PlusRijk(i, j, k) => write!(f, "+r{i}{j}{k}"),
            ElementaryRoot::MinusRijk(i, j, k) => write!(f, "-r{i}{j}{k}"),
            ElementaryRoot::Rij(i, j) => write!(f, "r{i}{j}"),
        }
    }
}

/// A positive (-2)-class `root + m D9`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootClass {
    pub kind: ElementaryRoot,
    pub m: u32,
    pub cls: HClass,
}

impl RootClass {
    pub fn new(kind: ElementaryRoot, m: u32) -> Result<Self> {
        kind.validate()?;
        if m < kind.min_level() {
            return Err(Error::NotPositiveRoot(format!("{kind} + {m} D9")));
        }
        let cls = &kind.class() + &HClass::d9().scaled(i64::from(m));
        Ok(RootClass { kind, m, cls })
    }
}

/// Which case of the negative-class classification a class falls into.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    /// `L - sum_{i in I} Ei`, `|I| >= 4`.
    F1a {
        indices: Vec<usize>,
    },
    /// `2L - sum_{i in I} Ei`, `|I| >= 7`.
    F1b {
        indices: Vec<usize>,
    },
    /// `3L - 2Ei - sum_{j != i} Ej`.
    F1c {
        index: usize,
    },
    /// `r_ijk + m D9`, `m >= 0`.
    F2a {
        i: usize,
        j: usize,
        k: usize,
        m: u32,
    },
    /// `-r_ijk + m D9`, `m >= 1`.
    F2b {
        i: usize,
        j: usize,
        k: usize,
        m: u32,
    },
    /// `(Ei - Ej) + m D9` for an ordered pair, `m >= 1`.
    F2c {
        i: usize,
        j: usize,
        m: u32,
    },
    Exceptional,
    NotNegativeWall,
}

impl FamilyTag {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyTag::F1a { .. } => "F1a",
            FamilyTag::F1b { .. } => "F1b",
            FamilyTag::F1c { .. } => "F1c",
            FamilyTag::F2a { .. } => "F2a",
            FamilyTag::F2b { .. } => "F2b",
            FamilyTag::F2c { .. } => "F2c",
            FamilyTag::Exceptional => "exceptional",
            FamilyTag::NotNegativeWall => "none",
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match self {
            FamilyTag::F1a { indices } | FamilyTag::F1b { indices } => indices.clone(),
            FamilyTag::F1c { index } => vec![*index],
            FamilyTag::F2a { i, j, k, .. } | FamilyTag::F2b { i, j, k, .. } => vec![*i, *j, *k],
            FamilyTag::F2c { i, j, .. } => vec![*i, *j],
            _ => Vec::new(),
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            FamilyTag::F2a { m, .. } | FamilyTag::F2b { m, .. } | FamilyTag::F2c { m, .. } => Some(*m),
            _ => None,
        }
    }

    pub fn is_root(&self) -> bool {
        self.level().is_some()
    }

    fn of_root(kind: ElementaryRoot, m: u32) -> FamilyTag {
        match kind {
            ElementaryRoot::PlusRijk(i, j, k) => FamilyTag::F2a { i, j, k, m },
            ElementaryRoot::MinusRijk(i, j, k) => FamilyTag::F2b { i, j, k, m },
            ElementaryRoot::Rij(i, j) => FamilyTag::F2c { i, j, m },
        }
    }
}

impl From<&RootClass> for FamilyTag {
    fn from(r: &RootClass) -> Self {
        FamilyTag::of_root(r.kind, r.m)
    }
}

/// Classes of square at most -3 that can be walls: 382 of type (1a), 46 of
/// type (1b) and 9 of type (1c).
pub fn enumerate_le_minus3() -> Arc<Vec<HClass>> {
    static CACHE: OnceLock<Arc<Vec<HClass>>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let mut out = Vec::with_capacity(437);
            for size in 4..=N {
                out.extend(subsets(N, size).iter().map(|s| line_minus(1, s)));
            }
            for size in 7..=N {
                out.extend(subsets(N, size).iter().map(|s| line_minus(2, s)));
            }
            for i in 1..=N {
                let mut a = vec![1; N];
                a[i - 1] = 2;
                out.push(HClass::raw(3, a));
            }
            Arc::new(out)
        })
        .clone()
}

/// Positive roots at exactly level `m`, in elementary-root order.
pub fn positive_roots_at_level(m: u32) -> Vec<RootClass> {
    ElementaryRoot::all()
        .into_iter()
        .filter(|kind| m >= kind.min_level())
        .map(|kind| RootClass::new(kind, m).expect("valid elementary root"))
        .collect()
}

/// All positive roots of level `m <= max_m`, ordered by family, then
/// indices, then level.
pub fn enumerate_neg2_roots(max_m: i64) -> Result<Arc<Vec<RootClass>>> {
    if max_m < 0 {
        return Err(Error::NegativeBound(max_m));
    }
    let max_m = u32::try_from(max_m).map_err(|_| Error::NegativeBound(max_m))?;
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<RootClass>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&max_m) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    for kind in ElementaryRoot::all() {
        for m in kind.min_level()..=max_m {
            out.push(RootClass::new(kind, m)?);
        }
    }
    let out = Arc::new(out);
    cache.lock().unwrap().insert(max_m, out.clone());
    Ok(out)
}

/// Exceptional classes `a0 L - sum ai Ei` with `a0 >= 1`, `a1 >= ... >= a9 >= 0`
/// and `a0 <= max_a0`. Every exceptional class with `a0 >= 1` is a
/// permutation of one of these.
pub fn exceptional_representatives(max_a0: i64) -> Result<Arc<Vec<HClass>>> {
    if max_a0 < 0 {
        return Err(Error::NegativeBound(max_a0));
    }
    static CACHE: OnceLock<Mutex<HashMap<i64, Arc<Vec<HClass>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&max_a0) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    for a0 in 1..=max_a0 {
        let mut prefix = Vec::with_capacity(N);
        sorted_solutions(a0, a0, N as i64, 3 * a0 - 1, a0 * a0 + 1, &mut prefix, &mut out);
    }
    let out = Arc::new(out);
    cache.lock().unwrap().insert(max_a0, out.clone());
    Ok(out)
}

/// Non-increasing `a` with `sum a = sum_left`, `sum a^2 = sq_left`.
fn sorted_solutions(
    a0: i64,
    cap: i64,
    slots: i64,
    sum_left: i64,
    sq_left: i64,
    prefix: &mut Vec<i64>,
    out: &mut Vec<HClass>,
) {
    if slots == 0 {
        if sum_left == 0 && sq_left == 0 {
            out.push(HClass::raw(a0, prefix.clone()));
        }
        return;
    }
    // a_i <= cap gives a_i^2 <= cap * a_i; Cauchy-Schwarz gives the other bound.
    if sum_left < 0
        || sq_left < 0
        || sum_left > slots * cap
        || sq_left > cap * sum_left
        || sq_left * slots < sum_left * sum_left
    {
        return;
    }
    for v in (0..=cap.min(sum_left)).rev() {
        prefix.push(v);
        sorted_solutions(a0, v, slots - 1, sum_left - v, sq_left - v * v, prefix, out);
        prefix.pop();
    }
}

/// Distinct permutations of `v` in lexicographic order.
fn distinct_permutations(v: &[i64]) -> Vec<Vec<i64>> {
    let mut cur: Vec<i64> = v.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// Every exceptional class (`A.A = -1`, `c1 = 1`) with `0 <= a0 <= max_a0`:
/// the nine `Ei` plus all classes with `a0 >= 1` and `ai >= 0`. Sorted by
/// `(a0, a)`.
pub fn enumerate_exceptional(max_a0: i64) -> Result<Vec<HClass>> {
    let reps = exceptional_representatives(max_a0)?;
    let mut out: Vec<HClass> = (1..=N).map(|i| HClass::exceptional(N, i).unwrap()).collect();
    for rep in reps.iter() {
        for a in distinct_permutations(rep.a()) {
            out.push(HClass::raw(rep.a0(), a));
        }
    }
    out.sort();
    Ok(out)
}

/// Matches `a` against the cases of the negative-class classification.
/// Only positive roots are reported as (2a)-(2c).
pub fn classify_negative(a: &HClass) -> FamilyTag {
    if a.n() != N {
        return FamilyTag::NotNegativeWall;
    }
    let sq = a.self_intersection();
    if sq >= 0 {
        return FamilyTag::NotNegativeWall;
    }
    let c1 = a.c1();
    let coeffs = a.a();
    if c1 < 0 {
        let zero_one = coeffs.iter().all(|&x| x == 0 || x == 1);
        let support: Vec<usize> = (1..=N).filter(|&i| coeffs[i - 1] == 1).collect();
        return match a.a0() {
            1 if zero_one && support.len() >= 4 => FamilyTag::F1a { indices: support },
            2 if zero_one && support.len() >= 7 => FamilyTag::F1b { indices: support },
            3 => {
                let twos: Vec<usize> = (1..=N).filter(|&i| coeffs[i - 1] == 2).collect();
                let rest_ones = coeffs.iter().filter(|&&x| x == 1).count();
                if twos.len() == 1 && rest_ones == N - 1 {
                    FamilyTag::F1c { index: twos[0] }
                } else {
                    FamilyTag::NotNegativeWall
                }
            }
            _ => FamilyTag::NotNegativeWall,
        };
    }
    if c1 == 0 {
        return if sq == -2 { classify_root(a) } else { FamilyTag::NotNegativeWall };
    }
    let nonneg = a.a0() >= 1 && coeffs.iter().all(|&x| x >= 0);
    let pure_e = a.a0() == 0
        && coeffs.iter().filter(|&&x| x == -1).count() == 1
        && coeffs.iter().filter(|&&x| x == 0).count() == N - 1;
    if sq == -1 && c1 == 1 && (nonneg || pure_e) {
        FamilyTag::Exceptional
    } else {
        FamilyTag::NotNegativeWall
    }
}

/// Writes a (-2)-class with `c1 = 0` as `root + m D9`. The residue of `a0`
/// modulo 3 fixes the kind: `1 + 3m`, `3m - 1` or `3m`.
fn classify_root(a: &HClass) -> FamilyTag {
    let a0 = a.a0();
    let (m, sign) = match a0.rem_euclid(3) {
        1 => ((a0 - 1) / 3, 1),
        2 => ((a0 + 1) / 3, -1),
        _ => (a0 / 3, 0),
    };
    let Ok(m) = u32::try_from(m) else {
        return FamilyTag::NotNegativeWall;
    };
    let base = a - &HClass::d9().scaled(i64::from(m));
    let b = base.a();
    let kind = match sign {
        1 | -1 => {
            let support: Vec<usize> = (1..=N).filter(|&i| b[i - 1] != 0).collect();
            if support.len() != 3 || support.iter().any(|&i| b[i - 1] != sign) {
                return FamilyTag::NotNegativeWall;
            }
            let (i, j, k) = (support[0], support[1], support[2]);
            if sign == 1 {
                ElementaryRoot::PlusRijk(i, j, k)
            } else {
                ElementaryRoot::MinusRijk(i, j, k)
            }
        }
        _ => {
            let neg: Vec<usize> = (1..=N).filter(|&i| b[i - 1] == -1).collect();
            let pos: Vec<usize> = (1..=N).filter(|&i| b[i - 1] == 1).collect();
            if neg.len() != 1 || pos.len() != 1 || b.iter().filter(|&&x| x != 0).count() != 2 {
                return FamilyTag::NotNegativeWall;
            }
            ElementaryRoot::Rij(neg[0], pos[0])
        }
    };
    if m < kind.min_level() {
        FamilyTag::NotNegativeWall
    } else {
        FamilyTag::of_root(kind, m)
    }
}

/// Recovers the root data of a positive root.
pub fn as_root_class(a: &HClass) -> Option<RootClass> {
    let kind = match classify_negative(a) {
        FamilyTag::F2a { i, j, k, m } => (ElementaryRoot::PlusRijk(i, j, k), m),
        FamilyTag::F2b { i, j, k, m } => (ElementaryRoot::MinusRijk(i, j, k), m),
        FamilyTag::F2c { i, j, m } => (ElementaryRoot::Rij(i, j), m),
        _ => return None,
    };
    RootClass::new(kind.0, kind.1).ok()
}

pub fn is_positive_root(a: &HClass) -> bool {
    classify_negative(a).is_root()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{class_invariants, reflect, simple_roots};

    fn cls(s: &str) -> HClass {
        s.parse().unwrap()
    }

    #[test]
    fn le3_counts_and_invariants() {
        let all = enumerate_le_minus3();
        assert_eq!(all.len(), 437);
        for a in all.iter() {
            let inv = class_invariants(a).unwrap();
            assert!(inv.self_int <= -3 && inv.c1 < 0 && inv.genus_defect >= 0, "{a}");
        }
    }

    #[test]
    fn root_counts() {
        assert_eq!(enumerate_neg2_roots(0).unwrap().len(), 84);
        assert_eq!(enumerate_neg2_roots(1).unwrap().len(), 84 + 240);
        assert_eq!(enumerate_neg2_roots(-1), Err(Error::NegativeBound(-1)));
        for r in enumerate_neg2_roots(2).unwrap().iter() {
            assert_eq!(r.cls.self_intersection(), -2);
            assert_eq!(r.cls.c1(), 0);
            assert!(is_positive_root(&r.cls));
        }
    }

    #[test]
    fn root_positivity_constraint() {
        assert!(RootClass::new(ElementaryRoot::PlusRijk(1, 2, 3), 0).is_ok());
        assert!(RootClass::new(ElementaryRoot::MinusRijk(1, 2, 3), 0).is_err());
        assert!(RootClass::new(ElementaryRoot::Rij(1, 2), 0).is_err());
        assert!(RootClass::new(ElementaryRoot::Rij(2, 2), 1).is_err());
        assert!(RootClass::new(ElementaryRoot::PlusRijk(3, 2, 1), 1).is_err());
    }

    #[test]
    fn exceptional_small_bounds() {
        let e0 = enumerate_exceptional(0).unwrap();
        assert_eq!(e0.len(), 9);
        let e1 = enumerate_exceptional(1).unwrap();
        assert_eq!(e1.len(), 45);
        for e in &e1 {
            assert_eq!(class_invariants(e).unwrap().codim, 0);
            assert_eq!(classify_negative(e), FamilyTag::Exceptional);
        }
        assert_eq!(enumerate_exceptional(6).unwrap().len(), 3024);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_negative(&cls("(1;1,1,1,1,1,0,0,0,0)")), FamilyTag::F1a { indices: vec![1, 2, 3, 4, 5] });
        assert_eq!(classify_negative(&cls("(4;2,2,2,1,1,1,1,1,1)")), FamilyTag::F2a { i: 1, j: 2, k: 3, m: 1 });
        assert_eq!(classify_negative(&cls("(1;1,0,0,0,0,0,0,0,0)")), FamilyTag::NotNegativeWall);
        assert_eq!(classify_negative(&cls("(3;2,1,1,1,1,1,1,1,1)")), FamilyTag::F1c { index: 1 });
        assert_eq!(
            classify_negative(&cls("(2;1,1,1,1,1,1,1,0,0)")),
            FamilyTag::F1b { indices: vec![1, 2, 3, 4, 5, 6, 7] }
        );
        // E1 - E2 + D9
        assert_eq!(classify_negative(&cls("(3;0,2,1,1,1,1,1,1,1)")), FamilyTag::F2c { i: 1, j: 2, m: 1 });
        assert_eq!(classify_negative(&cls("(2;0,0,0,1,1,1,1,1,1)")), FamilyTag::F2b { i: 1, j: 2, k: 3, m: 1 });
        assert_eq!(classify_negative(&HClass::exceptional(9, 4).unwrap()), FamilyTag::Exceptional);
    }

    #[test]
    fn positivity_examples() {
        let (roots, d9) = simple_roots();
        assert!(is_positive_root(&roots[0]));
        assert!(!is_positive_root(&-&roots[0]));
        assert!(!is_positive_root(&roots[1]));
        assert!(is_positive_root(&(&roots[1] + &d9)));
    }

    #[test]
    fn round_trip_and_disjointness() {
        let le3 = enumerate_le_minus3();
        let roots = enumerate_neg2_roots(3).unwrap();
        let exc = enumerate_exceptional(3).unwrap();
        for a in le3.iter() {
            assert!(matches!(
                classify_negative(a),
                FamilyTag::F1a { .. } | FamilyTag::F1b { .. } | FamilyTag::F1c { .. }
            ));
        }
        for r in roots.iter() {
            assert_eq!(classify_negative(&r.cls), FamilyTag::from(r));
            assert_eq!(as_root_class(&r.cls).as_ref(), Some(r));
            assert_eq!(reflect(&r.cls, &HClass::d9()).unwrap(), HClass::d9());
            assert!(class_invariants(&r.cls).unwrap().genus_defect >= 0);
        }
        for e in &exc {
            assert_eq!(class_invariants(e).unwrap().genus_defect, 0);
        }
        let mut seen = std::collections::HashSet::new();
        for a in le3.iter().chain(roots.iter().map(|r| &r.cls)).chain(exc.iter()) {
            assert!(seen.insert(a.clone()), "duplicate {a}");
        }
    }

    #[test]
    fn permutations_are_distinct() {
        assert_eq!(distinct_permutations(&[1, 1, 0]).len(), 3);
        assert_eq!(distinct_permutations(&[2, 1, 0]).len(), 6);
        assert_eq!(distinct_permutations(&[5]).len(), 1);
    }
}
