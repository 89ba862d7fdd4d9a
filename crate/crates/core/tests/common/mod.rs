//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ninewalls::lattice::HClass;

pub fn class(a0: i64, a: &[i64]) -> HClass {
    HClass::new(a0, a.to_vec()).unwrap()
}

/// All `a` in `[lo, hi]^9` with prescribed sum and sum of squares.
pub fn box_solutions(lo: i64, hi: i64, sum: i64, sumsq: i64) -> Vec<Vec<i64>> {
    fn go(pos: usize, lo: i64, hi: i64, sum: i64, sumsq: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let left = (9 - pos) as i64;
        if left == 0 {
            if sum == 0 && sumsq == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if sum < lo * left || sum > hi * left || sumsq < 0 {
            return;
        }
        // for non-negative entries: sum^2 <= left * sumsq <= left * hi * sum
        if lo >= 0 && (sum * sum > left * sumsq || sumsq > hi * sum) {
            return;
        }
        for x in lo..=hi {
            cur.push(x);
            go(pos + 1, lo, hi, sum - x, sumsq - x * x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, lo, hi, sum, sumsq, &mut Vec::new(), &mut out);
    out
}

/// Classes of square at most -3 by direct subset enumeration.
pub fn le3_oracle() -> BTreeSet<HClass> {
    let mut oracle = BTreeSet::new();
    for mask in 0u32..512 {
        let a: Vec<i64> = (0..9).map(|i| i64::from(mask >> i & 1)).collect();
        let size = mask.count_ones();
        if size >= 4 {
            oracle.insert(class(1, &a));
        }
        if size >= 7 {
            oracle.insert(class(2, &a));
        }
    }
    for i in 0..9 {
        let mut a = vec![1; 9];
        a[i] = 2;
        oracle.insert(class(3, &a));
    }
    oracle
}

/// Positive roots of level `<= max_m` from the box `a0 <= 3 max_m + 1`,
/// `0 <= ai <= max_m + 1`.
pub fn root_oracle(max_m: i64) -> BTreeSet<HClass> {
    let mut oracle = BTreeSet::new();
    for a0 in 1..=3 * max_m + 1 {
        for a in box_solutions(0, max_m + 1, 3 * a0, a0 * a0 + 2) {
            oracle.insert(class(a0, &a));
        }
    }
    oracle
}

/// Exceptional classes with `a0 <= max_a0` from the integer box.
pub fn exceptional_oracle(max_a0: i64) -> BTreeSet<HClass> {
    let mut set = BTreeSet::new();
    for i in 0..9 {
        let mut a = vec![0; 9];
        a[i] = -1;
        set.insert(class(0, &a));
    }
    for a0 in 1..=max_a0 {
        for a in box_solutions(0, a0, 3 * a0 - 1, a0 * a0 + 1) {
            set.insert(class(a0, &a));
        }
    }
    set
}
