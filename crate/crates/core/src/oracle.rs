//! Independent reference implementations used to validate the main pipelines.
//!
//! Everything here is written directly from the classical statements, in a
//! deliberately naive style, and shares no code with the series engine.

use std::collections::HashMap;
use std::sync::Mutex;

use num::{BigInt, BigRational, One, Zero};

use crate::error::{EngineError, Result};

/// Rational count of degree-d plane curves, `N_d`, via the WDVV recursion
/// N_d = sum_{a+b=d} N_a N_b a^2 b (b C(3d-4,3a-2) - a C(3d-4,3a-1)).
pub fn kontsevich_recursion(max_degree: u32) -> Vec<BigRational> {
    let mut table: Vec<BigRational> = vec![BigRational::zero(); (max_degree + 1) as usize];
    if max_degree >= 1 {
        table[1] = BigRational::one();
    }
    for d in 2..=max_degree {
        let mut acc = BigRational::zero();
        for a in 1..d {
            let b = d - a;
            let c1 = binomial(3 * d as i64 - 4, 3 * a as i64 - 2);
            let c2 = binomial(3 * d as i64 - 4, 3 * a as i64 - 1);
            let w = BigInt::from(b) * c1 - BigInt::from(a) * c2;
            let factor = BigInt::from(a) * BigInt::from(a) * BigInt::from(b) * w;
            acc += table[a as usize].clone() * table[b as usize].clone()
                * BigRational::from_integer(factor);
        }
        table[d as usize] = acc;
    }
    table.remove(0);
    table
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// A Caporaso-Harris tangency vector: entry `k-1` is the number of contacts
/// of order `k`.
pub type TangencyVec = Vec<u32>;

fn tv_total(v: &TangencyVec) -> i64 {
    v.iter()
        .enumerate()
        .map(|(i, &m)| (i as i64 + 1) * m as i64)
        .sum()
}

fn tv_count(v: &TangencyVec) -> i64 {
    v.iter().map(|&m| m as i64).sum()
}

fn tv_trim(mut v: TangencyVec) -> TangencyVec {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Componentwise binomial product C(a, b) = prod_k C(a_k, b_k); zero when
/// b is not dominated by a.
fn tv_binomial(a: &TangencyVec, b: &TangencyVec) -> BigInt {
    let len = a.len().max(b.len());
    let mut acc = BigInt::one();
    for k in 0..len {
        let ak = *a.get(k).unwrap_or(&0) as i64;
        let bk = *b.get(k).unwrap_or(&0) as i64;
        if bk > ak {
            return BigInt::zero();
        }
        acc *= binomial(ak, bk);
    }
    acc
}

/// Number of generic interior points imposed on curves in the Severi variety
/// with the given data: n = 3d + g - 1 - sum(k alpha_k) - sum((k-1) beta_k)
/// where g = (d-1)(d-2)/2 - delta.
pub fn ch_point_count(d: i64, delta: i64, alpha: &TangencyVec, beta: &TangencyVec) -> i64 {
    let g = (d - 1) * (d - 2) / 2 - delta;
    let sk_alpha = tv_total(alpha);
    let skm1_beta = tv_total(beta) - tv_count(beta);
    3 * d + g - 1 - sk_alpha - skm1_beta
}

type ChKey = (i64, i64, TangencyVec, TangencyVec);

fn ch_memo() -> &'static Mutex<HashMap<ChKey, BigRational>> {
    static MEMO: std::sync::OnceLock<Mutex<HashMap<ChKey, BigRational>>> =
        std::sync::OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Caporaso-Harris recursion for generalized Severi degrees N^{d,delta}(alpha, beta):
/// degree-d reduced plane curves (reducible allowed, no component mapped into
/// the line), delta nodes, alpha_k order-k contacts at fixed generic points of
/// the line and beta_k at free points, through `ch_point_count` generic points.
///
/// N^{d,delta}(a, b) = sum_k k N^{d,delta}(a+e_k, b-e_k)
///   + sum C(a, a') C(b', b) prod_k k^{b'_k - b_k} N^{d-1,delta'}(a', b')
/// with delta' = delta - d + 1 + |b' - b|, over a' <= a, b' >= b with
/// sum k (a'_k + b'_k) = d - 1.
pub fn ch_recursion(
    d: i64,
    delta: i64,
    alpha: &TangencyVec,
    beta: &TangencyVec,
) -> Result<BigRational> {
    if tv_total(alpha) + tv_total(beta) != d {
        return Err(EngineError::InvalidProfile(format!(
            "total contact order {} does not match degree {}",
            tv_total(alpha) + tv_total(beta),
            d
        )));
    }
    Ok(ch_value(d, delta, &tv_trim(alpha.clone()), &tv_trim(beta.clone())))
}

fn ch_value(d: i64, delta: i64, alpha: &TangencyVec, beta: &TangencyVec) -> BigRational {
    if d < 1 || delta < 0 {
        return BigRational::zero();
    }
    if ch_point_count(d, delta, alpha, beta) < 0 {
        return BigRational::zero();
    }
    if d == 1 {
        return if delta == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    let key: ChKey = (d, delta, alpha.clone(), beta.clone());
    if let Some(v) = ch_memo().lock().unwrap().get(&key) {
        return v.clone();
    }

    let mut acc = BigRational::zero();

    // Move the specialized point onto the line: a free order-k contact
    // becomes a fixed one.
    for k in 1..=beta.len() {
        if beta[k - 1] == 0 {
            continue;
        }
        let mut a2 = alpha.clone();
        if a2.len() < k {
            a2.resize(k, 0);
        }
        a2[k - 1] += 1;
        let mut b2 = beta.clone();
        b2[k - 1] -= 1;
        acc += BigRational::from_integer(BigInt::from(k))
            * ch_value(d, delta, &tv_trim(a2), &tv_trim(b2));
    }

    // The line splits off: a degree-(d-1) curve remains with profile
    // (alpha', beta'), alpha' <= alpha, beta' >= beta.
    let dm1 = d - 1;
    for a2 in sub_vectors(alpha) {
        // beta' = beta + extra must satisfy sum k (alpha'_k + beta'_k) = d - 1
        let rem = dm1 - tv_total(&a2) - tv_total(beta);
        if rem < 0 {
            continue;
        }
        for extra in tangency_vectors_of_total(rem) {
            // beta' = beta + extra
            let len = beta.len().max(extra.len());
            let mut b2: TangencyVec = vec![0; len];
            for k in 0..len {
                b2[k] = beta.get(k).copied().unwrap_or(0) + extra.get(k).copied().unwrap_or(0);
            }
            let ncross: i64 = tv_count(&extra);
            let delta2 = delta - d + 1 + ncross;
            let mut coeff = tv_binomial(alpha, &a2) * tv_binomial(&b2, beta);
            for (i, &m) in extra.iter().enumerate() {
                let k = BigInt::from(i as i64 + 1);
                for _ in 0..m {
                    coeff *= k.clone();
                }
            }
            if coeff.is_zero() {
                continue;
            }
            acc += BigRational::from_integer(coeff)
                * ch_value(dm1, delta2, &tv_trim(a2.clone()), &tv_trim(b2));
        }
    }

    ch_memo().lock().unwrap().insert(key, acc.clone());
    acc
}

/// All vectors componentwise <= v.
fn sub_vectors(v: &TangencyVec) -> Vec<TangencyVec> {
    let mut out = vec![Vec::new()];
    for &m in v {
        let mut next = Vec::new();
        for prefix in &out {
            for take in 0..=m {
                let mut p = prefix.clone();
                p.push(take);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(tv_trim).collect()
}

/// All tangency vectors with sum k * v_k = total.
fn tangency_vectors_of_total(total: i64) -> Vec<TangencyVec> {
    fn rec(total: i64, max_part: i64, out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>) {
        if total == 0 {
            out.push(cur.clone());
            return;
        }
        let mut p = max_part.min(total);
        while p >= 1 {
            cur.push(p);
            rec(total - p, p, out, cur);
            cur.pop();
            p -= 1;
        }
    }
    let mut parts = Vec::new();
    rec(total, total, &mut parts, &mut Vec::new());
    parts
        .into_iter()
        .map(|partition| {
            let maxp = partition.iter().copied().max().unwrap_or(0) as usize;
            let mut v = vec![0u32; maxp];
            for p in partition {
                v[p as usize - 1] += 1;
            }
            v
        })
        .collect()
}

/// Cycle type of a permutation given as images 0..d-1, as a sorted partition.
fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let d = perm.len();
    let mut seen = vec![false; d];
    let mut parts = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        parts.push(len);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// Weighted count (1/d!) of r-tuples of transpositions in S_d whose ordered
/// product has cycle type mu, by exhaustive enumeration.
pub fn hurwitz_bruteforce(d: usize, mu: &[usize], num_transpositions: usize) -> BigRational {
    assert!(d >= 1 && d <= 6, "brute force is for small d");
    let mut mu_sorted = mu.to_vec();
    mu_sorted.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(mu_sorted.iter().sum::<usize>(), d, "mu must partition d");

    // all transpositions as permutations
    let mut transpositions = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut p: Vec<usize> = (0..d).collect();
            p.swap(i, j);
            transpositions.push(p);
        }
    }

    fn rec(
        depth: usize,
        r: usize,
        cur: &[usize],
        transpositions: &[Vec<usize>],
        mu: &[usize],
        count: &mut u64,
    ) {
        if depth == r {
            if cycle_type(cur) == mu {
                *count += 1;
            }
            return;
        }
        for t in transpositions {
            // compose: apply cur first, then t
            let next: Vec<usize> = cur.iter().map(|&x| t[x]).collect();
            rec(depth + 1, r, &next, transpositions, mu, count);
        }
    }
    let identity: Vec<usize> = (0..d).collect();
    let mut count: u64 = 0;
    rec(
        0,
        num_transpositions,
        &identity,
        &transpositions,
        &mu_sorted,
        &mut count,
    );

    let mut dfact = BigInt::one();
    for i in 1..=d {
        dfact *= BigInt::from(i);
    }
    BigRational::new(BigInt::from(count), dfact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn kontsevich_low_degrees() {
        let t = kontsevich_recursion(5);
        assert_eq!(t[0], q(1));
        assert_eq!(t[1], q(1));
        assert_eq!(t[2], q(12));
        assert_eq!(t[3], q(620));
        assert_eq!(t[4], q(87304));
    }

    #[test]
    fn ch_hand_anchors() {
        // one line through two points
        assert_eq!(ch_recursion(1, 0, &vec![], &vec![1]).unwrap(), q(1));
        assert_eq!(ch_recursion(1, 0, &vec![1], &vec![]).unwrap(), q(1));
        // pairs of lines through four points
        assert_eq!(ch_recursion(2, 1, &vec![], &vec![2]).unwrap(), q(3));
        // smooth conic through five points
        assert_eq!(ch_recursion(2, 0, &vec![], &vec![2]).unwrap(), q(1));
        // conics through four points tangent to the line
        assert_eq!(ch_recursion(2, 0, &vec![], &vec![0, 1]).unwrap(), q(2));
    }

    #[test]
    fn ch_severi_degrees() {
        // classical nodal plane curve counts
        assert_eq!(ch_recursion(3, 1, &vec![], &vec![3]).unwrap(), q(12));
        assert_eq!(ch_recursion(3, 2, &vec![], &vec![3]).unwrap(), q(21));
        assert_eq!(ch_recursion(3, 3, &vec![], &vec![3]).unwrap(), q(15));
        assert_eq!(ch_recursion(4, 1, &vec![], &vec![4]).unwrap(), q(27));
        assert_eq!(ch_recursion(4, 2, &vec![], &vec![4]).unwrap(), q(225));
    }

    #[test]
    fn ch_rational_row_vs_kontsevich() {
        // Through degree 3 every maximally nodal configuration has rational
        // components only, so the Severi degree equals the rational count.
        let nd = kontsevich_recursion(3);
        for d in 1..=3i64 {
            let delta = (d - 1) * (d - 2) / 2;
            let v = ch_recursion(d, delta, &vec![], &vec![d as u32]).unwrap();
            assert_eq!(v, nd[d as usize - 1], "degree {}", d);
        }
        // At degree 4 the Severi degree also counts smooth-cubic-plus-line
        // configurations: 620 + C(11,9) = 675.
        let v = ch_recursion(4, 3, &vec![], &vec![4]).unwrap();
        assert_eq!(v, q(675));
    }

    #[test]
    fn ch_rejects_bad_profile() {
        assert!(ch_recursion(3, 0, &vec![1], &vec![1]).is_err());
    }

    #[test]
    fn hurwitz_small_cases() {
        // single transposition lands on cycle type (2)
        assert_eq!(
            hurwitz_bruteforce(2, &[2], 1),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        // no transpositions: identity only
        assert_eq!(
            hurwitz_bruteforce(3, &[1, 1, 1], 0),
            BigRational::new(BigInt::from(1), BigInt::from(6))
        );
        // parity obstruction
        assert_eq!(hurwitz_bruteforce(3, &[3], 1), BigRational::zero());
        // two transpositions in S_3 composing to a 3-cycle: (ab)(cd) pairs
        // giving 3-cycles: of the 9 pairs, 6 give 3-cycles -> 6/6 = 1
        assert_eq!(hurwitz_bruteforce(3, &[3], 2), q(1));
    }

    #[test]
    fn hurwitz_polynomial_growth() {
        // classical simple Hurwitz number H_4((4)) for d=3, mu=(3):
        // r = 4 transpositions, genus 1 covers: value 9 (from literature: h_{1,(3)} = 9)
        let v = hurwitz_bruteforce(3, &[3], 4);
        assert_eq!(v.to_f64().unwrap(), 9.0);
    }
}
