//! Cohomological context for a rubber pair (X, L) or a relative pair (Z, D):
//! basis, grading, intersection pairing, line-bundle multiplication and
//! restriction matrices. All variable degrees and contraction coefficients
//! derive from these descriptors.

use num::{BigInt, BigRational, One, Zero};

use crate::error::{EngineError, Result};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Static description of a graded ring H*(X) with the data the engine needs.
///
/// Immutable after construction and freely shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct RingDescriptor {
    pub name: String,
    /// Ordered basis as (label, cohomological degree). Degrees are even.
    pub basis: Vec<(String, i64)>,
    /// Poincare pairing g_{ij}, symmetric and nondegenerate.
    pub pairing: Vec<Vec<Q>>,
    /// Inverse pairing g^{ij}, computed exactly on construction.
    pub pairing_inv: Vec<Vec<Q>>,
    /// Rank of the curve lattice B_1(X); effective cone is the nonnegative orthant.
    pub curve_rank: usize,
    /// <c_1(TX), generator_k> per lattice generator.
    pub c1_tangent: Vec<i64>,
    /// <c_1(L), generator_k> per lattice generator.
    pub c1_bundle: Vec<i64>,
    /// Bundle multiplication N_{ij}: c_i cup c_1(L) = sum_j N_{ij} c_j.
    pub bundle_matrix: Vec<Vec<Q>>,
}

impl RingDescriptor {
    pub fn new(
        name: &str,
        basis: Vec<(String, i64)>,
        pairing: Vec<Vec<Q>>,
        curve_rank: usize,
        c1_tangent: Vec<i64>,
        c1_bundle: Vec<i64>,
        bundle_matrix: Vec<Vec<Q>>,
    ) -> Result<Self> {
        let n = basis.len();
        if pairing.len() != n || pairing.iter().any(|r| r.len() != n) {
            return Err(EngineError::InvalidRing("pairing has wrong shape".into()));
        }
        for (_, d) in &basis {
            if d % 2 != 0 || *d < 0 {
                return Err(EngineError::InvalidRing(
                    "basis degrees must be even and nonnegative".into(),
                ));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if pairing[i][j] != pairing[j][i] {
                    return Err(EngineError::InvalidRing("pairing not symmetric".into()));
                }
            }
        }
        let pairing_inv = invert_matrix(&pairing)
            .ok_or_else(|| EngineError::InvalidRing("pairing is degenerate".into()))?;
        if c1_tangent.len() != curve_rank || c1_bundle.len() != curve_rank {
            return Err(EngineError::InvalidRing("c1 vectors have wrong length".into()));
        }
        if bundle_matrix.len() != n || bundle_matrix.iter().any(|r| r.len() != n) {
            return Err(EngineError::InvalidRing("bundle matrix has wrong shape".into()));
        }
        // N raises cohomological degree by exactly 2
        for i in 0..n {
            for j in 0..n {
                if !bundle_matrix[i][j].is_zero() && basis[j].1 != basis[i].1 + 2 {
                    return Err(EngineError::InvalidRing(
                        "bundle matrix entry violates degree shift".into(),
                    ));
                }
            }
        }
        Ok(RingDescriptor {
            name: name.to_string(),
            basis,
            pairing,
            pairing_inv,
            curve_rank,
            c1_tangent,
            c1_bundle,
            bundle_matrix,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].1
    }

    /// Complex dimension, read off the top cohomological degree.
    pub fn dim(&self) -> i64 {
        self.basis.iter().map(|&(_, d)| d).max().unwrap_or(0) / 2
    }

    /// One-line form used in series file headers; see `parse_inline`.
    pub fn to_inline(&self) -> String {
        let basis = self
            .basis
            .iter()
            .map(|(l, d)| format!("{}:{}", l, d))
            .collect::<Vec<_>>()
            .join(",");
        let pairing = matrix_to_inline(&self.pairing);
        let bundle = matrix_to_inline(&self.bundle_matrix);
        format!(
            "ring {} basis {} pairing {} lattice {} c1t {} c1b {} bundle {}",
            self.name,
            basis,
            pairing,
            self.curve_rank,
            ints_to_inline(&self.c1_tangent),
            ints_to_inline(&self.c1_bundle),
            bundle,
        )
    }

    /// Parses the form produced by `to_inline`. Also accepted from ring
    /// configuration files for non-builtin targets.
    pub fn parse_inline(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.first() != Some(&"ring") {
            return Err(EngineError::Parse("expected `ring` block".into()));
        }
        let mut name = None;
        let mut basis = None;
        let mut pairing = None;
        let mut lattice = None;
        let mut c1t = None;
        let mut c1b = None;
        let mut bundle = None;
        let mut i = 1;
        name.replace(
            toks.get(i)
                .ok_or_else(|| EngineError::Parse("missing ring name".into()))?
                .to_string(),
        );
        i += 1;
        while i < toks.len() {
            let key = toks[i];
            let val = toks
                .get(i + 1)
                .ok_or_else(|| EngineError::Parse(format!("missing value for `{}`", key)))?;
            match key {
                "basis" => {
                    let mut b = Vec::new();
                    for part in val.split(',') {
                        let (l, d) = part
                            .split_once(':')
                            .ok_or_else(|| EngineError::Parse("bad basis entry".into()))?;
                        b.push((
                            l.to_string(),
                            d.parse::<i64>()
                                .map_err(|_| EngineError::Parse("bad basis degree".into()))?,
                        ));
                    }
                    basis.replace(b);
                }
                "pairing" => {
                    pairing.replace(matrix_from_inline(val)?);
                }
                "lattice" => {
                    lattice.replace(
                        val.parse::<usize>()
                            .map_err(|_| EngineError::Parse("bad lattice rank".into()))?,
                    );
                }
                "c1t" => {
                    c1t.replace(ints_from_inline(val)?);
                }
                "c1b" => {
                    c1b.replace(ints_from_inline(val)?);
                }
                "bundle" => {
                    bundle.replace(matrix_from_inline(val)?);
                }
                other => {
                    return Err(EngineError::Parse(format!("unknown ring key `{}`", other)));
                }
            }
            i += 2;
        }
        let name = name.unwrap();
        let basis = basis.ok_or_else(|| EngineError::Parse("missing basis".into()))?;
        let n = basis.len();
        let pairing = pairing.ok_or_else(|| EngineError::Parse("missing pairing".into()))?;
        let lattice = lattice.unwrap_or(0);
        let c1t = c1t.unwrap_or_else(|| vec![0; lattice]);
        let c1b = c1b.unwrap_or_else(|| vec![0; lattice]);
        let bundle = bundle.unwrap_or_else(|| vec![vec![Q::zero(); n]; n]);
        RingDescriptor::new(&name, basis, pairing, lattice, c1t, c1b, bundle)
    }
}

fn ints_to_inline(v: &[i64]) -> String {
    if v.is_empty() {
        "-".to_string()
    } else {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn ints_from_inline(s: &str) -> Result<Vec<i64>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.parse::<i64>().map_err(|_| EngineError::Parse("bad integer list".into())))
        .collect()
}

fn matrix_to_inline(m: &[Vec<Q>]) -> String {
    if m.is_empty() {
        return "-".to_string();
    }
    m.iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn matrix_from_inline(s: &str) -> Result<Vec<Vec<Q>>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.parse::<Q>()
                        .map_err(|_| EngineError::Parse(format!("bad rational `{}`", x)))
                })
                .collect()
        })
        .collect()
}

/// Exact inverse by Gauss-Jordan elimination; None when singular.
pub fn invert_matrix(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let av = &a[col][j] * &f;
                a[r][j] = &a[r][j] - &av;
                let iv = &inv[col][j] * &f;
                inv[r][j] = &inv[r][j] - &iv;
            }
        }
    }
    Some(inv)
}

/// Standard descriptors: the point, P^1, and P^2, with trivial bundle data.
pub fn builtin_ring(name: &str) -> Result<RingDescriptor> {
    match name {
        "point" => RingDescriptor::new(
            "point",
            vec![("1".into(), 0)],
            vec![vec![Q::one()]],
            0,
            vec![],
            vec![],
            vec![vec![Q::zero()]],
        ),
        "p1" => RingDescriptor::new(
            "p1",
            vec![("c0".into(), 0), ("c2".into(), 2)],
            vec![vec![Q::zero(), Q::one()], vec![Q::one(), Q::zero()]],
            1,
            vec![2],
            vec![0],
            vec![vec![Q::zero(); 2]; 2],
        ),
        "p2" => RingDescriptor::new(
            "p2",
            vec![("1".into(), 0), ("H".into(), 2), ("H2".into(), 4)],
            vec![
                vec![Q::zero(), Q::zero(), Q::one()],
                vec![Q::zero(), Q::one(), Q::zero()],
                vec![Q::one(), Q::zero(), Q::zero()],
            ],
            1,
            vec![3],
            vec![0],
            vec![vec![Q::zero(); 3]; 3],
        ),
        other => Err(EngineError::UnknownName(other.to_string())),
    }
}

/// A rank-k ring of degree-0 classes with the identity pairing and no curve
/// lattice. Useful as the simplest nontrivial Weyl-algebra context.
pub fn toy_ring(k: usize) -> RingDescriptor {
    RingDescriptor::new(
        &format!("toy{}", k),
        (0..k).map(|i| (format!("e{}", i), 0)).collect(),
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { Q::one() } else { Q::zero() })
                    .collect()
            })
            .collect(),
        0,
        vec![],
        vec![],
        vec![vec![Q::zero(); k]; k],
    )
    .expect("toy ring data is valid")
}

/// Matrix of cup product with the hyperplane class on a projective-space ring
/// (or the point, where it is zero).
fn hyperplane_matrix(ring: &RingDescriptor) -> Vec<Vec<Q>> {
    let n = ring.rank();
    let mut m = vec![vec![Q::zero(); n]; n];
    // basis is ordered by degree for the builtins: H^k -> H^(k+1)
    for i in 0..n {
        for j in 0..n {
            if ring.degree(j) == ring.degree(i) + 2 {
                m[i][j] = Q::one();
            }
        }
    }
    m
}

/// Equips a projective-space ring with L = O(m).
pub fn line_bundle_over(ring: &RingDescriptor, m: i64) -> Result<RingDescriptor> {
    let mut out = ring.clone();
    if ring.curve_rank == 0 {
        // point target: m is ignored, the bundle is trivial
        return Ok(out);
    }
    out.c1_bundle = vec![m];
    let h = hyperplane_matrix(ring);
    out.bundle_matrix = h
        .into_iter()
        .map(|row| row.into_iter().map(|x| x * qi(m)).collect())
        .collect();
    out.name = format!("{}(O({}))", ring.name, m);
    Ok(out)
}

/// A relative pair (Z, D): ambient ring, divisor ring carrying the normal
/// bundle, restriction and cup matrices, lattice pushforward and the submodule
/// V = im(cup [D]).
#[derive(Debug, Clone, PartialEq)]
pub struct RelativePairDescriptor {
    pub name: String,
    pub ambient: RingDescriptor,
    pub divisor: RingDescriptor,
    /// M_{jl}: i* e_j = sum_l M_{jl} c_l (degree-preserving).
    pub restriction: Vec<Vec<Q>>,
    /// N_{jl}: e_j cup [D] = sum_l N_{jl} e_l (degree +2).
    pub divisor_cup: Vec<Vec<Q>>,
    /// i_*: B_1(D) -> B_1(Z); column per divisor lattice generator.
    pub pushforward: Vec<Vec<i64>>,
    /// Marks ambient basis elements lying in V = im(cup [D]).
    pub v_mask: Vec<bool>,
}

impl RelativePairDescriptor {
    fn validate(self) -> Result<Self> {
        let az = self.ambient.rank();
        let ad = self.divisor.rank();
        if self.restriction.len() != az || self.restriction.iter().any(|r| r.len() != ad) {
            return Err(EngineError::InvalidRing("restriction matrix shape".into()));
        }
        if self.divisor_cup.len() != az || self.divisor_cup.iter().any(|r| r.len() != az) {
            return Err(EngineError::InvalidRing("divisor cup matrix shape".into()));
        }
        for j in 0..az {
            for l in 0..ad {
                if !self.restriction[j][l].is_zero()
                    && self.ambient.degree(j) != self.divisor.degree(l)
                {
                    return Err(EngineError::InvalidRing("restriction must preserve degree".into()));
                }
            }
            for l in 0..az {
                if !self.divisor_cup[j][l].is_zero()
                    && self.ambient.degree(l) != self.ambient.degree(j) + 2
                {
                    return Err(EngineError::InvalidRing("cup [D] must raise degree by 2".into()));
                }
            }
        }
        Ok(self)
    }

    /// Expansion e_j = sum_k a_k (e_k cup [D]) when e_j lies in V, as exact
    /// rational coordinates a_k; None outside V.
    pub fn v_expansion(&self, j: usize) -> Option<Vec<Q>> {
        if !self.v_mask[j] {
            return None;
        }
        // Solve a . N = e_j, i.e. N^T a = e_j, by elimination.
        let n = self.ambient.rank();
        let mut rows: Vec<Vec<Q>> = Vec::new();
        let mut rhs: Vec<Q> = Vec::new();
        for col in 0..n {
            rows.push((0..n).map(|k| self.divisor_cup[k][col].clone()).collect());
            rhs.push(if col == j { Q::one() } else { Q::zero() });
        }
        solve_linear(rows, rhs)
    }
}

/// Solves A x = b exactly; returns any solution, None if inconsistent.
fn solve_linear(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivot_col_of_row = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let piv = (r..rows).find(|&i| !a[i][c].is_zero());
        let Some(piv) = piv else { continue };
        a.swap(r, piv);
        b.swap(r, piv);
        let p = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = &*x / &p;
        }
        b[r] = &b[r] / &p;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let v = &a[r][j] * &f;
                    a[i][j] = &a[i][j] - &v;
                }
                let v = &b[r] * &f;
                b[i] = &b[i] - &v;
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
    }
    for i in r..rows {
        if !b[i].is_zero() {
            return None;
        }
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &c) in pivot_col_of_row.iter().enumerate() {
        x[c] = b[row].clone();
    }
    Some(x)
}

/// Builtin relative pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairName {
    /// (P^1, point); rubber side is the point with the trivial bundle.
    P1Point,
    /// (P^2, line); rubber side is (P^1, O(1)).
    P2Line,
    /// (F_n, infinity section); rubber side is (P^1, O(-n)).
    Fn(i64),
    /// (P^3, plane); rubber side is (P^2, O(1)).
    P3Plane,
}

impl PairName {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "p1_point" {
            Ok(PairName::P1Point)
        } else if s == "p2_line" {
            Ok(PairName::P2Line)
        } else if s == "p3_plane" {
            Ok(PairName::P3Plane)
        } else if let Some(rest) = s.strip_prefix("fn(").and_then(|r| r.strip_suffix(')')) {
            let n = rest
                .parse::<i64>()
                .map_err(|_| EngineError::UnknownName(s.to_string()))?;
            if n < 0 {
                return Err(EngineError::UnknownName(s.to_string()));
            }
            Ok(PairName::Fn(n))
        } else {
            Err(EngineError::UnknownName(s.to_string()))
        }
    }

    pub fn as_string(&self) -> String {
        match self {
            PairName::P1Point => "p1_point".into(),
            PairName::P2Line => "p2_line".into(),
            PairName::Fn(n) => format!("fn({})", n),
            PairName::P3Plane => "p3_plane".into(),
        }
    }
}

pub fn relative_pair(name: PairName) -> Result<RelativePairDescriptor> {
    match name {
        PairName::P1Point => {
            let ambient = builtin_ring("p1")?;
            let divisor = builtin_ring("point")?; // trivial normal bundle
            RelativePairDescriptor {
                name: "p1_point".into(),
                ambient,
                divisor,
                restriction: vec![vec![Q::one()], vec![Q::zero()]],
                divisor_cup: vec![
                    vec![Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero()],
                ],
                pushforward: vec![vec![]; 1],
                v_mask: vec![false, true],
            }
            .validate()
        }
        PairName::P2Line => {
            let ambient = builtin_ring("p2")?;
            let divisor = line_bundle_over(&builtin_ring("p1")?, 1)?;
            RelativePairDescriptor {
                name: "p2_line".into(),
                ambient,
                divisor,
                restriction: vec![
                    vec![Q::one(), Q::zero()],
                    vec![Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero()],
                ],
                divisor_cup: vec![
                    vec![Q::zero(), Q::one(), Q::zero()],
                    vec![Q::zero(), Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero(), Q::zero()],
                ],
                pushforward: vec![vec![1]],
                v_mask: vec![false, true, true],
            }
            .validate()
        }
        PairName::Fn(n) => {
            // H*(F_n) basis: 1, dual of C0 (the section D), dual of the fiber f, point.
            // Intersection numbers: C0.C0 = -n, C0.f = 1, f.f = 0.
            let ambient = RingDescriptor::new(
                &format!("f{}", n),
                vec![
                    ("1".into(), 0),
                    ("S".into(), 2),
                    ("F".into(), 2),
                    ("pt".into(), 4),
                ],
                vec![
                    vec![Q::zero(), Q::zero(), Q::zero(), Q::one()],
                    vec![Q::zero(), qi(-n), Q::one(), Q::zero()],
                    vec![Q::zero(), Q::one(), Q::zero(), Q::zero()],
                    vec![Q::one(), Q::zero(), Q::zero(), Q::zero()],
                ],
                2,
                // lattice generators (C0, f); adjunction gives <c1(T), C0> = 2 - n.
                vec![2 - n, 2],
                vec![0, 0],
                vec![vec![Q::zero(); 4]; 4],
            )?;
            let divisor = line_bundle_over(&builtin_ring("p1")?, -n)?;
            RelativePairDescriptor {
                name: format!("fn({})", n),
                ambient,
                divisor,
                // i*: 1 -> c0; S -> (C0.C0) c2 = -n c2; F -> (f.C0) c2 = c2; pt -> 0
                restriction: vec![
                    vec![Q::one(), Q::zero()],
                    vec![Q::zero(), qi(-n)],
                    vec![Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero()],
                ],
                // cup with [D] = S: 1 -> S; S -> -n pt; F -> pt; pt -> 0
                divisor_cup: vec![
                    vec![Q::zero(), Q::one(), Q::zero(), Q::zero()],
                    vec![Q::zero(), Q::zero(), Q::zero(), qi(-n)],
                    vec![Q::zero(), Q::zero(), Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero(), Q::zero(), Q::zero()],
                ],
                // i_*[P^1] = C0 = (1, 0)
                pushforward: vec![vec![1], vec![0]],
                v_mask: vec![false, true, false, true],
            }
            .validate()
        }
        PairName::P3Plane => {
            let ambient = RingDescriptor::new(
                "p3",
                vec![
                    ("1".into(), 0),
                    ("H".into(), 2),
                    ("H2".into(), 4),
                    ("H3".into(), 6),
                ],
                vec![
                    vec![Q::zero(), Q::zero(), Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero(), Q::one(), Q::zero()],
                    vec![Q::zero(), Q::one(), Q::zero(), Q::zero()],
                    vec![Q::one(), Q::zero(), Q::zero(), Q::zero()],
                ],
                1,
                vec![4],
                vec![0],
                vec![vec![Q::zero(); 4]; 4],
            )?;
            let divisor = line_bundle_over(&builtin_ring("p2")?, 1)?;
            RelativePairDescriptor {
                name: "p3_plane".into(),
                ambient,
                divisor,
                restriction: vec![
                    vec![Q::one(), Q::zero(), Q::zero()],
                    vec![Q::zero(), Q::one(), Q::zero()],
                    vec![Q::zero(), Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero(), Q::zero()],
                ],
                divisor_cup: vec![
                    vec![Q::zero(), Q::one(), Q::zero(), Q::zero()],
                    vec![Q::zero(), Q::zero(), Q::one(), Q::zero()],
                    vec![Q::zero(), Q::zero(), Q::zero(), Q::one()],
                    vec![Q::zero(), Q::zero(), Q::zero(), Q::zero()],
                ],
                pushforward: vec![vec![1]],
                v_mask: vec![false, true, true, true],
            }
            .validate()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_point() {
        let r = builtin_ring("point").unwrap();
        assert_eq!(r.rank(), 1);
        assert_eq!(r.curve_rank, 0);
        assert_eq!(r.pairing, vec![vec![Q::one()]]);
    }

    #[test]
    fn builtin_p1_pairing() {
        let r = builtin_ring("p1").unwrap();
        assert_eq!(r.pairing[0][1], Q::one());
        assert_eq!(r.pairing[0][0], Q::zero());
        // pairing times inverse is the identity
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Q::zero();
                for k in 0..2 {
                    s += &r.pairing[i][k] * &r.pairing_inv[k][j];
                }
                assert_eq!(s, if i == j { Q::one() } else { Q::zero() });
            }
        }
    }

    #[test]
    fn builtin_p2_c1() {
        let r = builtin_ring("p2").unwrap();
        assert_eq!(r.c1_tangent, vec![3]);
        assert_eq!(r.dim(), 2);
    }

    #[test]
    fn unknown_ring_name() {
        assert!(matches!(builtin_ring("p7"), Err(EngineError::UnknownName(_))));
    }

    #[test]
    fn line_bundle_on_p1() {
        let r = line_bundle_over(&builtin_ring("p1").unwrap(), 1).unwrap();
        // c0 -> c2, c2 -> 0
        assert_eq!(r.bundle_matrix[0][1], Q::one());
        assert_eq!(r.bundle_matrix[1][0], Q::zero());
        assert_eq!(r.c1_bundle, vec![1]);
        let r0 = line_bundle_over(&builtin_ring("p1").unwrap(), 0).unwrap();
        assert!(r0.bundle_matrix.iter().flatten().all(|x| x.is_zero()));
        let rm = line_bundle_over(&builtin_ring("p1").unwrap(), -3).unwrap();
        assert_eq!(rm.c1_bundle, vec![-3]);
    }

    #[test]
    fn bundle_matrix_degree_shift() {
        for m in [-2i64, 1, 5] {
            let r = line_bundle_over(&builtin_ring("p2").unwrap(), m).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    if !r.bundle_matrix[i][j].is_zero() {
                        assert_eq!(r.degree(j) - r.degree(i), 2);
                    }
                }
            }
        }
    }

    #[test]
    fn p2_line_pair() {
        let p = relative_pair(PairName::P2Line).unwrap();
        // cup with the line: H -> H^2
        assert_eq!(p.divisor_cup[1][2], Q::one());
        assert_eq!(p.v_mask, vec![false, true, true]);
        // restriction/cup compatibility: M (cup H on Z) = (cup c1(L) on D) M
        let az = p.ambient.rank();
        let ad = p.divisor.rank();
        for j in 0..az {
            for l in 0..ad {
                let mut lhs = Q::zero();
                for k in 0..az {
                    lhs += &p.divisor_cup[j][k] * &p.restriction[k][l];
                }
                let mut rhs = Q::zero();
                for k in 0..ad {
                    rhs += &p.restriction[j][k] * &p.divisor.bundle_matrix[k][l];
                }
                assert_eq!(lhs, rhs, "at ({}, {})", j, l);
            }
        }
    }

    #[test]
    fn fn_pair_divisor_bundle() {
        let p = relative_pair(PairName::Fn(1)).unwrap();
        let expected = line_bundle_over(&builtin_ring("p1").unwrap(), -1).unwrap();
        assert_eq!(p.divisor, expected);
        // some valid expansion pt = sum_k a_k (e_k cup [D]) exists
        let a = p.v_expansion(3).unwrap();
        for l in 0..4 {
            let mut s = Q::zero();
            for k in 0..4 {
                s += &a[k] * &p.divisor_cup[k][l];
            }
            assert_eq!(s, if l == 3 { Q::one() } else { Q::zero() });
        }
    }

    #[test]
    fn v_expansion_p2() {
        let p = relative_pair(PairName::P2Line).unwrap();
        // H^2 = H cup [D]
        let e = p.v_expansion(2).unwrap();
        assert_eq!(e, vec![Q::zero(), Q::one(), Q::zero()]);
        // H = 1 cup [D]
        let e = p.v_expansion(1).unwrap();
        assert_eq!(e, vec![Q::one(), Q::zero(), Q::zero()]);
        assert!(p.v_expansion(0).is_none());
    }

    #[test]
    fn inline_ring_round_trip() {
        for name in ["point", "p1", "p2"] {
            let r = builtin_ring(name).unwrap();
            let s = r.to_inline();
            let back = RingDescriptor::parse_inline(&s).unwrap();
            assert_eq!(r, back);
        }
        let r = line_bundle_over(&builtin_ring("p1").unwrap(), -2).unwrap();
        let back = RingDescriptor::parse_inline(&r.to_inline()).unwrap();
        assert_eq!(r, back);
    }
}
