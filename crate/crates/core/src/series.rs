//! Sparse multigraded Laurent series over exact rationals: the arithmetic
//! kernel shared by every generating function in the engine.
//!
//! A `Series` maps canonical `Monomial`s to `BigRational` coefficients inside
//! a finite truncation window (`Caps`). Within the window all arithmetic is
//! exact; no coefficient is ever approximated.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, One, Signed, Zero};

use crate::error::{EngineError, Result};
use crate::ring::{RelativePairDescriptor, RingDescriptor, Q};

/// Sparse variable keys, ordered canonically: kind, then multiplicity, then
/// basis index. P-kinds sort before Q-kinds, which makes the sorted monomial
/// record coincide with Weyl normal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    /// Interior-insertion variable dual to an ambient (or absolute) class.
    Theta(u8),
    /// Interior-insertion variable in a rubber context.
    Beta(u8),
    /// Phase-fixing variable of the Hamiltonian context; odd in builtins.
    Sigma(u8),
    /// Non-phase-fixing variable of the Hamiltonian context.
    Tau(u8),
    /// Boundary contact of multiplicity `n` dual to class `i` (zero section).
    P { n: u32, i: u8 },
    /// Auxiliary copy of `P` used on relative sides and interfaces.
    PTilde { n: u32, i: u8 },
    /// Boundary contact of multiplicity `n` dual to class `i` (infinity section).
    Q { n: u32, i: u8 },
    /// Auxiliary copy of `Q`.
    QTilde { n: u32, i: u8 },
}

impl VarKey {
    pub fn is_p_kind(&self) -> bool {
        matches!(self, VarKey::P { .. } | VarKey::PTilde { .. })
    }

    pub fn is_q_kind(&self) -> bool {
        matches!(self, VarKey::Q { .. } | VarKey::QTilde { .. })
    }

    pub fn multiplicity(&self) -> u32 {
        match self {
            VarKey::P { n, .. }
            | VarKey::PTilde { n, .. }
            | VarKey::Q { n, .. }
            | VarKey::QTilde { n, .. } => *n,
            _ => 0,
        }
    }
}

/// Which family of generating functions a universe hosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextKind {
    /// Absolute Gromov-Witten potentials: hbar, z, theta.
    Absolute,
    /// Relative potentials F: hbar, z, theta, p-tilde.
    Relative,
    /// Rubber potentials A and the Weyl algebra: hbar, lambda, z, beta, p, q.
    Rubber,
    /// Hamiltonian algebra: hbar, z, sigma, tau, p, q.
    Hamiltonian,
}

/// The semantic context for monomials: variable degrees, the pairing used in
/// contractions, and lattice data. Immutable and shared via `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    pub name: String,
    pub kind: ContextKind,
    pub deg_hbar: i64,
    pub z_rank: usize,
    /// Degree of z^{e_k} per lattice generator.
    pub z_degrees: Vec<i64>,
    /// <c_1(L), e_k> per lattice generator; zero outside rubber contexts.
    pub z_bundle: Vec<i64>,
    pub theta_class_degrees: Vec<i64>,
    pub beta_class_degrees: Vec<i64>,
    pub sigma_class_degrees: Vec<i64>,
    pub tau_class_degrees: Vec<i64>,
    /// Class degrees indexing the p/q variables.
    pub pq_class_degrees: Vec<i64>,
    /// Inverse pairing g^{ij} on the p/q class ring.
    pub pairing_inv: Vec<Vec<Q>>,
}

impl Universe {
    /// Rubber context over (X, L) where `ring` carries the bundle data.
    pub fn rubber(ring: &RingDescriptor) -> Arc<Universe> {
        let rank = ring.curve_rank;
        let z_degrees = (0..rank)
            .map(|k| 2 * (ring.c1_tangent[k] + ring.c1_bundle[k]))
            .collect();
        Arc::new(Universe {
            name: format!("rubber({})", ring.name),
            kind: ContextKind::Rubber,
            deg_hbar: -2 * (ring.dim() - 2),
            z_rank: rank,
            z_degrees,
            z_bundle: ring.c1_bundle.clone(),
            theta_class_degrees: vec![],
            beta_class_degrees: ring.basis.iter().map(|&(_, d)| d).collect(),
            sigma_class_degrees: vec![],
            tau_class_degrees: vec![],
            pq_class_degrees: ring.basis.iter().map(|&(_, d)| d).collect(),
            pairing_inv: ring.pairing_inv.clone(),
        })
    }

    /// Relative context over (Z, D): theta for ambient classes, p-tilde for
    /// divisor classes.
    pub fn relative(pair: &RelativePairDescriptor) -> Arc<Universe> {
        let rank = pair.ambient.curve_rank;
        Arc::new(Universe {
            name: format!("relative({})", pair.name),
            kind: ContextKind::Relative,
            deg_hbar: -2 * (pair.ambient.dim() - 3),
            z_rank: rank,
            z_degrees: (0..rank).map(|k| 2 * pair.ambient.c1_tangent[k]).collect(),
            z_bundle: vec![0; rank],
            theta_class_degrees: pair.ambient.basis.iter().map(|&(_, d)| d).collect(),
            beta_class_degrees: vec![],
            sigma_class_degrees: vec![],
            tau_class_degrees: vec![],
            pq_class_degrees: pair.divisor.basis.iter().map(|&(_, d)| d).collect(),
            pairing_inv: pair.divisor.pairing_inv.clone(),
        })
    }

    /// Absolute genus-zero potential context over X: theta and z only.
    pub fn absolute(ring: &RingDescriptor) -> Arc<Universe> {
        let rank = ring.curve_rank;
        Arc::new(Universe {
            name: format!("absolute({})", ring.name),
            kind: ContextKind::Absolute,
            deg_hbar: -2 * (ring.dim() - 3),
            z_rank: rank,
            z_degrees: (0..rank).map(|k| 2 * ring.c1_tangent[k]).collect(),
            z_bundle: vec![0; rank],
            theta_class_degrees: ring.basis.iter().map(|&(_, d)| d).collect(),
            beta_class_degrees: vec![],
            sigma_class_degrees: vec![],
            tau_class_degrees: vec![],
            pq_class_degrees: vec![],
            pairing_inv: vec![],
        })
    }

    /// Hamiltonian context over (X, L) with chosen phase-fixing classes of
    /// degrees `sigma_degrees` and non-phase-fixing classes `tau_degrees`.
    pub fn hamiltonian(
        ring: &RingDescriptor,
        sigma_degrees: Vec<i64>,
        tau_degrees: Vec<i64>,
    ) -> Arc<Universe> {
        let rank = ring.curve_rank;
        let z_degrees = (0..rank)
            .map(|k| 2 * (ring.c1_tangent[k] + ring.c1_bundle[k]))
            .collect();
        Arc::new(Universe {
            name: format!("hamiltonian({})", ring.name),
            kind: ContextKind::Hamiltonian,
            deg_hbar: -2 * (ring.dim() - 2),
            z_rank: rank,
            z_degrees,
            z_bundle: ring.c1_bundle.clone(),
            theta_class_degrees: vec![],
            beta_class_degrees: vec![],
            sigma_class_degrees: sigma_degrees,
            tau_class_degrees: tau_degrees,
            pq_class_degrees: ring.basis.iter().map(|&(_, d)| d).collect(),
            pairing_inv: ring.pairing_inv.clone(),
        })
    }

    pub fn var_degree(&self, v: VarKey) -> i64 {
        match v {
            VarKey::Theta(i) => 2 - self.theta_class_degrees[i as usize],
            VarKey::Beta(i) => 2 - self.beta_class_degrees[i as usize],
            VarKey::Sigma(i) => -1 - self.sigma_class_degrees[i as usize],
            VarKey::Tau(i) => 2 - self.tau_class_degrees[i as usize],
            VarKey::P { n, i } | VarKey::PTilde { n, i } => {
                2 - self.pq_class_degrees[i as usize] - 2 * n as i64
            }
            VarKey::Q { n, i } | VarKey::QTilde { n, i } => {
                2 - self.pq_class_degrees[i as usize] + 2 * n as i64
            }
        }
    }

    pub fn var_parity(&self, v: VarKey) -> u8 {
        (self.var_degree(v).rem_euclid(2)) as u8
    }

    pub fn same_as(&self, other: &Universe) -> bool {
        self == other
    }
}

/// Truncation window. Arithmetic inside the window is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    pub max_z: Vec<u32>,
    pub max_p_weight: u32,
    pub max_q_weight: u32,
    /// Bounds the total interior-insertion order (theta, beta, sigma, tau).
    pub max_theta_order: u32,
    pub hbar_min: i32,
    pub hbar_max: i32,
    pub max_lambda: u32,
}

impl Caps {
    pub fn new(
        max_z: Vec<u32>,
        max_p_weight: u32,
        max_q_weight: u32,
        max_theta_order: u32,
        hbar_min: i32,
        hbar_max: i32,
        max_lambda: u32,
    ) -> Caps {
        Caps {
            max_z,
            max_p_weight,
            max_q_weight,
            max_theta_order,
            hbar_min,
            hbar_max,
            max_lambda,
        }
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        if m.hbar < self.hbar_min || m.hbar > self.hbar_max || m.lambda > self.max_lambda {
            return false;
        }
        if m.z.len() != self.max_z.len() {
            return false;
        }
        if m.z.iter().zip(&self.max_z).any(|(&a, &b)| a > b) {
            return false;
        }
        m.p_weight() <= self.max_p_weight
            && m.q_weight() <= self.max_q_weight
            && m.interior_order() <= self.max_theta_order
    }

    /// Componentwise intersection of two windows.
    pub fn meet(&self, other: &Caps) -> Caps {
        Caps {
            max_z: self
                .max_z
                .iter()
                .zip(&other.max_z)
                .map(|(&a, &b)| a.min(b))
                .collect(),
            max_p_weight: self.max_p_weight.min(other.max_p_weight),
            max_q_weight: self.max_q_weight.min(other.max_q_weight),
            max_theta_order: self.max_theta_order.min(other.max_theta_order),
            hbar_min: self.hbar_min.max(other.hbar_min),
            hbar_max: self.hbar_max.min(other.hbar_max),
            max_lambda: self.max_lambda.min(other.max_lambda),
        }
    }

    /// Upper bound on the total termination weight a monomial may carry.
    fn weight_capacity(&self) -> u32 {
        self.max_z.iter().sum::<u32>()
            + self.max_p_weight
            + self.max_q_weight
            + self.max_theta_order
            + self.max_lambda
    }
}

/// Canonical exponent record: hbar (Laurent), lambda, the z lattice vector and
/// sorted sparse variable exponents. Odd-parity variables carry exponent one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub hbar: i32,
    pub lambda: u32,
    pub z: Vec<u32>,
    pub vars: Vec<(VarKey, u32)>,
}

impl Monomial {
    pub fn unit(z_rank: usize) -> Monomial {
        Monomial {
            hbar: 0,
            lambda: 0,
            z: vec![0; z_rank],
            vars: Vec::new(),
        }
    }

    pub fn with_hbar(mut self, e: i32) -> Monomial {
        self.hbar = e;
        self
    }

    pub fn with_lambda(mut self, e: u32) -> Monomial {
        self.lambda = e;
        self
    }

    pub fn with_z(mut self, z: Vec<u32>) -> Monomial {
        self.z = z;
        self
    }

    /// Multiplies in `v^e`, keeping the record sorted.
    pub fn with_var(mut self, v: VarKey, e: u32) -> Monomial {
        if e == 0 {
            return self;
        }
        match self.vars.binary_search_by(|probe| probe.0.cmp(&v)) {
            Ok(idx) => self.vars[idx].1 += e,
            Err(idx) => self.vars.insert(idx, (v, e)),
        }
        self
    }

    pub fn exponent(&self, v: VarKey) -> u32 {
        self.vars
            .binary_search_by(|probe| probe.0.cmp(&v))
            .map(|idx| self.vars[idx].1)
            .unwrap_or(0)
    }

    pub fn is_unit(&self) -> bool {
        self.hbar == 0 && self.lambda == 0 && self.z.iter().all(|&d| d == 0) && self.vars.is_empty()
    }

    pub fn degree(&self, u: &Universe) -> i64 {
        let mut d = self.hbar as i64 * u.deg_hbar - 2 * self.lambda as i64;
        for (k, &e) in self.z.iter().enumerate() {
            d += e as i64 * u.z_degrees[k];
        }
        for &(v, e) in &self.vars {
            d += e as i64 * u.var_degree(v);
        }
        d
    }

    pub fn p_weight(&self) -> u32 {
        self.vars
            .iter()
            .filter(|(v, _)| v.is_p_kind())
            .map(|(v, e)| v.multiplicity() * e)
            .sum()
    }

    pub fn q_weight(&self) -> u32 {
        self.vars
            .iter()
            .filter(|(v, _)| v.is_q_kind())
            .map(|(v, e)| v.multiplicity() * e)
            .sum()
    }

    pub fn interior_order(&self) -> u32 {
        self.vars
            .iter()
            .filter(|(v, _)| {
                matches!(
                    v,
                    VarKey::Theta(_) | VarKey::Beta(_) | VarKey::Sigma(_) | VarKey::Tau(_)
                )
            })
            .map(|(_, e)| e)
            .sum()
    }

    /// Weight used for exp/log termination; excludes hbar.
    pub fn termination_weight(&self) -> u32 {
        self.lambda + self.z.iter().sum::<u32>() + self.interior_order() + self.p_weight()
            + self.q_weight()
    }

    /// <c_1(L), d> for this monomial's z-part; the balance target.
    pub fn bundle_pairing(&self, u: &Universe) -> i64 {
        self.z
            .iter()
            .zip(&u.z_bundle)
            .map(|(&d, &b)| d as i64 * b)
            .sum()
    }

    /// Koszul-sign product of two canonical monomials; None when an odd
    /// variable would square to zero.
    pub fn mul(&self, other: &Monomial, u: &Universe) -> Option<(Monomial, i8)> {
        debug_assert_eq!(self.z.len(), other.z.len());
        let mut sign: i8 = 1;
        // Koszul crossings: each odd unit of `other` passes every odd unit of
        // `self` with a strictly larger key. Records are tiny, O(n*m) is fine.
        for &(bv, be) in &other.vars {
            if u.var_parity(bv) == 1 && be % 2 == 1 {
                let mut crossings = 0u32;
                for &(av, ae) in &self.vars {
                    if av > bv && u.var_parity(av) == 1 {
                        crossings += ae;
                    }
                }
                if crossings % 2 == 1 {
                    sign = -sign;
                }
            }
        }
        // merge
        let mut out: Vec<(VarKey, u32)> = Vec::with_capacity(self.vars.len() + other.vars.len());
        let mut ai = 0;
        let mut bi = 0;
        while ai < self.vars.len() || bi < other.vars.len() {
            let take_a = match (self.vars.get(ai), other.vars.get(bi)) {
                (Some(&(av, _)), Some(&(bv, _))) => av <= bv,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_a {
                let (av, ae) = self.vars[ai];
                if bi < other.vars.len() && other.vars[bi].0 == av {
                    let be = other.vars[bi].1;
                    let tot = ae + be;
                    if u.var_parity(av) == 1 && tot > 1 {
                        return None;
                    }
                    out.push((av, tot));
                    ai += 1;
                    bi += 1;
                } else {
                    out.push((av, ae));
                    ai += 1;
                }
            } else {
                out.push(other.vars[bi]);
                bi += 1;
            }
        }
        let z = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(&a, &b)| a + b)
            .collect();
        Some((
            Monomial {
                hbar: self.hbar + other.hbar,
                lambda: self.lambda + other.lambda,
                z,
                vars: out,
            },
            sign,
        ))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut toks: Vec<String> = Vec::new();
        if self.hbar != 0 {
            toks.push(format!("h:{}", self.hbar));
        }
        if self.lambda != 0 {
            toks.push(format!("l:{}", self.lambda));
        }
        if self.z.iter().any(|&d| d != 0) {
            toks.push(format!(
                "z:{}",
                self.z
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
        }
        for &(v, e) in &self.vars {
            let base = match v {
                VarKey::Theta(i) => format!("th:{}", i),
                VarKey::Beta(i) => format!("b:{}", i),
                VarKey::Sigma(i) => format!("s:{}", i),
                VarKey::Tau(i) => format!("t:{}", i),
                VarKey::P { n, i } => format!("p:{}:{}", n, i),
                VarKey::PTilde { n, i } => format!("pt:{}:{}", n, i),
                VarKey::Q { n, i } => format!("q:{}:{}", n, i),
                VarKey::QTilde { n, i } => format!("qt:{}:{}", n, i),
            };
            if e == 1 {
                toks.push(base);
            } else {
                toks.push(format!("{}:^{}", base, e));
            }
        }
        if toks.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", toks.join(" "))
        }
    }
}

/// A sparse series: monomial -> exact rational, truncated to `caps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    universe: Arc<Universe>,
    caps: Caps,
    terms: BTreeMap<Monomial, Q>,
}

impl Series {
    pub fn zero(universe: Arc<Universe>, caps: Caps) -> Series {
        Series {
            universe,
            caps,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(universe: Arc<Universe>, caps: Caps) -> Series {
        let rank = universe.z_rank;
        let mut s = Series::zero(universe, caps);
        s.add_term(Monomial::unit(rank), Q::one());
        s
    }

    pub fn monomial(universe: Arc<Universe>, caps: Caps, m: Monomial, c: Q) -> Series {
        let mut s = Series::zero(universe, caps);
        s.add_term(m, c);
        s
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coefficient(&Monomial::unit(self.universe.z_rank))
    }

    /// Adds `c * m`, pruning zeros and clipping to caps.
    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() || !self.caps.contains(&m) {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_universe(&self, other: &Series) -> Result<()> {
        if !self.universe.same_as(&other.universe) {
            return Err(EngineError::UniverseMismatch {
                left: self.universe.name.clone(),
                right: other.universe.name.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_universe(other)?;
        let caps = self.caps.meet(&other.caps);
        let mut out = Series::zero(self.universe.clone(), caps);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Series {
        if c.is_zero() {
            return Series::zero(self.universe.clone(), self.caps.clone());
        }
        let mut out = Series::zero(self.universe.clone(), self.caps.clone());
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Plain supercommutative product with Koszul signs; z-exponents add.
    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_universe(other)?;
        let caps = self.caps.meet(&other.caps);
        let mut out = Series::zero(self.universe.clone(), caps);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, sign)) = ma.mul(mb, &self.universe) {
                    if !out.caps.contains(&m) {
                        continue;
                    }
                    let mut c = ca * cb;
                    if sign < 0 {
                        c = -c;
                    }
                    out.add_term(m, c);
                }
            }
        }
        Ok(out)
    }

    /// Formal left partial derivative with respect to `v`.
    pub fn derive(&self, v: VarKey) -> Series {
        let mut out = Series::zero(self.universe.clone(), self.caps.clone());
        let v_odd = self.universe.var_parity(v) == 1;
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let mut vars: Vec<(VarKey, u32)> = Vec::with_capacity(m.vars.len());
            let mut sign = 1i8;
            for &(w, we) in &m.vars {
                if w == v {
                    if we > 1 {
                        vars.push((w, we - 1));
                    }
                } else {
                    if v_odd && w < v && self.universe.var_parity(w) == 1 && we % 2 == 1 {
                        sign = -sign;
                    }
                    vars.push((w, we));
                }
            }
            let dm = Monomial {
                hbar: m.hbar,
                lambda: m.lambda,
                z: m.z.clone(),
                vars,
            };
            let mut coeff = c * Q::from_integer(BigInt::from(e));
            if sign < 0 {
                coeff = -coeff;
            }
            out.add_term(dm, coeff);
        }
        out
    }

    /// Drops monomials outside `caps`; idempotent.
    pub fn truncate(&self, caps: &Caps) -> Series {
        let caps = self.caps.meet(caps);
        let mut out = Series::zero(self.universe.clone(), caps);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Restricts to monomials satisfying `pred`.
    pub fn filter<F: Fn(&Monomial) -> bool>(&self, pred: F) -> Series {
        let mut out = Series::zero(self.universe.clone(), self.caps.clone());
        for (m, c) in &self.terms {
            if pred(m) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Rebuilds each term through `f`; used for renames and substitutions
    /// that stay within one universe.
    pub fn map_terms<F: Fn(&Monomial, &Q) -> Option<(Monomial, Q)>>(&self, f: F) -> Series {
        let mut out = Series::zero(self.universe.clone(), self.caps.clone());
        for (m, c) in &self.terms {
            if let Some((m2, c2)) = f(m, c) {
                out.add_term(m2, c2);
            }
        }
        out
    }

    pub fn grade_set(&self) -> Vec<i64> {
        let mut degs: Vec<i64> = self
            .terms
            .keys()
            .map(|m| m.degree(&self.universe))
            .collect();
        degs.sort_unstable();
        degs.dedup();
        degs
    }

    pub fn is_homogeneous(&self, d: i64) -> bool {
        self.terms.keys().all(|m| m.degree(&self.universe) == d)
    }

    fn check_exp_preconditions(&self) -> Result<()> {
        for m in self.terms.keys() {
            if m.termination_weight() == 0 {
                // pure hbar powers have weight zero as well
                return Err(if m.is_unit() {
                    EngineError::NonzeroConstantTerm
                } else {
                    EngineError::ZeroWeightTerm
                });
            }
        }
        Ok(())
    }

    /// exp(s) within caps; s must have no constant term and strictly positive
    /// termination weight per monomial.
    pub fn exp_truncated(&self) -> Result<Series> {
        self.check_exp_preconditions()?;
        let mut acc = Series::one(self.universe.clone(), self.caps.clone());
        let mut term = Series::one(self.universe.clone(), self.caps.clone());
        let bound = self.caps.weight_capacity() + 1;
        for k in 1..=bound {
            term = term.mul(self)?.scale(&Q::new(BigInt::one(), BigInt::from(k)));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// log(s) within caps; s must have constant term exactly 1. Inverse of
    /// `exp_truncated`; extracts connected data from disconnected potentials.
    pub fn log_truncated(&self) -> Result<Series> {
        if self.constant_term() != Q::one() {
            return Err(EngineError::NonzeroConstantTerm);
        }
        let one = Series::one(self.universe.clone(), self.caps.clone());
        let u = self.sub(&one)?;
        u.check_exp_preconditions()?;
        let mut acc = Series::zero(self.universe.clone(), self.caps.clone());
        let mut power = Series::one(self.universe.clone(), self.caps.clone());
        let bound = self.caps.weight_capacity() + 1;
        for k in 1..=bound {
            power = power.mul(&u)?;
            if power.is_zero() {
                break;
            }
            let mut c = Q::new(BigInt::one(), BigInt::from(k));
            if k % 2 == 0 {
                c = -c;
            }
            acc = acc.add(&power.scale(&c))?;
        }
        Ok(acc)
    }

    /// Largest coefficient denominator-free check helper: true when every
    /// coefficient is an integer.
    pub fn all_integer(&self) -> bool {
        self.terms.values().all(|c| c.denom().is_one() || c.is_zero())
    }

    /// Sum of absolute values of numerators; a cheap fingerprint for tests.
    pub fn l1_numerator(&self) -> BigInt {
        self.terms.values().map(|c| c.numer().abs()).sum()
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) {}", c, m)?;
        }
        Ok(())
    }
}
