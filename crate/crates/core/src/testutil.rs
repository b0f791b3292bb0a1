//! Deterministic random generators for property tests. Kept in the library so
//! integration and acceptance suites can share them.

use num::BigInt;

use crate::ring::Q;
use crate::series::{Caps, ContextKind, Monomial, Series, Universe, VarKey};
use crate::weyl::WeylElement;

/// xorshift64* generator; deterministic across platforms.
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Rng64 {
        Rng64 {
            state: seed.max(1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in [0, n).
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n.max(1)
    }

    /// Uniform in [lo, hi].
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.below((hi - lo + 1) as u64) as i64)
    }

    /// Small nonzero rational with numerator in [-3, 3] and denominator in [1, 3].
    pub fn coeff(&mut self) -> Q {
        let mut n = self.range_i64(-3, 3);
        if n == 0 {
            n = 1;
        }
        let d = self.range_i64(1, 3);
        Q::new(BigInt::from(n), BigInt::from(d))
    }
}

/// A random monomial valid in `u` and inside `caps`, with a few variables.
pub fn random_monomial(rng: &mut Rng64, u: &Universe, caps: &Caps, max_vars: usize) -> Monomial {
    let mut m = Monomial::unit(u.z_rank);
    m.hbar = rng.range_i64(caps.hbar_min.max(-2) as i64, caps.hbar_max.min(2) as i64) as i32;
    for k in 0..u.z_rank {
        let zmax = caps.max_z[k].min(2);
        m.z[k] = rng.below(zmax as u64 + 1) as u32;
    }
    let nvars = rng.below(max_vars as u64 + 1) as usize;
    for _ in 0..nvars {
        let v = match u.kind {
            ContextKind::Rubber => {
                let pq_len = u.pq_class_degrees.len() as u64;
                match rng.below(3) {
                    0 if !u.beta_class_degrees.is_empty() => {
                        VarKey::Beta(rng.below(u.beta_class_degrees.len() as u64) as u8)
                    }
                    1 => VarKey::P {
                        n: rng.below(2) as u32 + 1,
                        i: rng.below(pq_len) as u8,
                    },
                    _ => VarKey::Q {
                        n: rng.below(2) as u32 + 1,
                        i: rng.below(pq_len) as u8,
                    },
                }
            }
            ContextKind::Relative => {
                let pq_len = u.pq_class_degrees.len() as u64;
                if rng.below(2) == 0 && !u.theta_class_degrees.is_empty() {
                    VarKey::Theta(rng.below(u.theta_class_degrees.len() as u64) as u8)
                } else {
                    VarKey::PTilde {
                        n: rng.below(2) as u32 + 1,
                        i: rng.below(pq_len) as u8,
                    }
                }
            }
            ContextKind::Absolute => {
                VarKey::Theta(rng.below(u.theta_class_degrees.len().max(1) as u64) as u8)
            }
            ContextKind::Hamiltonian => {
                let pq_len = u.pq_class_degrees.len() as u64;
                match rng.below(4) {
                    0 if !u.sigma_class_degrees.is_empty() => {
                        VarKey::Sigma(rng.below(u.sigma_class_degrees.len() as u64) as u8)
                    }
                    1 if !u.tau_class_degrees.is_empty() => {
                        VarKey::Tau(rng.below(u.tau_class_degrees.len() as u64) as u8)
                    }
                    2 => VarKey::P {
                        n: rng.below(2) as u32 + 1,
                        i: rng.below(pq_len) as u8,
                    },
                    _ => VarKey::Q {
                        n: rng.below(2) as u32 + 1,
                        i: rng.below(pq_len) as u8,
                    },
                }
            }
        };
        // odd variables only to the first power
        let e = if u.var_parity(v) == 1 {
            1
        } else {
            rng.below(2) as u32 + 1
        };
        let candidate = m.clone().with_var(v, e);
        if caps.contains(&candidate) && candidate.exponent(v) <= if u.var_parity(v) == 1 { 1 } else { 4 }
        {
            m = candidate;
        }
    }
    m
}

/// A random series with up to `max_terms` monomials.
pub fn random_series(rng: &mut Rng64, u: &std::sync::Arc<Universe>, caps: &Caps, max_terms: usize) -> Series {
    let mut s = Series::zero(u.clone(), caps.clone());
    let n = rng.below(max_terms as u64) + 1;
    for _ in 0..n {
        let m = random_monomial(rng, u, caps, 3);
        s.add_term(m, rng.coeff());
    }
    s
}

/// A random Weyl element in a rubber or Hamiltonian universe.
pub fn random_weyl_element(
    rng: &mut Rng64,
    u: &std::sync::Arc<Universe>,
    caps: &Caps,
    max_terms: usize,
) -> WeylElement {
    WeylElement::new(random_series(rng, u, caps, max_terms))
}

/// A random series in a relative universe (theta and p-tilde variables).
pub fn random_relative_series(
    rng: &mut Rng64,
    u: &std::sync::Arc<Universe>,
    caps: &Caps,
    max_terms: usize,
) -> Series {
    random_series(rng, u, caps, max_terms)
}
