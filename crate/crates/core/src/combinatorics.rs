//! Partitions, ED degrees, discriminant degrees and the exponent table of the
//! product formula.

use crate::error::{BtsError, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

/// An integer partition μ of d, stored in the order given by the caller.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(BtsError::InvalidInput("partition has no parts".into()));
        }
        if parts.contains(&0) {
            return Err(BtsError::InvalidInput(format!(
                "partition parts must be positive: {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    /// The empty partition (d = 0). Only produced by removing parts.
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    /// 1^d, the non-symmetric case.
    pub fn ones(d: usize) -> Self {
        Self { parts: vec![1; d] }
    }

    /// (d), the fully symmetric case.
    pub fn single(d: usize) -> Self {
        Self { parts: vec![d] }
    }

    /// Parses "2,1" or "2 1".
    pub fn parse(s: &str) -> Result<Self> {
        let parts = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| BtsError::Parse(format!("bad partition part '{p}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn d(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn s(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.parts.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn same_up_to_order(&self, other: &Partition) -> bool {
        self.sorted() == other.sorted()
    }

    /// μ(J): the parts whose index is not in J.
    pub fn remove(&self, j: SubsetJ) -> Partition {
        Partition {
            parts: self
                .parts
                .iter()
                .enumerate()
                .filter(|(k, _)| !j.contains(*k))
                .map(|(_, &p)| p)
                .collect(),
        }
    }

    /// Σ_{k∈J} μ_k.
    pub fn sum_over(&self, j: SubsetJ) -> usize {
        j.members().map(|k| self.parts[k]).sum()
    }

    /// Slot → group map: slots are laid out group by group.
    pub fn slot_groups(&self) -> Vec<usize> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(g, &p)| std::iter::repeat_n(g, p))
            .collect()
    }

    /// All partitions of d in non-increasing order.
    pub fn all_of(d: usize) -> Vec<Partition> {
        fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            for k in (1..=n.min(max)).rev() {
                cur.push(k);
                rec(n - k, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if d > 0 {
            rec(d, d, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A subset J of the part indices, stored as a bit mask (bit k = part k, 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetJ {
    mask: u64,
}

impl SubsetJ {
    pub const EMPTY: SubsetJ = SubsetJ { mask: 0 };

    pub fn from_mask(mask: u64) -> Self {
        Self { mask }
    }

    /// From 0-based part indices.
    pub fn from_indices(idx: &[usize]) -> Self {
        Self {
            mask: idx.iter().fold(0, |m, &k| m | (1 << k)),
        }
    }

    pub fn full(s: usize) -> Self {
        Self {
            mask: if s >= 64 { u64::MAX } else { (1u64 << s) - 1 },
        }
    }

    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, k: usize) -> bool {
        k < 64 && self.mask >> k & 1 == 1
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&k| self.mask >> k & 1 == 1)
    }

    pub fn fits(self, s: usize) -> bool {
        s >= 64 || self.mask >> s == 0
    }

    /// Every subset of [s], ordered by mask.
    pub fn all(s: usize) -> impl Iterator<Item = SubsetJ> {
        (0..1u64 << s).map(|mask| SubsetJ { mask })
    }
}

impl fmt::Display for SubsetJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        let s: Vec<String> = self.members().map(|k| (k + 1).to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Elementary symmetric polynomials e_0..e_s of the parts.
fn elementary_symmetric(parts: &[usize]) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); parts.len() + 1];
    e[0] = BigInt::one();
    for (i, &p) in parts.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let add = &e[j - 1] * BigInt::from(p);
            e[j] += add;
        }
    }
    e
}

/// EDdegree of μ-symmetric binary tensors: s!·μ₁···μ_s.
pub fn ed_degree(mu: &Partition) -> Result<BigInt> {
    if mu.is_empty() {
        return Err(BtsError::InvalidInput("ed_degree of the empty partition".into()));
    }
    Ok(mu
        .parts()
        .iter()
        .fold(factorial(mu.s()), |acc, &p| acc * BigInt::from(p)))
}

/// Degree of the μ-discriminant: Σ_{j=0}^{s} (−2)^{s−j}(j+1)! e_j(μ). δ_∅ = 1.
pub fn delta_mu(mu: &Partition) -> BigInt {
    let s = mu.s();
    let e = elementary_symmetric(mu.parts());
    (0..=s)
        .map(|j| {
            let sign = num_traits::pow(BigInt::from(-2), s - j);
            sign * factorial(j + 1) * &e[j]
        })
        .sum()
}

/// δ for 1^d from the alternating binomial sum Σ_j (−2)^{d−j} C(d,j)(j+1)!.
pub fn delta_ones_alternating(d: usize) -> BigInt {
    (0..=d)
        .map(|j| num_traits::pow(BigInt::from(-2), d - j) * binomial(d, j) * factorial(j + 1))
        .sum()
}

/// Whether the dual of X_{μ,J} is a hypersurface (otherwise f_{μ,J} = 1).
pub fn is_dual_hypersurface(mu: &Partition, j: SubsetJ) -> bool {
    let s = mu.s();
    if s == 1 && mu.d() == 1 && j.is_empty() {
        return false;
    }
    if s >= 1 && j.len() == s - 1 {
        let excluded = (0..s).find(|&k| !j.contains(k)).expect("one excluded part");
        if mu.parts()[excluded] == 1 {
            return false;
        }
    }
    true
}

/// Degree of f_{μ,J}: 2^{|J|}·δ_{μ(J)}, or 0 when the factor is trivial.
pub fn deg_f(mu: &Partition, j: SubsetJ) -> BigInt {
    if !is_dual_hypersurface(mu, j) {
        return BigInt::zero();
    }
    (BigInt::one() << j.len()) * delta_mu(&mu.remove(j))
}

/// Exponent α_{μ,J} of f_{μ,J} in the leading/constant coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Alpha {
    pub value: i64,
    /// The factor is trivial, so the value never enters a numeric result.
    pub inert: bool,
}

pub fn exponent_alpha(mu: &Partition, j: SubsetJ) -> Alpha {
    let value = if j.is_empty() {
        -2
    } else {
        mu.sum_over(j) as i64 - 2
    };
    Alpha {
        value,
        inert: !is_dual_hypersurface(mu, j),
    }
}

/// Σ_J α_{μ,J}·deg f_{μ,J} + 2·EDdegree(μ); zero for every partition.
pub fn degree_identity_sum(mu: &Partition) -> Result<BigInt> {
    let mut total = BigInt::from(2) * ed_degree(mu)?;
    for j in SubsetJ::all(mu.s()) {
        total += BigInt::from(exponent_alpha(mu, j).value) * deg_f(mu, j);
    }
    Ok(total)
}

/// 2·d! = Σ_{j=0}^{d} C(d,j)(2−j)2^j δ_{d−j}, the doubled form of the identity for 1^d.
pub fn ones_identity(d: usize) -> bool {
    let lhs = BigInt::from(2) * factorial(d);
    let rhs: BigInt = (0..=d)
        .map(|j| {
            binomial(d, j)
                * BigInt::from(2 - j as i64)
                * (BigInt::one() << j)
                * delta_mu(&Partition::ones(d - j))
        })
        .sum();
    lhs == rhs
}

/// Checks the degree identity, and for μ = 1^d also the factorial identity.
pub fn degree_identity_check(mu: &Partition) -> bool {
    let Ok(sum) = degree_identity_sum(mu) else {
        return false;
    };
    if !sum.is_zero() {
        return false;
    }
    if mu.parts().iter().all(|&p| p == 1) {
        return ones_identity(mu.d());
    }
    true
}

/// One row of the degree table.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeRow {
    pub j: String,
    pub hypersurface: bool,
    pub deg_f: String,
    pub alpha: i64,
    pub inert: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeTable {
    pub mu: Vec<usize>,
    pub ed_degree: String,
    pub delta_mu: String,
    pub rows: Vec<DegreeRow>,
    pub identity_ok: bool,
}

pub fn degree_table(mu: &Partition) -> Result<DegreeTable> {
    let rows = SubsetJ::all(mu.s())
        .map(|j| {
            let a = exponent_alpha(mu, j);
            DegreeRow {
                j: j.to_string(),
                hypersurface: is_dual_hypersurface(mu, j),
                deg_f: deg_f(mu, j).to_string(),
                alpha: a.value,
                inert: a.inert,
            }
        })
        .collect();
    Ok(DegreeTable {
        mu: mu.parts().to_vec(),
        ed_degree: ed_degree(mu)?.to_string(),
        delta_mu: delta_mu(mu).to_string(),
        rows,
        identity_ok: degree_identity_check(mu),
    })
}

/// Small helper for callers that need the degree as a machine integer.
pub fn ed_degree_usize(mu: &Partition) -> Result<usize> {
    ed_degree(mu)?
        .to_usize()
        .ok_or_else(|| BtsError::InvalidInput("ED degree overflows usize".into()))
}

pub(crate) fn binomial_u64(n: usize, k: usize) -> u64 {
    binomial(n, k).abs().to_u64().unwrap_or(u64::MAX)
}
