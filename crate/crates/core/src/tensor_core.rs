//! Binary tensors, their μ-symmetric compressed form and the Bombieri pairing.
//!
//! Entries are indexed by bit-tuples (i₁,…,i_d) in lexicographic order, so slot 1
//! is the most significant bit of the flat index: for d = 3 the index of t_{ijk}
//! is 4i + 2j + k.

use crate::combinatorics::{binomial_u64, Partition};
use crate::error::{BtsError, Result};
use crate::scalar::{rational_from_f64, Cx, Rational, Scalar};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Num, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Dense tensor in (ℝ²)^{⊗d} (or over any ring for intermediate use).
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryTensor<T> {
    d: usize,
    entries: Vec<T>,
}

pub type RationalTensor = BinaryTensor<Rational>;

impl<T: Clone + Num> BinaryTensor<T> {
    pub fn new(d: usize, entries: Vec<T>) -> Result<Self> {
        if d == 0 {
            return Err(BtsError::InvalidInput("tensor order must be at least 1".into()));
        }
        if d > 24 || entries.len() != 1 << d {
            return Err(BtsError::InvalidInput(format!(
                "expected {} entries for d = {d}, got {}",
                1usize << d.min(24),
                entries.len()
            )));
        }
        Ok(Self { d, entries })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            entries: vec![T::zero(); 1 << d],
        }
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(&[u8]) -> T) -> Self {
        let entries = (0..1usize << d).map(|i| f(&bits_of(i, d))).collect();
        Self { d, entries }
    }

    /// Rank-one tensor x₁⊗…⊗x_d.
    pub fn rank_one(xs: &[[T; 2]]) -> Self {
        let d = xs.len();
        Self::from_fn(d, |bits| {
            bits.iter()
                .zip(xs)
                .fold(T::one(), |acc, (&b, x)| acc * x[b as usize].clone())
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, bits: &[u8]) -> &T {
        &self.entries[index_of(bits)]
    }

    pub fn set(&mut self, bits: &[u8], v: T) {
        let i = index_of(bits);
        self.entries[i] = v;
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> BinaryTensor<U> {
        BinaryTensor {
            d: self.d,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|v| v.clone() * k.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!(self.d, other.d, "tensor orders differ");
        BinaryTensor {
            d: self.d,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Flat pairing Σ_I t_I u_I (the Bombieri pairing on the full tensor space).
    pub fn dot(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// Fixes i_j = bit (slot j is 0-based).
    pub fn slice(&self, j: usize, bit: u8) -> Result<Self> {
        if self.d < 2 || j >= self.d {
            return Err(BtsError::InvalidInput(format!(
                "cannot slice slot {} of an order-{} tensor",
                j + 1,
                self.d
            )));
        }
        let d = self.d;
        Ok(Self::from_fn(d - 1, |bits| {
            let mut full = Vec::with_capacity(d);
            full.extend_from_slice(&bits[..j]);
            full.push(bit);
            full.extend_from_slice(&bits[j..]);
            self.get(&full).clone()
        }))
    }

    /// Slot permutation: slot k of the result is slot perm[k] of self.
    pub fn permute_slots(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.d);
        Self::from_fn(self.d, |bits| {
            let mut src = vec![0u8; bits.len()];
            for (k, &p) in perm.iter().enumerate() {
                src[p] = bits[k];
            }
            self.get(&src).clone()
        })
    }

    /// Applies the 2×2 matrix m to every index of slot j.
    pub fn apply_matrix(&self, j: usize, m: &[[T; 2]; 2]) -> Self {
        let stride = 1usize << (self.d - 1 - j);
        let mut out = self.entries.clone();
        for (i, v) in out.iter_mut().enumerate() {
            let b = (i / stride) & 1;
            let i0 = i & !stride;
            let i1 = i | stride;
            *v = m[b][0].clone() * self.entries[i0].clone()
                + m[b][1].clone() * self.entries[i1].clone();
        }
        Self {
            d: self.d,
            entries: out,
        }
    }

    /// Contraction with one vector per slot.
    pub fn contract_full(&self, xs: &[[T; 2]]) -> T {
        assert_eq!(xs.len(), self.d);
        self.entries
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, v)| {
                let mut w = v.clone();
                for (k, x) in xs.iter().enumerate() {
                    w = w * x[(i >> (self.d - 1 - k)) & 1].clone();
                }
                acc + w
            })
    }
}

impl<T: Scalar> BinaryTensor<T> {
    pub fn to_f64(&self) -> BinaryTensor<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn to_complex(&self) -> BinaryTensor<Complex64> {
        self.map(|v| Complex64::new(v.to_f64(), 0.0))
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm_f64(&self) -> f64 {
        self.norm_sq().to_f64().max(0.0).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero())
    }
}

impl BinaryTensor<f64> {
    pub fn to_rational(&self) -> RationalTensor {
        self.map(|&v| rational_from_f64(v))
    }
}

/// (y_{j,0}, y_{j,1}): contraction of t with every slot except j.
pub fn contract_all_but<R: Clone + Num>(t: &BinaryTensor<R>, xs: &[[R; 2]], j: usize) -> [R; 2] {
    let d = t.d();
    assert_eq!(xs.len(), d);
    let mut y = [R::zero(), R::zero()];
    for (i, v) in t.entries().iter().enumerate() {
        let mut w = v.clone();
        for (k, x) in xs.iter().enumerate() {
            if k != j {
                w = w * x[(i >> (d - 1 - k)) & 1].clone();
            }
        }
        let b = (i >> (d - 1 - j)) & 1;
        y[b] = y[b].clone() + w;
    }
    y
}

pub fn bits_of(i: usize, d: usize) -> Vec<u8> {
    (0..d).map(|k| ((i >> (d - 1 - k)) & 1) as u8).collect()
}

pub fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn bit_string(i: usize, d: usize) -> String {
    bits_of(i, d).iter().map(|b| char::from(b'0' + b)).collect()
}

fn bit_tuple(i: usize, d: usize) -> String {
    let v: Vec<String> = bits_of(i, d).iter().map(|b| b.to_string()).collect();
    format!("({})", v.join(","))
}

/// Rotation matrix [[cos, −sin], [sin, cos]].
pub fn rotation_matrix<T: Clone + Num + std::ops::Neg<Output = T>>(c: T, s: T) -> [[T; 2]; 2] {
    [[c.clone(), -s.clone()], [s, c]]
}

/// Exact rotation with (cos, sin) = ((1−p²)/(1+p²), 2p/(1+p²)).
pub fn rational_rotation(p: &Rational) -> [[Rational; 2]; 2] {
    let one = Rational::one();
    let den = &one + p * p;
    let c = (&one - p * p) / &den;
    let s = (Rational::from_integer(BigInt::from(2)) * p) / &den;
    rotation_matrix(c, s)
}

/// Rotates slot k by angle[k]; one angle per slot.
pub fn rotate(t: &BinaryTensor<f64>, angles: &[f64]) -> Result<BinaryTensor<f64>> {
    if angles.len() != t.d() {
        return Err(BtsError::InvalidInput(format!(
            "expected {} angles, got {}",
            t.d(),
            angles.len()
        )));
    }
    Ok(angles.iter().enumerate().fold(t.clone(), |acc, (k, &a)| {
        acc.apply_matrix(k, &rotation_matrix(a.cos(), a.sin()))
    }))
}

/// Rotates with exact rational rotation matrices, one per slot.
pub fn rotate_exact(t: &RationalTensor, params: &[Rational]) -> Result<RationalTensor> {
    if params.len() != t.d() {
        return Err(BtsError::InvalidInput(format!(
            "expected {} rotation parameters, got {}",
            t.d(),
            params.len()
        )));
    }
    Ok(params.iter().enumerate().fold(t.clone(), |acc, (k, p)| {
        acc.apply_matrix(k, &rational_rotation(p))
    }))
}

/// u_i = Σ_j √−1^{|j|} (−1)^{Σ(1−i_l)j_l} t_j; a change of basis acting slotwise by [[1, −i], [1, i]].
pub fn to_u_coordinates<T: Scalar>(t: &BinaryTensor<T>) -> BinaryTensor<Cx<T>> {
    let z = T::zero();
    let o = T::one();
    let m = [
        [Cx::new(o.clone(), z.clone()), Cx::new(z.clone(), -o.clone())],
        [Cx::new(o.clone(), z.clone()), Cx::new(z, o)],
    ];
    let tc = t.map(|v| Cx::new(v.clone(), T::zero()));
    (0..t.d()).fold(tc, |acc, k| acc.apply_matrix(k, &m))
}

/// Tensor in μ-symmetric compressed coordinates c_{ω₁…ω_s}, 0 ≤ ω_k ≤ μ_k.
#[derive(Clone, Debug, PartialEq)]
pub struct MuTensor<T> {
    mu: Partition,
    c: Vec<T>,
}

impl<T: Clone + Num> MuTensor<T> {
    pub fn new(mu: Partition, c: Vec<T>) -> Result<Self> {
        let n = box_size(&mu);
        if c.len() != n {
            return Err(BtsError::InvalidInput(format!(
                "expected {n} coordinates for mu = {mu}, got {}",
                c.len()
            )));
        }
        Ok(Self { mu, c })
    }

    /// Missing keys read as zero.
    pub fn from_map(mu: Partition, map: &HashMap<Vec<usize>, T>) -> Result<Self> {
        let mut c = vec![T::zero(); box_size(&mu)];
        for (omega, v) in map {
            let i = box_index(&mu, omega)?;
            c[i] = v.clone();
        }
        Ok(Self { mu, c })
    }

    pub fn mu(&self) -> &Partition {
        &self.mu
    }

    pub fn coords(&self) -> &[T] {
        &self.c
    }

    pub fn get(&self, omega: &[usize]) -> T {
        box_index(&self.mu, omega)
            .map(|i| self.c[i].clone())
            .unwrap_or_else(|_| T::zero())
    }

    /// The dense tensor with t_I = c_{ω(I)}.
    pub fn expand(&self) -> BinaryTensor<T> {
        let groups = self.mu.slot_groups();
        let s = self.mu.s();
        BinaryTensor::from_fn(self.mu.d(), |bits| {
            let mut omega = vec![0usize; s];
            for (k, &b) in bits.iter().enumerate() {
                omega[groups[k]] += b as usize;
            }
            self.get(&omega)
        })
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> MuTensor<U> {
        MuTensor {
            mu: self.mu.clone(),
            c: self.c.iter().map(f).collect(),
        }
    }

    /// Σ_ω ∏ C(μ_k, ω_k) c_ω(t) c_ω(u).
    pub fn bombieri(&self, other: &Self) -> Result<T> {
        if self.mu != other.mu {
            return Err(BtsError::PartitionMismatch {
                left: self.mu.to_string(),
                right: other.mu.to_string(),
            });
        }
        let mut acc = T::zero();
        for (i, (a, b)) in self.c.iter().zip(&other.c).enumerate() {
            let w = box_omega(&self.mu, i)
                .iter()
                .zip(self.mu.parts())
                .map(|(&o, &m)| binomial_u64(m, o))
                .product::<u64>();
            acc = acc + from_u64::<T>(w) * a.clone() * b.clone();
        }
        Ok(acc)
    }
}

impl<T: Scalar> MuTensor<T> {
    pub fn to_f64(&self) -> MuTensor<f64> {
        self.map(|v| v.to_f64())
    }
}

fn from_u64<T: Clone + Num>(w: u64) -> T {
    let mut acc = T::zero();
    let mut base = T::one();
    let mut w = w;
    while w > 0 {
        if w & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        w >>= 1;
    }
    acc
}

fn box_size(mu: &Partition) -> usize {
    mu.parts().iter().map(|&m| m + 1).product()
}

fn box_index(mu: &Partition, omega: &[usize]) -> Result<usize> {
    if omega.len() != mu.s() {
        return Err(BtsError::InvalidInput(format!(
            "index {omega:?} has the wrong length for mu = {mu}"
        )));
    }
    let mut i = 0;
    for (&o, &m) in omega.iter().zip(mu.parts()) {
        if o > m {
            return Err(BtsError::InvalidInput(format!(
                "index {omega:?} outside the box of mu = {mu}"
            )));
        }
        i = i * (m + 1) + o;
    }
    Ok(i)
}

fn box_omega(mu: &Partition, mut i: usize) -> Vec<usize> {
    let mut omega = vec![0; mu.s()];
    for k in (0..mu.s()).rev() {
        let m = mu.parts()[k] + 1;
        omega[k] = i % m;
        i /= m;
    }
    omega
}

/// Compresses a μ-symmetric tensor. Exact equality for rational backends,
/// deviation ≤ 1e−9·‖t‖ for doubles.
pub fn compress<T: Scalar>(t: &BinaryTensor<T>, mu: &Partition) -> Result<MuTensor<T>> {
    if mu.d() != t.d() {
        return Err(BtsError::PartitionMismatch {
            left: format!("d = {}", t.d()),
            right: mu.to_string(),
        });
    }
    let groups = mu.slot_groups();
    let d = t.d();
    let tol = if T::is_exact() { 0.0 } else { 1e-9 * t.norm_f64() };
    let mut rep: Vec<Option<usize>> = vec![None; box_size(mu)];
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..1usize << d {
        let mut omega = vec![0usize; mu.s()];
        for (k, &g) in groups.iter().enumerate() {
            omega[g] += (i >> (d - 1 - k)) & 1;
        }
        let b = box_index(mu, &omega)?;
        match rep[b] {
            None => rep[b] = Some(i),
            Some(r) => {
                let dev = (t.entries()[i].clone() - t.entries()[r].clone()).abs_f64();
                let differs = if T::is_exact() {
                    t.entries()[i] != t.entries()[r]
                } else {
                    dev > tol
                };
                if differs && worst.is_none_or(|(_, _, w)| dev > w) {
                    worst = Some((r, i, dev));
                }
            }
        }
    }
    if let Some((a, b, dev)) = worst {
        return Err(BtsError::NotSymmetric {
            first: bit_tuple(a, d),
            second: bit_tuple(b, d),
            deviation: dev,
        });
    }
    let c = rep
        .iter()
        .map(|r| t.entries()[r.expect("every box cell has a representative")].clone())
        .collect();
    MuTensor::new(mu.clone(), c)
}

/// Rotates a μ-tensor with one angle per slot group.
pub fn rotate_mu(t: &MuTensor<f64>, angles: &[f64]) -> Result<MuTensor<f64>> {
    if angles.len() != t.mu().s() {
        return Err(BtsError::InvalidInput(format!(
            "expected {} angles, got {}",
            t.mu().s(),
            angles.len()
        )));
    }
    let per_slot: Vec<f64> = t.mu().slot_groups().iter().map(|&g| angles[g]).collect();
    let r = rotate(&t.expand(), &per_slot)?;
    compress(&r, t.mu())
}

/// Orthogonal projection onto λ-symmetric tensors; `grouping[k]` is the λ-part of slot k.
pub fn symmetrize<T: Scalar>(
    t: &BinaryTensor<T>,
    lambda: &Partition,
    grouping: &[usize],
) -> Result<BinaryTensor<T>> {
    let d = t.d();
    if grouping.len() != d || lambda.d() != d {
        return Err(BtsError::InvalidInput(format!(
            "grouping of length {} does not fit d = {d} and lambda = {lambda}",
            grouping.len()
        )));
    }
    let mut counts = vec![0usize; lambda.s()];
    for &g in grouping {
        if g >= lambda.s() {
            return Err(BtsError::InvalidInput(format!("group {g} outside lambda = {lambda}")));
        }
        counts[g] += 1;
    }
    if counts != lambda.parts() {
        return Err(BtsError::InvalidInput(format!(
            "grouping sizes {counts:?} do not match lambda = {lambda}"
        )));
    }
    let key = |i: usize| -> Vec<usize> {
        let mut omega = vec![0usize; lambda.s()];
        for (k, &g) in grouping.iter().enumerate() {
            omega[g] += (i >> (d - 1 - k)) & 1;
        }
        omega
    };
    let mut sums: HashMap<Vec<usize>, (T, i64)> = HashMap::new();
    for (i, v) in t.entries().iter().enumerate() {
        let e = sums.entry(key(i)).or_insert((T::zero(), 0));
        e.0 = e.0.clone() + v.clone();
        e.1 += 1;
    }
    let entries = (0..1usize << d)
        .map(|i| {
            let (s, n) = &sums[&key(i)];
            s.clone() / T::from_i64(*n)
        })
        .collect();
    BinaryTensor::new(d, entries)
}

const RANDOM_DENOM: i64 = 1 << 16;

fn random_entry(rng: &mut ChaCha8Rng, scale: &Rational) -> Rational {
    let k = rng.gen_range(-RANDOM_DENOM..=RANDOM_DENOM);
    Rational::new(BigInt::from(k), BigInt::from(RANDOM_DENOM)) * scale
}

/// I.i.d. entries uniform on [−scale, scale], snapped to multiples of scale/2^16.
pub fn random_tensor(seed: u64, d: usize, scale: &Rational) -> RationalTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..1usize << d).map(|_| random_entry(&mut rng, scale)).collect();
    BinaryTensor { d, entries }
}

/// Random μ-symmetric tensor with i.i.d. compressed coordinates.
pub fn random_mu_tensor(seed: u64, mu: &Partition, scale: &Rational) -> MuTensor<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (0..box_size(mu)).map(|_| random_entry(&mut rng, scale)).collect();
    MuTensor { mu: mu.clone(), c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn r(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn bombieri_weights() {
        let t = MuTensor::new(Partition::single(3), vec![r(1), r(0), r(0), r(1)]).unwrap();
        assert_eq!(t.bombieri(&t).unwrap(), r(2));
        let flat = t.expand();
        assert_eq!(flat.dot(&flat), r(2));
    }

    #[test]
    fn compress_roundtrip_and_violation() {
        let mu = Partition::new(vec![2, 1]).unwrap();
        let t = random_mu_tensor(7, &mu, &r(1));
        assert_eq!(compress(&t.expand(), &mu).unwrap(), t);
        let mut bad = t.expand();
        bad.set(&[1, 0, 0], r(9));
        match compress(&bad, &mu) {
            Err(BtsError::NotSymmetric { first, second, .. }) => {
                assert_eq!(first, "(0,1,0)");
                assert_eq!(second, "(1,0,0)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contraction_examples() {
        let mut t = BinaryTensor::<f64>::zeros(3);
        t.set(&[0, 0, 0], 3.0);
        t.set(&[1, 1, 1], 5.0);
        let e0 = [1.0, 0.0];
        assert_eq!(contract_all_but(&t, &[e0, e0, e0], 0), [3.0, 0.0]);
        let m = BinaryTensor::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        // t^T x for x = (1, 1): column sums
        assert_eq!(contract_all_but(&m, &[[1.0, 1.0], [0.0, 0.0]], 1), [4.0, 6.0]);
    }

    #[test]
    fn slices() {
        let t = BinaryTensor::from_fn(3, |b| index_of(b) as f64);
        let s = t.slice(0, 0).unwrap();
        assert_eq!(s.entries(), &[0.0, 1.0, 2.0, 3.0]);
        let m = BinaryTensor::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.slice(1, 1).unwrap().entries(), &[2.0, 4.0]);
    }

    #[test]
    fn u_coordinates_small() {
        let t = BinaryTensor::new(1, vec![r(1), r(0)]).unwrap();
        let u = to_u_coordinates(&t);
        assert_eq!(u.entries()[0], Cx::new(r(1), r(0)));
        assert_eq!(u.entries()[1], Cx::new(r(1), r(0)));
        let mut diag = BinaryTensor::<Rational>::zeros(3);
        diag.set(&[0, 0, 0], r(1));
        diag.set(&[1, 1, 1], r(2));
        let u = to_u_coordinates(&diag);
        let th1 = u.entries()[0].clone() * u.entries()[7].clone();
        assert_eq!(th1, Cx::new(r(5), r(0)));
    }

    #[test]
    fn exact_rotation_preserves_norm() {
        let t = random_tensor(3, 3, &r(1));
        let rt = rotate_exact(&t, &[rat(1, 3), rat(-2, 5), rat(7, 4)]).unwrap();
        assert_eq!(rt.norm_sq(), t.norm_sq());
    }

    #[test]
    fn symmetrize_matrix() {
        let m = BinaryTensor::new(2, vec![r(0), r(1), r(0), r(0)]).unwrap();
        let s = symmetrize(&m, &Partition::single(2), &[0, 0]).unwrap();
        assert_eq!(s.entries(), &[r(0), rat(1, 2), rat(1, 2), r(0)]);
        assert!(symmetrize(&m, &Partition::single(2), &[0, 1]).is_err());
    }
}
