//! Exact polynomial arithmetic, Sylvester resultants, the ε² reflection and
//! binary-form discriminants.

mod roots;

pub use roots::{all_roots, all_roots_rational, backward_error, RootCluster, Roots};

use crate::error::{BtsError, Result};
use crate::scalar::{Rational, Scalar};
use crate::tensor_core::MuTensor;
use num_complex::Complex64;
use num_traits::{Num, One, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub(crate) fn small_int<T: Clone + Num>(n: u64) -> T {
    let mut acc = T::zero();
    let mut base = T::one();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        n >>= 1;
    }
    acc
}

/// Univariate polynomial a₀ + a₁z + … + a_N z^N.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Clone + Num> UniPoly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// z − r
    pub fn linear_root(r: T) -> Self {
        Self::new(vec![T::zero() - r, T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * small_int::<T>(k as u64))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading();
        Self::new(self.coeffs.iter().map(|c| c.clone() / l.clone()).collect())
    }

    /// Euclidean division over a field.
    pub fn div_rem(&self, o: &Self) -> (Self, Self) {
        assert!(!o.is_zero(), "division by the zero polynomial");
        let dn = o.coeffs.len() - 1;
        let lead = o.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dn {
            return (Self::zero(), self.clone());
        }
        let mut quo = vec![T::zero(); rem.len() - dn];
        for k in (0..quo.len()).rev() {
            let f = rem[k + dn].clone() / lead.clone();
            for (j, c) in o.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - f.clone() * c.clone();
            }
            quo[k] = f;
        }
        rem.truncate(dn);
        (Self::new(quo), Self::new(rem))
    }

    /// Monic gcd over a field.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Substitution ε² ↦ q − ε² written on the coefficients.
    pub fn reflect(&self, q: &T) -> Self {
        reflect_edpoly(self, q)
    }

    pub fn map<U: Clone + Num>(&self, f: impl Fn(&T) -> U) -> UniPoly<U> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }
}

impl UniPoly<Rational> {
    pub fn to_complex(&self) -> UniPoly<Complex64> {
        self.map(|c| Complex64::new(c.to_f64(), 0.0))
    }

    pub fn to_f64(&self) -> UniPoly<f64> {
        self.map(|c| c.to_f64())
    }

    /// Square-free part p / gcd(p, p').
    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Yun's square-free decomposition: pairs (factor, multiplicity), product = monic(p).
    pub fn square_free_decomposition(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut k = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            k += 1;
        }
        out
    }
}

impl<T: Clone + Num + fmt::Display> fmt::Display for UniPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*z"),
                _ => format!("({c})*z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Σ_k (−1)^k [Σ_{j≥k} C(j,k) q^{j−k} a_j] ε^{2k}: the substitution ε² ↦ q − ε².
pub fn reflect_edpoly<T: Clone + Num>(p: &UniPoly<T>, q: &T) -> UniPoly<T> {
    let n = p.coeffs.len();
    let mut pow = vec![T::one(); n.max(1)];
    for k in 1..n {
        pow[k] = pow[k - 1].clone() * q.clone();
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = T::zero();
        let mut binom: u64 = 1;
        for j in k..n {
            if j > k {
                binom = binom * j as u64 / (j - k) as u64;
            }
            acc = acc + small_int::<T>(binom) * pow[j - k].clone() * p.coeffs[j].clone();
        }
        out.push(if k % 2 == 1 { T::zero() - acc } else { acc });
    }
    UniPoly::new(out)
}

/// Sparse polynomial over ℚ in `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c * k);
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(self.nvars, Rational::one()), |acc, _| acc.mul(self))
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Coefficient of var^k, as a polynomial not involving var.
    pub fn coeff_in(&self, v: usize, k: u32) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] == k {
                let mut e2 = e.clone();
                e2[v] = 0;
                r.add_term(e2, c.clone());
            }
        }
        r
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(Complex64::new(c.to_f64(), 0.0), |acc, (&k, z)| acc * z.powu(k))
            })
            .sum()
    }

    /// Univariate in `v` with the other variables set to `point`.
    pub fn to_univariate_complex(&self, v: usize, point: &[Complex64]) -> UniPoly<Complex64> {
        let n = self.degree_in(v) as usize;
        let mut coeffs = vec![Complex64::zero(); n + 1];
        for (e, c) in &self.terms {
            let mut w = Complex64::new(c.to_f64(), 0.0);
            for (i, (&k, z)) in e.iter().zip(point).enumerate() {
                if i != v {
                    w *= z.powu(k);
                }
            }
            coeffs[e[v] as usize] += w;
        }
        UniPoly::new(coeffs)
    }

    /// Exact univariate view; errors if another variable occurs.
    pub fn to_unipoly(&self, v: usize) -> Result<UniPoly<Rational>> {
        let n = self.degree_in(v) as usize;
        let mut coeffs = vec![Rational::zero(); n + 1];
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(i, &k)| i != v && k > 0) {
                return Err(BtsError::InvalidInput(
                    "polynomial is not univariate in the requested variable".into(),
                ));
            }
            coeffs[e[v] as usize] += c;
        }
        Ok(UniPoly::new(coeffs))
    }
}

/// Determinant of a square matrix of polynomials by minor expansion with memoisation.
fn det_multipoly(m: &[Vec<MultiPoly>], nvars: usize) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::constant(nvars, Rational::one());
    }
    // memo[mask] = determinant of the bottom |mask| rows restricted to the columns in mask
    let mut memo: Vec<Option<MultiPoly>> = vec![None; 1 << n];
    memo[0] = Some(MultiPoly::constant(nvars, Rational::one()));
    for mask in 1usize..1 << n {
        let k = mask.count_ones() as usize;
        let row = n - k;
        let mut acc = MultiPoly::zero(nvars);
        let mut pos = 0;
        for col in 0..n {
            if mask >> col & 1 == 0 {
                continue;
            }
            let minor = memo[mask & !(1 << col)].as_ref().expect("filled");
            if !m[row][col].is_zero() && !minor.is_zero() {
                let term = m[row][col].mul(minor);
                acc = if pos % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            pos += 1;
        }
        memo[mask] = Some(acc);
    }
    memo[(1 << n) - 1].take().expect("filled")
}

/// Determinant over ℚ by Gaussian elimination.
pub fn det_rational(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        let (top, rest) = m.split_at_mut(c + 1);
        let pivot_row = &top[c];
        for row in rest {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &piv;
            for (x, p) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x -= &f * p;
            }
        }
    }
    det
}

/// Determinant of the Sylvester matrix of p and q with respect to `var`.
pub fn sylvester_resultant(p: &MultiPoly, q: &MultiPoly, var: usize) -> Result<MultiPoly> {
    let (m, n) = (p.degree_in(var) as usize, q.degree_in(var) as usize);
    if m == 0 && n == 0 {
        return Err(BtsError::InvalidInput(
            "both polynomials are constant in the elimination variable".into(),
        ));
    }
    let nv = p.nvars();
    let pc: Vec<MultiPoly> = (0..=m).rev().map(|k| p.coeff_in(var, k as u32)).collect();
    let qc: Vec<MultiPoly> = (0..=n).rev().map(|k| q.coeff_in(var, k as u32)).collect();
    let size = m + n;
    let mut mat = vec![vec![MultiPoly::zero(nv); size]; size];
    for i in 0..n {
        for (k, c) in pc.iter().enumerate() {
            mat[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in qc.iter().enumerate() {
            mat[n + i][i + k] = c.clone();
        }
    }
    Ok(det_multipoly(&mat, nv))
}

/// Homogeneous resultant of two binary forms of the same degree, coefficients
/// listed by descending powers of x₀.
pub fn binary_resultant(p: &[Rational], q: &[Rational]) -> Rational {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    if size == 0 {
        return Rational::one();
    }
    let mut mat = vec![vec![Rational::zero(); size]; size];
    for i in 0..n {
        for (k, c) in p.iter().enumerate() {
            mat[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in q.iter().enumerate() {
            mat[n + i][i + k] = c.clone();
        }
    }
    det_rational(mat)
}

/// Discriminant Δ_d of the binary form Σ C(d,j) c_j x₀^{d−j} x₁^j.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminant {
    pub value: Rational,
    /// The form is identically zero.
    pub degenerate: bool,
}

/// Δ_d = Res((1/d)∂₀f, (1/d)∂₁f). At d = 2 this is c₀c₂ − c₁², i.e. −1/4 times
/// b² − 4ac for a x₀² + b x₀x₁ + c x₁².
pub fn discriminant_binary_form(c: &MuTensor<Rational>) -> Result<Discriminant> {
    if c.mu().s() != 1 {
        return Err(BtsError::InvalidInput(format!(
            "discriminant needs mu = (d), got {}",
            c.mu()
        )));
    }
    let d = c.mu().d();
    if d < 2 {
        return Err(BtsError::InvalidInput("discriminant needs d >= 2".into()));
    }
    let cs = c.coords();
    if cs.iter().all(|v| v.is_zero()) {
        return Ok(Discriminant {
            value: Rational::zero(),
            degenerate: true,
        });
    }
    let binom = |k: usize| -> Rational { small_int(crate::combinatorics::binomial_u64(d - 1, k)) };
    let p: Vec<Rational> = (0..d).map(|k| binom(k) * &cs[k]).collect();
    let q: Vec<Rational> = (0..d).map(|k| binom(k) * &cs[k + 1]).collect();
    Ok(Discriminant {
        value: binary_resultant(&p, &q),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Partition;
    use crate::scalar::rat;

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn resultant_examples() {
        let z = MultiPoly::var(3, 0);
        let one = MultiPoly::constant(3, r(1));
        let p = z.sub(&one);
        let q = z.sub(&one.scale(&r(2)));
        assert_eq!(sylvester_resultant(&p, &q, 0).unwrap(), MultiPoly::constant(3, r(-1)));
        assert!(sylvester_resultant(&p, &p, 0).unwrap().is_zero());
        let x = MultiPoly::var(3, 1);
        let y = MultiPoly::var(3, 2);
        let res = sylvester_resultant(&x.mul(&z).add(&one), &y.mul(&z).add(&one), 0).unwrap();
        assert_eq!(res, x.sub(&y));
        assert!(sylvester_resultant(&x, &y, 0).is_err());
    }

    #[test]
    fn reflection_examples() {
        let p = UniPoly::new(vec![r(3), r(-2), r(5)]);
        assert_eq!(reflect_edpoly(&p, &r(0)), UniPoly::new(vec![r(3), r(2), r(5)]));
        let q = rat(7, 3);
        assert_eq!(reflect_edpoly(&reflect_edpoly(&p, &q), &q), p);
        let lin = UniPoly::new(vec![r(2), r(3)]);
        assert_eq!(reflect_edpoly(&lin, &r(5)), UniPoly::new(vec![r(17), r(-3)]));
    }

    #[test]
    fn discriminants() {
        let mu3 = Partition::single(3);
        let form = |c: Vec<Rational>, mu: &Partition| MuTensor::new(mu.clone(), c).unwrap();
        // x0^2 x1: c1 = 1/3
        let dbl = discriminant_binary_form(&form(vec![r(0), rat(1, 3), r(0), r(0)], &mu3)).unwrap();
        assert!(dbl.value.is_zero());
        // x0^3 - x0 x1^2: c0 = 1, c2 = -1/3
        let dist = discriminant_binary_form(&form(vec![r(1), r(0), rat(-1, 3), r(0)], &mu3)).unwrap();
        assert!(!dist.value.is_zero());
        let mu2 = Partition::single(2);
        assert_eq!(
            discriminant_binary_form(&form(vec![r(1), r(0), r(-1)], &mu2)).unwrap().value,
            r(-1)
        );
        assert!(discriminant_binary_form(&form(vec![r(1), r(0), r(0)], &mu2)).unwrap().value.is_zero());
        assert!(discriminant_binary_form(&form(vec![r(0); 3], &mu2)).unwrap().degenerate);
    }

    #[test]
    fn square_free_parts() {
        // (z-1)^2 (z+2)
        let p = UniPoly::linear_root(r(1))
            .mul(&UniPoly::linear_root(r(1)))
            .mul(&UniPoly::linear_root(r(-2)));
        assert_eq!(p.square_free().degree(), Some(2));
        let dec = p.square_free_decomposition();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec[0], (UniPoly::linear_root(r(-2)), 1));
        assert_eq!(dec[1], (UniPoly::linear_root(r(1)), 2));
    }
}
