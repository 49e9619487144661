//! Closed-form invariants: the 2×2×2 invariant ring (θ₁..θ₄, φ, Det), the
//! factors f_{3,{j}}, extreme ED coefficients, extra roots of the partially
//! symmetric cases, and the slice factors for d = 3, 4.
//!
//! Every long formula is evaluated along two independent paths and the results
//! are compared before anything is returned.

use crate::combinatorics::Partition;
use crate::error::{BtsError, Result};
use crate::poly_engine::small_int;
use crate::scalar::{Cx, Scalar};
use crate::tensor_core::{compress, to_u_coordinates, BinaryTensor, MuTensor};
use num_traits::Num;
#[cfg(test)]
use num_traits::Zero;
use serde::Serialize;

/// φ in t-coordinates: (coefficient, indices of the four factors t_{abc} with index 4a+2b+c).
const PHI_TERMS: [(i64, [usize; 4]); 50] = [
    (1, [0, 0, 0, 0]),
    (2, [0, 0, 1, 1]),
    (2, [0, 0, 2, 2]),
    (-2, [0, 0, 3, 3]),
    (2, [0, 0, 4, 4]),
    (-2, [0, 0, 5, 5]),
    (-2, [0, 0, 6, 6]),
    (-6, [0, 0, 7, 7]),
    (8, [0, 1, 2, 3]),
    (8, [0, 1, 4, 5]),
    (8, [0, 1, 6, 7]),
    (8, [0, 2, 4, 6]),
    (8, [0, 2, 5, 7]),
    (8, [0, 3, 4, 7]),
    (-8, [0, 3, 5, 6]),
    (1, [1, 1, 1, 1]),
    (-2, [1, 1, 2, 2]),
    (2, [1, 1, 3, 3]),
    (-2, [1, 1, 4, 4]),
    (2, [1, 1, 5, 5]),
    (-6, [1, 1, 6, 6]),
    (-2, [1, 1, 7, 7]),
    (-8, [1, 2, 4, 7]),
    (8, [1, 2, 5, 6]),
    (8, [1, 3, 4, 6]),
    (8, [1, 3, 5, 7]),
    (1, [2, 2, 2, 2]),
    (2, [2, 2, 3, 3]),
    (-2, [2, 2, 4, 4]),
    (-6, [2, 2, 5, 5]),
    (2, [2, 2, 6, 6]),
    (-2, [2, 2, 7, 7]),
    (8, [2, 3, 4, 5]),
    (8, [2, 3, 6, 7]),
    (1, [3, 3, 3, 3]),
    (-6, [3, 3, 4, 4]),
    (-2, [3, 3, 5, 5]),
    (-2, [3, 3, 6, 6]),
    (2, [3, 3, 7, 7]),
    (1, [4, 4, 4, 4]),
    (2, [4, 4, 5, 5]),
    (2, [4, 4, 6, 6]),
    (-2, [4, 4, 7, 7]),
    (8, [4, 5, 6, 7]),
    (1, [5, 5, 5, 5]),
    (-2, [5, 5, 6, 6]),
    (2, [5, 5, 7, 7]),
    (1, [6, 6, 6, 6]),
    (2, [6, 6, 7, 7]),
    (1, [7, 7, 7, 7]),
];

/// The 2×2×2 invariants of a real tensor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantSet222<T> {
    pub theta: [T; 4],
    pub phi: T,
    /// (re, im) of φ₁ = u₀₀₁u₀₁₀u₁₀₀u₁₁₁.
    pub phi1: (T, T),
    pub det: T,
    /// f_{3,{j}} for slots j = 1, 2, 3.
    pub f3: [T; 3],
}

/// a₀, a₅, a₆ of the dual ED polynomial for d = 3.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeCoeffs<T> {
    pub a0: T,
    pub a5: T,
    pub a6: T,
}

fn det2<R: Clone + Num>(a: &R, b: &R, c: &R, d: &R) -> R {
    a.clone() * d.clone() - b.clone() * c.clone()
}

/// Hyperdeterminant of a 2×2×2 array over any commutative ring (minor form).
pub fn hyperdet_minor<R: Clone + Num>(t: &[R]) -> R {
    assert_eq!(t.len(), 8);
    let s = det2(&t[0], &t[3], &t[4], &t[7]) + det2(&t[2], &t[1], &t[6], &t[5]);
    s.clone() * s - small_int::<R>(4) * det2(&t[0], &t[1], &t[4], &t[5]) * det2(&t[2], &t[3], &t[6], &t[7])
}

/// Cayley's expanded form of the hyperdeterminant.
pub fn hyperdet_cayley<R: Clone + Num>(t: &[R]) -> R {
    let a = |i: usize| t[i].clone();
    let sq = |x: R| x.clone() * x;
    let squares = sq(a(0) * a(7)) + sq(a(1) * a(6)) + sq(a(2) * a(5)) + sq(a(4) * a(3));
    let mixed = a(0) * a(1) * a(6) * a(7)
        + a(0) * a(2) * a(5) * a(7)
        + a(0) * a(4) * a(3) * a(7)
        + a(1) * a(2) * a(5) * a(6)
        + a(1) * a(4) * a(3) * a(6)
        + a(2) * a(4) * a(3) * a(5);
    let quad = a(0) * a(3) * a(5) * a(6) + a(1) * a(2) * a(4) * a(7);
    squares - small_int::<R>(2) * mixed + small_int::<R>(4) * quad
}

fn theta_t_forms<T: Scalar>(t: &[T]) -> [T; 4] {
    let g = |i: usize| t[i].clone();
    let sq = |x: T| x.clone() * x;
    [
        sq(g(0) - g(3) - g(5) - g(6)) + sq(g(7) - g(4) - g(2) - g(1)),
        sq(g(0) + g(3) + g(5) - g(6)) + sq(g(7) + g(4) + g(2) - g(1)),
        sq(g(0) + g(3) - g(5) + g(6)) + sq(g(7) + g(4) - g(2) + g(1)),
        sq(g(0) - g(3) + g(5) + g(6)) + sq(g(7) - g(4) + g(2) + g(1)),
    ]
}

fn phi_t_form<T: Scalar>(t: &[T]) -> T {
    PHI_TERMS.iter().fold(T::zero(), |acc, (c, idx)| {
        acc + T::from_i64(*c) * idx.iter().fold(T::one(), |p, &i| p * t[i].clone())
    })
}

fn agree<T: Scalar>(a: &T, b: &T, scale: f64, what: &str) -> Result<()> {
    let ok = if T::is_exact() {
        a == b
    } else {
        (a.clone() - b.clone()).abs_f64() <= 1e-10 * scale.max(f64::MIN_POSITIVE)
    };
    if ok {
        Ok(())
    } else {
        Err(BtsError::CrossCheck(format!(
            "{what}: {} vs {}",
            a.to_f64(),
            b.to_f64()
        )))
    }
}

fn require_d<T: Clone + Num>(t: &BinaryTensor<T>, d: usize) -> Result<()> {
    if t.d() != d {
        return Err(BtsError::InvalidInput(format!(
            "expected an order-{d} tensor, got order {}",
            t.d()
        )));
    }
    Ok(())
}

fn cx<T: Scalar>(v: &T) -> Cx<T> {
    Cx::new(v.clone(), T::zero())
}

fn i_times<T: Scalar>(v: &Cx<T>) -> Cx<T> {
    Cx::new(-v.im.clone(), v.re.clone())
}

/// Det(A + iB)·Det(A − iB) for slices A, B; returns (re, im) of the product.
fn conjugate_slice_product<T: Scalar>(
    a: &BinaryTensor<T>,
    b: &BinaryTensor<T>,
    det: impl Fn(&[Cx<T>]) -> Cx<T>,
) -> Cx<T> {
    let plus: Vec<Cx<T>> = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| cx(x) + i_times(&cx(y)))
        .collect();
    let minus: Vec<Cx<T>> = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| cx(x) - i_times(&cx(y)))
        .collect();
    det(&plus) * det(&minus)
}

fn det_matrix<T: Scalar>(m: &[Cx<T>]) -> Cx<T> {
    det2(&m[0], &m[1], &m[2], &m[3])
}

/// f_{d,{j}} = Det(t_j⁽⁰⁾ + i t_j⁽¹⁾)·Det(t_j⁽⁰⁾ − i t_j⁽¹⁾) for d ∈ {3, 4}; slot j is 0-based.
pub fn slice_factor<T: Scalar>(t: &BinaryTensor<T>, j: usize) -> Result<T> {
    let v = slice_factor_complex(t, j)?;
    let scale = t.norm_sq().to_f64().powi(if t.d() == 3 { 2 } else { 4 });
    if !T::is_exact() && v.im.abs_f64() > 1e-12 * scale.max(1.0) {
        return Err(BtsError::CrossCheck(format!(
            "slice factor not real: imaginary part {}",
            v.im.to_f64()
        )));
    }
    Ok(v.re)
}

/// The complex value before taking the real part.
pub fn slice_factor_complex<T: Scalar>(t: &BinaryTensor<T>, j: usize) -> Result<Cx<T>> {
    if j >= t.d() {
        return Err(BtsError::InvalidInput(format!("slot {} out of range", j + 1)));
    }
    let a = t.slice(j, 0)?;
    let b = t.slice(j, 1)?;
    match t.d() {
        3 => Ok(conjugate_slice_product(&a, &b, det_matrix::<T>)),
        4 => Ok(conjugate_slice_product(&a, &b, hyperdet_minor::<Cx<T>>)),
        d => Err(BtsError::Unsupported(format!("slice factor for d = {d}"))),
    }
}

/// f_{4,{j,k}}: product over sign pairs of det(M₀₀ ± iM₁₀ ± iM₀₁ − (±)(±)M₁₁),
/// where M_{rs} is the matrix slice with slot j fixed to r and slot k to s.
pub fn pair_factor_4<T: Scalar>(t: &BinaryTensor<T>, j: usize, k: usize) -> Result<T> {
    require_d(t, 4)?;
    if j == k || j > 3 || k > 3 {
        return Err(BtsError::InvalidInput(format!("bad slot pair ({}, {})", j + 1, k + 1)));
    }
    let rest: Vec<usize> = (0..4).filter(|&l| l != j && l != k).collect();
    let perm = [j, k, rest[0], rest[1]];
    let p = t.permute_slots(&perm);
    let m = |r: u8, s: u8| -> BinaryTensor<T> {
        p.slice(0, r).and_then(|x| x.slice(0, s)).expect("d = 4 slices")
    };
    let (m00, m01, m10, m11) = (m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    let mut prod = Cx::new(T::one(), T::zero());
    for (a, b) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
        let entries: Vec<Cx<T>> = (0..4)
            .map(|i| {
                let re = m00.entries()[i].clone() - T::from_i64(a * b) * m11.entries()[i].clone();
                let im = T::from_i64(a) * m10.entries()[i].clone()
                    + T::from_i64(b) * m01.entries()[i].clone();
                Cx::new(re, im)
            })
            .collect();
        prod = prod * det_matrix(&entries);
    }
    let scale = t.norm_sq().to_f64().powi(4);
    if !T::is_exact() && prod.im.abs_f64() > 1e-12 * scale.max(1.0) {
        return Err(BtsError::CrossCheck("pair factor not real".into()));
    }
    Ok(prod.re)
}

/// θ₁..θ₄, φ, φ₁, Det and f_{3,{j}} with every printed formula cross-checked.
pub fn invariants_222<T: Scalar>(t: &BinaryTensor<T>) -> Result<InvariantSet222<T>> {
    require_d(t, 3)?;
    let e = t.entries();
    let n2 = t.norm_sq().to_f64();

    let theta = theta_t_forms(e);
    let u = to_u_coordinates(t);
    let ue = u.entries();
    let pairs = [(0, 7), (1, 6), (2, 5), (3, 4)];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let p = ue[a].clone() * ue[b].clone();
        agree(&theta[k], &p.re, n2, &format!("theta_{} (t-form vs u-form)", k + 1))?;
        agree(&p.im, &T::zero(), n2, &format!("theta_{} imaginary part", k + 1))?;
    }

    let phi = phi_t_form(e);
    let phi1 = ue[1].clone() * ue[2].clone() * ue[4].clone() * ue[7].clone();
    let phi2 = ue[0].clone() * ue[3].clone() * ue[5].clone() * ue[6].clone();
    let half = T::from_ratio(1, 2);
    agree(&phi, &((phi1.re.clone() + phi2.re.clone()) * half), n2 * n2, "phi (t-form vs u-form)")?;
    agree(&phi1.re, &phi2.re, n2 * n2, "phi_2 = conj(phi_1), real part")?;
    agree(&phi1.im, &(-phi2.im.clone()), n2 * n2, "phi_2 = conj(phi_1), imaginary part")?;

    let [t1, t2, t3, t4] = theta.clone();
    let sum_pairs = t1.clone() * t2.clone()
        + t1.clone() * t3.clone()
        + t1.clone() * t4.clone()
        + t2.clone() * t3.clone()
        + t2.clone() * t4.clone()
        + t3.clone() * t4.clone();
    let sum_sq = t1.clone() * t1.clone() + t2.clone() * t2.clone() + t3.clone() * t3.clone() + t4.clone() * t4.clone();
    let det_theta = (T::from_i64(2) * sum_pairs - sum_sq - T::from_i64(8) * phi.clone()) / T::from_i64(64);
    let det_minor = hyperdet_minor(e);
    agree(&det_theta, &det_minor, n2 * n2, "Det (theta form vs minor form)")?;

    let theta_forms = [
        t2.clone() * t3.clone() + t1.clone() * t4.clone(),
        t1.clone() * t3.clone() + t2.clone() * t4.clone(),
        t1.clone() * t2.clone() + t3.clone() * t4.clone(),
    ];
    let mut f3 = [T::zero(), T::zero(), T::zero()];
    for j in 0..3 {
        let via_theta = (theta_forms[j].clone() - T::from_i64(2) * phi.clone()) / T::from_i64(16);
        let via_slice = slice_factor_complex(t, j)?;
        agree(&via_slice.im, &T::zero(), n2 * n2, &format!("f_3,{{{}}} imaginary part", j + 1))?;
        agree(&via_theta, &via_slice.re, n2 * n2, &format!("f_3,{{{}}} (theta form vs slice form)", j + 1))?;
        f3[j] = via_slice.re;
    }

    Ok(InvariantSet222 {
        theta,
        phi,
        phi1: (phi1.re, phi1.im),
        det: det_minor,
        f3,
    })
}

impl<T: Scalar> InvariantSet222<T> {
    /// θ₁θ₂θ₃θ₄.
    pub fn theta_product(&self) -> T {
        self.theta.iter().fold(T::one(), |acc, v| acc * v.clone())
    }

    /// |φ₁|².
    pub fn phi1_norm_sq(&self) -> T {
        self.phi1.0.clone() * self.phi1.0.clone() + self.phi1.1.clone() * self.phi1.1.clone()
    }

    pub fn to_f64(&self) -> InvariantSet222<f64> {
        InvariantSet222 {
            theta: [
                self.theta[0].to_f64(),
                self.theta[1].to_f64(),
                self.theta[2].to_f64(),
                self.theta[3].to_f64(),
            ],
            phi: self.phi.to_f64(),
            phi1: (self.phi1.0.to_f64(), self.phi1.1.to_f64()),
            det: self.det.to_f64(),
            f3: [self.f3[0].to_f64(), self.f3[1].to_f64(), self.f3[2].to_f64()],
        }
    }
}

/// a₆ = θ₁θ₂θ₃θ₄, a₀ = Det²·f₁f₂f₃, a₅ = [(Σ triple products)φ − 3θ₁θ₂θ₃θ₄Σθ]/8.
pub fn extreme_coeffs_222<T: Scalar>(t: &BinaryTensor<T>) -> Result<ExtremeCoeffs<T>> {
    let inv = invariants_222(t)?;
    Ok(extreme_coeffs_from(&inv))
}

pub fn extreme_coeffs_from<T: Scalar>(inv: &InvariantSet222<T>) -> ExtremeCoeffs<T> {
    let [t1, t2, t3, t4] = inv.theta.clone();
    let a6 = inv.theta_product();
    let triples = t1.clone() * t2.clone() * t3.clone()
        + t1.clone() * t2.clone() * t4.clone()
        + t1.clone() * t3.clone() * t4.clone()
        + t2.clone() * t3.clone() * t4.clone();
    let sum = t1 + t2 + t3 + t4;
    let a5 = (triples * inv.phi.clone() - T::from_i64(3) * a6.clone() * sum) / T::from_i64(8);
    let a0 = inv.det.clone() * inv.det.clone() * inv.f3.iter().fold(T::one(), |acc, v| acc * v.clone());
    ExtremeCoeffs { a0, a5, a6 }
}

fn require_mu<T>(c: &MuTensor<T>, parts: &[usize]) -> Result<()>
where
    T: Clone + Num,
{
    if c.mu().parts() != parts {
        return Err(BtsError::PartitionMismatch {
            left: c.mu().to_string(),
            right: Partition::new(parts.to_vec())?.to_string(),
        });
    }
    Ok(())
}

/// The doubled σ² of a (2,1)-tensor (slots 1, 2 grouped) that is not a singular
/// value of the (2,1) problem itself.
pub fn extra_root_21<T: Scalar>(c: &MuTensor<T>) -> Result<T> {
    require_mu(c, &[2, 1])?;
    let g = |i: usize, k: usize| c.get(&[i, k]);
    let sq = |x: T| x.clone() * x;
    let num = sq(g(0, 1) * g(1, 0) - g(1, 1) * g(2, 0) - g(0, 0) * g(1, 1) + g(1, 0) * g(2, 1))
        + sq(g(0, 0) * g(2, 1) - g(0, 1) * g(2, 0));
    let den = sq(g(0, 0) + g(2, 0)) + sq(g(0, 1) + g(2, 1));
    if den.is_zero() {
        return Err(BtsError::Degenerate("isotropic configuration: theta_3 = 0".into()));
    }
    let value = num / den.clone();

    let inv = invariants_222(&c.expand())?;
    let [t1, t2, t3, t4] = inv.theta.clone();
    let n2 = c.expand().norm_sq().to_f64();
    agree(&t3, &t4, n2, "theta_3 = theta_4 for (2,1)-tensors")?;
    agree(&t3, &den, n2, "theta_3 vs c-coordinate denominator")?;
    let via_theta = (t1 * t3.clone() + t2 * t3.clone() - T::from_i64(2) * inv.phi) / (T::from_i64(16) * t3);
    agree(&value, &via_theta, value.abs_f64().max(1e-300), "extra root (c-form vs theta form)")?;
    Ok(value)
}

/// The tripled σ² of a symmetric cubic that is not one of its eigenvalues².
pub fn extra_root_3<T: Scalar>(c: &MuTensor<T>) -> Result<T> {
    require_mu(c, &[3])?;
    let g = |i: usize| c.get(&[i]);
    let sq = |x: T| x.clone() * x;
    let num = sq(g(1) * g(1) - g(2) * g(2) - g(0) * g(2) + g(1) * g(3)) + sq(g(0) * g(3) - g(1) * g(2));
    let den = sq(g(0) + g(2)) + sq(g(1) + g(3));
    if den.is_zero() {
        return Err(BtsError::Degenerate("isotropic configuration: theta_2 = 0".into()));
    }
    let value = num / den;

    let inv = invariants_222(&c.expand())?;
    let [t1, t2, t3, t4] = inv.theta.clone();
    let n2 = c.expand().norm_sq().to_f64();
    agree(&t2, &t3, n2, "theta_2 = theta_3 for symmetric tensors")?;
    agree(&t2, &t4, n2, "theta_2 = theta_4 for symmetric tensors")?;
    let via_theta = (t1 * t2.clone() + t2.clone() * t2.clone() - T::from_i64(2) * inv.phi) / (T::from_i64(16) * t2);
    agree(&value, &via_theta, value.abs_f64().max(1e-300), "extra root (c-form vs theta form)")?;
    Ok(value)
}

/// Δ_Q = |Σ_j C(d,j) c_j i^j|², the pairing with the isotropic power times its conjugate.
pub fn isotropic_factor_symmetric<T: Scalar>(c: &MuTensor<T>) -> Result<T> {
    if c.mu().s() != 1 {
        return Err(BtsError::InvalidInput(format!("expected mu = (d), got {}", c.mu())));
    }
    let d = c.mu().d();
    let (mut re, mut im) = (T::zero(), T::zero());
    for (j, v) in c.coords().iter().enumerate() {
        let w = T::from_i64(crate::combinatorics::binomial_u64(d, j) as i64) * v.clone();
        match j % 4 {
            0 => re = re + w,
            1 => im = im + w,
            2 => re = re - w,
            _ => im = im - w,
        }
    }
    Ok(re.clone() * re + im.clone() * im)
}

/// Re-labels a (1,2)-tensor as a (2,1)-tensor by moving the singleton slot last.
pub fn canonical_21<T: Scalar>(c: &MuTensor<T>) -> Result<MuTensor<T>> {
    match c.mu().parts() {
        [2, 1] => Ok(c.clone()),
        [1, 2] => {
            let t = c.expand().permute_slots(&[1, 2, 0]);
            compress(&t, &Partition::new(vec![2, 1])?)
        }
        _ => Err(BtsError::InvalidInput(format!("expected mu = (2,1), got {}", c.mu()))),
    }
}

/// Zero test used by callers that want both backends to behave alike.
pub fn is_negligible<T: Scalar>(v: &T, scale: f64) -> bool {
    if T::is_exact() {
        v.is_zero()
    } else {
        v.abs_f64() <= 1e-12 * scale.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn diag() -> BinaryTensor<Rational> {
        let mut t = BinaryTensor::<Rational>::zeros(3);
        t.set(&[0, 0, 0], rat(1, 1));
        t.set(&[1, 1, 1], rat(2, 1));
        t
    }

    #[test]
    fn diagonal_invariants() {
        let inv = invariants_222(&diag()).unwrap();
        assert_eq!(inv.theta, [rat(5, 1), rat(5, 1), rat(5, 1), rat(5, 1)]);
        assert_eq!(inv.phi, rat(-7, 1));
        assert_eq!(inv.det, rat(4, 1));
        assert_eq!(inv.f3, [rat(4, 1), rat(4, 1), rat(4, 1)]);
        let a = extreme_coeffs_from(&inv);
        assert_eq!((a.a0, a.a5, a.a6), (rat(1024, 1), rat(-5125, 1), rat(625, 1)));
    }

    #[test]
    fn rank_one_det_vanishes() {
        let mut t = BinaryTensor::<Rational>::zeros(3);
        t.set(&[0, 0, 0], rat(1, 1));
        let inv = invariants_222(&t).unwrap();
        assert!(inv.det.is_zero());
        assert!(extreme_coeffs_from(&inv).a0.is_zero());
    }

    #[test]
    fn cayley_matches_minor_form() {
        let t = crate::tensor_core::random_tensor(11, 3, &rat(1, 1));
        assert_eq!(hyperdet_cayley(t.entries()), hyperdet_minor(t.entries()));
    }

    #[test]
    fn symmetric_extra_root_example() {
        let c = MuTensor::new(Partition::single(3), vec![rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1)]).unwrap();
        assert_eq!(extra_root_3(&c).unwrap(), rat(1, 2));
    }

    #[test]
    fn isotropic_factor_examples() {
        let q = MuTensor::new(Partition::single(2), vec![rat(1, 1), rat(0, 1), rat(1, 1)]).unwrap();
        assert!(isotropic_factor_symmetric(&q).unwrap().is_zero());
        let c = MuTensor::new(Partition::single(3), vec![rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1)]).unwrap();
        assert_eq!(isotropic_factor_symmetric(&c).unwrap(), rat(2, 1));
    }
}
