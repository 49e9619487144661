//! ED polynomials from a spectrum, the product formula check and best rank-one
//! approximation.

use super::{solve, SolveOptions, Spectrum};
use crate::combinatorics::{exponent_alpha, Partition, SubsetJ};
use crate::error::{BtsError, Result};
use crate::invariants::{
    canonical_21, extreme_coeffs_from, invariants_222, isotropic_factor_symmetric,
    slice_factor,
};
use crate::poly_engine::{backward_error, discriminant_binary_form, reflect_edpoly, UniPoly};
use crate::scalar::{format_rational, rational_to_f64, Rational};
use crate::tensor_core::{random_mu_tensor, BinaryTensor, MuTensor};
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

/// One factor f_{μ,J}(t) with the exponent it carries in ∏σ².
#[derive(Clone, Debug, Serialize)]
pub struct FactorValue {
    pub subset: String,
    pub name: String,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub exponent: i64,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn factor(mu: &Partition, j: SubsetJ, name: &str, value: Rational) -> FactorValue {
    FactorValue {
        subset: j.to_string(),
        name: name.to_string(),
        value,
        exponent: -exponent_alpha(mu, j).value,
    }
}

/// The non-trivial factors of the product formula, evaluated exactly.
///
/// Supported: (1), (1,1), (d) for d ≥ 2, (2,1) in either order and (1,1,1).
pub fn product_factors(c: &MuTensor<Rational>) -> Result<Vec<FactorValue>> {
    let mu = c.mu().clone();
    let all = SubsetJ::full(mu.s());
    let empty = SubsetJ::EMPTY;
    let out = match mu.parts() {
        [1] => vec![factor(&mu, all, "q(t)", isotropic_factor_symmetric(c)?)],
        [1, 1] => {
            let m = c.coords();
            let det = &m[0] * &m[3] - &m[1] * &m[2];
            vec![factor(&mu, empty, "det", det)]
        }
        [d] => {
            let disc = discriminant_binary_form(c)?.value;
            let mut v = vec![factor(&mu, empty, "discriminant", disc)];
            if *d > 2 {
                v.push(factor(&mu, all, "isotropic", isotropic_factor_symmetric(c)?));
            }
            v
        }
        [2, 1] | [1, 2] => {
            let c = canonical_21(c)?;
            let mu = c.mu().clone();
            let t = c.expand();
            let inv = invariants_222(&t)?;
            let [t1, t2, ..] = inv.theta.clone();
            vec![
                factor(&mu, empty, "Det", inv.det),
                factor(&mu, SubsetJ::from_indices(&[1]), "slice factor (slot 3)", slice_factor(&t, 2)?),
                factor(&mu, SubsetJ::full(2), "theta_1 theta_2", t1 * t2),
            ]
        }
        [1, 1, 1] => {
            let t = c.expand();
            let inv = invariants_222(&t)?;
            let mut v = vec![factor(&mu, empty, "Det", inv.det.clone())];
            for j in 0..3 {
                v.push(factor(
                    &mu,
                    SubsetJ::from_indices(&[j]),
                    &format!("slice factor (slot {})", j + 1),
                    inv.f3[j].clone(),
                ));
            }
            v.push(factor(&mu, all, "theta product", inv.theta_product()));
            v
        }
        _ => {
            return Err(BtsError::Unsupported(format!(
                "product formula factors for mu = {mu}"
            )))
        }
    };
    Ok(out)
}

/// ∏ f^e exactly; None when a factor with negative exponent vanishes.
fn rhs_exact(factors: &[FactorValue]) -> Option<Rational> {
    let mut acc = Rational::one();
    for f in factors {
        if f.exponent < 0 {
            if f.value.is_zero() {
                return None;
            }
            acc /= num_traits::pow(f.value.clone(), f.exponent.unsigned_abs() as usize);
        } else {
            acc *= num_traits::pow(f.value.clone(), f.exponent as usize);
        }
    }
    Some(acc)
}

/// Leading coefficient a_N of the dual ED polynomial.
pub fn dual_leading_coefficient(c: &MuTensor<Rational>) -> Result<Rational> {
    let mu = c.mu();
    Ok(match mu.parts() {
        [1, 1, 1] => invariants_222(&c.expand())?.theta_product(),
        [2, 1] | [1, 2] => {
            let inv = invariants_222(&canonical_21(c)?.expand())?;
            &inv.theta[0] * &inv.theta[1]
        }
        [d] if *d > 2 => num_traits::pow(isotropic_factor_symmetric(c)?, d - 2),
        _ => Rational::one(),
    })
}

/// a_N·∏(ε² − σ_i²), coefficients in ε² from the constant term up. Imaginary
/// parts cancel for real input and are dropped.
pub fn assemble_edpoly(spec: &Spectrum, c: &MuTensor<Rational>) -> Result<UniPoly<f64>> {
    let lead = rational_to_f64(&dual_leading_coefficient(c)?);
    let monic = spec
        .sigma_sq()
        .iter()
        .fold(UniPoly::constant(Complex64::one()), |acc, &v| {
            acc.mul(&UniPoly::new(vec![-v, Complex64::one()]))
        });
    Ok(UniPoly::new(monic.coeffs().iter().map(|z| z.re * lead).collect()))
}

/// The primal ED polynomial: the dual one under ε² ↦ q̃(t) − ε².
pub fn primal_edpoly(spec: &Spectrum, c: &MuTensor<Rational>) -> Result<UniPoly<f64>> {
    let dual = assemble_edpoly(spec, c)?;
    let q = c.expand().to_f64().norm_sq();
    Ok(reflect_edpoly(&dual, &q))
}

/// LHS vs RHS of the product formula.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mu: String,
    pub lhs: f64,
    pub lhs_imag: f64,
    pub rhs: f64,
    /// RHS as an exact fraction, before normalization.
    pub rhs_exact: Option<String>,
    pub normalization: f64,
    pub rel_error: f64,
    /// |a₀/a_N − ∏σ²| / |∏σ²| from closed-form coefficients, when available.
    pub coefficient_check: Option<f64>,
    pub factors: Vec<FactorValue>,
    /// A factor with negative exponent vanished, or the RHS is zero.
    pub degenerate: bool,
    /// For degenerate inputs: both sides vanish (relative to ‖t‖^{2N}).
    pub both_vanish: Option<bool>,
}

impl VerificationReport {
    pub fn passes(&self, tol: f64) -> bool {
        if self.degenerate {
            self.both_vanish.unwrap_or(false)
        } else {
            self.rel_error < tol
        }
    }
}

pub fn verify_product(c: &MuTensor<Rational>) -> Result<VerificationReport> {
    verify_product_with(c, &SolveOptions::default(), 1.0)
}

/// `normalization` multiplies the RHS; it is 1 for every supported μ.
pub fn verify_product_with(
    c: &MuTensor<Rational>,
    opts: &SolveOptions,
    normalization: f64,
) -> Result<VerificationReport> {
    let factors = product_factors(c)?;
    let spec = solve(c, opts)?;
    Ok(report_from(c, &spec, factors, normalization))
}

fn report_from(
    c: &MuTensor<Rational>,
    spec: &Spectrum,
    factors: Vec<FactorValue>,
    normalization: f64,
) -> VerificationReport {
    let lhs = spec.product();
    let exact = rhs_exact(&factors);
    let rhs = exact.as_ref().map_or(f64::NAN, |r| rational_to_f64(r) * normalization);
    let n2 = c.expand().to_f64().norm_sq();
    let scale = n2.powi(spec.ed_degree as i32).max(f64::MIN_POSITIVE);
    let degenerate = exact.as_ref().is_none_or(|r| r.is_zero());
    let (rel_error, both_vanish) = if degenerate {
        let lhs_zero = lhs.norm() <= 1e-8 * scale;
        let rhs_zero = exact.as_ref().is_none_or(|r| r.is_zero());
        (f64::NAN, Some(lhs_zero && rhs_zero))
    } else {
        ((lhs.re / rhs - 1.0).abs().max(lhs.im.abs() / rhs.abs()), None)
    };
    let coefficient_check = if c.mu().parts() == [1, 1, 1] && !degenerate {
        invariants_222(&c.expand()).ok().and_then(|inv| {
            let e = extreme_coeffs_from(&inv);
            if e.a6.is_zero() {
                return None;
            }
            let q = rational_to_f64(&(e.a0 / e.a6));
            Some((q / lhs.re - 1.0).abs())
        })
    } else {
        None
    };
    VerificationReport {
        mu: c.mu().to_string(),
        lhs: lhs.re,
        lhs_imag: lhs.im,
        rhs,
        rhs_exact: exact.map(|r| format_rational(&r)),
        normalization,
        rel_error,
        coefficient_check,
        factors,
        degenerate,
        both_vanish,
    }
}

/// LHS/RHS on a seeded reference tensor for μ = (d).
pub fn fit_symmetric_normalization(d: usize, seed: u64) -> Result<f64> {
    let mu = Partition::single(d);
    let c = random_mu_tensor(seed, &mu, &Rational::one());
    let factors = product_factors(&c)?;
    let rhs = rhs_exact(&factors)
        .filter(|r| !r.is_zero())
        .ok_or_else(|| BtsError::Degenerate("reference tensor lies on a dual variety".into()))?;
    let lhs = solve(&c, &SolveOptions { seed })?.product();
    Ok(lhs.re / rational_to_f64(&rhs))
}

/// Residual of the primal ED polynomial at q̃(t − σx) for each datum.
pub fn primal_root_residuals(spec: &Spectrum, c: &MuTensor<Rational>) -> Result<Vec<f64>> {
    let primal = primal_edpoly(spec, c)?;
    let coeffs: Vec<Complex64> = primal.coeffs().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let t = c.expand().to_complex();
    let groups = c.mu().slot_groups();
    Ok(spec
        .data
        .iter()
        .map(|d| {
            let slots: Vec<[Complex64; 2]> = groups.iter().map(|&g| d.vectors[g]).collect();
            let approx = BinaryTensor::rank_one(&slots).scale(&d.sigma);
            let diff = t.sub(&approx);
            backward_error(&coeffs, diff.dot(&diff))
        })
        .collect())
}

/// Closest real rank-one μ-symmetric tensor.
#[derive(Clone, Debug, Serialize)]
pub struct BestRankOne {
    pub sigma: f64,
    pub vectors: Vec<[f64; 2]>,
    pub tensor: Vec<f64>,
    pub distance_sq: f64,
}

pub fn best_rank_one(spec: &Spectrum, t: &BinaryTensor<f64>) -> Result<BestRankOne> {
    let best = spec
        .data
        .iter()
        .filter(|d| d.is_real)
        .max_by(|a, b| a.sigma_sq.re.total_cmp(&b.sigma_sq.re))
        .ok_or_else(|| BtsError::NoConvergence {
            iterations: 0,
            partial: spec.sigma_sq(),
        })?;
    let groups = Partition::new(spec.mu.clone())?.slot_groups();
    let vectors: Vec<[f64; 2]> = best.vectors.iter().map(|x| [x[0].re, x[1].re]).collect();
    let slots: Vec<[f64; 2]> = groups.iter().map(|&g| vectors[g]).collect();
    let sigma = best.sigma.re;
    let r = BinaryTensor::rank_one(&slots).scale(&sigma);
    let diff = t.sub(&r);
    let direct = diff.dot(&diff);
    let pythagoras = t.norm_sq() - sigma * sigma;
    if (direct - pythagoras).abs() > 1e-8 * t.norm_sq().max(1.0) {
        return Err(BtsError::CrossCheck(format!(
            "distance² {direct} vs q(t) − σ² = {pythagoras}"
        )));
    }
    Ok(BestRankOne {
        sigma,
        vectors,
        tensor: r.entries().to_vec(),
        distance_sq: direct.max(0.0),
    })
}
