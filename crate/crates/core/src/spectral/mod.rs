//! Singular vector tuples of μ-symmetric binary tensors, ED polynomials, the
//! product formula and best rank-one approximation.

mod edpoly;
mod elimination;
mod system;

pub use edpoly::{
    assemble_edpoly, best_rank_one, dual_leading_coefficient, fit_symmetric_normalization,
    primal_edpoly, primal_root_residuals, product_factors, verify_product, verify_product_with, BestRankOne, FactorValue,
    VerificationReport,
};

use crate::combinatorics::{ed_degree_usize, Partition};
use crate::error::{BtsError, Result};
use crate::invariants::canonical_21;
use crate::poly_engine::{all_roots_rational, UniPoly};
use crate::scalar::{Rational, Scalar};
use crate::tensor_core::{
    compress, random_mu_tensor, rational_rotation, BinaryTensor, MuTensor, RationalTensor,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use system::{chart_normalize, projective_distance, q, CriticalSystem, V2};

/// Residual bound for certified data, relative to ‖t‖.
pub const RESIDUAL_TOL: f64 = 1e-9;
const ACCEPT_TOL: f64 = 1e-11;
const ISOTROPIC_TOL: f64 = 1e-8;
const REAL_TOL: f64 = 1e-9;
const SAME_POINT_TOL: f64 = 1e-6;
const MAX_ROTATIONS: usize = 3;
/// Relative size (2^-k of the largest coordinate) of the perturbation used for
/// inputs without isolated critical points.
// Perturbation sizes, relative to the largest coordinate. The coarser one
// separates critical points that stay clustered under the fine one.
const PERTURBATION_EXPS: [usize; 2] = [20, 10];

/// One critical point: q-normalized vectors (one per slot group) and σ.
#[derive(Clone, Debug, Serialize)]
pub struct SingularDatum {
    #[serde(serialize_with = "ser_vectors")]
    pub vectors: Vec<V2>,
    #[serde(serialize_with = "ser_complex")]
    pub sigma: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub sigma_sq: Complex64,
    pub residual: f64,
    pub is_real: bool,
    pub chart_note: String,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&z.re)?;
    seq.serialize_element(&z.im)?;
    seq.end()
}

fn ser_vectors<S: serde::Serializer>(v: &[V2], s: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<[[f64; 2]; 2]> = v
        .iter()
        .map(|x| [[x[0].re, x[0].im], [x[1].re, x[1].im]])
        .collect();
    serde::Serialize::serialize(&flat, s)
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct DegenerateFlags {
    /// Some σ² values coincide (clustered at 1e−7 relative).
    pub collisions: bool,
    /// 0 is a singular value.
    pub zero_singular_value: bool,
    /// An isotropic critical point was met and skipped.
    pub isotropic: bool,
    /// The critical points were obtained through a perturbed input.
    pub perturbed: bool,
    /// Some datum exceeds the residual bound.
    pub uncertified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub mu: Vec<usize>,
    pub data: Vec<SingularDatum>,
    pub ed_degree: usize,
    /// Coefficients of the dual ED polynomial in ε², lowest degree first.
    pub edpoly_dual: Vec<f64>,
    pub degenerate: DegenerateFlags,
    /// Rotation attempts used (1 = first try).
    pub attempts: usize,
}

impl Spectrum {
    pub fn sigma_sq(&self) -> Vec<Complex64> {
        self.data.iter().map(|d| d.sigma_sq).collect()
    }

    /// ∏ σ².
    pub fn product(&self) -> Complex64 {
        self.data.iter().fold(Complex64::one(), |acc, d| acc * d.sigma_sq)
    }

    pub fn max_residual(&self) -> f64 {
        self.data.iter().map(|d| d.residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { seed: 0x5eed }
    }
}

fn rotation_params(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let mut k = 0i64;
            while k == 0 {
                k = rng.gen_range(-128..=128);
            }
            Rational::new(BigInt::from(k), BigInt::from(64))
        })
        .collect()
}

fn rotate_groups(t: &RationalTensor, mu: &Partition, params: &[Rational]) -> RationalTensor {
    mu.slot_groups()
        .iter()
        .enumerate()
        .fold(t.clone(), |acc, (k, &g)| acc.apply_matrix(k, &rational_rotation(&params[g])))
}

/// R^T x for the rational rotation with parameter p.
fn unrotate(x: V2, p: &Rational) -> V2 {
    let r = rational_rotation(p);
    let c = Complex64::new(r[0][0].to_f64(), 0.0);
    let s = Complex64::new(r[1][0].to_f64(), 0.0);
    [c * x[0] + s * x[1], -s * x[0] + c * x[1]]
}

fn same_tuple(a: &[V2], b: &[V2]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| projective_distance(*x, *y) <= SAME_POINT_TOL)
}

fn odd_group(mu: &Partition) -> Option<usize> {
    mu.parts().iter().position(|&p| p % 2 == 1)
}

/// q-normalizes, evaluates σ and the residual, and applies the sign conventions.
fn finalize(sys: &CriticalSystem, xs: &[V2], note: &str) -> Result<SingularDatum> {
    let mut v = Vec::with_capacity(xs.len());
    for &x in xs {
        let qx = q(x);
        let n2 = x[0].norm_sqr() + x[1].norm_sqr();
        if qx.norm() <= ISOTROPIC_TOL * n2 {
            return Err(BtsError::Isotropic(format!("q(x) = {qx} for x = {x:?}")));
        }
        let r = qx.sqrt();
        v.push([x[0] / r, x[1] / r]);
    }
    let is_real = v
        .iter()
        .all(|x| x[0].im.abs() <= REAL_TOL && x[1].im.abs() <= REAL_TOL);
    if is_real {
        for x in v.iter_mut() {
            x[0].im = 0.0;
            x[1].im = 0.0;
        }
    }
    let mut sigma = sys.value(&v);
    if is_real {
        sigma.im = 0.0;
    }
    let wants_flip = if is_real {
        sigma.re < 0.0
    } else {
        sigma.re < 0.0 || (sigma.re == 0.0 && sigma.im < 0.0)
    };
    if wants_flip {
        if let Some(g) = odd_group(sys.mu()) {
            v[g] = [-v[g][0], -v[g][1]];
            sigma = -sigma;
        }
    }
    let residual = (0..sys.s())
        .map(|g| {
            let y = sys.y(&v, g);
            (y[0] - sigma * v[g][0]).norm().max((y[1] - sigma * v[g][1]).norm())
        })
        .fold(0.0, f64::max);
    Ok(SingularDatum {
        vectors: v,
        sigma,
        sigma_sq: sigma * sigma,
        residual,
        is_real,
        chart_note: note.to_string(),
    })
}

fn sort_data(data: &mut [SingularDatum]) {
    data.sort_by(|a, b| {
        b.sigma_sq
            .re
            .total_cmp(&a.sigma_sq.re)
            .then(a.sigma_sq.im.total_cmp(&b.sigma_sq.im))
    });
}

/// Multiset comparison helper: clusters σ² values at 1e−7 relative.
fn has_collisions(values: &[Complex64]) -> bool {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let scale = values[i].norm().max(values[j].norm()).max(1e-300);
            if (values[i] - values[j]).norm() <= 1e-7 * scale {
                return true;
            }
        }
    }
    false
}

/// Critical tuples from one pass, split by whether some vector is isotropic.
struct Pass {
    regular: Vec<Vec<V2>>,
    isotropic: Vec<Vec<V2>>,
}

fn is_isotropic(x: V2) -> bool {
    q(x).norm() <= ISOTROPIC_TOL * (x[0].norm_sqr() + x[1].norm_sqr())
}

/// One elimination pass on a rotated copy. Returns unrotated, polished tuples.
fn attempt(
    t: &RationalTensor,
    mu: &Partition,
    params: &[Rational],
    original: &CriticalSystem,
) -> Result<Pass> {
    let rotated = rotate_groups(t, mu, params);
    let rsys = CriticalSystem::new(&rotated.to_f64(), mu);
    let elim = elimination::eliminate(elimination::chart_equations(&rotated, mu))?;
    let cands = elimination::candidates(&elim)?;
    let mut pass = Pass {
        regular: Vec::new(),
        isotropic: Vec::new(),
    };
    for z in cands {
        if z.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let xs: Vec<V2> = z.iter().map(|&zi| [Complex64::one(), zi]).collect();
        let (xs, res) = rsys.polish(&xs);
        if !(res <= ACCEPT_TOL * rsys.scale()) {
            continue;
        }
        let back: Vec<V2> = xs
            .iter()
            .enumerate()
            .map(|(g, &x)| chart_normalize(unrotate(x, &params[g])))
            .collect();
        let (back, res) = original.polish(&back);
        if !(res <= ACCEPT_TOL * original.scale()) {
            continue;
        }
        let bucket = if back.iter().any(|&x| is_isotropic(x)) {
            &mut pass.isotropic
        } else {
            &mut pass.regular
        };
        if !bucket.iter().any(|f| same_tuple(f, &back)) {
            bucket.push(back);
        }
    }
    Ok(pass)
}

/// Solves by elimination for any μ with at most three parts.
fn solve_by_elimination(c: &MuTensor<Rational>, opts: &SolveOptions) -> Result<Spectrum> {
    let mu = c.mu().clone();
    let expected = ed_degree_usize(&mu)?;
    let t = c.expand();
    if t.is_zero() {
        return Err(BtsError::Degenerate("the zero tensor has no isolated critical points".into()));
    }
    let sys = CriticalSystem::new(&t.to_f64(), &mu);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last = String::new();
    // a_N = 0 exactly: some critical points have gone to infinity.
    let lead_vanishes = dual_leading_coefficient(c).is_ok_and(|v| v.is_zero());
    // Isotropic critical points have no σ; the data that remain are returned
    // with the flag set when the count is consistent.
    let mut partial: Option<(Vec<Vec<V2>>, usize)> = None;
    for k in 0..MAX_ROTATIONS {
        let params = rotation_params(&mut rng, mu.s());
        match attempt(&t, &mu, &params, &sys) {
            Ok(pass) if pass.regular.len() == expected => {
                return finish(&sys, &mu, &pass.regular, expected, k + 1, false, "elimination");
            }
            Ok(pass) => {
                let n = pass.regular.len();
                if (lead_vanishes || !pass.isotropic.is_empty())
                    && n > 0
                    && n + pass.isotropic.len() <= expected
                    && partial.as_ref().is_none_or(|(p, _)| p.len() < n)
                {
                    partial = Some((pass.regular, k + 1));
                }
                last = format!(
                    "{n} isolated critical points ({} isotropic), expected {expected}",
                    pass.isotropic.len()
                );
            }
            Err(e) => last = e.to_string(),
        }
    }
    if let Some((tuples, k)) = partial {
        return finish(&sys, &mu, &tuples, expected, k, true, "elimination, isotropic points dropped");
    }
    perturbed_solve(c, opts, &sys, expected, lead_vanishes)
        .map_err(|e| BtsError::GeneralPosition(format!("{last}; perturbation fallback: {e}")))
}

fn finish(
    sys: &CriticalSystem,
    mu: &Partition,
    tuples: &[Vec<V2>],
    expected: usize,
    attempts: usize,
    isotropic: bool,
    note: &str,
) -> Result<Spectrum> {
    let data = tuples
        .iter()
        .map(|xs| finalize(sys, xs, &format!("{note}, rotation {attempts}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(build_spectrum(mu, data, expected, attempts, isotropic, false))
}

/// Critical points of t + s·r, each polished back onto t. Used when t has
/// non-isolated or colliding critical points.
fn perturbed_solve(
    c: &MuTensor<Rational>,
    opts: &SolveOptions,
    sys: &CriticalSystem,
    expected: usize,
    lead_vanishes: bool,
) -> Result<Spectrum> {
    let mu = c.mu().clone();
    let largest = c
        .coords()
        .iter()
        .map(crate::scalar::abs_rational)
        .max()
        .unwrap_or_else(Rational::one);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut best: Option<(Pass, usize)> = None;
    let mut tries = 0;
    'scales: for (i, &exp) in PERTURBATION_EXPS.iter().enumerate() {
        let scale = &largest / Rational::from_integer(BigInt::one() << exp);
        let r = random_mu_tensor(opts.seed ^ 0x9e37_79b9_7f4a_7c15 ^ i as u64, &mu, &scale);
        let pert = MuTensor::new(
            mu.clone(),
            c.coords().iter().zip(r.coords()).map(|(a, b)| a + b).collect(),
        )?;
        let t = pert.expand();
        let psys = CriticalSystem::new(&t.to_f64(), &mu);
        for _ in 0..MAX_ROTATIONS {
            tries += 1;
            let params = rotation_params(&mut rng, mu.s());
            let Ok(pass) = attempt(&t, &mu, &params, &psys) else {
                continue;
            };
            let n = pass.regular.len();
            if n == expected {
                best = Some((pass, tries));
                break 'scales;
            }
            if lead_vanishes && n > 0 && best.as_ref().is_none_or(|(b, _)| b.regular.len() < n) {
                best = Some((pass, tries));
            }
        }
    }
    if let Some((pass, k)) = best {
        let mut data = Vec::with_capacity(expected);
        let mut isotropic = pass.regular.len() < expected;
        for xs in &pass.regular {
            let (xs, _) = sys.polish(xs);
            match finalize(sys, &xs, &format!("perturbed input, attempt {k}")) {
                Ok(d) => data.push(d),
                Err(BtsError::Isotropic(_)) => isotropic = true,
                Err(e) => return Err(e),
            }
        }
        return Ok(build_spectrum(&mu, data, expected, MAX_ROTATIONS + k, isotropic, true));
    }
    Err(BtsError::GeneralPosition("perturbed input also failed".into()))
}

fn build_spectrum(
    mu: &Partition,
    mut data: Vec<SingularDatum>,
    ed_degree: usize,
    attempts: usize,
    isotropic: bool,
    perturbed: bool,
) -> Spectrum {
    sort_data(&mut data);
    let values: Vec<Complex64> = data.iter().map(|d| d.sigma_sq).collect();
    let max_sq = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let zero = values.iter().any(|v| v.norm() <= 1e-8 * max_sq.max(f64::MIN_POSITIVE));
    let uncertified = data.iter().any(|d| !(d.residual <= RESIDUAL_TOL * data_scale(&data)));
    let edpoly = UniPoly::new(
        values
            .iter()
            .fold(UniPoly::constant(Complex64::one()), |acc, &v| {
                acc.mul(&UniPoly::new(vec![-v, Complex64::one()]))
            })
            .coeffs()
            .to_vec(),
    );
    Spectrum {
        mu: mu.parts().to_vec(),
        ed_degree,
        edpoly_dual: edpoly.coeffs().iter().map(|c| c.re).collect(),
        degenerate: DegenerateFlags {
            collisions: has_collisions(&values),
            zero_singular_value: zero,
            isotropic,
            perturbed,
            uncertified,
        },
        data,
        attempts,
    }
}

fn data_scale(data: &[SingularDatum]) -> f64 {
    // ‖t‖ ≥ max |σ|, which is the only scale visible here; callers recheck against ‖t‖.
    data.iter().map(|d| d.sigma.norm()).fold(1e-300, f64::max)
}

/// Singular data of a general 2×2×2 tensor (μ = 1³).
pub fn solve_222(t: &RationalTensor) -> Result<Spectrum> {
    solve_222_with(t, &SolveOptions::default())
}

pub fn solve_222_with(t: &RationalTensor, opts: &SolveOptions) -> Result<Spectrum> {
    if t.d() != 3 {
        return Err(BtsError::InvalidInput(format!("solve_222 needs d = 3, got {}", t.d())));
    }
    let c = compress(t, &Partition::ones(3))?;
    let mut s = solve_by_elimination(&c, opts)?;
    recheck_residuals(&mut s, &t.to_f64());
    Ok(s)
}

/// Singular data of a (2,1)-symmetric tensor, vectors (x₁, x₃) with x₂ = x₁.
pub fn solve_21(c: &MuTensor<Rational>) -> Result<Spectrum> {
    solve_21_with(c, &SolveOptions::default())
}

pub fn solve_21_with(c: &MuTensor<Rational>, opts: &SolveOptions) -> Result<Spectrum> {
    let c = canonical_21(c)?;
    let mut s = solve_by_elimination(&c, opts)?;
    recheck_residuals(&mut s, &c.expand().to_f64());
    Ok(s)
}

/// Dispatches on μ: eigenvectors for μ = (d), elimination otherwise (s ≤ 3).
pub fn solve(c: &MuTensor<Rational>, opts: &SolveOptions) -> Result<Spectrum> {
    match c.mu().parts() {
        [_] => eigen_symmetric_with(c, opts),
        [1, 2] => solve_21_with(c, opts),
        p if p.len() <= 3 => {
            let mut s = solve_by_elimination(c, opts)?;
            recheck_residuals(&mut s, &c.expand().to_f64());
            Ok(s)
        }
        _ => Err(BtsError::Unsupported(format!(
            "solvers cover at most three slot groups, got mu = {}",
            c.mu()
        ))),
    }
}

fn recheck_residuals(s: &mut Spectrum, t: &BinaryTensor<f64>) {
    let n = t.norm_f64();
    s.degenerate.uncertified = s.data.iter().any(|d| !(d.residual <= RESIDUAL_TOL * n.max(1e-300)));
}

/// E-eigenpairs of a symmetric tensor, i.e. singular data for μ = (d).
pub fn eigen_symmetric(c: &MuTensor<Rational>) -> Result<Spectrum> {
    eigen_symmetric_with(c, &SolveOptions::default())
}

/// Coefficients (descending powers of x₀) of x₁∂₀f − x₀∂₁f for f = Σ C(d,j)c_j x₀^{d−j}x₁^j.
pub fn critical_form(c: &MuTensor<Rational>) -> Vec<Rational> {
    let d = c.mu().d();
    let cs = c.coords();
    let binom = |n: usize, k: usize| Rational::from_integer(BigInt::from(crate::combinatorics::binomial_u64(n, k)));
    let dr = Rational::from_integer(BigInt::from(d));
    // ∂₀f = d Σ_{j<d} C(d−1,j) c_j x₀^{d−1−j}x₁^j,  ∂₁f = d Σ_{j<d} C(d−1,j) c_{j+1} x₀^{d−1−j}x₁^j
    let mut g = vec![Rational::zero(); d + 1];
    for j in 0..d {
        let a = &dr * binom(d - 1, j) * &cs[j];
        let b = &dr * binom(d - 1, j) * &cs[j + 1];
        g[j + 1] += a; // x₁ · x₀^{d−1−j}x₁^j
        g[j] -= b; // x₀ · x₀^{d−1−j}x₁^j
    }
    g
}

pub fn eigen_symmetric_with(c: &MuTensor<Rational>, opts: &SolveOptions) -> Result<Spectrum> {
    if c.mu().s() != 1 {
        return Err(BtsError::InvalidInput(format!("eigen_symmetric needs mu = (d), got {}", c.mu())));
    }
    let mu = c.mu().clone();
    let d = mu.d();
    let t = c.expand();
    let sys = CriticalSystem::new(&t.to_f64(), &mu);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut params = Rational::zero();
    let mut last = None;
    for k in 0..=MAX_ROTATIONS {
        let tc = if k == 0 {
            c.clone()
        } else {
            params = rotation_params(&mut rng, 1).remove(0);
            compress(&rotate_groups(&t, &mu, std::slice::from_ref(&params)), &mu)?
        };
        let g = critical_form(&tc);
        if g.iter().all(|v| v.is_zero()) {
            return Err(BtsError::Degenerate(
                "critical form vanishes identically: every vector is an eigenvector".into(),
            ));
        }
        // g(1, z) has coefficients g[k] for z^k; a degree drop means roots at x₀ = 0.
        let uni = UniPoly::new(g.clone());
        let at_infinity = d - uni.degree().unwrap_or(0);
        let mut raw: Vec<V2> = Vec::new();
        if uni.degree().unwrap_or(0) > 0 {
            for cl in all_roots_rational(&uni)?.clusters {
                for _ in 0..cl.multiplicity {
                    raw.push([Complex64::one(), cl.value]);
                }
            }
        }
        for _ in 0..at_infinity {
            raw.push([Complex64::zero(), Complex64::one()]);
        }
        let mut data = Vec::with_capacity(d);
        let mut iso = None;
        for x in raw {
            let x = if k == 0 { x } else { unrotate(x, &params) };
            let (xs, _) = sys.polish(&[x]);
            match finalize(&sys, &xs, &format!("critical binary form, rotation {k}")) {
                Ok(datum) => data.push(datum),
                Err(e) => {
                    iso = Some(e);
                    break;
                }
            }
        }
        match iso {
            None => {
                let mut s = build_spectrum(&mu, data, d, k + 1, k > 0, false);
                recheck_residuals(&mut s, &t.to_f64());
                return Ok(s);
            }
            Some(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| BtsError::Isotropic("isotropic eigenvector".into())))
}
