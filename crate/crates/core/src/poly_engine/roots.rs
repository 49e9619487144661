use super::UniPoly;
use crate::error::{BtsError, Result};
use crate::scalar::{Rational, Scalar};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

const MAX_ITER: usize = 200;
const RESIDUAL_TOL: f64 = 1e-10;
const CLUSTER_TOL: f64 = 1e-7;

/// One distinct root and how many times it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Roots {
    pub clusters: Vec<RootCluster>,
}

impl Roots {
    /// Roots repeated according to multiplicity.
    pub fn flat(&self) -> Vec<Complex64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }
}

/// |p(r)| / Σ|a_i||r|^i.
pub fn backward_error(p: &[Complex64], r: Complex64) -> f64 {
    let mut v = Complex64::zero();
    let mut scale = 0.0;
    let ar = r.norm();
    for c in p.iter().rev() {
        v = v * r + c;
        scale = scale * ar + c.norm();
    }
    if scale == 0.0 {
        0.0
    } else {
        v.norm() / scale
    }
}

fn eval_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::zero();
    let mut dv = Complex64::zero();
    for c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

fn cauchy_bound(p: &[Complex64]) -> f64 {
    let lead = p.last().expect("non-empty").norm();
    1.0 + p[..p.len() - 1]
        .iter()
        .map(|c| c.norm() / lead)
        .fold(0.0, f64::max)
}

fn aberth(p: &[Complex64]) -> (Vec<Complex64>, bool) {
    let n = p.len() - 1;
    let radius = cauchy_bound(p);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius, a)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all_small = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, dv) = eval_with_derivative(p, z[k]);
            if v.is_zero() {
                done[k] = true;
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm().max(1.0) {
                done[k] = true;
            } else {
                all_small = false;
            }
        }
        if all_small {
            return (z, true);
        }
    }
    let ok = z.iter().all(|&r| backward_error(p, r) <= RESIDUAL_TOL);
    (z, ok)
}

/// Eigenvalues of the balanced companion matrix.
fn companion_roots(p: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = p.len() - 1;
    let lead = p[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    balance(&mut m);
    let schur = m.schur();
    let (_, t) = schur.unpack();
    let vals: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    vals.iter().all(|v| v.is_finite()).then_some(vals)
}

/// Diagonal similarity scaling so row and column norms are comparable.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for _ in 0..20 {
        let mut converged = true;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| m[(j, i)].norm()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / 2.0 {
                cc *= 2.0;
                rr /= 2.0;
                f *= 2.0;
            }
            while cc > rr * 2.0 {
                cc /= 2.0;
                rr *= 2.0;
                f /= 2.0;
            }
            if (cc + rr) < 0.95 * (c + r) {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn polish(p: &[Complex64], z: Complex64) -> Complex64 {
    let mut z = z;
    let mut best = (backward_error(p, z), z);
    for _ in 0..8 {
        let (v, dv) = eval_with_derivative(p, z);
        if dv.is_zero() {
            break;
        }
        let next = z - v / dv;
        if !next.is_finite() {
            break;
        }
        z = next;
        let e = backward_error(p, z);
        if e < best.0 {
            best = (e, z);
        }
        if e < 1e-16 {
            break;
        }
    }
    best.1
}

fn cluster(roots: &[Complex64]) -> Vec<RootCluster> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    'outer: for &r in roots {
        for c in out.iter_mut() {
            if (c.0 - r).norm() <= CLUSTER_TOL * r.norm().max(c.0.norm()).max(1.0) {
                let m = c.1 as f64;
                c.0 = (c.0 * m + r) / (m + 1.0);
                c.1 += 1;
                continue 'outer;
            }
        }
        out.push((r, 1));
    }
    out.into_iter()
        .map(|(value, multiplicity)| RootCluster { value, multiplicity })
        .collect()
}

/// All complex roots of a polynomial with complex double coefficients.
pub fn all_roots(p: &UniPoly<Complex64>) -> Result<Roots> {
    let Some(deg) = p.degree() else {
        return Err(BtsError::InvalidInput("the zero polynomial has no isolated roots".into()));
    };
    if deg == 0 {
        return Err(BtsError::InvalidInput("degree must be at least 1".into()));
    }
    let coeffs = p.coeffs();
    let zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    let core = &coeffs[zeros..];
    let mut roots = vec![Complex64::zero(); zeros];
    if core.len() > 1 {
        let (found, converged) = aberth(core);
        let polished: Vec<Complex64> = found.iter().map(|&z| polish(core, z)).collect();
        let good = converged && polished.iter().all(|&r| backward_error(core, r) <= RESIDUAL_TOL);
        if good {
            roots.extend(polished);
        } else {
            let fallback = companion_roots(core)
                .map(|v| v.into_iter().map(|z| polish(core, z)).collect::<Vec<_>>());
            match fallback {
                Some(v) if v.iter().all(|&r| backward_error(core, r) <= RESIDUAL_TOL) => {
                    roots.extend(v)
                }
                _ => {
                    return Err(BtsError::NoConvergence {
                        iterations: MAX_ITER,
                        partial: polished,
                    })
                }
            }
        }
    }
    Ok(Roots {
        clusters: cluster(&roots),
    })
}

/// Roots of an exact polynomial: square-free decomposition first, so
/// multiplicities are exact and every root-finding call sees simple roots.
pub fn all_roots_rational(p: &UniPoly<Rational>) -> Result<Roots> {
    match p.degree() {
        None => {
            return Err(BtsError::InvalidInput("the zero polynomial has no isolated roots".into()))
        }
        Some(0) => return Err(BtsError::InvalidInput("degree must be at least 1".into())),
        _ => {}
    }
    let mut clusters = Vec::new();
    for (factor, mult) in p.square_free_decomposition() {
        let r = all_roots(&factor.to_complex())?;
        for c in r.clusters {
            clusters.push(RootCluster {
                value: c.value,
                multiplicity: c.multiplicity * mult,
            });
        }
    }
    Ok(Roots { clusters })
}

impl UniPoly<Rational> {
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs()
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * z + Complex64::new(c.to_f64(), 0.0))
    }
}
