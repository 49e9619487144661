//! Exact elimination of the dehomogenized critical equations and numerical
//! back-substitution along fibres.

use crate::combinatorics::Partition;
use crate::error::{BtsError, Result};
use crate::poly_engine::{all_roots, all_roots_rational, sylvester_resultant, MultiPoly, UniPoly};
use crate::scalar::Rational;
use crate::tensor_core::RationalTensor;
use num_complex::Complex64;
use num_traits::Zero;

/// G_g with x_h = (1, z_h) for every group h; variable h is z_h.
pub(crate) fn chart_equations(t: &RationalTensor, mu: &Partition) -> Vec<MultiPoly> {
    let d = t.d();
    let s = mu.s();
    let groups = mu.slot_groups();
    (0..s)
        .map(|g| {
            let free = groups.iter().position(|&h| h == g).expect("non-empty group");
            let mut y = [MultiPoly::zero(s), MultiPoly::zero(s)];
            for (i, v) in t.entries().iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let mut e = vec![0u32; s];
                for (k, &h) in groups.iter().enumerate() {
                    if k != free {
                        e[h] += ((i >> (d - 1 - k)) & 1) as u32;
                    }
                }
                let b = (i >> (d - 1 - free)) & 1;
                y[b] = y[b].add(&MultiPoly::from_terms(s, [(e, v.clone())]));
            }
            y[0].mul(&MultiPoly::var(s, g)).sub(&y[1])
        })
        .collect()
}

/// Eliminated polynomial in z₁ plus the intermediate resultants used for back-substitution.
pub(crate) struct Elimination {
    pub eliminant: UniPoly<Rational>,
    pub equations: Vec<MultiPoly>,
    /// For s = 3: Res_{z₃}(G₁,G₂) and Res_{z₃}(G₁,G₃).
    pub intermediate: Vec<MultiPoly>,
}

pub(crate) fn eliminate(eqs: Vec<MultiPoly>) -> Result<Elimination> {
    let (eliminant, intermediate) = match eqs.len() {
        1 => (eqs[0].to_unipoly(0)?, Vec::new()),
        2 => (sylvester_resultant(&eqs[0], &eqs[1], 1)?.to_unipoly(0)?, Vec::new()),
        3 => {
            let r12 = sylvester_resultant(&eqs[0], &eqs[1], 2)?;
            let r13 = sylvester_resultant(&eqs[0], &eqs[2], 2)?;
            let e = sylvester_resultant(&r12, &r13, 1)?.to_unipoly(0)?;
            (e, vec![r12, r13])
        }
        s => return Err(BtsError::Unsupported(format!("elimination with {s} slot groups"))),
    };
    if eliminant.degree().unwrap_or(0) == 0 {
        return Err(BtsError::GeneralPosition(
            "eliminant is constant or identically zero".into(),
        ));
    }
    Ok(Elimination {
        eliminant,
        equations: eqs,
        intermediate,
    })
}

/// Roots in `var` of p with the other variables fixed; empty if p vanishes on the fibre.
fn fiber_roots(p: &MultiPoly, var: usize, point: &[Complex64]) -> Vec<Complex64> {
    let uni = p.to_univariate_complex(var, point);
    let reference: f64 = p
        .terms()
        .map(|(e, c)| {
            let c = crate::scalar::rational_to_f64(c).abs();
            e.iter()
                .enumerate()
                .filter(|&(i, _)| i != var)
                .fold(c, |acc, (i, &k)| acc * point[i].norm().powi(k as i32))
        })
        .fold(0.0, f64::max);
    let coeffs = uni.coeffs();
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max <= 1e-9 * reference {
        return Vec::new();
    }
    let mut trimmed: Vec<Complex64> = coeffs.to_vec();
    while trimmed.last().is_some_and(|c| c.norm() <= 1e-13 * max) {
        trimmed.pop();
    }
    if trimmed.len() < 2 {
        return Vec::new();
    }
    all_roots(&UniPoly::new(trimmed))
        .map(|r| r.clusters.iter().map(|c| c.value).collect())
        .unwrap_or_default()
}

/// Candidate points (z₁,…,z_s); extraneous ones are removed later by residuals.
pub(crate) fn candidates(elim: &Elimination) -> Result<Vec<Vec<Complex64>>> {
    let roots = all_roots_rational(&elim.eliminant)?;
    let s = elim.equations.len();
    let mut out = Vec::new();
    for c in &roots.clusters {
        let z1 = c.value;
        match s {
            1 => out.push(vec![z1]),
            2 => {
                let point = [z1, Complex64::zero()];
                for eq in &elim.equations {
                    for z2 in fiber_roots(eq, 1, &point) {
                        out.push(vec![z1, z2]);
                    }
                }
            }
            _ => {
                let point = [z1, Complex64::zero(), Complex64::zero()];
                let mut z2s = Vec::new();
                for r in &elim.intermediate {
                    z2s.extend(fiber_roots(r, 1, &point));
                }
                for z2 in z2s {
                    let point = [z1, z2, Complex64::zero()];
                    for eq in &elim.equations {
                        for z3 in fiber_roots(eq, 2, &point) {
                            out.push(vec![z1, z2, z3]);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
