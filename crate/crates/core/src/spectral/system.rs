//! The critical-point equations G_g = y_{g,0}x_{g,1} − y_{g,1}x_{g,0}, one per slot
//! group, evaluated in double precision together with their Jacobian.

use crate::combinatorics::Partition;
use crate::tensor_core::{contract_all_but, BinaryTensor};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};

pub(crate) type V2 = [Complex64; 2];

// Multiple roots converge linearly, so the step budget is generous; converged
// points exit after a handful of steps.
const MAX_STEPS: usize = 400;
const SVD_CUTOFF: f64 = 1e-15;

pub(crate) struct CriticalSystem {
    t: BinaryTensor<Complex64>,
    groups: Vec<usize>,
    free_slot: Vec<usize>,
    mu: Partition,
    scale: f64,
}

impl CriticalSystem {
    pub fn new(t: &BinaryTensor<f64>, mu: &Partition) -> Self {
        let groups = mu.slot_groups();
        let free_slot = (0..mu.s())
            .map(|g| groups.iter().position(|&h| h == g).expect("non-empty group"))
            .collect();
        Self {
            t: t.map(|&v| Complex64::new(v, 0.0)),
            groups,
            free_slot,
            mu: mu.clone(),
            scale: t.norm_f64().max(f64::MIN_POSITIVE),
        }
    }

    pub fn s(&self) -> usize {
        self.mu.s()
    }

    pub fn mu(&self) -> &Partition {
        &self.mu
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn slots(&self, xs: &[V2]) -> Vec<V2> {
        self.groups.iter().map(|&g| xs[g]).collect()
    }

    /// (y_{g,0}, y_{g,1}) for group g.
    pub fn y(&self, xs: &[V2], g: usize) -> V2 {
        contract_all_but(&self.t, &self.slots(xs), self.free_slot[g])
    }

    /// t(x₁^{μ₁}, …, x_s^{μ_s}).
    pub fn value(&self, xs: &[V2]) -> Complex64 {
        self.t.contract_full(&self.slots(xs))
    }

    pub fn g(&self, xs: &[V2]) -> Vec<Complex64> {
        (0..self.s())
            .map(|g| {
                let y = self.y(xs, g);
                y[0] * xs[g][1] - y[1] * xs[g][0]
            })
            .collect()
    }

    /// ∂G_g/∂z_k where vector k moves along `dirs[k]`.
    fn jacobian(&self, xs: &[V2], dirs: &[V2]) -> DMatrix<Complex64> {
        let s = self.s();
        let base = self.slots(xs);
        let mut jac = DMatrix::zeros(s, s);
        for g in 0..s {
            let free = self.free_slot[g];
            let y = contract_all_but(&self.t, &base, free);
            for k in 0..s {
                let mut acc = Complex64::zero();
                for (l, &h) in self.groups.iter().enumerate() {
                    if h != k || l == free {
                        continue;
                    }
                    let mut slots = base.clone();
                    slots[l] = dirs[k];
                    let dy = contract_all_but(&self.t, &slots, free);
                    acc += dy[0] * xs[g][1] - dy[1] * xs[g][0];
                }
                if k == g {
                    acc += y[0] * dirs[g][1] - y[1] * dirs[g][0];
                }
                jac[(g, k)] = acc;
            }
        }
        jac
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Damped Newton on the chart equations. Each vector is rescaled so that its
    /// larger component is 1 and only the other component moves; steps are
    /// least-squares solutions, so singular Jacobians still give finite steps.
    pub fn polish(&self, xs: &[V2]) -> (Vec<V2>, f64) {
        let s = self.s();
        let mut xs: Vec<V2> = xs.iter().map(|&x| chart_normalize(x)).collect();
        let mut res = Self::norm(&self.g(&xs));
        for _ in 0..MAX_STEPS {
            if res <= 1e-15 * self.scale {
                break;
            }
            let dirs: Vec<V2> = xs.iter().map(|&x| chart_direction(x)).collect();
            let jac = self.jacobian(&xs, &dirs);
            let rhs = DVector::from_vec(self.g(&xs).into_iter().map(|v| -v).collect());
            let svd = jac.svd(true, true);
            let smax = svd.singular_values.max();
            let Ok(step) = svd.solve(&rhs, SVD_CUTOFF * smax.max(f64::MIN_POSITIVE)) else {
                break;
            };
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..12 {
                let trial: Vec<V2> = (0..s)
                    .map(|k| {
                        let x = xs[k];
                        let d = dirs[k];
                        [x[0] + d[0] * step[k] * lambda, x[1] + d[1] * step[k] * lambda]
                    })
                    .collect();
                let r = Self::norm(&self.g(&trial));
                if r.is_finite() && r < res {
                    xs = trial.into_iter().map(chart_normalize).collect();
                    res = r;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (xs, res)
    }
}

/// Scales x so that its larger component equals 1.
pub(crate) fn chart_normalize(x: V2) -> V2 {
    let p = if x[0].norm() >= x[1].norm() { x[0] } else { x[1] };
    if p.is_zero() {
        return x;
    }
    [x[0] / p, x[1] / p]
}

/// The moving component of a chart-normalized vector.
fn chart_direction(x: V2) -> V2 {
    if x[0].norm() >= x[1].norm() {
        [Complex64::zero(), Complex64::one()]
    } else {
        [Complex64::one(), Complex64::zero()]
    }
}

/// q(x) = x₀² + x₁² (bilinear, not Hermitian).
pub(crate) fn q(x: V2) -> Complex64 {
    x[0] * x[0] + x[1] * x[1]
}

/// |x ∧ y| / (|x||y|): zero iff x and y are proportional.
pub(crate) fn projective_distance(x: V2, y: V2) -> f64 {
    let w = x[0] * y[1] - x[1] * y[0];
    let nx = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
    let ny = (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
    w.norm() / (nx * ny).max(f64::MIN_POSITIVE)
}
