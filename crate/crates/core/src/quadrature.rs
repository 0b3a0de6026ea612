//! Gauss–Jacobi quadrature for the measure (1−u)^α du on (0, 1).
//!
//! Nodes are the eigenvalues of the Jacobi matrix built from the three-term
//! recurrence of the Jacobi polynomials P^(α,0), mapped from (−1, 1) to
//! (0, 1). Weights come from the Christoffel function
//! w_i = 1 / Σ_{k<Q} p_k(u_i)² over the orthonormal polynomials. That sum has
//! only positive terms, so the tiny weights next to u = 1 keep full relative
//! accuracy, which eigenvector components would not.

use crate::error::{BergmanError, Result};
use crate::scalar::Scalar;
use crate::sum::{dot, Precision};

const MAX_QL_ITERATIONS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobiRule<T> {
    alpha: T,
    nodes: Vec<T>,
    complements: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussJacobiRule<T> {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Nodes in (0, 1), ascending.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// `1 − u_i`, accurate to a few ulps relative even where u_i ≈ 1.
    pub fn complements(&self) -> &[T] {
        &self.complements
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// u_i^n, evaluated from the complement.
    #[inline]
    pub fn node_pow(&self, i: usize, n: usize) -> T {
        if n == 0 {
            return T::one();
        }
        (T::from_usize_exact(n) * (-self.complements[i]).ln_1p()).exp()
    }

    /// ∫₀¹ u^n f(u)(1−u)^α du.
    pub fn integrate_moment<F: Fn(T) -> T>(&self, precision: Precision, n: usize, f: F) -> T {
        dot(
            precision,
            (0..self.order()).map(|i| (self.weights[i], self.node_pow(i, n) * f(self.nodes[i]))),
        )
    }

    /// ∫₀¹ f(u)(1−u)^α du.
    pub fn integrate<F: Fn(T) -> T>(&self, precision: Precision, f: F) -> T {
        dot(
            precision,
            self.weights.iter().zip(&self.nodes).map(|(&w, &u)| (w, f(u))),
        )
    }
}

/// Chain-sequence (qd) form of the Jacobi matrix of a Jacobi measure on
/// (0, 1): J = L Lᵀ with L lower bidiagonal, diagonal
/// √q_k and subdiagonal √e_k. Then J_kk = q_k + e_k and J_{k,k+1}² = q_k e_{k+1}.
/// Every entry is a product of positive rationals in α, so J is known to
/// full relative accuracy in this representation.
#[derive(Debug, Clone)]
struct ChainSequence<T> {
    q: Vec<T>,
    /// e[k] for k = 0..=order; e[0] = 0.
    e: Vec<T>,
}

impl<T: Scalar> ChainSequence<T> {
    /// Measure x^a (1−x)^b dx on (0, 1).
    fn new(order: usize, a: T, b: T) -> Self {
        let one = T::one();
        let two = T::lit(2.0);
        let q = (0..order)
            .map(|k| {
                let kf = T::from_usize_exact(k);
                let s = two * kf + a + b;
                (kf + a + one) * (kf + a + b + one) / ((s + one) * (s + two))
            })
            .collect();
        let e = (0..=order)
            .map(|k| {
                if k == 0 {
                    return T::zero();
                }
                let kf = T::from_usize_exact(k);
                let s = two * kf + a + b;
                kf * (kf + b) / (s * (s + one))
            })
            .collect();
        Self { q, e }
    }

    fn order(&self) -> usize {
        self.q.len()
    }

    fn tridiagonal(&self) -> (Vec<T>, Vec<T>) {
        let n = self.order();
        let diag = (0..n).map(|k| self.q[k] + self.e[k]).collect();
        let off = (0..n.saturating_sub(1))
            .map(|k| (self.q[k] * self.e[k + 1]).sqrt())
            .collect();
        (diag, off)
    }

    /// Pivot d_k of the qd transform, nudged off an exact zero (which only
    /// happens when σ is also a root of a lower-degree polynomial).
    #[inline]
    fn pivot(&self, k: usize, t: T) -> T {
        let d = self.q[k] + t;
        if d == T::zero() {
            T::epsilon() * T::epsilon() * self.q[k]
        } else {
            d
        }
    }

    /// Σ_{k<Q} p_k(x)² for the orthonormal polynomials, from the same qd
    /// pivots: p_k² = p_{k−1}² d_{k−1}² / (q_{k−1} e_k).
    fn christoffel_sum(&self, x: T, mass: T) -> T {
        let mut p2 = mass.recip();
        let mut acc = p2;
        let mut t = -x;
        for k in 0..self.order() - 1 {
            let d = self.pivot(k, t);
            p2 = p2 * (d * d) / (self.q[k] * self.e[k + 1]);
            acc = acc + p2;
            t = self.e[k + 1] * (t / d) - x;
        }
        acc
    }

    /// Last pivot d_{Q−1}(σ) = −π_Q(σ)/π_{Q−1}(σ) and its derivative in σ.
    fn last_pivot(&self, sigma: T) -> (T, T) {
        let mut t = -sigma;
        let mut dt = -T::one();
        let n = self.order();
        for k in 0..n - 1 {
            let d = self.pivot(k, t);
            let ratio = self.e[k + 1] / d;
            dt = ratio * dt * (self.q[k] / d) - T::one();
            t = ratio * t - sigma;
        }
        (self.q[n - 1] + t, dt)
    }

    /// Newton polish of an approximate eigenvalue on the qd form, which
    /// resolves small eigenvalues to full relative accuracy.
    fn refine(&self, x0: T) -> T {
        let eps = T::epsilon();
        // QL leaves an absolute error of a few ulps of ‖J‖ ≤ 1
        let reach = T::lit(1e-10);
        let mut x = x0;
        for _ in 0..8 {
            let (f, df) = self.last_pivot(x);
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            let next = x - step;
            if !(next > T::zero()) || (next - x0).abs() > reach {
                break;
            }
            x = next;
            if step.abs() <= eps * x {
                break;
            }
        }
        x
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix (implicit QL with
/// Wilkinson shifts). `e[i]` couples rows i and i+1; it is destroyed.
fn tridiagonal_eigenvalues<T: Scalar>(d: &mut [T], e: &mut Vec<T>) -> Result<()> {
    let n = d.len();
    e.resize(n, T::zero());
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(BergmanError::EigenNoConvergence { index: l, order: n });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// The `order`-point rule exact for ∫₀¹ q(u)(1−u)^α du, deg q ≤ 2·order − 1.
///
/// Eigenvalues are computed in the reflected variable v = 1 − u, where the
/// singular endpoint sits at the origin. Each one is then refined by
/// bisection on the qd representation of whichever variable (v or u) is
/// below one half, and its weight is evaluated there too, so that both the
/// nodes and the complements `1 − u_i` are relatively accurate.
pub fn gauss_jacobi_rule<T: Scalar>(order: usize, alpha: T) -> Result<GaussJacobiRule<T>> {
    if order == 0 {
        return Err(BergmanError::ZeroOrder);
    }
    if !(alpha > -T::one()) {
        return Err(BergmanError::AlphaOutOfRange(alpha.to_f64_lossy()));
    }
    let reflected = ChainSequence::new(order, alpha, T::zero());
    let direct = ChainSequence::new(order, T::zero(), alpha);
    let (mut roots, mut off) = reflected.tridiagonal();
    tridiagonal_eigenvalues(&mut roots, &mut off)?;
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let half = T::lit(0.5);
    let mass = (alpha + T::one()).recip();
    let mut nodes = Vec::with_capacity(order);
    let mut complements = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    // descending v so that the nodes u come out ascending
    for &v0 in roots.iter().rev() {
        if v0 < half {
            let v = reflected.refine(v0);
            nodes.push(T::one() - v);
            complements.push(v);
            weights.push(reflected.christoffel_sum(v, mass).recip());
        } else {
            let u = direct.refine(T::one() - v0);
            nodes.push(u);
            complements.push(T::one() - u);
            weights.push(direct.christoffel_sum(u, mass).recip());
        }
    }
    Ok(GaussJacobiRule {
        alpha,
        nodes,
        complements,
        weights,
    })
}
