//! Radial moments I_n(w) = ∫₀¹ r^{2n+1} w(r) dr and Bergman coefficients.
//!
//! With u = r² the moment becomes ½∫₀¹ uⁿ (1−u)^α M(√u) du. The Jacobi
//! factor is the quadrature weight and is never sampled, so −1 < α < 0 is as
//! accurate as any other exponent.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::Result;
use crate::format::json_num;
use crate::quadrature::{gauss_jacobi_rule, GaussJacobiRule};
use crate::scalar::Scalar;
use crate::special::ln_gamma_ratio;
use crate::sum::{dot, Precision};
use crate::weights::WeightSpec;

/// Extra nodes of the companion rule used for the error estimate.
pub const ERROR_ORDER_STEP: usize = 8;

/// Quadrature order for I_n under the default policy.
///
/// Polynomial M of degree d in r² makes the integrand a polynomial of degree
/// n + d in u, which ⌈(n+d+1)/2⌉ nodes integrate exactly; two spare nodes
/// absorb rounding. Otherwise the order grows with n/2 on top of a floor.
pub fn quadrature_order<T: Scalar>(w: &WeightSpec<T>, n: usize) -> usize {
    match w.poly_degree() {
        Some(d) => (n + d + 2) / 2 + 2,
        None => 64usize.max((n + 1) / 2 + 16),
    }
}

/// A quadrature rule with M pre-evaluated at its nodes.
#[derive(Debug, Clone)]
pub struct MomentRule<T> {
    rule: GaussJacobiRule<T>,
    m_at_nodes: Vec<T>,
    precision: Precision,
}

impl<T: Scalar> MomentRule<T> {
    pub fn new(w: &WeightSpec<T>, order: usize, precision: Precision) -> Result<Self> {
        let rule = gauss_jacobi_rule(order, w.alpha())?;
        let m_at_nodes = rule.nodes().iter().map(|&u| w.m(u.sqrt())).collect();
        Ok(Self {
            rule,
            m_at_nodes,
            precision,
        })
    }

    pub fn rule(&self) -> &GaussJacobiRule<T> {
        &self.rule
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// ½ Σ ω_i u_i^n M(r_i).
    pub fn moment(&self, n: usize) -> T {
        let half = T::lit(0.5);
        let s = dot(
            self.precision,
            (0..self.order()).map(|i| (self.rule.weights()[i], self.rule.node_pow(i, n) * self.m_at_nodes[i])),
        );
        half * s
    }

    /// ½ Σ ω_i u_i^n f_i for caller-supplied samples f_i at the nodes.
    pub fn weighted_moment(&self, n: usize, samples: &[T]) -> T {
        let half = T::lit(0.5);
        let s = dot(
            self.precision,
            (0..self.order()).map(|i| (self.rule.weights()[i], self.rule.node_pow(i, n) * samples[i])),
        );
        half * s
    }
}

/// I_n(w) and the order-difference error estimate |I(Q) − I(Q+8)|.
pub fn moment<T: Scalar>(w: &WeightSpec<T>, n: usize) -> Result<(T, T)> {
    moment_with(w, n, Precision::Double)
}

pub fn moment_with<T: Scalar>(w: &WeightSpec<T>, n: usize, precision: Precision) -> Result<(T, T)> {
    let q = quadrature_order(w, n);
    let base = MomentRule::new(w, q, precision)?.moment(n);
    let check = MomentRule::new(w, q + ERROR_ORDER_STEP, precision)?.moment(n);
    Ok((base, (base - check).abs()))
}

/// ½ Γ(n+1)Γ(α+1)/Γ(n+α+2), the moments of λ_α, as ½/(α+1) times a ratio
/// normalised to 1 at n = 0.
pub fn moment_closed_lambda_alpha<T: Scalar>(n: usize, alpha: T) -> T {
    let a1 = alpha + T::one();
    let x = T::from_usize_exact(n) + T::one();
    T::lit(0.5) / a1 * (ln_gamma_ratio(x, a1) - ln_gamma_ratio(T::one(), a1)).exp()
}

/// 1/(2π I_n(w)): a_n for λ_α, b_n for a general weight.
pub fn bergman_coeff<T: Scalar>(w: &WeightSpec<T>, n: usize) -> Result<T> {
    let (i_n, _) = moment(w, n)?;
    Ok((T::TAU() * i_n).recip())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEntry<T> {
    pub n: usize,
    pub value: T,
    pub err: T,
    pub order: usize,
}

/// I_0..I_{n_max} for one weight, all computed with the rule sized for n_max.
#[derive(Debug, Clone)]
pub struct MomentTable<T> {
    weight: WeightSpec<T>,
    entries: Vec<MomentEntry<T>>,
}

impl<T: Scalar> MomentTable<T> {
    pub fn build(w: &WeightSpec<T>, n_max: usize, precision: Precision) -> Result<Self> {
        let q = quadrature_order(w, n_max);
        let base = MomentRule::new(w, q, precision)?;
        let check = MomentRule::new(w, q + ERROR_ORDER_STEP, precision)?;
        let entries = (0..=n_max)
            .into_par_iter()
            .map(|n| {
                let value = base.moment(n);
                MomentEntry {
                    n,
                    value,
                    err: (value - check.moment(n)).abs(),
                    order: q,
                }
            })
            .collect();
        Ok(Self {
            weight: w.clone(),
            entries,
        })
    }

    pub fn weight(&self) -> &WeightSpec<T> {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[MomentEntry<T>] {
        &self.entries
    }

    pub fn get(&self, n: usize) -> T {
        self.entries[n].value
    }

    /// 1/(2π I_n).
    pub fn coeff(&self, n: usize) -> T {
        (T::TAU() * self.get(n)).recip()
    }

    pub fn coeffs(&self) -> Vec<T> {
        (0..=self.n_max()).map(|n| self.coeff(n)).collect()
    }

    /// Indices violating positivity, strict decrease, or err ≤ 1e−12·I_n.
    pub fn violations(&self) -> Vec<usize> {
        self.violations_with(T::lit(1e-12))
    }

    /// As [`Self::violations`] with err ≤ tol·I_n.
    pub fn violations_with(&self, tol: T) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(i, e)| {
                let decreasing = *i == 0 || e.value < self.entries[i - 1].value;
                !(e.value > T::zero()) || !decreasing || e.err > tol * e.value
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// `{weight, n_max, entries: [[n, I_n, err_n], ...]}`.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!([e.n, json_num(e.value.to_f64_lossy()), json_num(e.err.to_f64_lossy())])
            })
            .collect();
        json!({
            "weight": self.weight.label(),
            "n_max": self.n_max(),
            "entries": entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::parse_weight;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn w(spec: &str) -> WeightSpec<f64> {
        parse_weight(spec).unwrap()
    }

    #[test]
    fn lebesgue_first_moment() {
        let (i0, err) = moment(&w("alpha=0;M=one"), 0).unwrap();
        assert_relative_eq!(i0, 0.5, max_relative = 1e-15);
        assert!(err < 1e-15);
    }

    #[test]
    fn jacobi_moment_beta_closed_form() {
        let (i3, _) = moment(&w("alpha=1;M=one"), 3).unwrap();
        assert_relative_eq!(i3, 0.025, max_relative = 1e-14);
    }

    #[test]
    fn polynomial_weight_moments() {
        let mu = w("alpha=0;M=poly-r2:2,-1");
        for n in [0usize, 1, 2, 10, 99] {
            let nf = n as f64;
            let exact = (nf + 3.0) / (2.0 * (nf + 1.0) * (nf + 2.0));
            assert_relative_eq!(moment(&mu, n).unwrap().0, exact, max_relative = 1e-14);
        }
        assert_relative_eq!(moment(&mu, 1).unwrap().0, 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(moment_closed_lambda_alpha(0, 0.0f64), 0.5);
        assert_relative_eq!(moment_closed_lambda_alpha(5, 0.0f64), 1.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(moment_closed_lambda_alpha(2, 1.0f64), 1.0 / 24.0, max_relative = 1e-15);
        // no overflow for very large n: I_n ≈ 1/(2n+2) at α = 0
        let big = moment_closed_lambda_alpha(1_000_000, 0.0f64);
        assert_relative_eq!(big, 1.0 / 2_000_002.0, max_relative = 1e-13);
    }

    #[test]
    fn bergman_coefficients() {
        let l0 = w("alpha=0;M=one");
        assert_relative_eq!(bergman_coeff(&l0, 0).unwrap(), 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(bergman_coeff(&l0, 7).unwrap(), 8.0 / PI, max_relative = 1e-14);
        let mu = w("alpha=0;M=poly-r2:2,-1");
        assert_relative_eq!(bergman_coeff(&mu, 0).unwrap(), 2.0 / (3.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn table_matches_closed_form_for_jacobi_weights() {
        for &alpha in &[-0.7, -0.5, 0.0, 0.5, 1.0, 2.5] {
            let table = MomentTable::build(&WeightSpec::<f64>::lambda(alpha).unwrap(), 2000, Precision::Double).unwrap();
            for e in table.entries() {
                let exact = moment_closed_lambda_alpha(e.n, alpha);
                assert_relative_eq!(e.value, exact, max_relative = 1e-12);
            }
            assert!(table.violations().is_empty());
        }
    }

    #[test]
    fn exponential_table_meets_error_policy() {
        let table = MomentTable::build(&w("alpha=0.5;M=exp-r2:1"), 1000, Precision::Double).unwrap();
        assert!(table.violations().is_empty(), "{:?}", table.violations());
    }

    #[test]
    fn extended_precision_agrees() {
        let mu = w("alpha=-0.5;M=exp-r2:2");
        let a = MomentTable::build(&mu, 300, Precision::Double).unwrap();
        let b = MomentTable::build(&mu, 300, Precision::Extended).unwrap();
        for n in 0..=300 {
            assert_relative_eq!(a.get(n), b.get(n), max_relative = 1e-14);
        }
    }

    #[test]
    fn json_layout() {
        let table = MomentTable::build(&w("alpha=0;M=one"), 2, Precision::Double).unwrap();
        let v = table.to_json();
        assert_eq!(v["weight"], "alpha=0;M=one");
        assert_eq!(v["n_max"], 2);
        assert_eq!(v["entries"][1][0], 1);
        let text = v["entries"][1][1].to_string();
        assert_eq!(text.len(), "2.5000000000000000e-1".len());
        assert_relative_eq!(text.parse::<f64>().unwrap(), 0.25, max_relative = 1e-15);
    }
}
