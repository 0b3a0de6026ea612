//! Weighted Bergman projection on grid functions, coefficient multipliers,
//! and the identity B_μ f = R[B_{λ_α}(f M)].
//!
//! Radial weights act diagonally on angular frequency, so the projection is
//! computed one mode at a time:
//! c_n = ½ Σ_j ω_j f̂_n(r_j) r_jⁿ M(r_j) / I_n, with I_n taken from the same
//! radial rule. Sharing the rule makes the discrete projection an exact
//! orthogonal projection for the grid inner product.

use std::sync::Arc;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{BergmanError, Result};
use crate::format::sig17;
use crate::funcspace::{GridFunction, PolarGrid, TaylorCoeffs};
use crate::moments::MomentTable;
use crate::scalar::Scalar;
use crate::sum::{dot, Precision};
use crate::weights::WeightSpec;

/// Default truncation degree: min(K/2 − 1, R − 2, 128).
pub fn default_degree<T: Scalar>(grid: &PolarGrid<T>) -> usize {
    (grid.angular_count() / 2 - 1)
        .min(grid.radial_count().saturating_sub(2))
        .min(128)
}

/// B_μ on one grid, with the per-mode radial data precomputed.
#[derive(Debug, Clone)]
pub struct Projector<T> {
    grid: Arc<PolarGrid<T>>,
    weight: WeightSpec<T>,
    degree: usize,
    m_at: Vec<T>,
    moments: Vec<T>,
}

impl<T: Scalar> Projector<T> {
    pub fn new(grid: &Arc<PolarGrid<T>>, w: &WeightSpec<T>, degree: usize) -> Result<Self> {
        grid.check_weight(w)?;
        let (r, k) = (grid.radial_count(), grid.angular_count());
        if degree >= k / 2 {
            return Err(BergmanError::DegreeTooLarge {
                n: degree,
                reason: format!("needs N < K/2 = {}", k / 2),
            });
        }
        if degree + 2 > r {
            return Err(BergmanError::DegreeTooLarge {
                n: degree,
                reason: format!("needs N <= R - 2 = {}", r as i64 - 2),
            });
        }
        let m_at: Vec<T> = grid.radii().iter().map(|&x| w.m(x)).collect();
        let rule = grid.rule();
        let moments = (0..=degree)
            .map(|n| {
                let s = dot(
                    Precision::Double,
                    (0..r).map(|j| (rule.weights()[j], rule.node_pow(j, n) * m_at[j])),
                );
                T::lit(0.5) * s
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            weight: w.clone(),
            degree,
            m_at,
            moments,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weight(&self) -> &WeightSpec<T> {
        &self.weight
    }

    /// I_n(w) under the grid's radial rule.
    pub fn grid_moments(&self) -> &[T] {
        &self.moments
    }

    pub fn apply(&self, f: &GridFunction<T>) -> Result<TaylorCoeffs<T>> {
        if !Arc::ptr_eq(f.grid(), &self.grid)
            && (f.grid().radii() != self.grid.radii() || f.grid().angular_count() != self.grid.angular_count())
        {
            return Err(BergmanError::InvalidGrid("function sampled on a different grid".into()));
        }
        if !f.is_finite() {
            return Err(BergmanError::NonFiniteSamples("projection input".into()));
        }
        let with_modes;
        let modes = match f.modes() {
            Some(m) => m,
            None => {
                with_modes = f.clone().with_modes();
                with_modes.modes().expect("modes populated")
            }
        };
        Ok(self.apply_modes(modes))
    }

    /// Reads only modes 0..=N of each ring.
    fn apply_modes(&self, modes: &[Complex<T>]) -> TaylorCoeffs<T> {
        let rule = self.grid.rule();
        let k = self.grid.angular_count();
        let r = self.grid.radial_count();
        let half = T::lit(0.5);
        let coeffs = (0..=self.degree)
            .map(|n| {
                let nf = T::from_usize_exact(n) * half;
                let factor: Vec<T> = (0..r)
                    .map(|j| {
                        let rn = (nf * (-rule.complements()[j]).ln_1p()).exp();
                        rule.weights()[j] * rn * self.m_at[j]
                    })
                    .collect();
                let re = dot(Precision::Double, (0..r).map(|j| (factor[j], modes[j * k + n].re)));
                let im = dot(Precision::Double, (0..r).map(|j| (factor[j], modes[j * k + n].im)));
                Complex::new(re, im) * (half / self.moments[n])
            })
            .collect();
        TaylorCoeffs::new(coeffs)
    }
}

/// Coefficients of B_w f up to degree N.
pub fn project<T: Scalar>(f: &GridFunction<T>, w: &WeightSpec<T>, degree: usize) -> Result<TaylorCoeffs<T>> {
    Projector::new(f.grid(), w, degree)?.apply(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierMethod {
    RatioOfMoments,
}

/// t_n = b_n/a_n = I_n(λ_α)/I_n(μ).
#[derive(Debug, Clone)]
pub struct MultiplierSeq<T> {
    weight: WeightSpec<T>,
    t: Vec<T>,
    method: MultiplierMethod,
}

impl<T: Scalar> MultiplierSeq<T> {
    pub fn build(mu: &WeightSpec<T>, n_max: usize, precision: Precision) -> Result<Self> {
        let mu_table = MomentTable::build(mu, n_max, precision)?;
        if mu.is_jacobi() {
            return Ok(Self::from_tables(&mu_table, &mu_table));
        }
        let lambda_table = MomentTable::build(&mu.jacobi_part(), n_max, precision)?;
        Ok(Self::from_tables(&lambda_table, &mu_table))
    }

    pub fn from_tables(lambda: &MomentTable<T>, mu: &MomentTable<T>) -> Self {
        let n = lambda.n_max().min(mu.n_max());
        Self {
            weight: mu.weight().clone(),
            t: (0..=n).map(|i| lambda.get(i) / mu.get(i)).collect(),
            method: MultiplierMethod::RatioOfMoments,
        }
    }

    pub fn weight(&self) -> &WeightSpec<T> {
        &self.weight
    }

    pub fn alpha(&self) -> T {
        self.weight.alpha()
    }

    pub fn method(&self) -> MultiplierMethod {
        self.method
    }

    pub fn n_max(&self) -> usize {
        self.t.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.t
    }

    pub fn get(&self, n: usize) -> T {
        self.t[n]
    }

    /// Δt_n = t_n − t_{n−1}, n ≥ 1 (index 0 holds 0).
    pub fn deltas(&self) -> Vec<T> {
        (0..self.t.len())
            .map(|n| if n == 0 { T::zero() } else { self.t[n] - self.t[n - 1] })
            .collect()
    }

    pub fn scaled_deltas(&self) -> Vec<T> {
        self.deltas()
            .into_iter()
            .enumerate()
            .map(|(n, d)| {
                let nf = T::from_usize_exact(n);
                nf * nf * d
            })
            .collect()
    }

    /// |t_0| + Σ_{k≤n} |Δt_k| for every n.
    pub fn bv_partial_sums(&self) -> Vec<T> {
        let mut acc = self.t[0].abs();
        self.deltas()
            .into_iter()
            .map(|d| {
                acc = acc + d.abs();
                acc
            })
            .collect()
    }

    pub fn apply(&self, f: &TaylorCoeffs<T>) -> Result<TaylorCoeffs<T>> {
        if f.degree() > self.n_max() {
            return Err(BergmanError::DegreeOverflow {
                degree: f.degree(),
                n_max: self.n_max(),
            });
        }
        Ok(TaylorCoeffs::new(
            f.coeffs().iter().zip(&self.t).map(|(&c, &t)| c * t).collect(),
        ))
    }

    /// `n,t,delta,n2_delta,bv_partial,method` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t,delta,n2_delta,bv_partial,method\n");
        let (d, s, b) = (self.deltas(), self.scaled_deltas(), self.bv_partial_sums());
        for n in 0..self.t.len() {
            out.push_str(&format!(
                "{n},{},{},{},{},ratio-of-moments\n",
                sig17(self.t[n].to_f64_lossy()),
                sig17(d[n].to_f64_lossy()),
                sig17(s[n].to_f64_lossy()),
                sig17(b[n].to_f64_lossy())
            ));
        }
        out
    }
}

pub fn multiplier_apply<T: Scalar>(m: &MultiplierSeq<T>, f: &TaylorCoeffs<T>) -> Result<TaylorCoeffs<T>> {
    m.apply(f)
}

/// R[B_{λ_α}(f M)] up to degree N.
pub fn project_via_identity<T: Scalar>(
    f: &GridFunction<T>,
    mu: &WeightSpec<T>,
    degree: usize,
) -> Result<TaylorCoeffs<T>> {
    let seq = MultiplierSeq::build(mu, degree, Precision::Double)?;
    project_via_identity_with(f, mu, degree, &seq)
}

pub fn project_via_identity_with<T: Scalar>(
    f: &GridFunction<T>,
    mu: &WeightSpec<T>,
    degree: usize,
    seq: &MultiplierSeq<T>,
) -> Result<TaylorCoeffs<T>> {
    let fm = f.times_weight(mu);
    let inner = project(&fm, &mu.jacobi_part(), degree)?;
    seq.apply(&inner)
}

/// max_n |B_μ f − R[B_{λ_α}(f M)]|_n.
pub fn identity_residual<T: Scalar>(f: &GridFunction<T>, mu: &WeightSpec<T>, degree: usize) -> Result<T> {
    let direct = project(f, mu, degree)?;
    let via = project_via_identity(f, mu, degree)?;
    Ok(direct.max_abs_diff(&via))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{eval_taylor, parse_fn, sample};
    use approx::assert_relative_eq;

    type C = Complex<f64>;

    fn grid(alpha: f64, r: usize, k: usize) -> Arc<PolarGrid<f64>> {
        Arc::new(PolarGrid::new(alpha, r, k).unwrap())
    }

    fn samples(spec: &str, g: &Arc<PolarGrid<f64>>) -> GridFunction<f64> {
        sample(&parse_fn(spec).unwrap(), g).unwrap()
    }

    fn weights() -> Vec<WeightSpec<f64>> {
        vec![
            WeightSpec::lambda(0.0).unwrap(),
            WeightSpec::poly_r2(0.0, &[2.0, -1.0]).unwrap(),
            WeightSpec::poly_r2(1.0, &[2.0, -1.0]).unwrap(),
            WeightSpec::exp_r2(0.5, 1.0).unwrap(),
            WeightSpec::exp_r2(-0.5, 2.0).unwrap(),
        ]
    }

    #[test]
    fn default_degree_rule() {
        assert_eq!(default_degree(&PolarGrid::<f64>::new(0.0, 256, 512).unwrap()), 128);
        assert_eq!(default_degree(&PolarGrid::<f64>::new(0.0, 20, 512).unwrap()), 18);
        assert_eq!(default_degree(&PolarGrid::<f64>::new(0.0, 256, 16).unwrap()), 7);
    }

    #[test]
    fn rejects_degrees_beyond_the_grid() {
        let g = grid(0.0, 10, 16);
        let w = WeightSpec::lambda(0.0).unwrap();
        let f = samples("holo-poly:1", &g);
        assert!(project(&f, &w, 8).is_err());
        assert!(project(&f, &w, 9).is_err());
        assert!(project(&f, &w, 7).is_ok());
        let w1 = WeightSpec::lambda(1.0).unwrap();
        assert!(matches!(project(&f, &w1, 4), Err(BergmanError::GridMismatch { .. })));
    }

    #[test]
    fn reproduces_holomorphic_polynomials() {
        for w in weights() {
            let g = grid(w.alpha(), 32, 64);
            let c = project(&samples("holo-poly:3,0,2", &g), &w, 16).unwrap();
            let expect = TaylorCoeffs::from_real(&[3.0, 0.0, 2.0]);
            assert!(c.max_abs_diff(&expect) <= 1e-12, "{w}");
        }
    }

    #[test]
    fn annihilates_conjugate_monomials() {
        for w in weights() {
            let g = grid(w.alpha(), 32, 64);
            for spec in ["mono:0,-1", "mono:0,-5", "mono:2,-3"] {
                let c = project(&samples(spec, &g), &w, 16).unwrap();
                assert!(c.coeffs().iter().all(|x| x.norm() <= 1e-14), "{spec}");
            }
        }
    }

    #[test]
    fn never_reads_negative_modes() {
        let w = WeightSpec::exp_r2(0.5, 1.0).unwrap();
        let g = grid(0.5, 16, 32);
        let p = Projector::new(&g, &w, 10).unwrap();
        let f = samples("sing:0.4", &g).with_modes();
        let mut modes = f.modes().unwrap().to_vec();
        for j in 0..16 {
            for m in 16..32 {
                modes[j * 32 + m] = C::new(f64::NAN, f64::NAN);
            }
        }
        let c = p.apply_modes(&modes);
        assert_eq!(c, p.apply(&f).unwrap());
    }

    #[test]
    fn worked_value_both_routes() {
        let mu = WeightSpec::poly_r2(0.0, &[2.0, -1.0]).unwrap();
        let g = grid(0.0, 256, 512);
        let f = samples("mono:1,0", &g);
        let direct = project(&f, &mu, 128).unwrap();
        let via = project_via_identity(&f, &mu, 128).unwrap();
        assert!((direct.coeffs()[0].re - 4.0 / 9.0).abs() <= 1e-12);
        assert!((via.coeffs()[0].re - 4.0 / 9.0).abs() <= 1e-12);
        assert!(identity_residual(&f, &mu, 128).unwrap() <= 1e-12);
        let l0 = project(&f, &WeightSpec::lambda(0.0).unwrap(), 128).unwrap();
        assert!((l0.coeffs()[0].re - 0.5).abs() <= 1e-14);
    }

    #[test]
    fn identity_for_jacobi_weight_is_exact() {
        let w = WeightSpec::lambda(0.5).unwrap();
        let g = grid(0.5, 64, 128);
        let f = samples("sing:0.4", &g);
        assert!(identity_residual(&f, &w, 60).unwrap() <= 1e-15);
    }

    #[test]
    fn identity_residual_small_on_singular_input() {
        let mu = WeightSpec::exp_r2(0.5, 1.0).unwrap();
        let g = Arc::new(PolarGrid::default_for(&mu).unwrap());
        let f = samples("sing:0.4", &g);
        assert!(identity_residual(&f, &mu, 64).unwrap() <= 1e-8);
    }

    #[test]
    fn idempotent() {
        for w in weights() {
            let g = grid(w.alpha(), 64, 128);
            let f = samples("sing:0.4", &g);
            let c = project(&f, &w, 40).unwrap();
            let again = project(&eval_taylor(&c, &g), &w, 40).unwrap();
            assert!(c.max_abs_diff(&again) <= 1e-11, "{w}");
        }
    }

    #[test]
    fn self_adjoint_on_grid() {
        for w in weights() {
            let g = grid(w.alpha(), 48, 128);
            let f = samples("mono:1,2", &g);
            let h = samples("logsing", &g);
            let bf = eval_taylor(&project(&f, &w, 40).unwrap(), &g);
            let bh = eval_taylor(&project(&h, &w, 40).unwrap(), &g);
            let lhs = bf.inner(&h, &w);
            let rhs = f.inner(&bh, &w);
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(rhs.norm()), "{w}");
        }
    }

    #[test]
    fn multiplier_examples() {
        let mu = WeightSpec::poly_r2(0.0, &[2.0, -1.0]).unwrap();
        let seq = MultiplierSeq::build(&mu, 10, Precision::Double).unwrap();
        let out = seq.apply(&TaylorCoeffs::from_real(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(out.coeffs()[0].re, 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(out.coeffs()[1].re, 0.75, max_relative = 1e-14);
        let zero = seq.apply(&TaylorCoeffs::zero(5)).unwrap();
        assert!(zero.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(seq.apply(&TaylorCoeffs::zero(11)).is_err());
        let id = MultiplierSeq::build(&WeightSpec::lambda(0.7).unwrap(), 10, Precision::Double).unwrap();
        let f = TaylorCoeffs::from_real(&[1.0, -2.0, 3.5]);
        assert_eq!(id.apply(&f).unwrap(), f);
    }

    #[test]
    fn multiplier_sandwich_and_limit() {
        for w in weights() {
            let seq = MultiplierSeq::build(&w, 256, Precision::Double).unwrap();
            let (lo, hi) = w.m_range();
            for &t in seq.values() {
                assert!(t >= 1.0 / hi * (1.0 - 1e-14) && t <= 1.0 / lo * (1.0 + 1e-14));
            }
            if !w.is_jacobi() {
                assert!((seq.get(256) - 1.0).abs() < (seq.get(64) - 1.0).abs());
            }
        }
    }

    #[test]
    fn bv_sums_accumulate() {
        let mu = WeightSpec::<f64>::poly_r2(0.0, &[2.0, -1.0]).unwrap();
        let seq = MultiplierSeq::build(&mu, 50, Precision::Double).unwrap();
        let b = seq.bv_partial_sums();
        assert_relative_eq!(b[0], 2.0 / 3.0, max_relative = 1e-14);
        // increasing sequence: the variation telescopes to t_N = 1 − 1/(N+3)
        assert_relative_eq!(b[50], 1.0 - 1.0 / 53.0, max_relative = 1e-13);
        assert_eq!(seq.to_csv().lines().count(), 52);
    }
}
