//! Radial weights μ(r) = M(r)(1−r²)^α.
//!
//! `M` is drawn from a closed registry so that M′, M″ and the boundary
//! quotient g = (1−M)/(1−r²) are available in closed form:
//!
//! * `one`: M ≡ 1, the pure Jacobi weight λ_α;
//! * `poly-r2:c0,c1,...`: M(r) = Σ c_k r^{2k} with Σ c_k = 1;
//! * `exp-r2:a`: M(r) = exp(a(r²−1)).

use std::fmt;
use std::str::FromStr;

use crate::error::{BergmanError, Result};
use crate::scalar::Scalar;

/// Number of equispaced points used to check positivity of M.
pub const VALIDATION_POINTS: usize = 1001;

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MForm<T> {
    One,
    PolyR2 {
        /// c_k in M = Σ c_k s^k, s = r².
        coeffs: Vec<T>,
        /// g as a polynomial in s: coefficient of s^i is Σ_{k>i} c_k.
        g_coeffs: Vec<T>,
    },
    ExpR2 { a: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec<T> {
    alpha: T,
    form: MForm<T>,
    label: String,
}

fn horner<T: Scalar>(coeffs: &[T], s: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
}

fn parse_decimal(text: &str, full: &str) -> Result<f64> {
    let value: f64 = text
        .parse()
        .map_err(|_| BergmanError::WeightSyntax(full.into(), format!("`{text}` is not a decimal")))?;
    if !value.is_finite() {
        return Err(BergmanError::WeightSyntax(
            full.into(),
            format!("`{text}` is not finite"),
        ));
    }
    Ok(value)
}

impl<T: Scalar> WeightSpec<T> {
    /// λ_α(r) = (1−r²)^α.
    pub fn lambda(alpha: f64) -> Result<Self> {
        Self::build(alpha, MForm::One)
    }

    pub fn poly_r2(alpha: f64, coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(BergmanError::InvalidArgument(
                "poly-r2 needs at least one coefficient".into(),
            ));
        }
        let total: f64 = coeffs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(BergmanError::BoundaryValue(total));
        }
        let d = coeffs.len();
        let g_coeffs = (0..d.saturating_sub(1))
            .map(|i| T::lit(coeffs[i + 1..].iter().sum()))
            .collect();
        Self::build(
            alpha,
            MForm::PolyR2 {
                coeffs: coeffs.iter().map(|&c| T::lit(c)).collect(),
                g_coeffs,
            },
        )
    }

    pub fn exp_r2(alpha: f64, a: f64) -> Result<Self> {
        Self::build(alpha, MForm::ExpR2 { a: T::lit(a) })
    }

    fn build(alpha: f64, form: MForm<T>) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(BergmanError::AlphaOutOfRange(alpha));
        }
        let label = format!("alpha={alpha};M={}", form_label(&form));
        let w = Self {
            alpha: T::lit(alpha),
            form,
            label,
        };
        for i in 0..VALIDATION_POINTS {
            let r = T::from_usize_exact(i) / T::from_usize_exact(VALIDATION_POINTS - 1);
            let m = w.m(r);
            if !(m > T::zero()) {
                return Err(BergmanError::NonPositiveWeight {
                    r: r.to_f64_lossy(),
                    value: m.to_f64_lossy(),
                });
            }
        }
        Ok(w)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn form(&self) -> &MForm<T> {
        &self.form
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when M ≡ 1, i.e. the weight is λ_α itself.
    pub fn is_jacobi(&self) -> bool {
        matches!(self.form, MForm::One)
    }

    /// The comparison weight λ_α with the same exponent.
    pub fn jacobi_part(&self) -> Self {
        Self {
            alpha: self.alpha,
            form: MForm::One,
            label: format!("alpha={};M=one", self.alpha.to_f64_lossy()),
        }
    }

    /// Degree of M as a polynomial in r², when it is one.
    pub fn poly_degree(&self) -> Option<usize> {
        match &self.form {
            MForm::One => Some(0),
            MForm::PolyR2 { coeffs, .. } => Some(coeffs.len() - 1),
            MForm::ExpR2 { .. } => None,
        }
    }

    pub fn m(&self, r: T) -> T {
        match &self.form {
            MForm::One => T::one(),
            MForm::PolyR2 { coeffs, .. } => horner(coeffs, r * r),
            MForm::ExpR2 { a } => (*a * (r * r - T::one())).exp(),
        }
    }

    pub fn m_prime(&self, r: T) -> T {
        match &self.form {
            MForm::One => T::zero(),
            MForm::PolyR2 { coeffs, .. } => {
                // 2r Σ k c_k s^{k-1}
                let s = r * r;
                let mut acc = T::zero();
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * s + T::from_usize_exact(k) * c;
                }
                T::lit(2.0) * r * acc
            }
            MForm::ExpR2 { a } => T::lit(2.0) * *a * r * self.m(r),
        }
    }

    pub fn m_second(&self, r: T) -> T {
        match &self.form {
            MForm::One => T::zero(),
            MForm::PolyR2 { coeffs, .. } => {
                // Σ 2k(2k-1) c_k s^{k-1}
                let s = r * r;
                let mut acc = T::zero();
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    let kk = T::from_usize_exact(2 * k);
                    acc = acc * s + kk * (kk - T::one()) * c;
                }
                acc
            }
            MForm::ExpR2 { a } => {
                let two = T::lit(2.0);
                (two * *a + two * two * *a * *a * r * r) * self.m(r)
            }
        }
    }

    /// g(r) = (1 − M(r))/(1 − r²), continuous up to r = 1.
    pub fn g(&self, r: T) -> T {
        match &self.form {
            MForm::One => T::zero(),
            MForm::PolyR2 { g_coeffs, .. } => horner(g_coeffs, r * r),
            MForm::ExpR2 { a } => {
                let s = r * r - T::one();
                let x = *a * s;
                if x == T::zero() {
                    *a
                } else {
                    *a * x.exp_m1() / x
                }
            }
        }
    }

    /// Extremes of M over the validation grid.
    pub fn m_range(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..VALIDATION_POINTS {
            let r = T::from_usize_exact(i) / T::from_usize_exact(VALIDATION_POINTS - 1);
            let m = self.m(r);
            lo = lo.min(m);
            hi = hi.max(m);
        }
        (lo, hi)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> WeightSpec<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        let form = match &self.form {
            MForm::One => MForm::One,
            MForm::PolyR2 { coeffs, g_coeffs } => MForm::PolyR2 {
                coeffs: coeffs.iter().map(|&x| c(x)).collect(),
                g_coeffs: g_coeffs.iter().map(|&x| c(x)).collect(),
            },
            MForm::ExpR2 { a } => MForm::ExpR2 { a: c(*a) },
        };
        WeightSpec {
            alpha: c(self.alpha),
            form,
            label: self.label.clone(),
        }
    }
}

fn form_label<T: Scalar>(form: &MForm<T>) -> String {
    match form {
        MForm::One => "one".into(),
        MForm::PolyR2 { coeffs, .. } => {
            let parts: Vec<String> = coeffs.iter().map(|c| c.to_f64_lossy().to_string()).collect();
            format!("poly-r2:{}", parts.join(","))
        }
        MForm::ExpR2 { a } => format!("exp-r2:{}", a.to_f64_lossy()),
    }
}

/// Parses `alpha=<decimal>;M=<one | poly-r2:c0,c1,... | exp-r2:a>`.
pub fn parse_weight<T: Scalar>(spec: &str) -> Result<WeightSpec<T>> {
    let syntax = |msg: &str| BergmanError::WeightSyntax(spec.into(), msg.into());
    if spec.chars().any(char::is_whitespace) {
        return Err(syntax("whitespace is not allowed"));
    }
    let (alpha_part, m_part) = spec
        .split_once(';')
        .ok_or_else(|| syntax("expected `alpha=...;M=...`"))?;
    let alpha_text = alpha_part
        .strip_prefix("alpha=")
        .ok_or_else(|| syntax("expected `alpha=` prefix"))?;
    let alpha = parse_decimal(alpha_text, spec)?;
    let m_text = m_part
        .strip_prefix("M=")
        .ok_or_else(|| syntax("expected `M=` after `;`"))?;

    let mut w = if m_text == "one" {
        WeightSpec::lambda(alpha)?
    } else if let Some(list) = m_text.strip_prefix("poly-r2:") {
        let coeffs = list
            .split(',')
            .map(|c| parse_decimal(c, spec))
            .collect::<Result<Vec<f64>>>()?;
        WeightSpec::poly_r2(alpha, &coeffs)?
    } else if let Some(a) = m_text.strip_prefix("exp-r2:") {
        WeightSpec::exp_r2(alpha, parse_decimal(a, spec)?)?
    } else {
        return Err(syntax("M must be one, poly-r2:... or exp-r2:..."));
    };
    w.label = spec.to_string();
    Ok(w)
}

impl<T: Scalar> FromStr for WeightSpec<T> {
    type Err = BergmanError;

    fn from_str(s: &str) -> Result<Self> {
        parse_weight(s)
    }
}

impl<T: Scalar> fmt::Display for WeightSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn w(spec: &str) -> WeightSpec<f64> {
        parse_weight(spec).unwrap()
    }

    #[test]
    fn parse_identity_weight() {
        let l0 = w("alpha=0;M=one");
        assert!(l0.is_jacobi());
        assert_eq!(l0.alpha(), 0.0);
        assert_eq!(l0.m(0.3), 1.0);
    }

    #[test]
    fn parse_polynomial_weight() {
        let mu = w("alpha=0;M=poly-r2:2,-1");
        assert_eq!(mu.m(1.0), 1.0);
        assert_eq!(mu.m(0.0), 2.0);
        assert_eq!(mu.poly_degree(), Some(1));
        assert_eq!(mu.label(), "alpha=0;M=poly-r2:2,-1");
    }

    #[test]
    fn parse_rejects_bad_specs() {
        assert!(matches!(
            parse_weight::<f64>("alpha=0.5;M=poly-r2:1,1"),
            Err(BergmanError::BoundaryValue(_))
        ));
        assert!(matches!(
            parse_weight::<f64>("alpha=-1;M=one"),
            Err(BergmanError::AlphaOutOfRange(_))
        ));
        assert!(matches!(
            parse_weight::<f64>("alpha=0; M=one"),
            Err(BergmanError::WeightSyntax(..))
        ));
        assert!(parse_weight::<f64>("alpha=0;M=two").is_err());
        assert!(parse_weight::<f64>("alpha=x;M=one").is_err());
        assert!(parse_weight::<f64>("alpha=inf;M=one").is_err());
        assert!(parse_weight::<f64>("M=one;alpha=0").is_err());
        assert!(parse_weight::<f64>("alpha=0;M=poly-r2:").is_err());
        // M = 3 - 4 r^2 + 2 r^4 is positive; M = 1 - 5 s + 5 s^2 dips below 0
        assert!(parse_weight::<f64>("alpha=0;M=poly-r2:3,-4,2").is_ok());
        assert!(matches!(
            parse_weight::<f64>("alpha=0;M=poly-r2:1,-5,5"),
            Err(BergmanError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn scientific_notation_accepted() {
        let mu = w("alpha=5e-1;M=exp-r2:1.0E0");
        assert_eq!(mu.alpha(), 0.5);
    }

    #[test]
    fn polynomial_derivatives_at_one() {
        let mu = w("alpha=0;M=poly-r2:2,-1");
        assert_eq!(mu.m(1.0), 1.0);
        assert_eq!(mu.m_prime(1.0), -2.0);
        assert_eq!(mu.m_second(1.0), -2.0);
    }

    #[test]
    fn identity_derivatives_vanish() {
        let l = w("alpha=1.5;M=one");
        for r in [0.0, 0.4, 1.0] {
            assert_eq!((l.m(r), l.m_prime(r), l.m_second(r)), (1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn exponential_derivatives_at_one() {
        let mu = w("alpha=0;M=exp-r2:1");
        assert_eq!(mu.m(1.0), 1.0);
        assert_abs_diff_eq!(mu.m_prime(1.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mu.m_second(1.0), 6.0, epsilon = 1e-15);
    }

    #[test]
    fn g_examples() {
        let l = w("alpha=0;M=one");
        assert_eq!(l.g(0.7), 0.0);
        let mu = w("alpha=0;M=poly-r2:2,-1");
        for r in [0.0, 0.3, 0.999, 1.0] {
            assert_eq!(mu.g(r), -1.0);
        }
        let e = w("alpha=0;M=exp-r2:1");
        assert_eq!(e.g(1.0), 1.0);
        assert_abs_diff_eq!(e.g(1.0 - 1e-9), 1.0, epsilon = 1e-8);
    }

    fn registry() -> Vec<WeightSpec<f64>> {
        [
            "alpha=0;M=one",
            "alpha=-0.5;M=one",
            "alpha=0;M=poly-r2:2,-1",
            "alpha=1;M=poly-r2:2,-1",
            "alpha=0.5;M=poly-r2:0.5,0.25,0.25",
            "alpha=0;M=poly-r2:3,-4,2",
            "alpha=0.5;M=exp-r2:1",
            "alpha=1;M=exp-r2:-2",
        ]
        .iter()
        .map(|s| w(s))
        .collect()
    }

    #[test]
    fn g_reconstructs_m() {
        for mu in registry() {
            for i in 0..1000 {
                let r = i as f64 / 1000.0;
                let lhs = mu.g(r) * (1.0 - r * r) + mu.m(r);
                assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn finite_difference_derivatives() {
        let h = 1e-5;
        for mu in registry() {
            for i in 1..20 {
                let r = i as f64 / 20.0;
                let d1 = (mu.m(r + h) - mu.m(r - h)) / (2.0 * h);
                assert_abs_diff_eq!(d1, mu.m_prime(r), epsilon = 1e-6);
                let d2 = (mu.m_prime(r + h) - mu.m_prime(r - h)) / (2.0 * h);
                assert_abs_diff_eq!(d2, mu.m_second(r), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn range_brackets_boundary_value() {
        for mu in registry() {
            let (lo, hi) = mu.m_range();
            assert!(lo > 0.0 && lo <= 1.0 && hi >= 1.0);
        }
    }

    #[test]
    fn single_precision_weight() {
        let mu: WeightSpec<f32> = parse_weight("alpha=0;M=poly-r2:2,-1").unwrap();
        assert_eq!(mu.m(1.0), 1.0);
        assert_eq!(mu.cast::<f64>().m_prime(1.0), -2.0);
    }

    proptest! {
        #[test]
        fn accepted_polys_are_positive(c1 in -0.9f64..3.0, c2 in -0.9f64..0.9) {
            let c0 = 1.0 - c1 - c2;
            if let Ok(mu) = WeightSpec::<f64>::poly_r2(0.0, &[c0, c1, c2]) {
                prop_assert!(mu.m_range().0 > 0.0);
                prop_assert!((mu.m(1.0) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn label_round_trips(alpha in -0.99f64..4.0, a in -3.0f64..3.0) {
            let mu = WeightSpec::<f64>::exp_r2(alpha, a).unwrap();
            let again: WeightSpec<f64> = parse_weight(mu.label()).unwrap();
            prop_assert_eq!(again.alpha(), mu.alpha());
            prop_assert_eq!(again.form(), mu.form());
        }
    }
}
