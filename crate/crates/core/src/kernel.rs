//! The weighted Bergman kernel as a truncated power series in ζ = z w̄, and
//! the closed form c_α/(1−z w̄)^{2+α} for the Jacobi weights.

use num_complex::Complex;

use crate::error::{BergmanError, Result};
use crate::moments::MomentTable;
use crate::scalar::Scalar;
use crate::special::ln_gamma;
use crate::sum::Precision;
use crate::weights::WeightSpec;

/// Hard ceiling on the truncation degree.
pub const MAX_DEGREE: usize = 1_000_000;

/// c_α = (α+1)/π, the value of the λ_α kernel at the origin.
pub fn kernel_constant<T: Scalar>(alpha: T) -> T {
    (alpha + T::one()) * T::FRAC_1_PI()
}

/// C with a_n ≤ C (n+1)^{α+1} for the λ_α coefficients.
///
/// For −1 < α < 0 the bare (α+1)/π undershoots the asymptotic constant
/// (α+1)/(π Γ(α+2)), so the constant is divided by Γ(α+2) when that is below one.
pub fn majorant_constant<T: Scalar>(alpha: T) -> T {
    let two_pow = T::one().max(T::lit(2.0).powf(alpha));
    let gamma = ln_gamma(alpha + T::lit(2.0)).exp();
    kernel_constant(alpha) * two_pow / gamma.min(T::one())
}

/// Least N with Σ_{n>N} C (n+1)^{α+1} ρⁿ < tol.
///
/// The term ratio ρ((n+2)/(n+1))^{α+1} decreases in n, so once it is below one
/// the tail after N is at most the first omitted term over (1 − ratio).
pub fn truncation_degree<T: Scalar>(alpha: T, rho: T, tol: T) -> Result<usize> {
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(BergmanError::RhoOutOfRange(rho.to_f64_lossy()));
    }
    if !(tol > T::zero()) {
        return Err(BergmanError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if rho == T::zero() {
        return Ok(0);
    }
    let c = majorant_constant(alpha);
    let e = alpha + T::one();
    let ln_rho = rho.ln();
    for big_n in 0..=MAX_DEGREE {
        // first omitted term, index N+1
        let k = T::from_usize_exact(big_n + 1);
        let term = c * ((k + T::one()).ln() * e + k * ln_rho).exp();
        let ratio = rho * ((k + T::lit(2.0)) / (k + T::one())).powf(e);
        if ratio < T::one() && term / (T::one() - ratio) < tol {
            return Ok(big_n);
        }
    }
    Err(BergmanError::TruncationCap(MAX_DEGREE))
}

/// Truncation degree for a general weight: b_n ≤ a_n / min M, so the λ_α
/// majorant is reused with the tolerance scaled by min M.
pub fn truncation_degree_for<T: Scalar>(w: &WeightSpec<T>, rho: T, tol: T) -> Result<usize> {
    let (m_min, _) = w.m_range();
    truncation_degree(w.alpha(), rho, tol * m_min.min(T::one()))
}

/// Σ_{n≤N} b_n ζⁿ for one weight.
#[derive(Debug, Clone)]
pub struct KernelSeries<T> {
    weight: WeightSpec<T>,
    coeffs: Vec<T>,
}

impl<T: Scalar> KernelSeries<T> {
    pub fn new(w: &WeightSpec<T>, degree: usize, precision: Precision) -> Result<Self> {
        Ok(Self::from_table(&MomentTable::build(w, degree, precision)?))
    }

    /// Series sized for |z w̄| ≤ rho at the requested tolerance.
    pub fn for_radius(w: &WeightSpec<T>, rho: T, tol: T) -> Result<Self> {
        let degree = truncation_degree_for(w, rho, tol)?;
        Self::new(w, degree, Precision::Double)
    }

    pub fn from_table(table: &MomentTable<T>) -> Self {
        Self {
            weight: table.weight().clone(),
            coeffs: table.coeffs(),
        }
    }

    pub fn weight(&self) -> &WeightSpec<T> {
        &self.weight
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Kernel value at (z, w), by Horner in ζ = z w̄.
    pub fn eval(&self, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        check_inside("z", z)?;
        check_inside("w", w)?;
        Ok(horner(&self.coeffs, z * w.conj()))
    }
}

fn horner<T: Scalar>(coeffs: &[T], zeta: Complex<T>) -> Complex<T> {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * zeta + c)
}

fn check_inside<T: Scalar>(name: &str, z: Complex<T>) -> Result<()> {
    if z.norm() < T::one() {
        Ok(())
    } else {
        Err(BergmanError::OutsideDisc(format!("{name} = {} + {}i", z.re, z.im)))
    }
}

pub fn eval_kernel_series<T: Scalar>(k: &KernelSeries<T>, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
    k.eval(z, w)
}

/// c_α (1 − z w̄)^{−(2+α)} on the principal branch.
pub fn eval_kernel_closed<T: Scalar>(alpha: T, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
    if !(z.norm() * w.norm() < T::one()) {
        return Err(BergmanError::OutsideDisc(format!(
            "|z||w| = {} must be below 1",
            z.norm() * w.norm()
        )));
    }
    let base = Complex::new(T::one(), T::zero()) - z * w.conj();
    let power = -(alpha + T::lit(2.0));
    Ok((base.ln() * power).exp() * kernel_constant(alpha))
}
