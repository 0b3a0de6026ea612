//! Functions on the disc: samples on a polar quadrature grid, angular Fourier
//! modes, weighted L^p norms, and Taylor coefficient sequences.
//!
//! The grid is the tensor product of the Gauss–Jacobi rule in u = r² with K
//! equispaced angles. A grid point (j, k) carries the measure
//! ½ ω_j (2π/K) of (1−r²)^α dA; the factor M(r_j) is applied separately so one
//! grid serves every weight with the same α.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde_json::Value;

use crate::error::{BergmanError, Result};
use crate::format::{json_complex, sig17};
use crate::quadrature::{gauss_jacobi_rule, GaussJacobiRule};
use crate::scalar::Scalar;
use crate::sum::{sum, Precision};
use crate::weights::WeightSpec;

pub const DEFAULT_RADIAL: usize = 256;
pub const DEFAULT_ANGULAR: usize = 512;

/// Radial Gauss–Jacobi nodes r_j = √u_j times K uniform angles.
#[derive(Debug, Clone)]
pub struct PolarGrid<T> {
    rule: GaussJacobiRule<T>,
    radii: Vec<T>,
    angular: usize,
}

impl<T: Scalar> PolarGrid<T> {
    pub fn new(alpha: T, radial: usize, angular: usize) -> Result<Self> {
        if radial == 0 {
            return Err(BergmanError::InvalidGrid("need at least one radial node".into()));
        }
        if angular < 4 || !angular.is_power_of_two() {
            return Err(BergmanError::InvalidGrid(format!(
                "angular count {angular} must be a power of two >= 4"
            )));
        }
        let rule = gauss_jacobi_rule(radial, alpha)?;
        let radii = rule.nodes().iter().map(|u| u.sqrt()).collect();
        Ok(Self { rule, radii, angular })
    }

    pub fn for_weight(w: &WeightSpec<T>, radial: usize, angular: usize) -> Result<Self> {
        Self::new(w.alpha(), radial, angular)
    }

    pub fn default_for(w: &WeightSpec<T>) -> Result<Self> {
        Self::for_weight(w, DEFAULT_RADIAL, DEFAULT_ANGULAR)
    }

    /// Same α with both resolutions doubled.
    pub fn doubled(&self) -> Result<Self> {
        Self::new(self.alpha(), 2 * self.radial_count(), 2 * self.angular_count())
    }

    pub fn alpha(&self) -> T {
        self.rule.alpha()
    }

    pub fn radial_count(&self) -> usize {
        self.radii.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angular
    }

    pub fn len(&self) -> usize {
        self.radial_count() * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rule(&self) -> &GaussJacobiRule<T> {
        &self.rule
    }

    /// r_j, ascending.
    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn theta(&self, k: usize) -> T {
        T::TAU() * T::from_usize_exact(k) / T::from_usize_exact(self.angular)
    }

    pub fn point(&self, j: usize, k: usize) -> Complex<T> {
        Complex::from_polar(self.radii[j], self.theta(k))
    }

    /// ½ ω_j M(r_j) (2π/K): the μ-measure of one grid cell on ring j.
    pub fn cell_weight(&self, w: &WeightSpec<T>, j: usize) -> T {
        T::lit(0.5) * self.rule.weights()[j] * w.m(self.radii[j]) * T::TAU()
            / T::from_usize_exact(self.angular)
    }

    pub fn check_weight(&self, w: &WeightSpec<T>) -> Result<()> {
        if self.alpha() == w.alpha() {
            Ok(())
        } else {
            Err(BergmanError::GridMismatch {
                grid: self.alpha().to_f64_lossy(),
                weight: w.alpha().to_f64_lossy(),
            })
        }
    }

    fn forward_fft(&self) -> Arc<dyn Fft<T>> {
        FftPlanner::new().plan_fft_forward(self.angular)
    }

    fn inverse_fft(&self) -> Arc<dyn Fft<T>> {
        FftPlanner::new().plan_fft_inverse(self.angular)
    }
}

/// Test functions on the disc.
#[derive(Debug, Clone, PartialEq)]
pub enum FnSpec<T> {
    /// Σ a_n wⁿ.
    HoloPoly(Vec<T>),
    /// |w|^{2k} w^m, with w̄^{|m|} for negative m.
    Mono { k: u32, m: i32 },
    /// (1−w)^{−s}.
    Sing(T),
    /// log(1/(1−w)).
    LogSing,
}

impl<T: Scalar> FnSpec<T> {
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        match self {
            FnSpec::HoloPoly(a) => a
                .iter()
                .rev()
                .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c),
            FnSpec::Mono { k, m } => {
                let radial = z.norm_sqr().powi(*k as i32);
                let angular = if *m >= 0 { z.powu(*m as u32) } else { z.conj().powu(m.unsigned_abs()) };
                angular * radial
            }
            FnSpec::Sing(s) => ((one - z).ln() * (-*s)).exp(),
            FnSpec::LogSing => -(one - z).ln(),
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        match self {
            FnSpec::Mono { k, m } => *k == 0 && *m >= 0,
            _ => true,
        }
    }

    /// Taylor coefficients f_0..f_n where known in closed form; polynomials
    /// return their own degree when it is below n.
    pub fn taylor(&self, n: usize) -> Result<TaylorCoeffs<T>> {
        let real = |v: Vec<T>| TaylorCoeffs::from_real(&v);
        match self {
            FnSpec::HoloPoly(a) => Ok(real(a.clone()).partial_sum(n)),
            FnSpec::Mono { k: 0, m } if *m >= 0 => {
                let mut v = vec![T::zero(); *m as usize + 1];
                v[*m as usize] = T::one();
                Ok(real(v).partial_sum(n))
            }
            FnSpec::Mono { .. } => Err(BergmanError::NoTaylorSequence(self.to_string())),
            FnSpec::Sing(s) => {
                // binomial series: f_k = f_{k−1} (k−1+s)/k
                let mut v = Vec::with_capacity(n + 1);
                v.push(T::one());
                for k in 1..=n {
                    let kf = T::from_usize_exact(k);
                    v.push(v[k - 1] * (kf - T::one() + *s) / kf);
                }
                Ok(real(v))
            }
            FnSpec::LogSing => Ok(real(
                (0..=n)
                    .map(|k| if k == 0 { T::zero() } else { T::from_usize_exact(k).recip() })
                    .collect(),
            )),
        }
    }

    /// Checks p·s ≤ 2 + α − margin for `sing:s`; other members pass.
    pub fn lp_guard(&self, p: T, alpha: T, margin: T) -> Result<()> {
        if let FnSpec::Sing(s) = self {
            let limit = T::lit(2.0) + alpha - margin;
            if p * *s > limit {
                return Err(BergmanError::NotInLp(
                    self.to_string(),
                    p.to_f64_lossy(),
                    format!("p*s <= {}", limit.to_f64_lossy()),
                ));
            }
        }
        Ok(())
    }

    /// Upper bound on Σ_{n≥K/2} |f_n| r_max^n, the aliasing error of the
    /// angular modes. Zero when all modes fit below K/2.
    pub fn aliasing_bound(&self, grid: &PolarGrid<T>) -> T {
        let half = grid.angular_count() / 2;
        let r = *grid.radii().last().expect("non-empty grid");
        match self {
            FnSpec::HoloPoly(a) if a.len() <= half => T::zero(),
            FnSpec::Mono { k, m } if (2 * *k as usize + m.unsigned_abs() as usize) < half => T::zero(),
            FnSpec::HoloPoly(_) | FnSpec::Mono { .. } => T::infinity(),
            FnSpec::Sing(s) => {
                let h = T::from_usize_exact(half);
                let lead = self.taylor(half).map(|t| t.coeffs()[half].re).unwrap_or(T::infinity());
                let ratio = r * T::one().max((h + *s) / (h + T::one()));
                if ratio < T::one() {
                    lead.abs() * r.powi(half as i32) / (T::one() - ratio)
                } else {
                    T::infinity()
                }
            }
            FnSpec::LogSing => r.powi(half as i32) / (T::from_usize_exact(half) * (T::one() - r)),
        }
    }
}

impl<T: Scalar> fmt::Display for FnSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnSpec::HoloPoly(a) => {
                let parts: Vec<String> = a.iter().map(|c| c.to_string()).collect();
                write!(f, "holo-poly:{}", parts.join(","))
            }
            FnSpec::Mono { k, m } => write!(f, "mono:{k},{m}"),
            FnSpec::Sing(s) => write!(f, "sing:{s}"),
            FnSpec::LogSing => write!(f, "logsing"),
        }
    }
}

pub fn parse_fn<T: Scalar>(spec: &str) -> Result<FnSpec<T>> {
    let bad = |why: &str| BergmanError::FnSyntax(spec.to_string(), why.to_string());
    let real = |s: &str| -> Result<T> {
        let x: f64 = s.trim().parse().map_err(|_| bad(&format!("`{s}` is not a number")))?;
        if x.is_finite() {
            Ok(T::lit(x))
        } else {
            Err(bad("non-finite number"))
        }
    };
    let (tag, args) = match spec.split_once(':') {
        Some((t, a)) => (t.trim(), Some(a)),
        None => (spec.trim(), None),
    };
    match (tag, args) {
        ("logsing", None) => Ok(FnSpec::LogSing),
        ("holo-poly", Some(a)) => {
            let coeffs = a.split(',').map(real).collect::<Result<Vec<T>>>()?;
            Ok(FnSpec::HoloPoly(coeffs))
        }
        ("mono", Some(a)) => {
            let parts: Vec<&str> = a.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(bad("mono takes k,m"));
            }
            let k = parts[0].parse::<u32>().map_err(|_| bad("k must be a non-negative integer"))?;
            let m = parts[1].parse::<i32>().map_err(|_| bad("m must be an integer"))?;
            Ok(FnSpec::Mono { k, m })
        }
        ("sing", Some(a)) => Ok(FnSpec::Sing(real(a)?)),
        _ => Err(bad("expected holo-poly:a0,a1,... | mono:k,m | sing:s | logsing")),
    }
}

impl<T: Scalar> FromStr for FnSpec<T> {
    type Err = BergmanError;

    fn from_str(s: &str) -> Result<Self> {
        parse_fn(s)
    }
}

/// Complex samples f(r_j e^{iθ_k}), ring-major, with optional angular modes
/// f̂_m(r_j) stored at index m mod K.
#[derive(Debug, Clone)]
pub struct GridFunction<T> {
    grid: Arc<PolarGrid<T>>,
    samples: Vec<Complex<T>>,
    modes: Option<Vec<Complex<T>>>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Arc<PolarGrid<T>>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(BergmanError::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            samples,
            modes: None,
        })
    }

    pub fn from_fn<F>(grid: &Arc<PolarGrid<T>>, f: F) -> Self
    where
        F: Fn(Complex<T>) -> Complex<T> + Sync,
    {
        let k = grid.angular_count();
        let samples = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point(i / k, i % k)))
            .collect();
        Self {
            grid: grid.clone(),
            samples,
            modes: None,
        }
    }

    pub fn grid(&self) -> &Arc<PolarGrid<T>> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn ring(&self, j: usize) -> &[Complex<T>] {
        let k = self.grid.angular_count();
        &self.samples[j * k..(j + 1) * k]
    }

    pub fn has_modes(&self) -> bool {
        self.modes.is_some()
    }

    /// f̂_m(r_j) for −K/2 ≤ m < K/2, once modes are populated.
    pub fn mode(&self, j: usize, m: i64) -> Option<Complex<T>> {
        let k = self.grid.angular_count() as i64;
        if m < -k / 2 || m >= k / 2 {
            return None;
        }
        let idx = j * k as usize + m.rem_euclid(k) as usize;
        self.modes.as_ref().map(|v| v[idx])
    }

    pub fn modes(&self) -> Option<&[Complex<T>]> {
        self.modes.as_deref()
    }

    /// Populates the modes with one FFT per ring.
    pub fn with_modes(mut self) -> Self {
        if self.modes.is_none() {
            let k = self.grid.angular_count();
            let fft = self.grid.forward_fft();
            let scale = T::from_usize_exact(k).recip();
            let mut modes = self.samples.clone();
            modes.par_chunks_mut(k).for_each(|ring| {
                fft.process(ring);
                for c in ring.iter_mut() {
                    *c = *c * scale;
                }
            });
            self.modes = Some(modes);
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Pointwise product with M(r_j).
    pub fn times_weight(&self, w: &WeightSpec<T>) -> Self {
        let k = self.grid.angular_count();
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &c)| c * w.m(self.grid.radii()[i / k]))
            .collect();
        Self {
            grid: self.grid.clone(),
            samples,
            modes: None,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Self {
            grid: self.grid.clone(),
            samples,
            modes: None,
        }
    }

    /// ‖f‖_{p,μ} by the grid rule.
    pub fn lp_norm(&self, p: T, w: &WeightSpec<T>) -> Result<T> {
        check_exponent(p)?;
        self.grid.check_weight(w)?;
        if !self.is_finite() {
            return Err(BergmanError::NonFiniteSamples("grid function".into()));
        }
        let rings = (0..self.grid.radial_count()).map(|j| self.grid.cell_weight(w, j) * ring_power_sum(self.ring(j), p));
        Ok(sum(Precision::Double, rings).powf(p.recip()))
    }

    /// ((1/K) Σ_k |f(r_j e^{iθ_k})|^p)^{1/p}.
    pub fn p_mean(&self, j: usize, p: T) -> T {
        let k = T::from_usize_exact(self.grid.angular_count());
        (ring_power_sum(self.ring(j), p) / k).powf(p.recip())
    }

    /// Discrete ⟨f, g⟩_μ = Σ cell · f ḡ.
    pub fn inner(&self, other: &Self, w: &WeightSpec<T>) -> Complex<T> {
        let k = self.grid.angular_count();
        let terms: Vec<Complex<T>> = (0..self.grid.radial_count())
            .map(|j| {
                let cw = self.grid.cell_weight(w, j);
                let s = &self.samples[j * k..(j + 1) * k];
                let t = &other.samples[j * k..(j + 1) * k];
                let re = sum(Precision::Double, s.iter().zip(t).map(|(a, b)| (a * b.conj()).re));
                let im = sum(Precision::Double, s.iter().zip(t).map(|(a, b)| (a * b.conj()).im));
                Complex::new(re, im) * cw
            })
            .collect();
        Complex::new(
            sum(Precision::Double, terms.iter().map(|c| c.re)),
            sum(Precision::Double, terms.iter().map(|c| c.im)),
        )
    }

    /// `r,theta,re,im` rows.
    pub fn to_csv(&self) -> String {
        let k = self.grid.angular_count();
        let mut out = String::from("r,theta,re,im\n");
        for (i, c) in self.samples.iter().enumerate() {
            let (j, kk) = (i / k, i % k);
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig17(self.grid.radii()[j].to_f64_lossy()),
                sig17(self.grid.theta(kk).to_f64_lossy()),
                sig17(c.re.to_f64_lossy()),
                sig17(c.im.to_f64_lossy())
            ));
        }
        out
    }
}

fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if p > T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(BergmanError::ExponentOutOfRange(p.to_f64_lossy()))
    }
}

fn ring_power_sum<T: Scalar>(ring: &[Complex<T>], p: T) -> T {
    if p == T::lit(2.0) {
        sum(Precision::Double, ring.iter().map(|c| c.norm_sqr()))
    } else {
        sum(Precision::Double, ring.iter().map(|c| c.norm().powf(p)))
    }
}

pub fn sample<T: Scalar>(spec: &FnSpec<T>, grid: &Arc<PolarGrid<T>>) -> Result<GridFunction<T>> {
    let f = GridFunction::from_fn(grid, |z| spec.eval(z));
    if f.is_finite() {
        Ok(f)
    } else {
        Err(BergmanError::NonFiniteSamples(spec.to_string()))
    }
}

pub fn angular_modes<T: Scalar>(f: &GridFunction<T>) -> GridFunction<T> {
    f.clone().with_modes()
}

pub fn lp_norm<T: Scalar>(f: &GridFunction<T>, p: T, w: &WeightSpec<T>) -> Result<T> {
    f.lp_norm(p, w)
}

pub fn p_mean<T: Scalar>(f: &GridFunction<T>, j: usize, p: T) -> T {
    f.p_mean(j, p)
}

/// Complex Taylor coefficients f_0..f_N.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoeffs<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> TaylorCoeffs<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        assert!(!coeffs.is_empty(), "at least one coefficient");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(vec![Complex::new(T::zero(), T::zero()); degree + 1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// S_N: truncation to degree min(N, degree).
    pub fn partial_sum(&self, n: usize) -> Self {
        Self::new(self.coeffs[..=n.min(self.degree())].to_vec())
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    /// Horner at every grid point.
    pub fn eval_on_grid(&self, grid: &Arc<PolarGrid<T>>) -> GridFunction<T> {
        GridFunction::from_fn(grid, |z| self.eval(z))
    }

    /// Values on the ring of radius r at the K grid angles, by one inverse
    /// FFT; degrees ≥ K fold onto n mod K, which is exact on the grid.
    pub fn ring_values(&self, r: T, fft: &dyn Fft<T>, out: &mut [Complex<T>]) {
        let k = out.len();
        out.iter_mut().for_each(|c| *c = Complex::new(T::zero(), T::zero()));
        let mut rn = T::one();
        for (n, &c) in self.coeffs.iter().enumerate() {
            out[n % k] = out[n % k] + c * rn;
            rn = rn * r;
        }
        fft.process(out);
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex::new(T::zero(), T::zero());
        (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(zero);
                let b = other.coeffs.get(i).copied().unwrap_or(zero);
                (a - b).norm()
            })
            .fold(T::zero(), T::max)
    }

    /// `[[re, im], ...]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|c| json_complex(c.re.to_f64_lossy(), c.im.to_f64_lossy()))
                .collect(),
        )
    }
}

pub fn partial_sum<T: Scalar>(f: &TaylorCoeffs<T>, n: usize) -> TaylorCoeffs<T> {
    f.partial_sum(n)
}

pub fn eval_taylor<T: Scalar>(f: &TaylorCoeffs<T>, grid: &Arc<PolarGrid<T>>) -> GridFunction<T> {
    f.eval_on_grid(grid)
}

/// Weighted p-th power sums Σ_j cell_j Σ_k |v_k|^p for several ring signals
/// at once, without storing the grid.
///
/// `fill(j, r_j, bufs, fft)` writes the K values of each signal on ring j
/// into `bufs`; `fft` is an inverse transform for [`TaylorCoeffs::ring_values`].
/// Returns `out[signal][exponent]` before the 1/p root.
pub fn stream_power_sums<T, F>(
    grid: &PolarGrid<T>,
    w: &WeightSpec<T>,
    ps: &[T],
    signals: usize,
    fill: F,
) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    F: Fn(usize, T, &mut [Vec<Complex<T>>], &dyn Fft<T>) + Sync,
{
    grid.check_weight(w)?;
    for &p in ps {
        check_exponent(p)?;
    }
    let k = grid.angular_count();
    let inverse = grid.inverse_fft();
    let per_ring: Vec<Vec<Vec<T>>> = (0..grid.radial_count())
        .into_par_iter()
        .map_init(
            || vec![vec![Complex::new(T::zero(), T::zero()); k]; signals],
            |bufs, j| {
                fill(j, grid.radii()[j], bufs, inverse.as_ref());
                let cw = grid.cell_weight(w, j);
                bufs.iter()
                    .map(|b| ps.iter().map(|&p| cw * ring_power_sum(b, p)).collect())
                    .collect()
            },
        )
        .collect();
    let mut out = vec![vec![T::zero(); ps.len()]; signals];
    for (s, row) in out.iter_mut().enumerate() {
        for (e, cell) in row.iter_mut().enumerate() {
            *cell = sum(Precision::Double, per_ring.iter().map(|r| r[s][e]));
            if !cell.is_finite() {
                return Err(BergmanError::NonFiniteSamples(format!("signal {s}")));
            }
        }
    }
    Ok(out)
}
