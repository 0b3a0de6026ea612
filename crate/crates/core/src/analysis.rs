//! Differences of the multiplier t_n = b_n/a_n computed two ways, their
//! limits, the bounded-variation report, and the empirical operator-norm and
//! partial-sum experiments.
//!
//! Every integral is ½∫₀¹ uⁿ (1−u)^α φ(u) du with φ smooth: the Jacobi factor
//! stays in the quadrature weight and (1−M)/(1−r²) enters only through g.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{BergmanError, Result};
use crate::format::{json_num, sig17};
use crate::funcspace::{sample, FnSpec, GridFunction, PolarGrid};
use crate::moments::quadrature_order;
use crate::projector::Projector;
use crate::quadrature::{gauss_jacobi_rule, GaussJacobiRule};
use crate::scalar::Scalar;
use crate::sum::{dot, Precision};
use crate::weights::WeightSpec;

/// Largest n whose difference is taken directly in `bv_report`.
pub const DIRECT_CROSSOVER: usize = 100;
/// Window where both methods are computed and compared.
pub const OVERLAP: (usize, usize) = (50, 100);
/// Allowed |direct − ibp| relative to max(|direct|, 1/n²).
pub const CROSS_TOLERANCE: f64 = 1e-6;
/// Margin in the guard p·s ≤ 2 + α − margin for the operator-norm battery.
pub const OPNORM_GUARD_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaQuantities<T> {
    pub n: usize,
    pub a: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
    /// t_n − t_{n−1}.
    pub delta_direct: T,
    pub delta_ibp: T,
    pub t: T,
}

impl<T: Scalar> LemmaQuantities<T> {
    pub fn c12_over_a(&self) -> T {
        self.c1 * self.c2 / self.a
    }

    pub fn c34_over_a(&self) -> T {
        self.c3 * self.c4 / self.a
    }
}

/// (L12, L34, delta_inf): the limits of C1C2/A, C3C4/A and n²Δt_n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaLimits<T> {
    pub l12: T,
    pub l34: T,
    pub delta_inf: T,
}

impl<T: Scalar> LemmaLimits<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "L12": json_num(self.l12.to_f64_lossy()),
            "L34": json_num(self.l34.to_f64_lossy()),
            "delta_inf": json_num(self.delta_inf.to_f64_lossy()),
        })
    }
}

pub fn lemma_limits<T: Scalar>(mu: &WeightSpec<T>) -> LemmaLimits<T> {
    let a1 = mu.alpha() + T::one();
    let two = T::lit(2.0);
    let mp = mu.m_prime(T::one());
    let l12 = two * a1 * a1 * mp;
    let l34 = two * (a1 + T::one()) * a1 * mp - two * a1 * (T::one() - mu.m(T::one()));
    LemmaLimits {
        l12,
        l34,
        delta_inf: (l12 - l34) / T::lit(4.0),
    }
}

/// One Gauss–Jacobi rule with every Lemma integrand pre-evaluated at its nodes.
#[derive(Debug, Clone)]
pub struct LemmaEngine<T> {
    weight: WeightSpec<T>,
    rule: GaussJacobiRule<T>,
    log_u: Vec<T>,
    m: Vec<T>,
    phi1: Vec<T>,
    phi2: Vec<T>,
    phi3: Vec<T>,
    precision: Precision,
}

impl<T: Scalar> LemmaEngine<T> {
    /// Engine accurate for 1 ≤ n ≤ n_max under the moment order policy.
    pub fn new(mu: &WeightSpec<T>, n_max: usize, precision: Precision) -> Result<Self> {
        Self::with_order(mu, quadrature_order(mu, n_max + 1), precision)
    }

    pub fn with_order(mu: &WeightSpec<T>, order: usize, precision: Precision) -> Result<Self> {
        let rule = gauss_jacobi_rule(order, mu.alpha())?;
        let alpha = mu.alpha();
        let a1 = alpha + T::one();
        let two = T::lit(2.0);
        let len = rule.order();
        let (mut log_u, mut m, mut phi1, mut phi2, mut phi3) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        for i in 0..len {
            let u = rule.nodes()[i];
            let v = rule.complements()[i];
            let r = u.sqrt();
            let (mi, m1, m2, g) = (mu.m(r), mu.m_prime(r), mu.m_second(r), mu.g(r));
            log_u.push((-v).ln_1p());
            m.push(mi);
            phi1.push(-r * m1 - two * alpha * u * g);
            phi2.push(r * m1 * v - two * a1 * u * mi);
            phi3.push(-m2 * v - two * a1 * (-two * r * m1 + g * v) + T::lit(4.0) * alpha * a1 * u * g);
        }
        Ok(Self {
            weight: mu.clone(),
            rule,
            log_u,
            m,
            phi1,
            phi2,
            phi3,
            precision,
        })
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    pub fn weight(&self) -> &WeightSpec<T> {
        &self.weight
    }

    fn powers(&self, n: usize) -> Vec<T> {
        let nf = T::from_usize_exact(n);
        self.log_u.iter().map(|&l| (nf * l).exp()).collect()
    }

    /// ½ Σ ω_i pow_i φ_i.
    fn integral(&self, pow: &[T], phi: Option<&[T]>) -> T {
        let w = self.rule.weights();
        let s = match phi {
            Some(phi) => dot(self.precision, (0..w.len()).map(|i| (w[i], pow[i] * phi[i]))),
            None => dot(self.precision, (0..w.len()).map(|i| (w[i], pow[i]))),
        };
        T::lit(0.5) * s
    }

    pub fn quantities(&self, n: usize) -> Result<LemmaQuantities<T>> {
        if n == 0 {
            return Err(BergmanError::LemmaIndex);
        }
        let un = self.powers(n);
        let um = self.powers(n - 1);
        let mu_n = self.integral(&un, Some(&self.m));
        let mu_m = self.integral(&um, Some(&self.m));
        let (t_n, t_m) = if self.weight.is_jacobi() {
            (T::one(), T::one())
        } else {
            (self.integral(&un, None) / mu_n, self.integral(&um, None) / mu_m)
        };
        let a = mu_n * mu_m;
        let c1 = self.integral(&un, Some(&self.phi1));
        let c2 = self.integral(&um, Some(&self.phi2));
        let c3 = self.integral(&un, Some(&self.phi3));
        let c4 = mu_n;
        let nf = T::from_usize_exact(n);
        let two = T::lit(2.0);
        let delta_ibp = c1 * c2 / ((two * nf + two) * two * nf * a) - c3 * c4 / (two * nf * (two * nf + T::one()) * a);
        Ok(LemmaQuantities {
            n,
            a,
            c1,
            c2,
            c3,
            c4,
            delta_direct: t_n - t_m,
            delta_ibp,
            t: t_n,
        })
    }
}

pub fn lemma_quantities<T: Scalar>(mu: &WeightSpec<T>, n: usize) -> Result<LemmaQuantities<T>> {
    LemmaEngine::new(mu, n, Precision::Double)?.quantities(n)
}

/// One step of Richardson extrapolation for an O(1/n) approach: 2X(n) − X(n/2).
pub fn richardson<T: Scalar>(x_n: T, x_half: T) -> T {
    T::lit(2.0) * x_n - x_half
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow<T> {
    pub n: usize,
    pub t: T,
    pub scaled_delta: T,
    pub c12_over_a: T,
    pub c34_over_a: T,
}

/// Rows (n, t_n, n²Δt_n, C1C2/A, C3C4/A), with Δt_n from the stabilized form.
pub fn limit_convergence<T: Scalar>(mu: &WeightSpec<T>, ns: &[usize]) -> Result<Vec<LimitRow<T>>> {
    let n_max = ns.iter().copied().max().unwrap_or(1);
    let engine = LemmaEngine::new(mu, n_max, Precision::Double)?;
    ns.par_iter()
        .map(|&n| {
            let q = engine.quantities(n)?;
            let nf = T::from_usize_exact(n);
            Ok(LimitRow {
                n,
                t: q.t,
                scaled_delta: nf * nf * q.delta_ibp,
                c12_over_a: q.c12_over_a(),
                c34_over_a: q.c34_over_a(),
            })
        })
        .collect()
}

pub fn limit_rows_csv<T: Scalar>(rows: &[LimitRow<T>]) -> String {
    let mut out = String::from("n,t,n2_delta,c12_over_a,c34_over_a\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            sig17(r.t.to_f64_lossy()),
            sig17(r.scaled_delta.to_f64_lossy()),
            sig17(r.c12_over_a.to_f64_lossy()),
            sig17(r.c34_over_a.to_f64_lossy())
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMethod {
    Direct,
    IntegratedByParts,
}

impl DeltaMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            DeltaMethod::Direct => "direct",
            DeltaMethod::IntegratedByParts => "ibp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvReport<T> {
    pub weight: String,
    pub alpha: T,
    pub n_max: usize,
    pub t0: T,
    pub t_last: T,
    /// Δt_n for n = 1..=n_max with the method used.
    pub deltas: Vec<(T, DeltaMethod)>,
    /// max_n n²|Δt_n|.
    pub sup_scaled: T,
    /// max over n ≥ n_max/4.
    pub sup_scaled_tail: T,
    /// |t_0| + Σ|Δt_n|.
    pub bv_partial: T,
    /// Σ Δt_n, to compare with t_{n_max} − t_0.
    pub telescoped: T,
    pub limit_gap: T,
    /// Worst |direct − ibp| / max(|direct|, 1/n²) on the overlap window.
    pub cross_check: T,
    pub predicted: LemmaLimits<T>,
    pub order: usize,
}

impl<T: Scalar> BvReport<T> {
    pub fn scaled(&self) -> Vec<T> {
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, (d, _))| {
                let n = T::from_usize_exact(i + 1);
                n * n * *d
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let f = |x: T| json_num(x.to_f64_lossy());
        json!({
            "weight": self.weight,
            "alpha": f(self.alpha),
            "n_max": self.n_max,
            "quadrature_order": self.order,
            "predicted": self.predicted.to_json(),
            "observed": {
                "sup_scaled": f(self.sup_scaled),
                "sup_scaled_tail": f(self.sup_scaled_tail),
                "bv_partial": f(self.bv_partial),
                "telescoped": f(self.telescoped),
                "t0": f(self.t0),
                "t_n_max": f(self.t_last),
                "limit_gap": f(self.limit_gap),
                "cross_check": f(self.cross_check),
            },
        })
    }

    /// `n,delta,n2_delta,method` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,delta,n2_delta,method\n");
        for (i, ((d, m), s)) in self.deltas.iter().zip(self.scaled()).enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                sig17(d.to_f64_lossy()),
                sig17(s.to_f64_lossy()),
                m.tag()
            ));
        }
        out
    }
}

pub fn bv_report<T: Scalar>(mu: &WeightSpec<T>, n_max: usize) -> Result<BvReport<T>> {
    let engine = LemmaEngine::new(mu, n_max, Precision::Double)?;
    bv_report_with(&engine, n_max)
}

/// Direct differences up to the crossover, stabilized ones above, after
/// checking that both agree on the overlap window.
pub fn bv_report_with<T: Scalar>(engine: &LemmaEngine<T>, n_max: usize) -> Result<BvReport<T>> {
    if n_max < 16 {
        return Err(BergmanError::InvalidArgument(format!("bv_report needs n_max >= 16, got {n_max}")));
    }
    let mu = engine.weight();
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| engine.quantities(n))
        .collect::<Result<Vec<_>>>()?;
    let tol = T::lit(CROSS_TOLERANCE);
    let mut cross_check = T::zero();
    for q in rows.iter().filter(|q| q.n >= OVERLAP.0 && q.n <= OVERLAP.1) {
        let nf = T::from_usize_exact(q.n);
        let scale = q.delta_direct.abs().max((nf * nf).recip());
        let err = (q.delta_direct - q.delta_ibp).abs() / scale;
        cross_check = cross_check.max(err);
        if !(err <= tol) {
            return Err(BergmanError::CrossValidation {
                n: q.n,
                direct: q.delta_direct.to_f64_lossy(),
                ibp: q.delta_ibp.to_f64_lossy(),
            });
        }
    }
    let deltas: Vec<(T, DeltaMethod)> = rows
        .iter()
        .map(|q| {
            if q.n <= DIRECT_CROSSOVER {
                (q.delta_direct, DeltaMethod::Direct)
            } else {
                (q.delta_ibp, DeltaMethod::IntegratedByParts)
            }
        })
        .collect();
    let t0 = engine_t0(engine);
    let t_last = rows.last().expect("n_max >= 16").t;
    let mut sup = T::zero();
    let mut sup_tail = T::zero();
    for (i, (d, _)) in deltas.iter().enumerate() {
        let n = i + 1;
        let nf = T::from_usize_exact(n);
        let s = nf * nf * d.abs();
        sup = sup.max(s);
        if 4 * n >= n_max {
            sup_tail = sup_tail.max(s);
        }
    }
    let bv_partial = t0.abs() + crate::sum::sum(Precision::Double, deltas.iter().map(|(d, _)| d.abs()));
    let telescoped = crate::sum::sum(Precision::Double, deltas.iter().map(|(d, _)| *d));
    Ok(BvReport {
        weight: mu.label().to_string(),
        alpha: mu.alpha(),
        n_max,
        t0,
        t_last,
        deltas,
        sup_scaled: sup,
        sup_scaled_tail: sup_tail,
        bv_partial,
        telescoped,
        limit_gap: (t_last - mu.m(T::one()).recip()).abs(),
        cross_check,
        predicted: lemma_limits(mu),
        order: engine.order(),
    })
}

fn engine_t0<T: Scalar>(engine: &LemmaEngine<T>) -> T {
    if engine.weight.is_jacobi() {
        return T::one();
    }
    let u0 = engine.powers(0);
    engine.integral(&u0, None) / engine.integral(&u0, Some(&engine.m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpnormRow<T> {
    pub f: String,
    pub norm_f: T,
    pub norm_projected: T,
    pub ratio: T,
}

#[derive(Debug, Clone)]
pub struct OpnormTable<T> {
    pub weight: String,
    pub p: T,
    pub degree: usize,
    pub rows: Vec<OpnormRow<T>>,
    /// Battery members left out by the L^p guard, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl<T: Scalar> OpnormTable<T> {
    pub fn max_ratio(&self) -> T {
        self.rows.iter().map(|r| r.ratio).fold(T::zero(), T::max)
    }

    pub fn ratio_of(&self, f: &str) -> Option<T> {
        self.rows.iter().find(|r| r.f == f).map(|r| r.ratio)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("f,p,norm_f,norm_projected,ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.f,
                sig17(self.p.to_f64_lossy()),
                sig17(r.norm_f.to_f64_lossy()),
                sig17(r.norm_projected.to_f64_lossy()),
                sig17(r.ratio.to_f64_lossy())
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "f": r.f,
                    "norm_f": json_num(r.norm_f.to_f64_lossy()),
                    "norm_projected": json_num(r.norm_projected.to_f64_lossy()),
                    "ratio": json_num(r.ratio.to_f64_lossy()),
                })
            })
            .collect();
        let skipped: Vec<Value> = self.skipped.iter().map(|(f, why)| json!({"f": f, "reason": why})).collect();
        json!({
            "weight": self.weight,
            "p": json_num(self.p.to_f64_lossy()),
            "N": self.degree,
            "max_ratio": json_num(self.max_ratio().to_f64_lossy()),
            "rows": rows,
            "skipped": skipped,
        })
    }
}

/// ‖B_μ f‖_p / ‖f‖_p for each battery member; members outside L^p(μ) are an error.
pub fn opnorm_experiment<T: Scalar>(
    mu: &WeightSpec<T>,
    p: T,
    battery: &[FnSpec<T>],
    grid: &Arc<PolarGrid<T>>,
    degree: usize,
) -> Result<OpnormTable<T>> {
    if battery.is_empty() {
        return Err(BergmanError::InvalidArgument("empty battery".into()));
    }
    for f in battery {
        f.lp_guard(p, mu.alpha(), T::lit(OPNORM_GUARD_MARGIN))?;
    }
    Ok(opnorm_sweep(mu, &[p], battery, grid, degree)?.remove(0))
}

/// One table per exponent; each member is projected once and measured for
/// every p it passes the guard for.
pub fn opnorm_sweep<T: Scalar>(
    mu: &WeightSpec<T>,
    ps: &[T],
    battery: &[FnSpec<T>],
    grid: &Arc<PolarGrid<T>>,
    degree: usize,
) -> Result<Vec<OpnormTable<T>>> {
    let projector = Projector::new(grid, mu, degree)?;
    let margin = T::lit(OPNORM_GUARD_MARGIN);
    let mut tables: Vec<OpnormTable<T>> = ps
        .iter()
        .map(|&p| OpnormTable {
            weight: mu.label().to_string(),
            p,
            degree,
            rows: Vec::new(),
            skipped: Vec::new(),
        })
        .collect();
    for f in battery {
        let wanted: Vec<usize> = (0..ps.len())
            .filter(|&e| match f.lp_guard(ps[e], mu.alpha(), margin) {
                Ok(()) => true,
                Err(err) => {
                    tables[e].skipped.push((f.to_string(), err.to_string()));
                    false
                }
            })
            .collect();
        if wanted.is_empty() {
            continue;
        }
        let samples = sample(f, grid)?;
        let projected = projector.apply(&samples)?.eval_on_grid(grid);
        for e in wanted {
            let p = ps[e];
            let norm_f = samples.lp_norm(p, mu)?;
            let norm_projected = projected.lp_norm(p, mu)?;
            tables[e].rows.push(OpnormRow {
                f: f.to_string(),
                norm_f,
                norm_projected,
                ratio: norm_projected / norm_f,
            });
        }
    }
    Ok(tables)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnRow<T> {
    pub n: usize,
    /// ‖S_N f‖ / ‖f‖.
    pub ratio: T,
    /// ‖S_N f − f‖.
    pub error: T,
}

/// N = 1, 2, 4, … up to n_max, with n_max itself appended if it is not a power of two.
pub fn dyadic_degrees(n_max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = std::iter::successors(Some(1usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= n_max)
        .collect();
    if n_max >= 1 && ns.last() != Some(&n_max) {
        ns.push(n_max);
    }
    ns
}

fn sn_guard<T: Scalar>(w: &WeightSpec<T>, p: T, f: &FnSpec<T>) -> Result<()> {
    match f {
        FnSpec::Sing(s) => {
            let limit = (T::lit(2.0) + w.alpha()) / p;
            if *s < limit {
                Ok(())
            } else {
                Err(BergmanError::NotInLp(
                    f.to_string(),
                    p.to_f64_lossy(),
                    format!("s < {}", limit.to_f64_lossy()),
                ))
            }
        }
        FnSpec::HoloPoly(_) | FnSpec::LogSing => Ok(()),
        FnSpec::Mono { k: 0, m } if *m >= 0 => Ok(()),
        FnSpec::Mono { .. } => Err(BergmanError::NoTaylorSequence(f.to_string())),
    }
}

/// Rows (N, ‖S_N f‖/‖f‖, ‖S_N f − f‖) for N = 1, 2, 4, …, n_max.
pub fn sn_experiment<T: Scalar>(
    w: &WeightSpec<T>,
    p: T,
    f: &FnSpec<T>,
    n_max: usize,
    grid: &PolarGrid<T>,
) -> Result<Vec<SnRow<T>>> {
    Ok(sn_sweep(w, &[p], f, &dyadic_degrees(n_max), grid)?.remove(0))
}

/// `sn_experiment` for several exponents and explicit degrees, in one pass
/// over the grid rings; S_N is evaluated per ring by an inverse FFT of the
/// analytic coefficients.
pub fn sn_sweep<T: Scalar>(
    w: &WeightSpec<T>,
    ps: &[T],
    f: &FnSpec<T>,
    ns: &[usize],
    grid: &PolarGrid<T>,
) -> Result<Vec<Vec<SnRow<T>>>> {
    for &p in ps {
        sn_guard(w, p, f)?;
    }
    let top = ns.iter().copied().max().unwrap_or(0);
    let taylor = f.taylor(top)?;
    let partials: Vec<_> = ns.iter().map(|&n| taylor.partial_sum(n)).collect();
    let k = grid.angular_count();
    let signals = 1 + 2 * ns.len();
    let sums = crate::funcspace::stream_power_sums(grid, w, ps, signals, |j, r, bufs, fft| {
        for kk in 0..k {
            bufs[0][kk] = f.eval(grid.point(j, kk));
        }
        let (fbuf, rest) = bufs.split_at_mut(1);
        for (s, pair) in partials.iter().zip(rest.chunks_mut(2)) {
            let (sn, diff) = pair.split_at_mut(1);
            s.ring_values(r, fft, &mut sn[0]);
            for kk in 0..k {
                diff[0][kk] = sn[0][kk] - fbuf[0][kk];
            }
        }
    })?;
    Ok(ps
        .iter()
        .enumerate()
        .map(|(e, &p)| {
            let inv = p.recip();
            let norm_f = sums[0][e].powf(inv);
            ns.iter()
                .enumerate()
                .map(|(i, &n)| SnRow {
                    n,
                    ratio: sums[1 + 2 * i][e].powf(inv) / norm_f,
                    error: sums[2 + 2 * i][e].powf(inv),
                })
                .collect()
        })
        .collect())
}

pub fn sn_rows_csv<T: Scalar>(p: T, rows: &[SnRow<T>]) -> String {
    let mut out = String::from("N,p,ratio,error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            sig17(p.to_f64_lossy()),
            sig17(r.ratio.to_f64_lossy()),
            sig17(r.error.to_f64_lossy())
        ));
    }
    out
}

/// ‖g‖_p for a grid function given as a closure, for callers that do not
/// want to keep the samples.
pub fn grid_norm<T, F>(grid: &Arc<PolarGrid<T>>, w: &WeightSpec<T>, p: T, f: F) -> Result<T>
where
    T: Scalar,
    F: Fn(Complex<T>) -> Complex<T> + Sync,
{
    GridFunction::from_fn(grid, f).lp_norm(p, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::parse_fn;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn poly() -> WeightSpec<f64> {
        WeightSpec::poly_r2(0.0, &[2.0, -1.0]).unwrap()
    }

    fn registry() -> Vec<WeightSpec<f64>> {
        vec![
            poly(),
            WeightSpec::poly_r2(1.0, &[2.0, -1.0]).unwrap(),
            WeightSpec::exp_r2(0.5, 1.0).unwrap(),
            WeightSpec::exp_r2(1.0, 1.0).unwrap(),
            WeightSpec::exp_r2(-0.5, 2.0).unwrap(),
            WeightSpec::poly_r2(-0.7, &[0.5, 0.25, 0.25]).unwrap(),
        ]
    }

    #[test]
    fn jacobi_weight_has_constant_multiplier() {
        let q = lemma_quantities(&WeightSpec::<f64>::lambda(0.7).unwrap(), 12).unwrap();
        assert_eq!(q.c1, 0.0);
        assert_eq!(q.c3, 0.0);
        assert_eq!(q.delta_ibp, 0.0);
        assert_eq!(q.t, 1.0);
        assert!(lemma_quantities(&poly(), 0).is_err());
    }

    #[test]
    fn closed_form_difference() {
        let q = lemma_quantities(&poly(), 10).unwrap();
        assert_relative_eq!(q.delta_ibp, 1.0 / 156.0, max_relative = 1e-12);
        assert!((q.delta_direct - q.delta_ibp).abs() <= 1e-10);
        assert_relative_eq!(q.c4, 13.0 / (2.0 * 11.0 * 12.0), max_relative = 1e-14);
        assert_relative_eq!(q.t, 12.0 / 13.0, max_relative = 1e-14);
    }

    #[test]
    fn limits() {
        let l = lemma_limits(&poly());
        assert_eq!((l.l12, l.l34, l.delta_inf), (-4.0, -8.0, 1.0));
        let one = lemma_limits(&WeightSpec::<f64>::lambda(0.3).unwrap());
        assert_eq!((one.l12, one.l34, one.delta_inf), (0.0, 0.0, 0.0));
        let e = lemma_limits(&WeightSpec::<f64>::exp_r2(1.0, 1.0).unwrap());
        assert_relative_eq!(e.l12, 16.0, max_relative = 1e-15);
        assert_relative_eq!(e.l34, 24.0, max_relative = 1e-15);
        assert_relative_eq!(e.delta_inf, -2.0, max_relative = 1e-15);
    }

    #[test]
    fn methods_agree_for_moderate_n() {
        for w in registry() {
            let engine = LemmaEngine::new(&w, 100, Precision::Double).unwrap();
            for n in 8..=100 {
                let q = engine.quantities(n).unwrap();
                let scale = q.delta_direct.abs().max(1.0 / (n * n) as f64);
                assert!((q.delta_direct - q.delta_ibp).abs() <= 1e-6 * scale, "{w} n={n}");
            }
        }
    }

    #[test]
    fn convergence_table() {
        let rows = limit_convergence(&poly(), &[1000]).unwrap();
        assert_relative_eq!(rows[0].t, 1002.0 / 1003.0, max_relative = 1e-13);
        assert!((rows[0].scaled_delta - 1.0).abs() <= 6e-3);
        let one = limit_convergence(&WeightSpec::<f64>::lambda(0.0).unwrap(), &[10, 100]).unwrap();
        for r in one {
            assert_eq!((r.t, r.scaled_delta, r.c12_over_a, r.c34_over_a), (1.0, 0.0, 0.0, 0.0));
        }
        let mu = WeightSpec::<f64>::exp_r2(0.5, 1.0).unwrap();
        let l = lemma_limits(&mu);
        let rows = limit_convergence(&mu, &[1250, 2500, 5000]).unwrap();
        assert!((rows[2].c12_over_a - l.l12).abs() / l.l12.abs() <= 0.01);
        let extrapolated = richardson(rows[2].c12_over_a, rows[1].c12_over_a);
        assert!((extrapolated - l.l12).abs() < (rows[2].c12_over_a - l.l12).abs());
    }

    #[test]
    fn gaps_shrink_monotonically_over_dyadic_n() {
        for w in registry() {
            let l = lemma_limits(&w);
            let ns = [256, 512, 1024, 2048];
            let rows = limit_convergence(&w, &ns).unwrap();
            for pair in rows.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                assert!((b.t - 1.0).abs() < (a.t - 1.0).abs(), "{w}");
                assert!((b.c12_over_a - l.l12).abs() < (a.c12_over_a - l.l12).abs(), "{w}");
                assert!((b.c34_over_a - l.l34).abs() < (a.c34_over_a - l.l34).abs(), "{w}");
            }
        }
    }

    #[test]
    fn bv_report_on_closed_form_weight() {
        let r = bv_report(&poly(), 2000).unwrap();
        assert!(r.sup_scaled <= 1.01);
        let expect = 2.0 / 3.0 + 1.0 / 3.0 - 1.0 / 2003.0;
        assert_relative_eq!(r.bv_partial, expect, max_relative = 1e-12);
        assert!((r.telescoped - (2002.0 / 2003.0 - 2.0 / 3.0)).abs() <= 1e-12);
        assert_eq!(r.deltas[99].1, DeltaMethod::Direct);
        assert_eq!(r.deltas[100].1, DeltaMethod::IntegratedByParts);
        assert_eq!(r.to_csv().lines().count(), 2001);
        let json = r.to_json();
        assert_eq!(json["n_max"], 2000);
    }

    #[test]
    fn bv_report_for_jacobi_weight() {
        let r = bv_report(&WeightSpec::<f64>::lambda(0.0).unwrap(), 64).unwrap();
        assert_eq!(r.sup_scaled, 0.0);
        assert_eq!(r.bv_partial, 1.0);
        assert!(bv_report(&poly(), 8).is_err());
    }

    #[test]
    fn scaled_differences_stay_bounded() {
        for w in registry() {
            let r = bv_report(&w, 2000).unwrap();
            let bound = 2.0 * (r.predicted.delta_inf.abs() + 1.0);
            assert!(r.sup_scaled <= bound, "{w}: {} > {bound}", r.sup_scaled);
        }
        let e = bv_report(&WeightSpec::<f64>::exp_r2(1.0, 1.0).unwrap(), 2000).unwrap();
        assert!((e.sup_scaled_tail - 2.0).abs() <= 0.2);
    }

    #[test]
    fn partial_sum_error_for_logsing() {
        let w = WeightSpec::<f64>::lambda(0.0).unwrap();
        let grid = PolarGrid::new(0.0, 512, 2048).unwrap();
        let rows = sn_sweep(&w, &[2.0], &FnSpec::LogSing, &[8, 16], &grid).unwrap();
        for r in &rows[0] {
            let exact: f64 = PI * ((r.n + 1)..2_000_000).map(|k| 1.0 / ((k * k) as f64 * (k + 1) as f64)).sum::<f64>();
            assert!((r.error.powi(2) - exact).abs() / exact <= 0.05, "{} vs {}", r.error.powi(2), exact);
        }
    }

    #[test]
    fn partial_sums_of_polynomials_are_exact() {
        let w = poly();
        let grid = PolarGrid::new(0.0, 32, 64).unwrap();
        let f = parse_fn("holo-poly:1,2,-1").unwrap();
        let rows = sn_experiment(&w, 3.0, &f, 8, &grid).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 2, 4, 8]);
        for r in rows.iter().filter(|r| r.n >= 2) {
            assert_relative_eq!(r.ratio, 1.0, max_relative = 1e-13);
            assert!(r.error <= 1e-13);
        }
        assert!(sn_experiment(&w, 3.0, &FnSpec::Sing(0.7), 8, &grid).is_err());
        assert!(sn_experiment(&w, 3.0, &parse_fn("mono:1,0").unwrap(), 8, &grid).is_err());
    }

    #[test]
    fn dyadic_sequence() {
        assert_eq!(dyadic_degrees(8), vec![1, 2, 4, 8]);
        assert_eq!(dyadic_degrees(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(dyadic_degrees(1), vec![1]);
    }

    #[test]
    fn opnorm_basic_members() {
        let w = poly();
        let grid = Arc::new(PolarGrid::new(0.0, 64, 128).unwrap());
        let battery: Vec<FnSpec<f64>> = ["holo-poly:1,-1,0.5", "mono:0,-1", "mono:2,1", "sing:0.5", "logsing"]
            .iter()
            .map(|s| parse_fn(s).unwrap())
            .collect();
        let t = opnorm_experiment(&w, 3.0, &battery, &grid, 40).unwrap();
        assert_relative_eq!(t.ratio_of("holo-poly:1,-1,0.5").unwrap(), 1.0, max_relative = 1e-12);
        assert!(t.ratio_of("mono:0,-1").unwrap() <= 1e-14);
        assert!(t.max_ratio() <= 10.0);
        assert!(opnorm_experiment(&w, 4.0, &battery, &grid, 40).is_err());
        let sweep = opnorm_sweep(&w, &[2.0, 4.0], &battery, &grid, 40).unwrap();
        assert_eq!(sweep[1].skipped.len(), 1);
        assert_eq!(sweep[0].rows.len(), 5);
    }
}
