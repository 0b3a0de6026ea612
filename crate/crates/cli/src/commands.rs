//! One function per subcommand. Each builds its artifact in memory, writes
//! it once, and reports whether the command's check passed.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use bergman_core::acceptance::{report_json, run_criterion, CRITERIA, OPNORM_BATTERY};
use bergman_core::analysis::{bv_report, lemma_limits, limit_convergence, opnorm_sweep, richardson, sn_sweep};
use bergman_core::analysis::{dyadic_degrees, sn_rows_csv};
use bergman_core::format::{json_complex, json_num, sig17};
use bergman_core::funcspace::{eval_taylor, parse_fn, sample, FnSpec, PolarGrid};
use bergman_core::kernel::{eval_kernel_closed, KernelSeries};
use bergman_core::moments::MomentTable;
use bergman_core::projector::{default_degree, project, project_via_identity, MultiplierSeq};
use bergman_core::{Complex64, FnSpecF64};
use serde_json::{json, Value};

use crate::config::{Defaults, Format, PartialConfig, RunConfig, OUTPUT_DIR_ENV};
use crate::{Command, Failure};

struct Artifact {
    text: String,
    pass: bool,
    message: String,
}

impl Artifact {
    fn new(text: String, pass: bool, message: impl Into<String>) -> Self {
        Self {
            text,
            pass,
            message: message.into(),
        }
    }
}

fn defaults(command: &Command) -> Defaults {
    let (n_max, p, tol, format) = match command {
        Command::Moments | Command::Coeffs => (100, vec![2.0], 1e-12, Format::Csv),
        Command::Kernel { .. } => (1, vec![2.0], 1e-10, Format::Csv),
        Command::Project { .. } => (1, vec![2.0], 1e-11, Format::Json),
        Command::IdentityCheck { .. } => (1, vec![2.0], 1e-8, Format::Json),
        Command::Bv => (2000, vec![2.0], 1e-6, Format::Json),
        Command::Limits { .. } => (1, vec![2.0], 1e-2, Format::Csv),
        Command::Opnorm { .. } => (1, vec![1.5, 2.0, 3.0, 4.0], 1e-12, Format::Csv),
        Command::Sn { .. } => (1, vec![2.0], 1e-12, Format::Csv),
        Command::Report { .. } => (1, vec![2.0], 1e-12, Format::Json),
    };
    Defaults { n_max, p, tol, format }
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::Moments => "moments",
        Command::Coeffs => "coeffs",
        Command::Kernel { .. } => "kernel",
        Command::Project { .. } => "project",
        Command::IdentityCheck { .. } => "identity-check",
        Command::Bv => "bv",
        Command::Limits { .. } => "limits",
        Command::Opnorm { .. } => "opnorm",
        Command::Sn { .. } => "sn",
        Command::Report { .. } => "report",
    }
}

pub fn run(command: &Command, partial: PartialConfig) -> std::result::Result<(), Failure> {
    let cfg = RunConfig::resolve(partial, defaults(command))?;
    let artifact = match command {
        Command::Moments => moments(&cfg)?,
        Command::Coeffs => coeffs(&cfg)?,
        Command::Kernel { z, w } => kernel(&cfg, z, w)?,
        Command::Project { f, degree } => project_cmd(&cfg, f, *degree)?,
        Command::IdentityCheck { f, degree } => identity(&cfg, f, *degree)?,
        Command::Bv => bv(&cfg)?,
        Command::Limits { ns } => limits(&cfg, ns.as_deref())?,
        Command::Opnorm { f, degree } => opnorm(&cfg, f.as_deref(), *degree)?,
        Command::Sn { f, degree } => sn(&cfg, f, *degree)?,
        Command::Report { only } => report(&cfg, only.as_deref())?,
    };
    write(&cfg, name(command), &artifact.text).map_err(Failure::Usage)?;
    if artifact.pass {
        Ok(())
    } else {
        Err(Failure::Check(artifact.message))
    }
}

fn write(cfg: &RunConfig, command: &str, text: &str) -> Result<()> {
    let path: Option<PathBuf> = match (&cfg.output, std::env::var_os(OUTPUT_DIR_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(format!("{command}.{}", cfg.format.extension()))),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing to stdout")
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn num(x: f64) -> Value {
    json_num(x)
}

fn grid(cfg: &RunConfig) -> Result<Arc<PolarGrid<f64>>> {
    Ok(Arc::new(PolarGrid::for_weight(&cfg.weight, cfg.radial, cfg.angular)?))
}

fn fn_spec(text: &str) -> Result<FnSpecF64> {
    Ok(parse_fn(text)?)
}

fn degree_or_default(g: &PolarGrid<f64>, degree: Option<usize>) -> usize {
    degree.unwrap_or_else(|| default_degree(g))
}

fn moments(cfg: &RunConfig) -> Result<Artifact> {
    let table = MomentTable::build(&cfg.weight, cfg.n_max, cfg.precision)?;
    let bad = table.violations_with(cfg.tol);
    let pass = bad.is_empty();
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,I_n,err,order\n");
            for e in table.entries() {
                s.push_str(&format!("{},{},{},{}\n", e.n, sig17(e.value), sig17(e.err), e.order));
            }
            s
        }
        Format::Json => {
            let mut v = table.to_json();
            v["pass"] = json!(pass);
            json_text(&v)
        }
    };
    Ok(Artifact::new(text, pass, format!("moment checks fail at n = {bad:?}")))
}

fn coeffs(cfg: &RunConfig) -> Result<Artifact> {
    let table = MomentTable::build(&cfg.weight, cfg.n_max, cfg.precision)?;
    let seq = MultiplierSeq::build(&cfg.weight, cfg.n_max, cfg.precision)?;
    let bad = table.violations_with(cfg.tol);
    let b = table.coeffs();
    let pass = bad.is_empty() && b.iter().all(|&x| x > 0.0 && x.is_finite());
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,b_n,t_n\n");
            for n in 0..=cfg.n_max {
                s.push_str(&format!("{n},{},{}\n", sig17(b[n]), sig17(seq.get(n))));
            }
            s
        }
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "n_max": cfg.n_max,
            "coeffs": (0..=cfg.n_max).map(|n| json!([n, num(b[n]), num(seq.get(n))])).collect::<Vec<_>>(),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(text, pass, format!("coefficient checks fail at n = {bad:?}")))
}

fn complex(text: &str) -> Result<Complex64> {
    text.trim()
        .parse::<Complex64>()
        .map_err(|_| anyhow!("`{text}` is not a complex number (use e.g. 0.3-0.2i)"))
}

fn kernel(cfg: &RunConfig, z: &str, w: &str) -> Result<Artifact> {
    let (z, w) = (complex(z)?, complex(w)?);
    let rho = z.norm() * w.norm();
    let series = KernelSeries::for_radius(&cfg.weight, rho, cfg.tol)?;
    let value = series.eval(z, w)?;
    let closed = if cfg.weight.is_jacobi() {
        Some(eval_kernel_closed(cfg.weight.alpha(), z, w)?)
    } else {
        None
    };
    let (abs_err, rel_err) = match closed {
        Some(c) => ((value - c).norm(), (value - c).norm() / c.norm()),
        None => (f64::NAN, f64::NAN),
    };
    let pass = closed.map_or(true, |c| abs_err <= cfg.tol + 1e-12 * c.norm());
    let opt = |x: Option<f64>| x.map(sig17).unwrap_or_default();
    let text = match cfg.format {
        Format::Csv => format!(
            "z_re,z_im,w_re,w_im,N,series_re,series_im,closed_re,closed_im,abs_err,rel_err\n{},{},{},{},{},{},{},{},{},{},{}\n",
            sig17(z.re),
            sig17(z.im),
            sig17(w.re),
            sig17(w.im),
            series.degree(),
            sig17(value.re),
            sig17(value.im),
            opt(closed.map(|c| c.re)),
            opt(closed.map(|c| c.im)),
            opt(closed.map(|_| abs_err)),
            opt(closed.map(|_| rel_err)),
        ),
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "z": json_complex(z.re, z.im),
            "w": json_complex(w.re, w.im),
            "N": series.degree(),
            "series": json_complex(value.re, value.im),
            "closed": closed.map(|c| json_complex(c.re, c.im)),
            "abs_err": num(abs_err),
            "rel_err": num(rel_err),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(text, pass, format!("series differs from the closed form by {abs_err:e}")))
}

fn coeff_csv(c: &bergman_core::TaylorCoeffsF64) -> String {
    let mut s = String::from("n,re,im\n");
    for (n, x) in c.coeffs().iter().enumerate() {
        s.push_str(&format!("{n},{},{}\n", sig17(x.re), sig17(x.im)));
    }
    s
}

fn project_cmd(cfg: &RunConfig, f: &str, degree: Option<usize>) -> Result<Artifact> {
    let g = grid(cfg)?;
    let n = degree_or_default(&g, degree);
    let spec = fn_spec(f)?;
    let c = project(&sample(&spec, &g)?, &cfg.weight, n)?;
    let again = project(&eval_taylor(&c, &g), &cfg.weight, n)?;
    let residual = c.max_abs_diff(&again);
    let pass = residual <= cfg.tol;
    let text = match cfg.format {
        Format::Csv => coeff_csv(&c),
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "f": spec.to_string(),
            "N": n,
            "grid": [cfg.radial, cfg.angular],
            "coeffs": c.to_json(),
            "idempotence_residual": num(residual),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(text, pass, format!("idempotence residual {residual:e} exceeds {}", cfg.tol)))
}

fn identity(cfg: &RunConfig, f: &str, degree: Option<usize>) -> Result<Artifact> {
    let g = grid(cfg)?;
    let n = degree_or_default(&g, degree);
    let spec = fn_spec(f)?;
    let samples = sample(&spec, &g)?;
    let direct = project(&samples, &cfg.weight, n)?;
    let via = project_via_identity(&samples, &cfg.weight, n)?;
    let residual = direct.max_abs_diff(&via);
    let pass = residual <= cfg.tol;
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,direct_re,direct_im,identity_re,identity_im\n");
            for (k, (a, b)) in direct.coeffs().iter().zip(via.coeffs()).enumerate() {
                s.push_str(&format!("{k},{},{},{},{}\n", sig17(a.re), sig17(a.im), sig17(b.re), sig17(b.im)));
            }
            s
        }
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "f": spec.to_string(),
            "N": n,
            "grid": [cfg.radial, cfg.angular],
            "direct": direct.to_json(),
            "identity": via.to_json(),
            "residual": num(residual),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(text, pass, format!("identity residual {residual:e} exceeds {}", cfg.tol)))
}

fn bv(cfg: &RunConfig) -> Result<Artifact> {
    let r = bv_report(&cfg.weight, cfg.n_max)?;
    let bound = 2.0 * (r.predicted.delta_inf.abs() + 1.0);
    let pass = r.cross_check <= cfg.tol && r.sup_scaled.is_finite() && r.sup_scaled <= bound;
    let text = match cfg.format {
        Format::Csv => r.to_csv(),
        Format::Json => {
            let mut v = r.to_json();
            v["pass"] = json!(pass);
            json_text(&v)
        }
    };
    Ok(Artifact::new(
        text,
        pass,
        format!(
            "cross-check {:e} (tol {}), sup n^2|dt_n| = {} (bound {bound})",
            r.cross_check, cfg.tol, r.sup_scaled
        ),
    ))
}

fn limits(cfg: &RunConfig, ns: Option<&[usize]>) -> Result<Artifact> {
    let ns: Vec<usize> = ns.map(<[usize]>::to_vec).unwrap_or_else(|| vec![256, 512, 1024, 2048, 4096]);
    if ns.is_empty() || ns.iter().any(|&n| n < 2) || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(anyhow!("--ns must be increasing integers >= 2"));
    }
    let all: BTreeSet<usize> = ns.iter().flat_map(|&n| [n, n / 2]).collect();
    let all: Vec<usize> = all.into_iter().collect();
    let rows = limit_convergence(&cfg.weight, &all)?;
    let at = |n: usize| rows.iter().find(|r| r.n == n).expect("row computed");
    let l = lemma_limits(&cfg.weight);
    let gap = |x: f64, target: f64| if target == 0.0 { x.abs() } else { (x - target).abs() / target.abs() };
    let last = *ns.last().expect("non-empty");
    let (r, h) = (at(last), at(last / 2));
    let e12 = gap(richardson(r.c12_over_a, h.c12_over_a), l.l12);
    let e34 = gap(richardson(r.c34_over_a, h.c34_over_a), l.l34);
    let pass = e12 <= cfg.tol && e34 <= cfg.tol;
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,t,n2_delta,c12_over_a,c34_over_a,c12_richardson,c34_richardson\n");
            for &n in &ns {
                let (r, h) = (at(n), at(n / 2));
                s.push_str(&format!(
                    "{n},{},{},{},{},{},{}\n",
                    sig17(r.t),
                    sig17(r.scaled_delta),
                    sig17(r.c12_over_a),
                    sig17(r.c34_over_a),
                    sig17(richardson(r.c12_over_a, h.c12_over_a)),
                    sig17(richardson(r.c34_over_a, h.c34_over_a)),
                ));
            }
            s
        }
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "alpha": num(cfg.weight.alpha()),
            "predicted": {
                "limit_t": num(1.0 / cfg.weight.m(1.0)),
                "L12": num(l.l12), "L34": num(l.l34), "delta_inf": num(l.delta_inf),
            },
            "observed": ns.iter().map(|&n| {
                let (r, h) = (at(n), at(n / 2));
                json!({
                    "n": n, "t": num(r.t), "n2_delta": num(r.scaled_delta),
                    "c12_over_a": num(r.c12_over_a), "c34_over_a": num(r.c34_over_a),
                    "c12_richardson": num(richardson(r.c12_over_a, h.c12_over_a)),
                    "c34_richardson": num(richardson(r.c34_over_a, h.c34_over_a)),
                })
            }).collect::<Vec<_>>(),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(
        text,
        pass,
        format!("extrapolated limits off by {e12:e} and {e34:e} (tol {})", cfg.tol),
    ))
}

fn opnorm(cfg: &RunConfig, battery: Option<&[String]>, degree: Option<usize>) -> Result<Artifact> {
    let g = grid(cfg)?;
    let n = degree_or_default(&g, degree);
    let specs: Vec<FnSpecF64> = match battery {
        Some(list) => list.iter().map(|s| fn_spec(s)).collect::<Result<_>>()?,
        None => OPNORM_BATTERY.iter().map(|s| fn_spec(s)).collect::<Result<_>>()?,
    };
    let tables = opnorm_sweep(&cfg.weight, &cfg.p, &specs, &g, n)?;
    let mut pass = true;
    for t in &tables {
        for (f, why) in &t.skipped {
            eprintln!("skipping {f} at p = {}: {why}", t.p);
        }
        for r in &t.rows {
            pass &= r.ratio.is_finite();
            // the projection fixes holomorphic polynomials
            if let Ok(FnSpec::HoloPoly(_)) = parse_fn::<f64>(&r.f) {
                pass &= (r.ratio - 1.0).abs() <= cfg.tol.max(1e-12);
            }
        }
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from("f,p,norm_f,norm_projected,ratio\n");
            for t in &tables {
                s.push_str(t.to_csv().split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
            }
            s
        }
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "grid": [cfg.radial, cfg.angular],
            "tables": tables.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(text, pass, "non-finite ratio or polynomial not reproduced"))
}

fn sn(cfg: &RunConfig, f: &str, degree: Option<usize>) -> Result<Artifact> {
    let g = PolarGrid::for_weight(&cfg.weight, cfg.radial, cfg.angular)?;
    let spec = fn_spec(f)?;
    let ns = dyadic_degrees(degree.unwrap_or(256));
    let tables = sn_sweep(&cfg.weight, &cfg.p, &spec, &ns, &g)?;
    let pass = tables.iter().flatten().all(|r| r.ratio.is_finite() && r.error.is_finite());
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from("N,p,ratio,error\n");
            for (&p, rows) in cfg.p.iter().zip(&tables) {
                s.push_str(sn_rows_csv(p, rows).split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
            }
            s
        }
        Format::Json => json_text(&json!({
            "weight": cfg.weight.label(),
            "f": spec.to_string(),
            "grid": [cfg.radial, cfg.angular],
            "tables": cfg.p.iter().zip(&tables).map(|(&p, rows)| json!({
                "p": num(p),
                "sup_ratio": num(rows.iter().map(|r| r.ratio).fold(0.0, f64::max)),
                "rows": rows.iter().map(|r| json!({"N": r.n, "ratio": num(r.ratio), "error": num(r.error)})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "pass": pass,
        })),
    };
    Ok(Artifact::new(text, pass, "non-finite partial-sum norm"))
}

fn report(cfg: &RunConfig, only: Option<&[u8]>) -> Result<Artifact> {
    let ids: Vec<u8> = match only {
        Some(list) => {
            for id in list {
                if !CRITERIA.iter().any(|(i, _)| i == id) {
                    return Err(anyhow!("no acceptance criterion {id}"));
                }
            }
            list.to_vec()
        }
        None => CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let results: Vec<_> = ids
        .iter()
        .map(|&id| {
            let r = run_criterion(id);
            eprintln!("{}", r.line());
            r
        })
        .collect();
    let doc = report_json(&results);
    let pass = results.iter().all(|r| r.pass);
    let failed: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let text = match cfg.format {
        Format::Json => json_text(&doc),
        Format::Csv => {
            let mut s = String::from("id,name,pass,summary\n");
            for r in &results {
                s.push_str(&format!("{},{},{},\"{}\"\n", r.id, r.name, r.pass, r.summary.replace('"', "'")));
            }
            s
        }
    };
    Ok(Artifact::new(text, pass, format!("acceptance criteria failed: {failed:?}")))
}
