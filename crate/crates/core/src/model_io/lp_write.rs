use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::loss::TangentSet;
use crate::selector::{Approx, SelectionProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportApprox {
    Quad,
    Pwl,
}

/// How `z_j = 0` forces `w_jk = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndicatorEncoding {
    /// `-M z_j <= w_jk <= M z_j`.
    BigM(f64),
    /// SOS1 on `{u_j, w_jk}` with `u_j + z_j = 1`.
    Sos1,
}

impl Default for IndicatorEncoding {
    fn default() -> Self {
        IndicatorEncoding::BigM(DEFAULT_BIG_M)
    }
}

pub const DEFAULT_BIG_M: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarNaming {
    /// `w_3_1`, `z_3`: 1-based feature and class indices.
    #[default]
    Indexed,
    /// `w_alcohol_1`, `z_alcohol`: sanitized feature names.
    FeatureNames,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpExportOptions {
    pub approx: ExportApprox,
    pub encoding: IndicatorEncoding,
    /// Falls back to the problem's tangent set when `None`.
    pub tangents: Option<TangentSet>,
    pub naming: VarNaming,
}

impl LpExportOptions {
    pub fn new(approx: ExportApprox) -> Self {
        Self {
            approx,
            encoding: IndicatorEncoding::default(),
            tangents: None,
            naming: VarNaming::default(),
        }
    }
}

/// Comment prefix carrying the objective constant, read back by
/// [`super::LpModel`].
pub const CONSTANT_TAG: &str = "objective constant:";

/// Prefix of every tangent constraint name.
pub const TANGENT_ROW_PREFIX: &str = "tan_";

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_alphabetic() => s,
        _ => format!("f{s}"),
    }
}

fn feature_tags(names: &[String], naming: VarNaming) -> Vec<String> {
    match naming {
        VarNaming::Indexed => (1..=names.len()).map(|j| j.to_string()).collect(),
        VarNaming::FeatureNames => {
            let mut seen = HashSet::new();
            names
                .iter()
                .enumerate()
                .map(|(j, n)| {
                    let mut tag = sanitize(n);
                    if !seen.insert(tag.clone()) {
                        tag = format!("{tag}_{}", j + 1);
                        seen.insert(tag.clone());
                    }
                    tag
                })
                .collect()
        }
    }
}

/// Appends ` + c name` / ` - c name`, dropping unit coefficients.
fn push_term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if coef == 0.0 {
        return;
    }
    let sign = if coef < 0.0 { "-" } else { "+" };
    let mag = coef.abs();
    if *first {
        if coef < 0.0 {
            out.push_str("- ");
        }
    } else {
        let _ = write!(out, " {sign} ");
    }
    if mag == 1.0 {
        out.push_str(name);
    } else {
        let _ = write!(out, "{mag} {name}");
    }
    *first = false;
}

/// Renders the mixed-integer model in CPLEX LP format.
pub fn export_lp_string(prob: &SelectionProblem<'_>, opts: &LpExportOptions) -> Result<String> {
    if let IndicatorEncoding::BigM(m) = opts.encoding {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidOption(format!("big-M must be positive, got {m}")));
        }
    }
    let tangents = match (opts.approx, &opts.tangents, prob.approx()) {
        (ExportApprox::Quad, _, _) => None,
        (ExportApprox::Pwl, Some(t), _) => Some(t),
        (ExportApprox::Pwl, None, Approx::Pwl(t)) => Some(t),
        (ExportApprox::Pwl, None, _) => {
            return Err(Error::InvalidOption("pwl export needs a tangent set".into()));
        }
    };
    if let Some(t) = tangents {
        if !t.has_sentinels() {
            return Err(Error::InvalidTangents("pwl export needs both -inf and +inf sentinels".into()));
        }
    }

    let data = prob.data();
    let enc = prob.encoding();
    let x = data.x();
    let (n, p, m) = (data.n(), data.p(), prob.m());
    let tags = feature_tags(data.feature_names(), opts.naming);
    let w = |j: usize, k: usize| format!("w_{}_{}", tags[j], k + 1);
    let z = |j: usize| format!("z_{}", tags[j]);
    let u = |j: usize| format!("u_{}", tags[j]);
    let b = |k: usize| format!("b_{}", k + 1);
    let t = |i: usize, k: usize| format!("t_{}_{}", i + 1, k + 1);
    let fm = prob.penalty() * m as f64;

    let mut constant = fm;
    if opts.approx == ExportApprox::Quad {
        constant += 2.0 * enc.active_pairs() as f64 * std::f64::consts::LN_2;
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ Subset selection for the sequential logit model ({}, {})",
        prob.direction().as_str(),
        prob.criterion().as_str()
    );
    let _ = writeln!(out, "\\ n = {n}, p = {p}, m = {m}, F = {}", prob.penalty());
    match (opts.approx, tangents) {
        (ExportApprox::Pwl, Some(ts)) => {
            let _ = writeln!(out, "\\ approximation: pwl with {} tangent lines", ts.len());
        }
        _ => {
            let _ = writeln!(out, "\\ approximation: quadratic expansion at 0");
        }
    }
    match opts.encoding {
        IndicatorEncoding::BigM(bm) => {
            let _ = writeln!(out, "\\ indicators: big-M = {bm}; this confines |w_jk| <= {bm}, unlike SOS1");
        }
        IndicatorEncoding::Sos1 => {
            let _ = writeln!(out, "\\ indicators: SOS1 on (u_j, w_jk) with u_j = 1 - z_j");
        }
    }
    let _ = writeln!(out, "\\ {CONSTANT_TAG} {constant}");

    // objective
    out.push_str("Minimize\n obj: ");
    let mut first = true;
    match opts.approx {
        ExportApprox::Pwl => {
            for i in 0..n {
                for k in 0..m {
                    if enc.psi(i, k) != 0 {
                        push_term(&mut out, &mut first, 2.0, &t(i, k));
                    }
                }
            }
            for j in 0..p {
                push_term(&mut out, &mut first, fm, &z(j));
            }
        }
        ExportApprox::Quad => {
            // 2 q(v) = v^2 / 4 - v + 2 log 2 with v = psi (w.x + b)
            let mut quad = String::new();
            let mut qfirst = true;
            for k in 0..m {
                let (rows, signs) = enc.active_rows(k);
                for j in 0..p {
                    let lin: f64 = rows.iter().zip(&signs).map(|(&i, s)| s * x[(i, j)]).sum();
                    push_term(&mut out, &mut first, -lin, &w(j, k));
                }
                let lin_b: f64 = signs.iter().sum();
                push_term(&mut out, &mut first, -lin_b, &b(k));
                // bracket holds twice the quadratic part: (1/2) sum_i (w.x_i + b)^2
                let col = |c: usize, i: usize| if c == p { 1.0 } else { x[(i, c)] };
                let name = |c: usize| if c == p { b(k) } else { w(c, k) };
                for a in 0..=p {
                    for c in a..=p {
                        let g: f64 = rows.iter().map(|&i| col(a, i) * col(c, i)).sum();
                        if a == c {
                            push_term(&mut quad, &mut qfirst, g / 2.0, &format!("{} ^ 2", name(a)));
                        } else {
                            push_term(&mut quad, &mut qfirst, g, &format!("{} * {}", name(a), name(c)));
                        }
                    }
                }
            }
            for j in 0..p {
                push_term(&mut out, &mut first, fm, &z(j));
            }
            if !quad.is_empty() {
                let _ = write!(out, " + [ {quad} ] / 2");
            }
        }
    }
    if first {
        out.push_str("0 ");
        out.push_str(&b(0));
    }
    out.push_str("\nSubject To\n");

    if let Some(ts) = tangents {
        // t_ik >= slope * psi_ik (w_k . x_i + b_k) + offset
        for i in 0..n {
            for k in 0..m {
                let s = enc.psi(i, k) as f64;
                if s == 0.0 {
                    continue;
                }
                for (l, line) in ts.lines().iter().enumerate() {
                    let _ = write!(out, " {TANGENT_ROW_PREFIX}{}_{}_{}: ", i + 1, k + 1, l + 1);
                    let mut first = true;
                    push_term(&mut out, &mut first, 1.0, &t(i, k));
                    for j in 0..p {
                        push_term(&mut out, &mut first, -line.slope * s * x[(i, j)], &w(j, k));
                    }
                    push_term(&mut out, &mut first, -line.slope * s, &b(k));
                    let _ = writeln!(out, " >= {}", line.offset);
                }
            }
        }
    }
    match opts.encoding {
        IndicatorEncoding::BigM(bm) => {
            for j in 0..p {
                for k in 0..m {
                    let _ = writeln!(out, " bigm_up_{}_{}: {} - {bm} {} <= 0", tags[j], k + 1, w(j, k), z(j));
                    let _ = writeln!(out, " bigm_lo_{}_{}: -{} - {bm} {} <= 0", tags[j], k + 1, w(j, k), z(j));
                }
            }
        }
        IndicatorEncoding::Sos1 => {
            for j in 0..p {
                let _ = writeln!(out, " link_{}: {} + {} = 1", tags[j], u(j), z(j));
            }
        }
    }

    out.push_str("Bounds\n");
    for k in 0..m {
        for j in 0..p {
            let _ = writeln!(out, " {} free", w(j, k));
        }
        let _ = writeln!(out, " {} free", b(k));
    }
    if tangents.is_some() {
        for i in 0..n {
            for k in 0..m {
                if enc.psi(i, k) != 0 {
                    let _ = writeln!(out, " {} free", t(i, k));
                }
            }
        }
    }
    if opts.encoding == IndicatorEncoding::Sos1 {
        for j in 0..p {
            let _ = writeln!(out, " 0 <= {} <= 1", u(j));
        }
    }
    if p > 0 {
        out.push_str("Binary\n");
        for j in 0..p {
            let _ = writeln!(out, " {}", z(j));
        }
        if opts.encoding == IndicatorEncoding::Sos1 {
            out.push_str("SOS\n");
            for j in 0..p {
                for k in 0..m {
                    let _ = writeln!(out, " sos_{}_{}: S1:: {}:1 {}:2", tags[j], k + 1, u(j), w(j, k));
                }
            }
        }
    }
    out.push_str("End\n");
    Ok(out)
}

pub fn export_lp(prob: &SelectionProblem<'_>, opts: &LpExportOptions, path: impl AsRef<Path>) -> Result<()> {
    let text = export_lp_string(prob, opts)?;
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
