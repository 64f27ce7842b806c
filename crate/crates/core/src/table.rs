//! Bound tables over `(α, c)` rows and `β` columns.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::{amls_bound, brute_bound, BoundParams};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Vc,
    Fvs,
    Tfvs,
    Hs3,
    Hs4,
    Hs5,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Vc, Preset::Fvs, Preset::Tfvs, Preset::Hs3, Preset::Hs4, Preset::Hs5];

    pub fn parse(s: &str) -> Option<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Vc => "vc",
            Preset::Fvs => "fvs",
            Preset::Tfvs => "tfvs",
            Preset::Hs3 => "3hs",
            Preset::Hs4 => "4hs",
            Preset::Hs5 => "5hs",
        }
    }

    /// The `(α, c)` rows: a parameterized exact algorithm and a polynomial
    /// approximation.
    pub fn pairs(self) -> [(f64, f64); 2] {
        match self {
            Preset::Vc => [(1.0, 1.363), (2.0, 1.0)],
            Preset::Fvs => [(1.0, 3.618), (2.0, 1.0)],
            Preset::Tfvs => [(1.0, 2.0), (3.0, 1.0)],
            Preset::Hs3 => [(1.0, 2.168), (3.0, 1.0)],
            Preset::Hs4 => [(1.0, 3.168), (4.0, 1.0)],
            Preset::Hs5 => [(1.0, 4.168), (5.0, 1.0)],
        }
    }

    /// Nine evenly spaced `β` columns.
    pub fn betas(self) -> Vec<f64> {
        let (start, step) = match self {
            Preset::Vc | Preset::Fvs => (1.1, 0.1),
            Preset::Tfvs | Preset::Hs3 => (1.2, 0.2),
            Preset::Hs4 => (1.3, 0.3),
            Preset::Hs5 => (1.4, 0.4),
        };
        // rounded to kill accumulated binary error in the grid points
        (0..9).map(|i| ((start + step * i as f64) * 1e6).round() / 1e6).collect()
    }

    pub fn grid(self) -> Vec<BoundParams> {
        let betas = self.betas();
        self.pairs()
            .into_iter()
            .flat_map(|(a, c)| betas.iter().map(move |&b| BoundParams::new(a, c, b)))
            .collect()
    }
}

/// The Cartesian product `alphas × cs × betas`, in that nesting order.
pub fn custom_grid(alphas: &[f64], cs: &[f64], betas: &[f64]) -> Result<Vec<BoundParams>> {
    if alphas.is_empty() || cs.is_empty() || betas.is_empty() {
        return Err(Error::domain("table grid is empty"));
    }
    let mut rows = Vec::new();
    for &a in alphas {
        for &c in cs {
            for &b in betas {
                rows.push(BoundParams::new(a, c, b));
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub alpha: f64,
    pub c: f64,
    pub beta: f64,
    pub brute: f64,
    pub amls: f64,
    pub kappa_star: f64,
    pub tau_star: f64,
    pub err_bound: f64,
}

/// Evaluates every row; rows are computed in parallel and returned in input
/// order.
pub fn bound_table(rows: &[BoundParams], precision: f64) -> Result<Vec<TableRow>> {
    if rows.is_empty() {
        return Err(Error::domain("table grid is empty"));
    }
    par::map(rows, |p| {
        let p = p.with_precision(precision);
        let sp = amls_bound(p)?;
        Ok(TableRow {
            alpha: p.alpha,
            c: p.c,
            beta: p.beta,
            brute: brute_bound(p.beta)?,
            amls: sp.value,
            kappa_star: sp.kappa_star,
            tau_star: sp.tau_star,
            err_bound: sp.err_bound,
        })
    })
    .into_iter()
    .collect()
}

/// `x` with `sig` significant digits in the style of C's `%g`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= sig as i32 {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

pub const CSV_HEADER: &str = "alpha,c,beta,brute,amls,kappa_star,tau_star,err_bound";

pub fn to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.alpha, r.c, r.beta, r.brute, r.amls, r.kappa_star, r.tau_star, r.err_bound];
        let line: Vec<String> = cells.iter().map(|&v| fmt_sig(v, 6)).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

pub fn to_json_lines(rows: &[TableRow]) -> String {
    rows.iter().map(|r| serde_json::to_string(r).expect("finite row") + "\n").collect()
}
