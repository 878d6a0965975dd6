//! Result emission: CSV or plain text, or versioned JSON.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use hyperorient::experiment::{CoreProfile, SimPoint, Table1Row, TrialRecord};
use hyperorient::*;
use serde::Serialize;

use crate::Format;

/// Bumped whenever a JSON payload changes shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    result: &'a T,
}

pub struct Emitter {
    format: Format,
    path: Option<PathBuf>,
}

impl Emitter {
    pub fn new(format: Format, path: Option<PathBuf>) -> Self {
        Self { format, path }
    }

    pub fn emit<T: Serialize>(&self, command: &str, value: &T, text: impl FnOnce() -> String) -> Result<()> {
        let body = match self.format {
            Format::Csv => text(),
            Format::Json => {
                let env = Envelope { schema_version: SCHEMA_VERSION, command, result: value };
                serde_json::to_string_pretty(&env)? + "\n"
            }
        };
        match &self.path {
            Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields.join(",") + "\n"
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
pub struct Stats {
    pub n: usize,
    pub m: usize,
    pub degree_sum: usize,
    pub max_degree: usize,
    pub edge_counts: Vec<u64>,
    pub kappa: Rational,
    pub core_n: usize,
    pub core_m: usize,
    pub core_kappa: Rational,
    pub core_mean_degree: f64,
}

impl Stats {
    pub fn compute(hg: &Hypergraph, p: &OrientationParams) -> Result<Self> {
        let (pr, _) = rancore(hg, p, PeelMode::Deterministic, false)?;
        let cs = core_statistics(&pr);
        Ok(Self {
            n: hg.n(),
            m: hg.m(),
            degree_sum: hg.degree_sum(),
            max_degree: hg.max_degree(),
            edge_counts: hg.edge_counts(p)?.counts().to_vec(),
            kappa: w_density(hg, p)?,
            core_n: cs.n,
            core_m: pr.core.m(),
            core_kappa: cs.kappa,
            core_mean_degree: cs.mean_degree,
        })
    }

    pub fn to_csv(&self) -> String {
        let counts: Vec<String> = self.edge_counts.iter().map(ToString::to_string).collect();
        let mut s = String::from("n,m,degree_sum,max_degree,edge_counts,kappa,core_n,core_m,core_kappa,core_mean_degree\n");
        s += &csv_line(&[
            self.n.to_string(),
            self.m.to_string(),
            self.degree_sum.to_string(),
            self.max_degree.to_string(),
            counts.join(";"),
            self.kappa.to_string(),
            self.core_n.to_string(),
            self.core_m.to_string(),
            self.core_kappa.to_string(),
            self.core_mean_degree.to_string(),
        ]);
        s
    }
}

pub fn core_stats_csv(p: &OrientationParams, mu: f64, st: &CoreStats) -> String {
    let mut s = String::from("h,w,k,mu_bar,x_star,alpha,kappa,mu_hat,terminated_by");
    for j in 0..p.w() {
        s += &format!(",beta_{}", p.h() - j);
    }
    s.push('\n');
    let mut f = vec![
        p.h().to_string(),
        p.w().to_string(),
        p.k().to_string(),
        mu.to_string(),
        st.x_star.to_string(),
        st.alpha.to_string(),
        st.kappa.to_string(),
        st.mu_hat.to_string(),
        format!("{:?}", st.terminated_by),
    ];
    f.extend(st.beta.iter().map(ToString::to_string));
    s + &csv_line(&f)
}

pub fn points_csv(points: &[SimPoint]) -> String {
    let mut s = String::from("mu_bar,m,trials,orientable_fraction,half_width\n");
    for pt in points {
        s += &csv_line(&[
            pt.mu_bar.to_string(),
            pt.m.to_string(),
            pt.trials.len().to_string(),
            pt.orientable_fraction.to_string(),
            pt.half_width.to_string(),
        ]);
    }
    s
}

pub fn trial_csv(points: &[SimPoint]) -> String {
    let mut s = format!("mu_bar,{}\n", TrialRecord::CSV_HEADER);
    for pt in points {
        for r in &pt.trials {
            s += &format!("{},{}\n", pt.mu_bar, r.to_csv_row());
        }
    }
    s
}

pub fn profile_csv(p: &CoreProfile) -> String {
    let mut s = String::from(
        "mu_bar,n,trials,ode_alpha,mean_alpha,rel_dev_alpha,ode_mu_hat,mean_mu_hat,rel_dev_mu_hat,\
         ode_kappa,mean_kappa,rel_dev_kappa,chi_square,dof,p_value\n",
    );
    s += &csv_line(&[
        p.mu_bar.to_string(),
        p.n.to_string(),
        p.trials.len().to_string(),
        p.ode.alpha.to_string(),
        p.mean_alpha.to_string(),
        p.rel_dev_alpha.to_string(),
        p.ode.mu_hat.to_string(),
        p.mean_mu_hat.to_string(),
        p.rel_dev_mu_hat.to_string(),
        p.ode.kappa.to_string(),
        p.mean_kappa.to_string(),
        p.rel_dev_kappa.to_string(),
        p.chi_square.statistic.to_string(),
        p.chi_square.dof.to_string(),
        p.chi_square.p_value.to_string(),
    ]);
    s
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut s = String::from(
        "h,w,k,mu_tilde,mu_hat,reference_mu_tilde,reference_mu_hat,delta_mu_tilde,delta_mu_hat,error\n",
    );
    for r in rows {
        s += &csv_line(&[
            r.h.to_string(),
            r.w.to_string(),
            r.k.to_string(),
            opt(r.mu_tilde),
            opt(r.mu_hat),
            r.reference_mu_tilde.to_string(),
            r.reference_mu_hat.to_string(),
            opt(r.delta_mu_tilde),
            opt(r.delta_mu_hat),
            r.error.clone().unwrap_or_default().replace(',', ";"),
        ]);
    }
    s
}
