//! Serializable summary of a decomposition, written as JSON or as
//! line-delimited `key = value` text.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::driver::{SchurResult, StepRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n: usize,
    pub rho: f64,
    pub converged: bool,
    pub offschur_ratio: f64,
    pub ortho_residual: f64,
    pub reconstruction_residual: f64,
    pub steps: Vec<StepRecord>,
    pub spectrum: Vec<EigenvalueEntry>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(result: &SchurResult, rho: f64) -> Self {
        Self {
            n: result.s.n(),
            rho,
            converged: result.converged,
            offschur_ratio: result.residuals.offschur_ratio,
            ortho_residual: result.residuals.ortho_residual,
            reconstruction_residual: result.residuals.reconstruction_residual,
            steps: result.step_log.clone(),
            spectrum: result
                .spectrum
                .eigenvalues()
                .into_iter()
                .map(|z| EigenvalueEntry { re: z.re, im: z.im })
                .collect(),
            warnings: result.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "rho = {:e}", self.rho);
        let _ = writeln!(out, "converged = {}", self.converged);
        let _ = writeln!(out, "offschur_ratio = {:e}", self.offschur_ratio);
        let _ = writeln!(out, "ortho_residual = {:e}", self.ortho_residual);
        let _ = writeln!(
            out,
            "reconstruction_residual = {:e}",
            self.reconstruction_residual
        );
        for (k, s) in self.steps.iter().enumerate() {
            let _ = write!(
                out,
                "step.{k} = {} sweeps={} final={:e}",
                s.step.label(),
                s.stats.sweeps,
                s.stats.final_offschur
            );
            if let Some(c) = &s.cluster {
                let idx: Vec<String> = c.iter().map(|i| i.to_string()).collect();
                let _ = write!(out, " cluster={}", idx.join(","));
            }
            out.push('\n');
        }
        for (k, e) in self.spectrum.iter().enumerate() {
            let _ = writeln!(out, "eig.{k} = {:.17e} {:+.17e}i", e.re, e.im);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning = {w}");
        }
        out
    }
}
