use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fit::{fit_logs, ExponentFit};
use crate::error::Result;

/// One measured quantity at one scale `2^{scale_log2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub scale_log2: i64,
    pub component: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub component: String,
    /// Exponent predicted by the scaling argument, if any.
    pub expected: Option<f64>,
    pub fit: ExponentFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `|measured - target| <= tol`.
    pub fn within(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(
            name,
            (measured - target).abs() <= tol,
            format!("measured {measured:.6}, target {target:.6} ± {tol}"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub n: usize,
    pub parameters: BTreeMap<String, String>,
    pub samples: Vec<Sample>,
    pub fits: Vec<ComponentFit>,
    pub implied_bound: Option<f64>,
    pub reference_bound: Option<f64>,
    pub notes: Vec<String>,
    pub gates: Vec<Gate>,
}

pub const CSV_HEADER: &str = "experiment,n,scale_log2,component,value,slope,residual,implied_bound";

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentReport {
    pub fn new(experiment: &str, n: usize) -> Self {
        Self {
            experiment: experiment.into(),
            n,
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }

    pub fn push(&mut self, scale_log2: i64, component: &str, value: f64) {
        self.samples.push(Sample {
            scale_log2,
            component: component.into(),
            value,
        });
    }

    /// Fits `component` against `2^{scale_log2}` and records the fit.
    pub fn fit(&mut self, component: &str, expected: Option<f64>) -> Result<&ComponentFit> {
        let logs: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.component == component)
            .map(|s| (s.scale_log2 as f64 * std::f64::consts::LN_2, s.value.ln()))
            .collect();
        if logs.iter().any(|s| !s.1.is_finite()) {
            return Err(crate::error::Error::DegenerateFit(format!("{component}: non-positive value")));
        }
        let fit = fit_logs(logs)?;
        if fit.max_residual > 0.1 {
            log::warn!("{}: fit residual {} exceeds 0.1", component, fit.max_residual);
            self.notes
                .push(format!("warning: {component} fit residual {:.3} exceeds 0.1", fit.max_residual));
        }
        self.fits.push(ComponentFit {
            component: component.into(),
            expected,
            fit,
        });
        Ok(self.fits.last().expect("just pushed"))
    }

    pub fn component_fit(&self, component: &str) -> Option<&ComponentFit> {
        self.fits.iter().find(|f| f.component == component)
    }

    pub fn slope(&self, component: &str) -> Option<f64> {
        self.component_fit(component).map(|f| f.fit.slope)
    }

    pub fn all_gates_pass(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    /// One row per sample, in insertion order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        self.write_csv_rows(&mut out);
        out
    }

    pub(crate) fn write_csv_rows(&self, out: &mut String) {
        let implied = self.implied_bound.map(fmt_f64).unwrap_or_default();
        for s in &self.samples {
            let (slope, residual) = self
                .component_fit(&s.component)
                .map(|f| (fmt_f64(f.fit.slope), fmt_f64(f.fit.max_residual)))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.experiment,
                self.n,
                s.scale_log2,
                s.component,
                fmt_f64(s.value),
                slope,
                residual,
                implied
            );
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Concatenates several reports under one header.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        r.write_csv_rows(&mut out);
    }
    out
}
