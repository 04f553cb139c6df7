//! JSON reports with a canonical layout: fixed key order, two-space
//! indentation and every float written with 17 significant digits.

use std::io;
use std::path::Path;
use std::time::Duration;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::data::{Dataset, Direction};
use crate::error::{Error, Result};
use crate::estimator::FitResult;
use crate::selector::{Criterion, SelectionReport};

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct FeatureRef {
    /// 1-based column index in the preprocessed design.
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Coefficient {
    pub index: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ClassCoefficients {
    /// 1-based binary subproblem.
    pub class: usize,
    pub intercept: f64,
    pub weights: Vec<Coefficient>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ReportDoc {
    pub method: String,
    pub direction: Direction,
    pub criterion_name: Criterion,
    pub criterion_value: f64,
    pub objval: f64,
    /// `null` when the method proves no bound.
    pub lower_bound: Option<f64>,
    pub optimal: bool,
    pub selected: Vec<FeatureRef>,
    pub coefficients: Vec<ClassCoefficients>,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub nodes: usize,
    pub incumbent_updates: usize,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

fn coefficient_blocks(data: &Dataset, selected: &[usize], fits: &[FitResult]) -> Vec<ClassCoefficients> {
    let names = data.feature_names();
    fits.iter()
        .enumerate()
        .map(|(k, f)| ClassCoefficients {
            class: k + 1,
            intercept: f.intercept,
            weights: selected
                .iter()
                .zip(&f.coefficients)
                .map(|(&j, &value)| Coefficient {
                    index: j + 1,
                    name: names[j].clone(),
                    value,
                })
                .collect(),
            converged: f.converged,
        })
        .collect()
}

fn feature_refs(data: &Dataset, selected: &[usize]) -> Vec<FeatureRef> {
    selected
        .iter()
        .map(|&j| FeatureRef {
            index: j + 1,
            name: data.feature_names()[j].clone(),
        })
        .collect()
}

impl ReportDoc {
    pub fn from_selection(report: &SelectionReport, data: &Dataset) -> Self {
        Self {
            method: report.method.as_str().to_string(),
            direction: report.direction,
            criterion_name: report.criterion,
            criterion_value: report.criterion_value,
            objval: report.objval,
            lower_bound: report.lower_bound.is_finite().then_some(report.lower_bound),
            optimal: report.optimal,
            selected: feature_refs(data, &report.selected),
            coefficients: coefficient_blocks(data, &report.selected, &report.fits),
            n: data.n(),
            p: data.p(),
            m: data.m(),
            nodes: report.nodes,
            incumbent_updates: report.incumbent_updates,
            wall_time_s: report.wall_time.as_secs_f64(),
            warnings: report.warnings.clone(),
        }
    }

    /// Report for an exact refit on a fixed subset.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fit(
        data: &Dataset,
        direction: Direction,
        criterion: Criterion,
        selected: &[usize],
        criterion_value: f64,
        fits: &[FitResult],
        wall_time: Duration,
        warnings: Vec<String>,
    ) -> Self {
        Self {
            method: "fit".to_string(),
            direction,
            criterion_name: criterion,
            criterion_value,
            objval: criterion_value,
            lower_bound: None,
            optimal: true,
            selected: feature_refs(data, selected),
            coefficients: coefficient_blocks(data, selected, fits),
            n: data.n(),
            p: data.p(),
            m: data.m(),
            nodes: 0,
            incumbent_updates: 0,
            wall_time_s: wall_time.as_secs_f64(),
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter::default());
        self.serialize(&mut ser).expect("report serializes");
        buf.push(b'\n');
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }

    /// `method criterion_value objval |S| time_s`, each as written in the JSON.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.method,
            fmt_float(self.criterion_value),
            fmt_float(self.objval),
            self.selected.len(),
            fmt_float(self.wall_time_s)
        )
    }
}

/// The 17-significant-digit rendering used for every float in a report.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_report(doc: &ReportDoc, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, doc.to_json()).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDoc> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReportDoc::from_json(&text)
}

/// Pretty printer that writes floats in scientific notation with 17
/// significant digits, which round-trips every `f64` and re-emits
/// byte-identically.
#[derive(Default)]
struct CanonicalFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}
