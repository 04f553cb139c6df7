//! Information-criterion feature selection for the sequential logit model.

pub mod data;
pub mod error;
pub mod estimator;
pub mod loss;
pub mod model_io;
pub mod selector;
pub mod synth;

pub use data::{encode_labels, load_csv, parse_csv, preprocess, Dataset, Direction, OrdinalEncoding, PreprocessOptions, RawTable};
pub use error::{Error, Result};
pub use estimator::{fit_all, fit_exact, fit_pwl, fit_quad, ClassProblem, FitMethod, FitResult, SeqLogitParams};
pub use loss::{Tangent, TangentPoint, TangentSet};
pub use selector::{
    branch_and_bound, evaluate_subset, exhaustive_select, stepwise_select, stepwise_warm_start, Approx, Criterion,
    SelectMethod, SelectionProblem, SelectionReport,
};
pub use model_io::{export_lp, read_report, write_report, ExportApprox, IndicatorEncoding, LpExportOptions, LpModel, ReportDoc};
pub use synth::{generate, SynthConfig, SynthData};
