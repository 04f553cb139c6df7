use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use ordsel_core::model_io::{
    export_lp, fmt_float, write_report, ExportApprox, IndicatorEncoding, LpExportOptions, ReportDoc, VarNaming,
};
use ordsel_core::selector::{self, Approx, SelectMethod, SelectionProblem};
use ordsel_core::{load_csv, preprocess, Dataset, Error, PreprocessOptions, SynthConfig, TangentSet};

use crate::{ApproxArg, EncodingArg, ExportArgs, FitArgs, InputArgs, MethodArg, NamingArg, SelectArgs, SynthArgs, TangentsArgs};

const EXIT_TIME_LIMIT: u8 = 2;

fn load(input: &InputArgs) -> Result<Dataset> {
    let table = load_csv(&input.input, &input.label)?;
    let opts = PreprocessOptions {
        missing_threshold: input.missing_threshold,
        standardize: !input.no_standardize,
        dummy_encode: true,
        drop_columns: input.drop.clone(),
    };
    let data = preprocess(&table, &opts).with_context(|| format!("preprocessing {}", input.input.display()))?;
    log::info!("loaded n = {}, p = {}, m = {}", data.n(), data.p(), data.m());
    Ok(data)
}

fn tangent_set(spec: &str) -> Result<TangentSet> {
    if spec == "default17" {
        Ok(TangentSet::default17())
    } else {
        TangentSet::load(spec).with_context(|| format!("reading tangent file {spec}"))
    }
}

pub fn select(args: SelectArgs) -> Result<ExitCode> {
    if args.tangents.is_some() && args.method != MethodArg::BnbPwl {
        bail!("--tangents only applies to --method bnb-pwl");
    }
    if !(args.time_limit >= 0.0 && args.time_limit.is_finite()) {
        bail!("--time-limit must be a non-negative number of seconds");
    }
    let data = load(&args.input)?;
    let approx = match args.method {
        MethodArg::BnbPwl => Approx::Pwl(tangent_set(args.tangents.as_deref().unwrap_or("default17"))?),
        MethodArg::BnbQuad => Approx::Quad,
        _ => Approx::Exact,
    };
    let prob = SelectionProblem::new(&data, args.model.direction.into(), args.model.criterion.into(), approx)?
        .with_time_limit(Some(Duration::from_secs_f64(args.time_limit)))
        .with_parallel(args.parallel);
    let method: SelectMethod = args.method.into();
    let report = selector::run(&prob, method)?;
    let timed_out = matches!(method, SelectMethod::BnbExact | SelectMethod::BnbPwl | SelectMethod::BnbQuad) && !report.optimal;

    let mut doc = ReportDoc::from_selection(&report, &data);
    let mut warnings = data.warnings().to_vec();
    warnings.append(&mut doc.warnings);
    doc.warnings = warnings;
    for w in &doc.warnings {
        log::warn!("{w}");
    }
    if let Some(path) = &args.output {
        write_report(&doc, path)?;
    }
    println!("{}", doc.summary_line());
    Ok(if timed_out {
        ExitCode::from(EXIT_TIME_LIMIT)
    } else {
        ExitCode::SUCCESS
    })
}

fn resolve_features(data: &Dataset, names: &[String]) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(names.len());
    for name in names.iter().filter(|n| !n.is_empty()) {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateFeature(name.clone()).into());
        }
        let j = data
            .feature_index(name)
            .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
        out.push(j);
    }
    out.sort_unstable();
    Ok(out)
}

pub fn fit(args: FitArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let data = load(&args.input)?;
    let subset = resolve_features(&data, &args.features)?;
    let direction = args.model.direction.into();
    let prob = SelectionProblem::new(&data, direction, args.model.criterion.into(), Approx::Exact)?;
    let eval = selector::evaluate_subset(&prob, &subset)?;
    let loss: f64 = eval.exact_fits.iter().map(|f| f.loss).sum();
    let (n, m) = (data.n(), data.m());
    let aic = selector::criterion_value(loss, subset.len(), m, selector::Criterion::Aic.penalty(n));
    let bic = selector::criterion_value(loss, subset.len(), m, selector::Criterion::Bic.penalty(n));
    println!("AIC {}", fmt_float(aic));
    println!("BIC {}", fmt_float(bic));
    let names = data.feature_names();
    for (k, f) in eval.exact_fits.iter().enumerate() {
        let mut line = format!("class {} intercept {}", k + 1, fmt_float(f.intercept));
        for (&j, w) in subset.iter().zip(&f.coefficients) {
            line.push_str(&format!(" {}={}", names[j], fmt_float(*w)));
        }
        println!("{line}");
    }
    let mut warnings = data.warnings().to_vec();
    warnings.extend(
        eval.exact_fits
            .iter()
            .enumerate()
            .filter(|(_, f)| f.box_active)
            .map(|(k, _)| format!("exact fit for class {} has a coefficient on the parameter box", k + 1)),
    );
    let doc = ReportDoc::from_fit(
        &data,
        direction,
        args.model.criterion.into(),
        &subset,
        eval.criterion,
        &eval.exact_fits,
        started.elapsed(),
        warnings,
    );
    if let Some(path) = &args.output {
        write_report(&doc, path)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn export(args: ExportArgs) -> Result<ExitCode> {
    if args.tangents.is_some() && args.approx != ApproxArg::Pwl {
        bail!("--tangents only applies to --approx pwl");
    }
    let data = load(&args.input)?;
    let (approx, export_approx) = match args.approx {
        ApproxArg::Pwl => (
            Approx::Pwl(tangent_set(args.tangents.as_deref().unwrap_or("default17"))?),
            ExportApprox::Pwl,
        ),
        ApproxArg::Quad => (Approx::Quad, ExportApprox::Quad),
    };
    let prob = SelectionProblem::new(&data, args.model.direction.into(), args.model.criterion.into(), approx)?;
    let opts = LpExportOptions {
        approx: export_approx,
        encoding: match args.encoding {
            EncodingArg::Bigm => IndicatorEncoding::BigM(args.big_m),
            EncodingArg::Sos1 => IndicatorEncoding::Sos1,
        },
        tangents: None,
        naming: match args.naming {
            NamingArg::Indexed => VarNaming::Indexed,
            NamingArg::Names => VarNaming::FeatureNames,
        },
    };
    export_lp(&prob, &opts, &args.output)?;
    log::info!("wrote {}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

pub fn synth(args: SynthArgs) -> Result<ExitCode> {
    let cfg = SynthConfig {
        seed: args.seed,
        n: args.n,
        p: args.p,
        m: args.m,
        true_features: args.true_features,
        coef_scale: args.coef_scale,
    };
    let data = ordsel_core::generate(&cfg)?;
    std::fs::write(&args.output, data.to_csv()).with_context(|| format!("writing {}", args.output.display()))?;
    if let Some(path) = &args.truth {
        std::fs::write(path, data.truth_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let names = data.feature_names();
    let truth: Vec<&str> = data.truth.iter().map(|&j| names[j].as_str()).collect();
    println!("truth {}", truth.join(","));
    Ok(ExitCode::SUCCESS)
}

pub fn tangents(args: TangentsArgs) -> Result<ExitCode> {
    let set = tangent_set(&args.tangents)?;
    print!("{}", set.table());
    Ok(ExitCode::SUCCESS)
}
