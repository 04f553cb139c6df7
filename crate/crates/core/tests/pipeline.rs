use std::collections::HashMap;

use ordsel_core::model_io::{export_lp_string, TANGENT_ROW_PREFIX};
use ordsel_core::selector::stepwise_select;
use ordsel_core::{
    branch_and_bound, evaluate_subset, exhaustive_select, generate, parse_csv, preprocess, read_report, write_report,
    Approx, Criterion, Direction, ExportApprox, LpExportOptions, LpModel, PreprocessOptions, ReportDoc,
    SelectionProblem, SynthConfig, TangentSet,
};

fn synth(seed: u64, p: usize, m: usize) -> ordsel_core::SynthData {
    generate(&SynthConfig {
        seed,
        n: 150,
        p,
        m,
        true_features: 2,
        coef_scale: 1.5,
    })
    .unwrap()
}

#[test]
fn csv_to_report_round_trip() {
    let data = synth(11, 5, 3).dataset().unwrap();
    let prob = SelectionProblem::new(&data, Direction::Forward, Criterion::Bic, Approx::Pwl(TangentSet::default17()))
        .unwrap()
        .with_time_limit(None);
    let report = branch_and_bound(&prob).unwrap();
    assert!(report.optimal);
    assert!(report.objval <= report.criterion_value + 1e-9);

    let doc = ReportDoc::from_selection(&report, &data);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    write_report(&doc, &path).unwrap();
    let back = read_report(&path).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.to_json(), std::fs::read_to_string(&path).unwrap());
    assert_eq!(back.coefficients.len(), data.m());
    let idx: Vec<usize> = back.selected.iter().map(|f| f.index - 1).collect();
    assert_eq!(idx, report.selected);
}

#[test]
fn engines_agree_on_exact_loss() {
    for (seed, m) in [(21, 2), (22, 3), (23, 4)] {
        let data = synth(seed, 6, m).dataset().unwrap();
        for direction in [Direction::Forward, Direction::Backward] {
            let prob = SelectionProblem::new(&data, direction, Criterion::Aic, Approx::Exact)
                .unwrap()
                .with_time_limit(None);
            let ex = exhaustive_select(&prob).unwrap();
            let bb = branch_and_bound(&prob).unwrap();
            let sw = stepwise_select(&prob).unwrap();
            assert_eq!(ex.selected, bb.selected);
            assert!((ex.criterion_value - bb.criterion_value).abs() < 1e-8);
            assert!(sw.criterion_value >= ex.criterion_value - 1e-8);
            let eval = evaluate_subset(&prob, &ex.selected).unwrap();
            assert_eq!(eval.criterion, ex.criterion_value);
        }
    }
}

#[test]
fn categorical_columns_and_missing_cells() {
    let mut text = String::from("a;b;colour;grade\n");
    let colours = ["red", "green", "blue"];
    for i in 0..60 {
        let a = if i == 7 { "?".to_string() } else { format!("{}", (i as f64 * 0.37).sin()) };
        let grade = ["low", "mid", "high"][(i * 7 % 11) % 3];
        text.push_str(&format!("{a};{};{};{grade}\n", i % 5, colours[i % 3]));
    }
    let table = parse_csv(&text, "grade").unwrap();
    let data = preprocess(&table, &PreprocessOptions::default()).unwrap();
    assert_eq!(data.n(), 59);
    assert_eq!(data.m(), 2);
    assert_eq!(data.p(), 4);
    // blue is the reference level
    assert!(data.feature_index("colour=blue").is_none());
    assert!(data.feature_index("colour=green").is_some());
    assert!(data.feature_index("colour=red").is_some());
    assert_eq!(data.class_levels(), ["high", "low", "mid"]);
    let prob = SelectionProblem::new(&data, Direction::Forward, Criterion::Aic, Approx::Quad).unwrap();
    assert!(branch_and_bound(&prob).unwrap().optimal);
}

#[test]
fn exported_lp_matches_surrogate_at_fit() {
    let data = synth(31, 3, 2).dataset().unwrap();
    let tset = TangentSet::default17();
    let prob = SelectionProblem::new(&data, Direction::Forward, Criterion::Aic, Approx::Pwl(tset.clone())).unwrap();
    let text = export_lp_string(&prob, &LpExportOptions::new(ExportApprox::Pwl)).unwrap();
    let model = LpModel::parse(&text).unwrap();
    let pairs: usize = data.y().iter().map(|&y| y.min(data.m())).sum();
    assert_eq!(model.constraint_count(TANGENT_ROW_PREFIX), pairs * tset.len());

    // full model at the surrogate optimum: the LP objective, with t at its
    // tightest value, reproduces the surrogate criterion
    let all: Vec<usize> = (0..data.p()).collect();
    let eval = evaluate_subset(&prob, &all).unwrap();
    let mut values = HashMap::new();
    for (k, fit) in eval.surrogate_fits.iter().enumerate() {
        values.insert(format!("b_{}", k + 1), fit.intercept);
        for (j, w) in fit.coefficients.iter().enumerate() {
            values.insert(format!("w_{}_{}", j + 1, k + 1), *w);
        }
    }
    for j in 1..=data.p() {
        values.insert(format!("z_{j}"), 1.0);
    }
    let enc = prob.encoding();
    for i in 0..data.n() {
        for k in 0..data.m() {
            if enc.psi(i, k) == 0 {
                continue;
            }
            let fit = &eval.surrogate_fits[k];
            let score: f64 = fit.intercept
                + fit.coefficients.iter().enumerate().map(|(j, w)| w * data.x()[(i, j)]).sum::<f64>();
            let v = enc.psi(i, k) as f64 * score;
            values.insert(format!("t_{}_{}", i + 1, k + 1), tset.eval(v));
        }
    }
    assert!(model.max_violation(&values).unwrap() <= 1e-7);
    let obj = model.objective_value(&values).unwrap();
    assert!((obj - eval.objval).abs() <= 1e-6 * eval.objval.abs().max(1.0), "{obj} vs {}", eval.objval);
}
