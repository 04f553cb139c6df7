//! LP-format export of the mixed-integer models and JSON reports.

mod lp_read;
mod lp_write;
mod report;

pub use lp_read::{LinearExpr, LpConstraint, LpModel, SosSet};
pub use lp_write::{
    export_lp, export_lp_string, ExportApprox, IndicatorEncoding, LpExportOptions, VarNaming, CONSTANT_TAG,
    DEFAULT_BIG_M, TANGENT_ROW_PREFIX,
};
pub use report::{fmt_float, read_report, write_report, ClassCoefficients, Coefficient, FeatureRef, ReportDoc};

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::data::{Dataset, Direction};
    use crate::loss::{pwl_loss, quad_loss, TangentSet};
    use crate::selector::{branch_and_bound, Approx, Criterion, SelectionProblem};
    use crate::synth::{generate, SynthConfig};

    fn toy() -> Dataset {
        Dataset::new(DMatrix::from_row_slice(2, 1, &[0.5, -1.0]), vec![1, 3], vec!["a".into()]).unwrap()
    }

    fn pwl_problem(ds: &Dataset) -> SelectionProblem<'_> {
        SelectionProblem::new(ds, Direction::Forward, Criterion::Aic, Approx::Pwl(TangentSet::default17())).unwrap()
    }

    #[test]
    fn tangent_row_count_toy() {
        let ds = toy();
        let prob = pwl_problem(&ds);
        let text = export_lp_string(&prob, &LpExportOptions::new(ExportApprox::Pwl)).unwrap();
        let model = LpModel::parse(&text).unwrap();
        // psi rows (1, 0) and (-1, -1)
        assert_eq!(model.constraint_count(TANGENT_ROW_PREFIX), 51);
        assert!(text.contains("Binary\n z_1\n"));
    }

    #[test]
    fn big_m_rows() {
        let ds = Dataset::new(DMatrix::from_row_slice(2, 1, &[1.0, 2.0]), vec![1, 2], vec!["a".into()]).unwrap();
        let prob = pwl_problem(&ds);
        let text = export_lp_string(&prob, &LpExportOptions::new(ExportApprox::Pwl)).unwrap();
        assert!(text.contains(": w_1_1 - 100 z_1 <= 0\n"));
        assert!(text.contains(": -w_1_1 - 100 z_1 <= 0\n"));
    }

    #[test]
    fn sos_section() {
        let ds = toy();
        let prob = pwl_problem(&ds);
        let mut opts = LpExportOptions::new(ExportApprox::Quad);
        opts.encoding = IndicatorEncoding::Sos1;
        let text = export_lp_string(&prob, &opts).unwrap();
        assert!(text.contains("\nSOS\n"));
        let model = LpModel::parse(&text).unwrap();
        assert_eq!(model.sos.len(), 2);
        assert_eq!(model.sos[0].members, vec![("u_1".to_string(), 1.0), ("w_1_1".to_string(), 2.0)]);
        assert_eq!(model.constraint_count(TANGENT_ROW_PREFIX), 0);
    }

    #[test]
    fn four_point_tangent_file() {
        let ds = toy();
        let prob = pwl_problem(&ds);
        let mut opts = LpExportOptions::new(ExportApprox::Pwl);
        opts.tangents = Some(TangentSet::parse("-inf\n-1\n1\ninf\n").unwrap());
        let model = LpModel::parse(&export_lp_string(&prob, &opts).unwrap()).unwrap();
        assert_eq!(model.constraint_count(TANGENT_ROW_PREFIX), 3 * 4);
    }

    #[test]
    fn named_variables() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
            vec![1, 2, 2],
            vec!["fixed acidity".into(), "fixed-acidity".into()],
        )
        .unwrap();
        let prob = pwl_problem(&ds);
        let mut opts = LpExportOptions::new(ExportApprox::Pwl);
        opts.naming = VarNaming::FeatureNames;
        let text = export_lp_string(&prob, &opts).unwrap();
        assert!(text.contains("z_fixed_acidity\n"));
        assert!(text.contains("z_fixed_acidity_2\n"));
        LpModel::parse(&text).unwrap();
    }

    fn random_point(
        rng: &mut ChaCha8Rng,
        ds: &Dataset,
        m: usize,
        big_m: f64,
    ) -> (Vec<bool>, DMatrix<f64>, Vec<f64>, HashMap<String, f64>) {
        let p = ds.p();
        let z: Vec<bool> = (0..p).map(|_| rng.random::<bool>()).collect();
        let w = DMatrix::from_fn(p, m, |j, _| if z[j] { rng.random_range(-big_m..big_m) / 20.0 } else { 0.0 });
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut vals = HashMap::new();
        for j in 0..p {
            vals.insert(format!("z_{}", j + 1), if z[j] { 1.0 } else { 0.0 });
            vals.insert(format!("u_{}", j + 1), if z[j] { 0.0 } else { 1.0 });
            for k in 0..m {
                vals.insert(format!("w_{}_{}", j + 1, k + 1), w[(j, k)]);
            }
        }
        for (k, bk) in b.iter().enumerate() {
            vals.insert(format!("b_{}", k + 1), *bk);
        }
        (z, w, b, vals)
    }

    fn margin(ds: &Dataset, w: &DMatrix<f64>, b: &[f64], i: usize, k: usize) -> f64 {
        (0..ds.p()).map(|j| w[(j, k)] * ds.x()[(i, j)]).sum::<f64>() + b[k]
    }

    #[test]
    fn pwl_objective_at_random_points() {
        let ds = generate(&SynthConfig {
            seed: 3,
            n: 12,
            p: 3,
            m: 2,
            true_features: 2,
            coef_scale: 1.0,
        })
        .unwrap()
        .dataset()
        .unwrap();
        let prob = pwl_problem(&ds);
        let tset = TangentSet::default17();
        let model = LpModel::parse(&export_lp_string(&prob, &LpExportOptions::new(ExportApprox::Pwl)).unwrap()).unwrap();
        let enc = prob.encoding();
        let fm = prob.penalty() * 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let (z, w, b, mut vals) = random_point(&mut rng, &ds, 2, 100.0);
            let mut t_sum = 0.0;
            for i in 0..ds.n() {
                for k in 0..2 {
                    let s = enc.psi(i, k);
                    if s != 0 {
                        // feasible slack above the tight value
                        let t = pwl_loss(&tset, s as f64 * margin(&ds, &w, &b, i, k)) + rng.random_range(0.0..0.5);
                        vals.insert(format!("t_{}_{}", i + 1, k + 1), t);
                        t_sum += t;
                    }
                }
            }
            let expected = 2.0 * t_sum + fm * (z.iter().filter(|&&v| v).count() as f64 + 1.0);
            let got = model.objective_value(&vals).unwrap();
            assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{got} vs {expected}");
            assert!(model.max_violation(&vals).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn quad_objective_at_random_points() {
        let ds = generate(&SynthConfig {
            seed: 5,
            n: 15,
            p: 3,
            m: 3,
            true_features: 2,
            coef_scale: 1.0,
        })
        .unwrap()
        .dataset()
        .unwrap();
        let prob = SelectionProblem::new(&ds, Direction::Backward, Criterion::Bic, Approx::Quad).unwrap();
        let mut opts = LpExportOptions::new(ExportApprox::Quad);
        opts.encoding = IndicatorEncoding::Sos1;
        let model = LpModel::parse(&export_lp_string(&prob, &opts).unwrap()).unwrap();
        let enc = prob.encoding();
        let fm = prob.penalty() * 3.0;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let (z, w, b, vals) = random_point(&mut rng, &ds, 3, 100.0);
            let mut loss = 0.0;
            for i in 0..ds.n() {
                for k in 0..3 {
                    let s = enc.psi(i, k);
                    if s != 0 {
                        loss += quad_loss(s as f64 * margin(&ds, &w, &b, i, k));
                    }
                }
            }
            let expected = 2.0 * loss + fm * (z.iter().filter(|&&v| v).count() as f64 + 1.0);
            let got = model.objective_value(&vals).unwrap();
            assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{got} vs {expected}");
            assert!(model.max_violation(&vals).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn sos_violation_detected() {
        let ds = toy();
        let prob = pwl_problem(&ds);
        let mut opts = LpExportOptions::new(ExportApprox::Quad);
        opts.encoding = IndicatorEncoding::Sos1;
        let model = LpModel::parse(&export_lp_string(&prob, &opts).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, _, _, mut vals) = random_point(&mut rng, &ds, 2, 100.0);
        vals.insert("z_1".into(), 0.0);
        vals.insert("u_1".into(), 1.0);
        vals.insert("w_1_1".into(), 0.3);
        assert_eq!(model.max_violation(&vals).unwrap(), f64::INFINITY);
    }

    #[test]
    fn parser_handles_general_syntax() {
        let text = "\\ objective constant: 1.5\nMaximize\n obj: 3 x + 2e-1 y\n - x\n + [ x ^ 2 + 4 x * y ] / 2\nSubject To\n c1: x + y <= 4\n x - y >= -1\n c3: 2 x = 2\nBounds\n -inf <= y <= 10\n x <= 3\nGeneral\n y\nEnd\n";
        let model = LpModel::parse(text).unwrap();
        assert!(!model.minimize);
        assert_eq!(model.constraints.len(), 3);
        assert_eq!(model.constraints[1].name, "r2");
        assert_eq!(model.bounds_of("y"), (f64::NEG_INFINITY, 10.0));
        assert_eq!(model.bounds_of("x"), (0.0, 3.0));
        let vals: HashMap<String, f64> = [("x".to_string(), 1.0), ("y".to_string(), 2.0)].into();
        // 3 + 0.4 - 1 + (1 + 8) / 2 + 1.5
        assert!((model.objective_value(&vals).unwrap() - 8.4).abs() < 1e-12);
        assert_eq!(model.max_violation(&vals).unwrap(), 0.0);
        assert!(LpModel::parse("Minimize\n obj: x +\n").is_err());
        assert!(matches!(LpModel::parse("x\n"), Err(crate::Error::LpParse { line: 1, .. })));
    }

    #[test]
    fn report_round_trip() {
        let ds = generate(&SynthConfig::default()).unwrap().dataset().unwrap();
        let prob = pwl_problem(&ds);
        let report = branch_and_bound(&prob).unwrap();
        let doc = ReportDoc::from_selection(&report, &ds);
        let json = doc.to_json();
        let again = ReportDoc::from_json(&json).unwrap();
        assert_eq!(again, doc);
        assert_eq!(again.to_json(), json);
        assert!(json.contains("\"method\": \"bnb-pwl\""));
        let keys: Vec<&str> = json
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        assert_eq!(
            keys,
            [
                "method",
                "direction",
                "criterion_name",
                "criterion_value",
                "objval",
                "lower_bound",
                "optimal",
                "selected",
                "coefficients",
                "n",
                "p",
                "m",
                "nodes",
                "incumbent_updates",
                "wall_time_s",
                "warnings"
            ]
        );
    }

    #[test]
    fn empty_selection_and_float_format() {
        let ds = Dataset::new(DMatrix::zeros(4, 1), vec![1, 2, 1, 2], vec!["c".into()]).unwrap();
        let prob = SelectionProblem::new(&ds, Direction::Forward, Criterion::Aic, Approx::Exact).unwrap();
        let doc = ReportDoc::from_selection(&branch_and_bound(&prob).unwrap(), &ds);
        let json = doc.to_json();
        assert!(json.contains("\"selected\": []"));
        // 2 * 4 log 2 + 2
        assert!(json.contains("\"criterion_value\": 7.5451774444795623e0"), "{json}");
        assert_eq!(fmt_float(3028.4123), "3.0284123000000000e3");
        let v: f64 = fmt_float(3028.4123).parse().unwrap();
        assert_eq!(format!("{v:.1}"), "3028.4");
    }

    #[test]
    fn report_file_io() {
        let dir = tempfile::tempdir().unwrap();
        let ds = toy();
        let doc = ReportDoc::from_fit(&ds, Direction::Forward, Criterion::Bic, &[], 1.0, &[], Default::default(), vec![]);
        let path = dir.path().join("r.json");
        write_report(&doc, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), doc);
        assert!(read_report(dir.path().join("missing.json")).is_err());
    }
}
