mod common;

use std::path::PathBuf;
use std::sync::Arc;

use probex::fixtures;
use probex::io::{
    load_instances, load_model, read_instances, run_benchmark, run_explain, BenchModel, BenchOptions,
    Command, EstimatorKind, FeatureDoc, ModelDocument, OrderKind, Report, RunConfig, Selection, Status,
};
use probex::model::Model;
use probex::space::{FeatureSpace, Instance};
use probex::Error;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn exact_config(tau: f64) -> RunConfig {
    RunConfig {
        tau: Some(tau),
        estimator: EstimatorKind::Exact,
        ..RunConfig::default()
    }
}

fn forest(seed: u64, features: usize) -> Model {
    let mut rng = probex::seed::rng(seed);
    fixtures::random_forest_model(FeatureSpace::boolean(features), 10, 3, 2, &mut rng)
}

fn points(model: &Model, n: usize, seed: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    for k in 0..n as u64 {
        let bits = probex::seed::derive_seed(seed, &[k]);
        let values: Vec<i64> = (0..model.space.num_features()).map(|i| (bits >> i & 1) as i64).collect();
        let label = model.predict(&values).unwrap();
        out.push(Instance::new(values, label));
    }
    out
}

#[test]
fn dt1_document_loads() {
    let m: Model = load_model(data("dt1.json")).unwrap();
    assert_eq!(m.space.num_features(), 2);
    assert_eq!(m.num_classes(), 2);
    assert_eq!(m.predict(&[1, 0]).unwrap(), fixtures::POS);
}

#[test]
fn canonical_documents_round_trip_byte_identically() {
    for name in ["dt1.json", "rf1.json", "bnn4.json"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let doc = ModelDocument::parse(&text).unwrap();
        assert_eq!(doc.to_canonical_string(), text, "{name}");
        let model: Model = doc.to_model().unwrap();
        assert_eq!(ModelDocument::from_model(&model), doc);
    }
}

#[test]
fn zero_variance_neuron_is_rejected() {
    let mut doc = ModelDocument::load(data("bnn4.json")).unwrap();
    doc.bnn.as_mut().unwrap().hidden[0].neurons[1].sigma = 0.0;
    let err = doc.to_model::<f64>().unwrap_err();
    assert!(err.to_string().contains("zero variance neuron"), "{err}");
}

#[test]
fn truncated_document_reports_byte_offset() {
    let text = std::fs::read_to_string(data("dt1.json")).unwrap();
    let cut = &text[..text.len() / 2];
    match ModelDocument::parse(cut).unwrap_err() {
        Error::Parse { offset, .. } => assert_eq!(offset, cut.len()),
        e => panic!("unexpected {e}"),
    }
    let err = ModelDocument::parse(cut).unwrap_err().to_string();
    assert!(err.contains(&format!("byte {}", cut.len())), "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    let text = std::fs::read_to_string(data("dt1.json")).unwrap();
    let bad = text.replacen("\"classes\"", "\"colour\": 1,\n  \"classes\"", 1);
    assert!(matches!(ModelDocument::parse(&bad), Err(Error::Parse { .. })));
}

#[test]
fn two_row_csv_for_dt1() {
    let m = fixtures::dt1();
    let csv = "x1,x2,label\n1,0,pos\n0,0,neg\n";
    let xs = read_instances(csv.as_bytes(), &m).unwrap();
    assert_eq!(xs, vec![Instance::new(vec![1, 0], fixtures::POS), Instance::new(vec![0, 0], fixtures::NEG)]);
}

#[test]
fn out_of_domain_value_names_row_and_column() {
    let mut doc = ModelDocument::from_model(&fixtures::constant(2, 0));
    doc.features[1] = FeatureDoc {
        name: "grade".into(),
        domain: vec![1, 2, 3, 4],
    };
    let m: Model = doc.to_model().unwrap();
    let csv = "x1,grade\n0,2\n1,7\n";
    match read_instances(csv.as_bytes(), &m).unwrap_err() {
        Error::Data { row, column, .. } => assert_eq!((row, column.as_str()), (2, "grade")),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn missing_label_column_uses_prediction() {
    let m = fixtures::dt1();
    let xs = read_instances("x2,x1\n0,1\n0,0\n1,0\n".as_bytes(), &m).unwrap();
    let labels: Vec<usize> = xs.iter().map(|x| x.label).collect();
    assert_eq!(labels, vec![fixtures::POS, fixtures::NEG, fixtures::POS]);
    assert_eq!(xs[0].values, vec![1, 0]);
}

#[test]
fn contradicting_label_is_rejected() {
    let m = fixtures::dt1();
    let err = read_instances("x1,x2,label\n1,0,neg\n".as_bytes(), &m).unwrap_err();
    assert!(err.to_string().contains("label mismatch"), "{err}");
}

#[test]
fn load_instances_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "x1,x2\n1,1\n").unwrap();
    assert_eq!(load_instances(&path, &fixtures::dt1()).unwrap().len(), 1);
}

#[test]
fn config_rejects_bad_budgets_and_thresholds() {
    assert!(RunConfig::default().validate().is_ok());
    for c in [
        RunConfig { tau: Some(0.0), ..RunConfig::default() },
        RunConfig { tau: Some(1.5), ..RunConfig::default() },
        RunConfig { call_budget: 0.0, ..RunConfig::default() },
        RunConfig { total_budget: -1.0, ..RunConfig::default() },
    ] {
        assert!(matches!(c.validate(), Err(Error::Parameter(_))));
    }
}

#[test]
fn bnn_preset_threshold() {
    let bnn: Model = ModelDocument::load(data("bnn4.json")).unwrap().to_model().unwrap();
    let c = RunConfig::default();
    assert_eq!(c.tau_for(&bnn.classifier), 0.99);
    assert_eq!(c.tau_for(&fixtures::dt1().classifier), 0.95);
}

#[test]
fn lmpaxp_on_dt1() {
    let m = Arc::new(fixtures::dt1());
    let r = run_explain(Command::Lmpaxp, &m, &[Instance::new(vec![1, 0], fixtures::POS)], &exact_config(0.95)).unwrap();
    let rec = &r.records[0];
    assert_eq!(rec.status, Status::Ok);
    assert_eq!(rec.features, vec![0]);
    assert_eq!(rec.names, vec!["x1"]);
    assert_eq!(r.aggregate.mean_length, Some(1.0));
    assert_eq!(r.aggregate.mean_precision, Some(1.0));
}

#[test]
fn axp_and_lmpaxp_agree_on_rf1() {
    let m = Arc::new(fixtures::rf1());
    let xs = [Instance::new(vec![1, 0], fixtures::POS), Instance::new(vec![1, 1], fixtures::POS)];
    let c = exact_config(0.95);
    let axp = run_explain(Command::Axp, &m, &xs, &c).unwrap();
    let lmp = run_explain(Command::Lmpaxp, &m, &xs, &c).unwrap();
    for (a, l) in axp.records.iter().zip(&lmp.records) {
        assert_eq!(a.features, vec![0]);
        assert_eq!(l.features, vec![0]);
        assert_eq!(l.reference_length, Some(1));
    }
    assert_eq!(lmp.aggregate.mean_ratio, Some(100.0));
}

#[test]
fn every_command_runs_on_fixtures() {
    let c = exact_config(0.9);
    for m in [fixtures::dt1(), fixtures::rf1(), forest(3, 6)] {
        let m = Arc::new(m);
        let xs = points(&m, 4, 11);
        for cmd in Command::ALL {
            let r = run_explain(cmd, &m, &xs, &c).unwrap();
            assert_eq!(r.aggregate.ok, xs.len(), "{cmd}");
            for rec in &r.records {
                assert!(rec.precision.unwrap() >= 0.9, "{cmd}");
                if matches!(cmd, Command::Ffa | Command::Ffaxp | Command::Lmpffaxp) {
                    assert_eq!(rec.ffa.as_ref().unwrap().len(), m.space.num_features());
                }
            }
        }
    }
}

#[test]
fn forced_timeout_marks_every_instance() {
    let m = Arc::new(forest(5, 14));
    let xs = points(&m, 5, 2);
    let c = RunConfig {
        tau: Some(0.95),
        estimator: EstimatorKind::Mc,
        total_budget: 0.001,
        ..RunConfig::default()
    };
    let r = run_explain(Command::Lmpaxp, &m, &xs, &c).unwrap();
    assert_eq!(r.aggregate.timeouts, xs.len());
    let back = Report::from_jsonl(&r.to_jsonl()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn bad_instances_become_error_records() {
    let m = Arc::new(fixtures::dt1());
    let xs = [Instance::new(vec![1, 0], fixtures::NEG), Instance::new(vec![0, 1], fixtures::POS)];
    let r = run_explain(Command::Axp, &m, &xs, &exact_config(0.95)).unwrap();
    assert_eq!(r.records[0].status, Status::Error);
    assert_eq!(r.records[1].status, Status::Ok);
    assert_eq!(r.aggregate.errors, 1);
}

#[test]
fn report_round_trip_and_self_consistency() {
    let m = Arc::new(forest(9, 8));
    let xs = points(&m, 6, 4);
    let c = RunConfig {
        tau: Some(0.9),
        timings: true,
        ..RunConfig::default()
    };
    let r = run_explain(Command::Lmpaxp, &m, &xs, &c).unwrap();
    let text = r.to_jsonl();
    assert_eq!(text.lines().count(), xs.len() + 1);
    assert_eq!(Report::from_jsonl(&text).unwrap(), r);
    assert!(r.to_table().contains("#TO 0"), "{}", r.to_table());

    let tampered = text.replacen("\"length\":", "\"length\":1", 1);
    assert!(Report::from_jsonl(&tampered).is_err());
    let truncated = &text[..text.len() - 20];
    assert!(Report::from_jsonl(truncated).is_err());
}

#[test]
fn reports_are_deterministic_without_timings() {
    let m = Arc::new(forest(13, 10));
    let xs = points(&m, 4, 8);
    for estimator in [EstimatorKind::Mc, EstimatorKind::Amc] {
        let c = RunConfig {
            tau: Some(0.9),
            estimator,
            epsilon: 0.3,
            delta: 0.2,
            seed: 42,
            ..RunConfig::default()
        };
        let a = run_explain(Command::Lmpaxp, &m, &xs, &c).unwrap().to_jsonl();
        let b = run_explain(Command::Lmpaxp, &m, &xs, &c).unwrap().to_jsonl();
        assert_eq!(a, b);
    }
}

#[test]
fn selection_picks_seeded_subsets() {
    assert_eq!(Selection::All.pick(3, 0).unwrap(), vec![1, 2, 3]);
    let a = Selection::Count(4).pick(10, 5).unwrap();
    assert_eq!(a.len(), 4);
    assert_eq!(a, Selection::Count(4).pick(10, 5).unwrap());
    assert_eq!(Selection::Fraction(0.25).pick(10, 5).unwrap().len(), 3);
    assert!(Selection::Fraction(0.0).pick(10, 5).is_err());
}

fn bench_models() -> Vec<BenchModel> {
    let m = Arc::new(forest(21, 8));
    vec![BenchModel {
        name: "rf8".into(),
        instances: points(&m, 10, 1),
        model: m,
    }]
}

#[test]
fn benchmark_row_for_a_fixture() {
    let rows = run_benchmark(&bench_models(), BenchOptions::default(), &exact_config(0.95)).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r.instances, 10);
    assert!(r.ratio.unwrap() <= 100.0);
    assert!(r.len_lmpaxp.unwrap() <= r.len_axp.unwrap());
    assert!(r.precision.unwrap() >= 0.95);
    let ffa = r.ffa.as_ref().unwrap();
    assert!(ffa.ratio.unwrap() <= 100.0);
    assert_eq!(r.time, None);
}

#[test]
fn benchmark_exact_rows_do_not_depend_on_the_seed_under_lex_order() {
    let run = |seed| {
        let c = RunConfig {
            seed,
            order: OrderKind::Lex,
            ..exact_config(0.9)
        };
        run_benchmark(&bench_models(), BenchOptions { selection: Selection::All, ffa: true }, &c).unwrap()
    };
    assert_eq!(run(1), run(2));
}

#[test]
fn benchmark_mc_rows_repeat_under_a_seed() {
    let c = RunConfig {
        tau: Some(0.9),
        seed: 77,
        ..RunConfig::default()
    };
    let opts = BenchOptions {
        selection: Selection::Count(5),
        ffa: false,
    };
    let a = run_benchmark(&bench_models(), opts, &c).unwrap();
    let b = run_benchmark(&bench_models(), opts, &c).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(run_benchmark::<f64>(&[], opts, &c).is_err());
}
