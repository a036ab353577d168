mod common;

use common::fixture_path;
use tailored_cc::cbt::Mode;
use tailored_cc::cbt::ShotBudget;
use tailored_cc::pipeline::{
    method_energy, run_prepared, run_scan, run_single, run_statistics, write_scan, Method, Prepared, RunConfig, Stage,
};

fn config(labels: &[&str], methods: &[Method]) -> RunConfig {
    RunConfig {
        fcidumps: labels.iter().map(|l| fixture_path(l)).collect(),
        methods: methods.iter().copied().collect(),
        ..Default::default()
    }
}

#[test]
fn hf_only_runs_no_solver_stages() {
    let cfg = config(&["n2_sto3g_2.06"], &[Method::Hf]);
    let p = Prepared::new(&cfg, &cfg.fcidumps[0]).unwrap();
    assert!(p.sys.is_none() && p.state.is_none() && p.space.is_none() && p.ccsd.is_none());
    let report = run_single(&cfg, &cfg.fcidumps[0]).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json.as_object().unwrap().keys().collect::<Vec<_>>(), ["e_hf"]);
}

#[test]
fn full_active_space_with_exact_tomography_reproduces_fci() {
    for label in ["h2_sto3g_1.40", "h2_631g_1.40"] {
        let mut cfg = config(&[label], &[Method::Casci, Method::TccC]);
        cfg.active = Some(if label.contains("631g") { (4, 2) } else { (2, 2) });
        cfg.cbt_mode = Mode::Exact;
        let (p, tail) = run_prepared(&cfg, &cfg.fcidumps[0]).unwrap();
        let tail = tail.unwrap();
        let report = p.report(Some(&tail));
        let e_fci = common::load(label).sidecar.e_fci.unwrap();
        assert!((report.e_corrected.unwrap() - e_fci).abs() < 1e-9, "{label}");
        assert!((report.e_casci.unwrap() - e_fci).abs() < 1e-9, "{label}");
        assert_eq!(tail.iterations, 0);
        assert!(report.e_tcc.is_none() && report.e_triples.is_none());
    }
}

#[test]
fn tailored_methods_need_an_active_space() {
    let cfg = config(&["h2_sto3g_1.40"], &[Method::Tcc]);
    let err = run_single(&cfg, &cfg.fcidumps[0]).unwrap_err();
    assert_eq!((err.stage, err.kind.as_str()), (Stage::Config, "active_space"));
}

#[test]
fn identical_seeds_give_identical_reports() {
    let mut cfg = config(&["lih_sto3g_3.016"], &[Method::Tcc, Method::TccC]);
    cfg.active = Some((2, 2));
    cfg.budget = ShotBudget::uniform(10_000, 20).unwrap();
    cfg.seed = 11;
    let a = run_single(&cfg, &cfg.fcidumps[0]).unwrap();
    let b = run_single(&cfg, &cfg.fcidumps[0]).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    cfg.seed = 12;
    let c = run_single(&cfg, &cfg.fcidumps[0]).unwrap();
    assert_ne!(a.e_tcc, c.e_tcc);
}

#[test]
fn single_point_scan_matches_a_single_run() {
    let mut cfg = config(&["lih_sto3g_3.016"], &[Method::Hf, Method::Ccsd, Method::TccC]);
    cfg.active = Some((2, 2));
    cfg.budget = ShotBudget::uniform(10_000, 20).unwrap();
    let rows = run_scan(&cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].point, "lih_sto3g_3.016");
    assert_eq!(
        rows[0].report.as_ref().unwrap(),
        &run_single(&cfg, &cfg.fcidumps[0]).unwrap()
    );
}

#[test]
fn scan_rejects_series_with_different_shapes() {
    let cfg = config(&["h2_sto3g_1.40", "lih_sto3g_3.016"], &[Method::Hf]);
    let err = run_scan(&cfg).unwrap_err();
    assert_eq!(err.kind, "series");
}

#[test]
fn scan_csv_columns_are_the_requested_methods() {
    let methods = [Method::Hf, Method::Ccsd, Method::CcsdT];
    let cfg = config(&["h2_sto3g_1.00", "h2_sto3g_2.00"], &methods);
    let rows = run_scan(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_scan(dir.path(), &rows, &cfg.methods).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "point,status,hf,ccsd,ccsd_t");
    for (line, row) in lines.zip(&rows) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[1], "ok");
        let e: f64 = fields[3].parse().unwrap();
        assert_eq!(Some(e), method_energy(row.report.as_ref().unwrap(), Method::Ccsd));
    }
}

/// The tailored error relative to FCI stays smooth along the N2
/// dissociation curve while plain CCSD breaks down.
#[test]
fn n2_scan_tailored_error_has_no_large_jumps() {
    let labels = ["n2_sto3g_1.50", "n2_sto3g_2.06", "n2_sto3g_3.00", "n2_sto3g_4.12"];
    let mut cfg = config(&labels, &[Method::Tcc]);
    cfg.active = Some((6, 6));
    cfg.cbt_mode = Mode::Exact;
    let rows = run_scan(&cfg).unwrap();
    let errors: Vec<f64> = rows
        .iter()
        .zip(labels)
        .map(|(row, l)| row.report.as_ref().unwrap().e_tcc.unwrap() - common::load(l).sidecar.e_fci.unwrap())
        .collect();
    for w in errors.windows(2) {
        assert!((w[1] - w[0]).abs() < 0.1, "errors {errors:?}");
    }
}

#[test]
fn exact_mode_statistics_have_zero_spread() {
    let mut cfg = config(&["lih_sto3g_3.016"], &[Method::TccC]);
    cfg.active = Some((2, 2));
    cfg.cbt_mode = Mode::Exact;
    cfg.repetitions = 3;
    cfg.budgets = vec![
        ShotBudget::uniform(1000, 10).unwrap(),
        ShotBudget::uniform(10_000, 10).unwrap(),
    ];
    let out = run_statistics(&cfg, &cfg.fcidumps[0]).unwrap();
    assert_eq!(out.raw.len(), 6);
    for s in &out.summaries {
        let st = s.stats.as_ref().unwrap();
        assert_eq!((s.n_ok, s.n_failed), (3, 0));
        assert_eq!(st.iqr, 0.0);
        assert_eq!(st.std, 0.0);
    }
    cfg.repetitions = 1;
    assert_eq!(run_statistics(&cfg, &cfg.fcidumps[0]).unwrap_err().kind, "repetitions");
}

#[test]
fn repetition_seeds_are_reproducible_in_isolation() {
    let mut cfg = config(&["lih_sto3g_3.016"], &[Method::TccC]);
    cfg.active = Some((2, 2));
    cfg.repetitions = 4;
    cfg.seed = 3;
    cfg.budgets = vec![ShotBudget::uniform(5000, 10).unwrap()];
    let out = run_statistics(&cfg, &cfg.fcidumps[0]).unwrap();
    let p = Prepared::new(&cfg, &cfg.fcidumps[0]).unwrap();
    let rec = &out.raw[2];
    let t = p.tail(rec.seed, &cfg.budgets[0]).unwrap();
    assert_eq!(Some(t.e_corrected), rec.e_corrected);
    let distinct: std::collections::BTreeSet<u64> = out.raw.iter().map(|r| r.e_corrected.unwrap().to_bits()).collect();
    assert!(distinct.len() > 1);
}
