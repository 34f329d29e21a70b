use condind::harness::{run_power_experiment, to_csv, ExperimentPlan, SCHEMA_VERSION};

const BASE: &str = "schema_version=1\nmode=binary\nn=40\neps=0.5\nm=1600\ncalibration_trials=100\nseed=11\ntau=calibrate\n";

fn plan(extra: &str) -> ExperimentPlan {
    ExperimentPlan::parse(&format!("{BASE}{extra}")).unwrap()
}

#[test]
fn csv_is_reproducible() {
    let p = plan("null=yes_binary_r1\nalt=no_binary_r1\ntrials=60\nn=30,40\n");
    let a = to_csv(&run_power_experiment(&p).unwrap());
    let b = to_csv(&run_power_experiment(&p).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
    assert!(a.starts_with("schema_version,mode,null,alt,n,"));
    assert!(a.lines().skip(1).all(|l| l.starts_with(&SCHEMA_VERSION.to_string())));
}

#[test]
fn identical_families_mirror_rates() {
    let rows = run_power_experiment(&plan("null=random_ci\nalt=random_ci\ntrials=400\n")).unwrap();
    let r = &rows[0];
    let se = (r.accept_rate_null * (1.0 - r.accept_rate_null) / r.trials as f64).sqrt();
    assert!((r.reject_rate_alt - (1.0 - r.accept_rate_null)).abs() <= 4.0 * se * 2f64.sqrt() + 1e-12);
    for row in &rows {
        assert!((0.0..=1.0).contains(&row.accept_rate_null) && (0.0..=1.0).contains(&row.reject_rate_alt));
        let k = row.accept_rate_null * row.trials as f64;
        assert!((k - k.round()).abs() < 1e-9);
    }
}

/// Quadrupling the trials halves the binomial standard error of the accept
/// rate, within 20%.
#[test]
fn standard_error_scaling() {
    let se = |trials: usize| {
        let rows = run_power_experiment(&plan(&format!("null=yes_binary_r1\nalt=no_binary_r1\ntrials={trials}\n"))).unwrap();
        let r = rows[0].accept_rate_null;
        (r * (1.0 - r) / trials as f64).sqrt()
    };
    let ratio = se(100) / se(400);
    assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
}
