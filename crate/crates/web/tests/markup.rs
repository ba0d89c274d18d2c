use esn_force_web::{compare_markup, run_markup, signal_markup};

#[test]
fn signal_is_one_series() {
    let svg = signal_markup(17, 1.2, 500).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("stroke-width=\"1.2\"").count(), 1);
    assert!(signal_markup(0, 1.2, 10).is_err());
    assert!(signal_markup(17, 1.2, 1_000_000).is_err());
}

#[test]
fn run_reports_and_draws_two_charts() {
    let html = run_markup("composite-rls", 30, 2.5, 3.0, 300, 100, 1).unwrap();
    assert!(html.contains("composite-rls seed 1: training MSE"));
    assert_eq!(html.matches("<svg").count(), 2);
    let err = run_markup("no-such-rule", 30, 2.5, 3.0, 300, 100, 1).unwrap_err();
    assert!(err.to_string().contains("method"));
    assert!(run_markup("rls-force", 1000, 2.5, 3.0, 300, 100, 1).is_err());
}

#[test]
fn compare_lists_all_rules() {
    let html = compare_markup(2, 20, 200, 100).unwrap();
    for m in ["rls-force", "composite-rls", "composite-lms"] {
        assert!(html.contains(m), "{m}");
    }
    assert!(compare_markup(0, 20, 200, 100).is_err());
}
