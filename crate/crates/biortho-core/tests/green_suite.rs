//! Full verification suite against the Green-function map at its production
//! configuration.  Slow compared to the unit tests (~seconds), which is why
//! it lives as an integration test.

use biortho_core::green::GreenMap;
use biortho_core::spectral::QuadratureRule;
use biortho_core::verifier::{run_suite, Battery};

#[test]
fn green_suite_passes_at_map_tolerance() {
    let map = GreenMap::new(384, 30.0, 8192).unwrap();
    let rule = QuadratureRule::gauss_hermite(768);
    let battery = Battery::standard(384, &rule).unwrap();
    let report = run_suite(&map, &battery, 1e-5);
    for line in report.console_lines() {
        println!("{line}");
    }
    assert!(report.pass, "{}", report.to_json());

    // Convergence claim from the quasi-basis: coarser truncation is worse.
    // Member 17 is the off-centre wide gaussian (a = 3, w = 2), whose
    // expansion genuinely needs many modes.
    let hard = &battery.members[17];
    assert_eq!(hard.0, "gaussian:a=3,w=2");
    let q = |m| biortho_core::verifier::check_quasi_basis(&map, &hard.1, &hard.1, m).unwrap();
    assert!(q(64) < q(16) / 1e3, "64: {:.3e}, 16: {:.3e}", q(64), q(16));
}
