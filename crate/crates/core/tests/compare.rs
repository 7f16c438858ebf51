//! Smoke test of the protocol comparison at the default corner, with each
//! table entry re-derived by a direct evaluation at its optimizer argmax.

use photon_gun::exec::Execution;
use photon_gun::io::{comparison_csv, load_config};
use photon_gun::observables::probability_bookkeeping;
use photon_gun::solvers::{integrate, Solver};
use photon_gun::sweep::{apply_params, compare_protocols, evaluate, Objective, ParamName, SearchOptions};

#[test]
fn default_corner_table() {
    let cfg = load_config("protocol_compare").unwrap();
    let mut options = cfg.compare_options();
    options.search = SearchOptions { coarse_points: 5, max_outer: 2, golden_tolerance: 1e-2, ..Default::default() };
    let table = compare_protocols(&cfg.model, &[0.5, 2.0], &options, Execution::default()).unwrap();
    assert!(!table.is_flagged());
    assert_eq!(table.rows.len(), 2);

    for row in &table.rows {
        let base = apply_params(
            &cfg.model,
            &[(ParamName::KappaOverGamma, row.kappa_over_gamma), (ParamName::Cooperativity, cfg.model.cooperativity())],
        )
        .unwrap();
        assert_eq!(row.cells.len(), 4);
        for cell in &row.cells {
            let opt = cell.optimum.as_ref().unwrap();
            assert!((0.0..=1.0).contains(&opt.value), "{cell:?}");
            let c = apply_params(&cell.protocol.configure(&base, &options), &opt.argmax).unwrap();
            let direct = evaluate(&c, cell.objective, &options.policy);
            assert_eq!(direct.value, Some(opt.value));
            if cell.objective == Objective::EmissionRate {
                let spec = options.policy.spec(&c, Objective::EmissionRate).unwrap();
                let book = probability_bookkeeping(&integrate(&c, &spec, Solver::Conditional).unwrap());
                assert!((opt.value + book.spontaneous - 1.0).abs() < 1e-3, "{cell:?}");
            }
        }
    }

    let csv = comparison_csv(&table);
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with(
        "kappa_over_gamma,constant_success_rate,adiabatic_success_rate,constant_emission_rate,adiabatic_emission_rate,"
    ));
    assert!(header.ends_with(",flag"));
    assert_eq!(csv.lines().count(), 3);
}
