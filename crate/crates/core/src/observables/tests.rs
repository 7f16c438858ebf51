use std::sync::Arc;

use nalgebra::DVector;
use proptest::prelude::*;

use super::*;
use crate::models::{build_effective_hamiltonian, mhz, raman_effective_params, ModelConfig, Pulse, RamanDetuning};
use crate::quantum::{build_basis, Basis, DensityMatrix};
use crate::solvers::{initial_state, integrate, integrate_master, IntegrationSpec, Solver, States};

use AtomicLevel::*;

fn g21() -> BasisState {
    BasisState::new(G2, 1, 0)
}

fn from_vectors(basis: &Arc<Basis>, times: Vec<f64>, states: Vec<StateVector>) -> Trajectory {
    let n = times.len();
    Trajectory {
        basis: basis.clone(),
        kind: TrajectoryKind::Conditional,
        times,
        states: States::Vectors(states),
        emitted_l: vec![0.0; n],
        emitted_r: vec![0.0; n],
        spontaneous: vec![0.0; n],
    }
}

fn four_level_state(minus: Complex64, plus: Complex64) -> StateVector {
    let b = build_basis(ModelKind::FourLevel, 1).unwrap();
    let mut amps = DVector::zeros(b.dim());
    amps[b.index_of(&BasisState::new(GMinus, 1, 0)).unwrap()] = minus;
    amps[b.index_of(&BasisState::new(GPlus, 0, 1)).unwrap()] = plus;
    StateVector::from_amplitudes(&b, amps).unwrap()
}

#[test]
fn detection_without_drive_is_zero() {
    let c = ModelConfig::four_level(mhz(45.0), mhz(45.0), mhz(4.5), Pulse::sin2(0.0, 210.0));
    let tr = integrate(&c, &IntegrationSpec::for_config(&c).unwrap(), Solver::Conditional).unwrap();
    for &t in &[0.0, 100.0, 333.3, 630.0] {
        assert_eq!(photon_detection_probability(&tr, Mode::L, t).unwrap(), 0.0);
        assert_eq!(photon_detection_probability(&tr, Mode::R, t).unwrap(), 0.0);
    }
}

#[test]
fn detection_headline_value() {
    let c = ModelConfig::headline();
    let tr = integrate(&c, &IntegrationSpec::for_config(&c).unwrap(), Solver::Conditional).unwrap();
    for mode in [Mode::L, Mode::R] {
        let p = photon_detection_probability(&tr, mode, 630.0).unwrap();
        assert!((p - 0.49).abs() < 0.03, "{p}");
    }
    assert!(matches!(photon_detection_probability(&tr, Mode::L, 631.0), Err(Error::OutsideHorizon { .. })));
    assert!(photon_detection_probability(&tr, Mode::L, -1.0).is_err());
}

#[test]
fn detection_is_monotone_and_interpolated() {
    let c = ModelConfig::headline();
    let tr = integrate(&c, &IntegrationSpec::new(0.02, 630.0).with_records(50), Solver::Conditional).unwrap();
    let mut last = 0.0;
    for k in 0..=1000 {
        let p = photon_detection_probability(&tr, Mode::L, 0.63 * k as f64).unwrap();
        assert!(p >= last && p <= 1.0 + 1e-9);
        last = p;
    }
    let mid = 0.5 * (tr.times[3] + tr.times[4]);
    let expected = 0.5 * (tr.emitted_l[3] + tr.emitted_l[4]);
    assert!((photon_detection_probability(&tr, Mode::L, mid).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn trapped_photon_leaks_completely() {
    let kappa = 0.2;
    let c = ModelConfig::four_level(0.0, kappa, 0.0, Pulse::off());
    let b = c.basis().unwrap();
    let rho0 = DensityMatrix::from_pure(&StateVector::basis_state(&b, BasisState::new(GMinus, 1, 0)).unwrap());
    let t = 60.0;
    let tr = integrate_master(&c, &IntegrationSpec::new(0.01, t).with_records(10), &rho0).unwrap();
    assert!((photon_detection_probability(&tr, Mode::L, t).unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn bell_fidelity_examples() {
    let x = Complex64::new(0.3, -0.2);
    assert!((bell_fidelity(&four_level_state(x, x)).unwrap() - 1.0).abs() < 1e-15);
    assert!((bell_fidelity(&four_level_state(x, Complex64::new(0.0, 0.0))).unwrap() - 0.5).abs() < 1e-15);
    assert!(bell_fidelity(&four_level_state(x, -x)).unwrap().abs() < 1e-15);
    let zero = Complex64::new(0.0, 0.0);
    assert!(matches!(bell_fidelity(&four_level_state(zero, zero)), Err(Error::Undefined(_))));
    let raman = build_basis(ModelKind::ThreeLevelRaman, 1).unwrap();
    assert!(bell_fidelity(&initial_state(&raman)).is_err());
}

#[test]
fn bell_fidelity_on_headline_run() {
    let c = ModelConfig::headline();
    let tr = integrate(&c, &IntegrationSpec::for_config(&c).unwrap(), Solver::Conditional).unwrap();
    let r = merit_report(&tr, Readout::default());
    assert!((r.bell_fidelity.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn lossless_pi_pulse_transfers_fully() {
    let (g, delta, omega) = (mhz(20.0), mhz(1000.0), mhz(100.0));
    let c = ModelConfig::effective_two_level(g, 0.0, 0.0, delta, Pulse::constant(omega));
    let (omega_eff, _) = raman_effective_params(omega, g, delta, 0.0).unwrap();
    let t_pi = std::f64::consts::PI / (2.0 * omega_eff);
    let tr = integrate(&c, &IntegrationSpec::new(0.5, t_pi), Solver::Conditional).unwrap();
    let r = success_rate(&tr, &g21(), Readout::Final).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6);
    let peak = success_rate(&tr, &g21(), Readout::NumeratorPeak).unwrap();
    assert_eq!(peak.t, tr.horizon());
}

#[test]
fn no_drive_no_transfer() {
    let c = ModelConfig::three_level_raman(
        mhz(20.0),
        mhz(20.0),
        mhz(20.0),
        mhz(1000.0),
        RamanDetuning::Fixed(0.0),
        Pulse::off(),
    );
    let tr = integrate(&c, &IntegrationSpec::new(0.005, 50.0), Solver::Conditional).unwrap();
    for readout in [Readout::RatioPeak, Readout::NumeratorPeak, Readout::Final, Readout::At(25.0)] {
        assert_eq!(success_rate(&tr, &g21(), readout).unwrap().value, 0.0);
    }
}

#[test]
fn readout_time_must_be_recorded() {
    let c = ModelConfig::headline().with_kind(ModelKind::ThreeLevelRaman);
    let c = ModelConfig { delta: mhz(100.0), ..c };
    let tr = integrate(&c, &IntegrationSpec::new(0.01, 10.0).with_stride(100), Solver::Conditional).unwrap();
    assert!(success_rate(&tr, &g21(), Readout::At(1.0)).is_ok());
    assert!(matches!(success_rate(&tr, &g21(), Readout::At(1.05)), Err(Error::Undefined(_))));
    assert!(matches!(success_rate(&tr, &g21(), Readout::At(11.0)), Err(Error::OutsideHorizon { .. })));
    let master = integrate(&c, &IntegrationSpec::new(0.01, 1.0), Solver::Master).unwrap();
    assert!(success_rate(&master, &g21(), Readout::Final).is_err());
}

#[test]
fn vanishing_norm_is_undefined() {
    let b = build_basis(ModelKind::ThreeLevelRaman, 1).unwrap();
    let dead = StateVector::from_amplitudes(&b, DVector::zeros(b.dim())).unwrap();
    let tr = from_vectors(&b, vec![0.0, 1.0], vec![dead.clone(), dead]);
    assert!(matches!(success_rate(&tr, &g21(), Readout::Final), Err(Error::Undefined(_))));
    assert!(matches!(success_rate(&tr, &g21(), Readout::RatioPeak), Err(Error::Undefined(_))));
}

#[test]
fn raman_success_matches_exact_propagator() {
    // Constant drive: ψ(t) = exp(−iH_eff t)ψ₀ exactly, independent of the RK4 path.
    let gamma = mhz(20.0);
    let delta = 50.0 * gamma;
    let g = 30f64.sqrt() * gamma;
    let c = ModelConfig::three_level_raman(
        g,
        gamma,
        gamma,
        delta,
        RamanDetuning::StarkCompensated,
        Pulse::constant(0.4 * delta),
    );
    let (omega_eff, _) = c.raman_peak_params().unwrap();
    let horizon = 2.0 * std::f64::consts::PI / omega_eff;
    let spec = IntegrationSpec::new(0.2 * IntegrationSpec::step_limit(&c), horizon).with_records(400);
    let tr = integrate(&c, &spec, Solver::Conditional).unwrap();
    let got = success_rate(&tr, &g21(), Readout::RatioPeak).unwrap();

    let b = c.basis().unwrap();
    let h = build_effective_hamiltonian(&c, &b, 0.0).unwrap();
    let psi0 = initial_state(&b);
    let target = b.index_of(&g21()).unwrap();
    let mut best: f64 = 0.0;
    for &t in &tr.times {
        let u = (h.matrix() * Complex64::new(0.0, -t)).exp();
        let psi = u * psi0.amplitudes();
        best = best.max(psi[target].norm_sqr() / psi.norm_squared());
    }
    assert!((got.value - best).abs() < 1e-4, "integrator {} exact {best}", got.value);
    assert!(got.value > 0.5);
}

#[test]
fn emission_without_cavity_decay_is_zero() {
    let gamma = mhz(20.0);
    let delta = 10.0 * gamma;
    let c = ModelConfig::effective_two_level(mhz(20.0), 0.0, gamma, delta, Pulse::constant(delta));
    let spec = IntegrationSpec::new(0.5, 2000.0).stopping_below(1e-4);
    let tr = integrate(&c, &spec, Solver::Conditional).unwrap();
    assert_eq!(emission_rate(&tr).unwrap(), 0.0);
}

#[test]
fn emission_without_spontaneous_decay_is_unity() {
    let c = ModelConfig::three_level_raman(
        mhz(40.0),
        mhz(20.0),
        0.0,
        mhz(1000.0),
        RamanDetuning::StarkCompensated,
        Pulse::constant(mhz(400.0)),
    );
    let spec =
        IntegrationSpec::new(0.2 * IntegrationSpec::step_limit(&c), 20_000.0).with_records(100).stopping_below(1e-5);
    let tr = integrate(&c, &spec, Solver::Conditional).unwrap();
    assert!((emission_rate(&tr).unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn short_horizon_is_unsaturated() {
    let c = ModelConfig::headline();
    let tr = integrate(&c, &IntegrationSpec::new(0.02, 100.0), Solver::Conditional).unwrap();
    assert!(matches!(emission_rate(&tr), Err(Error::Unsaturated { .. })));
}

fn photon_gun(kappa_over_gamma: f64) -> ModelConfig {
    let gamma = mhz(20.0);
    let delta = 50.0 * gamma;
    ModelConfig::three_level_raman(
        2.0 * gamma,
        kappa_over_gamma * gamma,
        gamma,
        delta,
        RamanDetuning::StarkCompensated,
        Pulse::constant(0.4 * delta),
    )
    // every spontaneous decay lands in the dark |g2,0⟩
    .with_branching(vec![0.0, 1.0])
}

#[test]
fn emission_has_interior_optimum_in_kappa() {
    let scan = [0.01, 0.1, 1.0, 10.0];
    let mut values = Vec::new();
    for &k in &scan {
        let c = photon_gun(k);
        let spec =
            IntegrationSpec::new(0.5 * IntegrationSpec::step_limit(&c), 1e5).with_records(200).stopping_below(1e-4);
        let tr = integrate(&c, &spec, Solver::Conditional).unwrap();
        let emission = emission_rate(&tr).unwrap();
        let master_spec = IntegrationSpec { stop_below_norm: None, t_final: tr.horizon(), ..spec };
        let master = integrate(&c, &master_spec, Solver::Master).unwrap();
        let pm = *master.emitted_l.last().unwrap();
        assert!(((pm - emission) / emission).abs() < 0.01, "kappa/gamma {k}: master {pm} conditional {emission}");
        values.push(emission);
    }
    let best = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(best > 0 && best < scan.len() - 1, "{values:?}");
}

#[test]
fn bookkeeping_components() {
    let c = ModelConfig::four_level(1.0, 1.0, 1.0, Pulse::off());
    let tr = integrate(&c, &IntegrationSpec::new(0.01, 5.0), Solver::Conditional).unwrap();
    let book = probability_bookkeeping(&tr);
    assert_eq!((book.emitted_l, book.emitted_r, book.spontaneous, book.residual), (0.0, 0.0, 0.0, 0.0));
    assert!(book.check().is_ok());

    let c = ModelConfig::headline();
    let tr = integrate(&c, &IntegrationSpec::for_config(&c).unwrap(), Solver::Conditional).unwrap();
    assert!(probability_bookkeeping(&tr).residual < 1e-6);
    let tr = integrate(&c, &IntegrationSpec::for_config(&c).unwrap(), Solver::Master).unwrap();
    assert!(probability_bookkeeping(&tr).residual < 1e-8);
}

#[test]
fn unreliable_runs_are_flagged() {
    let b = build_basis(ModelKind::ThreeLevelRaman, 1).unwrap();
    let psi = initial_state(&b);
    let mut tr = from_vectors(&b, vec![0.0, 1.0], vec![psi.clone(), psi]);
    tr.emitted_l[1] = 0.01;
    let book = probability_bookkeeping(&tr);
    assert!(!book.reliable);
    assert!(matches!(book.check(), Err(Error::Unreliable(_))));
    assert!(merit_report(&tr, Readout::Final).is_flagged());
}

#[test]
fn unity_accounting_for_photon_gun() {
    let c = photon_gun(1.0).with_branching(vec![0.5, 0.5]);
    let spec = IntegrationSpec::new(0.5 * IntegrationSpec::step_limit(&c), 1e5).with_records(200).stopping_below(1e-4);
    let tr = integrate(&c, &spec, Solver::Conditional).unwrap();
    let book = probability_bookkeeping(&tr);
    let emission = emission_rate(&tr).unwrap();
    assert!((emission + book.spontaneous + book.norm_sqr - 1.0).abs() < 1e-6);
    assert!((emission + book.spontaneous - 1.0).abs() < 1e-3);
}

#[test]
fn report_text_lists_quantities() {
    let c = ModelConfig::headline();
    let tr = integrate(&c, &IntegrationSpec::for_config(&c).unwrap(), Solver::Conditional).unwrap();
    let r = merit_report(&tr, Readout::default());
    assert!(r.success_rate.is_none());
    let text = r.to_string();
    assert!(text.contains("P_L") && text.contains("bell_fidelity"));
}

proptest! {
    #[test]
    fn bell_fidelity_ignores_global_phase(re in -1.0f64..1.0, im in -1.0f64..1.0, re2 in -1.0f64..1.0, im2 in -1.0f64..1.0, phase in 0.0f64..std::f64::consts::TAU) {
        let (a, b) = (Complex64::new(re, im), Complex64::new(re2, im2));
        prop_assume!(a.norm_sqr() + b.norm_sqr() > 1e-6);
        let rot = Complex64::from_polar(1.0, phase);
        let f0 = bell_fidelity(&four_level_state(a, b)).unwrap();
        let f1 = bell_fidelity(&four_level_state(a * rot, b * rot)).unwrap();
        prop_assert!((f0 - f1).abs() < 1e-12);
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&f0));
    }

    #[test]
    fn success_rate_ignores_positive_scaling(scale in 1e-3f64..1e3, seed in 0u64..1000) {
        let c = photon_gun(1.0 + seed as f64 * 1e-3);
        let tr = integrate(&c, &IntegrationSpec::new(0.005, 20.0).with_stride(40), Solver::Conditional).unwrap();
        let scaled: Vec<StateVector> = tr.vectors().unwrap().iter().map(|p| p.scale(Complex64::new(scale, 0.0))).collect();
        let tr2 = from_vectors(&tr.basis, tr.times.clone(), scaled);
        for readout in [Readout::RatioPeak, Readout::Final] {
            let a = success_rate(&tr, &g21(), readout).unwrap();
            let b = success_rate(&tr2, &g21(), readout).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1e-300));
            prop_assert_eq!(a.t, b.t);
        }
    }
}
