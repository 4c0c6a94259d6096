//! End-to-end checks through the public API: spectra, resolvents and runs.

use phs_core::analytic::resolvent::resolve;
use phs_core::analytic::spectrum::{spectrum_scan, Region};
use phs_core::discretize::{assemble_generator, build_grid};
use phs_core::presets::{moving_family, resistive_ends, resistive_ends_abscissa, shorted_line, transmission_line};
use phs_core::simulate::{simulate_fixed, simulate_moving, InitialState, Scenario};
use phs_core::{MovingPath, PiecewiseField, Side};

fn bump() -> InitialState {
    InitialState::Bump { center: -0.4, width: 0.2, amplitude: [1.0, 0.5] }
}

#[test]
fn resistive_ends_spectrum_matches_closed_form() {
    let sys = resistive_ends(4.0).unwrap();
    let region = Region::new(-2.0, 1.0, -8.0, 8.0).unwrap();
    let s = spectrum_scan(&sys.profile, &sys.bc, &sys.interface, &region, &[]).unwrap();
    let alpha = resistive_ends_abscissa(4.0);
    assert!(!s.eigenvalues.is_empty());
    for z in &s.eigenvalues {
        assert!((z.re - alpha).abs() < 1e-8, "eigenvalue {z} off the line Re = {alpha}");
    }
}

#[test]
fn discrete_resolvent_approaches_analytic_one() {
    let sys = transmission_line(1.0, 2.0).unwrap();
    let y = PiecewiseField::from_poly_coeffs(
        -1.0,
        0.0,
        1.0,
        &[vec![1.0, 0.5], vec![0.0, -1.0]],
        &[vec![0.2, 0.0, 1.0], vec![-0.5, 0.3]],
    )
    .unwrap();
    let exact = resolve(2.0, &y, &sys.profile, &sys.bc, &sys.interface).unwrap();
    let mut errs = Vec::new();
    for n in [32, 64] {
        let grid = build_grid(-1.0, 0.0, 1.0, n, n).unwrap();
        let gen = assemble_generator(&grid, &sys.profile, &sys.bc, &sys.interface).unwrap();
        let xi = gen.resolve(2.0, |side: Side, z| y.eval2(side, z)).unwrap();
        let (e, norm) = gen.error_against(&xi, |side: Side, z| exact.phi.eval2(side, z));
        errs.push(e / norm);
    }
    assert!(errs[0] < 1e-2, "coarse error {}", errs[0]);
    assert!(errs[1] < errs[0] / 3.0, "errors {errs:?} do not shrink");
}

#[test]
fn lossless_run_keeps_energy_and_lossy_run_loses_it() {
    let lossless = shorted_line(0.2).unwrap();
    let lossy = transmission_line(1.0, 1.0).unwrap();
    let run = |sys: phs_core::presets::InterfaceSystem| {
        simulate_fixed(&Scenario {
            path: MovingPath::Fixed { l0: sys.interface.l },
            r: sys.interface.r,
            profile: sys.profile,
            bc: sys.bc,
            initial: bump(),
            n_minus: 32,
            n_plus: 32,
            dt: 1e-2,
            t_end: 2.0,
            keep_states: false,
        })
        .unwrap()
    };
    let s = run(lossless);
    assert!(s.energy_drift().abs() < 1e-10);
    let s = run(lossy);
    assert!(s.energy_drift() < -1e-3);
    assert!(s.records.windows(2).all(|w| w[1].h <= w[0].h * (1.0 + 1e-12)));
}

#[test]
fn moving_interface_run_carries_a_certificate() {
    let fam = moving_family(0.5, 2.0, MovingPath::Linear { l0: 0.0, v: 0.3 }, 1.0).unwrap();
    let s = simulate_moving(&Scenario {
        profile: fam.profile,
        bc: fam.bc,
        path: fam.path,
        r: fam.r,
        initial: bump(),
        n_minus: 16,
        n_plus: 16,
        dt: 1e-2,
        t_end: 1.0,
        keep_states: false,
    })
    .unwrap();
    assert_eq!(s.label, "family approximation");
    assert!(s.bound_certificate.unwrap().held);
}
