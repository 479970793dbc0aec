use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use sinuous_core::dispersion::{apply_dispersion, compress, default_model, model_group_delay, model_phase, CapSpec, DispersionModel};
use sinuous_core::geometry::{
    active_region_radius, arm_edges, cell_arc_length, cell_radii, lowest_operating_frequency,
    sample_centerline, Medium, SinuousParams,
};
use sinuous_core::pulsegen::{
    differentiated_gaussian, model_transfer, synthesize_filtered, PulseSpec, TimeAxis,
};
use sinuous_core::spectral::{
    backpropagate_phase, group_delay, unwrap_phase_from_top, ComplexSpectrum, FrequencyGrid, PhaseCurve,
};

fn design() -> impl Strategy<Value = SinuousParams> {
    (1u32..=6, 1u32..=12, 0.5f64..0.95, 0.2f64..1.2, 0.05f64..0.6)
        .prop_filter("alpha + delta < pi", |(_, _, _, a, d)| a + d < PI - 1e-3)
        .prop_map(|(n, p, tau, alpha, delta)| {
            let r1 = 0.1;
            let r_in = 0.5 * r1 * tau.powi(p as i32);
            SinuousParams::new(n, p, r1, r_in, tau, alpha, delta).unwrap()
        })
}

fn capped_model() -> impl Strategy<Value = DispersionModel> {
    (5.0f64..30.0, 5e9f64..12e9, 0.3e9f64..1.5e9, prop::option::of(1e-9f64..6e-9)).prop_map(
        |(phi0, f0, f_low, tau_c)| {
            DispersionModel::new(phi0, f0)
                .unwrap()
                .with_cap(CapSpec { f_low, tau_c })
                .unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn centerline_bounded_and_zero_at_boundaries(p in design(), spc in 4usize..40) {
        let line = sample_centerline(&p, spc).unwrap();
        let radii = cell_radii(&p);
        for pt in &line.points {
            prop_assert!(pt.phi.abs() <= p.alpha() * (1.0 + 1e-12));
        }
        for r in &radii {
            let on = line.points.iter().find(|q| ((q.r - r) / r).abs() < 1e-12);
            prop_assert!(on.is_some());
            prop_assert!(on.unwrap().phi.abs() < 1e-12);
        }
        let (lo, hi) = arm_edges(&p, spc).unwrap();
        for pt in lo.points.iter().chain(&hi.points) {
            prop_assert!(pt.phi.abs() <= (p.alpha() + p.delta()) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn radii_are_geometric(p in design()) {
        let r = cell_radii(&p);
        for w in r.windows(2) {
            prop_assert!(w[1] < w[0]);
            prop_assert!((w[1] / w[0] / p.tau() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lowest_frequency_inverts_active_radius(p in design(), eps in 1.0f64..10.0) {
        let m = Medium::from_permittivity(eps).unwrap();
        let f = lowest_operating_frequency(&p, &m);
        let a = active_region_radius(f, &p, &m).unwrap();
        prop_assert!((a.radius / p.r1() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaling_lengths(p in design()) {
        let s = p.scaled(2.0).unwrap();
        let m = Medium::free_space();
        let ratio = lowest_operating_frequency(&p, &m) / lowest_operating_frequency(&s, &m);
        prop_assert!((ratio - 2.0).abs() < 1e-12);
        let a = cell_arc_length(&p, 1, 64).unwrap();
        let b = cell_arc_length(&s, 1, 64).unwrap();
        prop_assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unwrapped_steps_within_pi(raw in prop::collection::vec(-10.0f64..10.0, 3..200)) {
        let grid = FrequencyGrid::new(1e9, 1e6, raw.len()).unwrap();
        let out = unwrap_phase_from_top(&PhaseCurve::new(grid, raw).unwrap());
        for w in out.phase.windows(2) {
            prop_assert!((w[1] - w[0]).abs() <= PI * (1.0 + 1e-12));
        }
    }

    #[test]
    fn linear_phase_has_constant_delay(delay in -5e-9f64..50e-9, c in -10.0f64..10.0, n in 3usize..300) {
        let grid = FrequencyGrid::new(0.1e9, 7e6, n).unwrap();
        let phase = grid.freqs().map(|f| c - TAU * f * delay).collect();
        let gd = group_delay(&PhaseCurve::new(grid, phase).unwrap()).unwrap();
        let scale = delay.abs().max(1e-12);
        for d in gd.delay {
            prop_assert!((d - delay).abs() <= 1e-9 * scale + 1e-18);
        }
    }

    #[test]
    fn backpropagation_removes_path(r_p in 0.0f64..0.5, eps in 1.0f64..9.0, phi0 in 1.0f64..25.0) {
        let m = Medium::from_permittivity(eps).unwrap();
        let grid = FrequencyGrid::span(0.5e9, 10e9, 10e6).unwrap();
        let model = DispersionModel::new(phi0, 10e9).unwrap();
        let field = ComplexSpectrum::from_fn(grid, |f| {
            Complex64::from_polar(1.0, model.phase_at(f) - TAU * f * r_p / m.velocity())
        })
        .unwrap();
        let bp = backpropagate_phase(&field, r_p, &m).unwrap();
        let truth = model_phase(&model, &grid).unwrap();
        let offset = bp.phase.phase[0] - truth.phase[0];
        prop_assert!(((offset / TAU) - (offset / TAU).round()).abs() < 1e-9);
        for (a, b) in bp.phase.phase.iter().zip(&truth.phase) {
            prop_assert!((a - b - offset).abs() < 1e-7);
        }
    }

    #[test]
    fn log_periodic_half_turn(tau in 0.5f64..0.97, f0 in 1e9f64..20e9, f in 0.1e9f64..20e9) {
        let m = default_model(tau, f0).unwrap();
        prop_assert_eq!(m.phase_at(f0), 0.0);
        prop_assert!((m.phase_at(tau * f) - m.phase_at(f) - PI).abs() < 1e-9);
    }

    #[test]
    fn cap_is_continuous(m in capped_model()) {
        let cap = m.cap().unwrap();
        let below = cap.f_low * (1.0 - 1e-13);
        prop_assert!((m.phase_at(below) - m.phase_at(cap.f_low)).abs() < 1e-9);
        let grid = FrequencyGrid::span(0.1e9, 12e9, 10e6).unwrap();
        let gd = model_group_delay(&m, &grid).unwrap();
        prop_assert!(gd.delay.iter().all(|d| d.is_finite() && *d > 0.0));
    }

    #[test]
    fn dispersion_round_trip_and_magnitude(m in capped_model(), passes in 1u32..4, seed in any::<u64>()) {
        let grid = FrequencyGrid::span(0.1e9, 12e9, 50e6).unwrap();
        let spec = ComplexSpectrum::from_fn(grid, |f| {
            let k = (f / 50e6) as u64 ^ seed;
            Complex64::new((k % 97) as f64 - 48.0, (k % 89) as f64 - 44.0)
        })
        .unwrap();
        let d = apply_dispersion(&spec, &m, passes).unwrap();
        let back = compress(&d, &m, passes).unwrap();
        for ((a, b), c) in spec.values.iter().zip(&back.values).zip(&d.values) {
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
            prop_assert!((a.norm() - c.norm()).abs() <= 1e-12 * a.norm().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn all_pass_synthesis_is_invertible(phi0 in 1.0f64..25.0, f_bw in 3e9f64..9e9) {
        let model = default_model((-PI / phi0).exp(), 10e9).unwrap();
        let band = FrequencyGrid::span(0.8e9, 10e9, 1e6).unwrap();
        let pulse = PulseSpec::new(1.0, 0.0, f_bw).unwrap();
        let axis = TimeAxis::for_dispersion(&model, &band, 1, &pulse, 2e-9).unwrap();
        let x = differentiated_gaussian(&pulse.with_mu(1e-9), axis.t0, axis.dt, axis.n).unwrap();
        let fwd = model_transfer(&x, &model, &band, 1, 1.0).unwrap();
        let d = synthesize_filtered(&x, &fwd).unwrap();
        let bwd = model_transfer(&x, &model, &band, 1, -1.0).unwrap();
        let c = synthesize_filtered(&d.series, &bwd).unwrap();
        prop_assert!(d.imag_residue <= 1e-12 && c.imag_residue <= 1e-12);
        prop_assert!((d.series.energy() / x.energy() - 1.0).abs() < 1e-9);
        let err: f64 = x.samples.iter().zip(&c.series.samples).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * x.dt;
        prop_assert!((err / x.energy()).sqrt() < 1e-10);
    }
}
