//! Property tests for the element closed forms and network composition.

use num_complex::Complex64;
use proptest::prelude::*;

use pifilter_core::elements::{
    abcd_series, abcd_shunt, abcd_tline, open_stub_admittance, pi_filter_abcd, LineSpec, TwoPort,
};
use pifilter_core::network::{cascade, s_params, terminated_impedance, Load};
use pifilter_core::velocity_from_eps_eff;

const V: f64 = 122_902_925.328_896_45; // c / sqrt(5.95)

fn line(len_mm: f64, z: f64) -> LineSpec {
    LineSpec::new(len_mm * 1e-3, z, V)
}

/// Random frequency avoiding the tan poles of all given stubs.
fn non_pole(omega: f64, specs: &[&LineSpec]) -> bool {
    specs
        .iter()
        .all(|s| (s.beta() * omega).tan().abs() < 1e6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn pi_composition_equals_cascade(
        lp in 3.0f64..12.0,
        lm in 3.0f64..12.0,
        li in 2.0f64..15.0,
        z in 20.0f64..120.0,
        f_ghz in 0.5f64..9.0,
    ) {
        let (lp, lm, li) = (line(lp, z), line(lm, z), line(li, z));
        let omega = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
        prop_assume!(non_pole(omega, &[&lp, &lm, &li]));
        let closed = pi_filter_abcd(&lp, &lm, &li, omega).value;
        let casc = abcd_shunt(open_stub_admittance(&lp, omega).value)
            .then(&abcd_tline(&li, omega))
            .then(&abcd_shunt(open_stub_admittance(&lm, omega).value));
        let scale = [closed.a, closed.b, closed.c, closed.d]
            .iter()
            .map(|x| x.norm())
            .fold(1.0, f64::max);
        prop_assert!((closed.a - casc.a).norm() <= 1e-12 * scale);
        prop_assert!((closed.b - casc.b).norm() <= 1e-12 * scale);
        prop_assert!((closed.c - casc.c).norm() <= 1e-12 * scale);
        prop_assert!((closed.d - casc.d).norm() <= 1e-12 * scale);
    }

    #[test]
    fn elements_are_reciprocal_and_lossless(
        len in 1.0f64..25.0,
        z in 20.0f64..120.0,
        f_ghz in 0.1f64..9.0,
        c_ff in 5.0f64..500.0,
    ) {
        let omega = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
        let spec = line(len, z);
        prop_assume!(non_pole(omega, &[&spec]));
        let parts = [
            abcd_tline(&spec, omega),
            abcd_series(1.0 / (Complex64::i() * omega * c_ff * 1e-15)),
            abcd_shunt(open_stub_admittance(&spec, omega).value),
        ];
        for m in &parts {
            let det = m.det();
            prop_assert!((det - Complex64::new(1.0, 0.0)).norm() <= 1e-12 * det.norm().max(1.0));
            // lossless structure: real diagonal, imaginary off-diagonal
            prop_assert!(m.a.im == 0.0 && m.d.im == 0.0);
            prop_assert!(m.b.re == 0.0 && m.c.re == 0.0);
        }
    }

    #[test]
    fn cascade_fold_direction_is_irrelevant(
        lens in prop::collection::vec(1.0f64..20.0, 8),
        f_ghz in 0.5f64..8.0,
    ) {
        let omega = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
        let parts: Vec<TwoPort> = lens
            .iter()
            .enumerate()
            .map(|(i, &l)| match i % 3 {
                0 => abcd_tline(&line(l, 50.0), omega),
                1 => abcd_series(1.0 / (Complex64::i() * omega * l * 1e-14)),
                _ => abcd_shunt(Complex64::new(0.0, l * 1e-4)),
            })
            .collect();
        let fold_left = cascade(&parts);
        let fold_right = parts
            .iter()
            .rev()
            .fold(TwoPort::IDENTITY, |acc, p| p.then(&acc));
        let scale = [fold_left.a, fold_left.b, fold_left.c, fold_left.d]
            .iter()
            .map(|x| x.norm())
            .fold(1.0, f64::max);
        prop_assert!((fold_left.a - fold_right.a).norm() <= 1e-12 * scale);
        prop_assert!((fold_left.b - fold_right.b).norm() <= 1e-12 * scale);
        prop_assert!((fold_left.c - fold_right.c).norm() <= 1e-12 * scale);
        prop_assert!((fold_left.d - fold_right.d).norm() <= 1e-12 * scale);
    }

    #[test]
    fn lossless_two_port_scattering_is_unitary(
        lens in prop::collection::vec(1.0f64..20.0, 5),
        z_in in 20.0f64..120.0,
        z_out in 20.0f64..120.0,
        f_ghz in 0.5f64..8.0,
    ) {
        let omega = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
        let specs: Vec<LineSpec> = lens.iter().map(|&l| line(l, 30.0 + l)).collect();
        // |tan| < 100 keeps the cascade entries in the operating range;
        // reciprocity at 1e-10 absolute is a statement about that range
        // (det drift grows as eps * entries^2 toward the stub poles)
        prop_assume!(specs.iter().all(|s| (s.beta() * omega).tan().abs() < 100.0));
        let parts: Vec<TwoPort> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| match i % 3 {
                0 => abcd_tline(s, omega),
                1 => abcd_shunt(open_stub_admittance(s, omega).value),
                _ => abcd_series(1.0 / (Complex64::i() * omega * 8e-14)),
            })
            .collect();
        let m = cascade(&parts);
        let s = s_params(&m, z_in, z_out);
        let power = s.s11.norm_sqr() + s.s21.norm_sqr();
        prop_assert!((power - 1.0).abs() <= 1e-9, "power = {power}");
        prop_assert!((s.s12 - s.s21).norm() <= 1e-10, "{:e}", (s.s12 - s.s21).norm());
    }

    #[test]
    fn passive_termination_keeps_re_nonnegative(
        lens in prop::collection::vec(1.0f64..20.0, 4),
        re_l in 0.0f64..200.0,
        im_l in -200.0f64..200.0,
        f_ghz in 0.5f64..8.0,
    ) {
        let omega = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
        let specs: Vec<LineSpec> = lens.iter().map(|&l| line(l, 40.0 + l * 2.0)).collect();
        prop_assume!(specs.iter().all(|s| (s.beta() * omega).tan().abs() < 1e6));
        let parts: Vec<TwoPort> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| match i % 2 {
                0 => abcd_tline(s, omega),
                _ => abcd_shunt(open_stub_admittance(s, omega).value),
            })
            .collect();
        let m = cascade(&parts);
        let z = terminated_impedance(&m, Load::Impedance(Complex64::new(re_l, im_l)));
        prop_assume!(!z.saturated);
        prop_assert!(
            z.value.re >= -1e-12 * z.value.norm().max(1.0),
            "Re Z_in = {}",
            z.value.re
        );
    }

    #[test]
    fn pi_analytic_equals_terminated_cascade(
        lp in 3.0f64..12.0,
        lm in 3.0f64..12.0,
        li in 2.0f64..15.0,
        z0 in 20.0f64..120.0,
        f_ghz in 0.5f64..9.0,
    ) {
        let v = velocity_from_eps_eff(5.95);
        let mk = |mm: f64| LineSpec::new(mm * 1e-3, 50.48, v);
        let (lp, lm, li) = (mk(lp), mk(lm), mk(li));
        let omega = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
        prop_assume!([&lp, &lm, &li]
            .iter()
            .all(|s| (s.beta() * omega).tan().abs() < 1e6));
        let analytic =
            pifilter_core::network::pi_impedance_analytic(&lp, &lm, &li, z0, omega);
        let m = pi_filter_abcd(&lp, &lm, &li, omega).value;
        let reference = terminated_impedance(&m, Load::Impedance(Complex64::new(z0, 0.0)));
        prop_assume!(!reference.saturated && !analytic.saturated);
        let rel = (analytic.value - reference.value).norm() / reference.value.norm();
        prop_assert!(rel <= 1e-10, "rel = {rel}");
    }
}
