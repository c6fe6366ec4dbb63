use evapsbp::energy::{
    bt_side, itsat_closed_form, itsat_envelope, measured_rate, outer_data_bound, PhaseView,
};
use evapsbp::interface::mesh_velocity;
use evapsbp::sbp::min_points;
use evapsbp::verify::RandomInterface;
use evapsbp::{assemble_rhs, audit_step, preset, PresetName, SbpOperator, Side};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn order() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(6)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_by_parts(order in order(), extra in 0usize..60, seed in any::<u64>()) {
        let n = min_points(order).unwrap() + extra;
        let op = SbpOperator::<f64>::unit_interval(order, n).unwrap();
        prop_assert!(op.norm().iter().all(|&p| p > 0.0));
        prop_assert!(op.sbp_property_residual() <= 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let lhs = op.inner(&u, &op.apply_derivative(&v).unwrap()) + op.inner(&op.apply_derivative(&u).unwrap(), &v);
        let rhs = u[n - 1] * v[n - 1] - u[0] * v[0];
        let scale = op.derivative_inf_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
    }

    #[test]
    fn derivative_of_linear_is_exact(order in order(), extra in 0usize..40, a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let n = min_points(order).unwrap() + extra;
        let op = SbpOperator::<f64>::unit_interval(order, n).unwrap();
        let f: Vec<f64> = op.grid().iter().map(|x| a + b * x).collect();
        for d in op.apply_derivative(&f).unwrap() {
            prop_assert!((d - b).abs() <= 1e-11 * (1.0 + b.abs()) * n as f64);
        }
    }

    #[test]
    fn interface_terms_match_closed_form_and_envelope(seed in any::<u64>(), regime in 0usize..3) {
        let ord = [std::cmp::Ordering::Less, std::cmp::Ordering::Greater, std::cmp::Ordering::Equal][regime];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = RandomInterface::sample(&mut rng, ord);
        let (v, l) = s.views();
        let pen = s.penalties();
        let total = evapsbp::energy::it_direct(&v, &l, s.a_v, s.a_l()).unwrap()
            + evapsbp::energy::sat_direct(&v, &l, s.t_delta, &pen).unwrap();
        let iv = s.interface_values().unwrap();
        let closed = itsat_closed_form(&iv);
        prop_assert!((total - closed).abs() <= 1e-10 * closed.abs().max(1.0));
        prop_assert!(closed <= itsat_envelope(&iv) + 1e-12 * closed.abs().max(1.0));
    }

    #[test]
    fn outer_boundary_is_data_bounded(
        seed in any::<u64>(),
        a in -3.0..3.0f64,
        beta in 0.1..3.0f64,
        k in 0.01..2.0f64,
        j in 0.05..2.0f64,
        bc in -2.0..2.0f64,
        first in any::<bool>(),
    ) {
        let op = SbpOperator::<f64>::unit_interval(4, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Vec<f64> = (0..24).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect();
        let ph = PhaseView { temps: &t, op: &op, beta, k, jacobian: j };
        let side = if first { Side::First } else { Side::Last };
        let b = side.index(24);
        let g = op.apply_derivative(&t).unwrap()[b];
        let bt = bt_side(&ph, side, a, bc, 1.0).unwrap();
        let borrowed = 2.0 * k / j * op.norm()[b] * g * g;
        let bound = outer_data_bound(&ph, side, a, 1.0) * bc * bc;
        prop_assert!(bt - borrowed <= bound + 1e-10 * (bound.abs() + borrowed + bt.abs()).max(1.0));
    }

    #[test]
    fn rhs_identity_on_perturbed_states(
        seed in any::<u64>(),
        which in 0usize..3,
        shift in 0.5..1.5f64,
    ) {
        let name = PresetName::ALL[which];
        let s = preset::<f64>(name);
        let p = s.problem().unwrap();
        let mut st = s.initial_state(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_v = st.t_v.len() as f64;
        for (i, t) in st.t_v.iter_mut().enumerate() {
            *t += 3.0 * (i as f64 / n_v * std::f64::consts::PI * shift).sin() + rand::Rng::gen_range(&mut rng, -0.1..0.1);
        }
        for t in st.t_l.iter_mut() {
            *t += rand::Rng::gen_range(&mut rng, -0.5..0.5);
        }
        st.x_delta *= shift;
        let r = assemble_rhs(&st, &p).unwrap();
        prop_assert_eq!(
            r.dx_delta,
            mesh_velocity(r.interface.flux_v, r.interface.flux_l, p.interface.rho_v, p.interface.h_lv).unwrap()
        );
        let led = audit_step(&st, &r, &p).unwrap();
        prop_assert!(led.identity_residual <= 1e-10, "{:?}", led);
        prop_assert!(led.closed_form_residual <= 1e-10);
        prop_assert!(led.energy > 0.0 && led.dissipation > 0.0);
        prop_assert_eq!(led.rate_measured, measured_rate(&st, &r, &p));
    }
}

#[test]
fn single_precision_operators() {
    for order in [2, 4, 6] {
        let op = SbpOperator::<f32>::unit_interval(order, 41).unwrap();
        assert!(op.sbp_property_residual() <= 1e-5);
        let f: Vec<f32> = op.grid().iter().map(|x| 2.0 * x - 1.0).collect();
        for d in op.apply_derivative(&f).unwrap() {
            assert!((d - 2.0).abs() <= 1e-3);
        }
    }
}
