use num_complex::Complex64 as C64;
use proptest::prelude::*;

use holoflow_core::construct::{make_block, ExtPoint};
use holoflow_core::expr::HoloExpr;
use holoflow_core::hypgeo::{hyp_dist, midpoint_from_origin, DiscPoint, MobiusMap};
use holoflow_core::semigroup::{flow_point, FlowConfig, Generator};
use holoflow_core::xnum::{turn, turn_diff, NearPt, XR};

const GENERATORS: [&str; 5] = ["i*z", "-z", "-z*(1+z)/(1-z)", "(1-z)^2", "z^2-1"];

fn disc(r_max: f64) -> impl Strategy<Value = C64> {
    (0.0..r_max, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn pt(z: C64) -> DiscPoint {
    DiscPoint::from_complex(z).unwrap()
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("z".to_string()),
        Just("i".to_string()),
        Just("e".to_string()),
        (1u32..9).prop_map(|k| k.to_string()),
        (1u32..9).prop_map(|k| format!("0.{k}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}+{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}-{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}/(2+{b})")),
            inner.clone().prop_map(|a| format!("exp({a})")),
            inner.clone().prop_map(|a| format!("log(3+{a})")),
            inner.clone().prop_map(|a| format!("sqrt(4+{a})")),
            (inner, 1u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_law(gi in 0usize..5, z in disc(0.9), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let g = Generator::parse(GENERATORS[gi]).unwrap();
        let cfg = FlowConfig::default();
        let (a, _) = flow_point(&g, z, s + t, &cfg).unwrap();
        let (b, _) = flow_point(&g, z, t, &cfg).unwrap();
        let (c, _) = flow_point(&g, b, s, &cfg).unwrap();
        prop_assert!((a - c).norm() <= 1e-7, "{} at {z}: {a} vs {c}", GENERATORS[gi]);
    }

    #[test]
    fn flow_stays_in_disc(gi in 0usize..5, z in disc(0.99), t in 0.0f64..5.0) {
        let g = Generator::parse(GENERATORS[gi]).unwrap();
        let (w, _) = flow_point(&g, z, t, &FlowConfig::default()).unwrap();
        prop_assert!(w.norm() < 1.0);
    }

    #[test]
    fn schwarz_pick(gi in 0usize..5, z in disc(0.9), w in disc(0.9), t in 0.0f64..2.0) {
        let g = Generator::parse(GENERATORS[gi]).unwrap();
        let cfg = FlowConfig::default();
        let (a, _) = flow_point(&g, z, t, &cfg).unwrap();
        let (b, _) = flow_point(&g, w, t, &cfg).unwrap();
        prop_assert!(hyp_dist(&pt(a), &pt(b)) <= hyp_dist(&pt(z), &pt(w)) + 1e-7);
    }

    #[test]
    fn mobius_involution_and_isometry(a in disc(0.999), z in disc(0.999), w in disc(0.999)) {
        let m = MobiusMap::phi(a);
        prop_assert!((m.apply(m.apply(z)) - z).norm() <= 1e-12 / (1.0 - a.norm()).max(1e-3));
        let d0 = hyp_dist(&pt(z), &pt(w));
        let d1 = hyp_dist(&pt(m.apply(z)), &pt(m.apply(w)));
        prop_assert!((d0 - d1).abs() <= 1e-8 * d0.max(1.0));
    }

    #[test]
    fn bloch_density_is_mobius_invariant(a in disc(0.95), z in disc(0.95)) {
        // |φ_a'(z)|(1-|z|²) = 1-|φ_a(z)|²
        let m = MobiusMap::phi(a);
        let lhs = m.derivative(z).norm() * (1.0 - z.norm_sqr());
        prop_assert!((lhs - m.one_minus_abs2(z)).abs() <= 1e-12);
    }

    #[test]
    fn midpoint_halves_distance(z in disc(0.999)) {
        prop_assume!(z.norm() > 1e-6);
        let w = pt(z);
        let o = pt(C64::new(0.0, 0.0));
        let m = midpoint_from_origin(&w).unwrap();
        prop_assert!((2.0 * hyp_dist(&o, &m) - hyp_dist(&o, &w)).abs() <= 1e-11);
    }

    #[test]
    fn xr_arithmetic(a in -1e6f64..1e6, b in 1e-3f64..1e6, k in -5000i64..5000) {
        let (x, y) = (XR::new(a), XR::new(b));
        prop_assert!((x.mul(y).to_f64() - a * b).abs() <= 1e-15 * (a * b).abs());
        prop_assert!((x.div(y).to_f64() - a / b).abs() <= 1e-15 * (a / b).abs());
        prop_assert!((x.add(y).to_f64() - (a + b)).abs() <= 1e-15 * (a.abs() + b));
        prop_assert_eq!(x.ldexp(k).ldexp(-k), x);
        let s = x.ldexp(k).to_decimal();
        let back = XR::parse(&s).unwrap().ldexp(-k).to_f64();
        prop_assert!((back - a).abs() <= 1e-13 * a.abs(), "{s}");
    }

    #[test]
    fn turn_difference_is_reduced(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let d = turn_diff(&turn(a, 256), &turn(b, 256), 256).to_f64();
        prop_assert!(d > -0.5 && d <= 0.5);
        let r = (a - b - d).rem_euclid(1.0);
        prop_assert!(r < 1e-12 || r > 1.0 - 1e-12);
    }

    #[test]
    fn parse_print_round_trip(src in expr()) {
        let e = HoloExpr::parse(&src).unwrap();
        let printed = e.to_string();
        let again = HoloExpr::parse(&printed).unwrap();
        prop_assert_eq!(again.to_string(), printed.clone());
        let z = C64::new(0.3, -0.2);
        if let (Ok(u), Ok(v)) = (e.eval(z), again.eval(z)) {
            prop_assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0), "{src} -> {printed}");
        }
    }

    #[test]
    fn block_real_part_nonnegative(gexp in 1.0f64..400.0, turns in 0.0f64..1.0, zt in 0.0f64..1.0, zexp in 0.0f64..500.0) {
        let w = ExtPoint::polar(turns, XR::exp(-gexp), 256);
        let b = make_block(&w, 256).unwrap();
        let z = NearPt::radial(turn(zt, 256), XR::exp(-zexp), 256);
        let v = b.beta(&z);
        prop_assert!(v.re().to_f64() >= -1e-9);
    }
}
