use proptest::prelude::*;

use mma_core::conditions::subordinator_tail;
use mma_core::kernels::{Kernel, KernelFamily, KernelSpec, TrawlFunctionSpec};
use mma_core::measures::{Ext, LevyMeasure, LevyMeasureSpec, MixingMeasureSpec, Region, Side};

fn levy_spec() -> impl Strategy<Value = LevyMeasureSpec> {
    prop_oneof![
        (0.05f64..1.95, 0.1f64..3.0, 0.0f64..=1.0).prop_map(|(exponent, scale, sign_mix)| LevyMeasureSpec::PowerDensity {
            exponent,
            scale,
            sign_mix,
            support: [Ext(0.0), Ext::INF]
        }),
        (0.05f64..1.95, 0.1f64..3.0, 0.1f64..2.0).prop_map(|(exponent, tempering, scale)| LevyMeasureSpec::TemperedPower {
            exponent,
            tempering,
            scale,
            sign_mix: 0.6
        }),
        (0.1f64..3.0, 0.1f64..3.0).prop_map(|(shape, decay)| LevyMeasureSpec::GammaType { shape, decay, sign_mix: 1.0 }),
        prop::collection::vec((-4.0f64..4.0, 0.01f64..2.0), 1..4)
            .prop_filter("atoms away from 0", |a| a.iter().all(|(z, _)| z.abs() > 1e-3))
            .prop_map(|a| LevyMeasureSpec::AtomList { atoms: a.into_iter().map(|(z, m)| [z, m]).collect() }),
    ]
}

fn small_levy_spec() -> impl Strategy<Value = LevyMeasureSpec> {
    prop_oneof![
        (0.05f64..1.95, 0.1f64..3.0).prop_map(|(exponent, scale)| LevyMeasureSpec::PowerDensity {
            exponent,
            scale,
            sign_mix: 0.5,
            support: [Ext(0.0), Ext(1.0)]
        }),
        prop::collection::vec((-1.0f64..1.0, 0.01f64..2.0), 1..4)
            .prop_filter("atoms away from 0", |a| a.iter().all(|(z, _)| z.abs() > 1e-3))
            .prop_map(|a| LevyMeasureSpec::AtomList { atoms: a.into_iter().map(|(z, m)| [z, m]).collect() }),
    ]
}

fn kernel() -> impl Strategy<Value = (KernelFamily, f64)> {
    let spec = prop_oneof![
        Just(KernelSpec::Supou {}),
        (0.2f64..4.0).prop_map(|kappa| KernelSpec::Supfou { kappa }),
        (0.2f64..3.0).prop_map(|rate| KernelSpec::Trawl { psi: TrawlFunctionSpec::Exponential { rate } }),
        (0.5f64..2.0, 1.2f64..4.0).prop_map(|(tau, h)| KernelSpec::Trawl { psi: TrawlFunctionSpec::Power { tau, h } }),
        (0.2f64..3.0).prop_map(|nu| KernelSpec::MaExponential { nu }),
        (0.2f64..3.0, 1.1f64..4.0).prop_map(|(nu, kappa)| KernelSpec::MaGamma { nu, kappa }),
        (0.2f64..3.0).prop_map(|q| KernelSpec::MaBox { q }),
        (0.2f64..3.0).prop_map(|q| KernelSpec::MaTriangle { q }),
    ];
    (spec, 0.01f64..0.99).prop_map(|(s, frac)| {
        let k = s.build().unwrap();
        // trawl x lives in (0, ψ(0)] = (0, 1]; elsewhere spread over decades
        let x = if k.trawl_function().is_some() { frac } else { 10f64.powf(4.0 * frac - 2.0) };
        (k, x)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_mass_is_non_increasing(spec in levy_spec(), r1 in 1e-3f64..10.0, factor in 1.0f64..100.0) {
        let l = spec.build().unwrap();
        for side in [Side::Pos, Side::Neg, Side::Both] {
            prop_assert!(l.tail_mass(r1 * factor, side) <= l.tail_mass(r1, side));
        }
    }

    #[test]
    fn small_jump_moments_decrease_in_p(spec in small_levy_spec(), p in 0.0f64..4.0, dp in 0.0f64..2.0) {
        let l = spec.build().unwrap();
        let lo = l.partial_moment(p, Region::SMALL, Side::Both);
        let hi = l.partial_moment(p + dp, Region::SMALL, Side::Both);
        if lo.is_finite() {
            prop_assert!(hi.is_finite() && hi.value <= lo.value * (1.0 + 1e-12), "p={p}: {} then {}", lo.value, hi.value);
        }
    }

    #[test]
    fn bg_index_separates_finite_moments(spec in levy_spec()) {
        let l = spec.build().unwrap();
        let beta = l.bg_index().value;
        prop_assert!(l.partial_moment(beta + 0.1, Region::SMALL, Side::Both).is_finite());
        if beta > 0.1 {
            prop_assert!(!l.partial_moment(beta - 0.1, Region::SMALL, Side::Both).is_finite());
        }
    }

    #[test]
    fn kernel_inverse_round_trip((k, x) in kernel(), a in 0.0f64..1.0, b in 0.001f64..1.0) {
        let f1 = k.f1(x);
        prop_assume!(f1.is_finite() && f1 > 0.0);
        let tol = 1e-8 * f1;
        let u = 5.0 * f1 * a;
        let w = f1 * b;
        let inv = k.f2_inverse(x, w).unwrap();
        prop_assert!((k.f2(x, inv) - w).abs() <= tol, "f2(f2⁻¹(w)) = {} vs {w}", k.f2(x, inv));
        let v = k.f2(x, u);
        if v > 0.0 {
            prop_assert!(k.f2_inverse(x, v).unwrap() <= u + tol);
        }
        // f₂(u) > w exactly when u < f₂⁻¹(w), away from the level set
        if (v - w).abs() > tol && (u - inv).abs() > tol {
            prop_assert_eq!(v > w, u < inv);
        }
    }

    #[test]
    fn subordinator_tail_is_a_levy_tail(exponent in 0.2f64..1.9, shape in 2.0f64..4.0, r in 0.01f64..10.0, factor in 1.0f64..50.0) {
        let l = LevyMeasureSpec::PowerDensity { exponent, scale: 1.0, sign_mix: 1.0, support: [Ext(0.0), Ext::INF] }.build().unwrap();
        let pi = MixingMeasureSpec::GammaDensity { shape, rate: 1.0, mass: 1.0 }.build().unwrap();
        let k = KernelSpec::Supou {}.build().unwrap();
        let near = subordinator_tail(&l, &pi, &k, r).unwrap();
        let far = subordinator_tail(&l, &pi, &k, r * factor).unwrap();
        prop_assert!(near.is_finite() && far.is_finite());
        prop_assert!(far <= near * (1.0 + 1e-9), "η̄({}) = {far} > η̄({r}) = {near}", r * factor);
    }
}

#[test]
fn zero_measure_has_no_tail() {
    let z = LevyMeasure::zero();
    assert_eq!(z.tail_mass(1e-9, Side::Both), 0.0);
    assert!(z.is_zero());
}
