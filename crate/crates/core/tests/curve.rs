use mchgap::curve::{ArcKind, CurveModel, ParamError, RawParams, SpectralParams};
use mchgap::Complex;
use proptest::prelude::*;

fn raw(js: &str) -> RawParams {
    serde_json::from_str(js).unwrap()
}

fn model(js: &str) -> CurveModel {
    CurveModel::new(SpectralParams::validate(&raw(js)).unwrap())
}

#[test]
fn rejects_malformed_spectra() {
    let cases: [(&str, fn(&ParamError) -> bool); 5] = [
        (r#"{"p":0,"q":0}"#, |e| matches!(e, ParamError::EmptySpectrum)),
        (r#"{"p":1,"q":0,"c":[0.4],"d":[0.9]}"#, |e| {
            matches!(e, ParamError::LengthMismatch { field: "alpha", .. })
        }),
        (r#"{"p":0,"q":1,"a":[0.4],"b":[1.2],"beta":[2]}"#, |e| {
            matches!(e, ParamError::RangeViolation { .. })
        }),
        (r#"{"p":2,"q":0,"c":[0.4,0.5],"d":[0.6,0.9],"alpha":[1,1]}"#, |e| {
            matches!(e, ParamError::OrderingViolation { .. })
        }),
        (r#"{"p":1,"q":0,"c":[0.4],"d":[0.9],"alpha":[0]}"#, |e| {
            matches!(e, ParamError::ZeroWeight { .. })
        }),
    ];
    for (js, want) in cases {
        let err = SpectralParams::validate(&raw(js)).unwrap_err();
        assert!(want(&err), "{js}: {err}");
    }
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(serde_json::from_str::<RawParams>(r#"{"p":1,"q":0,"gamma":[1]}"#).is_err());
}

#[test]
fn genus_and_cut_layout() {
    let m = model(r#"{"p":1,"q":1,"c":[0.4],"d":[0.9],"alpha":[1.5],"a":[0.4],"b":[0.7],"beta":[2.0]}"#);
    assert_eq!(m.genus, 7);
    assert_eq!(m.cut_count(), 8);
    for arc in &m.arcs {
        for z in arc.endpoints() {
            match arc.kind {
                ArcKind::CircleArc => assert!((z.norm() - 1.0).abs() < 1e-14),
                ArcKind::ImaginarySegment => assert!(z.re.abs() < 1e-14),
            }
        }
    }
}

fn contains(set: &[Complex], z: Complex) -> bool {
    set.iter().any(|w| (w - z).norm() < 1e-12)
}

fn spectra() -> impl Strategy<Value = RawParams> {
    (0usize..3, 0usize..3)
        .prop_filter("nonempty", |(p, q)| p + q > 0)
        .prop_flat_map(|(p, q)| {
            (
                prop::collection::vec(0.05f64..1.0, 2 * p),
                prop::collection::vec(0.05f64..1.0, 2 * q),
                prop::collection::vec(0.5f64..3.0, p),
                prop::collection::vec(0.5f64..3.0, q),
            )
                .prop_map(move |(cd, ab, alpha, beta)| {
                    let ordered = |v: Vec<f64>, top: f64| {
                        let mut acc = 0.0;
                        let total: f64 = v.iter().sum::<f64>() * 1.05;
                        v.iter()
                            .map(|x| {
                                acc += x;
                                acc / total * top
                            })
                            .collect::<Vec<f64>>()
                    };
                    let cd = ordered(cd, std::f64::consts::FRAC_PI_2);
                    let ab = ordered(ab, 1.0);
                    RawParams {
                        p,
                        q,
                        c: cd.iter().step_by(2).copied().collect(),
                        d: cd.iter().skip(1).step_by(2).copied().collect(),
                        a: ab.iter().step_by(2).copied().collect(),
                        b: ab.iter().skip(1).step_by(2).copied().collect(),
                        alpha,
                        beta,
                    }
                })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn branch_points_are_symmetric(r in spectra()) {
        let params = SpectralParams::validate(&r).unwrap();
        let m = CurveModel::new(params);
        let bp = m.branch_points();
        prop_assert_eq!(bp.len(), 2 * m.cut_count());
        prop_assert_eq!(m.genus, 4 * (r.p + r.q) - 1);
        for &z in &bp {
            prop_assert!(contains(&bp, -z));
            prop_assert!(contains(&bp, z.conj()));
            prop_assert!(contains(&bp, z.inv()));
            let scale: f64 = m.r_squared_coeffs().iter().enumerate().map(|(k, c)| c.abs() * z.norm().powi(k as i32)).sum();
            prop_assert!(m.r_squared(z).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn raw_round_trips(r in spectra()) {
        let params = SpectralParams::validate(&r).unwrap();
        prop_assert_eq!(params.raw(), r);
    }
}
