use mchgap::curve::{RawParams, SpectralParams};
use mchgap::homology::QuadratureRule;
use mchgap::pipeline::Prepared;
use mchgap::solution::{derived_phase, tabulated_phase};
use mchgap::verification::{verify_divisor, Tolerances};
use mchgap::Complex;

fn params(js: &str) -> SpectralParams {
    SpectralParams::validate(&serde_json::from_str::<RawParams>(js).unwrap()).unwrap()
}

fn prepared(js: &str) -> Prepared {
    Prepared::build(params(js), QuadratureRule::default(), 1e-14).unwrap()
}

const CIRCLE: &str = r#"{"p":1,"q":0,"c":[0.4],"d":[0.9],"alpha":[1.5]}"#;
const IMAGINARY: &str = r#"{"p":0,"q":1,"a":[0.4],"b":[0.7],"beta":[2.0]}"#;

#[test]
fn derived_phases_match_the_table_with_imaginary_cuts() {
    for js in [
        IMAGINARY,
        r#"{"p":1,"q":1,"c":[0.4],"d":[0.9],"alpha":[1.5],"a":[0.4],"b":[0.7],"beta":[2.0]}"#,
        r#"{"p":1,"q":2,"c":[0.3],"d":[1.1],"alpha":[0.7],"a":[0.1,0.5],"b":[0.3,0.8],"beta":[1.3,2.5]}"#,
    ] {
        let p = params(js);
        let m = mchgap::curve::CurveModel::new(p.clone());
        for j in 1..=m.genus {
            let d = derived_phase(&p, m.arcs[j].weight);
            let t = tabulated_phase(&p, j);
            let gap = (Complex::i() * (d - t)).exp();
            assert!((gap - 1.0).norm() < 1e-12, "{js} j={j}: {d} vs {t}");
        }
    }
}

#[test]
fn c_vector_is_affine() {
    let prep = prepared(CIRCLE);
    prep.with_context(|ctx| {
        let c00 = ctx.c_vector(0.0, 0.0);
        let c10 = ctx.c_vector(1.0, 0.0);
        let c01 = ctx.c_vector(0.0, 1.0);
        let c = ctx.c_vector(0.3, -0.8);
        for j in 0..c.len() {
            let want = c00[j] + 0.3 * (c10[j] - c00[j]) - 0.8 * (c01[j] - c00[j]);
            assert!((c[j] - want).norm() < 1e-12);
        }
    })
    .unwrap();
}

#[test]
fn sample_is_real_with_unit_structure() {
    for js in [CIRCLE, IMAGINARY] {
        let prep = prepared(js);
        prep.with_context(|ctx| {
            let s = ctx.reconstruct(0.2, -0.1).unwrap();
            assert!(s.im_u.abs() < 1e-6 && s.im_x.abs() < 1e-6, "{js}: {s:?}");
            assert!((s.q * s.q - s.m * s.m - 1.0).abs() < 1e-8, "{js}: {s:?}");
        })
        .unwrap();
    }
}

#[test]
fn cached_periods_reproduce_samples() {
    let prep = prepared(CIRCLE);
    let again = Prepared::from_cache(prep.model.params.clone(), prep.precomputed(), 1e-14).unwrap();
    let a = prep.with_context(|ctx| ctx.reconstruct(0.5, 0.5).unwrap()).unwrap();
    let b = again.with_context(|ctx| ctx.reconstruct(0.5, 0.5).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn divisor_certificate_rejects_a_flipped_sheet() {
    let prep = prepared(IMAGINARY);
    let s = verify_divisor(&prep, &Tolerances::default()).unwrap();
    let get = |n: &str| s.checks.iter().find(|c| c.name == n).unwrap();
    assert!(get("vanishing_ratio").pass);
    assert!(get("flipped_sheet_ratio").pass);
    assert!(get("flipped_sheet_ratio").observed > 1e3 * get("vanishing_ratio").observed);
}
