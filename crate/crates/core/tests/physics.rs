mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use common::rng;
use condsym::groups::{minkowski_invariant, FourMomentum};
use condsym::physics::*;
use condsym::points::norm;
use condsym::Error;
use proptest::prelude::*;
use rand::Rng;

fn rec(event_id: i64, pt: f64, phi: f64) -> JetConstituentRecord {
    JetConstituentRecord { event_id, jet_index: 0, pt, eta: 0.1 * event_id as f64, phi, momentum: None }
}

fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
    p
}

#[test]
fn transverse_pair_values() {
    assert_eq!(transverse_pair(1.0, 0.0).unwrap(), [1.0, 0.0]);
    let v = transverse_pair(2.0, FRAC_PI_2).unwrap();
    assert!(v[0].abs() < 1e-15 && (v[1] - 2.0).abs() < 1e-15);
    assert!(matches!(transverse_pair(-1.0, 0.3), Err(Error::InvalidArgument(_))));
}

#[test]
fn load_empty_and_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let schema = ColumnSchema::default();
    let p = write_file(&dir, "empty.csv", "event_id,jet_index,pt,eta,phi\n");
    assert!(load_constituents(&p, &schema).unwrap().is_empty());

    let p = write_file(&dir, "neg.csv", "event_id,jet_index,pt,eta,phi\n1,0,2.0,0.1,0.2\n1,0,-1,0.1,0.2\n");
    match load_constituents(&p, &schema) {
        Err(Error::Parse { row, msg, .. }) => {
            assert_eq!(row, 3);
            assert!(msg.contains("pt"), "{msg}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    let p = write_file(&dir, "text.csv", "event_id,jet_index,pt,eta,phi\n1,0,abc,0.1,0.2\n");
    assert!(matches!(load_constituents(&p, &schema), Err(Error::Parse { row: 2, .. })));
    let p = write_file(&dir, "cols.csv", "event_id,pt,eta,phi\n1,2.0,0.1,0.2\n");
    match load_constituents(&p, &schema) {
        Err(Error::Parse { row: 1, msg, .. }) => assert!(msg.contains("jet_index")),
        other => panic!("expected a missing-column error, got {other:?}"),
    }
    let p = write_file(&dir, "phi.csv", "event_id,jet_index,pt,eta,phi\n1,0,2.0,0.1,4.0\n");
    assert!(load_constituents(&p, &schema).is_err());
    assert!(matches!(load_constituents(&dir.path().join("missing.csv"), &schema), Err(Error::Io { .. })));
}

#[test]
fn custom_schema_and_momentum_columns() {
    let dir = tempfile::tempdir().unwrap();
    let schema_path = write_file(&dir, "schema.json", r#"{"event_id": "evt", "pt": "PT", "e": "E", "p1": "px", "p2": "py", "p3": "pz"}"#);
    let schema = ColumnSchema::from_json_file(&schema_path).unwrap();
    let body = "evt,jet_index,PT,eta,phi,E,px,py,pz\n7,0,3.0,0.0,0.0,5.0,3.0,0.0,4.0\n7,0,1.0,0.0,0.0,2.0,1.0,1.0,1.0\n";
    let p = write_file(&dir, "mom.csv", body);
    let recs = load_constituents(&p, &schema).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].momentum.unwrap().to_array(), [5.0, 3.0, 0.0, 4.0]);
    let spacelike = "evt,jet_index,PT,eta,phi,E,px,py,pz\n7,0,3.0,0.0,0.0,1.0,3.0,0.0,4.0\n";
    let p = write_file(&dir, "bad.csv", spacelike);
    assert!(matches!(load_constituents(&p, &schema), Err(Error::Parse { row: 2, .. })));
}

#[test]
fn write_read_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = rng(1);
    let recs: Vec<JetConstituentRecord> = (0..1000)
        .map(|i| JetConstituentRecord {
            event_id: i / 5,
            jet_index: i % 2,
            pt: g.random::<f64>() * 100.0,
            eta: g.random::<f64>() * 4.0 - 2.0,
            phi: g.random::<f64>() * 2.0 * PI - PI,
            momentum: None,
        })
        .collect();
    let p = dir.path().join("rt.csv");
    write_constituents(&p, &recs).unwrap();
    let back = load_constituents(&p, &ColumnSchema::default()).unwrap();
    assert_eq!(back.len(), recs.len());
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!((a.event_id, a.jet_index), (b.event_id, b.jet_index));
        for (u, v) in [(a.pt, b.pt), (a.eta, b.eta), (a.phi, b.phi)] {
            assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    let with_mom: Vec<JetConstituentRecord> = recs[..50]
        .iter()
        .map(|r| JetConstituentRecord { momentum: Some(massless_momentum(r.pt, r.eta, r.phi)), ..r.clone() })
        .collect();
    let p = dir.path().join("mom.csv");
    write_constituents(&p, &with_mom).unwrap();
    let back = load_constituents(&p, &ColumnSchema::with_momentum()).unwrap();
    for (a, b) in with_mom.iter().zip(&back) {
        let (u, v) = (a.momentum.unwrap().to_array(), b.momentum.unwrap().to_array());
        assert!(common::max_abs_diff(&u, &v) <= 1e-12 * u[0].max(1.0));
    }
}

#[test]
fn leading_pairs_order_and_ties() {
    let recs = vec![
        rec(1, 1.0, 0.0),
        rec(2, 5.0, 0.0),
        rec(1, 3.0, FRAC_PI_2),
        rec(3, 2.0, 0.0),
        rec(2, 5.0, PI),
        rec(2, 4.0, 0.0),
    ];
    let lp = leading_pairs(&recs, FeatureMode::Transverse2d).unwrap();
    assert_eq!(lp.event_ids, vec![1, 2]);
    assert_eq!(lp.len(), 2);
    assert_eq!(lp.skipped_events, 1);
    // event 1: pt 3 leads pt 1
    assert!(common::max_abs_diff(lp.x.row(0), &[0.0, 3.0]) < 1e-15);
    assert!(common::max_abs_diff(lp.y.row(0), &[1.0, 0.0]) < 1e-15);
    // event 2: tie at pt 5, input order decides
    assert!(common::max_abs_diff(lp.x.row(1), &[5.0, 0.0]) < 1e-15);
    assert!(common::max_abs_diff(lp.y.row(1), &[-5.0, 0.0]) < 1e-14);
    assert_eq!(leading_pairs(&recs, FeatureMode::Transverse2d).unwrap(), lp);
    assert!(leading_pairs(&[], FeatureMode::Transverse2d).unwrap().is_empty());
}

#[test]
fn four_momentum_mode() {
    let mut recs = vec![rec(1, 2.0, 0.3), rec(1, 1.0, -0.4)];
    recs.push(JetConstituentRecord { momentum: Some(FourMomentum::new(3.0, 1.0, 1.0, 1.0)), ..rec(2, 2.0, 0.0) });
    recs.push(JetConstituentRecord { momentum: Some(FourMomentum::new(2.0, 0.5, 0.0, 0.0)), ..rec(2, 1.0, 0.0) });
    let lp = leading_pairs(&recs, FeatureMode::FourMomentum).unwrap();
    assert_eq!(lp.len(), 2);
    assert_eq!(lp.x.dim(), 4);
    for row in lp.x.rows().chain(lp.y.rows()) {
        assert!(minkowski_invariant(&FourMomentum::from_slice(row)) >= -1e-6 * row[0] * row[0]);
    }
    let m = massless_momentum(2.0, 0.7, 0.3);
    assert!(minkowski_invariant(&m).abs() < 1e-12 * m.e * m.e);
    assert_eq!(lp.x.row(1), &[3.0, 1.0, 1.0, 1.0]);
}

#[test]
fn shuffle_keeps_y_multiset() {
    let mut g = rng(2);
    let lp = JetSurrogate::default().generate(200, &mut g).unwrap();
    let sh = shuffle_responses(&lp, &mut g);
    assert_eq!(sh.x, lp.x);
    let key = |p: &condsym::points::PointSet| {
        let mut v: Vec<(u64, u64)> = p.rows().map(|r| (r[0].to_bits(), r[1].to_bits())).collect();
        v.sort_unstable();
        v
    };
    assert_eq!(key(&sh.y), key(&lp.y));
    assert_ne!(sh.y, lp.y);

    let one = JetSurrogate::default().generate(1, &mut g).unwrap();
    assert_eq!(shuffle_responses(&one, &mut g), one);
}

#[test]
fn shuffle_breaks_dependence() {
    let mut g = rng(3);
    let lp = JetSurrogate { azimuth_sd: None, ..JetSurrogate::default() }.generate(10_000, &mut g).unwrap();
    let corr = |a: &condsym::points::PointSet, b: &condsym::points::PointSet| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = a.rows().zip(b.rows()).map(|(u, v)| (u[0], v[0])).unzip();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(u, v)| (u - mx) * (v - my)).sum();
        let sxx: f64 = xs.iter().map(|u| (u - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|v| (v - my).powi(2)).sum();
        sxy / (sxx * syy).sqrt()
    };
    assert!(corr(&lp.x, &lp.y) > 0.5);
    let sh = shuffle_responses(&lp, &mut g);
    assert!(corr(&sh.x, &sh.y).abs() < 0.05);
}

#[test]
fn surrogate_structure() {
    let mut g = rng(4);
    let lp = JetSurrogate::default().generate(500, &mut g).unwrap();
    assert_eq!(lp.len(), 500);
    assert_eq!(lp.mode, FeatureMode::Transverse2d);
    for (x, y) in lp.x.rows().zip(lp.y.rows()) {
        assert!(norm(x) > 0.0 && norm(y) > 0.0);
    }
    assert!(JetSurrogate { share: 0.0, ..JetSurrogate::default() }.generate(5, &mut g).is_err());
    assert!(JetSurrogate { azimuth_sd: Some(-1.0), ..JetSurrogate::default() }.generate(5, &mut g).is_err());
}

proptest! {
    #[test]
    fn transverse_norm_is_pt(pt in 0.0f64..1e4, phi in -PI..PI) {
        let v = transverse_pair(pt, phi).unwrap();
        prop_assert!((norm(&v) - pt).abs() <= 1e-12 * pt.max(1.0));
    }

    #[test]
    fn one_pair_per_eligible_event(sizes in prop::collection::vec(1usize..5, 1..30), seed in any::<u64>()) {
        let mut g = rng(seed);
        let mut recs = Vec::new();
        for (e, &k) in sizes.iter().enumerate() {
            for _ in 0..k {
                recs.push(rec(e as i64, g.random::<f64>() * 10.0, g.random::<f64>() * 2.0 * PI - PI));
            }
        }
        let lp = leading_pairs(&recs, FeatureMode::Transverse2d).unwrap();
        prop_assert_eq!(lp.len(), sizes.iter().filter(|&&k| k >= 2).count());
        prop_assert_eq!(lp.skipped_events, sizes.iter().filter(|&&k| k < 2).count());
        for (x, y) in lp.x.rows().zip(lp.y.rows()) {
            prop_assert!(norm(x) >= norm(y) - 1e-12);
        }
    }
}
