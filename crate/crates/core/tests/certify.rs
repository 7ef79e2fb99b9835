mod common;

use common::*;
use cyclecert::certify::{
    build_box, check_faces, find_center, BoxPolicy, Certifier, CertifyOptions, InconclusiveReason, Verdict,
};
use cyclecert::flowcore::{eval_g, particular_flow};
use cyclecert::refsolvers::{nr_flat, NrOptions};
use cyclecert::topology::{dfs_cycle_basis, find_bridges, Incidence, RootPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn ieee9_center_is_a_root() {
    let net = ieee("case9.m");
    let c = Certifier::new(&net, CertifyOptions::default()).unwrap();
    let fp = c.flow_param(&net.injections).unwrap();
    let center = find_center(&fp);
    assert_eq!(center.len(), 1);
    assert!(inf(&eval_g(&fp, &center).unwrap()) <= 1e-10);
}

#[test]
fn tree_center_is_empty() {
    let inc = Incidence::unweighted(3, vec![(0, 1), (1, 2)]);
    let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
    let fp = particular_flow(&inc, &basis, &[0.5, 0.0, -0.5]).unwrap();
    assert!(find_center(&fp).is_empty());
}

#[test]
fn ieee14_box_is_feasible_at_every_vertex() {
    let net = ieee("case14.m");
    let c = Certifier::new(&net, CertifyOptions::default()).unwrap();
    let fp = c.flow_param(&net.injections).unwrap();
    let center = find_center(&fp);
    for policy in [BoxPolicy::SlackShare, BoxPolicy::Dominance] {
        let b = build_box(&fp, &center, policy).lambda_box;
        assert_eq!(b.q(), 7);
        assert!(b.half_widths.iter().all(|&w| w > 0.0));
        for mask in 0..(1u32 << 7) {
            let v: Vec<f64> = (0..7).map(|k| if mask >> k & 1 == 1 { b.hi[k] } else { b.lo[k] }).collect();
            assert!(fp.z(&v).iter().all(|z| z.abs() <= 1.0 + 1e-12), "{policy:?} vertex {mask}");
        }
    }
}

#[test]
fn example_faces_match_loop_oracle() {
    let inc = Incidence::unweighted(4, example_edges());
    let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
    let fp = particular_flow(&inc, &basis, &[1.0, -1.0, 0.0, 0.0]).unwrap();
    let center = find_center(&fp);
    let b = build_box(&fp, &center, BoxPolicy::SlackShare).lambda_box;
    let faces = check_faces(&fp, &b).unwrap();
    let lower0 = g_by_loops(&inc, &basis, &fp.z0, &[b.lo[0], b.hi[1]]);
    let lower1 = g_by_loops(&inc, &basis, &fp.z0, &[b.hi[0], b.lo[1]]);
    let upper0 = g_by_loops(&inc, &basis, &fp.z0, &[b.hi[0], b.lo[1]]);
    let upper1 = g_by_loops(&inc, &basis, &fp.z0, &[b.lo[0], b.hi[1]]);
    assert!((faces.lower[0] - lower0[0]).abs() <= 1e-15);
    assert!((faces.lower[1] - lower1[1]).abs() <= 1e-15);
    assert!((faces.upper[0] - upper0[0]).abs() <= 1e-15);
    assert!((faces.upper[1] - upper1[1]).abs() <= 1e-15);
    assert!(faces.satisfied());
}

#[test]
fn single_cycle_reduces_to_scalar_sign_change() {
    let net = ieee("case9.m");
    let c = Certifier::new(&net, CertifyOptions::default()).unwrap();
    let cert = c.certify(&net.injections).unwrap();
    let b = cert.lambda_box.unwrap();
    let fp = c.flow_param(&net.injections).unwrap();
    assert_eq!(cert.lower_face_values, eval_g(&fp, &b.lo).unwrap());
    assert_eq!(cert.upper_face_values, eval_g(&fp, &b.hi).unwrap());
    assert!(cert.lower_face_values[0] <= 0.0 && cert.upper_face_values[0] >= 0.0);
}

#[test]
fn lower_face_dominates_random_face_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for name in ["case9.m", "case14.m"] {
        let net = ieee(name);
        let c = Certifier::new(&net, CertifyOptions::default()).unwrap();
        let cert = c.certify(&net.injections).unwrap();
        let b = cert.lambda_box.unwrap();
        let fp = c.flow_param(&net.injections).unwrap();
        for _ in 0..50 {
            let i = rng.random_range(0..b.q());
            let mut lam: Vec<f64> = (0..b.q()).map(|k| rng.random_range(b.lo[k]..=b.hi[k])).collect();
            lam[i] = b.lo[i];
            assert!(eval_g(&fp, &lam).unwrap()[i] <= cert.lower_face_values[i] + 1e-12);
            lam[i] = b.hi[i];
            assert!(eval_g(&fp, &lam).unwrap()[i] >= cert.upper_face_values[i] - 1e-12);
        }
    }
}

#[test]
fn ieee9_nominal_certified_and_newton_agrees() {
    let net = ieee("case9.m");
    let opts = CertifyOptions {
        recover_solution: true,
        ..Default::default()
    };
    let cert = Certifier::new(&net, opts).unwrap().certify(&net.injections).unwrap();
    assert!(cert.verdict.is_certified());
    assert!(nr_flat(&net, &NrOptions::default()).unwrap().success());
}

#[test]
fn certified_implies_solution_on_random_meshes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let opts = CertifyOptions {
        recover_solution: true,
        ..Default::default()
    };
    for _ in 0..60 {
        let n = rng.random_range(3..=10);
        let edges = random_graph(&mut rng, n, n / 2 + 1);
        let w = random_weights(&mut rng, edges.len());
        let scale = rng.random_range(0.5..4.0);
        let p = random_balanced(&mut rng, n, scale);
        let net = network(n, &edges, &w, p.clone());
        let cert = Certifier::new(&net, opts.clone()).unwrap().certify(&p).unwrap();
        if cert.verdict.is_certified() {
            let theta = cert.theta.expect("angles recovered").theta;
            assert!(independent_residual(&edges, &w, &p, &theta) <= 1e-7);
            let nr = nr_flat(&net, &NrOptions::default()).unwrap();
            if nr.success() {
                assert!(max_abs_diff(&anchored(&theta), &anchored(&nr.theta.unwrap())) <= 1e-6);
            }
        }
    }
}

#[test]
fn overloaded_bridge_names_the_edge() {
    // the pendant edge 2-3 carries 2.0 against a weight of 1.0
    let net = network(4, &[(0, 1), (1, 2), (2, 0), (2, 3)], &[3.0, 3.0, 3.0, 1.0], vec![0.0, 0.0, 2.0, -2.0]);
    let cert = Certifier::new(&net, CertifyOptions::default()).unwrap().certify(&net.injections).unwrap();
    match cert.verdict {
        Verdict::Inconclusive { reason, edge, margin } => {
            assert_eq!(reason, InconclusiveReason::BridgeOverload);
            assert_eq!(edge, Some(3));
            assert!((margin + 1.0).abs() < 1e-12);
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn certificate_serializes_with_provenance() {
    let net = ieee("case14.m");
    let cert = Certifier::new(&net, CertifyOptions::default()).unwrap().certify(&net.injections).unwrap();
    let v = serde_json::to_value(&cert).unwrap();
    assert_eq!(v["verdict"]["status"], "certified");
    assert_eq!(v["box"]["lo"].as_array().unwrap().len(), 7);
    assert_eq!(v["basis"]["q"], 7);
    assert!(v["basis"]["reoriented_edges"].is_array());
    assert!(v["diagnostics"]["lambda2"].as_f64().unwrap() > 0.0);
    assert_eq!(v["basis"]["search"]["mode"], "auto");
}
