mod common;

use common::*;
use cyclecert::certify::{certify, CertifyOptions};
use cyclecert::flowcore::{eval_g, laplacian_pinv_apply, particular_flow, power_residual};
use cyclecert::refsolvers::{nr_flat, NrOptions};
use cyclecert::topology::{build_incidence, dfs_cycle_basis, find_bridges, Incidence, RootPolicy};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn example_particular_flow_is_minimum_norm() {
    let inc = Incidence::unweighted(4, example_edges());
    let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
    let p = [1.0, -1.0, 0.0, 0.0];
    let fp = particular_flow(&inc, &basis, &p).unwrap();
    // with unit weights f_hat is the least-norm solution of A f = P
    let a = dense_incidence(4, &example_edges());
    let want = a.pseudo_inverse(1e-12).unwrap() * DVector::from_column_slice(&p);
    for e in 0..5 {
        let sign = if basis.flipped()[e] { -1.0 } else { 1.0 };
        assert!((sign * fp.f_hat[e] - want[e]).abs() < 1e-12);
    }
    let balance = inc.node_balance(&(0..5).map(|e| basis.orientation_signs()[e] * fp.f_hat[e]).collect::<Vec<_>>());
    assert!(max_abs_diff(&balance, &p) <= 1e-8);
}

#[test]
fn example_g_matches_per_cycle_sum() {
    let inc = Incidence::unweighted(4, example_edges());
    let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
    let fp = particular_flow(&inc, &basis, &[1.0, -1.0, 0.0, 0.0]).unwrap();
    let g = eval_g(&fp, &[0.0, 0.0]).unwrap();
    let want = g_by_loops(&inc, &basis, &fp.z0, &[0.0, 0.0]);
    assert!(max_abs_diff(&g, &want) <= 1e-15);
    let lam = [0.1, -0.2];
    let g = eval_g(&fp, &lam).unwrap();
    assert!(max_abs_diff(&g, &g_by_loops(&inc, &basis, &fp.z0, &lam)) <= 1e-15);
}

#[test]
fn ieee9_pseudoinverse_balances() {
    let net = ieee("case9.m");
    let inc = build_incidence(&net);
    let u = laplacian_pinv_apply(&inc, &net.injections).unwrap();
    let lu = inc.laplacian() * DVector::from_column_slice(&u);
    let scale = net.injections.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    for (a, b) in lu.iter().zip(&net.injections) {
        assert!((a - b).abs() <= 1e-9 * scale);
    }
    assert!(u.iter().sum::<f64>().abs() < 1e-12);
}

#[test]
fn ieee9_recovered_angles_match_newton() {
    let net = ieee("case9.m");
    let opts = CertifyOptions {
        recover_solution: true,
        ..Default::default()
    };
    let cert = certify(&net, &opts).unwrap();
    let theta = cert.theta.unwrap();
    assert!(theta.residual <= 1e-7);
    let nr = nr_flat(&net, &NrOptions::default()).unwrap();
    assert!(nr.success());
    assert!(max_abs_diff(&anchored(&theta.theta), &anchored(&nr.theta.unwrap())) <= 1e-6);
}

#[test]
fn gauge_shift_keeps_residual() {
    let net = ieee("case14.m");
    let opts = CertifyOptions {
        recover_solution: true,
        ..Default::default()
    };
    let theta = certify(&net, &opts).unwrap().theta.unwrap().theta;
    let inc = build_incidence(&net);
    let shifted: Vec<f64> = theta.iter().map(|t| t + 1.234).collect();
    let r0 = power_residual(&inc, &net.injections, &theta);
    let r1 = power_residual(&inc, &net.injections, &shifted);
    assert!(r0 <= 1e-7 && r1 <= 1e-7);
    assert!((r0 - r1).abs() <= 1e-12);
}

fn random_instance(seed: u64) -> (Incidence, cyclecert::flowcore::FlowParam) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 + (seed % 6) as usize;
    let edges = random_graph(&mut rng, n, 4);
    let w = random_weights(&mut rng, edges.len());
    let p = random_balanced(&mut rng, n, 0.3);
    let inc = Incidence::new(n, edges, w);
    let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
    let fp = particular_flow(&inc, &basis, &p).unwrap();
    (inc, fp)
}

proptest! {
    #[test]
    fn g_is_monotone_inside_domain(seed in any::<u64>(), raw in prop::collection::vec(-0.05f64..0.05, 8)) {
        let (_, fp) = random_instance(seed);
        let q = fp.q();
        let lam: Vec<f64> = raw.iter().take(q).copied().chain(std::iter::repeat(0.0)).take(q).collect();
        prop_assume!(fp.z(&lam).iter().all(|z| z.abs() < 0.99));
        let g0 = eval_g(&fp, &lam).unwrap();
        let h = 1e-6;
        for k in 0..q {
            let mut probe = lam.clone();
            probe[k] += h;
            prop_assume!(fp.z(&probe).iter().all(|z| z.abs() < 0.99));
            let g1 = eval_g(&fp, &probe).unwrap();
            for i in 0..q {
                prop_assert!((g1[i] - g0[i]) / h >= -1e-12);
            }
        }
    }

    #[test]
    fn z_is_affine_in_lambda(seed in any::<u64>(), raw in prop::collection::vec(-2.0f64..2.0, 8)) {
        let (_, fp) = random_instance(seed);
        let q = fp.q();
        let lam: Vec<f64> = raw.iter().copied().cycle().take(q).collect();
        let hl = fp.h_matrix() * DVector::from_column_slice(&lam);
        let z = fp.z(&lam);
        let z0 = fp.z(&vec![0.0; q]);
        for e in 0..fp.m() {
            prop_assert!(((z[e] - z0[e]) - hl[e]).abs() <= 1e-14);
        }
    }
}
