//! Transient-block mass, spectral summary and c* against dense references.

mod common;

use bowtie_core::bowtie::BowtieAnalysis;
use bowtie_core::canonical::{fig1, threeblock};
use bowtie_core::escc::{pure_out_unfairness, r_curve, EsccBlock, EsccScope, SeedMode};
use bowtie_core::graph::GraphHandle;
use bowtie_core::pagerank::{pagerank, PageRankConfig};
use common::{dense_block_mass, dense_spectral_radius};

fn block(g: &GraphHandle, scope: EsccScope) -> EsccBlock {
    EsccBlock::new(g, &BowtieAnalysis::new(g), scope).unwrap()
}

fn graphs() -> Vec<GraphHandle> {
    let mut v = vec![fig1(), threeblock()];
    v.extend(common::bowtie_set());
    v
}

#[test]
fn mass_matches_dense_and_power() {
    for g in graphs() {
        let b = block(&g, EsccScope::FullTransient);
        for c in [0.1, 0.5, 0.85, 0.95] {
            let m = b.escc_mass(c).unwrap();
            assert!((m - dense_block_mass(&g, &b.nodes, c)).abs() < 1e-12);
            let pi = pagerank(&g, &PageRankConfig::with_tolerance(c, 1e-13)).unwrap();
            let direct: f64 = b.nodes.iter().map(|&v| pi.values[v]).sum();
            assert!((m - direct).abs() < 1e-9, "c = {c}: {m} vs {direct}");
        }
    }
}

#[test]
fn escc_only_scope_on_fig1() {
    let g = fig1();
    let a = BowtieAnalysis::new(&g);
    let b = block(&g, EsccScope::EsccOnly);
    assert_eq!(b.nodes, a.escc_nodes());
    let pi = pagerank(&g, &PageRankConfig::with_tolerance(0.85, 1e-13)).unwrap();
    let direct: f64 = b.nodes.iter().map(|&v| pi.values[v]).sum();
    assert!((b.escc_mass(0.85).unwrap() - direct).abs() < 1e-9);
}

#[test]
fn perron_root_matches_dense_eigenvalues() {
    for g in graphs() {
        let b = block(&g, EsccScope::FullTransient);
        let s = b.spectral_summary().unwrap();
        assert!((s.lambda1 - dense_spectral_radius(&g, &b.nodes)).abs() < 1e-10);
        assert!(b.eigen_residual(&s) < 1e-12);
        assert!((s.quasi_stationary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.quasi_stationary.iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn disconnected_pieces_take_the_larger_root() {
    // pieces {0,1} (root 1/2) and {2,3} (root 1/√2) drain into dead-end 4
    let g = GraphHandle::from_edges(5, [(0, 1), (1, 0), (0, 4), (1, 4), (2, 3), (3, 2), (2, 4), (4, 4)]).unwrap();
    let b = block(&g, EsccScope::FullTransient);
    assert_eq!(b.nodes, vec![0, 1, 2, 3]);
    let s = b.spectral_summary().unwrap();
    assert!((s.lambda1 - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(s.quasi_stationary[0] + s.quasi_stationary[1] < 1e-10);
}

#[test]
fn mass_is_decreasing_and_concave() {
    for g in graphs() {
        let b = block(&g, EsccScope::FullTransient);
        let m: Vec<f64> = (0..=20).map(|k| b.escc_mass(k as f64 / 20.0).unwrap()).collect();
        assert!((m[0] - b.gamma).abs() < 1e-15);
        assert_eq!(m[20], 0.0);
        for w in m.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        for w in m.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-12);
        }
    }
}

#[test]
fn pure_out_unfairness_grows() {
    for g in [fig1(), threeblock()] {
        let a = BowtieAnalysis::new(&g);
        let mut last = 0.0;
        for k in 0..20 {
            let c = k as f64 * 0.05;
            let pi = pagerank(&g, &PageRankConfig::with_tolerance(c, 1e-13)).unwrap();
            let u = pure_out_unfairness(&pi.values, &a).unwrap();
            if k == 0 {
                assert!((u - 1.0).abs() < 1e-12);
            }
            assert!(u >= last - 1e-12);
            last = u;
        }
    }
    let g = GraphHandle::from_edges(2, [(0, 1), (1, 0)]).unwrap();
    assert!(pure_out_unfairness(&[0.5, 0.5], &BowtieAnalysis::new(&g)).is_err());
}

#[test]
fn fixed_seed_cstar_solves_its_equation() {
    for g in graphs() {
        let b = block(&g, EsccScope::FullTransient);
        let s = b.spectral_summary().unwrap();
        for mode in [SeedMode::Uniform, SeedMode::QuasiStationary] {
            let rep = b.cstar_solve(&s, mode, 1e-10).unwrap();
            let w = if mode == SeedMode::Uniform { s.p1 } else { s.lambda1 };
            assert_eq!(rep.vt_norm, w);
            let c = rep.c_star.expect("mass falls from γ to 0, so a crossing exists");
            assert!((b.escc_mass(c).unwrap() / b.gamma - w).abs() < 1e-8);
            // inside the interval whenever the bound table holds around c*
            let t = b.prop3_bounds(&s, &[c]).unwrap();
            if t.cond_i && t.cond_ii && t.failures().is_empty() {
                assert!(rep.c1 - 1e-8 <= c && c <= rep.c2 + 1e-8, "{} {} {}", rep.c1, c, rep.c2);
            }
        }
    }
}

#[test]
fn threeblock_uniform_cstar_in_interval() {
    let b = block(&threeblock(), EsccScope::FullTransient);
    let s = b.spectral_summary().unwrap();
    let rep = b.cstar_solve(&s, SeedMode::Uniform, 1e-10).unwrap();
    let c = rep.c_star.unwrap();
    assert!(rep.c1 <= c && c <= rep.c2, "{} {} {}", rep.c1, c, rep.c2);
}

#[test]
fn self_normalized_cstar_meets_r_curve() {
    for g in graphs() {
        let b = block(&g, EsccScope::FullTransient);
        let s = b.spectral_summary().unwrap();
        let rep = b.cstar_solve(&s, SeedMode::SelfNormalized, 1e-10).unwrap();
        if let Some(c) = rep.c_star {
            assert!(c > 0.5);
            let gap = b.escc_mass(c).unwrap() - r_curve(b.gamma, c);
            assert!(gap.abs() < 1e-8, "c = {c}: {gap}");
        }
        for r in &rep.r_samples {
            assert_eq!(r.r, r_curve(b.gamma, r.c));
        }
    }
}
