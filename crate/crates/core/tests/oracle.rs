//! Type-class summation against direct enumeration of output tuples.

mod common;

use multiview::multiview_dmc::{multi_view_report_with, posterior_tail, EvalConfig};
use multiview::{Dmc, Exec, FiniteDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn reports_match_tuple_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let named = [Dmc::bsc(0.07).unwrap(), Dmc::bec(0.35).unwrap(), Dmc::z_channel(0.6).unwrap()];
    let random: Vec<Dmc> = (0..6).map(|i| Dmc::random(&mut rng, 2 + i % 3, 2 + i % 2).unwrap()).collect();
    for ch in named.iter().chain(&random) {
        let k = ch.input_size();
        let skewed = Dmc::random(&mut rng, 1, k).unwrap().row(0).clone();
        for input in [FiniteDistribution::uniform(k).unwrap(), skewed] {
            for d in 1..=6 {
                for exec in [Exec::Sequential, Exec::Parallel] {
                    let cfg = EvalConfig { exec, ..Default::default() };
                    let r = multi_view_report_with(ch, &input, d, &cfg).unwrap();
                    let b = common::brute_force(ch, &input, d);
                    assert!(close(r.cond_entropy, b.cond_entropy), "{ch:?} d={d}: {r:?} {b:?}");
                    assert!(close(r.mutual_info, b.mutual_info), "{ch:?} d={d}");
                    assert!(close(r.dispersion, b.dispersion), "{ch:?} d={d}");
                }
            }
        }
    }
}

#[test]
fn views_channel_agrees_with_single_view_report() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let ch = Dmc::random(&mut rng, 3, 3).unwrap();
    let input = FiniteDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
    let cfg = EvalConfig::default();
    for d in 1..=4 {
        let flat = ch.views(d, 1 << 12).unwrap();
        let a = multi_view_report_with(&ch, &input, d, &cfg).unwrap();
        let b = multi_view_report_with(&flat, &input, 1, &cfg).unwrap();
        assert!(close(a.mutual_info, b.mutual_info));
        assert!(close(a.dispersion, b.dispersion));
    }
}

#[test]
fn posterior_tail_matches_tuple_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let ch = Dmc::random(&mut rng, 3, 2).unwrap();
    let input = FiniteDistribution::new(vec![0.6, 0.25, 0.15]).unwrap();
    let cfg = EvalConfig::default();
    for d in 1..=7 {
        for t in [0.05, 0.3, 0.9, 1.7, 3.1] {
            for x in 0..3 {
                let exact = posterior_tail(&ch, &input, x, d, t, &cfg).unwrap();
                let brute = common::brute_posterior_tail(&ch, &input, x, d, t);
                assert!(close(exact, brute), "d={d} t={t} x={x}: {exact} vs {brute}");
            }
        }
    }
}
