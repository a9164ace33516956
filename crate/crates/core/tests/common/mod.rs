//! Reference values computed by enumerating every raw output tuple.

#![allow(dead_code)]

use multiview::{Dmc, FiniteDistribution};

/// Conditional entropy, mutual information and dispersion in nats.
#[derive(Clone, Copy, Debug)]
pub struct Brute {
    pub cond_entropy: f64,
    pub mutual_info: f64,
    pub dispersion: f64,
}

/// Calls `f(tuple, P(tuple | x) for each x)` for every tuple in `Y^d`.
fn for_each_tuple(channel: &Dmc, d: u32, mut f: impl FnMut(&[usize], &[f64])) {
    let (nx, k) = (channel.input_size(), channel.output_size());
    let mut y = vec![0usize; d as usize];
    let mut lik = vec![0.0; nx];
    loop {
        for (x, l) in lik.iter_mut().enumerate() {
            *l = y.iter().map(|&s| channel.prob(x, s)).product();
        }
        f(&y, &lik);
        let mut i = 0;
        loop {
            if i == y.len() {
                return;
            }
            y[i] += 1;
            if y[i] < k {
                break;
            }
            y[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force(channel: &Dmc, input: &FiniteDistribution, d: u32) -> Brute {
    let mut cells = vec![];
    for_each_tuple(channel, d, |_, lik| {
        let py: f64 = lik.iter().enumerate().map(|(x, l)| input.prob(x) * l).sum();
        for (x, &l) in lik.iter().enumerate() {
            let joint = input.prob(x) * l;
            if joint > 0.0 {
                cells.push((joint, (l / py).ln(), (joint / py).ln()));
            }
        }
    });
    let cond_entropy: f64 = cells.iter().map(|(w, _, lp)| -w * lp).sum();
    let mutual_info: f64 = cells.iter().map(|(w, iota, _)| w * iota).sum();
    let dispersion: f64 = cells.iter().map(|(w, iota, _)| w * (iota - mutual_info).powi(2)).sum();
    Brute { cond_entropy, mutual_info, dispersion }
}

/// `P[−log P(x|Y^d) ≥ t | X = x]`.
pub fn brute_posterior_tail(channel: &Dmc, input: &FiniteDistribution, x: usize, d: u32, t: f64) -> f64 {
    let mut acc = 0.0;
    for_each_tuple(channel, d, |_, lik| {
        let py: f64 = lik.iter().enumerate().map(|(j, l)| input.prob(j) * l).sum();
        let joint = input.prob(x) * lik[x];
        if joint > 0.0 && -(joint / py).ln() >= t {
            acc += lik[x];
        }
    });
    acc
}
