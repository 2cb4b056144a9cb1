//! Shared test helpers: naive nested-loop oracles that never touch the
//! contraction engine, and a seeded suite of random CP/Tucker instances.
#![allow(dead_code)]

use pltf::{build_cp, build_tucker, make_holdout, IndexDef, Model, Obs, PriorDefaults, Split, State, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

/// Every tuple over `indices`, last index fastest.
pub fn tuples(indices: &[IndexDef]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for ix in indices {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..ix.cardinality()).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Value of `t` at the full configuration `v` over `all`, located by name.
pub fn at(t: &Tensor, all: &[IndexDef], v: &[usize]) -> f64 {
    let mut off = 0;
    for ix in t.indices() {
        let p = all.iter().position(|a| a.name() == ix.name()).expect("index in universe");
        off = off * ix.cardinality() + v[p];
    }
    t.values()[off]
}

/// Row-major offset into a tensor over `out` of the configuration `v` over `all`.
pub fn out_offset(out: &[IndexDef], all: &[IndexDef], v: &[usize]) -> usize {
    out.iter().fold(0, |off, ix| {
        let p = all.iter().position(|a| a.name() == ix.name()).expect("index in universe");
        off * ix.cardinality() + v[p]
    })
}

fn volume(indices: &[IndexDef]) -> usize {
    indices.iter().map(|i| i.cardinality()).product()
}

/// `Σ_{all \ out} ∏ factors` by brute force.
pub fn naive_product(factors: &[&Tensor], all: &[IndexDef], out: &[IndexDef]) -> Vec<f64> {
    let mut res = vec![0.0; volume(out)];
    for v in tuples(all) {
        let p: f64 = factors.iter().map(|f| at(f, all, &v)).product();
        res[out_offset(out, all, &v)] += p;
    }
    res
}

/// `Δ_α(Q) = Σ_{all \ V_α} Q ∏_{α'≠α} Z_α'` by brute force.
pub fn naive_delta(alpha: usize, q: &Tensor, factors: &[&Tensor], all: &[IndexDef]) -> Vec<f64> {
    let target = factors[alpha].indices();
    let mut res = vec![0.0; volume(target)];
    for v in tuples(all) {
        let mut p = at(q, all, &v);
        for (k, f) in factors.iter().enumerate() {
            if k != alpha {
                p *= at(f, all, &v);
            }
        }
        res[out_offset(target, all, &v)] += p;
    }
    res
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

pub fn random_tensor(indices: Vec<IndexDef>, rng: &mut ChaCha8Rng, shape: f64) -> Tensor {
    let g = Gamma::new(shape, 1.0 / shape).unwrap();
    let n = volume(&indices);
    Tensor::nonneg(indices, (0..n).map(|_| g.sample(rng).max(1e-12)).collect()).unwrap()
}

/// Naive digamma-free helpers live in the tests that need them; this one
/// draws a random state with both views set from independent draws.
pub fn random_state(model: &Model, rng: &mut ChaCha8Rng) -> Vec<State> {
    model
        .factors()
        .iter()
        .map(|f| {
            let idx = f.indices().to_vec();
            let c = random_tensor(idx.clone(), rng, 2.0).map(|v| v + 0.3).unwrap();
            let d = random_tensor(idx, rng, 2.0);
            State::from_shape_scale(c, d).unwrap()
        })
        .collect()
}

pub struct Instance {
    pub label: String,
    pub model: Model,
    pub obs: Obs,
    pub missing: f64,
}

/// Seeded random CP (even slots) and Tucker (odd slots) instances with
/// dims ≤ 10, orders ≤ 5 and missing fraction cycling through 0, 0.4, 0.8.
/// Data are Poisson draws from a random intensity of the same structure.
pub fn random_suite(n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let dims = [rng.random_range(2..=10), rng.random_range(2..=10), rng.random_range(2..=10)];
            let a = [0.5, 1.0, 2.0][rng.random_range(0..3)];
            let b = [1.0, 10.0][rng.random_range(0..2)];
            let priors = PriorDefaults::new(a, b);
            let (model, label) = if k % 2 == 0 {
                let r = rng.random_range(1..=5);
                (build_cp(dims, r, priors).unwrap(), format!("cp {dims:?} r={r}"))
            } else {
                let core = [rng.random_range(1..=5), rng.random_range(1..=5), rng.random_range(1..=5)];
                (build_tucker(dims, core, priors).unwrap(), format!("tucker {dims:?} core={core:?}"))
            };
            let truth: Vec<Tensor> = model
                .factors()
                .iter()
                .map(|f| random_tensor(f.indices().to_vec(), &mut rng, 1.0))
                .collect();
            let views: Vec<&Tensor> = truth.iter().collect();
            let lam = pltf::full_product(&views, model.observed()).unwrap();
            let scale = 5.0 / (lam.sum() / lam.len() as f64);
            let x: Vec<f64> = lam
                .values()
                .iter()
                .map(|&l| Poisson::new(l * scale).unwrap().sample(&mut rng))
                .collect();
            let x = Tensor::nonneg(model.observed().to_vec(), x).unwrap();
            let missing = [0.0, 0.4, 0.8][k % 3];
            let split: Split = make_holdout(model.observed(), missing, seed ^ k as u64).unwrap();
            let obs = split.observe(&x).unwrap();
            Instance {
                label: format!("#{k} {label} missing={missing}"),
                model,
                obs,
                missing,
            }
        })
        .collect()
}

/// Log marginal of independent cells `X(j) ~ Po(z c_j)` sharing one
/// `z ~ G(a, θ)` with `θ = b/a`:
/// `Σ_j [x_j ln c_j − ln x_j!] + lnΓ(a+s) − lnΓ(a) − a ln θ − (a+s) ln(C + 1/θ)`.
pub fn gamma_poisson_log_marginal(a: f64, b: f64, x: &[f64], c: &[f64]) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let theta = b / a;
    let s: f64 = x.iter().sum();
    let big_c: f64 = c.iter().sum();
    let per_cell: f64 = x
        .iter()
        .zip(c)
        .map(|(&x, &c)| if x > 0.0 { x * c.ln() } else { 0.0 } - ln_gamma(x + 1.0))
        .sum();
    per_cell + ln_gamma(a + s) - ln_gamma(a) - a * theta.ln() - (a + s) * (big_c + 1.0 / theta).ln()
}

/// Negative-binomial log pmf of one count under a `G(a, b/a)` Poisson rate.
pub fn negative_binomial_log_pmf(a: f64, b: f64, x: f64) -> f64 {
    gamma_poisson_log_marginal(a, b, &[x], &[1.0])
}

/// Pairwise AUC: fraction of (positive, negative) pairs ordered correctly,
/// ties counting one half.
pub fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}
