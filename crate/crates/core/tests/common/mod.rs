//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use xpaudit::models::TabularModel;
use xpaudit::rational::{int, rat};
use xpaudit::{ExplanationProblem, FeatureSet, Model, Rational};

/// Bits of table index `idx` in an `m`-feature boolean table, first feature
/// most significant.
pub fn bits_of(idx: usize, m: usize) -> Vec<bool> {
    (0..m).map(|i| idx >> (m - 1 - i) & 1 == 1).collect()
}

/// A non-constant boolean table and a random instance, drawn from `rng`.
pub fn random_boolean_problem(rng: &mut ChaCha8Rng, m: usize) -> ExplanationProblem {
    loop {
        let table: Vec<bool> = (0..1usize << m).map(|_| rng.gen()).collect();
        if table.iter().all(|&b| b == table[0]) {
            continue;
        }
        let model = boolean_table(m, &table);
        let point = (0..m).map(|_| int(rng.gen_range(0..2))).collect();
        return ExplanationProblem::classification(model.into(), point).unwrap();
    }
}

pub fn boolean_table(m: usize, table: &[bool]) -> TabularModel {
    TabularModel::boolean(m, |x| {
        let idx = x.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        table[idx]
    })
    .unwrap()
}

/// Mean output over the points agreeing with `v` on `set`, by a full scan.
pub fn brute_expectation(problem: &ExplanationProblem, set: FeatureSet) -> Rational {
    let t = problem.model().as_tabular().unwrap();
    let v = problem.point();
    let mut sum = Rational::zero();
    let mut count = 0i64;
    for idx in 0..t.len() {
        let x = t.point_of_index(idx);
        if set.iter().all(|i| x[i] == v[i]) {
            sum += t.output_at(idx);
            count += 1;
        }
    }
    sum / int(count)
}

/// Shapley value by the textbook subset formula over brute expectations.
pub fn brute_shap(problem: &ExplanationProblem, i: usize) -> Rational {
    let m = problem.feature_count();
    let fact = |n: usize| (1..=n as i64).product::<i64>();
    let mut total = Rational::zero();
    for s in FeatureSet::full(m).without(i).subsets() {
        let w = rat(fact(s.len()) * fact(m - s.len() - 1), fact(m));
        total += w * (brute_expectation(problem, s.with(i)) - brute_expectation(problem, s));
    }
    total
}

/// `S` is a WCXp iff some point that agrees with `v` off `S` is dissimilar.
pub fn brute_wcxp(problem: &ExplanationProblem, set: FeatureSet) -> bool {
    let t = problem.model().as_tabular().unwrap();
    let v = problem.point();
    let q = problem.prediction();
    (0..t.len()).any(|idx| {
        let x = t.point_of_index(idx);
        let agrees = (0..v.len()).all(|i| set.contains(i) || x[i] == v[i]);
        agrees && (t.output_at(idx) - q).abs() > *problem.delta()
    })
}

pub fn is_boolean_tabular(model: &Model) -> bool {
    model.as_tabular().is_some_and(|t| t.is_boolean())
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub const SAMPLES: usize = 1_000_000;
pub const TOLERANCE: f64 = 1e-3;

/// ρ₂ written out from its case definition.
pub fn rho2_f64(x: [f64; 2]) -> f64 {
    let in_d = |t: f64| (0.5..=1.5).contains(&t);
    if in_d(x[0]) {
        x[0]
    } else if in_d(x[1]) {
        x[1] + 1.0
    } else {
        x[1] - 2.0
    }
}

/// ρ₃ = 1 + g(x₁)·h(x₂).
pub fn rho3_f64(alpha: f64) -> impl Fn([f64; 2]) -> f64 {
    move |x| {
        let g = if x[0] <= 1.0 { 0.0 } else { 4.0 * (x[0] - 1.0) };
        let h = if x[1] <= 1.0 {
            -7.0 * alpha + 8.0 * alpha * x[1]
        } else {
            alpha
        };
        1.0 + g * h
    }
}

/// Stratified sampling: the free coordinates are split into equal strata and
/// each stratum receives one uniformly jittered sample.
pub fn monte_carlo(
    f: &dyn Fn([f64; 2]) -> f64,
    bounds: (f64, f64),
    v: [f64; 2],
    fixed: FeatureSet,
    seed: u64,
) -> f64 {
    let mut rng = seeded(seed);
    let free: Vec<usize> = (0..2).filter(|&i| !fixed.contains(i)).collect();
    let strata = match free.len() {
        0 => return f(v),
        1 => SAMPLES,
        _ => (SAMPLES as f64).sqrt() as usize,
    };
    let width = (bounds.1 - bounds.0) / strata as f64;
    let coord = |k: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        bounds.0 + (k as f64 + rng.gen::<f64>()) * width
    };
    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0..strata {
        for b in 0..if free.len() == 2 { strata } else { 1 } {
            let mut x = v;
            x[free[0]] = coord(a, &mut rng);
            if free.len() == 2 {
                x[free[1]] = coord(b, &mut rng);
            }
            sum += f(x);
            count += 1;
        }
    }
    sum / count as f64
}
