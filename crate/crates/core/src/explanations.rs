//! Similarity, formal explanations and adversarial examples.
//!
//! A set `S` is a weak abductive explanation (WAXp) when fixing `x_S = v_S`
//! forces the output to stay similar to `q` almost everywhere, and a weak
//! contrastive explanation (WCXp) when freeing `S` (fixing the rest) lets the
//! output become distinguishable. AXps and CXps are the subset-minimal ones.
//!
//! Tabular models are decided by exhaustive scans. Piecewise models are
//! decided exactly by range analysis: a multilinear piece attains its extrema
//! over a box at the box corners, so checking the corners of every cell that
//! meets the slice settles whether `|ρ(x) − q| ≤ δ` holds on the slice.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_set::{sort_canonical, FeatureSet};
use crate::models::{Cell, Model, PiecewiseModel, TabularModel};
use crate::problem::ExplanationProblem;
use crate::rational::{int, Rational};

/// Largest feature count for which explanations are enumerated by brute force.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Number of coordinates that differ from `v`.
    L0,
    L1,
    LInf,
}

/// An adversarial-example query: distance budget, norm and fixed features.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AExQuery {
    epsilon: Rational,
    norm: Norm,
    fixed: FeatureSet,
}

impl AExQuery {
    pub fn new(epsilon: Rational, norm: Norm, fixed: FeatureSet) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(Error::InvalidProblem(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(AExQuery {
            epsilon,
            norm,
            fixed,
        })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn fixed(&self) -> FeatureSet {
        self.fixed
    }
}

/// `σ(x)`: the output at `x` is within `δ` of the target prediction.
pub fn similar(problem: &ExplanationProblem, x: &[Rational]) -> Result<bool> {
    let out = problem.model().evaluate(x)?;
    Ok(problem.is_similar_output(&out))
}

/// `E[σ(x) | x_S = v_S] = 1`.
pub fn is_waxp(problem: &ExplanationProblem, set: FeatureSet) -> Result<bool> {
    problem.check_subset(set)?;
    Ok(match problem.model() {
        Model::Tabular(t) => tabular_waxp(problem, t, set),
        Model::Piecewise(p) => piecewise_waxp(problem, p, set),
    })
}

/// `E[σ(x) | x_{F∖S} = v_{F∖S}] < 1`.
pub fn is_wcxp(problem: &ExplanationProblem, set: FeatureSet) -> Result<bool> {
    problem.check_subset(set)?;
    Ok(!is_waxp(problem, set.complement(problem.feature_count()))?)
}

fn tabular_waxp(problem: &ExplanationProblem, table: &TabularModel, set: FeatureSet) -> bool {
    let sim = problem.similar_entries().expect("tabular problem");
    let digits = table
        .digits_of_point(problem.point())
        .expect("instance validated");
    table.consistent_indices(&digits, set).all(|idx| sim[idx])
}

fn piecewise_waxp(problem: &ExplanationProblem, model: &PiecewiseModel, set: FeatureSet) -> bool {
    let v = problem.point();
    let free = set.complement(problem.feature_count());
    model.cells_on_slice(v, set).all(|(_, cell)| {
        cell.vertices(free, v)
            .iter()
            .all(|x| problem.is_similar_output(&cell.poly.eval(x)))
    })
}

/// Subset-minimal members of an upward-closed family, found by scanning the
/// lattice by increasing cardinality and skipping supersets of earlier hits.
fn minimal_members(
    m: usize,
    mut member: impl FnMut(FeatureSet) -> Result<bool>,
) -> Result<Vec<FeatureSet>> {
    if m > ENUMERATION_LIMIT {
        return Err(Error::TooManyFeatures {
            what: "explanation enumeration",
            limit: ENUMERATION_LIMIT,
            count: m,
        });
    }
    let mut found: Vec<FeatureSet> = Vec::new();
    for size in 0..=m {
        for set in sets_of_size(m, size) {
            if found.iter().any(|f| f.is_subset(set)) {
                continue;
            }
            if member(set)? {
                found.push(set);
            }
        }
    }
    sort_canonical(&mut found);
    Ok(found)
}

/// All `size`-subsets of `{0..m-1}` (Gosper's hack).
fn sets_of_size(m: usize, size: usize) -> impl Iterator<Item = FeatureSet> {
    let limit = 1u64 << m;
    let mut next = if size > m {
        None
    } else {
        Some((1u64 << size) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(FeatureSet::from_bits(cur))
    })
}

/// All AXps, in increasing cardinality with lexicographic tie-break.
pub fn enumerate_axps(problem: &ExplanationProblem) -> Result<Vec<FeatureSet>> {
    minimal_members(problem.feature_count(), |s| is_waxp(problem, s))
}

/// All CXps, in increasing cardinality with lexicographic tie-break.
pub fn enumerate_cxps(problem: &ExplanationProblem) -> Result<Vec<FeatureSet>> {
    minimal_members(problem.feature_count(), |s| is_wcxp(problem, s))
}

/// Union of all AXps.
pub fn relevant_features(problem: &ExplanationProblem) -> Result<FeatureSet> {
    Ok(union_of(&enumerate_axps(problem)?))
}

/// Union of all CXps; agrees with [`relevant_features`].
pub fn relevant_features_from_cxps(problem: &ExplanationProblem) -> Result<FeatureSet> {
    Ok(union_of(&enumerate_cxps(problem)?))
}

fn union_of(sets: &[FeatureSet]) -> FeatureSet {
    sets.iter().fold(FeatureSet::EMPTY, |acc, s| acc.union(*s))
}

/// Minimal hitting sets of `family` within `universe`, by direct check of
/// every subset.
pub fn minimal_hitting_sets(family: &[FeatureSet], universe: FeatureSet) -> Vec<FeatureSet> {
    let hits = |h: FeatureSet| family.iter().all(|s| s.intersects(h));
    let mut out: Vec<FeatureSet> = universe
        .subsets()
        .filter(|&h| hits(h) && h.iter().all(|t| !hits(h.without(t))))
        .collect();
    sort_canonical(&mut out);
    out
}

/// AXps are exactly the minimal hitting sets of the CXps, and vice versa.
pub fn check_duality(problem: &ExplanationProblem) -> Result<bool> {
    let universe = problem.all_features();
    let axps = enumerate_axps(problem)?;
    let cxps = enumerate_cxps(problem)?;
    Ok(minimal_hitting_sets(&cxps, universe) == axps
        && minimal_hitting_sets(&axps, universe) == cxps)
}

/// A point `x` with `x_S = v_S`, `‖x − v‖_p ≤ ε` and `¬σ(x)`, if one exists.
///
/// Tabular models are scanned exhaustively and the witness closest to `v`
/// is returned. Piecewise models are searched cell by cell over the
/// intersection of each cell with the ε-ball. For `l1` with pieces that have
/// products of variables, only corners of those intersections are inspected,
/// so a miss is not a proof of absence unless the ball contains the cell.
pub fn find_aex(problem: &ExplanationProblem, query: &AExQuery) -> Result<Option<Vec<Rational>>> {
    problem.check_subset(query.fixed)?;
    Ok(match problem.model() {
        Model::Tabular(t) => tabular_aex(problem, t, query),
        Model::Piecewise(p) => piecewise_aex(problem, p, query),
    })
}

fn tabular_aex(
    problem: &ExplanationProblem,
    table: &TabularModel,
    query: &AExQuery,
) -> Option<Vec<Rational>> {
    let sim = problem.similar_entries().expect("tabular problem");
    let v = problem.point();
    let digits = table.digits_of_point(v).expect("instance validated");
    let mut best: Option<(Rational, usize)> = None;
    for idx in table.consistent_indices(&digits, query.fixed) {
        if sim[idx] {
            continue;
        }
        let x = table.point_of_index(idx);
        let d = distance(query.norm, &x, v);
        if d > query.epsilon {
            continue;
        }
        if best.as_ref().is_none_or(|(bd, _)| &d < bd) {
            best = Some((d, idx));
        }
    }
    best.map(|(_, idx)| table.point_of_index(idx))
}

pub fn distance(norm: Norm, x: &[Rational], y: &[Rational]) -> Rational {
    let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
    match norm {
        Norm::L0 => Rational::from_integer(diffs.filter(|d| !d.is_zero()).count().into()),
        Norm::L1 => diffs.sum(),
        Norm::LInf => diffs.max().unwrap_or_else(Rational::zero),
    }
}

fn piecewise_aex(
    problem: &ExplanationProblem,
    model: &PiecewiseModel,
    query: &AExQuery,
) -> Option<Vec<Rational>> {
    let m = problem.feature_count();
    let free = query.fixed.complement(m);
    match query.norm {
        Norm::L0 => {
            // any deviation on an interval axis counts as one
            let budget = query.epsilon.floor().to_integer();
            let max_size = free
                .len()
                .min(usize::try_from(budget).unwrap_or(usize::MAX));
            (1..=max_size).find_map(|size| {
                sets_of_size(m, size)
                    .filter(|t| t.is_subset(free))
                    .find_map(|t| search_slice(problem, model, t, None))
            })
        }
        Norm::L1 | Norm::LInf => {
            search_slice(problem, model, free, Some((query.norm, &query.epsilon)))
        }
    }
}

/// Searches the cells meeting the slice that frees `free` (other axes at
/// `v`), clipped to the ε-ball when given.
fn search_slice(
    problem: &ExplanationProblem,
    model: &PiecewiseModel,
    free: FeatureSet,
    ball: Option<(Norm, &Rational)>,
) -> Option<Vec<Rational>> {
    let m = problem.feature_count();
    let v = problem.point();
    let fixed = free.complement(m);
    for (_, cell) in model.cells_on_slice(v, fixed) {
        let mut lo = v.to_vec();
        let mut hi = v.to_vec();
        let mut empty = false;
        for i in free.iter() {
            lo[i] = cell.lo[i].clone();
            hi[i] = cell.hi[i].clone();
            if let Some((_, eps)) = ball {
                lo[i] = lo[i].clone().max(&v[i] - eps);
                hi[i] = hi[i].clone().min(&v[i] + eps);
            }
            empty |= lo[i] > hi[i];
        }
        if empty {
            continue;
        }
        let regions = match ball {
            Some((Norm::L1, _)) => orthant_regions(&lo, &hi, free, v),
            _ => vec![(lo, hi)],
        };
        for (rlo, rhi) in regions {
            let candidates = match ball {
                Some((Norm::L1, eps)) => l1_candidates(&rlo, &rhi, free, v, eps),
                _ => crate::models::corner_points(&rlo, &rhi, free, v),
            };
            for w in candidates {
                if problem.is_similar_output(&cell.poly.eval(&w)) {
                    continue;
                }
                if let Some(x) = realize(problem, cell, &w, &rlo, &rhi, free, ball) {
                    return Some(x);
                }
            }
        }
    }
    None
}

/// Splits a box around `v` into the parts lying in each orthant, on which
/// the `l1` distance to `v` is linear.
fn orthant_regions(
    lo: &[Rational],
    hi: &[Rational],
    free: FeatureSet,
    v: &[Rational],
) -> Vec<(Vec<Rational>, Vec<Rational>)> {
    let axes = free.to_vec();
    let mut out = Vec::new();
    'signs: for mask in 0u64..1 << axes.len() {
        let mut rlo = lo.to_vec();
        let mut rhi = hi.to_vec();
        for (k, &i) in axes.iter().enumerate() {
            if mask >> k & 1 == 1 {
                rlo[i] = rlo[i].clone().max(v[i].clone());
            } else {
                rhi[i] = rhi[i].clone().min(v[i].clone());
            }
            if rlo[i] > rhi[i] {
                continue 'signs;
            }
        }
        out.push((rlo, rhi));
    }
    out
}

/// Vertices of `box ∩ {‖x − v‖₁ ≤ ε}` for a box inside one orthant of `v`.
fn l1_candidates(
    lo: &[Rational],
    hi: &[Rational],
    free: FeatureSet,
    v: &[Rational],
    eps: &Rational,
) -> Vec<Vec<Rational>> {
    let corners = crate::models::corner_points(lo, hi, free, v);
    let mut out: Vec<Vec<Rational>> = corners
        .iter()
        .filter(|x| distance(Norm::L1, x, v) <= *eps)
        .cloned()
        .collect();
    for j in free.iter() {
        for corner in &corners {
            let others: Rational = free
                .iter()
                .filter(|&i| i != j)
                .map(|i| (&corner[i] - &v[i]).abs())
                .sum();
            let slack = eps - others;
            if slack.is_negative() {
                continue;
            }
            for x_j in [&v[j] + &slack, &v[j] - &slack] {
                if lo[j] <= x_j && x_j <= hi[j] {
                    let mut x = corner.clone();
                    x[j] = x_j;
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Turns a corner `w` where the cell polynomial is distinguishable into a
/// genuine model witness: `w` itself when the cell owns it, otherwise a point
/// pulled slightly into the interior of the region.
fn realize(
    problem: &ExplanationProblem,
    cell: &Cell,
    w: &[Rational],
    lo: &[Rational],
    hi: &[Rational],
    free: FeatureSet,
    ball: Option<(Norm, &Rational)>,
) -> Option<Vec<Rational>> {
    if matches!(similar(problem, w), Ok(false)) {
        return Some(w.to_vec());
    }
    if free.iter().any(|i| lo[i] == hi[i]) {
        return None;
    }
    let v = problem.point();
    let two = int(2);
    let mid: Vec<Rational> = lo.iter().zip(hi).map(|(a, b)| (a + b) / &two).collect();
    let target = match ball {
        Some((Norm::L1, eps)) => {
            let near: Vec<Rational> = (0..v.len())
                .map(|i| {
                    if (&lo[i] - &v[i]).abs() <= (&hi[i] - &v[i]).abs() {
                        lo[i].clone()
                    } else {
                        hi[i].clone()
                    }
                })
                .collect();
            let d_near = distance(Norm::L1, &near, v);
            if &d_near >= eps {
                return None;
            }
            let d_mid = distance(Norm::L1, &mid, v);
            let s = ((eps - &d_near) / (d_mid - &d_near)).min(Rational::one());
            near.iter()
                .zip(&mid)
                .map(|(n, c)| n + (c - n) * &s)
                .collect()
        }
        _ => mid,
    };
    let mut t = Rational::one();
    for _ in 0..96 {
        t /= &two;
        let x: Vec<Rational> = w
            .iter()
            .zip(&target)
            .map(|(a, c)| a + (c - a) * &t)
            .collect();
        if !problem.is_similar_output(&cell.poly.eval(&x))
            && matches!(similar(problem, &x), Ok(false))
        {
            return Some(x);
        }
    }
    None
}
