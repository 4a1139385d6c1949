use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{Domain, FeatureSpace, Polynomial, Violation};
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::rational::{int, Rational};

/// An axis-aligned box `∏ [lo_i, hi_i]` with one multilinear polynomial.
///
/// A cell owns the half-open region `lo_i ≤ x_i < hi_i` on every axis, except
/// that faces lying on the upper face of the model box are closed. The owned
/// regions of a valid partition tile the box exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
    pub poly: Polynomial,
}

impl Cell {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>, poly: Polynomial) -> Self {
        Cell { lo, hi, poly }
    }

    pub fn volume(&self) -> Rational {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Corners of the closed cell restricted to the `free` axes; fixed axes
    /// take their value from `v`.
    pub fn vertices(&self, free: FeatureSet, v: &[Rational]) -> Vec<Vec<Rational>> {
        corner_points(&self.lo, &self.hi, free, v)
    }
}

/// Every corner of `∏_{i ∈ free} [lo_i, hi_i]`, other coordinates from `v`.
pub(crate) fn corner_points(
    lo: &[Rational],
    hi: &[Rational],
    free: FeatureSet,
    v: &[Rational],
) -> Vec<Vec<Rational>> {
    let axes = free.to_vec();
    (0u64..1 << axes.len())
        .map(|mask| {
            let mut x = v.to_vec();
            for (k, &i) in axes.iter().enumerate() {
                x[i] = if mask >> k & 1 == 1 {
                    hi[i].clone()
                } else {
                    lo[i].clone()
                };
            }
            x
        })
        .collect()
}

/// A regression function given as a box partition with multilinear pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseModel {
    space: FeatureSpace,
    lo: Vec<Rational>,
    hi: Vec<Rational>,
    cells: Vec<Cell>,
}

/// Two adjacent cells whose polynomials disagree on their shared face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceViolation {
    /// Cell whose upper bound lies on the face.
    pub left_cell: usize,
    /// Cell whose lower bound lies on the face.
    pub right_cell: usize,
    /// Zero-based axis orthogonal to the face.
    pub axis: usize,
    #[serde(with = "crate::rational::serde_string")]
    pub coordinate: Rational,
    #[serde(with = "crate::rational::serde_string_vec")]
    pub face_lo: Vec<Rational>,
    #[serde(with = "crate::rational::serde_string_vec")]
    pub face_hi: Vec<Rational>,
    /// A point of the face where the two pieces differ.
    #[serde(with = "crate::rational::serde_string_vec")]
    pub witness: Vec<Rational>,
    #[serde(with = "crate::rational::serde_string")]
    pub left_value: Rational,
    #[serde(with = "crate::rational::serde_string")]
    pub right_value: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputNorm {
    L1,
    LInf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LipschitzBound {
    Bounded(Rational),
    Discontinuous(Vec<FaceViolation>),
}

impl PiecewiseModel {
    /// Checks only the shape of the input; partition validity is reported by
    /// [`super::validate_model`].
    pub fn new(space: FeatureSpace, cells: Vec<Cell>) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for (i, d) in space.domains().iter().enumerate() {
            match d {
                Domain::Interval { lo: l, hi: h } => {
                    lo.push(l.clone());
                    hi.push(h.clone());
                }
                Domain::Finite(_) => {
                    return Err(Error::Domain {
                        feature: i + 1,
                        message: "piecewise models need interval domains".into(),
                    })
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::Parse(
                "piecewise model needs at least one cell".into(),
            ));
        }
        Ok(PiecewiseModel {
            space,
            lo,
            hi,
            cells,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn box_lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn box_hi(&self) -> &[Rational] {
        &self.hi
    }

    /// Whether `cell` owns the coordinates of `x` on the axes in `axes`.
    pub fn owns(&self, cell: &Cell, x: &[Rational], axes: FeatureSet) -> bool {
        axes.iter().all(|i| {
            let upper_ok = if cell.hi[i] == self.hi[i] {
                x[i] <= cell.hi[i]
            } else {
                x[i] < cell.hi[i]
            };
            cell.lo[i] <= x[i] && upper_ok
        })
    }

    /// First cell, in declaration order, owning `point`.
    pub fn locate(&self, point: &[Rational]) -> Option<usize> {
        let all = FeatureSet::full(self.space.feature_count());
        self.cells.iter().position(|c| self.owns(c, point, all))
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        self.space.check_point(point)?;
        let k = self.locate(point).ok_or_else(|| Error::Domain {
            feature: 0,
            message: "no cell covers the point".into(),
        })?;
        Ok(self.cells[k].poly.eval(point))
    }

    /// Cells whose owned region meets the slice `x_S = v_S`.
    pub fn cells_on_slice<'a>(
        &'a self,
        v: &'a [Rational],
        fixed: FeatureSet,
    ) -> impl Iterator<Item = (usize, &'a Cell)> + 'a {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, c)| self.owns(c, v, fixed))
    }

    /// Exact `E[ρ(x) | x_S = v_S]`: closed-form integral over the slice
    /// divided by its volume.
    pub fn conditioned_expectation(&self, v: &[Rational], fixed: FeatureSet) -> Result<Rational> {
        self.space.check_subset(fixed)?;
        self.space.check_point(v)?;
        let m = self.space.feature_count();
        let volume: Rational = (0..m)
            .filter(|&i| !fixed.contains(i))
            .map(|i| &self.hi[i] - &self.lo[i])
            .product();
        let integral: Rational = self
            .cells_on_slice(v, fixed)
            .map(|(_, c)| c.poly.integrate(&c.lo, &c.hi, fixed, v))
            .sum();
        Ok(integral / volume)
    }

    /// Shared faces on which adjacent pieces disagree; empty iff continuous.
    ///
    /// The difference of two multilinear pieces restricted to a face is
    /// multilinear, so it vanishes on the face iff it vanishes at the face
    /// corners.
    pub fn check_continuity(&self) -> Vec<FaceViolation> {
        let m = self.space.feature_count();
        let mut out = Vec::new();
        for a in 0..self.cells.len() {
            for b in a + 1..self.cells.len() {
                for axis in 0..m {
                    let (left, right) = if self.cells[a].hi[axis] == self.cells[b].lo[axis] {
                        (a, b)
                    } else if self.cells[b].hi[axis] == self.cells[a].lo[axis] {
                        (b, a)
                    } else {
                        continue;
                    };
                    if let Some(v) = self.face_violation(left, right, axis) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    fn face_violation(&self, left: usize, right: usize, axis: usize) -> Option<FaceViolation> {
        let m = self.space.feature_count();
        let (l, r) = (&self.cells[left], &self.cells[right]);
        let coordinate = l.hi[axis].clone();
        let mut face_lo = Vec::with_capacity(m);
        let mut face_hi = Vec::with_capacity(m);
        for i in 0..m {
            if i == axis {
                face_lo.push(coordinate.clone());
                face_hi.push(coordinate.clone());
                continue;
            }
            let lo = std::cmp::max(&l.lo[i], &r.lo[i]).clone();
            let hi = std::cmp::min(&l.hi[i], &r.hi[i]).clone();
            if lo >= hi {
                // contact of lower dimension, not a face
                return None;
            }
            face_lo.push(lo);
            face_hi.push(hi);
        }
        let diff = l.poly.sub(&r.poly);
        let free = FeatureSet::full(m).without(axis);
        let corners = corner_points(&face_lo, &face_hi, free, &face_lo);
        let bad_corner = corners.into_iter().find(|x| !diff.eval(x).is_zero())?;
        let two = int(2);
        let center: Vec<Rational> = face_lo
            .iter()
            .zip(&face_hi)
            .map(|(a, b)| (a + b) / &two)
            .collect();
        let witness = if diff.eval(&center).is_zero() {
            bad_corner
        } else {
            center
        };
        Some(FaceViolation {
            left_cell: left,
            right_cell: right,
            axis,
            coordinate,
            face_lo,
            face_hi,
            left_value: l.poly.eval(&witness),
            right_value: r.poly.eval(&witness),
            witness,
        })
    }

    /// A valid Lipschitz constant for `|ρ(x) - ρ(y)| ≤ C·‖x - y‖`, or the
    /// discontinuities that rule one out.
    ///
    /// Each gradient component is multilinear in the remaining variables, and
    /// the dual norm of the gradient is a maximum of signed sums of those
    /// components, so its supremum over a cell is attained at a corner.
    pub fn lipschitz_bound(&self, norm: InputNorm) -> LipschitzBound {
        let faces = self.check_continuity();
        if !faces.is_empty() {
            return LipschitzBound::Discontinuous(faces);
        }
        let m = self.space.feature_count();
        let all = FeatureSet::full(m);
        let mut best = Rational::zero();
        for cell in &self.cells {
            let gradient: Vec<Polynomial> = (0..m).map(|i| cell.poly.partial(i)).collect();
            for x in cell.vertices(all, &cell.lo) {
                let parts = gradient.iter().map(|g| g.eval(&x).abs());
                let dual = match norm {
                    InputNorm::LInf => parts.sum::<Rational>(),
                    InputNorm::L1 => parts.max().unwrap_or_else(Rational::zero),
                };
                if dual > best {
                    best = dual;
                }
            }
        }
        LipschitzBound::Bounded(best)
    }

    pub(super) fn violations(&self) -> Vec<Violation> {
        let m = self.space.feature_count();
        let mut out = Vec::new();
        let mut shaped = Vec::new();
        for (k, c) in self.cells.iter().enumerate() {
            if c.lo.len() != m || c.hi.len() != m {
                out.push(Violation::CellArity {
                    cell: k,
                    expected: m,
                    got: c.lo.len().min(c.hi.len()),
                });
                continue;
            }
            let mut ok = true;
            for i in 0..m {
                if c.lo[i] >= c.hi[i] {
                    out.push(Violation::EmptyCell {
                        cell: k,
                        feature: i + 1,
                    });
                    ok = false;
                }
                if c.lo[i] < self.lo[i] || c.hi[i] > self.hi[i] {
                    out.push(Violation::CellOutsideBox {
                        cell: k,
                        feature: i + 1,
                    });
                    ok = false;
                }
            }
            let span = c.poly.variables().span();
            if span > m {
                out.push(Violation::PolynomialVariable {
                    cell: k,
                    feature: span,
                });
            }
            if ok {
                shaped.push(k);
            }
        }
        for (x, &a) in shaped.iter().enumerate() {
            for &b in &shaped[x + 1..] {
                let (ca, cb) = (&self.cells[a], &self.cells[b]);
                let overlap = (0..m).all(|i| {
                    std::cmp::max(&ca.lo[i], &cb.lo[i]) < std::cmp::min(&ca.hi[i], &cb.hi[i])
                });
                if overlap {
                    out.push(Violation::CellOverlap {
                        first: a,
                        second: b,
                    });
                }
            }
        }
        let required: Rational = self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product();
        let covered: Rational = shaped.iter().map(|&k| self.cells[k].volume()).sum();
        if covered != required {
            out.push(Violation::Coverage { covered, required });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Term;
    use crate::rational::rat;

    fn unit_square(cells: Vec<Cell>) -> PiecewiseModel {
        let space = FeatureSpace::boxed(vec![(int(0), int(1)), (int(0), int(1))]).unwrap();
        PiecewiseModel::new(space, cells).unwrap()
    }

    fn halves(left: Polynomial, right: Polynomial) -> PiecewiseModel {
        unit_square(vec![
            Cell::new(vec![int(0), int(0)], vec![rat(1, 2), int(1)], left),
            Cell::new(vec![rat(1, 2), int(0)], vec![int(1), int(1)], right),
        ])
    }

    #[test]
    fn half_open_ownership() {
        let m = halves(Polynomial::constant(int(0)), Polynomial::constant(int(1)));
        assert_eq!(m.locate(&[rat(1, 2), int(0)]), Some(1));
        assert_eq!(m.locate(&[rat(1, 4), int(1)]), Some(0));
        assert_eq!(m.locate(&[int(1), int(1)]), Some(1));
    }

    #[test]
    fn overlap_and_gap_are_reported() {
        let overlapping = unit_square(vec![
            Cell::new(
                vec![int(0), int(0)],
                vec![rat(3, 4), int(1)],
                Polynomial::zero(),
            ),
            Cell::new(
                vec![rat(1, 2), int(0)],
                vec![int(1), int(1)],
                Polynomial::zero(),
            ),
        ]);
        let v = overlapping.violations();
        assert!(v.contains(&Violation::CellOverlap {
            first: 0,
            second: 1
        }));
        let gap = unit_square(vec![Cell::new(
            vec![int(0), int(0)],
            vec![rat(1, 2), int(1)],
            Polynomial::zero(),
        )]);
        assert!(matches!(gap.violations()[..], [Violation::Coverage { .. }]));
    }

    #[test]
    fn continuity_of_glued_pieces() {
        // x1 on the left, 1 - x1 + ... mismatched on the right
        let glued = halves(
            Polynomial::variable(0),
            Polynomial::affine(int(1), int(-1), 0),
        );
        assert!(glued.check_continuity().is_empty());
        let broken = halves(Polynomial::variable(0), Polynomial::variable(1));
        let faces = broken.check_continuity();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].axis, 0);
        assert_eq!(faces[0].coordinate, rat(1, 2));
        assert_ne!(faces[0].left_value, faces[0].right_value);
    }

    #[test]
    fn lipschitz_of_bilinear_piece() {
        // 3 x1 x2 on [0,1]^2: gradient (3x2, 3x1) maximal at (1,1)
        let p = Polynomial::new([Term {
            coef: int(3),
            vars: FeatureSet::full(2),
        }]);
        let m = unit_square(vec![Cell::new(
            vec![int(0), int(0)],
            vec![int(1), int(1)],
            p,
        )]);
        assert_eq!(
            m.lipschitz_bound(InputNorm::LInf),
            LipschitzBound::Bounded(int(6))
        );
        assert_eq!(
            m.lipschitz_bound(InputNorm::L1),
            LipschitzBound::Bounded(int(3))
        );
    }

    #[test]
    fn slice_expectation() {
        let m = halves(Polynomial::constant(int(0)), Polynomial::constant(int(1)));
        let v = [rat(3, 4), rat(1, 3)];
        assert_eq!(
            m.conditioned_expectation(&v, FeatureSet::EMPTY).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            m.conditioned_expectation(&v, FeatureSet::singleton(0))
                .unwrap(),
            int(1)
        );
        assert_eq!(
            m.conditioned_expectation(&v, FeatureSet::singleton(1))
                .unwrap(),
            rat(1, 2)
        );
    }
}
