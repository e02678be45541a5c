//! Geometry of the circle of circumference `ℓ`, parameterised by arc length.
//!
//! Points are a single coordinate in `[0, ℓ)`. The reference measure `m` is
//! always the uniform *probability* measure, so every measure returned here
//! is an arc length divided by `ℓ`.
//!
//! Voronoi cells are taken with respect to the *other* distinct atoms of a
//! configuration: the cell of `x` is the open arc between the midpoints to its
//! clockwise and anticlockwise neighbours. A lone atom owns the whole circle.

use crate::configuration::Configuration;
use crate::error::{require_positive, Error, Result};

/// Reduces `x` into `[0, ℓ)`.
#[inline]
pub fn wrap(x: f64, ell: f64) -> f64 {
    let y = x.rem_euclid(ell);
    // rem_euclid can round up to ell for tiny negative inputs
    if y >= ell {
        0.0
    } else {
        y
    }
}

/// A point on the circle, stored by its arc-length coordinate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(position: f64, circumference: f64) -> Result<Self> {
        require_positive("circumference", circumference)?;
        if !position.is_finite() {
            return Err(crate::error::invalid("position", "not finite"));
        }
        Ok(Self(wrap(position, circumference)))
    }

    pub(crate) fn from_wrapped(x: f64) -> Self {
        Self(x)
    }

    pub fn position(self) -> f64 {
        self.0
    }
}

/// Anticlockwise arc `[start, start + length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: CirclePoint,
    pub length: f64,
}

impl Arc {
    /// Normalised measure `length / ℓ`.
    pub fn measure(&self, circumference: f64) -> f64 {
        self.length / circumference
    }

    /// Whether `u` lies in the open arc.
    pub fn contains_open(&self, u: f64, circumference: f64) -> bool {
        let off = wrap(u - self.start.0, circumference);
        off > 0.0 && off < self.length
    }
}

/// Pairwise-disjoint arcs in canonical order (sorted by start).
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    arcs: Vec<Arc>,
    circumference: f64,
}

impl ArcSet {
    /// Union of arbitrary arcs, merged into canonical disjoint form.
    pub fn union_of(circumference: f64, arcs: impl IntoIterator<Item = Arc>) -> Result<Self> {
        require_positive("circumference", circumference)?;
        let ell = circumference;
        // unroll onto [0, 2ℓ) so wrapping arcs become plain intervals
        let mut ivs: Vec<(f64, f64)> = Vec::new();
        for a in arcs {
            let len = a.length.clamp(0.0, ell);
            if len <= 0.0 {
                continue;
            }
            if len >= ell {
                return Ok(Self {
                    arcs: vec![Arc {
                        start: CirclePoint(0.0),
                        length: ell,
                    }],
                    circumference,
                });
            }
            let s = a.start.0;
            let e = s + len;
            if e <= ell {
                ivs.push((s, e));
            } else {
                ivs.push((s, ell));
                ivs.push((0.0, e - ell));
            }
        }
        ivs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, e) in ivs {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        // join the piece touching ℓ with the piece starting at 0
        if merged.len() > 1 {
            let first = merged[0];
            let last = *merged.last().expect("nonempty");
            if first.0 <= 0.0 && last.1 >= ell {
                merged.pop();
                merged[0] = (last.0, first.1 + ell);
            }
        }
        let mut arcs: Vec<Arc> = merged
            .into_iter()
            .map(|(s, e)| Arc {
                start: CirclePoint(s),
                length: (e - s).min(ell),
            })
            .collect();
        arcs.sort_by(|a, b| a.start.0.partial_cmp(&b.start.0).expect("finite"));
        Ok(Self { arcs, circumference })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    pub fn measure(&self) -> f64 {
        (self.total_length() / self.circumference).min(1.0)
    }
}

/// Length of the shortest arc between `x` and `y`.
pub fn arc_distance(x: f64, y: f64, circumference: f64) -> Result<f64> {
    require_positive("circumference", circumference)?;
    Ok(arc_distance_unchecked(x, y, circumference))
}

#[inline]
pub(crate) fn arc_distance_unchecked(x: f64, y: f64, ell: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(ell);
    d.min(ell - d)
}

/// `m(B_r) = min(2r/ℓ, 1)`.
pub fn ball_measure(r: f64, circumference: f64) -> Result<f64> {
    require_positive("r", r)?;
    require_positive("circumference", circumference)?;
    Ok(ball_measure_unchecked(r, circumference))
}

#[inline]
pub(crate) fn ball_measure_unchecked(r: f64, ell: f64) -> f64 {
    (2.0 * r / ell).min(1.0)
}

/// Arc-length gaps to the clockwise and anticlockwise neighbouring atoms.
/// A lone atom sees the full circumference on both sides.
#[inline]
pub(crate) fn neighbor_gaps(positions: &[f64], i: usize, ell: f64) -> (f64, f64) {
    let k = positions.len();
    if k == 1 {
        return (ell, ell);
    }
    let prev = positions[(i + k - 1) % k];
    let next = positions[(i + 1) % k];
    let x = positions[i];
    (wrap(x - prev, ell), wrap(next - x, ell))
}

/// Arc length of `B_r(x) ∩ Γ(x)` from the neighbour gaps of `x`.
#[inline]
pub(crate) fn cell_ball_length(left_gap: f64, right_gap: f64, r: f64) -> f64 {
    (0.5 * left_gap).min(r) + (0.5 * right_gap).min(r)
}

/// Voronoi cell of every distinct atom, in atom order.
pub fn voronoi_cells(config: &Configuration) -> Result<Vec<(CirclePoint, Arc)>> {
    if config.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let ell = config.circumference();
    let pos: Vec<f64> = config.positions().collect();
    Ok((0..pos.len())
        .map(|i| {
            let (gl, gr) = neighbor_gaps(&pos, i, ell);
            let cell = Arc {
                start: CirclePoint(wrap(pos[i] - 0.5 * gl, ell)),
                length: 0.5 * (gl + gr),
            };
            (CirclePoint(pos[i]), cell)
        })
        .collect())
}

/// Normalised measure of `B_r(x) ∩ Γ_ζ(x)` for every distinct atom, in atom order.
pub(crate) fn cell_ball_measures(positions: &[f64], r: f64, ell: f64) -> impl Iterator<Item = f64> + '_ {
    (0..positions.len()).map(move |i| {
        let (gl, gr) = neighbor_gaps(positions, i, ell);
        cell_ball_length(gl, gr, r) / ell
    })
}

/// `m(B_r(x) ∩ Γ_ζ(x))`: the probability that a poll serves the atom at `x`.
pub fn cell_ball_measure(x: f64, config: &Configuration, r: f64) -> Result<f64> {
    require_positive("r", r)?;
    let ell = config.circumference();
    let idx = config.find(wrap(x, ell)).ok_or(Error::NotAnAtom(x))?;
    let pos: Vec<f64> = config.positions().collect();
    let (gl, gr) = neighbor_gaps(&pos, idx, ell);
    Ok(cell_ball_length(gl, gr, r) / ell)
}

/// Scan-success probability `k_r(ζ) = m(∪ B_r(x))`.
///
/// Computed as the sum of per-cell ball measures: inside the cell of `x` the
/// nearest atom is `x`, so the cells tile the union exactly.
pub fn union_balls_measure(config: &Configuration, r: f64) -> Result<f64> {
    require_positive("r", r)?;
    Ok(scan_success_unchecked(config, r))
}

pub(crate) fn scan_success_unchecked(config: &Configuration, r: f64) -> f64 {
    let ell = config.circumference();
    let atoms = config.atoms();
    let k = atoms.len();
    match k {
        0 => 0.0,
        1 => ball_measure_unchecked(r, ell),
        _ => {
            let mut total = 0.0;
            let mut prev = atoms[k - 1].location.position() - ell;
            for a in atoms {
                let x = a.location.position();
                total += (x - prev).min(2.0 * r);
                prev = x;
            }
            (total / ell).min(1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn conf(xs: &[f64]) -> Configuration {
        Configuration::from_locations(1.0, xs.iter().copied()).unwrap()
    }

    #[test]
    fn arc_distance_examples() {
        assert!((arc_distance(0.1, 0.9, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(arc_distance(0.37, 0.37, 3.0).unwrap(), 0.0);
        assert_eq!(arc_distance(0.0, 0.5, 1.0).unwrap(), 0.5);
        assert!(arc_distance(0.0, 0.5, 0.0).is_err());
        assert!(arc_distance(0.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn ball_measure_examples() {
        assert!((ball_measure(0.1, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(ball_measure(0.6, 1.0).unwrap(), 1.0);
        assert_eq!(ball_measure(0.25, 2.0).unwrap(), 0.25);
        assert!(ball_measure(0.0, 1.0).is_err());
        assert!(ball_measure(0.1, -1.0).is_err());
    }

    #[test]
    fn voronoi_examples() {
        let cells = voronoi_cells(&conf(&[0.0])).unwrap();
        assert_eq!(cells[0].1.measure(1.0), 1.0);

        let cells = voronoi_cells(&conf(&[0.0, 0.5])).unwrap();
        assert!(cells.iter().all(|(_, c)| (c.measure(1.0) - 0.5).abs() < 1e-15));

        let cells = voronoi_cells(&conf(&[0.0, 0.25, 0.5])).unwrap();
        let m: Vec<f64> = cells.iter().map(|(_, c)| c.measure(1.0)).collect();
        assert!((m[0] - 0.375).abs() < 1e-15);
        assert!((m[1] - 0.25).abs() < 1e-15);
        assert!((m[2] - 0.375).abs() < 1e-15);
        // the cell of 0 runs from the midpoint 0.75 to the midpoint 0.125
        assert!((cells[0].1.start.position() - 0.75).abs() < 1e-15);

        assert_eq!(
            voronoi_cells(&Configuration::empty(1.0).unwrap()),
            Err(Error::EmptyConfiguration)
        );
    }

    #[test]
    fn multiplicity_does_not_change_cells() {
        let a = Configuration::from_counts(1.0, [(0.0, 3), (0.25, 1)]).unwrap();
        let b = conf(&[0.0, 0.25]);
        assert_eq!(voronoi_cells(&a).unwrap(), voronoi_cells(&b).unwrap());
    }

    #[test]
    fn cell_ball_examples() {
        let z = conf(&[0.0, 1.0 / 3.0, 2.0 / 3.0]);
        for x in z.positions() {
            assert!((cell_ball_measure(x, &z, 0.1).unwrap() - 0.2).abs() < 1e-15);
        }
        let single = Configuration::from_locations(3.0, [1.2]).unwrap();
        assert!((cell_ball_measure(1.2, &single, 0.4).unwrap() - 0.8 / 3.0).abs() < 1e-15);
        let z = conf(&[0.0, 0.05]);
        assert!((cell_ball_measure(0.0, &z, 0.1).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(cell_ball_measure(0.3, &z, 0.1), Err(Error::NotAnAtom(0.3)));
    }

    /// Fine-grid oracle for `m(B_r(x) ∩ Γ(x))`: classify grid midpoints.
    fn grid_cell_ball(x: f64, z: &Configuration, r: f64, n: usize) -> f64 {
        let ell = z.circumference();
        let hits = (0..n)
            .filter(|&i| {
                let u = (i as f64 + 0.5) * ell / n as f64;
                let dx = arc_distance_unchecked(u, x, ell);
                dx < r
                    && z.positions()
                        .filter(|&y| y != x)
                        .all(|y| dx < arc_distance_unchecked(u, y, ell))
            })
            .count();
        hits as f64 / n as f64
    }

    #[test]
    fn cell_ball_matches_grid_oracle() {
        let z = conf(&[0.0, 0.05]);
        let oracle = grid_cell_ball(0.0, &z, 0.1, 200_000);
        assert!((oracle - 0.125).abs() < 1e-4);
    }

    #[test]
    fn union_examples() {
        assert_eq!(union_balls_measure(&Configuration::empty(1.0).unwrap(), 0.1).unwrap(), 0.0);
        assert!((union_balls_measure(&conf(&[0.0, 0.05]), 0.1).unwrap() - 0.25).abs() < 1e-15);
        for n in [1, 2, 7] {
            let z = Configuration::cluster(1.0, 0.4, n).unwrap();
            assert!((union_balls_measure(&z, 0.1).unwrap() - 0.2).abs() < 1e-15);
        }
        assert!(union_balls_measure(&conf(&[0.1]), 0.0).is_err());
    }

    #[test]
    fn arcset_merges_wrapping_arcs() {
        let arcs = [
            Arc { start: CirclePoint(0.9), length: 0.2 },
            Arc { start: CirclePoint(0.05), length: 0.1 },
            Arc { start: CirclePoint(0.5), length: 0.1 },
        ];
        let set = ArcSet::union_of(1.0, arcs).unwrap();
        assert_eq!(set.arcs().len(), 2);
        assert!((set.total_length() - 0.35).abs() < 1e-12);
        assert!((set.arcs()[1].start.position() - 0.9).abs() < 1e-12);
    }

    fn positions_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0..1.0f64, 1..25)
    }

    proptest! {
        #[test]
        fn cells_partition_the_circle(xs in positions_strategy(), ell in 0.5..4.0f64) {
            let z = Configuration::from_locations(ell, xs.iter().map(|x| x * ell)).unwrap();
            let total: f64 = voronoi_cells(&z).unwrap().iter().map(|(_, c)| c.measure(ell)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn voronoi_tiles_the_ball_union(xs in positions_strategy(), r in 0.001..0.7f64) {
            let z = conf(&xs);
            let by_cells: f64 = z.positions().map(|x| cell_ball_measure(x, &z, r).unwrap()).sum();
            let arcs = z.positions().map(|x| Arc {
                start: CirclePoint(wrap(x - r, 1.0)),
                length: 2.0 * r,
            });
            let union = ArcSet::union_of(1.0, arcs).unwrap().measure();
            let k = union_balls_measure(&z, r).unwrap();
            prop_assert!((by_cells.min(1.0) - k).abs() < 1e-12);
            prop_assert!((union - k).abs() < 1e-12);
            let mb = ball_measure(r, 1.0).unwrap();
            prop_assert!(k >= mb - 1e-12);
            prop_assert!(k <= (z.distinct_len() as f64 * mb).min(1.0) + 1e-12);
        }

        #[test]
        fn arc_distance_is_a_metric(x in 0.0..2.0f64, y in 0.0..2.0f64, w in 0.0..2.0f64) {
            let ell = 2.0;
            let dxy = arc_distance(x, y, ell).unwrap();
            prop_assert_eq!(dxy, arc_distance(y, x, ell).unwrap());
            prop_assert!(dxy <= arc_distance(x, w, ell).unwrap() + arc_distance(w, y, ell).unwrap() + 1e-12);
            prop_assert!((0.0..=1.0).contains(&dxy));
            prop_assert_eq!(dxy == 0.0, x == y);
        }
    }
}
