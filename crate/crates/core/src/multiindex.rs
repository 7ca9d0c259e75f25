//! Multi-indices, correction grids and the counting functions behind the
//! non-singularity argument for the coefficient matrix.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::fmt;
use std::ops::Range;

/// Largest supported ambient dimension.
pub const MAX_DIMENSION: usize = 8;
/// Largest supported correction order.
pub const MAX_ORDER: usize = 12;

/// An n-tuple of nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|xi|_1`, exact.
    pub fn norm1(&self) -> u64 {
        self.0.iter().map(|&v| v as u64).sum()
    }

    /// Number of zero coordinates.
    pub fn zeros(&self) -> usize {
        multiplicity_lambda(self, 0)
    }

    /// Indices of the zero coordinates, ascending.
    pub fn zero_set(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| (v == 0).then_some(i))
            .collect()
    }

    /// `self^other = prod self_i^other_i` with `0^0 = 1`, exact.
    pub fn pow(&self, exponent: &[u32]) -> u128 {
        self.0
            .iter()
            .zip(exponent)
            .map(|(&b, &e)| (b as u128).pow(e))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A lattice point with signed integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedLatticePoint(pub Vec<i64>);

impl SignedLatticePoint {
    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// `sgn(prod_{j < kappa} beta_j)`; the empty product has sign +1.
    pub fn sign(&self, kappa: usize) -> i32 {
        let mut s = 1;
        for &b in &self.0[..kappa] {
            match b.signum() {
                0 => return 0,
                -1 => s = -s,
                _ => {}
            }
        }
        s
    }

    /// Coordinate-wise absolute value.
    pub fn abs(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|&b| b.unsigned_abs() as u32).collect())
    }
}

impl fmt::Display for SignedLatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Points of one zero pattern `J` inside a block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridGroup {
    /// Zero coordinates (0-based), all `>= kappa`.
    pub zeros: Vec<usize>,
    pub range: Range<usize>,
}

/// All grid points with exactly `k` zero coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridBlock {
    pub k: usize,
    pub range: Range<usize>,
    pub groups: Vec<GridGroup>,
}

/// The ordered correction grid `I(n,p)` together with its orbits.
///
/// Points are ordered by decreasing number of zeros `k`, then by zero
/// pattern `J` (lexicographic on the sorted index set), then in dictionary
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct CorrectionGrid {
    pub n: usize,
    pub p: usize,
    pub kappa: usize,
    pub points: Vec<MultiIndex>,
    pub orbits: Vec<Vec<SignedLatticePoint>>,
    pub blocks: Vec<GridBlock>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GridRecord {
    n: usize,
    p: usize,
    kappa: usize,
    points: Vec<MultiIndex>,
}

impl From<CorrectionGrid> for GridRecord {
    fn from(g: CorrectionGrid) -> Self {
        GridRecord {
            n: g.n,
            p: g.p,
            kappa: g.kappa,
            points: g.points,
        }
    }
}

impl TryFrom<GridRecord> for CorrectionGrid {
    type Error = Error;

    fn try_from(r: GridRecord) -> Result<Self> {
        let grid = enumerate_grid(r.n, r.p, r.kappa)?;
        if grid.points != r.points {
            return Err(Error::InvalidArgument(format!(
                "serialized points are not the canonical grid for n={}, p={}, kappa={}",
                r.n, r.p, r.kappa
            )));
        }
        Ok(grid)
    }
}

impl CorrectionGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position of `eta` in the canonical order.
    pub fn index_of(&self, eta: &MultiIndex) -> Option<usize> {
        self.points.iter().position(|p| p == eta)
    }

    /// Row exponent `2 xi - sum_{j < kappa} e_j` of grid point `i`.
    pub fn row_exponent(&self, i: usize) -> Vec<u32> {
        self.points[i]
            .0
            .iter()
            .enumerate()
            .map(|(j, &v)| if j < self.kappa { 2 * v - 1 } else { 2 * v })
            .collect()
    }
}

pub(crate) fn check_shape(n: usize, p: usize, kappa: usize) -> Result<()> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::InvalidDimension(n));
    }
    if kappa > n {
        return Err(Error::KappaOutOfRange { n, kappa });
    }
    if p > MAX_ORDER {
        return Err(Error::OrderTooLarge(p));
    }
    Ok(())
}

/// Calls `f` for every `xi` in `N_0^n` with `|xi|_1 <= p` and
/// `xi_j >= lower[j]`, in dictionary order.
fn for_each_bounded(n: usize, p: u32, lower: &[u32], f: &mut impl FnMut(&[u32])) {
    fn rec(pos: usize, left: u32, lower: &[u32], cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if pos == cur.len() {
            f(cur);
            return;
        }
        let rest: u32 = lower[pos + 1..].iter().sum();
        if lower[pos] + rest > left {
            return;
        }
        for v in lower[pos]..=left - rest {
            cur[pos] = v;
            rec(pos + 1, left - v, lower, cur, f);
        }
    }
    let mut cur = vec![0; n];
    rec(0, p, lower, &mut cur, f);
}

/// Enumerates the correction grid `I(n,p)` for symmetry index `kappa`.
pub fn enumerate_grid(n: usize, p: usize, kappa: usize) -> Result<CorrectionGrid> {
    check_shape(n, p, kappa)?;
    let lower: Vec<u32> = (0..n).map(|j| u32::from(j < kappa)).collect();
    let mut points = Vec::new();
    for_each_bounded(n, p as u32, &lower, &mut |xi| points.push(MultiIndex(xi.to_vec())));
    points.sort_by_cached_key(|xi| (Reverse(xi.zeros()), xi.zero_set(), xi.clone()));

    let mut blocks: Vec<GridBlock> = Vec::new();
    for (i, xi) in points.iter().enumerate() {
        let k = xi.zeros();
        let zeros = xi.zero_set();
        match blocks.last_mut() {
            Some(b) if b.k == k => {
                b.range.end = i + 1;
                let g = b.groups.last_mut().expect("block has a group");
                if g.zeros == zeros {
                    g.range.end = i + 1;
                } else {
                    b.groups.push(GridGroup { zeros, range: i..i + 1 });
                }
            }
            _ => blocks.push(GridBlock {
                k,
                range: i..i + 1,
                groups: vec![GridGroup { zeros, range: i..i + 1 }],
            }),
        }
    }
    let orbits = points.iter().map(orbit).collect();
    Ok(CorrectionGrid {
        n,
        p,
        kappa,
        points,
        orbits,
        blocks,
    })
}

/// All sign flips of the nonzero coordinates of `eta`.
///
/// Flips are enumerated by an ascending bit mask over the nonzero
/// coordinates, bit 0 acting on the first nonzero coordinate.
pub fn orbit(eta: &MultiIndex) -> Vec<SignedLatticePoint> {
    let nz: Vec<usize> = (0..eta.dim()).filter(|&i| eta.0[i] != 0).collect();
    (0u32..1 << nz.len())
        .map(|mask| {
            let mut b: Vec<i64> = eta.0.iter().map(|&v| v as i64).collect();
            for (bit, &i) in nz.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    b[i] = -b[i];
                }
            }
            SignedLatticePoint(b)
        })
        .collect()
}

/// `lambda(xi, j)`: number of coordinates of `xi` equal to `j`.
pub fn multiplicity_lambda(xi: &MultiIndex, j: u32) -> usize {
    xi.0.iter().filter(|&&v| v == j).count()
}

/// `Lambda_S(j)`: total number of occurrences of `j` over a set.
pub fn multiplicity_total<'a>(set: impl IntoIterator<Item = &'a MultiIndex>, j: u32) -> u64 {
    set.into_iter().map(|xi| multiplicity_lambda(xi, j) as u64).sum()
}

/// Binomial coefficient in 128-bit arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `N(m,p) = |{xi in N^m : |xi|_1 = p}|`, by the closed form
/// `(p-1)_{m-1} / (m-1)!`, with `N(0,p) = [p = 0]`.
pub fn count_positive_compositions(m: usize, p: usize) -> u64 {
    if m == 0 {
        return u64::from(p == 0);
    }
    if p < m {
        return 0;
    }
    let ff = falling_factorial_int(p as i64 - 1, (m - 1) as u32);
    let fact = falling_factorial_int(m as i64 - 1, (m - 1) as u32);
    (ff / fact) as u64
}

/// Falling factorial `(x)_m = x (x-1) ... (x-m+1)`, `(x)_0 = 1`.
pub fn falling_factorial(x: f64, m: u32) -> f64 {
    (0..m).map(|k| x - k as f64).product()
}

/// Integer falling factorial.
pub fn falling_factorial_int(x: i64, m: u32) -> i128 {
    (0..m as i64).map(|k| (x - k) as i128).product()
}

/// `L+(m,p)`: compositions of `p` into `m` positive parts, dictionary order.
pub fn positive_compositions(m: usize, p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if m == 0 {
        if p == 0 {
            out.push(MultiIndex(vec![]));
        }
        return out;
    }
    let lower = vec![1; m];
    for_each_bounded(m, p as u32, &lower, &mut |xi| {
        if xi.iter().sum::<u32>() as usize == p {
            out.push(MultiIndex(xi.to_vec()));
        }
    });
    out
}

/// `I+(m,p)`: points of `N^m` with `|xi|_1 <= p`, dictionary order.
pub fn positive_grid(m: usize, p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(MultiIndex(vec![]));
        return out;
    }
    let lower = vec![1; m];
    for_each_bounded(m, p as u32, &lower, &mut |xi| out.push(MultiIndex(xi.to_vec())));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn grid_n3_p2_has_the_ten_table_points() {
        let g = enumerate_grid(3, 2, 0).unwrap();
        let mut pts = g.points.clone();
        pts.sort();
        let want: Vec<MultiIndex> = [
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 2],
            [0, 1, 0],
            [0, 1, 1],
            [0, 2, 0],
            [1, 0, 0],
            [1, 0, 1],
            [1, 1, 0],
            [2, 0, 0],
        ]
        .iter()
        .map(|v| mi(v))
        .collect();
        assert_eq!(pts, want);
    }

    #[test]
    fn canonical_order_n3_p2() {
        let g = enumerate_grid(3, 2, 0).unwrap();
        let order: Vec<String> = g.points.iter().map(|p| p.to_string()).collect();
        assert_eq!(
            order,
            [
                "(0,0,0)", "(0,0,1)", "(0,0,2)", "(0,1,0)", "(0,2,0)", "(1,0,0)", "(2,0,0)",
                "(0,1,1)", "(1,0,1)", "(1,1,0)"
            ]
        );
        let ks: Vec<usize> = g.blocks.iter().map(|b| b.k).collect();
        assert_eq!(ks, [3, 2, 1]);
        assert_eq!(g.blocks[1].groups.len(), 3);
    }

    #[test]
    fn kappa_one_grid() {
        let g = enumerate_grid(3, 3, 1).unwrap();
        assert_eq!(g.len(), 10);
        assert!(g.points.iter().all(|p| p.0[0] >= 1));
        assert_eq!(g.points[0], mi(&[1, 0, 0]));
    }

    #[test]
    fn trivial_grid() {
        let g = enumerate_grid(1, 0, 0).unwrap();
        assert_eq!(g.points, vec![mi(&[0])]);
        assert_eq!(g.orbits[0], vec![SignedLatticePoint(vec![0])]);
    }

    #[test]
    fn grid_errors() {
        assert_eq!(enumerate_grid(0, 1, 0), Err(Error::InvalidDimension(0)));
        assert_eq!(enumerate_grid(2, 1, 3), Err(Error::KappaOutOfRange { n: 2, kappa: 3 }));
        assert_eq!(enumerate_grid(2, 13, 0), Err(Error::OrderTooLarge(13)));
        assert!(enumerate_grid(3, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn orbit_examples() {
        let o: Vec<String> = orbit(&mi(&[1, 1, 0])).iter().map(|b| b.to_string()).collect();
        assert_eq!(o, ["(1,1,0)", "(-1,1,0)", "(1,-1,0)", "(-1,-1,0)"]);
        assert_eq!(orbit(&mi(&[0, 0, 0])).len(), 1);
        let o: Vec<String> = orbit(&mi(&[2, 0, 0])).iter().map(|b| b.to_string()).collect();
        assert_eq!(o, ["(2,0,0)", "(-2,0,0)"]);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(multiplicity_lambda(&mi(&[0, 2, 0]), 0), 2);
        assert_eq!(multiplicity_lambda(&mi(&[1, 1, 1]), 1), 3);
        assert_eq!(multiplicity_lambda(&mi(&[3, 1, 2]), 5), 0);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(count_positive_compositions(2, 5), 4);
        assert_eq!(count_positive_compositions(3, 3), 1);
        assert_eq!(count_positive_compositions(3, 2), 0);
        assert_eq!(count_positive_compositions(0, 0), 1);
        assert_eq!(count_positive_compositions(0, 2), 0);
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5.0, 2), 20.0);
        assert_eq!(falling_factorial(3.0, 4), 0.0);
        let lhs: i128 = (2..=6).map(|j| falling_factorial_int(j, 2)).sum();
        assert_eq!(lhs, 70);
        assert_eq!(falling_factorial_int(7, 3) / 3, 70);
    }

    #[test]
    fn grid_json_round_trip() {
        let g = enumerate_grid(3, 2, 1).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with(r#"{"n":3,"p":2,"kappa":1,"points":[[1,0,0]"#));
        let back: CorrectionGrid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn signed_point_sign() {
        let b = SignedLatticePoint(vec![-1, 2, -3]);
        assert_eq!(b.sign(0), 1);
        assert_eq!(b.sign(1), -1);
        assert_eq!(b.sign(3), 1);
        assert_eq!(SignedLatticePoint(vec![0, 1]).sign(1), 0);
    }
}
