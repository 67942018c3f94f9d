//! Index geometry of the triangular lattice
//! `Delta = {(j1, j2) : j1, j2 >= 0, j1 + j2 <= N}`.
//!
//! For odd `N` the lattice splits into three regions:
//!
//! * `Delta0`  - the axis `j1 = 0` (N+1 points),
//! * `Delta'`  - `j1 >= 1`, `0 <= j2 <= (N-1)/2`,
//! * `Delta''` - `j1 >= 1`, `(N+1)/2 <= j2 <= N-1`.
//!
//! The affine reflection `T(j) = (N+1-j1, N-j2)` maps `Delta''` onto the
//! triangle with vertices `((N+3)/2, (N-1)/2)`, `(N, 1)`, `(N, (N-1)/2)`,
//! and the folding map (identity on `Delta'`, `T` on `Delta''`) is a
//! bijection onto the full rectangular grid
//! `{1..N} x {0..(N-1)/2}`, which is what turns the eta system into a
//! unitary two-dimensional DFT.
//!
//! Everything here indexes through one canonical order: row-major over
//! `Delta` with `j2` as the outer (slow) coordinate and `j1` inner. All
//! matrix layouts and file formats in the crate refer back to this order.

use crate::error::{Error, Result};

/// A valid polynomial degree for the three-variable construction:
/// odd, with derived quantities `D = (N+1)(N+2)/2` (the dimension of the
/// polynomial space) and `m = floor(log2 D)` (the Haar block level).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degree {
    n: u32,
}

impl Degree {
    /// Accepts odd `N >= 1`. The region decomposition and the basis
    /// builders additionally require `N >= 3`; they check that themselves.
    pub fn new(n: u32) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::EvenDegree(n));
        }
        if n < 1 {
            return Err(Error::DegreeTooSmall { n, min: 1 });
        }
        Ok(Degree { n })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `D = (N+1)(N+2)/2`, the number of lattice points of `Delta`.
    #[inline]
    pub fn dim(&self) -> usize {
        let n = self.n as usize;
        (n + 1) * (n + 2) / 2
    }

    /// Haar level `m` with `2^m <= D < 2^(m+1)`.
    #[inline]
    pub fn haar_level(&self) -> u32 {
        (usize::BITS - 1) - self.dim().leading_zeros()
    }

    /// `(N-1)/2`, the largest `j2` of `Delta'`.
    #[inline]
    pub fn half(&self) -> u32 {
        (self.n - 1) / 2
    }

    /// Number of points of `Delta' union Delta''`: `N(N+1)/2`.
    #[inline]
    pub fn x_dim(&self) -> usize {
        let n = self.n as usize;
        n * (n + 1) / 2
    }

    fn require_at_least_three(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::DegreeTooSmall { n: self.n, min: 3 });
        }
        Ok(())
    }
}

/// Lattice point `(j1, j2)`; the third exponent `j3 = N - j1 - j2` is
/// implied by the ambient degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub j1: u32,
    pub j2: u32,
}

impl MultiIndex {
    pub fn new(j1: u32, j2: u32) -> Self {
        MultiIndex { j1, j2 }
    }

    /// Is the point inside `Delta` for the given degree?
    #[inline]
    pub fn in_delta(&self, deg: Degree) -> bool {
        self.j1 + self.j2 <= deg.n()
    }

    /// The implied third exponent.
    #[inline]
    pub fn j3(&self, deg: Degree) -> u32 {
        deg.n() - self.j1 - self.j2
    }
}

/// The three cells of the partition of `Delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Delta0,
    DeltaPrime,
    DeltaDoublePrime,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionLabel::Delta0 => "Delta0",
            RegionLabel::DeltaPrime => "Delta'",
            RegionLabel::DeltaDoublePrime => "Delta''",
        };
        f.write_str(s)
    }
}

/// A point of the rectangular grid `{1..N} x {0..(N-1)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub g1: u32,
    pub g2: u32,
}

/// Classify a point of `Delta`. Errors if the point lies outside `Delta`.
pub fn classify(j: MultiIndex, deg: Degree) -> Result<RegionLabel> {
    deg.require_at_least_three()?;
    if !j.in_delta(deg) {
        return Err(Error::NotInRegion { j1: j.j1, j2: j.j2, region: "Delta" });
    }
    if j.j1 == 0 {
        Ok(RegionLabel::Delta0)
    } else if j.j2 <= deg.half() {
        Ok(RegionLabel::DeltaPrime)
    } else {
        Ok(RegionLabel::DeltaDoublePrime)
    }
}

/// All `D` points of `Delta` in canonical row-major order (`j2` outer,
/// `j1` inner, both ascending), each with its region label.
pub fn enumerate_regions(deg: Degree) -> Result<Vec<(MultiIndex, RegionLabel)>> {
    deg.require_at_least_three()?;
    let mut out = Vec::with_capacity(deg.dim());
    for j in delta_points(deg) {
        let label = classify(j, deg)?;
        out.push((j, label));
    }
    Ok(out)
}

/// Iterator over `Delta` in canonical order.
pub fn delta_points(deg: Degree) -> impl Iterator<Item = MultiIndex> {
    let n = deg.n();
    (0..=n).flat_map(move |j2| (0..=(n - j2)).map(move |j1| MultiIndex { j1, j2 }))
}

/// Position of `j` in the canonical order of `Delta` (closed form).
#[inline]
pub fn delta_position(deg: Degree, j: MultiIndex) -> usize {
    debug_assert!(j.in_delta(deg));
    let n = deg.n() as usize;
    let (j1, j2) = (j.j1 as usize, j.j2 as usize);
    // rows 0..j2 have lengths N+1, N, ...
    j2 * (n + 1) - (j2 * j2 - j2) / 2 + j1
}

/// Iterator over `Delta' union Delta''` in canonical order. Because the
/// region boundary is a `j2` threshold and the canonical order is
/// `j2`-outer, this automatically lists all of `Delta'` first.
pub fn x_points(deg: Degree) -> impl Iterator<Item = MultiIndex> {
    let n = deg.n();
    (0..=n).flat_map(move |j2| (1..=n.saturating_sub(j2)).map(move |j1| MultiIndex { j1, j2 }))
}

/// Position of `j` in the canonical order of `Delta' union Delta''`.
/// The `Delta0` points are exactly the first entry of each `j2` row, so the
/// restricted position drops `j2 + 1` axis points.
#[inline]
pub fn x_position(deg: Degree, j: MultiIndex) -> usize {
    debug_assert!(j.j1 >= 1);
    delta_position(deg, j) - (j.j2 as usize + 1)
}

/// The affine reflection `T(j) = (N+1-j1, N-j2)` on `Delta''`.
///
/// Its linear part is `-I`, and it sends the three vertices of `Delta''`
/// to `(N, (N-1)/2)`, `(N, 1)` and `((N+3)/2, (N-1)/2)`.
pub fn reflect(j: MultiIndex, deg: Degree) -> Result<GridPoint> {
    if classify(j, deg)? != RegionLabel::DeltaDoublePrime {
        return Err(Error::NotInRegion { j1: j.j1, j2: j.j2, region: "Delta''" });
    }
    Ok(GridPoint { g1: deg.n() + 1 - j.j1, g2: deg.n() - j.j2 })
}

/// Folding map onto the grid `{1..N} x {0..(N-1)/2}`: identity on
/// `Delta'`, the reflection `T` on `Delta''`. Bijective.
pub fn fold(k: MultiIndex, deg: Degree) -> Result<GridPoint> {
    match classify(k, deg)? {
        RegionLabel::DeltaPrime => Ok(GridPoint { g1: k.j1, g2: k.j2 }),
        RegionLabel::DeltaDoublePrime => reflect(k, deg),
        RegionLabel::Delta0 => {
            Err(Error::NotInRegion { j1: k.j1, j2: k.j2, region: "Delta' or Delta''" })
        }
    }
}

/// Inverse of [`fold`]: grid points with `g1 + g2 <= N` come from
/// `Delta'` unchanged, the rest unfold through `T` (an involution up to
/// the grid identification).
pub fn unfold(g: GridPoint, deg: Degree) -> MultiIndex {
    debug_assert!(g.g1 >= 1 && g.g1 <= deg.n() && g.g2 <= deg.half());
    if g.g1 + g.g2 <= deg.n() {
        MultiIndex { j1: g.g1, j2: g.g2 }
    } else {
        MultiIndex { j1: deg.n() + 1 - g.g1, j2: deg.n() - g.g2 }
    }
}

/// Tile shapes used by the localization analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileShape {
    /// `|k1 - c1| <= A sqrt(c1 + 1)` and `|k2 - c2| <= A sqrt(c2 + 1)`.
    AxisBox,
    /// `|k2 - c2| <= A sqrt(N)` and `|k1 + k2 - c1 - c2| <= A sqrt(N - c1 - c2 + 1)`,
    /// the shape that appears when the small exponent is the third one.
    SkewBox,
}

/// Lattice points of the inflated tile around `center`, clipped to
/// `Delta' union Delta''`, in canonical order.
pub fn make_tile(
    center: MultiIndex,
    deg: Degree,
    shape: TileShape,
    inflation: f64,
) -> Result<Vec<MultiIndex>> {
    deg.require_at_least_three()?;
    if !center.in_delta(deg) {
        return Err(Error::NotInRegion { j1: center.j1, j2: center.j2, region: "Delta" });
    }
    assert!(inflation > 0.0, "tile inflation must be positive");
    let n = deg.n() as f64;
    let (c1, c2) = (center.j1 as f64, center.j2 as f64);
    let keep = |k: MultiIndex| -> bool {
        let (k1, k2) = (k.j1 as f64, k.j2 as f64);
        match shape {
            TileShape::AxisBox => {
                (k1 - c1).abs() <= inflation * (c1 + 1.0).sqrt()
                    && (k2 - c2).abs() <= inflation * (c2 + 1.0).sqrt()
            }
            TileShape::SkewBox => {
                (k2 - c2).abs() <= inflation * n.sqrt()
                    && ((k1 + k2) - (c1 + c2)).abs() <= inflation * (n - c1 - c2 + 1.0).sqrt()
            }
        }
    };
    Ok(x_points(deg).filter(|&k| keep(k)).collect())
}

/// Membership test for the same tile, used where materializing the point
/// list would be wasteful.
pub fn tile_contains(
    center: MultiIndex,
    deg: Degree,
    shape: TileShape,
    inflation: f64,
    k: MultiIndex,
) -> bool {
    let n = deg.n() as f64;
    let (c1, c2) = (center.j1 as f64, center.j2 as f64);
    let (k1, k2) = (k.j1 as f64, k.j2 as f64);
    match shape {
        TileShape::AxisBox => {
            (k1 - c1).abs() <= inflation * (c1 + 1.0).sqrt()
                && (k2 - c2).abs() <= inflation * (c2 + 1.0).sqrt()
        }
        TileShape::SkewBox => {
            (k2 - c2).abs() <= inflation * n.sqrt()
                && ((k1 + k2) - (c1 + c2)).abs() <= inflation * (n - c1 - c2 + 1.0).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(n: u32) -> Degree {
        Degree::new(n).unwrap()
    }

    /// Independent oracle: enumerate the defining inequalities directly.
    fn count_regions_oracle(n: u32) -> (usize, usize, usize, usize) {
        let (mut total, mut d0, mut dp, mut dpp) = (0, 0, 0, 0);
        for j2 in 0..=n {
            for j1 in 0..=n {
                if j1 + j2 > n {
                    continue;
                }
                total += 1;
                if j1 == 0 {
                    d0 += 1;
                } else if j2 <= (n - 1) / 2 {
                    dp += 1;
                } else {
                    dpp += 1;
                }
            }
        }
        (total, d0, dp, dpp)
    }

    #[test]
    fn degree_invariants() {
        let d = deg(7);
        assert_eq!(d.dim(), 36);
        assert_eq!(d.haar_level(), 5);
        assert!(1usize << d.haar_level() <= d.dim());
        assert!(d.dim() < 1usize << (d.haar_level() + 1));
        assert!(d.n() + 1 <= 1 << d.haar_level());
        assert!(Degree::new(8).is_err());
        assert!(Degree::new(1).is_ok());
        assert!(enumerate_regions(deg(1)).is_err());
    }

    #[test]
    fn region_counts_match_oracle() {
        // Frozen from the enumeration oracle: N=7 gives 36 = 8 + 22 + 6.
        assert_eq!(count_regions_oracle(7), (36, 8, 22, 6));
        assert_eq!(count_regions_oracle(3), (10, 4, 5, 1));
        for n in (3..=301u32).step_by(2) {
            let d = deg(n);
            let regions = enumerate_regions(d).unwrap();
            let (total, d0, dp, dpp) = count_regions_oracle(n);
            assert_eq!(regions.len(), total);
            assert_eq!(total, d.dim());
            let c0 = regions.iter().filter(|(_, l)| *l == RegionLabel::Delta0).count();
            let cp = regions.iter().filter(|(_, l)| *l == RegionLabel::DeltaPrime).count();
            let cpp =
                regions.iter().filter(|(_, l)| *l == RegionLabel::DeltaDoublePrime).count();
            assert_eq!((c0, cp, cpp), (d0, dp, dpp));
            assert_eq!(c0, n as usize + 1);
            assert_eq!(cp + cpp, d.x_dim());
        }
    }

    #[test]
    fn classification_boundary_cases() {
        let d = deg(7);
        assert_eq!(classify(MultiIndex::new(0, 5), d).unwrap(), RegionLabel::Delta0);
        assert_eq!(classify(MultiIndex::new(1, 3), d).unwrap(), RegionLabel::DeltaPrime);
        assert_eq!(
            classify(MultiIndex::new(1, 4), d).unwrap(),
            RegionLabel::DeltaDoublePrime
        );
        assert!(classify(MultiIndex::new(4, 4), d).is_err());
    }

    #[test]
    fn reflect_vertex_images() {
        let d = deg(7);
        // the three vertices of Delta'' and their stated images
        assert_eq!(reflect(MultiIndex::new(1, 6), d).unwrap(), GridPoint { g1: 7, g2: 1 });
        assert_eq!(reflect(MultiIndex::new(1, 4), d).unwrap(), GridPoint { g1: 7, g2: 3 });
        assert_eq!(reflect(MultiIndex::new(3, 4), d).unwrap(), GridPoint { g1: 5, g2: 3 });
        assert!(reflect(MultiIndex::new(1, 3), d).is_err());
    }

    #[test]
    fn reflect_has_linear_part_minus_identity() {
        let d = deg(11);
        let pts: Vec<MultiIndex> = x_points(d)
            .filter(|&j| classify(j, d).unwrap() == RegionLabel::DeltaDoublePrime)
            .collect();
        for &a in &pts {
            for &b in &pts {
                let ta = reflect(a, d).unwrap();
                let tb = reflect(b, d).unwrap();
                assert_eq!(
                    ta.g1 as i64 - tb.g1 as i64,
                    -(a.j1 as i64 - b.j1 as i64)
                );
                assert_eq!(
                    ta.g2 as i64 - tb.g2 as i64,
                    -(a.j2 as i64 - b.j2 as i64)
                );
            }
        }
    }

    #[test]
    fn fold_is_bijective() {
        for n in (3..=101u32).step_by(2) {
            let d = deg(n);
            let grid_len = (n as usize) * ((n as usize + 1) / 2);
            let mut seen = vec![false; grid_len];
            let mut count = 0;
            for k in x_points(d) {
                let g = fold(k, d).unwrap();
                assert!(g.g1 >= 1 && g.g1 <= n && g.g2 <= d.half());
                let pos = (g.g2 as usize) * n as usize + (g.g1 as usize - 1);
                assert!(!seen[pos], "fold hit a grid point twice at N={n}");
                seen[pos] = true;
                assert_eq!(unfold(g, d), k);
                count += 1;
            }
            assert_eq!(count, grid_len);
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn fold_examples() {
        let d = deg(7);
        assert_eq!(fold(MultiIndex::new(2, 1), d).unwrap(), GridPoint { g1: 2, g2: 1 });
        assert_eq!(fold(MultiIndex::new(2, 5), d).unwrap(), GridPoint { g1: 6, g2: 2 });
        assert!(fold(MultiIndex::new(0, 3), d).is_err());
    }

    #[test]
    fn canonical_positions_are_consistent() {
        let d = deg(9);
        for (pos, j) in delta_points(d).enumerate() {
            assert_eq!(delta_position(d, j), pos);
        }
        for (pos, j) in x_points(d).enumerate() {
            assert_eq!(x_position(d, j), pos);
        }
        // Delta'-before-Delta'' ordering comes for free from row-major
        let labels: Vec<RegionLabel> =
            x_points(d).map(|j| classify(j, d).unwrap()).collect();
        let first_dpp = labels.iter().position(|&l| l == RegionLabel::DeltaDoublePrime).unwrap();
        assert!(labels[..first_dpp].iter().all(|&l| l == RegionLabel::DeltaPrime));
        assert!(labels[first_dpp..].iter().all(|&l| l == RegionLabel::DeltaDoublePrime));
    }

    #[test]
    fn axis_tile_enumeration() {
        let d = deg(7);
        let tile = make_tile(MultiIndex::new(3, 2), d, TileShape::AxisBox, 1.0).unwrap();
        // oracle: |k1-3| <= 2, |k2-2| <= sqrt(3) inside Delta' union Delta''
        let oracle: Vec<MultiIndex> = x_points(d)
            .filter(|k| {
                (k.j1 as f64 - 3.0).abs() <= 2.0 && (k.j2 as f64 - 2.0).abs() <= 3f64.sqrt()
            })
            .collect();
        assert_eq!(tile, oracle);
        assert!(!oracle.is_empty());
    }

    #[test]
    fn degenerate_inflation_keeps_center_only() {
        let d = deg(9);
        let c = MultiIndex::new(3, 2);
        let tile = make_tile(c, d, TileShape::AxisBox, 1e-9).unwrap();
        assert_eq!(tile, vec![c]);
    }

    #[test]
    fn skew_tile_enumeration() {
        let d = deg(31);
        let c = MultiIndex::new(15, 15);
        let tile = make_tile(c, d, TileShape::SkewBox, 1.0).unwrap();
        let n = 31f64;
        let oracle: Vec<MultiIndex> = x_points(d)
            .filter(|k| {
                (k.j2 as f64 - 15.0).abs() <= n.sqrt()
                    && ((k.j1 + k.j2) as f64 - 30.0).abs() <= (n - 30.0 + 1.0).sqrt()
            })
            .collect();
        assert_eq!(tile, oracle);
        assert!(!tile.is_empty());
    }

    #[test]
    fn tile_monotone_in_inflation() {
        let d = deg(15);
        let c = MultiIndex::new(5, 4);
        for shape in [TileShape::AxisBox, TileShape::SkewBox] {
            let mut prev: Vec<MultiIndex> = Vec::new();
            for a in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let t = make_tile(c, d, shape, a).unwrap();
                assert!(prev.iter().all(|p| t.contains(p)));
                prev = t;
            }
        }
    }
}
