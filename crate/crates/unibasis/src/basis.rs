//! Construction of the orthonormal systems and their assembly into the
//! final basis of `P_N` on the C^3 sphere.
//!
//! * `phi` (d = 2): a DFT of the normalized monomials with Rudin-Shapiro
//!   signs; the classical flat basis of `P_N` on the C^2 sphere.
//! * `psi`: the same system transplanted onto `Y = span{e_(0,j)}`.
//! * `eta`: on `X = span{e_k : k in Delta' u Delta''}`, a two-dimensional
//!   DFT through the folding map with the quadratic-phase sequence as a
//!   unimodular diagonal.
//! * `assemble`: Olevskii absorption. A block-orthogonal matrix (Haar on
//!   the first `2^m` indices, identity above) mixes the psi block, whose
//!   sup norms grow like `sqrt(N)`, across the whole stacked system,
//!   leaving every resulting row uniformly bounded.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{delta_position, fold, x_points, Degree, GridPoint, MultiIndex};
use crate::monomial::{gram_deviation, CoefficientVector, Dim};
use crate::scalar::{r, unit_phase, Real};
use crate::sequences::{quadratic_phase, rudin_shapiro};

/// The discrete Haar system on `{0, ..., 2^m - 1}` as an orthogonal
/// matrix: column `l` is the `l`-th Haar function evaluated at the row
/// position. Column 0 is the constant `2^(-m/2)`; column `l` with
/// `2^(s-1) <= l < 2^s` is the step function at level `s`, supports
/// ordered left to right within a level.
#[derive(Debug, Clone, Copy)]
pub struct HaarMatrix {
    m: u32,
}

/// Build the level-`m` Haar matrix descriptor (`m >= 1`).
pub fn haar(m: u32) -> HaarMatrix {
    assert!(m >= 1, "Haar level must be at least 1");
    HaarMatrix { m }
}

impl HaarMatrix {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        1usize << self.m
    }

    /// Entry at row `k`, column `l`.
    pub fn entry<T: Real>(&self, k: usize, l: usize) -> T {
        debug_assert!(k < self.size() && l < self.size());
        if l == 0 {
            return r::<T>(0.5f64.powi(self.m as i32).sqrt());
        }
        let s = l.ilog2() + 1; // level, 1..=m
        let p = l - (1usize << (s - 1)); // position within the level
        let q = self.m - s + 1; // log2 of the support length
        if (k >> q) != p {
            return T::zero();
        }
        let amp = 0.5f64.powi(q as i32).sqrt();
        if (k >> (q - 1)) & 1 == 0 {
            r::<T>(amp)
        } else {
            r::<T>(-amp)
        }
    }

    /// The nonzero columns of row `k`: one entry per level plus the
    /// constant, `m + 1` in total.
    pub fn sparse_row(&self, k: usize) -> Vec<(usize, f64)> {
        debug_assert!(k < self.size());
        let mut row = Vec::with_capacity(self.m as usize + 1);
        row.push((0, 0.5f64.powi(self.m as i32).sqrt()));
        for s in 1..=self.m {
            let q = self.m - s + 1;
            let p = k >> q;
            let l = (1usize << (s - 1)) + p;
            let amp = 0.5f64.powi(q as i32).sqrt();
            let sign = if (k >> (q - 1)) & 1 == 0 { amp } else { -amp };
            row.push((l, sign));
        }
        row
    }

    pub fn dense<T: Real>(&self) -> Vec<Vec<T>> {
        (0..self.size())
            .map(|k| (0..self.size()).map(|l| self.entry(k, l)).collect())
            .collect()
    }
}

/// The `D x D` absorption matrix: Haar block on `[0, 2^m)`, identity on
/// `[2^m, D)`, zero off-block.
#[derive(Debug, Clone, Copy)]
pub struct AbsorptionMatrix {
    d: usize,
    haar: HaarMatrix,
}

/// Build the absorption matrix for a degree. Fails when the psi block
/// does not fit inside the Haar block, i.e. `N + 1 > 2^m`.
pub fn absorption(deg: Degree) -> Result<AbsorptionMatrix> {
    let m = deg.haar_level();
    if (deg.n() + 1) as usize > (1usize << m) {
        return Err(Error::AbsorptionBlock { n_plus_1: deg.n() + 1, block: 1usize << m });
    }
    Ok(AbsorptionMatrix { d: deg.dim(), haar: haar(m) })
}

impl AbsorptionMatrix {
    pub fn size(&self) -> usize {
        self.d
    }

    pub fn haar_block(&self) -> HaarMatrix {
        self.haar
    }

    pub fn entry<T: Real>(&self, k: usize, l: usize) -> T {
        debug_assert!(k < self.d && l < self.d);
        let block = self.haar.size();
        if k < block && l < block {
            self.haar.entry(k, l)
        } else if k == l {
            T::one()
        } else {
            T::zero()
        }
    }

    /// Nonzero entries of row `k`.
    pub fn sparse_row(&self, k: usize) -> Vec<(usize, f64)> {
        if k < self.haar.size() {
            self.haar.sparse_row(k)
        } else {
            vec![(k, 1.0)]
        }
    }
}

/// Which construction a basis matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockTag {
    Phi2,
    Psi,
    Eta,
    Assembled,
}

impl BlockTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockTag::Phi2 => "phi2",
            BlockTag::Psi => "psi",
            BlockTag::Eta => "eta",
            BlockTag::Assembled => "assembled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "phi2" => Some(BlockTag::Phi2),
            "psi" => Some(BlockTag::Psi),
            "eta" => Some(BlockTag::Eta),
            "assembled" => Some(BlockTag::Assembled),
            _ => None,
        }
    }
}

/// An ordered orthonormal family of coefficient vectors.
#[derive(Debug, Clone)]
pub struct BasisMatrix<T> {
    dim: Dim,
    n: u32,
    block: BlockTag,
    rows: Vec<CoefficientVector<T>>,
}

impl<T: Real> BasisMatrix<T> {
    pub fn new(dim: Dim, n: u32, block: BlockTag, rows: Vec<CoefficientVector<T>>) -> Self {
        BasisMatrix { dim, n, block, rows }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn block(&self) -> BlockTag {
        self.block
    }

    pub fn rows(&self) -> &[CoefficientVector<T>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<CoefficientVector<T>> {
        self.rows
    }

    /// Max entrywise deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> T {
        gram_deviation(&self.rows)
    }
}

/// Twiddle table `e(a / modulus)` for exact integer phase arithmetic.
fn twiddles<T: Real>(modulus: u32) -> Vec<Complex<T>> {
    (0..modulus).map(|a| unit_phase(r::<T>(a as f64 / modulus as f64))).collect()
}

/// The flat d = 2 system: `phi_k = (N+1)^(-1/2) sum_j sigma_j e(jk/(N+1)) e_j`
/// for `k = 0..=N`. Any degree `N >= 1`.
pub fn build_phi2<T: Real>(n: u32) -> Result<BasisMatrix<T>> {
    if n < 1 {
        return Err(Error::DegreeTooSmall { n, min: 1 });
    }
    let tw = twiddles::<T>(n + 1);
    let scale = r::<T>(1.0 / f64::sqrt(n as f64 + 1.0));
    let rows = (0..=n)
        .map(|k| {
            let coeffs = (0..=n)
                .map(|j| {
                    let sign = r::<T>(rudin_shapiro(j as u64) as f64);
                    tw[((j as u64 * k as u64) % (n as u64 + 1)) as usize] * sign * scale
                })
                .collect();
            CoefficientVector::new(Dim::Two, n, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisMatrix::new(Dim::Two, n, BlockTag::Phi2, rows))
}

/// One psi row as a full-width coefficient vector over `Delta`.
fn psi_row<T: Real>(deg: Degree, k: u32, tw: &[Complex<T>]) -> CoefficientVector<T> {
    let n = deg.n();
    let scale = r::<T>(1.0 / f64::sqrt(n as f64 + 1.0));
    let mut row = CoefficientVector::zeros(Dim::Three, n);
    for j2 in 0..=n {
        let sign = r::<T>(rudin_shapiro(j2 as u64) as f64);
        let pos = delta_position(deg, MultiIndex::new(0, j2));
        row.coeffs_mut()[pos] = tw[((j2 as u64 * k as u64) % (n as u64 + 1)) as usize] * sign * scale;
    }
    row
}

/// The psi system spanning `Y`: `N + 1` orthonormal rows supported on
/// `Delta0`. On the slice `zeta_1 = 0` it coincides with
/// `sqrt(N/2 + 1) phi_k(zeta_2, zeta_3)`.
pub fn build_psi<T: Real>(deg: Degree) -> Result<BasisMatrix<T>> {
    if deg.n() < 3 {
        return Err(Error::DegreeTooSmall { n: deg.n(), min: 3 });
    }
    let tw = twiddles::<T>(deg.n() + 1);
    let rows = (0..=deg.n()).map(|k| psi_row(deg, k, &tw)).collect();
    Ok(BasisMatrix::new(Dim::Three, deg.n(), BlockTag::Psi, rows))
}

/// Degree-level tables shared by the eta rows.
struct EtaTables<T> {
    /// fold images of the canonical `Delta' u Delta''` points
    folds: Vec<GridPoint>,
    /// positions of those points inside the full canonical `Delta` order
    delta_pos: Vec<usize>,
    /// quadratic-phase weights `u_k`
    weights: Vec<Complex<T>>,
    tw1: Vec<Complex<T>>,
    tw2: Vec<Complex<T>>,
    scale: T,
}

impl<T: Real> EtaTables<T> {
    fn new(deg: Degree) -> Self {
        let n = deg.n();
        let half = (n + 1) / 2;
        let pts: Vec<MultiIndex> = x_points(deg).collect();
        let folds = pts.iter().map(|&k| fold(k, deg).expect("x point folds")).collect();
        let delta_pos = pts.iter().map(|&k| delta_position(deg, k)).collect();
        let weights = pts
            .iter()
            .map(|&k| quadratic_phase::<T>(k.j1 as i64, k.j2 as i64))
            .collect();
        EtaTables {
            folds,
            delta_pos,
            weights,
            tw1: twiddles(n),
            tw2: twiddles(half),
            scale: r::<T>(1.0 / f64::sqrt(n as f64 * half as f64)),
        }
    }
}

/// One eta row, indexed by the canonical position of `j` in
/// `Delta' u Delta''`. The coefficient of `e_k` is
/// `u_k e( fold(j).1 fold(k).1 / N + fold(j).2 fold(k).2 / ((N+1)/2) )`
/// over `sqrt(N (N+1) / 2)`.
fn eta_row<T: Real>(deg: Degree, tables: &EtaTables<T>, j_idx: usize) -> CoefficientVector<T> {
    let n = deg.n() as u64;
    let half = (n + 1) / 2;
    let gj = tables.folds[j_idx];
    let mut row = CoefficientVector::zeros(Dim::Three, deg.n());
    let coeffs = row.coeffs_mut();
    for ((gk, &pos), u) in tables.folds.iter().zip(&tables.delta_pos).zip(&tables.weights) {
        let a = (gj.g1 as u64 * gk.g1 as u64) % n;
        let b = (gj.g2 as u64 * gk.g2 as u64) % half;
        coeffs[pos] = u * tables.tw1[a as usize] * tables.tw2[b as usize] * tables.scale;
    }
    row
}

/// The eta system spanning `X`: `N(N+1)/2` orthonormal rows, one per
/// point of `Delta' u Delta''` in canonical order. Orthonormality is a
/// folded two-dimensional DFT identity; the unimodular weights drop out
/// of every Gram entry.
pub fn build_eta<T: Real>(deg: Degree) -> Result<BasisMatrix<T>> {
    if deg.n() < 3 {
        return Err(Error::DegreeTooSmall { n: deg.n(), min: 3 });
    }
    let tables = EtaTables::new(deg);
    let rows: Vec<CoefficientVector<T>> = (0..deg.x_dim())
        .into_par_iter()
        .map(|j_idx| eta_row(deg, &tables, j_idx))
        .collect();
    Ok(BasisMatrix::new(Dim::Three, deg.n(), BlockTag::Eta, rows))
}

/// The stacked system `h = (psi_0, ..., psi_N, eta rows)` feeding the
/// absorption step.
fn h_row<T: Real>(
    deg: Degree,
    psi_tw: &[Complex<T>],
    eta_tables: &EtaTables<T>,
    l: usize,
) -> CoefficientVector<T> {
    let n = deg.n() as usize;
    if l <= n {
        psi_row(deg, l as u32, psi_tw)
    } else {
        eta_row(deg, eta_tables, l - n - 1)
    }
}

/// The final basis `g_k = sum_l A_(k,l) h_l` for `k = 0..D-1`.
///
/// Rows of the absorption matrix are sparse (`m + 1` entries inside the
/// Haar block, a single entry above it), so the stacked system is
/// regenerated on the fly instead of being materialized; at degree 127
/// this halves the peak memory, which is dominated by the output.
pub fn assemble<T: Real>(deg: Degree) -> Result<BasisMatrix<T>> {
    if deg.n() < 3 {
        return Err(Error::DegreeTooSmall { n: deg.n(), min: 3 });
    }
    let a = absorption(deg)?;
    let psi_tw = twiddles::<T>(deg.n() + 1);
    let eta_tables = EtaTables::<T>::new(deg);
    let d = deg.dim();
    let rows: Vec<CoefficientVector<T>> = (0..d)
        .into_par_iter()
        .map(|k| {
            let mut acc = CoefficientVector::<T>::zeros(Dim::Three, deg.n());
            for (l, w) in a.sparse_row(k) {
                let h = h_row(deg, &psi_tw, &eta_tables, l);
                let wt = r::<T>(w);
                for (dst, src) in acc.coeffs_mut().iter_mut().zip(h.coeffs()) {
                    *dst += src * wt;
                }
            }
            acc
        })
        .collect();
    Ok(BasisMatrix::new(Dim::Three, deg.n(), BlockTag::Assembled, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify, delta_points, RegionLabel};
    use crate::monomial::{eval_vector, inner_product, SpherePoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn deg(n: u32) -> Degree {
        Degree::new(n).unwrap()
    }

    #[test]
    fn haar_level_one_matrix() {
        let h = haar(1);
        let dense = h.dense::<f64>();
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(dense, vec![vec![s, s], vec![s, -s]]);
    }

    #[test]
    fn haar_level_two_third_column() {
        // H(e_3): support {2, 3}, values +-1/sqrt(2)
        let h = haar(2);
        let col: Vec<f64> = (0..4).map(|k| h.entry(k, 3)).collect();
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(col, vec![0.0, 0.0, s, -s]);
    }

    #[test]
    fn haar_is_orthogonal() {
        for m in 1..=6 {
            let h = haar(m);
            let dense = h.dense::<f64>();
            let size = h.size();
            for i in 0..size {
                for j in 0..size {
                    let dot: f64 = (0..size).map(|k| dense[i][k] * dense[j][k]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (dot - target).abs() < 1e-14,
                        "m={m} rows {i},{j}: {dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn haar_sparse_row_matches_entries() {
        for m in 1..=5 {
            let h = haar(m);
            for k in 0..h.size() {
                let mut dense_row: Vec<f64> = (0..h.size()).map(|l| h.entry(k, l)).collect();
                for (l, v) in h.sparse_row(k) {
                    assert_eq!(dense_row[l], v);
                    dense_row[l] = 0.0;
                }
                assert!(dense_row.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn absorption_block_structure() {
        let a = absorption(deg(7)).unwrap();
        assert_eq!(a.size(), 36);
        assert_eq!(a.haar_block().m(), 5);
        // rows at and above 2^m are unit coordinate rows
        for k in 32..36 {
            assert_eq!(a.sparse_row(k), vec![(k, 1.0)]);
        }
        // orthogonality of the dense matrix
        let size = a.size();
        for i in 0..size {
            for j in 0..size {
                let dot: f64 = (0..size).map(|k| a.entry::<f64>(i, k) * a.entry::<f64>(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn absorption_row_sums_over_psi_block() {
        // sum over the first N+1 columns of |row| is O(sqrt(N+1) / 2^(m/2)),
        // the arithmetic behind the absorption estimate
        for n in [3u32, 7, 15, 31, 63, 127, 301] {
            let d = deg(n);
            let a = absorption(d).unwrap();
            let bound = 4.0 * ((n as f64 + 1.0).sqrt()) / 2f64.powf(d.haar_level() as f64 / 2.0);
            for k in 0..a.haar_block().size() {
                let sum: f64 = a
                    .sparse_row(k)
                    .into_iter()
                    .filter(|&(l, _)| l <= n as usize)
                    .map(|(_, v)| v.abs())
                    .sum();
                assert!(sum <= bound, "N={n}, k={k}: {sum} > {bound}");
            }
        }
    }

    #[test]
    fn phi2_two_point_system() {
        let b = build_phi2::<f64>(1).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let rows = b.rows();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].coeffs()[0].re - s).abs() < 1e-15);
        assert!((rows[0].coeffs()[1].re - s).abs() < 1e-15);
        assert!((rows[1].coeffs()[1].re + s).abs() < 1e-15);
        assert!(b.gram_deviation() < 1e-15);
    }

    #[test]
    fn phi2_unimodular_coefficients_and_gram() {
        let n = 15u32;
        let b = build_phi2::<f64>(n).unwrap();
        let expect = 1.0 / (n as f64 + 1.0).sqrt();
        for row in b.rows() {
            for c in row.coeffs() {
                assert!((c.norm() - expect).abs() < 1e-14);
            }
        }
        assert!(b.gram_deviation() < 1e-12);
    }

    #[test]
    fn psi_supported_on_axis_and_orthonormal() {
        let d = deg(31);
        let b = build_psi::<f64>(d).unwrap();
        assert_eq!(b.rows().len(), 32);
        for row in b.rows() {
            for (j, c) in delta_points(d).zip(row.coeffs()) {
                if j.j1 != 0 {
                    assert_eq!(c.norm(), 0.0);
                }
            }
        }
        assert!(b.gram_deviation() < 1e-12);
    }

    #[test]
    fn psi_restricts_to_scaled_phi() {
        // psi_k(0, z2, z3) = sqrt(N/2 + 1) phi_k(z2, z3)
        let n = 15u32;
        let d = deg(n);
        let psi = build_psi::<f64>(d).unwrap();
        let phi = build_phi2::<f64>(n).unwrap();
        let factor = (n as f64 / 2.0 + 1.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let t: f64 = rng.gen();
            let th2: f64 = rng.gen();
            let th3: f64 = rng.gen();
            let zeta3 = SpherePoint::new(0.0, t, [rng.gen(), th2, th3]).unwrap();
            let zeta2 = SpherePoint::two_dim(t, th2, th3).unwrap();
            for k in 0..=n as usize {
                let lhs = eval_vector(&psi.rows()[k], &zeta3);
                let rhs = eval_vector(&phi.rows()[k], &zeta2) * factor;
                assert!(
                    (lhs - rhs).norm() < 1e-10,
                    "k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn eta_coefficients_unimodular_and_axis_free() {
        let d = deg(7);
        let b = build_eta::<f64>(d).unwrap();
        assert_eq!(b.rows().len(), 28);
        let expect = 1.0 / (7.0 * 8.0 / 2.0f64).sqrt();
        for row in b.rows() {
            for (j, c) in delta_points(d).zip(row.coeffs()) {
                if j.j1 == 0 {
                    assert_eq!(c.norm(), 0.0);
                } else {
                    assert!((c.norm() - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn eta_gram_small_and_cross_region() {
        let d = deg(15);
        let b = build_eta::<f64>(d).unwrap();
        assert_eq!(b.rows().len(), 120);
        assert!(b.gram_deviation() < 1e-11);

        // an explicit cross-region pair with different fold images
        let pts: Vec<MultiIndex> = x_points(d).collect();
        let jp = pts
            .iter()
            .position(|&j| classify(j, d).unwrap() == RegionLabel::DeltaPrime)
            .unwrap();
        let jpp = pts
            .iter()
            .position(|&j| classify(j, d).unwrap() == RegionLabel::DeltaDoublePrime)
            .unwrap();
        assert_ne!(fold(pts[jp], d).unwrap(), fold(pts[jpp], d).unwrap());
        let ip = inner_product(&b.rows()[jp], &b.rows()[jpp]).unwrap();
        assert!(ip.norm() < 1e-12);
    }

    #[test]
    fn psi_and_eta_have_disjoint_supports() {
        let d = deg(7);
        let psi = build_psi::<f64>(d).unwrap();
        let eta = build_eta::<f64>(d).unwrap();
        for p in psi.rows().iter().take(3) {
            for e in eta.rows().iter().take(5) {
                let ip = inner_product(p, e).unwrap();
                assert_eq!(ip, Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn assemble_small_degree() {
        let d = deg(7);
        let g = assemble::<f64>(d).unwrap();
        assert_eq!(g.rows().len(), 36);
        assert_eq!(g.block(), BlockTag::Assembled);
        let dev = g.gram_deviation();
        assert!(dev < 1e-11, "gram deviation {dev}");
        for row in g.rows() {
            assert!((row.norm_sq() - 1.0).abs() < 1e-12);
        }
        // Gershgorin: all singular values within 1e-9 of 1, so the system
        // spans all of P_N
        assert!(dev * 36.0 < 2e-9);
    }

    #[test]
    fn assemble_identity_block_passes_rows_through() {
        let d = deg(7);
        let g = assemble::<f64>(d).unwrap();
        let eta = build_eta::<f64>(d).unwrap();
        // k >= 2^m = 32: g_k = h_k = eta row (k - N - 1)
        for k in 32..36 {
            let expect = &eta.rows()[k - 8];
            let got = &g.rows()[k];
            let diff: f64 = got
                .coeffs()
                .iter()
                .zip(expect.coeffs())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn assemble_rejects_degree_one() {
        assert!(assemble::<f64>(deg(1)).is_err());
    }

    #[test]
    fn generic_scalar_smoke_f32() {
        let b = build_phi2::<f32>(7).unwrap();
        assert!(b.gram_deviation() < 1e-5);
        let g = assemble::<f32>(deg(3)).unwrap();
        assert!(g.gram_deviation() < 1e-5);
    }
}
