//! Sup-norm estimation over the sphere and tile localization.
//!
//! A homogeneous `f` satisfies `|f(e(phi) zeta)| = |f(zeta)|`, so the
//! third phase can be fixed to zero. At fixed moduli `(t1, t2)` the
//! restriction of `f` to the remaining torus is a trigonometric
//! polynomial with frequencies inside `[0, N]^2`, whose modulus is read
//! off an oversampled grid with one FFT. Scanning a triangular grid of
//! the moduli simplex (with explicit near-vertex points) and refining
//! around the best cell yields a certified lower bound for the sup norm
//! together with a heuristic upper bound (grid max times an oversampling
//! slack).
//!
//! The monomial mass `|e_k(zeta)|^2` concentrates on a tile of side
//! `~ sqrt(t N)` around `k = (t1 N, t2 N)`; [`localization`] measures the
//! mass escaping an inflated tile, and the torus evaluator exploits the
//! same concentration by cropping coefficient arrays to their effective
//! bounding box before the FFT.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::basis::BasisMatrix;
use crate::geometry::{delta_points, tile_contains, Degree, MultiIndex, TileShape};
use crate::monomial::{amplitudes2, amplitudes3, CoefficientVector, Dim, NormTable, SpherePoint};
use crate::scalar::{golden_max, r, unit_phase, Real};

/// Relative threshold below which weighted coefficients are dropped when
/// cropping to the effective bounding box. The discarded mass is at most
/// `D * threshold` relative to the max, far below grid accuracy.
const CROP_REL: f64 = 1e-7;

/// Heuristic upper-bound slack for a 4x oversampled grid.
const UPPER_SLACK: f64 = 1.05;

/// Grid and refinement parameters for [`sup_norm`] and [`scan_basis`].
#[derive(Debug, Clone, Copy)]
pub struct SupNormOpts {
    /// Side of the triangular moduli grid (>= 8).
    pub moduli_grid: u32,
    /// Moduli refinement levels (grid halving around the best cell).
    pub refine_levels: u32,
    /// Torus oversampling factor (>= 4).
    pub oversample: u32,
}

impl Default for SupNormOpts {
    fn default() -> Self {
        SupNormOpts { moduli_grid: 64, refine_levels: 2, oversample: 4 }
    }
}

impl SupNormOpts {
    /// Defaults for whole-basis scans, sized so that a full degree sweep
    /// stays within a desktop time budget: the moduli grid shrinks as the
    /// row count grows while refinement compensates locally.
    pub fn default_for_scan(n: u32) -> Self {
        let moduli_grid = match n {
            0..=15 => 24,
            16..=31 => 20,
            32..=63 => 16,
            _ => 12,
        };
        SupNormOpts { moduli_grid, refine_levels: 3, oversample: 4 }
    }
}

/// Result of one torus maximization.
#[derive(Debug, Clone, Copy)]
pub struct TorusMax<T> {
    pub value: T,
    pub theta1: T,
    pub theta2: T,
}

/// Sup-norm estimate for one polynomial.
#[derive(Debug, Clone, Copy)]
pub struct SupNormEstimate<T> {
    /// Certified lower bound: `|f|` evaluated at `argmax`.
    pub lower_bound: T,
    /// Grid maximum times the oversampling slack; heuristic only.
    pub heuristic_upper: T,
    /// Point achieving `lower_bound`.
    pub argmax: SpherePoint<T>,
    pub opts: SupNormOpts,
}

/// FFT-friendly length: the next `2^a` or `3 * 2^a` at least `min`.
fn fft_len(min: usize) -> usize {
    let min = min.max(8);
    let p2 = min.next_power_of_two();
    let mut p3 = 3usize;
    while p3 < min {
        p3 <<= 1;
    }
    p2.min(p3)
}

/// Peak of `|sum_i b_i e(i theta)|` over the circle via one oversampled
/// FFT plus optional golden-section polish. Returns `(value, theta)`.
fn peak_1d<T: Real>(
    planner: &mut FftPlanner<T>,
    b: &[Complex<T>],
    oversample: u32,
    refine: bool,
) -> (T, T) {
    let len = fft_len(b.len() * oversample as usize);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    for (dst, src) in buf.iter_mut().zip(b) {
        *dst = src.conj();
    }
    planner.plan_fft_forward(len).process(&mut buf);
    let mut best = T::zero();
    let mut best_p = 0usize;
    for (p, v) in buf.iter().enumerate() {
        let m = v.norm_sqr();
        if m > best {
            best = m;
            best_p = p;
        }
    }
    let best = best.sqrt();
    let theta = r::<T>(best_p as f64 / len as f64);
    if !refine {
        return (best, theta);
    }
    let eval = |th: T| -> T {
        let step = unit_phase::<T>(th);
        let mut rot = Complex::new(T::one(), T::zero());
        let mut acc = Complex::new(T::zero(), T::zero());
        for &c in b {
            acc += c * rot;
            rot *= step;
        }
        acc.norm()
    };
    let w = r::<T>(1.0 / len as f64);
    let (th, v) = golden_max(theta - w, theta + w, 30, eval);
    if v > best {
        (v, th)
    } else {
        (best, theta)
    }
}

/// Dense 2-D peak: `|sum b[q][p] e(p theta1 + q theta2)|` over the torus.
/// `b` is row-major with `w1` columns (frequency 1) and `w2` rows.
fn peak_2d<T: Real>(
    planner: &mut FftPlanner<T>,
    b: &[Complex<T>],
    w1: usize,
    w2: usize,
    oversample: u32,
    refine: bool,
) -> (T, T, T) {
    let l1 = fft_len(w1 * oversample as usize);
    let l2 = fft_len(w2 * oversample as usize);
    // rows: length l1, one per kappa2
    let mut grid = vec![Complex::new(T::zero(), T::zero()); l1 * l2];
    for q in 0..w2 {
        for p in 0..w1 {
            grid[q * l1 + p] = b[q * w1 + p].conj();
        }
    }
    let fft1 = planner.plan_fft_forward(l1);
    for row in grid.chunks_exact_mut(l1) {
        fft1.process(row);
    }
    // columns via transpose
    let mut tr = vec![Complex::new(T::zero(), T::zero()); l1 * l2];
    for q in 0..l2 {
        for p in 0..l1 {
            tr[p * l2 + q] = grid[q * l1 + p];
        }
    }
    let fft2 = planner.plan_fft_forward(l2);
    for col in tr.chunks_exact_mut(l2) {
        fft2.process(col);
    }
    let mut best = T::zero();
    let mut best_pq = (0usize, 0usize);
    for p in 0..l1 {
        for q in 0..l2 {
            let m = tr[p * l2 + q].norm_sqr();
            if m > best {
                best = m;
                best_pq = (p, q);
            }
        }
    }
    let best = best.sqrt();
    let mut th1 = r::<T>(best_pq.0 as f64 / l1 as f64);
    let mut th2 = r::<T>(best_pq.1 as f64 / l2 as f64);
    if !refine {
        return (best, th1, th2);
    }

    // one golden-section pass per phase, evaluating the cropped sum
    let eval = |a: T, bb: T| -> T {
        let mut phase1 = Vec::with_capacity(w1);
        let step1 = unit_phase::<T>(a);
        let mut rot = Complex::new(T::one(), T::zero());
        for _ in 0..w1 {
            phase1.push(rot);
            rot *= step1;
        }
        let step2 = unit_phase::<T>(bb);
        let mut rot2 = Complex::new(T::one(), T::zero());
        let mut acc = Complex::new(T::zero(), T::zero());
        for q in 0..w2 {
            let mut row = Complex::new(T::zero(), T::zero());
            for p in 0..w1 {
                row += b[q * w1 + p] * phase1[p];
            }
            acc += row * rot2;
            rot2 *= step2;
        }
        acc.norm()
    };
    let mut value = best;
    let w1s = r::<T>(1.0 / l1 as f64);
    let w2s = r::<T>(1.0 / l2 as f64);
    for _ in 0..2 {
        let (a, v) = golden_max(th1 - w1s, th1 + w1s, 24, |x| eval(x, th2));
        if v > value {
            value = v;
            th1 = a;
        }
        let (bb, v) = golden_max(th2 - w2s, th2 + w2s, 24, |x| eval(th1, x));
        if v > value {
            value = v;
            th2 = bb;
        }
    }
    (value, th1, th2)
}

/// Weighted coefficients of `f` at fixed moduli, cropped to the bounding
/// box of the entries above `CROP_REL` of the max.
struct CroppedTorus<T> {
    /// row-major `w2 x w1` array, frequency offsets relative to `(lo1, lo2)`
    b: Vec<Complex<T>>,
    w1: usize,
    w2: usize,
    peak: T,
}

fn crop3<T: Real>(
    deg: Degree,
    coeffs: &[Complex<T>],
    amps: &[f64],
) -> Option<CroppedTorus<T>> {
    let mut max_sq = 0.0f64;
    for (c, &a) in coeffs.iter().zip(amps) {
        let m = c.norm_sqr().to_f64().unwrap() * a * a;
        if m > max_sq {
            max_sq = m;
        }
    }
    if max_sq == 0.0 {
        return None;
    }
    let thr_sq = max_sq * CROP_REL * CROP_REL;
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (u32::MAX, 0u32, u32::MAX, 0u32);
    for ((c, &a), j) in coeffs.iter().zip(amps).zip(delta_points(deg)) {
        let m = c.norm_sqr().to_f64().unwrap() * a * a;
        if m >= thr_sq {
            lo1 = lo1.min(j.j1);
            hi1 = hi1.max(j.j1);
            lo2 = lo2.min(j.j2);
            hi2 = hi2.max(j.j2);
        }
    }
    let w1 = (hi1 - lo1 + 1) as usize;
    let w2 = (hi2 - lo2 + 1) as usize;
    let mut b = vec![Complex::new(T::zero(), T::zero()); w1 * w2];
    for ((c, &a), j) in coeffs.iter().zip(amps).zip(delta_points(deg)) {
        if j.j1 >= lo1 && j.j1 <= hi1 && j.j2 >= lo2 && j.j2 <= hi2 {
            let m = c.norm_sqr().to_f64().unwrap() * a * a;
            if m >= thr_sq {
                b[(j.j2 - lo2) as usize * w1 + (j.j1 - lo1) as usize] = c * r::<T>(a);
            }
        }
    }
    Some(CroppedTorus { b, w1, w2, peak: r::<T>(max_sq.sqrt()) })
}

/// Torus peak of a d = 3 vector at fixed moduli, given precomputed
/// amplitudes. Handles the degenerate boundary `t3 = 0`, where only the
/// antidiagonal `j1 + j2 = N` survives and the problem is一-dimensional.
fn torus_peak3<T: Real>(
    planner: &mut FftPlanner<T>,
    deg: Degree,
    coeffs: &[Complex<T>],
    amps: &[f64],
    oversample: u32,
    refine: bool,
) -> TorusMax<T> {
    let Some(ct) = crop3(deg, coeffs, amps) else {
        return TorusMax { value: T::zero(), theta1: T::zero(), theta2: T::zero() };
    };
    if ct.w1 == 1 && ct.w2 == 1 {
        return TorusMax { value: ct.b[0].norm().max(ct.peak), theta1: T::zero(), theta2: T::zero() };
    }
    if ct.w2 == 1 {
        let (v, th) = peak_1d(planner, &ct.b, oversample, refine);
        return TorusMax { value: v, theta1: th, theta2: T::zero() };
    }
    if ct.w1 == 1 {
        let (v, th) = peak_1d(planner, &ct.b, oversample, refine);
        return TorusMax { value: v, theta1: T::zero(), theta2: th };
    }
    // t3 = 0 leaves support on a single antidiagonal p + q = const of
    // the box; |f| then depends on theta1 - theta2 alone
    let mut diag_offset: Option<usize> = None;
    let mut antidiagonal = true;
    for (i, v) in ct.b.iter().enumerate() {
        if v.norm_sqr() == T::zero() {
            continue;
        }
        let s = i / ct.w1 + i % ct.w1;
        match diag_offset {
            None => diag_offset = Some(s),
            Some(s0) if s0 == s => {}
            _ => {
                antidiagonal = false;
                break;
            }
        }
    }
    if antidiagonal {
        let s0 = diag_offset.unwrap_or(0);
        let mut diag = vec![Complex::new(T::zero(), T::zero()); ct.w1.min(s0 + 1)];
        for (i, v) in ct.b.iter().enumerate() {
            let (q, p) = (i / ct.w1, i % ct.w1);
            if p + q == s0 && p < diag.len() {
                diag[p] = *v;
            }
        }
        let (v, th) = peak_1d(planner, &diag, oversample, refine);
        return TorusMax { value: v, theta1: th, theta2: T::zero() };
    }
    let (value, theta1, theta2) = peak_2d(planner, &ct.b, ct.w1, ct.w2, oversample, refine);
    TorusMax { value, theta1, theta2 }
}

fn torus_peak2<T: Real>(
    planner: &mut FftPlanner<T>,
    coeffs: &[Complex<T>],
    amps: &[f64],
    oversample: u32,
    refine: bool,
) -> TorusMax<T> {
    let weighted: Vec<Complex<T>> =
        coeffs.iter().zip(amps).map(|(c, &a)| c * r::<T>(a)).collect();
    if weighted.iter().all(|w| w.norm_sqr() == T::zero()) {
        return TorusMax { value: T::zero(), theta1: T::zero(), theta2: T::zero() };
    }
    let (v, th) = peak_1d(planner, &weighted, oversample, refine);
    TorusMax { value: v, theta1: th, theta2: T::zero() }
}

/// Maximum of `|f|` over the torus at fixed moduli: grid evaluation on an
/// oversampled FFT grid plus a golden-section polish of each phase.
///
/// The third phase is fixed to zero, which loses nothing because
/// `|f(e(phi) zeta)| = |f(zeta)|` for homogeneous `f`.
pub fn torus_max<T: Real>(
    f: &CoefficientVector<T>,
    t1: T,
    t2: T,
    oversample: u32,
) -> TorusMax<T> {
    assert!(oversample >= 4, "torus grid must oversample at least 4x");
    assert!(
        t1 >= T::zero() && t2 >= T::zero() && t1 + t2 <= T::one() + r::<T>(1e-12),
        "moduli must lie in the simplex"
    );
    let table = NormTable::new(f.dim(), f.degree());
    let mut planner = FftPlanner::new();
    match f.dim() {
        Dim::Three => {
            let deg = Degree::new(f.degree()).expect("odd degree");
            let amps = amplitudes3(&table, t1.to_f64().unwrap(), t2.to_f64().unwrap());
            torus_peak3(&mut planner, deg, f.coeffs(), &amps, oversample, true)
        }
        Dim::Two => {
            let amps = amplitudes2(&table, t1.to_f64().unwrap());
            torus_peak2(&mut planner, f.coeffs(), &amps, oversample, true)
        }
    }
}

/// Moduli grid for the simplex scan: the triangular lattice of side
/// `grid` plus near-vertex points at scale `1/N^2`, where monomial maxima
/// can hide.
fn moduli_points(dim: Dim, n: u32, grid: u32) -> Vec<(f64, f64)> {
    let g = grid as f64;
    let eps = 1.0 / (n as f64 * n as f64);
    let mut pts = Vec::new();
    match dim {
        Dim::Three => {
            for i in 0..=grid {
                for j in 0..=(grid - i) {
                    pts.push((i as f64 / g, j as f64 / g));
                }
            }
            pts.extend_from_slice(&[
                (1.0 - eps, 0.0),
                (0.0, 1.0 - eps),
                (eps, 0.0),
                (0.0, eps),
                (eps, eps),
                (1.0 - 2.0 * eps, eps),
                (eps, 1.0 - 2.0 * eps),
            ]);
        }
        Dim::Two => {
            for i in 0..=grid {
                pts.push((i as f64 / g, 0.0));
            }
            pts.extend_from_slice(&[(eps, 0.0), (1.0 - eps, 0.0)]);
        }
    }
    pts
}

fn clamp_simplex(t1: f64, t2: f64) -> (f64, f64) {
    let t1 = t1.clamp(0.0, 1.0);
    let t2 = t2.clamp(0.0, 1.0);
    if t1 + t2 > 1.0 {
        let s = t1 + t2;
        (t1 / s, t2 / s)
    } else {
        (t1, t2)
    }
}

/// Evaluate the torus peak of one row at given moduli (no phase polish).
fn scout<T: Real>(
    planner: &mut FftPlanner<T>,
    f: &CoefficientVector<T>,
    table: &NormTable,
    t1: f64,
    t2: f64,
    oversample: u32,
    refine: bool,
) -> TorusMax<T> {
    match f.dim() {
        Dim::Three => {
            let deg = Degree::new(f.degree()).expect("odd degree");
            let amps = amplitudes3(table, t1, t2);
            torus_peak3(planner, deg, f.coeffs(), &amps, oversample, refine)
        }
        Dim::Two => {
            let amps = amplitudes2(table, t1);
            torus_peak2(planner, f.coeffs(), &amps, oversample, refine)
        }
    }
}

fn estimate_row<T: Real>(
    planner: &mut FftPlanner<T>,
    f: &CoefficientVector<T>,
    table: &NormTable,
    pts: &[(f64, f64)],
    shared_amps: Option<&[Vec<f64>]>,
    opts: &SupNormOpts,
) -> SupNormEstimate<T> {
    let single = f.support().len() == 1;
    let single_idx = if single { f.support()[0] } else { 0 };
    let single_mag = if single { f.coeffs()[single_idx].norm() } else { T::zero() };

    let value_at = |planner: &mut FftPlanner<T>, ti: usize, t1: f64, t2: f64| -> TorusMax<T> {
        if single {
            let amp = match shared_amps {
                Some(tables) if ti != usize::MAX => tables[ti][single_idx],
                _ => match f.dim() {
                    Dim::Three => amplitudes3(table, t1, t2)[single_idx],
                    Dim::Two => amplitudes2(table, t1)[single_idx],
                },
            };
            return TorusMax {
                value: single_mag * r::<T>(amp),
                theta1: T::zero(),
                theta2: T::zero(),
            };
        }
        match shared_amps {
            Some(tables) if ti != usize::MAX => match f.dim() {
                Dim::Three => {
                    let deg = Degree::new(f.degree()).expect("odd degree");
                    torus_peak3(planner, deg, f.coeffs(), &tables[ti], opts.oversample, false)
                }
                Dim::Two => torus_peak2(planner, f.coeffs(), &tables[ti], opts.oversample, false),
            },
            _ => scout(planner, f, table, t1, t2, opts.oversample, false),
        }
    };

    // coarse scan
    let mut best_v = T::neg_infinity();
    let mut best_t = (0.0f64, 0.0f64);
    for (ti, &(t1, t2)) in pts.iter().enumerate() {
        let tm = value_at(planner, ti, t1, t2);
        if tm.value > best_v {
            best_v = tm.value;
            best_t = (t1, t2);
        }
    }
    let grid_max = best_v;

    // moduli refinement: halve the step around the best cell
    let mut step = 1.0 / opts.moduli_grid as f64;
    for _ in 0..opts.refine_levels {
        step *= 0.5;
        let (c1, c2) = best_t;
        for di in [-1.0, 0.0, 1.0] {
            for dj in [-1.0, 0.0, 1.0] {
                if di == 0.0 && dj == 0.0 {
                    continue;
                }
                let (t1, t2) = clamp_simplex(c1 + di * step, c2 + dj * step);
                let tm = value_at(planner, usize::MAX, t1, t2);
                if tm.value > best_v {
                    best_v = tm.value;
                    best_t = (t1, t2);
                }
            }
        }
    }

    // final evaluation with the phase polish at the winning moduli
    let final_tm = if single {
        value_at(planner, usize::MAX, best_t.0, best_t.1)
    } else {
        scout(planner, f, table, best_t.0, best_t.1, opts.oversample, true)
    };
    let lower = final_tm.value.max(best_v);
    let argmax = match f.dim() {
        Dim::Three => SpherePoint {
            t1: r::<T>(best_t.0),
            t2: r::<T>(best_t.1),
            thetas: [final_tm.theta1, final_tm.theta2, T::zero()],
        },
        Dim::Two => SpherePoint {
            t1: r::<T>(best_t.0),
            t2: T::zero(),
            thetas: [final_tm.theta1, T::zero(), final_tm.theta2],
        },
    };
    SupNormEstimate {
        lower_bound: lower,
        heuristic_upper: lower.max(grid_max) * r::<T>(UPPER_SLACK),
        argmax,
        opts: *opts,
    }
}

/// Sup-norm estimate of one polynomial over the sphere.
pub fn sup_norm<T: Real>(f: &CoefficientVector<T>, opts: &SupNormOpts) -> SupNormEstimate<T> {
    assert!(opts.moduli_grid >= 8, "moduli grid must be at least 8");
    assert!(opts.oversample >= 4, "oversample must be at least 4");
    let table = NormTable::new(f.dim(), f.degree());
    let pts = moduli_points(f.dim(), f.degree(), opts.moduli_grid);
    let mut planner = FftPlanner::new();
    estimate_row(&mut planner, f, &table, &pts, None, opts)
}

/// Per-row estimates and a summary for a whole basis.
#[derive(Debug, Clone)]
pub struct ScanSummary<T> {
    pub estimates: Vec<SupNormEstimate<T>>,
    pub max: T,
    pub mean: T,
    pub max_row: usize,
}

/// Apply [`sup_norm`] to every row, sharing the per-moduli amplitude
/// tables across rows (they depend only on the degree and the moduli).
pub fn scan_basis<T: Real>(b: &BasisMatrix<T>, opts: &SupNormOpts) -> ScanSummary<T> {
    assert!(opts.moduli_grid >= 8 && opts.oversample >= 4);
    let table = NormTable::new(b.dim(), b.degree());
    let pts = moduli_points(b.dim(), b.degree(), opts.moduli_grid);
    let amp_tables: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|&(t1, t2)| match b.dim() {
            Dim::Three => amplitudes3(&table, t1, t2),
            Dim::Two => amplitudes2(&table, t1),
        })
        .collect();

    let estimates: Vec<SupNormEstimate<T>> = b
        .rows()
        .par_iter()
        .map_init(FftPlanner::new, |planner, row| {
            estimate_row(planner, row, &table, &pts, Some(&amp_tables), opts)
        })
        .collect();

    let mut max = T::neg_infinity();
    let mut max_row = 0usize;
    let mut sum = T::zero();
    for (i, e) in estimates.iter().enumerate() {
        if e.lower_bound > max {
            max = e.lower_bound;
            max_row = i;
        }
        sum += e.lower_bound;
    }
    let mean = sum / r::<T>(estimates.len() as f64);
    ScanSummary { estimates, max, mean, max_row }
}

/// Fraction of the mass `sum_{k in Delta' u Delta''} |e_k(zeta)|^2`
/// carried by indices outside the axis tile of inflation `A` centered at
/// `(floor(t1 N), floor(t2 N))`.
pub fn localization<T: Real>(zeta: &SpherePoint<T>, deg: Degree, inflation: f64) -> T {
    assert!(inflation > 0.0);
    let table = NormTable::new(Dim::Three, deg.n());
    let t1 = zeta.t1.to_f64().unwrap();
    let t2 = zeta.t2.to_f64().unwrap();
    let amps = amplitudes3(&table, t1, t2);
    let center = MultiIndex::new(
        ((t1 * deg.n() as f64).floor() as u32).min(deg.n()),
        ((t2 * deg.n() as f64).floor() as u32).min(deg.n()),
    );
    let mut total = 0.0f64;
    let mut outside = 0.0f64;
    for (j, &a) in delta_points(deg).zip(&amps) {
        if j.j1 == 0 {
            continue; // mass on Delta0 belongs to the psi block
        }
        let m = a * a;
        total += m;
        if !tile_contains(center, deg, TileShape::AxisBox, inflation, j) {
            outside += m;
        }
    }
    if total == 0.0 {
        return T::zero();
    }
    r::<T>(outside / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_psi;
    use crate::monomial::eval_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn deg(n: u32) -> Degree {
        Degree::new(n).unwrap()
    }

    #[test]
    fn fft_len_shapes() {
        assert_eq!(fft_len(5), 8);
        assert_eq!(fft_len(8), 8);
        assert_eq!(fft_len(9), 12);
        assert_eq!(fft_len(13), 16);
        assert_eq!(fft_len(100), 128);
        assert_eq!(fft_len(130), 192);
    }

    #[test]
    fn torus_max_single_monomial_is_phase_free() {
        let d = deg(7);
        let f = CoefficientVector::<f64>::unit_monomial(d, MultiIndex::new(7, 0));
        let tm = torus_max(&f, 1.0, 0.0, 4);
        assert!((tm.value - 36f64.sqrt()).abs() < 1e-12);

        let d3 = deg(3);
        let g = CoefficientVector::<f64>::unit_monomial(d3, MultiIndex::new(1, 1));
        let tm = torus_max(&g, 1.0 / 3.0, 1.0 / 3.0, 4);
        let expect = (1.0f64 / 3.0).powf(1.5) * 60f64.sqrt();
        assert!((tm.value - expect).abs() < 1e-12);
    }

    #[test]
    fn torus_max_two_term_closed_form() {
        // d=2, N=2: f = e(0.3) e_(2,0) + e_(0,2); max over theta is a + b
        // with a, b the two amplitudes, attained off the coarse grid.
        let mut f = CoefficientVector::<f64>::zeros(Dim::Two, 2);
        f.coeffs_mut()[2] = unit_phase(0.3);
        f.coeffs_mut()[0] = Complex::new(1.0, 0.0);
        let t = 0.3f64;
        let table = NormTable::new(Dim::Two, 2);
        let amps = amplitudes2(&table, t);
        let expect = amps[2] + amps[0];
        let tm = torus_max(&f, t, 0.0, 4);
        assert!(
            (tm.value - expect).abs() < 1e-8,
            "torus max {} vs analytic {expect}",
            tm.value
        );
    }

    #[test]
    fn phase_fixing_is_exact_for_homogeneous_polynomials() {
        let d = deg(7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut f = CoefficientVector::<f64>::zeros(Dim::Three, 7);
        for c in f.coeffs_mut() {
            *c = Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for _ in 0..10 {
            let zeta = SpherePoint::<f64>::sample_uniform(&mut rng);
            let phi: f64 = rng.gen();
            let shifted = SpherePoint {
                t1: zeta.t1,
                t2: zeta.t2,
                thetas: [
                    (zeta.thetas[0] + phi).fract(),
                    (zeta.thetas[1] + phi).fract(),
                    (zeta.thetas[2] + phi).fract(),
                ],
            };
            let a = eval_vector(&f, &zeta).norm();
            let b = eval_vector(&f, &shifted).norm();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let _ = d;
    }

    #[test]
    fn oversampling_sanity() {
        let d = deg(15);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut f = CoefficientVector::<f64>::zeros(Dim::Three, 15);
        for c in f.coeffs_mut() {
            *c = Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for t in [(0.2, 0.3), (0.5, 0.1), (0.05, 0.9)] {
            let a = torus_max(&f, t.0, t.1, 4).value;
            let b = torus_max(&f, t.0, t.1, 8).value;
            assert!((a - b).abs() / b < 0.01, "os4 {a} vs os8 {b}");
        }
        let _ = d;
    }

    #[test]
    fn sup_norm_vertex_monomial() {
        let d = deg(15);
        let f = CoefficientVector::<f64>::unit_monomial(d, MultiIndex::new(15, 0));
        let est = sup_norm(&f, &SupNormOpts { moduli_grid: 16, refine_levels: 2, oversample: 4 });
        let expect = (d.dim() as f64).sqrt();
        assert!(
            (est.lower_bound - expect).abs() < 1e-6,
            "lower {} vs sqrt(D) {expect}",
            est.lower_bound
        );
        assert!(est.lower_bound <= est.heuristic_upper);
    }

    #[test]
    fn sup_norm_psi_scales_like_sqrt_n() {
        let n = 15u32;
        let d = deg(n);
        let psi = build_psi::<f64>(d).unwrap();
        let est = sup_norm(
            &psi.rows()[0],
            &SupNormOpts { moduli_grid: 16, refine_levels: 2, oversample: 4 },
        );
        let ratio = est.lower_bound / (n as f64).sqrt();
        assert!((0.2..=3.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn scan_matches_individual_estimates() {
        let d = deg(7);
        let psi = build_psi::<f64>(d).unwrap();
        let opts = SupNormOpts { moduli_grid: 12, refine_levels: 1, oversample: 4 };
        let summary = scan_basis(&psi, &opts);
        assert_eq!(summary.estimates.len(), 8);
        for (row, est) in psi.rows().iter().zip(&summary.estimates) {
            let single = sup_norm(row, &opts);
            let rel = (est.lower_bound - single.lower_bound).abs() / single.lower_bound;
            assert!(rel < 1e-9, "scan vs single: {} vs {}", est.lower_bound, single.lower_bound);
        }
        let best: f64 = summary.estimates.iter().map(|e| e.lower_bound).fold(0.0, f64::max);
        assert_eq!(best, summary.max);
    }

    #[test]
    fn scan_identity_frame_uses_closed_form_maxima() {
        // each e_j attains its sup at t = j / N
        let d = deg(7);
        let rows: Vec<CoefficientVector<f64>> =
            delta_points(d).map(|j| CoefficientVector::unit_monomial(d, j)).collect();
        let b = BasisMatrix::new(Dim::Three, 7, crate::basis::BlockTag::Assembled, rows);
        let summary = scan_basis(&b, &SupNormOpts { moduli_grid: 14, refine_levels: 3, oversample: 4 });
        let table = NormTable::new(Dim::Three, 7);
        for (j, est) in delta_points(d).zip(&summary.estimates) {
            let t1 = j.j1 as f64 / 7.0;
            let t2 = j.j2 as f64 / 7.0;
            let exact = amplitudes3(&table, t1, t2)[crate::geometry::delta_position(d, j)];
            assert!(
                est.lower_bound <= exact * (1.0 + 1e-9),
                "estimate cannot exceed the true max"
            );
            assert!(
                est.lower_bound >= exact * 0.97,
                "j {j:?}: {} vs exact {exact}",
                est.lower_bound
            );
        }
    }

    #[test]
    fn localization_decays_and_is_monotone() {
        let d = deg(63);
        let zeta = SpherePoint::new(0.3f64, 0.3, [0.0, 0.0, 0.0]).unwrap();
        let big = localization(&zeta, d, 1e3);
        assert_eq!(big, 0.0);
        let m2 = localization(&zeta, d, 2.0);
        let m4 = localization(&zeta, d, 4.0);
        let m8 = localization(&zeta, d, 8.0);
        assert!(m2 >= m4 && m4 >= m8, "mass-out must be non-increasing: {m2} {m4} {m8}");
        assert!(m8 < 1e-2, "A=8 should capture nearly all mass, left {m8}");
        assert!(m2 > m8, "small tiles must leak more");
    }
}
