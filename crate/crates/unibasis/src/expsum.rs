//! Mollified quadratic exponential sums and their scaling laws.
//!
//! The windowed sums
//!
//! ```text
//! S = sum_k rho((k1-c1)/M1) rho((k2-c2)/M2) e(k . psi) w_k
//! ```
//!
//! with `w_k = u_k = e(sqrt(2)(k1^2 + k2^2))` (plain) or
//! `w_k = u_(k1, N-k1-k2)` (reflected) stay of size `sqrt(M1 M2)`
//! uniformly in the centers and phases; this is the cancellation that
//! ultimately bounds the eta rows. The module measures the max-over-phase
//! growth empirically and fits its log-log slope against the window size,
//! with a unit-weight baseline hook (slope 2, no cancellation) as the
//! contrast control.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{golden_max, least_squares_fit, r, unit_phase, Real};
use crate::sequences::quadratic_phase;

/// The fixed mollifier: `rho(x) = exp(1 - 1/(1 - x^2))` for `|x| < 1`,
/// zero outside. Smooth, symmetric, `rho(0) = 1`, `0 <= rho <= 1`.
pub fn bump<T: Real>(x: T) -> T {
    let x2 = x * x;
    if x2 >= T::one() {
        return T::zero();
    }
    (T::one() - (T::one() - x2).recip()).exp()
}

/// Which weight sequence the sum uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumVariant {
    /// `w_k = u_(k1, k2)`
    Plain,
    /// `w_k = u_(k1, N - k1 - k2)`
    Reflected,
}

impl SumVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SumVariant::Plain => "plain",
            SumVariant::Reflected => "reflected",
        }
    }
}

/// Weight hook: the quadratic-phase sequence, or all ones (the
/// no-cancellation baseline used as a contrast control in tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    QuadraticPhase,
    Unit,
}

/// Parameters of one mollified sum.
#[derive(Debug, Clone, Copy)]
pub struct SumSpec<T> {
    pub m1: u32,
    pub m2: u32,
    pub c1: i64,
    pub c2: i64,
    pub psi1: T,
    pub psi2: T,
    /// Degree parameter entering the reflected weights only.
    pub n: u64,
    pub variant: SumVariant,
}

/// Per-axis tables for fast summation over the support box: mollifier
/// values, phase factors `e(k psi)`, and the separable part of the
/// weights.
struct AxisTables<T> {
    /// k1 runs over `c1 - M1 + 1 ..= c1 + M1 - 1`; same for k2.
    k1_lo: i64,
    k2_lo: i64,
    rho_phase1: Vec<Complex<T>>,
    rho_phase2: Vec<Complex<T>>,
    w1: Vec<Complex<T>>,
    w2: Vec<Complex<T>>,
    /// reflected: `e(sqrt2 (n - k1 - k2)^2)` indexed by `k1 + k2 - (k1_lo + k2_lo)`
    wd: Vec<Complex<T>>,
}

fn axis_tables<T: Real>(spec: &SumSpec<T>, weights: WeightKind) -> AxisTables<T> {
    let k1_lo = spec.c1 - spec.m1 as i64 + 1;
    let k1_hi = spec.c1 + spec.m1 as i64 - 1;
    let k2_lo = spec.c2 - spec.m2 as i64 + 1;
    let k2_hi = spec.c2 + spec.m2 as i64 - 1;
    let len1 = (k1_hi - k1_lo + 1) as usize;
    let len2 = (k2_hi - k2_lo + 1) as usize;

    let axis = |lo: i64, len: usize, m: u32, c: i64, psi: T| -> Vec<Complex<T>> {
        (0..len)
            .map(|i| {
                let k = lo + i as i64;
                let rho = bump(r::<T>((k - c) as f64 / m as f64));
                unit_phase((r::<T>(k as f64) * psi).fract()) * rho
            })
            .collect()
    };
    let rho_phase1 = axis(k1_lo, len1, spec.m1, spec.c1, spec.psi1);
    let rho_phase2 = axis(k2_lo, len2, spec.m2, spec.c2, spec.psi2);

    let one = Complex::new(T::one(), T::zero());
    let (w1, w2, wd) = match (weights, spec.variant) {
        (WeightKind::Unit, _) => (vec![one; len1], vec![one; len2], Vec::new()),
        (WeightKind::QuadraticPhase, SumVariant::Plain) => (
            (0..len1).map(|i| quadratic_phase::<T>(k1_lo + i as i64, 0)).collect(),
            (0..len2).map(|i| quadratic_phase::<T>(k2_lo + i as i64, 0)).collect(),
            Vec::new(),
        ),
        (WeightKind::QuadraticPhase, SumVariant::Reflected) => {
            // w_k = e(sqrt2 (k1^2 + (n - k1 - k2)^2)) splits over k1 and s = k1 + k2
            let s_lo = k1_lo + k2_lo;
            let s_hi = k1_hi + k2_hi;
            let wd = (s_lo..=s_hi)
                .map(|s| quadratic_phase::<T>(spec.n as i64 - s, 0))
                .collect();
            (
                (0..len1).map(|i| quadratic_phase::<T>(k1_lo + i as i64, 0)).collect(),
                vec![one; len2],
                wd,
            )
        }
    };
    AxisTables { k1_lo, k2_lo, rho_phase1, rho_phase2, w1, w2, wd }
}

/// The mollified sum with a pluggable weight hook; compensated
/// accumulation over the support box.
pub fn mollified_sum_weighted<T: Real>(spec: &SumSpec<T>, weights: WeightKind) -> Complex<T> {
    assert!(spec.m1 >= 1 && spec.m2 >= 1, "window sizes must be positive");
    let t = axis_tables(spec, weights);
    let reflected = weights == WeightKind::QuadraticPhase && spec.variant == SumVariant::Reflected;

    let mut sum = Complex::new(T::zero(), T::zero());
    let mut comp = Complex::new(T::zero(), T::zero());
    let mut kahan = |term: Complex<T>| {
        let y = term - comp;
        let tt = sum + y;
        comp = (tt - sum) - y;
        sum = tt;
    };
    for (i, a1) in t.rho_phase1.iter().enumerate() {
        let f1 = a1 * t.w1[i];
        for (j, a2) in t.rho_phase2.iter().enumerate() {
            let mut term = f1 * a2 * t.w2[j];
            if reflected {
                term = term * t.wd[i + j];
            }
            kahan(term);
        }
    }
    sum
}

/// The mollified sum of the lemma with the quadratic-phase weights.
pub fn mollified_sum<T: Real>(spec: &SumSpec<T>) -> Complex<T> {
    mollified_sum_weighted(spec, WeightKind::QuadraticPhase)
}

/// Max of `|S(psi)|` over a `psi_grid x psi_grid` grid of phases in one
/// pass: fold the weighted box modulo the grid and take a 2-D DFT. The
/// grid value at `(p, q)` is exactly `S(p/P, q/P)`.
fn psi_grid_max<T: Real>(
    planner: &mut FftPlanner<T>,
    spec: &SumSpec<T>,
    weights: WeightKind,
    psi_grid: usize,
) -> (T, T, T) {
    let base = SumSpec { psi1: T::zero(), psi2: T::zero(), ..*spec };
    let t = axis_tables(&base, weights);
    let reflected = weights == WeightKind::QuadraticPhase && spec.variant == SumVariant::Reflected;
    let p = psi_grid;
    let mut folded = vec![Complex::new(T::zero(), T::zero()); p * p];
    for (i, a1) in t.rho_phase1.iter().enumerate() {
        let f1 = a1 * t.w1[i];
        let k1 = (t.k1_lo + i as i64).rem_euclid(p as i64) as usize;
        for (j, a2) in t.rho_phase2.iter().enumerate() {
            let mut term = f1 * a2 * t.w2[j];
            if reflected {
                term = term * t.wd[i + j];
            }
            let k2 = (t.k2_lo + j as i64).rem_euclid(p as i64) as usize;
            // conj trick: the forward DFT of the conjugate gives S(+psi)
            folded[k1 * p + k2] += term.conj();
        }
    }
    let fft = planner.plan_fft_forward(p);
    for row in folded.chunks_exact_mut(p) {
        fft.process(row);
    }
    let mut tr = vec![Complex::new(T::zero(), T::zero()); p * p];
    for a in 0..p {
        for b in 0..p {
            tr[b * p + a] = folded[a * p + b];
        }
    }
    for col in tr.chunks_exact_mut(p) {
        fft.process(col);
    }
    let mut best = T::zero();
    let mut best_ab = (0usize, 0usize);
    for a in 0..p {
        for b in 0..p {
            let m = tr[b * p + a].norm_sqr();
            if m > best {
                best = m;
                best_ab = (a, b);
            }
        }
    }
    (
        best.sqrt(),
        r::<T>(best_ab.0 as f64 / p as f64),
        r::<T>(best_ab.1 as f64 / p as f64),
    )
}

/// Max over phases for one center: grid max, a few random draws, and a
/// golden-section polish of each phase axis.
fn max_over_psi<T: Real>(
    planner: &mut FftPlanner<T>,
    spec: &SumSpec<T>,
    weights: WeightKind,
    psi_grid: usize,
    rng: &mut impl Rng,
) -> T {
    let (grid_best, mut p1, mut p2) = psi_grid_max(planner, spec, weights, psi_grid);
    let mut best = grid_best;
    for _ in 0..4 {
        let q1 = r::<T>(rng.gen::<f64>());
        let q2 = r::<T>(rng.gen::<f64>());
        let v = mollified_sum_weighted(&SumSpec { psi1: q1, psi2: q2, ..*spec }, weights).norm();
        if v > best {
            best = v;
            p1 = q1;
            p2 = q2;
        }
    }
    let w = r::<T>(1.0 / psi_grid as f64);
    let (a, v) = golden_max(p1 - w, p1 + w, 14, |x| {
        mollified_sum_weighted(&SumSpec { psi1: x, psi2: p2, ..*spec }, weights).norm()
    });
    if v > best {
        best = v;
        p1 = a;
    }
    let (_, v) = golden_max(p2 - w, p2 + w, 14, |x| {
        mollified_sum_weighted(&SumSpec { psi1: p1, psi2: x, ..*spec }, weights).norm()
    });
    if v > best {
        best = v;
    }
    best
}

/// Result of a scaling-law fit.
#[derive(Debug, Clone)]
pub struct ScalingFit<T> {
    /// Log-log slope of the max-sum against `M` (`M1 = M2 = M`); the
    /// square-root law gives ~1, full constructive interference ~2.
    pub exponent: T,
    /// `exp` of the fit intercept.
    pub constant: T,
    /// Per-size measured maxima.
    pub max_sums: Vec<(u32, T)>,
}

/// Degree parameter used by the reflected weights in scaling runs.
pub const REFLECTED_DEGREE: u64 = 1_000_000;

/// Measure `max |S|` over random centers in `[0, 10^6]` and phases for
/// each window size, and fit the log-log growth. Trials are independent
/// substreams of the seed, so results are reproducible and parallel.
pub fn scaling_fit<T: Real>(
    sizes: &[u32],
    trials: u32,
    seed: u64,
    variant: SumVariant,
    weights: WeightKind,
) -> Result<ScalingFit<T>> {
    if sizes.len() < 2 {
        return Err(Error::DegenerateFit { got: sizes.len(), min: 2 });
    }
    const PSI_GRID: usize = 64;
    let max_sums: Vec<(u32, T)> = sizes
        .iter()
        .map(|&m| {
            let best = (0..trials)
                .into_par_iter()
                .map_init(FftPlanner::new, |planner, trial| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((m as u64) << 32) | trial as u64);
                    let spec = SumSpec {
                        m1: m,
                        m2: m,
                        c1: rng.gen_range(0..=1_000_000i64),
                        c2: rng.gen_range(0..=1_000_000i64),
                        psi1: T::zero(),
                        psi2: T::zero(),
                        n: REFLECTED_DEGREE,
                        variant,
                    };
                    max_over_psi(planner, &spec, weights, PSI_GRID, &mut rng)
                })
                .collect::<Vec<T>>()
                .into_iter()
                .fold(T::zero(), |a, b| a.max(b));
            (m, best)
        })
        .collect();

    let xs: Vec<T> = max_sums.iter().map(|&(m, _)| r::<T>((m as f64).ln())).collect();
    let ys: Vec<T> = max_sums.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, intercept) = least_squares_fit(&xs, &ys);
    Ok(ScalingFit { exponent: slope, constant: intercept.exp(), max_sums })
}
