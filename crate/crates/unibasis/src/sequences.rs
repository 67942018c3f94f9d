//! The two unimodular sequences driving the constructions: the
//! Rudin-Shapiro sign sequence and the quadratic-phase sequence
//! `u_k = e(sqrt(2) (k1^2 + k2^2))`, together with their flatness and
//! diophantine diagnostics.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::{golden_max, r, unit_phase, Real};

/// `floor(sqrt(2) * 2^80)`, verified against exact integer arithmetic in
/// the tests. Q80 fixed point keeps `frac(sqrt(2) * x)` accurate to
/// `x * 2^-80`, so quadratic phases stay good to ~1e-12 even for lattice
/// points around 10^6 where plain f64 would lose ~18 bits.
pub(crate) const SQRT2_Q80: u128 = 1_709_679_290_002_018_430_137_083;

const Q80_ONE: u128 = 1u128 << 80;

/// Fractional part of `x * sqrt(2)` in Q80 fixed point. Exact integer
/// arithmetic; requires `x < 2^46` so the product fits in `u128`.
#[inline]
pub(crate) fn sqrt2_frac_q80(x: u128) -> u128 {
    debug_assert!(x < 1u128 << 46);
    x.wrapping_mul(SQRT2_Q80) & (Q80_ONE - 1)
}

/// Rudin-Shapiro sign: `(-1)^(a_j)` where `a_j` counts adjacent `11`
/// pairs in the binary expansion of `j`.
#[inline]
pub fn rudin_shapiro(j: u64) -> i32 {
    let pairs = (j & (j >> 1)).count_ones();
    if pairs % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Quadratic-phase sequence `u_{k1,k2} = e(sqrt(2) (k1^2 + k2^2))`.
///
/// The phase is reduced mod 1 in Q80 fixed point before the complex
/// exponential, so the result is unit-modulus and phase-accurate for all
/// lattice points in scope.
pub fn quadratic_phase<T: Real>(k1: i64, k2: i64) -> Complex<T> {
    let q = (k1 as i128 * k1 as i128 + k2 as i128 * k2 as i128) as u128;
    let frac = sqrt2_frac_q80(q);
    unit_phase(r::<T>(frac as f64 / Q80_ONE as f64))
}

/// `min_{1 <= x <= limit} x * || x sqrt(2) ||` and its argmin, where
/// `|| . ||` is the distance to the nearest integer.
///
/// The scan compares candidates as exact 128-bit integers; the only error
/// is the `2^-80` truncation of `sqrt(2)` itself, well below 1e-9 for
/// `limit <= 10^6`.
pub fn diophantine_min<T: Real>(limit: u64) -> (T, u64) {
    assert!(limit >= 1, "diophantine scan needs a positive limit");
    let mut best_num: u128 = u128::MAX;
    let mut best_x: u64 = 1;
    for x in 1..=limit {
        let frac = sqrt2_frac_q80(x as u128);
        let dist = frac.min(Q80_ONE - frac);
        let prod = x as u128 * dist;
        if prod < best_num {
            best_num = prod;
            best_x = x;
        }
    }
    (r::<T>(best_num as f64 / Q80_ONE as f64), best_x)
}

/// `max_theta | sum_{j in [a, b)} sigma_j e(j theta) | / sqrt(b - a)`,
/// approximated on a `theta` grid of the given size (a lower bound for
/// the true sup) and sharpened by a golden-section pass around the grid
/// maximizer.
///
/// Requires `b > a` and `grid >= 4 (b - a)`, i.e. at least 4x
/// oversampling of the trigonometric degree.
pub fn flatness_ratio<T: Real>(a: u64, b: u64, grid: usize) -> T {
    assert!(b > a, "interval must be nonempty");
    let len = (b - a) as usize;
    assert!(grid >= 4 * len, "theta grid must oversample the interval at least 4x");

    // Values on the grid via one FFT: fold j mod grid, since
    // e(j p / G) only depends on j mod G.
    let mut buf: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); grid];
    for j in a..b {
        let s = r::<T>(rudin_shapiro(j) as f64);
        buf[(j % grid as u64) as usize].re += s;
    }
    // conj trick: |FFT(conj(buf))[p]| = |S(p / G)|
    for v in buf.iter_mut() {
        *v = v.conj();
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let mut best = T::zero();
    let mut best_p = 0usize;
    for (p, v) in buf.iter().enumerate() {
        let m = v.norm();
        if m > best {
            best = m;
            best_p = p;
        }
    }

    // Local refinement with an incremental rotor; resolution 1/grid
    // brackets the grid argmax.
    let signs: Vec<T> = (a..b).map(|j| r::<T>(rudin_shapiro(j) as f64)).collect();
    let eval = |theta: T| -> T {
        let step = unit_phase::<T>(theta);
        let mut rot = unit_phase::<T>(r::<T>(a as f64) * theta);
        let mut acc = Complex::new(T::zero(), T::zero());
        for &s in &signs {
            acc += rot * s;
            rot *= step;
        }
        acc.norm()
    };
    let center = r::<T>(best_p as f64 / grid as f64);
    let width = r::<T>(1.0 / grid as f64);
    let (_, refined) = golden_max(center - width, center + width, 40, eval);

    best.max(refined) / r::<T>(len as f64).sqrt()
}
