//! Scalar abstraction: the numeric kernels are generic over `f32`/`f64`.

use num_complex::Complex;

/// Floating point scalar usable throughout the crate: an IEEE float with
/// the constants, conversions and FFT support the kernels need.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + rustfft::FftNum
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand conversion from an `f64` constant into the working scalar.
#[inline]
pub(crate) fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant is representable in the scalar type")
}

/// `e(x) = exp(2 pi i x)` with `x` measured in turns.
#[inline]
pub fn unit_phase<T: Real>(turns: T) -> Complex<T> {
    let angle = turns * T::TAU();
    Complex::new(angle.cos(), angle.sin())
}

/// Pairwise (cascade) summation; error grows like `eps * log n` instead of
/// `eps * n`, which keeps Gram deviations near machine epsilon at D ~ 10^3.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 32 {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise dot product `sum_k a_k * conj(b_k)`.
pub fn pairwise_dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= 32 {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (x, y) in a.iter().zip(b) {
            acc += x * y.conj();
        }
        return acc;
    }
    let mid = a.len() / 2;
    pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn least_squares_fit<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "fit needs at least two points");
    let n = r::<T>(x.len() as f64);
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
///
/// Returns `(argmax, max)`. The bracket shrinks by the golden ratio each
/// step; `iters` around 40 resolves the argmax to ~1e-9 of the bracket.
pub fn golden_max<T: Real>(mut a: T, mut b: T, iters: usize, mut f: impl FnMut(T) -> T) -> (T, T) {
    let inv_phi = r::<T>(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(0.0f64, 1.0, 60, |x| -(x - 0.3) * (x - 0.3));
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v.abs() < 1e-17);
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.5 * v - 1.0).collect();
        let (slope, intercept) = least_squares_fit(&x, &y);
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((intercept + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_phase_is_unimodular() {
        for i in 0..100 {
            let u = unit_phase::<f64>(i as f64 * 0.137);
            assert!((u.norm() - 1.0).abs() < 1e-15);
        }
    }
}
