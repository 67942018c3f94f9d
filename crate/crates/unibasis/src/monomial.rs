//! Exact L^2 geometry of the normalized-monomial frame on the unit
//! spheres of C^2 and C^3.
//!
//! The monomials `zeta^alpha` are mutually orthogonal in
//! `L^2(dB_d, sigma)` with
//!
//! ```text
//! || zeta^alpha ||^2 = (d-1)! alpha_1! ... alpha_d! / (d-1+|alpha|)!
//! ```
//!
//! so dividing by these norms yields an exactly orthonormal frame `e_j`.
//! Every polynomial in the crate is a coefficient vector in this frame,
//! which makes inner products and Gram matrices exact up to rounding of
//! the summation; quadrature appears only as a Monte-Carlo oracle.
//!
//! Norms and point evaluations run in log space (cumulative log-factorial
//! tables, compensated) so that degrees in the hundreds neither overflow
//! nor lose precision.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{delta_points, delta_position, Degree, MultiIndex};
use crate::scalar::{pairwise_dot, pairwise_sum, r, unit_phase, Real};

/// Ambient complex dimension; the crate supports the ball of C^2 and C^3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    /// Number of frame indices at degree `n`: `n+1` monomials for d = 2,
    /// `(n+1)(n+2)/2` for d = 3.
    pub fn index_count(&self, n: u32) -> usize {
        match self {
            Dim::Two => n as usize + 1,
            Dim::Three => (n as usize + 1) * (n as usize + 2) / 2,
        }
    }
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dim::Two => f.write_str("2"),
            Dim::Three => f.write_str("3"),
        }
    }
}

/// Cumulative table of `ln(k!)` for `k <= n_max`, Kahan-compensated so the
/// absolute error stays near machine epsilon of the entries.
pub(crate) fn ln_factorial_table(n_max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n_max + 1);
    table.push(0.0);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 1..=n_max {
        let term = (k as f64).ln();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        table.push(sum);
    }
    table
}

/// `|| zeta^alpha ||^2 = (d-1)! prod alpha_i! / (d-1+|alpha|)!` where
/// `d = alpha.len()`, computed in log space. Relative error stays below
/// 1e-12 for `|alpha|` up to 1000.
pub fn monomial_norm_sq<T: Real>(alpha: &[u32]) -> T {
    assert!(!alpha.is_empty(), "alpha must have at least one entry");
    let d = alpha.len();
    let total: u32 = alpha.iter().sum();
    let table = ln_factorial_table(total as usize + d - 1);
    let mut log = table[d - 1] - table[total as usize + d - 1];
    for &a in alpha {
        log += table[a as usize];
    }
    r::<T>(log.exp())
}

/// Per-degree cache of `ln || e_k ||^2` over the canonical index order.
#[derive(Debug, Clone)]
pub(crate) struct NormTable {
    pub dim: Dim,
    pub n: u32,
    pub ln_norm_sq: Vec<f64>,
}

impl NormTable {
    pub fn new(dim: Dim, n: u32) -> Self {
        let lf = ln_factorial_table(n as usize + 2);
        let ln_norm_sq = match dim {
            Dim::Two => (0..=n)
                .map(|j| lf[j as usize] + lf[(n - j) as usize] - lf[n as usize + 1])
                .collect(),
            Dim::Three => {
                let deg = Degree::new(n).expect("three-variable norm table needs odd degree");
                delta_points(deg)
                    .map(|j| {
                        let j3 = deg.n() - j.j1 - j.j2;
                        2f64.ln() + lf[j.j1 as usize] + lf[j.j2 as usize] + lf[j3 as usize]
                            - lf[n as usize + 2]
                    })
                    .collect()
            }
        };
        NormTable { dim, n, ln_norm_sq }
    }

    /// `1 / || zeta^alpha ||` over the canonical order.
    pub fn inv_norms(&self) -> Vec<f64> {
        self.ln_norm_sq.iter().map(|&l| (-0.5 * l).exp()).collect()
    }
}

/// A point of the unit sphere of C^3 in moduli-phase coordinates:
/// `zeta = (sqrt(t1) e(th1), sqrt(t2) e(th2), sqrt(t3) e(th3))` with
/// `t3 = 1 - t1 - t2` and phases in turns.
///
/// Points of the C^2 sphere use the `t2 = 0` convention: the pair
/// `(zeta_1, zeta_3)` carries the two coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint<T> {
    pub t1: T,
    pub t2: T,
    pub thetas: [T; 3],
}

impl<T: Real> SpherePoint<T> {
    pub fn new(t1: T, t2: T, thetas: [T; 3]) -> Result<Self> {
        let tol = r::<T>(1e-12);
        if t1 < T::zero() || t2 < T::zero() || t1 + t2 > T::one() + tol {
            return Err(Error::InvalidArgument(format!(
                "moduli (t1, t2) = ({t1}, {t2}) do not describe a sphere point"
            )));
        }
        Ok(SpherePoint { t1, t2, thetas })
    }

    /// A C^2 sphere point `(sqrt(t) e(th_z), sqrt(1-t) e(th_w))` embedded
    /// with the `t2 = 0` convention.
    pub fn two_dim(t: T, theta_z: T, theta_w: T) -> Result<Self> {
        Self::new(t, T::zero(), [theta_z, T::zero(), theta_w])
    }

    #[inline]
    pub fn t3(&self) -> T {
        (T::one() - self.t1 - self.t2).max(T::zero())
    }

    /// The actual complex coordinates.
    pub fn coords(&self) -> [Complex<T>; 3] {
        [
            unit_phase(self.thetas[0]) * self.t1.sqrt(),
            unit_phase(self.thetas[1]) * self.t2.sqrt(),
            unit_phase(self.thetas[2]) * self.t3().sqrt(),
        ]
    }

    /// Uniform sample of the C^3 sphere: moduli squared are uniform on the
    /// simplex (sampled by normalized exponentials), phases uniform.
    pub fn sample_uniform(rng: &mut impl Rng) -> Self {
        let e1 = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln();
        let e2 = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln();
        let e3 = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln();
        let s = e1 + e2 + e3;
        SpherePoint {
            t1: r::<T>(e1 / s),
            t2: r::<T>(e2 / s),
            thetas: [
                r::<T>(rng.gen::<f64>()),
                r::<T>(rng.gen::<f64>()),
                r::<T>(rng.gen::<f64>()),
            ],
        }
    }
}

/// An element of `P_N` in the normalized-monomial frame, stored densely
/// over the canonical index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T> {
    dim: Dim,
    n: u32,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> CoefficientVector<T> {
    pub fn new(dim: Dim, n: u32, coeffs: Vec<Complex<T>>) -> Result<Self> {
        let want = dim.index_count(n);
        if coeffs.len() != want {
            return Err(Error::Mismatch(format!(
                "coefficient vector for dim {dim}, degree {n} needs {want} entries, got {}",
                coeffs.len()
            )));
        }
        Ok(CoefficientVector { dim, n, coeffs })
    }

    pub fn zeros(dim: Dim, n: u32) -> Self {
        CoefficientVector {
            dim,
            n,
            coeffs: vec![Complex::new(T::zero(), T::zero()); dim.index_count(n)],
        }
    }

    /// The frame vector `e_j` itself (d = 3).
    pub fn unit_monomial(deg: Degree, j: MultiIndex) -> Self {
        let mut v = Self::zeros(Dim::Three, deg.n());
        v.coeffs[delta_position(deg, j)] = Complex::new(T::one(), T::zero());
        v
    }

    /// The frame vector `e_j` for d = 2 (monomial `z^j w^(n-j)`).
    pub fn unit_monomial2(n: u32, j: u32) -> Self {
        let mut v = Self::zeros(Dim::Two, n);
        v.coeffs[j as usize] = Complex::new(T::one(), T::zero());
        v
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Coefficient-space squared norm; equals the L^2 norm squared by
    /// orthonormality of the frame.
    pub fn norm_sq(&self) -> T {
        let sq: Vec<T> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&sq)
    }

    /// Positions of the nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != T::zero() || c.im != T::zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// `<f, g> = sum_k f_k conj(g_k)`, pairwise-compensated.
pub fn inner_product<T: Real>(
    f: &CoefficientVector<T>,
    g: &CoefficientVector<T>,
) -> Result<Complex<T>> {
    if f.dim != g.dim || f.n != g.n {
        return Err(Error::Mismatch(format!(
            "inner product between (dim {}, N {}) and (dim {}, N {})",
            f.dim, f.n, g.dim, g.n
        )));
    }
    Ok(pairwise_dot(&f.coeffs, &g.coeffs))
}

/// Maximum entrywise deviation of the Gram matrix of `rows` from the
/// identity.
pub fn gram_deviation<T: Real>(rows: &[CoefficientVector<T>]) -> T {
    rows.par_iter()
        .enumerate()
        .map(|(i, fi)| {
            let mut worst = T::zero();
            for (j, fj) in rows.iter().enumerate().skip(i) {
                let g = pairwise_dot(&fi.coeffs, &fj.coeffs);
                let target = if i == j { T::one() } else { T::zero() };
                let dev = (g - Complex::new(target, T::zero())).norm();
                worst = worst.max(dev);
            }
            worst
        })
        .reduce(T::zero, |a, b| a.max(b))
}

/// Log-space amplitude `|e_k(zeta)|` for every `k` in the canonical order
/// of `Delta`, as a function of the moduli alone. Zero moduli are handled
/// exactly: `t_i = 0` kills every index with `j_i > 0`.
pub(crate) fn amplitudes3(table: &NormTable, t1: f64, t2: f64) -> Vec<f64> {
    assert_eq!(table.dim, Dim::Three);
    let deg = Degree::new(table.n).expect("norm table degree");
    let t3 = (1.0 - t1 - t2).max(0.0);
    let lt = [t1.ln(), t2.ln(), t3.ln()];
    delta_points(deg)
        .zip(&table.ln_norm_sq)
        .map(|(j, &lnn)| {
            let e = [j.j1, j.j2, deg.n() - j.j1 - j.j2];
            let mut log = -lnn;
            for i in 0..3 {
                if e[i] > 0 {
                    if [t1, t2, t3][i] == 0.0 {
                        return 0.0;
                    }
                    log += e[i] as f64 * lt[i];
                }
            }
            (0.5 * log).exp()
        })
        .collect()
}

/// d = 2 analogue over `j = 0..=n` with modulus split `(t, 1-t)`.
pub(crate) fn amplitudes2(table: &NormTable, t: f64) -> Vec<f64> {
    assert_eq!(table.dim, Dim::Two);
    let n = table.n;
    let (lt, lw) = (t.ln(), (1.0 - t).ln());
    (0..=n)
        .zip(&table.ln_norm_sq)
        .map(|(j, &lnn)| {
            let mut log = -lnn;
            if j > 0 {
                if t == 0.0 {
                    return 0.0;
                }
                log += j as f64 * lt;
            }
            if n - j > 0 {
                if 1.0 - t == 0.0 {
                    return 0.0;
                }
                log += (n - j) as f64 * lw;
            }
            (0.5 * log).exp()
        })
        .collect()
}

/// Evaluate the normalized monomial `e_j` at a sphere point (d = 3).
pub fn eval_normalized_monomial<T: Real>(
    j: MultiIndex,
    zeta: &SpherePoint<T>,
    deg: Degree,
) -> Complex<T> {
    debug_assert!(j.in_delta(deg));
    let table = NormTable::new(Dim::Three, deg.n());
    let amp = amplitudes3(&table, zeta.t1.to_f64().unwrap(), zeta.t2.to_f64().unwrap())
        [delta_position(deg, j)];
    let turns = r::<T>(j.j1 as f64) * zeta.thetas[0]
        + r::<T>(j.j2 as f64) * zeta.thetas[1]
        + r::<T>(j.j3(deg) as f64) * zeta.thetas[2];
    unit_phase(turns.fract()) * r::<T>(amp)
}

/// Evaluate a coefficient vector at a sphere point by summing the frame.
pub fn eval_vector<T: Real>(f: &CoefficientVector<T>, zeta: &SpherePoint<T>) -> Complex<T> {
    let table = NormTable::new(f.dim, f.n);
    let t1 = zeta.t1.to_f64().unwrap();
    let t2 = zeta.t2.to_f64().unwrap();
    let terms: Vec<Complex<T>> = match f.dim {
        Dim::Three => {
            let deg = Degree::new(f.n).expect("dim-3 vector has odd degree");
            let amps = amplitudes3(&table, t1, t2);
            delta_points(deg)
                .zip(&amps)
                .zip(&f.coeffs)
                .map(|((j, &amp), c)| {
                    let turns = r::<T>(j.j1 as f64) * zeta.thetas[0]
                        + r::<T>(j.j2 as f64) * zeta.thetas[1]
                        + r::<T>(j.j3(deg) as f64) * zeta.thetas[2];
                    c * unit_phase(turns.fract()) * r::<T>(amp)
                })
                .collect()
        }
        Dim::Two => {
            let amps = amplitudes2(&table, t1);
            (0..=f.n)
                .zip(&amps)
                .zip(&f.coeffs)
                .map(|((j, &amp), c)| {
                    let turns = r::<T>(j as f64) * zeta.thetas[0]
                        + r::<T>((f.n - j) as f64) * zeta.thetas[2];
                    c * unit_phase(turns.fract()) * r::<T>(amp)
                })
                .collect()
        }
    };
    let re: Vec<T> = terms.iter().map(|z| z.re).collect();
    let im: Vec<T> = terms.iter().map(|z| z.im).collect();
    Complex::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// `sum_{k in Delta} |e_k(zeta)|^2`, which equals `D` for every sphere
/// point by unitary invariance; a sharp oracle for the evaluation path.
pub fn kernel_diag<T: Real>(zeta: &SpherePoint<T>, deg: Degree) -> T {
    let table = NormTable::new(Dim::Three, deg.n());
    let amps = amplitudes3(&table, zeta.t1.to_f64().unwrap(), zeta.t2.to_f64().unwrap());
    let sq: Vec<T> = amps.iter().map(|&a| r::<T>(a * a)).collect();
    pairwise_sum(&sq)
}

/// Monte-Carlo estimate of `int |f|^2 dsigma` with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: u64,
}

/// Monte-Carlo L^2 norm oracle: averages `|f(zeta)|^2` over uniform sphere
/// points obtained from normalized complex Gaussians. Deterministic for a
/// fixed seed: samples are drawn in blocks with counter-based substreams
/// and reduced in a fixed order.
pub fn mc_l2_norm<T: Real>(
    f: &CoefficientVector<T>,
    samples: u64,
    seed: u64,
) -> McEstimate<T>
where
    StandardNormal: Distribution<T>,
{
    assert!(samples >= 1);
    let d = match f.dim {
        Dim::Two => 2usize,
        Dim::Three => 3usize,
    };
    let table = NormTable::new(f.dim, f.n);
    let inv_norms = table.inv_norms();
    let support = f.support();
    let exponents: Vec<[u32; 3]> = match f.dim {
        Dim::Three => {
            let deg = Degree::new(f.n).expect("odd degree");
            delta_points(deg).map(|j| [j.j1, j.j2, deg.n() - j.j1 - j.j2]).collect()
        }
        Dim::Two => (0..=f.n).map(|j| [j, f.n - j, 0]).collect(),
    };

    const BLOCK: u64 = 1 << 14;
    let blocks = samples.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            let mut pows: Vec<Vec<Complex<T>>> = vec![Vec::new(); d];
            for _ in 0..count {
                // uniform point: normalized complex Gaussian
                let mut z = [Complex::new(T::zero(), T::zero()); 3];
                let mut nrm = T::zero();
                for zi in z.iter_mut().take(d) {
                    let re: T = rng.sample(StandardNormal);
                    let im: T = rng.sample(StandardNormal);
                    *zi = Complex::new(re, im);
                    nrm += zi.norm_sqr();
                }
                let scale = nrm.sqrt().recip();
                for zi in z.iter_mut().take(d) {
                    *zi = *zi * scale;
                }

                let value = if support.len() == 1 {
                    let k = support[0];
                    let e = exponents[k];
                    let mut m = Complex::new(T::one(), T::zero());
                    for (i, zi) in z.iter().enumerate().take(d) {
                        m = m * zi.powu(e[i]);
                    }
                    (f.coeffs[k] * m * r::<T>(inv_norms[k])).norm_sqr()
                } else {
                    for (i, p) in pows.iter_mut().enumerate() {
                        p.clear();
                        p.push(Complex::new(T::one(), T::zero()));
                        for a in 1..=(f.n as usize) {
                            let prev = p[a - 1];
                            p.push(prev * z[i]);
                        }
                    }
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for &k in &support {
                        let e = exponents[k];
                        let mut m = pows[0][e[0] as usize];
                        for (i, p) in pows.iter().enumerate().skip(1).take(d - 1) {
                            m = m * p[e[i] as usize];
                        }
                        acc += f.coeffs[k] * m * r::<T>(inv_norms[k]);
                    }
                    acc.norm_sqr()
                };
                let v = value.to_f64().unwrap();
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();

    let total: f64 = partials.iter().map(|p| p.0).sum();
    let total_sq: f64 = partials.iter().map(|p| p.1).sum();
    let nf = samples as f64;
    let mean = total / nf;
    let var = ((total_sq / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
    McEstimate {
        mean: r::<T>(mean),
        std_error: r::<T>((var / nf).sqrt()),
        samples,
    }
}
