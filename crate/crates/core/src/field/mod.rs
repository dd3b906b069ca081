//! Discrete model of functions on the unit torus: square power-of-two grids
//! of complex samples, their DFTs, Lebesgue norms and synthetic generators.
//!
//! Conventions, used everywhere: physical period 1 in each coordinate, grid
//! spacing h = 1/N, sample (ix, iy) sits at x = (ix*h, iy*h), data row-major
//! with the second coordinate as the row index. The forward DFT divides by
//! N^2 and the inverse multiplies by nothing, so the plane wave
//! e^{2 pi i xi.x} has coefficient exactly 1 at the integer frequency xi.

pub mod io;

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Complex samples on an N x N periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T: Scalar> {
    n: usize,
    data: Vec<Complex<T>>,
}

/// DFT coefficients of a [`ComplexField`], indexed by integer frequencies
/// xi in [-N/2, N/2)^2 (stored in standard FFT layout).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T: Scalar> {
    n: usize,
    data: Vec<Complex<T>>,
}

/// Nonnegative reals on the same grid (maximal-function values and the like).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField<T: Scalar> {
    n: usize,
    data: Vec<T>,
}

fn check_dims(n: usize) -> Result<()> {
    if n < 32 || !n.is_power_of_two() {
        return Err(CoreError::NonPowerOfTwo(n));
    }
    Ok(())
}

impl<T: Scalar> ComplexField<T> {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dims(n)?;
        Ok(ComplexField { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] })
    }

    pub fn from_data(n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        check_dims(n)?;
        if data.len() != n * n {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {} samples, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(ComplexField { n, data })
    }

    /// Evaluate a function of the physical point (x1, x2) on every sample.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> Complex<T> + Sync) -> Result<Self> {
        check_dims(n)?;
        let h = 1.0 / n as f64;
        let data = (0..n * n)
            .into_par_iter()
            .map(|idx| f((idx % n) as f64 * h, (idx / n) as f64 * h))
            .collect();
        Ok(ComplexField { n, data })
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex<T> {
        self.data[iy * self.n + ix]
    }

    /// Pointwise modulus.
    pub fn modulus(&self) -> RealField<T> {
        RealField { n: self.n, data: self.data.iter().map(|z| z.norm()).collect() }
    }

    pub fn scale(&self, c: Complex<T>) -> ComplexField<T> {
        ComplexField { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &ComplexField<T>) -> ComplexField<T> {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        ComplexField { n: self.n, data }
    }

    pub fn sub(&self, other: &ComplexField<T>) -> ComplexField<T> {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ComplexField { n: self.n, data }
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &ComplexField<T>) -> T {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    /// (h^2 sum |f|^p)^{1/p} for p in (1, inf); max |f| for p = infinity.
    pub fn lp_norm(&self, p: f64) -> Result<T> {
        lp_norm_impl(self.n, self.data.iter().map(|z| z.norm()), p)
    }

    /// L2 inner product h^2 sum f conj(g).
    pub fn inner(&self, other: &ComplexField<T>) -> Complex<T> {
        assert_eq!(self.n, other.n);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.data.iter().zip(&other.data) {
            acc = acc + a * b.conj();
        }
        acc.scale(T::one() / T::from_usize(self.n * self.n).unwrap())
    }
}

impl<T: Scalar> RealField<T> {
    pub fn zeros(n: usize) -> Self {
        RealField { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_data(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n);
        RealField { n, data }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn at(&self, ix: usize, iy: usize) -> T {
        self.data[iy * self.n + ix]
    }

    pub fn max(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| if v > m { v } else { m })
    }

    pub fn lp_norm(&self, p: f64) -> Result<T> {
        lp_norm_impl(self.n, self.data.iter().map(|v| v.abs()), p)
    }

    /// Embed as a complex field with zero imaginary part.
    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField {
            n: self.n,
            data: self.data.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }
}

fn lp_norm_impl<T: Scalar>(n: usize, moduli: impl Iterator<Item = T>, p: f64) -> Result<T> {
    if p.is_infinite() && p > 0.0 {
        return Ok(moduli.fold(T::zero(), |m, v| if v > m { v } else { m }));
    }
    if !(p > 1.0) {
        return Err(CoreError::BadExponent(p));
    }
    let h2 = T::lit(1.0) / T::from_usize(n * n).unwrap();
    let pe = T::lit(p);
    let mut acc = T::zero();
    for v in moduli {
        acc += v.powf(pe);
    }
    Ok((h2 * acc).powf(T::one() / pe))
}

impl<T: Scalar> SpectralField<T> {
    pub fn zeros(n: usize) -> Self {
        SpectralField { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    fn index_of(&self, xi1: i64, xi2: i64) -> usize {
        let n = self.n as i64;
        let k1 = xi1.rem_euclid(n) as usize;
        let k2 = xi2.rem_euclid(n) as usize;
        k2 * self.n + k1
    }

    /// Coefficient at the integer frequency xi = (xi1, xi2) in [-N/2, N/2)^2.
    pub fn coeff(&self, xi1: i64, xi2: i64) -> Complex<T> {
        self.data[self.index_of(xi1, xi2)]
    }

    pub fn coeff_mut(&mut self, xi1: i64, xi2: i64) -> &mut Complex<T> {
        let i = self.index_of(xi1, xi2);
        &mut self.data[i]
    }

    /// Sum of |coefficient|^2 over the lattice.
    pub fn energy(&self) -> T {
        let mut acc = T::zero();
        for z in &self.data {
            acc += z.norm_sqr();
        }
        acc
    }

    /// Apply a frequency multiplier in place: coeff(xi) *= m(xi).
    pub fn multiply(&mut self, m: impl Fn(i64, i64) -> Complex<T> + Sync) {
        let n = self.n;
        self.data.par_chunks_mut(n).enumerate().for_each(|(k2, row)| {
            let xi2 = signed_freq(k2, n);
            for (k1, z) in row.iter_mut().enumerate() {
                let xi1 = signed_freq(k1, n);
                *z = *z * m(xi1, xi2);
            }
        });
    }

    /// New spectrum with the multiplier applied.
    pub fn multiplied(&self, m: impl Fn(i64, i64) -> Complex<T> + Sync) -> SpectralField<T> {
        let mut out = self.clone();
        out.multiply(m);
        out
    }
}

/// k in [0, N) -> signed integer frequency in [-N/2, N/2).
pub fn signed_freq(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if k < n / 2 {
        k
    } else {
        k - n
    }
}

/// Iterator over the integer frequency lattice of an N x N grid, visiting
/// each point exactly once.
pub struct FrequencyLattice {
    n: usize,
    idx: usize,
}

impl FrequencyLattice {
    pub fn new(n: usize) -> Self {
        FrequencyLattice { n, idx: 0 }
    }
}

impl Iterator for FrequencyLattice {
    type Item = (i64, i64);

    fn next(&mut self) -> Option<(i64, i64)> {
        if self.idx >= self.n * self.n {
            return None;
        }
        let k1 = self.idx % self.n;
        let k2 = self.idx / self.n;
        self.idx += 1;
        Some((signed_freq(k1, self.n), signed_freq(k2, self.n)))
    }
}

/// |xi| for an integer frequency.
pub fn freq_abs(xi1: i64, xi2: i64) -> f64 {
    ((xi1 * xi1 + xi2 * xi2) as f64).sqrt()
}

// Plan cache, keyed by (len, direction). rustfft plans are Send + Sync.
fn plan_for<T: Scalar>(n: usize, dir: FftDirection) -> Arc<dyn Fft<T>> {
    // One cache per scalar type via generics + static-per-monomorphization
    // is not possible directly; key the map by TypeId through two statics.
    fn cache<T: Scalar>() -> &'static Mutex<HashMap<(usize, bool), Arc<dyn Fft<T>>>> {
        static F32: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f32>>>>> = OnceLock::new();
        static F64: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
        let any: &'static dyn std::any::Any = if std::any::TypeId::of::<T>()
            == std::any::TypeId::of::<f32>()
        {
            F32.get_or_init(|| Mutex::new(HashMap::new()))
        } else {
            F64.get_or_init(|| Mutex::new(HashMap::new()))
        };
        any.downcast_ref().expect("scalar is f32 or f64")
    }
    let key = (n, matches!(dir, FftDirection::Forward));
    let mut map = cache::<T>().lock().unwrap();
    map.entry(key)
        .or_insert_with(|| FftPlanner::<T>::new().plan_fft(n, dir))
        .clone()
}

fn transform_rows<T: Scalar>(data: &mut [Complex<T>], n: usize, dir: FftDirection) {
    let plan = plan_for::<T>(n, dir);
    data.par_chunks_mut(n).for_each(|row| plan.process(row));
}


fn transpose_into<T: Scalar>(src: &[Complex<T>], dst: &mut [Complex<T>], n: usize) {
    for iy in 0..n {
        for ix in 0..n {
            dst[ix * n + iy] = src[iy * n + ix];
        }
    }
}

/// Allocation-free 2D transform over a caller-owned buffer (`scratch` must
/// have the same length). Forward scales by 1/N^2 to match `dft_forward`.
pub(crate) fn fft2_in_place<T: Scalar>(
    data: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
    n: usize,
    dir: FftDirection,
) {
    transform_rows(data, n, dir);
    transpose_into(data, scratch, n);
    transform_rows(scratch, n, dir);
    transpose_into(scratch, data, n);
    if matches!(dir, FftDirection::Forward) {
        let scale = T::one() / T::from_usize(n * n).unwrap();
        for z in data.iter_mut() {
            *z = z.scale(scale);
        }
    }
}

pub(crate) use rustfft::FftDirection as FftDir;

/// Forward DFT: f_hat(xi) = N^-2 sum_x f(x) e^{-2 pi i xi.x}.
pub fn dft_forward<T: Scalar>(field: &ComplexField<T>) -> SpectralField<T> {
    let n = field.n;
    let mut data = field.data.clone();
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); n * n];
    fft2_in_place(&mut data, &mut scratch, n, FftDirection::Forward);
    SpectralField { n, data }
}

/// Inverse DFT: f(x) = sum_xi f_hat(xi) e^{2 pi i xi.x}.
pub fn dft_inverse<T: Scalar>(spec: &SpectralField<T>) -> ComplexField<T> {
    let n = spec.n;
    let mut data = spec.data.clone();
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); n * n];
    fft2_in_place(&mut data, &mut scratch, n, FftDirection::Inverse);
    ComplexField { n, data }
}

/// Apply a frequency multiplier: inverse_dft(m . forward_dft(f)).
pub fn apply_multiplier<T: Scalar>(
    field: &ComplexField<T>,
    m: impl Fn(i64, i64) -> Complex<T> + Sync,
) -> ComplexField<T> {
    let mut spec = dft_forward(field);
    spec.multiply(m);
    dft_inverse(&spec)
}

/// Synthetic test fields.
pub enum SynthKind {
    /// e^{2 pi i xi.x}; unit L2 norm.
    PlaneWave { xi: (i64, i64) },
    /// exp(-|x-c|^2 / (2 sigma^2)) with the wrapped (nearest-image) distance.
    Gaussian { center: (f64, f64), sigma: f64 },
    /// Indicator of [a1, b1) x [a2, b2) (coordinates taken mod 1).
    Indicator { rect: (f64, f64, f64, f64) },
}

pub fn synth_field<T: Scalar>(n: usize, kind: SynthKind) -> Result<ComplexField<T>> {
    match kind {
        SynthKind::PlaneWave { xi } => {
            let half = (n / 2) as i64;
            if xi.0 < -half || xi.0 >= half || xi.1 < -half || xi.1 >= half {
                return Err(CoreError::FrequencyOutOfRange(xi.0, xi.1));
            }
            ComplexField::from_fn(n, |x1, x2| {
                let ph = 2.0 * std::f64::consts::PI * (xi.0 as f64 * x1 + xi.1 as f64 * x2);
                Complex::new(T::lit(ph.cos()), T::lit(ph.sin()))
            })
        }
        SynthKind::Gaussian { center, sigma } => ComplexField::from_fn(n, move |x1, x2| {
            let d1 = wrapped_diff(x1, center.0);
            let d2 = wrapped_diff(x2, center.1);
            let v = (-(d1 * d1 + d2 * d2) / (2.0 * sigma * sigma)).exp();
            Complex::new(T::lit(v), T::zero())
        }),
        SynthKind::Indicator { rect } => {
            let (a1, b1, a2, b2) = rect;
            ComplexField::from_fn(n, move |x1, x2| {
                let inside = in_interval_mod1(x1, a1, b1) && in_interval_mod1(x2, a2, b2);
                Complex::new(if inside { T::one() } else { T::zero() }, T::zero())
            })
        }
    }
}

/// Signed displacement to the nearest periodic image, in [-1/2, 1/2).
pub fn wrapped_diff(x: f64, c: f64) -> f64 {
    let mut d = (x - c).rem_euclid(1.0);
    if d >= 0.5 {
        d -= 1.0;
    }
    d
}

fn in_interval_mod1(x: f64, a: f64, b: f64) -> bool {
    let t = (x - a).rem_euclid(1.0);
    t < (b - a)
}

/// Field with iid standard complex Gaussian coefficients exactly where the
/// predicate holds, zero elsewhere. Deterministic in the RNG.
pub fn random_bandlimited<T: Scalar>(
    n: usize,
    rng: &mut impl Rng,
    support: impl Fn(i64, i64) -> bool,
) -> Result<ComplexField<T>> {
    check_dims(n)?;
    let mut spec = SpectralField::<T>::zeros(n);
    // Fill in deterministic lattice order (row-major over the FFT layout).
    for k2 in 0..n {
        for k1 in 0..n {
            let xi1 = signed_freq(k1, n);
            let xi2 = signed_freq(k2, n);
            if support(xi1, xi2) {
                // Box-Muller keeps us independent of rand_distr.
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let r = (-2.0 * u1.ln()).sqrt();
                let th = 2.0 * std::f64::consts::PI * u2;
                spec.data[k2 * n + k1] =
                    Complex::new(T::lit(r * th.cos()), T::lit(r * th.sin()));
            }
        }
    }
    Ok(dft_inverse(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn plane_wave_has_unit_coefficient() {
        let f = synth_field::<f64>(64, SynthKind::PlaneWave { xi: (3, 2) }).unwrap();
        let spec = dft_forward(&f);
        assert!((spec.coeff(3, 2) - Complex::new(1.0, 0.0)).norm() < 1e-12);
        let mut off = 0.0f64;
        for (xi1, xi2) in FrequencyLattice::new(64) {
            if (xi1, xi2) != (3, 2) {
                off = off.max(spec.coeff(xi1, xi2).norm());
            }
        }
        assert!(off < 1e-13);
    }

    #[test]
    fn roundtrip_identity() {
        let mut rng = seeded_rng(11);
        let f = random_bandlimited::<f64>(64, &mut rng, |a, b| a.abs() < 20 && b.abs() < 20)
            .unwrap();
        let back = dft_inverse(&dft_forward(&f));
        let denom = f.max_abs();
        assert!(f.max_abs_diff(&back) / denom < 1e-12);
    }

    #[test]
    fn parseval_against_direct_sums() {
        // Oracle: both sides summed directly from the definitions.
        let mut rng = seeded_rng(5);
        let f = random_bandlimited::<f64>(64, &mut rng, |a, b| a.abs() < 30 && b.abs() < 30)
            .unwrap();
        let spec = dft_forward(&f);
        let lhs: f64 = spec.data().iter().map(|z| z.norm_sqr()).sum();
        let rhs: f64 =
            f.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / (64.0 * 64.0);
        assert!((lhs - rhs).abs() / rhs < 1e-12);
    }

    #[test]
    fn lp_norm_basics() {
        let one = ComplexField::<f64>::from_fn(32, |_, _| Complex::new(1.0, 0.0)).unwrap();
        assert!((one.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((one.lp_norm(4.0).unwrap() - 1.0).abs() < 1e-14);
        let wave = synth_field::<f64>(32, SynthKind::PlaneWave { xi: (5, 1) }).unwrap();
        assert!((wave.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-13);
        // Indicator of half the torus.
        let half = synth_field::<f64>(32, SynthKind::Indicator { rect: (0.0, 0.5, 0.0, 1.0) })
            .unwrap();
        assert!((half.lp_norm(2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-13);
        assert!(one.lp_norm(1.0).is_err());
        assert!(one.lp_norm(0.5).is_err());
    }

    #[test]
    fn lp_le_linf() {
        let mut rng = seeded_rng(9);
        let f = random_bandlimited::<f64>(32, &mut rng, |a, b| a.abs() < 10 && b.abs() < 10)
            .unwrap();
        let linf = f.lp_norm(f64::INFINITY).unwrap();
        for p in [1.5, 2.0, 3.0, 8.0] {
            assert!(f.lp_norm(p).unwrap() <= linf * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lp_triangle_inequality() {
        let mut rng = seeded_rng(13);
        for _ in 0..3 {
            let f = random_bandlimited::<f64>(32, &mut rng, |a, b| a.abs() < 8 && b.abs() < 8)
                .unwrap();
            let g = random_bandlimited::<f64>(32, &mut rng, |a, b| a.abs() < 8 && b.abs() < 8)
                .unwrap();
            for p in [1.5, 2.0, 4.0] {
                let lhs = f.add(&g).lp_norm(p).unwrap();
                let rhs = f.lp_norm(p).unwrap() + g.lp_norm(p).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn dft_linearity() {
        let mut rng = seeded_rng(21);
        let f = random_bandlimited::<f64>(32, &mut rng, |a, b| a.abs() < 8 && b.abs() < 8)
            .unwrap();
        let g = random_bandlimited::<f64>(32, &mut rng, |a, b| a.abs() < 8 && b.abs() < 8)
            .unwrap();
        let lhs = dft_forward(&f.add(&g));
        let f_hat = dft_forward(&f);
        let g_hat = dft_forward(&g);
        let mut worst = 0.0f64;
        for (k, z) in lhs.data().iter().enumerate() {
            worst = worst.max((z - (f_hat.data()[k] + g_hat.data()[k])).norm());
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn gaussian_mass_matches_analytic() {
        // Periodic trapezoid sums of a smooth function converge spectrally,
        // so the grid mass must agree with 2 pi sigma^2 very closely.
        let sigma = 0.05;
        let f = synth_field::<f64>(
            256,
            SynthKind::Gaussian { center: (0.5, 0.5), sigma },
        )
        .unwrap();
        let mass: f64 = f.data().iter().map(|z| z.re).sum::<f64>() / (256.0 * 256.0);
        let analytic = 2.0 * std::f64::consts::PI * sigma * sigma;
        assert!((mass - analytic).abs() / analytic < 1e-6);
    }

    #[test]
    fn bandlimited_support_is_exact() {
        let mut rng = seeded_rng(3);
        let f = random_bandlimited::<f64>(64, &mut rng, |a, b| a < 0 && b > 0).unwrap();
        let spec = dft_forward(&f);
        for (xi1, xi2) in FrequencyLattice::new(64) {
            if !(xi1 < 0 && xi2 > 0) {
                assert!(spec.coeff(xi1, xi2).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn f32_pipeline_roundtrips() {
        let mut rng = seeded_rng(2);
        let f = random_bandlimited::<f32>(32, &mut rng, |a, b| a.abs() < 8 && b.abs() < 8)
            .unwrap();
        let back = dft_inverse(&dft_forward(&f));
        assert!(f.max_abs_diff(&back) / f.max_abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(ComplexField::<f64>::zeros(48).is_err());
        assert!(ComplexField::<f64>::zeros(16).is_err());
    }
}
