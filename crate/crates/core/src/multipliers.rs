//! Linear Fourier multiplier operators: half-plane and directional Hilbert
//! multipliers, sharp cone restrictions, radial and directional
//! Littlewood-Paley projections, low/high-pass cutoffs and signed cone sums.
//!
//! Sharp multipliers are exact on the integer lattice: no mollification.
//! Boundary conventions are half-open exactly as in the cone definitions,
//! resolved through [`Direction::dot_class`] so that adjacent cones tile
//! without overlap.

use crate::directions::{Direction, DirectionSet, DotClass, JTauView};
use crate::error::{CoreError, Result};
use crate::field::{apply_multiplier, ComplexField};
use crate::scalar::Scalar;
use num_complex::Complex;
use std::f64::consts::PI;

// --- smooth dyadic profiles ----------------------------------------------

/// Floor of log2 for a positive finite f64, via the exponent bits.
pub fn floor_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp != 0 {
        exp - 1023
    } else {
        // subnormal: normalize the fraction
        let frac = bits & ((1u64 << 52) - 1);
        -1075 + (63 - frac.leading_zeros() as i32)
    }
}

fn bump0(t: f64) -> f64 {
    if t <= 0.5 || t >= 2.0 {
        0.0
    } else {
        (-1.0 / (t - 0.5)).exp() * (-1.0 / (2.0 - t)).exp()
    }
}

/// Mantissa-normalize into [1, 2). Exact (power-of-two scaling).
fn to_octave(t: f64) -> f64 {
    t * 2f64.powi(-floor_log2(t))
}

/// Even smooth profile supported on 1/2 <= |t| <= 2 with the dyadic partition
/// property sum_k phi(2^-k t) = 1 for t != 0, plus the companion psi with
/// sum_k psi(2^-k t)^2 = 1. Both are normalized pointwise by the (scale
/// invariant) window sums, so the identities hold to the last bit at every
/// argument.
#[derive(Debug, Clone, Copy, Default)]
pub struct BumpProfile;

impl BumpProfile {
    pub fn phi(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 0.5 || a >= 2.0 {
            return 0.0;
        }
        let r = to_octave(a);
        let s = bump0(r) + bump0(r / 2.0);
        bump0(a) / s
    }

    pub fn psi(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 0.5 || a >= 2.0 {
            return 0.0;
        }
        let p = |x: f64| x * bump0(x);
        let r = to_octave(a);
        let s = (p(r) * p(r) + p(r / 2.0) * p(r / 2.0)).sqrt();
        p(a) / s
    }

    /// sum_{tau <= k} phi(2^-tau t): the low-pass profile used by A cutoffs.
    pub fn low_pass(&self, t: f64, k: i32) -> f64 {
        let a = t.abs();
        if a == 0.0 {
            return 0.0;
        }
        let top = floor_log2(a) + 1; // phi(2^-tau a) = 0 for tau > top
        if k >= top {
            return 1.0; // entire active window included: exact partition
        }
        let mut acc = 0.0;
        let mut tau = top - 2; // at most scales top-1, top are active
        while tau <= k {
            acc += self.phi(a * 2f64.powi(-tau));
            tau += 1;
        }
        acc
    }
}

// --- cones ----------------------------------------------------------------

/// Frequency cone in the second quadrant between two direction normals:
/// xi.keep >= 0, xi.drop < 0, xi_1 < 0, xi_2 > 0.
#[derive(Debug, Clone)]
pub struct ConeRegion {
    /// Boundary whose half-plane is kept (the larger angle).
    pub keep: Direction,
    /// Boundary excluded from the cone (the smaller angle).
    pub drop: Direction,
}

impl ConeRegion {
    pub fn contains(&self, xi1: i64, xi2: i64) -> bool {
        xi1 < 0
            && xi2 > 0
            && self.keep.dot_class(xi1, xi2, 0.0) != DotClass::Neg
            && self.drop.dot_class(xi1, xi2, 0.0) == DotClass::Neg
    }
}

/// The singly-indexed cone family of a direction set: one cone below each
/// member, the last one bounded by the root. Their union is
/// {xi_1 < 0, xi_2 > 0, xi.v_1 >= 0}.
pub fn cones_of(set: &DirectionSet) -> Result<Vec<ConeRegion>> {
    if set.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let dirs = set.dirs();
    let mut cones = Vec::with_capacity(dirs.len());
    for (i, d) in dirs.iter().enumerate() {
        let drop = if i + 1 < dirs.len() { dirs[i + 1].clone() } else { Direction::root() };
        cones.push(ConeRegion { keep: d.clone(), drop });
    }
    Ok(cones)
}

/// Cones of one complementary arc of the (j, tau) view: from the arc's upper
/// anchor through its members down to the arc's limit.
pub fn arc_cones(view: &JTauView, tau_index: usize) -> Vec<ConeRegion> {
    let arc = &view.arcs[tau_index];
    let mut bounds: Vec<Direction> = Vec::with_capacity(arc.members.len() + 2);
    bounds.push(arc.anchor.clone());
    for m in &arc.members {
        if *m != arc.anchor {
            bounds.push(m.clone());
        }
    }
    bounds.push(arc.limit.clone());
    bounds
        .windows(2)
        .map(|w| ConeRegion { keep: w[0].clone(), drop: w[1].clone() })
        .collect()
}

/// All cones of the doubly-indexed family, arc by arc (clockwise).
pub fn all_arc_cones(view: &JTauView) -> Vec<Vec<ConeRegion>> {
    (0..view.arcs.len()).map(|t| arc_cones(view, t)).collect()
}

// --- multiplier symbols ----------------------------------------------------

/// 1_{[tau, inf)}(xi . v).
pub fn half_plane_symbol(v: &Direction, tau: f64) -> impl Fn(i64, i64) -> f64 + Sync + '_ {
    move |x1, x2| if v.dot_ge(x1, x2, tau) { 1.0 } else { 0.0 }
}

/// i pi sgn(xi . v), sgn(0) = 0.
pub fn hilbert_symbol(v: &Direction) -> impl Fn(i64, i64) -> Complex<f64> + Sync + '_ {
    move |x1, x2| Complex::new(0.0, PI * v.dot_sgn(x1, x2) as f64)
}

// --- operator fronts -------------------------------------------------------

/// Half-plane projection H_v^{+tau}: multiplier 1_{[tau, inf)}(xi . v).
pub fn half_plane<T: Scalar>(f: &ComplexField<T>, v: &Direction, tau: f64) -> ComplexField<T> {
    apply_multiplier(f, |x1, x2| {
        if v.dot_ge(x1, x2, tau) {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Directional Hilbert transform: multiplier i pi sgn(xi . v).
pub fn hilbert_dir<T: Scalar>(f: &ComplexField<T>, v: &Direction) -> ComplexField<T> {
    apply_multiplier(f, |x1, x2| {
        Complex::new(T::zero(), T::lit(PI) * T::from_i8(v.dot_sgn(x1, x2)).unwrap())
    })
}

/// Sharp restriction to a frequency cone.
pub fn cone_restrict<T: Scalar>(f: &ComplexField<T>, cone: &ConeRegion) -> ComplexField<T> {
    apply_multiplier(f, |x1, x2| {
        if cone.contains(x1, x2) {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Index of the cone containing xi among the singly-indexed family of a
/// clockwise set, or None. Binary search over the nested >= classifications.
pub fn cone_index(dirs: &[Direction], xi1: i64, xi2: i64) -> Option<usize> {
    if xi1 >= 0 || xi2 <= 0 {
        return None;
    }
    // ge0 holds on a prefix of the clockwise (descending-angle) list.
    if !dirs[0].dot_ge(xi1, xi2, 0.0) {
        return None;
    }
    let mut lo = 0usize; // ge0 true here
    let mut hi = dirs.len(); // one past the last candidate
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if dirs[mid].dot_ge(xi1, xi2, 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Sum of eps_j R_j f with one sign per cone of the singly-indexed family.
pub fn signed_cone_sum<T: Scalar>(
    f: &ComplexField<T>,
    set: &DirectionSet,
    signs: &[i8],
) -> Result<ComplexField<T>> {
    if signs.len() != set.len() {
        return Err(CoreError::SignCountMismatch { expected: set.len(), got: signs.len() });
    }
    if set.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let dirs = set.dirs();
    Ok(apply_multiplier(f, |x1, x2| {
        let s = cone_index(dirs, x1, x2).map(|j| signs[j]).unwrap_or(0);
        Complex::new(T::from_i8(s).unwrap(), T::zero())
    }))
}

/// Radial Littlewood-Paley projection S_k: multiplier phi(2^-k |xi|).
pub fn lp_radial<T: Scalar>(f: &ComplexField<T>, k: i32) -> ComplexField<T> {
    let profile = BumpProfile;
    let scale = 2f64.powi(-k);
    apply_multiplier(f, move |x1, x2| {
        let r = ((x1 * x1 + x2 * x2) as f64).sqrt();
        Complex::new(T::lit(profile.phi(scale * r)), T::zero())
    })
}

/// Smallest k with S_k supported inside the lattice of an N x N grid
/// partnered with the largest k that still sees a lattice point; S_k with
/// k in this range reproduce every nonzero frequency.
pub fn radial_scale_range(n: usize) -> std::ops::RangeInclusive<i32> {
    let max_r = (n as f64 / 2.0) * 2f64.sqrt();
    0..=(max_r.log2().ceil() as i32)
}

/// Directional Littlewood-Paley flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionalKind {
    /// phi(2^-k xi . e_theta)
    Phi,
    /// psi(2^-k xi . e_theta)
    Psi,
    /// psi^2: the composition Psi o Psi
    PsiTilde,
    /// low pass sum_{tau <= k} phi(2^-tau xi . e_theta)
    LowPass,
    /// Id minus the low pass
    HighPass,
}

/// Directional projection along e_theta at scale k.
pub fn lp_directional<T: Scalar>(
    f: &ComplexField<T>,
    theta: &Direction,
    k: i32,
    kind: DirectionalKind,
) -> ComplexField<T> {
    let profile = BumpProfile;
    let scale = 2f64.powi(-k);
    apply_multiplier(f, move |x1, x2| {
        let s = theta.dot(x1, x2);
        let v = match kind {
            DirectionalKind::Phi => profile.phi(scale * s),
            DirectionalKind::Psi => profile.psi(scale * s),
            DirectionalKind::PsiTilde => {
                let p = profile.psi(scale * s);
                p * p
            }
            DirectionalKind::LowPass => {
                if s == 0.0 {
                    0.0
                } else {
                    profile.low_pass(s, k)
                }
            }
            DirectionalKind::HighPass => {
                if s == 0.0 {
                    1.0
                } else {
                    1.0 - profile.low_pass(s, k)
                }
            }
        };
        Complex::new(T::lit(v), T::zero())
    })
}

/// Odd/even split of the singly-indexed cone sums of a certified 1-lacunary
/// set: (sum over odd j of R_j f, sum over even j). 1-based cone indices.
pub fn odd_even_split<T: Scalar>(
    f: &ComplexField<T>,
    set: &DirectionSet,
) -> Result<(ComplexField<T>, ComplexField<T>)> {
    match set.certificate() {
        Some(c) if c.order == 1 => {}
        Some(_) => return Err(CoreError::Config("odd_even_split needs an order-1 set".into())),
        None => return Err(CoreError::MissingCertificate),
    }
    let dirs = set.dirs();
    let odd = apply_multiplier(f, |x1, x2| {
        let keep = matches!(cone_index(dirs, x1, x2), Some(j) if j % 2 == 0);
        Complex::new(if keep { T::one() } else { T::zero() }, T::zero())
    });
    let even = apply_multiplier(f, |x1, x2| {
        let keep = matches!(cone_index(dirs, x1, x2), Some(j) if j % 2 == 1);
        Complex::new(if keep { T::one() } else { T::zero() }, T::zero())
    });
    Ok((odd, even))
}
