//! Sublinear and maximal operators built on the multiplier engine: maximal
//! directional Hilbert transforms, truncations, segment averages, the cone
//! representation and recurrence cross-checks, square functions, and the
//! vector-valued maximal inequality probe.

pub mod average;

pub use average::{
    average_field, directional_average, max_average, max_average_of_modulus, ScaleGrid,
};

use crate::directions::{Direction, DirectionSet};
use crate::error::{CoreError, Result};
use crate::field::{dft_forward, dft_inverse, ComplexField, RealField, SpectralField};
use crate::multipliers::{all_arc_cones, cone_restrict};
use crate::scalar::Scalar;
use crate::si::si;
use num_complex::Complex;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Pointwise supremum together with which branch attained it.
#[derive(Debug, Clone)]
pub struct MaximalResult<T: Scalar> {
    /// sup over branches of the branch modulus.
    pub value: RealField<T>,
    /// Attaining branch per point, packed as (direction << 8) | scale.
    pub argmax: Vec<u32>,
}

pub fn pack_argmax(dir: usize, level: usize) -> u32 {
    debug_assert!(level < 256);
    ((dir as u32) << 8) | level as u32
}

pub fn unpack_argmax(tag: u32) -> (usize, usize) {
    ((tag >> 8) as usize, (tag & 0xff) as usize)
}

fn fold_branch<T: Scalar>(
    value: &mut RealField<T>,
    argmax: &mut [u32],
    branch: &ComplexField<T>,
    tag: u32,
) {
    value
        .data_mut()
        .par_iter_mut()
        .zip(argmax.par_iter_mut())
        .zip(branch.data().par_iter())
        .for_each(|((val, arg), z)| {
            let cand = z.norm();
            if cand > *val {
                *val = cand;
                *arg = tag;
            }
        });
}

fn plus_symbol<T: Scalar>(v: &Direction) -> impl Fn(i64, i64) -> Complex<T> + Sync + '_ {
    move |x1, x2| {
        if v.dot_ge(x1, x2, 0.0) {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }
}

fn sgn_symbol<T: Scalar>(v: &Direction) -> impl Fn(i64, i64) -> Complex<T> + Sync + '_ {
    move |x1, x2| Complex::new(T::zero(), T::lit(PI) * T::from_i8(v.dot_sgn(x1, x2)).unwrap())
}

/// H over a direction set: pointwise sup of |H_v f| (or |H_v^+ f| when
/// `plus`), branch index recorded, ties to the smaller index.
pub fn max_hilbert<T: Scalar>(
    f: &ComplexField<T>,
    set: &DirectionSet,
    plus: bool,
) -> Result<MaximalResult<T>> {
    if set.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let spec = dft_forward(f);
    let n = f.width();
    let mut value = RealField::zeros(n);
    let mut argmax = vec![0u32; n * n];
    for (j, v) in set.dirs().iter().enumerate() {
        let branch = if plus {
            dft_inverse(&spec.multiplied(plus_symbol(v)))
        } else {
            dft_inverse(&spec.multiplied(sgn_symbol(v)))
        };
        fold_branch(&mut value, &mut argmax, &branch, pack_argmax(j, 0));
    }
    Ok(MaximalResult { value, argmax })
}

/// Multiplier of the outer truncation int_{|t| > eps} f(x + t v) dt / t:
/// m_eps(sigma) = i (pi - 2 Si(2 pi eps |sigma|)) sgn(sigma).
pub fn trunc_symbol(v: &Direction, eps: f64) -> impl Fn(i64, i64) -> Complex<f64> + Sync + '_ {
    move |x1, x2| {
        let sgn = v.dot_sgn(x1, x2);
        if sgn == 0 {
            return Complex::new(0.0, 0.0);
        }
        let s = v.dot(x1, x2).abs();
        Complex::new(0.0, (PI - 2.0 * si(2.0 * PI * eps * s)) * sgn as f64)
    }
}

/// Multiplier of the complementary (inner) truncation
/// p.v. int_{|t| <= eps}: i 2 Si(2 pi eps |sigma|) sgn(sigma).
pub fn trunc_inner_symbol(
    v: &Direction,
    eps: f64,
) -> impl Fn(i64, i64) -> Complex<f64> + Sync + '_ {
    move |x1, x2| {
        let sgn = v.dot_sgn(x1, x2);
        if sgn == 0 {
            return Complex::new(0.0, 0.0);
        }
        let s = v.dot(x1, x2).abs();
        Complex::new(0.0, 2.0 * si(2.0 * PI * eps * s) * sgn as f64)
    }
}

fn lift<T: Scalar>(
    m: impl Fn(i64, i64) -> Complex<f64> + Sync,
) -> impl Fn(i64, i64) -> Complex<T> + Sync {
    move |x1, x2| {
        let z = m(x1, x2);
        Complex::new(T::lit(z.re), T::lit(z.im))
    }
}

/// Hilbert transform with the kernel truncated to |t| > eps.
pub fn trunc_hilbert_dir<T: Scalar>(
    f: &ComplexField<T>,
    v: &Direction,
    eps: f64,
) -> ComplexField<T> {
    dft_inverse(&dft_forward(f).multiplied(lift(trunc_symbol(v, eps))))
}

/// Principal-value integral over |t| <= eps (the complement).
pub fn trunc_hilbert_inner<T: Scalar>(
    f: &ComplexField<T>,
    v: &Direction,
    eps: f64,
) -> ComplexField<T> {
    dft_inverse(&dft_forward(f).multiplied(lift(trunc_inner_symbol(v, eps))))
}

/// Maximal truncation over the set and the radius grid.
pub fn max_trunc_hilbert<T: Scalar>(
    f: &ComplexField<T>,
    set: &DirectionSet,
    grid: &ScaleGrid,
) -> Result<MaximalResult<T>> {
    if set.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let spec = dft_forward(f);
    let n = f.width();
    let mut value = RealField::zeros(n);
    let mut argmax = vec![0u32; n * n];
    for (j, v) in set.dirs().iter().enumerate() {
        for idx in 0..grid.len() {
            let eps = grid.radius(idx);
            let branch = dft_inverse(&spec.multiplied(lift(trunc_symbol(v, eps))));
            fold_branch(&mut value, &mut argmax, &branch, pack_argmax(j, idx));
        }
    }
    Ok(MaximalResult { value, argmax })
}

/// Pointwise data of the Cotlar comparison
/// H_v^* f <= M_v(H_v f) + C M_v f and the least C making it hold.
#[derive(Debug, Clone)]
pub struct CotlarReport<T: Scalar> {
    pub lhs: RealField<T>,
    pub maximal_of_transform: RealField<T>,
    pub maximal_of_f: RealField<T>,
    pub fitted_c: f64,
}

pub fn cotlar_check<T: Scalar>(
    f: &ComplexField<T>,
    v: &Direction,
    grid: &ScaleGrid,
) -> Result<CotlarReport<T>> {
    let single = DirectionSet::singleton(v.clone());
    let lhs = max_trunc_hilbert(f, &single, grid)?.value;
    let hf = dft_inverse(&dft_forward(f).multiplied(sgn_symbol(v)));
    let m_hf = max_average(&hf, &single, grid)?.value;
    let m_f = max_average(f, &single, grid)?.value;
    // least C over points where M_v f carries mass
    let floor = m_f.max().to_f64().unwrap() * 1e-9;
    let mut c = 0.0f64;
    for i in 0..lhs.data().len() {
        let mf = m_f.data()[i].to_f64().unwrap();
        if mf > floor {
            let num = lhs.data()[i].to_f64().unwrap() - m_hf.data()[i].to_f64().unwrap();
            if num > 0.0 {
                c = c.max(num / mf);
            }
        }
    }
    Ok(CotlarReport { lhs, maximal_of_transform: m_hf, maximal_of_f: m_f, fitted_c: c })
}

fn check_q2_support<T: Scalar>(spec: &SpectralField<T>, n: usize) -> Result<()> {
    let mut peak = T::zero();
    for z in spec.data() {
        let v = z.norm();
        if v > peak {
            peak = v;
        }
    }
    let tol = peak.to_f64().unwrap() * 1e-12;
    for (x1, x2) in crate::field::FrequencyLattice::new(n) {
        if !(x1 < 0 && x2 > 0) && spec.coeff(x1, x2).norm().to_f64().unwrap() > tol {
            return Err(CoreError::SupportViolation(x1, x2));
        }
    }
    Ok(())
}

/// Exactness check of the cone-sum representation of H^+ over a certified
/// set: the left side takes half-plane branches, the right side rebuilds
/// every branch from per-cone restrictions and arc tails. Returns the largest
/// pointwise deviation.
pub fn representation_check<T: Scalar>(g: &ComplexField<T>, set: &DirectionSet) -> Result<f64> {
    let n = g.width();
    let spec = dft_forward(g);
    check_q2_support(&spec, n)?;
    let view = crate::directions::enumerate_jtau(set)?;

    // Left: sup over members of |H_v^+ g|.
    let lhs = max_hilbert(g, set, true)?.value;

    // Right: per-cone fields, summed into arc suffixes and tails.
    let cones = all_arc_cones(&view);
    let arc_fields: Vec<Vec<ComplexField<T>>> = cones
        .iter()
        .map(|arc| arc.iter().map(|c| cone_restrict(g, c)).collect())
        .collect();
    let arc_totals: Vec<ComplexField<T>> = arc_fields
        .iter()
        .map(|fields| {
            let mut acc = ComplexField::zeros(n).unwrap();
            for f in fields {
                acc = acc.add(f);
            }
            acc
        })
        .collect();

    let mut rhs = RealField::<T>::zeros(n);
    // tail = sum of arc totals strictly below the current arc
    let mut tail = ComplexField::zeros(n).unwrap();
    for (t, arc) in view.arcs.iter().enumerate().rev() {
        // Walk this arc's cones bottom-up; boundaries are
        // [anchor?] + members + [limit], so a member's branch is the suffix
        // that starts at the cone whose upper boundary is the member itself.
        let fields = &arc_fields[t];
        let n_bounds_extra = fields.len() - arc.members.len(); // 1 with phantom anchor, 0 without
        let mut running = tail.clone();
        for i in (0..fields.len()).rev() {
            running = running.add(&fields[i]);
            if i as isize - n_bounds_extra as isize >= 0 {
                rhs.data_mut()
                    .par_iter_mut()
                    .zip(running.data().par_iter())
                    .for_each(|(r, z)| {
                        let v = z.norm();
                        if v > *r {
                            *r = v;
                        }
                    });
            }
        }
        tail = tail.add(&arc_totals[t]);
    }

    let mut dev = 0.0f64;
    for (a, b) in lhs.data().iter().zip(rhs.data()) {
        dev = dev.max((a.to_f64().unwrap() - b.to_f64().unwrap()).abs());
    }
    Ok(dev)
}

/// Largest signed pointwise excess of H^+ over its recurrence bound
/// H^+_parent g + sup_tau H^+_{Theta_tau}(arc-restricted g).
pub fn recurrence_check<T: Scalar>(g: &ComplexField<T>, set: &DirectionSet) -> Result<f64> {
    let n = g.width();
    let spec = dft_forward(g);
    check_q2_support(&spec, n)?;
    let view = crate::directions::enumerate_jtau(set)?;

    let lhs = max_hilbert(g, set, true)?.value;

    // Parent branches.
    let mut parents: Vec<Direction> = view.arcs.iter().map(|a| a.limit.clone()).collect();
    parents.dedup();
    let mut rhs = RealField::<T>::zeros(n);
    for u in &parents {
        let branch = dft_inverse(&spec.multiplied(plus_symbol(u)));
        rhs.data_mut()
            .par_iter_mut()
            .zip(branch.data().par_iter())
            .for_each(|(r, z)| {
                let v = z.norm();
                if v > *r {
                    *r = v;
                }
            });
    }

    // sup over arcs of H^+_{Theta_tau} applied to the arc restriction of g.
    let mut arc_sup = RealField::<T>::zeros(n);
    for arc in &view.arcs {
        if arc.members.is_empty() {
            continue;
        }
        let anchor = arc.anchor.clone();
        let limit = arc.limit.clone();
        let restricted = dft_inverse(&spec.multiplied(move |x1, x2| {
            let inside = x1 < 0
                && x2 > 0
                && anchor.dot_ge(x1, x2, 0.0)
                && !limit.dot_ge(x1, x2, 0.0);
            if inside {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }));
        let sub = DirectionSet::from_dirs(arc.members.clone())?;
        let m = max_hilbert(&restricted, &sub, true)?.value;
        arc_sup
            .data_mut()
            .par_iter_mut()
            .zip(m.data().par_iter())
            .for_each(|(r, &v)| {
                if v > *r {
                    *r = v;
                }
            });
    }
    rhs.data_mut()
        .par_iter_mut()
        .zip(arc_sup.data().par_iter())
        .for_each(|(r, &v)| *r += v);

    let mut worst = f64::NEG_INFINITY;
    for (a, b) in lhs.data().iter().zip(rhs.data()) {
        worst = worst.max(a.to_f64().unwrap() - b.to_f64().unwrap());
    }
    Ok(worst)
}

/// (sum_k (sup_v |H_v^+ S_k f|)^2)^{1/2} over the given radial scales.
pub fn square_fn_cww<T: Scalar>(
    f: &ComplexField<T>,
    set: &DirectionSet,
    krange: std::ops::RangeInclusive<i32>,
) -> Result<RealField<T>> {
    if set.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let n = f.width();
    let spec = dft_forward(f);
    let mut acc = RealField::<T>::zeros(n);
    for k in krange {
        let piece = dft_inverse(&spec.multiplied(radial_symbol::<T>(k)));
        let pspec = dft_forward(&piece);
        let mut sup = RealField::<T>::zeros(n);
        for v in set.dirs() {
            let branch = dft_inverse(&pspec.multiplied(plus_symbol(v)));
            sup.data_mut()
                .par_iter_mut()
                .zip(branch.data().par_iter())
                .for_each(|(r, z)| {
                    let m = z.norm();
                    if m > *r {
                        *r = m;
                    }
                });
        }
        acc.data_mut()
            .par_iter_mut()
            .zip(sup.data().par_iter())
            .for_each(|(a, &s)| *a += s * s);
    }
    acc.data_mut().par_iter_mut().for_each(|a| *a = a.sqrt());
    Ok(acc)
}

/// (sum_k |H^+ over the set applied to S_k f|^2)^{1/2}, composed from the
/// maximal operator per scale.
pub fn square_fn_sfe<T: Scalar>(
    f: &ComplexField<T>,
    set: &DirectionSet,
    krange: std::ops::RangeInclusive<i32>,
) -> Result<RealField<T>> {
    let n = f.width();
    let mut acc = RealField::<T>::zeros(n);
    for k in krange {
        let piece = crate::multipliers::lp_radial(f, k);
        let sup = max_hilbert(&piece, set, true)?.value;
        acc.data_mut()
            .par_iter_mut()
            .zip(sup.data().par_iter())
            .for_each(|(a, &s)| *a += s * s);
    }
    acc.data_mut().par_iter_mut().for_each(|a| *a = a.sqrt());
    Ok(acc)
}

fn radial_symbol<T: Scalar>(k: i32) -> impl Fn(i64, i64) -> Complex<T> + Sync {
    let profile = crate::multipliers::BumpProfile;
    let scale = 2f64.powi(-k);
    move |x1, x2| {
        let r = ((x1 * x1 + x2 * x2) as f64).sqrt();
        Complex::new(T::lit(profile.phi(scale * r)), T::zero())
    }
}

/// Mixed norm || {g_j} ||_{L^p(l^q)} of a finite family.
pub fn lp_lq_norm<T: Scalar>(fields: &[RealField<T>], p: f64, q: f64) -> Result<T> {
    if fields.is_empty() {
        return Ok(T::zero());
    }
    if !(p > 1.0) || !(q > 1.0) {
        return Err(CoreError::BadExponent(p.min(q)));
    }
    let n = fields[0].width();
    let qe = T::lit(q);
    let mut stacked = RealField::<T>::zeros(n);
    for g in fields {
        stacked
            .data_mut()
            .par_iter_mut()
            .zip(g.data().par_iter())
            .for_each(|(s, &v)| *s += v.abs().powf(qe));
    }
    let inv_q = T::one() / qe;
    stacked.data_mut().par_iter_mut().for_each(|s| *s = s.powf(inv_q));
    stacked.lp_norm(p)
}

/// Vector-valued maximal probe: both sides of
/// ||{M_{v_j} h_j}||_{L^p(l^q)} <= K ||{h_j}||_{L^p(l^q)}.
pub fn fs_vector_maximal<T: Scalar>(
    h: &[ComplexField<T>],
    set: &DirectionSet,
    grid: &ScaleGrid,
    p: f64,
    q: f64,
) -> Result<(T, T)> {
    if h.len() != set.len() {
        return Err(CoreError::LengthMismatch { lhs: h.len(), rhs: set.len() });
    }
    let mut lhs_fields = Vec::with_capacity(h.len());
    let mut rhs_fields = Vec::with_capacity(h.len());
    for (f, v) in h.iter().zip(set.dirs()) {
        let single = DirectionSet::singleton(v.clone());
        lhs_fields.push(max_average(f, &single, grid)?.value);
        rhs_fields.push(f.modulus());
    }
    Ok((lp_lq_norm(&lhs_fields, p, q)?, lp_lq_norm(&rhs_fields, p, q)?))
}
