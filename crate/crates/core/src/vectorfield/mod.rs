//! Piecewise-constant vector fields with lacunary range, built from chains of
//! Lipschitz scale functions, and the truncated Hilbert transform along them.
//!
//! Each point's direction is the product of e^{2 pi i 2^{floor(log2 lambda_j)}}
//! over the chain, so the field takes finitely many values; the floor is read
//! off the float exponent, never from a rounded logarithm.

pub mod expr;

use crate::directions::{Direction, DirectionSet, LacunaryTree, TreeNode};
use crate::dyadic::{Dyadic, RatioQ};
use crate::error::{CoreError, Result};
use crate::field::{apply_multiplier, ComplexField, RealField};
use crate::multipliers::floor_log2;
use crate::operators::{
    max_average, max_average_of_modulus, trunc_hilbert_inner, ScaleGrid,
};
use crate::scalar::Scalar;
use expr::Expr;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A closed-form scalar field with declared range (0, 1] and a declared
/// Lipschitz bound, validated against grid samples when a field is built.
#[derive(Debug, Clone)]
pub struct ScalarLipschitzField {
    pub expr: Expr,
    pub text: String,
    pub lip: f64,
}

impl ScalarLipschitzField {
    pub fn parse(text: &str, lip: f64) -> Result<Self> {
        Ok(ScalarLipschitzField { expr: expr::parse(text)?, text: text.to_string(), lip })
    }

    pub fn sample(&self, n: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        let mut out = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                out.push(self.expr.eval(ix as f64 * h, iy as f64 * h));
            }
        }
        out
    }
}

/// One value of the field: its exponent tuple k_1 < ... < k_D and the
/// direction with angle sum 2^{-k_j}.
#[derive(Debug, Clone)]
pub struct RangeClass {
    pub exponents: Vec<u16>,
    pub dir: Direction,
}

/// The derived piecewise-constant field: a class id per grid point and the
/// ordered list of realized classes.
#[derive(Debug, Clone)]
pub struct VectorFieldLac {
    n: usize,
    depth: usize,
    lambdas: Vec<ScalarLipschitzField>,
    class_of: Vec<u32>,
    classes: Vec<RangeClass>,
    exponent_maps: Vec<Vec<u16>>,
}

/// Validate the scale chain on an n x n grid and derive the field.
pub fn build_vd(n: usize, lams: &[ScalarLipschitzField]) -> Result<VectorFieldLac> {
    if lams.is_empty() {
        return Err(CoreError::Config("need at least one scale function".into()));
    }
    let h = 1.0 / n as f64;
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(lams.len());
    for (j, lam) in lams.iter().enumerate() {
        if !(lam.lip <= 1.0 && lam.lip >= 0.0) {
            return Err(CoreError::Config(format!(
                "lambda_{} declares Lipschitz bound {} > 1",
                j + 1,
                lam.lip
            )));
        }
        let vals = lam.sample(n);
        for (idx, &v) in vals.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                return Err(CoreError::ValueOutOfRange {
                    j: j + 1,
                    x: idx % n,
                    y: idx / n,
                    val: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        // sampled Lipschitz quotient against the declared bound
        let bound = lam.lip * (1.0 + 1e-6) * h;
        for iy in 0..n {
            for ix in 0..n {
                let here = vals[iy * n + ix];
                let right = vals[iy * n + (ix + 1) % n];
                let up = vals[((iy + 1) % n) * n + ix];
                let d = (here - right).abs().max((here - up).abs());
                if d > bound {
                    return Err(CoreError::LipschitzViolation {
                        x: ix,
                        y: iy,
                        got: d / h,
                        declared: lam.lip,
                    });
                }
            }
        }
        if j > 0 {
            let prev = &samples[j - 1];
            for (idx, &v) in vals.iter().enumerate() {
                let cap = prev[idx] * 2f64.powi(-5);
                if v > cap {
                    return Err(CoreError::ChainViolation {
                        j: j + 1,
                        jm1: j,
                        x: idx % n,
                        y: idx / n,
                        val: v,
                        bound: cap,
                    });
                }
            }
        }
        samples.push(vals);
    }

    let depth = lams.len();
    let mut exponent_maps: Vec<Vec<u16>> = Vec::with_capacity(depth);
    for vals in &samples {
        exponent_maps.push(vals.iter().map(|&v| (-floor_log2(v)) as u16).collect());
    }
    let mut key = vec![0u16; depth];
    let mut classes_map: BTreeMap<Vec<u16>, u32> = BTreeMap::new();
    let mut class_of = vec![0u32; n * n];
    for idx in 0..n * n {
        for (j, m) in exponent_maps.iter().enumerate() {
            key[j] = m[idx];
        }
        let next = classes_map.len() as u32;
        let id = *classes_map.entry(key.clone()).or_insert(next);
        class_of[idx] = id;
    }
    // Reindex classes in exponent-tuple order so downstream sums are
    // schedule-independent.
    let mut classes: Vec<RangeClass> = Vec::with_capacity(classes_map.len());
    let mut remap = vec![0u32; classes_map.len()];
    for (new_id, (tuple, old_id)) in classes_map.iter().enumerate() {
        remap[*old_id as usize] = new_id as u32;
        let mut angle = Dyadic::zero();
        for &k in tuple {
            angle = angle.add(&Dyadic::pow2(-(k as i32)));
        }
        classes.push(RangeClass { exponents: tuple.clone(), dir: Direction::from_dyadic(angle) });
    }
    for c in &mut class_of {
        *c = remap[*c as usize];
    }
    Ok(VectorFieldLac { n, depth, lambdas: lams.to_vec(), class_of, classes, exponent_maps })
}

impl VectorFieldLac {
    pub fn grid_n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn classes(&self) -> &[RangeClass] {
        &self.classes
    }

    pub fn class_of(&self) -> &[u32] {
        &self.class_of
    }

    pub fn direction_at(&self, ix: usize, iy: usize) -> &Direction {
        &self.classes[self.class_of[iy * self.n + ix] as usize].dir
    }

    /// j_theta-style exponent map of level j (1-based): x -> -floor(log2 lambda_j(x)).
    pub fn exponent_map(&self, j: usize) -> &[u16] {
        &self.exponent_maps[j - 1]
    }

    /// The level sets as (class id -> point indices); a partition of the grid.
    pub fn level_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.classes.len()];
        for (idx, &c) in self.class_of.iter().enumerate() {
            sets[c as usize].push(idx);
        }
        sets
    }

    /// The intermediate field built from the first d scale functions.
    pub fn prefix(&self, d: usize) -> Result<VectorFieldLac> {
        build_vd(self.n, &self.lambdas[..d])
    }

    /// The range as a certified direction set of the field's depth. The
    /// exponent gaps of at least 5 make every ladder ratio at most 1/2.
    pub fn range_set(&self) -> Result<DirectionSet> {
        fn grow(prefix_angle: &Dyadic, tuples: &[&[u16]], level: usize, depth: usize) -> Vec<TreeNode> {
            let mut groups: BTreeMap<u16, Vec<&[u16]>> = BTreeMap::new();
            for t in tuples {
                groups.entry(t[level]).or_default().push(t);
            }
            groups
                .into_iter()
                .map(|(k, group)| {
                    let angle = prefix_angle.add(&Dyadic::pow2(-(k as i32)));
                    let children = if level + 1 < depth {
                        grow(&angle, &group, level + 1, depth)
                    } else {
                        Vec::new()
                    };
                    TreeNode { dir: Direction::from_dyadic(angle), children }
                })
                .collect()
        }
        let tuples: Vec<&[u16]> = self.classes.iter().map(|c| c.exponents.as_slice()).collect();
        let root = TreeNode {
            dir: Direction::root(),
            children: grow(&Dyadic::zero(), &tuples, 0, self.depth),
        };
        let tree = LacunaryTree { lambda: RatioQ::new(1, 2), order: self.depth as u32, root };
        let dirs = crate::directions::flatten_leaves(&tree);
        let mut set = DirectionSet::from_dirs(dirs)?;
        set_certificate(&mut set, tree);
        Ok(set)
    }
}

// DirectionSet keeps its certificate private; rebuilding through JSON would
// be wasteful, so the directions module exposes this crate-internal hook.
fn set_certificate(set: &mut DirectionSet, tree: LacunaryTree) {
    crate::directions::attach_certificate(set, tree);
}

/// H along the field, kernel truncated to |t| <= eps: the field is piecewise
/// constant, so the transform is assembled from one inner-truncation
/// multiplier per range value, in exponent-tuple order.
pub fn trunc_hilbert_field<T: Scalar>(
    f: &ComplexField<T>,
    vf: &VectorFieldLac,
    eps: f64,
) -> Result<ComplexField<T>> {
    if f.width() != vf.n {
        return Err(CoreError::DimensionMismatch(format!(
            "field {} vs vector field {}",
            f.width(),
            vf.n
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CoreError::Config(format!("eps must be positive, got {eps}")));
    }
    let n = vf.n;
    let mut out = vec![Complex::new(T::zero(), T::zero()); n * n];
    for (id, class) in vf.classes.iter().enumerate() {
        let piece = trunc_hilbert_inner(f, &class.dir, eps);
        for (idx, z) in out.iter_mut().enumerate() {
            if vf.class_of[idx] == id as u32 {
                *z = piece.data()[idx];
            }
        }
    }
    ComplexField::from_data(n, out)
}

/// The second-quadrant cone xi_2 > -2 xi_1, xi_1 < -2^6, xi_2 > 0.
pub fn gamma0_contains(xi1: i64, xi2: i64) -> bool {
    xi2 > -2 * xi1 && xi1 < -64 && xi2 > 0
}

/// Sharp restriction to the cone (exact integer membership).
pub fn gamma0_restrict<T: Scalar>(f: &ComplexField<T>) -> ComplexField<T> {
    apply_multiplier(f, |x1, x2| {
        if gamma0_contains(x1, x2) {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Worst |xi| / (xi . v_perp) over random cone frequencies and random nearly
/// horizontal directions (theta in [0, 2^-5]). The geometry promises <= 2.
pub fn almostradial_check(samples: usize, seed: u64) -> f64 {
    let mut rng = crate::rng::seeded_rng(seed);
    let mut worst = 0.0f64;
    let mut taken = 0usize;
    while taken < samples {
        let xi1 = -rng.gen_range(65i64..=1 << 20);
        let xi2 = rng.gen_range(1i64..=1 << 22);
        if !gamma0_contains(xi1, xi2) {
            continue;
        }
        taken += 1;
        let theta = rng.gen_range(0.0..=2f64.powi(-5));
        let v = Direction::from_f64(theta);
        let (px, py) = v.perp_unit();
        let dot = xi1 as f64 * px + xi2 as f64 * py;
        let ratio = ((xi1 * xi1 + xi2 * xi2) as f64).sqrt() / dot;
        if ratio > worst {
            worst = ratio;
        }
    }
    worst
}

/// Least C with |H_{v,1} f| <= C (M_vert M_horiz f + M_range f) for a field
/// with spectrum projected off Gamma_0 and its reflection.
pub fn pointwise_reduction_check<T: Scalar>(
    f: &ComplexField<T>,
    vf: &VectorFieldLac,
) -> Result<f64> {
    let proj = apply_multiplier(f, |x1, x2| {
        if gamma0_contains(x1, x2) || gamma0_contains(-x1, -x2) {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        }
    });
    let lhs = trunc_hilbert_field(&proj, vf, 1.0)?;
    let n = proj.width();
    let grid = ScaleGrid::dyadic(n);
    let horiz = DirectionSet::singleton(Direction::root());
    let vert = DirectionSet::singleton(Direction::from_dyadic(Dyadic::new(1, 2)));
    let inner = max_average(&proj, &horiz, &grid)?.value;
    let outer = max_average_of_modulus(&inner, &vert, &grid)?.value;
    let m_range = max_average(&proj, &vf.range_set()?, &grid)?.value;
    let mut rhs = RealField::<T>::zeros(n);
    for ((r, a), b) in rhs.data_mut().iter_mut().zip(outer.data()).zip(m_range.data()) {
        *r = *a + *b;
    }
    let floor = rhs.max().to_f64().unwrap() * 1e-9;
    let mut c = 0.0f64;
    for (z, r) in lhs.data().iter().zip(rhs.data()) {
        let rv = r.to_f64().unwrap();
        if rv > floor {
            c = c.max(z.norm().to_f64().unwrap() / rv);
        }
    }
    Ok(c)
}

/// On-disk description: the depth and one expression per scale function.
#[derive(Serialize, Deserialize)]
pub struct VectorFieldSpec {
    pub d: usize,
    pub lambdas: Vec<LambdaSpec>,
}

#[derive(Serialize, Deserialize)]
pub struct LambdaSpec {
    pub expr: String,
    #[serde(default = "default_lip")]
    pub lip: f64,
}

fn default_lip() -> f64 {
    1.0
}

pub fn parse_spec(json: &str) -> Result<Vec<ScalarLipschitzField>> {
    let spec: VectorFieldSpec = serde_json::from_str(json)?;
    if spec.d != spec.lambdas.len() {
        return Err(CoreError::Config(format!(
            "declared depth {} but {} scale functions",
            spec.d,
            spec.lambdas.len()
        )));
    }
    spec.lambdas
        .iter()
        .map(|l| ScalarLipschitzField::parse(&l.expr, l.lip))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::verify_order;
    use crate::field::{synth_field, SynthKind};
    use num_complex::Complex64;

    fn lam(text: &str) -> ScalarLipschitzField {
        ScalarLipschitzField::parse(text, 1.0).unwrap()
    }

    #[test]
    fn constant_chain_gives_a_single_class() {
        let lams = vec![lam("2^-6"), lam("2^-11"), lam("2^-16")];
        let vf = build_vd(64, &lams).unwrap();
        assert_eq!(vf.classes().len(), 1);
        let mut want = Dyadic::zero();
        for k in [6, 11, 16] {
            want = want.add(&Dyadic::pow2(-k));
        }
        assert_eq!(*vf.classes()[0].dir.exact(), want);
        assert_eq!(vf.depth(), 3);
    }

    #[test]
    fn clamped_distance_enumerates_floor_exponents() {
        let lams = vec![lam("clamp(dist(0.5, 0.5), 2^-10, 2^-6)")];
        let vf = build_vd(64, &lams).unwrap();
        // Oracle: recompute the exponent set straight from the samples.
        let mut expect = std::collections::BTreeSet::new();
        for v in lams[0].sample(64) {
            expect.insert((-v.log2().floor()) as u16);
        }
        let got: std::collections::BTreeSet<u16> =
            vf.classes().iter().map(|c| c.exponents[0]).collect();
        assert_eq!(got, expect);
        for k in &got {
            assert!((6..=10).contains(k));
        }
    }

    #[test]
    fn range_lies_in_the_product_set_and_verifies() {
        let lams = vec![
            lam("clamp(dist(0.5, 0.5), 2^-8, 2^-6)"),
            lam("clamp(dist(0.25, 0.75), 2^-15, 2^-13) * 0.5"),
        ];
        let vf = build_vd(64, &lams).unwrap();
        assert!(vf.classes().len() > 2);
        for class in vf.classes() {
            // strictly increasing exponents with the 2^-5 chain gap
            assert!(class.exponents.windows(2).all(|w| w[1] >= w[0] + 5));
            let mut want = Dyadic::zero();
            for &k in &class.exponents {
                want = want.add(&Dyadic::pow2(-(k as i32)));
            }
            assert_eq!(*class.dir.exact(), want);
        }
        let range = vf.range_set().unwrap();
        assert_eq!(verify_order(&range).unwrap() as usize, vf.depth());
        // level sets partition the grid
        let sets = vf.level_sets();
        let total: usize = sets.iter().map(Vec::len).sum();
        assert_eq!(total, 64 * 64);
        // intermediate field of depth 1 exists and is coarser
        let v1 = vf.prefix(1).unwrap();
        assert!(v1.classes().len() <= vf.classes().len());
    }

    #[test]
    fn chain_and_regularity_violations_are_reported() {
        // chain: lambda_2 too large relative to lambda_1 somewhere
        let bad = vec![lam("2^-6"), lam("clamp(dist(0.5,0.5), 2^-11, 2^-9)")];
        match build_vd(64, &bad) {
            Err(CoreError::ChainViolation { j, .. }) => assert_eq!(j, 2),
            other => panic!("expected chain violation, got {other:?}"),
        }
        // range: zero is not allowed
        match build_vd(64, &[lam("clamp(x1, 0, 0.5)")]) {
            Err(CoreError::ValueOutOfRange { .. }) => {}
            other => panic!("expected range violation, got {other:?}"),
        }
        // Lipschitz: x1 jumps at the periodic seam
        match build_vd(64, &[lam("0.5 * x1 + 0.25")]) {
            Err(CoreError::LipschitzViolation { x, .. }) => assert_eq!(x, 63),
            other => panic!("expected Lipschitz violation, got {other:?}"),
        }
    }

    #[test]
    fn constant_field_matches_single_direction_truncation() {
        let vf = build_vd(64, &[lam("2^-6")]).unwrap();
        let f = {
            let mut rng = crate::rng::seeded_rng(71);
            crate::field::random_bandlimited::<f64>(64, &mut rng, |a, b| {
                a.abs() <= 10 && b.abs() <= 10
            })
            .unwrap()
        };
        let through_field = trunc_hilbert_field(&f, &vf, 0.3).unwrap();
        let direct = trunc_hilbert_inner(&f, &vf.classes()[0].dir, 0.3);
        assert!(through_field.max_abs_diff(&direct) < 1e-13);
        // odd kernel kills constants
        let ones =
            ComplexField::<f64>::from_fn(64, |_, _| Complex64::new(2.5, 0.0)).unwrap();
        assert!(trunc_hilbert_field(&ones, &vf, 0.3).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn field_transform_is_linear_and_translation_covariant() {
        let vf = build_vd(64, &[lam("2^-7")]).unwrap();
        let mut rng = crate::rng::seeded_rng(73);
        let f = crate::field::random_bandlimited::<f64>(64, &mut rng, |a, b| {
            a.abs() <= 9 && b.abs() <= 9
        })
        .unwrap();
        let g = crate::field::random_bandlimited::<f64>(64, &mut rng, |a, b| {
            a.abs() <= 9 && b.abs() <= 9
        })
        .unwrap();
        let lin = trunc_hilbert_field(&f.add(&g), &vf, 0.5).unwrap();
        let sum = trunc_hilbert_field(&f, &vf, 0.5)
            .unwrap()
            .add(&trunc_hilbert_field(&g, &vf, 0.5).unwrap());
        assert!(lin.max_abs_diff(&sum) < 1e-12 * f.max_abs().max(1.0));

        // constant field is invariant under every lattice shift
        let shift = |field: &ComplexField<f64>, sx: usize, sy: usize| {
            let n = field.width();
            ComplexField::from_fn(n, |x1, x2| {
                let ix = ((x1 * n as f64).round() as usize + sx) % n;
                let iy = ((x2 * n as f64).round() as usize + sy) % n;
                field.at(ix, iy)
            })
            .unwrap()
        };
        let lhs = trunc_hilbert_field(&shift(&f, 5, 9), &vf, 0.5).unwrap();
        let rhs = shift(&trunc_hilbert_field(&f, &vf, 0.5).unwrap(), 5, 9);
        assert!(lhs.max_abs_diff(&rhs) < 1e-11 * f.max_abs().max(1.0));
    }

    #[test]
    fn two_value_field_matches_brute_force_quadrature() {
        // 32^2 grid, two range values; f is a short explicit Fourier sum so
        // the oracle can evaluate it exactly at off-grid points.
        let n = 32usize;
        let coeffs: Vec<((i64, i64), Complex64)> = vec![
            ((3, 1), Complex64::new(0.8, 0.1)),
            ((-2, 4), Complex64::new(-0.3, 0.55)),
            ((1, -3), Complex64::new(0.2, -0.7)),
            ((-4, -2), Complex64::new(0.45, 0.3)),
            ((2, 2), Complex64::new(-0.6, 0.2)),
            ((0, 4), Complex64::new(0.15, -0.25)),
        ];
        let eval = |x1: f64, x2: f64| -> Complex64 {
            let mut z = Complex64::new(0.0, 0.0);
            for ((k1, k2), c) in &coeffs {
                let ph = 2.0 * std::f64::consts::PI * (*k1 as f64 * x1 + *k2 as f64 * x2);
                z += c * Complex64::new(ph.cos(), ph.sin());
            }
            z
        };
        let f = ComplexField::from_fn(n, eval).unwrap();
        let vf = build_vd(n, &[lam("clamp(dist(0.5, 0.5), 0.011, 0.02)")]).unwrap();
        assert_eq!(vf.classes().len(), 2);
        let eps = 1.0;
        let got = trunc_hilbert_field(&f, &vf, eps).unwrap();

        // p.v. int_{|t|<=eps} f(x+tv)/t dt with odd-symmetric midpoint pairs.
        let m = 6000usize;
        let delta = eps / m as f64;
        let mut worst = 0.0f64;
        for iy in (0..n).step_by(3) {
            for ix in (0..n).step_by(3) {
                let (x1, x2) = (ix as f64 / n as f64, iy as f64 / n as f64);
                let (c, s) = vf.direction_at(ix, iy).unit();
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let t = (i as f64 + 0.5) * delta;
                    let plus = eval(x1 + t * c, x2 + t * s);
                    let minus = eval(x1 - t * c, x2 - t * s);
                    acc += (plus - minus) / t;
                }
                acc *= delta;
                let diff = (got.at(ix, iy) - acc).norm();
                worst = worst.max(diff);
            }
        }
        assert!(
            worst <= 1e-3 * got.max_abs(),
            "worst {worst} vs scale {}",
            got.max_abs()
        );
    }

    #[test]
    fn gamma0_membership_and_idempotence() {
        assert!(gamma0_contains(-100, 300));
        assert!(!gamma0_contains(-100, 150)); // below the slope-2 ray
        assert!(!gamma0_contains(-30, 200)); // xi_1 not beyond -2^6
        let inw = synth_field::<f64>(512, SynthKind::PlaneWave { xi: (-80, 70) }).unwrap();
        assert!(gamma0_contains(-80, 70) == false);
        assert!(gamma0_restrict(&inw).max_abs() < 1e-12);
        let keep = synth_field::<f64>(512, SynthKind::PlaneWave { xi: (-70, 160) }).unwrap();
        assert!(gamma0_contains(-70, 160));
        let once = gamma0_restrict(&keep);
        assert!(once.max_abs_diff(&keep) < 1e-12);
        assert!(gamma0_restrict(&once).max_abs_diff(&once) < 1e-12);
    }

    #[test]
    fn almost_radial_bound_holds() {
        let worst = almostradial_check(20_000, 99);
        assert!(worst <= 2.0, "worst ratio {worst}");
        // the extreme sits on the slope-2 boundary at theta = 0
        let mut boundary = 0.0f64;
        for k in 1..2000i64 {
            let (xi1, xi2) = (-65 - k, 2 * (65 + k) + 1);
            if !gamma0_contains(xi1, xi2) {
                continue;
            }
            let v = Direction::root();
            let (px, py) = v.perp_unit();
            let dot = xi1 as f64 * px + xi2 as f64 * py;
            boundary = boundary.max(((xi1 * xi1 + xi2 * xi2) as f64).sqrt() / dot);
        }
        assert!(boundary <= 2.0);
        assert!((boundary - (1.25f64).sqrt()).abs() < 0.01, "boundary {boundary}");
        assert!(worst <= boundary + 1e-9);
    }

    #[test]
    fn pointwise_reduction_constant_is_tame() {
        let n = 128usize;
        let vf = build_vd(
            n,
            &[lam("clamp(dist(0.5, 0.5), 2^-17, 2^-15)")],
        )
        .unwrap();
        let zero = ComplexField::<f64>::zeros(n).unwrap();
        assert_eq!(pointwise_reduction_check(&zero, &vf).unwrap(), 0.0);
        let bump = synth_field::<f64>(n, SynthKind::Gaussian { center: (0.4, 0.6), sigma: 0.07 })
            .unwrap();
        let c = pointwise_reduction_check(&bump, &vf).unwrap();
        assert!(c.is_finite() && c <= 50.0, "fitted C = {c}");
    }

    #[test]
    fn spec_files_roundtrip() {
        let json = r#"{"d": 2, "lambdas": [
            {"expr": "clamp(dist(0.5,0.5), 2^-8, 2^-6)", "lip": 1.0},
            {"expr": "clamp(dist(0.5,0.5), 2^-14, 2^-12) * 2^-1"}
        ]}"#;
        let lams = parse_spec(json).unwrap();
        assert_eq!(lams.len(), 2);
        let vf = build_vd(64, &lams).unwrap();
        assert_eq!(vf.depth(), 2);
        assert!(parse_spec(r#"{"d": 3, "lambdas": []}"#).is_err());
    }
}
