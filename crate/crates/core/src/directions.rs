//! Direction sets in the first quadrant, lacunarity certificates and their
//! combinatorics.
//!
//! Angles are measured in revolutions and confined to [0, 1/4]. Sets are kept
//! in clockwise order (strictly decreasing angle) and certified sets carry a
//! recursive tree: every node owns a geometric ladder of children converging
//! clockwise onto it from above, the ladder ratio bounded by the certificate
//! constant. Leaves of the tree are the set members; interior nodes are the
//! ancestor generations. Generated angles are exact dyadic rationals so all
//! separation and ratio tests below are exact integer comparisons.

use crate::dyadic::{Dyadic, RatioQ};
use crate::error::{CoreError, Result, VerifyFailure};
use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Result of classifying the sign of xi . v on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotClass {
    Neg,
    Zero,
    Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpecialAngle {
    None,
    Zero,
    Eighth,
    Quarter,
}

/// A unit direction e^{2 pi i theta}, theta in [0, 1/4] revolutions.
///
/// Carries the exact dyadic angle next to a float mirror; the mirror feeds
/// trigonometry, the dyadic feeds ordering and certificate checks.
#[derive(Debug, Clone)]
pub struct Direction {
    exact: Dyadic,
    theta: f64,
    cos: f64,
    sin: f64,
    special: SpecialAngle,
}

impl Direction {
    pub fn from_dyadic(exact: Dyadic) -> Self {
        let theta = exact.to_f64();
        let (sin, cos) = (2.0 * std::f64::consts::PI * theta).sin_cos();
        let special = if exact.is_zero() {
            SpecialAngle::Zero
        } else if exact == Dyadic::new(1, 3) {
            SpecialAngle::Eighth
        } else if exact == Dyadic::new(1, 2) {
            SpecialAngle::Quarter
        } else {
            SpecialAngle::None
        };
        Direction { exact, theta, cos, sin, special }
    }

    /// Every finite f64 is itself a dyadic rational, so the exact mirror is
    /// faithful even for angles that did not come from a generator.
    pub fn from_f64(theta: f64) -> Self {
        Direction::from_dyadic(dyadic_of_f64(theta))
    }

    pub fn root() -> Self {
        Direction::from_dyadic(Dyadic::zero())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn exact(&self) -> &Dyadic {
        &self.exact
    }

    /// Unit vector components (cos 2 pi theta, sin 2 pi theta).
    pub fn unit(&self) -> (f64, f64) {
        (self.cos, self.sin)
    }

    /// Components of the perpendicular e^{2 pi i (theta + 1/4)}.
    pub fn perp_unit(&self) -> (f64, f64) {
        (-self.sin, self.cos)
    }

    /// xi . v in f64.
    pub fn dot(&self, xi1: i64, xi2: i64) -> f64 {
        xi1 as f64 * self.cos + xi2 as f64 * self.sin
    }

    /// Classify the sign of xi . v - tau on the lattice.
    ///
    /// Axis and diagonal angles are resolved in integer arithmetic; everywhere
    /// else a 1e-13 dead band (relative to |xi1| + |xi2|) maps to `Zero`,
    /// which consumers treat as the >= side.
    pub fn dot_class(&self, xi1: i64, xi2: i64, tau: f64) -> DotClass {
        if tau == 0.0 {
            match self.special {
                SpecialAngle::Zero => return class_of_int(xi1),
                SpecialAngle::Quarter => return class_of_int(xi2),
                SpecialAngle::Eighth => return class_of_int(xi1 + xi2),
                SpecialAngle::None => {}
            }
        }
        let s = self.dot(xi1, xi2) - tau;
        let band = 1e-13 * (1.0 + xi1.abs() as f64 + xi2.abs() as f64);
        if s.abs() <= band {
            DotClass::Zero
        } else if s > 0.0 {
            DotClass::Pos
        } else {
            DotClass::Neg
        }
    }

    /// xi . v >= tau with the dead band resolved toward the >= side.
    pub fn dot_ge(&self, xi1: i64, xi2: i64, tau: f64) -> bool {
        self.dot_class(xi1, xi2, tau) != DotClass::Neg
    }

    /// Symmetric principal-value sign: -1, 0, +1 with the dead band at 0.
    pub fn dot_sgn(&self, xi1: i64, xi2: i64) -> i8 {
        match self.dot_class(xi1, xi2, 0.0) {
            DotClass::Neg => -1,
            DotClass::Zero => 0,
            DotClass::Pos => 1,
        }
    }
}

fn class_of_int(v: i64) -> DotClass {
    match v.cmp(&0) {
        Ordering::Less => DotClass::Neg,
        Ordering::Equal => DotClass::Zero,
        Ordering::Greater => DotClass::Pos,
    }
}

impl PartialEq for Direction {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}
impl Eq for Direction {}

impl PartialOrd for Direction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Direction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exact.cmp(&other.exact)
    }
}

/// Exact dyadic decomposition of a finite nonnegative f64.
pub fn dyadic_of_f64(x: f64) -> Dyadic {
    assert!(x.is_finite() && x >= 0.0, "angle must be finite and nonnegative");
    if x == 0.0 {
        return Dyadic::zero();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074i64) // subnormal
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    if e >= 0 {
        Dyadic::new(BigInt::from(mant) << (e as u32), 0)
    } else {
        Dyadic::new(mant, (-e) as u32)
    }
}

/// One node of a lacunarity certificate: a direction together with its
/// clockwise ladder of children.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub dir: Direction,
    pub children: Vec<TreeNode>,
}

/// Recursive lacunarity certificate: root direction, constant, order, and
/// the generation tree. Leaves at depth `order` are the set members.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunaryTree {
    pub lambda: RatioQ,
    pub order: u32,
    pub root: TreeNode,
}

/// Finite direction set, clockwise (strictly decreasing angle), with an
/// optional lacunarity certificate.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    dirs: Vec<Direction>,
    certificate: Option<LacunaryTree>,
}

impl DirectionSet {
    /// Build from angles in any order; sorts clockwise and rejects duplicates.
    pub fn from_dirs(mut dirs: Vec<Direction>) -> Result<Self> {
        dirs.sort_by(|a, b| b.cmp(a));
        for w in dirs.windows(2) {
            if w[0] == w[1] {
                return Err(CoreError::AngleCollision);
            }
        }
        Ok(DirectionSet { dirs, certificate: None })
    }

    pub fn singleton(dir: Direction) -> Self {
        DirectionSet { dirs: vec![dir], certificate: None }
    }

    /// n equally spaced angles k/(4(n+1)), k = 1..n — the non-lacunary
    /// contrast family.
    pub fn equispaced(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::EmptySet);
        }
        let dirs = (1..=n)
            .rev()
            .map(|k| Direction::from_f64(k as f64 / (4.0 * (n + 1) as f64)))
            .collect();
        Ok(DirectionSet { dirs, certificate: None })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Members in clockwise order (largest angle first).
    pub fn dirs(&self) -> &[Direction] {
        &self.dirs
    }

    pub fn certificate(&self) -> Option<&LacunaryTree> {
        self.certificate.as_ref()
    }

    /// Restrict to the first `n` members in clockwise order, dropping the
    /// certificate.
    pub fn truncated(&self, n: usize) -> DirectionSet {
        DirectionSet { dirs: self.dirs.iter().take(n).cloned().collect(), certificate: None }
    }
}

fn counts_ok(order: u32, counts: &[usize]) -> Result<()> {
    if counts.len() != order as usize {
        return Err(CoreError::Config(format!(
            "order {} needs {} per-level counts, got {}",
            order,
            order,
            counts.len()
        )));
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(CoreError::Config("per-level counts must be >= 1".into()));
    }
    Ok(())
}

/// Largest dyadic `m/4096 <= lambda`, as (numerator, log2 denominator).
fn dyadic_floor_ratio(lambda: RatioQ) -> (u64, u32) {
    const BITS: u32 = 12;
    let m = (lambda.num as u128 * (1u128 << BITS) / lambda.den as u128) as u64;
    let mut m = m.max(1);
    let mut k = BITS;
    while m % 2 == 0 && k > 0 {
        m /= 2;
        k -= 1;
    }
    (m, k)
}

/// Largest power of two 2^-t <= min(r^4, (1-r)/(2r)) where r = rp/2^rk.
/// Controls how deep inside its arc a node's child ladder starts.
fn child_gap_exponent(rp: u64, rk: u32) -> u32 {
    let r = rp as f64 / (1u64 << rk) as f64;
    let bound = (r * r * r * r).min((1.0 - r) / (2.0 * r));
    let mut t = (-bound.log2()).ceil() as i32;
    if t < 1 {
        t = 1;
    }
    // Exact confirmation: 2^-t <= r^4  <=>  2^(4rk - t) >= ... checked in
    // rationals to be safe against the float log above.
    let le_r4 = |t: u32| {
        // 1/2^t <= rp^4 / 2^(4rk)  <=>  2^(4rk) <= rp^4 * 2^t
        let lhs = BigInt::one() << (4 * rk);
        let rhs = BigInt::from(rp).pow(4) << t;
        lhs <= rhs
    };
    let le_arc = |t: u32| {
        // 1/2^t <= (2^rk - rp) / (2 rp)  <=>  2 rp <= (2^rk - rp) * 2^t
        let lhs = BigInt::from(2 * rp);
        let rhs = (BigInt::from((1u64 << rk) - rp)) << t;
        lhs <= rhs
    };
    let mut t = t as u32;
    while !(le_r4(t) && le_arc(t)) {
        t += 1;
    }
    t
}

/// Canonical clockwise lacunary set of the given order.
///
/// Level 1 is the ladder theta_j = (1/8) r^{j-1} descending to the root; each
/// deeper level attaches, above every node, a ladder of the node's own scale
/// shrunk by a fixed power of two, again with ratio r. Here r is lambda when
/// lambda is dyadic, else the closest dyadic below it, so every angle is an
/// exact dyadic rational. With lambda = 1/2 this reproduces the dyadic
/// ladders 2^{-j-2} and 2^{-j-2} + 2^{-k-2}, k >= j + 4.
pub fn canonical_lacunary(order: u32, lambda: RatioQ, counts: &[usize]) -> Result<DirectionSet> {
    if !lambda.is_proper() {
        return Err(CoreError::BadLambda(lambda.num, lambda.den));
    }
    counts_ok(order, counts)?;
    let (rp, rk) = dyadic_floor_ratio(lambda);
    let gap = child_gap_exponent(rp, rk);

    fn ladder(anchor: &Dyadic, first: &Dyadic, rp: u64, rk: u32, count: usize) -> Vec<Dyadic> {
        let mut out = Vec::with_capacity(count);
        let mut offset = first.clone();
        for _ in 0..count {
            out.push(anchor.add(&offset));
            offset = Dyadic::new(offset.numerator() * BigInt::from(rp), offset.log2_denominator() + rk);
        }
        out
    }

    fn grow(
        node_angle: &Dyadic,
        node_offset: &Dyadic,
        level: u32,
        order: u32,
        counts: &[usize],
        rp: u64,
        rk: u32,
        gap: u32,
    ) -> TreeNode {
        let dir = Direction::from_dyadic(node_angle.clone());
        if level == order {
            return TreeNode { dir, children: Vec::new() };
        }
        let first = Dyadic::new(
            node_offset.numerator().clone(),
            node_offset.log2_denominator() + gap,
        );
        // Past the first generation, converge at ratio <= 1/2: slow ratios
        // near 1 would pile deep rungs onto their anchor, and the certificate
        // only asks for a ratio bounded by lambda.
        let (crp, crk) = if 2 * rp > 1u64 << rk { (1, 1) } else { (rp, rk) };
        let angles = ladder(node_angle, &first, crp, crk, counts[level as usize]);
        let children = angles
            .iter()
            .map(|a| {
                let off = a.sub(node_angle);
                grow(a, &off, level + 1, order, counts, rp, rk, gap)
            })
            .collect();
        TreeNode { dir, children }
    }

    // The root's "offset" seeds the level-1 ladder at 1/8 (gap applied only
    // from level 2 down, matching the canonical examples).
    let root_angle = Dyadic::zero();
    let root = if order == 0 {
        TreeNode { dir: Direction::root(), children: Vec::new() }
    } else {
        let first = Dyadic::new(1, 3); // 1/8
        let angles = ladder(&root_angle, &first, rp, rk, counts[0]);
        let children = angles
            .iter()
            .map(|a| grow(a, a, 1, order, counts, rp, rk, gap))
            .collect();
        TreeNode { dir: Direction::root(), children }
    };

    let tree = LacunaryTree { lambda, order, root };
    let dirs = flatten_leaves(&tree);
    // Reject generations whose angles collapse below float resolution.
    for w in dirs.windows(2) {
        if w[0].theta() - w[1].theta() < 1e-13 {
            return Err(CoreError::AngleCollision);
        }
    }
    Ok(DirectionSet { dirs, certificate: Some(tree) })
}

/// Leaves at depth `order`, clockwise.
pub fn flatten_leaves(tree: &LacunaryTree) -> Vec<Direction> {
    fn walk(node: &TreeNode, depth: u32, order: u32, out: &mut Vec<Direction>) {
        if depth == order {
            out.push(node.dir.clone());
            return;
        }
        for child in &node.children {
            walk(child, depth + 1, order, out);
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, 0, tree.order, &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

fn geodesic(a: &Dyadic, b: &Dyadic) -> Dyadic {
    // All angles live in [0, 1/4]; the plain difference is the geodesic
    // distance on the circle.
    a.sub(b).abs()
}

/// The successor inequality: for all x != y in `theta`,
/// dist(x, y) >= (1/lambda - 1) dist_parent(x). Exact in dyadic arithmetic.
pub fn is_successor(theta: &DirectionSet, parent: &DirectionSet, lambda: RatioQ) -> Result<bool> {
    if !lambda.is_proper() {
        return Err(CoreError::BadLambda(lambda.num, lambda.den));
    }
    // factor (q - p)/p
    let (p, q) = (lambda.num, lambda.den);
    let dist_parent = |x: &Direction| -> Dyadic {
        parent
            .dirs
            .iter()
            .map(|u| geodesic(x.exact(), u.exact()))
            .min()
            .unwrap_or_else(Dyadic::zero)
    };
    for (i, x) in theta.dirs.iter().enumerate() {
        let dpx = dist_parent(x);
        for (j, y) in theta.dirs.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = geodesic(x.exact(), y.exact());
            // d >= ((q-p)/p) dpx  <=>  d * p >= dpx * (q - p)
            if d.cmp_scaled(p, &dpx, q - p) == Ordering::Less {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Check the certificate: every leaf at depth = order, every node's child
/// ladder strictly clockwise toward it with ratio <= lambda, and contained in
/// the complementary arc above the node. Returns the order.
pub fn verify_order(set: &DirectionSet) -> Result<u32> {
    let tree = set.certificate().ok_or(CoreError::MissingCertificate)?;
    let leaves = flatten_leaves(tree);
    if leaves.len() != set.dirs.len() || leaves.iter().zip(&set.dirs).any(|(a, b)| a != b) {
        return Err(VerifyFailure {
            level: 0,
            path: vec![],
            reason: "certificate leaves do not match the direction list".into(),
        }
        .into());
    }
    let (p, q) = (tree.lambda.num, tree.lambda.den);

    // Angles of all nodes at each depth, for arc upper bounds.
    fn collect(node: &TreeNode, depth: u32, per_level: &mut Vec<Vec<Dyadic>>) {
        if per_level.len() <= depth as usize {
            per_level.resize(depth as usize + 1, Vec::new());
        }
        per_level[depth as usize].push(node.dir.exact().clone());
        for c in &node.children {
            collect(c, depth + 1, per_level);
        }
    }
    let mut per_level: Vec<Vec<Dyadic>> = Vec::new();
    collect(&tree.root, 0, &mut per_level);
    for level in &mut per_level {
        level.sort();
    }

    fn check(
        node: &TreeNode,
        depth: u32,
        path: &mut Vec<usize>,
        tree_order: u32,
        p: u64,
        q: u64,
        per_level: &[Vec<Dyadic>],
    ) -> std::result::Result<(), VerifyFailure> {
        let fail = |reason: String, path: &[usize], level: u32| VerifyFailure {
            level,
            path: path.to_vec(),
            reason,
        };
        if depth == tree_order {
            if !node.children.is_empty() {
                return Err(fail("leaf node has children".into(), path, depth));
            }
            return Ok(());
        }
        if node.children.is_empty() {
            return Err(fail(
                format!("interior node at depth {depth} has no children"),
                path,
                depth,
            ));
        }
        // Upper end of the complementary arc above this node at its depth.
        let quarter = Dyadic::new(1, 2);
        let siblings = &per_level[depth as usize];
        let upper = siblings
            .iter()
            .filter(|a| **a > *node.dir.exact())
            .min()
            .cloned()
            .unwrap_or(quarter);
        let mut prev_offset: Option<Dyadic> = None;
        // Children are stored clockwise (descending); walk from the largest.
        let mut sorted: Vec<&TreeNode> = node.children.iter().collect();
        sorted.sort_by(|a, b| b.dir.cmp(&a.dir));
        for (ci, child) in sorted.iter().enumerate() {
            let off = child.dir.exact().sub(node.dir.exact());
            if off.is_zero() || off.is_negative() {
                path.push(ci);
                let e = fail(
                    "child does not lie strictly above its limit".into(),
                    path,
                    depth + 1,
                );
                path.pop();
                return Err(e);
            }
            if *child.dir.exact() >= upper {
                path.push(ci);
                let e = fail("child escapes its complementary arc".into(), path, depth + 1);
                path.pop();
                return Err(e);
            }
            if let Some(prev) = &prev_offset {
                // ratio off/prev <= p/q  <=>  off * q <= prev * p
                if off.cmp_scaled(q, prev, p) == Ordering::Greater {
                    path.push(ci);
                    let e = fail(
                        format!(
                            "ladder ratio exceeds lambda: {} after {}",
                            off.to_f64(),
                            prev.to_f64()
                        ),
                        path,
                        depth + 1,
                    );
                    path.pop();
                    return Err(e);
                }
            }
            prev_offset = Some(off);
        }
        for (ci, child) in sorted.iter().enumerate() {
            path.push(ci);
            check(child, depth + 1, path, tree_order, p, q, per_level)?;
            path.pop();
        }
        Ok(())
    }

    let mut path = Vec::new();
    check(&tree.root, 0, &mut path, tree.order, p, q, &per_level)?;
    Ok(tree.order)
}

/// Open/closed endpoint flags follow the first-quadrant convention: arcs are
/// open at parent directions and at 0, closed at 1/4.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub lo: f64,
    pub hi: f64,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Arc {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Open arcs of [0, 1/4] complementary to a nonempty parent set, in
/// clockwise order (topmost arc first).
pub fn complementary_arcs(parent: &DirectionSet) -> Result<Vec<Arc>> {
    if parent.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let mut cuts: Vec<f64> = parent.dirs.iter().map(|d| d.theta()).collect();
    // dirs are descending; add the interval ends.
    if *cuts.first().unwrap() < 0.25 {
        cuts.insert(0, 0.25);
    }
    if *cuts.last().unwrap() > 0.0 {
        cuts.push(0.0);
    }
    let mut arcs = Vec::new();
    for w in cuts.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        if hi > lo {
            arcs.push(Arc {
                lo,
                hi,
                closed_lo: false,
                closed_hi: (hi - 0.25).abs() < f64::EPSILON
                    && parent.dirs.first().unwrap().theta() < 0.25,
            });
        }
    }
    Ok(arcs)
}

/// Thin a certified set to a smaller constant: keep every m-th rung of every
/// ladder, one part per residue tuple. Parts are disjoint certified sets with
/// constant `lambda_prime` whose union is the input.
pub fn split_constant(set: &DirectionSet, lambda_prime: RatioQ) -> Result<Vec<DirectionSet>> {
    let tree = set.certificate().ok_or(CoreError::MissingCertificate)?;
    if !lambda_prime.is_proper() {
        return Err(CoreError::BadLambda(lambda_prime.num, lambda_prime.den));
    }
    let lam = tree.lambda;
    // smallest m >= 1 with lambda^m <= lambda'
    let (p, q) = (BigInt::from(lam.num), BigInt::from(lam.den));
    let (pp, qp) = (BigInt::from(lambda_prime.num), BigInt::from(lambda_prime.den));
    let mut m = 1u32;
    let mut pm = p.clone();
    let mut qm = q.clone();
    loop {
        // lambda^m <= lambda'  <=>  p^m * qp <= q^m * pp
        if &pm * &qp <= &qm * &pp {
            break;
        }
        m += 1;
        pm *= &p;
        qm *= &q;
        if m > 64 {
            return Err(CoreError::InvalidSplitConstant(lambda_prime.num, lambda_prime.den));
        }
    }
    if m == 1 {
        let mut part = set.clone();
        if let Some(c) = &mut part.certificate {
            c.lambda = lambda_prime;
        }
        return Ok(vec![part]);
    }

    fn prune(node: &TreeNode, depth: u32, order: u32, m: u32, residues: &[u32]) -> Option<TreeNode> {
        if depth == order {
            return Some(TreeNode { dir: node.dir.clone(), children: Vec::new() });
        }
        let r = residues[depth as usize];
        let mut sorted: Vec<&TreeNode> = node.children.iter().collect();
        sorted.sort_by(|a, b| b.dir.cmp(&a.dir));
        let children: Vec<TreeNode> = sorted
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as u32) % m == r)
            .filter_map(|(_, c)| prune(c, depth + 1, order, m, residues))
            .collect();
        if children.is_empty() {
            None
        } else {
            Some(TreeNode { dir: node.dir.clone(), children })
        }
    }

    let levels = tree.order as usize;
    let mut parts = Vec::new();
    let total = (m as u64).pow(tree.order);
    for combo in 0..total {
        let mut residues = vec![0u32; levels];
        let mut c = combo;
        for r in residues.iter_mut() {
            *r = (c % m as u64) as u32;
            c /= m as u64;
        }
        if let Some(root) = prune(&tree.root, 0, tree.order, m, &residues) {
            let part_tree = LacunaryTree { lambda: lambda_prime, order: tree.order, root };
            let dirs = flatten_leaves(&part_tree);
            parts.push(DirectionSet { dirs, certificate: Some(part_tree) });
        }
    }
    Ok(parts)
}

/// One complementary arc of the parent generation together with the set
/// members it contains.
#[derive(Debug, Clone)]
pub struct ArcGroup {
    /// 1-based clockwise arc index.
    pub tau: usize,
    /// The arc's clockwise endpoint u_tau — the limit its members descend to.
    pub limit: Direction,
    /// Upper anchor: u_{tau-1} for tau >= 2, the set's first member for
    /// tau = 1 (the u_0 := v_1 convention).
    pub anchor: Direction,
    /// Members of the set inside the arc, clockwise. May be empty.
    pub members: Vec<Direction>,
}

impl ArcGroup {
    /// The members as a certified 1-lacunary set with this arc's limit.
    pub fn as_order1_set(&self, lambda: RatioQ) -> DirectionSet {
        let root = TreeNode {
            dir: self.limit.clone(),
            children: self
                .members
                .iter()
                .map(|d| TreeNode { dir: d.clone(), children: Vec::new() })
                .collect(),
        };
        DirectionSet {
            dirs: self.members.clone(),
            certificate: Some(LacunaryTree { lambda, order: 1, root }),
        }
    }
}

/// The (j, tau) view of a certified set of order >= 1: members grouped by the
/// complementary arcs of the parent generation.
#[derive(Debug, Clone)]
pub struct JTauView {
    pub arcs: Vec<ArcGroup>,
    pub lambda: RatioQ,
}

pub fn enumerate_jtau(set: &DirectionSet) -> Result<JTauView> {
    let tree = set.certificate().ok_or(CoreError::MissingCertificate)?;
    if tree.order == 0 {
        return Err(CoreError::Config("enumerate_jtau needs order >= 1".into()));
    }

    // Parent generation: nodes at depth order-1, clockwise.
    fn collect_at(node: &TreeNode, depth: u32, want: u32, out: &mut Vec<TreeNode>) {
        if depth == want {
            out.push(node.clone());
            return;
        }
        for c in &node.children {
            collect_at(c, depth + 1, want, out);
        }
    }
    let mut parents = Vec::new();
    collect_at(&tree.root, 0, tree.order - 1, &mut parents);
    parents.sort_by(|a, b| b.dir.cmp(&a.dir));

    let mut arcs = Vec::new();
    for (i, parent) in parents.iter().enumerate() {
        let mut members: Vec<Direction> = parent.children.iter().map(|c| c.dir.clone()).collect();
        members.sort_by(|a, b| b.cmp(a));
        let anchor = if i == 0 {
            // u_0 := v_1: the first member of the whole set.
            set.dirs.first().cloned().unwrap_or_else(|| parent.dir.clone())
        } else {
            parents[i - 1].dir.clone()
        };
        arcs.push(ArcGroup { tau: i + 1, limit: parent.dir.clone(), anchor, members });
    }
    // Bottom arc between the root and the last parent, when the parent
    // generation sits strictly above the root. It never holds members.
    if let Some(last) = parents.last() {
        if !last.dir.exact().is_zero() {
            arcs.push(ArcGroup {
                tau: parents.len() + 1,
                limit: Direction::root(),
                anchor: last.dir.clone(),
                members: Vec::new(),
            });
        }
    }
    Ok(JTauView { arcs, lambda: tree.lambda })
}

/// Attach a certificate built elsewhere in the crate (the vector-field range
/// constructor assembles its tree directly).
pub(crate) fn attach_certificate(set: &mut DirectionSet, tree: LacunaryTree) {
    set.certificate = Some(tree);
}

// --- serialization -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct AngleRepr(String, u32);

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    angle: AngleRepr,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeRepr>,
}

/// On-disk form: {lambda, order, root, angles: [[num, log2den], ...], tree}.
/// Numerators are decimal strings so deep generations survive JSON numbers.
#[derive(Serialize, Deserialize)]
pub struct DirectionSetRepr {
    lambda: [u64; 2],
    order: u32,
    root: AngleRepr,
    angles: Vec<AngleRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tree: Option<NodeRepr>,
}

fn angle_repr(d: &Dyadic) -> AngleRepr {
    AngleRepr(d.numerator().to_string(), d.log2_denominator())
}

fn angle_parse(a: &AngleRepr) -> Result<Dyadic> {
    let num: BigInt = a
        .0
        .parse()
        .map_err(|_| CoreError::Config(format!("bad angle numerator `{}`", a.0)))?;
    Ok(Dyadic::new(num, a.1))
}

fn node_repr(n: &TreeNode) -> NodeRepr {
    NodeRepr {
        angle: angle_repr(n.dir.exact()),
        children: n.children.iter().map(node_repr).collect(),
    }
}

fn node_parse(n: &NodeRepr) -> Result<TreeNode> {
    Ok(TreeNode {
        dir: Direction::from_dyadic(angle_parse(&n.angle)?),
        children: n.children.iter().map(node_parse).collect::<Result<_>>()?,
    })
}

pub fn to_json(set: &DirectionSet) -> Result<String> {
    let cert = set.certificate();
    let root = cert.map(|c| c.root.dir.exact().clone()).unwrap_or_else(Dyadic::zero);
    let repr = DirectionSetRepr {
        lambda: cert.map(|c| [c.lambda.num, c.lambda.den]).unwrap_or([0, 1]),
        order: cert.map(|c| c.order).unwrap_or(0),
        root: angle_repr(&root),
        angles: set.dirs.iter().map(|d| angle_repr(d.exact())).collect(),
        tree: cert.map(|c| node_repr(&c.root)),
    };
    Ok(serde_json::to_string_pretty(&repr)?)
}

pub fn from_json(s: &str) -> Result<DirectionSet> {
    let repr: DirectionSetRepr = serde_json::from_str(s)?;
    let mut dirs = Vec::with_capacity(repr.angles.len());
    for a in &repr.angles {
        dirs.push(Direction::from_dyadic(angle_parse(a)?));
    }
    let mut set = DirectionSet::from_dirs(dirs)?;
    if let Some(tree) = &repr.tree {
        let lambda = RatioQ::new(repr.lambda[0], repr.lambda[1]);
        if !lambda.is_proper() {
            return Err(CoreError::BadLambda(repr.lambda[0], repr.lambda[1]));
        }
        set.certificate = Some(LacunaryTree {
            lambda,
            order: repr.order,
            root: node_parse(tree)?,
        });
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> RatioQ {
        RatioQ::new(1, 2)
    }

    #[test]
    fn order_zero_is_the_root() {
        let set = canonical_lacunary(0, half(), &[]).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.dirs()[0].exact().is_zero());
        assert_eq!(verify_order(&set).unwrap(), 0);
    }

    #[test]
    fn canonical_order_one_is_the_dyadic_ladder() {
        let set = canonical_lacunary(1, half(), &[6]).unwrap();
        assert_eq!(set.len(), 6);
        for (j, d) in set.dirs().iter().enumerate() {
            // theta_j = 2^{-j-2}, j = 1..6, clockwise toward 0.
            assert_eq!(*d.exact(), Dyadic::pow2(-(j as i32) - 3));
        }
    }

    #[test]
    fn canonical_order_two_matches_the_double_ladder() {
        let set = canonical_lacunary(2, half(), &[3, 4]).unwrap();
        // theta_{j,k} = 2^{-j-2} + 2^{-k-2} with k >= j + 4.
        for j in 1..=3i32 {
            for i in 0..4i32 {
                let k = j + 4 + i;
                let want = Dyadic::pow2(-j - 2).add(&Dyadic::pow2(-k - 2));
                assert!(
                    set.dirs().iter().any(|d| *d.exact() == want),
                    "missing angle 2^-{} + 2^-{}",
                    j + 2,
                    k + 2
                );
            }
        }
        assert_eq!(set.len(), 12);
        assert_eq!(verify_order(&set).unwrap(), 2);
    }

    #[test]
    fn successor_inequality_exact_cases() {
        // Oracle: the inequality dist(x,y) >= (1/lambda - 1) dist_parent(x),
        // evaluated directly on the dyadic ladder against parent {0}.
        let theta = canonical_lacunary(1, half(), &[6]).unwrap();
        let parent = DirectionSet::singleton(Direction::root());
        assert!(is_successor(&theta, &parent, RatioQ::new(2, 3)).unwrap());
        assert!(!is_successor(&theta, &parent, half()).unwrap());
        let single = DirectionSet::singleton(Direction::from_f64(0.1));
        assert!(is_successor(&single, &parent, RatioQ::new(1, 10)).unwrap());
    }

    #[test]
    fn successor_is_monotone_in_lambda() {
        let theta = canonical_lacunary(1, half(), &[5]).unwrap();
        let parent = DirectionSet::singleton(Direction::root());
        let mut prev = false;
        for den in (3..12u64).rev() {
            // lambda = 2/den increases as den decreases
            let ok = is_successor(&theta, &parent, RatioQ::new(2, den)).unwrap();
            assert!(!prev || ok, "monotonicity violated at lambda=2/{den}");
            prev = ok;
        }
        assert!(prev, "largest lambda must accept");
    }

    #[test]
    fn verify_passes_canonical_grid() {
        for order in 0..=3u32 {
            for lambda in [RatioQ::new(1, 4), half(), RatioQ::new(2, 3)] {
                let counts: Vec<usize> = (0..order).map(|_| 3usize).collect();
                let set = canonical_lacunary(order, lambda, &counts).unwrap();
                assert_eq!(verify_order(&set).unwrap(), order, "order {order} lambda {lambda}");
            }
        }
    }

    #[test]
    fn verify_names_a_perturbed_node() {
        let mut set = canonical_lacunary(2, half(), &[2, 3]).unwrap();
        // Perturb the deepest angle of the last ladder by 10%.
        let tree = set.certificate.as_mut().unwrap();
        let node = tree.root.children.last_mut().unwrap().children.last_mut().unwrap();
        let bumped = Direction::from_f64(node.dir.theta() * 1.1);
        node.dir = bumped.clone();
        let mut dirs = flatten_leaves(tree);
        dirs.sort_by(|a, b| b.cmp(a));
        set.dirs = dirs;
        let err = verify_order(&set).unwrap_err();
        match err {
            CoreError::Verify(f) => {
                assert_eq!(f.level, 2);
                assert!(!f.path.is_empty());
            }
            other => panic!("expected verify failure, got {other}"),
        }
    }

    #[test]
    fn arcs_of_a_two_point_parent() {
        let parent = DirectionSet::from_dirs(vec![
            Direction::from_dyadic(Dyadic::new(1, 4)), // 1/16
            Direction::from_dyadic(Dyadic::new(1, 3)), // 1/8
        ])
        .unwrap();
        let arcs = complementary_arcs(&parent).unwrap();
        assert_eq!(arcs.len(), 3);
        // Clockwise: (1/8, 1/4], (1/16, 1/8), (0, 1/16).
        assert!((arcs[0].lo - 0.125).abs() < 1e-15 && (arcs[0].hi - 0.25).abs() < 1e-15);
        assert!((arcs[1].lo - 0.0625).abs() < 1e-15 && (arcs[1].hi - 0.125).abs() < 1e-15);
        assert!(arcs[2].lo == 0.0 && (arcs[2].hi - 0.0625).abs() < 1e-15);
        let total: f64 = arcs.iter().map(Arc::length).sum();
        assert!((total - 0.25).abs() < 1e-15);
    }

    #[test]
    fn arc_of_the_root_parent() {
        let parent = DirectionSet::singleton(Direction::root());
        let arcs = complementary_arcs(&parent).unwrap();
        assert_eq!(arcs.len(), 1);
        assert_eq!(arcs[0].lo, 0.0);
        assert!((arcs[0].hi - 0.25).abs() < 1e-15);
        assert!(arcs[0].closed_hi && !arcs[0].closed_lo);
    }

    #[test]
    fn split_halves_a_geometric_ladder() {
        let set = canonical_lacunary(1, half(), &[6]).unwrap();
        let parts = split_constant(&set, RatioQ::new(1, 4)).unwrap();
        assert_eq!(parts.len(), 2);
        for part in &parts {
            assert_eq!(verify_order(part).unwrap(), 1);
            // consecutive kept offsets shrink by exactly 1/4
            let d = part.dirs();
            for w in d.windows(2) {
                let ratio = w[1].theta() / w[0].theta();
                assert!((ratio - 0.25).abs() < 1e-12);
            }
        }
        // disjoint union equals the input
        let mut all: Vec<Dyadic> =
            parts.iter().flat_map(|p| p.dirs().iter().map(|d| d.exact().clone())).collect();
        all.sort();
        let mut want: Vec<Dyadic> = set.dirs().iter().map(|d| d.exact().clone()).collect();
        want.sort();
        assert_eq!(all, want);
    }

    #[test]
    fn split_identity_and_deep_split() {
        let set = canonical_lacunary(2, half(), &[3, 3]).unwrap();
        let same = split_constant(&set, half()).unwrap();
        assert_eq!(same.len(), 1);
        assert_eq!(same[0].len(), set.len());

        let parts = split_constant(&set, RatioQ::new(1, 4)).unwrap();
        let mut total = 0;
        for part in &parts {
            assert_eq!(verify_order(part).unwrap(), 2);
            total += part.len();
        }
        assert_eq!(total, set.len());
        assert!(split_constant(&set, RatioQ::new(3, 4)).unwrap().len() == 1);
    }

    #[test]
    fn jtau_groups_match_the_generator() {
        let set = canonical_lacunary(2, half(), &[3, 4]).unwrap();
        let view = enumerate_jtau(&set).unwrap();
        // Three populated arcs (one per level-1 node) plus the empty bottom arc.
        assert_eq!(view.arcs.len(), 4);
        for (i, arc) in view.arcs.iter().take(3).enumerate() {
            assert_eq!(arc.tau, i + 1);
            assert_eq!(arc.members.len(), 4);
            assert_eq!(*arc.limit.exact(), Dyadic::pow2(-(i as i32) - 3));
            // every member descends to this arc's limit
            for m in &arc.members {
                assert!(m.exact() > arc.limit.exact());
            }
            let sub = arc.as_order1_set(half());
            assert_eq!(verify_order(&sub).unwrap(), 1);
        }
        assert!(view.arcs[3].members.is_empty());
        // anchors: u_0 = v_1, then the parent points
        assert_eq!(view.arcs[0].anchor, set.dirs()[0]);
        assert_eq!(*view.arcs[1].anchor.exact(), Dyadic::pow2(-3));
        // concatenating the groups reproduces the sorted set
        let concat: Vec<Direction> =
            view.arcs.iter().flat_map(|a| a.members.iter().cloned()).collect();
        assert_eq!(concat.len(), set.len());
        assert!(concat.iter().zip(set.dirs()).all(|(a, b)| a == b));
    }

    #[test]
    fn json_roundtrip_preserves_certificate() {
        let set = canonical_lacunary(2, RatioQ::new(2, 3), &[2, 3]).unwrap();
        let s = to_json(&set).unwrap();
        let back = from_json(&s).unwrap();
        assert_eq!(back.len(), set.len());
        assert!(back.dirs().iter().zip(set.dirs()).all(|(a, b)| a == b));
        assert_eq!(verify_order(&back).unwrap(), 2);
    }

    #[test]
    fn classifier_exact_axes() {
        let root = Direction::root();
        assert_eq!(root.dot_class(0, 7, 0.0), DotClass::Zero);
        assert_eq!(root.dot_class(-3, 7, 0.0), DotClass::Neg);
        let north = Direction::from_dyadic(Dyadic::new(1, 2));
        assert_eq!(north.dot_class(-5, 0, 0.0), DotClass::Zero);
        let diag = Direction::from_dyadic(Dyadic::new(1, 3));
        assert_eq!(diag.dot_class(-4, 4, 0.0), DotClass::Zero);
        assert_eq!(diag.dot_class(-4, 5, 0.0), DotClass::Pos);
    }

    #[test]
    fn classifier_monotone_in_angle() {
        // In the open second quadrant xi.v increases with the angle of v, so
        // the >=-side classification is nested across a clockwise set.
        let set = canonical_lacunary(1, RatioQ::new(2, 3), &[8]).unwrap();
        for xi1 in [-9i64, -5, -1] {
            for xi2 in [1i64, 4, 11] {
                let mut prev = true; // largest angle first
                for d in set.dirs() {
                    let ge = d.dot_ge(xi1, xi2, 0.0);
                    assert!(prev || !ge, "nesting violated at ({xi1},{xi2})");
                    prev = ge;
                }
            }
        }
    }
}
