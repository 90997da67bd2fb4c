//! Points, arcs and integer step functions on the circle `R/Z`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Coincidence tolerance for points on the circle.
pub const EPS_PT: f64 = 1e-12;

/// A point of the circle, stored as its representative in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub const ZERO: CirclePoint = CirclePoint(0.0);

    /// Reduces a real number mod 1. Rejects NaN and infinities.
    pub fn reduce(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        Ok(Self::wrap(x))
    }

    /// Infallible reduction for values already known to be finite.
    pub(crate) fn wrap(x: f64) -> Self {
        debug_assert!(x.is_finite());
        let mut r = x - x.floor();
        // x.floor() can round r up to exactly 1.0 for tiny negative x.
        if r >= 1.0 {
            r = 0.0;
        }
        CirclePoint(r)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Quotient distance, always in `[0, 1/2]`.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(1.0 - d)
    }

    /// Positive displacement `(other - self) mod 1` in `[0, 1)`.
    #[inline]
    pub fn forward_to(self, other: CirclePoint) -> f64 {
        let d = other.0 - self.0;
        if d >= 0.0 {
            d
        } else {
            let r = d + 1.0;
            if r >= 1.0 {
                0.0
            } else {
                r
            }
        }
    }

    pub fn shifted(self, by: f64) -> CirclePoint {
        CirclePoint::wrap(self.0 + by)
    }

    pub fn coincides(self, other: CirclePoint, tol: f64) -> bool {
        self.distance(other) <= tol
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for CirclePoint {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        CirclePoint::reduce(x)
    }
}

/// The positively oriented closed arc `[left, right]`.
///
/// `left == right` is the single point, never the full circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub left: CirclePoint,
    pub right: CirclePoint,
}

impl Arc {
    pub fn new(left: CirclePoint, right: CirclePoint) -> Self {
        Arc { left, right }
    }

    /// Arc from raw reals, reducing both endpoints.
    pub fn from_reals(left: f64, right: f64) -> Result<Self> {
        Ok(Arc::new(CirclePoint::reduce(left)?, CirclePoint::reduce(right)?))
    }

    pub fn point(x: CirclePoint) -> Self {
        Arc { left: x, right: x }
    }

    pub fn length(&self) -> f64 {
        self.left.forward_to(self.right)
    }

    pub fn is_degenerate(&self) -> bool {
        self.left == self.right
    }

    /// Closed-arc membership with endpoint tolerance `tol`.
    pub fn contains(&self, x: CirclePoint, tol: f64) -> bool {
        let len = self.length();
        let off = self.left.forward_to(x);
        off <= len + tol || off >= 1.0 - tol
    }

    /// Membership in the open arc, shrunk by `tol` at both ends.
    pub fn contains_interior(&self, x: CirclePoint, tol: f64) -> bool {
        let off = self.left.forward_to(x);
        off > tol && off < self.length() - tol
    }

    /// The complementary arc `[right, left]`.
    pub fn complement(&self) -> Arc {
        Arc::new(self.right, self.left)
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.left.shifted(0.5 * self.length())
    }

    /// Point at fraction `t` of the way along the arc.
    pub fn at(&self, t: f64) -> CirclePoint {
        self.left.shifted(t * self.length())
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.left, self.right)
    }
}

/// The total order `<_base` obtained by cutting the circle at `base`.
#[derive(Clone, Copy, Debug)]
pub struct CyclicOrder {
    pub base: CirclePoint,
}

impl CyclicOrder {
    pub fn new(base: CirclePoint) -> Self {
        CyclicOrder { base }
    }

    /// Lift into `[base, base + 1)`, returned as an offset from `base`.
    #[inline]
    pub fn lift(&self, u: CirclePoint) -> f64 {
        self.base.forward_to(u)
    }

    pub fn less(&self, u: CirclePoint, v: CirclePoint) -> bool {
        self.lift(u) < self.lift(v)
    }

    pub fn cmp(&self, u: CirclePoint, v: CirclePoint) -> Ordering {
        self.lift(u).total_cmp(&self.lift(v))
    }
}

/// Integer-valued step function on the circle.
///
/// Gap `i` is the open arc `(breakpoints[i], breakpoints[i + 1])`, the last
/// gap wrapping round to `breakpoints[0]`; `point_values[i]` is the value at
/// `breakpoints[i]` itself. Breakpoints are sorted increasingly in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<CirclePoint>,
    values: Vec<i64>,
    point_values: Vec<i64>,
    constant: i64,
}

impl StepFunction {
    pub fn constant(c: i64) -> Self {
        StepFunction {
            breakpoints: Vec::new(),
            values: Vec::new(),
            point_values: Vec::new(),
            constant: c,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0)
    }

    /// Indicator of the closed arc `a`.
    pub fn indicator(a: Arc) -> Self {
        Self::from_weighted_arcs(&[(a, 1)])
    }

    /// Indicator of the half-open arc `[left, right)`.
    pub fn indicator_half_open(a: Arc) -> Self {
        if a.is_degenerate() {
            return Self::zero();
        }
        let mut f = Self::indicator(a);
        let idx = f.find_breakpoint(a.right).expect("endpoint is a breakpoint");
        f.point_values[idx] = 0;
        f.canonicalize();
        f
    }

    /// `sum_j w_j chi(arc_j)` for closed arcs, built in a single sweep.
    ///
    /// Endpoints closer than [`EPS_PT`] are identified.
    pub fn from_weighted_arcs(arcs: &[(Arc, i64)]) -> Self {
        let with_ends: Vec<(Arc, i64, bool)> = arcs.iter().map(|&(a, w)| (a, w, true)).collect();
        Self::from_arcs(&with_ends)
    }

    /// `sum_j w_j chi(arc_j)` where each arc is closed (`true`) or open
    /// (`false`).
    pub fn from_arcs(arcs: &[(Arc, i64, bool)]) -> Self {
        let mut pts: Vec<CirclePoint> = Vec::with_capacity(2 * arcs.len());
        for (a, w, _) in arcs {
            if *w != 0 {
                pts.push(a.left);
                pts.push(a.right);
            }
        }
        let pts = merge_points(pts);
        let m = pts.len();
        if m == 0 {
            return Self::zero();
        }
        // Cyclic difference arrays over point and gap indices.
        let mut dpoint = vec![0i64; m + 1];
        let mut dgap = vec![0i64; m + 1];
        let mut wrap_point = 0i64;
        let mut wrap_gap = 0i64;
        for &(a, w, closed) in arcs {
            if w == 0 {
                continue;
            }
            let l = locate(&pts, a.left).expect("arc endpoint was merged");
            let r = locate(&pts, a.right).expect("arc endpoint was merged");
            if l == r {
                if a.is_degenerate() || a.length() < 0.5 {
                    if closed {
                        dpoint[l] += w;
                        dpoint[l + 1] -= w;
                    }
                } else {
                    // Arc of length ~1 collapsed by merging: nearly everything.
                    wrap_point += w;
                    wrap_gap += w;
                }
                continue;
            }
            if l < r {
                dgap[l] += w;
                dgap[r] -= w;
                if closed {
                    dpoint[l] += w;
                    dpoint[r + 1] -= w;
                } else {
                    dpoint[l + 1] += w;
                    dpoint[r] -= w;
                }
            } else {
                // Wraps through index 0: points l..m-1, 0..=r; gaps l..m-1, 0..r-1.
                wrap_gap += w;
                dgap[r] -= w;
                dgap[l] += w;
                if closed {
                    wrap_point += w;
                    dpoint[r + 1] -= w;
                    dpoint[l] += w;
                } else {
                    wrap_point += w;
                    dpoint[r] -= w;
                    dpoint[l + 1] += w;
                }
            }
        }
        let mut point_values = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        let (mut acc_p, mut acc_g) = (wrap_point, wrap_gap);
        for i in 0..m {
            acc_p += dpoint[i];
            acc_g += dgap[i];
            point_values.push(acc_p);
            values.push(acc_g);
        }
        let mut f = StepFunction {
            breakpoints: pts,
            values,
            point_values,
            constant: 0,
        };
        f.canonicalize();
        f
    }

    pub fn breakpoints(&self) -> &[CirclePoint] {
        &self.breakpoints
    }

    pub fn gap_values(&self) -> &[i64] {
        &self.values
    }

    pub fn point_values(&self) -> &[i64] {
        &self.point_values
    }

    pub fn is_constant(&self) -> Option<i64> {
        self.breakpoints.is_empty().then_some(self.constant)
    }

    fn find_breakpoint(&self, x: CirclePoint) -> Option<usize> {
        locate(&self.breakpoints, x)
    }

    /// Index of the gap containing `x`, assuming `x` is not a breakpoint.
    fn gap_index(&self, x: CirclePoint) -> usize {
        let m = self.breakpoints.len();
        let pos = self.breakpoints.partition_point(|b| b.value() <= x.value());
        if pos == 0 {
            m - 1
        } else {
            pos - 1
        }
    }

    /// Value at `x`, using the point value when `x` is within [`EPS_PT`] of a
    /// breakpoint.
    pub fn eval(&self, x: CirclePoint) -> i64 {
        if self.breakpoints.is_empty() {
            return self.constant;
        }
        match self.find_breakpoint(x) {
            Some(i) => self.point_values[i],
            None => self.values[self.gap_index(x)],
        }
    }

    /// Limit of the function from the right at `x`.
    pub fn eval_right(&self, x: CirclePoint) -> i64 {
        if self.breakpoints.is_empty() {
            return self.constant;
        }
        match self.find_breakpoint(x) {
            Some(i) => self.values[i],
            None => self.values[self.gap_index(x)],
        }
    }

    /// Limit of the function from the left at `x`.
    pub fn eval_left(&self, x: CirclePoint) -> i64 {
        if self.breakpoints.is_empty() {
            return self.constant;
        }
        let m = self.breakpoints.len();
        match self.find_breakpoint(x) {
            Some(i) => self.values[(i + m - 1) % m],
            None => self.values[self.gap_index(x)],
        }
    }

    /// Lebesgue integral `sum value_i * gap_length_i`.
    pub fn integral(&self) -> f64 {
        if self.breakpoints.is_empty() {
            return self.constant as f64;
        }
        let m = self.breakpoints.len();
        (0..m)
            .map(|i| {
                let len = self.breakpoints[i].forward_to(self.breakpoints[(i + 1) % m]);
                let len = if m == 1 { 1.0 } else { len };
                self.values[i] as f64 * len
            })
            .sum()
    }

    /// `self + sign * other`, exact at breakpoints.
    pub fn add(&self, other: &StepFunction, sign: i64) -> StepFunction {
        let mut pts = self.breakpoints.clone();
        pts.extend_from_slice(&other.breakpoints);
        let pts = merge_points(pts);
        if pts.is_empty() {
            return Self::constant(self.constant + sign * other.constant);
        }
        let point_values = pts
            .iter()
            .map(|&x| self.eval(x) + sign * other.eval(x))
            .collect();
        let values = pts
            .iter()
            .map(|&x| self.eval_right(x) + sign * other.eval_right(x))
            .collect();
        let mut f = StepFunction {
            breakpoints: pts,
            values,
            point_values,
            constant: 0,
        };
        f.canonicalize();
        f
    }

    pub fn scaled(&self, k: i64) -> StepFunction {
        let mut f = StepFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * k).collect(),
            point_values: self.point_values.iter().map(|v| v * k).collect(),
            constant: self.constant * k,
        };
        f.canonicalize();
        f
    }

    /// Pointwise equality everywhere, breakpoints included.
    pub fn equals(&self, other: &StepFunction) -> bool {
        self.add(other, -1).is_constant() == Some(0)
    }

    /// Drops breakpoints where the function is locally constant.
    fn canonicalize(&mut self) {
        let m = self.breakpoints.len();
        if m == 0 {
            return;
        }
        let keep: Vec<bool> = (0..m)
            .map(|i| {
                let prev = self.values[(i + m - 1) % m];
                !(prev == self.values[i] && self.point_values[i] == prev)
            })
            .collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        if keep.iter().all(|&k| !k) {
            *self = Self::constant(self.values[0]);
            return;
        }
        let mut bp = Vec::new();
        let mut vals = Vec::new();
        let mut pv = Vec::new();
        for i in 0..m {
            if keep[i] {
                bp.push(self.breakpoints[i]);
                pv.push(self.point_values[i]);
                vals.push(self.values[i]);
            }
        }
        // A dropped breakpoint never changes the gap value, so the gap after
        // each kept breakpoint already extends to the next kept one.
        self.breakpoints = bp;
        self.values = vals;
        self.point_values = pv;
    }
}

/// Sorts points and merges those within [`EPS_PT`] (cyclically).
fn merge_points(mut pts: Vec<CirclePoint>) -> Vec<CirclePoint> {
    pts.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let mut out: Vec<CirclePoint> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&last) if p.value() - last.value() <= EPS_PT => {}
            _ => out.push(p),
        }
    }
    if out.len() > 1 {
        let first = out[0];
        let last = *out.last().unwrap();
        if first.value() + 1.0 - last.value() <= EPS_PT {
            out.pop();
        }
    }
    out
}

/// Index of the sorted point within [`EPS_PT`] of `x`, if any.
fn locate(pts: &[CirclePoint], x: CirclePoint) -> Option<usize> {
    if pts.is_empty() {
        return None;
    }
    let pos = pts.partition_point(|b| b.value() < x.value());
    let m = pts.len();
    [pos % m, (pos + m - 1) % m]
        .into_iter()
        .find(|&i| pts[i].distance(x) <= EPS_PT)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> CirclePoint {
        CirclePoint::reduce(x).unwrap()
    }

    fn arc(a: f64, b: f64) -> Arc {
        Arc::from_reals(a, b).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(pt(1.25).value(), 0.25);
        assert!((pt(-0.1).value() - 0.9).abs() < 1e-15);
        assert_eq!(pt(0.0).value(), 0.0);
        assert!(CirclePoint::reduce(f64::NAN).is_err());
        assert!(CirclePoint::reduce(f64::INFINITY).is_err());
        // Tiny negative values must not reduce to 1.0.
        assert!(pt(-1e-18).value() < 1.0);
    }

    #[test]
    fn arc_contains_examples() {
        assert!(arc(0.25, 0.75).contains(pt(0.5), 0.0));
        assert!(arc(0.75, 0.25).contains(pt(0.0), 0.0));
        assert!(!arc(0.25, 0.75).contains(pt(0.2), 0.0));
        assert!(arc(0.25, 0.75).contains(pt(0.75), 0.0));
        assert!(arc(0.3, 0.3).contains(pt(0.3), 0.0));
        assert!(!arc(0.3, 0.3).contains(pt(0.31), 0.0));
    }

    #[test]
    fn arc_lengths() {
        assert_eq!(arc(0.3, 0.3).length(), 0.0);
        assert!((arc(0.75, 0.25).length() - 0.5).abs() < 1e-15);
        let (a, b) = (pt(0.1), pt(0.7));
        assert!((Arc::new(a, b).length() + Arc::new(b, a).length() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cyclic_order_base_is_minimum() {
        let ord = CyclicOrder::new(pt(0.6));
        assert!(ord.less(pt(0.6), pt(0.1)));
        assert!(ord.less(pt(0.9), pt(0.1)));
        assert!(!ord.less(pt(0.1), pt(0.7)));
    }

    #[test]
    fn indicator_sum_values() {
        let f = StepFunction::indicator(arc(0.0, 0.5));
        let g = StepFunction::indicator(arc(0.25, 0.75));
        let h = f.add(&g, 1);
        assert_eq!(h.eval(pt(0.1)), 1);
        assert_eq!(h.eval(pt(0.3)), 2);
        assert_eq!(h.eval(pt(0.6)), 1);
        assert_eq!(h.eval(pt(0.8)), 0);
        // Closed endpoints.
        assert_eq!(h.eval(pt(0.25)), 2);
        assert_eq!(h.eval(pt(0.5)), 2);
        assert_eq!(h.eval(pt(0.75)), 1);
        assert_eq!(h.eval(pt(0.0)), 1);
        assert_eq!(h.gap_values(), &[1, 2, 1, 0]);
        assert!((h.integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cancellation() {
        let f = StepFunction::indicator(arc(0.25, 0.75));
        let z = f.add(&f, -1);
        assert_eq!(z.is_constant(), Some(0));
        assert_eq!(z.eval(pt(0.75)), 0);
    }

    #[test]
    fn closed_vs_half_open_differ() {
        let closed = StepFunction::indicator(arc(0.0, 0.5));
        let half = StepFunction::indicator_half_open(arc(0.0, 0.5));
        assert!(closed.equals(&closed));
        assert!(!closed.equals(&half));
        assert_eq!(half.eval(pt(0.5)), 0);
        assert_eq!(half.eval(pt(0.0)), 1);
    }

    #[test]
    fn wrapping_indicator() {
        let f = StepFunction::indicator(arc(0.75, 0.25));
        assert_eq!(f.eval(pt(0.0)), 1);
        assert_eq!(f.eval(pt(0.9)), 1);
        assert_eq!(f.eval(pt(0.5)), 0);
        assert_eq!(f.eval(pt(0.25)), 1);
        assert!((f.integral() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_arc_indicator() {
        let f = StepFunction::indicator(arc(0.4, 0.4));
        assert_eq!(f.eval(pt(0.4)), 1);
        assert_eq!(f.eval(pt(0.41)), 0);
        assert_eq!(f.integral(), 0.0);
    }

    #[test]
    fn one_sided_limits() {
        let f = StepFunction::indicator(arc(0.2, 0.6));
        assert_eq!(f.eval_left(pt(0.2)), 0);
        assert_eq!(f.eval_right(pt(0.2)), 1);
        assert_eq!(f.eval_left(pt(0.6)), 1);
        assert_eq!(f.eval_right(pt(0.6)), 0);
    }

    #[test]
    fn weighted_sweep_matches_repeated_add() {
        let arcs = [
            (arc(0.1, 0.4), 2),
            (arc(0.3, 0.05), -1),
            (arc(0.4, 0.4), 3),
            (arc(0.9, 0.2), 1),
        ];
        let sweep = StepFunction::from_weighted_arcs(&arcs);
        let mut acc = StepFunction::zero();
        for (a, w) in arcs {
            acc = acc.add(&StepFunction::indicator(a).scaled(w), 1);
        }
        assert!(sweep.equals(&acc));
    }
}
