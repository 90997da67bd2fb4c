//! Escape-time functions, the flattening functionals and the coboundary.
//!
//! For a selector `tau` and a discontinuity `x`, `e_x = sum_n chi(tau^n I_x)`
//! and `int e_x f'` is a finite sum of increments of `f` over the arcs of
//! each `tau^n I_x`. A Lipschitz `f` is flattened on the flower exactly when
//! all of these vanish, and then `phi' = sum_{n >= 1} (f o tau^n)'`.

use crate::circle::{Arc, CirclePoint, StepFunction};
use crate::error::{Error, Result};
use crate::flower::{Discontinuity, Flower, Selector};
use crate::functions::CircleFunction;

/// Uniform truncation target for the default depth.
pub const DEFAULT_TARGET: f64 = 1e-10;
/// Flatness tolerance before truncation certificates are added.
pub const DEFAULT_FLAT_TOL: f64 = 1e-8;
const MAX_DEPTH: usize = 400;

/// `sum_{n > depth} K^{-n} = K^{-(depth + 1)} / (1 - K^{-1})`.
pub fn geometric_tail(expansion: f64, depth: usize) -> f64 {
    expansion.powi(-(depth as i32 + 1)) / (1.0 - 1.0 / expansion)
}

/// Smallest depth `N >= 1` with `lipschitz * K^{-(N+1)} / (1 - K^{-1}) <= target`.
pub fn default_depth(lipschitz: f64, expansion: f64, target: f64) -> usize {
    (1..MAX_DEPTH)
        .find(|&n| lipschitz * geometric_tail(expansion, n) <= target)
        .unwrap_or(MAX_DEPTH)
}

/// `sum_{n=0}^{N} chi(tau^n J)` for `J = I_x` or `J = J_x`.
#[derive(Clone, Debug)]
pub struct EscapeFunction {
    /// `levels[n]` holds the arcs of `tau^n J`.
    pub levels: Vec<Vec<Arc>>,
    pub depth: usize,
    /// Bound on the `L^1` norm of the omitted terms.
    pub tail_bound_l1: f64,
}

impl EscapeFunction {
    pub fn to_step(&self) -> StepFunction {
        let arcs: Vec<(Arc, i64)> = self.levels.iter().flatten().map(|&a| (a, 1)).collect();
        StepFunction::from_weighted_arcs(&arcs)
    }

    /// `int e f'`, truncated, in a fixed summation order.
    pub fn integrate_derivative<F: CircleFunction + ?Sized>(&self, f: &F) -> f64 {
        self.levels
            .iter()
            .map(|lvl| lvl.iter().map(|a| f.increment(a)).sum::<f64>())
            .sum()
    }
}

fn escape_over(tau: &Selector, arc: &Arc, depth: usize) -> EscapeFunction {
    EscapeFunction {
        levels: tau.push_arc_levels(arc, depth),
        depth,
        tail_bound_l1: arc.length() * geometric_tail(tau.expansion(), depth),
    }
}

/// The truncated escape function `e_x`.
pub fn escape_function(tau: &Selector, x: &Discontinuity, depth: usize) -> EscapeFunction {
    escape_over(tau, &x.i_arc, depth)
}

/// The truncated `d_x`, built from `J_x` instead of `I_x`.
pub fn escape_function_dual(tau: &Selector, x: &Discontinuity, depth: usize) -> EscapeFunction {
    escape_over(tau, &x.j_arc, depth)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeTime {
    Finite(usize),
    Exceeded,
}

/// First `n >= 0` with `T^n(t)` outside the (closed) 1-flower, or
/// `Exceeded` once `n` reaches `cap`.
pub fn escape_time_direct(flower: &Flower, t: CirclePoint, cap: usize) -> Result<EscapeTime> {
    if flower.num_petals() != 1 {
        return Err(Error::OutOfRange(format!(
            "escape times need a 1-flower, got {} petals",
            flower.num_petals()
        )));
    }
    let petal = flower.petals()[0];
    let map = flower.map();
    let mut x = t;
    for n in 0..cap {
        if !petal.contains(x, 0.0) {
            return Ok(EscapeTime::Finite(n));
        }
        x = map.apply(x);
    }
    Ok(EscapeTime::Exceeded)
}

/// A truncated value with its analytic error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
}

impl Bounded {
    /// `|value| <= error_bound`, with a little room for rounding.
    pub fn vanishes(&self) -> bool {
        self.value.abs() <= self.error_bound + 64.0 * f64::EPSILON * (1.0 + self.error_bound)
    }
}

fn bound_for<F: CircleFunction + ?Sized>(tau: &Selector, f: &F, arc: &Arc, depth: usize) -> f64 {
    f.lipschitz_constant() * arc.length() * geometric_tail(tau.expansion(), depth)
}

/// `int e_x f'` truncated at `depth`.
pub fn functional<F: CircleFunction + ?Sized>(
    tau: &Selector,
    x: &Discontinuity,
    f: &F,
    depth: usize,
) -> Bounded {
    Bounded {
        value: escape_function(tau, x, depth).integrate_derivative(f),
        error_bound: bound_for(tau, f, &x.i_arc, depth),
    }
}

/// `int d_x f'` truncated at `depth`.
pub fn functional_dual<F: CircleFunction + ?Sized>(
    tau: &Selector,
    x: &Discontinuity,
    f: &F,
    depth: usize,
) -> Bounded {
    Bounded {
        value: escape_function_dual(tau, x, depth).integrate_derivative(f),
        error_bound: bound_for(tau, f, &x.j_arc, depth),
    }
}

/// `sum_{n=0}^{N} int_{I_x} (f o tau^n)'`, summed piece by piece over the
/// continuity intervals of each `tau^n` inside `I_x`.
pub fn functional_direct<F: CircleFunction + ?Sized>(
    tau: &Selector,
    x: &Discontinuity,
    f: &F,
    depth: usize,
) -> f64 {
    (0..=depth)
        .map(|n| integrate_iterate(tau, f, &x.i_arc, n))
        .sum()
}

/// `int_J (f o tau^n)'`, splitting `J` at the discontinuities of `tau^n`.
pub fn integrate_iterate<F: CircleFunction + ?Sized>(
    tau: &Selector,
    f: &F,
    arc: &Arc,
    n: usize,
) -> f64 {
    if arc.is_degenerate() {
        return 0.0;
    }
    let len = arc.length();
    let mut cuts: Vec<(f64, CirclePoint)> = tau
        .discontinuity_set(n)
        .into_iter()
        .filter_map(|d| {
            let off = arc.left.forward_to(d);
            (off > crate::EPS_PT && off < len - crate::EPS_PT).then_some((off, d))
        })
        .collect();
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut start = arc.left;
    for (_, c) in cuts.into_iter().chain(std::iter::once((len, arc.right))) {
        let piece = Arc::new(tau.right_limit_n(start, n), tau.left_limit_n(c, n));
        total += f.increment(&piece);
        start = c;
    }
    total
}

/// All `p` functionals of a selector, in discontinuity order.
pub fn functionals<F: CircleFunction + ?Sized>(tau: &Selector, f: &F, depth: usize) -> Vec<Bounded> {
    tau.discontinuities()
        .iter()
        .map(|x| functional(tau, x, f, depth))
        .collect()
}

/// `phi^{(N)}(x) = sum_{n=1}^{N} int_{anchor}^{x} (f o tau^n)'`.
#[derive(Clone, Debug)]
pub struct Coboundary<F> {
    selector: Selector,
    f: F,
    depth: usize,
    anchor: CirclePoint,
    error_bound: f64,
}

/// Builds `phi^{(N)}` with `phi(anchor) = 0`; `anchor` defaults to the left
/// endpoint of the first petal.
pub fn build_coboundary<F: CircleFunction>(
    tau: &Selector,
    f: F,
    depth: usize,
    anchor: Option<CirclePoint>,
) -> Coboundary<F> {
    let depth = depth.max(1);
    let anchor = anchor.unwrap_or(tau.flower().petals()[0].left);
    let error_bound = f.lipschitz_constant() * geometric_tail(tau.expansion(), depth);
    Coboundary {
        selector: tau.clone(),
        f,
        depth,
        anchor,
        error_bound,
    }
}

impl<F: CircleFunction> Coboundary<F> {
    pub fn eval(&self, x: CirclePoint) -> f64 {
        let arc = Arc::new(self.anchor, x);
        if arc.is_degenerate() {
            return 0.0;
        }
        self.selector
            .push_arc_levels(&arc, self.depth)
            .iter()
            .skip(1)
            .map(|lvl| lvl.iter().map(|a| self.f.increment(a)).sum::<f64>())
            .sum()
    }

    /// Uniform bound on `|phi^{(N)} - phi|`.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn anchor(&self) -> CirclePoint {
        self.anchor
    }

    pub fn function(&self) -> &F {
        &self.f
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    /// `f + phi - phi o T` at `x`.
    pub fn flattened_value(&self, x: CirclePoint) -> f64 {
        let tx = self.selector.map().apply(x);
        self.f.eval(x) + self.eval(x) - self.eval(tx)
    }

    /// Bound on the error of [`Coboundary::flattened_value`].
    pub fn flattened_error_bound(&self) -> f64 {
        2.0 * self.error_bound
    }
}

/// `f + phi - phi o T` as a function in its own right.
#[derive(Debug)]
pub struct FlattenedFunction<'a, F> {
    pub coboundary: &'a Coboundary<F>,
}

impl<F: CircleFunction> CircleFunction for FlattenedFunction<'_, F> {
    fn eval(&self, x: CirclePoint) -> f64 {
        self.coboundary.flattened_value(x)
    }

    fn lipschitz_constant(&self) -> f64 {
        let c = self.coboundary;
        let lf = c.f.lipschitz_constant();
        let k = c.selector.expansion();
        let lphi = lf / (k - 1.0);
        lf + lphi * (1.0 + c.selector.map().lipschitz())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatReport {
    pub flat: bool,
    pub constant: f64,
    pub max_deviation: f64,
    /// Tolerance actually applied: `tol` plus truncation certificates.
    pub threshold: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Samples `f + phi - phi o T` on `samples` points of each petal, endpoints
/// included, and tests whether it is constant.
pub fn is_flat<F: CircleFunction>(cob: &Coboundary<F>, samples: usize, tol: f64) -> FlatReport {
    let samples = samples.max(2);
    let mut pts = Vec::new();
    for petal in cob.selector.flower().petals() {
        for i in 0..samples {
            let x = petal.at(i as f64 / (samples - 1) as f64);
            pts.push((x.value(), cob.flattened_value(x)));
        }
    }
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let max_deviation = pts.iter().fold(0.0f64, |m, p| m.max((p.1 - mean).abs()));
    // Each sample is within 2 eb of the exact value, so two samples differ
    // from each other's exact values by at most 4 eb.
    let threshold = tol + 2.0 * cob.flattened_error_bound();
    FlatReport {
        flat: max_deviation <= threshold,
        constant: mean,
        max_deviation,
        threshold,
        samples: pts,
    }
}

/// `max f <= alpha + tol` over a uniform grid; also returns the grid maximum.
pub fn normal_form_check<F: CircleFunction + ?Sized>(
    f: &F,
    alpha_estimate: f64,
    samples: usize,
    tol: f64,
) -> (bool, f64) {
    let samples = samples.max(1);
    let max = (0..samples)
        .map(|i| f.eval(CirclePoint::wrap(i as f64 / samples as f64)))
        .fold(f64::NEG_INFINITY, f64::max);
    (max <= alpha_estimate + tol, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ExpandingMap;
    use crate::functions::{paper_example_f, TrigPolynomial};
    use approx::assert_abs_diff_eq;

    fn semicircle() -> Flower {
        Flower::from_reals(&[(0.25, 0.75)], &ExpandingMap::linear(2).unwrap()).unwrap()
    }

    fn pt(x: f64) -> CirclePoint {
        CirclePoint::reduce(x).unwrap()
    }

    #[test]
    fn escape_values() {
        let f = semicircle();
        let tau = f.default_selector();
        let x = &tau.discontinuities()[0];
        let e0 = escape_function(&tau, x, 0);
        assert!(e0.to_step().equals(&f.indicator()));
        assert_abs_diff_eq!(e0.tail_bound_l1, 0.5, epsilon = 1e-15);
        let e = escape_function(&tau, x, 20).to_step();
        assert_eq!(e.eval(pt(0.3)), 2);
        assert_eq!(e.eval(pt(0.2)), 0);
    }

    #[test]
    fn direct_escape_times() {
        let f = semicircle();
        assert_eq!(escape_time_direct(&f, pt(0.0), 10).unwrap(), EscapeTime::Finite(0));
        assert_eq!(escape_time_direct(&f, pt(0.5), 10).unwrap(), EscapeTime::Finite(1));
        assert_eq!(escape_time_direct(&f, pt(0.3), 10).unwrap(), EscapeTime::Finite(2));
        assert_eq!(escape_time_direct(&f, pt(1.0 / 3.0), 10).unwrap(), EscapeTime::Exceeded);
    }

    #[test]
    fn constant_functional_is_zero() {
        let f = semicircle();
        let tau = f.default_selector();
        let c = TrigPolynomial::constant(2.5);
        for n in [0, 3, 30] {
            let v = functional(&tau, &tau.discontinuities()[0], &c, n);
            assert_eq!(v.value, 0.0);
        }
    }

    #[test]
    fn cosine_symmetric_flower() {
        let map = ExpandingMap::linear(2).unwrap();
        let f = Flower::from_reals(&[(0.75, 0.25)], &map).unwrap();
        let tau = f.default_selector();
        let cos = TrigPolynomial::new(vec![1.0], vec![], 0.0).unwrap();
        for n in [0, 5, 30] {
            let v = functional(&tau, &tau.discontinuities()[0], &cos, n);
            assert!(v.value.abs() < 1e-14, "{}", v.value);
        }
    }

    #[test]
    fn both_summation_orders_agree() {
        let map = ExpandingMap::linear(4).unwrap();
        let f = Flower::from_reals(&[(0.05, 0.15), (0.4, 0.55)], &map).unwrap();
        let g = TrigPolynomial::new(vec![0.3, -0.2], vec![0.7], 0.1).unwrap();
        for tau in f.all_selectors() {
            for x in tau.discontinuities() {
                let a = functional(&tau, &x, &g, 12).value;
                let b = functional_direct(&tau, &x, &g, 12);
                assert_abs_diff_eq!(a, b, epsilon = 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn example_is_flat() {
        let gamma = 0.1;
        let map = ExpandingMap::linear(2).unwrap();
        let fl = Flower::from_reals(&[(gamma, gamma + 0.5)], &map).unwrap();
        let tau = fl.default_selector();
        let f = paper_example_f(gamma).unwrap();
        let n = default_depth(f.lipschitz_constant(), 2.0, DEFAULT_TARGET);
        assert!(functional(&tau, &tau.discontinuities()[0], &f, n).vanishes());
        let cob = build_coboundary(&tau, &f, n, None);
        let r = is_flat(&cob, 200, DEFAULT_FLAT_TOL);
        assert!(r.flat);
        assert!(r.constant.abs() < 1e-9);
        let v = cob.flattened_value(pt(gamma + 0.75));
        assert_abs_diff_eq!(v, 0.25 - gamma / (1.0 - 2.0 * gamma), epsilon = 1e-9);
        let fg = FlattenedFunction { coboundary: &cob };
        assert!(normal_form_check(&f, 0.0, 1000, 1e-12).0);
        assert!(!normal_form_check(&fg, 0.0, 1000, 1e-12).0);
    }

    #[test]
    fn depth_rule() {
        let n = default_depth(20.0, 2.0, 1e-10);
        assert!(20.0 * geometric_tail(2.0, n) <= 1e-10);
        assert!(20.0 * geometric_tail(2.0, n - 1) > 1e-10);
        assert_eq!(default_depth(0.0, 2.0, 1e-10), 1);
    }
}
