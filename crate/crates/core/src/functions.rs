//! Lipschitz test functions with exact evaluation.
//!
//! The flattening machinery only ever integrates `f'` against step functions,
//! which reduces to sums of increments `f(b) - f(a)`; no derivative is stored.

use std::f64::consts::TAU;
use std::fmt::Debug;

use rand::Rng;

use crate::circle::{Arc, CirclePoint};
use crate::dynamics::ExpandingMap;
use crate::error::{Error, Result};
use crate::flower::Flower;

/// Closure tolerance for piecewise-linear slopes, relative to total variation.
pub const CLOSURE_TOL: f64 = 1e-12;

pub trait CircleFunction: Send + Sync + Debug {
    fn eval(&self, x: CirclePoint) -> f64;

    /// An upper bound on the Lipschitz constant.
    fn lipschitz_constant(&self) -> f64;

    /// `f(right) - f(left)`.
    fn increment(&self, a: &Arc) -> f64 {
        if a.is_degenerate() {
            return 0.0;
        }
        self.eval(a.right) - self.eval(a.left)
    }
}

impl<F: CircleFunction + ?Sized> CircleFunction for Box<F> {
    fn eval(&self, x: CirclePoint) -> f64 {
        (**self).eval(x)
    }
    fn lipschitz_constant(&self) -> f64 {
        (**self).lipschitz_constant()
    }
    fn increment(&self, a: &Arc) -> f64 {
        (**self).increment(a)
    }
}

impl<F: CircleFunction + ?Sized> CircleFunction for &F {
    fn eval(&self, x: CirclePoint) -> f64 {
        (**self).eval(x)
    }
    fn lipschitz_constant(&self) -> f64 {
        (**self).lipschitz_constant()
    }
    fn increment(&self, a: &Arc) -> f64 {
        (**self).increment(a)
    }
}

/// Continuous piecewise-linear function on the circle.
///
/// Gap `i` runs from `breakpoints[i]` to `breakpoints[i + 1]`, the last one
/// wrapping back to `breakpoints[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearFunction {
    breakpoints: Vec<CirclePoint>,
    /// Offset of each breakpoint from `breakpoints[0]`.
    offsets: Vec<f64>,
    slopes: Vec<f64>,
    /// Value at each breakpoint.
    values: Vec<f64>,
}

impl PiecewiseLinearFunction {
    /// Breakpoints must be distinct and listed in positive cyclic order.
    /// The slopes must close up around the circle; the last slope is then
    /// re-derived so that they do so exactly.
    pub fn new(breakpoints: &[f64], slopes: &[f64], anchor: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidFunction("no breakpoints".into()));
        }
        if breakpoints.len() != slopes.len() {
            return Err(Error::InvalidFunction(format!(
                "{} breakpoints but {} slopes",
                breakpoints.len(),
                slopes.len()
            )));
        }
        if let Some(&s) = slopes.iter().find(|s| !s.is_finite()) {
            return Err(Error::NonFinite(s));
        }
        if !anchor.is_finite() {
            return Err(Error::NonFinite(anchor));
        }
        let pts = breakpoints
            .iter()
            .map(|&b| CirclePoint::reduce(b))
            .collect::<Result<Vec<_>>>()?;
        let base = pts[0];
        let offsets: Vec<f64> = pts.iter().map(|&p| base.forward_to(p)).collect();
        for w in offsets.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidFunction(
                    "breakpoints must be distinct and cyclically increasing".into(),
                ));
            }
        }
        let m = pts.len();
        let lengths: Vec<f64> = (0..m)
            .map(|i| if i + 1 < m { offsets[i + 1] - offsets[i] } else { 1.0 - offsets[i] })
            .collect();
        let drift: f64 = slopes.iter().zip(&lengths).map(|(s, l)| s * l).sum();
        let variation: f64 = slopes.iter().zip(&lengths).map(|(s, l)| s.abs() * l).sum();
        if drift.abs() > CLOSURE_TOL * (1.0 + variation) {
            return Err(Error::InvalidFunction(format!(
                "slopes do not close up: sum of slope * length is {drift}"
            )));
        }
        let mut slopes = slopes.to_vec();
        let head: f64 = slopes[..m - 1].iter().zip(&lengths).map(|(s, l)| s * l).sum();
        slopes[m - 1] = -head / lengths[m - 1];
        let mut values = Vec::with_capacity(m);
        let mut v = anchor;
        for i in 0..m {
            values.push(v);
            v += slopes[i] * lengths[i];
        }
        Ok(PiecewiseLinearFunction {
            breakpoints: pts,
            offsets,
            slopes,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[CirclePoint] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// The value at each breakpoint.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn gap_of(&self, off: f64) -> usize {
        self.offsets.partition_point(|&o| o <= off).saturating_sub(1)
    }
}

impl CircleFunction for PiecewiseLinearFunction {
    fn eval(&self, x: CirclePoint) -> f64 {
        let off = self.breakpoints[0].forward_to(x);
        let i = self.gap_of(off);
        self.values[i] + self.slopes[i] * (off - self.offsets[i])
    }

    fn lipschitz_constant(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// `c + sum_j (a_j cos 2 pi j x + b_j sin 2 pi j x)`, frequencies from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub constant: f64,
}

impl TrigPolynomial {
    pub fn new(cos: Vec<f64>, sin: Vec<f64>, constant: f64) -> Result<Self> {
        for &c in cos.iter().chain(&sin).chain(std::iter::once(&constant)) {
            if !c.is_finite() {
                return Err(Error::NonFinite(c));
            }
        }
        Ok(TrigPolynomial { cos, sin, constant })
    }

    pub fn constant(c: f64) -> Self {
        TrigPolynomial {
            cos: Vec::new(),
            sin: Vec::new(),
            constant: c,
        }
    }

    /// `cos 2 pi (x - theta)`.
    pub fn shifted_cosine(theta: f64) -> Self {
        TrigPolynomial {
            cos: vec![(TAU * theta).cos()],
            sin: vec![(TAU * theta).sin()],
            constant: 0.0,
        }
    }
}

impl CircleFunction for TrigPolynomial {
    fn eval(&self, x: CirclePoint) -> f64 {
        let t = TAU * x.value();
        let mut s = self.constant;
        for (j, a) in self.cos.iter().enumerate() {
            s += a * (t * (j + 1) as f64).cos();
        }
        for (j, b) in self.sin.iter().enumerate() {
            s += b * (t * (j + 1) as f64).sin();
        }
        s
    }

    fn lipschitz_constant(&self) -> f64 {
        let m = self.cos.len().max(self.sin.len());
        let coef = |v: &Vec<f64>, j: usize| v.get(j).map_or(0.0, |c| c.abs());
        TAU * (0..m)
            .map(|j| (j + 1) as f64 * (coef(&self.cos, j) + coef(&self.sin, j)))
            .sum::<f64>()
    }
}

/// `c + psi o T - psi + h`. With `h` vanishing on a flower `F`, this is
/// flattened on `F` with constant `c`.
#[derive(Debug)]
pub struct CohomologousFunction {
    pub constant: f64,
    pub psi: Box<dyn CircleFunction>,
    pub h: Box<dyn CircleFunction>,
    pub map: ExpandingMap,
}

impl CircleFunction for CohomologousFunction {
    fn eval(&self, x: CirclePoint) -> f64 {
        self.constant + self.psi.eval(self.map.apply(x)) - self.psi.eval(x) + self.h.eval(x)
    }

    fn lipschitz_constant(&self) -> f64 {
        let lp = self.psi.lipschitz_constant();
        lp * (self.map.lipschitz() + 1.0) + self.h.lipschitz_constant()
    }
}

/// Random closed piecewise-linear function with `pieces` pieces and slopes
/// of magnitude roughly up to `max_slope`.
pub fn random_pwl<R: Rng + ?Sized>(pieces: usize, max_slope: f64, rng: &mut R) -> PiecewiseLinearFunction {
    let pieces = pieces.max(2);
    loop {
        let mut cuts: Vec<f64> = (0..pieces).map(|_| rng.gen::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        let lengths: Vec<f64> = (0..pieces)
            .map(|i| if i + 1 < pieces { cuts[i + 1] - cuts[i] } else { cuts[0] + 1.0 - cuts[i] })
            .collect();
        if lengths.iter().any(|&l| l < 0.02) {
            continue;
        }
        let mut slopes: Vec<f64> = (0..pieces).map(|_| rng.gen_range(-max_slope..max_slope)).collect();
        let head: f64 = slopes[..pieces - 1].iter().zip(&lengths).map(|(s, l)| s * l).sum();
        slopes[pieces - 1] = -head / lengths[pieces - 1];
        if let Ok(f) = PiecewiseLinearFunction::new(&cuts, &slopes, rng.gen_range(-1.0..1.0)) {
            return f;
        }
    }
}

/// Random tent function supported in the gaps of `flower`, zero on every petal.
pub fn random_gap_bump<R: Rng + ?Sized>(flower: &Flower, height: f64, rng: &mut R) -> PiecewiseLinearFunction {
    let petals = flower.petals();
    let p = petals.len();
    let mut points = Vec::with_capacity(3 * p);
    let mut slopes = Vec::with_capacity(3 * p);
    let base = petals[0].left;
    for i in 0..p {
        let here = petals[i];
        let next = petals[(i + 1) % p];
        let gap = Arc::new(here.right, next.left);
        let t = rng.gen_range(0.2..0.8);
        let peak = rng.gen_range(-height..height);
        let up = t * gap.length();
        let down = gap.length() - up;
        let lift = |x: CirclePoint| base.value() + base.forward_to(x);
        points.push(lift(here.left));
        slopes.push(0.0);
        points.push(lift(here.right));
        slopes.push(peak / up);
        points.push(lift(gap.at(t)));
        slopes.push(-peak / down);
    }
    PiecewiseLinearFunction::new(&points, &slopes, 0.0).expect("gap bumps close up")
}

/// `c + psi o T - psi + h` with random `psi`, `c` and gap bump `h`, so it is
/// flattened on `flower` with constant `c`.
pub fn random_flattenable<R: Rng + ?Sized>(flower: &Flower, rng: &mut R) -> CohomologousFunction {
    let pieces = rng.gen_range(2..8);
    CohomologousFunction {
        constant: rng.gen_range(-1.0..1.0),
        psi: Box::new(random_pwl(pieces, 3.0, rng)),
        h: Box::new(random_gap_bump(flower, 0.5, rng)),
        map: flower.map().clone(),
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0 / 6.0) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} must lie in (0, 1/6)")));
    }
    Ok(())
}

/// Piecewise-linear `f` with maximum 0, vanishing on `tau(F)` for the
/// semicircle `F = [gamma, gamma + 1/2]` under `T(x) = 2x`.
pub fn paper_example_f(gamma: f64) -> Result<PiecewiseLinearFunction> {
    check_gamma(gamma)?;
    let g = gamma;
    PiecewiseLinearFunction::new(
        &[g, g / 2.0 + 0.25, g + 0.25, g / 2.0 + 0.5, g + 0.5, g + 0.75],
        &[0.0, -2.0 / g, 2.0 / (0.5 - g), 0.0, -1.0, 1.0],
        0.0,
    )
}

/// The transfer function `phi` flattening [`paper_example_f`] on
/// `[gamma, gamma + 1/2]`, zero on that arc.
pub fn paper_example_phi(gamma: f64) -> Result<PiecewiseLinearFunction> {
    check_gamma(gamma)?;
    let g = gamma;
    PiecewiseLinearFunction::new(
        &[g, g + 0.5, 2.0 * g + 0.5],
        &[0.0, -1.0 / g, 1.0 / (0.5 - g)],
        0.0,
    )
}
