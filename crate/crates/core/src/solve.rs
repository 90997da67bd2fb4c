//! The one-parameter family of 1-flowers, the pre-Sturmian equation
//! `Phi(gamma) = int e_{F_gamma} f' = 0`, Sturmian measure estimates, and the
//! rank test for the `p` functionals of a `p`-flower.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::circle::{Arc, CirclePoint, StepFunction, EPS_PT};
use crate::dynamics::{ExpandingMap, PeriodicOrbit, RationalPoint};
use crate::error::{Error, Result};
use crate::flatten::{escape_function, functional, Bounded};
use crate::flower::{merge_touching, Flower};
use crate::functions::CircleFunction;

/// Floor of the zero threshold used when classifying scan values.
pub const ZERO_FLOOR: f64 = 1e-9;
/// Singular values at or below this count as zero in [`rank_test`].
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Periodic candidates are enumerated while `k^n <= 2^16`.
const EXACT_ORBIT_BUDGET: u64 = 1 << 16;

/// `gamma -> F_gamma = [gamma, b(gamma)]`, where `b(gamma)` is the point at
/// which the image of the arc has wrapped once round the circle.
#[derive(Clone, Debug)]
pub struct OneFlowerFamily {
    map: ExpandingMap,
}

impl OneFlowerFamily {
    pub fn new(map: ExpandingMap) -> Self {
        OneFlowerFamily { map }
    }

    pub fn map(&self) -> &ExpandingMap {
        &self.map
    }

    pub fn left(&self, gamma: f64) -> CirclePoint {
        CirclePoint::wrap(gamma)
    }

    pub fn right(&self, gamma: f64) -> CirclePoint {
        self.map.advance_by_image(self.left(gamma), 1.0)
    }

    pub fn flower(&self, gamma: f64) -> Result<Flower> {
        if !gamma.is_finite() {
            return Err(Error::NonFinite(gamma));
        }
        let arc = Arc::new(self.left(gamma), self.right(gamma));
        Flower::new(vec![arc], &self.map)
    }

    /// The parameter whose flower has right endpoint `b`.
    pub fn gamma_with_right_endpoint(&self, b: CirclePoint) -> f64 {
        self.map.retreat_by_image(b, 1.0).value()
    }
}

/// `int e_{F_gamma} f'` truncated at `depth`.
pub fn phi_of_gamma<F: CircleFunction + ?Sized>(
    family: &OneFlowerFamily,
    f: &F,
    gamma: f64,
    depth: usize,
) -> Result<Bounded> {
    let flower = family.flower(gamma)?;
    let tau = flower.default_selector();
    let x = &tau.discontinuities()[0];
    Ok(functional(&tau, x, f, depth))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub gamma: f64,
    pub phi: f64,
    pub error_bound: f64,
}

/// `Phi` on the grid `gamma_j = j / grid_size`, in grid order.
pub fn scan<F: CircleFunction + ?Sized>(
    family: &OneFlowerFamily,
    f: &F,
    grid_size: usize,
    depth: usize,
) -> Result<Vec<ScanRow>> {
    if grid_size < 2 {
        return Err(Error::OutOfRange(format!("grid size {grid_size} < 2")));
    }
    (0..grid_size)
        .into_par_iter()
        .map(|j| {
            let gamma = j as f64 / grid_size as f64;
            let b = phi_of_gamma(family, f, gamma, depth)?;
            Ok(ScanRow {
                gamma,
                phi: b.value,
                error_bound: b.error_bound,
            })
        })
        .collect()
}

/// Bound on `sum_{n <= N} |tau_g^n F_g (sym. diff.) tau_d^n F_d|` when both
/// endpoints move by less than `eps0`, from the recurrence
/// `D_n <= 2 K^{-1} (C eps0 + D_{n-1})`, `D_0 <= 2 eps0`.
pub fn continuity_modulus(expansion: f64, lipschitz: f64, depth: usize, eps0: f64) -> f64 {
    let mut d = 2.0 * eps0;
    let mut total = d;
    for _ in 0..depth {
        d = 2.0 / expansion * (lipschitz * eps0 + d);
        total += d;
    }
    total
}

/// A bracket `[gamma_low, gamma_high]` on the lifted parameter line, so
/// `gamma_high` may exceed 1 when the bracket wraps.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroInterval {
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub phi_low: f64,
    pub phi_high: f64,
    pub resolution: f64,
    /// `|Phi|` stayed below threshold over at least three grid points.
    pub plateau: bool,
}

impl ZeroInterval {
    pub fn midpoint(&self) -> f64 {
        CirclePoint::wrap(0.5 * (self.gamma_low + self.gamma_high)).value()
    }

    pub fn width(&self) -> f64 {
        self.gamma_high - self.gamma_low
    }

    /// Whether the bracket contains `gamma` (taken mod 1) up to `tol`.
    pub fn contains(&self, gamma: f64, tol: f64) -> bool {
        let off = CirclePoint::wrap(self.gamma_low).forward_to(CirclePoint::wrap(gamma));
        off <= self.width() + tol || off >= 1.0 - tol
    }
}

fn zero_threshold(error_bound: f64) -> f64 {
    ZERO_FLOOR.max(2.0 * error_bound)
}

fn classify(row: &ScanRow) -> i8 {
    if row.phi.abs() <= zero_threshold(row.error_bound) {
        0
    } else if row.phi > 0.0 {
        1
    } else {
        -1
    }
}

/// Zeros of `Phi`: grid scan, then bisection on every strict sign change.
/// Runs of near-zero values are reported whole.
pub fn solve_pre_sturmian<F: CircleFunction + ?Sized>(
    family: &OneFlowerFamily,
    f: &F,
    grid_size: usize,
    depth: usize,
    resolution: f64,
) -> Result<Vec<ZeroInterval>> {
    if !(resolution > 0.0) {
        return Err(Error::OutOfRange(format!("resolution {resolution} must be positive")));
    }
    let rows = scan(family, f, grid_size, depth)?;
    let m = rows.len();
    let signs: Vec<i8> = rows.iter().map(classify).collect();
    let h = 1.0 / m as f64;
    if signs.iter().all(|&s| s == 0) {
        return Ok(vec![ZeroInterval {
            gamma_low: 0.0,
            gamma_high: 1.0,
            phi_low: rows[0].phi,
            phi_high: rows[0].phi,
            resolution: h,
            plateau: true,
        }]);
    }
    // Walk cyclically from a nonzero grid point so that no run wraps.
    let start = signs.iter().position(|&s| s != 0).unwrap();
    let mut out = Vec::new();
    let mut i = 0;
    while i < m {
        let j = (start + i) % m;
        if signs[j] == 0 {
            let mut len = 0;
            while signs[(j + len) % m] == 0 {
                len += 1;
            }
            let last = (j + len - 1) % m;
            out.push(ZeroInterval {
                gamma_low: rows[j].gamma,
                gamma_high: rows[j].gamma + (len - 1) as f64 * h,
                phi_low: rows[j].phi,
                phi_high: rows[last].phi,
                resolution: h,
                plateau: len >= 3,
            });
            i += len;
            continue;
        }
        let next = (j + 1) % m;
        if signs[next] != 0 && signs[next] != signs[j] {
            out.push(bisect(family, f, depth, rows[j], rows[j].gamma + h, rows[next].phi, resolution)?);
        }
        i += 1;
    }
    if out.is_empty() {
        let (min, max) = rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.phi), b.max(r.phi)));
        return Err(Error::NoSignChange { min, max });
    }
    out.sort_by(|a, b| a.gamma_low.total_cmp(&b.gamma_low));
    Ok(out)
}

fn bisect<F: CircleFunction + ?Sized>(
    family: &OneFlowerFamily,
    f: &F,
    depth: usize,
    low: ScanRow,
    high_gamma: f64,
    high_phi: f64,
    resolution: f64,
) -> Result<ZeroInterval> {
    let (mut lo, mut hi) = (low.gamma, high_gamma);
    let (mut plo, mut phi_hi) = (low.phi, high_phi);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = phi_of_gamma(family, f, mid, depth)?.value;
        if v == 0.0 {
            lo = mid;
            hi = mid;
            plo = v;
            phi_hi = v;
            break;
        }
        if (v > 0.0) == (plo > 0.0) {
            lo = mid;
            plo = v;
        } else {
            hi = mid;
            phi_hi = v;
        }
    }
    Ok(ZeroInterval {
        gamma_low: lo,
        gamma_high: hi,
        phi_low: plo,
        phi_high: phi_hi,
        resolution,
        plateau: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SturmianOptions {
    pub burn_in: usize,
    pub length: usize,
    /// Depth of the nested arcs `tau^n(F)` approximating the support.
    pub depth: usize,
    /// Longest period looked for along the floating-point orbit.
    pub max_period: usize,
}

impl Default for SturmianOptions {
    fn default() -> Self {
        SturmianOptions {
            burn_in: 1000,
            length: 100_000,
            depth: 30,
            max_period: 512,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SturmianEstimate {
    pub support_arcs: Vec<Arc>,
    pub support_length: f64,
    pub empirical_points: Vec<CirclePoint>,
    pub integral_of_f: f64,
    /// Fraction of time spent in each branch of the map.
    pub coding_frequencies: Vec<f64>,
    /// Exact orbit, when the measure is a periodic orbit of an integer map.
    pub periodic: Option<PeriodicOrbit>,
    /// Orbit points in floating point, whenever a periodic orbit is found.
    pub periodic_points: Option<Vec<CirclePoint>>,
}

/// Sturmian estimates for one map, with the exact periodic candidates
/// enumerated once.
#[derive(Clone, Debug)]
pub struct SturmianEstimator {
    map: ExpandingMap,
    options: SturmianOptions,
    candidates: Vec<(PeriodicOrbit, Vec<CirclePoint>)>,
}

impl SturmianEstimator {
    pub fn new(map: &ExpandingMap, options: SturmianOptions) -> Result<Self> {
        if options.burn_in == 0 || options.length == 0 {
            return Err(Error::OutOfRange("burn_in and length must be positive".into()));
        }
        let mut candidates = Vec::new();
        if let Some(k) = map.linear_degree() {
            let mut period = 0;
            while period < 16 && k.pow(period as u32 + 1) <= EXACT_ORBIT_BUDGET {
                period += 1;
            }
            for orbit in map.periodic_orbits(period)? {
                let pts = orbit.points.iter().map(|p| p.to_point()).collect();
                candidates.push((orbit, pts));
            }
        }
        Ok(SturmianEstimator {
            map: map.clone(),
            options,
            candidates,
        })
    }

    pub fn options(&self) -> &SturmianOptions {
        &self.options
    }

    /// The invariant measure carried by the 1-flower.
    pub fn estimate<F: CircleFunction + ?Sized>(&self, flower: &Flower, f: &F) -> Result<SturmianEstimate> {
        if flower.num_petals() != 1 {
            return Err(Error::OutOfRange(format!(
                "Sturmian estimates need a 1-flower, got {} petals",
                flower.num_petals()
            )));
        }
        let opts = &self.options;
        let tau = flower.default_selector();
        let petal = flower.petals()[0];
        let support_arcs = merge_touching(&tau.push_arc(&petal, opts.depth));
        let support_length = support_arcs.iter().map(|a| a.length()).sum();

        let mut x = petal.midpoint();
        for _ in 0..opts.burn_in {
            x = tau.apply(x);
        }
        let mut empirical_points = Vec::with_capacity(opts.length);
        for _ in 0..opts.length {
            empirical_points.push(x);
            x = tau.apply(x);
        }

        // The measure is the only invariant one carried by the flower, so a
        // periodic orbit lying in it is the measure.
        let exact = self
            .candidates
            .iter()
            .find(|(_, pts)| pts.iter().all(|&p| petal.contains(p, EPS_PT)));
        let (periodic, periodic_points) = match exact {
            Some((orbit, pts)) => (Some(orbit.clone()), Some(pts.clone())),
            None if self.map.linear_degree().is_none() => {
                (None, closed_orbit(&empirical_points, opts.max_period))
            }
            None => (None, None),
        };

        let k = self.map.degree();
        let (integral_of_f, coding_frequencies) = match &periodic_points {
            Some(pts) => (average(f, pts), frequencies(&self.map, pts, k)),
            None => (
                average(f, &empirical_points),
                frequencies(&self.map, &empirical_points, k),
            ),
        };
        Ok(SturmianEstimate {
            support_arcs,
            support_length,
            empirical_points,
            integral_of_f,
            coding_frequencies,
            periodic,
            periodic_points,
        })
    }
}

/// Convenience wrapper building a one-off [`SturmianEstimator`].
pub fn sturmian_estimate<F: CircleFunction + ?Sized>(
    flower: &Flower,
    f: &F,
    options: SturmianOptions,
) -> Result<SturmianEstimate> {
    SturmianEstimator::new(flower.map(), options)?.estimate(flower, f)
}

fn closed_orbit(points: &[CirclePoint], max_period: usize) -> Option<Vec<CirclePoint>> {
    let x0 = *points.first()?;
    (1..=max_period.min(points.len() - 1))
        .find(|&q| points[q].distance(x0) <= EPS_PT)
        .map(|q| points[..q].to_vec())
}

fn average<F: CircleFunction + ?Sized>(f: &F, pts: &[CirclePoint]) -> f64 {
    pts.iter().map(|&p| f.eval(p)).sum::<f64>() / pts.len() as f64
}

fn frequencies(map: &ExpandingMap, pts: &[CirclePoint], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &p in pts {
        counts[map.branch_of(p)] += 1;
    }
    counts.iter().map(|&c| c as f64 / pts.len() as f64).collect()
}

/// The largest orbit average of `f` over periodic orbits of period at most
/// `max_period`, with a maximizing orbit.
pub fn orbit_oracle<F: CircleFunction + ?Sized>(
    map: &ExpandingMap,
    f: &F,
    max_period: usize,
) -> Result<(f64, PeriodicOrbit)> {
    let orbits = map.periodic_orbits(max_period)?;
    let mut best: Option<(f64, PeriodicOrbit)> = None;
    for orbit in orbits {
        let avg = orbit.average(|x| f.eval(x));
        if best.as_ref().map_or(true, |(b, _)| avg > *b) {
            best = Some((avg, orbit));
        }
    }
    best.ok_or_else(|| Error::OutOfRange("no periodic orbits enumerated".into()))
}

/// The exact orbit `T^i(x0)` for the fixed point `x0` of the inverse-branch
/// composition with digits `digits[0], digits[1], ...` applied innermost first.
pub fn orbit_from_itinerary(k: u64, digits: &[u64]) -> PeriodicOrbit {
    let q = digits.len() as u32;
    let modulus = BigUint::from(k).pow(q) - 1u32;
    let mut num = BigUint::from(0u32);
    for &d in digits.iter().rev() {
        num = num * k + d;
    }
    let x0 = RationalPoint::new(num % &modulus, modulus);
    let mut points = Vec::with_capacity(digits.len());
    let mut cur = x0;
    for _ in 0..digits.len() {
        let next = cur.times_mod_one(k);
        points.push(cur);
        cur = next;
    }
    PeriodicOrbit { points }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignConditions {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub phi_minus: Bounded,
    pub phi_plus: Bounded,
    pub consistent: bool,
}

/// Evaluates `Phi` at the two flowers bracketing the support of `S`: the
/// one whose right endpoint is the rightmost support point, and the one
/// whose left endpoint is the leftmost.
pub fn sign_conditions<F: CircleFunction + ?Sized>(
    family: &OneFlowerFamily,
    f: &F,
    flower: &Flower,
    support: &SturmianEstimate,
    depth: usize,
) -> Result<SignConditions> {
    let base = flower.petals()[0].left;
    let (leftmost, rightmost) = match &support.periodic_points {
        Some(pts) => extremes(base, pts.iter().map(|&p| (p, p))),
        None => extremes(base, support.support_arcs.iter().map(|a| (a.left, a.right))),
    };
    let gamma_minus = family.gamma_with_right_endpoint(rightmost);
    let gamma_plus = leftmost.value();
    let phi_minus = phi_of_gamma(family, f, gamma_minus, depth)?;
    let phi_plus = phi_of_gamma(family, f, gamma_plus, depth)?;
    let slack = |b: &Bounded| b.error_bound + 1e-12;
    Ok(SignConditions {
        gamma_minus,
        gamma_plus,
        consistent: phi_minus.value >= -slack(&phi_minus) && phi_plus.value <= slack(&phi_plus),
        phi_minus,
        phi_plus,
    })
}

fn extremes(
    base: CirclePoint,
    items: impl Iterator<Item = (CirclePoint, CirclePoint)>,
) -> (CirclePoint, CirclePoint) {
    let lift = |p: CirclePoint| {
        let off = base.forward_to(p);
        // Points a hair before the base belong to the top of the flower.
        if off > 1.0 - EPS_PT {
            off - 1.0
        } else {
            off
        }
    };
    let mut lo = (f64::INFINITY, base);
    let mut hi = (f64::NEG_INFINITY, base);
    for (l, r) in items {
        if lift(l) < lo.0 {
            lo = (lift(l), l);
        }
        if lift(r) > hi.0 {
            hi = (lift(r), r);
        }
    }
    (lo.1, hi.1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub p: usize,
    pub singular_values: Vec<f64>,
}

/// Numerical rank of `e_1, ..., e_p, 1` sampled on the common refinement of
/// their breakpoints plus a uniform grid.
pub fn rank_test(flower: &Flower, depth: usize, grid: usize) -> Result<RankReport> {
    let tau = flower.default_selector();
    let mut rows: Vec<StepFunction> = tau
        .discontinuities()
        .par_iter()
        .map(|x| escape_function(&tau, x, depth).to_step())
        .collect();
    rows.push(StepFunction::constant(1));
    let mut cuts: Vec<f64> = rows
        .iter()
        .flat_map(|r| r.breakpoints().iter().map(|b| b.value()))
        .chain((0..grid).map(|i| i as f64 / grid as f64))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= EPS_PT);
    let cols: Vec<(CirclePoint, f64)> = (0..cuts.len())
        .filter_map(|i| {
            let next = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + 1.0 };
            let len = next - cuts[i];
            (len > EPS_PT).then(|| (CirclePoint::wrap(cuts[i] + 0.5 * len), len.sqrt()))
        })
        .collect();
    // Tall matrix: one row per gap, one column per function.
    let n = rows.len();
    let mut m = DMatrix::<f64>::zeros(cols.len(), n);
    for (j, r) in rows.iter().enumerate() {
        for (i, &(x, w)) in cols.iter().enumerate() {
            m[(i, j)] = r.eval(x) as f64 * w;
        }
        let norm = m.column(j).norm();
        if norm > 0.0 {
            m.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let mut singular_values: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let rank = singular_values.iter().filter(|&&s| s > RANK_THRESHOLD).count();
    Ok(RankReport {
        rank,
        p: flower.num_petals(),
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{paper_example_f, TrigPolynomial};
    use approx::assert_abs_diff_eq;

    fn t2() -> OneFlowerFamily {
        OneFlowerFamily::new(ExpandingMap::linear(2).unwrap())
    }

    fn cos() -> TrigPolynomial {
        TrigPolynomial::new(vec![1.0], vec![], 0.0).unwrap()
    }

    #[test]
    fn family_flowers() {
        let fam = t2();
        let f = fam.flower(0.3).unwrap();
        assert_abs_diff_eq!(f.petals()[0].right.value(), 0.8, epsilon = 1e-15);
        assert!(fam.flower(0.0).is_ok());
        let map = ExpandingMap::piecewise_affine(&[0.1, 0.6, 0.85], &[2.0, 4.0, 4.0]).unwrap();
        let fam = OneFlowerFamily::new(map);
        for j in 0..50 {
            let g = j as f64 / 50.0;
            let fl = fam.flower(g).unwrap();
            let b = fl.petals()[0].right;
            assert_abs_diff_eq!(fam.gamma_with_right_endpoint(b), g, epsilon = 1e-12);
        }
    }

    #[test]
    fn cosine_zero_at_three_quarters() {
        let b = phi_of_gamma(&t2(), &cos(), 0.75, 30).unwrap();
        assert!(b.value.abs() < 1e-14);
        let z = solve_pre_sturmian(&t2(), &cos(), 512, 30, 1e-10).unwrap();
        assert!(z.iter().any(|i| i.contains(0.75, 1e-9)));
    }

    #[test]
    fn constant_is_one_plateau() {
        let z = solve_pre_sturmian(&t2(), &TrigPolynomial::constant(1.0), 64, 10, 1e-6).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].plateau && z[0].width() == 1.0);
    }

    #[test]
    fn fixed_point_flower() {
        let map = ExpandingMap::linear(2).unwrap();
        let f = Flower::from_reals(&[(0.5, 1.0)], &map).unwrap();
        let s = sturmian_estimate(&f, &cos(), SturmianOptions::default()).unwrap();
        let orbit = s.periodic.unwrap();
        assert_eq!(orbit.period(), 1);
        assert_eq!(orbit.points[0].to_f64(), 0.0);
        assert_eq!(s.integral_of_f, 1.0);
    }

    #[test]
    fn two_cycle_flower() {
        let map = ExpandingMap::linear(2).unwrap();
        let f = Flower::from_reals(&[(1.0 / 6.0, 2.0 / 3.0)], &map).unwrap();
        let g = TrigPolynomial::new(vec![0.4], vec![0.9], 0.0).unwrap();
        let s = sturmian_estimate(&f, &g, SturmianOptions::default()).unwrap();
        let orbit = s.periodic.unwrap();
        assert_eq!(orbit.points.len(), 2);
        let want = 0.5 * (g.eval(CirclePoint::wrap(1.0 / 3.0)) + g.eval(CirclePoint::wrap(2.0 / 3.0)));
        assert_abs_diff_eq!(s.integral_of_f, want, epsilon = 1e-15);
        assert!(s.support_length <= 0.5f64.powi(30) * 0.5 * 4.0);
    }

    #[test]
    fn itinerary_orbits() {
        let o = orbit_from_itinerary(2, &[0, 1]);
        let mut v: Vec<String> = o.points.iter().map(|p| p.to_string()).collect();
        v.sort();
        assert_eq!(v, vec!["1/3", "2/3"]);
        assert!(o.verify(2));
    }

    #[test]
    fn cosine_sign_conditions() {
        let fam = t2();
        let fl = fam.flower(0.75).unwrap();
        let s = sturmian_estimate(&fl, &cos(), SturmianOptions::default()).unwrap();
        let c = sign_conditions(&fam, &cos(), &fl, &s, 30).unwrap();
        assert_abs_diff_eq!(c.gamma_minus, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.gamma_plus, 0.0, epsilon = 1e-12);
        assert!(c.consistent);
    }

    #[test]
    fn oracle_values() {
        let map = ExpandingMap::linear(2).unwrap();
        let (best, orbit) = orbit_oracle(&map, &cos(), 10).unwrap();
        assert_eq!(best, 1.0);
        assert_eq!(orbit.period(), 1);
        let f = paper_example_f(0.1).unwrap();
        assert!(orbit_oracle(&map, &f, 10).unwrap().0 <= 1e-12);
    }

    #[test]
    fn ranks() {
        let map = ExpandingMap::linear(2).unwrap();
        let f = Flower::from_reals(&[(0.25, 0.75)], &map).unwrap();
        assert_eq!(rank_test(&f, 20, 64).unwrap().rank, 2);
        let map4 = ExpandingMap::linear(4).unwrap();
        let f = Flower::from_reals(&[(0.05, 0.15), (0.4, 0.55)], &map4).unwrap();
        assert_eq!(rank_test(&f, 20, 64).unwrap().rank, 3);
    }

    #[test]
    fn modulus_grows_with_depth() {
        let a = continuity_modulus(2.0, 2.0, 5, 1e-3);
        let b = continuity_modulus(2.0, 2.0, 6, 1e-3);
        assert!(b > a);
        assert_abs_diff_eq!(continuity_modulus(2.0, 2.0, 0, 1e-3), 2e-3);
    }
}
