//! Orientation-preserving piecewise-affine expanding maps of the circle.
//!
//! A map of degree `k` is described by its fixed point `a_0` and the
//! remaining preimages `a_1 < ... < a_{k-1}` of `a_0` (in the order cut at
//! `a_0`). On the fundamental arc `X_i = [a_i, a_{i+1})` it is affine with
//! slope `s_i = 1 / |X_i|`, so every branch wraps once round the circle and
//! the inverse branches are exact affine maps.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::circle::{Arc, CirclePoint, EPS_PT};
use crate::error::{Error, Result};

/// Relative tolerance for `s_i * |X_i| = 1`.
const SLOPE_TOL: f64 = 1e-12;

/// Largest `k^n - 1` the periodic orbit enumerator will walk.
const MAX_ORBIT_MODULUS: u128 = 1 << 26;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpandingMap {
    breaks: Vec<CirclePoint>,
    /// `breaks[i]` as a displacement from `breaks[0]`, with a trailing 1.0.
    cumulative: Vec<f64>,
    slopes: Vec<f64>,
    offsets: Vec<f64>,
    /// `Some(k)` for `x -> kx mod 1`.
    linear_degree: Option<u64>,
}

impl ExpandingMap {
    /// The map `x -> kx mod 1`.
    pub fn linear(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidMap(format!("degree must be at least 2, got {k}")));
        }
        let breaks: Vec<f64> = (0..k).map(|i| i as f64 / k as f64).collect();
        let slopes = vec![k as f64; k];
        let mut map = Self::piecewise_affine(&breaks, &slopes)?;
        map.linear_degree = Some(k as u64);
        Ok(map)
    }

    /// Piecewise-affine map with fixed point `breaks[0]`.
    ///
    /// `slopes[i]` must equal `1 / |X_i|` and exceed 1.
    pub fn piecewise_affine(breaks: &[f64], slopes: &[f64]) -> Result<Self> {
        let k = breaks.len();
        if k < 2 {
            return Err(Error::InvalidMap(format!("degree must be at least 2, got {k}")));
        }
        if slopes.len() != k {
            return Err(Error::InvalidMap(format!(
                "{} slopes given for {} branches",
                slopes.len(),
                k
            )));
        }
        let breaks: Vec<CirclePoint> = breaks
            .iter()
            .map(|&b| CirclePoint::reduce(b))
            .collect::<Result<_>>()?;
        let a0 = breaks[0];
        let mut cumulative: Vec<f64> = breaks.iter().map(|&b| a0.forward_to(b)).collect();
        cumulative.push(1.0);
        for i in 0..k {
            let len = cumulative[i + 1] - cumulative[i];
            if len <= EPS_PT {
                return Err(Error::InvalidMap(format!(
                    "branch breaks must be strictly increasing from the fixed point (branch {i})"
                )));
            }
            let s = slopes[i];
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::InvalidMap(format!(
                    "slope {s} of branch {i} is not positive; orientation-reversing maps are not supported"
                )));
            }
            if s <= 1.0 {
                return Err(Error::InvalidMap(format!("slope {s} of branch {i} is not expanding")));
            }
            if (s * len - 1.0).abs() > SLOPE_TOL * s.max(1.0) {
                return Err(Error::InvalidMap(format!(
                    "branch {i} has slope {s} but length {len}; each branch must wrap exactly once"
                )));
            }
        }
        let offsets = (0..k)
            .map(|i| a0.value() - slopes[i] * breaks[i].value())
            .collect();
        Ok(ExpandingMap {
            breaks,
            cumulative,
            slopes: slopes.to_vec(),
            offsets,
            linear_degree: None,
        })
    }

    /// Piecewise-affine map whose slopes are determined by the breaks.
    pub fn from_breaks(breaks: &[f64]) -> Result<Self> {
        let a0 = CirclePoint::reduce(*breaks.first().unwrap_or(&0.0))?;
        let mut cum: Vec<f64> = breaks
            .iter()
            .map(|&b| CirclePoint::reduce(b).map(|p| a0.forward_to(p)))
            .collect::<Result<_>>()?;
        cum.push(1.0);
        let slopes: Vec<f64> = cum.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect();
        Self::piecewise_affine(breaks, &slopes)
    }

    pub fn degree(&self) -> usize {
        self.breaks.len()
    }

    pub fn fixed_point(&self) -> CirclePoint {
        self.breaks[0]
    }

    pub fn branch_breaks(&self) -> &[CirclePoint] {
        &self.breaks
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Lift intercepts: branch `i` is `x -> slope_i * x + offset_i (mod 1)`.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn linear_degree(&self) -> Option<u64> {
        self.linear_degree
    }

    /// Expansion constant `K = min slope`.
    pub fn expansion(&self) -> f64 {
        self.slopes.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Lipschitz constant `C = max slope`.
    pub fn lipschitz(&self) -> f64 {
        self.slopes.iter().cloned().fold(0.0, f64::max)
    }

    /// Smallest branch length, the scale below which `T` is locally affine.
    pub fn min_branch_length(&self) -> f64 {
        self.cumulative
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Index `i` with `x` in `X_i`.
    pub fn branch_of(&self, x: CirclePoint) -> usize {
        let u = self.breaks[0].forward_to(x);
        self.branch_of_offset(u)
    }

    fn branch_of_offset(&self, u: f64) -> usize {
        let k = self.degree();
        let pos = self.cumulative[..k].partition_point(|&c| c <= u);
        pos.saturating_sub(1)
    }

    pub fn apply(&self, x: CirclePoint) -> CirclePoint {
        if let Some(k) = self.linear_degree {
            if k == 2 {
                // Exact in binary floating point.
                let y = 2.0 * x.value();
                return CirclePoint::wrap(if y >= 1.0 { y - 1.0 } else { y });
            }
        }
        let u = self.breaks[0].forward_to(x);
        let i = self.branch_of_offset(u);
        let t = self.slopes[i] * (u - self.cumulative[i]);
        self.breaks[0].shifted(t)
    }

    /// `T_i(x)`, the preimage of `x` in `X_i`.
    pub fn inverse_branch(&self, i: usize, x: CirclePoint) -> Result<CirclePoint> {
        if i >= self.degree() {
            return Err(Error::BranchOutOfRange {
                index: i,
                degree: self.degree(),
            });
        }
        Ok(self.inverse_branch_unchecked(i, x))
    }

    pub(crate) fn inverse_branch_unchecked(&self, i: usize, x: CirclePoint) -> CirclePoint {
        let u = self.breaks[0].forward_to(x);
        let off = self.cumulative[i] + u / self.slopes[i];
        self.breaks[0].shifted(off)
    }

    /// All `k` preimages of `x`, in branch order.
    pub fn preimages(&self, x: CirclePoint) -> Vec<CirclePoint> {
        (0..self.degree())
            .map(|i| self.inverse_branch_unchecked(i, x))
            .collect()
    }

    /// `int_J T'`, the length swept by `T` along the arc `J`.
    pub fn image_length(&self, arc: &Arc) -> f64 {
        let len = arc.length();
        let start = self.breaks[0].forward_to(arc.left);
        self.sweep_length(start, len)
    }

    /// Image length of the lifted segment `[start, start + len]`, where
    /// `start` is measured from the fixed point.
    fn sweep_length(&self, start: f64, len: f64) -> f64 {
        let k = self.degree();
        let mut pos = start;
        let mut remaining = len;
        let mut total = 0.0;
        let mut i = self.branch_of_offset(pos);
        while remaining > 0.0 {
            let end = self.cumulative[i + 1];
            let step = (end - pos).min(remaining);
            total += self.slopes[i] * step;
            remaining -= step;
            pos += step;
            if pos >= end {
                i += 1;
                if i == k {
                    i = 0;
                    pos -= 1.0;
                }
                pos = pos.max(self.cumulative[i]);
            }
        }
        total
    }

    /// The point `y` with `int_{from}^{y} T' = image_len`, walking forward.
    pub fn advance_by_image(&self, from: CirclePoint, image_len: f64) -> CirclePoint {
        if let Some(k) = self.linear_degree {
            return from.shifted(image_len / k as f64);
        }
        let k = self.degree();
        let mut pos = self.breaks[0].forward_to(from);
        let mut remaining = image_len;
        let mut i = self.branch_of_offset(pos);
        let mut travelled = 0.0;
        loop {
            let end = self.cumulative[i + 1];
            let capacity = self.slopes[i] * (end - pos);
            if remaining <= capacity {
                travelled += remaining / self.slopes[i];
                break;
            }
            remaining -= capacity;
            travelled += end - pos;
            i += 1;
            if i == k {
                i = 0;
            }
            pos = self.cumulative[i];
        }
        from.shifted(travelled)
    }

    /// The point `y` with `int_{y}^{to} T' = image_len`, walking backward.
    pub fn retreat_by_image(&self, to: CirclePoint, image_len: f64) -> CirclePoint {
        if let Some(k) = self.linear_degree {
            return to.shifted(-image_len / k as f64);
        }
        let k = self.degree();
        let mut pos = self.breaks[0].forward_to(to);
        if pos == 0.0 {
            pos = 1.0;
        }
        // Branch containing points just below `pos`.
        let mut i = self.cumulative[..k].partition_point(|&c| c < pos).saturating_sub(1);
        let mut remaining = image_len;
        let mut travelled = 0.0;
        loop {
            let start = self.cumulative[i];
            let capacity = self.slopes[i] * (pos - start);
            if remaining <= capacity {
                travelled += remaining / self.slopes[i];
                break;
            }
            remaining -= capacity;
            travelled += pos - start;
            if i == 0 {
                i = k - 1;
                pos = 1.0;
            } else {
                i -= 1;
                pos = self.cumulative[i + 1];
            }
        }
        to.shifted(-travelled)
    }

    /// All periodic orbits of period at most `max_period`, as exact
    /// rationals. Only available for `x -> kx mod 1`.
    pub fn periodic_orbits(&self, max_period: usize) -> Result<Vec<PeriodicOrbit>> {
        let k = self.linear_degree.ok_or_else(|| {
            Error::InexactMap("piecewise-affine map has non-integer slopes".into())
        })? as u128;
        if max_period == 0 || max_period > 16 {
            return Err(Error::OutOfRange(format!(
                "max_period must be in 1..=16, got {max_period}"
            )));
        }
        let mut orbits = Vec::new();
        for n in 1..=max_period {
            let modulus = k.pow(n as u32) - 1;
            if modulus > MAX_ORBIT_MODULUS {
                return Err(Error::OutOfRange(format!(
                    "k^n - 1 = {modulus} exceeds the enumeration budget"
                )));
            }
            for j in 0..modulus {
                // Walk the orbit; keep it only if j is its minimum and the
                // minimal period is exactly n.
                let mut cur = j;
                let mut is_min = true;
                let mut period = 0;
                loop {
                    cur = (cur * k) % modulus;
                    period += 1;
                    if cur == j {
                        break;
                    }
                    if cur < j {
                        is_min = false;
                        break;
                    }
                }
                if !is_min || period != n {
                    continue;
                }
                let mut points = Vec::with_capacity(n);
                let mut cur = j;
                for _ in 0..n {
                    points.push(RationalPoint::new(
                        BigUint::from(cur),
                        BigUint::from(modulus),
                    ));
                    cur = (cur * k) % modulus;
                }
                orbits.push(PeriodicOrbit { points });
            }
        }
        Ok(orbits)
    }
}

/// Reduced fraction in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    numerator: BigUint,
    denominator: BigUint,
}

impl RationalPoint {
    pub fn new(numerator: BigUint, denominator: BigUint) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        let numerator = numerator % &denominator;
        let g = numerator.gcd(&denominator);
        if g.is_zero() {
            return RationalPoint {
                numerator,
                denominator: BigUint::from(1u32),
            };
        }
        RationalPoint {
            numerator: numerator / &g,
            denominator: denominator / &g,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    /// `k * self mod 1`, in integers.
    pub fn times_mod_one(&self, k: u64) -> RationalPoint {
        RationalPoint::new(&self.numerator * k, self.denominator.clone())
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.numerator.to_f64().unwrap_or(f64::NAN);
        let d = self.denominator.to_f64().unwrap_or(f64::NAN);
        n / d
    }

    pub fn to_point(&self) -> CirclePoint {
        CirclePoint::wrap(self.to_f64())
    }
}

impl std::fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// A periodic orbit listed from its smallest point along the dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    pub points: Vec<RationalPoint>,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.points.len()
    }

    /// Checks in integer arithmetic that `k` cycles the points in order.
    pub fn verify(&self, k: u64) -> bool {
        let n = self.points.len();
        (0..n).all(|i| self.points[i].times_mod_one(k) == self.points[(i + 1) % n])
    }

    pub fn average<F: Fn(CirclePoint) -> f64>(&self, f: F) -> f64 {
        let sum: f64 = self.points.iter().map(|p| f(p.to_point())).sum();
        sum / self.points.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> CirclePoint {
        CirclePoint::reduce(x).unwrap()
    }

    /// Degree-3 map with slopes (2, 4, 4) and fixed point 0.1.
    fn uneven() -> ExpandingMap {
        ExpandingMap::piecewise_affine(&[0.1, 0.6, 0.85], &[2.0, 4.0, 4.0]).unwrap()
    }

    #[test]
    fn linear_examples() {
        let t2 = ExpandingMap::linear(2).unwrap();
        assert!((t2.apply(pt(0.3)).value() - 0.6).abs() < 1e-15);
        assert!((t2.apply(pt(0.6)).value() - 0.2).abs() < 1e-15);
        assert_eq!(t2.apply(pt(0.5)).value(), 0.0);
        assert_eq!(t2.apply(pt(0.0)).value(), 0.0);
        assert_eq!(t2.expansion(), 2.0);
        assert_eq!(t2.lipschitz(), 2.0);
        let t4 = ExpandingMap::linear(4).unwrap();
        assert!((t4.apply(pt(0.3)).value() - 0.2).abs() < 1e-15);
        assert!(ExpandingMap::linear(1).is_err());
    }

    #[test]
    fn inverse_branch_examples() {
        let t2 = ExpandingMap::linear(2).unwrap();
        assert!((t2.inverse_branch(0, pt(0.6)).unwrap().value() - 0.3).abs() < 1e-15);
        assert!((t2.inverse_branch(1, pt(0.6)).unwrap().value() - 0.8).abs() < 1e-15);
        assert!(matches!(
            t2.inverse_branch(2, pt(0.6)),
            Err(Error::BranchOutOfRange { .. })
        ));
        let y = pt(0.71);
        let i = t2.branch_of(y);
        assert!(t2.inverse_branch(i, t2.apply(y)).unwrap().distance(y) < 1e-15);
    }

    #[test]
    fn rejects_invalid_maps() {
        // Slopes (3, 2, 2) cannot wrap each branch exactly once.
        assert!(ExpandingMap::piecewise_affine(&[0.0, 1.0 / 3.0, 5.0 / 6.0], &[3.0, 2.0, 2.0]).is_err());
        assert!(ExpandingMap::piecewise_affine(&[0.0, 0.5], &[-2.0, -2.0]).is_err());
        assert!(ExpandingMap::piecewise_affine(&[0.0, 0.5], &[2.0]).is_err());
    }

    #[test]
    fn uneven_map_is_continuous_at_breaks() {
        let t = uneven();
        assert_eq!(t.fixed_point().value(), 0.1);
        assert_eq!(t.expansion(), 2.0);
        assert_eq!(t.lipschitz(), 4.0);
        for &b in t.branch_breaks() {
            let left = t.apply(b.shifted(-1e-9));
            let right = t.apply(b.shifted(1e-9));
            assert!(left.distance(right) < 1e-8, "jump at {b}");
            assert!(t.apply(b).distance(t.fixed_point()) < EPS_PT);
        }
        // Lift formula agrees with the stored intercepts.
        let x = pt(0.7);
        let i = t.branch_of(x);
        let via_offsets = CirclePoint::wrap(t.slopes()[i] * x.value() + t.offsets()[i]);
        assert!(via_offsets.distance(t.apply(x)) < 1e-14);
    }

    #[test]
    fn every_point_has_k_preimages() {
        let t = uneven();
        for j in 0..50 {
            let x = pt(j as f64 / 50.0 + 0.003);
            let pre = t.preimages(x);
            for (a, p) in pre.iter().enumerate() {
                assert!(t.apply(*p).distance(x) < 1e-13);
                for q in &pre[a + 1..] {
                    assert!(p.distance(*q) > 1e-3);
                }
            }
        }
    }

    #[test]
    fn image_length_walks_branches() {
        let t = uneven();
        // [0.5, 0.7]: 0.1 at slope 2, then 0.1 at slope 4.
        let a = Arc::from_reals(0.5, 0.7).unwrap();
        assert!((t.image_length(&a) - 0.6).abs() < 1e-14);
        let y = t.advance_by_image(pt(0.5), 0.6);
        assert!(y.distance(pt(0.7)) < 1e-14);
        let z = t.retreat_by_image(pt(0.7), 0.6);
        assert!(z.distance(pt(0.5)) < 1e-14);
        // Across the fixed point.
        let w = Arc::from_reals(0.95, 0.2).unwrap();
        assert!((t.image_length(&w) - (0.15 * 4.0 + 0.1 * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn periodic_orbit_examples() {
        let t2 = ExpandingMap::linear(2).unwrap();
        let p1 = t2.periodic_orbits(1).unwrap();
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].points[0].to_f64(), 0.0);
        let p2 = t2.periodic_orbits(2).unwrap();
        assert_eq!(p2.len(), 2);
        let two: Vec<String> = p2[1].points.iter().map(|p| p.to_string()).collect();
        assert_eq!(two, vec!["1/3", "2/3"]);
        let exactly3 = t2
            .periodic_orbits(3)
            .unwrap()
            .into_iter()
            .filter(|o| o.period() == 3)
            .count();
        assert_eq!(exactly3, 2);
    }

    #[test]
    fn orbit_counts_match_necklace_formula() {
        // Number of period-exactly-n orbits of T_k is (1/n) sum_{d|n} mu(n/d) k^d.
        fn mobius(n: usize) -> i64 {
            let (mut n, mut res, mut p) = (n, 1i64, 2);
            while p * p <= n {
                if n % p == 0 {
                    n /= p;
                    if n % p == 0 {
                        return 0;
                    }
                    res = -res;
                }
                p += 1;
            }
            if n > 1 {
                res = -res;
            }
            res
        }
        for k in [2usize, 3] {
            let t = ExpandingMap::linear(k).unwrap();
            let orbits = t.periodic_orbits(8).unwrap();
            for n in 1..=8 {
                let count = orbits.iter().filter(|o| o.period() == n).count() as i64;
                let mut sum = 0i64;
                for d in 1..=n {
                    if n % d == 0 {
                        sum += mobius(n / d) * (k as i64).pow(d as u32);
                    }
                }
                // The fixed point 0 is counted once; the formula counts
                // k^n points including the spurious 1 = 0 identification.
                let expected = if n == 1 { k as i64 - 1 } else { sum / n as i64 };
                assert_eq!(count, expected, "k={k} n={n}");
            }
            assert!(orbits.iter().all(|o| o.verify(k as u64)));
        }
    }

    #[test]
    fn periodic_orbits_require_integer_slopes() {
        assert!(matches!(uneven().periodic_orbits(3), Err(Error::InexactMap(_))));
        let t2 = ExpandingMap::linear(2).unwrap();
        assert!(t2.periodic_orbits(17).is_err());
    }
}
