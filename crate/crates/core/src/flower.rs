//! Flowers, pre-image selectors and the push-forward of arcs through them.
//!
//! A flower is a finite union of disjoint closed petals whose images under
//! `T` tile the circle. The selector `tau` picks, for every `x`, the unique
//! preimage of `x` in the flower; at the `p` points of `D_F = T(dF)` two
//! preimages lie on the boundary and `tau` jumps between them.

use rand::Rng;

use crate::circle::{Arc, CirclePoint, CyclicOrder, StepFunction, EPS_PT};
use crate::dynamics::ExpandingMap;
use crate::error::{Error, Result};

/// Tolerance on the total image length and on the tiling of images.
const IMAGE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Flower {
    map: ExpandingMap,
    /// Sorted by left endpoint.
    petals: Vec<Arc>,
    /// `T(left endpoint)` for each petal.
    image_start: Vec<CirclePoint>,
    image_len: Vec<f64>,
    /// Petal indices sorted by `image_start`.
    image_order: Vec<usize>,
}

impl Flower {
    /// Validates petals against the map: disjoint, non-degenerate, and with
    /// images that tile the circle.
    pub fn new(petals: Vec<Arc>, map: &ExpandingMap) -> Result<Self> {
        if petals.is_empty() {
            return Err(Error::EmptyFlower);
        }
        let mut petals = petals;
        petals.sort_by(|a, b| a.left.value().total_cmp(&b.left.value()));
        let p = petals.len();
        for (i, pet) in petals.iter().enumerate() {
            if pet.length() <= EPS_PT {
                return Err(Error::DegeneratePetal(i));
            }
        }
        if p > 1 {
            for i in 0..p {
                let j = (i + 1) % p;
                let gap = petals[i].left.forward_to(petals[j].left) - petals[i].length();
                if gap.abs() <= EPS_PT {
                    return Err(Error::DegeneratePetal(j));
                }
                if gap < 0.0 {
                    return Err(Error::OverlappingPetals(i, j));
                }
            }
            // Sorted petals can still overlap by wrapping a whole petal.
            let total_len: f64 = petals.iter().map(|a| a.length()).sum();
            if total_len >= 1.0 {
                return Err(Error::OverlappingPetals(0, p - 1));
            }
        }
        let image_len: Vec<f64> = petals.iter().map(|a| map.image_length(a)).collect();
        let total: f64 = image_len.iter().sum();
        if total > 1.0 + IMAGE_TOL {
            return Err(Error::ImagesOverlap(total));
        }
        if total < 1.0 - IMAGE_TOL {
            return Err(Error::CoverageGap(total));
        }
        let image_start: Vec<CirclePoint> = petals.iter().map(|a| map.apply(a.left)).collect();
        let mut image_order: Vec<usize> = (0..p).collect();
        image_order.sort_by(|&a, &b| image_start[a].value().total_cmp(&image_start[b].value()));
        for m in 0..p {
            let cur = image_order[m];
            let next = image_order[(m + 1) % p];
            let end = image_start[cur].shifted(image_len[cur]);
            if end.distance(image_start[next]) > IMAGE_TOL {
                return Err(Error::ImagesOverlap(total));
            }
            if p > 1 && image_start[cur].distance(image_start[next]) <= EPS_PT {
                return Err(Error::DegeneratePetal(next));
            }
        }
        Ok(Flower {
            map: map.clone(),
            petals,
            image_start,
            image_len,
            image_order,
        })
    }

    pub fn from_reals(petals: &[(f64, f64)], map: &ExpandingMap) -> Result<Self> {
        let arcs = petals
            .iter()
            .map(|&(a, b)| Arc::from_reals(a, b))
            .collect::<Result<Vec<_>>>()?;
        Flower::new(arcs, map)
    }

    pub fn petals(&self) -> &[Arc] {
        &self.petals
    }

    /// Image length of each petal, in petal order.
    pub fn image_lengths(&self) -> &[f64] {
        &self.image_len
    }

    pub fn num_petals(&self) -> usize {
        self.petals.len()
    }

    pub fn map(&self) -> &ExpandingMap {
        &self.map
    }

    pub fn contains(&self, x: CirclePoint, tol: f64) -> bool {
        self.petals.iter().any(|a| a.contains(x, tol))
    }

    /// Total Lebesgue measure of the flower.
    pub fn measure(&self) -> f64 {
        self.petals.iter().map(|a| a.length()).sum()
    }

    /// `D_F`, sorted increasingly in `[0, 1)`.
    pub fn discontinuity_points(&self) -> Vec<CirclePoint> {
        self.image_order.iter().map(|&j| self.image_start[j]).collect()
    }

    /// The selector with the given boundary choices, indexed like
    /// [`Flower::discontinuity_points`].
    pub fn selector(&self, choices: Vec<Side>) -> Result<Selector> {
        if choices.len() != self.num_petals() {
            return Err(Error::OutOfRange(format!(
                "{} boundary choices for {} discontinuities",
                choices.len(),
                self.num_petals()
            )));
        }
        Ok(Selector {
            flower: self.clone(),
            choices,
        })
    }

    /// The right-continuous selector.
    pub fn default_selector(&self) -> Selector {
        Selector {
            flower: self.clone(),
            choices: vec![Side::Right; self.num_petals()],
        }
    }

    /// All `2^p` selectors whose flower is this one.
    pub fn all_selectors(&self) -> Vec<Selector> {
        let p = self.num_petals();
        (0..1usize << p)
            .map(|mask| {
                let choices = (0..p)
                    .map(|i| if mask >> i & 1 == 1 { Side::Left } else { Side::Right })
                    .collect();
                Selector {
                    flower: self.clone(),
                    choices,
                }
            })
            .collect()
    }

    /// `chi(F)` as a step function.
    pub fn indicator(&self) -> StepFunction {
        let arcs: Vec<(Arc, i64)> = self.petals.iter().map(|&a| (a, 1)).collect();
        StepFunction::from_weighted_arcs(&arcs)
    }
}

/// Which one-sided limit the selector takes at a discontinuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `tau(x)` is the limit from the right, a left petal endpoint.
    Right,
    /// `tau(x)` is the limit from the left, a right petal endpoint.
    Left,
}

/// A pre-image selector `tau` for a flower.
#[derive(Clone, Debug)]
pub struct Selector {
    flower: Flower,
    choices: Vec<Side>,
}

/// One jump of a selector and the arcs attached to it.
#[derive(Clone, Debug, PartialEq)]
pub struct Discontinuity {
    pub x: CirclePoint,
    /// `(i, j)`: branch used just left of `x`, branch used just right of `x`.
    pub type_pair: (usize, usize),
    /// Limit from the right, a left petal endpoint.
    pub y: CirclePoint,
    /// Limit from the left, a right petal endpoint.
    pub y_prime: CirclePoint,
    pub i_arc: Arc,
    pub j_arc: Arc,
    pub in_a: bool,
}

impl Discontinuity {
    pub fn sign(&self) -> i64 {
        if self.in_a {
            1
        } else {
            -1
        }
    }
}

impl Selector {
    pub fn flower(&self) -> &Flower {
        &self.flower
    }

    pub fn map(&self) -> &ExpandingMap {
        &self.flower.map
    }

    pub fn choices(&self) -> &[Side] {
        &self.choices
    }

    /// Expansion constant of the underlying map.
    pub fn expansion(&self) -> f64 {
        self.flower.map.expansion()
    }

    /// Index into the sorted `D_F` matching `x`, if `x` is a discontinuity.
    fn snap(&self, x: CirclePoint) -> Option<usize> {
        let f = &self.flower;
        let p = f.image_order.len();
        let pos = f
            .image_order
            .partition_point(|&j| f.image_start[j].value() < x.value());
        [pos % p, (pos + p - 1) % p]
            .into_iter()
            .find(|&m| f.image_start[f.image_order[m]].distance(x) <= EPS_PT)
    }

    /// Index into the sorted `D_F` of the image arc `[d_m, d_{m+1})`
    /// containing `x`.
    fn image_slot(&self, x: CirclePoint) -> usize {
        if let Some(m) = self.snap(x) {
            return m;
        }
        let f = &self.flower;
        let p = f.image_order.len();
        let pos = f
            .image_order
            .partition_point(|&j| f.image_start[j].value() <= x.value());
        if pos == 0 {
            p - 1
        } else {
            pos - 1
        }
    }

    /// The limit of `tau` from the right at `x`.
    pub fn right_limit(&self, x: CirclePoint) -> CirclePoint {
        let f = &self.flower;
        let m = self.image_slot(x);
        let j = f.image_order[m];
        let d = f.image_start[j];
        let u = d.forward_to(x);
        if u <= EPS_PT || u >= 1.0 - EPS_PT {
            return f.petals[j].left;
        }
        f.map.advance_by_image(f.petals[j].left, u)
    }

    /// The limit of `tau` from the left at `x`.
    pub fn left_limit(&self, x: CirclePoint) -> CirclePoint {
        let f = &self.flower;
        match self.snap(x) {
            Some(m) => {
                let p = f.image_order.len();
                let prev = f.image_order[(m + p - 1) % p];
                f.petals[prev].right
            }
            None => self.right_limit(x),
        }
    }

    /// `tau(x)`.
    pub fn apply(&self, x: CirclePoint) -> CirclePoint {
        match self.snap(x) {
            Some(m) => match self.choices[m] {
                Side::Right => self.right_limit(x),
                Side::Left => self.left_limit(x),
            },
            None => self.right_limit(x),
        }
    }

    /// The `p` discontinuities ordered by `x` in `[0, 1)`, so the first is `x_1`.
    pub fn discontinuities(&self) -> Vec<Discontinuity> {
        let f = &self.flower;
        let map = &f.map;
        let dpts = f.discontinuity_points();
        let y1 = self.right_limit(dpts[0]);
        let order = CyclicOrder::new(y1);
        dpts.iter()
            .map(|&x| {
                let y = self.right_limit(x);
                let y_prime = self.left_limit(x);
                let forward = Arc::new(y, y_prime);
                let backward = Arc::new(y_prime, y);
                let in_a = y == y_prime || order.less(y, y_prime);
                let (i_arc, j_arc) = if in_a { (forward, backward) } else { (backward, forward) };
                // Branches seen from the petal interiors next to each endpoint.
                let interior = 0.25 * EPS_PT.sqrt();
                let i = map.branch_of(y_prime.shifted(-interior));
                let j = map.branch_of(y.shifted(interior));
                Discontinuity {
                    x,
                    type_pair: (i, j),
                    y,
                    y_prime,
                    i_arc,
                    j_arc,
                    in_a,
                }
            })
            .collect()
    }

    /// `chi(F)` and the signed sum of `chi(I_x)`, with their exact equality.
    pub fn characteristic_identity(&self) -> (StepFunction, StepFunction, bool) {
        let lhs = self.flower.indicator();
        // Arcs with x outside A enter open: subtracting their endpoints
        // would break equality at the petal boundary.
        let arcs: Vec<(Arc, i64, bool)> = self
            .discontinuities()
            .iter()
            .map(|d| (d.i_arc, d.sign(), d.in_a))
            .collect();
        let rhs = StepFunction::from_arcs(&arcs);
        let eq = lhs.equals(&rhs);
        (lhs, rhs, eq)
    }

    /// Discontinuity points strictly inside the arc, in order along it.
    fn cuts_inside(&self, arc: &Arc) -> Vec<CirclePoint> {
        let len = arc.length();
        let mut cuts: Vec<(f64, CirclePoint)> = self
            .flower
            .discontinuity_points()
            .into_iter()
            .filter_map(|d| {
                let off = arc.left.forward_to(d);
                (off > EPS_PT && off < len - EPS_PT).then_some((off, d))
            })
            .collect();
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
        cuts.into_iter().map(|(_, d)| d).collect()
    }

    /// Splits `arc` at the discontinuities of `tau` and maps each piece.
    pub fn push_once(&self, arc: &Arc, out: &mut Vec<Arc>) {
        if arc.is_degenerate() {
            out.push(Arc::point(self.apply(arc.left)));
            return;
        }
        let mut start = arc.left;
        for cut in self.cuts_inside(arc) {
            out.push(Arc::new(self.right_limit(start), self.left_limit(cut)));
            start = cut;
        }
        out.push(Arc::new(self.right_limit(start), self.left_limit(arc.right)));
    }

    /// `tau^n(J)` as closed arcs; arcs touching at endpoints are kept apart.
    pub fn push_arc(&self, arc: &Arc, n: usize) -> Vec<Arc> {
        let mut cur = vec![*arc];
        for _ in 0..n {
            let mut next = Vec::with_capacity(cur.len() + self.flower.num_petals());
            for a in &cur {
                self.push_once(a, &mut next);
            }
            cur = next;
        }
        cur
    }

    /// All iterates `tau^0(J), ..., tau^n(J)` in one pass.
    pub fn push_arc_levels(&self, arc: &Arc, n: usize) -> Vec<Vec<Arc>> {
        let mut levels = Vec::with_capacity(n + 1);
        levels.push(vec![*arc]);
        for _ in 0..n {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() + self.flower.num_petals());
            for a in prev {
                self.push_once(a, &mut next);
            }
            levels.push(next);
        }
        levels
    }

    /// Discontinuities of `tau^n`: the points `T^m(d)`, `d` in `D_F`,
    /// `0 <= m < n`, sorted and merged.
    pub fn discontinuity_set(&self, n: usize) -> Vec<CirclePoint> {
        let map = &self.flower.map;
        let mut pts = Vec::with_capacity(n * self.flower.num_petals());
        for d in self.flower.discontinuity_points() {
            let mut x = d;
            for _ in 0..n {
                pts.push(x);
                x = map.apply(x);
            }
        }
        pts.sort_by(|a, b| a.value().total_cmp(&b.value()));
        let mut out: Vec<CirclePoint> = Vec::with_capacity(pts.len());
        for p in pts {
            if out.last().map_or(true, |l: &CirclePoint| l.distance(p) > EPS_PT) {
                out.push(p);
            }
        }
        if out.len() > 1 && out[0].distance(*out.last().unwrap()) <= EPS_PT {
            out.pop();
        }
        out
    }

    /// Right limit of `tau^n` at `x`.
    pub fn right_limit_n(&self, x: CirclePoint, n: usize) -> CirclePoint {
        (0..n).fold(x, |z, _| self.right_limit(z))
    }

    /// Left limit of `tau^n` at `x`.
    pub fn left_limit_n(&self, x: CirclePoint, n: usize) -> CirclePoint {
        (0..n).fold(x, |z, _| self.left_limit(z))
    }
}

/// Merges arcs that touch at endpoints, for display.
pub fn merge_touching(arcs: &[Arc]) -> Vec<Arc> {
    let mut sorted = arcs.to_vec();
    sorted.sort_by(|a, b| a.left.value().total_cmp(&b.left.value()));
    let mut out: Vec<Arc> = Vec::new();
    for a in sorted {
        match out.last_mut() {
            Some(last) if last.right.distance(a.left) <= EPS_PT => last.right = a.right,
            _ => out.push(a),
        }
    }
    if out.len() > 1 {
        let last = *out.last().unwrap();
        if last.right.distance(out[0].left) <= EPS_PT {
            out[0].left = last.left;
            out.pop();
        }
    }
    out
}

/// Random `p`-flower for `map`: cut the circle into `p` image arcs of length
/// at least `min_image`, then lift each through a random inverse branch.
pub fn random_flower<R: Rng + ?Sized>(
    map: &ExpandingMap,
    p: usize,
    min_image: f64,
    rng: &mut R,
) -> Result<Flower> {
    let k = map.degree();
    if p == 0 || min_image * p as f64 > 0.9 {
        return Err(Error::OutOfRange(format!(
            "cannot place {p} images of length {min_image}"
        )));
    }
    // Images are cut relative to the fixed point; every image but the last
    // stays in one branch, the last one runs into the next branch. Petals
    // touch exactly when consecutive branch choices collide.
    if k == 2 && p % 2 == 0 {
        return Err(Error::OutOfRange(format!(
            "the degree-2 map has no {p}-flower"
        )));
    }
    let origin = map.branch_breaks()[0];
    loop {
        let mut cuts: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        let spaced = p == 1
            || (0..p).all(|i| {
                let next = if i + 1 < p { cuts[i + 1] } else { cuts[0] + 1.0 };
                next - cuts[i] >= min_image
            });
        if !spaced {
            continue;
        }
        let mut branches = Vec::with_capacity(p);
        branches.push(rng.gen_range(0..k));
        for i in 1..p {
            let prev = branches[i - 1];
            let b = (prev + 1 + rng.gen_range(0..k - 1)) % k;
            branches.push(b);
        }
        if p > 1 && branches[0] == (branches[p - 1] + 1) % k {
            continue;
        }
        let mut petals = Vec::with_capacity(p);
        for i in 0..p {
            let start = origin.shifted(cuts[i]);
            let len = if p == 1 {
                1.0
            } else if i + 1 < p {
                cuts[i + 1] - cuts[i]
            } else {
                cuts[0] + 1.0 - cuts[i]
            };
            let left = map.inverse_branch_unchecked(branches[i], start);
            let right = map.advance_by_image(left, len);
            petals.push(Arc::new(left, right));
        }
        if let Ok(f) = Flower::new(petals, map) {
            if f.num_petals() == p {
                return Ok(f);
            }
        }
    }
}
