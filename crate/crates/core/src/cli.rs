//! Run configuration and the command implementations behind the binary.
//!
//! Each `cmd_*` returns the text to emit (JSON or CSV) or a [`Failure`]
//! carrying the process exit code.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circle::{Arc, CirclePoint};
use crate::dynamics::ExpandingMap;
use crate::error::{Error, Result};
use crate::flatten::{
    build_coboundary, default_depth, functionals, is_flat, normal_form_check, FlattenedFunction,
    DEFAULT_FLAT_TOL, DEFAULT_TARGET,
};
use crate::flower::{random_flower, Flower, Side};
use crate::functions::{paper_example_f, CircleFunction, PiecewiseLinearFunction, TrigPolynomial};
use crate::solve::{
    orbit_oracle, rank_test, scan, solve_pre_sturmian, OneFlowerFamily, SturmianEstimator,
    SturmianOptions,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Linear { k: usize },
    PiecewiseAffine { breaks: Vec<f64>, slopes: Vec<f64> },
}

impl Default for MapSpec {
    fn default() -> Self {
        MapSpec::Linear { k: 2 }
    }
}

impl MapSpec {
    pub fn build(&self) -> Result<ExpandingMap> {
        match self {
            MapSpec::Linear { k } => ExpandingMap::linear(*k),
            MapSpec::PiecewiseAffine { breaks, slopes } => ExpandingMap::piecewise_affine(breaks, slopes),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Pwl {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        #[serde(default)]
        anchor: f64,
    },
    Trig {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        #[serde(default, rename = "const")]
        constant: f64,
    },
    PaperExample { gamma: f64 },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<Box<dyn CircleFunction>> {
        Ok(match self {
            FunctionSpec::Pwl {
                breakpoints,
                slopes,
                anchor,
            } => Box::new(PiecewiseLinearFunction::new(breakpoints, slopes, *anchor)?),
            FunctionSpec::Trig { cos, sin, constant } => {
                Box::new(TrigPolynomial::new(cos.clone(), sin.clone(), *constant)?)
            }
            FunctionSpec::PaperExample { gamma } => Box::new(paper_example_f(*gamma)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowerSpec {
    pub petals: Vec<[f64; 2]>,
    /// One choice per discontinuity, in increasing order; all `right` if absent.
    #[serde(default)]
    pub boundary: Option<Vec<Side>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSpec,
    pub function: Option<FunctionSpec>,
    pub flower: Option<FlowerSpec>,
    /// Selects the 1-flower `F_gamma` when no explicit flower is given.
    pub gamma: Option<f64>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub resolution: Option<f64>,
    pub samples: Option<usize>,
    pub burn_in: Option<usize>,
    pub length: Option<usize>,
    pub support_depth: Option<usize>,
    pub max_period: Option<usize>,
    /// Petal count for a random flower in `rank` when none is given.
    pub petals: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check_knobs()?;
        Ok(cfg)
    }

    fn check_knobs(&self) -> Result<()> {
        let counts = [
            ("depth", self.depth),
            ("grid", self.grid),
            ("samples", self.samples),
            ("burn_in", self.burn_in),
            ("length", self.length),
            ("support_depth", self.support_depth),
            ("max_period", self.max_period),
            ("petals", self.petals),
        ];
        for (name, v) in counts {
            if v == Some(0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("tol", self.tol), ("resolution", self.resolution)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive, got {x}")));
                }
            }
        }
        Ok(())
    }

    fn function(&self) -> Result<Box<dyn CircleFunction>> {
        self.function
            .as_ref()
            .ok_or_else(|| Error::Config("a function is required".into()))?
            .build()
    }

    fn flower(&self, map: &ExpandingMap) -> Result<Flower> {
        if let Some(spec) = &self.flower {
            let petals: Vec<(f64, f64)> = spec.petals.iter().map(|p| (p[0], p[1])).collect();
            return Flower::from_reals(&petals, map);
        }
        if let Some(g) = self.gamma {
            return OneFlowerFamily::new(map.clone()).flower(g);
        }
        Err(Error::Config("a flower or gamma is required".into()))
    }

    fn choices(&self, flower: &Flower) -> Result<crate::flower::Selector> {
        match self.flower.as_ref().and_then(|s| s.boundary.clone()) {
            Some(c) => flower.selector(c),
            None => Ok(flower.default_selector()),
        }
    }

    fn depth_for(&self, f: &dyn CircleFunction, map: &ExpandingMap) -> usize {
        self.depth
            .unwrap_or_else(|| default_depth(f.lipschitz_constant(), map.expansion(), DEFAULT_TARGET))
    }

    fn sturmian_options(&self) -> SturmianOptions {
        let d = SturmianOptions::default();
        SturmianOptions {
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            length: self.length.unwrap_or(d.length),
            depth: self.support_depth.unwrap_or(d.depth),
            max_period: d.max_period,
        }
    }
}

/// A command that did not succeed, with its exit code.
#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    /// Exit 2.
    Invalid(String),
    /// Exit 3; carries the report that showed it.
    NotFlattenable(String),
    /// Exit 4.
    NoSolution(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::NotFlattenable(_) => 3,
            Failure::NoSolution(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::NotFlattenable(m) | Failure::NoSolution(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoSignChange { .. } => Failure::NoSolution(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

pub type CmdResult = std::result::Result<String, Failure>;

/// Formats with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn arc_json(a: &Arc) -> Value {
    json!([num(a.left.value()), num(a.right.value())])
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn cmd_validate(cfg: &RunConfig) -> CmdResult {
    let map = cfg.map.build()?;
    let mut report = json!({
        "map": {
            "degree": map.degree(),
            "expansion": num(map.expansion()),
            "lipschitz": num(map.lipschitz()),
        }
    });
    if cfg.function.is_some() {
        let f = cfg.function()?;
        report["function"] = json!({ "lipschitz": num(f.lipschitz_constant()) });
    }
    if cfg.flower.is_some() || cfg.gamma.is_some() {
        let flower = cfg.flower(&map)?;
        let tau = cfg.choices(&flower)?;
        let (_, _, identity) = tau.characteristic_identity();
        let ds: Vec<Value> = tau
            .discontinuities()
            .iter()
            .map(|d| {
                json!({
                    "x": num(d.x.value()),
                    "type": [d.type_pair.0, d.type_pair.1],
                    "i_arc": arc_json(&d.i_arc),
                    "in_a": d.in_a,
                })
            })
            .collect();
        report["flower"] = json!({
            "petals": flower.petals().iter().map(arc_json).collect::<Vec<_>>(),
            "measure": num(flower.measure()),
            "discontinuities": ds,
            "characteristic_identity": identity,
        });
    }
    report["valid"] = Value::Bool(true);
    Ok(render(&report))
}

pub fn cmd_scan(cfg: &RunConfig) -> CmdResult {
    let map = cfg.map.build()?;
    let f = cfg.function()?;
    let depth = cfg.depth_for(f.as_ref(), &map);
    let family = OneFlowerFamily::new(map);
    let rows = scan(&family, f.as_ref(), cfg.grid.unwrap_or(512), depth)?;
    let mut out = String::from("gamma,phi,error_bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_num(r.gamma),
            fmt_num(r.phi),
            fmt_num(r.error_bound)
        ));
    }
    Ok(out)
}

pub fn cmd_flatten(cfg: &RunConfig) -> CmdResult {
    let map = cfg.map.build()?;
    let f = cfg.function()?;
    let flower = cfg.flower(&map)?;
    let tau = cfg.choices(&flower)?;
    let depth = cfg.depth_for(f.as_ref(), &map);
    let tol = cfg.tol.unwrap_or(DEFAULT_FLAT_TOL);
    let values = functionals(&tau, f.as_ref(), depth);
    let flattenable = values.iter().all(|b| b.value.abs() <= b.error_bound + tol);
    let cob = build_coboundary(&tau, f.as_ref(), depth, None);
    let report = is_flat(&cob, cfg.samples.unwrap_or(1000), tol);
    let phi_samples: Vec<Value> = (0..=64)
        .map(|i| {
            let x = CirclePoint::wrap(i as f64 / 64.0);
            json!([num(x.value()), num(cob.eval(x))])
        })
        .collect();
    let xs = tau.discontinuities();
    let out = json!({
        "depth": depth,
        "functionals": values.iter().zip(&xs).map(|(b, d)| json!({
            "x": num(d.x.value()),
            "value": num(b.value),
            "error_bound": num(b.error_bound),
        })).collect::<Vec<_>>(),
        "flattenable": flattenable,
        "flat": flattenable && report.flat,
        "constant": num(report.constant),
        "max_deviation": num(report.max_deviation),
        "error_bounds": {
            "coboundary": num(cob.error_bound()),
            "flattened_value": num(cob.flattened_error_bound()),
            "flat_threshold": num(report.threshold),
        },
        "phi_samples": phi_samples,
    });
    let text = render(&out);
    if flattenable && report.flat {
        Ok(text)
    } else {
        Err(Failure::NotFlattenable(text))
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> CmdResult {
    let map = cfg.map.build()?;
    let f = cfg.function()?;
    let depth = cfg.depth_for(f.as_ref(), &map);
    let family = OneFlowerFamily::new(map.clone());
    let zeros = solve_pre_sturmian(
        &family,
        f.as_ref(),
        cfg.grid.unwrap_or(512),
        depth,
        cfg.resolution.unwrap_or(1e-10),
    )?;
    let estimator = SturmianEstimator::new(&map, cfg.sturmian_options())?;
    let mut intervals = Vec::new();
    let mut sturmian = Vec::new();
    let mut selected: Option<(usize, f64)> = None;
    for (i, z) in zeros.iter().enumerate() {
        intervals.push(json!({
            "gamma_low": num(z.gamma_low),
            "gamma_high": num(z.gamma_high),
            "phi_low": num(z.phi_low),
            "phi_high": num(z.phi_high),
            "resolution": num(z.resolution),
            "plateau": z.plateau,
            "midpoint": num(z.midpoint()),
        }));
        let flower = family.flower(z.midpoint())?;
        let s = estimator.estimate(&flower, f.as_ref())?;
        if selected.map_or(true, |(_, best)| s.integral_of_f > best) {
            selected = Some((i, s.integral_of_f));
        }
        sturmian.push(json!({
            "gamma": num(z.midpoint()),
            "support": s.support_arcs.iter().take(64).map(arc_json).collect::<Vec<_>>(),
            "support_arcs": s.support_arcs.len(),
            "support_length": num(s.support_length),
            "integral": num(s.integral_of_f),
            "coding": s.coding_frequencies.iter().map(|&c| num(c)).collect::<Vec<_>>(),
            "periodic": s.periodic.as_ref().map(|o| o.points.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
        }));
    }
    let oracle = if map.linear_degree().is_some() {
        let mp = cfg.max_period.unwrap_or(10);
        let (best, orbit) = orbit_oracle(&map, f.as_ref(), mp)?;
        json!({
            "max_period": mp,
            "best_average": num(best),
            "best_orbit": orbit.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    Ok(render(&json!({
        "depth": depth,
        "zero_intervals": intervals,
        "sturmian": sturmian,
        "selected": selected.map(|(i, _)| i),
        "oracle": oracle,
    })))
}

pub fn cmd_rank(cfg: &RunConfig) -> CmdResult {
    let map = cfg.map.build()?;
    let flower = if cfg.flower.is_some() || cfg.gamma.is_some() {
        cfg.flower(&map)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
        random_flower(&map, cfg.petals.unwrap_or(3), 0.02, &mut rng)?
    };
    let r = rank_test(&flower, cfg.depth.unwrap_or(20), cfg.grid.unwrap_or(256))?;
    Ok(render(&json!({
        "petals": flower.petals().iter().map(arc_json).collect::<Vec<_>>(),
        "p": r.p,
        "rank": r.rank,
        "expected": r.p + 1,
        "singular_values": r.singular_values.iter().map(|&s| num(s)).collect::<Vec<_>>(),
    })))
}

/// End-to-end reproduction of the semicircle example at `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct NotmaxReport {
    pub gamma: f64,
    pub depth: usize,
    pub max_abs_on_flower: f64,
    pub certificate: f64,
    pub flat_on_flower: bool,
    pub value_at_gamma_plus_3_4: f64,
    pub formula_value: f64,
    pub alpha_estimate: f64,
    pub normal_form_f: bool,
    pub normal_form_f_plus_g: bool,
    pub max_f_plus_g: f64,
}

impl NotmaxReport {
    pub fn checks_pass(&self) -> bool {
        self.flat_on_flower
            && (self.value_at_gamma_plus_3_4 - self.formula_value).abs() <= 1e-10
            && self.normal_form_f
            && !self.normal_form_f_plus_g
    }
}

pub fn paper_notmax(gamma: f64, samples: usize) -> Result<NotmaxReport> {
    let f = paper_example_f(gamma)?;
    let map = ExpandingMap::linear(2)?;
    let family = OneFlowerFamily::new(map.clone());
    let flower = family.flower(gamma)?;
    let tau = flower.default_selector();
    // Samples of f + g carry twice the coboundary error; keep that at 1e-10.
    let depth = default_depth(f.lipschitz_constant(), 2.0, 0.25 * DEFAULT_TARGET);
    let cob = build_coboundary(&tau, &f, depth, None);
    let petal = flower.petals()[0];
    let samples = samples.max(2);
    let max_abs_on_flower = (0..samples)
        .map(|i| cob.flattened_value(petal.at(i as f64 / (samples - 1) as f64)).abs())
        .fold(0.0, f64::max);
    let certificate = cob.flattened_error_bound();
    let value = cob.flattened_value(CirclePoint::wrap(gamma + 0.75));
    let estimator = SturmianEstimator::new(
        &map,
        SturmianOptions {
            length: 10_000,
            ..SturmianOptions::default()
        },
    )?;
    let s = estimator.estimate(&flower, &f)?;
    let (oracle, _) = orbit_oracle(&map, &f, 10)?;
    let alpha_estimate = oracle.max(s.integral_of_f);
    let (normal_form_f, _) = normal_form_check(&f, alpha_estimate, 10_000, 1e-12);
    let fg = FlattenedFunction { coboundary: &cob };
    let (normal_form_f_plus_g, max_f_plus_g) = normal_form_check(&fg, alpha_estimate, samples, 1e-12);
    Ok(NotmaxReport {
        gamma,
        depth,
        max_abs_on_flower,
        certificate,
        flat_on_flower: max_abs_on_flower <= 1e-10,
        value_at_gamma_plus_3_4: value,
        formula_value: 0.25 - gamma / (1.0 - 2.0 * gamma),
        alpha_estimate,
        normal_form_f,
        normal_form_f_plus_g,
        max_f_plus_g,
    })
}

pub fn cmd_paper_notmax(cfg: &RunConfig) -> CmdResult {
    let gamma = cfg
        .gamma
        .ok_or_else(|| Failure::Invalid("paper-notmax needs --gamma".into()))?;
    let r = paper_notmax(gamma, cfg.samples.unwrap_or(1000))?;
    let text = render(&json!({
        "gamma": num(r.gamma),
        "depth": r.depth,
        "flat_on_F": r.flat_on_flower,
        "max_abs_on_F": num(r.max_abs_on_flower),
        "error_bound": num(r.certificate),
        "value_at_gamma_plus_3_4": num(r.value_at_gamma_plus_3_4),
        "formula_value": num(r.formula_value),
        "alpha_estimate": num(r.alpha_estimate),
        "normal_form_f": r.normal_form_f,
        "normal_form_f_plus_g": r.normal_form_f_plus_g,
        "max_f_plus_g": num(r.max_f_plus_g),
        "checks_pass": r.checks_pass(),
    }));
    if r.checks_pass() {
        Ok(text)
    } else {
        Err(Failure::NotFlattenable(text))
    }
}

pub fn cmd_orbits(cfg: &RunConfig) -> CmdResult {
    let map = cfg.map.build()?;
    let mp = cfg.max_period.unwrap_or(10);
    let orbits = map.periodic_orbits(mp)?;
    let f = match &cfg.function {
        Some(spec) => Some(spec.build()?),
        None => None,
    };
    let list: Vec<Value> = orbits
        .iter()
        .map(|o| {
            let mut v = json!({
                "period": o.period(),
                "points": o.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            });
            if let Some(f) = &f {
                v["average"] = num(o.average(|x| f.eval(x)));
            }
            v
        })
        .collect();
    let mut out = json!({ "max_period": mp, "count": orbits.len(), "orbits": list });
    if let Some(f) = &f {
        let (best, orbit) = orbit_oracle(&map, f.as_ref(), mp)?;
        out["best"] = json!({
            "average": num(best),
            "orbit": orbit.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        });
    }
    Ok(render(&out))
}
