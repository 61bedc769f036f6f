//! Self-check suites: each check measures one quantity and compares it with a
//! threshold.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::lower_bound::{
    base_density, expected_gft_base, expected_gft_perturbed, perturbed_density, spike_eps,
    strip_bounds, PerturbationParams, BASE_SCALE, C_PLAT, C_SPIKE, LB_SIGMA,
};
use crate::adversary::single_price::{color_density, single_price_gap, SP_SIGMA};
use crate::adversary::{Adversary, AdversarySpec, Color};
use crate::apple_tasting::{decompose_feedback, iota, useful_inequality_terms, MatInstance};
use crate::error::{Result, TradeError};
use crate::feedback::{estimate_gft, FeedbackKind};
use crate::harness::{run_summary, RunConfig};
use crate::learners::{theoretical_bound, Algorithm, HedgeState, LearnerSpec};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::trade::{gft_single, uniform_grid, GftDefinition, PricePair, ValuationPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Core,
    Adversaries,
    Estimator,
    Mat,
    All,
}

impl FromStr for Suite {
    type Err = TradeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "adversaries" => Ok(Suite::Adversaries),
            "estimator" => Ok(Suite::Estimator),
            "mat" => Ok(Suite::Mat),
            "all" => Ok(Suite::All),
            _ => Err(TradeError::UnknownName {
                kind: "suite",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub quantity: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, quantity: &str, measured: f64, threshold: f64) -> Self {
        // Adding zero turns -0.0 into 0.0 for display.
        let measured = measured + 0.0;
        Self {
            name: name.into(),
            quantity: quantity.to_string(),
            measured,
            relation: Relation::AtMost,
            threshold,
            pass: measured <= threshold,
        }
    }

    fn at_least(name: impl Into<String>, quantity: &str, measured: f64, threshold: f64) -> Self {
        let measured = measured + 0.0;
        Self {
            name: name.into(),
            quantity: quantity.to_string(),
            measured,
            relation: Relation::AtLeast,
            threshold,
            pass: measured >= threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::AtMost => "≤",
            Relation::AtLeast => "≥",
        };
        write!(
            f,
            "{}: {} = {:.6e} {} {:e}: {}",
            self.name,
            self.quantity,
            self.measured,
            op,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn verify(suite: Suite) -> Result<Report> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Core | Suite::All) {
        checks.extend(core_checks()?);
    }
    if matches!(suite, Suite::Adversaries | Suite::All) {
        checks.extend(adversary_checks()?);
    }
    if matches!(suite, Suite::Estimator | Suite::All) {
        checks.extend(estimator_checks()?);
    }
    if matches!(suite, Suite::Mat | Suite::All) {
        checks.extend(mat_checks()?);
    }
    Ok(Report { checks })
}

fn rng(tag: u64) -> SimRng {
    stream_rng(0x5EED_0000 + tag, Stream::Scenario)
}

/// Uniform draw from the admissible perturbations.
fn random_perturbation(rng: &mut SimRng) -> PerturbationParams {
    let eps = rng.random_range(1e-3..=1.0 / 12.0);
    let v = rng.random_range(1.0 / 3.0 + eps..=0.5 - eps);
    PerturbationParams::new(v, eps).expect("drawn inside the admissible set")
}

fn core_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let cases = [
        (0.5, 0.5, 0.2, 0.9, 0.7),
        (0.4, 0.6, 0.3, 0.8, 0.3),
        (0.4, 0.6, 0.5, 0.8, 0.0),
        (0.3, 0.3, 0.3, 0.3, 0.0),
    ];
    let err = cases
        .iter()
        .map(|&(p, q, s, b, want)| {
            let g = crate::trade::gft(
                &PricePair::new(p, q)?,
                &ValuationPair::new(s, b)?,
                GftDefinition::SurplusSplit,
            );
            Ok((g - want).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::at_most("gft examples", "max |error|", err, 1e-15));

    let grid = uniform_grid(1000)?;
    let slope = grid
        .points()
        .windows(2)
        .map(|w| (expected_gft_base(w[1]) - expected_gft_base(w[0])).abs() / (w[1] - w[0]))
        .fold(0.0, f64::max);
    out.push(Check::at_most(
        "lipschitz(BaseF)",
        "max slope",
        slope,
        1.0 / LB_SIGMA,
    ));

    let fine = uniform_grid(200_000)?;
    let best = fine
        .points()
        .iter()
        .map(|&p| expected_gft_base(p))
        .fold(0.0, f64::max);
    for k in [10, 100, 1000] {
        let g = uniform_grid(k)?;
        let on_grid = g
            .points()
            .iter()
            .map(|&p| expected_gft_base(p))
            .fold(0.0, f64::max);
        out.push(Check::at_most(
            format!("discretization(BaseF, K={k})"),
            "max - grid max",
            best - on_grid,
            1.0 / (LB_SIGMA * k as f64),
        ));
    }

    let law = base_density();
    let n = 200;
    let mut excess = f64::NEG_INFINITY;
    let diag_best = (0..=n)
        .map(|i| expected_gft_base(i as f64 / n as f64))
        .fold(0.0, f64::max)
        .max(crate::adversary::lower_bound::plateau_value());
    for i in 0..=n {
        for j in i..=n {
            let (p, q) = (i as f64 / n as f64, j as f64 / n as f64);
            let e = if i == j {
                expected_gft_base(p)
            } else {
                law.expected_gft(p, q, GftDefinition::SurplusSplit)
            };
            excess = excess.max(e - diag_best);
        }
    }
    out.push(Check::at_most(
        "observation1(BaseF, 200x200)",
        "max pair - diagonal max",
        excess,
        1e-9,
    ));

    let cfg = RunConfig::new(
        AdversarySpec::Uniform01Sq,
        LearnerSpec {
            k: Some(100),
            ..LearnerSpec::named("price-hedge")
        },
        FeedbackKind::Full,
        10_000,
    );
    let tuning = crate::learners::Tuning {
        k: 100,
        ..HedgeState::default_tuning(10_000)
    };
    let bound = theoretical_bound(Algorithm::PriceHedge, 10_000, &tuning, 1.0);
    let worst = (0..5)
        .map(|s| run_summary(&cfg, s).map(|r| r.regret))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most(
        "hedge bound(Uniform01Sq, T=1e4, K=100)",
        "max regret over 5 seeds",
        worst,
        bound,
    ));
    Ok(out)
}

fn adversary_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let base = base_density();
    out.push(Check::at_most(
        "normalization(BaseF)",
        "|mass−1|",
        (base.total_mass() - 1.0).abs(),
        1e-6,
    ));
    let n = 400;
    let min_value = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| base.value((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64))
        .fold(f64::INFINITY, f64::min);
    out.push(Check::at_least(
        "nonnegativity(BaseF)",
        "min density",
        min_value,
        0.0,
    ));
    out.push(Check::at_most(
        "smoothness(BaseF)",
        "sup density",
        base.sup(),
        1.0 / LB_SIGMA,
    ));

    let mut r = rng(1);
    let perts: Vec<_> = (0..100).map(|_| random_perturbation(&mut r)).collect();
    let zero_mass = perts
        .iter()
        .map(|pp| {
            pp.signed_pieces()
                .iter()
                .map(|(b, c)| b.area() * c)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    out.push(Check::at_most(
        "perturbation mass(100 draws)",
        "max |∫g|",
        zero_mass,
        1e-9,
    ));
    let min_pert = perts
        .iter()
        .map(|pp| {
            let f = perturbed_density(pp);
            let mass = (f.total_mass() - 1.0).abs();
            let inside = pp
                .rectangles()
                .iter()
                .map(|b| f.value(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)))
                .fold(f64::INFINITY, f64::min);
            if mass > 1e-9 {
                f64::NEG_INFINITY
            } else {
                inside
            }
        })
        .fold(f64::INFINITY, f64::min);
    out.push(Check::at_least(
        "perturbed nonnegativity(100 draws)",
        "min density on R1..R4",
        min_pert,
        0.0,
    ));

    out.push(Check::at_most(
        "cost of exploration",
        "|E(1/2) − E(2/3) − c_plat|",
        (expected_gft_base(0.5) - expected_gft_base(2.0 / 3.0) - C_PLAT).abs(),
        1e-9,
    ));

    let mut margin = f64::INFINITY;
    for pp in &perts {
        let peak = expected_gft_perturbed(pp.v, pp);
        for _ in 0..100 {
            let p = loop {
                let p: f64 = r.random();
                if (p - pp.v).abs() > pp.eps {
                    break p;
                }
            };
            margin = margin.min(peak - expected_gft_perturbed(p, pp) - pp.eps * C_SPIKE);
        }
    }
    out.push(Check::at_least(
        "cost of suboptimality(100 x 100)",
        "min E(v) − E(p) − ε c_spike",
        margin,
        -1e-12,
    ));

    let mut outside = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for pp in perts.iter().take(10) {
        let f = perturbed_density(pp);
        let rects = pp.rectangles();
        let mut tested = 0;
        while tested < 100 {
            let p: f64 = r.random();
            let q = p + (1.0 - p) * r.random::<f64>();
            if rects.iter().any(|b| b.contains(p, q)) {
                continue;
            }
            tested += 1;
            let (a, b) = (base.feedback_probs(p, q), f.feedback_probs(p, q));
            for (x, y) in a.iter().zip(&b) {
                outside = outside.max((x - y).abs());
            }
        }
        for b in &rects {
            let (p, q) = (0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
            let (x, y) = (base.feedback_probs(p, q), f.feedback_probs(p, q));
            let gap = x
                .iter()
                .zip(&y)
                .map(|(u, w)| (u - w).abs())
                .fold(0.0, f64::max);
            min_ratio = min_ratio.min(gap / (BASE_SCALE * pp.eps / 48.0));
        }
    }
    out.push(Check::at_most(
        "feedback indistinguishability(1000 points)",
        "max |Δ| outside R1..R4",
        outside,
        1e-9,
    ));
    out.push(Check::at_least(
        "feedback separation(rectangle centers)",
        "min max|Δ| / (C ε / 48)",
        min_ratio,
        1.0 - 1e-9,
    ));

    for (name, c) in [("Blue", Color::Blue), ("Red", Color::Red)] {
        out.push(Check::at_most(
            format!("smoothness({name})"),
            "sup density",
            color_density(c).sup(),
            1.0 / SP_SIGMA,
        ));
    }
    let blue = color_density(Color::Blue);
    let red = color_density(Color::Red);
    let gap = single_price_gap(&blue, &red, 10_000)?;
    out.push(Check::at_least(
        "single price gap(Blue, Red)",
        "gap",
        gap,
        1e-12,
    ));

    let adv = Adversary::new(AdversarySpec::BaseF)?;
    let (ok, sup) = adv.check_smoothness();
    out.push(Check::at_most(
        "declared smoothness(BaseF)",
        "sup density",
        if ok { sup } else { f64::INFINITY },
        1.0 / LB_SIGMA,
    ));
    Ok(out)
}

fn estimator_checks() -> Result<Vec<Check>> {
    let mut r = rng(2);
    let mut draws = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (p, s, b): (f64, f64, f64) = (r.random(), r.random(), r.random());
        let v = ValuationPair::new(s, b)?;
        let n = 100_000;
        let mut hits = 0usize;
        for _ in 0..n {
            hits += estimate_gft(p, &v, &mut draws)?.bit as usize;
        }
        let target = gft_single(p, &v, GftDefinition::SurplusSplit)?;
        worst = worst.max((hits as f64 / n as f64 - target).abs());
    }
    Ok(vec![Check::at_most(
        "estimator unbiasedness(50 triples x 1e5)",
        "max deviation",
        worst,
        0.01,
    )])
}

/// Region of `(p, q)` straight from the definitions of `J_1..J_2K`.
fn regions_containing(p: f64, q: f64, big_k: usize) -> Vec<usize> {
    let mut hits = Vec::new();
    for k in 1..=big_k {
        let (lo, hi) = strip_bounds(big_k, k);
        let in_strip = lo <= p && (p < hi || (k == big_k && p <= hi));
        if in_strip && (2.0 / 3.0..=5.0 / 6.0).contains(&q) {
            hits.push(k);
        }
        if k < big_k && in_strip && q < 2.0 / 3.0 {
            hits.push(k + big_k);
        }
    }
    if hits.is_empty() {
        hits.push(2 * big_k);
    }
    hits
}

fn mat_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for big_k in 1..=16 {
        for k in 0..=big_k {
            let inst = MatInstance::new(big_k, k)?;
            let eps = spike_eps(big_k);
            for i in 1..=2 * big_k {
                let table = if i <= big_k {
                    0.0
                } else if i - big_k == k {
                    C_PLAT + C_SPIKE * eps
                } else {
                    C_PLAT
                };
                worst = worst.max((inst.expected_reward(i)? - table).abs());
            }
        }
    }
    out.push(Check::at_most(
        "expected rewards(K ≤ 16, exhaustive)",
        "max |error|",
        worst,
        1e-15,
    ));

    let mut r = rng(4);
    let base = base_density();
    let mut err = 0.0f64;
    for _ in 0..100 {
        let big_k = r.random_range(1..=20);
        let k = r.random_range(1..=big_k);
        let pp = PerturbationParams::spike(big_k, k)?;
        let f = perturbed_density(&pp);
        let rect = pp.rectangles()[r.random_range(0..4)];
        let p = rect.x0 + (rect.x1 - rect.x0) * r.random::<f64>();
        let q = rect.y0 + (rect.y1 - rect.y0) * r.random::<f64>();
        let (f0, fk) = (base.feedback_probs(p, q), f.feedback_probs(p, q));
        let (p0, pk) = (0.5, 0.5 + crate::adversary::C_PROB * pp.eps);
        let d = decompose_feedback(f0, fk, p0, pk)?;
        for (a, b) in d.mix(p0).iter().zip(&f0).chain(d.mix(pk).iter().zip(&fk)) {
            err = err.max((a - b).abs());
        }
    }
    out.push(Check::at_most(
        "feedback decomposition round trip(100 points)",
        "max |error|",
        err,
        1e-12,
    ));

    for t in [8008u64, 10_000, 100_000, 1_000_000] {
        let (lhs, rhs) = useful_inequality_terms(t)?;
        out.push(Check::at_most(
            format!("KL bound(T={t})"),
            "KL per observation",
            lhs,
            rhs,
        ));
    }

    let mut bad = 0usize;
    for _ in 0..1_000_000 {
        let big_k = r.random_range(1..=32);
        let p: f64 = r.random();
        let q = p + (1.0 - p) * r.random::<f64>();
        let inst = MatInstance::new(big_k, 0)?;
        let hits = regions_containing(p, q, big_k);
        if hits.len() != 1 || iota(&PricePair::new(p, q)?, &inst)? != hits[0] {
            bad += 1;
        }
    }
    out.push(Check::at_most(
        "region partition(1e6 points)",
        "points not in exactly one region",
        bad as f64,
        0.0,
    ));

    let misses = (1..=1000)
        .filter(|&big_k| {
            strip_bounds(big_k, 1).0 != 1.0 / 3.0 || strip_bounds(big_k, big_k).1 != 0.5
        })
        .count();
    out.push(Check::at_most(
        "strip tiling(K ≤ 1000)",
        "K with v_1−ε ≠ 1/3 or v_K+ε ≠ 1/2",
        misses as f64,
        0.0,
    ));
    let inside_q6 = (1..=64)
        .flat_map(|big_k| (1..=big_k).map(move |k| strip_bounds(big_k, k)))
        .filter(|&(lo, hi)| lo < 1.0 / 3.0 || hi > 0.5)
        .count();
    out.push(Check::at_most(
        "exploring strips inside Q6(K ≤ 64)",
        "strips outside",
        inside_q6 as f64,
        0.0,
    ));
    Ok(out)
}
