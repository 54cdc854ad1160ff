//! Property suites run by the `verify` command.

use std::fmt;
use std::time::Instant;

use clap::ValueEnum;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::trial_rng;
use crate::cost::{
    enclosed_lp_radius, halfspace_lp_mac, halfspace_lp_minimizer, l1_ball_vertices,
    subgradient_halfspace, CostSpec, Halfspace,
};
use crate::error::Result;
use crate::negative::{approximate_rounding, hit_and_run, DirectionMode, FeasibleBody};
use crate::oracle::{analytic_mac, Label, MaliciousClassifier, MembershipOracle, Oracle, SyntheticClassifier};
use crate::positive::{evade_convex_positive, SearchParams, StartBounds};
use crate::scalar::{dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Non-negativity, homogeneity and the triangle inequality of the cost.
    CostAxioms,
    /// Grid search and L1-ball vertex probes agree on convex positive polytopes.
    #[value(alias = "lemma2")]
    VertexWitness,
    /// Subgradient halfspaces contain every point of lower cost.
    Subgradient,
    /// Transcripts of the adversarial responder replay against an open cost ball.
    MaliciousReplay,
    /// Hit-and-run moments inside a box.
    HitAndRun,
    /// Closed-form halfspace MAC against numeric minimization.
    #[value(alias = "lemma10")]
    HalfspaceMac,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::CostAxioms,
        Suite::VertexWitness,
        Suite::Subgradient,
        Suite::MaliciousReplay,
        Suite::HitAndRun,
        Suite::HalfspaceMac,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::CostAxioms => "cost-axioms",
            Suite::VertexWitness => "vertex-witness",
            Suite::Subgradient => "subgradient",
            Suite::MaliciousReplay => "malicious-replay",
            Suite::HitAndRun => "hit-and-run",
            Suite::HalfspaceMac => "halfspace-mac",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Empty means every suite.
    pub suites: Vec<Suite>,
    pub seed: u64,
    /// Swap the vertex-witness polytopes for a non-convex cross, which the suite must catch.
    pub inject_bug: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suites: Vec::new(),
            seed: 1,
            inject_bug: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    /// Cases skipped as too close to call at the grid resolution.
    pub skipped: usize,
    pub failures: Vec<String>,
    pub elapsed_ms: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let status = if s.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{status} {:<17} checks={} skipped={} failures={} ({:.0} ms)",
                s.suite.id(),
                s.checks,
                s.skipped,
                s.failures.len(),
                s.elapsed_ms
            )?;
            for msg in s.failures.iter().take(5) {
                writeln!(f, "    {msg}")?;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    skipped: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(msg());
        }
    }
}

pub fn run_verify(options: &VerifyOptions) -> Result<VerifyReport> {
    let suites: &[Suite] = if options.suites.is_empty() {
        &Suite::ALL
    } else {
        &options.suites
    };
    let mut reports = Vec::new();
    for &suite in suites {
        let started = Instant::now();
        let mut rng = trial_rng(options.seed, suite.id());
        let mut tally = Tally::default();
        match suite {
            Suite::CostAxioms => cost_axioms(&mut rng, &mut tally)?,
            Suite::VertexWitness => vertex_witness(&mut rng, &mut tally, options.inject_bug)?,
            Suite::Subgradient => subgradient(&mut rng, &mut tally)?,
            Suite::MaliciousReplay => malicious_replay(&mut tally)?,
            Suite::HitAndRun => hit_and_run_moments(&mut rng, &mut tally)?,
            Suite::HalfspaceMac => halfspace_mac(&mut rng, &mut tally)?,
        }
        reports.push(SuiteReport {
            suite,
            checks: tally.checks,
            skipped: tally.skipped,
            failures: tally.failures,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(VerifyReport { suites: reports })
}

const EXPONENTS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, f64::INFINITY];

fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-scale..scale)).collect()
}

fn random_spec(rng: &mut ChaCha8Rng, dim: usize, p: f64) -> Result<CostSpec<f64>> {
    let target = random_point(rng, dim, 2.0);
    let weights = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
    CostSpec::new(target, weights, p)
}

fn cost_axioms(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<()> {
    for &p in &EXPONENTS {
        for _ in 0..200 {
            let dim = rng.random_range(1..=5);
            let spec = random_spec(rng, dim, p)?;
            let t = spec.target().to_vec();
            let x = random_point(rng, dim, 5.0);
            let y = random_point(rng, dim, 5.0);
            let ax = spec.cost(&x)?;
            let ay = spec.cost(&y)?;
            tally.check(spec.cost(&t)? == 0.0 && ax >= 0.0, || format!("p={p}: zero/sign"));
            let a: f64 = rng.random_range(-3.0..3.0);
            let scaled: Vec<f64> = x.iter().zip(&t).map(|(xi, ti)| ti + a * (xi - ti)).collect();
            let lhs = spec.cost(&scaled)?;
            tally.check((lhs - a.abs() * ax).abs() <= 1e-9 * (1.0 + lhs), || {
                format!("p={p}: homogeneity {lhs} vs {}", a.abs() * ax)
            });
            if p >= 1.0 {
                let sum: Vec<f64> = x
                    .iter()
                    .zip(&y)
                    .zip(&t)
                    .map(|((xi, yi), ti)| xi + yi - ti)
                    .collect();
                let s = spec.cost(&sum)?;
                tally.check(s <= ax + ay + 1e-9, || format!("p={p}: triangle {s} > {ax} + {ay}"));
            }
        }
    }
    Ok(())
}

type LabelFn = Box<dyn Fn(&[f64]) -> Label>;

/// Non-convex positive set: the union of two slabs through the target.
fn cross_label(x: &[f64], t: &[f64], half_width: f64) -> Label {
    if (x[0] - t[0]).abs() <= half_width || (x[1] - t[1]).abs() <= half_width {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Calls `f` on grid points of the weighted L1 ball of radius `c`, stopping at the first `true`.
fn any_grid_point(spec: &CostSpec<f64>, c: f64, step: f64, mut f: impl FnMut(&[f64]) -> bool) -> bool {
    let dim = spec.dim();
    let n = (c / step).floor() as i64;
    let mut idx = vec![-n; dim];
    let mut x = vec![0.0; dim];
    loop {
        let l1: i64 = idx.iter().map(|i| i.abs()).sum();
        if l1 <= n {
            for d in 0..dim {
                x[d] = spec.target()[d] + idx[d] as f64 * step / spec.weights()[d];
            }
            if f(&x) {
                return true;
            }
        }
        let mut d = 0;
        loop {
            if d == dim {
                return false;
            }
            idx[d] += 1;
            if idx[d] <= n {
                break;
            }
            idx[d] = -n;
            d += 1;
        }
    }
}

fn vertex_witness(rng: &mut ChaCha8Rng, tally: &mut Tally, inject_bug: bool) -> Result<()> {
    const TOLERANCE: f64 = 1e-2;
    for case in 0..100 {
        let dim = 2 + case % 2;
        let spec = random_spec(rng, dim, 1.0)?;
        let c = rng.random_range(0.5..4.0);
        let step = TOLERANCE * c;
        let (label, mac): (LabelFn, Option<f64>) = if inject_bug {
            let t = spec.target().to_vec();
            let hw = 0.1 * c;
            (Box::new(move |x: &[f64]| cross_label(x, &t, hw)), None)
        } else {
            let faces = (0..rng.random_range(1..=6))
                .map(|_| {
                    let mut n: Vec<f64> = random_point(rng, dim, 1.0);
                    let len = norm2(&n).max(1e-6);
                    n.iter_mut().for_each(|v| *v /= len);
                    let margin = rng.random_range(0.3..4.0);
                    let offset = dot(&n, spec.target()) + margin;
                    Halfspace::new(n, offset)
                })
                .collect::<Result<Vec<_>>>()?;
            let classifier = SyntheticClassifier::polytope(faces)?;
            let mac = analytic_mac(&classifier, &spec)?;
            (Box::new(move |x: &[f64]| classifier.label(x)), Some(mac))
        };
        // Cases where the boundary sits within grid resolution of the ball are undecidable here.
        if let Some(m) = mac {
            if (m - c).abs() <= dim as f64 * step {
                tally.skipped += 1;
                continue;
            }
        }
        let by_vertex = l1_ball_vertices(c, &spec)?
            .iter()
            .any(|v| label(v).is_negative());
        let by_grid = any_grid_point(&spec, c, step, |x| label(x).is_negative());
        tally.check(by_vertex == by_grid, || {
            format!("case {case}: D={dim} C={c:.4} vertex={by_vertex} grid={by_grid}")
        });
    }
    Ok(())
}

fn subgradient(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<()> {
    for &p in &EXPONENTS[1..] {
        for _ in 0..100 {
            let dim = rng.random_range(1..=4);
            let spec = random_spec(rng, dim, p)?;
            let y = random_point(rng, dim, 4.0);
            let ay = spec.cost(&y)?;
            if ay == 0.0 {
                continue;
            }
            let h = subgradient_halfspace(&y, &spec)?;
            tally.check(h.slack(&y).abs() <= 1e-9 * (1.0 + h.offset().abs()), || {
                format!("p={p}: y not on boundary")
            });
            for _ in 0..50 {
                let x = random_point(rng, dim, 4.0);
                if spec.cost(&x)? <= ay {
                    tally.check(h.slack(&x) <= 1e-9 * (1.0 + h.offset().abs()), || {
                        format!("p={p}: lower-cost point outside the cut")
                    });
                }
            }
        }
    }
    Ok(())
}

fn malicious_replay(tally: &mut Tally) -> Result<()> {
    for (dim, upper, eps) in [(2, 16.0, 0.1), (3, 2f64.powi(32), 0.01), (5, 1e3, 0.05)] {
        let spec = CostSpec::unweighted(dim, 1.0)?;
        let malicious = MaliciousClassifier::new(spec.clone(), 1.0, upper)?;
        let mut oracle = Oracle::new(malicious).with_transcript(1 << 20);
        let mut negative = vec![0.0; dim];
        negative[0] = upper;
        let start = StartBounds::new(negative, 1.0);
        let result = evade_convex_positive(&spec, &start, &SearchParams::new(eps), &mut oracle)?;
        let final_upper = oracle.classifier().bounds().upper;
        let replay = SyntheticClassifier::open_cost_ball(spec.clone(), final_upper)?;
        let transcript = oracle.ledger().transcript().unwrap_or_default();
        tally.check(transcript.len() as u64 == oracle.query_count(), || {
            format!("D={dim}: transcript truncated")
        });
        let mismatches = transcript
            .iter()
            .filter(|e| replay.label(&e.point) != e.label)
            .count();
        tally.check(mismatches == 0, || {
            format!("D={dim}: {mismatches} transcript entries disagree with the replay ball")
        });
        tally.check(result.converged(), || format!("D={dim}: search did not converge"));
    }
    Ok(())
}

fn hit_and_run_moments(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<()> {
    for dim in [2usize, 3] {
        let spec = CostSpec::unweighted(dim, 2.0)?;
        let widths: Vec<f64> = (0..dim).map(|d| 1.0 + d as f64).collect();
        let lo: Vec<f64> = widths.iter().map(|w| -w / 2.0).collect();
        let hi: Vec<f64> = widths.iter().map(|w| w / 2.0).collect();
        let mut faces = Vec::new();
        for d in 0..dim {
            let mut e = vec![0.0; dim];
            e[d] = 1.0;
            faces.push(Halfspace::new(e.clone(), hi[d])?);
            e[d] = -1.0;
            faces.push(Halfspace::new(e, -lo[d])?);
        }
        let classifier = SyntheticClassifier::convex_negative(faces)?;
        let mut body = FeasibleBody::new(spec, 50.0, Oracle::new(classifier))?;
        let center = vec![0.0; dim];
        let samples = approximate_rounding(&mut body, &center, 2, 20 * dim, 20 * dim, DirectionMode::Centered, rng)?;
        let n = 3000;
        let mut points = Vec::with_capacity(n);
        let mut x = center;
        for _ in 0..n {
            x = hit_and_run(&mut body, &samples, &x, 3, DirectionMode::Centered, rng)?;
            points.push(x.clone());
        }
        for d in 0..dim {
            let mean = points.iter().map(|p| p[d]).sum::<f64>() / n as f64;
            let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n as f64;
            let expected = widths[d].powi(2) / 12.0;
            tally.check(mean.abs() <= 0.06 * widths[d], || {
                format!("D={dim} axis {d}: mean {mean:.4}")
            });
            tally.check((var / expected - 1.0).abs() <= 0.15, || {
                format!("D={dim} axis {d}: variance {var:.4} vs {expected:.4}")
            });
            tally.check(points.iter().all(|p| p[d] >= lo[d] && p[d] <= hi[d]), || {
                format!("D={dim} axis {d}: sample left the box")
            });
        }
    }
    Ok(())
}

fn golden_min(mut a: f64, mut b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f((a + b) / 2.0)
}

/// Minimum cost over the hyperplane `w . x = w . b` by nested golden-section search (D <= 3).
fn numeric_plane_min(w: &[f64], b: &[f64], spec: &CostSpec<f64>) -> f64 {
    let dim = w.len();
    let ww = dot(w, w);
    let shift = (dot(w, b) - dot(w, spec.target())) / ww;
    let x0: Vec<f64> = spec.target().iter().zip(w).map(|(t, wi)| t + shift * wi).collect();
    // Orthonormal basis of the plane by Gram-Schmidt against the axes.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for d in 0..dim {
        let mut v = vec![0.0; dim];
        v[d] = 1.0;
        let proj = dot(&v, w) / ww;
        v.iter_mut().zip(w).for_each(|(vi, wi)| *vi -= proj * wi);
        for u in &basis {
            let proj = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= proj * ui);
        }
        let len = norm2(&v);
        if len > 1e-6 && basis.len() + 1 < dim {
            v.iter_mut().for_each(|vi| *vi /= len);
            basis.push(v);
        }
    }
    let span = 4.0 * (norm2(&x0) + 10.0);
    let at = |s: &[f64]| -> f64 {
        let mut x = x0.clone();
        for (u, si) in basis.iter().zip(s) {
            x.iter_mut().zip(u).for_each(|(xi, ui)| *xi += si * ui);
        }
        spec.cost_unchecked(&x)
    };
    match basis.len() {
        0 => at(&[]),
        1 => golden_min(-span, span, |s| at(&[s])),
        _ => golden_min(-span, span, |s| golden_min(-span, span, |r| at(&[s, r]))),
    }
}

fn halfspace_mac(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<()> {
    for &p in &EXPONENTS[1..] {
        for case in 0..40 {
            let dim = 2 + case % 2;
            let spec = random_spec(rng, dim, p)?;
            let mut w = random_point(rng, dim, 1.0);
            if norm2(&w) < 0.1 {
                continue;
            }
            let b = random_point(rng, dim, 5.0);
            // Orient the halfspace away from the target so the plane is the nearest boundary.
            let side: f64 = b.iter().zip(spec.target()).zip(&w).map(|((bi, ti), wi)| (bi - ti) * wi).sum();
            if side < 0.0 {
                w.iter_mut().for_each(|v| *v = -*v);
            }
            let mac = halfspace_lp_mac(&w, &b, &spec)?;
            let numeric = numeric_plane_min(&w, &b, &spec);
            tally.check((mac - numeric).abs() <= 1e-6 * (1.0 + numeric), || {
                format!("p={p} D={dim}: closed form {mac} vs numeric {numeric}")
            });
            let m = halfspace_lp_minimizer(&w, &b, &spec)?;
            let on_plane = (dot(&w, &m) - dot(&w, &b)).abs() <= 1e-9 * (1.0 + dot(&w, &b).abs());
            let cost_ok = (spec.cost(&m)? - mac).abs() <= 1e-9 * (1.0 + mac);
            tally.check(on_plane && cost_ok, || format!("p={p} D={dim}: minimizer off target"));
        }
        for dim in 1..=6 {
            let r = enclosed_lp_radius(dim, p)?;
            // The Lp sphere of radius r touches the unit L1 sphere along the diagonal.
            let diag = if p.is_infinite() {
                r * dim as f64
            } else {
                r * (dim as f64).powf(1.0 - 1.0 / p)
            };
            tally.check((diag - 1.0).abs() <= 1e-12, || format!("p={p} D={dim}: diagonal L1 {diag}"));
            for _ in 0..200 {
                let u = random_point(rng, dim, 1.0);
                let lp = CostSpec::unweighted(dim, p)?.cost_unchecked(&u);
                if lp == 0.0 {
                    continue;
                }
                let l1: f64 = u.iter().map(|v| v.abs()).sum::<f64>() * r / lp;
                tally.check(l1 <= 1.0 + 1e-12, || format!("p={p} D={dim}: Lp point outside L1 ball"));
            }
        }
    }
    Ok(())
}
