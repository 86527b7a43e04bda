//! Named property suites: each returns a list of checks with the measured
//! value, its reference and the tolerance used.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::integral::{
    point_integral, point_integral_gradient, strong_on_weights, weak_on_weights,
};
use crate::functionals::{
    classify_good_indices, dyadic_bound, dyadic_point_sum, filtered_bound_from, good_children,
};
use crate::process::mc::{estimate_many, sub_seed, PathRng};
use crate::process::{
    admissible_moment, lower_bound_report, s_skeleton, second_moment_oracle, verify_chaining_bound,
    BridgeProcess, GeneratorKind, Lift, ProcessSampler, SkeletonLaw, MC_SIGMAS,
};
use crate::series::{
    build_partition, cell_width, dirichlet, make_measure, CoefficientSequence, Depth,
    DiscreteMeasure, IndexSet, MeasureKind, PartitionTree,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Skeleton,
    #[serde(rename = "lemma4")]
    LevelMoments,
    Bridge,
    Chaining,
    Lowerbound,
    Inequalities,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Skeleton,
        Suite::LevelMoments,
        Suite::Bridge,
        Suite::Chaining,
        Suite::Lowerbound,
        Suite::Inequalities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Skeleton => "skeleton",
            Suite::LevelMoments => "lemma4",
            Suite::Bridge => "bridge",
            Suite::Chaining => "chaining",
            Suite::Lowerbound => "lowerbound",
            Suite::Inequalities => "inequalities",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .iter()
            .find(|x| x.name() == s)
            .map(|x| vec![*x])
            .ok_or_else(|| Error::InvalidOption(format!("unknown suite '{s}'")))
    }
}

/// How a check compares `measured` against `reference`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured - reference| <= tolerance`
    Close,
    /// `measured <= reference + tolerance`
    AtMost,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(
        suite: Suite,
        name: impl Into<String>,
        measured: f64,
        reference: f64,
        tolerance: f64,
        relation: Relation,
    ) -> Self {
        let pass = match relation {
            Relation::Close => (measured - reference).abs() <= tolerance,
            Relation::AtMost => measured <= reference + tolerance,
        };
        Check {
            suite: suite.name(),
            name: name.into(),
            measured,
            reference,
            tolerance,
            relation,
            pass,
            detail: None,
        }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// Inputs shared by the suites.
#[derive(Clone, Debug)]
pub struct SuiteContext {
    pub coeffs: CoefficientSequence,
    pub set: IndexSet,
    pub tree: PartitionTree,
    pub measure: DiscreteMeasure,
    pub paths: usize,
    pub seed: u64,
    pub random_measures: usize,
    pub base_depth: u32,
}

impl SuiteContext {
    pub fn new(
        coeffs: CoefficientSequence,
        measure: Option<DiscreteMeasure>,
        paths: usize,
        seed: u64,
    ) -> Result<Self> {
        let set = crate::series::build_index_set(&coeffs)?;
        let tree = build_partition(&set, Depth::Auto)?;
        let measure = match measure {
            Some(m) => {
                m.check_against(&set)?;
                m
            }
            None => make_measure(&set, MeasureKind::Uniform)?,
        };
        Ok(SuiteContext {
            coeffs,
            set,
            tree,
            measure,
            paths,
            seed,
            random_measures: 100,
            base_depth: 3,
        })
    }
}

pub fn run_suite(suite: Suite, ctx: &SuiteContext) -> Result<Vec<Check>> {
    match suite {
        Suite::Skeleton => Ok(skeleton_checks()),
        Suite::LevelMoments => Ok(level_moment_checks(ctx.seed, 50)),
        Suite::Bridge => bridge_checks(ctx),
        Suite::Chaining => chaining_checks(ctx),
        Suite::Lowerbound => lowerbound_checks(ctx),
        Suite::Inequalities => {
            inequality_checks(&ctx.set, &ctx.tree, ctx.random_measures, ctx.seed)
        }
    }
}

/// `E |S_l - S_m|^2` over all 16 sign vectors against `|l-m|(1 - |l-m|/4)`.
pub fn skeleton_checks() -> Vec<Check> {
    let mut out = Vec::with_capacity(25);
    for l in 0..5 {
        for m in 0..5 {
            let mut acc = 0.0;
            for bits in 0..16u32 {
                let z = std::array::from_fn(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 });
                let s = s_skeleton(z);
                acc += (s[l] - s[m]).powi(2);
            }
            let d = l.abs_diff(m) as f64;
            out.push(Check::new(
                Suite::Skeleton,
                format!("E|S_{l}-S_{m}|^2"),
                acc / 16.0,
                d * (1.0 - d / 4.0),
                1e-12,
                Relation::Close,
            ));
        }
    }
    out
}

/// A random child-mass vector for which the `Even` (or `Odd`) case applies.
pub fn random_valid_masses(rng: &mut PathRng, even: bool) -> [f64; 4] {
    loop {
        let p: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
        let good = good_children(p);
        let ok = if even {
            good[0] || good[2]
        } else {
            !(good[0] || good[2]) && (good[1] || good[3])
        };
        if ok {
            return p;
        }
    }
}

/// Worst deviations of `E Z_n`, `E Z_n^2` and `V_n` over `count` random laws.
pub fn two_point_law_worst(count: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = PathRng::seed_from_u64(seed);
    let (mut mean, mut second, mut v) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..count {
        let masses = random_valid_masses(&mut rng, i % 2 == 0);
        let law = SkeletonLaw::new(masses, good_children(masses)).expect("positive parent mass");
        let (m1, m2) = law.z_n_moments();
        mean = mean.max(m1.abs());
        second = second.max((m2 - 1.0).abs());
        v = v.max((law.v_by_enumeration() - law.v_closed_form()).abs());
    }
    (mean, second, v)
}

/// Worst gap between the enumeration oracle and `|s-t|(1 - 4^{k-1}|s-t|)`
/// on one random single-level instance.
pub fn level_moment_instance(rng: &mut PathRng) -> f64 {
    let level = rng.random_range(1..=3u32);
    let masses: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() + 1e-3);
    let good: [bool; 4] = match rng.random_range(0..3) {
        0 => [true, false, false, false],
        1 => [false, true, false, false],
        _ => [false; 4],
    };
    let law = SkeletonLaw::new(masses, good).expect("positive masses");
    let width = cell_width(level - 1);
    let count = rng.random_range(2..=16usize);
    let mut pts: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * width).collect();
    pts[0] = 0.0;
    pts.push(width);
    let mut worst = 0.0f64;
    for &s in &pts {
        for &t in &pts {
            let o = second_moment_oracle(&law, level, s, t).expect("points inside the parent");
            worst = worst.max((o - admissible_moment(level, s, t)).abs());
        }
    }
    worst
}

pub fn level_moment_checks(seed: u64, instances: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let (mean, second, v) = two_point_law_worst(200, sub_seed(seed, 0));
    out.push(Check::new(
        Suite::LevelMoments,
        "two-point law max|E Z_n|",
        mean,
        0.0,
        1e-12,
        Relation::Close,
    ));
    out.push(Check::new(
        Suite::LevelMoments,
        "two-point law max|E Z_n^2 - 1|",
        second,
        0.0,
        1e-12,
        Relation::Close,
    ));
    out.push(Check::new(
        Suite::LevelMoments,
        "two-point law max|V_n - closed form|",
        v,
        0.0,
        1e-12,
        Relation::Close,
    ));
    let mut rng = PathRng::seed_from_u64(sub_seed(seed, 1));
    for i in 0..instances {
        let worst = level_moment_instance(&mut rng);
        out.push(Check::new(
            Suite::LevelMoments,
            format!("instance {i} max gap"),
            worst,
            0.0,
            1e-12,
            Relation::Close,
        ));
    }
    out
}

/// Up to `count` distinct point pairs drawn from `n` points.
fn random_pairs(n: usize, count: usize, rng: &mut PathRng) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    if all.len() <= count {
        return all;
    }
    rand::seq::index::sample(rng, all.len(), count)
        .into_iter()
        .map(|k| all[k])
        .collect()
}

/// Monte Carlo increment moments of `p` on `pairs`, one check per pair.
pub fn moment_checks<S: ProcessSampler>(
    suite: Suite,
    label: &str,
    p: &S,
    pairs: &[(usize, usize)],
    paths: usize,
    seed: u64,
) -> Vec<Check> {
    let n = p.len();
    let est = estimate_many(
        paths,
        seed,
        pairs.len(),
        || vec![0.0; n],
        |buf, rng, out| {
            p.sample_into(rng, buf);
            for (o, &(i, j)) in out.iter_mut().zip(pairs) {
                *o = (buf[i] - buf[j]).powi(2);
            }
        },
    );
    est.iter()
        .zip(pairs)
        .map(|(e, &(i, j))| {
            Check::new(
                suite,
                format!("{label} E|X(t_{i})-X(t_{j})|^2"),
                e.mean,
                p.increment_moment(i, j),
                MC_SIGMAS * e.std_error,
                Relation::Close,
            )
        })
        .collect()
}

fn bridge_checks(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let y = BridgeProcess::new(&ctx.set);
    let x = Lift::new(BridgeProcess::new(&ctx.set));
    let n = ctx.set.len();
    let mut out = Vec::new();
    let pts = ctx.set.points();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((x.increment_moment(i, j) - (pts[i] - pts[j]).abs()).abs());
        }
    }
    out.push(Check::new(
        Suite::Bridge,
        "lift analytic max gap to |s-t|",
        worst,
        0.0,
        1e-12,
        Relation::Close,
    ));
    let mut rng = PathRng::seed_from_u64(sub_seed(ctx.seed, 2));
    let pairs = random_pairs(n, 20, &mut rng);
    out.extend(moment_checks(
        Suite::Bridge,
        "bridge",
        &y,
        &pairs,
        ctx.paths,
        sub_seed(ctx.seed, 3),
    ));
    out.extend(moment_checks(
        Suite::Bridge,
        "lift",
        &x,
        &pairs,
        ctx.paths,
        sub_seed(ctx.seed, 4),
    ));
    // E sup_t X(t) >= E sup_t Y(t), on paired paths
    let diff = estimate_many(
        ctx.paths,
        sub_seed(ctx.seed, 5),
        1,
        || (vec![0.0; n], vec![0.0; n]),
        |(yb, xb), rng, o| {
            x.sample_pair(rng, yb, xb);
            let sx = xb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sy = yb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            o[0] = sy - sx;
        },
    )[0];
    out.push(
        Check::new(
            Suite::Bridge,
            "E sup Y - E sup X (paired)",
            diff.mean,
            0.0,
            MC_SIGMAS * diff.std_error,
            Relation::AtMost,
        )
        .detail("Jensen: lifting cannot lower the expected supremum"),
    );
    Ok(out)
}

/// Sample Gram matrix of the first `n` functions of each generator.
pub fn gram_checks(suite: Suite, n: usize, paths: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for (g_i, g) in GeneratorKind::ALL.into_iter().enumerate() {
        let est = estimate_many(
            paths,
            sub_seed(seed, 10 + g_i as u64),
            n * n,
            || vec![0.0; n],
            |phi, rng, o| {
                g.fill(rng, phi);
                for i in 0..n {
                    for j in 0..n {
                        o[i * n + j] = phi[i] * phi[j];
                    }
                }
            },
        );
        for i in 0..n {
            for j in i..n {
                let e = est[i * n + j];
                let target = if i == j { 1.0 } else { 0.0 };
                out.push(Check::new(
                    suite,
                    format!("{g:?} E phi_{}phi_{}", i + 1, j + 1).to_lowercase(),
                    e.mean,
                    target,
                    MC_SIGMAS * e.std_error,
                    Relation::Close,
                ));
            }
        }
    }
    out
}

fn chaining_checks(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let mut out = gram_checks(Suite::Chaining, 4, ctx.paths, ctx.seed);
    for (i, g) in GeneratorKind::ALL.into_iter().enumerate() {
        let r = verify_chaining_bound(
            &ctx.coeffs,
            &ctx.measure,
            g,
            ctx.paths,
            sub_seed(ctx.seed, 20 + i as u64),
        )?;
        let name = format!("{g:?} E sup|X(s)-X(t)|^2 <= 16*5^(5/2)*strong^2").to_lowercase();
        let check = match r.estimate {
            Some(e) => Check::new(
                Suite::Chaining,
                name,
                e.mean,
                r.bound,
                r.margin,
                Relation::AtMost,
            ),
            None => Check::new(
                Suite::Chaining,
                name,
                0.0,
                f64::INFINITY,
                0.0,
                Relation::AtMost,
            )
            .detail("skipped: strong functional is infinite"),
        };
        out.push(check);
    }
    Ok(out)
}

fn lowerbound_checks(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |label: String, m: &DiscreteMeasure, seed: u64| -> Result<()> {
        let r = lower_bound_report(&ctx.set, m, &ctx.tree, ctx.base_depth, ctx.paths, seed)?;
        out.push(
            Check::new(
                Suite::Lowerbound,
                label,
                r.filtered_sum,
                r.bound,
                0.0,
                Relation::AtMost,
            )
            .detail(format!(
                "E(sup X)^2 = {} ± {}",
                r.estimate.mean, r.estimate.std_error
            )),
        );
        Ok(())
    };
    push(
        "given measure: filtered <= 64 sqrt(E sup^2) + 3SE".into(),
        &ctx.measure,
        sub_seed(ctx.seed, 30),
    )?;
    let count = ctx.random_measures.min(50);
    let mut rng = PathRng::seed_from_u64(sub_seed(ctx.seed, 31));
    for i in 0..count {
        let m = dirichlet(ctx.set.len(), &mut rng);
        push(
            format!("dirichlet {i}: filtered <= 64 sqrt(E sup^2) + 3SE"),
            &m,
            sub_seed(ctx.seed, 100 + i as u64),
        )?;
    }
    Ok(out)
}

/// Largest `lhs - rhs` seen for one inequality, and how often it was positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Worst {
    pub gap: f64,
    pub violations: usize,
}

impl Default for Worst {
    fn default() -> Self {
        Worst {
            gap: f64::NEG_INFINITY,
            violations: 0,
        }
    }
}

impl Worst {
    fn record(&mut self, gap: f64) {
        self.gap = self.gap.max(gap);
        if gap > 0.0 {
            self.violations += 1;
        }
    }
}

/// Outcome of the deterministic inequalities over a batch of measures.
#[derive(Clone, Debug, Default)]
pub struct InequalityTally {
    pub draws: usize,
    pub strong_le_dyadic: Worst,
    pub strong_at_le_dyadic_point: Worst,
    pub weak_le_dyadic: Worst,
    pub weak_le_filtered: Worst,
    pub weak_le_strong: Worst,
    pub convexity: Worst,
    /// Deepest level with a good index past `separation_depth + 1`.
    pub termination: Worst,
    pub worst_strong_over_dyadic: f64,
}

/// Runs every deterministic inequality over `draws` Dirichlet measures.
pub fn inequality_tally(
    set: &IndexSet,
    tree: &PartitionTree,
    draws: usize,
    seed: u64,
) -> Result<InequalityTally> {
    let mut rng = PathRng::seed_from_u64(sub_seed(seed, 40));
    let mut t = InequalityTally {
        draws,
        ..Default::default()
    };
    let pos = set.positions();
    let d = set.diameter();
    let sep = tree.separation_depth();
    let mut previous: Option<DiscreteMeasure> = None;
    for _ in 0..draws {
        let m = dirichlet(set.len(), &mut rng);
        let w = m.weights();
        let strong = strong_on_weights(pos, w, d).value;
        let weak = weak_on_weights(pos, w, d);
        let dyadic = dyadic_bound(&m, tree)?;
        let table = classify_good_indices(&m, tree)?;
        let filtered = filtered_bound_from(&table).bound;
        t.strong_le_dyadic.record(strong - dyadic);
        t.worst_strong_over_dyadic = t.worst_strong_over_dyadic.max(strong / dyadic);
        let mut per_point = f64::NEG_INFINITY;
        for i in 0..set.len() {
            per_point = per_point.max(point_integral(pos, w, i, d) - dyadic_point_sum(&m, set, i)?);
        }
        t.strong_at_le_dyadic_point.record(per_point);
        t.weak_le_dyadic.record(weak - dyadic);
        t.weak_le_filtered.record(weak - filtered);
        t.weak_le_strong.record(weak - strong);
        let past = good_past(&m, tree, sep + 2)?;
        t.termination
            .record(table.last_good_level() as f64 - (sep + 1) as f64 + past as f64);
        if let Some(p) = previous.take() {
            let mid: Vec<f64> = p
                .weights()
                .iter()
                .zip(w)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let lhs = strong_on_weights(pos, &mid, d).value;
            let rhs = 0.5 * (strong_on_weights(pos, p.weights(), d).value + strong);
            t.convexity.record(lhs - rhs - 1e-12);
        }
        previous = Some(m);
    }
    Ok(t)
}

/// Good indices found by brute force at `level` (always past the table).
fn good_past(m: &DiscreteMeasure, tree: &PartitionTree, level: u32) -> Result<usize> {
    if level > crate::series::MAX_LEVEL {
        return Ok(0);
    }
    let mut count = 0;
    for parent in tree.cells(level - 1).iter() {
        let r = tree.children(level - 1, parent);
        let masses = std::array::from_fn(|j| m.mass(r[j].clone()));
        count += good_children(masses).iter().filter(|g| **g).count();
    }
    Ok(count)
}

pub fn inequality_checks(
    set: &IndexSet,
    tree: &PartitionTree,
    draws: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let t = inequality_tally(set, tree, draws, seed)?;
    let s = Suite::Inequalities;
    let c = |name: &str, w: Worst| {
        Check::new(s, name, w.gap, 0.0, 0.0, Relation::AtMost)
            .detail(format!("{} of {} draws violate", w.violations, t.draws))
    };
    let mut out = vec![
        c("max(strong - dyadic_bound)", t.strong_le_dyadic).detail(format!(
            "{} of {} draws violate; worst strong/dyadic = {}",
            t.strong_le_dyadic.violations, t.draws, t.worst_strong_over_dyadic
        )),
        c(
            "max_t(strong_at(t) - dyadic point sum(t))",
            t.strong_at_le_dyadic_point,
        ),
        c("max(weak - dyadic_bound)", t.weak_le_dyadic),
        c("max(weak - filtered_bound)", t.weak_le_filtered),
        c("max(weak - strong)", t.weak_le_strong),
        c(
            "max(last good level - (separation_depth + 1))",
            t.termination,
        ),
    ];
    if t.draws > 1 {
        out.push(c("max(strong(mid) - mean(strong) - 1e-12)", t.convexity));
    }
    out.extend(subgradient_checks(set, 5.min(draws), seed)?);
    Ok(out)
}

/// Central differences of the strong functional against the analytic
/// subgradient at interior measures (all weights at least `1/(2n)`).
pub fn subgradient_checks(set: &IndexSet, draws: usize, seed: u64) -> Result<Vec<Check>> {
    let n = set.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let pos = set.positions();
    let d = set.diameter();
    let mut rng = PathRng::seed_from_u64(sub_seed(seed, 41));
    let mut out = Vec::new();
    for k in 0..draws {
        let m = dirichlet(n, &mut rng);
        let w: Vec<f64> = m
            .weights()
            .iter()
            .map(|x| 0.5 * x + 0.5 / n as f64)
            .collect();
        let arg = strong_on_weights(pos, &w, d).argmax;
        let g = point_integral_gradient(pos, &w, arg, d);
        let h = 1e-6;
        let mut worst = 0.0f64;
        for s in 0..n {
            let mut up = w.clone();
            up[s] += h;
            let mut dn = w.clone();
            dn[s] -= h;
            let fd = (strong_on_weights(pos, &up, d).value - strong_on_weights(pos, &dn, d).value)
                / (2.0 * h);
            worst = worst.max((fd - g[s]).abs() / g[s].abs().max(1e-8));
        }
        out.push(Check::new(
            Suite::Inequalities,
            format!("draw {k}: max relative gap, central difference vs subgradient"),
            worst,
            0.0,
            1e-4,
            Relation::AtMost,
        ));
    }
    Ok(out)
}
