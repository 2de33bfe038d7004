//! Multi-seed protocol runs, gap statistics and verdicts.

use serde::{Deserialize, Serialize};

use super::curve::{job_seed, train_point};
use super::{
    build_identify_curricula, build_validate_curricula, make_identify_plan, make_validate_plan,
    Checkpoints, Curriculum, CurvePoint, CurveSettings, CurveMode, IdentifyPlan, LearningCurve,
    ProtocolError, Sources, ValidatePlan, ValidateSizes,
};
use crate::corpus::{Dataset, Sentence};
use crate::eval::evaluate_model;
use crate::tagger::CrfModel;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub curve: CurveSettings,
    pub checkpoints: Checkpoints,
    /// Verdict threshold in F1 points (0-100 scale).
    pub threshold: f64,
    /// Leading fraction of checkpoints that forms the early-stage window.
    pub early_fraction: f64,
    /// Worker threads; 0 uses every core. Never affects results.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            curve: CurveSettings::default(),
            checkpoints: Checkpoints::default(),
            threshold: 2.0,
            early_fraction: 0.5,
            jobs: 0,
        }
    }
}

impl AuditSettings {
    fn validate(&self) -> Result<(), ProtocolError> {
        self.curve.train.validate()?;
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(ProtocolError::Settings("threshold must be finite and non-negative".into()));
        }
        if !(self.early_fraction > 0.0 && self.early_fraction <= 1.0) {
            return Err(ProtocolError::Settings("early_fraction must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Identify,
    Validate,
}

impl ProtocolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolKind::Identify => "identify",
            ProtocolKind::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Recovered,
    NotRecovered,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Recovered => "recovered",
            Verdict::NotRecovered => "not-recovered",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    pub threshold: f64,
    pub early_fraction: f64,
    /// Number of leading checkpoints in the early window.
    pub early_window: usize,
    pub description: String,
}

/// Per-checkpoint difference `F1(minuend) - F1(subtrahend)` across seeds,
/// in F1 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub checkpoint: usize,
    pub prefix_size: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Largest per-arm seed spread (max - min F1) of the two arms.
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    pub name: String,
    pub family: String,
    pub minuend: String,
    pub subtrahend: String,
    pub points: Vec<GapPoint>,
    /// Mean of the per-checkpoint mean gaps over the early window.
    pub early_mean: f64,
    pub final_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum PlanRecord {
    Identify(IdentifyPlan),
    Validate(ValidatePlan),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub protocol: ProtocolKind,
    /// The configuration that produced this report, when run from a config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_config: Option<serde_json::Value>,
    pub settings: AuditSettings,
    pub seeds: Vec<u64>,
    pub plans: Vec<PlanRecord>,
    pub curricula: Vec<Curriculum>,
    pub curves: Vec<LearningCurve>,
    pub gaps: Vec<GapSeries>,
    pub rule: VerdictRule,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

impl AuditReport {
    pub fn gap(&self, name: &str) -> Option<&GapSeries> {
        self.gaps.iter().find(|g| g.name == name)
    }

    /// Curves for one arm, in seed order.
    pub fn arm_curves<'a>(&'a self, arm: &'a str) -> impl Iterator<Item = &'a LearningCurve> + 'a {
        self.curves.iter().filter(move |c| c.arm == arm)
    }

    /// Seed-averaged F1 of an arm at each checkpoint index.
    pub fn mean_f1(&self, arm: &str) -> Vec<(usize, f64)> {
        let curves: Vec<&LearningCurve> = self.arm_curves(arm).collect();
        let n = curves.iter().map(|c| c.points.len()).min().unwrap_or(0);
        (0..n)
            .map(|k| {
                let f: f64 = curves.iter().map(|c| c.points[k].eval.f1).sum::<f64>();
                (curves[0].points[k].prefix_size, f / curves.len() as f64)
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<AuditReport, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn identify_pairs() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("PureTrain", "TestTrain", "primary"),
        ("PureTrain", "TrainTest", "auxiliary"),
        ("TrainTest", "TestTrain", "auxiliary"),
    ]
}

pub fn validate_pairs() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("TestTrainCorrect", "TestTrainMistake", "correct-vs-mistake"),
        ("PureTrainCorrect", "PureTrainMistake", "correct-vs-mistake"),
        ("CorrectTestTrain", "MistakeTestTrain", "correct-vs-mistake"),
        ("CorrectPureTrain", "MistakePureTrain", "correct-vs-mistake"),
        ("TestTrainCorrect", "PureTrainCorrect", "correct-vs-pure"),
        ("CorrectTestTrain", "CorrectPureTrain", "correct-vs-pure"),
    ]
}

fn early_window(curves: &[LearningCurve], early_fraction: f64) -> usize {
    let n = curves.iter().map(|c| c.points.len()).min().unwrap_or(0);
    ((n as f64 * early_fraction).floor() as usize).clamp(1, n.max(1))
}

/// Gap statistics for each `(minuend, subtrahend, family)` pair, matching
/// checkpoints by index and seeds by value.
pub fn compute_gaps(
    curves: &[LearningCurve],
    pairs: &[(&str, &str, &str)],
    early: usize,
) -> Vec<GapSeries> {
    let mut seeds: Vec<u64> = Vec::new();
    for c in curves {
        if !seeds.contains(&c.seed) {
            seeds.push(c.seed);
        }
    }
    let find = |arm: &str, seed: u64| curves.iter().find(|c| c.arm == arm && c.seed == seed);
    pairs
        .iter()
        .filter_map(|&(a, b, family)| {
            let rows: Vec<(&LearningCurve, &LearningCurve)> = seeds
                .iter()
                .filter_map(|&s| Some((find(a, s)?, find(b, s)?)))
                .collect();
            if rows.is_empty() {
                return None;
            }
            let n = rows
                .iter()
                .map(|(x, y)| x.points.len().min(y.points.len()))
                .min()
                .unwrap_or(0);
            let spread = |f: &dyn Fn(&(&LearningCurve, &LearningCurve)) -> f64| {
                let (lo, hi) = rows
                    .iter()
                    .map(f)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            };
            let points: Vec<GapPoint> = (0..n)
                .map(|k| {
                    let diffs: Vec<f64> = rows
                        .iter()
                        .map(|(x, y)| 100.0 * (x.points[k].eval.f1 - y.points[k].eval.f1))
                        .collect();
                    let band = 100.0
                        * spread(&|r| r.0.points[k].eval.f1).max(spread(&|r| r.1.points[k].eval.f1));
                    GapPoint {
                        checkpoint: k,
                        prefix_size: rows[0].0.points[k].prefix_size,
                        mean: diffs.iter().sum::<f64>() / diffs.len() as f64,
                        min: diffs.iter().copied().fold(f64::INFINITY, f64::min),
                        max: diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                        band,
                    }
                })
                .collect();
            let window = early.min(points.len()).max(1);
            let early_mean = points[..window].iter().map(|p| p.mean).sum::<f64>() / window as f64;
            let final_mean = points.last().map_or(0.0, |p| p.mean);
            Some(GapSeries {
                name: format!("{a}-{b}"),
                family: family.to_string(),
                minuend: a.to_string(),
                subtrahend: b.to_string(),
                points,
                early_mean,
                final_mean,
            })
        })
        .collect()
}

fn identify_rule(threshold: f64, early_fraction: f64, early: usize) -> VerdictRule {
    VerdictRule {
        threshold,
        early_fraction,
        early_window: early,
        description: format!(
            "g(k) = F1(PureTrain) - F1(TestTrain) in F1 points over the first {early} checkpoints; \
             inconsistent iff mean g(k) > {threshold} and min g(k) > 0 at every such k; \
             consistent iff the window average of mean g(k) is within +-{threshold} and every \
             |mean g(k)| <= max({threshold}, seed band at k); otherwise indeterminate"
        ),
    }
}

fn validate_rule(threshold: f64, early_fraction: f64, early: usize) -> VerdictRule {
    VerdictRule {
        threshold,
        early_fraction,
        early_window: early,
        description: format!(
            "at the final checkpoint: recovered iff every Correct-minus-Mistake mean gap > {threshold} \
             and every Correct-minus-PureTrain-analogue |mean gap| <= its seed band; \
             not-recovered iff every Correct-minus-Mistake mean gap <= {threshold}; \
             otherwise indeterminate (z = 0 is recovered trivially)"
        ),
    }
}

fn decide(kind: ProtocolKind, gaps: &[GapSeries], rule: &VerdictRule, degenerate: bool) -> Verdict {
    let t = rule.threshold;
    match kind {
        ProtocolKind::Identify => {
            let Some(primary) = gaps.iter().find(|g| g.family == "primary") else {
                return Verdict::Indeterminate;
            };
            let window = &primary.points[..rule.early_window.min(primary.points.len())];
            if window.iter().all(|p| p.mean > t && p.min > 0.0) {
                Verdict::Inconsistent
            } else if primary.early_mean.abs() <= t && window.iter().all(|p| p.mean.abs() <= t.max(p.band)) {
                Verdict::Consistent
            } else {
                Verdict::Indeterminate
            }
        }
        ProtocolKind::Validate => {
            if degenerate {
                return Verdict::Recovered;
            }
            let last = |g: &GapSeries| g.points.last().cloned();
            let fixes: Vec<GapPoint> = gaps
                .iter()
                .filter(|g| g.family == "correct-vs-mistake")
                .filter_map(last)
                .collect();
            let analogues: Vec<GapPoint> = gaps
                .iter()
                .filter(|g| g.family == "correct-vs-pure")
                .filter_map(last)
                .collect();
            if fixes.is_empty() {
                return Verdict::Indeterminate;
            }
            if fixes.iter().all(|p| p.mean > t) && analogues.iter().all(|p| p.mean.abs() <= p.band) {
                Verdict::Recovered
            } else if fixes.iter().all(|p| p.mean <= t) {
                Verdict::NotRecovered
            } else {
                Verdict::Indeterminate
            }
        }
    }
}

/// Recomputes gaps and verdict from the report's own curves and rule.
pub fn recompute_verdict(report: &AuditReport) -> Verdict {
    let pairs = match report.protocol {
        ProtocolKind::Identify => identify_pairs(),
        ProtocolKind::Validate => validate_pairs(),
    };
    let gaps = compute_gaps(&report.curves, &pairs, report.rule.early_window);
    let degenerate = report
        .plans
        .iter()
        .any(|p| matches!(p, PlanRecord::Validate(v) if v.z == 0));
    decide(report.protocol, &gaps, &report.rule, degenerate)
}

/// One curriculum ready to train: its sentences, evaluation set and grid.
struct Arm<'a> {
    name: String,
    group: String,
    master: u64,
    sentences: Vec<Sentence>,
    new_test: &'a Dataset,
    checkpoints: Vec<usize>,
}

fn run_point(arm: &Arm<'_>, k: usize, settings: &CurveSettings) -> Result<CurvePoint, ProtocolError> {
    let seed = job_seed(arm.master, &arm.group, k);
    let size = arm.checkpoints[k];
    let model = train_point(&arm.sentences[..size], settings, seed, None)?;
    Ok(CurvePoint {
        prefix_size: size,
        eval: evaluate_model(&model, arm.new_test)?,
    })
}

fn run_continual(arm: &Arm<'_>, settings: &CurveSettings) -> Result<Vec<CurvePoint>, ProtocolError> {
    let mut model: Option<CrfModel> = None;
    let mut start = 0;
    let mut points = Vec::with_capacity(arm.checkpoints.len());
    for (k, &size) in arm.checkpoints.iter().enumerate() {
        let seed = job_seed(arm.master, &arm.group, k);
        let next = train_point(&arm.sentences[start..size], settings, seed, model.as_ref())?;
        points.push(CurvePoint {
            prefix_size: size,
            eval: evaluate_model(&next, arm.new_test)?,
        });
        model = Some(next);
        start = size;
    }
    Ok(points)
}

#[cfg(feature = "parallel")]
fn map_jobs<T, F>(jobs: usize, n: usize, f: F) -> Result<Vec<T>, ProtocolError>
where
    T: Send,
    F: Fn(usize) -> Result<T, ProtocolError> + Sync + Send,
{
    use rayon::prelude::*;
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ProtocolError::Settings(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T, F>(_jobs: usize, n: usize, f: F) -> Result<Vec<T>, ProtocolError>
where
    F: Fn(usize) -> Result<T, ProtocolError>,
{
    (0..n).map(f).collect()
}

fn run_arms(arms: &[Arm<'_>], settings: &AuditSettings) -> Result<Vec<LearningCurve>, ProtocolError> {
    let curve = &settings.curve;
    let per_arm: Vec<Vec<CurvePoint>> = match curve.mode {
        CurveMode::Retrain => {
            let jobs: Vec<(usize, usize)> = arms
                .iter()
                .enumerate()
                .flat_map(|(a, arm)| (0..arm.checkpoints.len()).map(move |k| (a, k)))
                .collect();
            let points = map_jobs(settings.jobs, jobs.len(), |j| {
                let (a, k) = jobs[j];
                run_point(&arms[a], k, curve)
            })?;
            let mut grouped: Vec<Vec<CurvePoint>> = arms.iter().map(|_| Vec::new()).collect();
            for ((a, _), p) in jobs.into_iter().zip(points) {
                grouped[a].push(p);
            }
            grouped
        }
        CurveMode::Continual => map_jobs(settings.jobs, arms.len(), |a| run_continual(&arms[a], curve))?,
    };
    Ok(arms
        .iter()
        .zip(per_arm)
        .map(|(arm, points)| LearningCurve {
            arm: arm.name.clone(),
            seed: arm.master,
            points,
        })
        .collect())
}

fn make_arm<'a>(
    c: &Curriculum,
    sources: &Sources<'_>,
    new_test: &'a Dataset,
    seed: u64,
    settings: &AuditSettings,
) -> Result<Arm<'a>, ProtocolError> {
    let sentences = c.materialize(sources)?;
    let checkpoints = settings.checkpoints.resolve(sentences.len())?;
    Ok(Arm {
        name: c.name.clone(),
        group: c.seed_group.clone(),
        master: seed,
        sentences,
        new_test,
        checkpoints,
    })
}

fn check_seeds(seeds: &[u64]) -> Result<(), ProtocolError> {
    if seeds.is_empty() {
        return Err(ProtocolError::Settings("at least one seed is required".into()));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(ProtocolError::Settings("seeds must be distinct".into()));
    }
    Ok(())
}

/// Runs the identify protocol once per seed and aggregates the gaps
/// `F1(PureTrain) - F1(TestTrain)`.
pub fn run_identify(
    train: &Dataset,
    test: &Dataset,
    x: usize,
    seeds: &[u64],
    settings: &AuditSettings,
) -> Result<AuditReport, ProtocolError> {
    settings.validate()?;
    check_seeds(seeds)?;
    if test.is_empty() {
        return Err(ProtocolError::SizeMismatch {
            set: "test",
            expected: 1,
            found: 0,
        });
    }
    let mut warnings = Vec::new();
    if x > test.len() {
        warnings.push(format!(
            "x = {x} exceeds the test set size {}; subsets are larger than the set under audit",
            test.len()
        ));
    }
    let sources = Sources {
        train: Some(train),
        test: Some(test),
        ..Sources::default()
    };
    let plans: Vec<IdentifyPlan> = seeds
        .iter()
        .map(|&s| make_identify_plan(train, test, x, s))
        .collect::<Result<_, _>>()?;
    let new_tests: Vec<Dataset> = plans
        .iter()
        .map(|p| train.select("new-test", &p.new_test))
        .collect();
    let mut arms = Vec::new();
    let mut curricula = Vec::new();
    for ((plan, new_test), &seed) in plans.iter().zip(&new_tests).zip(seeds) {
        for c in build_identify_curricula(plan) {
            arms.push(make_arm(&c, &sources, new_test, seed, settings)?);
            if curricula.len() < 3 {
                curricula.push(c);
            }
        }
    }
    let curves = run_arms(&arms, settings)?;
    let early = early_window(&curves, settings.early_fraction);
    let rule = identify_rule(settings.threshold, settings.early_fraction, early);
    let gaps = compute_gaps(&curves, &identify_pairs(), early);
    let verdict = decide(ProtocolKind::Identify, &gaps, &rule, false);
    Ok(AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: crate::VERSION.to_string(),
        protocol: ProtocolKind::Identify,
        run_config: None,
        settings: settings.clone(),
        seeds: seeds.to_vec(),
        plans: plans.into_iter().map(PlanRecord::Identify).collect(),
        curricula,
        curves,
        gaps,
        rule,
        verdict,
        warnings,
    })
}

/// Runs the eight validate curricula once per seed.
pub fn run_validate(
    train: &Dataset,
    test_good: &Dataset,
    test_mistake: &Dataset,
    test_corrected: &Dataset,
    sizes: ValidateSizes,
    seeds: &[u64],
    settings: &AuditSettings,
) -> Result<AuditReport, ProtocolError> {
    settings.validate()?;
    check_seeds(seeds)?;
    let mut warnings = Vec::new();
    if sizes.z == 0 {
        warnings.push("z = 0: no corrected sentences, Mistake and Correct variants coincide".into());
    }
    let sources = Sources {
        train: Some(train),
        test_good: Some(test_good),
        test_mistake: Some(test_mistake),
        test_corrected: Some(test_corrected),
        ..Sources::default()
    };
    let plans: Vec<ValidatePlan> = seeds
        .iter()
        .map(|&s| make_validate_plan(train, test_good, test_mistake, test_corrected, sizes, s))
        .collect::<Result<_, _>>()?;
    let new_tests: Vec<Dataset> = plans
        .iter()
        .map(|p| train.select("new-test", &p.train_x))
        .collect();
    let mut arms = Vec::new();
    let mut curricula = Vec::new();
    for ((plan, new_test), &seed) in plans.iter().zip(&new_tests).zip(seeds) {
        for c in build_validate_curricula(plan) {
            arms.push(make_arm(&c, &sources, new_test, seed, settings)?);
            if curricula.len() < 8 {
                curricula.push(c);
            }
        }
    }
    let curves = run_arms(&arms, settings)?;
    let early = early_window(&curves, settings.early_fraction);
    let rule = validate_rule(settings.threshold, settings.early_fraction, early);
    let gaps = compute_gaps(&curves, &validate_pairs(), early);
    let verdict = decide(ProtocolKind::Validate, &gaps, &rule, sizes.z == 0);
    Ok(AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: crate::VERSION.to_string(),
        protocol: ProtocolKind::Validate,
        run_config: None,
        settings: settings.clone(),
        seeds: seeds.to_vec(),
        plans: plans.into_iter().map(PlanRecord::Validate).collect(),
        curricula,
        curves,
        gaps,
        rule,
        verdict,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvalResult;

    fn eval(f1: f64) -> EvalResult {
        EvalResult {
            precision: f1,
            recall: f1,
            f1,
            true_positives: 0,
            predicted: 0,
            gold: 0,
            per_type: Default::default(),
        }
    }

    fn curve(arm: &str, seed: u64, f1: &[f64]) -> LearningCurve {
        LearningCurve {
            arm: arm.into(),
            seed,
            points: f1
                .iter()
                .enumerate()
                .map(|(i, &f)| CurvePoint {
                    prefix_size: (i + 1) * 10,
                    eval: eval(f),
                })
                .collect(),
        }
    }

    #[test]
    fn gap_statistics() {
        let curves = vec![
            curve("PureTrain", 1, &[0.5, 0.8]),
            curve("TestTrain", 1, &[0.4, 0.8]),
            curve("PureTrain", 2, &[0.6, 0.9]),
            curve("TestTrain", 2, &[0.3, 0.7]),
        ];
        let gaps = compute_gaps(&curves, &[("PureTrain", "TestTrain", "primary")], 1);
        let g = &gaps[0];
        assert_eq!(g.name, "PureTrain-TestTrain");
        assert!((g.points[0].mean - 20.0).abs() < 1e-9);
        assert!((g.points[0].min - 10.0).abs() < 1e-9);
        assert!((g.points[0].max - 30.0).abs() < 1e-9);
        assert!((g.points[0].band - 10.0).abs() < 1e-9);
        assert!((g.early_mean - 20.0).abs() < 1e-9);
        assert!((g.final_mean - 10.0).abs() < 1e-9);
    }

    #[test]
    fn identify_decisions() {
        let rule = identify_rule(2.0, 0.5, 1);
        let gaps = |a: f64, b: f64| {
            compute_gaps(
                &[curve("PureTrain", 1, &[a, 0.9]), curve("TestTrain", 1, &[b, 0.9])],
                &identify_pairs(),
                1,
            )
        };
        assert_eq!(decide(ProtocolKind::Identify, &gaps(0.6, 0.5), &rule, false), Verdict::Inconsistent);
        assert_eq!(decide(ProtocolKind::Identify, &gaps(0.6, 0.595), &rule, false), Verdict::Consistent);
        assert_eq!(decide(ProtocolKind::Identify, &gaps(0.5, 0.6), &rule, false), Verdict::Indeterminate);
        // a gap above the threshold but inside the seed band counts as noise
        let noisy = compute_gaps(
            &[
                curve("PureTrain", 1, &[0.60, 0.9, 0.9]),
                curve("TestTrain", 1, &[0.50, 0.9, 0.9]),
                curve("PureTrain", 2, &[0.40, 0.9, 0.9]),
                curve("TestTrain", 2, &[0.44, 0.9, 0.9]),
            ],
            &identify_pairs(),
            2,
        );
        let rule2 = identify_rule(2.0, 0.5, 2);
        assert!((noisy[0].points[0].mean - 3.0).abs() < 1e-9);
        assert_eq!(decide(ProtocolKind::Identify, &noisy, &rule2, false), Verdict::Consistent);
    }

    #[test]
    fn validate_degenerate_is_recovered() {
        let rule = validate_rule(2.0, 0.5, 1);
        assert_eq!(decide(ProtocolKind::Validate, &[], &rule, true), Verdict::Recovered);
        assert_eq!(decide(ProtocolKind::Validate, &[], &rule, false), Verdict::Indeterminate);
    }
}
