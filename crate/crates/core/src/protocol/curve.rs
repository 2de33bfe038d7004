use serde::{Deserialize, Serialize};

use super::{Curriculum, ProtocolError, Sources};
use crate::corpus::{Dataset, Sentence};
use crate::eval::{evaluate_model, EvalResult};
use crate::tagger::{train_sentences, CrfModel, FeatureTemplate, TrainConfig};

/// How checkpoints along a curriculum are chosen.
///
/// Deserializes from `{"count": n}`, `{"sizes": [..]}`, a bare count, or a
/// bare list of sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", from = "CheckpointsRepr")]
pub enum Checkpoints {
    /// `n` evenly spaced prefix sizes: `floor(i * len / n)` for `i = 1..=n`.
    Count(usize),
    /// Explicit prefix sizes; the full curriculum size is always appended.
    Sizes(Vec<usize>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CheckpointsRepr {
    Count(usize),
    Sizes(Vec<usize>),
    Tagged(TaggedCheckpoints),
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TaggedCheckpoints {
    Count(usize),
    Sizes(Vec<usize>),
}

impl From<CheckpointsRepr> for Checkpoints {
    fn from(r: CheckpointsRepr) -> Self {
        match r {
            CheckpointsRepr::Count(n) | CheckpointsRepr::Tagged(TaggedCheckpoints::Count(n)) => Checkpoints::Count(n),
            CheckpointsRepr::Sizes(s) | CheckpointsRepr::Tagged(TaggedCheckpoints::Sizes(s)) => Checkpoints::Sizes(s),
        }
    }
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Count(10)
    }
}

impl Checkpoints {
    pub fn resolve(&self, total: usize) -> Result<Vec<usize>, ProtocolError> {
        if total == 0 {
            return Err(ProtocolError::Checkpoints("curriculum is empty".into()));
        }
        let mut out: Vec<usize> = match self {
            Checkpoints::Count(0) => {
                return Err(ProtocolError::Checkpoints("checkpoint count must be positive".into()))
            }
            Checkpoints::Count(n) => (1..=*n).map(|i| i * total / n).filter(|&k| k > 0).collect(),
            Checkpoints::Sizes(sizes) => {
                if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.first() == Some(&0) {
                    return Err(ProtocolError::Checkpoints(
                        "sizes must be positive and strictly increasing".into(),
                    ));
                }
                if let Some(&big) = sizes.iter().find(|&&k| k > total) {
                    return Err(ProtocolError::Checkpoints(format!(
                        "checkpoint {big} exceeds curriculum size {total}"
                    )));
                }
                let mut s = sizes.clone();
                s.push(total);
                s
            }
        };
        out.dedup();
        Ok(out)
    }
}

fn check_checkpoints(checkpoints: &[usize], total: usize) -> Result<(), ProtocolError> {
    if checkpoints.is_empty() {
        return Err(ProtocolError::Checkpoints("no checkpoints".into()));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProtocolError::Checkpoints(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    let last = *checkpoints.last().expect("non-empty");
    if last > total {
        return Err(ProtocolError::Checkpoints(format!(
            "checkpoint {last} exceeds curriculum size {total}"
        )));
    }
    if last != total {
        return Err(ProtocolError::Checkpoints(format!(
            "last checkpoint {last} must equal curriculum size {total}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// A fresh model per checkpoint, trained on the whole prefix.
    #[default]
    Retrain,
    /// Warm-start from the previous checkpoint, training only on the
    /// sentences added since.
    Continual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSettings {
    pub train: TrainConfig,
    pub templates: Vec<FeatureTemplate>,
    pub mode: CurveMode,
}

impl Default for CurveSettings {
    fn default() -> Self {
        CurveSettings {
            train: TrainConfig::default(),
            templates: FeatureTemplate::default_set(),
            mode: CurveMode::Retrain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub prefix_size: usize,
    pub eval: EvalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub arm: String,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn f1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eval.f1).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Training seed for one checkpoint job; a pure function of its inputs so
/// results do not depend on scheduling.
pub fn job_seed(master: u64, group: &str, checkpoint_index: usize) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(group)) ^ checkpoint_index as u64)
}

pub(crate) fn train_point(
    prefix: &[Sentence],
    settings: &CurveSettings,
    seed: u64,
    warm: Option<&CrfModel>,
) -> Result<CrfModel, ProtocolError> {
    let cfg = TrainConfig {
        seed,
        ..settings.train.clone()
    };
    Ok(train_sentences(prefix, &settings.templates, &cfg, warm)?)
}

/// Learning curve of one curriculum evaluated on `new_test`.
///
/// Checkpoints must be strictly increasing and end at the curriculum size.
/// The training seed of checkpoint `i` is
/// `job_seed(settings.train.seed, curriculum.seed_group, i)`.
pub fn run_curve(
    curriculum: &Curriculum,
    sources: &Sources<'_>,
    new_test: &Dataset,
    checkpoints: &[usize],
    settings: &CurveSettings,
) -> Result<LearningCurve, ProtocolError> {
    let sentences = curriculum.materialize(sources)?;
    check_checkpoints(checkpoints, sentences.len())?;
    let master = settings.train.seed;
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut model: Option<CrfModel> = None;
    let mut start = 0;
    for (i, &k) in checkpoints.iter().enumerate() {
        let seed = job_seed(master, &curriculum.seed_group, i);
        let next = match settings.mode {
            CurveMode::Retrain => train_point(&sentences[..k], settings, seed, None)?,
            CurveMode::Continual => train_point(&sentences[start..k], settings, seed, model.as_ref())?,
        };
        points.push(CurvePoint {
            prefix_size: k,
            eval: evaluate_model(&next, new_test)?,
        });
        model = Some(next);
        start = k;
    }
    Ok(LearningCurve {
        arm: curriculum.name.clone(),
        seed: master,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, SynthConfig};
    use crate::protocol::{build_identify_curricula, make_identify_plan};

    #[test]
    fn count_grid() {
        let g = Checkpoints::Count(10).resolve(1101).unwrap();
        assert_eq!(g, vec![110, 220, 330, 440, 550, 660, 770, 880, 990, 1101]);
        assert_eq!(Checkpoints::Count(10).resolve(3).unwrap(), vec![1, 2, 3]);
        assert!(Checkpoints::Count(0).resolve(5).is_err());
    }

    #[test]
    fn explicit_grid() {
        let c = Checkpoints::Sizes(vec![10, 50]);
        assert_eq!(c.resolve(120).unwrap(), vec![10, 50, 120]);
        assert_eq!(Checkpoints::Sizes(vec![10, 120]).resolve(120).unwrap(), vec![10, 120]);
        assert!(Checkpoints::Sizes(vec![10, 130]).resolve(120).is_err());
        assert!(Checkpoints::Sizes(vec![50, 10]).resolve(120).is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(job_seed(1, "PureTrain", 0), job_seed(1, "PureTrain", 0));
        assert_ne!(job_seed(1, "PureTrain", 0), job_seed(1, "PureTrain", 1));
        assert_ne!(job_seed(1, "PureTrain", 0), job_seed(1, "TestTrain", 0));
        assert_ne!(job_seed(1, "PureTrain", 0), job_seed(2, "PureTrain", 0));
    }

    fn small_setup() -> (Dataset, Dataset) {
        let types = vec!["A".to_string(), "B".to_string()];
        let train = synthesize_corpus(&SynthConfig::new(90, 30, types.clone(), 1)).unwrap();
        let test = synthesize_corpus(&SynthConfig::new(20, 30, types, 1)).unwrap();
        (train, test)
    }

    #[test]
    fn curve_contract_and_determinism() {
        let (train, test) = small_setup();
        let plan = make_identify_plan(&train, &test, 20, 4).unwrap();
        let curricula = build_identify_curricula(&plan);
        let sources = Sources {
            train: Some(&train),
            test: Some(&test),
            ..Sources::default()
        };
        let new_test = train.select("new-test", &plan.new_test);
        let settings = CurveSettings {
            train: TrainConfig {
                epochs: 2,
                ..TrainConfig::default()
            },
            ..CurveSettings::default()
        };
        let total = curricula[1].len();
        let cps = [10, 25, total];
        let a = run_curve(&curricula[1], &sources, &new_test, &cps, &settings).unwrap();
        let b = run_curve(&curricula[1], &sources, &new_test, &cps, &settings).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.points.iter().map(|p| p.prefix_size).collect::<Vec<_>>(),
            cps.to_vec()
        );
        assert!(run_curve(&curricula[1], &sources, &new_test, &[10, total + 1], &settings).is_err());
        assert!(run_curve(&curricula[1], &sources, &new_test, &[10, 5, total], &settings).is_err());

        let continual = CurveSettings {
            mode: CurveMode::Continual,
            ..settings
        };
        let c = run_curve(&curricula[1], &sources, &new_test, &cps, &continual).unwrap();
        assert_eq!(c.points.len(), 3);
        // the first checkpoint trains from scratch in both modes
        assert_eq!(c.points[0], a.points[0]);
    }
}
