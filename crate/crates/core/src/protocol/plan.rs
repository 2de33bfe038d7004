use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Curriculum, ProtocolError, Segment, SourceId};
use crate::corpus::Dataset;

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Disjoint training subsets for the identify protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifyPlan {
    pub x: usize,
    pub seed: u64,
    /// Held-out subset used as the new test set.
    pub new_test: Vec<usize>,
    pub blue: Vec<usize>,
    pub green: Vec<usize>,
    /// Indices into the original test set (all of it, in order).
    pub external: Vec<usize>,
}

/// Shuffles the training indices and takes three consecutive blocks of
/// size `x`.
pub fn make_identify_plan(
    train: &Dataset,
    test: &Dataset,
    x: usize,
    seed: u64,
) -> Result<IdentifyPlan, ProtocolError> {
    if 3 * x > train.len() {
        return Err(ProtocolError::InfeasibleIdentify {
            needed: 3 * x,
            available: train.len(),
            max_x: train.len() / 3,
        });
    }
    let idx = shuffled(train.len(), seed);
    Ok(IdentifyPlan {
        x,
        seed,
        new_test: idx[..x].to_vec(),
        blue: idx[x..2 * x].to_vec(),
        green: idx[2 * x..3 * x].to_vec(),
        external: (0..test.len()).collect(),
    })
}

fn seg(label: &str, source: SourceId, indices: &[usize]) -> Segment {
    Segment {
        label: label.to_string(),
        source,
        indices: indices.to_vec(),
    }
}

/// `TrainTest = [blue, test]`, `PureTrain = [green, blue]`,
/// `TestTrain = [test, blue]`.
pub fn build_identify_curricula(plan: &IdentifyPlan) -> Vec<Curriculum> {
    let blue = || seg("train-blue", SourceId::Train, &plan.blue);
    let green = || seg("train-green", SourceId::Train, &plan.green);
    let test = || seg("test", SourceId::Test, &plan.external);
    let make = |name: &str, segments| Curriculum {
        name: name.to_string(),
        seed_group: name.to_string(),
        segments,
    };
    vec![
        make("TrainTest", vec![blue(), test()]),
        make("PureTrain", vec![green(), blue()]),
        make("TestTrain", vec![test(), blue()]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateSizes {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub w: usize,
}

/// Subsets for the validate protocol. Test-side lists index the good,
/// mistake and corrected datasets; `train_*` lists index the training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidatePlan {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub w: usize,
    pub seed: u64,
    pub test_good: Vec<usize>,
    pub mistake: Vec<usize>,
    pub corrected: Vec<usize>,
    /// New test set.
    pub train_x: Vec<usize>,
    pub train_y2: Vec<usize>,
    pub train_w: Vec<usize>,
}

pub fn make_validate_plan(
    train: &Dataset,
    test_good: &Dataset,
    test_mistake: &Dataset,
    test_corrected: &Dataset,
    sizes: ValidateSizes,
    seed: u64,
) -> Result<ValidatePlan, ProtocolError> {
    let ValidateSizes { x, y, z, w } = sizes;
    let check = |set: &'static str, expected: usize, found: usize| {
        if expected == found {
            Ok(())
        } else {
            Err(ProtocolError::SizeMismatch {
                set,
                expected,
                found,
            })
        }
    };
    check("test-good", y, test_good.len())?;
    check("test-mistake", z, test_mistake.len())?;
    check("test-corrected", z, test_corrected.len())?;
    if let Some(index) = test_mistake
        .sentences()
        .iter()
        .zip(test_corrected.sentences())
        .position(|(m, c)| !m.same_text(c))
    {
        return Err(ProtocolError::Misaligned { index });
    }
    if x + y + w > train.len() {
        return Err(ProtocolError::InfeasibleValidate {
            needed: x + y + w,
            available: train.len(),
        });
    }
    let idx = shuffled(train.len(), seed);
    Ok(ValidatePlan {
        x,
        y,
        z,
        w,
        seed,
        test_good: (0..y).collect(),
        mistake: (0..z).collect(),
        corrected: (0..z).collect(),
        train_x: idx[..x].to_vec(),
        train_y2: idx[x..x + y].to_vec(),
        train_w: idx[x + y..x + y + w].to_vec(),
    })
}

/// The eight orderings, Mistake and Correct variant of each:
/// `TestTrain* = [Test, Train_w, M|C]`, `PureTrain* = [Train_y2, Train_w, M|C]`,
/// `*TestTrain = [M|C, Test, Train_w]`, `*PureTrain = [M|C, Train_y2, Train_w]`.
pub fn build_validate_curricula(plan: &ValidatePlan) -> Vec<Curriculum> {
    let test = || seg("test-good", SourceId::TestGood, &plan.test_good);
    let y2 = || seg("train-y", SourceId::Train, &plan.train_y2);
    let w = || seg("train-w", SourceId::Train, &plan.train_w);
    let mut out = Vec::with_capacity(8);
    for (ordering, fix_last) in [
        ("TestTrain", true),
        ("PureTrain", true),
        ("TestTrain", false),
        ("PureTrain", false),
    ] {
        for (variant, source, indices, label) in [
            ("Mistake", SourceId::TestMistake, &plan.mistake, "mistake"),
            ("Correct", SourceId::TestCorrected, &plan.corrected, "correct"),
        ] {
            let block = seg(label, source, indices);
            let body = if ordering == "TestTrain" {
                vec![test(), w()]
            } else {
                vec![y2(), w()]
            };
            let (name, group, segments) = if fix_last {
                let mut s = body;
                s.push(block);
                (format!("{ordering}{variant}"), format!("{ordering}-last"), s)
            } else {
                let mut s = vec![block];
                s.extend(body);
                (format!("{variant}{ordering}"), format!("first-{ordering}"), s)
            };
            out.push(Curriculum {
                name,
                seed_group: group,
                segments,
            });
        }
    }
    out
}
