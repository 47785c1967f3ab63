use std::collections::HashSet;
use std::fs;
use std::path::Path as FsPath;
use std::sync::Arc;

use pdg_core::environment::{gen_random_passage, DistributionId, Environment, MPProblem};
use pdg_core::path::PathSource;
use pdg_core::seed::{derive_seed, rng_for};
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validate,
    Test,
}

impl Split {
    fn tag(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Validate => 1,
            Split::Test => 2,
        }
    }
}

/// A planning problem tagged with where it came from.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mp: MPProblem,
    pub source: PathSource,
}

/// Environment seeds for the three splits plus task counts. Everything else
/// is regenerated from the seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub distribution: DistributionId,
    /// Wall count for RandomPassage; `None` keeps the distribution default.
    pub n_passages: Option<usize>,
    pub train: Vec<u64>,
    pub validate: Vec<u64>,
    pub test: Vec<u64>,
    /// Tasks per training environment (the database source).
    pub tasks_per_env: usize,
    /// Tasks per validation or test environment.
    pub eval_tasks_per_env: usize,
    pub seed: u64,
}

/// Draws disjoint environment seeds for each split from `seed`.
pub fn make_dataset(
    distribution: DistributionId,
    n_passages: Option<usize>,
    n_envs: usize,
    n_validate: usize,
    n_test: usize,
    tasks_per_env: usize,
    eval_tasks_per_env: usize,
    seed: u64,
) -> Dataset {
    let mut seen = HashSet::new();
    let mut draw = |split: Split, n: usize| -> Vec<u64> {
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        while out.len() < n {
            let s = derive_seed(seed, &[split.tag(), i]);
            i += 1;
            if seen.insert(s) {
                out.push(s);
            }
        }
        out
    };
    Dataset {
        distribution,
        n_passages,
        train: draw(Split::Train, n_envs),
        validate: draw(Split::Validate, n_validate),
        test: draw(Split::Test, n_test),
        tasks_per_env,
        eval_tasks_per_env,
        seed,
    }
}

impl Dataset {
    pub fn seeds(&self, split: Split) -> &[u64] {
        match split {
            Split::Train => &self.train,
            Split::Validate => &self.validate,
            Split::Test => &self.test,
        }
    }

    pub fn environment(&self, env_seed: u64) -> Result<Environment, BenchError> {
        match (self.distribution, self.n_passages) {
            (DistributionId::RandomPassage, Some(n)) => Ok(gen_random_passage(env_seed, n)),
            (d, _) => Ok(Environment::generate(d, env_seed)?),
        }
    }

    pub fn tasks_per(&self, split: Split) -> usize {
        match split {
            Split::Train => self.tasks_per_env,
            _ => self.eval_tasks_per_env,
        }
    }

    /// All problems of a split, environment-major. Environments whose task
    /// sampling fails are reported in the error list and skipped.
    pub fn problems(&self, split: Split) -> (Vec<Problem>, Vec<(u64, BenchError)>) {
        let mut problems = Vec::new();
        let mut errors = Vec::new();
        for &env_seed in self.seeds(split) {
            let env = match self.environment(env_seed) {
                Ok(e) => Arc::new(e),
                Err(e) => {
                    errors.push((env_seed, e));
                    continue;
                }
            };
            for task_id in 0..self.tasks_per(split) as u64 {
                let mut rng = rng_for(self.seed, &[split.tag(), env_seed, task_id]);
                match pdg_core::environment::sample_task(&env, &env.task_mode, &mut rng) {
                    Ok(task) => problems.push(Problem {
                        mp: MPProblem { env: env.clone(), task },
                        source: PathSource { env_seed, task_id },
                    }),
                    Err(e) => {
                        errors.push((env_seed, e.into()));
                        break;
                    }
                }
            }
        }
        (problems, errors)
    }

    /// Writes `dataset.json` and every environment under
    /// `root/envs/<dist>/<seed>.env.json`.
    pub fn materialize(&self, root: &FsPath) -> Result<(), BenchError> {
        fs::create_dir_all(root)?;
        fs::write(root.join("dataset.json"), serde_json::to_string_pretty(self)?)?;
        let envs = root.join("envs");
        for split in [Split::Train, Split::Validate, Split::Test] {
            for &s in self.seeds(split) {
                let env = self.environment(s)?;
                env.save(&Environment::file_path(&envs, self.distribution, s))?;
            }
        }
        Ok(())
    }

    pub fn load(root: &FsPath) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(&fs::read_to_string(root.join("dataset.json"))?)?)
    }
}
