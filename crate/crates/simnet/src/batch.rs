//! Fan-out of independent simulation runs. Runs share nothing, so they
//! parallelize trivially; results come back in job order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::Scenario;
use crate::report::{SimError, SimulationReport};
use crate::world;

/// One simulation to run: a scenario and the seed overriding its `seed` key.
#[derive(Debug, Clone)]
pub struct Job {
    pub scenario: Scenario,
    pub seed: u64,
}

/// Run every job, in parallel when the `parallel` feature is enabled
/// (default), sequentially otherwise.
pub fn run_batch(jobs: &[Job]) -> Vec<Result<SimulationReport, SimError>> {
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter()
            .map(|job| world::run(&job.scenario, job.seed))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(jobs)
    }
}

/// Sequential fallback, always available; the benchmark suite compares the
/// two paths.
pub fn run_batch_sequential(jobs: &[Job]) -> Vec<Result<SimulationReport, SimError>> {
    jobs.iter()
        .map(|job| world::run(&job.scenario, job.seed))
        .collect()
}
