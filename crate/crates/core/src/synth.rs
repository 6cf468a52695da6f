//! Seeded random instances for tests, benchmarks and sweeps.
//!
//! Jobs mimic trace-derived workloads: a job's tasks share a deadline of
//! `alpha` times the job's run time on a 2 GHz core, and every VM type runs
//! at 2 GHz or faster, so every task fits a fresh VM core alone.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{build_workload, Job, PmSpec, VmType, Workload};
use crate::trace::trace_deadline;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub tasks: RangeInclusive<usize>,
    pub pms: RangeInclusive<usize>,
    pub pm_cores: RangeInclusive<usize>,
    /// GHz, rounded to 0.1.
    pub pm_capacity: (f64, f64),
    pub vm_types: RangeInclusive<usize>,
    pub vm_cores: RangeInclusive<usize>,
    pub alphas: RangeInclusive<u32>,
    pub job_tasks: RangeInclusive<usize>,
    /// Seconds on a 1 GHz core; drawn log-uniformly and rounded.
    pub runtime: (f64, f64),
}

impl InstanceSpec {
    /// 10–500 tasks on 1–20 PMs with 1–3 VM types.
    pub fn broad() -> Self {
        Self {
            tasks: 10..=500,
            pms: 1..=20,
            pm_cores: 1..=8,
            pm_capacity: (1.0, 3.5),
            vm_types: 1..=3,
            vm_cores: 1..=4,
            alphas: 1..=4,
            job_tasks: 1..=16,
            runtime: (10.0, 20_000.0),
        }
    }

    /// At most 6 tasks and 2 small PMs.
    pub fn tiny() -> Self {
        Self {
            tasks: 1..=6,
            pms: 1..=2,
            pm_cores: 1..=3,
            pm_capacity: (1.0, 3.5),
            vm_types: 1..=2,
            vm_cores: 1..=2,
            alphas: 1..=4,
            job_tasks: 1..=3,
            runtime: (10.0, 20_000.0),
        }
    }

    /// 200 tasks against a small fleet, so local capacity runs out.
    pub fn medium() -> Self {
        Self {
            tasks: 200..=200,
            pms: 1..=4,
            pm_cores: 1..=4,
            pm_capacity: (1.6, 3.2),
            vm_types: 1..=2,
            vm_cores: 2..=4,
            alphas: 1..=4,
            job_tasks: 1..=16,
            runtime: (60.0, 20_000.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub workload: Workload,
    pub pms: Vec<PmSpec>,
    pub catalog: Vec<VmType>,
    pub alpha: u32,
}

pub fn random_instance<R: Rng>(rng: &mut R, spec: &InstanceSpec) -> Instance {
    let alpha = rng.gen_range(spec.alphas.clone());
    let total = rng.gen_range(spec.tasks.clone());
    let (lo, hi) = (spec.runtime.0.ln(), spec.runtime.1.ln());

    let mut jobs = Vec::new();
    let mut placed = 0;
    while placed < total {
        let size = rng.gen_range(spec.job_tasks.clone()).min(total - placed);
        let runtime = rng.gen_range(lo..=hi).exp().round().max(1.0);
        let requirements: Vec<f64> = (0..size)
            .map(|_| (runtime * rng.gen_range(0.5..=1.0)).round().max(1.0))
            .collect();
        jobs.push(Job::new(
            jobs.len() as u64 + 1,
            trace_deadline(runtime, alpha),
            &requirements,
        ));
        placed += size;
    }
    let workload = build_workload(jobs).expect("generated jobs are valid");

    let pms = (1..=rng.gen_range(spec.pms.clone()))
        .map(|id| {
            let capacity = rng.gen_range(spec.pm_capacity.0..=spec.pm_capacity.1);
            PmSpec::new(
                id,
                rng.gen_range(spec.pm_cores.clone()),
                round_tenth(capacity),
            )
        })
        .collect();

    let catalog = (0..rng.gen_range(spec.vm_types.clone()))
        .map(|index| {
            let cores = rng.gen_range(spec.vm_cores.clone());
            let capacity = round_tenth(rng.gen_range(2.0..=3.5));
            let price = (cores as f64 * rng.gen_range(0.04..=0.12) * 1000.0).round() / 1000.0;
            VmType::new(format!("vm{index}"), cores, capacity, price.max(0.001))
        })
        .collect();

    Instance {
        workload,
        pms,
        catalog,
        alpha,
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn round_tenth(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_spec() {
        let mut rng = seeded(7);
        for _ in 0..50 {
            let instance = random_instance(&mut rng, &InstanceSpec::broad());
            assert!((10..=500).contains(&instance.workload.total_tasks()));
            assert!((1..=20).contains(&instance.pms.len()));
            assert!((1..=3).contains(&instance.catalog.len()));
            let fastest = instance
                .catalog
                .iter()
                .map(|vm| vm.core_capacity)
                .fold(0.0, f64::max);
            assert!(instance
                .workload
                .tasks()
                .all(|task| task.work() / fastest <= task.deadline));
        }
    }

    #[test]
    fn deterministic() {
        let a = random_instance(&mut seeded(3), &InstanceSpec::medium());
        let b = random_instance(&mut seeded(3), &InstanceSpec::medium());
        assert_eq!(a, b);
    }
}
