use std::collections::HashMap;

use hybrid_sched::ffd::{ffd_pm_order, ffd_task_order};
use hybrid_sched::ha::{schedule_ha_with_events, HaEvent};
use hybrid_sched::synth::{random_instance, seeded, Instance, InstanceSpec};
use hybrid_sched::trace::{parse_swf_str, trace_deadline, write_swf};
use hybrid_sched::{
    build_workload, check_deadlines, default_epsilon, objective_value, rent_cost, schedule_ffd,
    schedule_ha, to_workload, Container, ContainerKind, Job, ObjectiveParams, RawTraceJob,
    Schedule, TaskMapping, VmType, Workload,
};
use proptest::prelude::*;

fn small_spec() -> InstanceSpec {
    InstanceSpec {
        tasks: 1..=120,
        pms: 0..=6,
        ..InstanceSpec::broad()
    }
}

fn instance(seed: u64) -> Instance {
    random_instance(&mut seeded(seed), &small_spec())
}

fn job_strategy() -> impl Strategy<Value = (f64, Vec<f64>)> {
    (1.0..1e5f64, prop::collection::vec(0.1..1e4f64, 1..6))
}

fn workload_strategy() -> impl Strategy<Value = Workload> {
    prop::collection::vec(job_strategy(), 1..12).prop_map(|jobs| {
        let jobs = jobs
            .into_iter()
            .enumerate()
            // Reversed ids so sorting has work to do.
            .map(|(position, (deadline, reqs))| {
                Job::new(100 - position as u64, deadline.round(), &reqs)
            })
            .collect();
        build_workload(jobs).unwrap()
    })
}

fn params(instance: &Instance) -> ObjectiveParams {
    let pm_count = instance.pms.len().max(1);
    ObjectiveParams::new(
        default_epsilon(&instance.catalog, pm_count).unwrap(),
        pm_count,
    )
}

/// Every core that precedes the chosen one in scan order must have been
/// unable to finish the task by its deadline at the time it was placed.
fn assert_first_fit(schedule: &Schedule, instance: &Instance) {
    let mut order: Vec<usize> = ffd_pm_order(&instance.pms).iter().map(|pm| pm.id).collect();
    let tasks: HashMap<_, _> = instance
        .workload
        .tasks()
        .map(|t| (t.id(), t.clone()))
        .collect();
    let mut busy: HashMap<(usize, usize), f64> = HashMap::new();
    let expected: Vec<_> = ffd_task_order(&instance.workload)
        .iter()
        .map(|t| t.id())
        .collect();
    let placed: Vec<_> = schedule.assignments.iter().map(|a| a.task).collect();
    assert_eq!(placed, expected);

    for assignment in &schedule.assignments {
        let task = &tasks[&assignment.task];
        if !order.contains(&assignment.container_id) {
            order.push(assignment.container_id);
            assert_eq!(
                assignment.core_index, 0,
                "a fresh VM starts on its first core"
            );
        }
        for &id in &order {
            let container = schedule.container(id).unwrap();
            for core in 0..container.cores.len() {
                if (id, core) == (assignment.container_id, assignment.core_index) {
                    break;
                }
                let start = busy.get(&(id, core)).copied().unwrap_or(0.0);
                let finish = start + task.work() / container.core_capacity();
                let is_new_vm = id == assignment.container_id;
                assert!(
                    is_new_vm && assignment.core_index == 0 || finish > task.deadline,
                    "{} skipped core ({id}, {core}) that fits",
                    task.id()
                );
            }
            if id == assignment.container_id {
                break;
            }
        }
        let start = busy
            .entry((assignment.container_id, assignment.core_index))
            .or_insert(0.0);
        assert_eq!(*start, assignment.start);
        *start = assignment.finish;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn workload_is_totally_ordered(workload in workload_strategy()) {
        for pair in workload.jobs().windows(2) {
            prop_assert!(pair[0].deadline <= pair[1].deadline);
            prop_assert!((pair[0].deadline, pair[0].id) < (pair[1].deadline, pair[1].id));
        }
        let counted: usize = workload.jobs().iter().map(|j| j.tasks.len()).sum();
        prop_assert_eq!(counted, workload.total_tasks());
    }

    #[test]
    fn workload_json_round_trip(workload in workload_strategy()) {
        let text = serde_json::to_string(&workload).unwrap();
        let back: Workload = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, workload);
    }

    #[test]
    fn schedules_are_feasible_and_deterministic(seed in any::<u64>()) {
        let instance = instance(seed);
        for run in [schedule_ha, schedule_ffd] {
            let schedule = run(&instance.workload, &instance.pms, &instance.catalog, None).unwrap();
            let report = check_deadlines(&schedule, &instance.workload).unwrap();
            prop_assert!(report.feasible, "{:?}", report.violations);
            let again = run(&instance.workload, &instance.pms, &instance.catalog, None).unwrap();
            prop_assert_eq!(&again, &schedule);

            let text = serde_json::to_string(&schedule).unwrap();
            let back: Schedule = serde_json::from_str(&text).unwrap();
            prop_assert!(check_deadlines(&back, &instance.workload).unwrap().feasible);
            prop_assert_eq!(back, schedule);
        }
    }

    #[test]
    fn ffd_places_on_first_fitting_core(seed in any::<u64>()) {
        let instance = instance(seed);
        let schedule = schedule_ffd(&instance.workload, &instance.pms, &instance.catalog, None).unwrap();
        assert_first_fit(&schedule, &instance);
    }

    #[test]
    fn ha_retires_only_cores_that_cannot_fit(seed in any::<u64>()) {
        let instance = instance(seed);
        let (schedule, events) =
            schedule_ha_with_events(&instance.workload, &instance.pms, &instance.catalog, None).unwrap();
        let mut unassigned: HashMap<_, _> = instance.workload.tasks().map(|t| (t.id(), t.clone())).collect();
        let mut busy: HashMap<(usize, usize), f64> = HashMap::new();
        let mut retired: Vec<usize> = Vec::new();
        for event in &events {
            match event {
                HaEvent::Assign(assignment) => {
                    prop_assert!(!retired.contains(&assignment.container_id));
                    unassigned.remove(&assignment.task);
                    busy.insert((assignment.container_id, assignment.core_index), assignment.finish);
                }
                HaEvent::Retire { container_ids } => {
                    for &id in container_ids {
                        let container = schedule.container(id).unwrap();
                        for core in 0..container.cores.len() {
                            let start = busy.get(&(id, core)).copied().unwrap_or(0.0);
                            for task in unassigned.values() {
                                prop_assert!(start + task.work() / container.core_capacity() > task.deadline);
                            }
                        }
                    }
                    retired.extend(container_ids);
                }
                _ => {}
            }
        }
        prop_assert!(unassigned.is_empty());
    }

    #[test]
    fn objective_sign_law(seed in any::<u64>()) {
        let instance = instance(seed);
        let params = params(&instance);
        for run in [schedule_ha, schedule_ffd] {
            let schedule = run(&instance.workload, &instance.pms, &instance.catalog, None).unwrap();
            let objective = objective_value(&schedule, &params).unwrap();
            let rented = schedule.rented_vm_count > 0;
            let pm_used = schedule.containers.iter().any(|c| c.kind() == ContainerKind::Pm && c.is_used());
            prop_assert_eq!(objective < 0.0, !rented && pm_used);
            prop_assert_eq!(objective > 0.0, rented);
        }
    }

    #[test]
    fn billing_rounds_up(busy in 0.001..50_000.0f64, price in 0.001..2.0f64, period in 1.0..7200.0f64) {
        let vm = VmType { billing_period: period, ..VmType::new("v", 1, 1.0, price) };
        let job = Job::new(1, 1e9, &[busy]);
        let mut container = Container::vm(2, vm, 0);
        container.append(0, &job.tasks[0]);
        let cost = rent_cost(&container).unwrap();
        let periods = cost / price;
        prop_assert!((periods - periods.round()).abs() < 1e-9);
        prop_assert!(periods.round() >= busy / period - 1e-9);
        prop_assert!(periods.round() < busy / period + 1.0);
    }

    #[test]
    fn deadline_doubles_with_alpha(
        runtimes in prop::collection::vec((1u32..100_000, 1u32..64), 1..20),
        alpha in 1u32..3,
    ) {
        let raw: Vec<RawTraceJob> = runtimes
            .iter()
            .enumerate()
            .map(|(i, &(runtime, processors))| RawTraceJob {
                job_number: i as u64 + 1,
                runtime: f64::from(runtime),
                processors,
            })
            .collect();
        let single = to_workload(&raw, alpha, TaskMapping::PerProcessor).unwrap();
        let double = to_workload(&raw, 2 * alpha, TaskMapping::PerProcessor).unwrap();
        for job in single.jobs() {
            let source = raw.iter().find(|r| r.job_number == job.id).unwrap();
            prop_assert_eq!(job.deadline, f64::from(alpha) * source.runtime / 2.0);
            prop_assert_eq!(job.deadline, trace_deadline(source.runtime, alpha));
            let twin = double.jobs().iter().find(|j| j.id == job.id).unwrap();
            prop_assert_eq!(twin.deadline, 2.0 * job.deadline);
            prop_assert_eq!(job.tasks.len(), source.processors as usize);
        }
    }

    #[test]
    fn swf_round_trip(
        jobs in prop::collection::vec((1u64..1_000_000, 1u32..500_000, 1u32..1024), 0..30),
    ) {
        let raw: Vec<RawTraceJob> = jobs
            .into_iter()
            .map(|(job_number, runtime, processors)| RawTraceJob {
                job_number,
                runtime: f64::from(runtime) / 4.0,
                processors,
            })
            .collect();
        let mut text = Vec::new();
        write_swf(&raw, &mut text).unwrap();
        let trace = parse_swf_str(std::str::from_utf8(&text).unwrap()).unwrap();
        prop_assert_eq!(trace.jobs, raw.clone());
        prop_assert_eq!(trace.data_lines, raw.len());
        prop_assert_eq!(trace.dropped, 0);
    }

    #[test]
    fn retained_plus_dropped_is_data_lines(
        rows in prop::collection::vec((-5i64..10_000, -3i64..64, any::<bool>()), 0..40),
    ) {
        let mut text = String::from("; header\n");
        for (index, (runtime, processors, comment)) in rows.iter().enumerate() {
            if *comment {
                text.push_str(";note\n");
            }
            text.push_str(&format!("{} 0 0 {runtime} {processors} -1 -1\n", index + 1));
        }
        let trace = parse_swf_str(&text).unwrap();
        prop_assert_eq!(trace.jobs.len() + trace.dropped, trace.data_lines);
        prop_assert_eq!(trace.data_lines, rows.len());
        let kept = rows.iter().filter(|(r, p, _)| *r > 0 && *p >= 1).count();
        prop_assert_eq!(trace.jobs.len(), kept);
        prop_assert_eq!(trace.comment_lines, 1 + rows.iter().filter(|r| r.2).count());
    }
}
