mod common;

use common::{forest_instance, posterior_gap, random_prior};
use gdsbp::bp::posteriors_after;
use gdsbp::matrix::parse_gds;
use gdsbp::noise::{exact_posterior, stream_rng};
use gdsbp::tanner::TannerGraph;
use gdsbp::Schedule;

fn run_forests(depth_one: bool, schedule: Schedule, instances: u64, seed: u64) {
    for trial in 0..instances {
        let mut rng = stream_rng(seed, trial, 0, 0);
        let (h, prior, s) = forest_instance(depth_one, &mut rng);
        assert!(TannerGraph::from_gds(&h).is_forest());
        let exact = exact_posterior(&h, &s, &prior).unwrap();
        let iters = if depth_one { 1 } else { h.m_prime() + 1 };
        let bp = posteriors_after(&h, &s, &prior, 1.0, schedule, iters).unwrap();
        let gap = posterior_gap(&bp, &exact);
        assert!(gap <= 1e-9, "instance {trial}: gap {gap:e}\n{}", h.to_gds_string());
    }
}

#[test]
fn depth_one_forests_exact_after_one_parallel_iteration() {
    run_forests(true, Schedule::Parallel, 200, 31);
}

#[test]
fn depth_one_forests_exact_after_one_serial_iteration() {
    run_forests(true, Schedule::Serial, 200, 32);
}

#[test]
fn forests_exact_after_enough_parallel_iterations() {
    run_forests(false, Schedule::Parallel, 200, 33);
}

#[test]
fn forests_exact_after_enough_serial_iterations() {
    run_forests(false, Schedule::Serial, 200, 34);
}

#[test]
fn path_is_not_exact_after_one_iteration() {
    // E1 - c0 - E2 - c1 - E3: E1 sees c1 only through E2's message
    let h = parse_gds("GDS 3 0 2\n0:X 1:Z\n1:X 2:Z\n").unwrap();
    let mut rng = stream_rng(35, 0, 0, 0);
    let prior = random_prior(3, 0, 1.0, 3.0, &mut rng);
    let s = [true, true];
    let exact = exact_posterior(&h, &s, &prior).unwrap();
    let one = posteriors_after(&h, &s, &prior, 1.0, Schedule::Parallel, 1).unwrap();
    let two = posteriors_after(&h, &s, &prior, 1.0, Schedule::Parallel, 2).unwrap();
    assert!(posterior_gap(&one, &exact) > 1e-6);
    assert!(posterior_gap(&two, &exact) < 1e-9);
}
