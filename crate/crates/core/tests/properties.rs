use nievergelt_core::harness::{ClockMode, ExecConfig};
use nievergelt_core::interp::{InitialValueSpace, NodeKind};
use nievergelt_core::nievergelt;
use nievergelt_core::ode::{ScalarIvp, StepPolicy, TimeSliceDecomposition};
use nievergelt_core::parareal::{self, PararealConfig};
use nievergelt_core::pde::{self, WaveProblem};
use proptest::prelude::*;

fn quiet(workers: usize) -> ExecConfig {
    ExecConfig::default()
        .with_workers(workers)
        .with_latency(0.0)
        .with_clock(ClockMode::Modeled)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nievergelt_sends_one_message_per_boundary(
        n in 1usize..24,
        m in 1usize..9,
        dt in prop::sample::select(vec![1e-3, 5e-4, 2.5e-3]),
        lobatto in any::<bool>(),
    ) {
        let kind = if lobatto { NodeKind::Lobatto } else { NodeKind::Gauss };
        let decomp = TimeSliceDecomposition::new(0.0, 0.5, n, dt, StepPolicy::Refine).unwrap();
        let space = InitialValueSpace::new(0.0, 2.0, m, kind).unwrap();
        let r = nievergelt::run_scalar(&ScalarIvp::riccati(), &decomp, &space, &quiet(1)).unwrap();
        prop_assert_eq!(r.message_count, n - 1);
        prop_assert!(r.t_comm <= r.t_total);
    }

    #[test]
    fn heat_nievergelt_is_exact(n in 1usize..20) {
        let evo = pde::heat_evolution(0.1).unwrap();
        let decomp = TimeSliceDecomposition::new(0.0, 2.0, n, 0.005, StepPolicy::Refine).unwrap();
        let r = nievergelt::run_linear(&evo, &evo.system.initial_state(), &decomp, &quiet(1)).unwrap();
        prop_assert!(r.error_vs_serial.unwrap() <= 1e-10);
        prop_assert_eq!(r.message_count, n - 1);
    }

    #[test]
    fn wave_nievergelt_is_exact(n in 1usize..9, half_m in 4usize..10) {
        let wave = WaveProblem::new(2 * half_m).unwrap();
        let decomp = TimeSliceDecomposition::new(0.0, 64.0 * wave.dt, n, wave.dt, StepPolicy::Refine);
        // only slice counts that divide the step count keep the leapfrog step fixed
        prop_assume!(decomp.as_ref().is_ok_and(|d| d.slices().iter().all(|s| (s.step - wave.dt).abs() < 1e-15)));
        let r = nievergelt::run_linear(&wave, &wave.initial_state(), &decomp.unwrap(), &quiet(1)).unwrap();
        prop_assert!(r.error_vs_serial.unwrap() <= 1e-10);
    }

    #[test]
    fn results_do_not_depend_on_worker_count(n in 2usize..12, m in 2usize..8, workers in 2usize..9) {
        let decomp = TimeSliceDecomposition::new(0.0, 0.5, n, 1e-3, StepPolicy::Refine).unwrap();
        let space = InitialValueSpace::new(0.0, 2.0, m, NodeKind::Gauss).unwrap();
        let a = nievergelt::run_scalar(&ScalarIvp::riccati(), &decomp, &space, &quiet(1)).unwrap();
        let b = nievergelt::run_scalar(&ScalarIvp::riccati(), &decomp, &space, &quiet(workers)).unwrap();
        prop_assert_eq!(a.final_state[0].to_bits(), b.final_state[0].to_bits());

        let evo = pde::heat_evolution(0.1).unwrap();
        let cfg = PararealConfig::new(0.005, 0.1, 2, n).unwrap().with_policy(StepPolicy::Refine);
        let y0 = evo.system.initial_state();
        let a = parareal::run_parareal(&evo, &y0, 0.0, 1.0, &cfg, &quiet(1)).unwrap();
        let b = parareal::run_parareal(&evo, &y0, 0.0, 1.0, &cfg, &quiet(workers)).unwrap();
        prop_assert_eq!(a.final_state, b.final_state);
    }

    #[test]
    fn parareal_terminates_after_n_iterations(n in 1usize..8) {
        let cfg = PararealConfig::new(1e-3, 0.1, n, n).unwrap().with_policy(StepPolicy::Refine);
        let r = parareal::run_parareal(&ScalarIvp::riccati(), &1.0, 0.0, 0.5, &cfg, &quiet(1)).unwrap();
        prop_assert!(r.error_vs_serial.unwrap() <= 1e-12);
    }

    #[test]
    fn parareal_communicates_more_than_nievergelt(n in 2usize..20, k in 2usize..6) {
        let cfg = PararealConfig::new(1e-3, 0.1, k, n).unwrap().with_policy(StepPolicy::Refine);
        let r = parareal::run_parareal(&ScalarIvp::riccati(), &1.0, 0.0, 0.5, &cfg, &quiet(1)).unwrap();
        prop_assert!(r.message_count >= k * (n - 1));
        prop_assert!(r.message_count > n - 1);
    }
}
