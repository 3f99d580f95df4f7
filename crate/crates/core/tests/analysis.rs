use lifted_tfhe::analysis::*;
use lifted_tfhe::bootstrap::{encrypt_bit, eval_gate, GateKind, RotationMode};
use lifted_tfhe::rng::DetRng;
use lifted_tfhe::transform::{Backend, TransformCounters};
use lifted_tfhe::ParameterSet;

#[test]
fn error_sweep_rows_and_report() {
    let rows = error_sweep(&DEFAULT_BETAS, 256, 3).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(strictly_decreasing(&rows), "{rows:?}");
    let p = ParameterSet::default();
    let text = csv_string(1, &p, &rows).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("schema_version,seed,params,beta,ring_degree,trials,error_db,reference_db"));
    let json = json_report(1, &p, &rows);
    assert_eq!(json["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn precision_collapse_shows_failures() {
    let r = run_failure_trials(1000, 8, 2, &ParameterSet::default(), 3).unwrap();
    assert_eq!(r.trials, 1000);
    assert!(r.failures > 0 && r.failures <= r.trials);
}

#[test]
fn failures_fall_with_beta() {
    let p = ParameterSet::default();
    let counts: Vec<u64> = [8u32, 28, 38, 64].iter().map(|&b| run_failure_trials(30, b, 2, &p, 9).unwrap().failures).collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    assert_eq!(counts[3], 0);
}

#[test]
fn failure_report_serializes() {
    let p = ParameterSet::default();
    let r = run_failure_trials(4, 64, 2, &p, 1).unwrap();
    assert_eq!(r.failures, 0);
    let text = csv_string(r.seed, &r.params, std::slice::from_ref(&r)).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rec = reader.records().next().unwrap().unwrap();
    assert_eq!(&rec[3], "4");
    assert_eq!(&rec[4], "0");
    let json = json_report(r.seed, &r.params, &[r.clone()]);
    assert_eq!(json["rows"][0]["beta"], 64);
}

#[test]
fn noise_components_track_unroll_factor() {
    let p = ParameterSet::default();
    let reports = noise_scan(&[1, 2, 3], 24, &p, 5).unwrap();
    let eps: Vec<u64> = reports.iter().map(|r| r.external_products_per_bootstrap).collect();
    assert_eq!(eps, [500, 250, 167]);
    assert_eq!(reports.iter().map(|r| r.bk_key_count).collect::<Vec<_>>(), [1, 3, 7]);
    assert_eq!(reports.iter().map(|r| r.bk_total_keys).collect::<Vec<_>>(), [500, 750, 1169]);
    let ep: Vec<f64> = reports.iter().map(|r| r.ep_noise_var).collect();
    assert!(ep[0] > ep[1] && ep[1] > ep[2], "{ep:?}");
    assert!(reports[2].bk_noise_var > reports[0].bk_noise_var, "{reports:?}");
    for r in &reports {
        assert!(r.measured_output_phase_stddev < 1.0 / 64.0);
        assert!(r.transform_error_db < -250.0);
    }
    let text = csv_string(5, &p, &reports).unwrap();
    assert!(text.lines().next().unwrap().contains("key_count"));
}

#[test]
fn calibrated_bundle_stage_scales_with_key_count() {
    let p = ParameterSet::default();
    let backend = Backend::approximate(p.ring_degree, 64).unwrap();
    let table = calibrate_op_costs(&p, &backend, 1, 31).unwrap();
    let (tb1, _) = stage_time_estimate(1, &table).unwrap();
    let (tb2, _) = stage_time_estimate(2, &table).unwrap();
    let ratio = tb2 / tb1;
    assert!((2.4..=3.6).contains(&ratio), "t_B(2)/t_B(1) = {ratio} from {table:?}");
}

#[test]
fn stage_counts_match_counters() {
    let p = ParameterSet::default();
    for m in [1usize, 2, 3] {
        let params = p.with_unroll(m).unwrap();
        let (sk, backend, cloud) = trial_keys(&params, 2).unwrap();
        let mut rng = DetRng::new(3);
        let a = encrypt_bit(1, &sk.lwe, &params, &mut rng);
        let mut c = TransformCounters::default();
        eval_gate(GateKind::Nand, &a, Some(&a), &cloud, &backend, &mut c).unwrap();
        let groups = params.group_count() as u64;
        assert_eq!(c.external_products, groups);
        assert_eq!(c.bundle_scale_adds, groups * params.keys_per_group() as u64);
        assert_eq!(c.bundle_h_adds, groups);
        let table = OpCostTable {
            scale_add: 1.0,
            h_add: 1.0,
            forward: 1.0,
            inverse: 1.0,
            pointwise_mac: 1.0,
            decompose: 1.0,
            trlwe_dimension: 1,
            gadget_length: 3,
        };
        let (fwd, inv, _) = table.ep_counts();
        assert_eq!(c.forward_count, groups * fwd);
        assert_eq!(c.inverse_count, groups * inv);
    }
}

#[test]
fn pipeline_model_over_unroll_factors() {
    let p = ParameterSet::default();
    let backend = Backend::approximate(p.ring_degree, 64).unwrap();
    let table = calibrate_op_costs(&p, &backend, 4, 15).unwrap();
    let rows = throughput_curve(p.lwe_dimension, &[1, 2, 3, 4, 5], &table).unwrap();
    for r in &rows {
        assert!(r.pipelined <= r.sequential);
        let seq = PipelineModel::new(r.group_count, r.stage_time_bundle, r.stage_time_ep, RotationMode::Sequential).unwrap();
        assert_eq!(pipeline_makespan(&seq), r.sequential);
    }
    let best = throughput_optimum(&rows).unwrap();
    assert!((2..=4).contains(&best), "{rows:?}");
}
