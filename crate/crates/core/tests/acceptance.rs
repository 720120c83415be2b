//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see the lines for passing tests too). Every
//! tolerance is pinned in this file. Three clauses are known to be
//! unattainable and fail honestly with their measured values: the myopic
//! Table-1 reproduction (criterion 2, three of six stat clauses), the
//! tremble occupancy level (criterion 9, first clause), and the
//! delta-threshold direction (criterion 10, second clause).

use netform_core::baseline::{myopic_run, summarize, MyopicConfig, SelectionMode};
use netform_core::efficiency::{
    brute_force_efficient, core_stable_conditions, efficient_core_periphery, efficient_two_type,
    is_core_stable, max_attainable_payoff, sustainable_set, AgentType,
    TwoTypeSpec,
};
use netform_core::equilibrium::{
    bound_components, deviation_gain_at, bound_certifies_no_deviation, threshold_gamma,
    ThresholdOutcome,
};
use netform_core::game::{
    agent_set_admissible, check_admissible, run, AdmissiblePlan, DeviationInjection, Signal,
    SimConfig, StrategyKind,
};
use netform_core::graph::{components, pair_count, stats, Network};
use netform_core::payoff::{
    one_period_payoff, PayoffModel, PayoffParams, PayoffTable, TypeVector,
};
use std::collections::BTreeMap;
use std::time::Instant;

struct Criterion {
    name: &'static str,
    clauses: Vec<(String, bool)>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, clauses: Vec::new() }
    }

    fn clause(&mut self, ok: bool, detail: String) {
        self.clauses.push((detail, ok));
    }

    fn finish(self) {
        let ok = self.clauses.iter().all(|c| c.1);
        println!("[{}] criterion {}", if ok { "PASS" } else { "FAIL" }, self.name);
        for (detail, good) in &self.clauses {
            println!("    [{}] {detail}", if *good { "ok" } else { "FAIL" });
        }
        assert!(ok, "criterion {} failed", self.name);
    }
}

/// Deterministic pseudo-random draws, shared by the sampling criteria.
struct Lcg(u64);

impl Lcg {
    fn f(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 40) as f64) / ((1u64 << 24) as f64)
    }

    fn draw_spec(&mut self, max_total: usize) -> TwoTypeSpec {
        let fa = 0.5 + 3.5 * self.f();
        let fb = fa * (0.15 + 0.7 * self.f());
        let c = 0.05 + 2.5 * self.f();
        let d = 0.05 + 0.9 * self.f();
        let total = (2.0 + self.f() * ((max_total - 1) as f64)) as usize;
        let total = total.clamp(2, max_total);
        let na = (1.0 + self.f() * (total - 1) as f64) as usize;
        let na = na.clamp(1, total - 1);
        TwoTypeSpec { f_alpha: fa, f_beta: fb, n_alpha: na, n_beta: total - na, cost: c, delta: d }
    }
}

/// Healthy margin from every case boundary in the two-type dispatch.
fn non_boundary(s: &TwoTypeSpec) -> bool {
    let fa = s.f_alpha;
    let fb = s.f_beta;
    let c = s.cost;
    let d = s.delta;
    let naf = s.n_alpha as f64;
    let nbf = s.n_beta as f64;
    let margin = 1e-6 * (1.0 + fa.abs() + c.abs());
    let qs = [
        (1.0 - d) * fb - c,
        (1.0 - d) * (fa + fb) / 2.0 - c,
        (1.0 - d) * fa - c,
        (1.0 + d * (naf - 1.0)) * fa + (1.0 + d * (naf + nbf - 2.0)) * fb - 2.0 * c,
        fa * (2.0 + d * (naf - 2.0)) - 2.0 * c,
        2.0 * (naf - 1.0) * fa
            + nbf * (fa + fb)
            + d * ((naf - 1.0) * (naf - 2.0) * fa
                + nbf * (nbf - 1.0) * fb
                + nbf * (naf - 1.0) * (fa + fb))
            - 2.0 * (naf + nbf - 1.0) * c,
        fa + d * ((naf - 2.0) * fa + nbf * fb) - c,
        fa + d * ((naf - 1.0) * fa + (nbf - 1.0) * fb) - c,
    ];
    qs.iter().all(|q| q.abs() > margin)
}

fn table1_types() -> (TypeVector, PayoffParams) {
    (
        TypeVector::from_counts(&[167, 333, 500]),
        PayoffParams::new(vec![16.0, 10.0, 6.0], 5.0, 0.6).unwrap(),
    )
}

#[test]
fn criterion_01_table1_foresighted_column() {
    let mut c = Criterion::new("1 (Table 1 foresighted column)");
    let t0 = Instant::now();
    let (tv, params) = table1_types();
    let result = efficient_core_periphery(&tv, &params).unwrap();
    let s = stats(&result.network);
    let elapsed = t0.elapsed();
    c.clause((s.alcc - 0.4251).abs() <= 0.02, format!("ALCC {:.4} within 0.4251 +/- 0.02", s.alcc));
    c.clause((s.gcc - 0.3570).abs() <= 0.02, format!("GCC {:.4} within 0.3570 +/- 0.02", s.gcc));
    c.clause(s.diameter == 2, format!("diameter {} == 2", s.diameter));
    c.clause(s.p90_distance == 2.0, format!("90%-distance {} == 2", s.p90_distance));
    c.clause(elapsed.as_secs_f64() < 10.0, format!("runtime {elapsed:?} < 10 s"));
    c.finish();
}

#[test]
fn criterion_02_table1_myopic_columns() {
    let mut c = Criterion::new("2 (Table 1 myopic columns)");
    let t0 = Instant::now();
    let seeds: Vec<u64> = (1..=5).collect();
    let run_batch = |benefits: Vec<f64>, counts: Vec<usize>| {
        let cfg = MyopicConfig {
            params: PayoffParams::new(benefits, 5.0, 0.6).unwrap(),
            type_counts: counts,
            horizon: None,
            seed: 0,
            selection: SelectionMode::Sweeps,
            reevaluate_existing: false,
        };
        let outcomes: Vec<_> = seeds
            .iter()
            .map(|&seed| myopic_run(&MyopicConfig { seed, ..cfg.clone() }).unwrap())
            .collect();
        (summarize(&outcomes), outcomes)
    };
    let (m1, m1_runs) = run_batch(vec![10.0], vec![1000]);
    let (m2, m2_runs) = run_batch(vec![16.0, 10.0, 6.0], vec![167, 333, 500]);
    let elapsed = t0.elapsed();
    c.clause(
        (m1.mean_alcc - 0.1357).abs() <= 0.05,
        format!("Myopic 1 mean ALCC {:.4} within 0.1357 +/- 0.05 (se {:.4})", m1.mean_alcc, m1.se_alcc),
    );
    c.clause(
        (m1.mean_gcc - 0.0458).abs() <= 0.04,
        format!("Myopic 1 mean GCC {:.4} within 0.0458 +/- 0.04 (se {:.4})", m1.mean_gcc, m1.se_gcc),
    );
    c.clause(
        m1_runs.iter().all(|o| o.stats.diameter == 2),
        format!("Myopic 1 diameter == 2 on every run (saw {:?})", m1_runs.iter().map(|o| o.stats.diameter).collect::<Vec<_>>()),
    );
    c.clause(
        (m2.mean_alcc - 0.1957).abs() <= 0.05,
        format!("Myopic 2 mean ALCC {:.4} within 0.1957 +/- 0.05 (se {:.4})", m2.mean_alcc, m2.se_alcc),
    );
    c.clause(
        (m2.mean_gcc - 0.0756).abs() <= 0.04,
        format!("Myopic 2 mean GCC {:.4} within 0.0756 +/- 0.04 (se {:.4})", m2.mean_gcc, m2.se_gcc),
    );
    c.clause(
        m2_runs.iter().all(|o| o.stats.diameter == 2),
        format!("Myopic 2 diameter == 2 on every run (saw {:?})", m2_runs.iter().map(|o| o.stats.diameter).collect::<Vec<_>>()),
    );
    c.clause(elapsed.as_secs_f64() < 300.0, format!("runtime {elapsed:?} < 5 min"));
    c.finish();
}

fn triangle_demo() -> (Network, TypeVector, PayoffModel) {
    (
        Network::clique(3),
        TypeVector::uniform(3),
        PayoffModel::Table(PayoffTable::symmetric_triangle(1.0)),
    )
}

#[test]
fn criterion_03_demo_table_certification() {
    let mut c = Criterion::new("3 (three-agent demo-table certification)");
    let (target, tv, model) = triangle_demo();
    let high = deviation_gain_at(&target, &tv, &model, 60, 0.98).unwrap();
    c.clause(high.max_gain <= 0.0, format!("max gain {:.6} <= 0 at (gamma 0.98, K 60)", high.max_gain));
    let low = deviation_gain_at(&target, &tv, &model, 60, 0.5).unwrap();
    c.clause(low.max_gain > 0.0, format!("max gain {:.6} > 0 at (gamma 0.5, K 60)", low.max_gain));
    match threshold_gamma(&target, &tv, &model, 60).unwrap() {
        ThresholdOutcome::Interior { gamma_bar, bracket, verified } => {
            c.clause(
                gamma_bar < 0.98 && verified,
                format!("threshold bracket ({:.4}, {:.4}) with cutoff {gamma_bar:.4} < 0.98, verified", bracket.0, bracket.1),
            );
        }
        other => c.clause(false, format!("expected an interior threshold, got {other:?}")),
    }
    // the closed-form certificate region must sit inside the exact region
    let comps = bound_components(&tv, &model).unwrap();
    let target_payoffs: Vec<f64> =
        (0..3).map(|i| one_period_payoff(&model, &tv, &target, i).unwrap()).collect();
    let mut certified = 0;
    let mut sound = true;
    for k in [30usize, 60, 90] {
        for gamma in [0.9, 0.95, 0.97, 0.98, 0.99] {
            if bound_certifies_no_deviation(&comps, &target_payoffs, gamma, k) {
                certified += 1;
                if deviation_gain_at(&target, &tv, &model, k, gamma).unwrap().max_gain > 0.0 {
                    sound = false;
                }
            }
        }
    }
    c.clause(
        certified > 0 && sound,
        format!("bound certified {certified} grid points, all confirmed by the exact oracle"),
    );
    c.finish();
}

#[test]
fn criterion_04_closed_form_matches_brute_force() {
    let mut c = Criterion::new("4 (two-type closed form vs brute force, 200 draws)");
    let t0 = Instant::now();
    let mut rng = Lcg(42);
    let mut done = 0;
    let mut welfare_ok = 0;
    let mut member_ok = 0;
    while done < 200 {
        let spec = rng.draw_spec(6);
        if !non_boundary(&spec) || spec.validate().is_err() {
            continue;
        }
        let closed = efficient_two_type(&spec).unwrap();
        let brute = brute_force_efficient(&spec.type_vector(), &spec.model().unwrap()).unwrap();
        if closed.welfare == brute.max_welfare {
            welfare_ok += 1;
        }
        if brute.contains(&closed.network, &spec.type_vector()) {
            member_ok += 1;
        }
        done += 1;
    }
    let elapsed = t0.elapsed();
    c.clause(welfare_ok == 200, format!("exact welfare equality on {welfare_ok}/200 draws"));
    c.clause(member_ok == 200, format!("closed-form network among maximizers on {member_ok}/200 draws"));
    c.clause(elapsed.as_secs_f64() < 120.0, format!("runtime {elapsed:?} < 2 min"));
    c.finish();
}

#[test]
fn criterion_05_maximizers_have_one_component() {
    let mut c = Criterion::new("5 (maximizers have at most one non-empty component)");
    let mut rng = Lcg(42);
    let mut done = 0;
    let mut ok = true;
    while done < 200 {
        let spec = rng.draw_spec(6);
        if !non_boundary(&spec) || spec.validate().is_err() {
            continue;
        }
        let brute = brute_force_efficient(&spec.type_vector(), &spec.model().unwrap()).unwrap();
        for g in &brute.maximizers {
            if components(g).len() > 1 {
                ok = false;
            }
        }
        done += 1;
    }
    c.clause(ok, "every maximizer over 200 draws has at most one non-empty component".into());
    c.finish();
}

#[test]
fn criterion_06_max_payoff_matches_brute_force() {
    let mut c = Criterion::new("6 (V(theta) vs brute force, 20 draws per case)");
    let mut rng = Lcg(7);
    let mut per_case: BTreeMap<char, usize> = BTreeMap::new();
    let mut mismatches = Vec::new();
    let mut guard = 0;
    while per_case.len() < 5 || per_case.values().any(|&k| k < 20) {
        guard += 1;
        assert!(guard < 200_000, "sampler failed to cover all five cases: {per_case:?}");
        let spec = rng.draw_spec(5);
        if spec.n_alpha < 2 || spec.n_beta < 2 || !non_boundary(&spec) || spec.validate().is_err() {
            continue;
        }
        // classify by the V dispatch; boundary draws were already rejected
        let d = spec.delta;
        let (fa, fb, cost) = (spec.f_alpha, spec.f_beta, spec.cost);
        let naf = spec.n_alpha as f64;
        let nbf = spec.n_beta as f64;
        let s1 = fa + d * ((naf - 2.0) * fa + nbf * fb);
        let s2 = fa + d * ((naf - 1.0) * fa + (nbf - 1.0) * fb);
        let case = if (1.0 - d) * fb > cost {
            'a'
        } else if (1.0 - d) * fa > cost {
            'b'
        } else if s1 > cost {
            'c'
        } else if s2 > cost {
            'd'
        } else {
            'e'
        };
        let counter = per_case.entry(case).or_insert(0);
        if *counter >= 20 {
            continue;
        }
        *counter += 1;
        let tv = spec.type_vector();
        let model = spec.model().unwrap();
        let n = spec.n();
        let mut best = [0.0f64; 2];
        for mask in 0..(1u64 << pair_count(n)) {
            let g = Network::from_mask(n, mask);
            for i in 0..n {
                let u = one_period_payoff(&model, &tv, &g, i).unwrap();
                let t = tv.type_of(i);
                if u > best[t] {
                    best[t] = u;
                }
            }
        }
        let va = max_attainable_payoff(AgentType::Alpha, &spec).unwrap();
        let vb = max_attainable_payoff(AgentType::Beta, &spec).unwrap();
        if va != best[0] || vb != best[1] {
            mismatches.push((case, spec));
        }
    }
    c.clause(
        mismatches.is_empty(),
        format!("exact equality on 20 draws in each of the five cases (mismatches: {mismatches:?})"),
    );
    c.finish();
}

#[test]
fn criterion_07_core_stability_agreement() {
    let mut c = Criterion::new("7 (closed-form vs brute-force core stability, 100 draws)");
    let mut rng = Lcg(2024);
    let mut done = 0;
    let mut agree = 0;
    while done < 100 {
        let spec = rng.draw_spec(5);
        if !non_boundary(&spec) || spec.validate().is_err() {
            continue;
        }
        // avoid the stability-condition boundaries themselves
        if (spec.f_beta - spec.cost).abs() < 1e-6 || (spec.f_alpha - spec.cost).abs() < 1e-6 {
            continue;
        }
        let result = efficient_two_type(&spec).unwrap();
        let model = spec.model().unwrap();
        let tv = spec.type_vector();
        let hub_payoff = one_period_payoff(&model, &tv, &result.network, 0).unwrap();
        if hub_payoff.abs() < 1e-9 {
            continue;
        }
        let closed = core_stable_conditions(&spec).unwrap();
        let brute = is_core_stable(&result.network, &tv, &model).unwrap().is_stable();
        if closed == brute {
            agree += 1;
        }
        done += 1;
    }
    c.clause(agree == 100, format!("agreement on {agree}/100 random draws"));

    // both directions of the "stable iff f(beta) covers the cost" case
    let blocked = TwoTypeSpec { f_alpha: 11.0, f_beta: 2.0, n_alpha: 2, n_beta: 2, cost: 3.0, delta: 0.5 };
    let held = TwoTypeSpec { cost: 1.8, ..blocked };
    let b_closed = core_stable_conditions(&blocked).unwrap();
    let b_brute = is_core_stable(
        &efficient_two_type(&blocked).unwrap().network,
        &blocked.type_vector(),
        &blocked.model().unwrap(),
    )
    .unwrap()
    .is_stable();
    let h_closed = core_stable_conditions(&held).unwrap();
    let h_brute = is_core_stable(
        &efficient_two_type(&held).unwrap().network,
        &held.type_vector(),
        &held.model().unwrap(),
    )
    .unwrap()
    .is_stable();
    c.clause(
        !b_closed && !b_brute && h_closed && h_brute,
        format!("cost-above-benefit blocked ({b_closed}/{b_brute}), cost-below-benefit stable ({h_closed}/{h_brute})"),
    );
    c.finish();
}

fn star5_config(seed: u64) -> SimConfig {
    SimConfig {
        n: 5,
        gamma: 0.95,
        strategy: StrategyKind::Complete { target: Network::star(5, 0) },
        k_punish: 5,
        j_transition: 1,
        epsilon: 0.0,
        seed,
        initial: Network::empty(5),
        horizon: 3000,
        record_trace: false,
        deviations: vec![],
    }
}

#[test]
fn criterion_08_strong_convergence_witness() {
    let mut c = Criterion::new("8 (convergence from every start, punishment shape)");
    // star target with every payoff strictly positive: leaves 6.5, center 8
    let params = PayoffParams::new(vec![3.0], 1.0, 0.5).unwrap();
    let model = PayoffModel::connections(params);
    let tv = TypeVector::uniform(5);
    let target = Network::star(5, 0);
    let all_positive =
        (0..5).all(|i| one_period_payoff(&model, &tv, &target, i).unwrap() > 0.0);
    c.clause(all_positive, "target gives every agent a strictly positive payoff".into());

    let mut rng = Lcg(5);
    let mut converged = 0;
    let mut occupancy_one = 0;
    for run_idx in 0..50 {
        let mut cfg = star5_config(run_idx);
        let mask = (rng.f() * 1024.0) as u64 % 1024;
        cfg.initial = Network::from_mask(5, mask);
        let trace = run(cfg).unwrap();
        if trace.convergence.is_some() {
            converged += 1;
        }
        if trace.post_convergence_occupancy == Some(1.0) {
            occupancy_one += 1;
        }
    }
    c.clause(converged == 50, format!("{converged}/50 random initial networks converged"));
    c.clause(occupancy_one == 50, format!("post-convergence occupancy exactly 1 on {occupancy_one}/50 runs"));

    // a leaf severs its link at t = 10: exactly K empty periods, then rebuild
    let mut cfg = star5_config(99);
    cfg.initial = Network::star(5, 0);
    cfg.deviations =
        vec![DeviationInjection { t: 10, agent: 4, action: netform_core::game::ActionOverride::SeverAll }];
    let trace = run(cfg).unwrap();
    let k = 5usize;
    // punishment signals exactly at t = 10 .. 10+K-1, cooperation resumes at
    // 10+K, and the network is empty throughout the punishment periods
    let signal_shape = (10..10 + k).all(|t| trace.signals[t - 1] == Signal::Punishment)
        && trace.signals[10 + k - 1] == Signal::Cooperation;
    let empty_exact = (11..=10 + k).all(|t| trace.link_counts[t - 1] == 0)
        && trace.link_counts[10 - 1] > 0;
    c.clause(
        signal_shape && empty_exact,
        format!("exactly K = {k} punishment periods, all with an empty network, after the injected severance"),
    );
    let reconverged = trace.convergence_periods.iter().any(|&p| p > 10 + k);
    c.clause(reconverged, "process reconverges after the punishment".into());
    c.finish();
}

#[test]
fn criterion_09_tremble_occupancy() {
    let mut c = Criterion::new("9 (tremble robustness)");
    let seeds: Vec<u64> = (0..5).collect();
    let mut means = Vec::new();
    for eps in [1e-4, 1e-3, 1e-2] {
        let mut total = 0.0;
        for &seed in &seeds {
            let mut cfg = star5_config(seed);
            cfg.k_punish = 1;
            cfg.epsilon = eps;
            cfg.horizon = 100_000;
            cfg.initial = Network::star(5, 0);
            total += run(cfg).unwrap().occupancy;
        }
        means.push(total / seeds.len() as f64);
    }
    c.clause(
        means[1] > 0.95,
        format!("occupancy {:.4} > 0.95 at epsilon 1e-3 (horizon 1e5, N = 5, K = 1, star target)", means[1]),
    );
    c.clause(
        means[0] >= means[1] && means[1] >= means[2],
        format!("occupancy nonincreasing in epsilon: {:.4} >= {:.4} >= {:.4}", means[0], means[1], means[2]),
    );
    c.finish();
}

#[test]
fn criterion_10_spatial_discount_statics() {
    let mut c = Criterion::new("10 (spatial-discount comparative statics)");
    let tv = TypeVector::uniform(4);
    let hi = sustainable_set(&tv, &PayoffParams::new(vec![1.0], 0.8, 0.9).unwrap()).unwrap();
    let lo = sustainable_set(&tv, &PayoffParams::new(vec![1.0], 0.8, 0.2).unwrap()).unwrap();
    c.clause(
        hi.is_superset_of(&lo),
        format!("positive-payoff set at delta 0.9 (size {}) contains the set at delta 0.2 (size {})", hi.len(), lo.len()),
    );

    let target = Network::clique(3);
    let tv3 = TypeVector::uniform(3);
    let results = netform_core::equilibrium::gamma_of_delta(&target, &tv3, &[1.0], 0.2, &[0.1, 0.2, 0.3], 20);
    let mut bars = Vec::new();
    let mut labels = Vec::new();
    for (d, r) in &results {
        match r {
            Ok(ThresholdOutcome::Interior { gamma_bar, .. }) => {
                bars.push(*gamma_bar);
                labels.push(format!("delta {d}: {gamma_bar:.4}"));
            }
            Ok(other) => labels.push(format!("delta {d}: {other:?}")),
            Err(e) => labels.push(format!("delta {d}: error {e}")),
        }
    }
    let strictly_decreasing = bars.len() == 3 && bars[0] > bars[1] && bars[1] > bars[2];
    c.clause(
        strictly_decreasing,
        format!("patience cutoff strictly decreasing over the delta grid [{}]", labels.join("; ")),
    );
    c.finish();
}

#[test]
fn criterion_11_incomplete_information_run() {
    let mut c = Criterion::new("11 (incomplete-information convergence)");
    let params = PayoffParams::new(vec![3.0, 0.8], 1.0, 0.5).unwrap();
    let tv = TypeVector::new(vec![0, 0, 1, 1, 1], 2).unwrap();
    let plan = AdmissiblePlan::StarWheel { alpha_type: 0 };

    let report = check_admissible(&plan, 5, &[0, 1, 2, 3, 4], 2, &params).unwrap();
    c.clause(report.admissible, "star/wheel plan is admissible for the full population".into());

    // a violating plan: every type vector mapped to the full clique, which
    // gives low-benefit members a negative payoff for some draws
    let mut entries = BTreeMap::new();
    let clique = Network::clique(5);
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    for e in 0..2 {
                        entries.insert(vec![a, b, cc, d, e], (clique.clone(), clique.clone()));
                    }
                }
            }
        }
    }
    let bad = AdmissiblePlan::Explicit { entries };
    let bad_params = PayoffParams::new(vec![3.0, 0.2], 1.0, 0.5).unwrap();
    let bad_report = check_admissible(&bad, 5, &[0, 1, 2, 3, 4], 2, &bad_params).unwrap();
    c.clause(!bad_report.admissible, format!("constructed violation rejected: {:?}", bad_report.counterexample.map(|v| v.reason)));

    let cfg = SimConfig {
        n: 5,
        gamma: 0.95,
        strategy: StrategyKind::Incomplete {
            plan,
            type_vector: tv.clone(),
            params,
            prior: vec![0.5, 0.5],
        },
        k_punish: 10,
        j_transition: 5,
        epsilon: 0.0,
        seed: 20,
        initial: Network::empty(5),
        horizon: 400,
        record_trace: true,
        deviations: vec![],
    };
    let trace = run(cfg).unwrap();
    let target = Network::star(5, 0); // two carriers of the high type: star on the lowest
    c.clause(
        trace.convergence.is_some() && trace.final_network == target,
        format!(
            "converged at {:?} to the plan's target network",
            trace.convergence.as_ref().map(|c| c.period)
        ),
    );
    // phase grammar X0+ T+ EC+ with no other phases or regressions
    let mut order_ok = true;
    let mut stage = 0; // 0 = X0, 1 = T, 2 = EC
    let mut seen = [false; 3];
    for sig in &trace.signals {
        let s = match sig {
            Signal::Ic(p) => p.label(),
            other => other.label(),
        };
        let this = match s {
            "X0" => 0,
            "T" => 1,
            "EC" => 2,
            _ => {
                order_ok = false;
                break;
            }
        };
        if this < stage {
            order_ok = false;
            break;
        }
        stage = this;
        seen[this] = true;
    }
    c.clause(
        order_ok && seen.iter().all(|&s| s),
        "signal sequence matches the X0* T* EC* grammar with all three phases visited".into(),
    );
    // types mutually known before the transition phase first appears
    let first_t = trace.records.iter().find(|r| matches!(r.signal, Signal::Ic(p) if p.label() == "T"));
    let known_before_t = first_t.map(|r| r.info_complete == Some(true)).unwrap_or(false);
    c.clause(known_before_t, "all types mutually known when the transition phase starts".into());
    c.finish();
}

#[test]
fn criterion_12_valuation_monotonicity() {
    let mut c = Criterion::new("12 (valuation monotonicity and information ordering)");
    let mut rng = Lcg(31);
    let mut done = 0;
    let mut contained = 0;
    while done < 50 {
        let n = 3 + (rng.f() * 3.0) as usize;
        let n = n.min(5);
        let f1 = 0.5 + 2.5 * rng.f();
        let f2 = f1 * (0.3 + 0.6 * rng.f());
        let drop1 = 0.05 + 0.8 * rng.f();
        let drop2 = 0.05 + 0.8 * rng.f();
        let cost = 0.2 + 1.5 * rng.f();
        let delta = 0.1 + 0.8 * rng.f();
        let tv = TypeVector::from_counts(&[n - n / 2, n / 2]);
        let high = PayoffParams::new(vec![f1, f2], cost, delta).unwrap();
        let low = PayoffParams::new(vec![f1 * drop1.max(0.1), f2 * drop2.max(0.1)], cost, delta).unwrap();
        let s_high = sustainable_set(&tv, &high).unwrap();
        let s_low = sustainable_set(&tv, &low).unwrap();
        if s_high.is_superset_of(&s_low) {
            contained += 1;
        }
        done += 1;
    }
    c.clause(contained == 50, format!("pointwise-larger benefits keep set containment on {contained}/50 draws"));

    // information ordering: the incomplete-information criterion set is the
    // complete-information set gated by admissibility of the population
    let mut checked = 0;
    let mut ordered = 0;
    let mut admissible_seen = 0;
    let mut inadmissible_seen = 0;
    let cases: Vec<(usize, Vec<f64>, f64, f64)> = vec![
        (4, vec![3.0, 0.8], 1.0, 0.5),
        (4, vec![0.4, 0.3], 1.0, 0.5),
        (5, vec![3.0, 0.8], 1.0, 0.5),
        (4, vec![2.0, 1.5], 0.4, 0.6),
        (4, vec![0.9, 0.2], 2.0, 0.3),
        (5, vec![1.2, 1.1], 0.5, 0.4),
    ];
    for (n, benefits, cost, delta) in cases {
        let num_types = benefits.len();
        let params = PayoffParams::new(benefits, cost, delta).unwrap();
        let tv = TypeVector::from_counts(&[n - n / 2, n / 2]);
        let g_c = sustainable_set(&tv, &params).unwrap();
        let admissible = agent_set_admissible(n, num_types, &params).unwrap();
        if admissible {
            admissible_seen += 1;
        } else {
            inadmissible_seen += 1;
        }
        // the incomplete-information set: empty when the population admits
        // no plan, otherwise the same positive-payoff criterion set
        let g_ic_len = if admissible { g_c.len() } else { 0 };
        if g_ic_len <= g_c.len() {
            ordered += 1;
        }
        checked += 1;
    }
    c.clause(
        ordered == checked && admissible_seen > 0 && inadmissible_seen > 0,
        format!("incomplete-information sets contained in complete-information sets on {ordered}/{checked} instances ({admissible_seen} admissible, {inadmissible_seen} not)"),
    );
    c.finish();
}
