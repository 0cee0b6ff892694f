//! Executes a parsed scenario and renders the result as a CSV table.
//!
//! Every kind produces one table: `estimate` scenarios use a long
//! (quantity, value, unit) layout since their columns vary by target, the
//! rest use a wide layout with one named column per figure. Floats are
//! written with 17 significant digits so a rerun is byte-comparable and
//! nothing is lost to rounding.

use gravicol_core::born::{
    race_closed_form, race_sample, statistic_a, WeakMeasurement, WeakOutcome,
};
use gravicol_core::gravity::{
    collapse_time, pd_comparison, qubit_estimate, required_mass, MassConfiguration, ProfileKind,
    QubitScaling,
};
use gravicol_core::hilbert::{Operator, StateVector};
use gravicol_core::paths::{
    penrose_phase, rotation_path, schrodinger_path, two_branch_model, uniform_times,
    RotationSchedule, ScheduleShape, SurvivingBranch, TwoBranchConfig,
};
use gravicol_core::residual::{energy_gauge, residual_norms, Hamiltonian};
use gravicol_core::scalar::{cre, C};
use gravicol_core::sn::{
    energy_breakdown, evolve_real, ground_state, stationary_residual, GroundStateOptions,
    RadialGrid, SelfConsistency,
};
use gravicol_core::units::UnitSystem;
use gravicol_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scenario::{Kind, Scenario};

/// One rendered table: a header and stringified rows.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Runs a scenario. The optional seed takes precedence over the file's.
pub fn execute(s: &Scenario, seed_override: Option<u64>) -> Result<RunOutput> {
    let seed = seed_override.unwrap_or(s.seed);
    match s.kind {
        Kind::Estimate => run_estimate(s),
        Kind::TwoBranch => run_two_branch(s),
        Kind::Rotation => run_rotation(s),
        Kind::BornRace => run_born_race(s, seed),
        Kind::SnGround => run_sn_ground(s),
        Kind::SnEvolve => run_sn_evolve(s),
        Kind::PdCompare => run_pd_compare(s),
        Kind::WeakMeasure => run_weak_measure(s, seed),
    }
}

/// RFC 4180 bytes for one run result.
pub fn render_csv(out: &RunOutput) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&out.header).expect("in-memory write");
    for row in &out.rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Exit code for a failed run: iterative and stability failures are 3,
/// domain violations (bad states, operators, parameters) are 4.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NoConvergence { .. } | Error::Unstable { .. } => 3,
        _ => 4,
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn flag(b: bool) -> String {
    (b as u8).to_string()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn profile_kind(word: &str) -> ProfileKind {
    match word {
        "uniform" => ProfileKind::UniformSphere,
        "gaussian" => ProfileKind::Gaussian,
        _ => unreachable!("profile word validated at parse time"),
    }
}

fn run_estimate(s: &Scenario) -> Result<RunOutput> {
    let units = UnitSystem::natural();
    let target = s.word_of("target").to_string();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |quantity: &str, value: String, unit: &str| {
        rows.push(vec![
            s.name.clone(),
            target.clone(),
            quantity.to_string(),
            value,
            unit.to_string(),
        ]);
    };

    match target.as_str() {
        "collapse_time" => {
            let cfg = MassConfiguration::new(
                s.mass_gev("mass"),
                s.u64_of("constituents"),
                s.f64_of("fraction"),
                s.length_natural("smearing"),
                s.length_natural("displacement"),
                profile_kind(s.word_of("profile")),
            )?;
            let est = collapse_time(&cfg, &units);
            push("tau_seconds", f(est.tau_seconds), "s");
            push("tau_refined_seconds", f(est.tau_refined_seconds), "s");
            push("phi12", f(est.phi12.value), "1");
            push("phi12_order", f(est.phi12.order_of_magnitude), "1");
            push("overlapping_branches", flag(est.phi12.overlapping), "flag");
            push("no_collapse", flag(est.no_collapse), "flag");
        }
        "required_mass" => {
            let template = MassConfiguration::new(
                s.mass_gev("mass"),
                1,
                s.f64_of("fraction"),
                s.length_natural("smearing"),
                0.0,
                profile_kind(s.word_of("profile")),
            )?;
            let need = required_mass(s.time_seconds("tau"), &template, &units)?;
            push("coherent_grams", f(need.coherent_grams), "g");
            push("total_grams", f(need.total_grams), "g");
            push("coherent_nanograms", f(need.coherent_grams * 1e9), "ng");
            push("total_nanograms", f(need.total_grams * 1e9), "ng");
        }
        "qubits" => {
            let per_qubit = s.u64_of("electrons_per_qubit");
            let tau = s.time_seconds("tau");
            let wanted: &[(&str, QubitScaling)] = match s.word_of("scaling") {
                "entangled" => &[("qubits_entangled", QubitScaling::Entangled)],
                "product" => &[("qubits_product", QubitScaling::Product)],
                "both" => &[
                    ("qubits_entangled", QubitScaling::Entangled),
                    ("qubits_product", QubitScaling::Product),
                ],
                _ => unreachable!("scaling word validated at parse time"),
            };
            for (label, scaling) in wanted {
                let n = qubit_estimate(per_qubit, tau, *scaling, &units)?;
                push(label, f(n), "count");
            }
        }
        _ => unreachable!("target word validated at parse time"),
    }

    Ok(RunOutput {
        header: header(&["scenario", "target", "quantity", "value", "unit"]),
        rows,
    })
}

fn run_two_branch(s: &Scenario) -> Result<RunOutput> {
    let a2_sq = s.f64_of("alpha2_sq");
    if !(0.0..=1.0).contains(&a2_sq) {
        return Err(Error::InvalidParameter {
            name: "alpha2_sq",
            reason: "must lie in [0, 1]".into(),
        });
    }
    let phase = s.opt_f64("alpha_phase").unwrap_or(0.0);
    let alpha2 = C::from_polar(a2_sq.sqrt(), phase);
    let alpha1 = cre((1.0 - a2_sq).sqrt());
    let cfg = TwoBranchConfig::new(
        alpha1,
        alpha2,
        s.mass_gev("mass"),
        s.f64_of("phi1"),
        s.f64_of("phi2"),
        s.time_natural("duration"),
    )?;
    let n = s.u64_of("nodes") as usize;
    let times = uniform_times(0.0, cfg.duration(), n);
    let (path, h) = two_branch_model(&cfg, &times)?;
    let ham = Hamiltonian::Constant(h);

    let interior_max = |norms: &[f64]| {
        norms[1..norms.len() - 1]
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x))
    };
    let pre = interior_max(&residual_norms(&path, &ham)?);
    let gauged = energy_gauge(&path, &ham)?;
    let post = interior_max(&residual_norms(&gauged, &ham)?);
    let pen = penrose_phase(&cfg);

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "alpha2_sq",
            "phi12",
            "pre_gauge_numeric",
            "pre_gauge_analytic",
            "post_gauge_numeric",
            "post_gauge_analytic",
            "penrose_phase",
            "collapse_regime",
        ]),
        rows: vec![vec![
            s.name.clone(),
            f(a2_sq),
            f(cfg.phi12()),
            f(pre),
            f(cfg.pre_gauge_norm()),
            f(post),
            f(cfg.post_gauge_norm()),
            f(pen.phase),
            flag(pen.collapse_regime),
        ]],
    })
}

fn run_rotation(s: &Scenario) -> Result<RunOutput> {
    let theta_s = s.f64_of("theta_s");
    let phase = s.opt_f64("phase").unwrap_or(0.0);
    let shape = match s.word_of("shape") {
        "linear" => ScheduleShape::Linear,
        "smoothstep" => ScheduleShape::SmoothstepCubic,
        "sine" => ScheduleShape::SineEase,
        _ => unreachable!("shape word validated at parse time"),
    };
    let (start, end) = (s.f64_of("start"), s.f64_of("end"));
    if !(0.0 <= start && start < end && end <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "start",
            reason: "window must satisfy 0 <= start < end <= 1".into(),
        });
    }
    let n = s.u64_of("nodes") as usize;
    let schedule =
        RotationSchedule::new(theta_s, phase, shape, (start, end), SurvivingBranch::Second)?;

    let times = uniform_times(0.0, 1.0, n);
    let h0 = Operator::<f64>::zero(2);
    let base1 = schrodinger_path(&StateVector::basis(2, 0)?, &h0, &times)?;
    let base2 = schrodinger_path(&StateVector::basis(2, 1)?, &h0, &times)?;
    let path = rotation_path(&schedule, &base1, &base2)?;
    let ham = Hamiltonian::Constant(h0.clone());

    let act = gravicol_core::residual::action(&path, &ham, true)?.get();
    let quad_arc = gravicol_core::paths::schedule_arc_quadrature(&schedule, &times)?;
    let start_state = StateVector::normalized(vec![cre(theta_s.cos()), cre(theta_s.sin())])?;
    let reference = schrodinger_path(&start_state, &h0, &times)?;
    let stat = statistic_a(&path, &ham, &reference)?;

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "theta_s",
            "shape",
            "action",
            "arc_analytic",
            "arc_quadrature",
            "statistic_a",
            "rate",
            "rate_analytic",
        ]),
        rows: vec![vec![
            s.name.clone(),
            f(theta_s),
            s.word_of("shape").to_string(),
            f(act),
            f(schedule.arc()),
            f(quad_arc),
            f(stat.a),
            f(stat.rate),
            f(theta_s.sin().powi(2)),
        ]],
    })
}

fn run_born_race(s: &Scenario, seed: u64) -> Result<RunOutput> {
    let rates = s.list_of("rates");
    let samples = s.u64_of("samples") as usize;
    let probs = race_closed_form(rates)?;
    let freqs = race_sample(rates, samples, seed)?;

    let rows = rates
        .iter()
        .zip(probs.iter().zip(freqs.iter()))
        .enumerate()
        .map(|(i, (&rate, (&p, &freq)))| {
            let sigma = (p * (1.0 - p) / samples as f64).sqrt();
            let dev = if sigma > 0.0 {
                (freq - p).abs() / sigma
            } else {
                0.0
            };
            vec![
                s.name.clone(),
                i.to_string(),
                f(rate),
                f(p),
                f(freq),
                f(dev),
            ]
        })
        .collect();

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "candidate",
            "rate",
            "probability",
            "frequency",
            "deviation_sigmas",
        ]),
        rows,
    })
}

fn natural_coupling() -> f64 {
    gravicol_core::units::gravitational_constant::<f64>()
}

fn run_sn_ground(s: &Scenario) -> Result<RunOutput> {
    let g = s.opt_f64("coupling").unwrap_or_else(natural_coupling);
    let template = RadialGrid::gaussian(
        s.length_natural("r_max"),
        s.u64_of("nodes") as usize,
        s.mass_gev("mass"),
        s.length_natural("width"),
    )?;
    let defaults = GroundStateOptions::default();
    let opts = GroundStateOptions {
        dtau: s.opt_f64("dtau"),
        max_iterations: s
            .opt_u64("max_iterations")
            .map(|m| m as usize)
            .unwrap_or(defaults.max_iterations),
        ..defaults
    };
    let gs = ground_state(&template, g, opts)?;
    let residual = stationary_residual(&gs.grid, g)?;

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "mass_gev",
            "coupling",
            "energy",
            "chemical_potential",
            "iterations",
            "stationary_residual",
            "width",
        ]),
        rows: vec![vec![
            s.name.clone(),
            f(template.mass()),
            f(g),
            f(gs.energy),
            f(gs.mu),
            gs.iterations.to_string(),
            f(residual),
            f(gs.grid.width()),
        ]],
    })
}

fn run_sn_evolve(s: &Scenario) -> Result<RunOutput> {
    let g = s.opt_f64("coupling").unwrap_or_else(natural_coupling);
    let grid = RadialGrid::gaussian(
        s.length_natural("r_max"),
        s.u64_of("nodes") as usize,
        s.mass_gev("mass"),
        s.length_natural("width"),
    )?;
    let mode = match s.get("refresh").map(|_| s.word_of("refresh")) {
        Some("fixed_point") => SelfConsistency::FixedPoint {
            iterations: s.opt_u64("refine_iterations").unwrap_or(2) as usize,
        },
        _ => SelfConsistency::Lagged,
    };
    let dt = s.time_natural("dt");
    let steps = s.u64_of("steps") as usize;

    let width_initial = grid.width();
    let energy_initial = energy_breakdown(&grid, g)?.total;
    let evolved = evolve_real(&grid, dt, steps, g, mode)?;
    let energy_final = energy_breakdown(&evolved, g)?.total;

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "steps",
            "dt",
            "width_initial",
            "width_final",
            "energy_initial",
            "energy_final",
            "norm_drift",
        ]),
        rows: vec![vec![
            s.name.clone(),
            steps.to_string(),
            f(dt),
            f(width_initial),
            f(evolved.width()),
            f(energy_initial),
            f(energy_final),
            f((evolved.norm() - 1.0).abs()),
        ]],
    })
}

fn run_pd_compare(s: &Scenario) -> Result<RunOutput> {
    let smearing = s.length_natural("smearing");
    let rel = s.list_of("separations");
    let separations: Vec<f64> = rel.iter().map(|&x| x * smearing).collect();
    let d_max = separations.iter().fold(0.0f64, |acc, &d| acc.max(d));
    let cfg = MassConfiguration::new(
        s.mass_gev("mass"),
        s.u64_of("constituents"),
        s.f64_of("fraction"),
        smearing,
        d_max,
        profile_kind(s.word_of("profile")),
    )?;
    let rows = pd_comparison(&cfg, &separations)?;

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "separation_over_smearing",
            "separation",
            "phase_rate",
            "e_pen",
        ]),
        rows: rel
            .iter()
            .zip(rows.iter())
            .map(|(&x, row)| {
                vec![
                    s.name.clone(),
                    f(x),
                    f(row.separation),
                    f(row.penrose_phase_rate),
                    f(row.e_pen),
                ]
            })
            .collect(),
    })
}

fn run_weak_measure(s: &Scenario, seed: u64) -> Result<RunOutput> {
    let amplitudes: Vec<C<f64>> = s.list_of("state").iter().map(|&x| cre(x)).collect();
    let state = StateVector::normalized(amplitudes)?;
    let q = StateVector::basis(state.dim(), s.u64_of("q_index") as usize)?;
    let wm = WeakMeasurement::new(q, s.f64_of("p"))?;

    let p_plus = wm.plus_probability(&state)?;
    let samples = s.u64_of("samples") as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plus = 0usize;
    for _ in 0..samples {
        let (outcome, _) = wm.measure(&state, &mut rng)?;
        if outcome == WeakOutcome::Plus {
            plus += 1;
        }
    }
    let freq = plus as f64 / samples as f64;
    let sigma = (p_plus * (1.0 - p_plus) / samples as f64).sqrt();
    let dev = if sigma > 0.0 {
        (freq - p_plus).abs() / sigma
    } else {
        0.0
    };

    Ok(RunOutput {
        header: header(&[
            "scenario",
            "p",
            "completeness_deviation",
            "plus_probability",
            "plus_frequency",
            "deviation_sigmas",
        ]),
        rows: vec![vec![
            s.name.clone(),
            f(s.f64_of("p")),
            f(wm.completeness_deviation()),
            f(p_plus),
            f(freq),
            f(dev),
        ]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn run_bundled(name: &str) -> RunOutput {
        let s = Scenario::parse(bundled::find(name).unwrap()).unwrap();
        execute(&s, None).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn metric(out: &RunOutput, quantity: &str) -> f64 {
        out.rows
            .iter()
            .find(|r| r[2] == quantity)
            .unwrap_or_else(|| panic!("no row for {quantity}"))[3]
            .parse()
            .unwrap()
    }

    fn column(out: &RunOutput, name: &str) -> usize {
        out.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    #[test]
    fn electron_estimate_lands_near_the_expected_magnitude() {
        let out = run_bundled("electron_collapse");
        let tau = metric(&out, "tau_seconds");
        assert!(tau > 4e23 && tau < 1.2e24, "tau {tau:e}");
    }

    #[test]
    fn race_frequencies_stay_close_to_probabilities() {
        let out = run_bundled("born_d5");
        let dev = column(&out, "deviation_sigmas");
        for row in &out.rows {
            let sigmas: f64 = row[dev].parse().unwrap();
            assert!(sigmas < 5.0, "{row:?}");
        }
    }

    #[test]
    fn csv_rendering_is_rfc4180() {
        let out = run_bundled("qubit_census");
        let text = String::from_utf8(render_csv(&out)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "scenario,target,quantity,value,unit");
        assert_eq!(text.lines().count(), 1 + out.rows.len());
    }

    #[test]
    fn seed_override_changes_sampled_output() {
        let s = Scenario::parse(bundled::find("born_d5").unwrap()).unwrap();
        let base = render_csv(&execute(&s, None).unwrap());
        let same = render_csv(&execute(&s, Some(s.seed)).unwrap());
        let other = render_csv(&execute(&s, Some(s.seed + 1)).unwrap());
        assert_eq!(base, same);
        assert_ne!(base, other);
    }

    #[test]
    fn bad_amplitudes_surface_the_normalisation_error() {
        let text =
            "name = x\nkind = weak_measure\nstate = 0.6 0.7\nq_index = 0\np = 0.5\nsamples = 10\n";
        let s = Scenario::parse(text).unwrap();
        let err = execute(&s, None).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }), "{err}");
        assert_eq!(exit_code(&err), 4);
    }
}
