//! Built-in acceptance checks.
//!
//! Each criterion pits the library against something it cannot cheat on:
//! a closed form, a brute-force recomputation in the full space, or an
//! independent Monte Carlo oracle. A criterion reports one line with the
//! measured numbers and the budget it had to meet.

use std::time::Instant;

use gravicol_core::born::{
    race_closed_form, race_sample, statistic_a, statistic_a_between, WeakMeasurement, WeakOutcome,
};
use gravicol_core::gravity::{
    pd_comparison, penrose_self_energy, penrose_self_energy_gradient_form, MassConfiguration,
    MassLump, MassProfile, ProfileKind,
};
use gravicol_core::hilbert::{inner, tensor, Operator, StateVector};
use gravicol_core::paths::two_branch_model;
use gravicol_core::paths::{
    rotation_path, schrodinger_path, uniform_times, RotationSchedule, ScheduleShape,
    SurvivingBranch, TwoBranchConfig,
};
use gravicol_core::residual::{
    action, compose_separable, energy_gauge, interacting_residual, residual_at, residual_norms,
    EvolutionPath, Hamiltonian,
};
use gravicol_core::scalar::{cre, C};
use gravicol_core::sn::{
    evolve_real, ground_state, stationary_residual, GroundStateOptions, RadialGrid, SelfConsistency,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundled;
use crate::runner::{execute, render_csv, RunOutput};
use crate::scenario::Scenario;

/// Outcome of one criterion: its number, a short label, whether every
/// check inside it held, and the measured-versus-budget figures.
#[derive(Debug, Clone)]
pub struct Report {
    pub id: u8,
    pub label: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub const CRITERIA: [(u8, &str); 13] = [
    (1, "collapse time estimates"),
    (2, "required coherent mass"),
    (3, "qubit census"),
    (4, "two-branch residual closed forms"),
    (5, "interacting residual decomposition"),
    (6, "rotation action equals arc"),
    (7, "rotation statistic and branch rates"),
    (8, "race statistics"),
    (9, "weak measurement"),
    (10, "displaced self-energy oracle"),
    (11, "radial solver"),
    (12, "asymptotic behaviour"),
    (13, "scenario determinism"),
];

fn label_of(id: u8) -> &'static str {
    CRITERIA
        .iter()
        .find(|(n, _)| *n == id)
        .map(|(_, l)| *l)
        .expect("known criterion id")
}

pub fn run_criterion(id: u8) -> Report {
    match id {
        1 => c01_collapse_times(),
        2 => c02_required_mass(),
        3 => c03_qubit_census(),
        4 => c04_two_branch_residual(),
        5 => c05_interacting_residual(),
        6 => c06_rotation_action(),
        7 => c07_rotation_statistic(),
        8 => c08_race_statistics(),
        9 => c09_weak_measurement(),
        10 => c10_self_energy_oracle(),
        11 => c11_radial_solver(),
        12 => c12_asymptotics(),
        13 => c13_determinism(),
        _ => unreachable!("criterion ids run 1..=13"),
    }
}

pub fn suite_ids(name: &str) -> Option<&'static [u8]> {
    const RESIDUAL: &[u8] = &[4, 5, 6];
    const BORN: &[u8] = &[7, 8, 9];
    const GRAVITY: &[u8] = &[1, 2, 3, 10, 12];
    const SN: &[u8] = &[11];
    const ALL: &[u8] = &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];
    match name {
        "residual" => Some(RESIDUAL),
        "born" => Some(BORN),
        "gravity" => Some(GRAVITY),
        "sn" => Some(SN),
        "all" => Some(ALL),
        _ => None,
    }
}

pub fn run_suite(name: &str) -> Option<Vec<Report>> {
    suite_ids(name).map(|ids| ids.iter().map(|&id| run_criterion(id)).collect())
}

/// Test hook proving the checks can fail: when GRAVICOL_VERIFY_PERTURB is
/// set, the measured rates in criterion 7 are multiplied by 1.001, which
/// must trip the 1e-6 budget.
#[doc(hidden)]
pub fn perturbation_factor() -> f64 {
    if std::env::var_os("GRAVICOL_VERIFY_PERTURB").is_some() {
        1.001
    } else {
        1.0
    }
}

/// Accumulates named pass/fail entries and folds them into a Report.
struct Checks {
    entries: Vec<(bool, String)>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            entries: Vec::new(),
        }
    }

    fn note(&mut self, ok: bool, text: String) {
        self.entries.push((ok, text));
    }

    fn le(&mut self, what: &str, measured: f64, budget: f64) {
        let ok = measured.is_finite() && measured <= budget;
        self.note(ok, format!("{what} {measured:.3e} (budget {budget:.1e})"));
    }

    fn within_factor(&mut self, what: &str, value: f64, target: f64, factor: f64) {
        let ratio = value / target;
        let ok = ratio.is_finite() && ratio >= 1.0 / factor && ratio <= factor;
        self.note(
            ok,
            format!("{what} {value:.3e} vs {target:.1e} (x{ratio:.3}, budget x{factor})"),
        );
    }

    fn within_decade(&mut self, what: &str, value: f64, target: f64) {
        let dex = (value / target).log10();
        let ok = dex.is_finite() && dex.abs() <= 1.0;
        self.note(
            ok,
            format!("{what} {value:.3e} vs {target:.1e} ({dex:+.2} dex, budget 1)"),
        );
    }

    fn holds(&mut self, what: &str, ok: bool) {
        self.note(
            ok,
            format!("{what} {}", if ok { "holds" } else { "violated" }),
        );
    }

    fn finish(self, id: u8) -> Report {
        let pass = self.entries.iter().all(|(ok, _)| *ok);
        let detail = self
            .entries
            .into_iter()
            .map(|(_, text)| text)
            .collect::<Vec<_>>()
            .join("; ");
        Report {
            id,
            label: label_of(id),
            pass,
            detail,
        }
    }
}

fn bundled_output(name: &str) -> RunOutput {
    let text = bundled::find(name).expect("bundled name");
    let s = Scenario::parse(text).expect("bundled scenario parses");
    execute(&s, None).unwrap_or_else(|e| panic!("bundled scenario {name}: {e}"))
}

/// Value of one quantity row in an estimate scenario's long table.
fn bundled_metric(name: &str, quantity: &str) -> f64 {
    let out = bundled_output(name);
    out.rows
        .iter()
        .find(|r| r[2] == quantity)
        .unwrap_or_else(|| panic!("{name} has no {quantity} row"))[3]
        .parse()
        .expect("numeric cell")
}

fn c01_collapse_times() -> Report {
    let start = Instant::now();
    let tau_electron = bundled_metric("electron_collapse", "tau_seconds");
    let tau_nucleus = bundled_metric("nucleus_collapse", "tau_seconds");
    let mut c = Checks::new();
    c.within_factor("electron_tau_s", tau_electron, 7e23, 1.5);
    c.within_decade("nucleus_tau_s", tau_nucleus, 1e8);
    c.le("runtime_s", start.elapsed().as_secs_f64(), 1.0);
    c.finish(1)
}

fn c02_required_mass() -> Report {
    let start = Instant::now();
    let coherent = bundled_metric("nanogram_oscillator", "coherent_grams");
    let total = bundled_metric("nanogram_oscillator_fraction", "total_grams");
    let mut c = Checks::new();
    c.within_factor("coherent_grams", coherent, 0.2e-9, 3.0);
    c.within_factor("fraction_total_grams", total, 1e-9, 3.0);
    c.le("runtime_s", start.elapsed().as_secs_f64(), 1.0);
    c.finish(2)
}

fn c03_qubit_census() -> Report {
    let entangled = bundled_metric("qubit_census", "qubits_entangled");
    let product = bundled_metric("qubit_census", "qubits_product");
    let mut c = Checks::new();
    c.within_decade("qubits_entangled", entangled, 1e17);
    c.within_decade("qubits_product", product, 1e35);
    c.finish(3)
}

fn c04_two_branch_residual() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let n = 2001usize;
    let duration = 10.0;
    let times = uniform_times(0.0, duration, n);
    let probes = [n / 4, n / 2, 3 * n / 4];

    let mut worst_pre = 0.0f64;
    let mut worst_post = 0.0f64;
    for _ in 0..50 {
        let a2_sq = 0.05 + 0.90 * rng.random::<f64>();
        let alpha2 = C::from_polar(a2_sq.sqrt(), std::f64::consts::TAU * rng.random::<f64>());
        let alpha1 = cre((1.0 - a2_sq).sqrt());
        let mass = 0.5 + rng.random::<f64>();
        let phi1 = -1e-3 * rng.random::<f64>();
        let phi2 = -1e-3 * rng.random::<f64>();
        let cfg = TwoBranchConfig::new(alpha1, alpha2, mass, phi1, phi2, duration)
            .expect("normalised weights");
        let (path, h) = two_branch_model(&cfg, &times).expect("model");
        let ham = Hamiltonian::Constant(h);
        for &k in &probes {
            let dev =
                (residual_at(&path, &ham, k).expect("sample").norm() - cfg.pre_gauge_norm()).abs();
            worst_pre = worst_pre.max(dev);
        }
        let gauged = energy_gauge(&path, &ham).expect("gauge");
        for &k in &probes {
            let dev = (residual_at(&gauged, &ham, k).expect("sample").norm()
                - cfg.post_gauge_norm())
            .abs();
            worst_post = worst_post.max(dev);
        }
    }

    // degenerate configurations where the cross terms vanish identically:
    // a single populated branch, and two branches with no potential at all
    let mut worst_vanishing = 0.0f64;
    let vanishing = [
        TwoBranchConfig::new(cre(1.0), cre(0.0), 1.0, -2e-3, -5e-4, duration),
        TwoBranchConfig::new(cre(0.6), cre(0.8), 1.0, 0.0, 0.0, duration),
    ];
    for cfg in vanishing {
        let cfg = cfg.expect("valid degenerate configuration");
        let (path, h) = two_branch_model(&cfg, &times).expect("model");
        let ham = Hamiltonian::Constant(h);
        let norms = residual_norms(&path, &ham).expect("norms");
        for &x in &norms[1..n - 1] {
            worst_vanishing = worst_vanishing.max(x);
        }
    }

    let mut c = Checks::new();
    c.le("pre_gauge_dev", worst_pre, 1e-8);
    c.le("post_gauge_dev", worst_post, 1e-6);
    c.le("vanishing_residual", worst_vanishing, 1e-12);
    c.finish(4)
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Operator<f64> {
    let mut entries = vec![cre(0.0); dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = cre((rng.random::<f64>() - 0.5) * scale);
        for j in (i + 1)..dim {
            let z = C::new(
                (rng.random::<f64>() - 0.5) * scale,
                (rng.random::<f64>() - 0.5) * scale,
            );
            entries[i * dim + j] = z;
            entries[j * dim + i] = z.conj();
        }
    }
    Operator::hermitian(dim, entries).expect("hermitian by construction")
}

fn smooth_path(rng: &mut ChaCha8Rng, dim: usize, times: &[f64]) -> EvolutionPath<f64> {
    let freqs: Vec<f64> = (0..dim)
        .map(|_| (rng.random::<f64>() - 0.5) * 0.6)
        .collect();
    let phases: Vec<f64> = (0..dim)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    let weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 0.2).collect();
    EvolutionPath::from_fn(times.to_vec(), |t| {
        let amps: Vec<C<f64>> = (0..dim)
            .map(|k| C::from_polar(weights[k], freqs[k] * t + phases[k]))
            .collect();
        StateVector::unit(amps).expect("nonzero amplitudes")
    })
    .expect("monotone grid")
}

fn c05_interacting_residual() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let times = uniform_times(0.0, 0.5, 2001);
    let probes = [400usize, 1000, 1600];

    let mut worst = 0.0f64;
    for case in 0..200 {
        let (da, db) = if case % 2 == 0 { (2, 2) } else { (3, 2) };
        let h_a = random_hermitian(&mut rng, da, 0.3);
        let h_b = random_hermitian(&mut rng, db, 0.3);
        let h_int = random_hermitian(&mut rng, da * db, 0.3);
        let a_path = smooth_path(&mut rng, da, &times);
        let b_path = smooth_path(&mut rng, db, &times);

        let full_h = Hamiltonian::Constant(
            h_a.kron(&Operator::identity(db))
                .add(&Operator::identity(da).kron(&h_b))
                .expect("same dimension")
                .add(&h_int)
                .expect("same dimension"),
        );
        let full_states: Vec<StateVector<f64>> = (0..times.len())
            .map(|k| tensor(a_path.state(k), b_path.state(k)))
            .collect();
        let full_path = EvolutionPath::new(times.clone(), full_states).expect("grid");

        for &node in &probes {
            let dec = interacting_residual(&a_path, &b_path, &h_a, &h_b, &h_int, node)
                .expect("decomposition");
            let full = residual_at(&full_path, &full_h, node).expect("sample");
            let dev = (dec.norm_sqr() - full.perp_norm() * full.perp_norm()).abs();
            worst = worst.max(dev);
        }
    }

    // without coupling the joint norm is the exact root sum of squares
    let mut worst_pythagoras = 0.0f64;
    {
        let h_a = random_hermitian(&mut rng, 2, 0.4);
        let h_b = random_hermitian(&mut rng, 3, 0.4);
        let h_int = Operator::zero(6);
        let a_path = smooth_path(&mut rng, 2, &times);
        let b_path = smooth_path(&mut rng, 3, &times);
        for &node in &probes {
            let dec = interacting_residual(&a_path, &b_path, &h_a, &h_b, &h_int, node)
                .expect("decomposition");
            let composed =
                compose_separable(&[dec.subsystem_a, dec.subsystem_b]).expect("nonnegative norms");
            worst_pythagoras = worst_pythagoras.max((dec.norm() - composed).abs());
        }
    }

    let mut worst_root_n = 0.0f64;
    for m in [1usize, 4, 9, 16] {
        let composed = compose_separable(&vec![0.7; m]).expect("nonnegative norms");
        worst_root_n = worst_root_n.max((composed - (m as f64).sqrt() * 0.7).abs());
    }

    let mut c = Checks::new();
    c.le("decomposition_vs_bruteforce", worst, 1e-8);
    c.le("uncoupled_pythagoras_dev", worst_pythagoras, 0.0);
    c.le("equal_norm_root_n_dev", worst_root_n, 1e-12);
    c.finish(5)
}

fn c06_rotation_action() -> Report {
    let n = 4001usize;
    let times = uniform_times(0.0, 1.0, n);
    let h0 = Operator::<f64>::zero(2);
    let ham = Hamiltonian::Constant(h0.clone());
    let base1 = schrodinger_path(&StateVector::basis(2, 0).unwrap(), &h0, &times).unwrap();
    let base2 = schrodinger_path(&StateVector::basis(2, 1).unwrap(), &h0, &times).unwrap();
    let window = (0.1, 0.9);
    // node indices of the window edges; the stencil straddling the
    // constant-rate shape's kink there is only first order
    let edge0 = (window.0 * (n - 1) as f64).round() as usize;
    let edge1 = (window.1 * (n - 1) as f64).round() as usize;

    let shapes = [
        ScheduleShape::Linear,
        ScheduleShape::SmoothstepCubic,
        ScheduleShape::SineEase,
    ];
    let thetas: Vec<f64> = (1..=5)
        .map(|k| k as f64 * std::f64::consts::PI / 12.0)
        .collect();

    let mut worst_action = 0.0f64;
    let mut worst_rate_node = 0.0f64;
    for shape in shapes {
        for &theta_s in &thetas {
            let schedule =
                RotationSchedule::new(theta_s, 0.0, shape, window, SurvivingBranch::Second)
                    .expect("valid schedule");
            // real amplitudes under a zero Hamiltonian: the path is
            // already in the energy gauge
            let path = rotation_path(&schedule, &base1, &base2).expect("rotation path");
            let act = action(&path, &ham, false).expect("action").get();
            worst_action = worst_action.max((act - (std::f64::consts::FRAC_PI_2 - theta_s)).abs());

            let norms = residual_norms(&path, &ham).expect("norms");
            for (k, &norm) in norms.iter().enumerate().take(n - 1).skip(1) {
                if k.abs_diff(edge0) <= 1 || k.abs_diff(edge1) <= 1 {
                    continue;
                }
                let dev = (norm - schedule.theta_dot(times[k]).abs()).abs();
                worst_rate_node = worst_rate_node.max(dev);
            }
        }
    }

    let mut c = Checks::new();
    c.le("action_vs_arc", worst_action, 1e-6);
    c.le("node_rate_vs_schedule", worst_rate_node, 1e-5);
    c.finish(6)
}

/// Rotation path plus its matching statistic reference over a full-range
/// linear window.
fn rotation_with_reference(
    theta_s: f64,
    n: usize,
) -> (EvolutionPath<f64>, EvolutionPath<f64>, Hamiltonian<f64>) {
    let times = uniform_times(0.0, 1.0, n);
    let h0 = Operator::<f64>::zero(2);
    let base1 = schrodinger_path(&StateVector::basis(2, 0).unwrap(), &h0, &times).unwrap();
    let base2 = schrodinger_path(&StateVector::basis(2, 1).unwrap(), &h0, &times).unwrap();
    let schedule = RotationSchedule::new(
        theta_s,
        0.0,
        ScheduleShape::Linear,
        (0.0, 1.0),
        SurvivingBranch::Second,
    )
    .expect("valid schedule");
    let path = rotation_path(&schedule, &base1, &base2).expect("rotation path");
    let start =
        StateVector::normalized(vec![cre(theta_s.cos()), cre(theta_s.sin())]).expect("unit state");
    let reference = schrodinger_path(&start, &h0, &times).expect("reference");
    (path, reference, Hamiltonian::Constant(h0))
}

fn c07_rotation_statistic() -> Report {
    let n = 2001usize;
    let factor = perturbation_factor();

    let mut worst_a = 0.0f64;
    let mut worst_rate = 0.0f64;
    let mut failed_row: Option<(f64, f64)> = None;
    for k in 1..=9 {
        let a2_sq = k as f64 / 10.0;
        let theta_s = a2_sq.sqrt().asin();
        let (path, reference, ham) = rotation_with_reference(theta_s, n);
        let stat = statistic_a(&path, &ham, &reference).expect("statistic");
        worst_a = worst_a.max((stat.a - (-a2_sq.sqrt().ln())).abs());
        let rate_dev = (stat.rate * factor - a2_sq).abs();
        worst_rate = worst_rate.max(rate_dev);
        if rate_dev > 1e-6 && failed_row.is_none() {
            failed_row = Some((a2_sq, rate_dev));
        }
    }

    let mut c = Checks::new();
    c.le("statistic_vs_neg_log_overlap", worst_a, 1e-6);
    match failed_row {
        None => c.le("rate_vs_branch_weight", worst_rate, 1e-6),
        Some((a2_sq, dev)) => c.note(
            false,
            format!("rate at alpha2_sq {a2_sq:.1} off by {dev:.3e} (budget 1.0e-6)"),
        ),
    }
    c.finish(7)
}

fn c08_race_statistics() -> Report {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);

    let mut worst_closed = 0.0f64;
    let mut min_seed_fraction = 1.0f64;
    for &d in &[2usize, 3, 5, 8] {
        for _ in 0..5 {
            let mut weights: Vec<f64> = (0..d).map(|_| 0.05 + rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let probs = race_closed_form(&weights).expect("rates valid");
            for (p, w) in probs.iter().zip(weights.iter()) {
                worst_closed = worst_closed.max((p - w).abs());
            }
        }

        let mut weights: Vec<f64> = (0..d).map(|_| 0.05 + rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let probs = race_closed_form(&weights).expect("rates valid");
        let n_samples = 1_000_000usize;
        let mut ok_seeds = 0usize;
        for seed in 0..20u64 {
            let freqs = race_sample(&weights, n_samples, 9000 + seed).expect("sampling");
            let all_close = freqs.iter().zip(probs.iter()).all(|(f, p)| {
                let sigma = (p * (1.0 - p) / n_samples as f64).sqrt();
                (f - p).abs() <= 4.0 * sigma
            });
            ok_seeds += all_close as usize;
        }
        min_seed_fraction = min_seed_fraction.min(ok_seeds as f64 / 20.0);
    }

    // a rate over consecutive path segments multiplies to the whole
    let n = 1601usize;
    let (path, reference, ham) = rotation_with_reference(0.9, n);
    let total_rate = statistic_a(&path, &ham, &reference)
        .expect("statistic")
        .rate;
    let mut worst_split = 0.0f64;
    for &mid in &[400usize, 800, 1200] {
        let first = statistic_a_between(&path, &ham, &reference, 0, mid)
            .expect("segment")
            .rate;
        let second = statistic_a_between(&path, &ham, &reference, mid, n - 1)
            .expect("segment")
            .rate;
        worst_split = worst_split.max((first * second - total_rate).abs());
    }

    let mut c = Checks::new();
    c.le("closed_form_dev", worst_closed, 1e-12);
    c.note(
        min_seed_fraction >= 0.95,
        format!("mc_seed_pass_fraction {min_seed_fraction:.2} (floor 0.95)"),
    );
    c.le("segment_product_dev", worst_split, 1e-10);
    c.le("runtime_s", start.elapsed().as_secs_f64(), 30.0);
    c.finish(8)
}

fn c09_weak_measurement() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(909);

    let mut worst_completeness = 0.0f64;
    for k in 0..=20 {
        let p = k as f64 / 20.0;
        let amps: Vec<C<f64>> = (0..3)
            .map(|_| {
                C::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                )
            })
            .collect();
        let q = StateVector::unit(amps).expect("nonzero");
        let wm = WeakMeasurement::new(q, p).expect("probability in range");
        worst_completeness = worst_completeness.max(wm.completeness_deviation());
    }

    // p = 1 is an ordinary projective measurement
    let q = StateVector::<f64>::basis(2, 0).unwrap();
    let psi = StateVector::normalized(vec![cre(0.6), cre(0.8)]).unwrap();
    let projective = WeakMeasurement::new(q.clone(), 1.0).expect("probability in range");
    let mut worst_projective =
        (projective.plus_probability(&psi).expect("probability") - 0.36).abs();
    let plus = projective
        .post_state(WeakOutcome::Plus, &psi)
        .expect("nonzero branch");
    let minus = projective
        .post_state(WeakOutcome::Minus, &psi)
        .expect("nonzero branch");
    let plus_fidelity = inner(&q, &plus).expect("same dimension").norm();
    let minus_overlap = inner(&q, &minus).expect("same dimension").norm();
    worst_projective = worst_projective
        .max((plus_fidelity - 1.0).abs())
        .max(minus_overlap);

    // detector rate on its own probe state is exactly p
    let p = 0.3;
    let wm = WeakMeasurement::new(q.clone(), p).expect("probability in range");
    let samples = 100_000usize;
    let mut plus_count = 0usize;
    for _ in 0..samples {
        let (outcome, _) = wm.measure(&q, &mut rng).expect("normalised state");
        plus_count += (outcome == WeakOutcome::Plus) as usize;
    }
    let freq = plus_count as f64 / samples as f64;
    let sigma = (p * (1.0 - p) / samples as f64).sqrt();

    let mut c = Checks::new();
    c.le("completeness_dev", worst_completeness, 1e-12);
    c.le("projective_limit_dev", worst_projective, 1e-12);
    c.le("frequency_dev_sigmas", (freq - p).abs() / sigma, 4.0);
    c.finish(9)
}

fn uniform_ball_point(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 3] {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        let z = 2.0 * rng.random::<f64>() - 1.0;
        if x * x + y * y + z * z <= 1.0 {
            return [x * radius, y * radius, z * radius];
        }
    }
}

/// Monte Carlo estimates of the pair weights <1/|x-y|> for two uniform
/// balls of the given radius: one ball against itself, and two balls with
/// centres a distance `d` apart.
fn mc_ball_weights(radius: f64, d: f64, pairs: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut same = 0.0f64;
    let mut cross = 0.0f64;
    for _ in 0..pairs {
        let a = uniform_ball_point(&mut rng, radius);
        let b = uniform_ball_point(&mut rng, radius);
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let dz = a[2] - b[2];
        let r_same = (dx * dx + dy * dy + dz * dz).sqrt();
        let r_cross = (dx * dx + dy * dy + (dz + d) * (dz + d)).sqrt();
        if r_same > 0.0 {
            same += 1.0 / r_same;
        }
        cross += 1.0 / r_cross;
    }
    (same / pairs as f64, cross / pairs as f64)
}

fn c10_self_energy_oracle() -> Report {
    let g = 1.0;
    let mass = 1.0;
    let radius = 1.0;
    let ball = MassLump::new(mass, MassProfile::UniformSphere { radius }).expect("valid lump");

    let coincident = penrose_self_energy(&ball, &ball, 0.0, 0.5, g)
        .expect("self energy")
        .e_pen;

    let d = 20.0 * radius;
    let quadrature = penrose_self_energy(&ball, &ball, d, 0.5, g)
        .expect("self energy")
        .e_pen;
    let (w_same, w_cross) = mc_ball_weights(radius, d, 10_000_000, 1010);
    let mc = g * mass * mass * (2.0 * w_same - 2.0 * w_cross);
    let point_asymptote =
        2.0 * g * mass * mass * ball.profile.self_weight() - 2.0 * g * mass * mass / d;

    let mut worst_gradient = 0.0f64;
    for sep in [0.8, 3.0] {
        let direct = penrose_self_energy(&ball, &ball, sep, 0.5, g)
            .expect("self energy")
            .e_pen;
        let gradient =
            penrose_self_energy_gradient_form(&ball, &ball, sep, g).expect("gradient form");
        worst_gradient = worst_gradient.max(((gradient - direct) / direct).abs());
    }

    let mut c = Checks::new();
    c.le("coincident_e_pen", coincident.abs(), 0.0);
    c.le(
        "far_field_vs_monte_carlo",
        ((quadrature - mc) / mc).abs(),
        0.01,
    );
    c.le(
        "far_field_vs_point_asymptote",
        ((quadrature - point_asymptote) / point_asymptote).abs(),
        0.01,
    );
    c.le("gradient_form_rel_dev", worst_gradient, 1e-4);
    c.finish(10)
}

fn c11_radial_solver() -> Report {
    let start = Instant::now();
    let mut c = Checks::new();

    // unitarity over a long self-gravitating run
    let grid = RadialGrid::<f64>::gaussian(25.0, 2001, 1.0, 2.0).expect("grid");
    let evolved = evolve_real(&grid, 0.01, 1000, 1.0, SelfConsistency::Lagged).expect("stable");
    c.le("norm_drift_1000_steps", (evolved.norm() - 1.0).abs(), 1e-8);

    // free packet spreading against the closed form over one spreading time
    let free = RadialGrid::<f64>::gaussian(24.0, 2001, 1.0, 1.0).expect("grid");
    let spread = evolve_real(&free, 2.5e-3, 800, 0.0, SelfConsistency::Lagged).expect("stable");
    let expected = 2.0f64.sqrt();
    c.le(
        "free_spreading_rel_dev",
        (spread.width() - expected).abs() / expected,
        0.01,
    );

    // bound state: monotone relaxation and a stationarity plug-back
    let template = RadialGrid::<f64>::gaussian(25.0, 2001, 1.0, 2.0).expect("grid");
    let gs = ground_state(&template, 1.0, GroundStateOptions::default()).expect("bound state");
    let monotone = gs
        .energy_history
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
    c.holds("energy_monotone", monotone);
    let residual = stationary_residual(&gs.grid, 1.0).expect("residual");
    c.le("stationary_residual", residual, 1e-6);

    // energy scales as the square of the coupling and the fifth power of
    // the mass when the grid is scaled along
    let (g2, m2) = (0.5f64, 1.3f64);
    let scale = 1.0 / (g2 * m2 * m2 * m2);
    let template2 = RadialGrid::gaussian(25.0 * scale, 2001, m2, 2.0 * scale).expect("grid");
    let gs2 = ground_state(&template2, g2, GroundStateOptions::default()).expect("bound state");
    let expected_ratio = g2 * g2 * m2.powi(5);
    c.le(
        "coupling_mass_scaling_rel_dev",
        (gs2.energy / gs.energy / expected_ratio - 1.0).abs(),
        1e-4,
    );

    c.le("runtime_s", start.elapsed().as_secs_f64(), 60.0);
    c.finish(11)
}

fn c12_asymptotics() -> Report {
    // the branch-phase rate stops depending on separation once the
    // profiles no longer overlap
    let cfg = MassConfiguration::<f64>::new(1.0, 1, 1.0, 1.0, 32.0, ProfileKind::UniformSphere)
        .expect("valid configuration");
    let rows = pd_comparison(&cfg, &[2.5, 4.0, 8.0, 16.0, 32.0]).expect("comparison");
    let base_rate = rows[0].penrose_phase_rate;
    let mut worst_rate_ratio = 0.0f64;
    for row in &rows {
        worst_rate_ratio = worst_rate_ratio.max((row.penrose_phase_rate / base_rate - 1.0).abs());
    }

    // the displaced self-energy approaches its plateau like 1/d: the
    // deficit halves when the separation doubles
    let ball = MassLump::new(1.0, MassProfile::UniformSphere { radius: 1.0 }).expect("lump");
    let plateau = 2.0 * ball.profile.self_weight();
    let deficit = |d: f64| {
        plateau
            - penrose_self_energy(&ball, &ball, d, 0.5, 1.0)
                .expect("self energy")
                .e_pen
    };
    let (d8, d16, d32) = (deficit(8.0), deficit(16.0), deficit(32.0));

    let mut c = Checks::new();
    c.le("rate_plateau_rel_dev", worst_rate_ratio, 1e-6);
    c.le("deficit_halving_8_16", (d8 / d16 / 2.0 - 1.0).abs(), 0.05);
    c.le("deficit_halving_16_32", (d16 / d32 / 2.0 - 1.0).abs(), 0.05);
    c.finish(12)
}

fn c13_determinism() -> Report {
    let mut failures: Vec<String> = Vec::new();
    let mut count = 0usize;
    for (name, text) in bundled::BUNDLED {
        count += 1;
        let scenario = match Scenario::parse(text) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{name} does not parse: {e}"));
                continue;
            }
        };
        let render = |_: usize| execute(&scenario, None).map(|out| render_csv(&out));
        match (render(0), render(1)) {
            (Ok(a), Ok(b)) => {
                if a != b {
                    failures.push(format!("{name} differs between reruns"));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("{name} failed: {e}")),
        }
    }

    let mut c = Checks::new();
    c.note(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{count} bundled scenarios byte-identical across reruns")
        } else {
            failures.join("; ")
        },
    );
    c.finish(13)
}
