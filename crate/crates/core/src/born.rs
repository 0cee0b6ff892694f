//! Hidden-variable statistics: the path statistic A, its rate e^{−2A},
//! the exponential race over candidate end states, and the two-outcome
//! weak-measurement instrument.

use crate::error::{Error, Result};
use crate::hilbert::{inner, Operator, StateVector};
use crate::quad;
use crate::residual::{energy_gauge, residual_at, EvolutionPath, Hamiltonian};
use crate::scalar::{cre, real, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default overlap cutoff below which the statistic integrand is treated
/// as divergent.
pub const DEFAULT_C_MIN: f64 = 1e-9;

/// Accumulated statistic of a path against a reference evolution, and the
/// rate it induces.
#[derive(Debug, Clone, Copy)]
pub struct PathStatistic<T: Real> {
    /// A = ∫ ∥R∥ √(1−C²)/C dt with C the overlap against the reference.
    pub a: T,
    /// rate = e^{−2A}; zero for divergent statistics.
    pub rate: T,
}

impl<T: Real> PathStatistic<T> {
    fn from_a(a: T) -> Self {
        PathStatistic {
            a,
            rate: (-(a + a)).exp(),
        }
    }

    /// The divergent limit: infinite statistic, rate zero.
    pub fn suppressed() -> Self {
        PathStatistic {
            a: T::infinity(),
            rate: T::zero(),
        }
    }
}

fn check_same_grid<T: Real>(a: &EvolutionPath<T>, b: &EvolutionPath<T>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
            context: "path vs reference length",
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
            context: "path vs reference dimension",
        });
    }
    let slack = real::<T>(1e-12);
    for (&ta, &tb) in a.times().iter().zip(b.times()) {
        if (ta - tb).abs() > slack * T::one().max(ta.abs()) {
            return Err(Error::invalid(
                "times",
                "path and reference must share their time grid",
            ));
        }
    }
    Ok(())
}

/// Computes the statistic over the node range [from, to] of the path.
///
/// The whole path is gauge-fixed first (the statistic presupposes the
/// energy gauge), residuals use full-path stencils, and the quadrature runs
/// over the requested segment only, so segment statistics add up exactly to
/// the full-range statistic.
pub fn statistic_a_between<T: Real>(
    path: &EvolutionPath<T>,
    hamiltonian: &Hamiltonian<T>,
    reference: &EvolutionPath<T>,
    from: usize,
    to: usize,
) -> Result<PathStatistic<T>> {
    check_same_grid(path, reference)?;
    if from >= to || to >= path.len() {
        return Err(Error::invalid(
            "range",
            format!(
                "invalid node range {from}..{to} for a path of {} nodes",
                path.len()
            ),
        ));
    }
    let gauged = energy_gauge(path, hamiltonian)?;
    let c_min = real::<T>(DEFAULT_C_MIN);
    let n = to - from + 1;
    let mut times = Vec::with_capacity(n);
    let mut integrand = Vec::with_capacity(n);
    for k in from..=to {
        let overlap = inner(reference.state(k), gauged.state(k))?
            .norm()
            .min(T::one());
        if overlap <= c_min {
            return Err(Error::OrthogonalExcursion {
                overlap: overlap.to_f64().unwrap_or(f64::NAN),
                cutoff: DEFAULT_C_MIN,
            });
        }
        let r = residual_at(&gauged, hamiltonian, k)?.norm();
        let s = (T::one() - overlap * overlap).max(T::zero()).sqrt();
        times.push(gauged.times()[k]);
        integrand.push(r * s / overlap);
    }
    let a = quad::integrate_samples(&times, &integrand)?;
    Ok(PathStatistic::from_a(a))
}

/// Computes the statistic A of a path against a reference evolution over
/// the full time range, after gauge fixing. Errors with
/// `OrthogonalExcursion` if the overlap falls below the cutoff.
pub fn statistic_a<T: Real>(
    path: &EvolutionPath<T>,
    hamiltonian: &Hamiltonian<T>,
    reference: &EvolutionPath<T>,
) -> Result<PathStatistic<T>> {
    statistic_a_between(path, hamiltonian, reference, 0, path.len() - 1)
}

/// Like [`statistic_a`], but a divergent statistic becomes the rate-zero
/// suppressed value (with a log entry) instead of an error. Other errors
/// propagate.
pub fn statistic_or_suppressed<T: Real>(
    path: &EvolutionPath<T>,
    hamiltonian: &Hamiltonian<T>,
    reference: &EvolutionPath<T>,
) -> Result<PathStatistic<T>> {
    match statistic_a(path, hamiltonian, reference) {
        Ok(stat) => Ok(stat),
        Err(Error::OrthogonalExcursion { overlap, cutoff }) => {
            log::warn!(
                "path passes through overlap {overlap:e} below cutoff {cutoff:e}; \
                 assigning rate 0"
            );
            Ok(PathStatistic::suppressed())
        }
        Err(e) => Err(e),
    }
}

fn validate_rates<T: Real>(rates: &[T]) -> Result<()> {
    if rates.is_empty() {
        return Err(Error::invalid("rates", "need at least one candidate"));
    }
    let mut any_positive = false;
    for &r in rates {
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::invalid(
                "rates",
                "rates must be finite and non-negative",
            ));
        }
        if r > T::zero() {
            any_positive = true;
        }
    }
    if !any_positive {
        return Err(Error::invalid("rates", "all rates are zero"));
    }
    Ok(())
}

/// Closed-form winning probabilities of the exponential race:
/// P_I = r_I / Σ_J r_J.
pub fn race_closed_form<T: Real>(rates: &[T]) -> Result<Vec<T>> {
    validate_rates(rates)?;
    let total: T = rates.iter().copied().sum();
    Ok(rates.iter().map(|&r| r / total).collect())
}

/// One draw of the hidden-variable race: independent exponential waiting
/// values per candidate, lowest wins.
#[derive(Debug, Clone)]
pub struct HiddenVariableDraw<T: Real> {
    pub lambdas: Vec<T>,
    pub winner: usize,
    pub seed: u64,
}

fn exponential_draw<T: Real>(rng: &mut ChaCha8Rng, rate: T) -> T {
    if rate <= T::zero() {
        return T::infinity();
    }
    // inverse CDF; 1-u in (0, 1] keeps the log finite
    let u: f64 = rng.random();
    -real::<T>(1.0 - u).ln() / rate
}

fn pick_winner<T: Real>(lambdas: &[T]) -> usize {
    let mut winner = 0;
    let mut tie = false;
    for (k, &l) in lambdas.iter().enumerate().skip(1) {
        if l < lambdas[winner] {
            winner = k;
            tie = false;
        } else if l == lambdas[winner] && l.is_finite() {
            tie = true;
        }
    }
    if tie {
        log::warn!("exponential race tie; breaking toward lowest index {winner}");
    }
    winner
}

/// Runs one race with the given seed.
pub fn race_draw<T: Real>(rates: &[T], seed: u64) -> Result<HiddenVariableDraw<T>> {
    validate_rates(rates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambdas: Vec<T> = rates
        .iter()
        .map(|&r| exponential_draw(&mut rng, r))
        .collect();
    let winner = pick_winner(&lambdas);
    Ok(HiddenVariableDraw {
        lambdas,
        winner,
        seed,
    })
}

/// Empirical winning frequencies over `n_samples` independent races.
pub fn race_sample<T: Real>(rates: &[T], n_samples: usize, seed: u64) -> Result<Vec<T>> {
    validate_rates(rates)?;
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; rates.len()];
    let mut lambdas = vec![T::zero(); rates.len()];
    for _ in 0..n_samples {
        for (slot, &r) in lambdas.iter_mut().zip(rates.iter()) {
            *slot = exponential_draw(&mut rng, r);
        }
        counts[pick_winner(&lambdas)] += 1;
    }
    let total = real::<T>(n_samples as f64);
    Ok(counts
        .iter()
        .map(|&c| real::<T>(c as f64) / total)
        .collect())
}

/// Relative weight of two candidate end states and whether either is
/// effectively unobservable.
#[derive(Debug, Clone, Copy)]
pub struct SuppressionVerdict<T: Real> {
    /// P_I = r_I/(r_1 + r_2) for the two statistics.
    pub probabilities: [T; 2],
    /// Probability below 1e−12: the outcome is never observed in practice.
    pub never_observed: [bool; 2],
}

/// Compares two path statistics (possibly infinite) head to head.
pub fn suppression_check<T: Real>(a_first: T, a_second: T) -> SuppressionVerdict<T> {
    let r1 = (-(a_first + a_first)).exp();
    let r2 = (-(a_second + a_second)).exp();
    let total = r1 + r2;
    let half = real::<T>(0.5);
    let probabilities = if total > T::zero() {
        [r1 / total, r2 / total]
    } else {
        [half, half]
    };
    let floor = real::<T>(1e-12);
    SuppressionVerdict {
        probabilities,
        never_observed: [probabilities[0] < floor, probabilities[1] < floor],
    }
}

/// Outcome of one weak measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakOutcome {
    /// The detector fired: state projected onto the probed state.
    Plus,
    /// No detection: the probed component is attenuated.
    Minus,
}

/// Two-operator instrument probing |q⟩ with detection probability p:
/// M₊ = √p |q⟩⟨q| and M₋ = 1 − (1 − √(1−p)) |q⟩⟨q|.
#[derive(Debug, Clone)]
pub struct WeakMeasurement<T: Real> {
    q: StateVector<T>,
    p: T,
    m_plus: Operator<T>,
    m_minus: Operator<T>,
}

impl<T: Real> WeakMeasurement<T> {
    pub fn new(q: StateVector<T>, p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::invalid(
                "p",
                "detection probability must lie in [0, 1]",
            ));
        }
        let dev = (q.norm_sqr() - T::one()).abs();
        if dev > T::NORM_TOL {
            return Err(Error::NotNormalized {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        let dim = q.dim();
        let projector = Operator::outer(&q, &q)?;
        let m_plus = projector.scaled(cre(p.sqrt()));
        let shrink = T::one() - (T::one() - p).sqrt();
        let m_minus = Operator::identity(dim).sub(&projector.scaled(cre(shrink)))?;
        Ok(Self {
            q,
            p,
            m_plus,
            m_minus,
        })
    }

    pub fn probed_state(&self) -> &StateVector<T> {
        &self.q
    }

    pub fn detection_probability(&self) -> T {
        self.p
    }

    pub fn m_plus(&self) -> &Operator<T> {
        &self.m_plus
    }

    pub fn m_minus(&self) -> &Operator<T> {
        &self.m_minus
    }

    /// Max-entry deviation of M₊†M₊ + M₋†M₋ from the identity.
    pub fn completeness_deviation(&self) -> T {
        let sum = self
            .m_plus
            .adjoint()
            .matmul(&self.m_plus)
            .and_then(|a| {
                self.m_minus
                    .adjoint()
                    .matmul(&self.m_minus)
                    .and_then(|b| a.add(&b))
            })
            .expect("dimensions agree by construction");
        let eye = Operator::identity(self.q.dim());
        sum.sub(&eye)
            .expect("dimensions agree by construction")
            .entries()
            .iter()
            .map(|e| e.norm())
            .fold(T::zero(), T::max)
    }

    /// Probability of the + outcome on the given state: ∥M₊|ψ⟩∥².
    pub fn plus_probability(&self, state: &StateVector<T>) -> Result<T> {
        Ok(self.m_plus.apply(state)?.norm_sqr())
    }

    /// Deterministic post-measurement state for a chosen outcome.
    pub fn post_state(
        &self,
        outcome: WeakOutcome,
        state: &StateVector<T>,
    ) -> Result<StateVector<T>> {
        let raw = match outcome {
            WeakOutcome::Plus => self.m_plus.apply(state)?,
            WeakOutcome::Minus => self.m_minus.apply(state)?,
        };
        if raw.norm_sqr() <= T::zero() {
            return Err(Error::invalid(
                "outcome",
                "selected outcome has zero probability on this state",
            ));
        }
        StateVector::unit(raw.amplitudes().to_vec())
    }

    /// Samples an outcome and returns it with the collapsed state.
    pub fn measure(
        &self,
        state: &StateVector<T>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(WeakOutcome, StateVector<T>)> {
        let dev = (state.norm_sqr() - T::one()).abs();
        if dev > T::NORM_TOL {
            return Err(Error::NotNormalized {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        let p_plus = self.plus_probability(state)?;
        let u: f64 = rng.random();
        let outcome = if real::<T>(u) < p_plus {
            WeakOutcome::Plus
        } else {
            WeakOutcome::Minus
        };
        let post = self.post_state(outcome, state)?;
        Ok((outcome, post))
    }
}

/// Convenience wrapper running one seeded weak measurement.
pub fn weak_measure<T: Real>(
    wm: &WeakMeasurement<T>,
    state: &StateVector<T>,
    seed: u64,
) -> Result<(WeakOutcome, StateVector<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    wm.measure(state, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{
        rotation_path, schrodinger_path, uniform_times, RotationSchedule, ScheduleShape,
        SurvivingBranch,
    };
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rotation_setup(
        theta_s: f64,
        n: usize,
    ) -> (EvolutionPath<f64>, EvolutionPath<f64>, Hamiltonian<f64>) {
        let times = uniform_times(0.0, 1.0, n);
        let h = Operator::zero(2);
        let b1 = schrodinger_path(&StateVector::basis(2, 0).unwrap(), &h, &times).unwrap();
        let b2 = schrodinger_path(&StateVector::basis(2, 1).unwrap(), &h, &times).unwrap();
        let sched = RotationSchedule::new(
            theta_s,
            0.0,
            ScheduleShape::Linear,
            (0.0, 1.0),
            SurvivingBranch::Second,
        )
        .unwrap();
        let path = rotation_path(&sched, &b1, &b2).unwrap();
        let start =
            StateVector::normalized(vec![c(theta_s.cos(), 0.0), c(theta_s.sin(), 0.0)]).unwrap();
        let reference = schrodinger_path(&start, &h, &times).unwrap();
        (path, reference, Hamiltonian::Constant(h))
    }

    #[test]
    fn statistic_zero_for_reference_itself() {
        let times = uniform_times(0.0, 1.0, 201);
        let h = Operator::diagonal(&[0.1, -0.1]);
        let psi0 = StateVector::unit(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let path = schrodinger_path(&psi0, &h, &times).unwrap();
        let stat = statistic_a(&path, &Hamiltonian::Constant(h), &path.clone()).unwrap();
        assert!(stat.a.abs() <= 1e-9, "A = {}", stat.a);
        assert!((stat.rate - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn rotation_statistic_matches_log_amplitude() {
        for alpha2_sq in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
            let theta_s = alpha2_sq.sqrt().asin();
            let (path, reference, ham) = rotation_setup(theta_s, 2001);
            let stat = statistic_a(&path, &ham, &reference).unwrap();
            let want = -alpha2_sq.sqrt().ln();
            assert!(
                (stat.a - want).abs() <= 1e-6,
                "alpha2_sq {alpha2_sq}: A {} want {want}",
                stat.a
            );
            assert!(
                (stat.rate - alpha2_sq).abs() <= 1e-6,
                "rate {} want {alpha2_sq}",
                stat.rate
            );
        }
    }

    #[test]
    fn statistic_segments_add_exactly() {
        let theta_s = 0.9;
        let (path, reference, ham) = rotation_setup(theta_s, 1601);
        let n = path.len();
        for split in [400usize, 777, 1200] {
            let full = statistic_a(&path, &ham, &reference).unwrap();
            let first = statistic_a_between(&path, &ham, &reference, 0, split).unwrap();
            let second = statistic_a_between(&path, &ham, &reference, split, n - 1).unwrap();
            // odd splits regroup the quadrature panels, an h^4-size shuffle
            let a_tol = if split % 2 == 0 { 1e-12 } else { 1e-11 };
            assert!(
                ((first.a + second.a) - full.a).abs() <= a_tol,
                "split {split}: {} + {} vs {}",
                first.a,
                second.a,
                full.a
            );
            let product = first.rate * second.rate;
            assert!(
                (product - full.rate).abs() <= 1e-10 * full.rate.max(1.0),
                "rate product {product} vs {}",
                full.rate
            );
        }
    }

    #[test]
    fn orthogonal_excursion_flagged_and_suppressed() {
        // reference frozen in branch 1; path rotates fully into branch 2
        let times = uniform_times(0.0f64, 1.0, 401);
        let h = Operator::zero(2);
        let b1 = schrodinger_path(&StateVector::<f64>::basis(2, 0).unwrap(), &h, &times).unwrap();
        let b2 = schrodinger_path(&StateVector::basis(2, 1).unwrap(), &h, &times).unwrap();
        let sched = RotationSchedule::new(
            0.4,
            0.0,
            ScheduleShape::Linear,
            (0.0, 1.0),
            SurvivingBranch::Second,
        )
        .unwrap();
        let path = rotation_path(&sched, &b1, &b2).unwrap();
        let ham = Hamiltonian::Constant(h);
        let err = statistic_a(&path, &ham, &b1).unwrap_err();
        assert!(matches!(err, Error::OrthogonalExcursion { .. }));
        let stat = statistic_or_suppressed(&path, &ham, &b1).unwrap();
        assert_eq!(stat.rate, 0.0);
        assert!(stat.a.is_infinite());
    }

    #[test]
    fn race_closed_form_normalises() {
        let p = race_closed_form(&[0.7f64, 0.3]).unwrap();
        assert!((p[0] - 0.7).abs() < 1e-15);
        assert!((p[1] - 0.3).abs() < 1e-15);
        let q = race_closed_form(&[2.0f64, 2.0]).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-15);
        assert!(race_closed_form::<f64>(&[]).is_err());
        assert!(race_closed_form(&[-1.0f64, 2.0]).is_err());
        assert!(race_closed_form(&[0.0f64, 0.0]).is_err());
    }

    #[test]
    fn race_closed_form_reproduces_branch_weights() {
        // rates from rotation statistics equal the squared amplitudes
        for weights in [vec![0.5f64, 0.3, 0.2], vec![0.25, 0.25, 0.25, 0.25]] {
            let probs = race_closed_form(&weights).unwrap();
            for (p, w) in probs.iter().zip(weights.iter()) {
                assert!((p - w).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn race_sample_matches_closed_form_within_binomial_noise() {
        let rates = [0.9f64, 0.1];
        let n = 200_000;
        let freq = race_sample(&rates, n, 42).unwrap();
        let sigma = (0.9f64 * 0.1 / n as f64).sqrt();
        assert!(
            (freq[0] - 0.9).abs() <= 4.0 * sigma,
            "freq {} vs 0.9 (sigma {sigma})",
            freq[0]
        );
    }

    #[test]
    fn race_single_candidate_always_wins() {
        let freq = race_sample(&[3.7f64], 100, 7).unwrap();
        assert_eq!(freq[0], 1.0);
        let draw = race_draw(&[3.7f64], 7).unwrap();
        assert_eq!(draw.winner, 0);
    }

    #[test]
    fn race_draw_deterministic_per_seed() {
        let a = race_draw(&[0.4f64, 0.6], 99).unwrap();
        let b = race_draw(&[0.4f64, 0.6], 99).unwrap();
        assert_eq!(a.winner, b.winner);
        assert_eq!(a.lambdas, b.lambdas);
    }

    #[test]
    fn zero_rate_candidate_never_wins() {
        let freq = race_sample(&[0.0f64, 1.0], 10_000, 3).unwrap();
        assert_eq!(freq[0], 0.0);
        assert_eq!(freq[1], 1.0);
    }

    #[test]
    fn suppression_check_verdicts() {
        let v = suppression_check(30.0f64, 0.35);
        assert!(v.probabilities[0] < 1e-12);
        assert!(v.never_observed[0]);
        assert!(!v.never_observed[1]);
        let expected = (-60.0f64).exp() / ((-60.0f64).exp() + (-0.7f64).exp());
        assert!((v.probabilities[0] - expected).abs() <= 1e-18);

        let even = suppression_check(1.0f64, 1.0);
        assert!((even.probabilities[0] - 0.5).abs() < 1e-15);

        let inf = suppression_check(f64::INFINITY, 0.2);
        assert_eq!(inf.probabilities[0], 0.0);
        assert_eq!(inf.probabilities[1], 1.0);
    }

    #[test]
    fn weak_measurement_completeness_across_p_grid() {
        let q = StateVector::unit(vec![c(1.0, 0.5), c(0.3, -0.2), c(0.0, 1.0)]).unwrap();
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let wm = WeakMeasurement::new(q.clone(), p).unwrap();
            assert!(
                wm.completeness_deviation() <= 1e-12,
                "p = {p}: deviation {}",
                wm.completeness_deviation()
            );
        }
    }

    #[test]
    fn weak_measurement_limits() {
        let q = StateVector::<f64>::basis(2, 0).unwrap();
        // p = 1 on |q> itself: projective, always detects
        let wm = WeakMeasurement::new(q.clone(), 1.0).unwrap();
        for seed in 0..20 {
            let (outcome, post) = weak_measure(&wm, &q, seed).unwrap();
            assert_eq!(outcome, WeakOutcome::Plus);
            assert!((post.amplitude(0).norm() - 1.0).abs() < 1e-12);
        }
        // p = 0: never detects, state untouched
        let wm0 = WeakMeasurement::new(q.clone(), 0.0).unwrap();
        let probe = StateVector::unit(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        for seed in 0..20 {
            let (outcome, post) = weak_measure(&wm0, &probe, seed).unwrap();
            assert_eq!(outcome, WeakOutcome::Minus);
            assert!(post.sub(&probe).unwrap().norm() < 1e-12);
        }
        // orthogonal state: never detected, untouched for any p
        let wm3 = WeakMeasurement::new(q, 0.3).unwrap();
        let orth = StateVector::basis(2, 1).unwrap();
        for seed in 0..20 {
            let (outcome, post) = weak_measure(&wm3, &orth, seed).unwrap();
            assert_eq!(outcome, WeakOutcome::Minus);
            assert!(post.sub(&orth).unwrap().norm() < 1e-12);
        }
        assert!(WeakMeasurement::new(StateVector::<f64>::basis(2, 0).unwrap(), 1.5).is_err());
    }

    #[test]
    fn repeated_no_detection_attenuates_probed_weight() {
        let q = StateVector::<f64>::basis(2, 0).unwrap();
        let p = 0.2f64;
        let wm = WeakMeasurement::new(q.clone(), p).unwrap();
        let start = StateVector::unit(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let k = 6;
        let mut state = start.clone();
        for _ in 0..k {
            state = wm.post_state(WeakOutcome::Minus, &state).unwrap();
        }
        // direct operator product: q-component scales by (1-p)^{k/2}
        let scale = (1.0 - p).powf(k as f64 / 2.0);
        let raw = vec![c(0.6 * scale, 0.0), c(0.8, 0.0)];
        let want = StateVector::unit(raw).unwrap();
        assert!(state.sub(&want).unwrap().norm() <= 1e-12);
        // detection frequency on |q> equals p
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut hits = 0;
        for _ in 0..n {
            let (outcome, _) = wm.measure(&q, &mut rng).unwrap();
            if outcome == WeakOutcome::Plus {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sigma, "freq {freq} vs {p}");
    }
}
