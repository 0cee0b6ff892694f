//! Named candidate evolutions: exact Schrodinger flows, the two-branch
//! product path for a mass superposed across two locations, and branch
//! rotation paths that collapse a superposition into one branch.

use crate::error::{Error, Result};
use crate::hilbert::{eigh, inner, Operator, StateVector};
use crate::quad;
use crate::residual::{action, EvolutionPath, Hamiltonian};
use crate::scalar::{cre, real, Real, C};
use num_complex::Complex;

/// Uniform time grid from `start` to `end` inclusive.
pub fn uniform_times<T: Real>(start: T, end: T, n: usize) -> Vec<T> {
    let step = (end - start) / real::<T>((n - 1) as f64);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                end
            } else {
                start + step * real::<T>(k as f64)
            }
        })
        .collect()
}

/// Exact Schrodinger evolution of `psi0` under a constant Hamiltonian,
/// via eigendecomposition (exact matrix exponential at every node).
pub fn schrodinger_path<T: Real>(
    psi0: &StateVector<T>,
    hamiltonian: &Operator<T>,
    times: &[T],
) -> Result<EvolutionPath<T>> {
    if !hamiltonian.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: hamiltonian
                .hermiticity_deviation()
                .to_f64()
                .unwrap_or(f64::NAN),
        });
    }
    if hamiltonian.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch {
            left: hamiltonian.dim(),
            right: psi0.dim(),
            context: "hamiltonian vs initial state",
        });
    }
    let (evals, evecs) = eigh(hamiltonian)?;
    let dim = psi0.dim();
    // coefficients in the eigenbasis
    let mut coeff = vec![Complex::new(T::zero(), T::zero()); dim];
    for k in 0..dim {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, &amp) in psi0.amplitudes().iter().enumerate() {
            acc += evecs.entry(j, k).conj() * amp;
        }
        coeff[k] = acc;
    }
    let t0 = times.first().copied().unwrap_or_else(T::zero);
    let states: Result<Vec<StateVector<T>>> = times
        .iter()
        .map(|&t| {
            let dt = t - t0;
            let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
            for k in 0..dim {
                let phase = Complex::from_polar(T::one(), -evals[k] * dt);
                let ck = coeff[k] * phase;
                for (j, slot) in amps.iter_mut().enumerate() {
                    *slot += evecs.entry(j, k) * ck;
                }
            }
            StateVector::normalized(amps)
        })
        .collect();
    EvolutionPath::new(times.to_vec(), states?)
}

/// Parameters for a mass superposed across two well-separated locations.
///
/// `phi1`, `phi2` are each branch's own Newtonian potential evaluated at
/// that branch's location (dimensionless, non-positive); cross terms are
/// zero by the well-separated assumption.
#[derive(Debug, Clone, Copy)]
pub struct TwoBranchConfig<T: Real> {
    alpha1: C<T>,
    alpha2: C<T>,
    mass: T,
    phi1: T,
    phi2: T,
    duration: T,
}

impl<T: Real> TwoBranchConfig<T> {
    pub fn new(alpha1: C<T>, alpha2: C<T>, mass: T, phi1: T, phi2: T, duration: T) -> Result<Self> {
        let weight = alpha1.norm_sqr() + alpha2.norm_sqr();
        if (weight - T::one()).abs() > real::<T>(1e-12) {
            return Err(Error::NotNormalized {
                deviation: (weight - T::one()).abs().to_f64().unwrap_or(f64::NAN),
            });
        }
        if phi1 > T::zero() || phi2 > T::zero() {
            return Err(Error::invalid(
                "phi",
                "branch potentials must be attractive (non-positive)",
            ));
        }
        if !(mass >= T::zero()) {
            return Err(Error::invalid("mass", "mass must be non-negative"));
        }
        if !(duration >= T::zero()) {
            return Err(Error::invalid("duration", "duration must be non-negative"));
        }
        Ok(Self {
            alpha1,
            alpha2,
            mass,
            phi1,
            phi2,
            duration,
        })
    }

    pub fn alpha1(&self) -> C<T> {
        self.alpha1
    }

    pub fn alpha2(&self) -> C<T> {
        self.alpha2
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn phi1(&self) -> T {
        self.phi1
    }

    pub fn phi2(&self) -> T {
        self.phi2
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    /// Φ_1 + Φ_2, each branch's potential at its own location.
    pub fn phi12(&self) -> T {
        self.phi1 + self.phi2
    }

    /// |α_1 α_2|, the cross-branch weight.
    pub fn cross_weight(&self) -> T {
        (self.alpha1 * self.alpha2).norm()
    }

    /// Residual norm of the product path before gauge fixing:
    /// ½ m |α_1α_2| |Φ_12| √2.
    pub fn pre_gauge_norm(&self) -> T {
        let half = real::<T>(0.5);
        half * self.mass * self.cross_weight() * self.phi12().abs() * real::<T>(2.0).sqrt()
    }

    /// Residual norm after gauge fixing:
    /// ½ m |α_1α_2| |Φ_12| √(2 − 4|α_1α_2|²).
    pub fn post_gauge_norm(&self) -> T {
        let w = self.cross_weight();
        let half = real::<T>(0.5);
        let arg = (real::<T>(2.0) - real::<T>(4.0) * w * w).max(T::zero());
        half * self.mass * w * self.phi12().abs() * arg.sqrt()
    }
}

/// Builds the two-branch product path on the doubled four-dimensional
/// space, ordered (11, 12, 21, 22), together with the Hamiltonian
/// diag(mΦ_1, 0, 0, mΦ_2) it deviates from.
///
/// Each factor carries half the branch phase, a_i(t) = α_i e^{−i t m Φ_i/2},
/// so the diagonal components track the Hamiltonian exactly while the cross
/// components run at the mean frequency and feed the residual.
pub fn two_branch_model<T: Real>(
    cfg: &TwoBranchConfig<T>,
    times: &[T],
) -> Result<(EvolutionPath<T>, Operator<T>)> {
    let half = real::<T>(0.5);
    let m = cfg.mass;
    let hamiltonian = Operator::diagonal(&[m * cfg.phi1, T::zero(), T::zero(), m * cfg.phi2]);
    let a1 = cfg.alpha1;
    let a2 = cfg.alpha2;
    let states: Result<Vec<StateVector<T>>> = times
        .iter()
        .map(|&t| {
            let f1 = a1 * Complex::from_polar(T::one(), -half * t * m * cfg.phi1);
            let f2 = a2 * Complex::from_polar(T::one(), -half * t * m * cfg.phi2);
            StateVector::normalized(vec![f1 * f1, f1 * f2, f2 * f1, f2 * f2])
        })
        .collect();
    let path = EvolutionPath::new(times.to_vec(), states?)?;
    Ok((path, hamiltonian))
}

/// Accumulated residual estimate for a two-branch configuration.
#[derive(Debug, Clone, Copy)]
pub struct PenrosePhase<T: Real> {
    /// Gauged residual norm integrated over the duration:
    /// τ·m·|Φ_12|·½|α_1α_2|√(2−4|α_1α_2|²).
    pub phase: T,
    /// Order-of-magnitude form τ·m·|Φ_12| with the order-one factor
    /// stripped.
    pub order_of_magnitude: T,
    /// The estimate reaches order one: branch selection is expected within
    /// the duration.
    pub collapse_regime: bool,
}

/// Integrates the constant gauged residual rate over the configured
/// duration.
pub fn penrose_phase<T: Real>(cfg: &TwoBranchConfig<T>) -> PenrosePhase<T> {
    let phase = cfg.duration * cfg.post_gauge_norm();
    let om = cfg.duration * cfg.mass * cfg.phi12().abs();
    PenrosePhase {
        phase,
        order_of_magnitude: om,
        collapse_regime: om >= T::one(),
    }
}

/// Which branch a rotation path ends in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivingBranch {
    First,
    Second,
}

/// Monotone interpolation shape for the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleShape {
    /// Constant rate.
    Linear,
    /// 3u² − 2u³; zero rate at both ends.
    SmoothstepCubic,
    /// (1 − cos πu)/2; zero rate at both ends.
    SineEase,
}

impl ScheduleShape {
    fn value<T: Real>(self, u: T) -> T {
        match self {
            ScheduleShape::Linear => u,
            ScheduleShape::SmoothstepCubic => u * u * (real::<T>(3.0) - real::<T>(2.0) * u),
            ScheduleShape::SineEase => {
                let half = real::<T>(0.5);
                half * (T::one() - (T::PI() * u).cos())
            }
        }
    }

    fn slope<T: Real>(self, u: T) -> T {
        match self {
            ScheduleShape::Linear => T::one(),
            ScheduleShape::SmoothstepCubic => real::<T>(6.0) * u * (T::one() - u),
            ScheduleShape::SineEase => {
                let half = real::<T>(0.5);
                half * T::PI() * (T::PI() * u).sin()
            }
        }
    }
}

/// Rotation of a superposition cos θ_s |1⟩ + e^{iφ} sin θ_s |2⟩ into a
/// single branch over a declared interaction window. Outside the window
/// the angle holds still; inside it moves monotonically to the target
/// (0 for the first branch, π/2 for the second).
#[derive(Debug, Clone, Copy)]
pub struct RotationSchedule<T: Real> {
    theta_s: T,
    phi: T,
    shape: ScheduleShape,
    window: (T, T),
    survivor: SurvivingBranch,
}

impl<T: Real> RotationSchedule<T> {
    pub fn new(
        theta_s: T,
        phi: T,
        shape: ScheduleShape,
        window: (T, T),
        survivor: SurvivingBranch,
    ) -> Result<Self> {
        let half_pi = T::PI() * real::<T>(0.5);
        if !(theta_s > T::zero() && theta_s <= half_pi) {
            return Err(Error::invalid(
                "theta_s",
                "starting angle must lie in (0, pi/2]",
            ));
        }
        if !(window.1 > window.0) {
            return Err(Error::invalid(
                "window",
                "interaction window must have positive length",
            ));
        }
        Ok(Self {
            theta_s,
            phi,
            shape,
            window,
            survivor,
        })
    }

    pub fn theta_s(&self) -> T {
        self.theta_s
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn survivor(&self) -> SurvivingBranch {
        self.survivor
    }

    pub fn window(&self) -> (T, T) {
        self.window
    }

    fn target(&self) -> T {
        match self.survivor {
            SurvivingBranch::First => T::zero(),
            SurvivingBranch::Second => T::PI() * real::<T>(0.5),
        }
    }

    /// Angle at time t.
    pub fn theta(&self, t: T) -> T {
        let (t0, t1) = self.window;
        if t <= t0 {
            return self.theta_s;
        }
        if t >= t1 {
            return self.target();
        }
        let u = (t - t0) / (t1 - t0);
        self.theta_s + (self.target() - self.theta_s) * self.shape.value(u)
    }

    /// dθ/dt at time t: zero strictly outside the window, the shape's
    /// slope on the closed window (so a constant-rate schedule keeps its
    /// rate at the window edges).
    pub fn theta_dot(&self, t: T) -> T {
        let (t0, t1) = self.window;
        if t < t0 || t > t1 {
            return T::zero();
        }
        let u = (t - t0) / (t1 - t0);
        (self.target() - self.theta_s) * self.shape.slope(u) / (t1 - t0)
    }

    /// Arc length of the rotation: |target − θ_s|.
    pub fn arc(&self) -> T {
        (self.target() - self.theta_s).abs()
    }
}

/// Builds the rotation path cos θ(t)|1(t)⟩ + e^{iφ} sin θ(t)|2(t)⟩ on two
/// exact base evolutions that stay orthogonal node by node.
///
/// The result is already in the energy gauge with respect to the bases'
/// Hamiltonian: the residual is purely the rotation term, orthogonal to the
/// state, with norm θ̇.
pub fn rotation_path<T: Real>(
    schedule: &RotationSchedule<T>,
    base1: &EvolutionPath<T>,
    base2: &EvolutionPath<T>,
) -> Result<EvolutionPath<T>> {
    if base1.len() != base2.len() {
        return Err(Error::DimensionMismatch {
            left: base1.len(),
            right: base2.len(),
            context: "rotation base path lengths",
        });
    }
    if base1.dim() != base2.dim() {
        return Err(Error::DimensionMismatch {
            left: base1.dim(),
            right: base2.dim(),
            context: "rotation base dimensions",
        });
    }
    let slack = real::<T>(1e-12);
    for (&ta, &tb) in base1.times().iter().zip(base2.times()) {
        if (ta - tb).abs() > slack * T::one().max(ta.abs()) {
            return Err(Error::invalid(
                "times",
                "rotation bases must share their time grid",
            ));
        }
    }
    for k in 0..base1.len() {
        let overlap = inner(base1.state(k), base2.state(k))?.norm();
        if overlap > T::GAUGE_TOL {
            return Err(Error::invalid(
                "bases",
                format!("base states overlap by {overlap:e} at node {k}"),
            ));
        }
    }
    let phase = Complex::from_polar(T::one(), schedule.phi);
    let mut states = Vec::with_capacity(base1.len());
    for (k, &t) in base1.times().iter().enumerate() {
        let th = schedule.theta(t);
        let a = cre(th.cos());
        let b = phase * cre(th.sin());
        let s = base1.state(k).scaled(a).add(&base2.state(k).scaled(b))?;
        states.push(StateVector::normalized(s.amplitudes().to_vec())?);
    }
    EvolutionPath::new(base1.times().to_vec(), states)
}

/// A candidate path's position after ranking.
#[derive(Debug, Clone, Copy)]
pub struct RankedPath<T: Real> {
    /// Index into the candidate list.
    pub index: usize,
    pub action: T,
}

/// Ranks candidate paths by ascending action under the given Hamiltonian.
/// Stable for ties.
pub fn rank_by_action<T: Real>(
    candidates: &[EvolutionPath<T>],
    hamiltonian: &Hamiltonian<T>,
    gauge: bool,
) -> Result<Vec<RankedPath<T>>> {
    if candidates.is_empty() {
        return Err(Error::invalid(
            "candidates",
            "need at least one path to rank",
        ));
    }
    let mut ranked = Vec::with_capacity(candidates.len());
    for (index, path) in candidates.iter().enumerate() {
        let a = action(path, hamiltonian, gauge)?.get();
        ranked.push(RankedPath { index, action: a });
    }
    ranked.sort_by(|x, y| {
        x.action
            .partial_cmp(&y.action)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ranked)
}

/// Integrates a schedule's |θ̇| over the path window by quadrature; equals
/// the arc length for monotone schedules.
pub fn schedule_arc_quadrature<T: Real>(schedule: &RotationSchedule<T>, times: &[T]) -> Result<T> {
    let rates: Vec<T> = times.iter().map(|&t| schedule.theta_dot(t).abs()).collect();
    quad::integrate_samples(times, &rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::{energy_gauge, residual_at, residual_norms};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn schrodinger_constant_under_zero_hamiltonian() {
        let psi0 = StateVector::unit(vec![c(1.0, 0.0), c(1.0, 1.0)]).unwrap();
        let h = Operator::zero(2);
        let times = uniform_times(0.0, 2.0, 11);
        let path = schrodinger_path(&psi0, &h, &times).unwrap();
        for k in 0..path.len() {
            let d = path.state(k).sub(&psi0).unwrap().norm();
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn schrodinger_diagonal_oracle() {
        let inv = 1.0 / 2.0f64.sqrt();
        let psi0 = StateVector::normalized(vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        let h = Operator::diagonal(&[0.3, -0.5]);
        let times = uniform_times(0.0, 4.0, 9);
        let path = schrodinger_path(&psi0, &h, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let want = [
                Complex64::from_polar(inv, -0.3 * t),
                Complex64::from_polar(inv, 0.5 * t),
            ];
            for (got, want) in path.state(k).amplitudes().iter().zip(want.iter()) {
                assert!((got - want).norm() < 1e-12);
            }
            assert!((path.state(k).norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn schrodinger_path_has_zero_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut entries = vec![c(0.0, 0.0); 9];
        for i in 0..3 {
            entries[i * 3 + i] = c(rng.random::<f64>() - 0.5, 0.0);
            for j in (i + 1)..3 {
                let z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                entries[i * 3 + j] = z;
                entries[j * 3 + i] = z.conj();
            }
        }
        let h = Operator::hermitian(3, entries).unwrap();
        let psi0 = StateVector::unit(vec![c(1.0, 0.0), c(0.5, -0.5), c(0.0, 0.3)]).unwrap();
        let times = uniform_times(0.0, 1.0, 801);
        let path = schrodinger_path(&psi0, &h, &times).unwrap();
        let s = action(&path, &Hamiltonian::Constant(h), false)
            .unwrap()
            .get();
        assert!(s <= 1e-6, "action {s}");
    }

    fn generic_cfg() -> TwoBranchConfig<f64> {
        TwoBranchConfig::new(c(0.8, 0.0), c(0.6, 0.0), 1.0, -0.012, -0.008, 1.0).unwrap()
    }

    #[test]
    fn two_branch_single_branch_residual_vanishes() {
        let cfg = TwoBranchConfig::new(c(1.0, 0.0), c(0.0, 0.0), 1.0, -0.01, -0.02, 1.0).unwrap();
        let times = uniform_times(0.0, 1.0, 2001);
        let (path, h) = two_branch_model(&cfg, &times).unwrap();
        let norms = residual_norms(&path, &Hamiltonian::Constant(h)).unwrap();
        for r in norms {
            assert!(r <= 1e-12, "residual {r}");
        }
    }

    #[test]
    fn two_branch_zero_potentials_residual_vanishes() {
        let cfg = TwoBranchConfig::new(c(0.8, 0.0), c(0.6, 0.0), 1.0, 0.0, 0.0, 1.0).unwrap();
        let times = uniform_times(0.0, 1.0, 101);
        let (path, h) = two_branch_model(&cfg, &times).unwrap();
        let norms = residual_norms(&path, &Hamiltonian::Constant(h)).unwrap();
        for r in norms {
            assert!(r <= 1e-12, "residual {r}");
        }
    }

    #[test]
    fn two_branch_pre_and_post_gauge_norms_match_closed_form() {
        let cfg = generic_cfg();
        // mPhi12 = -0.02, |a1 a2| = 0.48
        assert!((cfg.pre_gauge_norm() - 0.5 * 0.48 * 0.02 * 2f64.sqrt()).abs() < 1e-15);
        let times = uniform_times(0.0, 5.0, 401);
        let (path, h) = two_branch_model(&cfg, &times).unwrap();
        let ham = Hamiltonian::Constant(h);
        let norms = residual_norms(&path, &ham).unwrap();
        for r in &norms {
            assert!((r - cfg.pre_gauge_norm()).abs() <= 1e-8, "pre-gauge {r}");
        }
        let gauged = energy_gauge(&path, &ham).unwrap();
        let gnorms = residual_norms(&gauged, &ham).unwrap();
        for (k, r) in gnorms.iter().enumerate() {
            if k == 0 || k == gnorms.len() - 1 {
                continue;
            }
            assert!((r - cfg.post_gauge_norm()).abs() <= 1e-6, "post-gauge {r}");
        }
    }

    #[test]
    fn two_branch_random_configs_match_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let times = uniform_times(0.0, 5.0, 401);
        for _ in 0..10 {
            let w1: f64 = 0.1 + 0.8 * rng.random::<f64>();
            let p1: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let p2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let a1 = Complex64::from_polar(w1.sqrt(), p1);
            let a2 = Complex64::from_polar((1.0 - w1).sqrt(), p2);
            let phi1 = -0.02 * rng.random::<f64>();
            let phi2 = -0.02 * rng.random::<f64>();
            let cfg = TwoBranchConfig::new(a1, a2, 1.0, phi1, phi2, 5.0).unwrap();
            let (path, h) = two_branch_model(&cfg, &times).unwrap();
            let ham = Hamiltonian::Constant(h);
            let sample = residual_at(&path, &ham, 200).unwrap();
            assert!((sample.norm() - cfg.pre_gauge_norm()).abs() <= 1e-8);
            let gauged = energy_gauge(&path, &ham).unwrap();
            let gs = residual_at(&gauged, &ham, 200).unwrap();
            assert!((gs.norm() - cfg.post_gauge_norm()).abs() <= 1e-6);
        }
    }

    #[test]
    fn two_branch_rejects_bad_weights_and_repulsive_potentials() {
        assert!(TwoBranchConfig::new(c(1.0, 0.0), c(0.5, 0.0), 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(TwoBranchConfig::new(c(0.8, 0.0), c(0.6, 0.0), 1.0, 0.01, 0.0, 1.0).is_err());
    }

    #[test]
    fn penrose_phase_scaling_and_regime_flag() {
        let zero_tau =
            TwoBranchConfig::new(c(0.8, 0.0), c(0.6, 0.0), 1.0, -0.01, -0.01, 0.0).unwrap();
        assert_eq!(penrose_phase(&zero_tau).phase, 0.0);

        let tau1 = TwoBranchConfig::new(c(0.8, 0.0), c(0.6, 0.0), 1.0, -0.01, -0.01, 2.0).unwrap();
        let tau2 = TwoBranchConfig::new(c(0.8, 0.0), c(0.6, 0.0), 1.0, -0.01, -0.01, 4.0).unwrap();
        let p1 = penrose_phase(&tau1);
        let p2 = penrose_phase(&tau2);
        assert!((p2.phase - 2.0 * p1.phase).abs() < 1e-15);
        assert!(!p1.collapse_regime);

        // equal weights, tau m |Phi12| = 1: order-one estimate, flagged
        let inv = 1.0 / 2.0f64.sqrt();
        let eq =
            TwoBranchConfig::new(c(inv, 0.0), c(inv, 0.0), 1.0, -0.005, -0.005, 100.0).unwrap();
        let p = penrose_phase(&eq);
        assert!((p.order_of_magnitude - 1.0).abs() < 1e-12);
        assert!(p.collapse_regime);
        assert!((p.phase - 0.25).abs() < 1e-12);
    }

    fn zero_bases(dim: usize, times: &[f64]) -> (EvolutionPath<f64>, EvolutionPath<f64>) {
        let h = Operator::zero(dim);
        let b1 = schrodinger_path(&StateVector::basis(dim, 0).unwrap(), &h, times).unwrap();
        let b2 = schrodinger_path(&StateVector::basis(dim, 1).unwrap(), &h, times).unwrap();
        (b1, b2)
    }

    #[test]
    fn rotation_action_matches_arc_for_all_shapes() {
        let times = uniform_times(0.0, 1.0, 4001);
        let (b1, b2) = zero_bases(2, &times);
        let ham = Hamiltonian::Constant(Operator::zero(2));
        let theta_s = (0.7f64).sqrt().acos();
        for shape in [
            ScheduleShape::Linear,
            ScheduleShape::SmoothstepCubic,
            ScheduleShape::SineEase,
        ] {
            let sched =
                RotationSchedule::new(theta_s, 0.4, shape, (0.0, 1.0), SurvivingBranch::Second)
                    .unwrap();
            let path = rotation_path(&sched, &b1, &b2).unwrap();
            let s = action(&path, &ham, false).unwrap().get();
            let want = std::f64::consts::FRAC_PI_2 - theta_s;
            assert!(
                (s - want).abs() <= 1e-6,
                "{shape:?}: action {s} want {want}"
            );
        }
    }

    #[test]
    fn rotation_residual_norm_tracks_schedule_rate() {
        let times = uniform_times(0.0, 1.0, 2001);
        let (b1, b2) = zero_bases(2, &times);
        let ham = Hamiltonian::Constant(Operator::zero(2));
        let sched = RotationSchedule::new(
            std::f64::consts::FRAC_PI_4,
            0.0,
            ScheduleShape::SmoothstepCubic,
            (0.0, 1.0),
            SurvivingBranch::Second,
        )
        .unwrap();
        let path = rotation_path(&sched, &b1, &b2).unwrap();
        for k in (0..times.len()).step_by(250) {
            let s = residual_at(&path, &ham, k).unwrap();
            let want = sched.theta_dot(times[k]).abs();
            assert!(
                (s.norm() - want).abs() <= 1e-5,
                "node {k}: {} vs {want}",
                s.norm()
            );
            // already in the energy gauge
            assert!(s.parallel.norm() <= 1e-6);
        }
    }

    #[test]
    fn rotation_into_first_branch_uses_complementary_arc() {
        let times = uniform_times(0.0, 1.0, 2001);
        let (b1, b2) = zero_bases(2, &times);
        let ham = Hamiltonian::Constant(Operator::zero(2));
        let theta_s = 1.1;
        let sched = RotationSchedule::new(
            theta_s,
            0.0,
            ScheduleShape::SineEase,
            (0.0, 1.0),
            SurvivingBranch::First,
        )
        .unwrap();
        let path = rotation_path(&sched, &b1, &b2).unwrap();
        let s = action(&path, &ham, false).unwrap().get();
        assert!((s - theta_s).abs() <= 1e-6, "action {s} want {theta_s}");
        let last = path.state(path.len() - 1);
        assert!((last.amplitude(0).norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rotation_rejects_overlapping_bases() {
        let times = uniform_times(0.0, 1.0, 11);
        let h = Operator::zero(2);
        let b1 = schrodinger_path(&StateVector::basis(2, 0).unwrap(), &h, &times).unwrap();
        let tilted = StateVector::unit(vec![c(0.2, 0.0), c(1.0, 0.0)]).unwrap();
        let b2 = schrodinger_path(&tilted, &h, &times).unwrap();
        let sched = RotationSchedule::new(
            0.5,
            0.0,
            ScheduleShape::Linear,
            (0.0, 1.0),
            SurvivingBranch::Second,
        )
        .unwrap();
        assert!(rotation_path(&sched, &b1, &b2).is_err());
    }

    #[test]
    fn rotation_detours_never_beat_the_great_circle() {
        // perturb through a third direction; action stays >= arc - 1e-6
        let times = uniform_times(0.0, 1.0, 4001);
        let (b1, b2) = zero_bases(3, &times);
        let ham = Hamiltonian::Constant(Operator::zero(3));
        let theta_s = 0.6;
        let sched = RotationSchedule::new(
            theta_s,
            0.0,
            ScheduleShape::SmoothstepCubic,
            (0.0, 1.0),
            SurvivingBranch::Second,
        )
        .unwrap();
        let clean = rotation_path(&sched, &b1, &b2).unwrap();
        let floor = std::f64::consts::FRAC_PI_2 - theta_s - 1e-6;
        assert!(action(&clean, &ham, false).unwrap().get() >= floor);

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let eps: f64 = 0.05 * rng.random::<f64>();
            let freq: f64 = 1.0 + 4.0 * rng.random::<f64>();
            let states: Result<Vec<StateVector<f64>>> = times
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let th = sched.theta(t);
                    let bump = eps
                        * (std::f64::consts::PI * t * freq).sin().powi(2)
                        * (th.sin() * th.cos() * 4.0).min(1.0);
                    let mut amps = clean.state(k).amplitudes().to_vec();
                    amps[2] += c(bump, 0.0);
                    StateVector::unit(amps)
                })
                .collect();
            let detour = EvolutionPath::new(times.clone(), states.unwrap()).unwrap();
            let s = action(&detour, &ham, false).unwrap().get();
            assert!(s >= floor, "detour action {s} below {floor}");
        }
    }

    #[test]
    fn interferometer_ranking_prefers_schrodinger() {
        // two-port coupler: exact flow vs rotate-out-and-back candidates
        let omega = 0.8;
        let h = Operator::hermitian(
            2,
            vec![c(0.0, 0.0), c(omega, 0.0), c(omega, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let times = uniform_times(0.0, 1.0, 1601);
        let theta_s = std::f64::consts::FRAC_PI_4;
        let psi0 =
            StateVector::normalized(vec![c(theta_s.cos(), 0.0), c(theta_s.sin(), 0.0)]).unwrap();
        let exact = schrodinger_path(&psi0, &h, &times).unwrap();

        // orthogonal carrier paths through the interferometer
        let b1 = schrodinger_path(&StateVector::basis(2, 0).unwrap(), &h, &times).unwrap();
        let b2 = schrodinger_path(&StateVector::basis(2, 1).unwrap(), &h, &times).unwrap();
        // rotate into branch 2 then back: tent-shaped angle
        let tent: Result<Vec<StateVector<f64>>> = times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let u = if t < 0.5 { t / 0.5 } else { (1.0 - t) / 0.5 };
                let th = theta_s
                    + (std::f64::consts::FRAC_PI_2 - theta_s)
                        * 0.5
                        * (1.0 - (std::f64::consts::PI * u).cos());
                let s = b1
                    .state(k)
                    .scaled(c(th.cos(), 0.0))
                    .add(&b2.state(k).scaled(c(th.sin(), 0.0)))
                    .unwrap();
                StateVector::unit(s.amplitudes().to_vec())
            })
            .collect();
        let round_trip = EvolutionPath::new(times.clone(), tent.unwrap()).unwrap();

        let ham = Hamiltonian::Constant(h);
        let ranking = rank_by_action(&[round_trip.clone(), exact.clone()], &ham, false).unwrap();
        assert_eq!(ranking[0].index, 1, "exact flow should rank first");
        assert!(ranking[0].action <= 1e-5);
        let min_rotation = std::f64::consts::FRAC_PI_2 - theta_s;
        assert!(
            ranking[1].action >= 2.0 * min_rotation - 1e-3,
            "round trip action {} below twice the one-way arc {}",
            ranking[1].action,
            2.0 * min_rotation
        );
    }

    #[test]
    fn schedule_arc_quadrature_matches_closed_form() {
        let times: Vec<f64> = uniform_times(0.0, 2.0, 1001);
        // rate continuous at the window edges: tight quadrature agreement
        for shape in [ScheduleShape::SmoothstepCubic, ScheduleShape::SineEase] {
            let sched = RotationSchedule::new(0.3, 0.0, shape, (0.2, 1.7), SurvivingBranch::Second)
                .unwrap();
            let arc = schedule_arc_quadrature(&sched, &times).unwrap();
            assert!(
                (arc - sched.arc()).abs() < 1e-6,
                "{shape:?}: {arc} vs {}",
                sched.arc()
            );
        }
        // constant rate over the full range: exact up to rounding
        let sched = RotationSchedule::new(
            0.3,
            0.0,
            ScheduleShape::Linear,
            (0.0, 2.0),
            SurvivingBranch::Second,
        )
        .unwrap();
        let arc = schedule_arc_quadrature(&sched, &times).unwrap();
        assert!((arc - sched.arc()).abs() < 1e-12);
        // rate jumps at an interior window edge: corner sampling costs O(h)
        let jumpy = RotationSchedule::new(
            0.3,
            0.0,
            ScheduleShape::Linear,
            (0.2, 1.7),
            SurvivingBranch::Second,
        )
        .unwrap();
        let arc = schedule_arc_quadrature(&jumpy, &times).unwrap();
        assert!((arc - jumpy.arc()).abs() < 5e-3);
    }
}
