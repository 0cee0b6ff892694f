//! Radially symmetric self-gravitating Schrödinger solver: the wavefunction
//! sources a Newtonian potential through the Poisson equation and moves in
//! it. Real-time propagation is Crank–Nicolson with a per-step potential
//! refresh; the ground state comes from imaginary-time relaxation.
//!
//! Everything is expressed through u(r) = r·ψ(r) on a uniform radial grid,
//! which turns the radial Laplacian into a plain second difference.

use crate::error::{Error, Result};
use crate::gravity::{penrose_self_energy_tabulated, RadialDensity};
use crate::scalar::{cre, real, Real, C};
use num_complex::Complex;

/// Uniform radial grid carrying u(r) = r·ψ(r), the particle mass, and an
/// external potential.
#[derive(Debug, Clone)]
pub struct RadialGrid<T: Real> {
    r_max: T,
    n_points: usize,
    mass: T,
    wave: Vec<C<T>>,
    external: Vec<T>,
}

impl<T: Real> RadialGrid<T> {
    /// Builds a grid from u samples; the wave is normalised so that
    /// 4π∫|ψ|²r²dr = 1.
    pub fn new(
        r_max: T,
        n_points: usize,
        mass: T,
        wave: Vec<C<T>>,
        external: Vec<T>,
    ) -> Result<Self> {
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return Err(Error::invalid("r_max", "must be positive and finite"));
        }
        if n_points < 8 {
            return Err(Error::TooFewNodes {
                got: n_points,
                need: 8,
            });
        }
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::invalid("mass", "must be positive and finite"));
        }
        if wave.len() != n_points {
            return Err(Error::DimensionMismatch {
                left: wave.len(),
                right: n_points,
                context: "wave samples",
            });
        }
        if external.len() != n_points {
            return Err(Error::DimensionMismatch {
                left: external.len(),
                right: n_points,
                context: "external potential samples",
            });
        }
        if wave[0].norm() != T::zero() {
            return Err(Error::invalid("wave", "u(0) must vanish"));
        }
        for a in &wave {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::invalid("wave", "samples must be finite"));
            }
        }
        for v in &external {
            if !v.is_finite() {
                return Err(Error::invalid("external", "samples must be finite"));
            }
        }
        let mut grid = Self {
            r_max,
            n_points,
            mass,
            wave,
            external,
        };
        let norm = grid.norm();
        if !(norm > T::zero()) {
            return Err(Error::invalid("wave", "wave has zero norm"));
        }
        grid.renormalize();
        Ok(grid)
    }

    /// Gaussian wavepacket of density width σ (⟨x²⟩ = σ² per axis) with no
    /// external potential.
    pub fn gaussian(r_max: T, n_points: usize, mass: T, width: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::invalid("width", "must be positive and finite"));
        }
        let h = r_max / real::<T>((n_points - 1) as f64);
        let quarter = real::<T>(0.25);
        let wave: Vec<C<T>> = (0..n_points)
            .map(|k| {
                let r = h * real::<T>(k as f64);
                cre(r * (-quarter * r * r / (width * width)).exp())
            })
            .collect();
        Self::new(r_max, n_points, mass, wave, vec![T::zero(); n_points])
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> T {
        self.r_max / real::<T>((self.n_points - 1) as f64)
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn wave(&self) -> &[C<T>] {
        &self.wave
    }

    pub fn external(&self) -> &[T] {
        &self.external
    }

    pub fn with_external(mut self, external: Vec<T>) -> Result<Self> {
        if external.len() != self.n_points {
            return Err(Error::DimensionMismatch {
                left: external.len(),
                right: self.n_points,
                context: "external potential samples",
            });
        }
        self.external = external;
        Ok(self)
    }

    pub fn radii(&self) -> Vec<T> {
        let h = self.spacing();
        (0..self.n_points)
            .map(|k| h * real::<T>(k as f64))
            .collect()
    }

    /// |ψ(r)|² samples; the centre value is extrapolated since u/r is
    /// indeterminate there.
    pub fn density(&self) -> Vec<T> {
        let h = self.spacing();
        let mut rho = vec![T::zero(); self.n_points];
        for k in 1..self.n_points {
            let r = h * real::<T>(k as f64);
            rho[k] = self.wave[k].norm_sqr() / (r * r);
        }
        rho[0] = (real::<T>(2.0) * rho[1] - rho[2]).max(T::zero());
        rho
    }

    /// √(4π ∫ |u|² dr): 1 for a normalised state.
    pub fn norm(&self) -> T {
        let h = self.spacing();
        let four_pi = real::<T>(4.0) * T::PI();
        let sum: T = self.wave.iter().map(|a| a.norm_sqr()).sum();
        (four_pi * h * sum).sqrt()
    }

    /// Scales the wave back to unit norm; returns the norm it had.
    pub fn renormalize(&mut self) -> T {
        let norm = self.norm();
        if norm > T::zero() {
            let inv = T::one() / norm;
            for a in &mut self.wave {
                *a = *a * inv;
            }
        }
        norm
    }

    /// Wavepacket width: σ² = ⟨r²⟩/3.
    pub fn width(&self) -> T {
        let h = self.spacing();
        let four_pi = real::<T>(4.0) * T::PI();
        let mut acc = T::zero();
        for (k, a) in self.wave.iter().enumerate() {
            let r = h * real::<T>(k as f64);
            acc = acc + r * r * a.norm_sqr();
        }
        (four_pi * h * acc / real::<T>(3.0)).sqrt()
    }

    /// Fraction of the norm carried by the outer `fraction` of the radius;
    /// a bound state on an adequate grid leaves this negligible.
    pub fn boundary_fraction(&self, fraction: T) -> T {
        let start = ((T::one() - fraction) * real::<T>((self.n_points - 1) as f64))
            .to_f64()
            .unwrap_or(0.0) as usize;
        let tail: T = self.wave[start.min(self.n_points - 1)..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum();
        let total: T = self.wave.iter().map(|a| a.norm_sqr()).sum();
        tail / total
    }

    /// The density as a table usable by the two-lump self-energy integrals.
    pub fn radial_density(&self) -> Result<RadialDensity<T>> {
        RadialDensity::new(self.radii(), self.density())
    }
}

/// Newtonian potential samples sourced by the grid's own density.
#[derive(Debug, Clone)]
pub struct SNPotential<T: Real> {
    phi: Vec<T>,
}

impl<T: Real> SNPotential<T> {
    pub fn samples(&self) -> &[T] {
        &self.phi
    }

    pub fn at(&self, k: usize) -> T {
        self.phi[k]
    }
}

/// Solves (rΦ)″ = 4πGm|ψ|²r on the grid with Φ(0) finite and
/// Φ(r_max) = −Gm/r_max, by the tridiagonal (Thomas) elimination.
pub fn solve_poisson<T: Real>(grid: &RadialGrid<T>, g: T) -> Result<SNPotential<T>> {
    if !(g >= T::zero()) || !g.is_finite() {
        return Err(Error::invalid("g", "must be finite and ≥ 0"));
    }
    let n = grid.n_points();
    let h = grid.spacing();
    let m = grid.mass();
    if g == T::zero() {
        return Ok(SNPotential {
            phi: vec![T::zero(); n],
        });
    }
    let four_pi = real::<T>(4.0) * T::PI();
    // W = rΦ; source s = 4πGm|u|²/r, zero at the origin
    let mut source = vec![T::zero(); n];
    for k in 1..n {
        let r = h * real::<T>(k as f64);
        source[k] = four_pi * g * m * grid.wave()[k].norm_sqr() / r;
    }
    let w0 = T::zero();
    let w_end = -g * m;
    // interior unknowns W_1..W_{n-2}: W_{k-1} - 2W_k + W_{k+1} = h² s_k
    let interior = n - 2;
    let mut diag = vec![real::<T>(-2.0); interior];
    let mut rhs = vec![T::zero(); interior];
    for (j, slot) in rhs.iter_mut().enumerate() {
        *slot = h * h * source[j + 1];
    }
    rhs[0] = rhs[0] - w0;
    rhs[interior - 1] = rhs[interior - 1] - w_end;
    // Thomas elimination with unit off-diagonals
    for j in 1..interior {
        let w = T::one() / diag[j - 1];
        diag[j] = diag[j] - w;
        rhs[j] = rhs[j] - w * rhs[j - 1];
    }
    let mut w_sol = vec![T::zero(); interior];
    w_sol[interior - 1] = rhs[interior - 1] / diag[interior - 1];
    for j in (0..interior - 1).rev() {
        w_sol[j] = (rhs[j] - w_sol[j + 1]) / diag[j];
    }
    let mut phi = vec![T::zero(); n];
    for k in 1..n - 1 {
        let r = h * real::<T>(k as f64);
        phi[k] = w_sol[k - 1] / r;
    }
    phi[n - 1] = w_end / grid.r_max();
    // Φ(0) = W′(0), second-order one-sided with W(0) = 0
    phi[0] = (real::<T>(4.0) * w_sol[0] - w_sol[1]) / (real::<T>(2.0) * h);
    Ok(SNPotential { phi })
}

/// Max-norm residual of the discrete Poisson equation for a solved
/// potential: how far (rΦ)″ − 4πGm|ψ|²r is from zero at interior nodes.
pub fn poisson_residual<T: Real>(grid: &RadialGrid<T>, pot: &SNPotential<T>, g: T) -> T {
    let n = grid.n_points();
    let h = grid.spacing();
    let m = grid.mass();
    let four_pi = real::<T>(4.0) * T::PI();
    let mut worst = T::zero();
    for k in 1..n - 1 {
        let r = h * real::<T>(k as f64);
        let rm = h * real::<T>((k - 1) as f64);
        let rp = h * real::<T>((k + 1) as f64);
        let w_m = pot.at(k - 1) * rm;
        let w_0 = pot.at(k) * r;
        let w_p = pot.at(k + 1) * rp;
        let lhs = (w_m - real::<T>(2.0) * w_0 + w_p) / (h * h);
        let rhs = four_pi * g * m * grid.wave()[k].norm_sqr() / r;
        let dev = (lhs - rhs).abs();
        if dev > worst {
            worst = dev;
        }
    }
    worst
}

/// How the self-sourced potential is refreshed inside a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfConsistency {
    /// Potential from the pre-step density (lag of one step).
    Lagged,
    /// Fixed-point refinement: re-solve the step against the potential of
    /// the average of pre- and post-step densities, the given number of
    /// times.
    FixedPoint { iterations: usize },
}

fn total_potential<T: Real>(grid: &RadialGrid<T>, g: T) -> Result<Vec<T>> {
    let pot = if g > T::zero() {
        solve_poisson(grid, g)?.samples().to_vec()
    } else {
        vec![T::zero(); grid.n_points()]
    };
    Ok(grid
        .external()
        .iter()
        .zip(pot)
        .map(|(&v, p)| v + grid.mass() * p)
        .collect())
}

/// (H u)_k with H = −∂²/2m + pot, Dirichlet ends.
fn apply_h<T: Real>(u: &[C<T>], h: T, m: T, pot: &[T]) -> Vec<C<T>> {
    let n = u.len();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    let inv = T::one() / (real::<T>(2.0) * m * h * h);
    for k in 1..n - 1 {
        let lap = u[k - 1] - u[k] * real::<T>(2.0) + u[k + 1];
        out[k] = -lap * inv + u[k] * pot[k];
    }
    out
}

/// Solves the tridiagonal system with constant off-diagonal `off`, diagonal
/// `diag`, Dirichlet-zero ends, for the interior of `rhs`.
fn solve_tridiag<T: Real>(diag: &[C<T>], off: C<T>, rhs: &[C<T>]) -> Vec<C<T>> {
    let n = rhs.len();
    let interior = n - 2;
    let mut c = vec![Complex::new(T::zero(), T::zero()); interior];
    let mut d = vec![Complex::new(T::zero(), T::zero()); interior];
    c[0] = off / diag[1];
    d[0] = rhs[1] / diag[1];
    for j in 1..interior {
        let denom = diag[j + 1] - off * c[j - 1];
        c[j] = off / denom;
        d[j] = (rhs[j + 1] - off * d[j - 1]) / denom;
    }
    let mut x = vec![Complex::new(T::zero(), T::zero()); n];
    x[interior] = d[interior - 1];
    for j in (0..interior - 1).rev() {
        x[j + 1] = d[j] - c[j] * x[j + 2];
    }
    x
}

fn crank_nicolson_step<T: Real>(u: &[C<T>], h: T, m: T, pot: &[T], dt: T) -> Vec<C<T>> {
    let n = u.len();
    let half_dt = dt * real::<T>(0.5);
    let kin_diag = T::one() / (m * h * h);
    let kin_off = -T::one() / (real::<T>(2.0) * m * h * h);
    let i_half = Complex::new(T::zero(), half_dt);
    // rhs = (1 − i dt/2 H) u
    let hu = apply_h(u, h, m, pot);
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    for k in 1..n - 1 {
        rhs[k] = u[k] - i_half * hu[k];
    }
    // lhs diagonal 1 + i dt/2 (kin_diag + pot), off i dt/2 kin_off
    let one = Complex::new(T::one(), T::zero());
    let diag: Vec<C<T>> = pot
        .iter()
        .map(|&p| one + i_half * cre(kin_diag + p))
        .collect();
    solve_tridiag(&diag, i_half * cre(kin_off), &rhs)
}

/// Crank–Nicolson propagation over `steps` steps of size `dt`, the
/// self-sourced potential refreshed each step. Norm is watched per step;
/// a drift beyond 1e−6 in one step aborts.
pub fn evolve_real<T: Real>(
    grid: &RadialGrid<T>,
    dt: T,
    steps: usize,
    g: T,
    mode: SelfConsistency,
) -> Result<RadialGrid<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::invalid("dt", "must be positive and finite"));
    }
    let mut state = grid.clone();
    let h = state.spacing();
    let m = state.mass();
    let max_step_drift = real::<T>(1e-6);
    for step in 0..steps {
        let before = state.norm();
        let pot = total_potential(&state, g)?;
        let mut next = crank_nicolson_step(&state.wave, h, m, &pot, dt);
        if let SelfConsistency::FixedPoint { iterations } = mode {
            for _ in 0..iterations {
                let mut mid = state.clone();
                for (slot, (a, b)) in mid.wave.iter_mut().zip(state.wave.iter().zip(&next)) {
                    // density of the step midpoint, encoded through u
                    let avg = (a.norm_sqr() + b.norm_sqr()) * real::<T>(0.5);
                    *slot = cre(avg.sqrt());
                }
                let pot_mid = total_potential(&mid, g)?;
                next = crank_nicolson_step(&state.wave, h, m, &pot_mid, dt);
            }
        }
        state.wave = next;
        let after = state.norm();
        let drift = (after - before).abs();
        if !drift.is_finite() || drift > max_step_drift {
            return Err(Error::Unstable {
                what: "real-time evolution",
                detail: format!(
                    "norm drifted by {:e} in step {step}",
                    drift.to_f64().unwrap_or(f64::NAN)
                ),
            });
        }
    }
    Ok(state)
}

/// Energy bookkeeping for a self-gravitating state.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown<T: Real> {
    /// Total energy: kinetic + external + half the self-interaction.
    pub total: T,
    /// Single-particle eigenvalue ⟨H⟩ with the full self-potential.
    pub mu: T,
    pub kinetic: T,
    pub external: T,
    pub self_interaction: T,
}

/// Energies of the state in its own refreshed potential.
pub fn energy_breakdown<T: Real>(grid: &RadialGrid<T>, g: T) -> Result<EnergyBreakdown<T>> {
    let h = grid.spacing();
    let m = grid.mass();
    let four_pi_h = real::<T>(4.0) * T::PI() * h;
    let zero_pot = vec![T::zero(); grid.n_points()];
    let ku = apply_h(grid.wave(), h, m, &zero_pot);
    let mut kinetic = T::zero();
    for (a, b) in grid.wave().iter().zip(&ku) {
        kinetic = kinetic + (a.conj() * b).re;
    }
    kinetic = kinetic * four_pi_h;
    let mut external = T::zero();
    for (a, &v) in grid.wave().iter().zip(grid.external()) {
        external = external + a.norm_sqr() * v;
    }
    external = external * four_pi_h;
    let mut self_interaction = T::zero();
    if g > T::zero() {
        let pot = solve_poisson(grid, g)?;
        for (a, &p) in grid.wave().iter().zip(pot.samples()) {
            self_interaction = self_interaction + a.norm_sqr() * p;
        }
        self_interaction = self_interaction * four_pi_h * m;
    }
    let half = real::<T>(0.5);
    Ok(EnergyBreakdown {
        total: kinetic + external + half * self_interaction,
        mu: kinetic + external + self_interaction,
        kinetic,
        external,
        self_interaction,
    })
}

/// Options for the imaginary-time relaxation.
#[derive(Debug, Clone, Copy)]
pub struct GroundStateOptions<T: Real> {
    /// Imaginary-time step; when None, 1/(G²m⁵) capped at a stability
    /// fraction is used.
    pub dtau: Option<T>,
    pub max_iterations: usize,
    /// Stop once |ΔE| per step falls below this.
    pub energy_tol: T,
    /// Also require ∥(H − μ)ψ∥ at most this before accepting convergence;
    /// the energy can settle while a small excited admixture remains.
    pub residual_tol: T,
    /// Boundary norm fraction above which the converged state is rejected
    /// as unbound.
    pub tail_threshold: T,
}

impl<T: Real> Default for GroundStateOptions<T> {
    fn default() -> Self {
        Self {
            dtau: None,
            max_iterations: 100_000,
            energy_tol: real(1e-10),
            residual_tol: real(1e-7),
            tail_threshold: real(1e-3),
        }
    }
}

/// Result of the imaginary-time relaxation.
#[derive(Debug, Clone)]
pub struct GroundState<T: Real> {
    pub grid: RadialGrid<T>,
    pub energy: T,
    pub mu: T,
    pub iterations: usize,
    /// Total energy after every accepted step, for monotonicity checks.
    pub energy_history: Vec<T>,
}

/// Imaginary-time relaxation with per-step renormalisation and potential
/// refresh. The energy sequence is kept non-increasing by halving the step
/// whenever a step would raise it.
pub fn ground_state<T: Real>(
    template: &RadialGrid<T>,
    g: T,
    opts: GroundStateOptions<T>,
) -> Result<GroundState<T>> {
    if !(g > T::zero()) || !g.is_finite() {
        return Err(Error::invalid("g", "must be positive and finite"));
    }
    let m = template.mass();
    let scale = g * g * m.powi(5);
    let mut dtau = opts.dtau.unwrap_or_else(|| {
        // keep 1 + dτ·E₀ comfortably positive for the expected depth
        (T::one() / scale).min(real::<T>(1e6) / m)
    });
    if !(dtau > T::zero()) {
        return Err(Error::invalid("dtau", "must be positive"));
    }
    let mut state = template.clone();
    state.renormalize();
    let h = state.spacing();
    let kin_diag = T::one() / (m * h * h);
    let kin_off = -T::one() / (real::<T>(2.0) * m * h * h);
    let mut energy = energy_breakdown(&state, g)?.total;
    let mut history = vec![energy];
    let slack = real::<T>(1e-12);
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let pot = total_potential(&state, g)?;
        let one = Complex::new(T::one(), T::zero());
        let diag: Vec<C<T>> = pot
            .iter()
            .map(|&p| one + cre(dtau * (kin_diag + p)))
            .collect();
        let next = solve_tridiag(&diag, cre(dtau * kin_off), &state.wave);
        let mut candidate = state.clone();
        candidate.wave = next;
        candidate.renormalize();
        let e_next = energy_breakdown(&candidate, g)?.total;
        if e_next > energy + slack * (T::one() + energy.abs()) {
            // step too aggressive for the lagged potential; retry smaller
            dtau = dtau * real::<T>(0.5);
            if dtau < real::<T>(1e-12) / scale {
                return Err(Error::NoConvergence {
                    what: "imaginary-time relaxation",
                    iterations,
                    detail: "step size collapsed while enforcing energy descent".into(),
                });
            }
            continue;
        }
        let delta = energy - e_next;
        state = candidate;
        energy = e_next;
        history.push(energy);
        if delta < opts.energy_tol && stationary_residual(&state, g)? <= opts.residual_tol {
            let tail = state.boundary_fraction(real::<T>(0.2));
            if tail > opts.tail_threshold {
                return Err(Error::NoConvergence {
                    what: "ground state",
                    iterations,
                    detail: format!(
                        "converged state is not bound: boundary norm fraction {:e}",
                        tail.to_f64().unwrap_or(f64::NAN)
                    ),
                });
            }
            let mu = energy_breakdown(&state, g)?.mu;
            return Ok(GroundState {
                grid: state,
                energy,
                mu,
                iterations,
                energy_history: history,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "imaginary-time relaxation",
        iterations,
        detail: format!(
            "energy still moving by more than {:e} per step",
            opts.energy_tol.to_f64().unwrap_or(f64::NAN)
        ),
    })
}

/// Grid-norm residual ∥(H − μ)ψ∥ of a candidate stationary state in its
/// own potential.
pub fn stationary_residual<T: Real>(grid: &RadialGrid<T>, g: T) -> Result<T> {
    let h = grid.spacing();
    let m = grid.mass();
    let pot = total_potential(grid, g)?;
    let breakdown = energy_breakdown(grid, g)?;
    let hu = apply_h(grid.wave(), h, m, &pot);
    let four_pi_h = real::<T>(4.0) * T::PI() * h;
    let mut acc = T::zero();
    for (a, b) in grid.wave().iter().zip(&hu) {
        let r = *b - *a * breakdown.mu;
        acc = acc + r.norm_sqr();
    }
    Ok((four_pi_h * acc).sqrt())
}

/// Decoherence timescale 1/E_pen (natural units) of the state's density
/// against a copy of itself displaced by `displacement`.
pub fn pd_timescale<T: Real>(grid: &RadialGrid<T>, displacement: T, g: T) -> Result<T> {
    let density = grid.radial_density()?;
    let res =
        penrose_self_energy_tabulated(&density, grid.mass(), displacement, real::<T>(0.5), g)?;
    Ok(res.pd_decoherence_time)
}
