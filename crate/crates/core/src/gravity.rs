//! Newtonian potentials of smeared mass lumps, collapse-time estimators,
//! experiment-scale predictions, and the gravitational self-energy of the
//! density difference between two branches (the decoherence-model
//! comparison quantity).
//!
//! Everything here works in natural units (GeV powers, see [`crate::units`]).

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::{real, Real};
use crate::units::{UnitSystem, ELECTRON_MASS_GEV};

/// Radial mass-density shape with unit total mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassProfile<T: Real> {
    /// Constant density inside `radius`, zero outside.
    UniformSphere { radius: T },
    /// exp(−r²/2σ²) density with width σ.
    Gaussian { width: T },
}

impl<T: Real> MassProfile<T> {
    pub fn validate(&self) -> Result<()> {
        let s = self.scale();
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::invalid(
                "profile",
                "smearing scale must be positive and finite",
            ));
        }
        Ok(())
    }

    /// The length parameter (sphere radius or Gaussian width).
    pub fn scale(&self) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => radius,
            MassProfile::Gaussian { width } => width,
        }
    }

    /// Radius beyond which the density is zero or negligible.
    pub fn support_radius(&self) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => radius,
            MassProfile::Gaussian { width } => real::<T>(12.0) * width,
        }
    }

    /// Unit-mass density ρ̂(r), normalised so 4π∫ρ̂ r² dr = 1.
    pub fn unit_density(&self, r: T) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => {
                if r <= radius {
                    real::<T>(3.0) / (real::<T>(4.0) * T::PI() * radius.powi(3))
                } else {
                    T::zero()
                }
            }
            MassProfile::Gaussian { width } => {
                let x = r / width;
                (-x * x / real::<T>(2.0)).exp()
                    / ((real::<T>(2.0) * T::PI()).powf(real::<T>(1.5)) * width.powi(3))
            }
        }
    }

    /// φ̂(r) = ∫ ρ̂(y)/|x−y| d³y, so the potential is Φ(r) = −G m φ̂(r).
    pub fn unit_potential(&self, r: T) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => {
                if r >= radius {
                    T::one() / r
                } else {
                    (real::<T>(3.0) * radius * radius - r * r) / (real::<T>(2.0) * radius.powi(3))
                }
            }
            MassProfile::Gaussian { width } => {
                let x = r / (width * real::<T>(2.0).sqrt());
                if x < real::<T>(1e-4) {
                    // erf(x)/r expanded around the centre
                    (real::<T>(2.0) / T::PI().sqrt()) / (width * real::<T>(2.0).sqrt())
                        * (T::one() - x * x / real::<T>(3.0))
                } else {
                    Real::erf(x) / r
                }
            }
        }
    }

    /// Fraction of the mass enclosed within radius r.
    pub fn enclosed_fraction(&self, r: T) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => {
                if r >= radius {
                    T::one()
                } else {
                    (r / radius).powi(3)
                }
            }
            MassProfile::Gaussian { width } => {
                let x = r / (width * real::<T>(2.0).sqrt());
                Real::erf(x)
                    - (real::<T>(2.0) / T::PI()).sqrt()
                        * (r / width)
                        * (-r * r / (real::<T>(2.0) * width * width)).exp()
            }
        }
    }

    /// F(s) = ∫₀^s s′ φ̂(s′) ds′, the kernel antiderivative used by the
    /// bipolar reduction of two-lump integrals.
    pub fn f_antiderivative(&self, s: T) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => {
                if s <= radius {
                    let three = real::<T>(3.0);
                    three * s * s / (real::<T>(4.0) * radius)
                        - s.powi(4) / (real::<T>(8.0) * radius.powi(3))
                } else {
                    s - real::<T>(3.0) * radius / real::<T>(8.0)
                }
            }
            MassProfile::Gaussian { width } => {
                let x = s / (width * real::<T>(2.0).sqrt());
                s * Real::erf(x)
                    + width * (real::<T>(2.0) / T::PI()).sqrt() * ((-x * x).exp() - T::one())
            }
        }
    }

    /// W_self = ∫∫ ρ̂(x)ρ̂(y)/|x−y|, the self-interaction weight.
    pub fn self_weight(&self) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => real::<T>(6.0) / (real::<T>(5.0) * radius),
            MassProfile::Gaussian { width } => T::one() / (width * T::PI().sqrt()),
        }
    }

    /// Potential depth |Φ̂(0)| per unit mass (times G): φ̂(0).
    pub fn centre_potential(&self) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => real::<T>(1.5) / radius,
            MassProfile::Gaussian { width } => (real::<T>(2.0) / T::PI()).sqrt() / width,
        }
    }

    /// |⟨ψ|ψ_d⟩| for the wavepacket this density belongs to, displaced by d.
    pub fn displaced_overlap(&self, d: T) -> T {
        match *self {
            MassProfile::UniformSphere { radius } => {
                let two_r = real::<T>(2.0) * radius;
                if d >= two_r {
                    T::zero()
                } else {
                    // lens-volume fraction of two equal balls
                    (two_r - d) * (two_r - d) * (d + real::<T>(4.0) * radius)
                        / (real::<T>(16.0) * radius.powi(3))
                }
            }
            MassProfile::Gaussian { width } => (-d * d / (real::<T>(8.0) * width * width)).exp(),
        }
    }
}

/// W_ab(d) = ∫∫ ρ̂_a(x) ρ̂_b(y) / |x − y − d ẑ|: the mutual weight of two
/// unit-mass lumps with centres separated by d.
///
/// Evaluated by reducing the angular integral to the kernel antiderivative
/// F_b and integrating the remaining radial integral adaptively, split at
/// the integrand's kink radii.
pub fn cross_weight<T: Real>(a: &MassProfile<T>, b: &MassProfile<T>, d: T) -> Result<T> {
    a.validate()?;
    b.validate()?;
    if !(d >= T::zero()) || !d.is_finite() {
        return Err(Error::invalid("separation", "must be finite and ≥ 0"));
    }
    let cut = a.support_radius();
    let tol = real::<T>(1e-11);
    let four_pi = real::<T>(4.0) * T::PI();
    let tiny = cut * real::<T>(1e-9);
    if d <= tiny {
        // coincident centres: the angular average collapses to φ̂_b(r)
        let f = |r: T| four_pi * r * r * a.unit_density(r) * b.unit_potential(r);
        return Ok(integrate_with_breaks(
            &f,
            T::zero(),
            cut,
            &kink_radii(b, T::zero()),
            tol,
        ));
    }
    let f = |r: T| {
        r * a.unit_density(r) * (b.f_antiderivative(r + d) - b.f_antiderivative((r - d).abs()))
    };
    let mut breaks = kink_radii(b, d);
    breaks.push(d);
    let raw = integrate_with_breaks(&f, T::zero(), cut, &breaks, tol);
    Ok(real::<T>(2.0) * T::PI() / d * raw)
}

/// Radii where the integrand of [`cross_weight`] loses smoothness.
fn kink_radii<T: Real>(b: &MassProfile<T>, d: T) -> Vec<T> {
    match *b {
        MassProfile::UniformSphere { radius } => {
            vec![radius - d, d - radius, d + radius, radius]
        }
        MassProfile::Gaussian { .. } => Vec::new(),
    }
}

fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T, breaks: &[T], tol: T) -> T {
    let mut pts: Vec<T> = breaks
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let gap = (hi - lo) * real::<T>(1e-12);
    pts.dedup_by(|x, y| (*x - *y).abs() <= gap);
    let mut total = T::zero();
    for pair in pts.windows(2) {
        total = total + quad::adaptive_simpson(f, pair[0], pair[1], tol);
    }
    total
}

/// Which smearing shape a configuration uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    UniformSphere,
    Gaussian,
}

/// A mass split across two displaced branch locations: total mass,
/// constituent bookkeeping, and the smeared per-constituent density shape.
#[derive(Debug, Clone, Copy)]
pub struct MassConfiguration<T: Real> {
    total_mass: T,
    n_constituents: u64,
    entangled_fraction: T,
    smearing_radius: T,
    displacement: T,
    kind: ProfileKind,
}

impl<T: Real> MassConfiguration<T> {
    pub fn new(
        total_mass: T,
        n_constituents: u64,
        entangled_fraction: T,
        smearing_radius: T,
        displacement: T,
        kind: ProfileKind,
    ) -> Result<Self> {
        if !(total_mass >= T::zero()) || !total_mass.is_finite() {
            return Err(Error::invalid("total_mass", "must be finite and ≥ 0"));
        }
        if n_constituents == 0 {
            return Err(Error::invalid("n_constituents", "must be ≥ 1"));
        }
        if !(entangled_fraction >= T::zero() && entangled_fraction <= T::one()) {
            return Err(Error::invalid("entangled_fraction", "must lie in [0, 1]"));
        }
        if !(smearing_radius > T::zero()) || !smearing_radius.is_finite() {
            return Err(Error::invalid("smearing_radius", "must be positive"));
        }
        if !(displacement >= T::zero()) || !displacement.is_finite() {
            return Err(Error::invalid("displacement", "must be finite and ≥ 0"));
        }
        Ok(Self {
            total_mass,
            n_constituents,
            entangled_fraction,
            smearing_radius,
            displacement,
            kind,
        })
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    pub fn n_constituents(&self) -> u64 {
        self.n_constituents
    }

    pub fn entangled_fraction(&self) -> T {
        self.entangled_fraction
    }

    pub fn smearing_radius(&self) -> T {
        self.smearing_radius
    }

    pub fn displacement(&self) -> T {
        self.displacement
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn constituent_mass(&self) -> T {
        self.total_mass / real::<T>(self.n_constituents as f64)
    }

    pub fn coherent_mass(&self) -> T {
        self.total_mass * self.entangled_fraction
    }

    pub fn profile(&self) -> MassProfile<T> {
        match self.kind {
            ProfileKind::UniformSphere => MassProfile::UniformSphere {
                radius: self.smearing_radius,
            },
            ProfileKind::Gaussian => MassProfile::Gaussian {
                width: self.smearing_radius,
            },
        }
    }
}

/// Φ(r) of the whole configuration's density centred at the origin,
/// in natural units. Finite everywhere; −Gm/r outside the smearing scale.
pub fn newtonian_potential<T: Real>(cfg: &MassConfiguration<T>, r: T) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(Error::invalid("r", "radius must be ≥ 0"));
    }
    let g = crate::units::gravitational_constant::<T>();
    Ok(-g * cfg.total_mass() * cfg.profile().unit_potential(r))
}

/// Per-constituent potential difference between the two branch locations,
/// in the two estimator conventions.
#[derive(Debug, Clone, Copy)]
pub struct Phi12Estimate<T: Real> {
    /// 2 |Φ_c(0)| per entangled constituent, scaled by the entangled
    /// fraction: the profile-resolved value.
    pub value: T,
    /// G·m_c/R scaling form (the order-of-magnitude estimator used by the
    /// headline numbers), same fraction scaling.
    pub order_of_magnitude: T,
    /// Branch separation does not clear twice the smearing radius; the
    /// orthogonal-branch picture is marginal and the value approximate.
    pub overlapping: bool,
}

/// Potential difference per constituent, cross-terms between distant
/// branches dropped.
pub fn phi12<T: Real>(cfg: &MassConfiguration<T>) -> Phi12Estimate<T> {
    let g = crate::units::gravitational_constant::<T>();
    let m_c = cfg.constituent_mass();
    let frac = cfg.entangled_fraction();
    let overlapping = cfg.displacement() <= real::<T>(2.0) * cfg.smearing_radius();
    if overlapping {
        log::warn!(
            "branch displacement {:e} does not clear twice the smearing radius {:e}; \
             potential-difference estimate treats the branches as orthogonal anyway",
            cfg.displacement().to_f64().unwrap_or(f64::NAN),
            cfg.smearing_radius().to_f64().unwrap_or(f64::NAN)
        );
    }
    Phi12Estimate {
        value: real::<T>(2.0) * g * m_c * cfg.profile().centre_potential() * frac,
        order_of_magnitude: g * m_c / cfg.smearing_radius() * frac,
        overlapping,
    }
}

/// Collapse-time estimate for a configuration, in both estimator
/// conventions.
#[derive(Debug, Clone, Copy)]
pub struct CollapseEstimate<T: Real> {
    /// Seconds, from the order-of-magnitude potential estimator.
    pub tau_seconds: T,
    /// Seconds, from the profile-resolved potential depth.
    pub tau_refined_seconds: T,
    pub phi12: Phi12Estimate<T>,
    /// Massless or fully decoherence-free input: no collapse ever.
    pub no_collapse: bool,
}

/// τ = 1/(m_total · Φ12) converted to seconds. Zero mass or zero entangled
/// fraction yields the no-collapse sentinel (infinite times).
pub fn collapse_time<T: Real>(
    cfg: &MassConfiguration<T>,
    units: &UnitSystem<T>,
) -> CollapseEstimate<T> {
    let est = phi12(cfg);
    let rate_om = cfg.total_mass() * est.order_of_magnitude;
    let rate_refined = cfg.total_mass() * est.value;
    if rate_om <= T::zero() {
        return CollapseEstimate {
            tau_seconds: T::infinity(),
            tau_refined_seconds: T::infinity(),
            phi12: est,
            no_collapse: true,
        };
    }
    CollapseEstimate {
        tau_seconds: units.time_to_seconds(T::one() / rate_om),
        tau_refined_seconds: units.time_to_seconds(T::one() / rate_refined),
        phi12: est,
        no_collapse: false,
    }
}

/// Mass needed for a target collapse time.
#[derive(Debug, Clone, Copy)]
pub struct RequiredMass<T: Real> {
    pub coherent_grams: T,
    pub total_grams: T,
}

/// Inverts the phase condition τ · m_coherent · Φ12_constituent = 1 for a
/// constituent template (per-constituent mass, smearing, displacement).
pub fn required_mass<T: Real>(
    target_tau_seconds: T,
    template: &MassConfiguration<T>,
    units: &UnitSystem<T>,
) -> Result<RequiredMass<T>> {
    if !(target_tau_seconds > T::zero()) {
        return Err(Error::invalid("target_tau", "must be positive"));
    }
    let g = units.gravitational_constant();
    let m_c = template.constituent_mass();
    let phi_c = g * m_c / template.smearing_radius();
    if phi_c <= T::zero() {
        return Err(Error::invalid(
            "template",
            "constituent mass must be positive",
        ));
    }
    let tau_nat = units.time_from_seconds(target_tau_seconds);
    let coherent = T::one() / (tau_nat * phi_c);
    let frac = template.entangled_fraction();
    let total = if frac > T::zero() {
        coherent / frac
    } else {
        T::infinity()
    };
    Ok(RequiredMass {
        coherent_grams: units.mass_to_grams(coherent),
        total_grams: units.mass_to_grams(total),
    })
}

/// How qubit count feeds the collective phase rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitScaling {
    /// All qubits in one entangled register: rate linear in count.
    Entangled,
    /// Mutually product qubits: residual grows like √count.
    Product,
}

/// Number of qubits (each holding `electrons_per_qubit` superposed
/// electrons) needed to reach unit phase within the target time.
pub fn qubit_estimate<T: Real>(
    electrons_per_qubit: u64,
    target_tau_seconds: T,
    scaling: QubitScaling,
    units: &UnitSystem<T>,
) -> Result<T> {
    if electrons_per_qubit == 0 {
        return Err(Error::invalid("electrons_per_qubit", "must be ≥ 1"));
    }
    if !(target_tau_seconds > T::zero()) {
        return Err(Error::invalid("target_tau", "must be positive"));
    }
    let m_e = real::<T>(ELECTRON_MASS_GEV);
    let g = units.gravitational_constant();
    let tau_nat = units.time_from_seconds(target_tau_seconds);
    // per electron, localised at its Compton scale R = 1/m: Φ12 ~ G m²
    let per_electron_rate = m_e * g * m_e * m_e;
    let n_e = real::<T>(electrons_per_qubit as f64);
    let entangled = T::one() / (tau_nat * n_e * per_electron_rate);
    Ok(match scaling {
        QubitScaling::Entangled => entangled,
        // √N qubits' worth of phase rate must reach the same threshold
        QubitScaling::Product => entangled * entangled,
    })
}

/// One branch's mass lump for self-energy integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassLump<T: Real> {
    pub mass: T,
    pub profile: MassProfile<T>,
}

impl<T: Real> MassLump<T> {
    pub fn new(mass: T, profile: MassProfile<T>) -> Result<Self> {
        if !(mass >= T::zero()) || !mass.is_finite() {
            return Err(Error::invalid("mass", "must be finite and ≥ 0"));
        }
        profile.validate()?;
        Ok(Self { mass, profile })
    }
}

/// Gravitational self-energy of the branch density difference and derived
/// quantities.
#[derive(Debug, Clone, Copy)]
pub struct SelfEnergyResult<T: Real> {
    /// G ∫∫ δρ(x) δρ(y) / |x−y|, with δρ the density difference between
    /// the branches.
    pub e_pen: T,
    /// Operator-variance form under the branch-diagonal correlation model:
    /// p(1−p)·e_pen for branch weight p.
    pub e_var: T,
    /// 1/e_pen in natural units (GeV⁻¹): the decoherence-model timescale.
    pub pd_decoherence_time: T,
}

/// Self-energy of δρ = ρ_a − ρ_b for lumps separated by `separation`,
/// with branch weight `branch_prob` on the first branch.
pub fn penrose_self_energy<T: Real>(
    a: &MassLump<T>,
    b: &MassLump<T>,
    separation: T,
    branch_prob: T,
    g: T,
) -> Result<SelfEnergyResult<T>> {
    if !(g > T::zero()) {
        return Err(Error::invalid(
            "g",
            "gravitational constant must be positive",
        ));
    }
    if !(branch_prob >= T::zero() && branch_prob <= T::one()) {
        return Err(Error::invalid("branch_prob", "must lie in [0, 1]"));
    }
    if !(separation >= T::zero()) || !separation.is_finite() {
        return Err(Error::invalid("separation", "must be finite and ≥ 0"));
    }
    let e_pen = if separation == T::zero() && a == b {
        // identical branches: δρ ≡ 0
        T::zero()
    } else {
        let waa = a.profile.self_weight();
        let wbb = b.profile.self_weight();
        let wab = cross_weight(&a.profile, &b.profile, separation)?;
        let raw = g
            * (a.mass * a.mass * waa + b.mass * b.mass * wbb
                - real::<T>(2.0) * a.mass * b.mass * wab);
        // the quadratic form is non-negative; clip quadrature noise
        raw.max(T::zero())
    };
    let p = branch_prob;
    Ok(SelfEnergyResult {
        e_pen,
        e_var: p * (T::one() - p) * e_pen,
        pd_decoherence_time: if e_pen > T::zero() {
            T::one() / e_pen
        } else {
            T::infinity()
        },
    })
}

/// Same self-energy through the field-gradient form
/// E = (1/2G) ∫∫ |∇δΦ|² ρ_cyl dρ_cyl dz (axially symmetric): an
/// independent evaluation route for cross-checking the double integral.
///
/// Accuracy degrades when the lump masses differ (the uncancelled monopole
/// tail converges slowly in the truncated domain); use equal masses for
/// tight comparisons.
pub fn penrose_self_energy_gradient_form<T: Real>(
    a: &MassLump<T>,
    b: &MassLump<T>,
    separation: T,
    g: T,
) -> Result<T> {
    if !(g > T::zero()) {
        return Err(Error::invalid(
            "g",
            "gravitational constant must be positive",
        ));
    }
    if !(separation >= T::zero()) || !separation.is_finite() {
        return Err(Error::invalid("separation", "must be finite and ≥ 0"));
    }
    a.profile.validate()?;
    b.profile.validate()?;
    let d = separation;
    let span = d + a.profile.scale() + b.profile.scale();
    let reach = real::<T>(50.0) * span;
    let tiny = span * real::<T>(1e-12);
    // radial force magnitude of one lump at distance r from its centre
    let force = |lump: &MassLump<T>, r: T| -> T {
        if r <= tiny {
            T::zero()
        } else {
            g * lump.mass * lump.profile.enclosed_fraction(r) / (r * r)
        }
    };
    let integrand = |rho: T, z: T| -> T {
        let r0 = (rho * rho + z * z).sqrt();
        let dz1 = z - d;
        let r1 = (rho * rho + dz1 * dz1).sqrt();
        let fa = force(a, r0);
        let fb = force(b, r1);
        let (ar, az) = if r0 <= tiny {
            (T::zero(), T::zero())
        } else {
            (fa * rho / r0, fa * z / r0)
        };
        let (br, bz) = if r1 <= tiny {
            (T::zero(), T::zero())
        } else {
            (fb * rho / r1, fb * dz1 / r1)
        };
        let gr = ar - br;
        let gz = az - bz;
        (gr * gr + gz * gz) * rho
    };
    let inner_tol = real::<T>(1e-9);
    let outer_tol = real::<T>(1e-8);
    let surfaces = [a.profile.scale(), b.profile.scale()];
    let outer = |z: T| -> T {
        // kinks in ρ where either sphere surface is crossed at this z
        let mut breaks = Vec::new();
        for (centre, s) in [(T::zero(), surfaces[0]), (d, surfaces[1])] {
            let dz = z - centre;
            let h2 = s * s - dz * dz;
            if h2 > T::zero() {
                breaks.push(h2.sqrt());
            }
        }
        integrate_with_breaks(
            &|rho| integrand(rho, z),
            T::zero(),
            reach,
            &breaks,
            inner_tol,
        )
    };
    let z_breaks = [
        -surfaces[0],
        surfaces[0],
        d - surfaces[1],
        d + surfaces[1],
        T::zero(),
        d,
    ];
    let raw = integrate_with_breaks(&outer, -reach, d + reach, &z_breaks, outer_tol);
    Ok(raw / (real::<T>(2.0) * g))
}

/// One row of the model-vs-decoherence distance scan.
#[derive(Debug, Clone, Copy)]
pub struct PdComparisonRow<T: Real> {
    pub separation: T,
    /// This model's phase rate m_total·Φ12·(1 − overlap²), natural units.
    pub penrose_phase_rate: T,
    /// The decoherence model's self-energy at this separation.
    pub e_pen: T,
}

/// Scans branch separation: the phase rate saturates once the branches
/// stop overlapping, while e_pen keeps approaching its asymptote like 1/d.
pub fn pd_comparison<T: Real>(
    cfg: &MassConfiguration<T>,
    separations: &[T],
) -> Result<Vec<PdComparisonRow<T>>> {
    if separations.is_empty() {
        return Err(Error::invalid(
            "separations",
            "need at least one separation",
        ));
    }
    let g = crate::units::gravitational_constant::<T>();
    let est = phi12(cfg);
    let base_rate = cfg.total_mass() * est.order_of_magnitude;
    let profile = cfg.profile();
    let lump = MassLump::new(cfg.total_mass(), profile)?;
    let mut rows = Vec::with_capacity(separations.len());
    for &d in separations {
        if !(d >= T::zero()) || !d.is_finite() {
            return Err(Error::invalid("separations", "must be finite and ≥ 0"));
        }
        let s = profile.displaced_overlap(d);
        let rate = base_rate * (T::one() - s * s);
        let e_pen = if d == T::zero() {
            T::zero()
        } else {
            penrose_self_energy(&lump, &lump, d, real::<T>(0.5), g)?.e_pen
        };
        rows.push(PdComparisonRow {
            separation: d,
            penrose_phase_rate: rate,
            e_pen,
        });
    }
    Ok(rows)
}

/// Tabulated radial unit-mass density, e.g. a solver output, for
/// self-energy integrals that have no closed-form profile.
#[derive(Debug, Clone)]
pub struct RadialDensity<T: Real> {
    r: Vec<T>,
    rho: Vec<T>,
    /// F(s) = ∫₀^s s′ φ̂(s′) ds′ tabulated on the same grid.
    f_table: Vec<T>,
    w_self: T,
}

impl<T: Real> RadialDensity<T> {
    /// Builds the kernel tables from density samples on a uniform radial
    /// grid starting at r = 0. The density is renormalised to unit mass.
    pub fn new(r: Vec<T>, rho: Vec<T>) -> Result<Self> {
        if r.len() != rho.len() {
            return Err(Error::DimensionMismatch {
                left: r.len(),
                right: rho.len(),
                context: "radial density table",
            });
        }
        if r.len() < 8 {
            return Err(Error::TooFewNodes {
                got: r.len(),
                need: 8,
            });
        }
        if r[0] != T::zero() {
            return Err(Error::invalid("r", "grid must start at r = 0"));
        }
        if !quad::is_uniform(&r) {
            return Err(Error::invalid("r", "grid must be uniform"));
        }
        for &v in &rho {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::invalid("rho", "density must be finite and ≥ 0"));
            }
        }
        let four_pi = real::<T>(4.0) * T::PI();
        let shell: Vec<T> = r
            .iter()
            .zip(&rho)
            .map(|(&ri, &pi)| four_pi * ri * ri * pi)
            .collect();
        let mass = quad::integrate_samples(&r, &shell)?;
        if !(mass > T::zero()) {
            return Err(Error::invalid("rho", "density integrates to zero mass"));
        }
        let rho: Vec<T> = rho.iter().map(|&p| p / mass).collect();

        // enclosed mass M(r) and outer moment O(r) = 4π ∫_r^∞ s ρ̂ ds
        let shell: Vec<T> = r
            .iter()
            .zip(&rho)
            .map(|(&ri, &pi)| four_pi * ri * ri * pi)
            .collect();
        let m_cum = quad::cumulative_trapezoid(&r, &shell)?;
        let ring: Vec<T> = r
            .iter()
            .zip(&rho)
            .map(|(&ri, &pi)| four_pi * ri * pi)
            .collect();
        let ring_cum = quad::cumulative_trapezoid(&r, &ring)?;
        let ring_total = *ring_cum.last().unwrap();
        let n = r.len();
        let mut phi = vec![T::zero(); n];
        for k in 0..n {
            let outer = ring_total - ring_cum[k];
            phi[k] = if k == 0 {
                // centre: the 1/r factor cancels against M ~ r³
                outer
            } else {
                m_cum[k] / r[k] + outer
            };
        }
        // kernel antiderivative F and the self weight
        let sphi: Vec<T> = r.iter().zip(&phi).map(|(&ri, &pi)| ri * pi).collect();
        let f_table = quad::cumulative_trapezoid(&r, &sphi)?;
        let wself_integrand: Vec<T> = shell.iter().zip(&phi).map(|(&sh, &p)| sh * p).collect();
        let w_self = quad::integrate_samples(&r, &wself_integrand)?;
        Ok(Self {
            r,
            rho,
            f_table,
            w_self,
        })
    }

    pub fn radii(&self) -> &[T] {
        &self.r
    }

    pub fn density(&self) -> &[T] {
        &self.rho
    }

    pub fn w_self(&self) -> T {
        self.w_self
    }

    fn r_max(&self) -> T {
        *self.r.last().unwrap()
    }

    /// F(s) by linear interpolation inside the table, analytic 1/s-kernel
    /// continuation beyond it.
    fn f_at(&self, s: T) -> T {
        let r_max = self.r_max();
        if s >= r_max {
            return *self.f_table.last().unwrap() + (s - r_max);
        }
        let h = self.r[1] - self.r[0];
        let pos = s / h;
        let k = pos.to_f64().unwrap_or(0.0).floor() as usize;
        let k = k.min(self.r.len() - 2);
        let w = (s - self.r[k]) / h;
        self.f_table[k] * (T::one() - w) + self.f_table[k + 1] * w
    }

    /// W(d) = ∫∫ ρ̂(x) ρ̂(y)/|x − y − d ẑ| for the density against a copy
    /// of itself displaced by d.
    pub fn w_cross(&self, d: T) -> Result<T> {
        if !(d >= T::zero()) || !d.is_finite() {
            return Err(Error::invalid("separation", "must be finite and ≥ 0"));
        }
        if d == T::zero() {
            return Ok(self.w_self);
        }
        let n = self.r.len();
        let mut vals = Vec::with_capacity(n);
        for k in 0..n {
            let rk = self.r[k];
            let delta = self.f_at(rk + d) - self.f_at((rk - d).abs());
            vals.push(rk * self.rho[k] * delta);
        }
        let raw = quad::integrate_samples(&self.r, &vals)?;
        Ok(real::<T>(2.0) * T::PI() / d * raw)
    }
}

/// Self-energy of a tabulated density against its own displaced copy.
pub fn penrose_self_energy_tabulated<T: Real>(
    density: &RadialDensity<T>,
    mass: T,
    separation: T,
    branch_prob: T,
    g: T,
) -> Result<SelfEnergyResult<T>> {
    if !(mass >= T::zero()) || !mass.is_finite() {
        return Err(Error::invalid("mass", "must be finite and ≥ 0"));
    }
    if !(branch_prob >= T::zero() && branch_prob <= T::one()) {
        return Err(Error::invalid("branch_prob", "must lie in [0, 1]"));
    }
    let e_pen = if separation == T::zero() {
        T::zero()
    } else {
        let w = density.w_cross(separation)?;
        (real::<T>(2.0) * g * mass * mass * (density.w_self() - w)).max(T::zero())
    };
    let p = branch_prob;
    Ok(SelfEnergyResult {
        e_pen,
        e_var: p * (T::one() - p) * e_pen,
        pd_decoherence_time: if e_pen > T::zero() {
            T::one() / e_pen
        } else {
            T::infinity()
        },
    })
}
