//! Natural-unit bookkeeping: everything internal is powers of GeV
//! (lengths and times in 1/GeV, masses and energies in GeV), with pinned
//! conversion factors to SI.

use crate::scalar::{real, Real};

/// 1 GeV⁻¹ expressed in meters.
pub const METERS_PER_INV_GEV: f64 = 1.9733e-16;
/// 1 second expressed in GeV⁻¹.
pub const INV_GEV_PER_SECOND: f64 = 1.5193e24;
/// 1 gram expressed in GeV.
pub const GEV_PER_GRAM: f64 = 5.6096e23;
/// Planck mass (non-reduced) in GeV.
pub const PLANCK_MASS_GEV: f64 = 1.2209e19;
/// Electron mass in GeV.
pub const ELECTRON_MASS_GEV: f64 = 5.11e-4;

/// Conversion table between SI quantities and the internal GeV powers.
#[derive(Debug, Clone, Copy)]
pub struct UnitSystem<T: Real> {
    pub meters_per_inv_gev: T,
    pub inv_gev_per_second: T,
    pub gev_per_gram: T,
    pub planck_mass: T,
}

impl<T: Real> Default for UnitSystem<T> {
    fn default() -> Self {
        Self::natural()
    }
}

impl<T: Real> UnitSystem<T> {
    pub fn natural() -> Self {
        Self {
            meters_per_inv_gev: real(METERS_PER_INV_GEV),
            inv_gev_per_second: real(INV_GEV_PER_SECOND),
            gev_per_gram: real(GEV_PER_GRAM),
            planck_mass: real(PLANCK_MASS_GEV),
        }
    }

    /// Newton's constant, 1/m_planck².
    pub fn gravitational_constant(&self) -> T {
        T::one() / (self.planck_mass * self.planck_mass)
    }

    pub fn length_from_meters(&self, meters: T) -> T {
        meters / self.meters_per_inv_gev
    }

    pub fn length_to_meters(&self, inv_gev: T) -> T {
        inv_gev * self.meters_per_inv_gev
    }

    pub fn time_from_seconds(&self, seconds: T) -> T {
        seconds * self.inv_gev_per_second
    }

    pub fn time_to_seconds(&self, inv_gev: T) -> T {
        inv_gev / self.inv_gev_per_second
    }

    pub fn mass_from_grams(&self, grams: T) -> T {
        grams * self.gev_per_gram
    }

    pub fn mass_to_grams(&self, gev: T) -> T {
        gev / self.gev_per_gram
    }

    pub fn mass_from_kilograms(&self, kg: T) -> T {
        self.mass_from_grams(kg * real(1e3))
    }

    pub fn mass_to_kilograms(&self, gev: T) -> T {
        self.mass_to_grams(gev) * real(1e-3)
    }
}

/// Newton's constant in natural units.
pub fn gravitational_constant<T: Real>() -> T {
    UnitSystem::natural().gravitational_constant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_are_identity() {
        let u = UnitSystem::<f64>::natural();
        for x in [1.0, 3.7e-12, 9.1e27, 5.11e-4] {
            assert!((u.length_to_meters(u.length_from_meters(x)) / x - 1.0).abs() <= 1e-12);
            assert!((u.time_to_seconds(u.time_from_seconds(x)) / x - 1.0).abs() <= 1e-12);
            assert!((u.mass_to_grams(u.mass_from_grams(x)) / x - 1.0).abs() <= 1e-12);
            assert!((u.mass_to_kilograms(u.mass_from_kilograms(x)) / x - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn gravitational_constant_inverse_square_planck_mass() {
        let u = UnitSystem::<f64>::natural();
        let g = u.gravitational_constant();
        assert!((g * PLANCK_MASS_GEV * PLANCK_MASS_GEV - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn electron_mass_cross_check() {
        // 9.109e-28 g should land on 0.511 MeV within the precision of the
        // pinned factors
        let u = UnitSystem::<f64>::natural();
        let m = u.mass_from_grams(9.109e-28);
        assert!((m / 5.110e-4 - 1.0).abs() <= 1e-3, "m = {m}");
    }

    #[test]
    fn femtometer_scale() {
        let u = UnitSystem::<f64>::natural();
        // 1 fm ≈ 5.068 GeV⁻¹
        let fm = u.length_from_meters(1e-15);
        assert!((fm / 5.0677 - 1.0).abs() <= 1e-3, "fm = {fm}");
    }
}
