//! Sharma–Mittal entropy family and the speed-limit weight function.
//!
//! All entropies are in nats and depend only on the spectrum. Evaluation goes
//! through `h_q − 1 = Σ λ (λ^{q−1} − 1)` computed with `expm1`, so the direct
//! two-parameter formula stays accurate arbitrarily close to the Rényi,
//! Tsallis and von Neumann limit lines.

use crate::error::{Error, Result};

/// Distance from a limit line below which the limit form is used.
pub const LIMIT_THRESHOLD: f64 = 1e-7;
/// Spectrum entries at or below this are exact zeros.
pub const SPECTRUM_ZERO: f64 = 1e-14;
/// Below this argument the weight function is reported as divergent.
pub const WEIGHT_FLOOR: f64 = 1e-12;
const SPECTRUM_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyKind {
    SharmaMittal,
    /// `z → 1`
    Renyi,
    /// `z → q`
    Tsallis,
    /// `q, z → 1`
    VonNeumann,
}

/// Entropy parameters `(q, z)` with the limit line they sit on, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParams {
    q: f64,
    z: f64,
    kind: EntropyKind,
}

impl EntropyParams {
    /// Classifies `(q, z)` against the limit lines.
    pub fn new(q: f64, z: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() || !z.is_finite() {
            return Err(Error::InvalidParams {
                q,
                z,
                reason: "q must be positive and finite",
            });
        }
        let near_q1 = (q - 1.0).abs() < LIMIT_THRESHOLD;
        let near_z1 = (z - 1.0).abs() < LIMIT_THRESHOLD;
        let kind = if near_q1 && near_z1 {
            EntropyKind::VonNeumann
        } else if near_q1 {
            return Err(Error::InvalidParams {
                q,
                z,
                reason: "q = 1 is only defined jointly with z = 1",
            });
        } else if near_z1 {
            EntropyKind::Renyi
        } else if (z - q).abs() < LIMIT_THRESHOLD {
            EntropyKind::Tsallis
        } else {
            EntropyKind::SharmaMittal
        };
        Ok(Self { q, z, kind })
    }

    pub fn renyi(q: f64) -> Result<Self> {
        Self::new(q, 1.0)
    }

    pub fn tsallis(q: f64) -> Result<Self> {
        Self::new(q, q)
    }

    pub fn von_neumann() -> Self {
        Self {
            q: 1.0,
            z: 1.0,
            kind: EntropyKind::VonNeumann,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn kind(&self) -> EntropyKind {
        self.kind
    }

    /// Whether the speed-limit bounds apply: `0 < q < 1` and `q ≤ z ≤ 1`,
    /// the end points reached through the Tsallis and Rényi limits.
    pub fn qsl_valid(&self) -> bool {
        if !(self.q > 0.0 && self.q < 1.0) {
            return false;
        }
        match self.kind {
            EntropyKind::Renyi | EntropyKind::Tsallis => true,
            EntropyKind::SharmaMittal => self.q < self.z && self.z < 1.0,
            EntropyKind::VonNeumann => false,
        }
    }

    /// True on the `z = q` boundary, which is admitted only through the Tsallis limit.
    pub fn on_tsallis_boundary(&self) -> bool {
        self.kind == EntropyKind::Tsallis
    }
}

fn validate_spectrum(spectrum: &[f64]) -> Result<f64> {
    if spectrum.is_empty() {
        return Err(Error::InvalidSpectrum("empty spectrum".into()));
    }
    let mut sum = 0.0;
    for &l in spectrum {
        if !(-SPECTRUM_ZERO..=1.0 + SPECTRUM_SUM_TOL).contains(&l) {
            return Err(Error::InvalidSpectrum(format!("eigenvalue {l} outside [0, 1]")));
        }
        sum += l;
    }
    if (sum - 1.0).abs() > SPECTRUM_SUM_TOL {
        return Err(Error::InvalidSpectrum(format!("eigenvalues sum to {sum}")));
    }
    Ok(sum)
}

fn validate_q(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParams {
            q,
            z: f64::NAN,
            reason: "q must be positive",
        });
    }
    Ok(())
}

/// `h_q − 1` for the normalized spectrum, accurate when `q ≈ 1`.
fn purity_excess(spectrum: &[f64], q: f64) -> Result<f64> {
    let sum = validate_spectrum(spectrum)?;
    Ok(spectrum
        .iter()
        .map(|&l| l / sum)
        .filter(|&p| p > SPECTRUM_ZERO)
        .map(|p| p * ((q - 1.0) * p.ln()).exp_m1())
        .sum())
}

/// q-purity `h_q = Σ λ_i^q`.
pub fn q_purity(spectrum: &[f64], q: f64) -> Result<f64> {
    validate_q(q)?;
    Ok(1.0 + purity_excess(spectrum, q)?)
}

/// `ln(h_q) / (1 − q)` with its `q → 1` limit.
fn renyi_core(spectrum: &[f64], q: f64) -> Result<f64> {
    if (q - 1.0).abs() < LIMIT_THRESHOLD {
        return von_neumann(spectrum);
    }
    Ok(purity_excess(spectrum, q)?.ln_1p() / (1.0 - q))
}

/// Two-parameter entropy `[h_q^{(1−z)/(1−q)} − 1] / (z − 1)`.
///
/// Rejects the exact lines `q = 1` and `z = 1`; use [`entropy_auto`] there.
pub fn sharma_mittal(spectrum: &[f64], q: f64, z: f64) -> Result<f64> {
    validate_q(q)?;
    if q == 1.0 || z == 1.0 {
        return Err(Error::InvalidParams {
            q,
            z,
            reason: "q = 1 or z = 1 needs the limit form",
        });
    }
    let r = purity_excess(spectrum, q)?.ln_1p() / (1.0 - q);
    Ok(((1.0 - z) * r).exp_m1() / (1.0 - z))
}

/// Rényi entropy `ln(h_q) / (1 − q)`.
pub fn renyi(spectrum: &[f64], q: f64) -> Result<f64> {
    validate_q(q)?;
    if q == 1.0 {
        return Err(Error::InvalidParams {
            q,
            z: 1.0,
            reason: "Rényi entropy needs q ≠ 1",
        });
    }
    Ok(q_purity(spectrum, q)?.ln() / (1.0 - q))
}

/// Tsallis entropy `(h_q − 1) / (1 − q)`.
pub fn tsallis(spectrum: &[f64], q: f64) -> Result<f64> {
    validate_q(q)?;
    if q == 1.0 {
        return Err(Error::InvalidParams {
            q,
            z: q,
            reason: "Tsallis entropy needs q ≠ 1",
        });
    }
    Ok((q_purity(spectrum, q)? - 1.0) / (1.0 - q))
}

/// `−Σ λ ln λ` with `0 ln 0 = 0`.
pub fn von_neumann(spectrum: &[f64]) -> Result<f64> {
    let sum = validate_spectrum(spectrum)?;
    Ok(spectrum
        .iter()
        .map(|&l| l / sum)
        .filter(|&p| p > SPECTRUM_ZERO)
        .map(|p| -p * p.ln())
        .sum())
}

/// Evaluates the entropy selected by `params`, switching to the limit form on the limit lines.
pub fn entropy_auto(spectrum: &[f64], params: &EntropyParams) -> Result<f64> {
    let (q, z) = (params.q, params.z);
    match params.kind {
        EntropyKind::VonNeumann => von_neumann(spectrum),
        EntropyKind::Renyi => renyi_core(spectrum, q),
        EntropyKind::Tsallis => Ok(purity_excess(spectrum, q)? / (1.0 - q)),
        EntropyKind::SharmaMittal => {
            let r = renyi_core(spectrum, q)?;
            Ok(((1.0 - z) * r).exp_m1() / (1.0 - z))
        }
    }
}

/// Weight `g_q[s] = (1 − q + s) s^{q−2} / (1 − q)` multiplying the Schatten speed.
pub fn g_weight(s: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParams {
            q,
            z: f64::NAN,
            reason: "weight needs 0 < q < 1",
        });
    }
    if !(s > WEIGHT_FLOOR) {
        return Err(Error::DivergentWeight { s });
    }
    Ok((1.0 - q + s) * s.powf(q - 2.0) / (1.0 - q))
}

/// Side of one that `h_q^{(q−z)/(1−q)}` falls on for every state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRegion {
    WeightLeqOne,
    WeightGeqOne,
    Undefined,
}

pub fn classify_region(q: f64, z: f64) -> WeightRegion {
    if !(q > 0.0) || !q.is_finite() || !z.is_finite() {
        return WeightRegion::Undefined;
    }
    if (q - 1.0).abs() < LIMIT_THRESHOLD || (z - 1.0).abs() < LIMIT_THRESHOLD {
        return WeightRegion::Undefined;
    }
    // h_q ≥ 1 for q < 1 and h_q ≤ 1 for q > 1; the exponent sign decides the rest.
    if z >= q {
        WeightRegion::WeightLeqOne
    } else {
        WeightRegion::WeightGeqOne
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const MIXED: [f64; 2] = [0.5, 0.5];
    const SKEW: [f64; 2] = [0.25, 0.75];
    const PURE: [f64; 2] = [0.0, 1.0];

    #[test]
    fn q_purity_values() {
        assert_abs_diff_eq!(q_purity(&PURE, 0.3).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q_purity(&MIXED, 0.5).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            q_purity(&SKEW, 0.5).unwrap(),
            0.25f64.sqrt() + 0.75f64.sqrt(),
            epsilon = 1e-14
        );
        assert!(q_purity(&SKEW, 0.0).is_err());
        assert!(q_purity(&SKEW, 2.0).unwrap() <= 1.0);
    }

    #[test]
    fn sharma_mittal_values() {
        assert_abs_diff_eq!(sharma_mittal(&PURE, 0.25, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            sharma_mittal(&MIXED, 0.25, 0.5).unwrap(),
            0.828_427_124_746_19,
            epsilon = 1e-12
        );
        assert!(sharma_mittal(&SKEW, 0.5, 0.6).unwrap() > 0.0);
        // (1−z)/(1−q) = 1 collapses to 2(h − 1).
        let h = 0.25f64.sqrt() + 0.75f64.sqrt();
        assert_abs_diff_eq!(
            sharma_mittal(&SKEW, 0.5, 0.5).unwrap(),
            2.0 * (h - 1.0),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            sharma_mittal(&SKEW, 0.5, 0.5).unwrap(),
            0.732_050_807_568_877,
            epsilon = 1e-12
        );
        assert!(sharma_mittal(&SKEW, 1.0, 0.5).is_err());
        assert!(sharma_mittal(&SKEW, 0.5, 1.0).is_err());
    }

    #[test]
    fn limit_entropies() {
        assert_abs_diff_eq!(renyi(&MIXED, 0.3).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(renyi(&PURE, 0.3).unwrap(), 0.0, epsilon = 1e-15);
        // 2 ln(1/2 + √3/2)
        assert_abs_diff_eq!(renyi(&SKEW, 0.5).unwrap(), 0.623_810_716_364_871, epsilon = 1e-12);
        assert_abs_diff_eq!(tsallis(&PURE, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tsallis(&MIXED, 0.5).unwrap(), 0.828_427_124_746_19, epsilon = 1e-12);
        assert_abs_diff_eq!(tsallis(&SKEW, 0.5).unwrap(), 0.732_050_807_568_877, epsilon = 1e-12);
        assert_abs_diff_eq!(von_neumann(&PURE).unwrap(), 0.0);
        assert_abs_diff_eq!(von_neumann(&MIXED).unwrap(), 2f64.ln(), epsilon = 1e-15);
        let vn = 0.25 * 4f64.ln() + 0.75 * (4.0f64 / 3.0).ln();
        assert_abs_diff_eq!(von_neumann(&SKEW).unwrap(), vn, epsilon = 1e-15);
        assert!(renyi(&SKEW, 1.0).is_err());
        assert!(tsallis(&SKEW, 1.0).is_err());
    }

    #[test]
    fn auto_dispatch_near_lines() {
        let p = EntropyParams::new(0.5, 1.0 - 1e-8).unwrap();
        assert_eq!(p.kind(), EntropyKind::Renyi);
        assert_abs_diff_eq!(entropy_auto(&SKEW, &p).unwrap(), 0.623_810_7, epsilon = 1e-6);
        let p = EntropyParams::new(0.5, 0.5 + 1e-8).unwrap();
        assert_eq!(p.kind(), EntropyKind::Tsallis);
        assert_abs_diff_eq!(entropy_auto(&SKEW, &p).unwrap(), 0.732_050_8, epsilon = 1e-6);
        let p = EntropyParams::new(1.0 - 1e-8, 1.0 - 1e-8).unwrap();
        assert_eq!(p.kind(), EntropyKind::VonNeumann);
        assert_abs_diff_eq!(entropy_auto(&SKEW, &p).unwrap(), 0.562_335_1, epsilon = 1e-5);
        assert!(EntropyParams::new(0.0, 0.5).is_err());
        assert!(EntropyParams::new(1.0, 0.5).is_err());
    }

    #[test]
    fn auto_is_continuous_across_lines() {
        for k in 1..10 {
            let q = 0.1 * k as f64;
            let target = renyi(&SKEW, q).unwrap();
            for z in [1.0 - 2.0 * LIMIT_THRESHOLD, 1.0 + 2.0 * LIMIT_THRESHOLD] {
                let p = EntropyParams::new(q, z).unwrap();
                assert_eq!(p.kind(), EntropyKind::SharmaMittal);
                assert_relative_eq!(entropy_auto(&SKEW, &p).unwrap(), target, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn weight_values() {
        assert_abs_diff_eq!(g_weight(1.0, 0.5).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g_weight(0.5, 0.5).unwrap(), 4.0 * 2f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(g_weight(0.25, 0.5).unwrap(), 12.0, epsilon = 1e-13);
        assert_eq!(g_weight(1e-13, 0.5), Err(Error::DivergentWeight { s: 1e-13 }));
        assert!(g_weight(0.5, 1.0).is_err());
    }

    #[test]
    fn regions() {
        assert_eq!(classify_region(0.3, 0.6), WeightRegion::WeightLeqOne);
        assert_eq!(classify_region(0.6, 0.3), WeightRegion::WeightGeqOne);
        assert_eq!(classify_region(1.0, 1.0), WeightRegion::Undefined);
        assert_eq!(classify_region(0.0, 0.5), WeightRegion::Undefined);
        assert_eq!(classify_region(0.4, 1.5), WeightRegion::WeightLeqOne);
        assert_eq!(classify_region(1.5, 2.0), WeightRegion::WeightLeqOne);
        assert_eq!(classify_region(2.0, 1.5), WeightRegion::WeightGeqOne);
    }

    #[test]
    fn qsl_validity_flags() {
        assert!(EntropyParams::new(0.3, 0.6).unwrap().qsl_valid());
        assert!(!EntropyParams::new(0.6, 0.3).unwrap().qsl_valid());
        assert!(EntropyParams::renyi(0.7).unwrap().qsl_valid());
        let t = EntropyParams::tsallis(0.4).unwrap();
        assert!(t.qsl_valid() && t.on_tsallis_boundary());
        assert!(!EntropyParams::von_neumann().qsl_valid());
        assert!(!EntropyParams::new(1.5, 1.8).unwrap().qsl_valid());
    }
}
