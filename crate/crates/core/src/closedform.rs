//! Closed-form scaling laws, BD-RIS gains and the performance-complexity
//! Pareto frontier.
//!
//! All powers assume unit transmit power. Rayleigh laws are expectations over
//! the fading; line-of-sight laws are deterministic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::channel::{self, FadingKind, Polarization, SystemConfig};
use crate::error::{Error, Result};
use crate::scattering::RisArchitecture;

/// `pi^2 / 16 = (E|h|)^4` for unit-variance Rayleigh entries.
const PI2_16: f64 = PI * PI / 16.0;

/// How the Tx and Rx polarizations relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationRelation {
    Same,
    Opposite,
    /// Uni-polarized system; equivalent to `chi = 1`.
    Uni,
}

/// Fading families with closed-form laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Fading {
    Rayleigh,
    LoS,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Scenario {
    pub relation: PolarizationRelation,
    pub fading: Fading,
}

impl Scenario {
    pub const fn new(relation: PolarizationRelation, fading: Fading) -> Self {
        Self { relation, fading }
    }

    /// The four dual-polarized scenarios, Rayleigh first.
    pub const DUAL: [Scenario; 4] = [
        Scenario::new(PolarizationRelation::Same, Fading::Rayleigh),
        Scenario::new(PolarizationRelation::Opposite, Fading::Rayleigh),
        Scenario::new(PolarizationRelation::Same, Fading::LoS),
        Scenario::new(PolarizationRelation::Opposite, Fading::LoS),
    ];

    /// Effective `chi`: the uni-polarized system ignores it.
    pub fn effective_chi(&self, chi: f64) -> f64 {
        match self.relation {
            PolarizationRelation::Uni => 1.0,
            _ => chi,
        }
    }

    /// Simulation config realizing this scenario: Tx vertical, Rx vertical
    /// (same, uni) or horizontal (opposite); LoS phases uniform.
    pub fn config(&self, n_elements: usize, chi: f64) -> Result<SystemConfig> {
        let rx = match self.relation {
            PolarizationRelation::Opposite => Polarization::Horizontal,
            _ => Polarization::Vertical,
        };
        let fading = match self.fading {
            Fading::Rayleigh => FadingKind::Rayleigh,
            Fading::LoS => FadingKind::los_uniform(),
        };
        let chi = self.effective_chi(chi);
        check_chi(chi)?;
        SystemConfig::new(n_elements, chi, Polarization::Vertical, rx, fading)
    }
}

impl TryFrom<&SystemConfig> for Scenario {
    type Error = Error;

    /// Classifies a config; Rician fading has no closed form.
    fn try_from(config: &SystemConfig) -> Result<Self> {
        let fading = match config.fading() {
            FadingKind::Rayleigh => Fading::Rayleigh,
            FadingKind::LoS(_) => Fading::LoS,
            FadingKind::Rician { k, .. } => {
                return Err(Error::NoClosedForm(format!("Rician fading with K = {k}")))
            }
        };
        let relation = if config.tx_pol() == config.rx_pol() {
            PolarizationRelation::Same
        } else {
            PolarizationRelation::Opposite
        };
        Ok(Scenario { relation, fading })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fading = match self.fading {
            Fading::Rayleigh => "rayleigh",
            Fading::LoS => "los",
        };
        let relation = match self.relation {
            PolarizationRelation::Same => "same",
            PolarizationRelation::Opposite => "opposite",
            PolarizationRelation::Uni => "uni",
        };
        write!(f, "{fading}-{relation}")
    }
}

impl FromStr for Scenario {
    type Err = Error;

    /// Parses `rayleigh-same`, `los-opposite`, `rayleigh-uni`, ...
    fn from_str(s: &str) -> Result<Self> {
        let (fading, relation) = s
            .split_once('-')
            .ok_or_else(|| Error::NoClosedForm(s.to_string()))?;
        let fading = match fading {
            "rayleigh" => Fading::Rayleigh,
            "los" => Fading::LoS,
            _ => return Err(Error::NoClosedForm(s.to_string())),
        };
        let relation = match relation {
            "same" => PolarizationRelation::Same,
            "opposite" => PolarizationRelation::Opposite,
            "uni" => PolarizationRelation::Uni,
            _ => return Err(Error::NoClosedForm(s.to_string())),
        };
        Ok(Scenario { relation, fading })
    }
}

/// Single-connected (diagonal) or fully-connected RIS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchClass {
    Single,
    Fully,
}

impl ArchClass {
    pub fn architecture(&self, n_elements: usize) -> RisArchitecture {
        match self {
            ArchClass::Single => RisArchitecture::single_connected(n_elements),
            ArchClass::Fully => RisArchitecture::fully_connected(n_elements),
        }
    }
}

impl fmt::Display for ArchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchClass::Single => "single",
            ArchClass::Fully => "fully",
        })
    }
}

fn check_chi(chi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&chi) {
        Ok(())
    } else {
        Err(Error::ChiOutOfRange(chi))
    }
}

/// Received power law for `scenario` and `arch`.
///
/// The terms are grouped so that the dual-polarized laws at `chi = 1`
/// evaluate to bit-identical values with the uni-polarized ones.
pub fn scaling_law(
    scenario: Scenario,
    arch: ArchClass,
    n_elements: usize,
    chi: f64,
) -> Result<f64> {
    check_chi(chi)?;
    if scenario.relation != PolarizationRelation::Uni {
        channel::check_even(n_elements)?;
    } else if n_elements == 0 {
        return Err(Error::TooFewElements { min: 1, got: 0 });
    }
    let n = n_elements as f64;
    let coherent = (1.0 + chi) * (1.0 + chi) / 4.0 * n * n;
    use ArchClass::*;
    use Fading::*;
    use PolarizationRelation::*;
    let power = match (scenario.relation, scenario.fading, arch) {
        (Uni, Rayleigh, Single) => n + n * (n - 1.0) * PI2_16,
        (Uni, _, _) => n * n,
        (Same, Rayleigh, Single) => {
            let w = (1.0 + chi * chi) / 2.0;
            // E|a_i a_j| pair count: co-polar and cross-polar halves plus mixed pairs.
            let pairs = w * n * (n / 2.0 - 1.0) + chi * n * n / 2.0;
            w * n + pairs * PI2_16
        }
        (Opposite, Rayleigh, Single) => chi * (n + n * (n - 1.0) * PI2_16),
        (Opposite, LoS, Single) => chi * n * n,
        (Same | Opposite, _, Fully) | (Same, LoS, Single) => coherent,
    };
    Ok(power)
}

/// Asymptotic gain of the fully- over the single-connected RIS, `+inf` for
/// opposite polarizations at `chi = 0`.
pub fn gain(scenario: Scenario, chi: f64) -> Result<f64> {
    check_chi(chi)?;
    let chi = scenario.effective_chi(chi);
    Ok(match (scenario.relation, scenario.fading) {
        (PolarizationRelation::Opposite, Fading::Rayleigh) => {
            if chi == 0.0 {
                f64::INFINITY
            } else {
                4.0 * (1.0 + chi) * (1.0 + chi) / (PI * PI * chi)
            }
        }
        (PolarizationRelation::Opposite, Fading::LoS) => {
            if chi == 0.0 {
                f64::INFINITY
            } else {
                (1.0 + chi) * (1.0 + chi) / (4.0 * chi)
            }
        }
        (_, Fading::Rayleigh) => 16.0 / (PI * PI),
        (_, Fading::LoS) => 1.0,
    })
}

/// Finite-`N` ratio of the fully- to the single-connected laws. This is a
/// diagnostic companion to [`gain`], which is the `N -> inf` limit.
pub fn finite_gain_ratio(scenario: Scenario, n_elements: usize, chi: f64) -> Result<f64> {
    let fully = scaling_law(scenario, ArchClass::Fully, n_elements, chi)?;
    let single = scaling_law(scenario, ArchClass::Single, n_elements, chi)?;
    Ok(if single == 0.0 {
        f64::INFINITY
    } else {
        fully / single
    })
}

fn check_pairs(n_elements: usize, n: usize) -> Result<()> {
    channel::check_even(n_elements)?;
    if n > n_elements / 2 {
        return Err(Error::PairCountOutOfRange {
            n,
            max: n_elements / 2,
        });
    }
    Ok(())
}

/// Best power with complexity `N + n` under opposite-polarization LoS:
/// `(n (1 + chi) + (N - 2n) sqrt(chi))^2`.
pub fn pareto_power(n_elements: usize, n: usize, chi: f64) -> Result<f64> {
    check_pairs(n_elements, n)?;
    check_chi(chi)?;
    let pairs = n as f64;
    let singles = (n_elements - 2 * n) as f64;
    let amplitude = pairs * (1.0 + chi) + singles * chi.sqrt();
    Ok(amplitude * amplitude)
}

/// `n` opposite-polarization pairs `{i, N/2 + i}` for `i < n`; everything else single.
pub fn optimal_architecture(n_elements: usize, n: usize) -> Result<RisArchitecture> {
    check_pairs(n_elements, n)?;
    let half = n_elements / 2;
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i, half + i]).collect();
    groups.extend((n..half).map(|i| vec![i]));
    groups.extend((half + n..n_elements).map(|i| vec![i]));
    RisArchitecture::new(n_elements, groups)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub n: usize,
    pub complexity: usize,
    pub power: f64,
    #[serde(skip)]
    pub architecture: RisArchitecture,
}

/// Frontier points for `n = 0..=N/2`.
pub fn pareto_frontier(n_elements: usize, chi: f64) -> Result<Vec<ParetoPoint>> {
    channel::check_even(n_elements)?;
    check_chi(chi)?;
    (0..=n_elements / 2)
        .map(|n| {
            let architecture = optimal_architecture(n_elements, n)?;
            Ok(ParetoPoint {
                n,
                complexity: architecture.complexity(),
                power: pareto_power(n_elements, n, chi)?,
                architecture,
            })
        })
        .collect()
}
