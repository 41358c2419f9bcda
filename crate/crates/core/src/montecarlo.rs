//! Monte Carlo estimation of average received power and BD-RIS gain.
//!
//! Trial `t` uses the random substream `(seed, t)` and per-trial results are
//! stored in trial order before reduction, so every estimate is bit-identical
//! for a given seed whatever the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{FadingKind, Polarization, SystemConfig};
use crate::closedform::{self, ArchClass, Scenario};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::scattering::{max_power, RisArchitecture};

/// Default relative tolerance for law verification.
pub const DEFAULT_REL_TOL: f64 = 0.01;
/// Statistical acceptance width in standard errors.
pub const SIGMA_WIDTH: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub target: Option<f64>,
    pub verdict: Option<Verdict>,
}

impl EstimateReport {
    /// Attaches `target` and the verdict
    /// `|mean - target| <= max(3 stderr, rel_tol |target|)`.
    pub fn judged(mut self, target: f64, rel_tol: f64) -> Self {
        let allowed = (SIGMA_WIDTH * self.stderr).max(rel_tol * target.abs());
        let ok = (self.mean - target).abs() <= allowed;
        self.target = Some(target);
        self.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
        self
    }
}

/// Sum with pairwise splitting; the grouping depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        values.iter().sum()
    } else {
        let (lo, hi) = values.split_at(values.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Sample mean and standard error of the mean (zero for a single sample).
///
/// Works on data shifted by the first sample, so constant input yields that
/// constant and an exactly zero stderr.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let count = samples.len() as f64;
    let Some(&origin) = samples.first() else {
        return (f64::NAN, f64::NAN);
    };
    let shifted: Vec<f64> = samples.iter().map(|x| x - origin).collect();
    let shift_mean = pairwise_sum(&shifted) / count;
    let mean = origin + shift_mean;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = shifted
        .iter()
        .map(|d| (d - shift_mean) * (d - shift_mean))
        .collect();
    let variance = pairwise_sum(&squares) / (count - 1.0);
    (mean, (variance / count).sqrt())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::NoTrials)
    } else {
        Ok(())
    }
}

fn check_arch(config: &SystemConfig, arch: &RisArchitecture) -> Result<()> {
    if arch.n_elements() != config.n_elements() {
        return Err(Error::LengthMismatch {
            expected: config.n_elements(),
            got: arch.n_elements(),
        });
    }
    Ok(())
}

/// Per-trial optimal powers for each architecture in `archs`, in trial order.
fn simulate(
    config: &SystemConfig,
    archs: &[&RisArchitecture],
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_trials(trials)?;
    for arch in archs {
        check_arch(config, arch)?;
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let ch = config.realize(&mut rng)?;
            archs
                .iter()
                .map(|arch| max_power(arch, ch.h_r(), ch.h_t(), config.tx_power()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Mean optimal received power of `arch` over `trials` channel draws.
pub fn estimate_mean_power(
    config: &SystemConfig,
    arch: &RisArchitecture,
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let samples: Vec<f64> = simulate(config, &[arch], trials, seed)?
        .into_iter()
        .map(|row| row[0])
        .collect();
    let (mean, stderr) = mean_and_stderr(&samples);
    Ok(EstimateReport {
        mean,
        stderr,
        trials,
        seed,
        target: None,
        verdict: None,
    })
}

/// Estimates the power of `arch_class` in `scenario` and judges it against
/// the closed-form law.
pub fn verify_scaling_law(
    scenario: Scenario,
    arch_class: ArchClass,
    n_elements: usize,
    chi: f64,
    trials: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<EstimateReport> {
    let law = closedform::scaling_law(scenario, arch_class, n_elements, chi)?;
    verify_against(
        scenario, arch_class, n_elements, chi, trials, seed, rel_tol, law,
    )
}

/// Like [`verify_scaling_law`] but against an arbitrary `target`.
#[allow(clippy::too_many_arguments)]
pub fn verify_against(
    scenario: Scenario,
    arch_class: ArchClass,
    n_elements: usize,
    chi: f64,
    trials: usize,
    seed: u64,
    rel_tol: f64,
    target: f64,
) -> Result<EstimateReport> {
    let config = scenario.config(n_elements, chi)?;
    let arch = arch_class.architecture(n_elements);
    Ok(estimate_mean_power(&config, &arch, trials, seed)?.judged(target, rel_tol))
}

/// Verifies the law for an arbitrary config; Rician configs are rejected.
pub fn verify_config(
    config: &SystemConfig,
    arch_class: ArchClass,
    trials: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<EstimateReport> {
    let scenario = Scenario::try_from(config)?;
    let law = closedform::scaling_law(scenario, arch_class, config.n_elements(), config.chi())?;
    let arch = arch_class.architecture(config.n_elements());
    Ok(estimate_mean_power(config, &arch, trials, seed)?.judged(law, rel_tol))
}

/// Ratio of mean fully- to mean single-connected power from shared draws.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainEstimate {
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub stderr: f64,
    pub fully: EstimateReport,
    pub single: EstimateReport,
}

/// Estimates the fully/single gain for `config` as a ratio of means.
pub fn estimate_gain(config: &SystemConfig, trials: usize, seed: u64) -> Result<GainEstimate> {
    let n = config.n_elements();
    let fully_arch = RisArchitecture::fully_connected(n);
    let single_arch = RisArchitecture::single_connected(n);
    let rows = simulate(config, &[&fully_arch, &single_arch], trials, seed)?;
    let fully: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let single: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let (f_mean, f_se) = mean_and_stderr(&fully);
    let (s_mean, s_se) = mean_and_stderr(&single);
    let report = |mean, stderr| EstimateReport {
        mean,
        stderr,
        trials,
        seed,
        target: None,
        verdict: None,
    };
    let (ratio, stderr) = if s_mean == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let ratio = f_mean / s_mean;
        let linearized: Vec<f64> = fully
            .iter()
            .zip(&single)
            .map(|(f, s)| f - ratio * s)
            .collect();
        let (_, d_se) = mean_and_stderr(&linearized);
        (ratio, d_se / s_mean)
    };
    Ok(GainEstimate {
        ratio,
        stderr,
        fully: report(f_mean, f_se),
        single: report(s_mean, s_se),
    })
}

/// Gain under Rician fading with factor `k` on both hops, Tx vertical and Rx
/// horizontal.
pub fn estimate_gain_rician(
    k: f64,
    chi: f64,
    n_elements: usize,
    trials: usize,
    seed: u64,
) -> Result<GainEstimate> {
    let config = SystemConfig::new(
        n_elements,
        chi,
        Polarization::Vertical,
        Polarization::Horizontal,
        FadingKind::rician(k)?,
    )?;
    estimate_gain(&config, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PhaseSource;
    use crate::closedform::{Fading, PolarizationRelation};
    use std::f64::consts::PI;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn stderr_definition() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample sd = sqrt(5/3)
        assert!((se - (5.0_f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn verdict_rule() {
        let base = EstimateReport {
            mean: 100.0,
            stderr: 1.0,
            trials: 10,
            seed: 0,
            target: None,
            verdict: None,
        };
        assert_eq!(base.clone().judged(102.9, 0.0).verdict, Some(Verdict::Pass));
        assert_eq!(base.clone().judged(103.1, 0.0).verdict, Some(Verdict::Fail));
        assert_eq!(
            base.clone().judged(104.0, 0.05).verdict,
            Some(Verdict::Pass)
        );
        assert_eq!(base.judged(110.0, 0.05).verdict, Some(Verdict::Fail));
    }

    #[test]
    fn rejects_zero_trials_and_mismatched_arch() {
        let s = Scenario::new(PolarizationRelation::Same, Fading::Rayleigh);
        let cfg = s.config(4, 0.5).unwrap();
        assert_eq!(
            estimate_mean_power(&cfg, &RisArchitecture::single_connected(4), 0, 1),
            Err(Error::NoTrials)
        );
        assert!(estimate_mean_power(&cfg, &RisArchitecture::single_connected(6), 5, 1).is_err());
    }

    #[test]
    fn los_estimate_is_constant_across_trials() {
        let s = Scenario::new(PolarizationRelation::Opposite, Fading::LoS);
        let cfg = s.config(16, 0.3).unwrap();
        for arch in [
            RisArchitecture::single_connected(16),
            RisArchitecture::fully_connected(16),
        ] {
            let r = estimate_mean_power(&cfg, &arch, 200, 9).unwrap();
            assert!(r.stderr <= 1e-12 * r.mean, "{}", r.stderr);
        }
        // Zero phases make every trial bit-identical.
        let fixed = SystemConfig::new(
            16,
            0.3,
            Polarization::Vertical,
            Polarization::Horizontal,
            FadingKind::LoS(PhaseSource::zeros(16)),
        )
        .unwrap();
        let r = estimate_mean_power(&fixed, &RisArchitecture::single_connected(16), 50, 9).unwrap();
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let s = Scenario::new(PolarizationRelation::Same, Fading::Rayleigh);
        let cfg = s.config(8, 0.4).unwrap();
        let arch = RisArchitecture::single_connected(8);
        let a = estimate_mean_power(&cfg, &arch, 2000, 42).unwrap();
        let b = estimate_mean_power(&cfg, &arch, 2000, 42).unwrap();
        let c = estimate_mean_power(&cfg, &arch, 2000, 43).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = Scenario::new(PolarizationRelation::Opposite, Fading::Rayleigh);
        let cfg = s.config(8, 0.4).unwrap();
        let arch = RisArchitecture::fully_connected(8);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_mean_power(&cfg, &arch, 3000, 5).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn uni_rayleigh_single_n16() {
        let s = Scenario::new(PolarizationRelation::Uni, Fading::Rayleigh);
        let law = 16.0 + 16.0 * 15.0 * PI * PI / 16.0;
        let r = verify_scaling_law(s, ArchClass::Single, 16, 0.0, 100_000, 1, 0.0).unwrap();
        assert!(
            (r.mean - law).abs() <= 3.0 * r.stderr,
            "{} vs {law}",
            r.mean
        );
        assert_eq!(r.target, Some(law));
    }

    #[test]
    fn same_rayleigh_fully_n16() {
        let s = Scenario::new(PolarizationRelation::Same, Fading::Rayleigh);
        let cfg = s.config(16, 0.5).unwrap();
        let r =
            estimate_mean_power(&cfg, &RisArchitecture::fully_connected(16), 100_000, 2).unwrap();
        assert!(
            (r.mean - 144.0).abs() <= 3.0 * r.stderr,
            "{} +- {}",
            r.mean,
            r.stderr
        );
    }

    #[test]
    fn verify_examples() {
        let ro = Scenario::new(PolarizationRelation::Opposite, Fading::Rayleigh);
        let r = verify_scaling_law(ro, ArchClass::Single, 32, 0.3, 100_000, 3, DEFAULT_REL_TOL)
            .unwrap();
        assert!((r.target.unwrap() - 193.2).abs() < 0.1);
        assert_eq!(r.verdict, Some(Verdict::Pass));

        let lo = Scenario::new(PolarizationRelation::Opposite, Fading::LoS);
        let r = verify_scaling_law(lo, ArchClass::Fully, 64, 0.1, 1, 3, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.verdict, Some(Verdict::Pass));
        assert_eq!(r.stderr, 0.0);
        assert!((r.mean - 1239.04).abs() < 1e-9 * 1239.04);

        let rs = Scenario::new(PolarizationRelation::Same, Fading::Rayleigh);
        let r =
            verify_scaling_law(rs, ArchClass::Fully, 8, 0.0, 100_000, 3, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.target, Some(16.0));
        assert_eq!(r.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn corrupted_law_fails() {
        let rs = Scenario::new(PolarizationRelation::Same, Fading::Rayleigh);
        let law = closedform::scaling_law(rs, ArchClass::Single, 16, 0.5).unwrap();
        let r = verify_against(
            rs,
            ArchClass::Single,
            16,
            0.5,
            20_000,
            4,
            DEFAULT_REL_TOL,
            law * 1.1,
        )
        .unwrap();
        assert_eq!(r.verdict, Some(Verdict::Fail));
    }

    #[test]
    fn rician_has_no_closed_form() {
        let cfg = SystemConfig::new(
            8,
            0.2,
            Polarization::Vertical,
            Polarization::Horizontal,
            FadingKind::rician(1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            verify_config(&cfg, ArchClass::Single, 10, 0, DEFAULT_REL_TOL),
            Err(Error::NoClosedForm(_))
        ));
        let rs = Scenario::new(PolarizationRelation::Same, Fading::Rayleigh)
            .config(8, 0.2)
            .unwrap();
        assert!(verify_config(&rs, ArchClass::Fully, 10, 0, 0.5).is_ok());
    }

    #[test]
    fn rician_gain_zero_denominator_is_infinite() {
        // chi = 0 with opposite polarizations blocks every diagonal path.
        let g = estimate_gain_rician(3.0, 0.0, 8, 10, 0).unwrap();
        assert_eq!(g.single.mean, 0.0);
        assert_eq!(g.ratio, f64::INFINITY);
        let cfg = SystemConfig::new(
            8,
            0.0,
            Polarization::Vertical,
            Polarization::Horizontal,
            FadingKind::LoS(PhaseSource::zeros(8)),
        )
        .unwrap();
        let g = estimate_gain(&cfg, 5, 0).unwrap();
        assert_eq!(g.ratio, f64::INFINITY);
        assert!(estimate_gain_rician(-1.0, 0.2, 8, 10, 0).is_err());
    }

    #[test]
    fn rician_zero_matches_rayleigh_ratio() {
        let ro = Scenario::new(PolarizationRelation::Opposite, Fading::Rayleigh);
        let expected = closedform::finite_gain_ratio(ro, 16, 0.2).unwrap();
        let g = estimate_gain_rician(0.0, 0.2, 16, 50_000, 8).unwrap();
        assert!(
            (g.ratio - expected).abs() <= 3.0 * g.stderr,
            "{} +- {} vs {expected}",
            g.ratio,
            g.stderr
        );
    }

    #[test]
    fn rician_large_k_approaches_los_ratio() {
        let los = (1.2_f64 * 1.2) / (4.0 * 0.2);
        let g = estimate_gain_rician(1e4, 0.2, 64, 5_000, 9).unwrap();
        assert!((g.ratio - los).abs() / los < 0.02, "{}", g.ratio);
    }
}
