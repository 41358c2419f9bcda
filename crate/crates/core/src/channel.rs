//! Dual-polarized cascaded channel model.
//!
//! The RIS has `N` elements: the first `N/2` are vertically polarized and the
//! last `N/2` horizontally polarized. A link antenna sees an element with unit
//! amplitude when the polarizations match and with amplitude `sqrt(chi)`
//! otherwise, where `chi` is the inverse cross-polarization discrimination.
//! Composed channels are the Hadamard product of that profile with a
//! uni-polarized fading vector.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Polarization of an antenna or RIS element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Vertical,
    Horizontal,
}

impl Polarization {
    pub fn opposite(self) -> Self {
        match self {
            Polarization::Vertical => Polarization::Horizontal,
            Polarization::Horizontal => Polarization::Vertical,
        }
    }
}

/// Which end of the cascade a profile belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Receiver,
    Transmitter,
}

/// Source of line-of-sight phases.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseSource {
    /// I.i.d. phases, uniform over `[0, 2pi)`, drawn from the supplied stream.
    Uniform,
    /// Explicit phases (radians) for the RIS->Rx and Tx->RIS vectors.
    Fixed { rx: Vec<f64>, tx: Vec<f64> },
}

impl PhaseSource {
    /// All-zero phases for `n` elements.
    pub fn zeros(n: usize) -> Self {
        PhaseSource::Fixed {
            rx: vec![0.0; n],
            tx: vec![0.0; n],
        }
    }

    fn phases<R: Rng + ?Sized>(
        &self,
        fixed: Option<&[f64]>,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        match fixed {
            Some(list) if list.len() != n => Err(Error::PhaseListLength {
                expected: n,
                got: list.len(),
            }),
            Some(list) => Ok(list.to_vec()),
            None => Ok((0..n).map(|_| rng.random::<f64>() * TAU).collect()),
        }
    }

    fn rx(&self) -> Option<&[f64]> {
        match self {
            PhaseSource::Uniform => None,
            PhaseSource::Fixed { rx, .. } => Some(rx),
        }
    }

    fn tx(&self) -> Option<&[f64]> {
        match self {
            PhaseSource::Uniform => None,
            PhaseSource::Fixed { tx, .. } => Some(tx),
        }
    }
}

/// Small-scale fading distribution of the uni-polarized channels.
#[derive(Clone, Debug, PartialEq)]
pub enum FadingKind {
    /// I.i.d. `CN(0, 1)` entries.
    Rayleigh,
    /// Unit-modulus entries.
    LoS(PhaseSource),
    /// Per-element mixture `sqrt(K/(K+1)) * LoS + sqrt(1/(K+1)) * Rayleigh`,
    /// with the same `K` on both hops.
    Rician { k: f64, phases: PhaseSource },
}

impl FadingKind {
    pub fn los_uniform() -> Self {
        FadingKind::LoS(PhaseSource::Uniform)
    }

    pub fn rician(k: f64) -> Result<Self> {
        check_rician(k)?;
        Ok(FadingKind::Rician {
            k,
            phases: PhaseSource::Uniform,
        })
    }
}

fn check_rician(k: f64) -> Result<()> {
    if k.is_finite() && k >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRicianFactor(k))
    }
}

fn check_chi(chi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&chi) {
        Ok(())
    } else {
        Err(Error::ChiOutOfRange(chi))
    }
}

pub(crate) fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        Err(Error::OddElementCount(n))
    } else {
        Ok(())
    }
}

/// Scenario descriptor for one Tx -> RIS -> Rx link.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    n_elements: usize,
    chi: f64,
    tx_pol: Polarization,
    rx_pol: Polarization,
    fading: FadingKind,
    tx_power: f64,
}

impl SystemConfig {
    /// Validated configuration with unit transmit power.
    pub fn new(
        n_elements: usize,
        chi: f64,
        tx_pol: Polarization,
        rx_pol: Polarization,
        fading: FadingKind,
    ) -> Result<Self> {
        check_even(n_elements)?;
        check_chi(chi)?;
        if let FadingKind::Rician { k, .. } = &fading {
            check_rician(*k)?;
        }
        Ok(Self {
            n_elements,
            chi,
            tx_pol,
            rx_pol,
            fading,
            tx_power: 1.0,
        })
    }

    pub fn with_tx_power(mut self, tx_power: f64) -> Result<Self> {
        if !(tx_power.is_finite() && tx_power > 0.0) {
            return Err(Error::InvalidTxPower(tx_power));
        }
        self.tx_power = tx_power;
        Ok(self)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn tx_pol(&self) -> Polarization {
        self.tx_pol
    }

    pub fn rx_pol(&self) -> Polarization {
        self.rx_pol
    }

    pub fn fading(&self) -> &FadingKind {
        &self.fading
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    /// Draws fading and composes one channel realization.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelRealization> {
        let draw = sample_fading(&self.fading, self.n_elements, rng)?;
        compose(self, draw)
    }
}

/// Polarization of element `index` (1-based) on an `n_elements` surface.
pub fn element_polarization(index: usize, n_elements: usize) -> Result<Polarization> {
    check_even(n_elements)?;
    if index == 0 || index > n_elements {
        return Err(Error::IndexOutOfRange {
            index,
            n: n_elements,
        });
    }
    Ok(if index <= n_elements / 2 {
        Polarization::Vertical
    } else {
        Polarization::Horizontal
    })
}

/// Per-element amplitude weights seen by a link antenna of polarization `pol`.
///
/// Entry `i` is 1 when `pol` matches the polarization of element `i + 1` and
/// `sqrt(chi)` otherwise. The pattern is the same for both sides; `side` only
/// records orientation (row for the receiver, column for the transmitter).
pub fn polarization_profile(
    side: Side,
    pol: Polarization,
    chi: f64,
    n_elements: usize,
) -> Result<Vec<f64>> {
    let _ = side;
    check_chi(chi)?;
    check_even(n_elements)?;
    let cross = chi.sqrt();
    let half = n_elements / 2;
    Ok((0..n_elements)
        .map(|i| {
            let element = if i < half {
                Polarization::Vertical
            } else {
                Polarization::Horizontal
            };
            if element == pol {
                1.0
            } else {
                cross
            }
        })
        .collect())
}

/// Uni-polarized fading vectors for both hops.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingDraw {
    /// RIS -> Rx, length N.
    pub h_tilde_r: Vec<Complex64>,
    /// Tx -> RIS, length N.
    pub h_tilde_t: Vec<Complex64>,
}

fn rayleigh_entry<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn rayleigh_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| rayleigh_entry(rng)).collect()
}

fn los_vector(phases: &[f64]) -> Vec<Complex64> {
    phases
        .iter()
        .map(|&p| Complex64::from_polar(1.0, p))
        .collect()
}

fn rician_vector<R: Rng + ?Sized>(k: f64, phases: &[f64], rng: &mut R) -> Vec<Complex64> {
    let los_amp = (k / (k + 1.0)).sqrt();
    let nlos_amp = (1.0 / (k + 1.0)).sqrt();
    phases
        .iter()
        .map(|&p| Complex64::from_polar(los_amp, p) + rayleigh_entry(rng) * nlos_amp)
        .collect()
}

/// Draws `(h_tilde_r, h_tilde_t)` for `kind`. The receive-side vector is
/// drawn first, then the transmit-side vector.
pub fn sample_fading<R: Rng + ?Sized>(
    kind: &FadingKind,
    n_elements: usize,
    rng: &mut R,
) -> Result<FadingDraw> {
    if n_elements < 2 {
        return Err(Error::TooFewElements {
            min: 2,
            got: n_elements,
        });
    }
    let draw = match kind {
        FadingKind::Rayleigh => {
            let h_tilde_r = rayleigh_vector(n_elements, rng);
            let h_tilde_t = rayleigh_vector(n_elements, rng);
            FadingDraw {
                h_tilde_r,
                h_tilde_t,
            }
        }
        FadingKind::LoS(source) => {
            let rx = source.phases(source.rx(), n_elements, rng)?;
            let tx = source.phases(source.tx(), n_elements, rng)?;
            FadingDraw {
                h_tilde_r: los_vector(&rx),
                h_tilde_t: los_vector(&tx),
            }
        }
        FadingKind::Rician { k, phases } => {
            check_rician(*k)?;
            let rx = phases.phases(phases.rx(), n_elements, rng)?;
            let h_tilde_r = rician_vector(*k, &rx, rng);
            let tx = phases.phases(phases.tx(), n_elements, rng)?;
            let h_tilde_t = rician_vector(*k, &tx, rng);
            FadingDraw {
                h_tilde_r,
                h_tilde_t,
            }
        }
    };
    Ok(draw)
}

/// One draw of the polarization-aware cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    h_tilde_r: Vec<Complex64>,
    h_tilde_t: Vec<Complex64>,
    p_r: Vec<f64>,
    p_t: Vec<f64>,
    h_r: Vec<Complex64>,
    h_t: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn n_elements(&self) -> usize {
        self.h_r.len()
    }

    pub fn h_tilde_r(&self) -> &[Complex64] {
        &self.h_tilde_r
    }

    pub fn h_tilde_t(&self) -> &[Complex64] {
        &self.h_tilde_t
    }

    pub fn p_r(&self) -> &[f64] {
        &self.p_r
    }

    pub fn p_t(&self) -> &[f64] {
        &self.p_t
    }

    /// Composed RIS -> Rx channel (row vector).
    pub fn h_r(&self) -> &[Complex64] {
        &self.h_r
    }

    /// Composed Tx -> RIS channel (column vector).
    pub fn h_t(&self) -> &[Complex64] {
        &self.h_t
    }
}

#[derive(Serialize)]
struct ComplexVec {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<&[Complex64]> for ComplexVec {
    fn from(v: &[Complex64]) -> Self {
        ComplexVec {
            re: v.iter().map(|c| c.re).collect(),
            im: v.iter().map(|c| c.im).collect(),
        }
    }
}

impl Serialize for ChannelRealization {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            h_tilde_r: ComplexVec,
            h_tilde_t: ComplexVec,
            p_r: &'a [f64],
            p_t: &'a [f64],
            h_r: ComplexVec,
            h_t: ComplexVec,
        }
        Repr {
            n: self.n_elements(),
            h_tilde_r: self.h_tilde_r.as_slice().into(),
            h_tilde_t: self.h_tilde_t.as_slice().into(),
            p_r: &self.p_r,
            p_t: &self.p_t,
            h_r: self.h_r.as_slice().into(),
            h_t: self.h_t.as_slice().into(),
        }
        .serialize(serializer)
    }
}

/// Applies the polarization profiles of `config` to a fading draw.
pub fn compose(config: &SystemConfig, draw: FadingDraw) -> Result<ChannelRealization> {
    let n = config.n_elements;
    for len in [draw.h_tilde_r.len(), draw.h_tilde_t.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let p_r = polarization_profile(Side::Receiver, config.rx_pol, config.chi, n)?;
    let p_t = polarization_profile(Side::Transmitter, config.tx_pol, config.chi, n)?;
    let h_r = hadamard(&p_r, &draw.h_tilde_r);
    let h_t = hadamard(&p_t, &draw.h_tilde_t);
    Ok(ChannelRealization {
        h_tilde_r: draw.h_tilde_r,
        h_tilde_t: draw.h_tilde_t,
        p_r,
        p_t,
        h_r,
        h_t,
    })
}

fn hadamard(p: &[f64], h: &[Complex64]) -> Vec<Complex64> {
    p.iter().zip(h).map(|(&w, &z)| z * w).collect()
}
