//! Group-connected RIS architectures and lossless reciprocal scattering matrices.
//!
//! An architecture partitions the `N` elements into groups of interconnected
//! elements. Its scattering matrix is block diagonal up to a permutation, with
//! one symmetric unitary block per group. For a fixed architecture the best
//! achievable received power is `P_T * (sum_g |h_R,g| |h_T,g|)^2`; the synthesis
//! routines below construct a matrix attaining it.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the norm of inputs to [`map_symmetric_unitary`].
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Bound on symmetry, unitarity and block-sparsity residuals of synthesized matrices.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative tolerance for power equalities.
pub const POWER_REL_TOL: f64 = 1e-9;

const DEGENERATE_TOL: f64 = 1e-13;

/// Partition of the RIS elements (0-based indices) into interconnected groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RisArchitecture {
    n_elements: usize,
    groups: Vec<Vec<usize>>,
}

impl RisArchitecture {
    /// Validates that `groups` is a partition of `0..n_elements` into nonempty sets.
    pub fn new(n_elements: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidArchitecture("no elements".into()));
        }
        let mut seen = vec![false; n_elements];
        for group in &groups {
            if group.is_empty() {
                return Err(Error::InvalidArchitecture("empty group".into()));
            }
            for &i in group {
                if i >= n_elements {
                    return Err(Error::InvalidArchitecture(format!(
                        "element {} outside 1..={n_elements}",
                        i + 1
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArchitecture(format!(
                        "element {} appears in more than one group",
                        i + 1
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArchitecture(format!(
                "element {} is not assigned to a group",
                missing + 1
            )));
        }
        Ok(Self { n_elements, groups })
    }

    /// Same as [`RisArchitecture::new`] with 1-based element labels.
    pub fn from_one_based(n_elements: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let groups = groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&i| {
                        i.checked_sub(1).ok_or_else(|| {
                            Error::InvalidArchitecture("element labels start at 1".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_elements, groups)
    }

    /// Conventional RIS: every element on its own.
    pub fn single_connected(n_elements: usize) -> Self {
        Self {
            n_elements,
            groups: (0..n_elements).map(|i| vec![i]).collect(),
        }
    }

    /// One group holding every element.
    pub fn fully_connected(n_elements: usize) -> Self {
        Self {
            n_elements,
            groups: vec![(0..n_elements).collect()],
        }
    }

    /// Groups of two pairing element `i` with element `N/2 + i`, so every
    /// pair mixes the two polarizations.
    pub fn opposite_pairs(n_elements: usize) -> Result<Self> {
        crate::channel::check_even(n_elements)?;
        let half = n_elements / 2;
        Ok(Self {
            n_elements,
            groups: (0..half).map(|i| vec![i, half + i]).collect(),
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn groups_one_based(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|i| i + 1).collect())
            .collect()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// Number of tunable impedance components, `sum_g N_g (N_g + 1) / 2`.
    pub fn complexity(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.len() * (g.len() + 1) / 2)
            .sum()
    }

    /// Group label of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n_elements];
        for (g, group) in self.groups.iter().enumerate() {
            for &i in group {
                labels[i] = g;
            }
        }
        labels
    }

    /// Architecture with groups `a` and `b` joined (into position `min(a, b)`).
    pub fn merge(&self, a: usize, b: usize) -> Result<Self> {
        let count = self.groups.len();
        if a >= count || b >= count || a == b {
            return Err(Error::InvalidArchitecture(format!(
                "cannot merge groups {a} and {b} of {count}"
            )));
        }
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        let mut groups = self.groups.clone();
        let moved = groups.remove(drop);
        groups[keep].extend(moved);
        Ok(Self {
            n_elements: self.n_elements,
            groups,
        })
    }
}

impl fmt::Display for RisArchitecture {
    /// Renders 1-based groups, e.g. `{1,3}{2,4}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for group in &self.groups {
            write!(f, "{{")?;
            for (k, i) in group.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// Circuit complexity of `arch`.
pub fn complexity(arch: &RisArchitecture) -> usize {
    arch.complexity()
}

/// Scattering matrix paired with the architecture it respects.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMatrix {
    entries: DMatrix<Complex64>,
    architecture: RisArchitecture,
}

impl ScatteringMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn architecture(&self) -> &RisArchitecture {
        &self.architecture
    }

    pub fn n_elements(&self) -> usize {
        self.architecture.n_elements
    }

    /// `max |Theta - Theta^T|`.
    pub fn symmetry_residual(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.transpose()))
    }

    /// `max |Theta^H Theta - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n_elements();
        let gram = self.entries.adjoint() * &self.entries;
        max_abs(&(gram - DMatrix::<Complex64>::identity(n, n)))
    }

    /// Largest modulus of an entry coupling two different groups.
    pub fn block_residual(&self) -> f64 {
        let labels = self.architecture.labels();
        let n = self.n_elements();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if labels[i] != labels[j] {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// True when all three residuals are within [`RESIDUAL_TOL`].
    pub fn is_lossless_reciprocal(&self) -> bool {
        self.symmetry_residual() <= RESIDUAL_TOL
            && self.unitarity_residual() <= RESIDUAL_TOL
            && self.block_residual() <= RESIDUAL_TOL
    }

    /// `Theta v`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n_elements();
        check_len(n, v.len())?;
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect())
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}

fn phase(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

fn conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

/// Phase-shift (diagonal) scattering matrix co-phasing every element.
pub fn synth_diagonal(h_r: &[Complex64], h_t: &[Complex64]) -> Result<ScatteringMatrix> {
    let n = h_r.len();
    check_len(n, h_t.len())?;
    let diag: Vec<Complex64> = h_r
        .iter()
        .zip(h_t)
        .map(|(&r, &t)| Complex64::from_polar(1.0, -(phase(r) + phase(t))))
        .collect();
    Ok(ScatteringMatrix {
        entries: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        architecture: RisArchitecture::single_connected(n),
    })
}

/// Symmetric unitary `Q` with `Q a = b`, for unit vectors `a` and `b`.
///
/// A symmetric unitary matrix satisfies `Q conj(Q) = I`, so `Q a = b` forces
/// `Q conj(b) = conj(a)`. `Q` is fixed on `S = span{a, conj(b)}` by those two
/// conditions and maps each vector `v` of an orthonormal basis of the
/// complement of `S` to `conj(v)`.
pub fn map_symmetric_unitary(a: &[Complex64], b: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let m = a.len();
    check_len(m, b.len())?;
    for v in [a, b] {
        let nv = norm(v);
        if (nv - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitVector(nv));
        }
    }

    let cb = conj(b);
    let mut basis: Vec<Vec<Complex64>> = vec![a.to_vec()];
    let mut images: Vec<Vec<Complex64>> = vec![b.to_vec()];

    let alpha = inner(a, &cb);
    let mut v: Vec<Complex64> = cb.iter().zip(a).map(|(&x, &y)| x - alpha * y).collect();
    let beta = inner(a, &v);
    v.iter_mut().zip(a).for_each(|(x, &y)| *x -= beta * y);
    let rn = norm(&v);
    if rn > DEGENERATE_TOL {
        let u2: Vec<Complex64> = v.iter().map(|z| z / rn).collect();
        // Q u2 = (conj(a) - alpha b) / r, rewritten without the cancellation.
        let r = inner(&u2, &cb).re;
        let w2: Vec<Complex64> = a
            .iter()
            .zip(&u2)
            .map(|(x, u)| x.conj() * r - alpha * u.conj())
            .collect();
        basis.push(u2);
        images.push(w2);
    }

    // Complete the basis greedily from the standard basis vector least covered
    // by the current span.
    let mut coverage: Vec<f64> = (0..m)
        .map(|j| basis.iter().map(|u| u[j].norm_sqr()).sum())
        .collect();
    let mut used = vec![false; m];
    while basis.len() < m {
        let j = (0..m)
            .filter(|&j| !used[j])
            .min_by(|&x, &y| coverage[x].total_cmp(&coverage[y]))
            .expect("fewer basis vectors than dimensions leaves a candidate");
        used[j] = true;
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        v[j] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &v);
                v.iter_mut().zip(u).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        for (cov, x) in coverage.iter_mut().zip(&v) {
            *cov += x.norm_sqr();
        }
        images.push(conj(&v));
        basis.push(v);
    }

    Ok(DMatrix::from_fn(m, m, |p, q| {
        basis
            .iter()
            .zip(&images)
            .map(|(u, w)| w[p] * u[q].conj())
            .sum()
    }))
}

fn gather(v: &[Complex64], idx: &[usize]) -> Vec<Complex64> {
    idx.iter().map(|&i| v[i]).collect()
}

/// Scattering matrix attaining [`max_power`] for `arch`.
///
/// Each group block maps the normalized transmit sub-channel onto the
/// normalized conjugate receive sub-channel, so every group contributes the
/// real positive amplitude `|h_R,g| |h_T,g|`. Groups with a zero sub-channel
/// contribute nothing and get an identity block.
pub fn synth_group_optimal(
    arch: &RisArchitecture,
    h_r: &[Complex64],
    h_t: &[Complex64],
) -> Result<ScatteringMatrix> {
    let n = arch.n_elements();
    check_len(n, h_r.len())?;
    check_len(n, h_t.len())?;
    let mut entries = DMatrix::<Complex64>::zeros(n, n);
    for group in arch.groups() {
        let hr = gather(h_r, group);
        let ht = gather(h_t, group);
        let (nr, nt) = (norm(&hr), norm(&ht));
        let m = group.len();
        let block = if nr > 0.0 && nt > 0.0 {
            let a: Vec<Complex64> = ht.iter().map(|z| z / nt).collect();
            let b: Vec<Complex64> = hr.iter().map(|z| z.conj() / nr).collect();
            map_symmetric_unitary(&a, &b)?
        } else {
            DMatrix::identity(m, m)
        };
        for (p, &i) in group.iter().enumerate() {
            for (q, &j) in group.iter().enumerate() {
                entries[(i, j)] = block[(p, q)];
            }
        }
    }
    Ok(ScatteringMatrix {
        entries,
        architecture: arch.clone(),
    })
}

/// `P_T |h_r Theta h_t|^2`.
pub fn received_power(
    theta: &ScatteringMatrix,
    h_r: &[Complex64],
    h_t: &[Complex64],
    tx_power: f64,
) -> Result<f64> {
    let n = theta.n_elements();
    check_len(n, h_r.len())?;
    check_len(n, h_t.len())?;
    let scattered = theta.apply(h_t)?;
    let amplitude: Complex64 = h_r.iter().zip(&scattered).map(|(r, s)| r * s).sum();
    Ok(tx_power * amplitude.norm_sqr())
}

/// Best received power over all scattering matrices respecting `arch`:
/// `P_T (sum_g |h_R,g| |h_T,g|)^2`.
pub fn max_power(
    arch: &RisArchitecture,
    h_r: &[Complex64],
    h_t: &[Complex64],
    tx_power: f64,
) -> Result<f64> {
    let n = arch.n_elements();
    check_len(n, h_r.len())?;
    check_len(n, h_t.len())?;
    let amplitude: f64 = arch
        .groups()
        .iter()
        .map(|g| {
            let r: f64 = g.iter().map(|&i| h_r[i].norm_sqr()).sum();
            let t: f64 = g.iter().map(|&i| h_t[i].norm_sqr()).sum();
            (r * t).sqrt()
        })
        .sum();
    Ok(tx_power * amplitude * amplitude)
}
