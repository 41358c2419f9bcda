//! Exhaustive ground truth for small surfaces.
//!
//! Set partitions are generated as restricted growth strings: element `i`
//! gets a group label no larger than one plus the largest label among
//! elements `0..i`. Partial assignments whose complexity already exceeds the
//! budget (counting one component for every unassigned element) are pruned.

use serde::Serialize;

use crate::channel::{FadingKind, Polarization, SystemConfig};
use crate::closedform::pareto_power;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::scattering::{max_power, RisArchitecture, POWER_REL_TOL};

/// Largest surface [`enumerate_partitions`] accepts (Bell(12) = 4,213,597).
pub const MAX_ENUMERATION: usize = 12;
/// Largest surface [`brute_force_best`] accepts.
pub const MAX_BRUTE_FORCE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionBudget {
    n_elements: usize,
    max_complexity: Option<usize>,
}

impl PartitionBudget {
    /// `max_complexity = None` means unbounded.
    pub fn new(n_elements: usize, max_complexity: Option<usize>) -> Result<Self> {
        if let Some(budget) = max_complexity {
            if budget < n_elements {
                return Err(Error::BudgetTooSmall {
                    budget,
                    n: n_elements,
                });
            }
        }
        Ok(Self {
            n_elements,
            max_complexity,
        })
    }

    pub fn unbounded(n_elements: usize) -> Self {
        Self {
            n_elements,
            max_complexity: None,
        }
    }
}

/// Iterator over the partitions admitted by a [`PartitionBudget`].
#[derive(Debug)]
pub struct Partitions {
    n: usize,
    budget: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    next_label: Vec<usize>,
    depth: usize,
    cost: usize,
    done: bool,
}

impl Partitions {
    fn pop(&mut self) {
        self.depth -= 1;
        let g = self.labels[self.depth];
        self.cost -= self.sizes[g];
        self.sizes[g] -= 1;
        if self.sizes[g] == 0 {
            self.sizes.pop();
        }
    }

    fn current(&self) -> RisArchitecture {
        let mut groups = vec![Vec::new(); self.sizes.len()];
        for (i, &g) in self.labels.iter().enumerate() {
            groups[g].push(i);
        }
        RisArchitecture::new(self.n, groups).expect("restricted growth strings encode partitions")
    }
}

impl Iterator for Partitions {
    type Item = RisArchitecture;

    fn next(&mut self) -> Option<RisArchitecture> {
        if self.done {
            return None;
        }
        if self.depth == self.n {
            self.pop();
        }
        loop {
            let d = self.depth;
            let label = self.next_label[d];
            if label > self.sizes.len() {
                if d == 0 {
                    self.done = true;
                    return None;
                }
                self.pop();
                continue;
            }
            self.next_label[d] = label + 1;
            let size = self.sizes.get(label).copied().unwrap_or(0);
            let remaining = self.n - d - 1;
            if self.cost + size + 1 + remaining > self.budget {
                continue;
            }
            if label == self.sizes.len() {
                self.sizes.push(0);
            }
            self.sizes[label] += 1;
            self.cost += size + 1;
            self.labels[d] = label;
            self.depth += 1;
            if self.depth == self.n {
                return Some(self.current());
            }
            self.next_label[self.depth] = 0;
        }
    }
}

/// Every set partition of the elements within the budget, each exactly once,
/// in lexicographic order of their restricted growth strings.
pub fn enumerate_partitions(budget: PartitionBudget) -> Result<Partitions> {
    let n = budget.n_elements;
    if n > MAX_ENUMERATION {
        return Err(Error::TooLargeForEnumeration {
            n,
            limit: MAX_ENUMERATION,
        });
    }
    if n == 0 {
        return Err(Error::TooFewElements { min: 1, got: 0 });
    }
    Ok(Partitions {
        n,
        budget: budget.max_complexity.unwrap_or(usize::MAX),
        labels: vec![0; n],
        sizes: Vec::new(),
        next_label: vec![0; n],
        depth: 0,
        cost: 0,
        done: false,
    })
}

/// All ways to split `0..n` into pairs.
pub fn perfect_matchings(n: usize) -> Result<Vec<RisArchitecture>> {
    crate::channel::check_even(n)?;
    fn extend(rest: &[usize], acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(acc.clone());
            return;
        };
        for k in 0..tail.len() {
            acc.push(vec![first, tail[k]]);
            let remaining: Vec<usize> = tail
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &x)| x)
                .collect();
            extend(&remaining, acc, out);
            acc.pop();
        }
    }
    let elements: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    extend(&elements, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|groups| RisArchitecture::new(n, groups))
        .collect()
}

/// All `(N/2)!` matchings pairing each vertical element with a horizontal one.
pub fn opposite_matchings(n: usize) -> Result<Vec<RisArchitecture>> {
    crate::channel::check_even(n)?;
    let half = n / 2;
    fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut perms = Vec::new();
    permutations(&mut (half..n).collect(), 0, &mut perms);
    perms
        .into_iter()
        .map(|p| {
            RisArchitecture::new(
                n,
                p.into_iter().enumerate().map(|(v, h)| vec![v, h]).collect(),
            )
        })
        .collect()
}

fn opposite_los(n: usize, chi: f64) -> Result<SystemConfig> {
    SystemConfig::new(
        n,
        chi,
        Polarization::Vertical,
        Polarization::Horizontal,
        FadingKind::los_uniform(),
    )
}

/// True when `arch` is exactly `pairs` groups of two, each mixing a vertical
/// and a horizontal element, plus singletons.
pub fn is_mixed_pair_structure(arch: &RisArchitecture, pairs: usize) -> bool {
    let half = arch.n_elements() / 2;
    let mut count = 0;
    for g in arch.groups() {
        match g.as_slice() {
            [_] => {}
            [a, b] if (*a < half) != (*b < half) => count += 1,
            _ => return false,
        }
    }
    count == pairs
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub power: f64,
    /// First maximizer in enumeration order.
    pub architecture: RisArchitecture,
    /// Every architecture within [`POWER_REL_TOL`] of the maximum.
    pub maximizers: Vec<RisArchitecture>,
    pub evaluated: usize,
}

/// Maximizes the optimal power over every partition with complexity at most
/// `N + n`, for opposite-polarization LoS channels with phases drawn from `seed`.
pub fn brute_force_best(
    n_elements: usize,
    n: usize,
    chi: f64,
    seed: u64,
) -> Result<BruteForceResult> {
    if n_elements > MAX_BRUTE_FORCE {
        return Err(Error::TooLargeForEnumeration {
            n: n_elements,
            limit: MAX_BRUTE_FORCE,
        });
    }
    if n > n_elements / 2 {
        return Err(Error::PairCountOutOfRange {
            n,
            max: n_elements / 2,
        });
    }
    let config = opposite_los(n_elements, chi)?;
    let ch = config.realize(&mut substream(seed, 0))?;
    let budget = PartitionBudget::new(n_elements, Some(n_elements + n))?;
    let scored: Vec<(f64, RisArchitecture)> = enumerate_partitions(budget)?
        .map(|arch| Ok((max_power(&arch, ch.h_r(), ch.h_t(), 1.0)?, arch)))
        .collect::<Result<_>>()?;
    let best = scored
        .iter()
        .map(|(p, _)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - POWER_REL_TOL * best.abs();
    let evaluated = scored.len();
    let maximizers: Vec<RisArchitecture> = scored
        .into_iter()
        .filter(|(p, _)| *p >= threshold)
        .map(|(_, a)| a)
        .collect();
    Ok(BruteForceResult {
        power: best,
        architecture: maximizers[0].clone(),
        maximizers,
        evaluated,
    })
}

/// Checks that the pairing reaches `(1 + chi)^2 N^2 / 4` for `draws`
/// independent opposite-polarization LoS phase draws.
pub fn verify_prop1(
    n_elements: usize,
    chi: f64,
    pairing: &RisArchitecture,
    draws: usize,
    seed: u64,
) -> Result<bool> {
    crate::channel::check_even(n_elements)?;
    if pairing.n_elements() != n_elements {
        return Err(Error::InvalidMatching(format!(
            "pairing covers {} elements, expected {n_elements}",
            pairing.n_elements()
        )));
    }
    if !is_mixed_pair_structure(pairing, n_elements / 2) {
        return Err(Error::InvalidMatching(format!(
            "{pairing} does not pair every vertical element with a horizontal one"
        )));
    }
    let config = opposite_los(n_elements, chi)?;
    let n = n_elements as f64;
    let bound = (1.0 + chi) * (1.0 + chi) * n * n / 4.0;
    for d in 0..draws as u64 {
        let ch = config.realize(&mut substream(seed, d))?;
        let p = max_power(pairing, ch.h_r(), ch.h_t(), 1.0)?;
        if (p - bound).abs() > POWER_REL_TOL * bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Brute force against the frontier formula for one `(N, n, chi)` tuple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub n_elements: usize,
    pub n: usize,
    pub chi: f64,
    pub complexity_budget: usize,
    pub brute_force_power: f64,
    pub pareto_power: f64,
    pub rel_error: f64,
    pub partitions_evaluated: usize,
    pub maximizers: usize,
    /// Whether every maximizer is `n` mixed pairs plus singletons; only
    /// checked for `0 < chi < 1` and `n >= 1`, where ties cannot occur.
    pub structure_ok: Option<bool>,
    pub best_architecture: String,
    pub pass: bool,
}

pub fn oracle_check(n_elements: usize, n: usize, chi: f64, seed: u64) -> Result<OracleVerdict> {
    let result = brute_force_best(n_elements, n, chi, seed)?;
    let formula = pareto_power(n_elements, n, chi)?;
    let rel_error = if formula == 0.0 {
        result.power.abs()
    } else {
        (result.power - formula).abs() / formula
    };
    let structure_ok = (chi > 0.0 && chi < 1.0 && n >= 1).then(|| {
        result
            .maximizers
            .iter()
            .all(|a| is_mixed_pair_structure(a, n))
    });
    let pass = rel_error <= POWER_REL_TOL && structure_ok.unwrap_or(true);
    Ok(OracleVerdict {
        n_elements,
        n,
        chi,
        complexity_budget: n_elements + n,
        brute_force_power: result.power,
        pareto_power: formula,
        rel_error,
        partitions_evaluated: result.evaluated,
        maximizers: result.maximizers.len(),
        structure_ok,
        best_architecture: result.architecture.to_string(),
        pass,
    })
}
