//! Finite function classes over independent discrete coordinates, and the
//! supremum `Z = max_i Σ_k s_i^k(X_k)` they induce.
//!
//! A [`Scenario`] stores, for every function `i` and coordinate `k`, the value
//! of `s_i^k` at each atom of the law of `X_k`. Exact summaries come from
//! brute-force enumeration of the product space ([`enumerate_exact`]);
//! Monte Carlo estimates from counter-based per-trial streams
//! ([`estimate_stats`]).

mod enumerate;
pub mod format;
pub mod generate;
mod montecarlo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{
    compute_talagrand_v, enumerate_exact, enumerate_exact_with_cap, outcome_count, ExactSummary,
    DEFAULT_ENUMERATION_CAP,
};
pub use montecarlo::{
    draw_many, estimate_stats, mix64, sample_z, trial_uniform, with_workers, Moments, SimResult, TailEstimate,
    CONFIDENCE_SIGMAS,
};

/// Tolerance on `Σ prob = 1` for a coordinate law.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Tolerance on `E s_i^k(X_k) = 0`.
pub const CENTERING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Finite law of one coordinate `X_k`. Atom values are labels; they only
/// enter a function table through a builder (e.g. `x·ζ` for Rademacher
/// classes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateDist {
    atoms: Vec<Atom>,
}

impl CoordinateDist {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Scenario("coordinate law has no atoms".into()));
        }
        for (j, a) in atoms.iter().enumerate() {
            if !a.value.is_finite() {
                return Err(Error::Scenario(format!("atom {j} has non-finite value")));
            }
            if !(a.prob > 0.0 && a.prob <= 1.0) {
                return Err(Error::Scenario(format!(
                    "atom {j} probability {} outside (0, 1]",
                    a.prob
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Scenario(format!("atom probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    /// Symmetric ±1 signs.
    pub fn signs() -> Self {
        Self {
            atoms: vec![Atom { value: -1.0, prob: 0.5 }, Atom { value: 1.0, prob: 0.5 }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|a| a.value)
    }

    /// `Σ prob·f(atom)`.
    pub fn expect(&self, f: impl Fn(&Atom) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.prob * f(a)).sum()
    }
}

/// A finite class of `m` functions over `n` independent coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    coords: Vec<CoordinateDist>,
    /// `values[i][k][j] = s_i^k(atom j of X_k)`
    values: Vec<Vec<Vec<f64>>>,
}

/// A broken hypothesis found by [`validate`]. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Centering {
        function: usize,
        coordinate: usize,
        mean: f64,
    },
    Range {
        function: usize,
        coordinate: usize,
        atom: usize,
        value: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Centering {
                function,
                coordinate,
                mean,
            } => write!(f, "function {function}, coordinate {coordinate}: mean {mean} is not 0"),
            Violation::Range {
                function,
                coordinate,
                atom,
                value,
            } => write!(
                f,
                "function {function}, coordinate {coordinate}, atom {atom}: value {value} outside [-1, 1]"
            ),
        }
    }
}

impl Scenario {
    /// Checks shapes only; hypotheses are checked by [`validate`].
    pub fn new(coords: Vec<CoordinateDist>, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Scenario("function class is empty".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != coords.len() {
                return Err(Error::Scenario(format!(
                    "function {i} has {} coordinates, expected {}",
                    row.len(),
                    coords.len()
                )));
            }
            for (k, cell) in row.iter().enumerate() {
                if cell.len() != coords[k].len() {
                    return Err(Error::Scenario(format!(
                        "function {i}, coordinate {k} has {} values, expected {} (one per atom)",
                        cell.len(),
                        coords[k].len()
                    )));
                }
                if cell.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Scenario(format!(
                        "function {i}, coordinate {k} has a non-finite value"
                    )));
                }
            }
        }
        Ok(Self { coords, values })
    }

    /// Like [`Scenario::new`] but also rejects any [`validate`] violation.
    pub fn new_validated(coords: Vec<CoordinateDist>, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let s = Self::new(coords, values)?;
        match validate(&s).first() {
            None => Ok(s),
            Some(v) => Err(Error::Scenario(v.to_string())),
        }
    }

    /// Number of coordinates `n`.
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Number of functions `m`.
    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn coords(&self) -> &[CoordinateDist] {
        &self.coords
    }

    /// `s_i^k` evaluated at each atom of `X_k`.
    pub fn values(&self, i: usize, k: usize) -> &[f64] {
        &self.values[i][k]
    }

    /// `Z` at the outcome selecting atom `atoms[k]` of each coordinate.
    pub fn z_at(&self, atoms: &[usize]) -> f64 {
        self.values
            .iter()
            .map(|row| row.iter().zip(atoms).map(|(cell, &j)| cell[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `s_i^k(x) = x·ζ_ik` over the given coordinate laws (symmetric signs when
/// `coord_dists` is `None`).
pub fn build_rademacher(zeta: &[Vec<f64>], coord_dists: Option<Vec<CoordinateDist>>) -> Result<Scenario> {
    let n = zeta.first().map(Vec::len).unwrap_or(0);
    if zeta.is_empty() || n == 0 {
        return Err(Error::Scenario("zeta must be a non-empty m×n matrix".into()));
    }
    if let Some(i) = zeta.iter().position(|row| row.len() != n) {
        return Err(Error::Scenario(format!(
            "zeta row {i} has length {}, expected {n}",
            zeta[i].len()
        )));
    }
    let coords = coord_dists.unwrap_or_else(|| vec![CoordinateDist::signs(); n]);
    if coords.len() != n {
        return Err(Error::Scenario(format!(
            "zeta has {n} columns but {} coordinate laws were given",
            coords.len()
        )));
    }
    for (k, c) in coords.iter().enumerate() {
        let mean = c.mean();
        if mean.abs() > CENTERING_TOL {
            return Err(Error::Scenario(format!("coordinate {k} is not centered (mean {mean})")));
        }
    }
    let mut values = Vec::with_capacity(zeta.len());
    for (i, row) in zeta.iter().enumerate() {
        let mut cells = Vec::with_capacity(n);
        for (k, &z) in row.iter().enumerate() {
            let cell: Vec<f64> = coords[k].atoms().iter().map(|a| a.value * z).collect();
            if let Some(j) = cell.iter().position(|v| v.abs() > 1.0) {
                return Err(Error::Scenario(format!(
                    "zeta[{i}][{k}] = {z} maps atom {j} to {} outside [-1, 1]",
                    cell[j]
                )));
            }
            cells.push(cell);
        }
        values.push(cells);
    }
    Scenario::new(coords, values)
}

/// Set-indexed class: `s^k(x) = 1{x ∈ S} − P(X_k ∈ S)` with `X_k` supported
/// on `{0, …, space_size − 1}`. Points of zero probability are dropped from
/// the support.
pub fn build_set_indexed(space_size: usize, coord_probs: &[Vec<f64>], sets: &[Vec<usize>]) -> Result<Scenario> {
    if space_size == 0 {
        return Err(Error::Scenario("space_size must be positive".into()));
    }
    if sets.is_empty() {
        return Err(Error::Scenario("set collection is empty".into()));
    }
    if coord_probs.is_empty() {
        return Err(Error::Scenario("no coordinates given".into()));
    }
    let mut coords = Vec::with_capacity(coord_probs.len());
    let mut supports = Vec::with_capacity(coord_probs.len());
    for (k, probs) in coord_probs.iter().enumerate() {
        if probs.len() != space_size {
            return Err(Error::Scenario(format!(
                "coordinate {k} probability vector has length {}, expected {space_size}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Scenario(format!(
                "coordinate {k} has a probability outside [0, 1]"
            )));
        }
        let support: Vec<usize> = (0..space_size).filter(|&x| probs[x] > 0.0).collect();
        let atoms = support
            .iter()
            .map(|&x| Atom {
                value: x as f64,
                prob: probs[x],
            })
            .collect();
        coords.push(CoordinateDist::new(atoms).map_err(|e| Error::Scenario(format!("coordinate {k}: {e}")))?);
        supports.push(support);
    }
    let mut values = Vec::with_capacity(sets.len());
    for (i, set) in sets.iter().enumerate() {
        if let Some(&bad) = set.iter().find(|&&x| x >= space_size) {
            return Err(Error::Scenario(format!("set {i} contains {bad}, outside the space")));
        }
        let mut member = vec![false; space_size];
        for &x in set {
            member[x] = true;
        }
        let row = supports
            .iter()
            .zip(coord_probs)
            .map(|(support, probs)| {
                let p_in: f64 = (0..space_size).filter(|&x| member[x]).map(|x| probs[x]).sum();
                support
                    .iter()
                    .map(|&x| if member[x] { 1.0 - p_in } else { -p_in })
                    .collect()
            })
            .collect();
        values.push(row);
    }
    Scenario::new(coords, values)
}

/// Lists every centering or range violation; empty iff the scenario meets
/// the hypotheses of the bounds. Never modifies the scenario.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..s.m() {
        for (k, coord) in s.coords.iter().enumerate() {
            let cell = s.values(i, k);
            for (j, &value) in cell.iter().enumerate() {
                if value.abs() > 1.0 {
                    out.push(Violation::Range {
                        function: i,
                        coordinate: k,
                        atom: j,
                        value,
                    });
                }
            }
            let mean: f64 = coord.atoms().iter().zip(cell).map(|(a, v)| a.prob * v).sum();
            if mean.abs() > CENTERING_TOL {
                out.push(Violation::Centering {
                    function: i,
                    coordinate: k,
                    mean,
                });
            }
        }
    }
    out
}

/// Maximal variance `V_n = max_i Σ_k Var s_i^k(X_k)`, exact over the atoms.
#[allow(non_snake_case)]
pub fn compute_Vn(s: &Scenario) -> f64 {
    (0..s.m())
        .map(|i| {
            s.coords
                .iter()
                .enumerate()
                .map(|(k, coord)| {
                    let cell = s.values(i, k);
                    let mean: f64 = coord.atoms().iter().zip(cell).map(|(a, v)| a.prob * v).sum();
                    coord
                        .atoms()
                        .iter()
                        .zip(cell)
                        .map(|(a, v)| a.prob * (v - mean) * (v - mean))
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
