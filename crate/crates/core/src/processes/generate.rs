//! Random enumerable scenarios for certification sweeps.

use rand::Rng;

use super::{build_rademacher, build_set_indexed, Atom, CoordinateDist, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    General,
    Rademacher,
    SetIndexed,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::General,
        ScenarioKind::Rademacher,
        ScenarioKind::SetIndexed,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorLimits {
    pub max_n: usize,
    pub max_atoms: usize,
    pub max_m: usize,
}

impl Default for GeneratorLimits {
    fn default() -> Self {
        Self {
            max_n: 6,
            max_atoms: 4,
            max_m: 8,
        }
    }
}

fn random_probs<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Centers `raw` under `probs` and rescales into `[-1, 1]` if needed.
fn center_into_unit(raw: &[f64], probs: &[f64]) -> Vec<f64> {
    let mean: f64 = raw.iter().zip(probs).map(|(v, p)| v * p).sum();
    let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let top = centered.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if top > 1.0 {
        centered.into_iter().map(|v| v / top).collect()
    } else {
        centered
    }
}

fn random_centered_law<R: Rng>(rng: &mut R, max_atoms: usize) -> CoordinateDist {
    let len = rng.gen_range(2..=max_atoms.max(2));
    let probs = random_probs(rng, len);
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let values = center_into_unit(&raw, &probs);
    let atoms = values
        .into_iter()
        .zip(probs)
        .map(|(value, prob)| Atom { value, prob })
        .collect();
    CoordinateDist::new(atoms).expect("normalized probabilities")
}

/// Draws a valid scenario of the requested kind within `limits`.
pub fn random_scenario<R: Rng>(rng: &mut R, kind: ScenarioKind, limits: GeneratorLimits) -> Scenario {
    let n = rng.gen_range(1..=limits.max_n);
    let m = rng.gen_range(1..=limits.max_m);
    match kind {
        ScenarioKind::Rademacher => {
            let signs = rng.gen_bool(0.5);
            let coords = (!signs).then(|| (0..n).map(|_| random_centered_law(rng, limits.max_atoms)).collect());
            let zeta: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .collect();
            build_rademacher(&zeta, coords).expect("|x·ζ| ≤ 1 by construction")
        }
        ScenarioKind::SetIndexed => {
            let space = rng.gen_range(2..=limits.max_atoms.max(2));
            let probs: Vec<Vec<f64>> = (0..n).map(|_| random_probs(rng, space)).collect();
            let sets: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let mut set: Vec<usize> = (0..space).filter(|_| rng.gen_bool(0.5)).collect();
                    if set.is_empty() {
                        set.push(rng.gen_range(0..space));
                    }
                    set
                })
                .collect();
            build_set_indexed(space, &probs, &sets).expect("valid set-indexed class")
        }
        ScenarioKind::General => {
            let coords: Vec<CoordinateDist> = (0..n)
                .map(|k| {
                    let len = rng.gen_range(2..=limits.max_atoms.max(2));
                    let atoms = random_probs(rng, len)
                        .into_iter()
                        .enumerate()
                        .map(|(j, prob)| Atom {
                            value: (k * 10 + j) as f64,
                            prob,
                        })
                        .collect();
                    CoordinateDist::new(atoms).expect("normalized probabilities")
                })
                .collect();
            let values = (0..m)
                .map(|_| {
                    coords
                        .iter()
                        .map(|c| {
                            let probs: Vec<f64> = c.atoms().iter().map(|a| a.prob).collect();
                            let raw: Vec<f64> = (0..c.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                            center_into_unit(&raw, &probs)
                        })
                        .collect()
                })
                .collect();
            Scenario::new_validated(coords, values).expect("centered within tolerance")
        }
    }
}
