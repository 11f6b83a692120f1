//! Demand scenarios.
//!
//! Each (request, circuit) carries finite value sets for its fidelity, qubit
//! and waiting-time demands. A request's scenario set is the Cartesian
//! product of those sets across its circuits; the full scenario space is the
//! product across requests, with probabilities multiplying out of per-value
//! weights (uniform unless given) and normalized to sum to one.

use super::{DomainError, Instance};

/// Finite set of real demand values with per-value weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSet {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ValueSet {
    pub fn uniform(values: Vec<f64>) -> Self {
        let weights = vec![1.0; values.len()];
        Self { values, weights }
    }
}

/// Finite set of integer demand values with per-value weights.
#[derive(Debug, Clone, PartialEq)]
pub struct IntValueSet {
    pub values: Vec<u32>,
    pub weights: Vec<f64>,
}

impl IntValueSet {
    pub fn uniform(values: Vec<u32>) -> Self {
        let weights = vec![1.0; values.len()];
        Self { values, weights }
    }
}

/// Demand value sets of one circuit of one request.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSets {
    pub fidelity: ValueSet,
    pub qubits: IntValueSet,
    pub wait: ValueSet,
}

impl DemandSets {
    pub fn uniform(fidelity: Vec<f64>, qubits: Vec<u32>, wait: Vec<f64>) -> Self {
        Self {
            fidelity: ValueSet::uniform(fidelity),
            qubits: IntValueSet::uniform(qubits),
            wait: ValueSet::uniform(wait),
        }
    }

    fn combinations(&self) -> usize {
        self.fidelity.values.len() * self.qubits.values.len() * self.wait.values.len()
    }
}

/// One realization of every demand, `[request][circuit]` indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub fidelity: Vec<Vec<f64>>,
    pub qubits: Vec<Vec<u32>>,
    pub wait: Vec<Vec<f64>>,
    pub probability: f64,
}

/// The enumerated scenario space plus the value sets it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpace {
    pub scenarios: Vec<Scenario>,
    /// Generating sets, `[request][circuit]`.
    pub sets: Vec<Vec<DemandSets>>,
    /// Scenario count of each request before the cross-request product.
    pub per_request_counts: Vec<usize>,
}

impl ScenarioSpace {
    /// Highest fidelity demand any circuit of `request` places in `scenario`.
    /// The shared route must satisfy the tightest circuit.
    pub fn max_fidelity_demand(&self, scenario: usize, request: usize) -> f64 {
        self.scenarios[scenario].fidelity[request]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Single-scenario space keeping only scenario `idx` with probability 1.
    pub fn restricted_to(&self, idx: usize) -> ScenarioSpace {
        let s = &self.scenarios[idx];
        let sets = s
            .fidelity
            .iter()
            .zip(&s.qubits)
            .zip(&s.wait)
            .map(|((f, q), w)| {
                f.iter()
                    .zip(q)
                    .zip(w)
                    .map(|((&fv, &qv), &wv)| DemandSets::uniform(vec![fv], vec![qv], vec![wv]))
                    .collect()
            })
            .collect();
        ScenarioSpace {
            scenarios: vec![Scenario {
                probability: 1.0,
                ..s.clone()
            }],
            sets,
            per_request_counts: vec![1; s.fidelity.len()],
        }
    }

    /// Collapses demands to probability-weighted means (qubit means rounded
    /// up: fractional qubits cannot be provisioned).
    pub fn collapse_expected(&self) -> ScenarioSpace {
        let nr = self.sets.len();
        let mut sets = Vec::with_capacity(nr);
        for r in 0..nr {
            let nc = self.sets[r].len();
            let mut row = Vec::with_capacity(nc);
            for c in 0..nc {
                let mut f = 0.0;
                let mut q = 0.0;
                let mut w = 0.0;
                for s in &self.scenarios {
                    f += s.probability * s.fidelity[r][c];
                    q += s.probability * s.qubits[r][c] as f64;
                    w += s.probability * s.wait[r][c];
                }
                let q = (q - 1e-9).ceil().max(0.0) as u32;
                row.push(DemandSets::uniform(vec![f], vec![q], vec![w]));
            }
            sets.push(row);
        }
        build_scenario_space(sets).expect("means of a valid space stay valid")
    }

    /// Trivial one-scenario space with negligible demands; useful as a
    /// placeholder when only first-stage pricing matters.
    pub fn degenerate(instance: &Instance) -> ScenarioSpace {
        let sets = instance
            .requests
            .iter()
            .map(|r| {
                r.circuits
                    .iter()
                    .map(|_| DemandSets::uniform(vec![0.01], vec![0], vec![1.0]))
                    .collect()
            })
            .collect();
        build_scenario_space(sets).expect("degenerate sets are valid")
    }
}

type NormalizedWeights = (Vec<f64>, Vec<f64>, Vec<f64>);

fn normalized_weights(weights: &[f64], what: &str) -> Result<Vec<f64>, DomainError> {
    let mut total = 0.0;
    for &w in weights {
        if w < 0.0 || !w.is_finite() {
            return Err(DomainError::Invalid(format!("negative weight in {what}")));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(DomainError::Invalid(format!("all-zero weights in {what}")));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Enumerates the full scenario space from per-(request, circuit) value sets.
///
/// `sets` is `[request][circuit]` shaped; an instance with no requests yields
/// the single empty scenario with probability 1.
pub fn build_scenario_space(sets: Vec<Vec<DemandSets>>) -> Result<ScenarioSpace, DomainError> {
    // Validate and normalize weights first.
    let mut norm: Vec<Vec<NormalizedWeights>> = Vec::with_capacity(sets.len());
    for (r, row) in sets.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (c, d) in row.iter().enumerate() {
            let what = format!("request {r} circuit {c}");
            if d.fidelity.values.is_empty()
                || d.qubits.values.is_empty()
                || d.wait.values.is_empty()
            {
                return Err(DomainError::Invalid(format!("empty value set for {what}")));
            }
            if d.fidelity.values.len() != d.fidelity.weights.len()
                || d.qubits.values.len() != d.qubits.weights.len()
                || d.wait.values.len() != d.wait.weights.len()
            {
                return Err(DomainError::Invalid(format!(
                    "weights do not match values for {what}"
                )));
            }
            for &f in &d.fidelity.values {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(DomainError::Invalid(format!(
                        "fidelity demand {f} outside (0, 1] for {what}"
                    )));
                }
            }
            for &w in &d.wait.values {
                if w < 0.0 || !w.is_finite() {
                    return Err(DomainError::Invalid(format!(
                        "negative wait demand for {what}"
                    )));
                }
            }
            out.push((
                normalized_weights(&d.fidelity.weights, &what)?,
                normalized_weights(&d.qubits.weights, &what)?,
                normalized_weights(&d.wait.weights, &what)?,
            ));
        }
        norm.push(out);
    }

    // Per-request scenario lists: product over circuits of F x Q x E.
    struct RequestScenario {
        fidelity: Vec<f64>,
        qubits: Vec<u32>,
        wait: Vec<f64>,
        probability: f64,
    }
    let mut per_request: Vec<Vec<RequestScenario>> = Vec::with_capacity(sets.len());
    for (r, row) in sets.iter().enumerate() {
        let mut acc = vec![RequestScenario {
            fidelity: Vec::new(),
            qubits: Vec::new(),
            wait: Vec::new(),
            probability: 1.0,
        }];
        for (c, d) in row.iter().enumerate() {
            let (fw, qw, ww) = &norm[r][c];
            let mut next = Vec::with_capacity(acc.len() * d.combinations());
            for base in &acc {
                for (fi, &f) in d.fidelity.values.iter().enumerate() {
                    for (qi, &q) in d.qubits.values.iter().enumerate() {
                        for (wi, &w) in d.wait.values.iter().enumerate() {
                            let mut fidelity = base.fidelity.clone();
                            let mut qubits = base.qubits.clone();
                            let mut wait = base.wait.clone();
                            fidelity.push(f);
                            qubits.push(q);
                            wait.push(w);
                            next.push(RequestScenario {
                                fidelity,
                                qubits,
                                wait,
                                probability: base.probability * fw[fi] * qw[qi] * ww[wi],
                            });
                        }
                    }
                }
            }
            acc = next;
        }
        per_request.push(acc);
    }

    // Cross-request product.
    let per_request_counts: Vec<usize> = per_request.iter().map(|v| v.len()).collect();
    let total: usize = per_request_counts.iter().product();
    let mut scenarios = Vec::with_capacity(total);
    let nr = per_request.len();
    let mut idx = vec![0usize; nr];
    loop {
        let mut fidelity = Vec::with_capacity(nr);
        let mut qubits = Vec::with_capacity(nr);
        let mut wait = Vec::with_capacity(nr);
        let mut probability = 1.0;
        for r in 0..nr {
            let s = &per_request[r][idx[r]];
            fidelity.push(s.fidelity.clone());
            qubits.push(s.qubits.clone());
            wait.push(s.wait.clone());
            probability *= s.probability;
        }
        scenarios.push(Scenario {
            fidelity,
            qubits,
            wait,
            probability,
        });
        // Odometer increment, last request fastest.
        let mut pos = nr;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per_request[pos].len() {
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if nr == 0 || pos == usize::MAX {
            break;
        }
    }

    let mass: f64 = scenarios.iter().map(|s| s.probability).sum();
    if mass <= 0.0 {
        return Err(DomainError::Invalid("scenario space has zero mass".into()));
    }
    for s in &mut scenarios {
        s.probability /= mass;
    }

    Ok(ScenarioSpace {
        scenarios,
        sets,
        per_request_counts,
    })
}
