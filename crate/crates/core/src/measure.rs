//! Invariant measures with exact cylinder probabilities, partition and
//! cover entropies, and entropy rates along the box sequence.
//!
//! Bernoulli measures work in any dimension; stationary Markov measures are
//! restricted to d = 1, where cylinder probabilities stay exactly
//! computable. Cover entropy minimizes the Shannon entropy over assignments
//! of generated-partition atoms to containing cover elements; the exact
//! mode is a branch-and-bound whose lower bound pours all unassigned mass
//! into the heaviest open block (that vector majorizes every completion, so
//! its entropy is a valid bound).

use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::lattice::{folner_box, FiniteSubset};
use crate::numeric::xlogx;
use crate::space::{
    generated_partition, join_over, refines, ClopenSet, Cover, Partition, ShiftSpace,
};

/// A shift-invariant measure: Bernoulli over any Z^d, or a stationary
/// Markov chain on Z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InvariantMeasure {
    Bernoulli {
        p: Vec<f64>,
    },
    Markov {
        /// Row-stochastic transition matrix, row-major.
        transition: Vec<Vec<f64>>,
        /// Stationary vector with `pi P = pi`.
        stationary: Vec<f64>,
    },
}

fn validate_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptySet("probability vector"));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument("negative probability entry".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

impl InvariantMeasure {
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        validate_probability_vector(&p)?;
        Ok(InvariantMeasure::Bernoulli { p })
    }

    /// Uniform Bernoulli on k symbols.
    pub fn uniform(k: usize) -> Self {
        InvariantMeasure::Bernoulli {
            p: vec![1.0 / k as f64; k],
        }
    }

    /// Stationary Markov measure. When `stationary` is omitted it is
    /// computed by damped fixed-point iteration to 1e-14.
    pub fn markov(transition: Vec<Vec<f64>>, stationary: Option<Vec<f64>>) -> Result<Self> {
        let k = transition.len();
        if k == 0 {
            return Err(Error::EmptySet("transition matrix"));
        }
        for row in &transition {
            if row.len() != k {
                return Err(Error::InvalidArgument(
                    "transition matrix must be square".into(),
                ));
            }
            validate_probability_vector(row)?;
        }
        let pi = match stationary {
            Some(pi) => {
                validate_probability_vector(&pi)?;
                pi
            }
            None => stationary_vector(&transition),
        };
        if pi.len() != k {
            return Err(Error::InvalidArgument(
                "stationary vector length must match the matrix".into(),
            ));
        }
        for j in 0..k {
            let image: f64 = (0..k).map(|i| pi[i] * transition[i][j]).sum();
            if (image - pi[j]).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "stationary vector is not invariant at index {j}: {image} vs {}",
                    pi[j]
                )));
            }
        }
        Ok(InvariantMeasure::Markov {
            transition,
            stationary: pi,
        })
    }

    /// The maximal-entropy (Parry) measure of a d = 1 nearest-neighbor SFT,
    /// built from the transfer-matrix power iteration.
    pub fn parry(space: &ShiftSpace) -> Result<Self> {
        if space.dim() != 1 {
            return Err(Error::InvalidArgument(
                "Parry measure needs a one-dimensional space".into(),
            ));
        }
        let k = space.alphabet() as usize;
        let pair = FiniteSubset::from_coords(1, &[&[0], &[1]])?;
        let mut adjacency = vec![vec![0.0f64; k]; k];
        for a in 0..k as u8 {
            for b in 0..k as u8 {
                if crate::space::locally_admissible(space, &pair, &[a, b]) {
                    adjacency[a as usize][b as usize] = 1.0;
                }
            }
        }
        // Right Perron eigenvector by power iteration.
        let mut v = vec![1.0f64; k];
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let mut next = vec![0.0f64; k];
            for i in 0..k {
                for j in 0..k {
                    next[i] += adjacency[i][j] * v[j];
                }
            }
            lambda = next.iter().fold(0.0f64, |a, &b| a.max(b));
            if lambda <= 0.0 {
                return Err(Error::Infeasible("transfer matrix is nilpotent".into()));
            }
            let mut delta = 0.0f64;
            for i in 0..k {
                next[i] /= lambda;
                delta = delta.max((next[i] - v[i]).abs());
            }
            v = next;
            if delta < 1e-15 {
                break;
            }
        }
        let mut transition = vec![vec![0.0f64; k]; k];
        for i in 0..k {
            for j in 0..k {
                if adjacency[i][j] > 0.0 && v[i] > 0.0 {
                    transition[i][j] = v[j] / (lambda * v[i]);
                }
            }
            let row: f64 = transition[i].iter().sum();
            if row > 0.0 {
                for x in &mut transition[i] {
                    *x /= row;
                }
            } else {
                transition[i][i] = 1.0;
            }
        }
        InvariantMeasure::markov(transition, None)
    }

    pub fn alphabet(&self) -> usize {
        match self {
            InvariantMeasure::Bernoulli { p } => p.len(),
            InvariantMeasure::Markov { stationary, .. } => stationary.len(),
        }
    }

    pub fn is_markov(&self) -> bool {
        matches!(self, InvariantMeasure::Markov { .. })
    }

    /// Exact probability of one pattern on a window. Markov measures
    /// require d = 1; gaps between consecutive positions are bridged with
    /// transition-matrix powers, which equals summing over all gap
    /// fillings.
    pub fn pattern_prob(&self, window: &FiniteSubset, symbols: &[u8]) -> Result<f64> {
        debug_assert_eq!(window.len(), symbols.len());
        match self {
            InvariantMeasure::Bernoulli { p } => {
                let mut prob = 1.0;
                for &s in symbols {
                    prob *= p[s as usize];
                }
                Ok(prob)
            }
            InvariantMeasure::Markov {
                transition,
                stationary,
            } => {
                if window.is_empty() {
                    return Ok(1.0);
                }
                if window.dim() != 1 {
                    return Err(Error::InvalidArgument(
                        "Markov measures are restricted to d = 1".into(),
                    ));
                }
                let mut prob = stationary[symbols[0] as usize];
                for i in 1..symbols.len() {
                    let gap = window.points()[i].coords()[0] - window.points()[i - 1].coords()[0];
                    let a = symbols[i - 1] as usize;
                    let b = symbols[i] as usize;
                    prob *= if gap == 1 {
                        transition[a][b]
                    } else {
                        matrix_power_entry(transition, gap as u64, a, b)
                    };
                    if prob == 0.0 {
                        return Ok(0.0);
                    }
                }
                Ok(prob)
            }
        }
    }

    /// Closed-form Markov entropy rate `Σ_i π_i Σ_j -P_ij log P_ij`; `None`
    /// for Bernoulli measures.
    pub fn markov_entropy_rate(&self) -> Option<f64> {
        match self {
            InvariantMeasure::Bernoulli { .. } => None,
            InvariantMeasure::Markov {
                transition,
                stationary,
            } => {
                let mut h = 0.0;
                for (i, row) in transition.iter().enumerate() {
                    let row_h: f64 = row.iter().map(|&x| -xlogx(x)).sum();
                    h += stationary[i] * row_h;
                }
                Some(h)
            }
        }
    }
}

fn stationary_vector(transition: &[Vec<f64>]) -> Vec<f64> {
    let k = transition.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..500_000 {
        let mut next = vec![0.0f64; k];
        for i in 0..k {
            for j in 0..k {
                next[j] += pi[i] * transition[i][j];
            }
        }
        // Damping keeps periodic chains convergent; the fixed point is
        // unchanged.
        let mut delta = 0.0f64;
        for j in 0..k {
            next[j] = 0.5 * next[j] + 0.5 * pi[j];
            delta = delta.max((next[j] - pi[j]).abs());
        }
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    let total: f64 = pi.iter().sum();
    for x in &mut pi {
        *x /= total;
    }
    pi
}

fn matrix_power_entry(m: &[Vec<f64>], mut e: u64, a: usize, b: usize) -> f64 {
    let k = m.len();
    let mut base: Vec<Vec<f64>> = m.to_vec();
    let mut acc: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    acc[a][b]
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut out = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        for l in 0..k {
            let x = a[i][l];
            if x == 0.0 {
                continue;
            }
            for j in 0..k {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

/// Exact measure of a clopen set: the sum of its pattern probabilities.
pub fn cylinder_prob(mu: &InvariantMeasure, set: &ClopenSet) -> Result<f64> {
    let mut total = 0.0;
    for pattern in &set.patterns {
        total += mu.pattern_prob(&set.window, pattern)?;
    }
    Ok(total)
}

/// Shannon entropy of a partition in natural log, with 0 log 0 = 0.
pub fn partition_entropy(mu: &InvariantMeasure, alpha: &Partition) -> Result<f64> {
    let mut h = 0.0;
    for element in alpha.elements() {
        let mut mass = 0.0;
        for pattern in element {
            mass += mu.pattern_prob(alpha.window(), pattern)?;
        }
        h -= xlogx(mass);
    }
    Ok(h)
}

/// Assignment mode for the entropy and pressure minimizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptMode {
    Exact,
    Greedy,
}

/// Result of the cover-entropy minimization.
#[derive(Clone, Debug, Serialize)]
pub struct CoverEntropy {
    pub value: f64,
    /// Chosen cover element per atom of the generated partition.
    pub assignment: Vec<usize>,
    /// True when the optimum was certified (exact mode completed).
    pub certified: bool,
    /// For greedy mode: upper bound on `value - optimum`.
    pub gap_bound: Option<f64>,
}

/// `H_mu(U) = inf H_mu(beta)` over partitions `beta` whose blocks are
/// unions of generated-partition atoms, each block inside one element of
/// the cover.
pub fn cover_entropy(
    space: &ShiftSpace,
    mu: &InvariantMeasure,
    cover: &Cover,
    mode: OptMode,
    budgets: &Budgets,
) -> Result<CoverEntropy> {
    let (alpha, masks) = generated_partition(space, cover, budgets)?;
    let mut masses = Vec::with_capacity(alpha.len());
    for element in alpha.elements() {
        let mut mass = 0.0;
        for pattern in element {
            mass += mu.pattern_prob(alpha.window(), pattern)?;
        }
        masses.push(mass);
    }
    for (i, &m) in masks.iter().enumerate() {
        if m == 0 && masses[i] > 1e-12 {
            return Err(Error::InvalidArgument(
                "cover misses a positive-mass atom".into(),
            ));
        }
    }

    // Partition fast path: at most one containing element per atom.
    if masks.iter().all(|&m| m.count_ones() <= 1) {
        let value = -masses.iter().map(|&m| xlogx(m)).sum::<f64>();
        let assignment = masks
            .iter()
            .map(|&m| {
                if m == 0 {
                    0
                } else {
                    m.trailing_zeros() as usize
                }
            })
            .collect();
        return Ok(CoverEntropy {
            value,
            assignment,
            certified: true,
            gap_bound: Some(0.0),
        });
    }

    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| masses[b].partial_cmp(&masses[a]).unwrap().then(a.cmp(&b)));

    let n_elements = cover.len();
    let (greedy_value, greedy_assignment) =
        greedy_entropy_assignment(&order, &masses, &masks, n_elements);
    let alpha_entropy = -masses.iter().map(|&m| xlogx(m)).sum::<f64>();

    match mode {
        OptMode::Greedy => {
            // H(alpha) <= H(beta) + H(alpha | beta) <= H(beta) + log(#atoms).
            let lower = (alpha_entropy - (masses.len().max(1) as f64).ln()).max(0.0);
            Ok(CoverEntropy {
                value: greedy_value,
                assignment: greedy_assignment,
                certified: false,
                gap_bound: Some((greedy_value - lower).max(0.0)),
            })
        }
        OptMode::Exact => {
            if masses.len() > budgets.entropy_exact_atoms {
                return Err(Error::BudgetExceeded {
                    what: "cover_entropy exact mode (atoms); use greedy".into(),
                    needed: masses.len() as u64,
                    budget: budgets.entropy_exact_atoms as u64,
                });
            }
            if n_elements > budgets.entropy_exact_elements {
                return Err(Error::BudgetExceeded {
                    what: "cover_entropy exact mode (elements); use greedy".into(),
                    needed: n_elements as u64,
                    budget: budgets.entropy_exact_elements as u64,
                });
            }
            let mut search = EntropySearch {
                order: &order,
                masses: &masses,
                masks: &masks,
                blocks: vec![0.0; n_elements],
                assignment: vec![usize::MAX; masses.len()],
                best_value: greedy_value,
                best_assignment: greedy_assignment,
                nodes: 0,
                node_budget: budgets.entropy_bb_nodes,
            };
            search.run(0)?;
            Ok(CoverEntropy {
                value: search.best_value,
                assignment: search.best_assignment,
                certified: true,
                gap_bound: Some(0.0),
            })
        }
    }
}

fn greedy_entropy_assignment(
    order: &[usize],
    masses: &[f64],
    masks: &[u64],
    n_elements: usize,
) -> (f64, Vec<usize>) {
    let mut blocks = vec![0.0f64; n_elements];
    let mut assignment = vec![0usize; masses.len()];
    for &atom in order {
        let mut best: Option<usize> = None;
        let mut m = masks[atom];
        while m != 0 {
            let el = m.trailing_zeros() as usize;
            if best.is_none_or(|b| blocks[el] > blocks[b]) {
                best = Some(el);
            }
            m &= m - 1;
        }
        let el = best.unwrap_or(0);
        blocks[el] += masses[atom];
        assignment[atom] = el;
    }
    let value = -blocks.iter().map(|&b| xlogx(b)).sum::<f64>();
    (value, assignment)
}

struct EntropySearch<'a> {
    order: &'a [usize],
    masses: &'a [f64],
    masks: &'a [u64],
    blocks: Vec<f64>,
    assignment: Vec<usize>,
    best_value: f64,
    best_assignment: Vec<usize>,
    nodes: u64,
    node_budget: u64,
}

impl EntropySearch<'_> {
    fn run(&mut self, idx: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(Error::BudgetExceeded {
                what: "cover_entropy exact search nodes; use greedy".into(),
                needed: self.nodes,
                budget: self.node_budget,
            });
        }
        if idx == self.order.len() {
            let value = -self.blocks.iter().map(|&b| xlogx(b)).sum::<f64>();
            if value < self.best_value - 1e-15 {
                self.best_value = value;
                self.best_assignment = self.assignment.clone();
            }
            return Ok(());
        }
        // Admissible lower bound: pour all unassigned mass into the largest
        // open block; that vector majorizes every completion.
        let remaining: f64 = self.order[idx..].iter().map(|&a| self.masses[a]).sum();
        let mut imax = 0usize;
        for (i, &b) in self.blocks.iter().enumerate() {
            if b > self.blocks[imax] {
                imax = i;
            }
        }
        let mut bound = -xlogx(self.blocks[imax] + remaining);
        for (i, &b) in self.blocks.iter().enumerate() {
            if i != imax {
                bound -= xlogx(b);
            }
        }
        if bound >= self.best_value - 1e-15 {
            return Ok(());
        }
        let atom = self.order[idx];
        let mut m = self.masks[atom];
        while m != 0 {
            let el = m.trailing_zeros() as usize;
            self.blocks[el] += self.masses[atom];
            self.assignment[atom] = el;
            self.run(idx + 1)?;
            self.blocks[el] -= self.masses[atom];
            m &= m - 1;
        }
        self.assignment[atom] = usize::MAX;
        Ok(())
    }
}

/// Per-box normalized entropies along the Følner boxes.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    /// (n, H(alpha_{F_n}) / |F_n|).
    pub values: Vec<(u32, f64)>,
    /// Running minimum of the normalized values; a valid upper bound for
    /// the rate because H(alpha_F) is strongly sub-additive.
    pub inf_to_date: Vec<(u32, f64)>,
    /// (H_n - H_{n-1}) / (|F_n| - |F_{n-1}|); in one dimension this is the
    /// sharp estimate.
    pub increments: Vec<(u32, f64)>,
    /// Headline estimate: last increment for d = 1, last inf otherwise.
    pub rate_estimate: f64,
    /// Final inf-to-date.
    pub inf_estimate: f64,
    /// Closed-form Markov rate for comparison, when the measure is Markov.
    pub markov_closed_form: Option<f64>,
}

/// Entropy rate `h_mu(G, alpha)` estimated along boxes up to `n_max`.
pub fn entropy_rate(
    space: &ShiftSpace,
    mu: &InvariantMeasure,
    alpha: &Partition,
    n_max: u32,
    budgets: &Budgets,
) -> Result<EntropyReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let mut raw: Vec<(u32, f64, f64)> = Vec::new(); // (n, |F_n|, H)
    for n in 1..=n_max {
        let f_n = folner_box(space.dim(), n)?;
        let h = joined_partition_entropy(space, mu, alpha, &f_n, budgets)?;
        raw.push((n, f_n.len() as f64, h));
    }
    let values: Vec<(u32, f64)> = raw.iter().map(|&(n, size, h)| (n, h / size)).collect();
    let mut inf_to_date = Vec::with_capacity(values.len());
    let mut running = f64::INFINITY;
    for &(n, v) in &values {
        running = running.min(v);
        inf_to_date.push((n, running));
    }
    let increments: Vec<(u32, f64)> = raw
        .windows(2)
        .map(|w| (w[1].0, (w[1].2 - w[0].2) / (w[1].1 - w[0].1)))
        .collect();
    let inf_estimate = running;
    let rate_estimate = if space.dim() == 1 && !increments.is_empty() {
        increments.last().unwrap().1
    } else {
        inf_estimate
    };
    Ok(EntropyReport {
        values,
        inf_to_date,
        increments,
        rate_estimate,
        inf_estimate,
        markov_closed_form: mu.markov_entropy_rate(),
    })
}

/// `H_mu(alpha_F)` for a partition, streaming when every element is a
/// single pattern.
pub fn joined_partition_entropy(
    space: &ShiftSpace,
    mu: &InvariantMeasure,
    alpha: &Partition,
    f_set: &FiniteSubset,
    budgets: &Budgets,
) -> Result<f64> {
    if f_set.is_empty() {
        return Ok(0.0);
    }
    if alpha.cover().all_singletons() {
        let mut window = FiniteSubset::empty(space.dim());
        for g in f_set.iter() {
            window = window.union(&alpha.window().translate(g))?;
        }
        let mut h = 0.0;
        stream_masses(space, mu, &window, budgets, &mut |_, mass| {
            h -= xlogx(mass);
        })?;
        return Ok(h);
    }
    let joined = join_over(space, alpha.cover(), f_set, budgets)?;
    let mut h = 0.0;
    for element in joined.elements() {
        let mut mass = 0.0;
        for pattern in element {
            mass += mu.pattern_prob(joined.window(), pattern)?;
        }
        h -= xlogx(mass);
    }
    Ok(h)
}

enum MassSteps {
    Bernoulli(Vec<f64>),
    Markov {
        stationary: Vec<f64>,
        /// Per depth >= 1: the k x k bridge matrix across the gap to the
        /// previous window position.
        step: Vec<Vec<Vec<f64>>>,
    },
}

/// Streams (pattern, exact mass) for all admissible patterns on a window,
/// computing probabilities incrementally along the lexicographic DFS.
pub(crate) fn stream_masses<F: FnMut(&[u8], f64)>(
    space: &ShiftSpace,
    mu: &InvariantMeasure,
    window: &FiniteSubset,
    budgets: &Budgets,
    visit: &mut F,
) -> Result<u64> {
    let inc = match mu {
        InvariantMeasure::Bernoulli { p } => MassSteps::Bernoulli(p.clone()),
        InvariantMeasure::Markov {
            transition,
            stationary,
        } => {
            if window.dim() != 1 && !window.is_empty() {
                return Err(Error::InvalidArgument(
                    "Markov measures are restricted to d = 1".into(),
                ));
            }
            let k = transition.len();
            let mut step = Vec::with_capacity(window.len());
            step.push(Vec::new());
            for i in 1..window.len() {
                let gap = window.points()[i].coords()[0] - window.points()[i - 1].coords()[0];
                let bridge = if gap == 1 {
                    transition.clone()
                } else {
                    (0..k)
                        .map(|a| {
                            (0..k)
                                .map(|b| matrix_power_entry(transition, gap as u64, a, b))
                                .collect()
                        })
                        .collect()
                };
                step.push(bridge);
            }
            MassSteps::Markov {
                stationary: stationary.clone(),
                step,
            }
        }
    };

    let table = crate::space::AdmissibilityTable::new(space, window);
    let mut symbols = vec![0u8; window.len()];
    let mut mass_stack = vec![0.0f64; window.len() + 1];
    mass_stack[0] = 1.0;
    let mut count = 0u64;
    mass_rec(
        space,
        &table,
        &inc,
        &mut symbols,
        &mut mass_stack,
        0,
        budgets.max_scan_patterns,
        &mut count,
        visit,
    )?;
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn mass_rec<F: FnMut(&[u8], f64)>(
    space: &ShiftSpace,
    table: &crate::space::AdmissibilityTable,
    inc: &MassSteps,
    symbols: &mut Vec<u8>,
    mass_stack: &mut Vec<f64>,
    depth: usize,
    budget: u64,
    count: &mut u64,
    visit: &mut F,
) -> Result<()> {
    if depth == symbols.len() {
        if *count >= budget {
            return Err(Error::BudgetExceeded {
                what: "mass enumeration".into(),
                needed: *count + 1,
                budget,
            });
        }
        *count += 1;
        visit(symbols, mass_stack[depth]);
        return Ok(());
    }
    for s in 0..space.alphabet() {
        symbols[depth] = s;
        if !table.ok_at(depth, symbols) {
            continue;
        }
        let factor = match inc {
            MassSteps::Bernoulli(p) => p[s as usize],
            MassSteps::Markov { stationary, step } => {
                if depth == 0 {
                    stationary[s as usize]
                } else {
                    step[depth][symbols[depth - 1] as usize][s as usize]
                }
            }
        };
        mass_stack[depth + 1] = mass_stack[depth] * factor;
        mass_rec(
            space,
            table,
            inc,
            symbols,
            mass_stack,
            depth + 1,
            budget,
            count,
            visit,
        )?;
    }
    Ok(())
}

/// Two-sided report for `h_mu(G, U)` on a cover.
#[derive(Clone, Debug, Serialize)]
pub struct LocalEntropy {
    /// (n, H_mu(U_{F_n}) / |F_n|): the h^- sequence. At finite n this is an
    /// estimate without a proven bound direction.
    pub lower_sequence: Vec<(u32, f64)>,
    pub lower_estimate: f64,
    /// min over candidate partitions of their entropy-rate inf: a true
    /// upper bound for h^+ = h_mu(G, U).
    pub upper: f64,
    pub upper_candidate: usize,
    /// upper - lower_estimate <= tolerance: the squeeze closed and the
    /// common value certifies h_mu(G, U) numerically.
    pub certified_squeeze: bool,
    pub tolerance: f64,
}

/// Squeezes `h_mu(G, U)` between the h^- sequence and candidate-partition
/// rates from above.
pub fn local_entropy(
    space: &ShiftSpace,
    mu: &InvariantMeasure,
    cover: &Cover,
    n_max: u32,
    candidates: &[Partition],
    tolerance: f64,
    budgets: &Budgets,
) -> Result<LocalEntropy> {
    if candidates.is_empty() {
        return Err(Error::EmptySet("local_entropy candidates"));
    }
    for (i, alpha) in candidates.iter().enumerate() {
        if !refines(space, alpha.cover(), cover, budgets)? {
            return Err(Error::InvalidArgument(format!(
                "candidate partition {i} does not refine the cover"
            )));
        }
    }
    let mut lower_sequence = Vec::new();
    for n in 1..=n_max {
        let f_n = folner_box(space.dim(), n)?;
        let joined = join_over(space, cover, &f_n, budgets)?;
        let ce = cover_entropy(space, mu, &joined, OptMode::Exact, budgets)?;
        lower_sequence.push((n, ce.value / f_n.len() as f64));
    }
    let lower_estimate = lower_sequence.last().map(|&(_, v)| v).unwrap_or(0.0);
    let mut upper = f64::INFINITY;
    let mut upper_candidate = 0;
    for (i, alpha) in candidates.iter().enumerate() {
        let report = entropy_rate(space, mu, alpha, n_max, budgets)?;
        if report.inf_estimate < upper {
            upper = report.inf_estimate;
            upper_candidate = i;
        }
    }
    Ok(LocalEntropy {
        lower_sequence,
        lower_estimate,
        upper,
        upper_candidate,
        certified_squeeze: (upper - lower_estimate) <= tolerance,
        tolerance,
    })
}
