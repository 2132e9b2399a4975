//! The variational harness: maximize `h_mu(G, U) + F_*(mu)` over parametric
//! measure families, compare with the pressure estimate, and build the
//! finite-n equilibrium candidates from Gibbs-weighted maximizing patterns.
//!
//! The objective uses certified upper bounds for the entropy term, which is
//! conservative for the inequality being verified. Optimization is
//! derivative-free (the objective contains an inf over joins) with softmax
//! parameterizations and seeded multi-restart coordinate search.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::lattice::{folner_box, FiniteSubset, LatticePoint};
use crate::measure::{
    cover_entropy, entropy_rate, joined_partition_entropy, stream_masses, InvariantMeasure, OptMode,
};
use crate::numeric::entropy_nats;
use crate::potential::{lyapunov, Potential};
use crate::pressure::{pressure_limit, pressure_term};
use crate::space::{
    generated_partition, join_over, locally_admissible, scan_admissible, Cover, Partition,
    ShiftSpace,
};
use crate::subadd::gibbs_distribution;

/// Result of one maximization run.
#[derive(Clone, Debug, Serialize)]
pub struct VariationalResult {
    pub pressure_estimate: f64,
    pub best_measure: InvariantMeasure,
    /// Flat parameter vector of the best measure (simplex entries, or the
    /// stochastic matrix rows concatenated).
    pub best_params: Vec<f64>,
    pub h_best: f64,
    pub lyapunov_best: f64,
    /// h_best + lyapunov_best.
    pub best_value: f64,
    /// Distance of the best measure from equilibrium: the minimum over
    /// boxes of the matched margin `(log P_n - H(U_{F_n}) - ∫f_{F_n}) /
    /// |F_n|`. Guaranteed >= -1e-9 at every n; 0 exactly at a Gibbs
    /// optimum. (The raw difference `pressure_estimate - best_value` is
    /// recoverable from the fields but has no one-sided guarantee at
    /// finite n: one-dimensional increment estimates oscillate around the
    /// limit.)
    pub gap: f64,
    pub trace: Vec<RestartRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartRecord {
    pub seed: u64,
    pub label: String,
    pub value: f64,
    pub params: Vec<f64>,
}

/// Entropy-term plan, fixed before the measure loop.
enum EntropyPlan {
    /// h for a partition: closed form for Markov measures on the
    /// zero-coordinate partition, else the inf of normalized joined
    /// entropies up to n_entropy (an upper bound by strong
    /// sub-additivity).
    Partition { alpha: Partition, zero_site: bool },
    /// h for a cover: min over candidate refining partitions of their
    /// entropy-rate upper bounds.
    Candidates(Vec<Partition>),
}

impl EntropyPlan {
    fn new(space: &ShiftSpace, cover: &Cover, budgets: &Budgets) -> Result<EntropyPlan> {
        if cover.is_partition(space, budgets)? {
            let alpha = Partition::try_new(space, cover.clone(), budgets)?;
            let zero_site = alpha.window().len() == 1
                && alpha.window().points()[0] == LatticePoint::origin(space.dim())
                && alpha.cover().all_singletons();
            return Ok(EntropyPlan::Partition { alpha, zero_site });
        }
        // Candidate partitions from assignments of generated atoms to
        // containing elements (each is a valid refinement with per-element
        // blocks), capped at 64.
        let (atoms, masks) = generated_partition(space, cover, budgets)?;
        let mut assignments: Vec<Vec<usize>> = vec![Vec::new()];
        for &mask in &masks {
            let mut next = Vec::new();
            for partial in &assignments {
                let mut m = mask;
                while m != 0 {
                    let el = m.trailing_zeros() as usize;
                    let mut row = partial.clone();
                    row.push(el);
                    next.push(row);
                    m &= m - 1;
                    if next.len() > 64 {
                        break;
                    }
                }
                if next.len() > 64 {
                    break;
                }
            }
            assignments = next;
            if assignments.len() > 64 {
                assignments.truncate(64);
            }
        }
        let mut candidates = Vec::new();
        for assign in &assignments {
            let mut elements: Vec<Vec<Vec<u8>>> = vec![Vec::new(); cover.len()];
            for (atom_idx, &el) in assign.iter().enumerate() {
                elements[el].extend(atoms.elements()[atom_idx].iter().cloned());
            }
            let elements: Vec<Vec<Vec<u8>>> = elements
                .into_iter()
                .filter(|e| !e.is_empty())
                .map(|mut e| {
                    e.sort();
                    e
                })
                .collect();
            candidates.push(Partition::new_unchecked(Cover::from_raw(
                atoms.window().clone(),
                elements,
            )));
        }
        if candidates.is_empty() {
            return Err(Error::EmptySet("no candidate partitions for the cover"));
        }
        Ok(EntropyPlan::Candidates(candidates))
    }

    fn upper_bound(
        &self,
        space: &ShiftSpace,
        mu: &InvariantMeasure,
        n_entropy: u32,
        budgets: &Budgets,
    ) -> Result<f64> {
        match self {
            EntropyPlan::Partition { alpha, zero_site } => {
                if *zero_site {
                    if let Some(h) = mu.markov_entropy_rate() {
                        return Ok(h);
                    }
                }
                let report = entropy_rate(space, mu, alpha, n_entropy, budgets)?;
                Ok(report.inf_estimate)
            }
            EntropyPlan::Candidates(candidates) => {
                let mut best = f64::INFINITY;
                for alpha in candidates {
                    let report = entropy_rate(space, mu, alpha, n_entropy, budgets)?;
                    best = best.min(report.inf_estimate);
                }
                Ok(best)
            }
        }
    }
}

fn softmax(theta: &[f64]) -> Vec<f64> {
    let m = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = theta.iter().map(|&t| (t - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Derivative-free coordinate search with shrinking steps; deterministic
/// given the start point.
fn coordinate_search<F: FnMut(&[f64]) -> Result<f64>>(
    theta0: Vec<f64>,
    mut objective: F,
) -> Result<(Vec<f64>, f64)> {
    let mut theta = theta0;
    let mut value = objective(&theta)?;
    let mut step = 0.5f64;
    while step > 1e-8 {
        let mut improved = false;
        for i in 0..theta.len() {
            for dir in [1.0f64, -1.0] {
                let mut trial = theta.clone();
                trial[i] += dir * step;
                let v = objective(&trial)?;
                if v > value + 1e-14 {
                    theta = trial;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((theta, value))
}

/// Maximizes `h_mu(G, U) + F_*(mu)` over Bernoulli measures.
///
/// Bernoulli measures live on the dominating full shift over the same
/// alphabet, so both the objective and the pressure estimate are computed
/// there; on a proper SFT use [`maximize_over_markov`] instead.
#[allow(clippy::too_many_arguments)]
pub fn maximize_over_bernoulli(
    space: &ShiftSpace,
    potential: &Potential,
    cover: &Cover,
    n_entropy: u32,
    n_pressure: u32,
    restarts: u32,
    seed: u64,
    budgets: &Budgets,
) -> Result<VariationalResult> {
    let full = ShiftSpace::full_shift(space.dim(), space.alphabet())?;
    let plan = EntropyPlan::new(&full, cover, budgets)?;
    let pressure =
        pressure_limit(&full, potential, cover, n_pressure, OptMode::Exact, budgets)?.estimate;
    let k = full.alphabet() as usize;

    let evaluate = |theta: &[f64]| -> Result<(InvariantMeasure, Vec<f64>, f64, f64)> {
        let mut padded = vec![0.0f64];
        padded.extend_from_slice(theta);
        let p = softmax(&padded);
        let mu = InvariantMeasure::Bernoulli { p: p.clone() };
        let h = plan.upper_bound(&full, &mu, n_entropy, budgets)?;
        let f = lyapunov(&full, potential, &mu, n_entropy.max(1), budgets)?.estimate;
        Ok((mu, p, h, f))
    };

    // Start points: uniform, the Gibbs softmax seed for depth-one additive
    // data, and seeded random draws.
    let mut starts: Vec<(String, u64, Vec<f64>)> = Vec::new();
    starts.push(("uniform".into(), seed, vec![0.0; k - 1]));
    if let Some((w, table, _)) = potential.additive_parts() {
        if w.len() == 1 && table.len() == k {
            let theta: Vec<f64> = (1..k).map(|i| table[i] - table[0]).collect();
            starts.push(("gibbs-seed".into(), seed, theta));
        }
    }
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64 + 1));
        let theta: Vec<f64> = (0..k - 1).map(|_| rng.random_range(-1.5..1.5)).collect();
        starts.push((
            format!("restart-{r}"),
            seed.wrapping_add(r as u64 + 1),
            theta,
        ));
    }

    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<f64>, InvariantMeasure, f64, f64)> = None;
    for (label, run_seed, theta0) in starts {
        let (theta, value) = coordinate_search(theta0, |t| {
            let (_, _, h, f) = evaluate(t)?;
            Ok(h + f)
        })?;
        let (mu, p, h, f) = evaluate(&theta)?;
        trace.push(RestartRecord {
            seed: run_seed,
            label,
            value,
            params: p.clone(),
        });
        let better = match &best {
            None => true,
            Some((bv, bp, ..)) => value > *bv + 1e-15 || (value >= *bv - 1e-15 && p < *bp),
        };
        if better {
            best = Some((value, p, mu, h, f));
        }
    }
    let (best_value, best_params, best_measure, h_best, lyapunov_best) = best.unwrap();
    let gap = matched_gap(&full, potential, cover, &best_measure, n_pressure, budgets)?;
    Ok(VariationalResult {
        pressure_estimate: pressure,
        best_measure,
        best_params,
        h_best,
        lyapunov_best,
        best_value,
        gap,
        trace,
    })
}

/// Min over boxes of the matched finite-n margin for one measure; falls
/// back to the raw estimate difference when the cover is not a partition
/// (joined cover entropies get expensive there).
fn matched_gap(
    space: &ShiftSpace,
    potential: &Potential,
    cover: &Cover,
    mu: &InvariantMeasure,
    n_pressure: u32,
    budgets: &Budgets,
) -> Result<f64> {
    if !cover.is_partition(space, budgets)? {
        let report = pressure_limit(
            space,
            potential,
            cover,
            n_pressure.min(6),
            OptMode::Exact,
            budgets,
        )?;
        let min_norm = report
            .rows
            .iter()
            .map(|r| r.normalized)
            .fold(f64::INFINITY, f64::min);
        let joined = join_over(space, cover, &folner_box(space.dim(), 1)?, budgets)?;
        let h = cover_entropy(space, mu, &joined, OptMode::Exact, budgets)?.value;
        let f = integral_f(space, potential, mu, &folner_box(space.dim(), 1)?, budgets)?;
        return Ok(min_norm - h - f);
    }
    let report = verify_variational_bound(
        space,
        potential,
        cover,
        std::slice::from_ref(mu),
        n_pressure.min(12),
        budgets,
    )?;
    Ok(report.min_margin)
}

/// Maximizes over stationary Markov measures respecting the SFT's
/// nearest-neighbor constraints (forbidden transitions pinned to zero).
#[allow(clippy::too_many_arguments)]
pub fn maximize_over_markov(
    space: &ShiftSpace,
    potential: &Potential,
    cover: &Cover,
    n_entropy: u32,
    n_pressure: u32,
    restarts: u32,
    seed: u64,
    budgets: &Budgets,
) -> Result<VariationalResult> {
    if space.dim() != 1 {
        return Err(Error::InvalidArgument(
            "Markov maximization needs d = 1".into(),
        ));
    }
    let k = space.alphabet() as usize;
    let pair = FiniteSubset::from_coords(1, &[&[0], &[1]])?;
    let mut allowed: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (a, row) in allowed.iter_mut().enumerate() {
        for b in 0..k {
            if locally_admissible(space, &pair, &[a as u8, b as u8]) {
                row.push(b);
            }
        }
    }
    if let Some(row) = allowed.iter().position(|r| r.is_empty()) {
        return Err(Error::Infeasible(format!(
            "symbol {row} has no admissible successor"
        )));
    }
    let plan = EntropyPlan::new(space, cover, budgets)?;
    let pressure =
        pressure_limit(space, potential, cover, n_pressure, OptMode::Exact, budgets)?.estimate;

    // One softmax block per row over its allowed successors, first entry
    // pinned to zero.
    let dof: Vec<usize> = allowed.iter().map(|r| r.len() - 1).collect();
    let total_dof: usize = dof.iter().sum();

    let build = |theta: &[f64]| -> Result<(InvariantMeasure, Vec<f64>)> {
        let mut transition = vec![vec![0.0f64; k]; k];
        let mut offset = 0;
        for a in 0..k {
            let mut block = vec![0.0f64];
            block.extend_from_slice(&theta[offset..offset + dof[a]]);
            offset += dof[a];
            let probs = softmax(&block);
            for (j, &b) in allowed[a].iter().enumerate() {
                transition[a][b] = probs[j];
            }
        }
        let flat: Vec<f64> = transition.iter().flatten().copied().collect();
        Ok((InvariantMeasure::markov(transition, None)?, flat))
    };

    let evaluate = |theta: &[f64]| -> Result<(InvariantMeasure, Vec<f64>, f64, f64)> {
        let (mu, flat) = build(theta)?;
        let h = plan.upper_bound(space, &mu, n_entropy, budgets)?;
        let f = lyapunov(space, potential, &mu, n_entropy.max(1), budgets)?.estimate;
        Ok((mu, flat, h, f))
    };

    let mut starts: Vec<(String, u64, Vec<f64>)> = Vec::new();
    starts.push(("uniform".into(), seed, vec![0.0; total_dof]));
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64 + 1));
        let theta: Vec<f64> = (0..total_dof)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        starts.push((
            format!("restart-{r}"),
            seed.wrapping_add(r as u64 + 1),
            theta,
        ));
    }

    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<f64>, InvariantMeasure, f64, f64)> = None;
    for (label, run_seed, theta0) in starts {
        let (theta, value) = coordinate_search(theta0, |t| {
            let (_, _, h, f) = evaluate(t)?;
            Ok(h + f)
        })?;
        let (mu, flat, h, f) = evaluate(&theta)?;
        trace.push(RestartRecord {
            seed: run_seed,
            label,
            value,
            params: flat.clone(),
        });
        let better = match &best {
            None => true,
            Some((bv, bp, ..)) => value > *bv + 1e-15 || (value >= *bv - 1e-15 && flat < *bp),
        };
        if better {
            best = Some((value, flat, mu, h, f));
        }
    }
    let (best_value, best_params, best_measure, h_best, lyapunov_best) = best.unwrap();
    let gap = matched_gap(space, potential, cover, &best_measure, n_pressure, budgets)?;
    Ok(VariationalResult {
        pressure_estimate: pressure,
        best_measure,
        best_params,
        h_best,
        lyapunov_best,
        best_value,
        gap,
        trace,
    })
}

/// The finite-n equilibrium candidate: one maximizing pattern per atom of
/// `alpha_{F_n}`, Gibbs weights over the selected values, and the
/// translate-averaged empirical marginals.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumCandidate {
    pub n: u32,
    pub atom_count: u64,
    /// log Σ_selected e^{f_{F_n}}.
    pub log_weight_sum: f64,
    /// Shannon entropy of the Gibbs weights.
    pub lambda_entropy: f64,
    /// Translate-averaged single-site marginal.
    pub single_site: Vec<f64>,
    /// d = 1 only: translate-averaged adjacent-pair marginal, row-major.
    pub pair: Option<Vec<f64>>,
}

pub fn equilibrium_candidate(
    space: &ShiftSpace,
    potential: &Potential,
    alpha: &Partition,
    n: u32,
    budgets: &Budgets,
) -> Result<EquilibriumCandidate> {
    if potential.alphabet() != space.alphabet() {
        return Err(Error::InvalidArgument(
            "potential alphabet differs from the space".into(),
        ));
    }
    let f_n = folner_box(space.dim(), n)?;
    let mut window = potential.dependence(&f_n)?;
    for g in f_n.iter() {
        window = window.union(&alpha.window().translate(g))?;
    }
    // Atom keys: per-translate element index of alpha. Selection keeps the
    // lexicographically first maximizer (the scan is lexicographic).
    let position_maps: Vec<Vec<usize>> = f_n
        .iter()
        .map(|g| {
            alpha
                .window()
                .translate(g)
                .iter()
                .map(|p| window.position(p).unwrap())
                .collect()
        })
        .collect();
    let mut selected: std::collections::HashMap<Vec<u16>, (f64, Vec<u8>)> =
        std::collections::HashMap::new();
    let mut order: Vec<Vec<u16>> = Vec::new();
    let mut restriction = vec![0u8; alpha.window().len()];
    let mut eval_err: Option<Error> = None;
    scan_admissible(space, &window, budgets.max_scan_patterns, &mut |symbols| {
        if eval_err.is_some() {
            return;
        }
        let mut key = Vec::with_capacity(position_maps.len());
        for map in &position_maps {
            for (i, &pos) in map.iter().enumerate() {
                restriction[i] = symbols[pos];
            }
            let mask = alpha.cover().element_mask(&restriction);
            if mask == 0 {
                eval_err = Some(Error::InvalidArgument(
                    "partition misses an admissible pattern".into(),
                ));
                return;
            }
            key.push(mask.trailing_zeros() as u16);
        }
        let value = match potential.eval(&f_n, &window, symbols, budgets) {
            Ok(v) => v,
            Err(e) => {
                eval_err = Some(e);
                return;
            }
        };
        match selected.get_mut(&key) {
            Some(entry) => {
                if value > entry.0 {
                    *entry = (value, symbols.to_vec());
                }
            }
            None => {
                order.push(key.clone());
                selected.insert(key, (value, symbols.to_vec()));
            }
        }
    })?;
    if let Some(e) = eval_err {
        return Err(e);
    }
    if order.is_empty() {
        return Err(Error::EmptySet("equilibrium candidate: no atoms"));
    }

    let weights: Vec<f64> = order.iter().map(|k| selected[k].0).collect();
    let lambda = gibbs_distribution(&weights)?;
    let log_weight_sum = crate::numeric::log_sum_exp(&weights);
    let lambda_entropy = entropy_nats(&lambda);

    let k = space.alphabet() as usize;
    let mut single = vec![0.0f64; k];
    let sites: Vec<usize> = f_n.iter().filter_map(|g| window.position(g)).collect();
    for (key, &lam) in order.iter().zip(lambda.iter()) {
        let pattern = &selected[key].1;
        for &pos in &sites {
            single[pattern[pos] as usize] += lam / sites.len() as f64;
        }
    }

    let pair = if space.dim() == 1 {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for g in f_n.iter() {
            let succ = g.add(&LatticePoint(vec![1]));
            if let (Some(a), Some(b)) = (window.position(g), window.position(&succ)) {
                pairs.push((a, b));
            }
        }
        if pairs.is_empty() {
            None
        } else {
            let mut table = vec![0.0f64; k * k];
            for (key, &lam) in order.iter().zip(lambda.iter()) {
                let pattern = &selected[key].1;
                for &(a, b) in &pairs {
                    table[pattern[a] as usize * k + pattern[b] as usize] +=
                        lam / pairs.len() as f64;
                }
            }
            Some(table)
        }
    } else {
        None
    };

    Ok(EquilibriumCandidate {
        n,
        atom_count: order.len() as u64,
        log_weight_sum,
        lambda_entropy,
        single_site: single,
        pair,
    })
}

/// One measure's row in the finite-n inequality report.
#[derive(Clone, Debug, Serialize)]
pub struct MarginRow {
    /// (n, normalized margin log P_n - H_mu(U_{F_n}) - ∫ f_{F_n} dμ, all
    /// divided by |F_n|).
    pub margins: Vec<(u32, f64)>,
    pub min_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginReport {
    pub per_measure: Vec<MarginRow>,
    pub min_margin: f64,
    /// min_margin >= -1e-9; a violation is a build-failing defect.
    pub pass: bool,
}

/// Verifies the finite-n inequality behind the variational principle:
/// `log P_{F_n} >= H_mu(U_{F_n}) + ∫ f_{F_n} dμ` for every listed measure
/// and every box up to n_max. The pressure term is an exact (or valid
/// upper) minimum and the entropy term an exact minimum, so the margin is
/// guaranteed non-negative up to round-off.
pub fn verify_variational_bound(
    space: &ShiftSpace,
    potential: &Potential,
    cover: &Cover,
    measures: &[InvariantMeasure],
    n_max: u32,
    budgets: &Budgets,
) -> Result<MarginReport> {
    let mut log_p = Vec::with_capacity(n_max as usize);
    let is_partition = cover.is_partition(space, budgets)?;
    for n in 1..=n_max {
        let f_n = folner_box(space.dim(), n)?;
        let term = pressure_term(space, potential, cover, &f_n, OptMode::Exact, budgets)?;
        log_p.push(term.log_value);
    }
    let mut per_measure = Vec::with_capacity(measures.len());
    let mut min_margin = f64::INFINITY;
    for mu in measures {
        let mut margins = Vec::with_capacity(n_max as usize);
        let mut row_min = f64::INFINITY;
        for n in 1..=n_max {
            let f_n = folner_box(space.dim(), n)?;
            let h = if is_partition {
                let alpha = Partition::new_unchecked(cover.clone());
                joined_partition_entropy(space, mu, &alpha, &f_n, budgets)?
            } else {
                let joined = join_over(space, cover, &f_n, budgets)?;
                cover_entropy(space, mu, &joined, OptMode::Exact, budgets)?.value
            };
            let integral = integral_f(space, potential, mu, &f_n, budgets)?;
            let margin = (log_p[(n - 1) as usize] - h - integral) / f_n.len() as f64;
            row_min = row_min.min(margin);
            margins.push((n, margin));
        }
        min_margin = min_margin.min(row_min);
        per_measure.push(MarginRow {
            margins,
            min_margin: row_min,
        });
    }
    Ok(MarginReport {
        per_measure,
        min_margin,
        pass: min_margin >= -1e-9,
    })
}

/// Exact `∫ f_E dμ`: closed form for additive families, full enumeration of
/// the dependence window otherwise.
fn integral_f(
    space: &ShiftSpace,
    potential: &Potential,
    mu: &InvariantMeasure,
    e_set: &FiniteSubset,
    budgets: &Budgets,
) -> Result<f64> {
    if let Some((w, table, shift)) = potential.additive_parts() {
        let mut site = shift;
        if w.is_empty() {
            site += table[0];
        } else {
            let alphabet = potential.alphabet() as usize;
            let mut total = 0.0;
            stream_masses(space, mu, w, budgets, &mut |symbols, mass| {
                let mut idx = 0usize;
                for &s in symbols {
                    idx = idx * alphabet + s as usize;
                }
                total += mass * table[idx];
            })?;
            site += total;
        }
        return Ok(site * e_set.len() as f64);
    }
    let window = potential.dependence(e_set)?;
    let mut total = 0.0;
    let mut err: Option<Error> = None;
    stream_masses(space, mu, &window, budgets, &mut |symbols, mass| {
        if err.is_some() || mass == 0.0 {
            return;
        }
        match potential.eval(e_set, &window, symbols, budgets) {
            Ok(v) => total += mass * v,
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budgets() -> Budgets {
        Budgets::default()
    }

    #[test]
    fn bernoulli_gibbs_optimum() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let a = [(3.0f64).ln(), 0.0];
        let p = Potential::site_potential(1, a.to_vec()).unwrap();
        let result = maximize_over_bernoulli(&space, &p, &u, 3, 8, 2, 7, &budgets()).unwrap();
        let log4 = (4.0f64).ln();
        assert!((result.best_value - log4).abs() < 1e-4, "{result:?}");
        assert!((result.best_params[0] - 0.75).abs() < 1e-3);
        assert!((result.best_params[1] - 0.25).abs() < 1e-3);
        assert!((result.pressure_estimate - log4).abs() < 1e-12);
        assert!(result.gap >= -1e-9);
        assert!(result.gap <= 1e-3);
    }

    #[test]
    fn bernoulli_zero_potential_uniform_optimum() {
        for k in [2u8, 3] {
            let space = ShiftSpace::full_shift(1, k).unwrap();
            let u = Cover::zero_site_partition(&space);
            let zero = Potential::zero(1, k);
            let result =
                maximize_over_bernoulli(&space, &zero, &u, 2, 6, 2, 11, &budgets()).unwrap();
            assert!((result.best_value - (k as f64).ln()).abs() < 1e-5);
            for &x in &result.best_params {
                assert!((x - 1.0 / k as f64).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn bernoulli_extreme_weights_stay_stable() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let p = Potential::site_potential(1, vec![50.0, 0.0]).unwrap();
        let result = maximize_over_bernoulli(&space, &p, &u, 2, 6, 1, 3, &budgets()).unwrap();
        // Gibbs weights: p_0 = 1/(1+e^{-50}) ~ 1.
        assert!(result.best_params[0] > 1.0 - 1e-6);
        assert!((result.best_value - 50.0).abs() < 1e-4);
    }

    #[test]
    fn markov_parry_optimum_on_golden_mean() {
        let space = ShiftSpace::golden_mean();
        let u = Cover::zero_site_partition(&space);
        let zero = Potential::zero(1, 2);
        let result = maximize_over_markov(&space, &zero, &u, 4, 16, 2, 5, &budgets()).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!(
            (result.best_value - phi.ln()).abs() < 1e-3,
            "value {}",
            result.best_value
        );
        // Transition row of the Parry measure: P[0] = (1/phi, 1/phi^2).
        assert!((result.best_params[0] - 1.0 / phi).abs() < 1e-3);
        assert!((result.best_params[1] - 1.0 / (phi * phi)).abs() < 1e-3);
        assert!(result.gap >= -1e-9);
    }

    #[test]
    fn markov_matches_bernoulli_for_site_potentials() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let p = Potential::site_potential(1, vec![0.6, -0.3]).unwrap();
        let b = maximize_over_bernoulli(&space, &p, &u, 3, 8, 2, 9, &budgets()).unwrap();
        let m = maximize_over_markov(&space, &p, &u, 3, 8, 2, 9, &budgets()).unwrap();
        assert!(
            (b.best_value - m.best_value).abs() < 1e-6,
            "{} vs {}",
            b.best_value,
            m.best_value
        );
    }

    #[test]
    fn markov_single_symbol_is_trivial() {
        let space = ShiftSpace::full_shift(1, 1).unwrap();
        let u = Cover::zero_site_partition(&space);
        let zero = Potential::zero(1, 1);
        let result = maximize_over_markov(&space, &zero, &u, 2, 4, 1, 1, &budgets()).unwrap();
        assert!(result.best_value.abs() < 1e-12);
    }

    #[test]
    fn markov_rejects_dead_symbol() {
        // Forbid both 10 and 11: symbol 1 has no successor.
        let w = FiniteSubset::from_coords(1, &[&[0], &[1]]).unwrap();
        let space = ShiftSpace::new(
            1,
            2,
            vec![
                crate::space::ForbiddenPattern {
                    window: w.clone(),
                    symbols: vec![1, 0],
                },
                crate::space::ForbiddenPattern {
                    window: w,
                    symbols: vec![1, 1],
                },
            ],
        )
        .unwrap();
        let u = Cover::zero_site_partition(&space);
        let zero = Potential::zero(1, 2);
        assert!(matches!(
            maximize_over_markov(&space, &zero, &u, 2, 4, 1, 1, &budgets()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn equilibrium_candidate_gibbs_at_n_one() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let alpha = Partition::zero_site(&space);
        let a = [(3.0f64).ln(), 0.0];
        let p = Potential::site_potential(1, a.to_vec()).unwrap();
        let cand = equilibrium_candidate(&space, &p, &alpha, 1, &budgets()).unwrap();
        let gibbs = gibbs_distribution(&a).unwrap();
        assert!((cand.single_site[0] - gibbs[0]).abs() < 1e-15);
        assert!((cand.single_site[1] - gibbs[1]).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_candidate_uniform_for_zero_potential() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let alpha = Partition::zero_site(&space);
        let zero = Potential::zero(1, 2);
        let cand = equilibrium_candidate(&space, &zero, &alpha, 6, &budgets()).unwrap();
        assert_eq!(cand.atom_count, 64);
        assert!((cand.single_site[0] - 0.5).abs() < 1e-12);
        assert!((cand.lambda_entropy - (64.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_candidate_concentrates_on_gibbs() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let alpha = Partition::zero_site(&space);
        let p = Potential::site_potential(1, vec![(3.0f64).ln(), 0.0]).unwrap();
        let cand = equilibrium_candidate(&space, &p, &alpha, 12, &budgets()).unwrap();
        assert!(
            (cand.single_site[0] - 0.75).abs() < 0.05,
            "{:?}",
            cand.single_site
        );
        // Pair marginal exists in d = 1 and rows to the single-site one.
        let pair = cand.pair.unwrap();
        let row0: f64 = pair[0] + pair[1];
        assert!((row0 - cand.single_site[0]).abs() < 0.02);
    }

    #[test]
    fn margins_nonnegative_for_gibbs_pair() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let a = [(3.0f64).ln(), 0.0];
        let p = Potential::site_potential(1, a.to_vec()).unwrap();
        let gibbs = InvariantMeasure::bernoulli(vec![0.75, 0.25]).unwrap();
        let uniform = InvariantMeasure::uniform(2);
        let report =
            verify_variational_bound(&space, &p, &u, &[gibbs.clone(), uniform], 6, &budgets())
                .unwrap();
        assert!(report.pass, "{report:?}");
        // The Gibbs measure attains equality: margins ~ 0.
        for &(_, m) in &report.per_measure[0].margins {
            assert!(m.abs() < 1e-12, "gibbs margin {m}");
        }
        // The uniform measure sits strictly below.
        assert!(report.per_measure[1].min_margin > 0.01);
    }

    #[test]
    fn constant_matrix_margin_reduces_to_entropy_gap() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let m = Potential::constant_matrix(1, 2, 1, vec![2.0]).unwrap();
        let mu = InvariantMeasure::bernoulli(vec![0.5, 0.5]).unwrap();
        let report = verify_variational_bound(&space, &m, &u, &[mu], 4, &budgets()).unwrap();
        assert!(report.pass);
        // log P_n = n log 2 + log 2 (constant f = log 2 shifts every
        // weight); H = n log 2; ∫f = log 2. Margin exactly zero.
        for &(_, margin) in &report.per_measure[0].margins {
            assert!(margin.abs() < 1e-12, "{margin}");
        }
    }

    #[test]
    fn margins_nonnegative_in_dimension_two() {
        let space = ShiftSpace::full_shift(2, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let p = Potential::site_potential(2, vec![0.3, -0.6]).unwrap();
        let measures = [
            InvariantMeasure::uniform(2),
            InvariantMeasure::bernoulli(vec![0.7, 0.3]).unwrap(),
        ];
        let report = verify_variational_bound(&space, &p, &u, &measures, 2, &budgets()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn objective_shift_invariance() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let u = Cover::zero_site_partition(&space);
        let p = Potential::site_potential(1, vec![0.9, -0.2]).unwrap();
        let base = maximize_over_bernoulli(&space, &p, &u, 2, 6, 2, 13, &budgets()).unwrap();
        let shifted_pot = p.shifted(0.7);
        let moved =
            maximize_over_bernoulli(&space, &shifted_pot, &u, 2, 6, 2, 13, &budgets()).unwrap();
        assert!((moved.pressure_estimate - base.pressure_estimate - 0.7).abs() < 1e-9);
        assert!((moved.best_value - base.best_value - 0.7).abs() < 1e-9);
        for (a, b) in moved.best_params.iter().zip(base.best_params.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
