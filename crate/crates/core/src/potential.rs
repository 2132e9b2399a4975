//! Sub-additive potential families generated by locally constant data.
//!
//! Two concrete kinds are provided. The additive family sums a locally
//! constant site function over translates. The matrix family takes, over
//! tuples drawn from E with repetition, the minimal log norm of the
//! corresponding matrix product, with the entry-sum norm (that norm is
//! sub-multiplicative, which the composition bound needs). A shift wrapper
//! adds `c · |E|`, and a custom kind accepts an arbitrary evaluator for
//! experiments.
//!
//! The translate condition `f_{E+g}(x) = f_E(g·x)` holds exactly under the
//! action convention `(g·x)(h) = x(h + g)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::lattice::{folner_box, FiniteSubset, LatticePoint};
use crate::measure::{stream_masses, InvariantMeasure};
use crate::space::{scan_extensions, ClopenSet, ShiftSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Additive,
    Matrix,
    Custom,
}

type CustomEval = dyn Fn(&FiniteSubset, &FiniteSubset, &[u8]) -> Result<f64> + Send + Sync;

/// A sub-additive family {f_E}; `f_∅ = 0` by convention.
#[derive(Clone)]
pub enum Potential {
    /// `f_E(x) = Σ_{g in E} φ(x|_{W+g})` for a locally constant φ given as
    /// a table over the patterns on `window`, indexed lexicographically.
    Additive {
        alphabet: u8,
        window: FiniteSubset,
        table: Vec<f64>,
    },
    /// `f_E(x) = min over 1 <= m <= |E| and tuples (g_1..g_m) in E^m of
    /// log ‖ M(g_1·x) ··· M(g_m·x) ‖` with the entry-sum norm. `M` is a
    /// locally constant map into non-negative `size x size` matrices,
    /// tabulated like the additive case (row-major entries).
    Matrix {
        alphabet: u8,
        window: FiniteSubset,
        size: usize,
        tables: Vec<Vec<f64>>,
    },
    /// `f_E + per_site · |E|`; used for the normalization identities.
    Shifted { base: Box<Potential>, per_site: f64 },
    /// Arbitrary evaluator `(E, pattern window, symbols) -> f_E`; the
    /// declared window generates the dependence rule.
    Custom {
        alphabet: u8,
        window: FiniteSubset,
        eval: Arc<CustomEval>,
    },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Additive { window, table, .. } => f
                .debug_struct("Additive")
                .field("window", window)
                .field("table", table)
                .finish(),
            Potential::Matrix { window, size, .. } => f
                .debug_struct("Matrix")
                .field("window", window)
                .field("size", size)
                .finish(),
            Potential::Shifted { base, per_site } => f
                .debug_struct("Shifted")
                .field("base", base)
                .field("per_site", per_site)
                .finish(),
            Potential::Custom { window, .. } => {
                f.debug_struct("Custom").field("window", window).finish()
            }
        }
    }
}

/// Certified constants: the single-element defect bound C, the
/// normalization bound K with `|f_E| <= K |E|`, and for positive matrix
/// families the entry-ratio constants.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialConstants {
    pub c3_bound: Option<f64>,
    pub k_bound: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
}

impl Potential {
    /// φ depending on the origin coordinate only, with per-symbol values.
    pub fn site_potential(dim: usize, values: Vec<f64>) -> Result<Potential> {
        if values.is_empty() {
            return Err(Error::EmptySet("site potential values"));
        }
        Ok(Potential::Additive {
            alphabet: values.len() as u8,
            window: FiniteSubset::singleton(LatticePoint::origin(dim)),
            table: values,
        })
    }

    /// The zero potential (empty window, single zero entry).
    pub fn zero(dim: usize, alphabet: u8) -> Potential {
        Potential::Additive {
            alphabet,
            window: FiniteSubset::empty(dim),
            table: vec![0.0],
        }
    }

    /// Constant matrix family (empty window): one matrix everywhere.
    pub fn constant_matrix(
        dim: usize,
        alphabet: u8,
        size: usize,
        entries: Vec<f64>,
    ) -> Result<Potential> {
        if entries.len() != size * size {
            return Err(Error::InvalidArgument(
                "matrix entries must be size*size".into(),
            ));
        }
        Ok(Potential::Matrix {
            alphabet,
            window: FiniteSubset::empty(dim),
            size,
            tables: vec![entries],
        })
    }

    /// Wraps the family as `f_E + c |E|`.
    pub fn shifted(self, per_site: f64) -> Potential {
        Potential::Shifted {
            base: Box::new(self),
            per_site,
        }
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Additive { .. } => PotentialKind::Additive,
            Potential::Matrix { .. } => PotentialKind::Matrix,
            Potential::Shifted { base, .. } => base.kind(),
            Potential::Custom { .. } => PotentialKind::Custom,
        }
    }

    pub fn alphabet(&self) -> u8 {
        match self {
            Potential::Additive { alphabet, .. }
            | Potential::Matrix { alphabet, .. }
            | Potential::Custom { alphabet, .. } => *alphabet,
            Potential::Shifted { base, .. } => base.alphabet(),
        }
    }

    pub fn window(&self) -> &FiniteSubset {
        match self {
            Potential::Additive { window, .. }
            | Potential::Matrix { window, .. }
            | Potential::Custom { window, .. } => window,
            Potential::Shifted { base, .. } => base.window(),
        }
    }

    /// Dependence set `D(E) = ⋃_{g in E} (W + g)`.
    pub fn dependence(&self, e_set: &FiniteSubset) -> Result<FiniteSubset> {
        let w = self.window();
        let mut d = FiniteSubset::empty(e_set.dim());
        for g in e_set.iter() {
            d = d.union(&w.translate(g))?;
        }
        Ok(d)
    }

    /// Unwraps to the additive data plus accumulated per-site shift, when
    /// the family is additive up to shifts.
    pub fn additive_parts(&self) -> Option<(&FiniteSubset, &[f64], f64)> {
        match self {
            Potential::Additive { window, table, .. } => Some((window, table, 0.0)),
            Potential::Shifted { base, per_site } => {
                base.additive_parts().map(|(w, t, c)| (w, t, c + per_site))
            }
            _ => None,
        }
    }

    /// Evaluates `f_E` on a pattern whose window contains `D(E)`.
    pub fn eval(
        &self,
        e_set: &FiniteSubset,
        window: &FiniteSubset,
        symbols: &[u8],
        budgets: &Budgets,
    ) -> Result<f64> {
        if e_set.is_empty() {
            return Ok(0.0);
        }
        match self {
            Potential::Additive {
                alphabet,
                window: w,
                table,
            } => {
                let mut total = 0.0;
                for g in e_set.iter() {
                    let idx = pattern_index(*alphabet, w, g, window, symbols)?;
                    total += table[idx];
                }
                Ok(total)
            }
            Potential::Matrix {
                alphabet,
                window: w,
                size,
                tables,
            } => {
                let mut factors = Vec::with_capacity(e_set.len());
                for g in e_set.iter() {
                    let idx = pattern_index(*alphabet, w, g, window, symbols)?;
                    factors.push(&tables[idx]);
                }
                min_product_log_norm(&factors, *size, budgets)
            }
            Potential::Shifted { base, per_site } => {
                Ok(base.eval(e_set, window, symbols, budgets)? + per_site * e_set.len() as f64)
            }
            Potential::Custom { eval, .. } => eval(e_set, window, symbols),
        }
    }

    /// Certified analytic constants where available; the matrix bound needs
    /// a strictly positive entry minimum.
    pub fn constants(&self) -> Result<PotentialConstants> {
        match self {
            Potential::Additive { table, .. } => {
                let min = table.iter().cloned().fold(f64::INFINITY, f64::min);
                let max_abs = table.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                Ok(PotentialConstants {
                    c3_bound: Some((-min).max(0.0)),
                    k_bound: Some(max_abs),
                    k1: None,
                    k2: None,
                })
            }
            Potential::Matrix { size, tables, .. } => {
                let mut min_entry = f64::INFINITY;
                let mut max_entry = 0.0f64;
                for t in tables {
                    for &x in t {
                        if x < 0.0 || !x.is_finite() {
                            return Err(Error::InvalidArgument(
                                "matrix entries must be finite and non-negative".into(),
                            ));
                        }
                        min_entry = min_entry.min(x);
                        max_entry = max_entry.max(x);
                    }
                }
                let n = *size as f64;
                if min_entry <= 0.0 {
                    // K2 = 0: the composition bound cannot be certified.
                    return Ok(PotentialConstants {
                        c3_bound: None,
                        k_bound: None,
                        k1: Some(0.0),
                        k2: Some(min_entry.max(0.0)),
                    });
                }
                let k1 = min_entry / max_entry;
                let k2 = min_entry;
                let c3 = (1.0 / (k1 * k1 * k2)).ln();
                let u = (n * n * max_entry).ln().abs();
                let l = (n * n * min_entry).ln().abs();
                let step = (-(n * min_entry).ln()).max(0.0);
                Ok(PotentialConstants {
                    c3_bound: Some(c3),
                    k_bound: Some(u.max(l).max(step)),
                    k1: Some(k1),
                    k2: Some(k2),
                })
            }
            Potential::Shifted { base, per_site } => {
                let c = base.constants()?;
                Ok(PotentialConstants {
                    c3_bound: c.c3_bound.map(|x| x - per_site),
                    k_bound: c.k_bound.map(|x| x + per_site.abs()),
                    k1: c.k1,
                    k2: c.k2,
                })
            }
            Potential::Custom { .. } => Err(Error::InvalidArgument(
                "custom potentials have no certified constants".into(),
            )),
        }
    }
}

/// Lexicographic index of the restriction of `symbols` (on `window`) to the
/// translated potential window `w + g`.
fn pattern_index(
    alphabet: u8,
    w: &FiniteSubset,
    g: &LatticePoint,
    window: &FiniteSubset,
    symbols: &[u8],
) -> Result<usize> {
    let mut idx = 0usize;
    for p in w.iter() {
        let q = p.add(g);
        let pos = window.position(&q).ok_or_else(|| {
            Error::InvalidArgument(format!("pattern window is missing point {q:?}"))
        })?;
        idx = idx * alphabet as usize + symbols[pos] as usize;
    }
    Ok(idx)
}

fn norm(entries: &[f64]) -> f64 {
    entries.iter().sum()
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        for l in 0..n {
            let x = a[i * n + l];
            if x == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[l * n + j];
            }
        }
    }
    out
}

/// `min_{1<=m<=k} min_{tuples} log ‖ product ‖` over tuples from `factors`
/// with repetition, via leveled search with a norm lower-bound prune:
/// appending a factor multiplies the norm by at least its minimum row sum.
fn min_product_log_norm(factors: &[&Vec<f64>], n: usize, budgets: &Budgets) -> Result<f64> {
    if n > 4 {
        return Err(Error::InvalidArgument(
            "matrix potentials support size <= 4".into(),
        ));
    }
    if factors.len() > 8 {
        return Err(Error::InvalidArgument(
            "matrix potentials support |E| <= 8".into(),
        ));
    }
    // Distinct factors only: tuples range over values, not indices.
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for f in factors {
        if !distinct.iter().any(|d| d == f) {
            distinct.push(f);
        }
    }
    let max_len = factors.len();
    let mut min_rowsum = f64::INFINITY;
    for f in &distinct {
        for i in 0..n {
            let rs: f64 = (0..n).map(|j| f[i * n + j]).sum();
            min_rowsum = min_rowsum.min(rs);
        }
    }
    let mut best = f64::INFINITY;
    let mut frontier: Vec<Vec<f64>> = distinct.iter().map(|f| (*f).clone()).collect();
    for f in &frontier {
        best = best.min(norm(f).ln());
    }
    let mut explored = frontier.len() as u64;
    for level in 2..=max_len {
        let remaining_after = (max_len - level) as f64;
        let mut next: Vec<Vec<f64>> = Vec::new();
        for a in &frontier {
            for m in &distinct {
                explored += 1;
                if explored > budgets.max_matrix_products {
                    return Err(Error::BudgetExceeded {
                        what: "matrix product search".into(),
                        needed: explored,
                        budget: budgets.max_matrix_products,
                    });
                }
                let prod = mat_mul(a, m, n);
                let log_norm = norm(&prod).ln();
                best = best.min(log_norm);
                // Completions multiply the norm by >= min_rowsum each step.
                let bound = if min_rowsum > 0.0 {
                    log_norm + (remaining_after * min_rowsum.ln()).min(0.0)
                } else {
                    f64::NEG_INFINITY
                };
                if bound < best && level < max_len {
                    next.push(prod);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(best)
}

/// Sampled verification report for the potential conditions.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub kind: PotentialKind,
    pub samples: u32,
    pub seed: u64,
    /// max over samples of f_{E∪F} - f_E - f_F on disjoint pairs.
    pub c1_max_violation: f64,
    pub c1_pass: bool,
    /// For additive families: max |f_{E∪F} - f_E - f_F| (equality holds).
    pub c1_additive_max_gap: Option<f64>,
    /// max |f_{E+g}(x) - f_E(g·x)|.
    pub c2_max_deviation: f64,
    pub c2_pass: bool,
    /// Empirical sup of f_E - f_{E∪{g}}.
    pub c3_empirical_sup: f64,
    pub c3_certified_bound: Option<f64>,
    pub c3_pass: bool,
    /// For additive families: max of f_{E∪F} + f_{E∩F} - f_E - f_F.
    pub strong_max_violation: Option<f64>,
    pub strong_pass: Option<bool>,
}

impl ConditionsReport {
    pub fn all_pass(&self) -> bool {
        self.c1_pass && self.c2_pass && self.c3_pass && self.strong_pass.unwrap_or(true)
    }
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize, span: i64, max_len: usize) -> FiniteSubset {
    let len = rng.random_range(1..=max_len);
    let pts: Vec<LatticePoint> = (0..len)
        .map(|_| LatticePoint((0..dim).map(|_| rng.random_range(0..span)).collect()))
        .collect();
    FiniteSubset::new(dim, pts).unwrap()
}

/// Random locally admissible pattern on a window, by randomized backtracking.
pub fn random_admissible_pattern(
    space: &ShiftSpace,
    window: &FiniteSubset,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<u8>> {
    let table = crate::space::AdmissibilityTable::new(space, window);
    let mut symbols = vec![0u8; window.len()];
    fn rec(
        space: &ShiftSpace,
        table: &crate::space::AdmissibilityTable,
        symbols: &mut Vec<u8>,
        depth: usize,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        if depth == symbols.len() {
            return true;
        }
        let k = space.alphabet();
        let start = rng.random_range(0..k);
        for off in 0..k {
            let s = (start + off) % k;
            symbols[depth] = s;
            if table.ok_at(depth, symbols) && rec(space, table, symbols, depth + 1, rng) {
                return true;
            }
        }
        false
    }
    rec(space, &table, &mut symbols, 0, rng).then_some(symbols)
}

/// Randomized verification of (C1), (C2), (C3), and for additive families
/// strong sub-additivity. For certified matrix families the empirical C3
/// sup is compared against `log(1 / (K1² K2))`.
pub fn check_conditions(
    space: &ShiftSpace,
    potential: &Potential,
    samples: u32,
    seed: u64,
    budgets: &Budgets,
) -> Result<ConditionsReport> {
    if potential.alphabet() != space.alphabet() {
        return Err(Error::InvalidArgument(
            "potential alphabet differs from the space".into(),
        ));
    }
    let dim = space.dim();
    let additive = potential.additive_parts().is_some();
    let constants = potential.constants().ok();
    let c3_certified = constants.as_ref().and_then(|c| c.c3_bound);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c1_max = f64::NEG_INFINITY;
    let mut c1_gap: f64 = 0.0;
    let mut c2_max: f64 = 0.0;
    let mut c3_sup = f64::NEG_INFINITY;
    let mut strong_max = f64::NEG_INFINITY;

    for _ in 0..samples {
        let e_set = random_set(&mut rng, dim, 3, 3);
        let mut f_set = random_set(&mut rng, dim, 3, 3);
        // Disjoint partner for (C1).
        f_set = f_set.difference(&e_set)?;
        if f_set.is_empty() {
            f_set = FiniteSubset::singleton(LatticePoint(vec![3; dim]));
        }
        let g = LatticePoint((0..dim).map(|_| rng.random_range(-2..=2)).collect());
        let single = LatticePoint((0..dim).map(|_| rng.random_range(0..4)).collect());

        let union = e_set.union(&f_set)?;
        let mut window = potential.dependence(&union)?;
        window = window.union(&potential.dependence(&e_set.translate(&g))?)?;
        window = window.union(
            &potential.dependence(&union.union(&FiniteSubset::singleton(single.clone()))?)?,
        )?;
        let Some(symbols) = random_admissible_pattern(space, &window, &mut rng) else {
            continue;
        };

        let f_e = potential.eval(&e_set, &window, &symbols, budgets)?;
        let f_f = potential.eval(&f_set, &window, &symbols, budgets)?;
        let f_union = potential.eval(&union, &window, &symbols, budgets)?;
        c1_max = c1_max.max(f_union - f_e - f_f);
        if additive {
            c1_gap = c1_gap.max((f_union - f_e - f_f).abs());
        }

        // (C2): f_{E+g}(x) = f_E(g·x); the right side reads the same
        // symbols through the translated window.
        let f_shift = potential.eval(&e_set.translate(&g), &window, &symbols, budgets)?;
        let translated_window = window.translate(&g.neg());
        let f_acted = potential.eval(&e_set, &translated_window, &symbols, budgets)?;
        c2_max = c2_max.max((f_shift - f_acted).abs());

        // (C3) single-element defect.
        let augmented = e_set.union(&FiniteSubset::singleton(single))?;
        if augmented.len() > e_set.len() {
            let f_aug = potential.eval(&augmented, &window, &symbols, budgets)?;
            c3_sup = c3_sup.max(f_e - f_aug);
        }

        if additive {
            // Strong sub-additivity on a non-disjoint pair.
            let overlap = random_set(&mut rng, dim, 3, 3);
            let win2 = window.union(&potential.dependence(&overlap)?)?;
            if let Some(sym2) = random_admissible_pattern(space, &win2, &mut rng) {
                let a = potential.eval(&e_set, &win2, &sym2, budgets)?;
                let b = potential.eval(&overlap, &win2, &sym2, budgets)?;
                let u = potential.eval(&e_set.union(&overlap)?, &win2, &sym2, budgets)?;
                let i = potential.eval(&e_set.intersection(&overlap)?, &win2, &sym2, budgets)?;
                strong_max = strong_max.max(u + i - a - b);
            }
        }
    }

    let tol = 1e-9;
    let c3_pass = match c3_certified {
        Some(bound) => c3_sup <= bound + tol,
        None => c3_sup.is_finite() || c3_sup == f64::NEG_INFINITY,
    };
    Ok(ConditionsReport {
        kind: potential.kind(),
        samples,
        seed,
        c1_max_violation: c1_max,
        c1_pass: c1_max <= tol,
        c1_additive_max_gap: additive.then_some(c1_gap),
        c2_max_deviation: c2_max,
        c2_pass: c2_max <= 1e-12,
        c3_empirical_sup: c3_sup,
        c3_certified_bound: c3_certified,
        c3_pass,
        strong_max_violation: additive.then_some(strong_max),
        strong_pass: additive.then_some(strong_max <= tol),
    })
}

/// `sup f_E` over the locally admissible extensions of a clopen set's
/// patterns to the union of its window with `D(E)`; the log form of
/// `sup e^{f_E}`.
pub fn sup_over(
    space: &ShiftSpace,
    potential: &Potential,
    e_set: &FiniteSubset,
    set: &ClopenSet,
    budgets: &Budgets,
) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet("sup_over: clopen set"));
    }
    let window = set.window.union(&potential.dependence(e_set)?)?;
    let fixed_positions: Vec<usize> = set
        .window
        .iter()
        .map(|p| window.position(p).unwrap())
        .collect();
    let mut best = f64::NEG_INFINITY;
    for pattern in &set.patterns {
        let mut local_best = f64::NEG_INFINITY;
        scan_extensions(
            space,
            &window,
            &fixed_positions,
            pattern,
            budgets.max_extension_patterns,
            &mut |full| {
                let v = potential
                    .eval(e_set, &window, full, budgets)
                    .unwrap_or(f64::NEG_INFINITY);
                if v > local_best {
                    local_best = v;
                }
            },
        )?;
        best = best.max(local_best);
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::EmptySet("sup_over: no admissible extension"));
    }
    Ok(best)
}

/// Normalized integrals of f over the boxes, with the final value as
/// estimate.
#[derive(Clone, Debug, Serialize)]
pub struct LyapunovReport {
    /// (n, (1/|F_n|) ∫ f_{F_n} dμ).
    pub samples: Vec<(u32, f64)>,
    pub estimate: f64,
    /// True when expectations were exact enumerations.
    pub exact: bool,
    /// Monte Carlo standard error of the last sample, when sampling.
    pub std_err: Option<f64>,
}

/// `(1/|F_n|) ∫ f_{F_n} dμ` along boxes. Additive families reduce exactly
/// to `∫ φ dμ + c` at every n. Other kinds enumerate the dependence window
/// when it fits the budget, and otherwise fall back to Monte Carlo with a
/// reported standard error.
pub fn lyapunov(
    space: &ShiftSpace,
    potential: &Potential,
    mu: &InvariantMeasure,
    n_max: u32,
    budgets: &Budgets,
) -> Result<LyapunovReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    if let Some((w, table, shift)) = potential.additive_parts() {
        let alphabet = potential.alphabet();
        let mut value = shift;
        if w.is_empty() {
            value += table[0];
        } else {
            let mut idx_buf = 0usize;
            let mut total = 0.0;
            stream_masses(space, mu, w, budgets, &mut |symbols, mass| {
                idx_buf = 0;
                for &s in symbols {
                    idx_buf = idx_buf * alphabet as usize + s as usize;
                }
                total += mass * table[idx_buf];
            })?;
            value += total;
        }
        let samples: Vec<(u32, f64)> = (1..=n_max).map(|n| (n, value)).collect();
        return Ok(LyapunovReport {
            samples,
            estimate: value,
            exact: true,
            std_err: None,
        });
    }

    let mut samples = Vec::new();
    let mut exact = true;
    let mut std_err = None;
    for n in 1..=n_max {
        let f_n = folner_box(space.dim(), n)?;
        let window = potential.dependence(&f_n)?;
        let pattern_count: f64 = (space.alphabet() as f64).powi(window.len() as i32);
        if pattern_count <= budgets.max_measure_patterns as f64 {
            let mut total = 0.0;
            let mut err: Option<Error> = None;
            stream_masses(space, mu, &window, budgets, &mut |symbols, mass| {
                if err.is_some() || mass == 0.0 {
                    return;
                }
                match potential.eval(&f_n, &window, symbols, budgets) {
                    Ok(v) => total += mass * v,
                    Err(e) => err = Some(e),
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            samples.push((n, total / f_n.len() as f64));
        } else {
            exact = false;
            let draws = 2000u32;
            let mut rng = ChaCha8Rng::seed_from_u64(0x17a9 ^ n as u64);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..draws {
                let symbols = sample_pattern(mu, &window, &mut rng)?;
                let v = potential.eval(&f_n, &window, &symbols, budgets)? / f_n.len() as f64;
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / draws as f64;
            let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
            std_err = Some((var / draws as f64).sqrt());
            samples.push((n, mean));
        }
    }
    let estimate = samples.last().unwrap().1;
    Ok(LyapunovReport {
        samples,
        estimate,
        exact,
        std_err,
    })
}

/// Draws one pattern from the measure on a window (Bernoulli: independent
/// sites; Markov: along a contiguous d = 1 window).
fn sample_pattern(
    mu: &InvariantMeasure,
    window: &FiniteSubset,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u8>> {
    fn draw(weights: &[f64], rng: &mut ChaCha8Rng) -> u8 {
        let u: f64 = rng.random_range(0.0..1.0);
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i as u8;
            }
        }
        (weights.len() - 1) as u8
    }
    match mu {
        InvariantMeasure::Bernoulli { p } => Ok((0..window.len()).map(|_| draw(p, rng)).collect()),
        InvariantMeasure::Markov {
            transition,
            stationary,
        } => {
            if window.dim() != 1 {
                return Err(Error::InvalidArgument(
                    "Markov sampling is restricted to d = 1".into(),
                ));
            }
            for pair in window.points().windows(2) {
                if pair[1].coords()[0] - pair[0].coords()[0] != 1 {
                    return Err(Error::InvalidArgument(
                        "Markov sampling needs a contiguous window".into(),
                    ));
                }
            }
            let mut out = Vec::with_capacity(window.len());
            let mut prev = draw(stationary, rng);
            out.push(prev);
            for _ in 1..window.len() {
                prev = draw(&transition[prev as usize], rng);
                out.push(prev);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budgets() -> Budgets {
        Budgets::default()
    }

    fn interval(n: i64) -> FiniteSubset {
        FiniteSubset::new(1, (0..n).map(|i| LatticePoint(vec![i]))).unwrap()
    }

    #[test]
    fn additive_eval_examples() {
        let zero = Potential::zero(1, 2);
        let e = interval(3);
        let w = interval(3);
        assert_eq!(zero.eval(&e, &w, &[0, 1, 0], &budgets()).unwrap(), 0.0);

        let (u, v) = (0.7, -0.2);
        let p = Potential::site_potential(1, vec![u, v]).unwrap();
        let value = p.eval(&e, &w, &[0, 1, 0], &budgets()).unwrap();
        assert!((value - (2.0 * u + v)).abs() < 1e-15);

        // Additivity over a disjoint split.
        let e1 = FiniteSubset::from_coords(1, &[&[0]]).unwrap();
        let e2 = FiniteSubset::from_coords(1, &[&[1], &[2]]).unwrap();
        let a = p.eval(&e1, &w, &[0, 1, 0], &budgets()).unwrap();
        let b = p.eval(&e2, &w, &[0, 1, 0], &budgets()).unwrap();
        assert!((value - (a + b)).abs() < 1e-15);
    }

    #[test]
    fn additive_eval_rejects_missing_window() {
        let p = Potential::site_potential(1, vec![1.0, 2.0]).unwrap();
        let e = interval(3);
        let w = interval(2);
        assert!(p.eval(&e, &w, &[0, 1], &budgets()).is_err());
    }

    #[test]
    fn matrix_eval_scalar_cases() {
        // Constant scalar 2: norms 2^m increase, min at m = 1.
        let p = Potential::constant_matrix(1, 2, 1, vec![2.0]).unwrap();
        let e = interval(3);
        let w = p.dependence(&e).unwrap();
        let v = p.eval(&e, &w, &[], &budgets()).unwrap();
        assert!((v - (2.0f64).ln()).abs() < 1e-14);

        // Constant scalar 1/2: norms decrease, min at m = |E|.
        let p = Potential::constant_matrix(1, 2, 1, vec![0.5]).unwrap();
        let v = p.eval(&e, &w, &[], &budgets()).unwrap();
        assert!((v - 3.0 * (0.5f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn matrix_eval_all_ones() {
        // J^m has norm 2^{m+1}; min at m = 1 gives log 4.
        let p = Potential::constant_matrix(1, 2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let e = interval(4);
        let v = p
            .eval(&e, &FiniteSubset::empty(1), &[], &budgets())
            .unwrap();
        assert!((v - (4.0f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn matrix_eval_brute_force_cross_check() {
        // Site-dependent 2x2 matrices on the full 2-shift; compare the
        // leveled search against direct tuple enumeration.
        let tables = vec![vec![1.0, 0.5, 0.25, 2.0], vec![0.5, 1.5, 1.0, 0.75]];
        let p = Potential::Matrix {
            alphabet: 2,
            window: interval(1),
            size: 2,
            tables: tables.clone(),
        };
        let e = interval(3);
        let w = interval(3);
        for symbols in [[0u8, 1, 0], [1, 1, 0], [0, 0, 0]] {
            let got = p.eval(&e, &w, &symbols, &budgets()).unwrap();

            // Oracle: enumerate every tuple (with repetition) up to length 3.
            let mats: Vec<&Vec<f64>> = symbols.iter().map(|&s| &tables[s as usize]).collect();
            let mut best = f64::INFINITY;
            for m in 1..=3usize {
                let mut idx = vec![0usize; m];
                loop {
                    let mut prod = mats[idx[0]].clone();
                    for &i in &idx[1..] {
                        prod = mat_mul(&prod, mats[i], 2);
                    }
                    best = best.min(norm(&prod).ln());
                    let mut c = m;
                    loop {
                        if c == 0 {
                            break;
                        }
                        c -= 1;
                        idx[c] += 1;
                        if idx[c] < 3 {
                            break;
                        }
                        idx[c] = 0;
                        if c == 0 {
                            c = usize::MAX;
                            break;
                        }
                    }
                    if c == usize::MAX {
                        break;
                    }
                }
            }
            assert!((got - best).abs() < 1e-12, "{symbols:?}: {got} vs {best}");
        }
    }

    #[test]
    fn shifted_adds_per_site() {
        let p = Potential::site_potential(1, vec![1.0, 2.0]).unwrap();
        let shifted = p.clone().shifted(0.7);
        let e = interval(4);
        let w = interval(4);
        let sym = [0u8, 1, 1, 0];
        let base = p.eval(&e, &w, &sym, &budgets()).unwrap();
        let moved = shifted.eval(&e, &w, &sym, &budgets()).unwrap();
        assert!((moved - base - 0.7 * 4.0).abs() < 1e-15);
    }

    #[test]
    fn constants_additive() {
        let p = Potential::site_potential(1, vec![(3.0f64).ln(), 0.0]).unwrap();
        let c = p.constants().unwrap();
        assert_eq!(c.c3_bound, Some(0.0));
        assert!((c.k_bound.unwrap() - (3.0f64).ln()).abs() < 1e-15);

        let q = Potential::site_potential(1, vec![-0.5, 0.25]).unwrap();
        let c = q.constants().unwrap();
        assert_eq!(c.c3_bound, Some(0.5));
    }

    #[test]
    fn constants_matrix_positive_and_degenerate() {
        let p = Potential::constant_matrix(1, 2, 2, vec![1.0, 2.0, 1.5, 1.0]).unwrap();
        let c = p.constants().unwrap();
        assert!((c.k1.unwrap() - 0.5).abs() < 1e-15);
        assert!((c.k2.unwrap() - 1.0).abs() < 1e-15);
        assert!((c.c3_bound.unwrap() - (4.0f64).ln()).abs() < 1e-12);

        // A zero entry kills certification.
        let z = Potential::constant_matrix(1, 2, 2, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let c = z.constants().unwrap();
        assert_eq!(c.c3_bound, None);
    }

    #[test]
    fn conditions_additive_family() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let p = Potential::site_potential(1, vec![0.4, -1.1]).unwrap();
        let report = check_conditions(&space, &p, 200, 42, &budgets()).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert!(report.c1_additive_max_gap.unwrap() < 1e-12);
        assert!(report.c2_max_deviation < 1e-12);
        assert!(report.strong_max_violation.unwrap() < 1e-12);
    }

    #[test]
    fn conditions_matrix_family() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tables: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..4).map(|_| rng.random_range(1.0..2.0)).collect())
            .collect();
        let p = Potential::Matrix {
            alphabet: 2,
            window: interval(1),
            size: 2,
            tables,
        };
        let report = check_conditions(&space, &p, 150, 9, &budgets()).unwrap();
        assert!(report.c1_pass, "{report:?}");
        assert!(report.c2_pass);
        assert!(report.c3_pass);
        let c = p.constants().unwrap();
        assert!(c.k1.unwrap() >= 0.5);
        assert!(c.k2.unwrap() >= 1.0);
        assert!(report.c3_empirical_sup <= c.c3_bound.unwrap() + 1e-9);
    }

    #[test]
    fn sup_over_examples() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let a = [(3.0f64).ln(), 0.0];
        let p = Potential::site_potential(1, a.to_vec()).unwrap();

        // Cylinder fixing the whole dependence window: exact sum.
        let e = interval(3);
        let b = ClopenSet::cylinder(interval(3), vec![0, 1, 0]).unwrap();
        let v = sup_over(&space, &p, &e, &b, &budgets()).unwrap();
        assert!((v - (2.0 * a[0] + a[1])).abs() < 1e-14);

        // Free coordinates: sup picks the best word.
        let b = ClopenSet::new(FiniteSubset::empty(1), vec![vec![]]).unwrap();
        let e2 = interval(2);
        let v = sup_over(&space, &p, &e2, &b, &budgets()).unwrap();
        assert!((v - 2.0 * a[0]).abs() < 1e-14);

        // Constant matrix: no x-dependence at all.
        let m = Potential::constant_matrix(1, 2, 1, vec![2.0]).unwrap();
        let v = sup_over(&space, &m, &e2, &b, &budgets()).unwrap();
        assert!((v - (2.0f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn lyapunov_additive_is_constant_in_n() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let p = Potential::site_potential(1, vec![2.0, -1.0]).unwrap();
        let mu = InvariantMeasure::bernoulli(vec![0.25, 0.75]).unwrap();
        let report = lyapunov(&space, &p, &mu, 8, &budgets()).unwrap();
        let expect = 0.25 * 2.0 - 0.75;
        for &(_, v) in &report.samples {
            assert!((v - expect).abs() < 1e-14);
        }
        assert!(report.exact);
    }

    #[test]
    fn lyapunov_constant_matrix_decays() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let mu = InvariantMeasure::uniform(2);
        let p = Potential::constant_matrix(1, 2, 1, vec![2.0]).unwrap();
        let report = lyapunov(&space, &p, &mu, 6, &budgets()).unwrap();
        for &(n, v) in &report.samples {
            assert!((v - (2.0f64).ln() / n as f64).abs() < 1e-13);
        }

        let j = Potential::constant_matrix(1, 2, 2, vec![1.0; 4]).unwrap();
        let report = lyapunov(&space, &j, &mu, 6, &budgets()).unwrap();
        for &(n, v) in &report.samples {
            assert!((v - (4.0f64).ln() / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn lyapunov_monte_carlo_agrees_with_exact() {
        let space = ShiftSpace::full_shift(1, 2).unwrap();
        let mu = InvariantMeasure::bernoulli(vec![0.3, 0.7]).unwrap();
        let tables = vec![vec![1.0, 1.5, 1.25, 2.0], vec![1.75, 1.0, 1.5, 1.1]];
        let p = Potential::Matrix {
            alphabet: 2,
            window: interval(1),
            size: 2,
            tables,
        };
        let exact = lyapunov(&space, &p, &mu, 5, &budgets()).unwrap();
        assert!(exact.exact);
        let tight = Budgets {
            max_measure_patterns: 1,
            ..Budgets::default()
        };
        let mc = lyapunov(&space, &p, &mu, 5, &tight).unwrap();
        assert!(!mc.exact);
        let sigma = mc.std_err.unwrap();
        assert!(
            (mc.estimate - exact.estimate).abs() <= 5.0 * sigma + 1e-6,
            "mc {} vs exact {} (sigma {sigma})",
            mc.estimate,
            exact.estimate
        );
    }

    #[test]
    fn c2_exact_for_matrix_on_sft() {
        let space = ShiftSpace::golden_mean();
        let tables = vec![vec![1.0, 1.25, 1.5, 1.0], vec![2.0, 1.0, 1.0, 1.75]];
        let p = Potential::Matrix {
            alphabet: 2,
            window: interval(1),
            size: 2,
            tables,
        };
        let report = check_conditions(&space, &p, 120, 3, &budgets()).unwrap();
        assert!(report.c2_max_deviation == 0.0, "{report:?}");
    }
}
