//! Shift spaces over Z^d, clopen sets as pattern lists on finite windows,
//! covers and partitions, pull-backs, joins, and generated partitions.
//!
//! The action convention is `(g·x)(h) = x(h + g)`. "Admissible" always means
//! locally admissible: no forbidden pattern occurs inside the window. For
//! one-dimensional subshifts of finite type this matches global
//! extendability up to boundary effects that vanish in the limits; in two
//! and more dimensions locally admissible counting may strictly exceed the
//! globally admissible count, so quantitative claims about proper SFTs are
//! restricted to d = 1.
//!
//! All pattern enumerations proceed in lexicographic order and empty atoms
//! are pruned eagerly, which keeps every downstream report deterministic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::lattice::{FiniteSubset, LatticePoint};

/// A forbidden local pattern: symbols aligned with the window's canonical
/// point order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenPattern {
    pub window: FiniteSubset,
    pub symbols: Vec<u8>,
}

/// A full shift or SFT over Z^d given by finitely many forbidden patterns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSpace {
    dim: usize,
    alphabet: u8,
    forbidden: Vec<ForbiddenPattern>,
}

impl ShiftSpace {
    pub fn new(dim: usize, alphabet: u8, forbidden: Vec<ForbiddenPattern>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if alphabet == 0 {
            return Err(Error::InvalidArgument("alphabet must be >= 1".into()));
        }
        for f in &forbidden {
            if f.window.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.window.dim(),
                });
            }
            if f.window.is_empty() {
                return Err(Error::EmptySet("forbidden pattern window"));
            }
            if f.symbols.len() != f.window.len() {
                return Err(Error::InvalidArgument(
                    "forbidden pattern symbols must match its window".into(),
                ));
            }
            if f.symbols.iter().any(|&s| s >= alphabet) {
                return Err(Error::InvalidArgument(
                    "forbidden pattern uses a symbol outside the alphabet".into(),
                ));
            }
        }
        Ok(ShiftSpace {
            dim,
            alphabet,
            forbidden,
        })
    }

    pub fn full_shift(dim: usize, alphabet: u8) -> Result<Self> {
        ShiftSpace::new(dim, alphabet, Vec::new())
    }

    /// The golden-mean SFT: binary symbols with the word 11 forbidden.
    pub fn golden_mean() -> Self {
        let window = FiniteSubset::from_coords(1, &[&[0], &[1]]).unwrap();
        ShiftSpace::new(
            1,
            2,
            vec![ForbiddenPattern {
                window,
                symbols: vec![1, 1],
            }],
        )
        .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn forbidden(&self) -> &[ForbiddenPattern] {
        &self.forbidden
    }

    pub fn is_full_shift(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// Exact locally-admissible word count for d = 1 via dynamic programming
    /// over a sliding state of the last `L - 1` symbols, `L` the largest
    /// forbidden-window diameter.
    pub fn admissible_word_count(&self, n: u32) -> Option<u128> {
        if self.dim != 1 || n == 0 {
            return None;
        }
        let k = self.alphabet as usize;
        let mut span = 1i64;
        for f in &self.forbidden {
            let (lo, hi) = f.window.bounding_box().unwrap();
            span = span.max(hi[0] - lo[0] + 1);
        }
        let state_len = (span - 1) as usize;
        // States are the last `state_len` symbols (fewer at the start).
        let mut counts: BTreeMap<Vec<u8>, u128> = BTreeMap::new();
        counts.insert(Vec::new(), 1);
        for _pos in 0..n {
            let mut next: BTreeMap<Vec<u8>, u128> = BTreeMap::new();
            for (state, c) in &counts {
                'symbol: for s in 0..k as u8 {
                    let mut word = state.clone();
                    word.push(s);
                    // Check every forbidden pattern ending at the new symbol.
                    for f in &self.forbidden {
                        let (lo, hi) = f.window.bounding_box().unwrap();
                        let width = (hi[0] - lo[0] + 1) as usize;
                        if word.len() < width {
                            continue;
                        }
                        let tail = &word[word.len() - width..];
                        let mut matches = true;
                        for (p, &sym) in f.window.iter().zip(f.symbols.iter()) {
                            let idx = (p.coords()[0] - lo[0]) as usize;
                            if tail[idx] != sym {
                                matches = false;
                                break;
                            }
                        }
                        if matches {
                            continue 'symbol;
                        }
                    }
                    if word.len() > state_len {
                        word.remove(0);
                    }
                    *next.entry(word).or_insert(0) += c;
                }
            }
            counts = next;
        }
        Some(counts.values().sum())
    }
}

/// Pre-computed admissibility constraints for one window: for each step of
/// the traversal order, the forbidden-pattern instances completed by
/// deciding that step's point. Positions index the window's canonical point
/// order regardless of traversal.
pub(crate) struct AdmissibilityTable {
    pub per_step: Vec<Vec<(Vec<usize>, Vec<u8>)>>,
}

impl AdmissibilityTable {
    /// Canonical order: step i decides canonical position i.
    pub fn new(space: &ShiftSpace, window: &FiniteSubset) -> Self {
        let order: Vec<usize> = (0..window.len()).collect();
        Self::with_order(space, window, &order)
    }

    /// `order[step]` is the canonical position decided at that step.
    pub fn with_order(space: &ShiftSpace, window: &FiniteSubset, order: &[usize]) -> Self {
        debug_assert_eq!(order.len(), window.len());
        let mut inv = vec![0usize; order.len()];
        for (step, &pos) in order.iter().enumerate() {
            inv[pos] = step;
        }
        let mut per_step: Vec<Vec<(Vec<usize>, Vec<u8>)>> = vec![Vec::new(); window.len()];
        if window.is_empty() {
            return AdmissibilityTable { per_step };
        }
        for f in space.forbidden() {
            // Valid translates: t with f.window + t inside the window.
            let mut valid: Option<FiniteSubset> = None;
            for p in f.window.iter() {
                let shifted = window.translate(&p.neg());
                valid = Some(match valid {
                    None => shifted,
                    Some(v) => v.intersection(&shifted).unwrap(),
                });
            }
            let Some(valid) = valid else { continue };
            for t in valid.iter() {
                let mut positions = Vec::with_capacity(f.window.len());
                for p in f.window.iter() {
                    let q = p.add(t);
                    positions.push(window.position(&q).expect("translate inside window"));
                }
                let step = positions.iter().map(|&p| inv[p]).max().unwrap();
                per_step[step].push((positions, f.symbols.clone()));
            }
        }
        AdmissibilityTable { per_step }
    }

    /// True when no constraint completed at `step` matches `symbols`
    /// (canonical indexing).
    #[inline]
    pub fn ok_at(&self, step: usize, symbols: &[u8]) -> bool {
        'instance: for (positions, forbidden) in &self.per_step[step] {
            for (pos, &sym) in positions.iter().zip(forbidden.iter()) {
                if symbols[*pos] != sym {
                    continue 'instance;
                }
            }
            return false;
        }
        true
    }
}

/// Streams every locally admissible pattern on `window` in lexicographic
/// order. Returns the number of patterns visited.
pub fn scan_admissible<F: FnMut(&[u8])>(
    space: &ShiftSpace,
    window: &FiniteSubset,
    budget: u64,
    visit: &mut F,
) -> Result<u64> {
    if window.dim() != space.dim() && !window.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: window.dim(),
        });
    }
    let table = AdmissibilityTable::new(space, window);
    let mut symbols = vec![0u8; window.len()];
    let mut count = 0u64;
    scan_rec(space, &table, &mut symbols, 0, budget, &mut count, visit)?;
    Ok(count)
}

fn scan_rec<F: FnMut(&[u8])>(
    space: &ShiftSpace,
    table: &AdmissibilityTable,
    symbols: &mut Vec<u8>,
    depth: usize,
    budget: u64,
    count: &mut u64,
    visit: &mut F,
) -> Result<()> {
    if depth == symbols.len() {
        if *count >= budget {
            return Err(Error::BudgetExceeded {
                what: "admissible pattern enumeration".into(),
                needed: *count + 1,
                budget,
            });
        }
        *count += 1;
        visit(symbols);
        return Ok(());
    }
    for s in 0..space.alphabet() {
        symbols[depth] = s;
        if table.ok_at(depth, symbols) {
            scan_rec(space, table, symbols, depth + 1, budget, count, visit)?;
        }
    }
    Ok(())
}

/// Streams the admissible completions of a partially fixed pattern:
/// positions in `fixed_positions` carry the corresponding `fixed_symbols`,
/// the rest range over the alphabet.
pub fn scan_extensions<F: FnMut(&[u8])>(
    space: &ShiftSpace,
    window: &FiniteSubset,
    fixed_positions: &[usize],
    fixed_symbols: &[u8],
    budget: u64,
    visit: &mut F,
) -> Result<u64> {
    debug_assert_eq!(fixed_positions.len(), fixed_symbols.len());
    let mut forced: Vec<Option<u8>> = vec![None; window.len()];
    for (&pos, &sym) in fixed_positions.iter().zip(fixed_symbols.iter()) {
        forced[pos] = Some(sym);
    }
    let table = AdmissibilityTable::new(space, window);
    let mut symbols = vec![0u8; window.len()];
    let mut count = 0u64;

    #[allow(clippy::too_many_arguments)]
    fn rec<F: FnMut(&[u8])>(
        space: &ShiftSpace,
        table: &AdmissibilityTable,
        forced: &[Option<u8>],
        symbols: &mut Vec<u8>,
        depth: usize,
        budget: u64,
        count: &mut u64,
        visit: &mut F,
    ) -> Result<()> {
        if depth == symbols.len() {
            if *count >= budget {
                return Err(Error::BudgetExceeded {
                    what: "extension enumeration".into(),
                    needed: *count + 1,
                    budget,
                });
            }
            *count += 1;
            visit(symbols);
            return Ok(());
        }
        let range = match forced[depth] {
            Some(s) => s..=s,
            None => 0..=space.alphabet().saturating_sub(1),
        };
        for s in range {
            symbols[depth] = s;
            if table.ok_at(depth, symbols) {
                rec(
                    space,
                    table,
                    forced,
                    symbols,
                    depth + 1,
                    budget,
                    count,
                    visit,
                )?;
            }
        }
        Ok(())
    }

    rec(
        space,
        &table,
        &forced,
        &mut symbols,
        0,
        budget,
        &mut count,
        visit,
    )?;
    Ok(count)
}

/// One-shot admissibility test of a complete pattern on a window.
pub fn locally_admissible(space: &ShiftSpace, window: &FiniteSubset, symbols: &[u8]) -> bool {
    let table = AdmissibilityTable::new(space, window);
    (0..symbols.len()).all(|d| table.ok_at(d, symbols))
}

/// A clopen set: membership of a configuration depends only on its
/// restriction to `window`, and the allowed restrictions are `patterns`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClopenSet {
    pub window: FiniteSubset,
    pub patterns: Vec<Vec<u8>>,
}

impl ClopenSet {
    pub fn new(window: FiniteSubset, mut patterns: Vec<Vec<u8>>) -> Result<Self> {
        for p in &patterns {
            if p.len() != window.len() {
                return Err(Error::InvalidArgument(
                    "pattern length must match window size".into(),
                ));
            }
        }
        patterns.sort();
        patterns.dedup();
        Ok(ClopenSet { window, patterns })
    }

    /// Single-cylinder constructor.
    pub fn cylinder(window: FiniteSubset, symbols: Vec<u8>) -> Result<Self> {
        ClopenSet::new(window, vec![symbols])
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains_pattern(&self, symbols: &[u8]) -> bool {
        self.patterns
            .binary_search_by(|p| p.as_slice().cmp(symbols))
            .is_ok()
    }

    /// Re-expresses the set on a larger window by enumerating admissible
    /// extensions of its patterns.
    pub fn rewindow(
        &self,
        space: &ShiftSpace,
        new_window: &FiniteSubset,
        budgets: &Budgets,
    ) -> Result<ClopenSet> {
        if !self.window.is_subset_of(new_window) {
            return Err(Error::InvalidArgument(
                "rewindow target must contain the current window".into(),
            ));
        }
        let positions: Vec<usize> = self
            .window
            .iter()
            .map(|p| new_window.position(p).unwrap())
            .collect();
        let mut kept = Vec::new();
        let mut restriction = vec![0u8; positions.len()];
        scan_admissible(space, new_window, budgets.max_scan_patterns, &mut |pat| {
            for (i, &pos) in positions.iter().enumerate() {
                restriction[i] = pat[pos];
            }
            if self.contains_pattern(&restriction) {
                kept.push(pat.to_vec());
            }
        })?;
        ClopenSet::new(new_window.clone(), kept)
    }
}

/// A finite cover of the space: pattern sets over one common window. The
/// pattern sets may overlap; a [`Partition`] wraps the disjoint case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    window: FiniteSubset,
    elements: Vec<Vec<Vec<u8>>>,
}

impl Cover {
    /// Normalizes a family of clopen sets to their union window. Elements
    /// that are empty as pattern sets are dropped.
    pub fn from_clopen_sets(
        space: &ShiftSpace,
        sets: Vec<ClopenSet>,
        budgets: &Budgets,
    ) -> Result<Cover> {
        if sets.is_empty() {
            return Err(Error::EmptySet("cover elements"));
        }
        let mut window = sets[0].window.clone();
        for s in &sets[1..] {
            window = window.union(&s.window)?;
        }
        let mut elements = Vec::new();
        for s in sets {
            let expanded = if s.window == window {
                s
            } else {
                s.rewindow(space, &window, budgets)?
            };
            if !expanded.is_empty() {
                elements.push(expanded.patterns);
            }
        }
        if elements.is_empty() {
            return Err(Error::EmptySet("cover has no non-empty element"));
        }
        Ok(Cover { window, elements })
    }

    /// The trivial cover {X}: one element, empty window.
    pub fn trivial(dim: usize) -> Cover {
        Cover {
            window: FiniteSubset::empty(dim),
            elements: vec![vec![Vec::new()]],
        }
    }

    /// The partition of X by the symbol at the origin.
    pub fn zero_site_partition(space: &ShiftSpace) -> Cover {
        let window = FiniteSubset::singleton(LatticePoint::origin(space.dim()));
        let elements = (0..space.alphabet())
            .filter(|&s| locally_admissible(space, &window, &[s]))
            .map(|s| vec![vec![s]])
            .collect();
        Cover { window, elements }
    }

    /// The partition into single-pattern cylinders on `window`.
    pub fn cylinder_partition(
        space: &ShiftSpace,
        window: &FiniteSubset,
        budgets: &Budgets,
    ) -> Result<Cover> {
        let mut elements = Vec::new();
        scan_admissible(space, window, budgets.max_scan_patterns, &mut |pat| {
            elements.push(vec![pat.to_vec()]);
        })?;
        Ok(Cover {
            window: window.clone(),
            elements,
        })
    }

    pub(crate) fn from_raw(window: FiniteSubset, elements: Vec<Vec<Vec<u8>>>) -> Cover {
        Cover { window, elements }
    }

    pub fn window(&self) -> &FiniteSubset {
        &self.window
    }

    pub fn elements(&self) -> &[Vec<Vec<u8>>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Bitmask of the elements containing a pattern on this cover's window.
    pub fn element_mask(&self, symbols: &[u8]) -> u64 {
        debug_assert!(self.elements.len() <= 64);
        let mut mask = 0u64;
        for (i, el) in self.elements.iter().enumerate() {
            if el.binary_search_by(|p| p.as_slice().cmp(symbols)).is_ok() {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// True when every element holds exactly one pattern.
    pub fn all_singletons(&self) -> bool {
        self.elements.iter().all(|e| e.len() == 1)
    }

    /// Checks the cover property: every admissible pattern on the window
    /// lies in some element.
    pub fn covers_space(&self, space: &ShiftSpace, budgets: &Budgets) -> Result<bool> {
        if self.elements.len() > budgets.max_flat_elements {
            return Err(Error::BudgetExceeded {
                what: "cover property check (elements)".into(),
                needed: self.elements.len() as u64,
                budget: budgets.max_flat_elements as u64,
            });
        }
        let mut ok = true;
        scan_admissible(space, &self.window, budgets.max_scan_patterns, &mut |p| {
            if self.element_mask(p) == 0 {
                ok = false;
            }
        })?;
        Ok(ok)
    }

    /// Checks disjointness and exact coverage.
    pub fn is_partition(&self, space: &ShiftSpace, budgets: &Budgets) -> Result<bool> {
        if self.elements.len() > budgets.max_flat_elements {
            return Err(Error::BudgetExceeded {
                what: "partition check (elements)".into(),
                needed: self.elements.len() as u64,
                budget: budgets.max_flat_elements as u64,
            });
        }
        let mut ok = true;
        scan_admissible(space, &self.window, budgets.max_scan_patterns, &mut |p| {
            if self.element_mask(p).count_ones() != 1 {
                ok = false;
            }
        })?;
        Ok(ok)
    }
}

/// A cover whose elements are pairwise disjoint and exactly exhaust the
/// admissible patterns on the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cover: Cover,
}

impl Partition {
    pub fn try_new(space: &ShiftSpace, cover: Cover, budgets: &Budgets) -> Result<Partition> {
        if !cover.is_partition(space, budgets)? {
            return Err(Error::InvalidArgument(
                "cover elements overlap or miss admissible patterns".into(),
            ));
        }
        Ok(Partition { cover })
    }

    pub(crate) fn new_unchecked(cover: Cover) -> Partition {
        Partition { cover }
    }

    /// The zero-coordinate partition.
    pub fn zero_site(space: &ShiftSpace) -> Partition {
        Partition {
            cover: Cover::zero_site_partition(space),
        }
    }

    /// Single-pattern cylinders over a window.
    pub fn cylinders(
        space: &ShiftSpace,
        window: &FiniteSubset,
        budgets: &Budgets,
    ) -> Result<Partition> {
        Ok(Partition {
            cover: Cover::cylinder_partition(space, window, budgets)?,
        })
    }

    /// The trivial partition {X}.
    pub fn trivial(dim: usize) -> Partition {
        Partition {
            cover: Cover::trivial(dim),
        }
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn into_cover(self) -> Cover {
        self.cover
    }

    pub fn window(&self) -> &FiniteSubset {
        self.cover.window()
    }

    pub fn elements(&self) -> &[Vec<Vec<u8>>] {
        self.cover.elements()
    }

    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }
}

/// The pull-back `g^{-1} U`: windows translate by `g`, patterns unchanged.
/// With the action convention `(g·x)(h) = x(h + g)`, membership satisfies
/// `x in g^{-1}U_i` iff `g·x in U_i`.
pub fn pull_back(cover: &Cover, g: &LatticePoint) -> Cover {
    Cover {
        window: cover.window.translate(g),
        elements: cover.elements.clone(),
    }
}

/// The join `U_F = ⋁_{g in F} g^{-1}U` with empty intersections pruned;
/// `U_∅ = {X}`. Elements are indexed by choice tuples in lexicographic
/// order and materialized as pattern sets on the union window.
pub fn join_over(
    space: &ShiftSpace,
    cover: &Cover,
    f_set: &FiniteSubset,
    budgets: &Budgets,
) -> Result<Cover> {
    if f_set.is_empty() {
        return Ok(Cover::trivial(space.dim()));
    }
    if cover.len() > budgets.max_flat_elements {
        return Err(Error::BudgetExceeded {
            what: "join (base cover elements)".into(),
            needed: cover.len() as u64,
            budget: budgets.max_flat_elements as u64,
        });
    }
    let mut window = FiniteSubset::empty(space.dim());
    for g in f_set.iter() {
        window = window.union(&cover.window.translate(g))?;
    }
    // Positions of each translated base window inside the union window.
    let position_maps: Vec<Vec<usize>> = f_set
        .iter()
        .map(|g| {
            cover
                .window
                .translate(g)
                .iter()
                .map(|p| window.position(p).unwrap())
                .collect()
        })
        .collect();

    let mut tuples: BTreeMap<Vec<u8>, Vec<Vec<u8>>> = BTreeMap::new();
    let mut inserts = 0u64;
    let mut over_budget = false;
    let mut restriction = vec![0u8; cover.window.len()];
    let mut masks: Vec<u64> = vec![0; f_set.len()];
    scan_admissible(space, &window, budgets.max_scan_patterns, &mut |pat| {
        if over_budget {
            return;
        }
        for (gi, posmap) in position_maps.iter().enumerate() {
            for (i, &pos) in posmap.iter().enumerate() {
                restriction[i] = pat[pos];
            }
            masks[gi] = cover.element_mask(&restriction);
        }
        if masks.contains(&0) {
            return;
        }
        // Expand the product of per-translate choices into tuples.
        let mut tuple: Vec<u8> = Vec::with_capacity(masks.len());
        expand_tuples(&masks, 0, &mut tuple, &mut |t| {
            inserts += 1;
            if inserts > budgets.max_join_inserts {
                over_budget = true;
                return;
            }
            tuples.entry(t.to_vec()).or_default().push(pat.to_vec());
        });
    })?;
    if over_budget {
        return Err(Error::BudgetExceeded {
            what: "join (pattern-element insertions)".into(),
            needed: inserts,
            budget: budgets.max_join_inserts,
        });
    }
    if tuples.len() > budgets.max_join_elements {
        return Err(Error::BudgetExceeded {
            what: "join (materialized elements)".into(),
            needed: tuples.len() as u64,
            budget: budgets.max_join_elements as u64,
        });
    }
    let elements = tuples.into_values().collect();
    Ok(Cover { window, elements })
}

fn expand_tuples<F: FnMut(&[u8])>(masks: &[u64], depth: usize, tuple: &mut Vec<u8>, emit: &mut F) {
    if depth == masks.len() {
        emit(tuple);
        return;
    }
    let mut m = masks[depth];
    while m != 0 {
        let bit = m.trailing_zeros() as u8;
        tuple.push(bit);
        expand_tuples(masks, depth + 1, tuple, emit);
        tuple.pop();
        m &= m - 1;
    }
}

/// The Borel partition generated by a cover, with each atom's membership
/// bit-vector across the cover elements. Atoms are equivalence classes of
/// admissible window patterns by membership, ordered by first appearance in
/// the lexicographic scan.
pub fn generated_partition(
    space: &ShiftSpace,
    cover: &Cover,
    budgets: &Budgets,
) -> Result<(Partition, Vec<u64>)> {
    if cover.len() > budgets.max_flat_elements {
        return Err(Error::BudgetExceeded {
            what: "generated partition (elements)".into(),
            needed: cover.len() as u64,
            budget: budgets.max_flat_elements as u64,
        });
    }
    let mut order: Vec<u64> = Vec::new();
    let mut atoms: BTreeMap<u64, Vec<Vec<u8>>> = BTreeMap::new();
    scan_admissible(space, &cover.window, budgets.max_scan_patterns, &mut |p| {
        let mask = cover.element_mask(p);
        let entry = atoms.entry(mask).or_insert_with(|| {
            order.push(mask);
            Vec::new()
        });
        entry.push(p.to_vec());
    })?;
    let elements: Vec<Vec<Vec<u8>>> = order
        .iter()
        .map(|mask| atoms.get(mask).unwrap().clone())
        .collect();
    let partition = Partition::new_unchecked(Cover {
        window: cover.window.clone(),
        elements,
    });
    Ok((partition, order))
}

/// True when every element of `fine` is contained in some element of
/// `coarse` after re-windowing both to the union window.
pub fn refines(
    space: &ShiftSpace,
    fine: &Cover,
    coarse: &Cover,
    budgets: &Budgets,
) -> Result<bool> {
    let window = fine.window.union(&coarse.window)?;
    let fine_x = expand_cover(space, fine, &window, budgets)?;
    let coarse_x = expand_cover(space, coarse, &window, budgets)?;
    'outer: for fe in &fine_x {
        for ce in &coarse_x {
            if fe.iter().all(|p| ce.binary_search(p).is_ok()) {
                continue 'outer;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

fn expand_cover(
    space: &ShiftSpace,
    cover: &Cover,
    window: &FiniteSubset,
    budgets: &Budgets,
) -> Result<Vec<Vec<Vec<u8>>>> {
    if &cover.window == window {
        return Ok(cover.elements.clone());
    }
    let positions: Vec<usize> = cover
        .window
        .iter()
        .map(|p| window.position(p).unwrap())
        .collect();
    let mut out: Vec<Vec<Vec<u8>>> = vec![Vec::new(); cover.len()];
    let mut restriction = vec![0u8; positions.len()];
    scan_admissible(space, window, budgets.max_scan_patterns, &mut |pat| {
        for (i, &pos) in positions.iter().enumerate() {
            restriction[i] = pat[pos];
        }
        let mask = cover.element_mask(&restriction);
        let mut m = mask;
        while m != 0 {
            let bit = m.trailing_zeros() as usize;
            out[bit].push(pat.to_vec());
            m &= m - 1;
        }
    })?;
    Ok(out)
}
