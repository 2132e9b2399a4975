//! Resource caps for the enumerative operations.
//!
//! Every exponential-size computation is guarded by one of these knobs and
//! fails with an explicit [`crate::Error::BudgetExceeded`] instead of
//! silently truncating. Defaults are sized for desk-scale instances.

#[derive(Clone, Debug)]
pub struct Budgets {
    /// Leaves visited by one admissible-pattern enumeration.
    pub max_scan_patterns: u64,
    /// Distinct elements a materialized join may produce.
    pub max_join_elements: usize,
    /// Total (pattern, element) insertions while materializing a join.
    pub max_join_inserts: u64,
    /// Elements of a flat cover handled through bit masks.
    pub max_flat_elements: usize,
    /// Base-cover elements accepted by the pressure optimizer.
    pub pressure_exact_elements: usize,
    /// Atom-weight entries the exact pressure optimizer may hold.
    pub pressure_exact_atoms: usize,
    /// Search nodes for the exact pressure branch-and-bound.
    pub pressure_bb_nodes: u64,
    /// Opening choices branched per uncovered atom before giving up
    /// exactness.
    pub pressure_branch_width: usize,
    /// Atoms accepted by the exact cover-entropy optimizer.
    pub entropy_exact_atoms: usize,
    /// Cover elements accepted by the exact cover-entropy optimizer.
    pub entropy_exact_elements: usize,
    /// Search nodes for the exact cover-entropy branch-and-bound.
    pub entropy_bb_nodes: u64,
    /// Matrix products explored by one min-product evaluation.
    pub max_matrix_products: u64,
    /// Extension patterns enumerated per sup evaluation.
    pub max_extension_patterns: u64,
    /// Patterns enumerated for one exact expectation.
    pub max_measure_patterns: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_scan_patterns: 1 << 21,
            max_join_elements: 1 << 12,
            max_join_inserts: 1 << 22,
            max_flat_elements: 64,
            pressure_exact_elements: 16,
            pressure_exact_atoms: 1 << 20,
            pressure_bb_nodes: 200_000,
            pressure_branch_width: 64,
            entropy_exact_atoms: 24,
            entropy_exact_elements: 8,
            entropy_bb_nodes: 500_000,
            max_matrix_products: 200_000,
            max_extension_patterns: 1 << 16,
            max_measure_patterns: 1 << 20,
        }
    }
}

impl Budgets {
    /// Generous caps for tests and callers that prefer exactness over speed.
    pub fn roomy() -> Self {
        Budgets {
            max_scan_patterns: 1 << 27,
            max_join_elements: 1 << 16,
            max_join_inserts: 1 << 26,
            entropy_exact_atoms: 4096,
            entropy_exact_elements: 32,
            entropy_bb_nodes: 5_000_000,
            ..Budgets::default()
        }
    }
}
