//! Correlation grouping, chi-squared testing, and the bill/change-point
//! association test.

mod association;
mod chi2;
mod correlation;

pub use association::{
    permutation_association, permutation_association_with, window_mask, AssociationResult, DEFAULT_PERMUTATIONS,
    DEFAULT_WINDOW_MONTHS, MIN_PERMUTATIONS,
};
pub use chi2::{chi_square_gof, chi_square_sf, ln_gamma, regularized_gamma_q, ChiSquareResult};
pub use correlation::{
    collapse_groups, correlation_matrix, group_matrix, pearson, CategoryGroup, CorrelationMatrix,
    DEFAULT_GROUP_THRESHOLD,
};
