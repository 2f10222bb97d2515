//! Explicit instability constructions: annulus schedules, bump sequences,
//! the pairs `(k, k_n)` and their stability ratios, and the STFT-level
//! family built from modulated copies of a seed signal.

mod bumps;
mod family;
mod pair;
mod schedule;

pub use bumps::{build_bumps, verify_lemma_bounds, BoundReport, BoundRow};
pub use family::{
    cheeger_trend_fields, frequency_tail, stft_instability_family, FamilyMember, FamilyParams, InstabilityFamily,
    LpReductionRow,
};
pub use pair::{assemble_pair, instability_ratio, lower_bound_sweep, DichotomyRow, InstabilityPair, StabilityRatio};
pub use schedule::{select_annulus_schedule, select_radii, AnnulusSchedule};
