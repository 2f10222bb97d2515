//! Domains on the time-frequency plane and the geometric constants built on them.

mod certificate;
mod cheeger;
mod connectivity;
mod contour;
mod mask;
mod poincare;

pub use certificate::{
    find_zeros, log_concavity, stability_certificate, CertificateReport, GridZero, LogConcavity, EXCISION_CELLS,
    MODULUS_FLOOR,
};
pub use cheeger::{
    cheeger_estimate, circle_integral, line_integral, smooth, Candidate, CandidateRow, CheegerFamily, CheegerReport,
    NOISE_FLOOR,
};
pub use connectivity::{
    check_average, circle_average, connectivity, gluing_bound, gluing_check, local_h1, phase_distance_on, AdversaryRow,
    AverageCheck, CircleVariant, GluingCheck,
};
pub use contour::{bilinear, isocontour, weighted_length, Segment};
pub use mask::{DomainMask, MaskSummary};
pub use poincare::{poincare_constant, PoincareReport, WEIGHT_FLOOR};
