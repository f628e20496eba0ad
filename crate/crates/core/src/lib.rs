//! SU(2) representation varieties of a genus-3 surface and of the mapping
//! torus of the powers of a bounding pair map: equation systems, component
//! invariants, canonical representatives and numerical path certificates.
//!
//! ```
//! use repvar::connectivity::sample_rng;
//! use repvar::{canonical_path, classify_fix, randomized_representative, verify_certificate};
//! use repvar::{ComponentLabel, PathConfig, Sign};
//!
//! let label = ComponentLabel::Off { sign: Sign::Minus, k: 0, l: 1 };
//! let rep = randomized_representative(3, label, &mut sample_rng(42, 0))?;
//! assert_eq!(classify_fix(&rep, 3, 1e-9)?, label);
//! let cert = canonical_path(&rep, 3, &PathConfig::default())?;
//! assert!(verify_certificate(&cert).valid);
//! # Ok::<(), repvar::Error>(())
//! ```

pub mod commutator;
pub mod components;
pub mod connectivity;
pub mod error;
mod lsq;
pub mod path;
pub mod su2;
pub mod varieties;
pub mod words;

pub use commutator::{fiber_path, fricke_trace, sample_fiber, solve_commutator, FiberNode, FiberPath};
pub use components::{
    canonical_representative, canonical_torus_representative, classify_fix, classify_torus, count_fix, count_fix_char,
    count_torus, enumerate_fix_labels, enumerate_torus_labels, randomized_representative,
    randomized_torus_representative, ComponentLabel, Sign, TorusLabel,
};
pub use connectivity::{
    canonical_path, canonical_torus_path, census, probe_path, verify_certificate, CensusReport, PathCertificate,
    PathConfig, VerifyReport,
};
pub use error::{Error, Result};
pub use su2::GroupElement;
pub use varieties::{
    centralizer_type, derived_x, fixed_point_residual, project_to_variety, random_surface_rep, solve_intertwiner,
    surface_residual, torus_residual, CentralizerType, RepDocument, ResidualReport, SurfaceRep, System, TorusRep,
};
pub use words::{phi_substitution, Generator, Substitution, Word};
