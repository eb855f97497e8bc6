//! Photon-pair generation rates and limiting pump powers for integrated
//! spontaneous four-wave-mixing sources (channel waveguides and microring
//! resonators), with a numerical quadrature and Schmidt-decomposition
//! oracle for the closed-form results.

pub mod design;
pub mod error;
pub mod limits;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rates;
pub mod report;
pub mod scales;
pub mod units;

pub use design::{Design, MaterialDb};
pub use error::{Error, Result};
pub use limits::{classify, LimitKind, LimitPower, LimitReport, MultiPairVariant};
pub use model::{
    validate_design, Bound, ChannelGeometry, Coupling, FilterSpec, Material, PumpMode, PumpShape, PumpSpec,
    RingGeometry, Structure, ValidationResult,
};
pub use scales::{derive_scales, DerivedScales};
