pub mod error;
pub mod space;
pub mod lp;
pub mod polyhedra;
pub mod scalar;
pub mod acceptance;
pub mod axioms;
pub mod riskproc;
pub mod riskvec;
pub mod families;
pub mod sample;
pub mod bridge;
pub mod consistency;
pub mod fixtures;

pub use error::{Error, Result};
pub use bridge::{lift, project, AugmentedProcessRiskMeasure};
pub use consistency::{AugmentedFamily, FixtureConfig, Implication, MptcReport};
pub use families::{ProcessFamily, RestrictedFamily, RestrictedSchedule, VectorFamily};
pub use polyhedra::{ConditionalPolyhedron, Polyhedron, Tier, UnionOptions};
pub use riskproc::{ProcessAcceptanceSet, ProcessDualVariable, ProcessRiskMeasure};
pub use riskvec::{RestrictedAcceptanceSet, VectorAcceptanceSet, VectorDualVariable, VectorRiskMeasure};
pub use space::{Eligible, Field, Measure, OptionalField, OptionalMeasure, Process, ScenarioSpace, VectorMeasure};
