#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod containers;
pub mod directivity;
pub mod error;
pub mod firgen;
pub mod geometry;
pub mod interpolate;
pub mod partials;
pub mod pipeline;
pub mod recording;
pub mod spectral;
pub mod synth;

pub use bands::{BAND_COUNT, NOMINAL_CENTERS};
pub use containers::{DirectivityDocument, DocumentKind, DocumentName, SourceInfo};
pub use directivity::{
    BandDirectivity, Calibration, EqualizationState, SingleToneDirectivity, SoundLevelSummary, P0,
};
pub use error::{Error, Result};
pub use firgen::{BandFilter, DenseSpectrum, FirBank, FirDesigner};
pub use geometry::{SphericalGrid, SphericalPoint};
pub use interpolate::{InterpolatedDirectivity, SplineInterpolator};
pub use partials::{Dynamic, NoteContext, PartialSet, Termination};
pub use pipeline::{Manifest, PipelineOutput};
pub use recording::RecordingSet;
pub use spectral::{PsdEstimate, Spectrum, TimeSignal};
