//! Command-line checker for partial immersions and partially free maps.

pub mod app;
pub mod check;
pub mod manifest;
pub mod report;

pub use app::run;
pub use check::{run_check, run_gallery, CheckError, GalleryOptions, Threads};
pub use manifest::{Manifest, ManifestError, Mode};
pub use report::{Report, Verdict};
