//! Room-level indoor localization engine built around BLE beacon RSSI.
//!
//! The crate bundles everything needed to study room-level asset tracking
//! end to end, without radio hardware:
//!
//! - [`geometry`]: rectilinear floor plans with fixed-beacon placements and
//!   the rasterized circle-intersection machinery used by multilateration.
//! - [`dataset`]: fingerprint survey datasets (sparse CSV), the two
//!   imputation strategies, and deterministic stratified splitting.
//! - [`knn`]: the fingerprinting localizer, a k-nearest-neighbors room
//!   classifier over RSSI vectors.
//! - [`multilat`]: the adapted multilateration localizer that resolves a
//!   room label through a four-case geometric dispatch.
//! - [`sim`]: a seeded radio simulator producing surveys, gateway walks and
//!   scan-event streams under a log-distance path-loss model.
//! - [`stream`]: the gateway-event pipeline: parse, enrich against
//!   inventory, window, localize, and maintain an asset-location store.
//! - [`evalkit`]: the evaluation studies (beacon-subset sweeps, placement
//!   frequency, training-size sweeps).
//! - [`econ`]: the total-cost-of-ownership model comparing the two
//!   deployment styles.
//!
//! Everything is deterministic: all randomness flows from explicit 64-bit
//! seeds through a fixed, portable generator (ChaCha8), so identical inputs
//! give byte-identical outputs.

pub mod dataset;
pub mod econ;
pub mod evalkit;
pub mod geometry;
pub mod knn;
pub mod multilat;
pub mod sim;
pub mod stream;
