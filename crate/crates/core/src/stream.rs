//! The gateway-event pipeline, replayed in process over files: parse scan
//! events, enrich them against inventory, aggregate per-gateway tumbling
//! windows, localize the gateway, and maintain a freshest-known location
//! store for the tracked assets.
//!
//! Wire format: UTF-8 line-delimited JSON, one event per line with exactly
//! the four fields of [`BleScanEvent`]. Inventory file: CSV
//! `mac_address,type,label,room`. Store export: CSV
//! `asset,room,last_seen,observed_by,rssi`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dataset::SENTINEL_RSSI;
use crate::geometry::FloorPlan;
use crate::knn::KnnModel;
use crate::multilat::{self, PathLossParams};

/// Default publish interval for live use; replay tests use shorter windows.
pub const DEFAULT_WINDOW_S: u64 = 60;
/// Default RSSI threshold for assigning an asset to the gateway's room.
pub const DEFAULT_ASSIGN_THRESHOLD_DBM: f64 = -80.0;

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error("malformed event: {0}")]
    MalformedEvent(String),
    #[error("invalid MAC address `{0}`")]
    InvalidMac(String),
    #[error("rssi {0} outside [-120, 0] dBm")]
    RssiOutOfRange(i16),
    #[error("inventory parse error at line {line}: {msg}")]
    InventoryParse { line: usize, msg: String },
    #[error("invalid inventory: {0}")]
    InventoryInvalid(String),
    #[error("store parse error at line {line}: {msg}")]
    StoreParse { line: usize, msg: String },
    #[error("asset {0} is not in the inventory")]
    UnknownAsset(String),
    #[error("snapshot has no fixed-beacon observations")]
    NoFix,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Knn(#[from] crate::knn::KnnError),
    #[error(transparent)]
    Multilat(#[from] crate::multilat::MultilatError),
}

/// One beacon sighting published by a gateway.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BleScanEvent {
    /// Gateway identifier.
    pub client_id: String,
    /// Canonical form: uppercase, colon-separated hex pairs.
    pub mac_address: String,
    /// Integer dBm.
    pub rssi: i16,
    /// Epoch milliseconds, UTC.
    pub timestamp: i64,
}

/// Uppercases a MAC and checks the six-hex-pairs shape.
pub fn normalize_mac(mac: &str) -> Result<String, StreamError> {
    let parts: Vec<&str> = mac.split(':').collect();
    let valid = parts.len() == 6
        && parts
            .iter()
            .all(|p| p.len() == 2 && p.chars().all(|c| c.is_ascii_hexdigit()));
    if !valid {
        return Err(StreamError::InvalidMac(mac.to_string()));
    }
    Ok(mac.to_ascii_uppercase())
}

/// Parse one wire record; the MAC is normalized to canonical form.
pub fn parse_event(line: &str) -> Result<BleScanEvent, StreamError> {
    let mut event: BleScanEvent =
        serde_json::from_str(line).map_err(|e| StreamError::MalformedEvent(format!("{e}")))?;
    event.mac_address = normalize_mac(&event.mac_address)?;
    if !(-120..=0).contains(&event.rssi) {
        return Err(StreamError::RssiOutOfRange(event.rssi));
    }
    if event.timestamp < 0 {
        return Err(StreamError::MalformedEvent(format!(
            "negative timestamp {}",
            event.timestamp
        )));
    }
    Ok(event)
}

impl BleScanEvent {
    /// Canonical single-line serialization (the wire format).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BeaconType {
    Fixed,
    Mobile,
}

impl BeaconType {
    pub fn name(self) -> &'static str {
        match self {
            BeaconType::Fixed => "fixed",
            BeaconType::Mobile => "mobile",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InventoryBeacon {
    pub beacon_type: BeaconType,
    pub label: String,
    /// Host room, for fixed beacons.
    pub room: Option<String>,
}

/// The static base data set: known beacons, known gateways, known rooms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Inventory {
    pub beacons: BTreeMap<String, InventoryBeacon>,
    pub gateways: BTreeMap<String, String>,
    pub rooms: BTreeSet<String>,
}

impl Inventory {
    /// Parse the `mac_address,type,label,room` CSV; `rooms` is the known
    /// room list (fixed beacons must reference it).
    pub fn from_csv(text: &str, rooms: BTreeSet<String>) -> Result<Inventory, StreamError> {
        let mut beacons = BTreeMap::new();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "mac_address,type,label,room")) => {}
            _ => {
                return Err(StreamError::InventoryParse {
                    line: 1,
                    msg: "header must be mac_address,type,label,room".into(),
                })
            }
        }
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(StreamError::InventoryParse {
                    line: lineno,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let mac = normalize_mac(fields[0]).map_err(|e| StreamError::InventoryParse {
                line: lineno,
                msg: e.to_string(),
            })?;
            let beacon_type = match fields[1] {
                "fixed" => BeaconType::Fixed,
                "mobile" => BeaconType::Mobile,
                other => {
                    return Err(StreamError::InventoryParse {
                        line: lineno,
                        msg: format!("type must be fixed or mobile, got `{other}`"),
                    })
                }
            };
            let room = if fields[3].is_empty() {
                None
            } else {
                Some(fields[3].to_string())
            };
            beacons.insert(
                mac,
                InventoryBeacon {
                    beacon_type,
                    label: fields[2].to_string(),
                    room,
                },
            );
        }
        let inventory = Inventory {
            beacons,
            gateways: BTreeMap::new(),
            rooms,
        };
        inventory.validate()?;
        Ok(inventory)
    }

    fn validate(&self) -> Result<(), StreamError> {
        let mut per_type: BTreeMap<BeaconType, BTreeSet<&str>> = BTreeMap::new();
        for (mac, beacon) in &self.beacons {
            if !per_type
                .entry(beacon.beacon_type)
                .or_default()
                .insert(beacon.label.as_str())
            {
                return Err(StreamError::InventoryInvalid(format!(
                    "duplicate {} label {}",
                    beacon.beacon_type.name(),
                    beacon.label
                )));
            }
            match beacon.beacon_type {
                BeaconType::Fixed => match &beacon.room {
                    Some(room) if self.rooms.contains(room) => {}
                    Some(room) => {
                        return Err(StreamError::InventoryInvalid(format!(
                            "fixed beacon {mac} references unknown room {room}"
                        )))
                    }
                    None => {
                        return Err(StreamError::InventoryInvalid(format!(
                            "fixed beacon {mac} has no room"
                        )))
                    }
                },
                BeaconType::Mobile => {}
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mac_address,type,label,room\n");
        for (mac, beacon) in &self.beacons {
            out.push_str(&format!(
                "{},{},{},{}\n",
                mac,
                beacon.beacon_type.name(),
                beacon.label,
                beacon.room.as_deref().unwrap_or("")
            ));
        }
        out
    }

    /// Mobile-beacon labels (the tracked assets).
    pub fn asset_labels(&self) -> BTreeSet<String> {
        self.beacons
            .values()
            .filter(|b| b.beacon_type == BeaconType::Mobile)
            .map(|b| b.label.clone())
            .collect()
    }
}

/// A scan event joined with its inventory entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedEvent {
    pub event: BleScanEvent,
    pub beacon_type: BeaconType,
    pub label: String,
}

/// Inventory join; `None` means the beacon is not inventoried and the event
/// is filtered out (callers count the drop).
pub fn enrich(event: BleScanEvent, inventory: &Inventory) -> Option<EnrichedEvent> {
    inventory
        .beacons
        .get(&event.mac_address)
        .map(|info| EnrichedEvent {
            beacon_type: info.beacon_type,
            label: info.label.clone(),
            event,
        })
}

/// Aggregated view of one gateway over one tumbling window: the median RSSI
/// per beacon.
#[derive(Debug, Clone, PartialEq)]
pub struct GatewayScanSnapshot {
    pub client_id: String,
    pub window_index: i64,
    /// End of the window, epoch ms.
    pub window_end: i64,
    /// Beacon label → (type, median RSSI within the window).
    pub beacons: BTreeMap<String, (BeaconType, f64)>,
}

impl GatewayScanSnapshot {
    pub fn fixed_scan(&self) -> BTreeMap<String, f64> {
        self.beacons
            .iter()
            .filter(|(_, (t, _))| *t == BeaconType::Fixed)
            .map(|(l, (_, rssi))| (l.clone(), *rssi))
            .collect()
    }

    pub fn mobile_scan(&self) -> BTreeMap<String, f64> {
        self.beacons
            .iter()
            .filter(|(_, (t, _))| *t == BeaconType::Mobile)
            .map(|(l, (_, rssi))| (l.clone(), *rssi))
            .collect()
    }
}

fn median(values: &mut [i16]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        f64::from(values[n / 2])
    } else {
        (f64::from(values[n / 2 - 1]) + f64::from(values[n / 2])) / 2.0
    }
}

/// Tumbling-window aggregation keyed by `(client_id, window index)`.
///
/// Within-window disorder is harmless (the median is order-free); an event
/// more than one full window behind the gateway's newest window is dropped
/// and counted. Returns snapshots sorted by `(window_index, client_id)`.
pub fn window_aggregate(
    events: impl IntoIterator<Item = EnrichedEvent>,
    window_s: u64,
) -> (Vec<GatewayScanSnapshot>, usize) {
    assert!(window_s >= 1, "window must be at least 1 s");
    let window_ms = window_s as i64 * 1000;
    let mut watermark: HashMap<String, i64> = HashMap::new();
    let mut late_dropped = 0usize;
    type Key = (String, i64);
    let mut buckets: BTreeMap<Key, BTreeMap<String, (BeaconType, Vec<i16>)>> = BTreeMap::new();
    for enriched in events {
        let idx = enriched.event.timestamp.div_euclid(window_ms);
        let newest = watermark
            .entry(enriched.event.client_id.clone())
            .or_insert(idx);
        if idx > *newest {
            *newest = idx;
        }
        if idx < *newest - 1 {
            late_dropped += 1;
            continue;
        }
        let key = (enriched.event.client_id.clone(), idx);
        let slot = buckets
            .entry(key)
            .or_default()
            .entry(enriched.label)
            .or_insert_with(|| (enriched.beacon_type, Vec::new()));
        slot.1.push(enriched.event.rssi);
    }
    let mut snapshots: Vec<GatewayScanSnapshot> = buckets
        .into_iter()
        .map(|((client_id, window_index), beacons)| GatewayScanSnapshot {
            client_id,
            window_index,
            window_end: (window_index + 1) * window_ms,
            beacons: beacons
                .into_iter()
                .map(|(label, (t, mut values))| (label, (t, median(&mut values))))
                .collect(),
        })
        .collect();
    snapshots.sort_by(|a, b| {
        a.window_index
            .cmp(&b.window_index)
            .then_with(|| a.client_id.cmp(&b.client_id))
    });
    (snapshots, late_dropped)
}

/// The localizer a snapshot is resolved with.
pub enum Localizer<'a> {
    Knn(&'a KnnModel),
    Multilat {
        plan: &'a FloorPlan,
        params: PathLossParams,
        resolution: f64,
    },
}

/// Resolve the gateway's room from a snapshot's fixed-beacon medians.
///
/// For kNN the RSSI vector covers the model columns with −200 for beacons
/// missing from the window; for multilateration missing beacons are simply
/// omitted from the scan.
pub fn locate_gateway(
    snapshot: &GatewayScanSnapshot,
    localizer: &Localizer<'_>,
) -> Result<String, StreamError> {
    let fixed = snapshot.fixed_scan();
    if fixed.is_empty() {
        return Err(StreamError::NoFix);
    }
    match localizer {
        Localizer::Knn(model) => {
            let query: Vec<f64> = model
                .columns()
                .iter()
                .map(|c| fixed.get(c).copied().unwrap_or(SENTINEL_RSSI))
                .collect();
            Ok(model.predict(&query)?.to_string())
        }
        Localizer::Multilat {
            plan,
            params,
            resolution,
        } => {
            let prediction = multilat::predict_room_at(&fixed, plan, params, *resolution)?;
            Ok(prediction.room)
        }
    }
}

/// Freshest known whereabouts of one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetLocation {
    pub asset: String,
    pub room: String,
    /// Epoch ms of the observation window end.
    pub last_seen: i64,
    pub observed_by: String,
    pub rssi_at_observation: f64,
}

/// Single-writer store keyed by asset; `last_seen` never decreases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocationStore {
    records: BTreeMap<String, AssetLocation>,
}

impl LocationStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Apply an update unless it is older than the stored record.
    pub fn apply(&mut self, update: AssetLocation) -> bool {
        match self.records.get(&update.asset) {
            Some(existing) if update.last_seen < existing.last_seen => false,
            _ => {
                self.records.insert(update.asset.clone(), update);
                true
            }
        }
    }

    pub fn get(&self, asset: &str) -> Option<&AssetLocation> {
        self.records.get(asset)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AssetLocation> {
        self.records.values()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("asset,room,last_seen,observed_by,rssi\n");
        for record in self.records.values() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                record.asset,
                record.room,
                record.last_seen,
                record.observed_by,
                record.rssi_at_observation
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<LocationStore, StreamError> {
        let mut store = LocationStore::new();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "asset,room,last_seen,observed_by,rssi")) => {}
            _ => {
                return Err(StreamError::StoreParse {
                    line: 1,
                    msg: "header must be asset,room,last_seen,observed_by,rssi".into(),
                })
            }
        }
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(StreamError::StoreParse {
                    line: lineno,
                    msg: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let parse_err = |msg: String| StreamError::StoreParse { line: lineno, msg };
            store.apply(AssetLocation {
                asset: fields[0].to_string(),
                room: fields[1].to_string(),
                last_seen: fields[2]
                    .parse()
                    .map_err(|e| parse_err(format!("bad last_seen: {e}")))?,
                observed_by: fields[3].to_string(),
                rssi_at_observation: fields[4]
                    .parse()
                    .map_err(|e| parse_err(format!("bad rssi: {e}")))?,
            });
        }
        Ok(store)
    }
}

/// Assign every sufficiently-loud mobile beacon in the snapshot to the
/// gateway's resolved room; returns the updates the store accepted.
pub fn assign_assets(
    snapshot: &GatewayScanSnapshot,
    gateway_room: &str,
    proximity_threshold_dbm: f64,
    store: &mut LocationStore,
) -> Vec<AssetLocation> {
    let mut applied = Vec::new();
    for (label, median_rssi) in snapshot.mobile_scan() {
        if median_rssi < proximity_threshold_dbm {
            continue;
        }
        let update = AssetLocation {
            asset: label,
            room: gateway_room.to_string(),
            last_seen: snapshot.window_end,
            observed_by: snapshot.client_id.clone(),
            rssi_at_observation: median_rssi,
        };
        if store.apply(update.clone()) {
            applied.push(update);
        }
    }
    applied
}

/// How fresh a queried location is.
#[derive(Debug, Clone, PartialEq)]
pub enum AssetStatus {
    Located {
        location: AssetLocation,
        staleness_s: f64,
    },
    /// Inventoried but no sighting was ever recorded; absence is a result,
    /// not an error.
    NeverSeen,
}

/// Look up an inventoried asset; unknown labels are an error.
pub fn query_location(
    store: &LocationStore,
    inventory: &Inventory,
    asset: &str,
    now_ms: i64,
) -> Result<AssetStatus, StreamError> {
    if !inventory.asset_labels().contains(asset) {
        return Err(StreamError::UnknownAsset(asset.to_string()));
    }
    Ok(match store.get(asset) {
        Some(location) => AssetStatus::Located {
            location: location.clone(),
            staleness_s: (now_ms - location.last_seen) as f64 / 1000.0,
        },
        None => AssetStatus::NeverSeen,
    })
}

/// Replay counters; `parsed` covers every input record, so
/// `parsed == enriched + filtered + malformed` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplayCounters {
    pub parsed: usize,
    pub malformed: usize,
    pub enriched: usize,
    pub filtered: usize,
    pub late_dropped: usize,
    pub windows: usize,
    pub no_fix_windows: usize,
}

/// One localized window, for ground-truth comparison and reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFix {
    pub client_id: String,
    pub window_end: i64,
    pub room: String,
}

#[derive(Debug)]
pub struct ReplayOutcome {
    pub store: LocationStore,
    pub counters: ReplayCounters,
    pub fixes: Vec<WindowFix>,
}

/// Replay an event file end to end: parse → enrich → window → localize →
/// assign. Deterministic for identical inputs and configuration. Fails only
/// on configuration mismatches (e.g. the inventory naming a fixed beacon
/// the localizer's plan does not know).
pub fn replay(
    event_lines: &str,
    inventory: &Inventory,
    localizer: &Localizer<'_>,
    window_s: u64,
    assign_threshold_dbm: f64,
) -> Result<ReplayOutcome, StreamError> {
    let mut counters = ReplayCounters::default();
    let mut enriched_events = Vec::new();
    for line in event_lines.lines() {
        if line.is_empty() {
            continue;
        }
        counters.parsed += 1;
        match parse_event(line) {
            Ok(event) => match enrich(event, inventory) {
                Some(enriched) => {
                    counters.enriched += 1;
                    enriched_events.push(enriched);
                }
                None => counters.filtered += 1,
            },
            Err(_) => counters.malformed += 1,
        }
    }
    let (snapshots, late_dropped) = window_aggregate(enriched_events, window_s);
    counters.late_dropped = late_dropped;
    counters.windows = snapshots.len();

    let mut store = LocationStore::new();
    let mut fixes = Vec::new();
    for snapshot in &snapshots {
        match locate_gateway(snapshot, localizer) {
            Ok(room) => {
                assign_assets(snapshot, &room, assign_threshold_dbm, &mut store);
                fixes.push(WindowFix {
                    client_id: snapshot.client_id.clone(),
                    window_end: snapshot.window_end,
                    room,
                });
            }
            Err(StreamError::NoFix) => counters.no_fix_windows += 1,
            Err(other) => return Err(other),
        }
    }
    Ok(ReplayOutcome {
        store,
        counters,
        fixes,
    })
}
