//! Floor plans: rectilinear rooms with fixed-beacon placements.
//!
//! Plan file format (human editable, one plan per file):
//!
//! ```text
//! # comment
//! plan office
//! bounds 0 0 30 13
//!
//! room A
//! vertices 0,8 6,8 6,13 0,13
//! beacon A 3,10.5
//! ```
//!
//! `vertices` lists the polygon counterclockwise without repeating the first
//! point; edges must be axis-aligned. `beacon` lines are optional and may
//! repeat (the hallway hosts several); the label defaults to the room label
//! when omitted.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use super::Point;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("failed to read plan file: {0}")]
    Io(#[from] std::io::Error),
    #[error("plan parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid floor plan: {0}")]
    Validation(String),
}

/// Axis-aligned bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.distance(self.max)
    }
}

/// A fixed beacon mounted inside a room.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedBeacon {
    pub label: String,
    pub position: Point,
}

/// A room: closed, simple, axis-aligned polygon plus its fixed beacons.
///
/// Most rooms carry exactly one beacon labeled like the room; hallways may
/// carry several (E1..E6 in the office fixture) or none at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub label: String,
    /// Counterclockwise vertex list; the closing edge back to the first
    /// vertex is implicit.
    pub polygon: Vec<Point>,
    pub beacons: Vec<FixedBeacon>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl Room {
    /// Signed polygon area (shoelace); positive for counterclockwise order.
    pub fn signed_area(&self) -> f64 {
        let n = self.polygon.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        acc / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub(crate) fn containment(&self, p: Point) -> Containment {
        let n = self.polygon.len();
        // Boundary first: axis-aligned edges allow exact tests.
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            if a.x == b.x {
                let (lo, hi) = minmax(a.y, b.y);
                if p.x == a.x && p.y >= lo && p.y <= hi {
                    return Containment::Boundary;
                }
            } else {
                let (lo, hi) = minmax(a.x, b.x);
                if p.y == a.y && p.x >= lo && p.x <= hi {
                    return Containment::Boundary;
                }
            }
        }
        // Crossing count specialized to rectilinear polygons: a ray toward
        // +x properly crosses only vertical edges; the half-open rule on y
        // keeps shared vertices from double counting.
        let mut crossings = 0usize;
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            if a.x != b.x {
                continue;
            }
            let (lo, hi) = minmax(a.y, b.y);
            if p.y >= lo && p.y < hi && a.x > p.x {
                crossings += 1;
            }
        }
        if crossings % 2 == 1 {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.containment(p) != Containment::Outside
    }

    /// A point strictly inside the polygon, for disjointness checks.
    fn interior_point(&self) -> Point {
        let mut ys: Vec<f64> = self.polygon.iter().map(|p| p.y).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.dedup();
        let y = (ys[0] + ys[1]) / 2.0;
        // Horizontal slab at y: collect vertical-edge crossings, take the
        // midpoint of the first spanned interval.
        let mut xs: Vec<f64> = Vec::new();
        let n = self.polygon.len();
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            if a.x == b.x {
                let (lo, hi) = minmax(a.y, b.y);
                if y > lo && y < hi {
                    xs.push(a.x);
                }
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Point::new((xs[0] + xs[1]) / 2.0, y)
    }
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A validated floor plan: disjoint room interiors, uniquely labeled
/// beacons, everything inside the bounding rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlan {
    pub name: String,
    pub bounds: Rect,
    pub rooms: Vec<Room>,
}

impl FloorPlan {
    /// Load and validate a plan file.
    pub fn load(path: impl AsRef<Path>) -> Result<FloorPlan, PlanError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse and validate plan text.
    pub fn parse(text: &str) -> Result<FloorPlan, PlanError> {
        let mut name: Option<String> = None;
        let mut bounds: Option<Rect> = None;
        let mut rooms: Vec<Room> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| PlanError::Parse { line: lineno, msg };
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap();
            match keyword {
                "plan" => {
                    let n = tokens.next().ok_or_else(|| err("missing plan name".into()))?;
                    name = Some(n.to_string());
                }
                "bounds" => {
                    let vals: Vec<f64> = tokens
                        .map(|t| t.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(format!("bad bounds value: {e}")))?;
                    if vals.len() != 4 {
                        return Err(err("bounds needs 4 values: minx miny maxx maxy".into()));
                    }
                    if vals.iter().any(|v| !v.is_finite()) || vals[2] <= vals[0] || vals[3] <= vals[1]
                    {
                        return Err(err("bounds must be a finite, non-empty rectangle".into()));
                    }
                    bounds = Some(Rect {
                        min: Point::new(vals[0], vals[1]),
                        max: Point::new(vals[2], vals[3]),
                    });
                }
                "room" => {
                    let label = tokens.next().ok_or_else(|| err("missing room label".into()))?;
                    rooms.push(Room {
                        label: label.to_string(),
                        polygon: Vec::new(),
                        beacons: Vec::new(),
                    });
                }
                "vertices" => {
                    let room = rooms
                        .last_mut()
                        .ok_or_else(|| err("vertices before any room".into()))?;
                    if !room.polygon.is_empty() {
                        return Err(err(format!("room {} already has vertices", room.label)));
                    }
                    for tok in tokens {
                        room.polygon.push(parse_point(tok).map_err(&err)?);
                    }
                }
                "beacon" => {
                    let room = rooms
                        .last_mut()
                        .ok_or_else(|| err("beacon before any room".into()))?;
                    let rest: Vec<&str> = tokens.collect();
                    let (label, point_tok) = match rest.len() {
                        1 => (room.label.clone(), rest[0]),
                        2 => (rest[0].to_string(), rest[1]),
                        _ => return Err(err("beacon takes [label] x,y".into())),
                    };
                    let position = parse_point(point_tok).map_err(&err)?;
                    room.beacons.push(FixedBeacon { label, position });
                }
                other => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }

        let plan = FloorPlan {
            name: name.ok_or(PlanError::Parse {
                line: 0,
                msg: "missing `plan` line".into(),
            })?,
            bounds: bounds.ok_or(PlanError::Parse {
                line: 0,
                msg: "missing `bounds` line".into(),
            })?,
            rooms,
        };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<(), PlanError> {
        let fail = |msg: String| Err(PlanError::Validation(msg));
        if self.rooms.is_empty() {
            return fail("plan has no rooms".into());
        }
        let mut room_labels = BTreeSet::new();
        let mut beacon_labels = BTreeSet::new();
        for room in &self.rooms {
            if !room_labels.insert(room.label.clone()) {
                return fail(format!("duplicate room label {}", room.label));
            }
            if room.polygon.len() < 4 {
                return fail(format!("room {} needs at least 4 vertices", room.label));
            }
            let n = room.polygon.len();
            for i in 0..n {
                let a = room.polygon[i];
                let b = room.polygon[(i + 1) % n];
                if !(a.x.is_finite() && a.y.is_finite()) {
                    return fail(format!("room {} has non-finite vertex", room.label));
                }
                let axis_aligned = (a.x == b.x) ^ (a.y == b.y);
                if !axis_aligned {
                    return fail(format!(
                        "room {} edge {:?}->{:?} is not axis-aligned",
                        room.label, a, b
                    ));
                }
                if !self.bounds.contains(a) {
                    return fail(format!("room {} vertex {:?} outside bounds", room.label, a));
                }
            }
            if room.signed_area() <= 0.0 {
                return fail(format!(
                    "room {} polygon must be counterclockwise",
                    room.label
                ));
            }
            if !polygon_is_simple(&room.polygon) {
                return fail(format!("room {} polygon self-intersects", room.label));
            }
            for beacon in &room.beacons {
                if !beacon_labels.insert(beacon.label.clone()) {
                    return fail(format!("duplicate beacon label {}", beacon.label));
                }
                if room.containment(beacon.position) != Containment::Inside {
                    return fail(format!(
                        "beacon {} at {:?} is not inside room {}",
                        beacon.label, beacon.position, room.label
                    ));
                }
            }
        }
        for i in 0..self.rooms.len() {
            for j in (i + 1)..self.rooms.len() {
                if rooms_overlap(&self.rooms[i], &self.rooms[j]) {
                    return fail(format!(
                        "rooms {} and {} overlap",
                        self.rooms[i].label, self.rooms[j].label
                    ));
                }
            }
        }
        Ok(())
    }

    /// Label of the room containing `p`, or `None` outside all rooms.
    /// Boundary points resolve to the first containing room in plan order.
    pub fn point_room(&self, p: Point) -> Option<&str> {
        self.rooms
            .iter()
            .find(|r| r.containment(p) != Containment::Outside)
            .map(|r| r.label.as_str())
    }

    pub fn room(&self, label: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.label == label)
    }

    /// All fixed beacons with their host room label, in plan order.
    pub fn beacons(&self) -> impl Iterator<Item = (&FixedBeacon, &str)> {
        self.rooms
            .iter()
            .flat_map(|r| r.beacons.iter().map(move |b| (b, r.label.as_str())))
    }

    /// Beacon labels sorted lexicographically (the canonical column order).
    pub fn beacon_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.beacons().map(|(b, _)| b.label.clone()).collect();
        labels.sort();
        labels
    }

    pub fn beacon_position(&self, label: &str) -> Option<Point> {
        self.beacons()
            .find(|(b, _)| b.label == label)
            .map(|(b, _)| b.position)
    }

    /// Room hosting the given fixed beacon.
    pub fn beacon_room(&self, label: &str) -> Option<&str> {
        self.beacons().find(|(b, _)| b.label == label).map(|(_, r)| r)
    }

    pub fn room_labels(&self) -> Vec<String> {
        self.rooms.iter().map(|r| r.label.clone()).collect()
    }
}

impl fmt::Display for FloorPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} rooms, {} beacons)",
            self.name,
            self.rooms.len(),
            self.beacons().count()
        )
    }
}

fn parse_point(tok: &str) -> Result<Point, String> {
    let (xs, ys) = tok
        .split_once(',')
        .ok_or_else(|| format!("expected x,y pair, got `{tok}`"))?;
    let x: f64 = xs.parse().map_err(|e| format!("bad x in `{tok}`: {e}"))?;
    let y: f64 = ys.parse().map_err(|e| format!("bad y in `{tok}`: {e}"))?;
    if !x.is_finite() || !y.is_finite() {
        return Err(format!("non-finite coordinate in `{tok}`"));
    }
    Ok(Point::new(x, y))
}

struct Edge {
    a: Point,
    b: Point,
}

fn edges(polygon: &[Point]) -> Vec<Edge> {
    let n = polygon.len();
    (0..n)
        .map(|i| Edge {
            a: polygon[i],
            b: polygon[(i + 1) % n],
        })
        .collect()
}

/// Strict interior crossing of two axis-aligned segments.
fn edges_cross(e1: &Edge, e2: &Edge) -> bool {
    let v1 = e1.a.x == e1.b.x;
    let v2 = e2.a.x == e2.b.x;
    if v1 == v2 {
        return false; // parallel; collinear overlap handled separately
    }
    let (v, h) = if v1 { (e1, e2) } else { (e2, e1) };
    let (vy_lo, vy_hi) = minmax(v.a.y, v.b.y);
    let (hx_lo, hx_hi) = minmax(h.a.x, h.b.x);
    v.a.x > hx_lo && v.a.x < hx_hi && h.a.y > vy_lo && h.a.y < vy_hi
}

/// Collinear overlap of positive length between two parallel segments.
fn edges_overlap(e1: &Edge, e2: &Edge) -> bool {
    let v1 = e1.a.x == e1.b.x;
    let v2 = e2.a.x == e2.b.x;
    if v1 != v2 {
        return false;
    }
    if v1 {
        if e1.a.x != e2.a.x {
            return false;
        }
        let (lo1, hi1) = minmax(e1.a.y, e1.b.y);
        let (lo2, hi2) = minmax(e2.a.y, e2.b.y);
        lo1.max(lo2) < hi1.min(hi2)
    } else {
        if e1.a.y != e2.a.y {
            return false;
        }
        let (lo1, hi1) = minmax(e1.a.x, e1.b.x);
        let (lo2, hi2) = minmax(e2.a.x, e2.b.x);
        lo1.max(lo2) < hi1.min(hi2)
    }
}

fn polygon_is_simple(polygon: &[Point]) -> bool {
    let es = edges(polygon);
    let n = es.len();
    for i in 0..n {
        if es[i].a == es[i].b {
            return false; // zero-length edge
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if edges_cross(&es[i], &es[j]) {
                return false;
            }
            if !adjacent && edges_overlap(&es[i], &es[j]) {
                return false;
            }
        }
    }
    true
}

/// Interiors overlap: a proper edge crossing, a vertex strictly inside the
/// other polygon, or full containment (caught by interior points). Shared
/// walls are fine.
fn rooms_overlap(a: &Room, b: &Room) -> bool {
    for ea in edges(&a.polygon) {
        for eb in edges(&b.polygon) {
            if edges_cross(&ea, &eb) {
                return true;
            }
        }
    }
    if a.polygon.iter().any(|&p| b.containment(p) == Containment::Inside) {
        return true;
    }
    if b.polygon.iter().any(|&p| a.containment(p) == Containment::Inside) {
        return true;
    }
    b.containment(a.interior_point()) == Containment::Inside
        || a.containment(b.interior_point()) == Containment::Inside
}

/// Bundled plan fixtures.
pub mod fixtures {
    use super::FloorPlan;

    pub const OFFICE_PLAN: &str = include_str!("../../fixtures/office.plan");
    pub const APARTMENT_PLAN: &str = include_str!("../../fixtures/apartment.plan");

    /// Office: 11 rooms, 16 fixed beacons (six along the hallway E).
    pub fn office() -> FloorPlan {
        FloorPlan::parse(OFFICE_PLAN).expect("bundled office plan is valid")
    }

    /// Apartment: 5 rooms, one beacon per room.
    pub fn apartment() -> FloorPlan {
        FloorPlan::parse(APARTMENT_PLAN).expect("bundled apartment plan is valid")
    }
}
