//! Planar geometry: points, beacon range circles, rectilinear floor plans,
//! and rasterized circle-intersection regions.
//!
//! Beacons are ceiling mounted but modeled in 2D; all coordinates are in
//! meters. Intersection regions are represented on a uniform grid (default
//! cell size [`DEFAULT_RESOLUTION`]) rather than as exact arc polygons: the
//! localizer only needs the room with the largest coverage, and the analytic
//! pair formula plus a Monte-Carlo oracle bound the rasterization error.

mod plan;
mod regions;

pub use plan::{fixtures, FixedBeacon, FloorPlan, PlanError, Rect, Room};
pub use regions::{
    find_intersection_regions, region_room_coverage, GridCell, IntersectionRegion, RoomCoverage,
    OUTSIDE_LABEL,
};

/// Default raster cell size in meters.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

/// A point in the floor plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite());
        Point { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// A beacon's estimated range: the circle is centered at the beacon position
/// and its radius is the distance estimated from the received signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
    pub beacon_id: String,
}

impl Circle {
    /// Radius must be strictly positive.
    pub fn new(beacon_id: impl Into<String>, center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "circle radius must be positive");
        Circle {
            center,
            radius,
            beacon_id: beacon_id.into(),
        }
    }

    /// Closed-disk containment.
    pub fn contains(&self, p: Point) -> bool {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// Exact area of the intersection of two circles (the "lens"), in m².
///
/// Returns 0 for disjoint circles and the smaller circle's area when one
/// contains the other.
pub fn circle_pair_intersection_area(a: &Circle, b: &Circle) -> f64 {
    let d = a.center.distance(b.center);
    let (r1, r2) = (a.radius, b.radius);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return std::f64::consts::PI * r * r;
    }
    let part1 = r1 * r1 * (((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos());
    let part2 = r2 * r2 * (((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos());
    let part3 = 0.5
        * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
            .max(0.0)
            .sqrt();
    part1 + part2 - part3
}
