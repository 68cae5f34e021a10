//! Rasterized circle-intersection regions.
//!
//! The plane is cut into square cells of side `resolution` anchored at the
//! origin; a cell belongs to a region when its center lies inside every
//! member circle. Regions are keyed by the distinct covering set, so the
//! cells of all regions partition exactly the cells covered by two or more
//! circles.

use std::collections::{BTreeMap, HashMap};

use super::{Circle, FloorPlan, Point};

/// Reserved coverage label for cells outside every room.
pub const OUTSIDE_LABEL: &str = "∅";

/// A grid cell; `ix`/`iy` index the origin-anchored grid, so the cell spans
/// `[ix·res, (ix+1)·res) × [iy·res, (iy+1)·res)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridCell {
    pub ix: i64,
    pub iy: i64,
}

impl GridCell {
    pub fn center(&self, resolution: f64) -> Point {
        Point::new(
            (self.ix as f64 + 0.5) * resolution,
            (self.iy as f64 + 0.5) * resolution,
        )
    }
}

/// An area jointly covered by a distinct set of two or more beacon circles.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionRegion {
    /// The intersection set: labels of the circles covering every cell.
    pub members: Vec<String>,
    /// Size of the intersection set.
    pub cardinality: usize,
    /// Sum of the member circles' radii, in meters.
    pub radii_sum: f64,
    /// Cells covered, sorted.
    pub cells: Vec<GridCell>,
    /// Cell side length used for rasterization, in meters.
    pub resolution: f64,
}

impl IntersectionRegion {
    pub fn area(&self) -> f64 {
        self.cells.len() as f64 * self.resolution * self.resolution
    }
}

/// Rasterizes the circles' bounding box and groups cells by their exact
/// covering set, returning one region per distinct set of size ≥ 2.
///
/// Returns an empty list when no two circles overlap. Supports up to 128
/// circles per call (a scan sees at most one circle per fixed beacon).
pub fn find_intersection_regions(circles: &[Circle], resolution: f64) -> Vec<IntersectionRegion> {
    assert!(resolution > 0.0, "resolution must be positive");
    assert!(circles.len() <= 128, "at most 128 circles per rasterization");
    if circles.len() < 2 {
        return Vec::new();
    }

    let min_x = circles.iter().map(|c| c.center.x - c.radius).fold(f64::INFINITY, f64::min);
    let max_x = circles.iter().map(|c| c.center.x + c.radius).fold(f64::NEG_INFINITY, f64::max);
    let min_y = circles.iter().map(|c| c.center.y - c.radius).fold(f64::INFINITY, f64::min);
    let max_y = circles.iter().map(|c| c.center.y + c.radius).fold(f64::NEG_INFINITY, f64::max);

    let ix_lo = (min_x / resolution).floor() as i64;
    let ix_hi = (max_x / resolution).floor() as i64;
    let iy_lo = (min_y / resolution).floor() as i64;
    let iy_hi = (max_y / resolution).floor() as i64;

    let mut grouped: HashMap<u128, Vec<GridCell>> = HashMap::new();
    for iy in iy_lo..=iy_hi {
        for ix in ix_lo..=ix_hi {
            let cell = GridCell { ix, iy };
            let center = cell.center(resolution);
            let mut mask: u128 = 0;
            for (i, circle) in circles.iter().enumerate() {
                if circle.contains(center) {
                    mask |= 1 << i;
                }
            }
            if mask.count_ones() >= 2 {
                grouped.entry(mask).or_default().push(cell);
            }
        }
    }

    let mut regions: Vec<IntersectionRegion> = grouped
        .into_iter()
        .map(|(mask, mut cells)| {
            cells.sort();
            let members: Vec<String> = circles
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| c.beacon_id.clone())
                .collect();
            let radii_sum = circles
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| c.radius)
                .sum();
            IntersectionRegion {
                cardinality: members.len(),
                members,
                radii_sum,
                cells,
                resolution,
            }
        })
        .collect();
    regions.sort_by(|a, b| a.members.cmp(&b.members));
    regions
}

/// Per-room coverage of a region, as exact cell counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomCoverage {
    /// Cell count per room label; [`OUTSIDE_LABEL`] collects cells outside
    /// every room.
    pub counts: BTreeMap<String, usize>,
    pub resolution: f64,
}

impl RoomCoverage {
    /// Coverage in m² per label.
    pub fn areas(&self) -> BTreeMap<String, f64> {
        let cell_area = self.resolution * self.resolution;
        self.counts
            .iter()
            .map(|(label, &n)| (label.clone(), n as f64 * cell_area))
            .collect()
    }

    pub fn total_cells(&self) -> usize {
        self.counts.values().sum()
    }

    /// Room with the largest coverage, ignoring the outside label.
    /// Ties resolve to the lexicographically smaller room label.
    pub fn argmax_room(&self) -> Option<&str> {
        self.counts
            .iter()
            .filter(|(label, _)| label.as_str() != OUTSIDE_LABEL)
            .max_by(|(la, ca), (lb, cb)| ca.cmp(cb).then(lb.cmp(la)))
            .map(|(label, _)| label.as_str())
    }
}

/// Overlays a region on the floor plan and sums covered cells per room.
pub fn region_room_coverage(region: &IntersectionRegion, plan: &FloorPlan) -> RoomCoverage {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for cell in &region.cells {
        let label = plan
            .point_room(cell.center(region.resolution))
            .unwrap_or(OUTSIDE_LABEL);
        *counts.entry(label.to_string()).or_insert(0) += 1;
    }
    RoomCoverage {
        counts,
        resolution: region.resolution,
    }
}
