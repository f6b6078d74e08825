use std::collections::VecDeque;

use glam::{DVec2, DVec3};

use super::{AgentProfile, BakeError, BakeParams};
use crate::ingest::{mesh_bounds, TriangleMesh};

/// Column cap for [`voxelize`].
pub const DEFAULT_MAX_COLUMNS: usize = 16 * 1024 * 1024;

const SNAP_EPS: f64 = 1e-9;

/// A solid vertical interval inside one column, in cell-height units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub y_min: i32,
    pub y_max: i32,
    pub walkable: bool,
    pub region_id: Option<u32>,
    /// Steepest non-vertical triangle forming the top face. Vertical
    /// triangles add solid but never a walkable face.
    pub top_triangle: Option<u32>,
    pub(crate) top_slope_deg: f64,
}

#[derive(Debug, Clone)]
pub struct Heightfield {
    pub origin: DVec3,
    pub cell_size: f64,
    pub cell_height: f64,
    pub width: usize,
    pub depth: usize,
    /// Row-major over (x, z): index `z * width + x`. Spans sorted ascending.
    pub columns: Vec<Vec<Span>>,
    pub params: BakeParams,
    pub agent: Option<AgentProfile>,
    pub source_hash: String,
}

impl Heightfield {
    #[inline]
    pub fn column(&self, x: usize, z: usize) -> &[Span] {
        &self.columns[z * self.width + x]
    }

    /// World height of a span top.
    pub fn top_height(&self, span: &Span) -> f64 {
        self.origin.y + span.y_max as f64 * self.cell_height
    }

    pub fn walkable_count(&self) -> usize {
        self.columns.iter().flatten().filter(|s| s.walkable).count()
    }

    pub fn region_cell_count(&self) -> usize {
        self.columns.iter().flatten().filter(|s| s.region_id.is_some()).count()
    }

    pub fn region_count(&self) -> usize {
        self.columns
            .iter()
            .flatten()
            .filter_map(|s| s.region_id)
            .max()
            .map_or(0, |m| m as usize + 1)
    }

    pub(crate) fn step_cells(&self) -> i32 {
        let step = self.agent.map_or(0.0, |a| a.max_step_height);
        (step / self.cell_height + SNAP_EPS).floor() as i32
    }

    /// Walkable span in column (x, z) whose top is within the step limit of
    /// `top`, preferring the closest top.
    fn connected_span(&self, x: isize, z: isize, top: i32, step: i32) -> Option<usize> {
        if x < 0 || z < 0 || x as usize >= self.width || z as usize >= self.depth {
            return None;
        }
        let col = self.column(x as usize, z as usize);
        let mut best: Option<(i32, usize)> = None;
        for (i, s) in col.iter().enumerate() {
            if !s.walkable {
                continue;
            }
            let diff = (s.y_max - top).abs();
            if diff <= step && best.is_none_or(|(d, _)| diff < d) {
                best = Some((diff, i));
            }
        }
        best.map(|(_, i)| i)
    }
}

fn slope_deg(n: DVec3) -> f64 {
    let len = n.length();
    if len == 0.0 {
        return 90.0;
    }
    (n.y.abs() / len).clamp(0.0, 1.0).acos().to_degrees()
}

/// Sutherland–Hodgman clip of a polygon against one axis-aligned half-plane.
fn clip(poly: &[DVec3], axis: usize, bound: f64, keep_greater: bool) -> Vec<DVec3> {
    let inside = |p: &DVec3| {
        let v = if axis == 0 { p.x } else { p.z };
        if keep_greater { v >= bound } else { v <= bound }
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let (va, vb) = if axis == 0 { (a.x, b.x) } else { (a.z, b.z) };
            let t = (bound - va) / (vb - va);
            let mut p = a + (b - a) * t;
            if axis == 0 {
                p.x = bound;
            } else {
                p.z = bound;
            }
            out.push(p);
        }
    }
    out
}

fn projected_area(poly: &[DVec3]) -> f64 {
    let pts: Vec<DVec2> = poly.iter().map(|p| DVec2::new(p.x, p.z)).collect();
    crate::geom::signed_area(&pts).abs()
}

fn add_span(column: &mut Vec<Span>, mut span: Span) {
    let mut i = 0;
    while i < column.len() {
        let s = column[i];
        if s.y_max < span.y_min {
            i += 1;
            continue;
        }
        if s.y_min > span.y_max {
            break;
        }
        // overlapping: absorb
        let (top, slope) = if s.y_max > span.y_max {
            (s.top_triangle, s.top_slope_deg)
        } else if s.y_max < span.y_max {
            (span.top_triangle, span.top_slope_deg)
        } else {
            match (s.top_triangle, span.top_triangle) {
                (None, t) => (t, span.top_slope_deg),
                (t, None) => (t, s.top_slope_deg),
                (Some(a), Some(b)) => {
                    if span.top_slope_deg > s.top_slope_deg
                        || (span.top_slope_deg == s.top_slope_deg && b < a)
                    {
                        (Some(b), span.top_slope_deg)
                    } else {
                        (Some(a), s.top_slope_deg)
                    }
                }
            }
        };
        span.y_min = span.y_min.min(s.y_min);
        span.y_max = span.y_max.max(s.y_max);
        span.top_triangle = top;
        span.top_slope_deg = slope;
        column.remove(i);
    }
    column.insert(i, span);
}

pub fn voxelize(mesh: &TriangleMesh, params: &BakeParams) -> Result<Heightfield, BakeError> {
    voxelize_capped(mesh, params, DEFAULT_MAX_COLUMNS)
}

/// Rasterizes every triangle into the columns it overlaps.
pub fn voxelize_capped(
    mesh: &TriangleMesh,
    params: &BakeParams,
    max_columns: usize,
) -> Result<Heightfield, BakeError> {
    params.validate()?;
    let bounds = mesh_bounds(mesh)?;
    let cs = params.cell_size;
    let ch = params.cell_height;
    let extent = bounds.extent();
    let width = ((extent.x / cs - SNAP_EPS).ceil() as usize).max(1);
    let depth = ((extent.z / cs - SNAP_EPS).ceil() as usize).max(1);
    if width.saturating_mul(depth) > max_columns {
        return Err(BakeError::GridTooLarge { width, depth, cap: max_columns });
    }
    let origin = bounds.min;
    let mut columns: Vec<Vec<Span>> = vec![Vec::new(); width * depth];

    let cell_area_eps = 1e-9 * cs * cs;
    for (ti, _) in mesh.triangles.iter().enumerate() {
        let tri = mesh.triangle(ti);
        let normal = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
        let len = normal.length();
        if len == 0.0 || !len.is_finite() {
            continue;
        }
        let is_surface = normal.y.abs() / len > 1e-6;
        let slope = slope_deg(normal);

        let lo = tri[0].min(tri[1]).min(tri[2]);
        let hi = tri[0].max(tri[1]).max(tri[2]);
        // one column of slack below so walls on a boundary are seen from both sides
        let cell = |v: f64, o: f64, n: usize, bias: f64| -> usize {
            (((v - o) / cs + bias).floor().max(0.0) as usize).min(n - 1)
        };
        let (x0, x1) = (cell(lo.x, origin.x, width, -SNAP_EPS), cell(hi.x, origin.x, width, SNAP_EPS));
        let (z0, z1) = (cell(lo.z, origin.z, depth, -SNAP_EPS), cell(hi.z, origin.z, depth, SNAP_EPS));

        for z in z0..=z1 {
            let cz0 = origin.z + z as f64 * cs;
            let cz1 = cz0 + cs;
            let row = clip(&clip(&tri, 2, cz0, true), 2, cz1, false);
            if row.is_empty() {
                continue;
            }
            for x in x0..=x1 {
                let cx0 = origin.x + x as f64 * cs;
                let cx1 = cx0 + cs;
                let piece = clip(&clip(&row, 0, cx0, true), 0, cx1, false);
                if piece.is_empty() {
                    continue;
                }
                if is_surface {
                    if projected_area(&piece) <= cell_area_eps {
                        continue;
                    }
                } else {
                    // half-open cells: a wall lying exactly on the max edge
                    // belongs to the next column
                    let on_max_x = piece.iter().all(|p| p.x >= cx1) && x + 1 < width;
                    let on_max_z = piece.iter().all(|p| p.z >= cz1) && z + 1 < depth;
                    if on_max_x || on_max_z {
                        continue;
                    }
                }
                let (ymin, ymax) = piece
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
                let y_min = ((ymin - origin.y) / ch + SNAP_EPS).floor() as i32;
                // tops snap to the nearest cell so sloped faces stay within one cell of the surface
                let y_max = (((ymax - origin.y) / ch + SNAP_EPS).round() as i32).max(y_min);
                add_span(
                    &mut columns[z * width + x],
                    Span {
                        y_min,
                        y_max,
                        walkable: false,
                        region_id: None,
                        top_triangle: is_surface.then_some(ti as u32),
                        top_slope_deg: if is_surface { slope } else { 90.0 },
                    },
                );
            }
        }
    }

    Ok(Heightfield {
        origin,
        cell_size: cs,
        cell_height: ch,
        width,
        depth,
        columns,
        params: *params,
        agent: None,
        source_hash: super::mesh_digest(mesh),
    })
}

/// Marks span tops walkable by slope and overhead clearance.
pub fn filter_walkable(mut hf: Heightfield, mesh: &TriangleMesh, agent: &AgentProfile) -> Heightfield {
    let ch = hf.cell_height;
    for column in hf.columns.iter_mut() {
        let n = column.len();
        for i in 0..n {
            let slope_ok = column[i].top_triangle.is_some_and(|t| {
                let tri = mesh.triangle(t as usize);
                let normal = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
                slope_deg(normal) <= agent.max_slope_deg + SNAP_EPS
            });
            let clearance = if i + 1 < n {
                (column[i + 1].y_min - column[i].y_max) as f64 * ch
            } else {
                f64::INFINITY
            };
            column[i].walkable = slope_ok && clearance + SNAP_EPS >= agent.height;
            column[i].region_id = None;
        }
    }
    hf.agent = Some(*agent);
    hf
}

const DIRS8: [(isize, isize); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
    (1, 1),
];

/// Clears walkable spans within `ceil(radius / cell_size)` cells (Chebyshev)
/// of a non-walkable neighbor, grid edge, or step discontinuity.
pub fn erode_by_radius(mut hf: Heightfield, agent: &AgentProfile) -> Heightfield {
    if hf.agent.is_none() {
        hf.agent = Some(*agent);
    }
    let rings = (agent.radius / hf.cell_size - SNAP_EPS).ceil().max(0.0) as u32;
    if rings == 0 {
        return hf;
    }
    let step = {
        let s = (agent.max_step_height / hf.cell_height + SNAP_EPS).floor() as i32;
        s.max(0)
    };

    // flat span addressing
    let mut offsets = Vec::with_capacity(hf.columns.len() + 1);
    let mut total = 0usize;
    for col in &hf.columns {
        offsets.push(total);
        total += col.len();
    }
    offsets.push(total);

    let mut dist = vec![u32::MAX; total];
    let mut queue = VecDeque::new();
    let mut links: Vec<[Option<usize>; 8]> = vec![[None; 8]; total];
    for z in 0..hf.depth {
        for x in 0..hf.width {
            let ci = z * hf.width + x;
            for (si, span) in hf.columns[ci].iter().enumerate() {
                if !span.walkable {
                    continue;
                }
                let id = offsets[ci] + si;
                let mut boundary = false;
                for (d, (dx, dz)) in DIRS8.iter().enumerate() {
                    let (nx, nz) = (x as isize + dx, z as isize + dz);
                    match hf.connected_span(nx, nz, span.y_max, step) {
                        Some(ns) => {
                            links[id][d] = Some(offsets[nz as usize * hf.width + nx as usize] + ns)
                        }
                        None => boundary = true,
                    }
                }
                if boundary {
                    dist[id] = 1;
                    queue.push_back(id);
                }
            }
        }
    }
    while let Some(id) = queue.pop_front() {
        let next = dist[id] + 1;
        if next > rings {
            continue;
        }
        for n in links[id].iter().flatten() {
            if dist[*n] > next {
                dist[*n] = next;
                queue.push_back(*n);
            }
        }
    }
    for (ci, col) in hf.columns.iter_mut().enumerate() {
        for (si, span) in col.iter_mut().enumerate() {
            if span.walkable && dist[offsets[ci] + si] <= rings {
                span.walkable = false;
            }
        }
    }
    hf
}

/// Labels 4-connected walkable spans (steps within the agent's step height)
/// and culls regions smaller than `region_min_cells`. A region holds at most
/// one span per column.
pub fn build_regions(mut hf: Heightfield, params: &BakeParams) -> Heightfield {
    let step = hf.step_cells().max(0);
    for col in hf.columns.iter_mut() {
        for s in col.iter_mut() {
            s.region_id = None;
        }
    }
    let w = hf.width;
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    // per-column list of regions already present
    let mut present: Vec<Vec<u32>> = vec![Vec::new(); hf.columns.len()];

    for ci in 0..hf.columns.len() {
        for si in 0..hf.columns[ci].len() {
            let s = hf.columns[ci][si];
            if !s.walkable || s.region_id.is_some() {
                continue;
            }
            let rid = members.len() as u32;
            let mut cells = vec![(ci, si)];
            hf.columns[ci][si].region_id = Some(rid);
            present[ci].push(rid);
            let mut queue = VecDeque::from([(ci, si)]);
            while let Some((c, i)) = queue.pop_front() {
                let top = hf.columns[c][i].y_max;
                let (x, z) = ((c % w) as isize, (c / w) as isize);
                for (dx, dz) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let (nx, nz) = (x + dx, z + dz);
                    if nx < 0 || nz < 0 || nx as usize >= w || nz as usize >= hf.depth {
                        continue;
                    }
                    let nc = nz as usize * w + nx as usize;
                    if present[nc].contains(&rid) {
                        continue;
                    }
                    let candidate = hf.columns[nc].iter().position(|ns| {
                        ns.walkable && ns.region_id.is_none() && (ns.y_max - top).abs() <= step
                    });
                    if let Some(ni) = candidate {
                        hf.columns[nc][ni].region_id = Some(rid);
                        present[nc].push(rid);
                        cells.push((nc, ni));
                        queue.push_back((nc, ni));
                    }
                }
            }
            members.push(cells);
        }
    }

    let mut next = 0u32;
    for cells in &members {
        if cells.len() < params.region_min_cells as usize {
            for &(c, i) in cells {
                hf.columns[c][i].region_id = None;
            }
        } else {
            for &(c, i) in cells {
                hf.columns[c][i].region_id = Some(next);
            }
            next += 1;
        }
    }
    hf
}
