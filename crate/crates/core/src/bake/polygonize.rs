//! Region contours to convex polygons.
//!
//! All topology runs on integer grid-corner coordinates so orientation tests
//! are exact; world coordinates are produced only at the end.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use glam::DVec3;

use super::{BakeError, Heightfield, NavMesh, NavPolygon, PolyId};

/// Upper bound on vertices per merged polygon.
pub const MAX_POLY_VERTS: usize = 6;

/// Regions are polygonized in square tiles of this many cells so that no
/// polygon spans more than one tile.
pub const TILE_CELLS: i64 = 24;

type Corner = (i64, i64);

#[inline]
fn cross(o: Corner, a: Corner, b: Corner) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn area2(points: &[Corner]) -> i64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum()
}

/// Region cells on a local occupancy mask.
struct RegionMask {
    x0: i64,
    z0: i64,
    w: i64,
    d: i64,
    /// top height (world y) per cell, `None` when outside the region
    cells: Vec<Option<f64>>,
}

impl RegionMask {
    fn get(&self, x: i64, z: i64) -> Option<f64> {
        if x < self.x0 || z < self.z0 || x >= self.x0 + self.w || z >= self.z0 + self.d {
            return None;
        }
        self.cells[((z - self.z0) * self.w + (x - self.x0)) as usize]
    }

    fn has(&self, x: i64, z: i64) -> bool {
        self.get(x, z).is_some()
    }

    fn clear(&mut self, x: i64, z: i64) {
        let i = ((z - self.z0) * self.w + (x - self.x0)) as usize;
        self.cells[i] = None;
    }

    /// Drops cells that touch the rest of the region only diagonally, so
    /// traced loops never share a vertex.
    fn remove_pinches(&mut self) {
        loop {
            let mut changed = false;
            for z in self.z0 - 1..self.z0 + self.d {
                for x in self.x0 - 1..self.x0 + self.w {
                    let a = self.has(x, z);
                    let b = self.has(x + 1, z);
                    let c = self.has(x, z + 1);
                    let d = self.has(x + 1, z + 1);
                    if a && d && !b && !c {
                        self.clear(x + 1, z + 1);
                        changed = true;
                    } else if b && c && !a && !d {
                        self.clear(x, z + 1);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn corner_height(&self, u: i64, v: i64) -> f64 {
        let mut sum = 0.0;
        let mut n = 0;
        for (x, z) in [(u - 1, v - 1), (u, v - 1), (u - 1, v), (u, v)] {
            if let Some(h) = self.get(x, z) {
                sum += h;
                n += 1;
            }
        }
        if n == 0 { 0.0 } else { sum / n as f64 }
    }

    /// Boundary loops with the region on the left: outer loops come out
    /// counter-clockwise, holes clockwise.
    fn trace_loops(&self, keep: &dyn Fn(Corner) -> bool) -> Vec<Vec<Corner>> {
        let mut next: BTreeMap<Corner, Corner> = BTreeMap::new();
        for z in self.z0..self.z0 + self.d {
            for x in self.x0..self.x0 + self.w {
                if !self.has(x, z) {
                    continue;
                }
                if !self.has(x, z - 1) {
                    next.insert((x, z), (x + 1, z));
                }
                if !self.has(x + 1, z) {
                    next.insert((x + 1, z), (x + 1, z + 1));
                }
                if !self.has(x, z + 1) {
                    next.insert((x + 1, z + 1), (x, z + 1));
                }
                if !self.has(x - 1, z) {
                    next.insert((x, z + 1), (x, z));
                }
            }
        }
        let mut loops = Vec::new();
        while let Some((&start, _)) = next.iter().next() {
            let mut lp = vec![start];
            let mut cur = next.remove(&start).expect("edge present");
            while cur != start {
                lp.push(cur);
                cur = next.remove(&cur).expect("boundary loops close");
            }
            loops.push(simplify(lp, keep));
        }
        loops
    }
}

/// Drops grid vertices lying on a straight run unless `keep` marks them.
fn simplify(lp: Vec<Corner>, keep: &dyn Fn(Corner) -> bool) -> Vec<Corner> {
    let n = lp.len();
    (0..n)
        .filter(|&i| cross(lp[(i + n - 1) % n], lp[i], lp[(i + 1) % n]) != 0 || keep(lp[i]))
        .map(|i| lp[i])
        .collect()
}

/// Interior-wedge test at `ring[k]` for a segment heading to `target`.
fn locally_inside(prev: Corner, p: Corner, next: Corner, target: Corner) -> bool {
    if cross(prev, p, next) > 0 {
        cross(p, next, target) > 0 && cross(p, target, prev) > 0
    } else {
        cross(p, next, target) > 0 || cross(p, target, prev) > 0
    }
}

fn segments_cross(a: Corner, b: Corner, c: Corner, d: Corner) -> bool {
    if a == c || a == d || b == c || b == d {
        // shared endpoint: only a collinear overlap counts
        let shared_collinear = cross(a, b, c) == 0 && cross(a, b, d) == 0;
        if !shared_collinear {
            return false;
        }
        let dir = (b.0 - a.0, b.1 - a.1);
        let t = |p: Corner| (p.0 - a.0) * dir.0 + (p.1 - a.1) * dir.1;
        let len = dir.0 * dir.0 + dir.1 * dir.1;
        let (tc, td) = (t(c), t(d));
        let (lo, hi) = (tc.min(td), tc.max(td));
        return hi > 0 && lo < len;
    }
    let d1 = cross(c, d, a).signum();
    let d2 = cross(c, d, b).signum();
    let d3 = cross(a, b, c).signum();
    let d4 = cross(a, b, d).signum();
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    let on = |p: Corner, q: Corner, r: Corner| {
        r.0 >= p.0.min(q.0) && r.0 <= p.0.max(q.0) && r.1 >= p.1.min(q.1) && r.1 <= p.1.max(q.1)
    };
    (d1 == 0 && on(c, d, a)) || (d2 == 0 && on(c, d, b)) || (d3 == 0 && on(a, b, c)) || (d4 == 0 && on(a, b, d))
}

fn loop_contains(lp: &[Corner], p: Corner) -> bool {
    let pts: Vec<glam::DVec2> = lp.iter().map(|c| glam::DVec2::new(c.0 as f64, c.1 as f64)).collect();
    crate::geom::point_in_loop(&pts, glam::DVec2::new(p.0 as f64, p.1 as f64))
}

/// Splices every hole into the outer ring through mutually visible vertex
/// pairs, yielding one weakly simple ring.
fn bridge_holes(outer: Vec<Corner>, mut holes: Vec<Vec<Corner>>) -> Result<Vec<Corner>, String> {
    let rightmost = |h: &Vec<Corner>| -> usize {
        (0..h.len())
            .max_by(|&i, &j| h[i].0.cmp(&h[j].0).then(h[j].1.cmp(&h[i].1)))
            .expect("non-empty hole")
    };
    holes.sort_by(|a, b| {
        let (ra, rb) = (a[rightmost(a)], b[rightmost(b)]);
        rb.0.cmp(&ra.0).then(ra.1.cmp(&rb.1))
    });

    let mut ring = outer;
    for hi in 0..holes.len() {
        let hole = &holes[hi];
        let m = rightmost(hole);
        let mp = hole[m];
        let (hprev, hnext) = (hole[(m + hole.len() - 1) % hole.len()], hole[(m + 1) % hole.len()]);

        let mut candidates: Vec<usize> = (0..ring.len()).collect();
        let dist = |c: Corner| (c.0 - mp.0).pow(2) + (c.1 - mp.1).pow(2);
        candidates.sort_by_key(|&k| (dist(ring[k]), k));

        let n = ring.len();
        let mut chosen = None;
        'cand: for k in candidates {
            let p = ring[k];
            if p == mp {
                continue;
            }
            if !locally_inside(ring[(k + n - 1) % n], p, ring[(k + 1) % n], mp) {
                continue;
            }
            if !locally_inside(hprev, mp, hnext, p) {
                continue;
            }
            for i in 0..n {
                if segments_cross(p, mp, ring[i], ring[(i + 1) % n]) {
                    continue 'cand;
                }
            }
            for other in &holes[hi..] {
                let on = other.len();
                for i in 0..on {
                    if segments_cross(p, mp, other[i], other[(i + 1) % on]) {
                        continue 'cand;
                    }
                }
            }
            chosen = Some(k);
            break;
        }
        let k = chosen.ok_or_else(|| format!("no visible bridge for hole at {mp:?}"))?;
        let mut spliced = Vec::with_capacity(ring.len() + hole.len() + 2);
        spliced.extend_from_slice(&ring[..=k]);
        for i in 0..=hole.len() {
            spliced.push(hole[(m + i) % hole.len()]);
        }
        spliced.push(ring[k]);
        spliced.extend_from_slice(&ring[k + 1..]);
        ring = spliced;
    }
    Ok(ring)
}

fn in_triangle(a: Corner, b: Corner, c: Corner, p: Corner) -> bool {
    cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0
}

/// Ear clipping of a counter-clockwise, weakly simple ring.
fn ear_clip(ring: &[Corner]) -> Result<Vec<[Corner; 3]>, String> {
    let n = ring.len();
    if n < 3 {
        return Err("ring with fewer than 3 vertices".into());
    }
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut alive = vec![true; n];
    let mut reflex: Vec<bool> = (0..n).map(|i| cross(ring[prev[i]], ring[i], ring[next[i]]) <= 0).collect();
    let mut remaining = n;
    let mut tris = Vec::with_capacity(n);
    let mut cur = 0;

    let is_ear = |i: usize, prev: &[usize], next: &[usize], alive: &[bool], reflex: &[bool]| -> bool {
        let (a, b, c) = (ring[prev[i]], ring[i], ring[next[i]]);
        if cross(a, b, c) <= 0 {
            return false;
        }
        (0..n).all(|j| {
            if !alive[j] || !reflex[j] || j == i || j == prev[i] || j == next[i] {
                return true;
            }
            let p = ring[j];
            p == a || p == b || p == c || !in_triangle(a, b, c, p)
        })
    };

    while remaining > 3 {
        let mut found = false;
        let mut i = cur;
        for _ in 0..remaining {
            if is_ear(i, &prev, &next, &alive, &reflex) {
                tris.push([ring[prev[i]], ring[i], ring[next[i]]]);
                found = true;
                break;
            }
            i = next[i];
        }
        if !found {
            // degenerate leftovers (collinear runs, bridge spikes) go without a triangle
            let mut j = cur;
            let mut hit = None;
            for _ in 0..remaining {
                if cross(ring[prev[j]], ring[j], ring[next[j]]) == 0 {
                    hit = Some(j);
                    break;
                }
                j = next[j];
            }
            i = hit.ok_or("no ear found")?;
        }
        let (p, q) = (prev[i], next[i]);
        next[p] = q;
        prev[q] = p;
        alive[i] = false;
        remaining -= 1;
        for v in [p, q] {
            reflex[v] = cross(ring[prev[v]], ring[v], ring[next[v]]) <= 0;
        }
        cur = q;
    }
    let a = alive.iter().position(|&x| x).expect("three vertices remain");
    let (b, c) = (next[a], next[next[a]]);
    if cross(ring[a], ring[b], ring[c]) > 0 {
        tris.push([ring[a], ring[b], ring[c]]);
    }
    Ok(tris)
}

fn strictly_convex(poly: &[Corner]) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) > 0)
}

/// Joins `p` and `q` across their shared edge `p[e] -> p[e+1]`.
fn merge_pair(p: &[Corner], e: usize, q: &[Corner]) -> Vec<Corner> {
    let (a, b) = (p[e], p[(e + 1) % p.len()]);
    let qa = q.iter().position(|&c| c == a).expect("shared vertex");
    debug_assert_eq!(q[(qa + q.len() - 1) % q.len()], b);
    let mut out = Vec::with_capacity(p.len() + q.len() - 2);
    for i in 0..p.len() {
        out.push(p[(e + 1 + i) % p.len()]); // b .. a
    }
    for i in 1..q.len() - 1 {
        out.push(q[(qa + i) % q.len()]);
    }
    out
}

struct Merger<'a> {
    polys: Vec<Option<Vec<Corner>>>,
    version: Vec<u32>,
    owner: HashMap<(Corner, Corner), usize>,
    heap: BinaryHeap<(i64, Reverse<usize>, Reverse<usize>, u32, u32)>,
    height: &'a dyn Fn(Corner) -> f64,
    tolerance: f64,
}

impl Merger<'_> {
    fn coplanar(&self, poly: &[Corner]) -> bool {
        let (a, b, c) = (poly[0], poly[1], poly[2]);
        let (ha, hb, hc) = ((self.height)(a), (self.height)(b), (self.height)(c));
        let det = cross(a, b, c) as f64;
        if det == 0.0 {
            return false;
        }
        poly.iter().all(|&p| {
            let w1 = cross(b, c, p) as f64 / det;
            let w2 = cross(c, a, p) as f64 / det;
            let w3 = cross(a, b, p) as f64 / det;
            ((self.height)(p) - (w1 * ha + w2 * hb + w3 * hc)).abs() <= self.tolerance
        })
    }

    fn push_candidates(&mut self, p: usize) {
        let Some(poly) = self.polys[p].as_ref() else { return };
        let n = poly.len();
        let mut found = Vec::new();
        for e in 0..n {
            let (a, b) = (poly[e], poly[(e + 1) % n]);
            let Some(&q) = self.owner.get(&(b, a)) else { continue };
            if q == p {
                continue;
            }
            let other = self.polys[q].as_ref().expect("owner alive");
            if n + other.len() - 2 > MAX_POLY_VERTS {
                continue;
            }
            let merged = merge_pair(poly, e, other);
            if !strictly_convex(&merged) || !self.coplanar(&merged) {
                continue;
            }
            let len2 = (b.0 - a.0).pow(2) + (b.1 - a.1).pow(2);
            found.push((len2, p.min(q), p.max(q)));
        }
        for (len2, lo, hi) in found {
            self.heap
                .push((len2, Reverse(lo), Reverse(hi), self.version[lo], self.version[hi]));
        }
    }

    fn run(mut self) -> Vec<Vec<Corner>> {
        for p in 0..self.polys.len() {
            self.push_candidates(p);
        }
        while let Some((_, Reverse(lo), Reverse(hi), vlo, vhi)) = self.heap.pop() {
            if self.version[lo] != vlo || self.version[hi] != vhi {
                continue;
            }
            let (Some(p), Some(q)) = (self.polys[lo].as_ref(), self.polys[hi].as_ref()) else {
                continue;
            };
            let e = (0..p.len())
                .find(|&e| self.owner.get(&(p[(e + 1) % p.len()], p[e])) == Some(&hi))
                .expect("still adjacent");
            let merged = merge_pair(p, e, q);
            for poly in [p, q] {
                for i in 0..poly.len() {
                    self.owner.remove(&(poly[i], poly[(i + 1) % poly.len()]));
                }
            }
            for i in 0..merged.len() {
                self.owner.insert((merged[i], merged[(i + 1) % merged.len()]), lo);
            }
            self.polys[lo] = Some(merged);
            self.polys[hi] = None;
            self.version[lo] += 1;
            self.version[hi] += 1;
            self.push_candidates(lo);
        }
        self.polys.into_iter().flatten().collect()
    }
}

/// Convex partition of one tile's share of a region.
fn polygonize_piece(
    tile: &RegionMask,
    keep: &dyn Fn(Corner) -> bool,
    height: &dyn Fn(Corner) -> f64,
    tolerance: f64,
) -> Result<Vec<Vec<Corner>>, String> {
    let loops = tile.trace_loops(keep);
    let (mut outers, mut holes): (Vec<Vec<Corner>>, Vec<Vec<Corner>>) =
        loops.into_iter().partition(|lp| area2(lp) > 0);
    outers.sort_by_key(|lp| lp[0]);
    let mut hole_sets: Vec<Vec<Vec<Corner>>> = vec![Vec::new(); outers.len()];
    holes.sort_by_key(|lp| lp[0]);
    for hole in holes {
        let owner = outers
            .iter()
            .enumerate()
            .filter(|(_, o)| loop_contains(o, hole[0]))
            .min_by_key(|(i, o)| (area2(o), *i))
            .map(|(i, _)| i)
            .ok_or_else(|| "hole outside every outer contour".to_string())?;
        hole_sets[owner].push(hole);
    }

    let mut polys = Vec::new();
    for (outer, holes) in outers.into_iter().zip(hole_sets) {
        let expected = area2(&outer) + holes.iter().map(|h| area2(h)).sum::<i64>();
        let ring = bridge_holes(outer, holes)?;
        let tris = ear_clip(&ring)?;
        let got: i64 = tris.iter().map(|t| area2(t)).sum();
        if got != expected {
            return Err(format!("triangulated area {got} != contour area {expected}"));
        }
        let mut owner = HashMap::new();
        for (i, t) in tris.iter().enumerate() {
            for e in 0..3 {
                owner.insert((t[e], t[(e + 1) % 3]), i);
            }
        }
        let merger = Merger {
            version: vec![0; tris.len()],
            polys: tris.into_iter().map(|t| Some(t.to_vec())).collect(),
            owner,
            heap: BinaryHeap::new(),
            height,
            tolerance,
        };
        polys.extend(merger.run());
    }
    Ok(polys)
}

/// Traces each region, partitions it into convex polygons, and links
/// neighbors across shared edges.
pub fn build_polygons(hf: &Heightfield) -> Result<NavMesh, BakeError> {
    let agent = hf.agent.unwrap_or_default();
    let region_count = hf.region_count();
    let mut per_region: Vec<Vec<(i64, i64, f64)>> = vec![Vec::new(); region_count];
    for z in 0..hf.depth {
        for x in 0..hf.width {
            for s in hf.column(x, z) {
                if let Some(r) = s.region_id {
                    per_region[r as usize].push((x as i64, z as i64, hf.top_height(s)));
                }
            }
        }
    }

    let mut polygons: Vec<NavPolygon> = Vec::new();
    for (region, cells) in per_region.iter().enumerate() {
        if cells.is_empty() {
            continue;
        }
        let fail = |reason: String| BakeError::TriangulationFailure { region: region as u32, reason };
        let (mut x0, mut z0, mut x1, mut z1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for &(x, z, _) in cells {
            x0 = x0.min(x);
            z0 = z0.min(z);
            x1 = x1.max(x);
            z1 = z1.max(z);
        }
        let (w, d) = (x1 - x0 + 1, z1 - z0 + 1);
        let mut mask = RegionMask { x0, z0, w, d, cells: vec![None; (w * d) as usize] };
        for &(x, z, h) in cells {
            mask.cells[((z - z0) * w + (x - x0)) as usize] = Some(h);
        }
        mask.remove_pinches();

        // a straight boundary vertex on a tile line must survive wherever the
        // cell pair across the line changes, so both sides share portal edges
        let pair = |a: Corner, b: Corner| mask.has(a.0, a.1) && mask.has(b.0, b.1);
        let keep = |(u, v): Corner| {
            (u.rem_euclid(TILE_CELLS) == 0 && pair((u - 1, v - 1), (u, v - 1)) != pair((u - 1, v), (u, v)))
                || (v.rem_euclid(TILE_CELLS) == 0 && pair((u - 1, v - 1), (u - 1, v)) != pair((u, v - 1), (u, v)))
        };
        let height = |c: Corner| mask.corner_height(c.0, c.1);

        let mut region_polys: Vec<Vec<Corner>> = Vec::new();
        for tz in z0.div_euclid(TILE_CELLS)..=z1.div_euclid(TILE_CELLS) {
            for tx in x0.div_euclid(TILE_CELLS)..=x1.div_euclid(TILE_CELLS) {
                let (px, pz) = (tx * TILE_CELLS, tz * TILE_CELLS);
                let mut tile = RegionMask {
                    x0: px,
                    z0: pz,
                    w: TILE_CELLS,
                    d: TILE_CELLS,
                    cells: vec![None; (TILE_CELLS * TILE_CELLS) as usize],
                };
                let mut any = false;
                for z in pz..pz + TILE_CELLS {
                    for x in px..px + TILE_CELLS {
                        if let Some(h) = mask.get(x, z) {
                            tile.cells[((z - pz) * TILE_CELLS + (x - px)) as usize] = Some(h);
                            any = true;
                        }
                    }
                }
                if any {
                    region_polys.extend(
                        polygonize_piece(&tile, &keep, &height, hf.cell_height).map_err(fail)?,
                    );
                }
            }
        }

        let base = polygons.len() as PolyId;
        let mut edge_owner: HashMap<(Corner, Corner), PolyId> = HashMap::new();
        for (i, poly) in region_polys.iter().enumerate() {
            for e in 0..poly.len() {
                edge_owner.insert((poly[e], poly[(e + 1) % poly.len()]), base + i as PolyId);
            }
        }
        for (i, poly) in region_polys.iter().enumerate() {
            let vertices: Vec<DVec3> = poly
                .iter()
                .map(|&(u, v)| {
                    DVec3::new(
                        hf.origin.x + u as f64 * hf.cell_size,
                        height((u, v)),
                        hf.origin.z + v as f64 * hf.cell_size,
                    )
                })
                .collect();
            let neighbors = (0..poly.len())
                .map(|e| edge_owner.get(&(poly[(e + 1) % poly.len()], poly[e])).copied())
                .collect();
            let center = vertices.iter().copied().sum::<DVec3>() / vertices.len() as f64;
            polygons.push(NavPolygon { id: base + i as PolyId, vertices, neighbors, center });
        }
    }

    Ok(NavMesh {
        polygons,
        bake_params: hf.params,
        agent,
        source_hash: hf.source_hash.clone(),
    })
}
