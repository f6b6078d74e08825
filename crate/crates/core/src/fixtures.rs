//! Procedural indoor scenes.
//!
//! These stand in for scanned area targets in tests, examples, and the
//! benchmark harness. The office floor is also bundled as an `.obj` asset.

use glam::DVec3;

use crate::ingest::TriangleMesh;

/// Horizontal rectangle at height `y`, split into `nx × nz` quads.
pub fn tiled_rect(x0: f64, z0: f64, x1: f64, z1: f64, y: f64, nx: usize, nz: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (nz + 1));
    for j in 0..=nz {
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            let z = z0 + (z1 - z0) * j as f64 / nz as f64;
            vertices.push(DVec3::new(x, y, z));
        }
    }
    let mut triangles = Vec::with_capacity(nx * nz * 2);
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    for j in 0..nz {
        for i in 0..nx {
            triangles.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

pub fn rect(x0: f64, z0: f64, x1: f64, z1: f64, y: f64) -> TriangleMesh {
    tiled_rect(x0, z0, x1, z1, y, 1, 1)
}

/// Closed-top box standing on `y0` (no bottom face).
pub fn box_mesh(min: DVec3, max: DVec3) -> TriangleMesh {
    let v = |x: f64, y: f64, z: f64| DVec3::new(x, y, z);
    let vertices = vec![
        v(min.x, min.y, min.z),
        v(max.x, min.y, min.z),
        v(max.x, min.y, max.z),
        v(min.x, min.y, max.z),
        v(min.x, max.y, min.z),
        v(max.x, max.y, min.z),
        v(max.x, max.y, max.z),
        v(min.x, max.y, max.z),
    ];
    let triangles = vec![
        [4, 7, 6],
        [4, 6, 5],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh::new(vertices, triangles)
}

/// `size × size` floor at y = 0 starting at the origin.
pub fn flat_floor(size: f64) -> TriangleMesh {
    rect(0.0, 0.0, size, size, 0.0)
}

/// Flat floor plus a ceiling plane `ceiling_y` above it.
pub fn floor_with_ceiling(size: f64, ceiling_y: f64) -> TriangleMesh {
    let mut mesh = flat_floor(size);
    mesh.append(&rect(0.0, 0.0, size, size, ceiling_y));
    mesh
}

/// Plane rising along +x at `angle_deg`, spanning `length` horizontally.
pub fn ramp(angle_deg: f64, length: f64, width: f64) -> TriangleMesh {
    let rise = length * angle_deg.to_radians().tan();
    let vertices = vec![
        DVec3::new(0.0, 0.0, 0.0),
        DVec3::new(length, rise, 0.0),
        DVec3::new(length, rise, width),
        DVec3::new(0.0, 0.0, width),
    ];
    TriangleMesh::new(vertices, vec![[0, 3, 2], [0, 2, 1]])
}

/// Straight strip along x, `width` wide.
pub fn corridor(length: f64, width: f64) -> TriangleMesh {
    rect(0.0, 0.0, length, width, 0.0)
}

/// Two 5 × 5 floors side by side; the right one raised by `ledge`.
pub fn ledge(ledge: f64) -> TriangleMesh {
    let mut mesh = rect(0.0, 0.0, 5.0, 5.0, 0.0);
    mesh.append(&rect(5.0, 0.0, 10.0, 5.0, ledge));
    mesh
}

/// Two 4 × 4 floors with a `gap`-wide hole between them.
pub fn split_floors(gap: f64) -> TriangleMesh {
    let mut mesh = rect(0.0, 0.0, 4.0, 4.0, 0.0);
    mesh.append(&rect(4.0 + gap, 0.0, 8.0 + gap, 4.0, 0.0));
    mesh
}

/// L-shaped floor: a 10 × 4 bar plus a 4 × 6 leg.
pub fn l_floor() -> TriangleMesh {
    let mut mesh = rect(0.0, 0.0, 10.0, 4.0, 0.0);
    mesh.append(&rect(0.0, 4.0, 4.0, 10.0, 0.0));
    mesh
}

/// Floor with a ramp up to a raised deck: exercises slopes inside one region.
pub fn ramp_deck() -> TriangleMesh {
    let mut mesh = rect(0.0, 0.0, 6.0, 6.0, 0.0);
    let rise = 4.0 * 20f64.to_radians().tan();
    let base = mesh.vertices.len() as u32;
    mesh.vertices.extend([
        DVec3::new(6.0, 0.0, 0.0),
        DVec3::new(10.0, rise, 0.0),
        DVec3::new(10.0, rise, 6.0),
        DVec3::new(6.0, 0.0, 6.0),
    ]);
    mesh.triangles.extend([[base, base + 3, base + 2], [base, base + 2, base + 1]]);
    mesh.append(&rect(10.0, 0.0, 16.0, 6.0, rise));
    mesh
}

pub const OFFICE_WIDTH: f64 = 60.0;
pub const OFFICE_DEPTH: f64 = 36.0;
pub const WALL_HEIGHT: f64 = 3.0;

/// A 60 × 36 m office floor: a central corridor with pillars, ten rooms on
/// each side with desks and chairs, doors onto the corridor, and doors
/// between neighbouring rooms at the far wall.
pub fn office_floor() -> TriangleMesh {
    let mut mesh = tiled_rect(0.0, 0.0, OFFICE_WIDTH, OFFICE_DEPTH, 0.0, 40, 24);
    let wall = |mesh: &mut TriangleMesh, x0: f64, z0: f64, x1: f64, z1: f64| {
        mesh.append(&box_mesh(DVec3::new(x0, 0.0, z0), DVec3::new(x1, WALL_HEIGHT, z1)));
    };
    let t = 0.1;

    // exterior
    wall(&mut mesh, 0.0, 0.0, OFFICE_WIDTH, 2.0 * t);
    wall(&mut mesh, 0.0, OFFICE_DEPTH - 2.0 * t, OFFICE_WIDTH, OFFICE_DEPTH);
    wall(&mut mesh, 0.0, 2.0 * t, 2.0 * t, OFFICE_DEPTH - 2.0 * t);
    wall(&mut mesh, OFFICE_WIDTH - 2.0 * t, 2.0 * t, OFFICE_WIDTH, OFFICE_DEPTH - 2.0 * t);

    let rooms = 10;
    let room_w = OFFICE_WIDTH / rooms as f64;
    let (corr_lo, corr_hi) = (16.0, 20.0);
    let door = 1.6;

    // corridor walls with one door per room
    for &zc in &[corr_lo, corr_hi] {
        let mut x = 2.0 * t;
        for r in 0..rooms {
            let cx = r as f64 * room_w + room_w / 2.0;
            wall(&mut mesh, x, zc - t, cx - door / 2.0, zc + t);
            x = cx + door / 2.0;
        }
        wall(&mut mesh, x, zc - t, OFFICE_WIDTH - 2.0 * t, zc + t);
    }

    // partitions with a door near the exterior wall
    for k in 1..rooms {
        let xc = k as f64 * room_w;
        // north side: corridor wall .. far wall
        wall(&mut mesh, xc - t, corr_hi + t, xc + t, 33.0);
        wall(&mut mesh, xc - t, 33.0 + door, xc + t, OFFICE_DEPTH - 2.0 * t);
        // south side
        wall(&mut mesh, xc - t, 2.0 * t, xc + t, 3.0 - door);
        wall(&mut mesh, xc - t, 3.0, xc + t, corr_lo - t);
    }

    // pillars down the corridor
    for r in 0..rooms {
        let px = r as f64 * room_w + room_w / 2.0 + 3.0;
        if px < OFFICE_WIDTH - 1.0 {
            mesh.append(&box_mesh(
                DVec3::new(px - 0.2, 0.0, 17.8),
                DVec3::new(px + 0.2, WALL_HEIGHT, 18.2),
            ));
        }
    }

    // desks and chairs
    for r in 0..rooms {
        let cx = r as f64 * room_w + room_w / 2.0;
        for (row, &dz) in [23.0, 26.0, 29.0, 32.0].iter().enumerate() {
            // stagger desks so rooms do not look identical
            let off = if (r + row) % 2 == 0 { -0.6 } else { 0.6 };
            for (z, chair_dir) in [(dz, -1.0), (OFFICE_DEPTH - dz, 1.0)] {
                mesh.append(&box_mesh(
                    DVec3::new(cx + off - 0.8, 0.0, z - 0.4),
                    DVec3::new(cx + off + 0.8, 0.75, z + 0.4),
                ));
                let chz = z + chair_dir * 0.85;
                mesh.append(&box_mesh(
                    DVec3::new(cx + off - 0.25, 0.0, chz - 0.25),
                    DVec3::new(cx + off + 0.25, 0.45, chz + 0.25),
                ));
            }
        }
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::validate_mesh;

    #[test]
    fn fixtures_are_clean() {
        for mesh in [flat_floor(10.0), ramp(30.0, 10.0, 4.0), ledge(0.3), l_floor(), office_floor(), ramp_deck()] {
            let report = validate_mesh(&mesh);
            assert_eq!(report.degenerate_triangles, 0);
            assert_eq!(report.non_finite_vertices, 0);
        }
    }

    #[test]
    fn office_is_scan_sized() {
        let n = office_floor().triangles.len();
        assert!((4000..6000).contains(&n), "{n}");
    }
}
