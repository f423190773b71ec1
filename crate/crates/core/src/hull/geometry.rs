//! Exact hull construction for `d ≤ 3`: monotone chain in the plane and an
//! incremental facet hull in space. Both return vertex candidates (a superset
//! of the extreme points) together with the hull volume and a half-space
//! description used for fast membership of probe points.

use std::collections::BTreeSet;

use super::cloud::PointCloud;

/// Hull as an intersection of half-spaces `normal · x ≤ offset`.
#[derive(Debug, Clone, Default)]
pub struct HalfSpaces {
    dim: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
    /// Vertex coordinates, row-major.
    vertices: Vec<f64>,
}

impl HalfSpaces {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facet_count(&self) -> usize {
        self.offsets.len()
    }

    /// A full-dimensional hull has at least `d + 1` facets; degenerate hulls
    /// carry none and contain nothing.
    pub fn is_degenerate(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if self.is_degenerate() {
            return false;
        }
        self.normals
            .chunks_exact(self.dim)
            .zip(&self.offsets)
            .all(|(nrm, &off)| nrm.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() <= off)
    }

    /// Radius of the largest origin-centred ball inside the hull (0 when the
    /// origin is outside). Normals are unit length.
    pub fn inner_radius(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        self.offsets.iter().copied().fold(f64::INFINITY, f64::min).max(0.0)
    }

    /// Radius of the smallest origin-centred ball containing the hull.
    pub fn outer_radius(&self) -> f64 {
        self.vertices
            .chunks_exact(self.dim.max(1))
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    fn push(&mut self, normal: &[f64], point_on: &[f64]) {
        let len = normal.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len == 0.0 {
            return;
        }
        let unit: Vec<f64> = normal.iter().map(|c| c / len).collect();
        let off = unit.iter().zip(point_on).map(|(a, b)| a * b).sum();
        self.normals.extend_from_slice(&unit);
        self.offsets.push(off);
    }
}

/// Output of a hull construction.
#[derive(Debug, Clone)]
pub struct HullGeometry {
    /// Indices of points on the hull boundary that may be extreme.
    pub candidates: Vec<usize>,
    /// Lebesgue measure of the hull in its ambient dimension.
    pub volume: f64,
    pub region: HalfSpaces,
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub fn hull_1d(cloud: &PointCloud) -> HullGeometry {
    let n = cloud.len();
    let (mut lo, mut hi) = (0, 0);
    for i in 1..n {
        if cloud.point(i)[0] < cloud.point(lo)[0] {
            lo = i;
        }
        if cloud.point(i)[0] > cloud.point(hi)[0] {
            hi = i;
        }
    }
    let (a, b) = (cloud.point(lo)[0], cloud.point(hi)[0]);
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let x = cloud.point(i)[0];
            x == a || x == b
        })
        .collect();
    candidates.dedup();
    let mut region = HalfSpaces {
        dim: 1,
        vertices: vec![a, b],
        ..Default::default()
    };
    if b > a {
        region.push(&[1.0], &[b]);
        region.push(&[-1.0], &[a]);
    }
    HullGeometry {
        candidates,
        volume: b - a,
        region,
    }
}

/// Andrew's monotone chain. Collinear boundary points are kept as candidates;
/// the half-space description uses the strict hull.
pub fn hull_2d(cloud: &PointCloud) -> HullGeometry {
    let n = cloud.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (cloud.point(i), cloud.point(j));
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
    });

    let chain = |strict: bool| -> Vec<usize> {
        if n < 2 {
            return order.clone();
        }
        let pops = |o: &[f64], a: &[f64], b: &[f64]| {
            let c = cross2(o, a, b);
            if strict {
                c <= 0.0
            } else {
                c < 0.0
            }
        };
        let mut lower: Vec<usize> = Vec::new();
        for &i in &order {
            while lower.len() >= 2
                && pops(
                    cloud.point(lower[lower.len() - 2]),
                    cloud.point(lower[lower.len() - 1]),
                    cloud.point(i),
                )
            {
                lower.pop();
            }
            lower.push(i);
        }
        let mut upper: Vec<usize> = Vec::new();
        for &i in order.iter().rev() {
            while upper.len() >= 2
                && pops(
                    cloud.point(upper[upper.len() - 2]),
                    cloud.point(upper[upper.len() - 1]),
                    cloud.point(i),
                )
            {
                upper.pop();
            }
            upper.push(i);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    };

    let loose = chain(false);
    let mut candidates = loose.clone();
    candidates.sort_unstable();
    candidates.dedup();

    let strict = chain(true);
    let mut area2 = 0.0;
    for k in 0..strict.len() {
        let (p, q) = (cloud.point(strict[k]), cloud.point(strict[(k + 1) % strict.len()]));
        area2 += p[0] * q[1] - q[0] * p[1];
    }
    let volume = 0.5 * area2.abs();

    let mut region = HalfSpaces {
        dim: 2,
        vertices: strict.iter().flat_map(|&i| cloud.point(i).to_vec()).collect(),
        ..Default::default()
    };
    if strict.len() >= 3 && volume > 0.0 {
        // Counter-clockwise order: outward normal of edge p→q is (dy, -dx).
        for k in 0..strict.len() {
            let (p, q) = (cloud.point(strict[k]), cloud.point(strict[(k + 1) % strict.len()]));
            region.push(&[q[1] - p[1], p[0] - q[0]], p);
        }
    }
    HullGeometry {
        candidates,
        volume,
        region,
    }
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn dot3(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

#[derive(Debug, Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: [f64; 3],
    offset: f64,
}

/// Incremental hull in three dimensions with outward-oriented triangular
/// faces. Coplanar and interior points are skipped, so face vertices form a
/// superset of the extreme points. Returns `None` when the points do not span
/// three dimensions.
pub fn hull_3d(cloud: &PointCloud) -> Option<HullGeometry> {
    let n = cloud.len();
    if n < 4 {
        return None;
    }
    let p = |i: usize| cloud.point(i);
    let scale = cloud
        .coords()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(1.0);
    let eps = 1e-12 * scale;

    // Initial simplex: farthest pair, farthest from the line, farthest from
    // the plane.
    let i0 = 0;
    let i1 = (1..n).max_by(|&a, &b| {
        let da = sub3(p(a), p(i0));
        let db = sub3(p(b), p(i0));
        dot3(da, da).total_cmp(&dot3(db, db))
    })?;
    let line = sub3(p(i1), p(i0));
    if dot3(line, line).sqrt() <= eps {
        return None;
    }
    let i2 = (0..n).max_by(|&a, &b| {
        let ca = cross3(line, sub3(p(a), p(i0)));
        let cb = cross3(line, sub3(p(b), p(i0)));
        dot3(ca, ca).total_cmp(&dot3(cb, cb))
    })?;
    let plane = cross3(line, sub3(p(i2), p(i0)));
    let plane_len = dot3(plane, plane).sqrt();
    if plane_len <= eps * eps.max(dot3(line, line).sqrt()) {
        return None;
    }
    let i3 = (0..n).max_by(|&a, &b| {
        dot3(plane, sub3(p(a), p(i0)))
            .abs()
            .total_cmp(&dot3(plane, sub3(p(b), p(i0))).abs())
    })?;
    if dot3(plane, sub3(p(i3), p(i0))).abs() / plane_len <= eps {
        return None;
    }

    let centroid: [f64; 3] = {
        let mut c = [0.0; 3];
        for i in [i0, i1, i2, i3] {
            for (ck, pk) in c.iter_mut().zip(p(i)) {
                *ck += pk / 4.0;
            }
        }
        c
    };
    let make_face = |a: usize, b: usize, c: usize| -> Face {
        let mut v = [a, b, c];
        let mut normal = cross3(sub3(p(b), p(a)), sub3(p(c), p(a)));
        if dot3(normal, sub3(&centroid, p(a))) > 0.0 {
            v.swap(1, 2);
            normal = [-normal[0], -normal[1], -normal[2]];
        }
        let len = dot3(normal, normal).sqrt();
        let unit = [normal[0] / len, normal[1] / len, normal[2] / len];
        let offset = dot3(unit, [p(v[0])[0], p(v[0])[1], p(v[0])[2]]);
        Face {
            v,
            normal: unit,
            offset,
        }
    };

    let mut faces: Vec<Face> = vec![
        make_face(i0, i1, i2),
        make_face(i0, i1, i3),
        make_face(i0, i2, i3),
        make_face(i1, i2, i3),
    ];

    let seeds = [i0, i1, i2, i3];
    for i in 0..n {
        if seeds.contains(&i) {
            continue;
        }
        let x = p(i);
        let xv = [x[0], x[1], x[2]];
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| dot3(f.normal, xv) - f.offset > eps)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut vis_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                vis_edges.insert((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = vis_edges
            .iter()
            .copied()
            .filter(|&(a, b)| !vis_edges.contains(&(b, a)))
            .collect();
        let mut kept: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        for (a, b) in horizon {
            let mut normal = cross3(sub3(p(b), p(a)), sub3(x, p(a)));
            let len = dot3(normal, normal).sqrt();
            if len == 0.0 {
                continue;
            }
            normal = [normal[0] / len, normal[1] / len, normal[2] / len];
            kept.push(Face {
                v: [a, b, i],
                normal,
                offset: dot3(normal, [x[0], x[1], x[2]]),
            });
        }
        faces = kept;
    }

    let mut volume = 0.0;
    for f in &faces {
        let (a, b, c) = (sub3(p(f.v[0]), &centroid), sub3(p(f.v[1]), &centroid), sub3(p(f.v[2]), &centroid));
        volume += dot3(a, cross3(b, c)) / 6.0;
    }

    let mut candidates: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    candidates.sort_unstable();
    candidates.dedup();

    let mut region = HalfSpaces {
        dim: 3,
        vertices: candidates.iter().flat_map(|&i| p(i).to_vec()).collect(),
        ..Default::default()
    };
    for f in &faces {
        region.normals.extend_from_slice(&f.normal);
        region.offsets.push(f.offset);
    }

    Some(HullGeometry {
        candidates,
        volume: volume.abs(),
        region,
    })
}
