use super::delaunay::{orient, triangulate};
use super::{Image, LandmarkSet, MorphError, Point, MIN_TRIANGLE_AREA};

/// Row-major 2x3 affine map `[x', y'] = M [x, y, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine(pub [[f64; 3]; 2]);

impl Affine {
    pub const IDENTITY: Affine = Affine([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        let m = &self.0;
        Point::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// The affine map taking each `src` vertex onto the matching `dst` vertex.
///
/// Solved by Cramer's rule on the 3x3 system of homogeneous source
/// coordinates; both triangles must have area above the degeneracy floor.
pub fn affine_from_triangles(src: [Point; 3], dst: [Point; 3]) -> Result<Affine, MorphError> {
    for (tag, tri) in [("source", src), ("destination", dst)] {
        let area = 0.5 * orient(tri[0], tri[1], tri[2]).abs();
        if area <= MIN_TRIANGLE_AREA {
            return Err(MorphError::DegenerateTriangle(format!(
                "{tag} triangle {tri:?} has area {area:e}"
            )));
        }
    }
    let s = [
        [src[0].x, src[0].y, 1.0],
        [src[1].x, src[1].y, 1.0],
        [src[2].x, src[2].y, 1.0],
    ];
    let det = det3(s);
    let mut out = [[0.0; 3]; 2];
    for (row, target) in out.iter_mut().zip([
        [dst[0].x, dst[1].x, dst[2].x],
        [dst[0].y, dst[1].y, dst[2].y],
    ]) {
        for (col, coeff) in row.iter_mut().enumerate() {
            let mut m = s;
            for r in 0..3 {
                m[r][col] = target[r];
            }
            *coeff = det3(m) / det;
        }
    }
    Ok(Affine(out))
}

/// Corners and edge midpoints of a `width x height` frame.
pub fn boundary_anchors(width: usize, height: usize) -> [Point; 8] {
    let (w, h) = ((width - 1) as f64, (height - 1) as f64);
    [
        Point::new(0.0, 0.0),
        Point::new(w / 2.0, 0.0),
        Point::new(w, 0.0),
        Point::new(w, h / 2.0),
        Point::new(w, h),
        Point::new(w / 2.0, h),
        Point::new(0.0, h),
        Point::new(0.0, h / 2.0),
    ]
}

const SNAP: f64 = 1e-9;

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Bilinear lookup with clamp-to-edge; coordinates within 1e-9 of a pixel
/// centre read that pixel directly.
pub fn sample_bilinear(image: &Image, p: Point, out: &mut [f32]) {
    let max_x = (image.width() - 1) as f64;
    let max_y = (image.height() - 1) as f64;
    let x = snap(p.x).clamp(0.0, max_x);
    let y = snap(p.y).clamp(0.0, max_y);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    if fx == 0.0 && fy == 0.0 {
        out.copy_from_slice(image.pixel_slice(x0, y0));
        return;
    }
    let x1 = (x0 + 1).min(image.width() - 1);
    let y1 = (y0 + 1).min(image.height() - 1);
    for (c, o) in out.iter_mut().enumerate() {
        let top = (1.0 - fx) * image.get(x0, y0, c) as f64 + fx * image.get(x1, y0, c) as f64;
        let bottom = (1.0 - fx) * image.get(x0, y1, c) as f64 + fx * image.get(x1, y1, c) as f64;
        *o = ((1.0 - fy) * top + fy * bottom).clamp(0.0, 1.0) as f32;
    }
}

/// Piecewise-affine warp moving content at `src` landmarks to `dst`.
///
/// The mesh is a Delaunay triangulation of `dst` plus the eight frame
/// anchors (which map to themselves). Each destination pixel is pulled back
/// through its triangle's affine map and sampled bilinearly from `image`;
/// pixels no triangle covers keep the source value.
pub fn warp(image: &Image, src: &LandmarkSet, dst: &LandmarkSet) -> Result<Image, MorphError> {
    if src.len() != dst.len() {
        return Err(MorphError::LandmarkCount {
            left: src.len(),
            right: dst.len(),
        });
    }
    src.check_bounds(image.width(), image.height())?;
    dst.check_bounds(image.width(), image.height())?;

    let anchors = boundary_anchors(image.width(), image.height());
    let dst_vertices: Vec<Point> = dst.points().iter().copied().chain(anchors).collect();
    let src_vertices: Vec<Point> = src.points().iter().copied().chain(anchors).collect();
    let mesh = triangulate(&dst_vertices)?;

    let (w, h) = (image.width(), image.height());
    let mut out = image.clone();
    let mut covered = vec![false; w * h];
    let mut buf = vec![0.0f32; image.channels()];

    for tri in &mesh.triangles {
        let d = tri.map(|i| dst_vertices[i]);
        let s = tri.map(|i| src_vertices[i]);
        if d == s {
            // Unmoved triangles already hold source pixels.
            mark_covered(&d, w, h, &mut covered, |_, _| {});
            continue;
        }
        let back = match affine_from_triangles(d, s) {
            Ok(a) => a,
            Err(e) => {
                log::warn!("skipping triangle {tri:?}: {e}");
                continue;
            }
        };
        mark_covered(&d, w, h, &mut covered, |x, y| {
            let q = back.apply(Point::new(x as f64, y as f64));
            sample_bilinear(image, q, &mut buf);
            out.pixel_slice_mut(x, y).copy_from_slice(&buf);
        });
    }
    Ok(out)
}

/// Calls `f` for each not-yet-covered integer pixel inside triangle `t`
/// (boundary inclusive) and marks it covered.
fn mark_covered(
    t: &[Point; 3],
    w: usize,
    h: usize,
    covered: &mut [bool],
    mut f: impl FnMut(usize, usize),
) {
    let min_x = t
        .iter()
        .map(|p| p.x)
        .fold(f64::INFINITY, f64::min)
        .floor()
        .max(0.0) as usize;
    let max_x = t
        .iter()
        .map(|p| p.x)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .min((w - 1) as f64) as usize;
    let min_y = t
        .iter()
        .map(|p| p.y)
        .fold(f64::INFINITY, f64::min)
        .floor()
        .max(0.0) as usize;
    let max_y = t
        .iter()
        .map(|p| p.y)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .min((h - 1) as f64) as usize;
    let area = orient(t[0], t[1], t[2]);
    let tol = 1e-9 * area.abs();
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            if covered[y * w + x] {
                continue;
            }
            let q = Point::new(x as f64, y as f64);
            let inside = [(0, 1), (1, 2), (2, 0)]
                .iter()
                .all(|&(i, j)| orient(t[i], t[j], q) * area.signum() >= -tol);
            if inside {
                covered[y * w + x] = true;
                f(x, y);
            }
        }
    }
}
