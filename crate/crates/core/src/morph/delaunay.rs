use std::collections::HashMap;

use super::{MorphError, Point};

/// Triangles below this area (px^2) are treated as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

/// Triangulated vertex set; triangles are counter-clockwise index triples
/// (in a y-down image frame "counter-clockwise" means positive signed area).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }
}

/// Twice the signed area of `abc`; positive when `c` is left of `a -> b`.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn orient_tol(a: Point, b: Point, c: Point) -> f64 {
    1e-12 * ((b.x - a.x).abs() + (b.y - a.y).abs()) * ((c.x - a.x).abs() + (c.y - a.y).abs())
}

/// Sign-tolerant orientation: +1, -1 or 0 for (near) collinear.
fn orient_sign(a: Point, b: Point, c: Point) -> i8 {
    let o = orient(a, b, c);
    let tol = orient_tol(a, b, c);
    if o > tol {
        1
    } else if o < -tol {
        -1
    } else {
        0
    }
}

/// True when `d` lies strictly inside the circumcircle of the
/// counter-clockwise triangle `abc`.
pub fn in_circumcircle(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let t1 = ad * (bdx * cdy - cdx * bdy);
    let t2 = bd * (cdx * ady - adx * cdy);
    let t3 = cd * (adx * bdy - bdx * ady);
    let det = t1 + t2 + t3;
    let magnitude = ad * ((bdx * cdy).abs() + (cdx * bdy).abs())
        + bd * ((cdx * ady).abs() + (adx * cdy).abs())
        + cd * ((adx * bdy).abs() + (bdx * ady).abs());
    det > 1e-10 * magnitude
}

/// Delaunay triangulation of `points`.
///
/// Built by a lexicographic sweep (each new point is fanned to the hull
/// edges it sees) followed by Lawson edge flips until every interior edge
/// is locally Delaunay. Exact duplicates are triangulated once; cocircular
/// ties keep the sweep's diagonal, which is fixed by the (x, y, index)
/// ordering.
pub fn triangulate(points: &[Point]) -> Result<TriangleMesh, MorphError> {
    if points.len() < 3 {
        return Err(MorphError::Triangulation(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .x
            .total_cmp(&points[j].x)
            .then(points[i].y.total_cmp(&points[j].y))
            .then(i.cmp(&j))
    });
    order.dedup_by(|j, i| {
        let dup = points[*i] == points[*j];
        if dup {
            log::warn!("duplicate vertex {} ignored (same as {})", j, i);
        }
        dup
    });

    let p = |i: usize| points[i];

    // Collinear prefix.
    let first_off_line = (2..order.len())
        .find(|&k| orient_sign(p(order[0]), p(order[1]), p(order[k])) != 0)
        .ok_or_else(|| MorphError::Triangulation("all points are collinear".into()))?;
    // Points between order[1] and first_off_line are collinear with the first two.
    let chain = &order[..first_off_line];
    let apex = order[first_off_line];

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * points.len());
    let push_ccw = |tris: &mut Vec<[usize; 3]>, a: usize, b: usize, c: usize| {
        if orient(p(a), p(b), p(c)) > 0.0 {
            tris.push([a, b, c]);
        } else {
            tris.push([a, c, b]);
        }
    };
    for w in chain.windows(2) {
        push_ccw(&mut triangles, w[0], w[1], apex);
    }
    let mut hull: Vec<usize> = if orient(p(chain[0]), p(*chain.last().unwrap()), p(apex)) > 0.0 {
        chain.iter().copied().chain(std::iter::once(apex)).collect()
    } else {
        chain
            .iter()
            .rev()
            .copied()
            .chain(std::iter::once(apex))
            .collect()
    };

    for &v in &order[first_off_line + 1..] {
        let n = hull.len();
        let visible: Vec<bool> = (0..n)
            .map(|i| orient_sign(p(hull[i]), p(hull[(i + 1) % n]), p(v)) < 0)
            .collect();
        let Some(start) = (0..n).find(|&i| visible[i] && !visible[(i + n - 1) % n]) else {
            // Sorted insertion always sees at least one hull edge unless the
            // point duplicates a hull vertex within tolerance.
            log::warn!("vertex {v} sees no hull edge; skipped");
            continue;
        };
        let mut end = start;
        while visible[end % n] {
            let (a, b) = (hull[end % n], hull[(end + 1) % n]);
            triangles.push([b, a, v]);
            end += 1;
        }
        // Visible edges span hull[start] .. hull[end]; interior vertices drop out.
        let mut next = Vec::with_capacity(n + 1);
        let mut i = end % n;
        loop {
            next.push(hull[i]);
            if i == start {
                break;
            }
            i = (i + 1) % n;
        }
        next.push(v);
        hull = next;
    }

    legalize(points, &mut triangles);

    let before = triangles.len();
    triangles.retain(|&[a, b, c]| 0.5 * orient(p(a), p(b), p(c)) > MIN_TRIANGLE_AREA);
    if triangles.len() != before {
        log::warn!(
            "dropped {} degenerate triangle(s) with area <= {MIN_TRIANGLE_AREA}",
            before - triangles.len()
        );
    }
    Ok(TriangleMesh {
        vertices: points.to_vec(),
        triangles,
    })
}

/// Lawson flips until no interior edge has its opposite vertex strictly
/// inside a neighbouring circumcircle.
fn legalize(points: &[Point], triangles: &mut [[usize; 3]]) {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 3);
    for (t, tri) in triangles.iter().enumerate() {
        for e in 0..3 {
            edges.insert((tri[e], tri[(e + 1) % 3]), t);
        }
    }
    loop {
        let mut flipped = false;
        for t in 0..triangles.len() {
            for e in 0..3 {
                let tri = triangles[t];
                let (a, b, c) = (tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]);
                let Some(&u) = edges.get(&(b, a)) else {
                    continue;
                };
                let other = triangles[u];
                let d = other
                    .iter()
                    .copied()
                    .find(|&x| x != a && x != b)
                    .expect("neighbour has a third vertex");
                if !in_circumcircle(points[a], points[b], points[c], points[d]) {
                    continue;
                }
                for tri in [triangles[t], triangles[u]] {
                    for k in 0..3 {
                        edges.remove(&(tri[k], tri[(k + 1) % 3]));
                    }
                }
                triangles[t] = [a, d, c];
                triangles[u] = [d, b, c];
                for idx in [t, u] {
                    let tri = triangles[idx];
                    for k in 0..3 {
                        edges.insert((tri[k], tri[(k + 1) % 3]), idx);
                    }
                }
                flipped = true;
                break;
            }
        }
        if !flipped {
            break;
        }
    }
}

/// Counter-clockwise convex hull (monotone chain) without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &pt in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0.0
        {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &pt in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 0.0
        {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Inclusive point-in-convex-polygon test for a counter-clockwise hull.
pub fn hull_contains(hull: &[Point], q: Point) -> bool {
    let n = hull.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        orient(a, b, q) >= -1e-9 * ((b.x - a.x).abs() + (b.y - a.y).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn unit_square_gives_two_triangles() {
        let mesh = triangulate(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
        let total: f64 = (0..2).map(|t| mesh.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_with_center_fans_around_center() {
        let mesh = triangulate(&pts(&[
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 2.0),
            (0.0, 2.0),
            (1.0, 1.0),
        ]))
        .unwrap();
        assert_eq!(mesh.triangles.len(), 4);
        assert!(mesh.triangles.iter().all(|t| t.contains(&4)));
    }

    #[test]
    fn collinear_input_is_rejected() {
        let err = triangulate(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 5.0)]));
        assert!(matches!(err, Err(MorphError::Triangulation(_))));
        assert!(triangulate(&pts(&[(0.0, 0.0), (1.0, 1.0)])).is_err());
    }

    #[test]
    fn collinear_boundary_points_are_kept() {
        // Frame corners, edge midpoints and an interior point.
        let mesh = triangulate(&pts(&[
            (0.0, 0.0),
            (4.0, 0.0),
            (8.0, 0.0),
            (8.0, 4.0),
            (8.0, 8.0),
            (4.0, 8.0),
            (0.0, 8.0),
            (0.0, 4.0),
            (3.0, 5.0),
        ]))
        .unwrap();
        let total: f64 = (0..mesh.triangles.len()).map(|t| mesh.area(t)).sum();
        assert!((total - 64.0).abs() < 1e-9);
        assert_eq!(mesh.triangles.len(), 2 * 9 - 8 - 2);
        for t in 0..mesh.triangles.len() {
            assert!(mesh.area(t) > MIN_TRIANGLE_AREA);
        }
    }

    #[test]
    fn duplicates_are_ignored() {
        let mesh = triangulate(&pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 0.0)])).unwrap();
        assert_eq!(mesh.triangles.len(), 1);
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let hull = convex_hull(&pts(&[
            (0.0, 0.0),
            (2.0, 0.0),
            (1.0, 1.0),
            (2.0, 2.0),
            (0.0, 2.0),
        ]));
        assert_eq!(hull.len(), 4);
        assert!(hull_contains(&hull, Point::new(1.0, 1.0)));
        assert!(hull_contains(&hull, Point::new(2.0, 1.0)));
        assert!(!hull_contains(&hull, Point::new(2.1, 1.0)));
    }
}
