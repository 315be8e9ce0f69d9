//! Geometric property detectors: convex hull outline, circle and ellipse
//! fits, straight skeleton segments.

use std::collections::HashSet;

use crate::ingest::SIDE;

use super::binary::{BinaryImage, RING};

pub type Point = (i64, i64);

fn cross(o: Point, a: Point, b: Point) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain. Points are `(x, y)`; the hull comes back
/// counter-clockwise without collinear vertices. Fewer than three distinct
/// points are returned as-is (sorted, deduplicated).
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Bresenham segment, both ends inclusive.
pub fn raster_line(a: Point, b: Point) -> Vec<Point> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::new();
    loop {
        out.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

/// Outline of the convex hull of the foreground.
pub fn hull_outline(mask: &BinaryImage) -> BinaryImage {
    let points: Vec<Point> = mask.points().map(|(r, c)| (c as i64, r as i64)).collect();
    let hull = convex_hull(&points);
    let mut out = BinaryImage::empty();
    match hull.len() {
        0 => {}
        1 => out.set(hull[0].1 as usize, hull[0].0 as usize, true),
        n => {
            for i in 0..n {
                for (x, y) in raster_line(hull[i], hull[(i + 1) % n]) {
                    out.set(y as usize, x as usize, true);
                }
            }
        }
    }
    out
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let tail: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn least_squares<const N: usize>(rows: impl Iterator<Item = ([f64; N], f64)>) -> Option<[f64; N]> {
    let mut ata = [[0.0; N]; N];
    let mut atb = [0.0; N];
    for (row, rhs) in rows {
        for i in 0..N {
            atb[i] += row[i] * rhs;
            for j in 0..N {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    solve(ata, atb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: (f64, f64),
    pub radius: f64,
    /// Mean absolute distance of the points from the circle.
    pub mean_error: f64,
}

/// Algebraic (Kasa) least-squares circle through `(x, y)` points.
pub fn fit_circle(points: &[(f64, f64)]) -> Option<CircleFit> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    // x^2 + y^2 + D x + E y + F = 0 in mean-centered coordinates
    let [d, e, f] = least_squares(points.iter().map(|&(x, y)| {
        let (u, v) = (x - mx, y - my);
        ([u, v, 1.0], -(u * u + v * v))
    }))?;
    let (cu, cv) = (-d / 2.0, -e / 2.0);
    let r2 = cu * cu + cv * cv - f;
    if r2.is_nan() || r2 <= 0.0 {
        return None;
    }
    let radius = r2.sqrt();
    let center = (cu + mx, cv + my);
    let mean_error = points
        .iter()
        .map(|&(x, y)| ((x - center.0).hypot(y - center.1) - radius).abs())
        .sum::<f64>()
        / n;
    Some(CircleFit {
        center,
        radius,
        mean_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseFit {
    pub center: (f64, f64),
    pub semi_major: f64,
    pub semi_minor: f64,
    pub eccentricity: f64,
    /// Mean radial distance (along the ray from the center) of the points
    /// from the ellipse.
    pub mean_error: f64,
}

/// Least-squares conic `A x^2 + B xy + C y^2 + D x + E y + F = 0` under the
/// rotation-invariant normalization `A + C = 1`; `None` unless the conic is a
/// real ellipse.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Option<EllipseFit> {
    if points.len() < 5 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let [a, b, d, e, f] = least_squares(points.iter().map(|&(x, y)| {
        let (u, v) = (x - mx, y - my);
        ([u * u - v * v, u * v, u, v, 1.0], -(v * v))
    }))?;
    let c = 1.0 - a;
    if b * b - 4.0 * a * c >= 0.0 {
        return None;
    }
    let [u0, v0] = solve([[2.0 * a, b], [b, 2.0 * c]], [-d, -e])?;
    let f0 = f + (d * u0 + e * v0) / 2.0;

    // eigen-decomposition of [[a, b/2], [b/2, c]]
    let mean = (a + c) / 2.0;
    let spread = (((a - c) / 2.0).powi(2) + (b / 2.0).powi(2)).sqrt();
    let (l1, l2) = (mean - spread, mean + spread);
    let theta = 0.5 * b.atan2(a - c);
    // axis for l2 is along theta, axis for l1 is perpendicular
    let (ax2, ax1) = (-f0 / l2, -f0 / l1);
    if !(ax1 > 0.0 && ax2 > 0.0) {
        return None;
    }
    let (r1, r2) = (ax1.sqrt(), ax2.sqrt());
    let (semi_major, semi_minor) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    let eccentricity = (1.0 - (semi_minor / semi_major).powi(2)).max(0.0).sqrt();

    let (cos, sin) = (theta.cos(), theta.sin());
    let mean_error = points
        .iter()
        .map(|&(x, y)| {
            let (du, dv) = (x - mx - u0, y - my - v0);
            let along2 = du * cos + dv * sin;
            let along1 = -du * sin + dv * cos;
            let dist = du.hypot(dv);
            let rho = ((along2 / r2).powi(2) + (along1 / r1).powi(2)).sqrt();
            if rho == 0.0 {
                semi_minor
            } else {
                (dist - dist / rho).abs()
            }
        })
        .sum::<f64>()
        / n;
    Some(EllipseFit {
        center: (u0 + mx, v0 + my),
        semi_major,
        semi_minor,
        eccentricity,
        mean_error,
    })
}

/// Chains of skeleton pixels between nodes (pixels whose degree is not 2),
/// plus closed loops. Points are `(row, col)`.
pub fn skeleton_chains(skeleton: &BinaryImage) -> Vec<Vec<(usize, usize)>> {
    let idx = |r: usize, c: usize| r * SIDE + c;
    let neighbors = |r: usize, c: usize| -> Vec<(usize, usize)> {
        RING.iter()
            .filter_map(|(dr, dc)| {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                skeleton.get_signed(rr, cc).then_some((rr as usize, cc as usize))
            })
            .collect()
    };
    let edge = |a: (usize, usize), b: (usize, usize)| {
        let (i, j) = (idx(a.0, a.1), idx(b.0, b.1));
        (i.min(j), i.max(j))
    };

    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut chains = Vec::new();
    let is_node = |r: usize, c: usize| skeleton.degree(r, c) != 2;

    let starts: Vec<(usize, usize)> = skeleton
        .points()
        .filter(|&(r, c)| is_node(r, c))
        .chain(skeleton.points().filter(|&(r, c)| !is_node(r, c)))
        .collect();

    for start in starts {
        for first in neighbors(start.0, start.1) {
            if used.contains(&edge(start, first)) {
                continue;
            }
            used.insert(edge(start, first));
            let mut path = vec![start, first];
            let (mut prev, mut cur) = (start, first);
            while !is_node(cur.0, cur.1) && cur != start {
                let next = neighbors(cur.0, cur.1)
                    .into_iter()
                    .find(|&n| n != prev && !used.contains(&edge(cur, n)));
                match next {
                    Some(n) => {
                        used.insert(edge(cur, n));
                        path.push(n);
                        prev = cur;
                        cur = n;
                    }
                    None => break,
                }
            }
            chains.push(path);
        }
    }
    for (r, c) in skeleton.points() {
        if skeleton.degree(r, c) == 0 {
            chains.push(vec![(r, c)]);
        }
    }
    chains
}

fn max_deviation(points: &[(usize, usize)]) -> (f64, usize) {
    let (a, b) = (points[0], points[points.len() - 1]);
    let (ax, ay, bx, by) = (a.1 as f64, a.0 as f64, b.1 as f64, b.0 as f64);
    let len = (bx - ax).hypot(by - ay);
    let mut worst = (0.0, 0);
    for (i, p) in points.iter().enumerate() {
        let (px, py) = (p.1 as f64, p.0 as f64);
        let d = if len == 0.0 {
            (px - ax).hypot(py - ay)
        } else {
            ((bx - ax) * (ay - py) - (ax - px) * (by - ay)).abs() / len
        };
        if d > worst.0 {
            worst = (d, i);
        }
    }
    worst
}

fn split_segments(points: &[(usize, usize)], max_dev: f64, out: &mut Vec<Vec<(usize, usize)>>) {
    if points.len() < 2 {
        out.push(points.to_vec());
        return;
    }
    let (dev, at) = max_deviation(points);
    if dev <= max_dev || at == 0 || at == points.len() - 1 {
        out.push(points.to_vec());
        return;
    }
    split_segments(&points[..=at], max_dev, out);
    split_segments(&points[at..], max_dev, out);
}

/// Pixels on straight runs of the skeleton: each chain is split at its point
/// of largest deviation until every piece stays within `max_deviation` of
/// the chord; pieces with at least `min_length` pixels are kept.
pub fn line_segments(skeleton: &BinaryImage, max_deviation: f64, min_length: usize) -> BinaryImage {
    let mut pieces = Vec::new();
    for chain in skeleton_chains(skeleton) {
        split_segments(&chain, max_deviation, &mut pieces);
    }
    BinaryImage::from_points(
        pieces
            .into_iter()
            .filter(|p| p.len() >= min_length)
            .flatten(),
    )
}
