//! Binary-image primitives: thresholding, neighborhoods, component labeling,
//! distance transform and Zhang-Suen thinning.

use std::collections::VecDeque;
use std::fmt;

use crate::ingest::{Image, PIXELS, SIDE};

const S: isize = SIDE as isize;

/// Ring offsets `(drow, dcol)` around a pixel, clockwise from north:
/// N, NE, E, SE, S, SW, W, NW.
pub const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &RING,
        }
    }
}

/// 28x28 foreground mask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage(pub [bool; PIXELS]);

impl BinaryImage {
    pub fn empty() -> Self {
        BinaryImage([false; PIXELS])
    }

    pub fn from_points(points: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut out = BinaryImage::empty();
        for (r, c) in points {
            out.set(r, c, true);
        }
        out
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.0[row * SIDE + col]
    }

    /// Out-of-frame reads as background.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> bool {
        (0..S).contains(&row) && (0..S).contains(&col) && self.0[row as usize * SIDE + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.0[row * SIDE + col] = value;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / SIDE, i % SIDE))
    }

    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(&a, &b)| !a || b)
    }

    pub fn union(&self, other: &BinaryImage) -> BinaryImage {
        let mut out = self.clone();
        for (o, &b) in out.0.iter_mut().zip(other.0.iter()) {
            *o |= b;
        }
        out
    }

    pub fn intersects(&self, other: &BinaryImage) -> bool {
        self.0.iter().zip(other.0.iter()).any(|(&a, &b)| a && b)
    }

    /// The 8 ring neighbors, clockwise from north.
    #[inline]
    pub fn ring(&self, row: usize, col: usize) -> [bool; 8] {
        let (r, c) = (row as isize, col as isize);
        RING.map(|(dr, dc)| self.get_signed(r + dr, c + dc))
    }

    /// Number of 8-neighbors in the foreground.
    #[inline]
    pub fn degree(&self, row: usize, col: usize) -> usize {
        self.ring(row, col).iter().filter(|&&b| b).count()
    }

    /// Grows every foreground pixel into its 3x3 neighborhood.
    pub fn dilate(&self) -> BinaryImage {
        let mut out = self.clone();
        for (r, c) in self.points() {
            for (dr, dc) in RING {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                if (0..S).contains(&rr) && (0..S).contains(&cc) {
                    out.set(rr as usize, cc as usize, true);
                }
            }
        }
        out
    }

    /// Foreground pixels with at least one 4-neighbor in the background
    /// (the frame counts as background).
    pub fn contour(&self) -> BinaryImage {
        let mut out = BinaryImage::empty();
        for (r, c) in self.points() {
            let (ri, ci) = (r as isize, c as isize);
            let inner = Connectivity::Four
                .offsets()
                .iter()
                .all(|(dr, dc)| self.get_signed(ri + dr, ci + dc));
            if !inner {
                out.set(r, c, true);
            }
        }
        out
    }

    pub fn to_image(&self) -> Image {
        let mut img = Image::zeros();
        for (o, &b) in img.0.iter_mut().zip(self.0.iter()) {
            *o = if b { 255 } else { 0 };
        }
        img
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryImage(")?;
        for r in 0..SIDE {
            let row: String = (0..SIDE).map(|c| if self.get(r, c) { '#' } else { '.' }).collect();
            writeln!(f, "  {row}")?;
        }
        write!(f, ")")
    }
}

/// Pixel is foreground iff its intensity is at least `threshold`.
pub fn binarize(image: &Image, threshold: u8) -> BinaryImage {
    BinaryImage(image.0.map(|p| p >= threshold))
}

/// Labels connected components of the pixels where `mask` equals `value`.
///
/// Returns one label per pixel (`None` outside the selected set) and the
/// component count. Labels follow raster order of each component's first
/// pixel.
pub fn label_components(
    mask: &BinaryImage,
    value: bool,
    connectivity: Connectivity,
) -> (Vec<Option<usize>>, usize) {
    let mut labels = vec![None; PIXELS];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..PIXELS {
        if mask.0[start] != value || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (r, c) = ((i / SIDE) as isize, (i % SIDE) as isize);
            for (dr, dc) in connectivity.offsets() {
                let (rr, cc) = (r + dr, c + dc);
                if !(0..S).contains(&rr) || !(0..S).contains(&cc) {
                    continue;
                }
                let j = rr as usize * SIDE + cc as usize;
                if mask.0[j] == value && labels[j].is_none() {
                    labels[j] = Some(next);
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    (labels, next)
}

/// Splits the foreground into one mask per component.
pub fn components(mask: &BinaryImage, connectivity: Connectivity) -> Vec<BinaryImage> {
    let (labels, count) = label_components(mask, true, connectivity);
    let mut out = vec![BinaryImage::empty(); count];
    for (i, label) in labels.iter().enumerate() {
        if let Some(l) = label {
            out[*l].0[i] = true;
        }
    }
    out
}

/// Background holes: background pixels whose 4-connected background
/// component never touches the frame.
pub fn enclosed_regions(mask: &BinaryImage) -> BinaryImage {
    let (labels, count) = label_components(mask, false, Connectivity::Four);
    let mut touches_border = vec![false; count];
    for r in 0..SIDE {
        for c in 0..SIDE {
            if r == 0 || c == 0 || r == SIDE - 1 || c == SIDE - 1 {
                if let Some(l) = labels[r * SIDE + c] {
                    touches_border[l] = true;
                }
            }
        }
    }
    let mut out = BinaryImage::empty();
    for (i, label) in labels.iter().enumerate() {
        if let Some(l) = label {
            out.0[i] = !touches_border[*l];
        }
    }
    out
}

/// Two-pass 3-4 chamfer distance from each foreground pixel to the nearest
/// background pixel (the frame is background), in units of one pixel step.
pub fn distance_transform(mask: &BinaryImage) -> Vec<f64> {
    const INF: u32 = u32::MAX / 4;
    let mut d = vec![INF; PIXELS];
    for (i, &fg) in mask.0.iter().enumerate() {
        if !fg {
            d[i] = 0;
        }
    }
    let at = |d: &[u32], r: isize, c: isize| -> u32 {
        if (0..S).contains(&r) && (0..S).contains(&c) {
            d[r as usize * SIDE + c as usize]
        } else {
            0
        }
    };
    for r in 0..S {
        for c in 0..S {
            let i = r as usize * SIDE + c as usize;
            if d[i] == 0 {
                continue;
            }
            let best = [
                at(&d, r - 1, c) + 3,
                at(&d, r, c - 1) + 3,
                at(&d, r - 1, c - 1) + 4,
                at(&d, r - 1, c + 1) + 4,
            ]
            .into_iter()
            .min()
            .unwrap();
            d[i] = d[i].min(best);
        }
    }
    for r in (0..S).rev() {
        for c in (0..S).rev() {
            let i = r as usize * SIDE + c as usize;
            if d[i] == 0 {
                continue;
            }
            let best = [
                at(&d, r + 1, c) + 3,
                at(&d, r, c + 1) + 3,
                at(&d, r + 1, c + 1) + 4,
                at(&d, r + 1, c - 1) + 4,
            ]
            .into_iter()
            .min()
            .unwrap();
            d[i] = d[i].min(best);
        }
    }
    d.into_iter().map(|v| v as f64 / 3.0).collect()
}

/// Count of background-to-foreground transitions around the ring.
#[inline]
fn transitions(ring: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !ring[i] && ring[(i + 1) % 8]).count()
}

/// Whether removing the pixel keeps the local topology (8-connected
/// foreground, 4-connected background) unchanged.
pub fn is_simple(mask: &BinaryImage, row: usize, col: usize) -> bool {
    let ring = mask.ring(row, col);

    // Foreground components among ring cells under 8-adjacency: consecutive
    // ring cells touch, and so do two edge neighbors around a corner.
    let mut parent: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
    fn find(p: &mut [usize; 8], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let join = |p: &mut [usize; 8], a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for i in 0..8 {
        let j = (i + 1) % 8;
        if ring[i] && ring[j] {
            join(&mut parent, i, j);
        }
    }
    for i in [0, 2, 4, 6] {
        let j = (i + 2) % 8;
        if ring[i] && ring[j] {
            join(&mut parent, i, j);
        }
    }
    let mut roots = [false; 8];
    for i in 0..8 {
        if ring[i] {
            roots[find(&mut parent, i)] = true;
        }
    }
    let fg_components = roots.iter().filter(|&&b| b).count();
    if fg_components != 1 {
        return false;
    }

    // Background components (4-adjacency, through the ring) that touch an
    // edge neighbor of the center.
    let mut seen = [false; 8];
    let mut bg_components = 0;
    for start in [0, 2, 4, 6] {
        if ring[start] || seen[start] {
            continue;
        }
        bg_components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in [(i + 1) % 8, (i + 7) % 8] {
                if !ring[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    bg_components == 1
}

fn has_full_block(mask: &BinaryImage, row: usize, col: usize) -> bool {
    let (r, c) = (row as isize, col as isize);
    [(-1, -1), (-1, 0), (0, -1), (0, 0)].iter().any(|(dr, dc)| {
        let (r0, c0) = (r + dr, c + dc);
        mask.get_signed(r0, c0)
            && mask.get_signed(r0 + 1, c0)
            && mask.get_signed(r0, c0 + 1)
            && mask.get_signed(r0 + 1, c0 + 1)
    })
}

/// Whether the pixel sits in a fully set 2x2 window.
pub fn in_full_block(mask: &BinaryImage, row: usize, col: usize) -> bool {
    mask.get(row, col) && has_full_block(mask, row, col)
}

/// Zhang-Suen thinning.
///
/// Each sub-iteration marks candidates on a snapshot as in the classic
/// algorithm, then commits them in raster order, skipping any pixel that is
/// no longer simple. Plain parallel deletion erases 2x2 squares outright;
/// the sequential commit keeps every component alive. A final pass removes
/// simple non-end pixels left inside solid 2x2 windows.
pub fn skeletonize(mask: &BinaryImage) -> BinaryImage {
    let mut img = mask.clone();
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut marked = Vec::new();
            for (r, c) in img.points() {
                let ring = img.ring(r, c);
                let b = ring.iter().filter(|&&x| x).count();
                if !(2..=6).contains(&b) || transitions(&ring) != 1 {
                    continue;
                }
                // ring indices: N=0 (P2), E=2 (P4), S=4 (P6), W=6 (P8)
                let (n, e, s, w) = (ring[0], ring[2], ring[4], ring[6]);
                let ok = if step == 0 {
                    !(n && e && s) && !(e && s && w)
                } else {
                    !(n && e && w) && !(n && s && w)
                };
                if ok {
                    marked.push((r, c));
                }
            }
            for (r, c) in marked {
                if img.degree(r, c) >= 2 && is_simple(&img, r, c) {
                    img.set(r, c, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    loop {
        let mut changed = false;
        for i in 0..PIXELS {
            let (r, c) = (i / SIDE, i % SIDE);
            if in_full_block(&img, r, c) && img.degree(r, c) >= 2 && is_simple(&img, r, c) {
                img.set(r, c, false);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    img
}

/// Skeleton pixels with exactly one 8-neighbor.
pub fn endpoints(skeleton: &BinaryImage) -> BinaryImage {
    BinaryImage::from_points(skeleton.points().filter(|&(r, c)| skeleton.degree(r, c) == 1))
}

/// Skeleton pixels with three or more 8-neighbors.
pub fn crossings(skeleton: &BinaryImage) -> BinaryImage {
    BinaryImage::from_points(skeleton.points().filter(|&(r, c)| skeleton.degree(r, c) >= 3))
}
