//! Pixel grids mapped onto the unit square, and the pixel sets `S_T` of
//! triangles.
//!
//! Pixel `(col, row)` has its center at `((col + 1/2) / W, 1 - (row + 1/2) / H)`:
//! row 0 is the top of the image and `y` points up.
//!
//! Pixels lying on a shared boundary are assigned to exactly one triangle:
//! among the roots, to the one with the smallest id; when a triangle is
//! bisected, pixels on the cut go to the first (smaller id) child. Pixel sets
//! of the leaves of any bisection tree therefore partition the grid.

use crate::geometry::{Edge, Point2, Triangle};

/// Grayscale image with intensities in `[0, 1]`, row-major from the top row.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// Indices (`row * width + col`) of pixels assigned to one triangle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PixelSet {
    pub indices: Vec<u32>,
}

impl PixelSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

const CONTAINMENT_TOL: f64 = 1e-12;

impl PixelGrid {
    /// Panics if `data.len() != width * height`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> PixelGrid {
        assert_eq!(data.len(), width * height, "pixel buffer size mismatch");
        assert!(width > 0 && height > 0);
        PixelGrid {
            width,
            height,
            data,
        }
    }

    pub fn from_fn<F: Fn(usize, usize) -> f64>(width: usize, height: usize, f: F) -> PixelGrid {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        PixelGrid::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn value(&self, index: u32) -> f64 {
        self.data[index as usize]
    }

    pub fn center(&self, index: u32) -> Point2 {
        let col = index as usize % self.width;
        let row = index as usize / self.width;
        self.center_of(col, row)
    }

    pub fn center_of(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            (col as f64 + 0.5) / self.width as f64,
            1.0 - (row as f64 + 0.5) / self.height as f64,
        )
    }

    /// Intensity of the pixel containing `p` (clamped to the grid).
    pub fn sample_nearest(&self, p: Point2) -> f64 {
        let col = ((p.x * self.width as f64).floor().max(0.0) as usize).min(self.width - 1);
        let row =
            (((1.0 - p.y) * self.height as f64).floor().max(0.0) as usize).min(self.height - 1);
        self.data[row * self.width + col]
    }

    /// Intensity if `p` is (within rounding) a pixel center.
    pub fn value_at_center(&self, p: Point2) -> Option<f64> {
        let cx = p.x * self.width as f64 - 0.5;
        let cy = (1.0 - p.y) * self.height as f64 - 0.5;
        let (col, row) = (cx.round(), cy.round());
        if (cx - col).abs() > 1e-9 || (cy - row).abs() > 1e-9 {
            return None;
        }
        if col < 0.0 || row < 0.0 || col as usize >= self.width || row as usize >= self.height {
            return None;
        }
        Some(self.data[row as usize * self.width + col as usize])
    }

    /// All pixels whose centers lie in the closed triangle.
    pub fn pixels_in(&self, t: &Triangle) -> PixelSet {
        let [a, b, c] = t.vertices;
        let (w, h) = (self.width as f64, self.height as f64);
        let xmin = a.x.min(b.x).min(c.x);
        let xmax = a.x.max(b.x).max(c.x);
        let ymin = a.y.min(b.y).min(c.y);
        let ymax = a.y.max(b.y).max(c.y);
        let col0 = ((xmin * w - 0.5).floor().max(0.0)) as usize;
        let col1 = ((xmax * w - 0.5).ceil().max(0.0) as usize).min(self.width - 1);
        let row0 = (((1.0 - ymax) * h - 0.5).floor().max(0.0)) as usize;
        let row1 = ((((1.0 - ymin) * h - 0.5).ceil()).max(0.0) as usize).min(self.height - 1);
        let mut indices = Vec::new();
        if col0 > col1 || row0 > row1 {
            return PixelSet { indices };
        }
        for row in row0..=row1 {
            for col in col0..=col1 {
                if t.contains(self.center_of(col, row), CONTAINMENT_TOL) {
                    indices.push((row * self.width + col) as u32);
                }
            }
        }
        PixelSet { indices }
    }

    /// Pixel sets of a partition of the unit square; a pixel on a shared
    /// boundary goes to the root with the smallest id.
    pub fn partition(&self, roots: &[Triangle]) -> Vec<PixelSet> {
        let mut order: Vec<usize> = (0..roots.len()).collect();
        order.sort_by_key(|&i| roots[i].id);
        let mut owner = vec![u32::MAX; self.data.len()];
        for &i in &order {
            for idx in self.pixels_in(&roots[i]).indices {
                if owner[idx as usize] == u32::MAX {
                    owner[idx as usize] = i as u32;
                }
            }
        }
        let mut sets = vec![PixelSet::default(); roots.len()];
        for (idx, &o) in owner.iter().enumerate() {
            if o != u32::MAX {
                sets[o as usize].indices.push(idx as u32);
            }
        }
        sets
    }

    /// Splits the pixel set of `parent` consistently with
    /// [`Triangle::bisect`]: pixels on the cut go to the first child.
    pub fn split(&self, set: &PixelSet, parent: &Triangle, edge: Edge) -> [PixelSet; 2] {
        let [first, _] = parent.bisect(edge);
        let apex = first.vertices[0];
        let mid = first.vertices[1];
        let cut = mid - apex;
        let side = cut.cross(first.vertices[2] - apex).signum();
        let tol = CONTAINMENT_TOL * cut.norm();
        let mut a = Vec::with_capacity(set.len() / 2 + 1);
        let mut b = Vec::with_capacity(set.len() / 2 + 1);
        for &idx in &set.indices {
            let s = cut.cross(self.center(idx) - apex);
            if s.abs() <= tol || s.signum() == side {
                a.push(idx);
            } else {
                b.push(idx);
            }
        }
        [PixelSet { indices: a }, PixelSet { indices: b }]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_halves() -> [Triangle; 2] {
        let p = |x, y| Point2::new(x, y);
        [
            Triangle::root(0, p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)).unwrap(),
            Triangle::root(1, p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)).unwrap(),
        ]
    }

    #[test]
    fn lower_half_of_2x2_grid() {
        let g = PixelGrid::new(2, 2, vec![0.0; 4]);
        let lower = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        )
        .unwrap();
        let mut s = g.pixels_in(&lower).indices;
        s.sort();
        // centers 1 = (0.75, 0.75) and 2 = (0.25, 0.25) lie on the diagonal,
        // 3 = (0.75, 0.25) is strictly below it
        assert_eq!(s, vec![1, 2, 3]);
        let parts = g.partition(&square_halves());
        assert_eq!(parts[0].indices, vec![1, 2, 3]);
        assert_eq!(parts[1].indices, vec![0]);
    }

    #[test]
    fn tiny_triangle_has_no_pixels() {
        let g = PixelGrid::new(4, 4, vec![0.0; 16]);
        let t = Triangle::new(
            Point2::new(0.01, 0.01),
            Point2::new(0.05, 0.01),
            Point2::new(0.01, 0.05),
        )
        .unwrap();
        assert!(g.pixels_in(&t).is_empty());
    }

    #[test]
    fn splits_partition_the_grid() {
        let g = PixelGrid::new(17, 13, vec![0.0; 17 * 13]);
        let roots = square_halves();
        let mut sets: Vec<(Triangle, PixelSet)> =
            roots.iter().copied().zip(g.partition(&roots)).collect();
        for step in 0..40 {
            let i = step * 7 % sets.len();
            let (t, s) = sets.swap_remove(i);
            let e = Edge::ALL[step % 3];
            let children = t.bisect(e);
            let [s1, s2] = g.split(&s, &t, e);
            sets.push((children[0], s1));
            sets.push((children[1], s2));
        }
        let mut all: Vec<u32> = sets.iter().flat_map(|(_, s)| s.indices.clone()).collect();
        all.sort();
        let expected: Vec<u32> = (0..(17 * 13) as u32).collect();
        assert_eq!(all, expected);
        for (t, s) in &sets {
            for &i in &s.indices {
                assert!(t.contains(g.center(i), 1e-9));
            }
        }
    }

    #[test]
    fn center_lookup() {
        let g = PixelGrid::from_fn(3, 2, |c, r| (r * 3 + c) as f64);
        assert_eq!(g.value_at_center(g.center_of(2, 1)), Some(5.0));
        assert_eq!(g.value_at_center(Point2::new(0.1, 0.1)), None);
        assert_eq!(g.sample_nearest(Point2::new(0.1, 0.9)), 0.0);
    }
}
