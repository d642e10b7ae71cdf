//! Uniform bucket grid for range queries over a static point set.

use crate::geometry::{BoundingBox, Point};

#[derive(Debug, Clone)]
pub struct GridIndex {
    x0: f64,
    y0: f64,
    inv_cell: f64,
    nx: usize,
    ny: usize,
    // CSR layout: items of cell c are items[start[c]..start[c + 1]]
    start: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    /// Buckets `points` over `bbox` with roughly `per_cell` points per cell.
    pub fn new(points: &[Point], bbox: BoundingBox, per_cell: f64) -> Self {
        let n = points.len().max(1) as f64;
        let area = bbox.area().max(f64::MIN_POSITIVE);
        let mut cell = (area * per_cell / n).sqrt();
        if !(cell.is_finite() && cell > 0.0) {
            cell = 1.0;
        }
        let w = (bbox.x1 - bbox.x0).max(0.0);
        let h = (bbox.y1 - bbox.y0).max(0.0);
        // cap the table so degenerate boxes cannot blow up memory
        let cap = 4.0 * n + 16.0;
        while (w / cell).ceil().max(1.0) * (h / cell).ceil().max(1.0) > cap {
            cell *= 2.0;
        }
        let nx = ((w / cell).ceil() as usize).max(1);
        let ny = ((h / cell).ceil() as usize).max(1);
        let mut grid = Self {
            x0: bbox.x0,
            y0: bbox.y0,
            inv_cell: 1.0 / cell,
            nx,
            ny,
            start: vec![0; nx * ny + 1],
            items: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|&p| grid.cell_of(p)).collect();
        for &c in &cells {
            grid.start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.start[c + 1] += grid.start[c];
        }
        let mut fill = grid.start.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    fn clamp_ix(&self, x: f64) -> usize {
        let i = ((x - self.x0) * self.inv_cell).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.nx - 1)
        }
    }

    fn clamp_iy(&self, y: f64) -> usize {
        let j = ((y - self.y0) * self.inv_cell).floor();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.ny - 1)
        }
    }

    fn cell_of(&self, p: Point) -> usize {
        self.clamp_iy(p.y) * self.nx + self.clamp_ix(p.x)
    }

    /// Visits every indexed point whose cell overlaps the query box.
    ///
    /// Callers apply the exact membership test themselves.
    pub fn for_each_near<F: FnMut(u32)>(&self, x0: f64, y0: f64, x1: f64, y1: f64, mut f: F) {
        let (i0, i1) = (self.clamp_ix(x0), self.clamp_ix(x1));
        let (j0, j1) = (self.clamp_iy(y0), self.clamp_iy(y1));
        for j in j0..=j1 {
            let row = j * self.nx;
            for c in row + i0..=row + i1 {
                for &item in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                    f(item);
                }
            }
        }
    }

    /// Early-exit variant: stops as soon as `f` returns `true`.
    pub fn any_near<F: FnMut(u32) -> bool>(&self, x0: f64, y0: f64, x1: f64, y1: f64, mut f: F) -> bool {
        let (i0, i1) = (self.clamp_ix(x0), self.clamp_ix(x1));
        let (j0, j1) = (self.clamp_iy(y0), self.clamp_iy(y1));
        for j in j0..=j1 {
            let row = j * self.nx;
            for c in row + i0..=row + i1 {
                for &item in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                    if f(item) {
                        return true;
                    }
                }
            }
        }
        false
    }
}
