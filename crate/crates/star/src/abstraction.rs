//! Set-based goal abstraction: a partition of the free cells into
//! axis-aligned rectangles.

use crate::error::{Error, Result};
use crate::maze::{Cell, GridMaze};

/// Inclusive cell rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.x0..=self.x1).contains(&c.x) && (self.y0..=self.y1).contains(&c.y)
    }

    pub fn lo(&self, dim: usize) -> usize {
        if dim == 0 {
            self.x0
        } else {
            self.y0
        }
    }

    pub fn hi(&self, dim: usize) -> usize {
        if dim == 0 {
            self.x1
        } else {
            self.y1
        }
    }

    /// Splits into cells with coordinate `< threshold` along `dim` and the
    /// rest. `threshold` must lie in `lo+1..=hi`.
    pub fn cut(&self, dim: usize, threshold: usize) -> (Rect, Rect) {
        let (mut a, mut b) = (*self, *self);
        if dim == 0 {
            a.x1 = threshold - 1;
            b.x0 = threshold;
        } else {
            a.y1 = threshold - 1;
            b.y0 = threshold;
        }
        (a, b)
    }

    fn overlaps(&self, o: &Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Abstraction {
    regions: Vec<Rect>,
    /// Region of each free cell, by dense cell index.
    membership: Vec<usize>,
    cells: Vec<Vec<Cell>>,
}

impl Abstraction {
    /// Checks that `regions` are disjoint and cover every free cell with no
    /// empty region.
    pub fn new(maze: &GridMaze, regions: Vec<Rect>) -> Result<Self> {
        for (i, r) in regions.iter().enumerate() {
            if r.x0 > r.x1 || r.y0 > r.y1 || r.x1 >= maze.width() || r.y1 >= maze.height() {
                return Err(Error::InvalidAbstraction(format!("region {i} lies outside the grid")));
            }
            if let Some(j) = regions[..i].iter().position(|o| o.overlaps(r)) {
                return Err(Error::InvalidAbstraction(format!("regions {j} and {i} overlap")));
            }
        }
        let mut membership = vec![usize::MAX; maze.num_free()];
        let mut cells = vec![Vec::new(); regions.len()];
        for (k, &c) in maze.free_cells().iter().enumerate() {
            let i = regions
                .iter()
                .position(|r| r.contains(c))
                .ok_or_else(|| Error::InvalidAbstraction(format!("cell {c} is in no region")))?;
            membership[k] = i;
            cells[i].push(c);
        }
        if let Some(i) = cells.iter().position(Vec::is_empty) {
            return Err(Error::InvalidAbstraction(format!("region {i} holds no free cell")));
        }
        Ok(Self {
            regions,
            membership,
            cells,
        })
    }

    /// Blocks of `block`×`block` cells from the top-left corner, keeping those
    /// with free cells.
    pub fn tiled(maze: &GridMaze, block: usize) -> Result<Self> {
        if block == 0 {
            return Err(Error::InvalidAbstraction("block size must be positive".into()));
        }
        let mut rects = Vec::new();
        for y0 in (0..maze.height()).step_by(block) {
            for x0 in (0..maze.width()).step_by(block) {
                let r = Rect::new(
                    x0,
                    y0,
                    (x0 + block - 1).min(maze.width() - 1),
                    (y0 + block - 1).min(maze.height() - 1),
                );
                if maze.free_cells().iter().any(|&c| r.contains(c)) {
                    rects.push(r);
                }
            }
        }
        Self::new(maze, rects)
    }

    /// Cuts the region holding `cell` until `cell` is alone in its region.
    pub fn isolate(&mut self, maze: &GridMaze, cell: Cell) -> Result<()> {
        for dim in 0..2 {
            for side in 0..2 {
                let r = self.region_of(maze, cell);
                let rect = self.regions[r];
                let threshold = if side == 0 { cell.coord(dim) } else { cell.coord(dim) + 1 };
                if threshold > rect.lo(dim) && threshold <= rect.hi(dim) {
                    let (a, b) = rect.cut(dim, threshold);
                    let has = |q: Rect| self.cells[r].iter().any(|&c| q.contains(c));
                    if has(a) && has(b) {
                        self.split(maze, r, dim, threshold)?;
                    } else {
                        self.regions[r] = if a.contains(cell) { a } else { b };
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[Rect] {
        &self.regions
    }

    pub fn rect(&self, region: usize) -> Rect {
        self.regions[region]
    }

    /// The region holding a free cell.
    pub fn region_of(&self, maze: &GridMaze, c: Cell) -> usize {
        self.membership[maze.index(c).expect("cell must be free")]
    }

    /// Free cells of a region in row-major order.
    pub fn cells(&self, region: usize) -> &[Cell] {
        &self.cells[region]
    }

    /// Number of free cells of a region.
    pub fn area(&self, region: usize) -> usize {
        self.cells[region].len()
    }

    /// Free cells outside the region with a neighbour inside it.
    pub fn frontier(&self, maze: &GridMaze, region: usize) -> Vec<Cell> {
        let mut out: Vec<Cell> = self.cells[region]
            .iter()
            .flat_map(|&c| maze.neighbors(c))
            .filter(|&n| self.region_of(maze, n) != region)
            .collect();
        out.sort_by_key(|c| (c.y, c.x));
        out.dedup();
        out
    }

    /// Splits a region along `dim` at `threshold`. The lower part keeps the
    /// index; the upper part is appended and its index returned.
    pub fn split(&mut self, maze: &GridMaze, region: usize, dim: usize, threshold: usize) -> Result<usize> {
        let rect = *self
            .regions
            .get(region)
            .ok_or_else(|| Error::InvalidAbstraction(format!("no region {region}")))?;
        if dim > 1 || threshold <= rect.lo(dim) || threshold > rect.hi(dim) {
            return Err(Error::InvalidAbstraction(format!(
                "cut {dim}@{threshold} does not cross region {region}"
            )));
        }
        let (a, b) = rect.cut(dim, threshold);
        let (lower, upper): (Vec<Cell>, Vec<Cell>) = self.cells[region].iter().partition(|&&c| a.contains(c));
        if lower.is_empty() || upper.is_empty() {
            return Err(Error::InvalidAbstraction(format!(
                "cut {dim}@{threshold} leaves an empty part of region {region}"
            )));
        }
        let new = self.regions.len();
        for &c in &upper {
            self.membership[maze.index(c).unwrap()] = new;
        }
        self.regions[region] = a;
        self.regions.push(b);
        self.cells[region] = lower;
        self.cells.push(upper);
        Ok(new)
    }

    /// Re-checks the partition invariants.
    pub fn validate(&self, maze: &GridMaze) -> Result<()> {
        let fresh = Self::new(maze, self.regions.clone())?;
        if fresh.membership != self.membership {
            return Err(Error::InvalidAbstraction("stale membership".into()));
        }
        Ok(())
    }
}
