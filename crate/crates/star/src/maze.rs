//! Grid mazes with four-way moves.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Default layout: a corridor that leaves the start to the right, climbs the
/// right side and comes back left to the exit at the top left.
pub const DEFAULT_MAZE: &str = "\
#########
#G......#
#.......#
######..#
######..#
######..#
#S......#
#.......#
#########
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn coord(self, dim: usize) -> usize {
        if dim == 0 {
            self.x
        } else {
            self.y
        }
    }

    pub fn chebyshev(self, other: Cell) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMaze {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    start: Cell,
    goal: Cell,
    horizon: usize,
    /// Dense index of each free cell, row-major.
    free_index: Vec<Option<usize>>,
    free: Vec<Cell>,
}

impl GridMaze {
    /// Builds a maze from a wall mask (row-major) and checks that the goal is
    /// reachable from the start.
    pub fn new(width: usize, height: usize, walls: Vec<bool>, start: Cell, goal: Cell, horizon: usize) -> Result<Self> {
        if width == 0 || height == 0 || walls.len() != width * height {
            return Err(Error::InvalidMaze("wall mask does not match the grid size".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidMaze("episode length must be positive".into()));
        }
        let mut free_index = vec![None; walls.len()];
        let mut free = Vec::new();
        for y in 0..height {
            for x in 0..width {
                if !walls[y * width + x] {
                    free_index[y * width + x] = Some(free.len());
                    free.push(Cell::new(x, y));
                }
            }
        }
        let maze = Self {
            width,
            height,
            walls,
            start,
            goal,
            horizon,
            free_index,
            free,
        };
        for (name, c) in [("start", start), ("goal", goal)] {
            if !maze.is_free(c) {
                return Err(Error::InvalidMaze(format!("{name} cell {c} is not free")));
            }
        }
        if maze.distance(start, goal).is_none() {
            return Err(Error::InvalidMaze("goal is not reachable from the start".into()));
        }
        Ok(maze)
    }

    /// Parses a text grid: `#` wall, `.` free, `S` start, `G` goal. Blank
    /// lines at either end are ignored.
    pub fn parse(text: &str, horizon: usize) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .skip_while(|(_, l)| l.is_empty())
            .collect();
        let end = lines.iter().rposition(|(_, l)| !l.is_empty()).map_or(0, |i| i + 1);
        let lines = &lines[..end];
        if lines.is_empty() {
            return Err(Error::InvalidMaze("empty maze".into()));
        }
        let width = lines[0].1.chars().count();
        let mut walls = Vec::new();
        let (mut start, mut goal) = (None, None);
        for (y, &(line, row)) in lines.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Maze {
                    line,
                    message: format!("expected {width} cells, found {}", row.chars().count()),
                });
            }
            for (x, ch) in row.chars().enumerate() {
                let slot = match ch {
                    '#' => {
                        walls.push(true);
                        continue;
                    }
                    '.' => None,
                    'S' => Some(&mut start),
                    'G' => Some(&mut goal),
                    other => {
                        return Err(Error::Maze {
                            line,
                            message: format!("unexpected character `{other}`"),
                        })
                    }
                };
                walls.push(false);
                if let Some(slot) = slot {
                    if slot.is_some() {
                        return Err(Error::Maze {
                            line,
                            message: format!("second `{ch}` cell"),
                        });
                    }
                    *slot = Some(Cell::new(x, y));
                }
            }
        }
        let start = start.ok_or_else(|| Error::InvalidMaze("no start cell `S`".into()))?;
        let goal = goal.ok_or_else(|| Error::InvalidMaze("no goal cell `G`".into()))?;
        Self::new(width, lines.len(), walls, start, goal, horizon)
    }

    /// The default layout with episode length 200.
    pub fn default_maze() -> Self {
        Self::parse(DEFAULT_MAZE, 200).expect("built-in maze is valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn in_grid(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_grid(c) && !self.walls[c.y * self.width + c.x]
    }

    /// Free cells in row-major order.
    pub fn free_cells(&self) -> &[Cell] {
        &self.free
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Dense index of a free cell.
    pub fn index(&self, c: Cell) -> Option<usize> {
        if self.in_grid(c) {
            self.free_index[c.y * self.width + c.x]
        } else {
            None
        }
    }

    pub fn cell(&self, index: usize) -> Cell {
        self.free[index]
    }

    /// Moves one cell; bumping into a wall or the grid edge leaves the agent
    /// in place.
    pub fn step(&self, c: Cell, a: Action) -> Cell {
        let next = match a {
            Action::Up if c.y > 0 => Cell::new(c.x, c.y - 1),
            Action::Down => Cell::new(c.x, c.y + 1),
            Action::Left if c.x > 0 => Cell::new(c.x - 1, c.y),
            Action::Right => Cell::new(c.x + 1, c.y),
            _ => c,
        };
        if self.is_free(next) {
            next
        } else {
            c
        }
    }

    /// Free 4-neighbours of a cell.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        Action::ALL
            .into_iter()
            .map(move |a| self.step(c, a))
            .filter(move |&n| n != c)
    }

    /// Shortest path length in moves, by breadth-first search.
    pub fn distance(&self, from: Cell, to: Cell) -> Option<usize> {
        let (fi, ti) = (self.index(from)?, self.index(to)?);
        let mut dist = vec![usize::MAX; self.free.len()];
        let mut queue = VecDeque::from([fi]);
        dist[fi] = 0;
        while let Some(i) = queue.pop_front() {
            if i == ti {
                return Some(dist[i]);
            }
            for n in self.neighbors(self.free[i]) {
                let j = self.index(n).unwrap();
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        None
    }

    pub fn shortest_path(&self) -> usize {
        self.distance(self.start, self.goal).expect("checked at construction")
    }

    /// Euclidean distance to the task goal divided by the grid diagonal.
    pub fn normalized_goal_distance(&self, c: Cell) -> f64 {
        let dx = c.x as f64 - self.goal.x as f64;
        let dy = c.y as f64 - self.goal.y as f64;
        let diag = ((self.width * self.width + self.height * self.height) as f64).sqrt();
        (dx * dx + dy * dy).sqrt() / diag
    }
}

impl fmt::Display for GridMaze {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Cell::new(x, y);
                let ch = if c == self.start {
                    'S'
                } else if c == self.goal {
                    'G'
                } else if self.is_free(c) {
                    '.'
                } else {
                    '#'
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
