//! Grid maps, MovingAI `.map`/`.scen` parsing, and benchmark instances.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed map header: {0}")]
    MalformedHeader(String),
    #[error("map dimensions disagree with header: {0}")]
    DimensionMismatch(String),
    #[error("unknown map glyph {glyph:?} at row {row}, col {col}")]
    UnknownGlyph { glyph: char, row: usize, col: usize },
    #[error("map has no free cells")]
    NoFreeCells,
    #[error("malformed scenario: {0}")]
    MalformedScenario(String),
    #[error("requested {requested} robots but only {available} available")]
    NotEnoughEntries { requested: usize, available: usize },
    #[error("robot {robot}: {what} {cell} is not a free cell")]
    BlockedEndpoint {
        robot: usize,
        what: &'static str,
        cell: Cell,
    },
    #[error("duplicate {what} {cell} (robots {first} and {second})")]
    DuplicateEndpoint {
        what: &'static str,
        cell: Cell,
        first: usize,
        second: usize,
    },
    #[error("no connected start/goal assignment found after {0} attempts")]
    NoConnectedAssignment(usize),
    #[error("invalid instance json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A grid cell addressed by row (y, growing southwards) and column (x, growing eastwards).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

impl Cell {
    pub const fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn step(self, dir: Orientation) -> Cell {
        let (dr, dc) = dir.delta();
        Cell::new(self.row + dr, self.col + dc)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// Direction of a unit step from `self` to `other`, if they are 4-adjacent.
    pub fn direction_to(self, other: Cell) -> Option<Orientation> {
        Orientation::ALL.into_iter().find(|&o| self.step(o) == other)
    }
}

impl From<[i32; 2]> for Cell {
    fn from([row, col]: [i32; 2]) -> Self {
        Cell { row, col }
    }
}

impl From<Cell> for [i32; 2] {
    fn from(c: Cell) -> Self {
        [c.row, c.col]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Heading of a differential-drive robot. Quarter turns are the only rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    North,
    East,
    South,
    West,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::North,
        Orientation::East,
        Orientation::South,
        Orientation::West,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 4]
    }

    /// (row, col) delta of one step forward.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Orientation::North => (-1, 0),
            Orientation::East => (0, 1),
            Orientation::South => (1, 0),
            Orientation::West => (0, -1),
        }
    }

    pub fn left(self) -> Self {
        Self::from_index(self.index() + 3)
    }

    pub fn right(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn rotated(self, turn: Turn, quarter_turns: u8) -> Self {
        (0..quarter_turns).fold(self, |o, _| match turn {
            Turn::Left => o.left(),
            Turn::Right => o.right(),
        })
    }

    /// Minimum number of quarter turns between two headings (0, 1 or 2).
    pub fn quarter_turns_to(self, other: Orientation) -> u8 {
        let d = (other.index() + 4 - self.index()) % 4;
        if d == 3 {
            1
        } else {
            d as u8
        }
    }

    /// Shortest rotation from `self` to `other`; 180° turns go right.
    pub fn turn_to(self, other: Orientation) -> Option<(Turn, u8)> {
        match (other.index() + 4 - self.index()) % 4 {
            0 => None,
            1 => Some((Turn::Right, 1)),
            2 => Some((Turn::Right, 2)),
            _ => Some((Turn::Left, 1)),
        }
    }

    /// Heading angle in radians, counter-clockwise from +x (east) with +y pointing north.
    pub fn angle(self) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Orientation::East => 0.0,
            Orientation::North => FRAC_PI_2,
            Orientation::West => 2.0 * FRAC_PI_2,
            Orientation::South => -FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Left,
    Right,
}

/// Glyphs accepted in `.map` files.
fn glyph_passable(g: u8) -> Option<bool> {
    match g {
        b'.' | b'G' | b'S' | b'W' => Some(true),
        b'@' | b'T' | b'O' => Some(false),
        _ => None,
    }
}

/// A 4-connected grid. Free cells are the vertices, adjacent free cells the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    glyphs: Vec<u8>,
    free: Vec<bool>,
    cell_size: f64,
}

impl GridMap {
    /// Builds a map from rows of glyphs; all rows must have equal length.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, WorldError> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if height == 0 || width == 0 {
            return Err(WorldError::DimensionMismatch("empty grid".into()));
        }
        let mut glyphs = Vec::with_capacity(width * height);
        let mut free = Vec::with_capacity(width * height);
        for (row, line) in rows.iter().enumerate() {
            let line = line.as_ref().as_bytes();
            if line.len() != width {
                return Err(WorldError::DimensionMismatch(format!(
                    "row {row} has {} glyphs, expected {width}",
                    line.len()
                )));
            }
            for (col, &g) in line.iter().enumerate() {
                let passable = glyph_passable(g).ok_or(WorldError::UnknownGlyph {
                    glyph: g as char,
                    row,
                    col,
                })?;
                glyphs.push(g);
                free.push(passable);
            }
        }
        if !free.iter().any(|&f| f) {
            return Err(WorldError::NoFreeCells);
        }
        Ok(Self {
            width,
            height,
            glyphs,
            free,
            cell_size: 1.0,
        })
    }

    /// An obstacle-free `height × width` map.
    pub fn empty(height: usize, width: usize) -> Self {
        let row = ".".repeat(width);
        Self::from_rows(&vec![row; height]).expect("non-empty grid")
    }

    /// Parses MovingAI `.map` text.
    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String, WorldError> {
            let line = lines
                .next()
                .ok_or_else(|| WorldError::MalformedHeader(format!("missing `{key}` line")))?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some(k) if k == key => Ok(parts.collect::<Vec<_>>().join(" ")),
                _ => Err(WorldError::MalformedHeader(format!(
                    "expected `{key}`, found {line:?}"
                ))),
            }
        };
        let kind = header("type")?;
        if kind.is_empty() {
            return Err(WorldError::MalformedHeader("empty map type".into()));
        }
        let height: usize = header("height")?
            .parse()
            .map_err(|_| WorldError::MalformedHeader("height is not an integer".into()))?;
        let width: usize = header("width")?
            .parse()
            .map_err(|_| WorldError::MalformedHeader("width is not an integer".into()))?;
        header("map")?;
        if height == 0 || width == 0 {
            return Err(WorldError::MalformedHeader("zero dimension".into()));
        }
        let rows: Vec<&str> = lines.map(|l| l.trim_end_matches('\r')).collect();
        let rows: Vec<&str> = match rows.iter().rposition(|r| !r.is_empty()) {
            Some(last) => rows[..=last].to_vec(),
            None => Vec::new(),
        };
        if rows.len() != height {
            return Err(WorldError::DimensionMismatch(format!(
                "header says height {height}, found {} rows",
                rows.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(WorldError::DimensionMismatch(format!(
                "header says width {width}, row {i} has {}",
                r.len()
            )));
        }
        Self::from_rows(&rows)
    }

    /// Canonical MovingAI rendering (`\n` line endings, trailing newline).
    pub fn to_movingai(&self) -> String {
        let mut out = format!(
            "type octile\nheight {}\nwidth {}\nmap\n",
            self.height, self.width
        );
        for row in self.glyphs.chunks(self.width) {
            out.push_str(std::str::from_utf8(row).expect("ascii glyphs"));
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn with_cell_size(mut self, cell_size: f64) -> Self {
        assert!(cell_size > 0.0);
        self.cell_size = cell_size;
        self
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.row >= 0 && c.col >= 0 && (c.row as usize) < self.height && (c.col as usize) < self.width
    }

    pub fn index(&self, c: Cell) -> usize {
        c.row as usize * self.width + c.col as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index / self.width) as i32, (index % self.width) as i32)
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.free[self.index(c)]
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells())
            .filter(|&i| self.free[i])
            .map(|i| self.cell_at(i))
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn blocked_cells(&self) -> Vec<Cell> {
        (0..self.num_cells())
            .filter(|&i| !self.free[i])
            .map(|i| self.cell_at(i))
            .collect()
    }

    /// Free 4-neighbors of `c`, in N, E, S, W order.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        Orientation::ALL
            .into_iter()
            .map(move |o| c.step(o))
            .filter(|&n| self.is_free(n))
    }

    /// Unit-cost BFS distances from `source` over free cells; `u32::MAX` if unreachable.
    pub fn bfs_distances(&self, source: Cell) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.num_cells()];
        if !self.is_free(source) {
            return dist;
        }
        let mut queue = VecDeque::from([source]);
        dist[self.index(source)] = 0;
        while let Some(c) = queue.pop_front() {
            let d = dist[self.index(c)];
            for n in self.neighbors(c) {
                let ni = self.index(n);
                if dist[ni] == u32::MAX {
                    dist[ni] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Connected-component label of every cell; blocked cells get `usize::MAX`.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.num_cells()];
        let mut next = 0;
        for start in self.free_cells().collect::<Vec<_>>() {
            if label[self.index(start)] != usize::MAX {
                continue;
            }
            let mut queue = VecDeque::from([start]);
            label[self.index(start)] = next;
            while let Some(c) = queue.pop_front() {
                for n in self.neighbors(c) {
                    let ni = self.index(n);
                    if label[ni] == usize::MAX {
                        label[ni] = next;
                        queue.push_back(n);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

pub fn load_map(path: impl AsRef<Path>) -> Result<GridMap, WorldError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
        path: path.display().to_string(),
        source,
    })?;
    GridMap::parse(&text)
}

pub fn save_map(map: &GridMap, path: impl AsRef<Path>) -> Result<(), WorldError> {
    let path = path.as_ref();
    std::fs::write(path, map.to_movingai()).map_err(|source| WorldError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotTask {
    pub id: usize,
    pub start: Cell,
    #[serde(rename = "orient")]
    pub start_orientation: Orientation,
    pub goal: Cell,
}

/// A MAPF problem: a map plus an ordered set of robots with start and goal cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub map: Arc<GridMap>,
    /// Where the map was loaded from, if anywhere. Only used for JSON export.
    pub map_path: Option<String>,
    pub robots: Vec<RobotTask>,
}

/// On-disk form of an [`Instance`]; the map is referenced by path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub map: String,
    pub robots: Vec<RobotTask>,
}

pub const DEFAULT_START_ORIENTATION: Orientation = Orientation::East;

impl Instance {
    /// Checks that starts and goals are free and pairwise distinct.
    pub fn new(map: Arc<GridMap>, robots: Vec<RobotTask>) -> Result<Self, WorldError> {
        let inst = Self {
            map,
            map_path: None,
            robots,
        };
        inst.check()?;
        Ok(inst)
    }

    pub fn with_map_path(mut self, path: impl Into<String>) -> Self {
        self.map_path = Some(path.into());
        self
    }

    pub fn check(&self) -> Result<(), WorldError> {
        for r in &self.robots {
            for (what, cell) in [("start", r.start), ("goal", r.goal)] {
                if !self.map.is_free(cell) {
                    return Err(WorldError::BlockedEndpoint {
                        robot: r.id,
                        what,
                        cell,
                    });
                }
            }
        }
        for (what, get) in [
            ("start", (|r: &RobotTask| r.start) as fn(&RobotTask) -> Cell),
            ("goal", |r: &RobotTask| r.goal),
        ] {
            let mut seen = std::collections::HashMap::new();
            for r in &self.robots {
                if let Some(first) = seen.insert(get(r), r.id) {
                    return Err(WorldError::DuplicateEndpoint {
                        what,
                        cell: get(r),
                        first,
                        second: r.id,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robot(&self, id: usize) -> Option<&RobotTask> {
        self.robots.iter().find(|r| r.id == id)
    }

    /// Keeps only the first `n` robots.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            map: self.map.clone(),
            map_path: self.map_path.clone(),
            robots: self.robots.iter().take(n).cloned().collect(),
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            map: self.map_path.clone().unwrap_or_default(),
            robots: self.robots.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    /// Loads an instance JSON; the map path is resolved relative to the JSON file.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: InstanceFile = serde_json::from_str(&text)?;
        let map_path = path
            .parent()
            .map(|p| p.join(&file.map))
            .unwrap_or_else(|| file.map.clone().into());
        let map = load_map(&map_path)?;
        Ok(Self::new(Arc::new(map), file.robots)?.with_map_path(file.map))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map_name: String,
    pub map_width: usize,
    pub map_height: usize,
    pub start: Cell,
    pub goal: Cell,
    pub optimal_length: f64,
}

/// Parses `.scen` text into entries, in file order.
pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioEntry>, WorldError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some(v) if v.starts_with("version") => {}
        other => {
            return Err(WorldError::MalformedScenario(format!(
                "expected `version` header, found {other:?}"
            )))
        }
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(WorldError::MalformedScenario(format!(
                "entry {i}: expected 9 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let int = |k: usize| -> Result<i64, WorldError> {
            fields[k].parse().map_err(|_| {
                WorldError::MalformedScenario(format!("entry {i}: field {k} is not an integer"))
            })
        };
        entries.push(ScenarioEntry {
            bucket: int(0)? as u32,
            map_name: fields[1].to_string(),
            map_width: int(2)? as usize,
            map_height: int(3)? as usize,
            start: Cell::new(int(5)? as i32, int(4)? as i32),
            goal: Cell::new(int(7)? as i32, int(6)? as i32),
            optimal_length: fields[8].parse().map_err(|_| {
                WorldError::MalformedScenario(format!("entry {i}: bad optimal length"))
            })?,
        });
    }
    Ok(entries)
}

/// Builds an instance from the first `n` scenario entries (bucket ignored).
pub fn scenario_instance(
    entries: &[ScenarioEntry],
    map: Arc<GridMap>,
    n: usize,
) -> Result<Instance, WorldError> {
    if n > entries.len() {
        return Err(WorldError::NotEnoughEntries {
            requested: n,
            available: entries.len(),
        });
    }
    if let Some(e) = entries[..n]
        .iter()
        .find(|e| e.map_width != map.width() || e.map_height != map.height())
    {
        return Err(WorldError::MalformedScenario(format!(
            "entry for {} is {}x{}, map is {}x{}",
            e.map_name,
            e.map_width,
            e.map_height,
            map.width(),
            map.height()
        )));
    }
    let robots = entries[..n]
        .iter()
        .enumerate()
        .map(|(id, e)| RobotTask {
            id,
            start: e.start,
            start_orientation: DEFAULT_START_ORIENTATION,
            goal: e.goal,
        })
        .collect();
    Instance::new(map, robots)
}

pub fn load_scenario(
    path: impl AsRef<Path>,
    map: Arc<GridMap>,
    n: usize,
) -> Result<Instance, WorldError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
        path: path.display().to_string(),
        source,
    })?;
    scenario_instance(&parse_scenario(&text)?, map, n)
}

/// Renders a `.scen` file for an instance (bucket 0, octile distance column = BFS distance).
pub fn scenario_text(inst: &Instance, map_name: &str) -> String {
    let mut out = String::from("version 1\n");
    for r in &inst.robots {
        let dist = inst.map.bfs_distances(r.start)[inst.map.index(r.goal)];
        out.push_str(&format!(
            "0\t{map_name}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            inst.map.width(),
            inst.map.height(),
            r.start.col,
            r.start.row,
            r.goal.col,
            r.goal.row,
            dist
        ));
    }
    out
}

const RANDOM_INSTANCE_ATTEMPTS: usize = 1000;

/// Seeded random instance with distinct starts, distinct goals, and each goal reachable from its start.
pub fn random_instance(map: Arc<GridMap>, n: usize, seed: u64) -> Result<Instance, WorldError> {
    let free: Vec<Cell> = map.free_cells().collect();
    if n > free.len() {
        return Err(WorldError::NotEnoughEntries {
            requested: n,
            available: free.len(),
        });
    }
    let comp = map.components();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_INSTANCE_ATTEMPTS {
        let mut starts = free.clone();
        starts.shuffle(&mut rng);
        starts.truncate(n);
        let mut taken: HashSet<Cell> = HashSet::with_capacity(n);
        let mut robots = Vec::with_capacity(n);
        let mut pool = free.clone();
        pool.shuffle(&mut rng);
        for (id, &start) in starts.iter().enumerate() {
            let c = comp[map.index(start)];
            let goal = pool
                .iter()
                .copied()
                .find(|g| comp[map.index(*g)] == c && !taken.contains(g));
            let Some(goal) = goal else { break };
            taken.insert(goal);
            robots.push(RobotTask {
                id,
                start,
                start_orientation: DEFAULT_START_ORIENTATION,
                goal,
            });
        }
        if robots.len() == n {
            return Instance::new(map, robots);
        }
    }
    Err(WorldError::NoConnectedAssignment(RANDOM_INSTANCE_ATTEMPTS))
}

/// Random map with the given obstacle fraction whose free cells form one component.
pub fn random_map(height: usize, width: usize, obstacle_fraction: f64, seed: u64) -> GridMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (0..height * width).collect();
    cells.shuffle(&mut rng);
    let target = ((height * width) as f64 * obstacle_fraction).round() as usize;
    let mut glyphs = vec![b'.'; height * width];
    let mut placed = 0;
    for idx in cells {
        if placed == target {
            break;
        }
        glyphs[idx] = b'@';
        let rows: Vec<String> = glyphs
            .chunks(width)
            .map(|r| String::from_utf8(r.to_vec()).unwrap())
            .collect();
        let map = GridMap::from_rows(&rows);
        let connected = map
            .as_ref()
            .map(|m| m.components().iter().all(|&l| l == usize::MAX || l == 0))
            .unwrap_or(false);
        if connected {
            placed += 1;
        } else {
            glyphs[idx] = b'.';
        }
    }
    let rows: Vec<String> = glyphs
        .chunks(width)
        .map(|r| String::from_utf8(r.to_vec()).unwrap())
        .collect();
    GridMap::from_rows(&rows).expect("random map keeps free cells")
}

/// Room-style map: `rooms × rooms` chambers separated by walls with one-cell doors.
pub fn room_map(rooms: usize, room_size: usize, seed: u64) -> GridMap {
    let side = rooms * (room_size + 1) - 1;
    let mut glyphs = vec![b'.'; side * side];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    for k in 1..rooms {
        let wall = k * (room_size + 1) - 1;
        for i in 0..side {
            glyphs[wall * side + i] = b'@';
            glyphs[i * side + wall] = b'@';
        }
    }
    // one door per wall segment between neighboring rooms
    for k in 1..rooms {
        let wall = k * (room_size + 1) - 1;
        for r in 0..rooms {
            let lo = r * (room_size + 1);
            let door = lo + rng.gen_range(0..room_size);
            glyphs[wall * side + door] = b'.';
            let door = lo + rng.gen_range(0..room_size);
            glyphs[door * side + wall] = b'.';
        }
    }
    let rows: Vec<String> = glyphs
        .chunks(side)
        .map(|r| String::from_utf8(r.to_vec()).unwrap())
        .collect();
    GridMap::from_rows(&rows).expect("room map has free cells")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_free_map() {
        let map = GridMap::parse("type octile\nheight 4\nwidth 4\nmap\n....\n....\n....\n....\n")
            .unwrap();
        assert_eq!((map.height(), map.width()), (4, 4));
        assert!(map.blocked_cells().is_empty());
        assert_eq!(map.free_count(), 16);
    }

    #[test]
    fn single_obstacle() {
        let map =
            GridMap::parse("type octile\nheight 2\nwidth 3\nmap\n@..\n...\n").unwrap();
        assert_eq!(map.blocked_cells(), vec![Cell::new(0, 0)]);
        assert!(!map.is_free(Cell::new(0, 0)));
        assert!(map.is_free(Cell::new(1, 2)));
    }

    #[test]
    fn tree_and_passable_glyphs() {
        let map = GridMap::parse("type octile\nheight 1\nwidth 5\nmap\n.TGSW\n").unwrap();
        assert_eq!(map.blocked_cells(), vec![Cell::new(0, 1)]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            GridMap::parse("type octile\nheight x\nwidth 2\nmap\n..\n"),
            Err(WorldError::MalformedHeader(_))
        ));
        assert!(matches!(
            GridMap::parse("height 1\nwidth 2\nmap\n..\n"),
            Err(WorldError::MalformedHeader(_))
        ));
        assert!(matches!(
            GridMap::parse("type octile\nheight 2\nwidth 2\nmap\n..\n"),
            Err(WorldError::DimensionMismatch(_))
        ));
        assert!(matches!(
            GridMap::parse("type octile\nheight 1\nwidth 2\nmap\n...\n"),
            Err(WorldError::DimensionMismatch(_))
        ));
        assert!(matches!(
            GridMap::parse("type octile\nheight 1\nwidth 2\nmap\n.x\n"),
            Err(WorldError::UnknownGlyph { glyph: 'x', .. })
        ));
        assert!(matches!(
            GridMap::parse("type octile\nheight 1\nwidth 2\nmap\n@@\n"),
            Err(WorldError::NoFreeCells)
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let text = "type octile\nheight 3\nwidth 4\nmap\n.@..\n..T.\n....\n";
        assert_eq!(GridMap::parse(text).unwrap().to_movingai(), text);
    }

    #[test]
    fn orientation_turns() {
        use Orientation::*;
        assert_eq!(North.right(), East);
        assert_eq!(North.left(), West);
        assert_eq!(East.rotated(Turn::Left, 2), West);
        assert_eq!(East.quarter_turns_to(West), 2);
        assert_eq!(East.quarter_turns_to(North), 1);
        assert_eq!(North.turn_to(West), Some((Turn::Left, 1)));
        assert_eq!(Cell::new(1, 1).direction_to(Cell::new(0, 1)), Some(North));
        assert_eq!(Cell::new(1, 1).direction_to(Cell::new(0, 0)), None);
    }

    const SCEN: &str = "version 1\n\
        0\tt.map\t4\t4\t0\t0\t3\t0\t3\n\
        0\tt.map\t4\t4\t1\t1\t2\t3\t3\n\
        1\tt.map\t4\t4\t0\t0\t3\t3\t6\n";

    #[test]
    fn scenario_prefixes() {
        let map = Arc::new(GridMap::empty(4, 4));
        let entries = parse_scenario(SCEN).unwrap();
        assert_eq!(entries.len(), 3);
        let empty = scenario_instance(&entries, map.clone(), 0).unwrap();
        assert!(empty.robots.is_empty());
        let one = scenario_instance(&entries, map.clone(), 1).unwrap();
        assert_eq!(one.robots[0].start, Cell::new(0, 0));
        assert_eq!(one.robots[0].goal, Cell::new(0, 3));
        assert_eq!(one.robots[0].start_orientation, Orientation::East);
        assert!(matches!(
            scenario_instance(&entries, map.clone(), 3),
            Err(WorldError::DuplicateEndpoint { what: "start", .. })
        ));
        assert!(matches!(
            scenario_instance(&entries, map, 4),
            Err(WorldError::NotEnoughEntries { .. })
        ));
    }

    #[test]
    fn scenario_on_blocked_cell() {
        let map = Arc::new(GridMap::parse("type octile\nheight 4\nwidth 4\nmap\n@...\n....\n....\n....\n").unwrap());
        let entries = parse_scenario(SCEN).unwrap();
        assert!(matches!(
            scenario_instance(&entries, map, 1),
            Err(WorldError::BlockedEndpoint { .. })
        ));
    }

    #[test]
    fn random_instance_is_deterministic() {
        let map = Arc::new(random_map(8, 8, 0.2, 1));
        let a = random_instance(map.clone(), 10, 7).unwrap();
        let b = random_instance(map.clone(), 10, 7).unwrap();
        assert_eq!(a, b);
        let c = random_instance(map, 10, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_instance_uses_every_cell() {
        let map = Arc::new(GridMap::empty(2, 2));
        let inst = random_instance(map, 4, 0).unwrap();
        let mut starts: Vec<Cell> = inst.robots.iter().map(|r| r.start).collect();
        starts.sort();
        assert_eq!(starts, GridMap::empty(2, 2).free_cells().collect::<Vec<_>>());
        assert!(matches!(
            random_instance(Arc::new(GridMap::empty(2, 2)), 5, 0),
            Err(WorldError::NotEnoughEntries { .. })
        ));
    }

    #[test]
    fn random_maps_are_connected() {
        for seed in 0..5 {
            let m = random_map(16, 16, 0.2, seed);
            assert_eq!(m.blocked_cells().len(), 51);
            assert!(m.components().iter().all(|&l| l == usize::MAX || l == 0));
        }
        let rooms = room_map(3, 4, 2);
        assert_eq!(rooms.width(), 14);
        assert!(rooms.components().iter().all(|&l| l == usize::MAX || l == 0));
    }
}
