//! Robot bodies: voxel grids decoded from the morphology network.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::network::LayeredNetwork;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum VoxelType {
    Empty = 0,
    Rigid = 1,
    Soft = 2,
    HorizontalActuator = 3,
    VerticalActuator = 4,
}

impl VoxelType {
    pub const ALL: [VoxelType; 5] = [
        VoxelType::Empty,
        VoxelType::Rigid,
        VoxelType::Soft,
        VoxelType::HorizontalActuator,
        VoxelType::VerticalActuator,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_actuator(self) -> bool {
        matches!(self, VoxelType::HorizontalActuator | VoxelType::VerticalActuator)
    }

    pub fn is_empty(self) -> bool {
        self == VoxelType::Empty
    }

    pub fn symbol(self) -> char {
        match self {
            VoxelType::Empty => '.',
            VoxelType::Rigid => '#',
            VoxelType::Soft => 's',
            VoxelType::HorizontalActuator => 'H',
            VoxelType::VerticalActuator => 'V',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.symbol() == c)
    }
}

/// Why a body cannot be simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidBody {
    Empty,
    Disconnected,
    NoActuator,
}

impl fmt::Display for InvalidBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvalidBody::Empty => "no voxels",
            InvalidBody::Disconnected => "voxels are not 4-connected",
            InvalidBody::NoActuator => "no actuator voxel",
        })
    }
}

/// Square voxel grid, row-major with row 0 at the top of the robot.
///
/// Serialized as a list of strings, one per row, using the ASCII symbols
/// `.`, `#`, `s`, `H`, `V`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BodyGrid {
    n: usize,
    cells: Vec<VoxelType>,
}

impl BodyGrid {
    pub fn new(n: usize, cells: Vec<VoxelType>) -> Result<Self> {
        if n == 0 || cells.len() != n * n {
            return Err(Error::InvalidArgument(format!("{} cells do not form a {n}x{n} grid", cells.len())));
        }
        Ok(Self { n, cells })
    }

    pub fn filled(n: usize, voxel: VoxelType) -> Self {
        Self { n, cells: vec![voxel; n * n] }
    }

    /// Parses rows of voxel symbols, e.g. `["..H..", ...]`.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let n = rows.len();
        let mut cells = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.chars().count() != n {
                return Err(Error::InvalidArgument(format!("row `{row}` is not {n} symbols wide")));
            }
            for c in row.chars() {
                cells.push(VoxelType::from_symbol(c).ok_or_else(|| Error::InvalidArgument(format!("unknown voxel symbol `{c}`")))?);
            }
        }
        Self::new(n, cells)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[VoxelType] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> VoxelType {
        self.cells[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, voxel: VoxelType) {
        self.cells[row * self.n + col] = voxel;
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|v| !v.is_empty()).count()
    }

    pub fn actuator_count(&self) -> usize {
        self.cells.iter().filter(|v| v.is_actuator()).count()
    }

    /// Number of cells of each type, indexed by [`VoxelType::index`].
    pub fn type_counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for v in &self.cells {
            counts[v.index()] += 1;
        }
        counts
    }

    /// Minimum criterion: at least one voxel, one 4-connected component, and
    /// at least one actuator.
    pub fn validate(&self) -> std::result::Result<(), InvalidBody> {
        let Some(start) = self.cells.iter().position(|v| !v.is_empty()) else {
            return Err(InvalidBody::Empty);
        };
        let n = self.n;
        let mut seen = vec![false; n * n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 0;
        while let Some(idx) = queue.pop_front() {
            reached += 1;
            let (r, c) = (idx / n, idx % n);
            let neighbours = [
                (r > 0).then(|| idx - n),
                (r + 1 < n).then(|| idx + n),
                (c > 0).then(|| idx - 1),
                (c + 1 < n).then(|| idx + 1),
            ];
            for next in neighbours.into_iter().flatten() {
                if !seen[next] && !self.cells[next].is_empty() {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        if reached != self.occupied_count() {
            return Err(InvalidBody::Disconnected);
        }
        if self.actuator_count() == 0 {
            return Err(InvalidBody::NoActuator);
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn to_ascii(&self) -> String {
        self.rows().join("\n")
    }

    pub fn rows(&self) -> Vec<String> {
        self.cells.chunks(self.n).map(|row| row.iter().map(|v| v.symbol()).collect()).collect()
    }

    /// Stable 64-bit FNV-1a hash of the grid contents.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in std::iter::once(self.n as u8).chain(self.cells.iter().map(|&v| v as u8)) {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

impl fmt::Display for BodyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

impl Serialize for BodyGrid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BodyGrid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(deserializer)?;
        BodyGrid::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Network input coordinates of cell `(row, col)`: the grid centre maps to
/// the origin and the borders to ±1, with `y` growing upwards.
pub fn cell_coordinates(row: usize, col: usize, n: usize) -> (f64, f64) {
    if n <= 1 {
        return (0.0, 0.0);
    }
    let half = (n - 1) as f64 / 2.0;
    ((col as f64 - half) / half, (half - row as f64) / half)
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax_type(logits: &[f64]) -> VoxelType {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().take(5).skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    VoxelType::from_index(best).expect("index below five")
}

/// Paints a body by evaluating `logits(x, y)` at every cell.
pub fn decode_body_with(n: usize, mut logits: impl FnMut(f64, f64) -> Result<Vec<f64>>) -> Result<BodyGrid> {
    let mut cells = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let (x, y) = cell_coordinates(row, col, n);
            let out = logits(x, y)?;
            if out.len() < 5 {
                return Err(Error::LengthMismatch { expected: 5, got: out.len() });
            }
            cells.push(argmax_type(&out));
        }
    }
    BodyGrid::new(n, cells)
}

/// Decodes a body from a 2-input, 5-output morphology network.
pub fn decode_body(net: &LayeredNetwork, n: usize) -> Result<BodyGrid> {
    if net.input_size() != 2 || net.output_size() != 5 {
        return Err(Error::InvalidArgument(format!(
            "morphology network must map 2 inputs to 5 outputs, got {:?}",
            net.layers()
        )));
    }
    decode_body_with(n, |x, y| net.activate(&[x, y]))
}

/// Per-cell difference: 0 for equal types, 1 when exactly one is empty,
/// 0.5 for two different non-empty types.
pub fn voxel_distance(a: VoxelType, b: VoxelType) -> f64 {
    if a == b {
        0.0
    } else if a.is_empty() || b.is_empty() {
        1.0
    } else {
        0.5
    }
}

/// Sum of [`voxel_distance`] over all cells; lies in `[0, n²]`.
pub fn body_distance(a: &BodyGrid, b: &BodyGrid) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(a.n, b.n));
    }
    Ok(a.cells.iter().zip(&b.cells).map(|(&x, &y)| voxel_distance(x, y)).sum())
}
