use super::SimError;

/// Inactive qubits of the bundled 2000Q-style device fixture.
///
/// The physical chip's defect list is unpublished; these 16 ids are a
/// representative stand-in that yields the documented 2032 active qubits.
pub const DEVICE_INACTIVE_QUBITS: [u32; 16] = [
    94, 95, 266, 413, 571, 732, 845, 1012, 1141, 1290, 1377, 1502, 1667, 1790, 1893, 2011,
];

pub const DEVICE_GRID_SIZE: u32 = 16;
pub const DEVICE_SHORE_SIZE: u32 = 4;

/// A Chimera hardware graph: a `grid_size x grid_size` array of unit cells,
/// each a complete bipartite graph between two shores of `shore_size` qubits.
///
/// Qubit `((row * grid + col) * 2 + side) * shore + k` sits in cell
/// `(row, col)`; side 0 is the vertical shore, side 1 the horizontal one.
/// Vertical qubits couple to the same `k` in the cell below, horizontal
/// qubits to the same `k` in the cell to the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraGraph {
    grid_size: u32,
    shore_size: u32,
    active_mask: Vec<bool>,
    active: Vec<u32>,
    /// Sorted `(lo, hi)` pairs of positions into `active`.
    couplers: Vec<(u32, u32)>,
}

impl ChimeraGraph {
    pub fn build(grid_size: u32, shore_size: u32, active_mask: Vec<bool>) -> Result<Self, SimError> {
        if grid_size == 0 || shore_size == 0 {
            return Err(SimError::InvalidConfig("grid and shore sizes must be positive".into()));
        }
        let total = (grid_size as u64 * grid_size as u64 * 2 * shore_size as u64) as usize;
        if total > u32::MAX as usize {
            return Err(SimError::InvalidConfig("graph too large".into()));
        }
        if active_mask.len() != total {
            return Err(SimError::MaskLength {
                expected: total,
                found: active_mask.len(),
            });
        }
        let active: Vec<u32> = (0..total as u32).filter(|&q| active_mask[q as usize]).collect();
        let mut position = vec![u32::MAX; total];
        for (pos, &q) in active.iter().enumerate() {
            position[q as usize] = pos as u32;
        }
        let mut couplers: Vec<(u32, u32)> = physical_couplers(grid_size, shore_size)
            .filter_map(|(a, b)| {
                let (pa, pb) = (position[a as usize], position[b as usize]);
                (pa != u32::MAX && pb != u32::MAX).then(|| (pa.min(pb), pa.max(pb)))
            })
            .collect();
        couplers.sort_unstable();
        Ok(Self {
            grid_size,
            shore_size,
            active_mask,
            active,
            couplers,
        })
    }

    pub fn all_active(grid_size: u32, shore_size: u32) -> Result<Self, SimError> {
        let total = (grid_size * grid_size * 2 * shore_size) as usize;
        Self::build(grid_size, shore_size, vec![true; total])
    }

    pub fn with_inactive(grid_size: u32, shore_size: u32, inactive: &[u32]) -> Result<Self, SimError> {
        let total = (grid_size as usize) * (grid_size as usize) * 2 * shore_size as usize;
        let mut mask = vec![true; total];
        for &q in inactive {
            let slot = mask
                .get_mut(q as usize)
                .ok_or_else(|| SimError::InvalidConfig(format!("inactive qubit {q} out of range")))?;
            *slot = false;
        }
        Self::build(grid_size, shore_size, mask)
    }

    /// The 16x16x4 device fixture with 2032 active qubits.
    pub fn device_fixture() -> Self {
        Self::with_inactive(DEVICE_GRID_SIZE, DEVICE_SHORE_SIZE, &DEVICE_INACTIVE_QUBITS)
            .expect("fixture is valid")
    }

    pub fn grid_size(&self) -> u32 {
        self.grid_size
    }

    pub fn shore_size(&self) -> u32 {
        self.shore_size
    }

    pub fn total_qubits(&self) -> usize {
        self.active_mask.len()
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active_mask
    }

    /// Logical ids of active qubits, ascending. Sample position `i` is qubit
    /// `active_qubits()[i]`.
    pub fn active_qubits(&self) -> &[u32] {
        &self.active
    }

    pub fn inactive_qubits(&self) -> Vec<u32> {
        (0..self.total_qubits() as u32)
            .filter(|&q| !self.active_mask[q as usize])
            .collect()
    }

    /// Couplers between active qubits as sorted `(lo, hi)` sample positions.
    pub fn couplers(&self) -> &[(u32, u32)] {
        &self.couplers
    }

    /// Same couplers expressed in logical qubit ids.
    pub fn coupler_qubits(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.couplers
            .iter()
            .map(|&(a, b)| (self.active[a as usize], self.active[b as usize]))
    }
}

/// Every coupler of the full lattice in logical ids, `lo < hi`.
fn physical_couplers(grid: u32, shore: u32) -> impl Iterator<Item = (u32, u32)> {
    let id = move |row: u32, col: u32, side: u32, k: u32| ((row * grid + col) * 2 + side) * shore + k;
    let intra = (0..grid).flat_map(move |row| {
        (0..grid).flat_map(move |col| {
            (0..shore).flat_map(move |a| (0..shore).map(move |b| (id(row, col, 0, a), id(row, col, 1, b))))
        })
    });
    let vertical = (0..grid.saturating_sub(1))
        .flat_map(move |row| (0..grid).flat_map(move |col| (0..shore).map(move |k| (id(row, col, 0, k), id(row + 1, col, 0, k)))));
    let horizontal = (0..grid)
        .flat_map(move |row| (0..grid.saturating_sub(1)).flat_map(move |col| (0..shore).map(move |k| (id(row, col, 1, k), id(row, col + 1, 1, k)))));
    intra.chain(vertical).chain(horizontal)
}
