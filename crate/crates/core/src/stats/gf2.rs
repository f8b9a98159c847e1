use super::StatsError;

/// Rank over GF(2) of a 32x32 matrix given as 32 packed rows.
pub fn gf2_rank(rows: &[u32]) -> Result<u32, StatsError> {
    let rows: [u32; 32] = rows
        .try_into()
        .map_err(|_| StatsError::Shape(format!("expected 32 rows, got {}", rows.len())))?;
    Ok(rank_32(rows))
}

/// Forward elimination on packed rows.
pub(crate) fn rank_32(mut rows: [u32; 32]) -> u32 {
    let mut rank = 0usize;
    for col in (0..32).rev() {
        let bit = 1u32 << col;
        let Some(pivot) = (rank..32).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank];
        for row in rows.iter_mut().skip(rank + 1) {
            if *row & bit != 0 {
                *row ^= pivot_row;
            }
        }
        rank += 1;
        if rank == 32 {
            break;
        }
    }
    rank as u32
}
