//! Dense bit-vector linear algebra over the two-element field, for the
//! reference homology computations. Deliberately independent of the column
//! reduction used by the engine under test.

pub type BitVec = Vec<u64>;

pub fn zero_bits(n_rows: usize) -> BitVec {
    vec![0u64; n_rows.div_ceil(64)]
}

pub fn set_bit(v: &mut BitVec, i: usize) {
    v[i / 64] ^= 1u64 << (i % 64);
}

pub fn xor_assign(a: &mut BitVec, b: &BitVec) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

pub fn is_zero(a: &BitVec) -> bool {
    a.iter().all(|&w| w == 0)
}

/// Index of the highest set bit, if any.
pub fn top_bit(a: &BitVec) -> Option<usize> {
    for (w, &word) in a.iter().enumerate().rev() {
        if word != 0 {
            return Some(w * 64 + 63 - word.leading_zeros() as usize);
        }
    }
    None
}

/// Rank of the column set by Gaussian elimination on top bits.
pub fn rank(columns: &[BitVec]) -> usize {
    let mut pivots: Vec<(usize, BitVec)> = Vec::new();
    for col in columns {
        let mut col = col.clone();
        while let Some(top) = top_bit(&col) {
            match pivots.iter().find(|(row, _)| *row == top) {
                Some((_, pivot)) => xor_assign(&mut col, &pivot.clone()),
                None => {
                    pivots.push((top, col));
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Basis of the kernel of the linear map whose matrix has the given columns.
/// Kernel vectors are returned as bit sets over column indices.
pub fn kernel(columns: &[BitVec], n_cols: usize) -> Vec<BitVec> {
    let mut pivots: Vec<(usize, BitVec, BitVec)> = Vec::new();
    let mut kernel_basis = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let mut col = col.clone();
        let mut combo = zero_bits(n_cols);
        set_bit(&mut combo, j);
        loop {
            match top_bit(&col) {
                None => {
                    kernel_basis.push(combo);
                    break;
                }
                Some(top) => {
                    if let Some((_, pcol, pcombo)) =
                        pivots.iter().find(|(row, _, _)| *row == top)
                    {
                        let (pcol, pcombo) = (pcol.clone(), pcombo.clone());
                        xor_assign(&mut col, &pcol);
                        xor_assign(&mut combo, &pcombo);
                    } else {
                        pivots.push((top, col, combo));
                        break;
                    }
                }
            }
        }
    }
    kernel_basis
}
