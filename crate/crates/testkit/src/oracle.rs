//! Reference computations the engine is checked against: persistence via
//! persistent Betti numbers of sublevel complexes (inclusion-exclusion over
//! ranks of boundary matrices), and diagram distances by exhaustive matching
//! enumeration.

use std::collections::HashMap;

use persopt_core::{Complex, Diagram, Filtration};

use crate::f2::{self, BitVec};

/// A diagram as plain sorted value multisets, one entry per homology
/// dimension. Zero-persistence pairs are invisible to sublevel homology, so
/// comparisons are made against the positive-persistence part.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDiagram {
    pub regular: Vec<Vec<(f64, f64)>>,
    pub essential: Vec<Vec<f64>>,
}

/// The positive-persistence part of an engine diagram, sorted for multiset
/// comparison.
pub fn positive_part(d: &Diagram) -> ValueDiagram {
    let mut regular: Vec<Vec<(f64, f64)>> = d
        .dims()
        .iter()
        .map(|part| {
            part.regular
                .iter()
                .filter(|p| p.death > p.birth)
                .map(|p| (p.birth, p.death))
                .collect()
        })
        .collect();
    let mut essential: Vec<Vec<f64>> = d
        .dims()
        .iter()
        .map(|part| part.essential.iter().map(|p| p.birth).collect())
        .collect();
    for part in &mut regular {
        part.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    for part in &mut essential {
        part.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    ValueDiagram { regular, essential }
}

/// Persistence diagram computed from scratch: for every pair of sublevel
/// thresholds, the rank of the induced map in homology, then point
/// multiplicities by double differences.
pub fn oracle_diagram(c: &Complex, f: &Filtration) -> ValueDiagram {
    let mut thresholds: Vec<f64> = f.values().to_vec();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let m = thresholds.len();
    let max_dim = c.max_dim();

    let cells_of = |k: usize, t: f64| -> Vec<usize> {
        c.cells()
            .iter()
            .filter(|cell| cell.dim == k && f.value(cell.id) <= t)
            .map(|cell| cell.id)
            .collect()
    };

    // beta(k, i, j): rank of H_k(K_{t_i}) -> H_k(K_{t_j}) for 1-based i <= j,
    // with i = 0 the empty complex.
    let mut cache: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut beta = |k: usize, i: usize, j: usize| -> usize {
        if i == 0 {
            return 0;
        }
        if let Some(&b) = cache.get(&(k, i, j)) {
            return b;
        }
        let t_i = thresholds[i - 1];
        let t_j = thresholds[j - 1];
        let k_cells_j = cells_of(k, t_j);
        let row_of: HashMap<usize, usize> = k_cells_j
            .iter()
            .enumerate()
            .map(|(r, &id)| (id, r))
            .collect();
        let n_rows = k_cells_j.len();

        // cycles of K_i, written over the k-cells of K_j
        let z_basis: Vec<BitVec> = if k == 0 {
            cells_of(0, t_i)
                .iter()
                .map(|&id| {
                    let mut v = f2::zero_bits(n_rows);
                    f2::set_bit(&mut v, row_of[&id]);
                    v
                })
                .collect()
        } else {
            let k_cells_i = cells_of(k, t_i);
            let faces_i = cells_of(k - 1, t_i);
            let face_row: HashMap<usize, usize> = faces_i
                .iter()
                .enumerate()
                .map(|(r, &id)| (id, r))
                .collect();
            let boundary_cols: Vec<BitVec> = k_cells_i
                .iter()
                .map(|&id| {
                    let mut v = f2::zero_bits(faces_i.len());
                    for &b in &c.cell(id).boundary {
                        f2::set_bit(&mut v, face_row[&b]);
                    }
                    v
                })
                .collect();
            f2::kernel(&boundary_cols, k_cells_i.len())
                .into_iter()
                .map(|combo| {
                    let mut v = f2::zero_bits(n_rows);
                    for (col, &id) in k_cells_i.iter().enumerate() {
                        if combo[col / 64] >> (col % 64) & 1 == 1 {
                            f2::set_bit(&mut v, row_of[&id]);
                        }
                    }
                    v
                })
                .collect()
        };

        // boundaries of K_j in dimension k
        let b_cols: Vec<BitVec> = if k == max_dim {
            Vec::new()
        } else {
            cells_of(k + 1, t_j)
                .iter()
                .map(|&id| {
                    let mut v = f2::zero_bits(n_rows);
                    for &b in &c.cell(id).boundary {
                        f2::set_bit(&mut v, row_of[&b]);
                    }
                    v
                })
                .collect()
        };
        let rank_b = f2::rank(&b_cols);
        let mut all = b_cols;
        all.extend(z_basis);
        let value = f2::rank(&all) - rank_b;
        cache.insert((k, i, j), value);
        value
    };

    let mut regular = vec![Vec::new(); max_dim + 1];
    let mut essential = vec![Vec::new(); max_dim + 1];
    for k in 0..=max_dim {
        for i in 1..=m {
            for j in (i + 1)..=m {
                let mu = beta(k, i, j - 1) as isize - beta(k, i, j) as isize
                    - beta(k, i - 1, j - 1) as isize
                    + beta(k, i - 1, j) as isize;
                assert!(mu >= 0, "negative multiplicity");
                for _ in 0..mu {
                    regular[k].push((thresholds[i - 1], thresholds[j - 1]));
                }
            }
            let ess = beta(k, i, m) as isize - beta(k, i - 1, m) as isize;
            assert!(ess >= 0, "negative essential count");
            for _ in 0..ess {
                essential[k].push(thresholds[i - 1]);
            }
        }
        regular[k].sort_by(|a, b| a.partial_cmp(b).unwrap());
        essential[k].sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    ValueDiagram { regular, essential }
}

/// Independent reimplementation of the two plane metrics; the formulas are
/// written exactly as in the engine so exact value comparisons make sense.
fn distance(euclidean: bool, a: (f64, f64), b: (f64, f64)) -> f64 {
    if euclidean {
        ((a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1)).sqrt()
    } else {
        (a.0 - b.0).abs().max((a.1 - b.1).abs())
    }
}

fn diag_gap(euclidean: bool, p: (f64, f64)) -> f64 {
    if euclidean {
        (p.1 - p.0) / 2.0 * std::f64::consts::SQRT_2
    } else {
        (p.1 - p.0) / 2.0
    }
}

/// Visit every partial matching (a-point to b-point or to the diagonal, each
/// b-point used at most once) and fold the matched cost lists.
fn enumerate_matchings(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    euclidean: bool,
    visit: &mut impl FnMut(&[f64]),
) {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        euclidean: bool,
        used: &mut Vec<bool>,
        costs: &mut Vec<f64>,
        visit: &mut impl FnMut(&[f64]),
    ) {
        if i == a.len() {
            let start = costs.len();
            for (j, &q) in b.iter().enumerate() {
                if !used[j] {
                    costs.push(diag_gap(euclidean, q));
                }
            }
            visit(costs);
            costs.truncate(start);
            return;
        }
        costs.push(diag_gap(euclidean, a[i]));
        recurse(i + 1, a, b, euclidean, used, costs, visit);
        costs.pop();
        for j in 0..b.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            costs.push(distance(euclidean, a[i], b[j]));
            recurse(i + 1, a, b, euclidean, used, costs, visit);
            costs.pop();
            used[j] = false;
        }
    }
    let mut used = vec![false; b.len()];
    let mut costs = Vec::new();
    recurse(0, a, b, euclidean, &mut used, &mut costs, visit);
}

/// Bottleneck distance by exhaustive enumeration of all matchings.
pub fn brute_force_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    brute_force_bottleneck_in(a, b, false)
}

pub fn brute_force_bottleneck_in(a: &[(f64, f64)], b: &[(f64, f64)], euclidean: bool) -> f64 {
    let mut best = f64::INFINITY;
    enumerate_matchings(a, b, euclidean, &mut |costs| {
        let worst = costs.iter().cloned().fold(0.0, f64::max);
        if worst < best {
            best = worst;
        }
    });
    best
}

/// p-Wasserstein distance by exhaustive enumeration; the cost list is summed
/// in ascending order, matching the engine's canonical accumulation.
pub fn brute_force_wasserstein(a: &[(f64, f64)], b: &[(f64, f64)], p: u32) -> f64 {
    brute_force_wasserstein_in(a, b, p, false)
}

pub fn brute_force_wasserstein_in(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    p: u32,
    euclidean: bool,
) -> f64 {
    let mut best = f64::INFINITY;
    enumerate_matchings(a, b, euclidean, &mut |costs| {
        let mut powered: Vec<f64> = costs.iter().map(|c| c.powi(p as i32)).collect();
        powered.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let total: f64 = powered.iter().sum();
        if total < best {
            best = total;
        }
    });
    best.powf(1.0 / p as f64)
}
