//! Structural properties of the persistence engine: the coordinate
//! permutation, coordinate counts, stability under value perturbations and
//! invariance of the pairing under common shifts.

use persopt_core::{
    bottleneck, compute_pairs, diagram, total_order, validate_filtration, Complex, Diagram,
    Filtration,
};
use persopt_testkit::{random_cloud, random_monotone_filtration, rng};
use proptest::prelude::*;

fn coordinate_multiset(d: &Diagram) -> Vec<u64> {
    let mut bits = Vec::new();
    for part in d.dims() {
        for p in &part.regular {
            bits.push(p.birth.to_bits());
            bits.push(p.death.to_bits());
        }
        for p in &part.essential {
            bits.push(p.birth.to_bits());
        }
    }
    bits.sort_unstable();
    bits
}

#[test]
fn diagram_is_a_permutation_of_the_filtration() {
    let complexes = [
        Complex::full_simplex(4, 3).unwrap(),
        Complex::cubical_grid(3, 3).unwrap(),
    ];
    let mut rng = rng(11);
    for c in &complexes {
        for _ in 0..100 {
            let f = random_monotone_filtration(c, &mut rng);
            let d = diagram(c, &f).unwrap();
            let mut input: Vec<u64> = f.values().iter().map(|v| v.to_bits()).collect();
            input.sort_unstable();
            assert_eq!(coordinate_multiset(&d), input, "not a coordinate permutation");
        }
    }
}

#[test]
fn pair_and_essential_counts_add_up() {
    let c = Complex::full_simplex(5, 3).unwrap();
    let mut rng = rng(13);
    for _ in 0..50 {
        let f = random_monotone_filtration(&c, &mut rng);
        let ord = total_order(&c, &f).unwrap();
        let p = compute_pairs(&c, &ord);
        assert_eq!(2 * p.n_pairs() + p.n_essential(), c.len());
    }
}

/// Bottleneck distance between essential parts in one dimension: births
/// matched in sorted order.
fn essential_gap(a: &Diagram, b: &Diagram, dim: usize) -> f64 {
    let mut ba: Vec<f64> = a.dim(dim).essential.iter().map(|p| p.birth).collect();
    let mut bb: Vec<f64> = b.dim(dim).essential.iter().map(|p| p.birth).collect();
    assert_eq!(ba.len(), bb.len(), "same complex has fixed essential counts");
    ba.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ba.iter()
        .zip(&bb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn diagrams_are_stable_under_value_perturbations() {
    let c = Complex::full_simplex(4, 3).unwrap();
    let mut rng = rng(17);
    for _ in 0..100 {
        let f = random_monotone_filtration(&c, &mut rng);
        let g = random_monotone_filtration(&c, &mut rng);
        let sup: f64 = f
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let df = diagram(&c, &f).unwrap();
        let dg = diagram(&c, &g).unwrap();
        for dim in 0..=c.max_dim() {
            let (loss, _) = bottleneck(&df, &dg, dim);
            assert!(
                loss.value <= sup + 1e-12,
                "dim {dim}: bottleneck {} above sup {} ",
                loss.value,
                sup
            );
            assert!(essential_gap(&df, &dg, dim) <= sup + 1e-12);
        }
    }
}

#[test]
fn common_shift_preserves_the_pairing() {
    let c = Complex::cubical_grid(2, 4).unwrap();
    let mut rng = rng(19);
    for _ in 0..50 {
        let f = random_monotone_filtration(&c, &mut rng);
        let shifted =
            Filtration::new(f.values().iter().map(|v| v + 0.375).collect()).unwrap();
        let p1 = compute_pairs(&c, &total_order(&c, &f).unwrap());
        let p2 = compute_pairs(&c, &total_order(&c, &shifted).unwrap());
        assert_eq!(p1, p2);
    }
}

#[test]
fn relabelled_cells_give_the_same_key_sequence() {
    use persopt_core::{Cell, ComplexKind};
    // the same path graph with two different vertex labelings
    let build = |edges: &[(usize, usize)]| {
        let mut cells: Vec<Cell> = (0..3)
            .map(|v| Cell {
                id: v,
                dim: 0,
                vertices: vec![v],
                boundary: vec![],
            })
            .collect();
        for (i, &(a, b)) in edges.iter().enumerate() {
            cells.push(Cell {
                id: 3 + i,
                dim: 1,
                vertices: vec![a.min(b), a.max(b)],
                boundary: vec![a.min(b), a.max(b)],
            });
        }
        Complex::from_cells(ComplexKind::Simplicial, cells).unwrap()
    };
    let c1 = build(&[(0, 1), (1, 2)]);
    let c2 = build(&[(0, 2), (1, 2)]); // middle vertex relabelled
    let f1 = Filtration::new(vec![0.3, 0.1, 0.2, 0.5, 0.4]).unwrap();
    let f2 = Filtration::new(vec![0.3, 0.2, 0.1, 0.5, 0.4]).unwrap();
    let key_seq = |c: &Complex, f: &Filtration| {
        let ord = total_order(c, f).unwrap();
        (0..c.len())
            .map(|p| {
                let cell = ord.cell_at(p);
                (f.value(cell), c.cell(cell).dim)
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(key_seq(&c1, &f1), key_seq(&c2, &f2));
}

#[test]
fn every_family_produces_valid_filtrations() {
    use persopt_core::{
        dtm_weights, height_filtration, lower_star_filtration, rips_filtration, rips_from_matrix,
        weighted_rips_filtration, DenseMatrix, HeightDirection, VertexFunction,
    };
    let mut rng = rng(23);
    let simplex = Complex::full_simplex(5, 3).unwrap();
    let grid = Complex::cubical_grid(3, 4).unwrap();
    for _ in 0..25 {
        let x = random_cloud(&mut rng, 5, 2, 0.0, 1.0);
        let (f, _) = rips_filtration(&x, &simplex).unwrap();
        assert!(validate_filtration(&simplex, &f).unwrap());

        let mut m = DenseMatrix::zeros(5, 5);
        for i in 0..5 {
            for j in (i + 1)..5 {
                let v = persopt_core::sample::uniform01(&mut rng);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let (f, _) = rips_from_matrix(&m, &simplex).unwrap();
        assert!(validate_filtration(&simplex, &f).unwrap());

        let (w, _) = dtm_weights(&x, 2).unwrap();
        let (f, _) = weighted_rips_filtration(&x, &w, &simplex).unwrap();
        assert!(validate_filtration(&simplex, &f).unwrap());

        let vf = VertexFunction::new(
            (0..12)
                .map(|_| persopt_core::sample::uniform01(&mut rng))
                .collect(),
        )
        .unwrap();
        let (f, _) = lower_star_filtration(&vf, &grid).unwrap();
        assert!(validate_filtration(&grid, &f).unwrap());

        let img = DenseMatrix::new(
            3,
            4,
            (0..12)
                .map(|_| if persopt_core::sample::uniform01(&mut rng) < 0.5 { 0.0 } else { 1.0 })
                .collect(),
        )
        .unwrap();
        let theta = persopt_core::sample::uniform_range(&mut rng, -3.0, 3.0);
        let (hf, _) = height_filtration(&img, HeightDirection::new(theta).unwrap()).unwrap();
        let (f, _) = lower_star_filtration(&hf, &grid).unwrap();
        assert!(validate_filtration(&grid, &f).unwrap());
    }
}

#[test]
fn rips_is_invariant_under_rigid_motions() {
    use persopt_core::{rips_filtration, PointCloud};
    let k = Complex::full_simplex(5, 2).unwrap();
    let mut rng = rng(29);
    for _ in 0..20 {
        let x = random_cloud(&mut rng, 5, 2, -1.0, 1.0);
        let angle = persopt_core::sample::uniform_range(&mut rng, 0.0, std::f64::consts::TAU);
        let (dx, dy) = (
            persopt_core::sample::uniform_range(&mut rng, -5.0, 5.0),
            persopt_core::sample::uniform_range(&mut rng, -5.0, 5.0),
        );
        let rotated: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                let p = x.point(i);
                vec![
                    angle.cos() * p[0] - angle.sin() * p[1] + dx,
                    angle.sin() * p[0] + angle.cos() * p[1] + dy,
                ]
            })
            .collect();
        let y = PointCloud::from_rows(&rotated).unwrap();
        let (fx, _) = rips_filtration(&x, &k).unwrap();
        let (fy, _) = rips_filtration(&y, &k).unwrap();
        for (a, b) in fx.values().iter().zip(fy.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn dtm_is_one_lipschitz_in_each_point() {
    use persopt_core::{dtm_weights, PointCloud};
    let mut rng = rng(31);
    for _ in 0..20 {
        let x = random_cloud(&mut rng, 6, 2, 0.0, 1.0);
        let (w0, _) = dtm_weights(&x, 3).unwrap();
        let mut moved = x.coords().to_vec();
        let delta = 1e-3;
        moved[0] += delta;
        let y = PointCloud::from_flat(moved, 2).unwrap();
        let (w1, _) = dtm_weights(&y, 3).unwrap();
        for (a, b) in w0.values().iter().zip(w1.values()) {
            assert!((a - b).abs() <= delta + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any vertex function yields a monotone lower-star filtration on a grid.
    #[test]
    fn lower_star_is_always_monotone(values in proptest::collection::vec(-1e3f64..1e3, 6)) {
        use persopt_core::{lower_star_filtration, VertexFunction};
        let c = Complex::cubical_grid(2, 3).unwrap();
        let vf = VertexFunction::new(values).unwrap();
        let (f, _) = lower_star_filtration(&vf, &c).unwrap();
        prop_assert!(validate_filtration(&c, &f).unwrap());
    }

    /// The coordinate permutation holds for arbitrary monotone inputs, not
    /// just generic ones.
    #[test]
    fn permutation_property_with_ties(raw in proptest::collection::vec(0u8..4, 7)) {
        let c = Complex::full_simplex(3, 2).unwrap();
        let mut values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        for cell in c.cells() {
            for &b in &cell.boundary {
                if values[b] > values[cell.id] {
                    values[cell.id] = values[b];
                }
            }
        }
        let f = Filtration::new(values.clone()).unwrap();
        let d = diagram(&c, &f).unwrap();
        let mut input: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
        input.sort_unstable();
        prop_assert_eq!(coordinate_multiset(&d), input);
    }
}
