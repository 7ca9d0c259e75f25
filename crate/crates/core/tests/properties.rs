use ctrap::multiindex::{
    count_positive_compositions, multiplicity_total, positive_compositions, positive_grid,
};
use ctrap::weights::{richardson_from_levels, solve_system};
use ctrap::*;
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(n, p)| (Just(n), Just(p), 0..=n.min(2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orbit_size_is_power_of_two((n, p, kappa) in shape()) {
        let grid = enumerate_grid(n, p, kappa).unwrap();
        for (eta, orbit) in grid.points.iter().zip(&grid.orbits) {
            prop_assert_eq!(orbit.len(), 1usize << (n - eta.zeros()));
            for beta in orbit {
                prop_assert_eq!(&beta.abs(), eta);
            }
        }
    }

    #[test]
    fn grid_json_round_trip((n, p, kappa) in shape()) {
        let grid = enumerate_grid(n, p, kappa).unwrap();
        let back: CorrectionGrid = serde_json::from_str(&serde_json::to_string(&grid).unwrap()).unwrap();
        prop_assert_eq!(back.points, grid.points);
    }

    #[test]
    fn blocks_partition_the_grid((n, p, kappa) in shape()) {
        let grid = enumerate_grid(n, p, kappa).unwrap();
        let mut next = 0;
        for block in &grid.blocks {
            prop_assert_eq!(block.range.start, next);
            next = block.range.end;
            for i in block.range.clone() {
                prop_assert_eq!(grid.points[i].0[kappa..].iter().filter(|&&v| v == 0).count(), block.k);
            }
        }
        prop_assert_eq!(next, grid.len());
        for (i, eta) in grid.points.iter().enumerate() {
            prop_assert!(eta.norm1() as usize <= p);
            prop_assert!(eta.0[..kappa].iter().all(|&v| v >= 1));
            prop_assert_eq!(grid.index_of(eta), Some(i));
        }
    }

    #[test]
    fn composition_count_matches_enumeration(n in 1usize..=4, p in 0usize..=8) {
        prop_assert_eq!(count_positive_compositions(n, p), positive_compositions(n, p).len() as u64);
    }

    #[test]
    fn enumeration_lemma(n in 1usize..=4, m in 2usize..=8, j in 1usize..8) {
        prop_assume!(j < m);
        let set = positive_compositions(n, m);
        prop_assert_eq!(multiplicity_total(&set, j as u32), n as u64 * count_positive_compositions(n - 1, m - j));
    }

    #[test]
    fn k_structure_and_solve((n, p, kappa) in shape()) {
        let grid = enumerate_grid(n, p, kappa).unwrap();
        prop_assume!(!grid.is_empty());
        let k = assemble_k(&grid);
        prop_assert!(verify_block_structure(&k).is_ok());
        let rhs: Vec<DoubleDouble> = (0..grid.len()).map(|i| DoubleDouble::from(1.0 + i as f64)).collect();
        let (_, rel) = solve_system(&k, &rhs).unwrap();
        prop_assert!(rel <= 1e-12, "residual {rel:e}");
    }

    #[test]
    fn positive_grid_is_projection_of_full_block(m in 1usize..=4, p in 0usize..=5) {
        let grid = enumerate_grid(m, p, 0).unwrap();
        let interior: Vec<MultiIndex> = grid.points.iter().filter(|x| x.zeros() == 0).cloned().collect();
        prop_assert_eq!(interior, positive_grid(m, p));
    }

    #[test]
    fn monomial_kernels_are_admissible(
        alpha in prop::collection::vec(0u32..=3, 2..=4),
        frac in 0.05f64..0.95,
    ) {
        let n = alpha.len();
        let deg: u32 = alpha.iter().sum();
        let r = deg as f64 + frac * n as f64;
        let k = make_monomial_kernel(MultiIndex(alpha.clone()), r).unwrap();
        prop_assert_eq!(k.kappa, alpha.iter().filter(|&&a| a % 2 == 1).count());
        prop_assert!((k.delta - (n as f64 + deg as f64 - r)).abs() < 1e-12);
        let report = validate_kernel(&k, 50, 1e-12);
        prop_assert!(report.passed, "{report:?}");
        let internal = k.internal_alpha().unwrap();
        prop_assert!(internal[..k.kappa].iter().all(|a| a % 2 == 1));
        prop_assert!(internal[k.kappa..].iter().all(|a| a % 2 == 0));
    }

    #[test]
    fn richardson_removes_two_orders(
        a in -2.0f64..2.0, b in -5.0f64..5.0, d in -5.0f64..5.0, order in 1u32..=8,
    ) {
        let h0 = 0.125;
        let levels: Vec<Vec<DoubleDouble>> = (0..4)
            .map(|k| {
                let h = DoubleDouble::from(h0 / (1 << k) as f64);
                let v = DoubleDouble::from(a)
                    + DoubleDouble::from(b) * h.powi(order as i32)
                    + DoubleDouble::from(d) * h.powi(order as i32 + 2);
                vec![v]
            })
            .collect();
        let (lim, est) = richardson_from_levels(&levels, order as f64).unwrap();
        prop_assert!((lim[0] - DoubleDouble::from(a)).to_f64().abs() < 1e-26);
        prop_assert!(est < 1e-25);
    }

    #[test]
    fn double_double_products_are_exact(x in -1i64 << 40..1i64 << 40, y in -1i64 << 40..1i64 << 40) {
        let prod = DoubleDouble::from(x as f64) * DoubleDouble::from(y as f64);
        prop_assert_eq!(prod, DoubleDouble::from_i128(x as i128 * y as i128));
        let sum = DoubleDouble::from_i128(x as i128 * y as i128) + DoubleDouble::from(1e-9);
        // Double-double carries about 104 bits relative to the leading term.
        let ulp = (x as f64 * y as f64).abs() * 2f64.powi(-104);
        prop_assert!(((sum - prod).to_f64() - 1e-9).abs() <= 2.0 * ulp + 1e-24);
    }
}

#[test]
fn signed_extension_reproduces_constant_correction() {
    let k = s1();
    let grid = enumerate_grid(3, 2, 0).unwrap();
    let table = compute_weights(&k, &grid, &SolveOptions::default()).unwrap();
    let h: f64 = 0.1;
    let phi = RegularPart::new(std::sync::Arc::new(|_: &[f64]| 1.0), 10.0, None);
    let direct = correction_term(&phi, &table, h);
    let mut expanded = 0.0;
    for b0 in -2i64..=2 {
        for b1 in -2i64..=2 {
            for b2 in -2i64..=2 {
                expanded += table.signed_weight(&[b0, b1, b2]);
            }
        }
    }
    let want = h.powf(1.5) * expanded;
    assert!((direct - want).abs() < 1e-15, "{direct} vs {want}");
    let parity: f64 = table.grid.orbits.iter().zip(&table.weights).map(|(o, w)| w * o.len() as f64).sum();
    assert!((direct - h.powf(1.5) * parity).abs() < 1e-15);
}
