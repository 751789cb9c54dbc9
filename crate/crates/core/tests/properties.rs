//! Property tests for the solver and protocol invariants.

use proptest::prelude::*;

use qsn_core::l1::L1Problem;
use qsn_core::pauli::{DiagonalHamiltonian, GeneratorSet, PauliString, ZString};
use qsn_core::protocol::{compile, predict_phase, Branch};

/// A generator set with matching alpha: n qubits, m distinct non-identity
/// masks, alpha entries in [-1, 1].
fn instance() -> impl Strategy<Value = (GeneratorSet, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|n| {
        let m_max = ((1usize << n) - 1).min(6);
        (1usize..=m_max).prop_flat_map(move |m| {
            (
                proptest::collection::btree_set(1u64..(1u64 << n), m),
                proptest::collection::vec(-1.0f64..1.0, m),
            )
                .prop_filter_map(
                    "need exactly m distinct masks",
                    move |(masks, alpha)| {
                        if masks.len() != m {
                            return None;
                        }
                        let gens = GeneratorSet::new(
                            n,
                            masks.into_iter().map(|mk| ZString::new(mk, n).unwrap()),
                        )
                        .unwrap();
                        Some((gens, alpha))
                    },
                )
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solution_invariants((gens, alpha) in instance()) {
        let prob = L1Problem::from_generators(&gens, alpha.clone(), 1.0).unwrap();
        let sol = prob.solve().unwrap();

        // Feasibility and zero sum.
        let mut resid = alpha.clone();
        let mut sum = 0.0;
        for e in sol.support() {
            sum += e.v;
            for (i, g) in gens.iter().enumerate() {
                resid[i] -= f64::from(g.eigenvalue(e.x)) * e.v;
            }
        }
        for r in &resid {
            prop_assert!(r.abs() <= 1e-9, "residual {r}");
        }
        prop_assert!(sum.abs() <= 1e-9);

        // Vertex sparsity.
        prop_assert!(sol.support_size() <= gens.len() + 1);

        // Strong duality and columnwise dual feasibility.
        prop_assert!((sol.dual().objective() - sol.l1()).abs() <= 1e-9);
        prop_assert!(sol.dual().is_feasible_for(&prob));

        // Plancherel bound for Z-string generators.
        let l2 = alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(sol.l1() <= l2 + 1e-9);
    }

    #[test]
    fn scaling_covariance((gens, alpha) in instance(), c in -3.0f64..3.0) {
        prop_assume!(c.abs() > 1e-3);
        let base = L1Problem::from_generators(&gens, alpha.clone(), 1.0)
            .unwrap()
            .solve()
            .unwrap();
        let scaled: Vec<f64> = alpha.iter().map(|v| c * v).collect();
        let sol = L1Problem::from_generators(&gens, scaled, 1.0)
            .unwrap()
            .solve()
            .unwrap();
        prop_assert!((sol.l1() - c.abs() * base.l1()).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn schedule_and_phase((gens, alpha) in instance(),
                          theta in proptest::collection::vec(-0.5f64..0.5, 6),
                          t in 0.2f64..2.0) {
        prop_assume!(alpha.iter().any(|v| v.abs() > 0.05));
        let sol = L1Problem::from_generators(&gens, alpha.clone(), t)
            .unwrap()
            .solve()
            .unwrap();
        prop_assume!(!sol.is_zero());
        let proto = compile(&sol, gens.qubits(), t).unwrap();

        // Both halves of the superposition evolve for exactly t.
        for branch in [Branch::Plus, Branch::Minus] {
            let total: f64 = proto.segments(branch).iter().map(|s| s.1).sum();
            prop_assert!((total - t).abs() <= 1e-12);
        }

        // Accumulated phase equals 2 t q / ||a||_1.
        let theta = &theta[..gens.len()];
        let h = DiagonalHamiltonian::from_generator_coefficients(&gens, theta).unwrap();
        let q: f64 = alpha.iter().zip(theta).map(|(a, th)| a * th).sum();
        let phase = predict_phase(&proto, &h);
        prop_assert!((phase - 2.0 * t * q / sol.l1()).abs() <= 1e-9);
    }

    #[test]
    fn pauli_text_round_trip(s in "[IXYZ]{1,12}") {
        let p: PauliString = s.parse().unwrap();
        prop_assert_eq!(p.to_string(), s);
    }
}
