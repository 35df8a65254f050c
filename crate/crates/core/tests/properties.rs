use oism::basis::Workspace;
use oism::moments::{modulation_shrink, MomentVector};
use oism::{trig_basis_nd, ProductTable};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #[test]
    fn shrinkage_never_increases_magnitude(
        pairs in prop::collection::vec((-5.0f64..5.0, 0.0f64..3.0), 1..40)
    ) {
        let mut theta_hat = vec![1.0];
        let mut var_hat = vec![0.0];
        for (t, v) in &pairs {
            theta_hat.push(*t);
            var_hat.push(*v);
        }
        let n = theta_hat.len();
        let m = MomentVector {
            theta: theta_hat.clone(),
            theta_hat: theta_hat.clone(),
            var_hat,
            gamma: vec![1.0; n],
            n_samples: 100,
        };
        let s = modulation_shrink(&m);
        prop_assert_eq!(s.theta[0], 1.0);
        for k in 0..n {
            prop_assert!(s.theta[k].abs() <= s.theta_hat[k].abs());
            prop_assert!((0.0..=1.0).contains(&s.gamma[k]));
        }
    }

    #[test]
    fn trig_products_hold_pointwise(x in -PI..PI, y in -PI..PI) {
        thread_local! {
            static SETUP: (oism::EigenBasis, ProductTable) = {
                let b = trig_basis_nd(2, -8.0).unwrap();
                let t = ProductTable::build(&b).unwrap();
                (b, t)
            };
        }
        SETUP.with(|(basis, table)| {
            let mut ws = Workspace::new(basis);
            let mut ext = vec![0.0; basis.extended().len()];
            basis.eval_extended_values(&[x, y], &mut ws, &mut ext);
            for k in 0..basis.len() {
                for l in k..basis.len() {
                    let rhs: f64 = table.get(k, l).unwrap().iter().map(|&(h, b)| b * ext[h]).sum();
                    prop_assert!((ext[k] * ext[l] - rhs).abs() < 1e-10);
                }
            }
            Ok(())
        })?;
    }
}
