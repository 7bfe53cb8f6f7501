use std::sync::Arc;

use memres_core::spectral::{build_operator, scale_norm, OperatorConfig, ScaleVector, SpectralOperator};
use proptest::prelude::*;

fn line(n: usize) -> Arc<SpectralOperator> {
    Arc::new(build_operator(OperatorConfig::line(1.3, n, 0.5)).unwrap())
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_norm_is_monotone(c in coeffs(16), a in -1.0f64..2.0, d in 0.0f64..2.0) {
        let v = ScaleVector::new(line(16), c).unwrap();
        prop_assert!(scale_norm(&v, a) <= scale_norm(&v, a + d) * (1.0 + 1e-14));
    }

    #[test]
    fn interpolation_inequality(c in coeffs(16), a0 in -1.0f64..2.0, a1 in -1.0f64..2.0, th in 0.0f64..1.0) {
        let v = ScaleVector::new(line(16), c).unwrap();
        let a = (1.0 - th) * a0 + th * a1;
        let rhs = scale_norm(&v, a0).powf(1.0 - th) * scale_norm(&v, a1).powf(th);
        prop_assert!(scale_norm(&v, a) <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn parseval_on_the_grid(c in coeffs(32)) {
        let op = line(32);
        let u = op.inverse(&c).unwrap();
        let l2 = (u.iter().map(|x| x * x).sum::<f64>() * op.cell_volume()).sqrt();
        let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((l2 - cn).abs() <= 1e-10 * cn.max(1.0));
    }

    #[test]
    fn transforms_invert_each_other(c in coeffs(8 * 4)) {
        let op = build_operator(OperatorConfig::rectangle([1.0, 0.7], [8, 4], 1.0)).unwrap();
        let back = op.forward(&op.inverse(&c).unwrap()).unwrap();
        for (x, y) in c.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-12 * 10.0);
        }
    }
}
