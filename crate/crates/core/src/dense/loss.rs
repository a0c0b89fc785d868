//! Triplet margin loss with L2 distances on both terms:
//! sum over negatives of max(|q - p| - |q - n| + margin, 0).

use crate::util::norm;

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "contract violation: dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn triplet_loss<N: AsRef<[f64]>>(q: &[f64], pos: &[f64], negatives: &[N], margin: f64) -> f64 {
    let d_pos = norm(&diff(q, pos));
    negatives
        .iter()
        .map(|n| (d_pos - norm(&diff(q, n.as_ref())) + margin).max(0.0))
        .sum()
}

/// Loss value and gradients with respect to every input vector.
#[derive(Debug, Clone)]
pub struct TripletGrad {
    pub loss: f64,
    pub q: Vec<f64>,
    pub pos: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Unit vector along `x`, or zero at the origin (a subgradient of the norm).
fn unit(x: Vec<f64>) -> (f64, Vec<f64>) {
    let n = norm(&x);
    if n == 0.0 {
        (0.0, vec![0.0; x.len()])
    } else {
        (n, x.into_iter().map(|v| v / n).collect())
    }
}

pub fn triplet_loss_grad<N: AsRef<[f64]>>(q: &[f64], pos: &[f64], negatives: &[N], margin: f64) -> TripletGrad {
    let d = q.len();
    let (d_pos, u_pos) = unit(diff(q, pos));
    let mut g_q = vec![0.0; d];
    let mut g_pos = vec![0.0; d];
    let mut g_negs = Vec::with_capacity(negatives.len());
    let mut loss = 0.0;
    for n in negatives {
        let (d_neg, u_neg) = unit(diff(q, n.as_ref()));
        let l = d_pos - d_neg + margin;
        let mut g_n = vec![0.0; d];
        if l > 0.0 {
            loss += l;
            for k in 0..d {
                g_q[k] += u_pos[k] - u_neg[k];
                g_pos[k] -= u_pos[k];
            }
            g_n.copy_from_slice(&u_neg);
        }
        g_negs.push(g_n);
    }
    TripletGrad {
        loss,
        q: g_q,
        pos: g_pos,
        negatives: g_negs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn satisfied_margin_gives_zero() {
        let q = [0.0, 0.0];
        let p = [0.1, 0.0];
        let n = [[2.0, 0.0], [0.0, -1.5]];
        assert_eq!(triplet_loss(&q, &p, &n, 1.0), 0.0);
    }

    #[test]
    fn coincident_points_give_the_margin() {
        let v = [0.3, -0.2, 0.9];
        assert_eq!(triplet_loss(&v, &v, &[v], 0.7), 0.7);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dimension_mismatch_panics() {
        triplet_loss(&[1.0, 2.0], &[1.0], &[[0.0, 0.0]], 1.0);
    }

    proptest! {
        #[test]
        fn nonnegative_and_translation_invariant(
            q in proptest::collection::vec(-2.0f64..2.0, 4),
            p in proptest::collection::vec(-2.0f64..2.0, 4),
            n in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 4), 1..5),
            shift in proptest::collection::vec(-5.0f64..5.0, 4),
            margin in 0.01f64..2.0,
        ) {
            let l = triplet_loss(&q, &p, &n, margin);
            prop_assert!(l >= 0.0);
            let add = |v: &[f64]| v.iter().zip(&shift).map(|(a, b)| a + b).collect::<Vec<f64>>();
            let ns: Vec<Vec<f64>> = n.iter().map(|v| add(v)).collect();
            let l2 = triplet_loss(&add(&q), &add(&p), &ns, margin);
            prop_assert!((l - l2).abs() < 1e-9);
            prop_assert!((triplet_loss_grad(&q, &p, &n, margin).loss - l).abs() < 1e-12);
        }
    }
}
