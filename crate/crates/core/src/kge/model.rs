//! Translational scoring functions and their gradients. Scores are
//! distances: lower means more plausible.

use serde::{Deserialize, Serialize};

use crate::util::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KgModel {
    TransE,
    TransH,
}

impl KgModel {
    pub fn name(self) -> &'static str {
        match self {
            KgModel::TransE => "transe",
            KgModel::TransH => "transh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "transe" => Some(KgModel::TransE),
            "transh" => Some(KgModel::TransH),
            _ => None,
        }
    }
}

fn same_dim(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len(), "contract violation: dimension mismatch");
}

fn check_unit(w: &[f64]) {
    let n = norm(w);
    assert!((n - 1.0).abs() <= 1e-6, "contract violation: hyperplane normal has norm {n}");
}

/// `|h + r - t|`
pub fn transe_score(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    same_dim(h, r);
    same_dim(h, t);
    h.iter().zip(r).zip(t).map(|((a, b), c)| (a + b - c).powi(2)).sum::<f64>().sqrt()
}

/// Projection of `v` onto the hyperplane with unit normal `w`.
pub fn transh_project(v: &[f64], w: &[f64]) -> Vec<f64> {
    same_dim(v, w);
    check_unit(w);
    project(v, w)
}

fn project(v: &[f64], w: &[f64]) -> Vec<f64> {
    let s = dot(w, v);
    v.iter().zip(w).map(|(a, b)| a - s * b).collect()
}

/// `|proj(h) + d - proj(t)|` on the hyperplane of `w`.
pub fn transh_score(h: &[f64], t: &[f64], w: &[f64], d: &[f64]) -> f64 {
    same_dim(h, t);
    same_dim(h, d);
    same_dim(h, w);
    check_unit(w);
    transh_raw(h, t, w, d).0
}

// Returns the score and the residual vector x = e - (w.e) w + d, e = h - t.
fn transh_raw(h: &[f64], t: &[f64], w: &[f64], d: &[f64]) -> (f64, Vec<f64>, f64) {
    let e: Vec<f64> = h.iter().zip(t).map(|(a, b)| a - b).collect();
    let s = dot(w, &e);
    let x: Vec<f64> = e.iter().zip(w).zip(d).map(|((ei, wi), di)| ei - s * wi + di).collect();
    (norm(&x), x, s)
}

/// Score and its gradient with respect to each input. `rel` is the
/// translation (`r` or `d_r`); `normal` is empty for TransE.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrad {
    pub value: f64,
    pub h: Vec<f64>,
    pub t: Vec<f64>,
    pub rel: Vec<f64>,
    pub normal: Vec<f64>,
}

fn unit(x: &[f64], n: f64) -> Vec<f64> {
    if n == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| v / n).collect()
    }
}

pub fn score_grad(model: KgModel, h: &[f64], t: &[f64], rel: &[f64], normal: &[f64]) -> ScoreGrad {
    match model {
        KgModel::TransE => {
            let x: Vec<f64> = h.iter().zip(rel).zip(t).map(|((a, b), c)| a + b - c).collect();
            let value = norm(&x);
            let u = unit(&x, value);
            ScoreGrad {
                value,
                t: u.iter().map(|v| -v).collect(),
                h: u.clone(),
                rel: u,
                normal: Vec::new(),
            }
        }
        KgModel::TransH => {
            let w = normal;
            let (value, x, s) = transh_raw(h, t, w, rel);
            let u = unit(&x, value);
            let wu = dot(w, &u);
            let g_h: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - wu * b).collect();
            let g_w: Vec<f64> = h.iter().zip(t).zip(&u).map(|((a, b), ui)| -wu * (a - b) - s * ui).collect();
            ScoreGrad {
                value,
                t: g_h.iter().map(|v| -v).collect(),
                h: g_h,
                rel: u,
                normal: g_w,
            }
        }
    }
}

/// `max(margin + f(pos) - f(neg), 0)` with the score gradients of both sides
/// already multiplied by the hinge derivative (+1 for the positive, -1 for
/// the negative, or 0 when inactive).
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrad {
    pub loss: f64,
    pub pos: ScoreGrad,
    pub neg: ScoreGrad,
}

#[allow(clippy::too_many_arguments)]
pub fn pair_loss_grad(
    model: KgModel,
    pos: (&[f64], &[f64]),
    neg: (&[f64], &[f64]),
    rel: &[f64],
    normal: &[f64],
    margin: f64,
) -> PairGrad {
    let mut p = score_grad(model, pos.0, pos.1, rel, normal);
    let mut n = score_grad(model, neg.0, neg.1, rel, normal);
    let loss = margin + p.value - n.value;
    let active = if loss > 0.0 { 1.0 } else { 0.0 };
    for g in [&mut p.h, &mut p.t, &mut p.rel, &mut p.normal] {
        g.iter_mut().for_each(|x| *x *= active);
    }
    for g in [&mut n.h, &mut n.t, &mut n.rel, &mut n.normal] {
        g.iter_mut().for_each(|x| *x *= -active);
    }
    PairGrad {
        loss: loss.max(0.0),
        pos: p,
        neg: n,
    }
}

/// Soft orthogonality constraint `max((w.d)^2 / |d|^2 - eps^2, 0)` and its
/// gradients with respect to `w` and `d`.
pub fn transh_penalty(w: &[f64], d: &[f64], eps: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let q = dot(d, d);
    let zero = || (0.0, vec![0.0; w.len()], vec![0.0; d.len()]);
    if q == 0.0 {
        return zero();
    }
    let wd = dot(w, d);
    let ratio = wd * wd / q;
    if ratio <= eps * eps {
        return zero();
    }
    let g_w = d.iter().map(|x| 2.0 * wd * x / q).collect();
    let g_d = d.iter().zip(w).map(|(di, wi)| 2.0 * wd * wi / q - 2.0 * ratio * di / q).collect();
    (ratio - eps * eps, g_w, g_d)
}
