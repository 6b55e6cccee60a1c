#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Brute-force `min ||w||_1` s.t. `||b - M w||_inf <= gamma` for `d <= 3`:
/// a grid of step `res` over the leading `d - 1` coordinates of the box
/// `[-radius, radius]`, with the last coordinate minimized exactly.
pub fn grid_dantzig(b: &DVector<f64>, m: &DMatrix<f64>, gamma: f64, res: f64, radius: f64) -> Option<f64> {
    let d = b.len();
    assert!((1..=3).contains(&d));
    let steps = (radius / res).round() as i64;
    let axis: Vec<f64> = (-steps..=steps).map(|i| i as f64 * res).collect();
    let last = d - 1;
    let mut best = f64::INFINITY;
    let mut prefix = vec![0.0; last];
    let eval = |prefix: &[f64]| -> Option<f64> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..d {
            let r: f64 = b[i] - prefix.iter().enumerate().map(|(j, w)| m[(i, j)] * w).sum::<f64>();
            let a = m[(i, last)];
            if a.abs() < 1e-300 {
                if r.abs() > gamma {
                    return None;
                }
                continue;
            }
            // |r - a w| <= gamma
            let (x, y) = ((r - gamma) / a, (r + gamma) / a);
            lo = lo.max(x.min(y));
            hi = hi.min(x.max(y));
        }
        if lo > hi {
            return None;
        }
        let w_last = if lo > 0.0 { lo } else if hi < 0.0 { hi } else { 0.0 };
        Some(prefix.iter().map(|v| v.abs()).sum::<f64>() + w_last.abs())
    };
    let mut consider = |v: Option<f64>| {
        if let Some(v) = v {
            best = best.min(v);
        }
    };
    match last {
        0 => consider(eval(&prefix)),
        1 => {
            for &a in &axis {
                prefix[0] = a;
                consider(eval(&prefix));
            }
        }
        _ => {
            for &a in &axis {
                for &c in &axis {
                    prefix[0] = a;
                    prefix[1] = c;
                    consider(eval(&prefix));
                }
            }
        }
    }
    best.is_finite().then_some(best)
}
