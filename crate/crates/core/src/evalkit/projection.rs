//! Principal-component projection of fingerprints, with CSV and SVG output.

use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use super::EvalError;
use crate::chem::Fingerprint;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    /// One row per molecule, one column per component.
    pub coords: Vec<Vec<f64>>,
    /// Variance captured by each component.
    pub variances: Vec<f64>,
    /// Squared Frobenius norm of the centred data left after removing each
    /// successive component.
    pub residuals: Vec<f64>,
}

/// Centred bit matrix, one row per fingerprint.
fn centred(fps: &[Fingerprint]) -> Array2<f64> {
    let width = fps[0].width();
    let mut x = Array2::<f64>::zeros((fps.len(), width));
    for (i, fp) in fps.iter().enumerate() {
        for b in fp.ones() {
            x[[i, b]] = 1.0;
        }
    }
    let mean = x.mean_axis(Axis(0)).expect("rows");
    x - &mean
}

/// Leading eigenvector of `x^T x` by power iteration from a fixed start.
fn leading_direction(x: &Array2<f64>) -> Option<Array1<f64>> {
    let d = x.ncols();
    let mut v = Array1::from_shape_fn(d, |j| 1.0 + ((j * 7919) % 101) as f64 / 101.0);
    v /= v.dot(&v).sqrt();
    let mut prev = 0.0;
    for _ in 0..5000 {
        let w = x.t().dot(&x.dot(&v));
        let norm = w.dot(&w).sqrt();
        if norm < 1e-12 {
            return None;
        }
        v = w / norm;
        if (norm - prev).abs() <= 1e-12 * norm {
            break;
        }
        prev = norm;
    }
    // Fix the sign: the largest-magnitude entry is positive.
    let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |(bi, bv), (i, &x)| if x.abs() > bv + 1e-12 { (i, x.abs()) } else { (bi, bv) });
    if v[imax] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
    Some(v)
}

/// Top-`k` principal components by power iteration with deflation.
pub fn project_chemical_space(fps: &[Fingerprint], k: usize) -> Result<Projection, EvalError> {
    if fps.len() < 2 {
        return Err(EvalError::TooFewMolecules(fps.len()));
    }
    let width = fps[0].width();
    if fps.iter().any(|f| f.width() != width) {
        return Err(EvalError::Projection("fingerprint widths differ".into()));
    }
    let mut x = centred(fps);
    let n = fps.len();
    let mut coords = vec![Vec::with_capacity(k); n];
    let mut variances = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for _ in 0..k {
        let (scores, var) = match leading_direction(&x) {
            Some(v) => {
                let s = x.dot(&v);
                // Deflate: remove the component from every row.
                for (mut row, &si) in x.rows_mut().into_iter().zip(s.iter()) {
                    row.scaled_add(-si, &v);
                }
                let var = s.dot(&s) / (n - 1) as f64;
                (s.to_vec(), var)
            }
            None => (vec![0.0; n], 0.0),
        };
        for (c, s) in coords.iter_mut().zip(scores) {
            c.push(s);
        }
        variances.push(var);
        residuals.push(x.iter().map(|v| v * v).sum());
    }
    Ok(Projection { coords, variances, residuals })
}

/// `id,pc1,pc2,cohort` rows.
pub fn projection_csv(ids: &[String], cohorts: &[String], p: &Projection, config_hash: &str) -> String {
    let mut out = format!("# config_hash={config_hash}\nid,pc1,pc2,cohort\n");
    for ((id, cohort), c) in ids.iter().zip(cohorts).zip(&p.coords) {
        let pc1 = c.first().copied().unwrap_or(0.0);
        let pc2 = c.get(1).copied().unwrap_or(0.0);
        out.push_str(&format!("{id},{pc1:.6},{pc2:.6},{cohort}\n"));
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Scatter plot of the first two components, coloured by cohort.
pub fn projection_svg(cohorts: &[String], p: &Projection) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let pts: Vec<(f64, f64)> =
        p.coords.iter().map(|c| (c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0))).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let sx = if x1 > x0 { (w - 2.0 * pad) / (x1 - x0) } else { 0.0 };
    let sy = if y1 > y0 { (h - 2.0 * pad) / (y1 - y0) } else { 0.0 };
    let mut names: Vec<&str> = Vec::new();
    for c in cohorts {
        if !names.contains(&c.as_str()) {
            names.push(c);
        }
    }
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">PC1</text>\n\
         <text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">PC2</text>\n",
        w / 2.0,
        h - 8.0,
        h / 2.0,
        h / 2.0
    );
    for (&(x, y), c) in pts.iter().zip(cohorts) {
        let color = PALETTE[names.iter().position(|n| n == c).unwrap_or(0) % PALETTE.len()];
        let cx = pad + (x - x0) * sx;
        let cy = h - pad - (y - y0) * sy;
        out.push_str(&format!("<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n"));
    }
    for (i, n) in names.iter().enumerate() {
        let y = pad + 16.0 * i as f64;
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{y}\" r=\"4\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" font-size=\"12\">{n}</text>\n",
            w - 150.0,
            PALETTE[i % PALETTE.len()],
            w - 140.0,
            y + 4.0
        ));
    }
    out.push_str("</svg>\n");
    out
}
