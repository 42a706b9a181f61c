//! Reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records every operation as a node; [`Tape::backward`] walks the
//! nodes in reverse and returns the gradient of a scalar output with respect
//! to every node. Parameters enter through [`Tape::param`], which reuses one
//! leaf per parameter so repeated use accumulates into a single gradient.

use std::collections::HashMap;

use ndarray::{concatenate, s, Array2, Axis, Zip};

use super::params::{ParamId, ParamStore};

pub type Mat = Array2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// `a + row`, the 1 x n row broadcast over every row of `a`.
    AddRow(Var, Var),
    /// `a[i][j] * col[i]`.
    MulCol(Var, Var),
    /// `a * mul + add` elementwise; only the slope matters for the gradient.
    Affine(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    LeakyRelu(Var, f64),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize, usize),
    SliceRows(Var, usize, usize),
    GatherRows(Var, Vec<usize>),
    MeanRows(Var),
    Sum(Var),
    LogSoftmaxRows(Var),
    /// Row-wise softmax over entries where the mask is true; others are 0.
    MaskedSoftmaxRows(Var, Vec<bool>),
    /// `out[i][j] = col[i] + row[j]`.
    OuterAdd(Var, Var),
    /// `out[i] = a[i][idx[i]]`, a column vector.
    PickCols(Var, Vec<usize>),
    Transpose(Var),
}

struct Node {
    value: Mat,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: HashMap<ParamId, Var>,
}

/// Gradients of one scalar with respect to every node of a tape.
pub struct Gradients {
    grads: Vec<Option<Mat>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Mat> {
        self.grads[v.0].as_ref()
    }

    /// Gradient for `v`, zeros of `shape` when `v` did not influence the output.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Mat {
        self.get(v).cloned().unwrap_or_else(|| Mat::zeros(shape))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Mat, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v)[[0, 0]]
    }

    pub fn constant(&mut self, value: Mat) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if let Some(&v) = self.params.get(&id) {
            return v;
        }
        let v = self.push(store.value(id).clone(), Op::Leaf);
        self.params.insert(id, v);
        v
    }

    /// Leaf variables created for parameters on this tape.
    pub fn param_vars(&self) -> impl Iterator<Item = (ParamId, Var)> + '_ {
        self.params.iter().map(|(&p, &v)| (p, v))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul(a, b))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.value(row).nrows(), 1, "add_row expects a 1 x n row");
        let v = self.value(a) + self.value(row);
        self.push(v, Op::AddRow(a, row))
    }

    pub fn mul_col(&mut self, a: Var, col: Var) -> Var {
        assert_eq!(self.value(col).ncols(), 1, "mul_col expects an n x 1 column");
        let v = self.value(a) * self.value(col);
        self.push(v, Op::MulCol(a, col))
    }

    pub fn affine(&mut self, a: Var, mul: f64, add: f64) -> Var {
        let v = self.value(a).mapv(|x| x * mul + add);
        self.push(v, Op::Affine(a, mul))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        self.affine(a, k, 0.0)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(sigmoid);
        self.push(v, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let v = self.value(a).mapv(|x| if x > 0.0 { x } else { slope * x });
        self.push(v, Op::LeakyRelu(a, slope))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = concatenate(Axis(1), &views).expect("row counts agree");
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = concatenate(Axis(0), &views).expect("column counts agree");
        self.push(v, Op::ConcatRows(parts.to_vec()))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![.., start..end]).to_owned();
        self.push(v, Op::SliceCols(a, start, end))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![start..end, ..]).to_owned();
        self.push(v, Op::SliceRows(a, start, end))
    }

    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Var {
        let v = self.value(a).select(Axis(0), idx);
        self.push(v, Op::GatherRows(a, idx.to_vec()))
    }

    pub fn mean_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let v = x.mean_axis(Axis(0)).expect("non-empty").insert_axis(Axis(0));
        self.push(v, Op::MeanRows(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Mat::from_elem((1, 1), self.value(a).sum());
        self.push(v, Op::Sum(a))
    }

    pub fn log_softmax_rows(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        for mut row in v.rows_mut() {
            let m = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let lse = m + row.iter().map(|&x| (x - m).exp()).sum::<f64>().ln();
            row.mapv_inplace(|x| x - lse);
        }
        self.push(v, Op::LogSoftmaxRows(a))
    }

    pub fn masked_softmax_rows(&mut self, a: Var, mask: &[bool]) -> Var {
        let x = self.value(a);
        let (n, m) = x.dim();
        assert_eq!(mask.len(), n * m);
        let mut v = Mat::zeros((n, m));
        for i in 0..n {
            let mut mx = f64::NEG_INFINITY;
            for j in 0..m {
                if mask[i * m + j] {
                    mx = mx.max(x[[i, j]]);
                }
            }
            if mx == f64::NEG_INFINITY {
                continue;
            }
            let mut z = 0.0;
            for j in 0..m {
                if mask[i * m + j] {
                    let e = (x[[i, j]] - mx).exp();
                    v[[i, j]] = e;
                    z += e;
                }
            }
            v.row_mut(i).mapv_inplace(|e| e / z);
        }
        self.push(v, Op::MaskedSoftmaxRows(a, mask.to_vec()))
    }

    pub fn outer_add(&mut self, col: Var, row: Var) -> Var {
        let c = self.value(col);
        let r = self.value(row);
        assert_eq!(c.ncols(), 1);
        assert_eq!(r.nrows(), 1);
        let v = c + r;
        self.push(v, Op::OuterAdd(col, row))
    }

    pub fn pick_cols(&mut self, a: Var, idx: &[usize]) -> Var {
        let x = self.value(a);
        assert_eq!(x.nrows(), idx.len());
        let v = Mat::from_shape_fn((idx.len(), 1), |(i, _)| x[[i, idx[i]]]);
        self.push(v, Op::PickCols(a, idx.to_vec()))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).t().to_owned();
        self.push(v, Op::Transpose(a))
    }

    /// Gradients of the 1 x 1 node `out` with respect to every node.
    pub fn backward(&self, out: Var) -> Gradients {
        assert_eq!(self.value(out).dim(), (1, 1), "backward needs a scalar output");
        self.backward_with(out, Mat::from_elem((1, 1), 1.0))
    }

    /// Reverse pass seeded with `seed` as the gradient of `out`.
    pub fn backward_with(&self, out: Var, seed: Mat) -> Gradients {
        let mut grads: Vec<Option<Mat>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[out.0] = Some(seed);
        fn acc(grads: &mut [Option<Mat>], v: Var, g: Mat) {
            match &mut grads[v.0] {
                Some(x) => *x += &g,
                slot @ None => *slot = Some(g),
            }
        }
        for i in (0..=out.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            let val = &node.value;
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(*b).t());
                    let gb = self.value(*a).t().dot(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g.clone());
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, -&g);
                }
                Op::Mul(a, b) => {
                    acc(&mut grads, *a, &g * self.value(*b));
                    acc(&mut grads, *b, &g * self.value(*a));
                }
                Op::AddRow(a, row) => {
                    acc(&mut grads, *row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(&mut grads, *a, g.clone());
                }
                Op::MulCol(a, col) => {
                    let gc = (&g * self.value(*a)).sum_axis(Axis(1)).insert_axis(Axis(1));
                    acc(&mut grads, *col, gc);
                    acc(&mut grads, *a, &g * self.value(*col));
                }
                Op::Affine(a, mul) => acc(&mut grads, *a, g.mapv(|x| x * mul)),
                Op::Sigmoid(a) => {
                    let mut d = g.clone();
                    Zip::from(&mut d).and(val).for_each(|d, &y| *d *= y * (1.0 - y));
                    acc(&mut grads, *a, d);
                }
                Op::Tanh(a) => {
                    let mut d = g.clone();
                    Zip::from(&mut d).and(val).for_each(|d, &y| *d *= 1.0 - y * y);
                    acc(&mut grads, *a, d);
                }
                Op::Relu(a) => {
                    let mut d = g.clone();
                    Zip::from(&mut d).and(self.value(*a)).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d = 0.0
                        }
                    });
                    acc(&mut grads, *a, d);
                }
                Op::LeakyRelu(a, slope) => {
                    let mut d = g.clone();
                    Zip::from(&mut d).and(self.value(*a)).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d *= slope
                        }
                    });
                    acc(&mut grads, *a, d);
                }
                Op::ConcatCols(parts) => {
                    let mut start = 0;
                    for &p in parts {
                        let w = self.value(p).ncols();
                        acc(&mut grads, p, g.slice(s![.., start..start + w]).to_owned());
                        start += w;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut start = 0;
                    for &p in parts {
                        let h = self.value(p).nrows();
                        acc(&mut grads, p, g.slice(s![start..start + h, ..]).to_owned());
                        start += h;
                    }
                }
                Op::SliceCols(a, start, end) => {
                    let mut d = Mat::zeros(self.value(*a).dim());
                    d.slice_mut(s![.., *start..*end]).assign(&g);
                    acc(&mut grads, *a, d);
                }
                Op::SliceRows(a, start, end) => {
                    let mut d = Mat::zeros(self.value(*a).dim());
                    d.slice_mut(s![*start..*end, ..]).assign(&g);
                    acc(&mut grads, *a, d);
                }
                Op::GatherRows(a, idx) => {
                    let mut d = Mat::zeros(self.value(*a).dim());
                    for (r, &src) in idx.iter().enumerate() {
                        let mut row = d.row_mut(src);
                        row += &g.row(r);
                    }
                    acc(&mut grads, *a, d);
                }
                Op::MeanRows(a) => {
                    let n = self.value(*a).nrows();
                    let d = Mat::from_shape_fn(self.value(*a).dim(), |(_, j)| g[[0, j]] / n as f64);
                    acc(&mut grads, *a, d);
                }
                Op::Sum(a) => {
                    acc(&mut grads, *a, Mat::from_elem(self.value(*a).dim(), g[[0, 0]]));
                }
                Op::LogSoftmaxRows(a) => {
                    let mut d = g.clone();
                    for (mut drow, (grow, yrow)) in d.rows_mut().into_iter().zip(g.rows().into_iter().zip(val.rows())) {
                        let gs: f64 = grow.sum();
                        Zip::from(&mut drow).and(&yrow).for_each(|d, &y| *d -= y.exp() * gs);
                    }
                    acc(&mut grads, *a, d);
                }
                Op::MaskedSoftmaxRows(a, mask) => {
                    let (n, m) = val.dim();
                    let mut d = Mat::zeros((n, m));
                    for r in 0..n {
                        let dot: f64 = (0..m).map(|j| g[[r, j]] * val[[r, j]]).sum();
                        for j in 0..m {
                            if mask[r * m + j] {
                                d[[r, j]] = val[[r, j]] * (g[[r, j]] - dot);
                            }
                        }
                    }
                    acc(&mut grads, *a, d);
                }
                Op::OuterAdd(col, row) => {
                    acc(&mut grads, *col, g.sum_axis(Axis(1)).insert_axis(Axis(1)));
                    acc(&mut grads, *row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
                Op::PickCols(a, idx) => {
                    let mut d = Mat::zeros(self.value(*a).dim());
                    for (r, &c) in idx.iter().enumerate() {
                        d[[r, c]] = g[[r, 0]];
                    }
                    acc(&mut grads, *a, d);
                }
                Op::Transpose(a) => acc(&mut grads, *a, g.t().to_owned()),
            }
            grads[i] = Some(g);
        }
        Gradients { grads }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Central-difference check of d(sum of f)/d(x) for a tape-built function.
    fn check(x0: Mat, f: impl Fn(&mut Tape, Var) -> Var) {
        let mut t = Tape::new();
        let x = t.constant(x0.clone());
        let y = f(&mut t, x);
        let s = t.sum(y);
        let g = t.backward(s).get_or_zeros(x, x0.dim());
        let h = 1e-6;
        for idx in 0..x0.len() {
            let (r, c) = (idx / x0.ncols(), idx % x0.ncols());
            let eval = |delta: f64| {
                let mut xp = x0.clone();
                xp[[r, c]] += delta;
                let mut t = Tape::new();
                let x = t.constant(xp);
                let y = f(&mut t, x);
                t.value(y).sum()
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let err = (fd - g[[r, c]]).abs() / (1e-8 + fd.abs().max(g[[r, c]].abs()));
            assert!(err < 1e-5 || (fd - g[[r, c]]).abs() < 1e-8, "fd {fd} vs {}", g[[r, c]]);
        }
    }

    fn x() -> Mat {
        array![[0.3, -1.2, 0.7], [1.1, 0.05, -0.4]]
    }

    #[test]
    fn elementwise_ops() {
        check(x(), |t, v| t.sigmoid(v));
        check(x(), |t, v| t.tanh(v));
        check(x(), |t, v| t.leaky_relu(v, 0.2));
        check(x(), |t, v| {
            let w = t.mul(v, v);
            t.affine(w, 3.0, 1.0)
        });
    }

    #[test]
    fn structural_ops() {
        check(x(), |t, v| {
            let w = t.constant(array![[1.0, 2.0], [0.5, -1.0], [2.0, 0.1]]);
            t.matmul(v, w)
        });
        check(x(), |t, v| {
            let a = t.slice_cols(v, 1, 3);
            let b = t.slice_rows(v, 0, 1);
            let bt = t.transpose(b);
            let c = t.matmul(v, bt);
            let g = t.gather_rows(v, &[1, 1, 0]);
            let m = t.mean_rows(g);
            let r = t.concat_rows(&[m, m]);
            let cc = t.concat_cols(&[c, a, r]);
            let y = t.add_row(v, m);
            let s = t.sum(cc);
            let ss = t.gather_rows(s, &[0, 0]);
            t.mul_col(y, ss)
        });
    }

    #[test]
    fn softmax_ops() {
        check(x(), |t, v| {
            let l = t.log_softmax_rows(v);
            let w = t.constant(array![[1.0, 0.2, -0.5], [0.3, 0.9, 2.0]]);
            t.mul(l, w)
        });
        check(x(), |t, v| {
            let p = t.masked_softmax_rows(v, &[true, false, true, true, true, true]);
            let w = t.constant(array![[1.0, 0.2, -0.5], [0.3, 0.9, 2.0]]);
            t.mul(p, w)
        });
        check(x(), |t, v| {
            let c = t.slice_cols(v, 0, 1);
            let r = t.slice_rows(v, 1, 2);
            let o = t.outer_add(c, r);
            let p = t.pick_cols(o, &[2, 0]);
            let q = t.mul_col(v, p);
            t.tanh(q)
        });
    }
}
