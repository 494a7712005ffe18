#![allow(dead_code)]

pub mod brute;
pub mod mutants;
pub mod toys;

use winomem::ring::Matrix;

/// `alpha*A*B (+ beta*C)` by the triple loop.
pub fn oracle(a: &Matrix, b: &Matrix, c: &Matrix, alpha: u32, beta: Option<u32>) -> Matrix {
    let p = a.modulus();
    let mut out = Matrix::zeros(c.rows(), c.cols(), p);
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            let mut s = 0;
            for l in 0..a.cols() {
                s = p.add(s, p.mul(a.get(i, l), b.get(l, j)));
            }
            let mut v = p.mul(alpha, s);
            if let Some(bt) = beta {
                v = p.add(v, p.mul(bt, c.get(i, j)));
            }
            out.set(i, j, v);
        }
    }
    out
}
