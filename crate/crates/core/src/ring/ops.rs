//! Elementwise block operations and the classical product.

use super::modulus::Elem;
use super::view::{MatView, Workspace};
use crate::error::RingError;

fn same_dims(dst: &MatView, src: &MatView) -> Result<(), RingError> {
    if dst.dims() != src.dims() {
        return Err(RingError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            dst.rows, dst.cols, src.rows, src.cols
        )));
    }
    Ok(())
}

/// `dst <- sum_t s_t * src_t`, elementwise.
///
/// A source may be exactly the destination window; any other overlap is an error.
/// An empty term list zero-fills `dst`.
pub fn block_lincomb(ws: &mut Workspace, dst: &MatView, terms: &[(Elem, MatView)]) -> Result<(), RingError> {
    ws.check(dst)?;
    for (_, src) in terms {
        ws.check(src)?;
        same_dims(dst, src)?;
        if !src.same_window(dst) && src.overlaps(dst) {
            return Err(RingError::PartialOverlap);
        }
    }
    let m = ws.modulus();
    let minus_one = m.minus_one();
    let mut row = vec![0 as Elem; dst.cols];
    for i in 0..dst.rows {
        row.fill(0);
        for (s, src) in terms {
            let s = *s;
            let srow = ws.row(src, i);
            match s {
                0 => {}
                1 => row.iter_mut().zip(srow).for_each(|(r, &x)| *r = m.add(*r, x)),
                _ if s == minus_one => row.iter_mut().zip(srow).for_each(|(r, &x)| *r = m.sub(*r, x)),
                _ => row.iter_mut().zip(srow).for_each(|(r, &x)| *r = m.add(*r, m.mul(s, x))),
            }
        }
        ws.row_mut(dst, i).copy_from_slice(&row);
    }
    Ok(())
}

/// `dst <- sa * a + sb * b`.
pub fn block_addsub(
    ws: &mut Workspace,
    dst: &MatView,
    a: &MatView,
    b: &MatView,
    sa: Elem,
    sb: Elem,
) -> Result<(), RingError> {
    block_lincomb(ws, dst, &[(sa, *a), (sb, *b)])
}

/// `dst <- s * dst`.
pub fn block_scale(ws: &mut Workspace, dst: &MatView, s: Elem) -> Result<(), RingError> {
    if s == 1 {
        return Ok(());
    }
    block_lincomb(ws, dst, &[(s, *dst)])
}

/// `C <- alpha * A * B + beta * C`, with `beta = None` meaning C is write-only.
///
/// Products are accumulated lazily in `u64` and reduced only when another
/// term could overflow. No temporary blocks are allocated.
pub fn classical_mul(
    ws: &mut Workspace,
    c: &MatView,
    a: &MatView,
    b: &MatView,
    alpha: Elem,
    beta: Option<Elem>,
) -> Result<(), RingError> {
    for v in [c, a, b] {
        ws.check(v)?;
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if b.rows != k || c.rows != m || c.cols != n {
        return Err(RingError::DimensionMismatch(format!(
            "C {}x{} <- A {}x{} * B {}x{}",
            c.rows, c.cols, a.rows, a.cols, b.rows, b.cols
        )));
    }
    if c.overlaps(a) || c.overlaps(b) {
        return Err(RingError::AliasViolation);
    }
    let md = ws.modulus();
    let p = md.value() as u64;
    let chunk = md.lazy_terms().saturating_sub(1).max(1);
    let mut acc = vec![0u64; n];
    let mut out = vec![0 as Elem; n];
    for i in 0..m {
        acc.fill(0);
        {
            let abuf = ws.buffer(a.buf);
            let bbuf = ws.buffer(b.buf);
            let arow = &abuf[a.index(i, 0)..a.index(i, 0) + k];
            let mut pending = 0;
            for (l, &x) in arow.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let x = x as u64;
                let start = b.index(l, 0);
                let brow = &bbuf[start..start + n];
                for (s, &y) in acc.iter_mut().zip(brow) {
                    *s += x * y as u64;
                }
                pending += 1;
                if pending == chunk {
                    acc.iter_mut().for_each(|s| *s %= p);
                    pending = 0;
                }
            }
        }
        let crow = ws.row(c, i);
        for j in 0..n {
            let mut v = (acc[j] % p) as Elem;
            if alpha != 1 {
                v = md.mul(alpha, v);
            }
            if let Some(beta) = beta {
                v = md.add(v, md.mul(beta, crow[j]));
            }
            out[j] = v;
        }
        ws.row_mut(c, i).copy_from_slice(&out);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Matrix, Modulus};

    fn p101() -> Modulus {
        Modulus::new(101).unwrap()
    }

    #[test]
    fn self_subtraction_is_zero() {
        let p = p101();
        let mut ws = Workspace::new(p);
        let x = ws.insert(Matrix::from_i64(1, 1, &[1], p).unwrap()).unwrap();
        block_addsub(&mut ws, &x, &x, &x, 1, p.minus_one()).unwrap();
        assert_eq!(ws.get(&x, 0, 0), 0);
    }

    #[test]
    fn elementwise_sum() {
        let p = p101();
        let mut ws = Workspace::new(p);
        let a = ws.insert(Matrix::from_i64(2, 2, &[1, 2, 3, 4], p).unwrap()).unwrap();
        let b = ws.insert(Matrix::from_i64(2, 2, &[5, 6, 7, 8], p).unwrap()).unwrap();
        let d = ws.push_buffer(2, 2);
        block_addsub(&mut ws, &d, &a, &b, 1, 1).unwrap();
        assert_eq!(ws.extract(&d).data(), &[6, 8, 10, 12]);
    }

    #[test]
    fn scaled_single_entry() {
        let p = Modulus::new(97).unwrap();
        let mut ws = Workspace::new(p);
        let a = ws.insert(Matrix::from_i64(1, 1, &[1], p).unwrap()).unwrap();
        let b = ws.insert(Matrix::from_i64(1, 1, &[2], p).unwrap()).unwrap();
        let d = ws.push_buffer(1, 1);
        block_addsub(&mut ws, &d, &a, &b, 3, 95).unwrap();
        assert_eq!(ws.get(&d, 0, 0), ((3 * 1 + 95 * 2) % 97) as u32);
        assert_eq!(ws.get(&d, 0, 0), 96);
    }

    #[test]
    fn errors() {
        let p = p101();
        let mut ws = Workspace::new(p);
        let big = ws.insert(Matrix::zeros(4, 4, p)).unwrap();
        let a = big.sub(0, 0, 2, 2).unwrap();
        let shifted = big.sub(1, 1, 2, 2).unwrap();
        let wide = big.sub(0, 0, 2, 3).unwrap();
        assert_eq!(block_addsub(&mut ws, &a, &a, &shifted, 1, 1), Err(RingError::PartialOverlap));
        assert!(matches!(block_addsub(&mut ws, &a, &a, &wide, 1, 1), Err(RingError::DimensionMismatch(_))));
        let q = big.quad_split().unwrap();
        assert_eq!(classical_mul(&mut ws, &q[0], &q[0], &q[1], 1, None), Err(RingError::AliasViolation));
        assert!(classical_mul(&mut ws, &q[3], &q[0], &q[1], 1, None).is_ok());
        assert!(matches!(classical_mul(&mut ws, &q[3], &q[0], &wide, 1, None), Err(RingError::DimensionMismatch(_))));
    }

    #[test]
    fn classical_small_cases() {
        let p = Modulus::new(1009).unwrap();
        let mut ws = Workspace::new(p);
        let a = ws.insert(Matrix::from_i64(2, 2, &[1, 2, 3, 4], p).unwrap()).unwrap();
        let b = ws.insert(Matrix::from_i64(2, 2, &[5, 6, 7, 8], p).unwrap()).unwrap();
        let c = ws.insert(Matrix::from_i64(2, 2, &[9, 9, 9, 9], p).unwrap()).unwrap();
        classical_mul(&mut ws, &c, &a, &b, 1, Some(0)).unwrap();
        assert_eq!(ws.extract(&c).data(), &[19, 22, 43, 50]);

        let one = ws.insert(Matrix::from_i64(1, 1, &[1], p).unwrap()).unwrap();
        let c1 = ws.insert(Matrix::from_i64(1, 1, &[9], p).unwrap()).unwrap();
        classical_mul(&mut ws, &c1, &one, &one, 1, Some(0)).unwrap();
        assert_eq!(ws.get(&c1, 0, 0), 1);

        let id = ws.insert(Matrix::identity(2, p)).unwrap();
        classical_mul(&mut ws, &c, &id, &b, 1, None).unwrap();
        assert_eq!(ws.extract(&c), ws.extract(&b));
    }

    #[test]
    fn lazy_reduction_near_2_31() {
        let p = Modulus::new(2_147_483_629).unwrap();
        let n = 9;
        let a = Matrix::from_residues(n, n, vec![p.value() - 1; n * n], p).unwrap();
        let mut ws = Workspace::new(p);
        let av = ws.insert(a.clone()).unwrap();
        let c = ws.push_buffer(n, n);
        classical_mul(&mut ws, &c, &av, &av, 1, None).unwrap();
        assert_eq!(ws.extract(&c), a.naive_product(&a).unwrap());
    }
}
