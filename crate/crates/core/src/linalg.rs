//! Small dense linear algebra over a generic field scalar.

use crate::scalar::Scalar;

/// Reduced row echelon form of the row space. Returns the nonzero rows and
/// their pivot columns. Floats treat entries with `|x| <= tol * scale` as zero.
pub fn rref<S: Scalar>(rows: &[Vec<S>], tol: f64) -> (Vec<Vec<S>>, Vec<usize>) {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|x| x.to_f64().abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    let eps = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        // exact: first nonzero; float: largest magnitude
        let mut best: Option<usize> = None;
        for i in r..m.len() {
            if m[i][c].is_negligible(eps) {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if !S::EXACT && m[i][c].magnitude() > m[b][c].magnitude() => best = Some(i),
                _ => {}
            }
            if S::EXACT {
                break;
            }
        }
        let Some(p) = best else { continue };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_negligible(0.0) {
                let f = m[i][c].clone();
                for k in 0..ncols {
                    let v = m[r][k].clone() * f.clone();
                    m[i][k] = m[i][k].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    if !S::EXACT {
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                if x.is_negligible(eps) {
                    *x = S::zero();
                }
            }
        }
    }
    (m, pivots)
}

pub fn rank<S: Scalar>(rows: &[Vec<S>], tol: f64) -> usize {
    rref(rows, tol).1.len()
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S], tol: f64) -> Option<Vec<S>> {
    let n = a.len();
    let aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (red, piv) = rref(&aug, tol);
    if piv.len() != n || piv.iter().any(|&p| p >= n) {
        return None;
    }
    Some(red.iter().map(|r| r[n].clone()).collect())
}

/// A nonzero solution of `a x = 0`, taking the first free column.
pub fn kernel_vector<S: Scalar>(a: &[Vec<S>], tol: f64) -> Option<Vec<S>> {
    let n = a.first().map(|r| r.len())?;
    let (red, piv) = rref(a, tol);
    let free = (0..n).find(|c| !piv.contains(c))?;
    let mut x = vec![S::zero(); n];
    x[free] = S::one();
    for (row, &p) in red.iter().zip(&piv) {
        x[p] = -row[free].clone();
    }
    Some(x)
}

/// Greedy lowest-index choice of linearly independent vectors from their
/// Gram matrix: index `j` is kept when its Schur complement against the
/// already kept indices is nonzero.
pub fn gram_pivots<S: Scalar>(gram: &[Vec<S>], tol: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..gram.len() {
        let gjj = gram[j][j].clone();
        if gjj.is_negligible(0.0) {
            continue;
        }
        let resid = if kept.is_empty() {
            gjj.clone()
        } else {
            let sub: Vec<Vec<S>> = kept
                .iter()
                .map(|&a| kept.iter().map(|&b| gram[a][b].clone()).collect())
                .collect();
            let rhs: Vec<S> = kept.iter().map(|&a| gram[a][j].clone()).collect();
            match solve(&sub, &rhs, tol) {
                Some(x) => {
                    let proj = x
                        .iter()
                        .zip(&rhs)
                        .fold(S::zero(), |acc, (xi, ri)| acc + xi.clone() * ri.clone());
                    gjj.clone() - proj
                }
                None => gjj.clone(),
            }
        };
        let thresh = if S::EXACT {
            0.0
        } else {
            tol * gjj.to_f64().abs()
        };
        if !resid.is_negligible(thresh) {
            kept.push(j);
        }
    }
    kept
}

/// `LDL^T` pivots of a symmetric matrix with symmetric pivoting on zeros.
/// Positive semidefinite iff all pivots are `>= 0` and zero pivots have
/// zero columns.
pub fn symmetric_definiteness<S: Scalar>(a: &[Vec<S>], tol: f64) -> Definiteness {
    let n = a.len();
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        // choose the largest diagonal among the active indices
        let mut best = active[0];
        for &i in &active {
            if m[i][i] > m[best][best] {
                best = i;
            }
        }
        let d = m[best][best].clone();
        if d.is_negligible(tol) {
            // remaining diagonal all <= ~0: PSD needs the block to vanish
            for &i in &active {
                if m[i][i] < S::zero() && !m[i][i].is_negligible(tol) {
                    return Definiteness::Indefinite;
                }
                for &k in &active {
                    if !m[i][k].is_negligible(tol) {
                        return Definiteness::Indefinite;
                    }
                }
            }
            return Definiteness::SemiDefinite;
        }
        if d < S::zero() {
            return Definiteness::Indefinite;
        }
        active.retain(|&i| i != best);
        for &i in &active {
            for &k in &active {
                let v = m[i][best].clone() * m[best][k].clone() / d.clone();
                m[i][k] = m[i][k].clone() - v;
            }
        }
    }
    Definiteness::Definite
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    Definite,
    SemiDefinite,
    Indefinite,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn rank_exact() {
        let rows = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        assert_eq!(rank(&rows, 0.0), 1);
    }

    #[test]
    fn solve_exact() {
        let a = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        let x = solve(&a, &[rat(3, 1), rat(4, 1)], 0.0).unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(1, 1)]);
    }

    #[test]
    fn definiteness() {
        let id: Vec<Vec<Rational>> = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]];
        assert_eq!(symmetric_definiteness(&id, 0.0), Definiteness::Definite);
        let semi = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]];
        assert_eq!(
            symmetric_definiteness(&semi, 0.0),
            Definiteness::SemiDefinite
        );
        let ind = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(1, 1)]];
        assert_eq!(symmetric_definiteness(&ind, 0.0), Definiteness::Indefinite);
        let zero = vec![vec![rat(0, 1)]];
        assert_eq!(
            symmetric_definiteness(&zero, 0.0),
            Definiteness::SemiDefinite
        );
    }

    #[test]
    fn kernel_of_rank_one() {
        let semi = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        assert_eq!(kernel_vector(&semi, 0.0), Some(vec![rat(-2, 1), rat(1, 1)]));
        let id = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]];
        assert_eq!(kernel_vector(&id, 0.0), None);
    }
}
