//! Integer linear algebra on small lattices: Hermite row reduction, sublattice
//! index, coordinates in a reduced basis, and the full-cone test used for
//! semigroup generation and for boundedness of exponential moment functions.

use num_integer::Integer;

/// Row-style Hermite normal form of the lattice spanned by `rows` in `Z^dim`.
///
/// The returned rows are in echelon form with positive pivots; entries above
/// each pivot are reduced into `[0, pivot)`. Zero rows are dropped, so the
/// length of the result is the rank.
pub fn hermite_rows(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), dim, "row length must match lattice dimension");
            r.iter().map(|&x| x as i128).collect()
        })
        .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
        .collect();
    let mut pivot_row = 0;
    for col in 0..dim {
        if pivot_row >= m.len() {
            break;
        }
        // Euclid on column `col` over rows pivot_row.. until one nonzero remains.
        loop {
            let mut best: Option<usize> = None;
            for (i, row) in m.iter().enumerate().skip(pivot_row) {
                if row[col] != 0 && best.is_none_or(|b| row[col].abs() < m[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for i in pivot_row + 1..m.len() {
                if m[i][col] != 0 {
                    let q = Integer::div_floor(&m[i][col], &m[pivot_row][col]);
                    for j in col..dim {
                        let v = m[pivot_row][j];
                        m[i][j] -= q * v;
                    }
                    if m[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for v in m[pivot_row].iter_mut() {
                *v = -*v;
            }
        }
        let p = m[pivot_row][col];
        for i in 0..pivot_row {
            let q = Integer::div_floor(&m[i][col], &p);
            if q != 0 {
                for j in col..dim {
                    let v = m[pivot_row][j];
                    m[i][j] -= q * v;
                }
            }
        }
        pivot_row += 1;
        m.retain(|r| r.iter().any(|&x| x != 0));
    }
    m.truncate(pivot_row);
    m.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| i64::try_from(x).expect("hermite entry overflow"))
                .collect()
        })
        .collect()
}

/// Index `[Z^dim : L]` of the lattice with the given Hermite basis, or `None`
/// when the rank is deficient (infinite index).
pub fn index_of(hermite: &[Vec<i64>], dim: usize) -> Option<u128> {
    if hermite.len() != dim {
        return None;
    }
    let mut idx: u128 = 1;
    for row in hermite {
        let pivot = row.iter().find(|&&x| x != 0).copied()?;
        idx = idx.checked_mul(pivot.unsigned_abs() as u128)?;
    }
    Some(idx)
}

/// Integer coordinates of `v` in a Hermite basis, if `v` lies in the lattice.
pub fn coordinates_in(hermite: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let mut coords = Vec::with_capacity(hermite.len());
    for row in hermite {
        let col = row.iter().position(|&x| x != 0)?;
        let p = row[col] as i128;
        if rest[col] % p != 0 {
            return None;
        }
        let c = rest[col] / p;
        for (r, &b) in rest.iter_mut().zip(row) {
            *r -= c * b as i128;
        }
        coords.push(i64::try_from(c).ok()?);
    }
    if rest.iter().all(|&x| x == 0) {
        Some(coords)
    } else {
        None
    }
}

/// Whether the convex cone generated by `vectors` is all of `R^dim`.
///
/// Equivalently: no nonzero `u` satisfies `<u, v> >= 0` for every vector.
/// A proper polyhedral cone of full rank has a facet normal orthogonal to
/// `dim - 1` independent generators, so enumerating those normals is exact.
pub fn cone_is_full(vectors: &[Vec<i64>], dim: usize) -> bool {
    let mut vs: Vec<Vec<i64>> = vectors
        .iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .cloned()
        .collect();
    vs.sort();
    vs.dedup();
    if dim == 0 {
        return true;
    }
    if hermite_rows(&vs, dim).len() < dim {
        return false;
    }
    let k = dim - 1;
    let n = vs.len();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if let Some(normal) = normal_of(&vs, &subset, dim) {
            let mut pos = false;
            let mut neg = false;
            for v in &vs {
                let dot: i128 = v.iter().zip(&normal).map(|(&a, &b)| a as i128 * b).sum();
                pos |= dot > 0;
                neg |= dot < 0;
            }
            if !(pos && neg) {
                return false;
            }
        }
        // next k-subset of 0..n
        if k == 0 {
            break;
        }
        let mut i = k;
        while i > 0 && subset[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    true
}

/// Generalised cross product of the selected `dim - 1` vectors; `None` if
/// they are dependent.
fn normal_of(vs: &[Vec<i64>], subset: &[usize], dim: usize) -> Option<Vec<i128>> {
    if dim == 1 {
        return Some(vec![1]);
    }
    let mut normal = Vec::with_capacity(dim);
    for col in 0..dim {
        let minor: Vec<Vec<i128>> = subset
            .iter()
            .map(|&r| {
                (0..dim)
                    .filter(|&c| c != col)
                    .map(|c| vs[r][c] as i128)
                    .collect()
            })
            .collect();
        let sign = if col % 2 == 0 { 1 } else { -1 };
        normal.push(sign * det(&minor));
    }
    if normal.iter().all(|&x| x == 0) {
        None
    } else {
        Some(normal)
    }
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}
