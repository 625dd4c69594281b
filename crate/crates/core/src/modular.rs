//! Small helpers for arithmetic over Z_d.

pub fn is_odd_prime(d: u32) -> bool {
    if d < 3 || d % 2 == 0 {
        return false;
    }
    let mut f = 3;
    while f * f <= d {
        if d % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

#[inline]
pub fn reduce(v: i64, d: u32) -> u8 {
    v.rem_euclid(d as i64) as u8
}

#[inline]
pub fn add(a: u8, b: u8, d: u8) -> u8 {
    ((a as u16 + b as u16) % d as u16) as u8
}

#[inline]
pub fn sub(a: u8, b: u8, d: u8) -> u8 {
    ((a as u16 + d as u16 - b as u16) % d as u16) as u8
}

#[inline]
pub fn mul(a: u8, b: u8, d: u8) -> u8 {
    ((a as u16 * b as u16) % d as u16) as u8
}

#[inline]
pub fn neg(a: u8, d: u8) -> u8 {
    sub(0, a, d)
}

/// Multiplicative inverse modulo a prime `d`. Panics on zero.
pub fn inv(a: u8, d: u8) -> u8 {
    assert!(a % d != 0, "zero has no inverse");
    // Fermat: a^(d-2)
    pow(a, d as u32 - 2, d)
}

pub fn pow(a: u8, mut e: u32, d: u8) -> u8 {
    let mut base = a % d;
    let mut acc = 1u8 % d;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base, d);
        }
        base = mul(base, base, d);
        e >>= 1;
    }
    acc
}

/// Row-reduce `rows` (each of equal length) over Z_d in place; returns pivot columns.
pub fn row_reduce(rows: &mut [Vec<u8>], d: u8) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let s = inv(rows[r][c], d);
        for v in rows[r].iter_mut() {
            *v = mul(*v, s, d);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..ncols {
                    let t = mul(f, rows[r][j], d);
                    rows[i][j] = sub(rows[i][j], t, d);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[Vec<u8>], d: u8) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m, d).len()
}

/// Solves `a · x = b` over Z_d; free variables are set to zero.
pub fn solve(a: &[Vec<u8>], b: &[u8], d: u8) -> Option<Vec<u8>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<u8>> = a
        .iter()
        .zip(b)
        .map(|(row, &v)| {
            let mut r = row.clone();
            r.push(v);
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug, d);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![0u8; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][ncols];
    }
    Some(x)
}

/// Basis of the right null space of `a` over Z_d.
pub fn null_space(a: &[Vec<u8>], ncols: usize, d: u8) -> Vec<Vec<u8>> {
    let mut m = a.to_vec();
    let pivots = row_reduce(&mut m, d);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u8; ncols];
        v[free] = 1;
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = neg(m[r][free], d);
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let p: Vec<u32> = (0..30).filter(|&d| is_odd_prime(d)).collect();
        assert_eq!(p, vec![3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn inverses() {
        for d in [3u8, 5, 7, 11] {
            for a in 1..d {
                assert_eq!(mul(a, inv(a, d), d), 1);
            }
        }
    }

    #[test]
    fn solve_and_null_space() {
        let a = vec![vec![1, 2, 0], vec![0, 1, 1]];
        let x = solve(&a, &[2, 1], 3).unwrap();
        for (row, &b) in a.iter().zip(&[2u8, 1]) {
            let s = row.iter().zip(&x).fold(0, |acc, (&r, &v)| add(acc, mul(r, v, 3), 3));
            assert_eq!(s, b);
        }
        let ns = null_space(&a, 3, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            let s = row.iter().zip(&ns[0]).fold(0, |acc, (&r, &v)| add(acc, mul(r, v, 3), 3));
            assert_eq!(s, 0);
        }
        assert!(solve(&[vec![1, 1], vec![2, 2]], &[1, 1], 3).is_none());
    }

    #[test]
    fn rank_simple() {
        let rows = vec![vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 1]];
        // over Z_3 the first two rows are proportional (2*row0 = [2,1,0])
        assert_eq!(rank(&rows, 3), 2);
        assert_eq!(rank(&rows, 5), 3);
    }
}
