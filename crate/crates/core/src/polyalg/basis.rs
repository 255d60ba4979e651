use crate::error::{Error, Result};

use super::MultiIndex;

fn check_dims(l: usize, n: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::Parameter(format!("L must be at least 2, got {l}")));
    }
    if n < 1 {
        return Err(Error::Parameter(format!("N must be at least 1, got {n}")));
    }
    Ok(())
}

/// All `(L-1) x N` indices with `d(A) <= M`, in graded-lex order.
///
/// This is the monomial basis of `V(M)`; its length is
/// `binomial(M + (L-1)N, (L-1)N)`.
pub fn enumerate_basis(l: usize, n: usize, m: u32) -> Result<Vec<MultiIndex>> {
    check_dims(l, n)?;
    let slots = (l - 1) * n;
    let mut out = Vec::new();
    let mut entries = vec![0u32; slots];
    fill_bounded_sum(&mut entries, 0, m, &mut |e| {
        out.push(MultiIndex::from_entries(l - 1, n, e.to_vec()))
    });
    out.sort();
    Ok(out)
}

/// All indices with `d_m(A) <= T_m` for each level, in graded-lex order.
///
/// This is the monomial basis of `F(T_1, ..., T_{L-1})`.
pub fn enumerate_basis_ft(l: usize, n: usize, caps: &[i64]) -> Result<Vec<MultiIndex>> {
    check_dims(l, n)?;
    if caps.len() != l - 1 {
        return Err(Error::Parameter(format!(
            "expected {} level caps T_m, got {}",
            l - 1,
            caps.len()
        )));
    }
    if let Some(t) = caps.iter().find(|&&t| t < 0) {
        return Err(Error::Parameter(format!(
            "level caps must be >= 0, got {t}"
        )));
    }
    // Each level is an independent bounded-sum block of N entries.
    let per_level: Vec<Vec<Vec<u32>>> = caps
        .iter()
        .map(|&cap| {
            let mut rows = Vec::new();
            let mut row = vec![0u32; n];
            fill_bounded_sum(&mut row, 0, cap as u32, &mut |r| rows.push(r.to_vec()));
            rows
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; l - 1];
    loop {
        let entries: Vec<u32> = choice
            .iter()
            .enumerate()
            .flat_map(|(m, &k)| per_level[m][k].iter().copied())
            .collect();
        out.push(MultiIndex::from_entries(l - 1, n, entries));
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                out.sort();
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < per_level[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn fill_bounded_sum(entries: &mut [u32], pos: usize, budget: u32, emit: &mut impl FnMut(&[u32])) {
    if pos == entries.len() {
        emit(entries);
        return;
    }
    for v in 0..=budget {
        entries[pos] = v;
        fill_bounded_sum(entries, pos + 1, budget - v, emit);
    }
    entries[pos] = 0;
}

/// `binomial(n, k)` as `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, j| acc * (n - j) as u128 / (j + 1) as u128)
}

/// Position of each index in a basis, for matrix assembly.
pub fn index_lookup(basis: &[MultiIndex]) -> std::collections::HashMap<MultiIndex, usize> {
    basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(k, a)| (a, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn small_bases() {
        let b = enumerate_basis(2, 1, 1).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0], MultiIndex::zero(1, 1));
        assert_eq!(b[1], MultiIndex::unit(1, 1, 1, 1));
        assert_eq!(enumerate_basis(2, 2, 2).unwrap().len(), 6);
        assert_eq!(enumerate_basis(3, 2, 3).unwrap().len(), 35);
    }

    #[test]
    fn ft_bases() {
        assert_eq!(enumerate_basis_ft(2, 1, &[2]).unwrap().len(), 3);
        assert_eq!(enumerate_basis_ft(3, 1, &[1, 1]).unwrap().len(), 4);
        assert_eq!(enumerate_basis_ft(3, 2, &[1, 2]).unwrap().len(), 18);
        assert!(enumerate_basis_ft(3, 2, &[1, -1]).is_err());
        assert!(enumerate_basis_ft(3, 2, &[1]).is_err());
    }

    #[test]
    fn invalid_dimensions() {
        assert!(enumerate_basis(1, 1, 1).is_err());
        assert!(enumerate_basis(2, 0, 1).is_err());
    }

    // Independent nested-loop enumeration over the box [0, M]^slots.
    fn brute_force(l: usize, n: usize, m: u32) -> BTreeSet<Vec<u32>> {
        let slots = (l - 1) * n;
        let mut out = BTreeSet::new();
        let total = (m as usize + 1).pow(slots as u32);
        for code in 0..total {
            let mut c = code;
            let mut e = Vec::with_capacity(slots);
            for _ in 0..slots {
                e.push((c % (m as usize + 1)) as u32);
                c /= m as usize + 1;
            }
            if e.iter().sum::<u32>() <= m {
                out.insert(e);
            }
        }
        out
    }

    #[test]
    fn basis_is_a_bijection_onto_the_defining_set() {
        for (l, n) in [
            (2, 1),
            (2, 2),
            (3, 1),
            (2, 3),
            (3, 2),
            (4, 2),
            (3, 3),
            (2, 6),
        ] {
            if (l - 1) * n > 6 {
                continue;
            }
            for m in 0..=5 {
                let basis = enumerate_basis(l, n, m).unwrap();
                let got: BTreeSet<Vec<u32>> = basis.iter().map(|a| a.entries().to_vec()).collect();
                assert_eq!(got.len(), basis.len(), "duplicates for ({l},{n},{m})");
                assert_eq!(got, brute_force(l, n, m), "({l},{n},{m})");
                let slots = ((l - 1) * n) as u64;
                assert_eq!(basis.len() as u128, binomial(m as u64 + slots, slots));
            }
        }
    }

    #[test]
    fn ordering_is_idempotent() {
        let basis = enumerate_basis(3, 2, 3).unwrap();
        let mut again = basis.clone();
        again.sort();
        assert_eq!(again, basis);
        assert!(basis.windows(2).all(|w| w[0] < w[1]));
    }
}
