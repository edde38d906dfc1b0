//! Depth-first enumeration of squarefree products of a prime prefix, bounded
//! by `N`, accumulating `A(v)` by number of prime factors.
//!
//! Instead of `v` itself the walk carries `q = floor(N / v)`; since
//! `floor(floor(N/v)/p) = floor(N/(vp))` this keeps every division small and
//! turns the pruning test into `p <= q`.

use rayon::prelude::*;

use super::Mode;

/// Number of leading primes whose membership is tracked as a bit mask
/// (the primes 3, 5, 7 of the gcd table).
pub(crate) const MASK_PRIMES: usize = 3;
pub(crate) const MASKS: usize = 1 << MASK_PRIMES;
/// Upper bound on `omega(v)` for `v <= 2^64` built from odd primes.
pub(crate) const MAX_OMEGA: usize = 40;

/// `T[mask][m]`: sum of `A(v)` over enumerated `v` with `omega(v) = m` whose
/// divisibility by the first [`MASK_PRIMES`] primes is `mask`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Sums {
    pub t: [[u128; MAX_OMEGA + 1]; MASKS],
}

impl Sums {
    fn zero() -> Self {
        Sums {
            t: [[0; MAX_OMEGA + 1]; MASKS],
        }
    }

    fn merge(mut self, o: Sums) -> Sums {
        for (a, b) in self.t.iter_mut().zip(o.t.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y;
            }
        }
        self
    }
}

#[inline(always)]
fn weight(mode: Mode, q: u64) -> u64 {
    match mode {
        Mode::Full => q,
        Mode::Odd => q.div_ceil(2),
    }
}

struct Walker<'a> {
    primes: &'a [u64],
    mode: Mode,
    sums: Sums,
}

impl Walker<'_> {
    fn walk(&mut self, start: usize, q: u64, m: usize, mask: usize) {
        let primes = self.primes;
        let mode = self.mode;
        for i in start..primes.len() {
            let p = primes[i];
            if p > q {
                break;
            }
            let q2 = q / p;
            let mask2 = if i < MASK_PRIMES { mask | (1 << i) } else { mask };
            self.sums.t[mask2][m + 1] += weight(mode, q2) as u128;
            if i + 1 < primes.len() && primes[i + 1] <= q2 {
                self.walk(i + 1, q2, m + 1, mask2);
            }
        }
    }
}

/// Runs the walk over all squarefree `v` from `primes` with `v <= n_bound`,
/// including `v = 1`. `primes` must be increasing.
pub(crate) fn enumerate(primes: &[u64], n_bound: u64, mode: Mode) -> Sums {
    let mut root = Sums::zero();
    root.t[0][0] += weight(mode, n_bound) as u128;

    // Split at depth two: subtrees rooted at v = p_a and v = p_a p_b.
    let mut seeds: Vec<(usize, u64, usize, usize)> = Vec::new();
    for a in 0..primes.len() {
        let pa = primes[a];
        if pa > n_bound {
            break;
        }
        let qa = n_bound / pa;
        let mask_a = if a < MASK_PRIMES { 1 << a } else { 0 };
        root.t[mask_a][1] += weight(mode, qa) as u128;
        for (b, &pb) in primes.iter().enumerate().skip(a + 1) {
            if pb > qa {
                break;
            }
            let qb = qa / pb;
            let mask_b = if b < MASK_PRIMES { mask_a | (1 << b) } else { mask_a };
            root.t[mask_b][2] += weight(mode, qb) as u128;
            seeds.push((b + 1, qb, 2, mask_b));
        }
    }
    seeds
        .into_par_iter()
        .map(|(start, q, m, mask)| {
            let mut w = Walker {
                primes,
                mode,
                sums: Sums::zero(),
            };
            w.walk(start, q, m, mask);
            w.sums
        })
        .reduce(Sums::zero, Sums::merge)
        .merge(root)
}

/// `sum mu(w) A(d w)` over squarefree `w` built from `primes` (which must
/// exclude the primes of `d`), with `d w <= n_bound`.
pub(crate) fn mobius_sum(primes: &[u64], n_bound: u64, d: u64, mode: Mode) -> i128 {
    fn go(primes: &[u64], start: usize, q: u64, sign: i128, mode: Mode) -> i128 {
        let mut acc = 0i128;
        for i in start..primes.len() {
            let p = primes[i];
            if p > q {
                break;
            }
            let q2 = q / p;
            acc -= sign * weight(mode, q2) as i128;
            if i + 1 < primes.len() && primes[i + 1] <= q2 {
                acc += go(primes, i + 1, q2, -sign, mode);
            }
        }
        acc
    }
    if d > n_bound {
        return 0;
    }
    let q = n_bound / d;
    weight(mode, q) as i128 + go(primes, 0, q, 1, mode)
}
