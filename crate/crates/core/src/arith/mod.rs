//! Integer factorization, divisors, prime tables, M-number classification and
//! the density constants.

mod classify;
mod constants;
mod factor;
pub mod interval;
mod primes;

pub use classify::{classify, offending_primes, MClassification};
pub use constants::{
    alpha, alpha_digits, alpha_partial, reciprocal_prime_sum, strong_density_bound, AlphaApprox, StrongDensity,
    StrongDensityReport,
};
pub use factor::{divisors, factorize, FactoredInteger, DEFAULT_DIVISOR_LIMIT};
pub use primes::{is_prime_u64, odd_primes, sieve, small_primes, PrimeTable, SIEVE_BOUND};

/// Greatest common divisor.
pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
