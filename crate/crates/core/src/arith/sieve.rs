use crate::error::{budget, Result};

/// Largest accepted sieve limit.
pub const SIEVE_LIMIT: u64 = 100_000_000;

/// Arithmetic-function tables on `0..=limit`.
///
/// `Λ` is stored both as a float and through the underlying prime so that
/// identities involving `Λ` can be regrouped exactly.
#[derive(Clone, Debug)]
pub struct SieveTables {
    limit: u64,
    spf: Vec<u32>,
    prime_base: Vec<u32>,
    mu: Vec<i8>,
    sigma0: Vec<u32>,
    primes: Vec<u32>,
}

impl SieveTables {
    pub fn build(limit: u64) -> Result<Self> {
        budget("sieve limit", limit as f64, SIEVE_LIMIT as f64)?;
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        // linear sieve
        for x in 2..=n {
            if spf[x] == 0 {
                spf[x] = x as u32;
                primes.push(x as u32);
            }
            let sx = spf[x];
            for &p in &primes {
                let y = x * p as usize;
                if p > sx || y > n {
                    break;
                }
                spf[y] = p;
            }
        }
        let mut prime_base = vec![0u32; n + 1];
        let mut mu = vec![0i8; n + 1];
        let mut sigma0 = vec![0u32; n + 1];
        // exponent of the smallest prime, and the cofactor free of it
        let mut exp = vec![0u8; n + 1];
        let mut core = vec![0u32; n + 1];
        if n >= 1 {
            mu[1] = 1;
            sigma0[1] = 1;
            core[1] = 1;
        }
        for x in 2..=n {
            let p = spf[x] as usize;
            let y = x / p;
            if y.is_multiple_of(p) {
                exp[x] = exp[y] + 1;
                core[x] = core[y];
                mu[x] = 0;
            } else {
                exp[x] = 1;
                core[x] = y as u32;
                mu[x] = -mu[y];
            }
            sigma0[x] = sigma0[core[x] as usize] * (exp[x] as u32 + 1);
            if core[x] == 1 {
                prime_base[x] = p as u32;
            }
        }
        Ok(SieveTables { limit, spf, prime_base, mu, sigma0, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, x: u64) -> bool {
        x >= 2 && self.spf[x as usize] as u64 == x
    }

    /// `p` when `x = p^k` with `k >= 1`.
    pub fn prime_base(&self, x: u64) -> Option<u32> {
        match self.prime_base[x as usize] {
            0 => None,
            p => Some(p),
        }
    }

    /// von Mangoldt `Λ(x)`.
    pub fn lambda(&self, x: u64) -> f64 {
        self.prime_base(x).map_or(0.0, |p| (p as f64).ln())
    }

    /// `log x` on primes, zero elsewhere.
    pub fn lambda_star(&self, x: u64) -> f64 {
        if self.is_prime(x) {
            (x as f64).ln()
        } else {
            0.0
        }
    }

    pub fn mu(&self, x: u64) -> i8 {
        self.mu[x as usize]
    }

    pub fn sigma0(&self, x: u64) -> u32 {
        self.sigma0[x as usize]
    }

    pub fn smallest_prime_factor(&self, x: u64) -> u32 {
        self.spf[x as usize]
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn prime_count(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p as u64 <= x)
    }

    /// Chebyshev `ψ(x) = Σ_{y ≤ x} Λ(y)`.
    pub fn psi(&self, x: u64) -> f64 {
        (2..=x.min(self.limit)).map(|y| self.lambda(y)).sum()
    }

    /// Prime factorisation `[(p, e)]` with increasing `p`.
    pub fn factor(&self, mut x: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while x > 1 {
            let p = self.spf[x as usize] as u64;
            match out.last_mut() {
                Some(last) if last.0 == p => last.1 += 1,
                _ => out.push((p, 1)),
            }
            x /= p;
        }
        out
    }

    /// All divisors of `x` in increasing order.
    pub fn divisors(&self, x: u64) -> Vec<u64> {
        let mut divs = vec![1u64];
        for (p, e) in self.factor(x) {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn definitions() {
        let t = SieveTables::build(1000).unwrap();
        assert_eq!(t.prime_count(100), 25);
        assert_eq!((2..=100).filter(|&x| trial_prime(x)).count(), 25);
        assert_eq!(t.lambda(8), 2f64.ln());
        assert_eq!(t.lambda_star(8), 0.0);
        assert_eq!(t.lambda_star(7), 7f64.ln());
        assert_eq!(t.mu(30), -1);
        assert_eq!(t.mu(12), 0);
        assert_eq!(t.mu(1), 1);
        assert_eq!(t.sigma0(12), 6);
        assert_eq!(t.sigma0(1), 1);
        assert_eq!(t.lambda(1), 0.0);
        assert_eq!(t.divisors(12), vec![1, 2, 3, 4, 6, 12]);
        for x in 1..=1000u64 {
            assert_eq!(t.is_prime(x), trial_prime(x));
            assert_eq!(t.sigma0(x) as usize, (1..=x).filter(|d| x % d == 0).count());
            assert_eq!(t.divisors(x).len() as u32, t.sigma0(x));
        }
    }

    #[test]
    fn psi_matches_prime_power_sum() {
        let t = SieveTables::build(5000).unwrap();
        let mut direct = 0.0;
        for &p in t.primes() {
            let mut pk = p as u64;
            while pk <= 5000 {
                direct += (p as f64).ln();
                pk *= p as u64;
            }
        }
        assert!((t.psi(5000) - direct).abs() < 1e-9);
    }

    #[test]
    fn limit_guard() {
        assert!(SieveTables::build(SIEVE_LIMIT + 1).is_err());
        let t = SieveTables::build(0).unwrap();
        assert_eq!(t.prime_count(0), 0);
    }
}
