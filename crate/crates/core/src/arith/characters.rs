use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;

use super::{euler_phi, factor_u64};
use crate::error::{budget, Error, Result};

pub const CHARACTER_MODULUS_LIMIT: u64 = 10_000;

#[derive(Debug)]
struct Component {
    /// Orders of the cyclic factors contributed by this prime power.
    orders: Vec<u32>,
    modulus: u64,
    /// Exponent vectors of each residue mod `modulus` (units only).
    logs: Vec<Option<Vec<u32>>>,
}

/// `(Z/qZ)^*` written as a product of cyclic groups with discrete logs.
#[derive(Debug)]
pub struct CharacterGroup {
    q: u64,
    /// Common denominator of all character values.
    exponent: u32,
    orders: Vec<u32>,
    components: Vec<Component>,
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

fn primitive_root_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = factor_u64(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p).find(|&g| qs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1)).expect("primitive root exists")
}

fn cyclic_logs(modulus: u64, g: u64, order: u64) -> Vec<Option<Vec<u32>>> {
    let mut logs = vec![None; modulus as usize];
    let mut x = 1 % modulus;
    for k in 0..order {
        logs[x as usize] = Some(vec![k as u32]);
        x = x * g % modulus;
    }
    logs
}

fn component(p: u64, k: u32) -> Component {
    let m = p.pow(k);
    if p != 2 {
        let mut g = primitive_root_prime(p);
        if k > 1 && pow_mod(g, p - 1, p * p) == 1 {
            g += p;
        }
        let order = m / p * (p - 1);
        return Component { orders: vec![order as u32], modulus: m, logs: cyclic_logs(m, g, order) };
    }
    match k {
        1 => Component { orders: vec![], modulus: 2, logs: vec![None, Some(vec![])] },
        2 => Component { orders: vec![2], modulus: 4, logs: vec![None, Some(vec![0]), None, Some(vec![1])] },
        _ => {
            // x = (-1)^a 5^b
            let half = m / 4;
            let fives = cyclic_logs(m, 5, half);
            let mut logs = vec![None; m as usize];
            for x in (1..m).step_by(2) {
                let a = if x % 4 == 1 { 0 } else { 1 };
                let y = if a == 0 { x } else { m - x };
                let b = fives[y as usize].as_ref().expect("5 generates the 1 mod 4 units")[0];
                logs[x as usize] = Some(vec![a, b]);
            }
            Component { orders: vec![2, half as u32], modulus: m, logs }
        }
    }
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        budget("character modulus", q as f64, CHARACTER_MODULUS_LIMIT as f64)?;
        let components: Vec<Component> = factor_u64(q).into_iter().map(|(p, k)| component(p, k)).collect();
        let orders: Vec<u32> = components.iter().flat_map(|c| c.orders.iter().copied()).collect();
        let exponent = orders.iter().fold(1u32, |l, &o| l.lcm(&o));
        Ok(CharacterGroup { q, exponent, orders, components })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Discrete-log vector of a unit; `None` when `gcd(x, q) > 1`.
    pub fn log(&self, x: u64) -> Option<Vec<u32>> {
        let mut out = Vec::with_capacity(self.orders.len());
        for c in &self.components {
            out.extend_from_slice(c.logs[(x % c.modulus) as usize].as_ref()?);
        }
        Some(out)
    }
}

/// A character mod `q` given by its exponents on the cyclic factors.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    group: Arc<CharacterGroup>,
    exps: Vec<u32>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.q == other.group.q && self.exps == other.exps
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    pub fn principal(group: Arc<CharacterGroup>) -> Self {
        let exps = vec![0; group.orders.len()];
        DirichletCharacter { group, exps }
    }

    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    /// Denominator `L`: values are `e(k / L)`.
    pub fn denominator(&self) -> u32 {
        self.group.exponent
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// `k` with `χ(x) = e(k / L)`, or `None` when `χ(x) = 0`.
    pub fn value_index(&self, x: u64) -> Option<u32> {
        let logs = self.group.log(x)?;
        let l = self.group.exponent as u64;
        let mut k = 0u64;
        for ((&j, &lg), &ord) in self.exps.iter().zip(&logs).zip(&self.group.orders) {
            k += j as u64 * lg as u64 * (l / ord as u64);
        }
        Some((k % l) as u32)
    }

    pub fn value(&self, x: u64) -> Complex64 {
        match self.value_index(x) {
            Some(k) => Complex64::from_polar(1.0, TAU * k as f64 / self.group.exponent as f64),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value table on `0..q`.
    pub fn values(&self) -> Vec<Option<u32>> {
        (0..self.group.q).map(|x| self.value_index(x)).collect()
    }

    pub fn conj(&self) -> Self {
        let exps = self.exps.iter().zip(&self.group.orders).map(|(&j, &o)| (o - j) % o).collect();
        DirichletCharacter { group: self.group.clone(), exps }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.group.q != other.group.q {
            return Err(Error::InvalidArgument("characters have different moduli".into()));
        }
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .zip(&self.group.orders)
            .map(|((&a, &b), &o)| (a + b) % o)
            .collect();
        Ok(DirichletCharacter { group: self.group.clone(), exps })
    }

    /// Whether every value is `±1` or `0`.
    pub fn is_real(&self) -> bool {
        let l = self.group.exponent;
        self.values().into_iter().flatten().all(|k| (2 * k) % l == 0)
    }
}

/// All `φ(q)` characters mod `q`, principal first.
pub fn characters_mod(q: u64) -> Result<Vec<DirichletCharacter>> {
    let group = Arc::new(CharacterGroup::new(q)?);
    let orders = group.orders.clone();
    let total: usize = orders.iter().map(|&o| o as usize).product();
    debug_assert_eq!(total as u64, euler_phi(q));
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut exps = vec![0u32; orders.len()];
        for (i, &o) in orders.iter().enumerate().rev() {
            exps[i] = (idx % o as usize) as u32;
            idx /= o as usize;
        }
        out.push(DirichletCharacter { group: group.clone(), exps });
    }
    Ok(out)
}

/// Largest deviation of `Σ_x χ(x) conj(χ'(x))` from `φ(q) [χ = χ']`.
pub fn orthogonality_defect(chars: &[DirichletCharacter]) -> f64 {
    let Some(first) = chars.first() else {
        return 0.0;
    };
    let q = first.modulus();
    let phi = euler_phi(q) as f64;
    let tables: Vec<Vec<Complex64>> = chars.iter().map(|c| (0..q).map(|x| c.value(x)).collect()).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in tables.iter().enumerate() {
        for (j, b) in tables.iter().enumerate() {
            let s: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            let target = if i == j { phi } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_moduli() {
        let c5 = characters_mod(5).unwrap();
        assert_eq!(c5.len(), 4);
        let s: Complex64 = c5.iter().map(|c| c.value(2) * c.value(3).conj()).sum();
        assert!(s.norm() < 1e-12);
        let c8 = characters_mod(8).unwrap();
        assert_eq!(c8.len(), 4);
        assert!(c8.iter().all(|c| c.is_real()));
        let c1 = characters_mod(1).unwrap();
        assert_eq!(c1.len(), 1);
        assert!(c1[0].is_principal());
        assert!((1..20).all(|x| c1[0].value(x) == Complex64::new(1.0, 0.0)));
        assert!(characters_mod(0).is_err());
    }

    #[test]
    fn group_laws_and_orthogonality() {
        for q in [2u64, 3, 4, 9, 12, 16, 27, 35, 40, 63, 64, 100, 121] {
            let chars = characters_mod(q).unwrap();
            assert_eq!(chars.len() as u64, euler_phi(q), "q={q}");
            assert!(chars[0].is_principal());
            assert!(orthogonality_defect(&chars) < 1e-9, "q={q}");
            for c in &chars {
                assert_eq!(c.value_index(1), Some(0));
                for a in 0..q {
                    if a.gcd(&q) != 1 {
                        assert_eq!(c.value_index(a), None);
                        continue;
                    }
                    for b in 0..q {
                        if b.gcd(&q) != 1 {
                            continue;
                        }
                        let l = c.denominator();
                        let lhs = c.value_index(a * b % q).unwrap();
                        let rhs = (c.value_index(a).unwrap() + c.value_index(b).unwrap()) % l;
                        assert_eq!(lhs, rhs);
                    }
                }
                let prod = c.mul(&c.conj()).unwrap();
                assert!(prod.is_principal());
            }
        }
    }

    #[test]
    fn distinct_characters() {
        let chars = characters_mod(48).unwrap();
        for (i, a) in chars.iter().enumerate() {
            for b in &chars[i + 1..] {
                assert_ne!(a.values(), b.values());
            }
        }
    }
}
