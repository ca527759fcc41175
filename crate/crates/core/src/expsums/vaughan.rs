use num_complex::Complex64;

use super::direct::{exact_value, phase, product_fold, ComplexKahan, ENUMERATION_LIMIT};
use super::window::{Alpha, PhaseMap, WindowedBox};
use crate::arith::{vaughan_terms, SieveTables, VaughanParams};
use crate::error::{budget, Error, Result};
use crate::forms::Form;

/// Which component of `Λ` a coordinate carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VaughanPiece {
    /// `Σ_{st=x, s≤V} μ(s) log t`
    MuLog,
    /// `Σ_{st=x, s≤UV} ν_2(s)`
    Nu2,
    /// `Σ_{st=x, s>U, t>V} Λ(s) ν_3(t)`
    LambdaNu3,
}

impl VaughanPiece {
    pub const ALL: [VaughanPiece; 3] = [VaughanPiece::MuLog, VaughanPiece::Nu2, VaughanPiece::LambdaNu3];
}

#[derive(Clone, Debug)]
pub struct VaughanSplit {
    /// One entry per assignment of pieces to coordinates, in lexicographic order.
    pub pieces: Vec<(Vec<VaughanPiece>, Complex64)>,
    pub total: Complex64,
}

impl VaughanSplit {
    /// Index sets `(I_1, I_2, I_3)` of an assignment.
    pub fn index_sets(assignment: &[VaughanPiece]) -> [Vec<usize>; 3] {
        let mut out: [Vec<usize>; 3] = Default::default();
        for (j, p) in assignment.iter().enumerate() {
            out[*p as usize].push(j);
        }
        out
    }
}

/// `S(α)` rebuilt from the `3^n` sums in which coordinate `j` carries one
/// of the three components of `Λ(x_j)`.
pub fn s_vaughan(
    f: &Form,
    b: &WindowedBox,
    tables: &SieveTables,
    alpha: Alpha,
    params: VaughanParams,
) -> Result<VaughanSplit> {
    let n = f.n_vars();
    if n != b.n_vars() {
        return Err(Error::LengthMismatch { expected: b.n_vars(), got: n });
    }
    b.check_tables(tables)?;
    if (b.lower_edge() as f64) <= params.u {
        return Err(Error::Precondition(format!(
            "window lower edge {} must exceed U = {}",
            b.lower_edge(),
            params.u
        )));
    }
    if n > 12 {
        return Err(Error::Budget { what: "Vaughan assignments", needed: 3f64.powi(n as i32), limit: 3f64.powi(12) });
    }
    // tables[j][piece] = nonzero (x, ϖ_j(x) · piece(x))
    let mut comp: Vec<[Vec<(u64, f64)>; 3]> = Vec::with_capacity(n);
    let mut box_size = 1.0;
    for j in 0..n {
        let (l, h) = b.support(j);
        box_size *= (h + 1).saturating_sub(l) as f64;
        let mut c: [Vec<(u64, f64)>; 3] = Default::default();
        for x in l..=h {
            let w = b.coordinate_weight(j, x);
            if w == 0.0 {
                continue;
            }
            let t = vaughan_terms(tables, x, params)?;
            for (k, v) in [t.type_one, t.type_one_prime, t.type_two].into_iter().enumerate() {
                if v != 0.0 {
                    c[k].push((x, w * v));
                }
            }
        }
        comp.push(c);
    }
    budget("Vaughan tuples", box_size * 3f64.powi(n as i32), 3.0 * ENUMERATION_LIMIT)?;
    let map = PhaseMap::new(alpha);
    let compiled = f.compile();
    let mut pieces = Vec::with_capacity(3usize.pow(n as u32));
    let mut total = ComplexKahan::default();
    let mut assignment = vec![0usize; n];
    loop {
        let lists: Vec<Vec<(u64, f64)>> = (0..n).map(|j| comp[j][assignment[j]].clone()).collect();
        let shards = product_fold(&lists, ComplexKahan::default(), |acc, tuple| {
            let x: Vec<i64> = tuple.iter().map(|&(v, _)| v as i64).collect();
            let w: f64 = tuple.iter().map(|&(_, w)| w).product();
            acc.add(phase(&map, &exact_value(&compiled, f, &x)) * w);
        });
        let mut s = ComplexKahan::default();
        for sh in shards {
            s.add(sh.value());
        }
        let value = s.value();
        total.add(value);
        pieces.push((assignment.iter().map(|&k| VaughanPiece::ALL[k]).collect(), value));
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(VaughanSplit { pieces, total: total.value() });
            }
            k -= 1;
            assignment[k] += 1;
            if assignment[k] < 3 {
                break;
            }
            assignment[k] = 0;
        }
    }
}
