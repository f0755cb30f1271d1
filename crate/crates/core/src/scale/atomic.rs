//! Exact scale functions for bounded-variation processes whose jumps sit on
//! finitely many atoms.
//!
//! With `ψ(θ) - q = (δθ - q - λ) + Σ m_i e^{-θx_i}`, `λ = Σ m_i`, expanding
//! `1/(ψ - q)` as a geometric series in `Σ m_i e^{-θx_i}/(δθ - q - λ)` and
//! inverting term by term gives the finite sum
//!
//! `W^{(q)}(x) = Σ_k (-1)^{|k|} Π_i (m_i^{k_i}/k_i!) (x-c_k)^{|k|} e^{a(x-c_k)} / δ^{|k|+1}`
//!
//! over count vectors `k` with shift `c_k = Σ k_i x_i < x`, `a = (q+λ)/δ`.

use crate::error::{Error, Result};
use crate::levy::Atom;

const MAX_TERMS: usize = 2_000_000;

/// One term `coef · (x-shift)^n e^{a(x-shift)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    shift: f64,
    n: i32,
    coef: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AtomicSeries {
    terms: Vec<Term>,
    a: f64,
}

impl AtomicSeries {
    pub(crate) fn new(delta: f64, atoms: &[Atom], q: f64, x_max: f64) -> Result<Self> {
        let lambda: f64 = atoms.iter().map(|a| a.mass).sum();
        let a = (q + lambda) / delta;
        let mut terms = Vec::new();
        let mut counts = vec![0u32; atoms.len()];
        enumerate(atoms, 0, 0.0, &mut counts, x_max, delta, &mut terms)?;
        terms.sort_by(|s, t| s.shift.total_cmp(&t.shift));
        Ok(AtomicSeries { terms, a })
    }

    /// `(W, W', W'')` at `x > 0`, right limits at the shift points.
    pub(crate) fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (mut w, mut w1, mut w2) = (0.0, 0.0, 0.0);
        let a = self.a;
        for t in &self.terms {
            let y = x - t.shift;
            if y < 0.0 {
                break;
            }
            let n = t.n as f64;
            let e = (a * y).exp() * t.coef;
            let p = if t.n == 0 { 1.0 } else { y.powi(t.n) };
            let p1 = if t.n == 0 { 0.0 } else { n * y.powi(t.n - 1) };
            let p2 = if t.n < 2 { 0.0 } else { n * (n - 1.0) * y.powi(t.n - 2) };
            w += e * p;
            w1 += e * (p1 + a * p);
            w2 += e * (p2 + 2.0 * a * p1 + a * a * p);
        }
        (w, w1, w2)
    }

    /// Shift points in `(0, ∞)` where `W'` jumps.
    pub(crate) fn shifts(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.terms.iter().map(|t| t.shift).filter(|&c| c > 0.0).collect();
        s.dedup();
        s
    }
}

fn enumerate(
    atoms: &[Atom],
    i: usize,
    shift: f64,
    counts: &mut Vec<u32>,
    x_max: f64,
    delta: f64,
    out: &mut Vec<Term>,
) -> Result<()> {
    if i == atoms.len() {
        let n: u32 = counts.iter().sum();
        let mut coef = if n.is_multiple_of(2) { 1.0 } else { -1.0 } / delta.powi(n as i32 + 1);
        for (k, at) in counts.iter().zip(atoms) {
            for j in 1..=*k {
                coef *= at.mass / j as f64;
            }
        }
        out.push(Term {
            shift,
            n: n as i32,
            coef,
        });
        if out.len() > MAX_TERMS {
            return Err(Error::Unsupported(format!(
                "atomic series needs more than {MAX_TERMS} terms up to x = {x_max}"
            )));
        }
        return Ok(());
    }
    let loc = atoms[i].location;
    let mut k = 0;
    loop {
        let s = shift + loc * k as f64;
        if s > x_max {
            break;
        }
        counts[i] = k;
        enumerate(atoms, i + 1, s, counts, x_max, delta, out)?;
        k += 1;
    }
    counts[i] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_drift_and_single_atom() {
        let s = AtomicSeries::new(2.0, &[], 0.0, 5.0).unwrap();
        assert_eq!(s.eval(3.0), (0.5, 0.0, 0.0));
        let at = [Atom {
            location: 1.0,
            mass: 1.0,
        }];
        let s = AtomicSeries::new(2.0, &at, 0.0, 5.0).unwrap();
        // below the atom: W = e^{x/2}/2
        let (w, w1, _) = s.eval(0.5);
        assert!((w - 0.25f64.exp() / 2.0).abs() < 1e-15);
        assert!((w1 - 0.25f64.exp() / 4.0).abs() < 1e-15);
        // W(∞) = 1/ψ'(0+) = 1
        let s = AtomicSeries::new(2.0, &at, 0.0, 15.0).unwrap();
        assert!((s.eval(15.0).0 - 1.0).abs() < 1e-6);
        assert_eq!(s.shifts()[0], 1.0);
    }
}
