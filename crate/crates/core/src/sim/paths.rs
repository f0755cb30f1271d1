//! Single-path kernels: exact between-claims dynamics and the time-stepped
//! approximation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Dynamics, StrategySpec};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PathOutcome {
    /// Discounted dividends paid on `[0, σ ∧ T]`.
    pub payout: f64,
    pub ruin_time: Option<f64>,
    pub claims: u64,
}

/// `∫_{t0}^{t0+d} e^{-qs} ds`.
#[inline]
fn discount(q: f64, t0: f64, d: f64) -> f64 {
    (-q * t0).exp() * -(-q * d).exp_m1() / q
}

#[inline]
fn exp_draw(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.random();
    -(-u).ln_1p() / rate
}

pub(crate) fn run(
    dyn_: &Dynamics,
    strategy: &StrategySpec,
    q: f64,
    x0: f64,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> PathOutcome {
    if dyn_.approximate {
        euler(dyn_, strategy, q, x0, horizon, rng)
    } else {
        exact(dyn_, strategy, q, x0, horizon, rng)
    }
}

/// Moves the reserve `u` deterministically from `t` for `d` time units at
/// premium rate `c` under the strategy; returns the discounted payout.
fn flow(strategy: &StrategySpec, c: f64, q: f64, u: &mut f64, mut t: f64, mut d: f64) -> f64 {
    let mut paid = 0.0;
    match *strategy {
        StrategySpec::None => *u += c * d,
        StrategySpec::Barrier { a } => {
            if *u < a {
                let s = (a - *u) / c;
                if s >= d {
                    *u += c * d;
                    return 0.0;
                }
                *u = a;
                t += s;
                d -= s;
            }
            paid += c * discount(q, t, d);
        }
        StrategySpec::Threshold { b, rate } => {
            if *u < b {
                let s = (b - *u) / c;
                if s >= d {
                    *u += c * d;
                    return 0.0;
                }
                *u = b;
                t += s;
                d -= s;
            }
            let net = c - rate;
            if net >= 0.0 {
                paid += rate * discount(q, t, d);
                *u += net * d;
            } else {
                let s = (*u - b) / -net;
                if s >= d {
                    paid += rate * discount(q, t, d);
                    *u += net * d;
                } else {
                    paid += rate * discount(q, t, s);
                    *u = b;
                    // Held at b: only the premium can be paid out.
                    paid += c * discount(q, t + s, d - s);
                }
            }
        }
    }
    paid
}

fn exact(dyn_: &Dynamics, strategy: &StrategySpec, q: f64, x0: f64, horizon: f64, rng: &mut ChaCha8Rng) -> PathOutcome {
    let c = dyn_.drift;
    let rate = dyn_.claims.rate();
    let mut u = x0;
    let mut payout = 0.0;
    if let StrategySpec::Barrier { a } = *strategy {
        if u > a {
            payout += u - a;
            u = a;
        }
    }
    let mut t = 0.0;
    let mut claims = 0;
    loop {
        let next = t + exp_draw(rng, rate);
        let end = next.min(horizon);
        payout += flow(strategy, c, q, &mut u, t, end - t);
        if next >= horizon {
            return PathOutcome {
                payout,
                ruin_time: None,
                claims,
            };
        }
        t = next;
        let v: f64 = rng.random();
        u -= dyn_.claims.sample(v);
        claims += 1;
        if u < 0.0 {
            return PathOutcome {
                payout,
                ruin_time: Some(t),
                claims,
            };
        }
    }
}

fn euler(dyn_: &Dynamics, strategy: &StrategySpec, q: f64, x0: f64, horizon: f64, rng: &mut ChaCha8Rng) -> PathOutcome {
    let h = dyn_.step;
    let rate = dyn_.claims.rate();
    let sd = dyn_.vol * h.sqrt();
    let mut u = x0;
    let mut payout = 0.0;
    let mut t = 0.0;
    let mut claims = 0;
    let mut next_claim = exp_draw(rng, rate);
    let pay_lump = |u: &mut f64, t: f64, payout: &mut f64| {
        if let StrategySpec::Barrier { a } = *strategy {
            if *u > a {
                *payout += (-q * t).exp() * (*u - a);
                *u = a;
            }
        }
    };
    pay_lump(&mut u, 0.0, &mut payout);
    while t < horizon {
        let d = h.min(horizon - t);
        let z: f64 = if sd > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        let mut du = dyn_.drift * d + sd * (d / h).sqrt() * z;
        if let StrategySpec::Threshold { b, rate: r } = *strategy {
            if u > b {
                payout += r * discount(q, t, d);
                du -= r * d;
            }
        }
        u += du;
        t += d;
        while next_claim <= t {
            let v: f64 = rng.random();
            u -= dyn_.claims.sample(v);
            claims += 1;
            next_claim += exp_draw(rng, rate);
        }
        if u < 0.0 {
            return PathOutcome {
                payout,
                ruin_time: Some(t),
                claims,
            };
        }
        pay_lump(&mut u, t, &mut payout);
    }
    PathOutcome {
        payout,
        ruin_time: None,
        claims,
    }
}
