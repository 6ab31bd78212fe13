//! Seeded random rationals, points, diamonds and causal curves.

use rand::Rng;

use super::{rat, Diamond, Point, Rational, Worldline};

/// Uniform on the grid `{lo, lo + 1/den, …, hi}`.
pub fn grid<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    rat(rng.gen_range(lo * den..=hi * den), den)
}

/// Strictly inside `(lo, hi)` on a grid of `steps` subdivisions.
pub fn between<R: Rng>(rng: &mut R, lo: &Rational, hi: &Rational, steps: i64) -> Rational {
    let k = rng.gen_range(1..steps);
    lo + (hi - lo) * rat(k, steps)
}

/// A velocity in `[-1, 1]` with denominator 8; lightlike values included.
pub fn velocity<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-8..=8), 8)
}

/// A random diamond whose centre lies in `[-span, span]²`.
pub fn diamond<R: Rng>(rng: &mut R, span: i64, closed: bool) -> Diamond {
    let t = grid(rng, -span, span, 4);
    let x = grid(rng, -span, span, 4);
    let r = rat(rng.gen_range(1..=4 * span), 4);
    Diamond::centred(t, x, r, closed).expect("positive radius")
}

/// A random point strictly inside an open diamond.
pub fn point_in<R: Rng>(rng: &mut R, d: &Diamond) -> Point {
    let u = between(rng, &d.bottom.u(), &d.top.u(), 64);
    let v = between(rng, &d.bottom.v(), &d.top.v(), 64);
    Point::from_null(&u, &v)
}

/// A random point of `J⁺(p)`, displaced by at most `reach` in each null direction.
pub fn causal_future_point<R: Rng>(rng: &mut R, p: &Point, reach: i64) -> Point {
    let du = grid(rng, 0, reach, 8);
    let dv = grid(rng, 0, reach, 8);
    Point::from_null(&(p.u() + du), &(p.v() + dv))
}

/// A causal piecewise-linear path from `p` to `q ∈ J⁺(p)` with `corners` interior vertices.
pub fn causal_path<R: Rng>(rng: &mut R, p: &Point, q: &Point, corners: usize) -> Vec<Point> {
    let (du, dv) = (q.u() - p.u(), q.v() - p.v());
    let mut us: Vec<Rational> = (0..corners).map(|_| &du * rat(rng.gen_range(0..=64), 64)).collect();
    let mut vs: Vec<Rational> = (0..corners).map(|_| &dv * rat(rng.gen_range(0..=64), 64)).collect();
    us.sort();
    vs.sort();
    let mut out = vec![p.clone()];
    for (a, b) in us.iter().zip(vs.iter()) {
        out.push(Point::from_null(&(p.u() + a), &(p.v() + b)));
    }
    out.push(q.clone());
    out
}

/// A random inextendible causal curve through `p` with at most `max_turns` slope changes on each side.
pub fn curve_through<R: Rng>(rng: &mut R, p: &Point, max_turns: usize) -> Worldline {
    let before = rng.gen_range(0..=max_turns);
    let after = rng.gen_range(0..=max_turns);
    let mut past = Vec::new();
    let mut cur = p.clone();
    for _ in 0..before {
        let dt = rat(rng.gen_range(1..=16), 8);
        let dx = &dt * velocity(rng);
        cur = Point::new(&cur.t - &dt, &cur.x - dx);
        past.push(cur.clone());
    }
    past.reverse();
    let mut vertices = past;
    vertices.push(p.clone());
    cur = p.clone();
    for _ in 0..after {
        let dt = rat(rng.gen_range(1..=16), 8);
        let dx = &dt * velocity(rng);
        cur = Point::new(&cur.t + &dt, &cur.x + dx);
        vertices.push(cur.clone());
    }
    Worldline::new(vertices, velocity(rng), velocity(rng)).expect("every step is causal")
}

/// A random worldline with a few vertices spread around `x0`.
pub fn worldline<R: Rng>(rng: &mut R, x0: &Rational, turns: usize) -> Worldline {
    let start = Point::new(grid(rng, -4, 0, 4), x0.clone());
    let mut vertices = vec![start.clone()];
    let mut cur = start;
    for _ in 0..turns {
        let dt = rat(rng.gen_range(1..=12), 4);
        let dx = &dt * velocity(rng);
        cur = Point::new(&cur.t + &dt, &cur.x + dx);
        vertices.push(cur.clone());
    }
    Worldline::new(vertices, velocity(rng), velocity(rng)).expect("every step is causal")
}
