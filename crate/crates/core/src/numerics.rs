//! Small numerical kernels shared across modules.

/// Half-width of the band around a critical circle where quotients by the
/// defining function switch to interpolation.
pub const QUOTIENT_BAND: f64 = 1e-3;
/// Interpolation nodes in units of the band half-width.
pub const QUOTIENT_NODES: [f64; 6] = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];

/// Lagrange interpolation through `(nodes[i], values[i])`, evaluated at `t`.
pub fn lagrange(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (i, (&xi, &vi)) in nodes.iter().zip(values).enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                w *= (t - xj) / (xi - xj);
            }
        }
        acc += w * vi;
    }
    acc
}

/// `g(t)/t` for a `g` vanishing at `t = 0`. Inside the band the smooth
/// quotient is interpolated from nodes at `±δ, ±2δ, ±3δ`.
#[inline]
pub fn divide_by_t(t: f64, g: impl Fn(f64) -> f64) -> f64 {
    if t.abs() >= QUOTIENT_BAND {
        return g(t) / t;
    }
    let nodes = QUOTIENT_NODES.map(|k| k * QUOTIENT_BAND);
    let vals = nodes.map(|tau| g(tau) / tau);
    lagrange(&nodes, &vals, t)
}

/// Two-component version of [`divide_by_t`] that returns `t · (g(t)/t²)`,
/// i.e. `g(t)/w(t)` where both vanish at the circle and `g/w` vanishes too.
/// The result is exactly zero at `t = 0`.
#[inline]
pub fn vanishing_quotient(t: f64, eval: impl Fn(f64) -> ([f64; 2], f64)) -> [f64; 2] {
    if t.abs() >= QUOTIENT_BAND {
        let (num, den) = eval(t);
        return [num[0] / den, num[1] / den];
    }
    let nodes = QUOTIENT_NODES.map(|k| k * QUOTIENT_BAND);
    let mut v0 = [0.0; 6];
    let mut v1 = [0.0; 6];
    for (i, &tau) in nodes.iter().enumerate() {
        let (num, den) = eval(tau);
        v0[i] = num[0] / den / tau;
        v1[i] = num[1] / den / tau;
    }
    [t * lagrange(&nodes, &v0, t), t * lagrange(&nodes, &v1, t)]
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits the exponent `p` in `sup|f| ~ C·|t|^p` over a geometric ladder of
/// offsets `t ∈ [t_lo, t_hi]`, given `sup_at(t)` (sup over both sides and y).
/// Returns infinity when the sampled values are all zero.
pub fn fit_vanishing_order(t_lo: f64, t_hi: f64, levels: usize, sup_at: impl Fn(f64) -> f64) -> f64 {
    let mut lx = Vec::with_capacity(levels);
    let mut ly = Vec::with_capacity(levels);
    let ratio = (t_hi / t_lo).powf(1.0 / (levels - 1) as f64);
    let mut t = t_lo;
    let mut all_zero = true;
    for _ in 0..levels {
        let s = sup_at(t);
        if s > 1e-300 {
            all_zero = false;
        }
        lx.push(t.ln());
        ly.push(s.max(1e-300).ln());
        t *= ratio;
    }
    if all_zero {
        return f64::INFINITY;
    }
    fit_slope(&lx, &ly)
}

/// C^∞ step: 0 for `u ≤ 0`, 1 for `u ≥ 1`. Returns value and derivative.
pub fn smooth_transition(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0);
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    let s = a / (a + b);
    let ds = s * (1.0 - s) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)));
    (s, ds)
}

/// Polynomial smoothstep of degree `2p+1`: `S(0)=0, S(1)=1` with `S'`
/// vanishing to order `p` at both ends.
#[derive(Clone, Debug)]
pub struct Smoothstep {
    p: usize,
    /// `S(u) = u^{p+1} Σ_j q_j u^j` for `u ≤ 1/2`.
    q: Vec<f64>,
    lead: f64,
}

impl Smoothstep {
    pub fn new(p: usize) -> Self {
        let mut q = Vec::with_capacity(p + 1);
        for j in 0..=p {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            q.push(sign * binomial(p + j, j) * binomial(2 * p + 1, p - j));
        }
        // S'(u) = lead · u^p (1-u)^p
        let lead = (2 * p + 1) as f64 * binomial(2 * p, p);
        Self { p, q, lead }
    }

    pub fn degree(&self) -> usize {
        2 * self.p + 1
    }

    /// Order to which `S'` vanishes at the endpoints.
    pub fn flatness(&self) -> usize {
        self.p
    }

    fn lower(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.q.iter().rev() {
            acc = acc * u + c;
        }
        acc * u.powi(self.p as i32 + 1)
    }

    pub fn value(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u <= 0.5 {
            self.lower(u)
        } else {
            1.0 - self.lower(1.0 - u)
        }
    }

    /// `1 - S(u)`, accurate near `u = 1`.
    pub fn complement(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u >= 0.5 {
            self.lower(1.0 - u)
        } else {
            1.0 - self.lower(u)
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        self.lead * (u * (1.0 - u)).powi(self.p as i32)
    }

    pub fn second(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) || self.p == 0 {
            return 0.0;
        }
        self.lead * self.p as f64 * (u * (1.0 - u)).powi(self.p as i32 - 1) * (1.0 - 2.0 * u)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

/// Falling factorial `n (n-1) ... (n-d+1)` as a float.
pub fn falling(n: f64, d: usize) -> f64 {
    (0..d).map(|i| n - i as f64).product()
}

/// Wrapped signed offset `x - c` in `[-1/2, 1/2)`.
#[inline]
pub fn wrapped_offset(x: f64, c: f64) -> f64 {
    (x - c + 0.5).rem_euclid(1.0) - 0.5
}
