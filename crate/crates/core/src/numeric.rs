//! Small numerical building blocks shared by the energy modules.

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice, left to right.
pub fn kahan_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<KahanSum>().value()
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when the
/// bracket is below `rel_tol * (1 + |x|)`. Returns the best point seen.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (1.0 + best.0.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if fc < best.1 {
            best = (c, fc);
        }
        if fd < best.1 {
            best = (d, fd);
        }
    }
    best
}

/// Global minimum of `f` on `[a, b]`: scan `m + 1` equispaced nodes, then
/// refine by golden section inside the two cells adjacent to the best node.
///
/// The objectives minimized here are sums of a convex and a concave term, so
/// a single bracketing search is not enough; the grid finds the right basin.
pub fn grid_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> (f64, f64) {
    if b <= a {
        return (a, f(a));
    }
    let m = m.max(2);
    let h = (b - a) / m as f64;
    let mut best_i = 0usize;
    let mut best_v = f(a);
    for i in 1..=m {
        let x = if i == m { b } else { a + h * i as f64 };
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let x_best = if best_i == m { b } else { a + h * best_i as f64 };
    let lo = if best_i == 0 { a } else { a + h * (best_i - 1) as f64 };
    let hi = if best_i == m { b } else { a + h * (best_i + 1) as f64 }.min(b);
    let (xr, vr) = golden_section(&f, lo, hi, 1e-10);
    if vr < best_v {
        (xr, vr)
    } else {
        (x_best, best_v)
    }
}

/// Extrapolates `F(e) = L + a e^p + b e^{2p}` through the last three
/// `(e, F)` samples and returns `L`. With two samples the `e^{2p}` term is
/// dropped; with one the sample itself is returned.
pub fn richardson(eps: &[f64], values: &[f64], order: f64) -> Option<f64> {
    let n = eps.len().min(values.len());
    match n {
        0 => None,
        1 => Some(values[0]),
        2 => {
            let (e0, e1) = (eps[0].powf(order), eps[1].powf(order));
            if (e0 - e1).abs() == 0.0 {
                return None;
            }
            Some((values[1] * e0 - values[0] * e1) / (e0 - e1))
        }
        _ => {
            let e = &eps[n - 3..n];
            let v = &values[n - 3..n];
            let rows: Vec<[f64; 4]> = (0..3)
                .map(|i| {
                    let t = e[i].powf(order);
                    [1.0, t, t * t, v[i]]
                })
                .collect();
            solve3(rows).map(|x| x[0])
        }
    }
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: Vec<[f64; 4]>) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Definite integral of a smooth integrand by double-exponential quadrature,
/// split at the given interior breakpoints. Returns `(value, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> (f64, f64) {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let mut total = KahanSum::new();
    let mut err = 0.0;
    for w in pts.windows(2) {
        if w[1] > w[0] {
            let out = quadrature::double_exponential::integrate(&f, w[0], w[1], abs_tol);
            total.add(out.integral);
            err += out.error_estimate;
        }
    }
    (total.value(), err)
}
