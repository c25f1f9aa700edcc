//! First-order Bessel function of the first kind.

use std::f64::consts::PI;

/// Past this the alternating series loses digits to cancellation.
const SERIES_LIMIT: f64 = 4.0;
const RECURRENCE_LIMIT: f64 = 100.0;

/// J1(x). Power series for small |x|, Miller backward recurrence up to
/// |x| = 100, Hankel asymptotic expansion beyond.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT {
        series(ax)
    } else if ax <= RECURRENCE_LIMIT {
        recurrence(ax)
    } else {
        asymptotic(ax)
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

fn series(x: f64) -> f64 {
    // sum_m (-1)^m (x/2)^(2m+1) / (m! (m+1)!)
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && m > 2.0 {
            break;
        }
        if m > 200.0 {
            break;
        }
    }
    sum
}

/// Miller's algorithm: run J(n-1) = (2n/x)·J(n) − J(n+1) downward from an
/// arbitrary seed far above x, then normalize with J0 + 2·ΣJ(2k) = 1.
fn recurrence(x: f64) -> f64 {
    let top = 2 * ((x as usize + 40) / 2 + 1);
    let (mut above, mut current) = (0.0_f64, 1e-30_f64);
    let (mut order_one, mut norm) = (0.0, 0.0);
    for n in (1..=top).rev() {
        let below = 2.0 * n as f64 / x * current - above;
        above = current;
        current = below;
        // current now holds J(n-1) up to scale
        let order = n - 1;
        if order == 1 {
            order_one = current;
        }
        norm += match order {
            0 => current,
            o if o % 2 == 0 => 2.0 * current,
            _ => 0.0,
        };
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            order_one *= 1e-250;
            norm *= 1e-250;
        }
    }
    order_one / norm
}

fn asymptotic(x: f64) -> f64 {
    let mu = 4.0;
    let z = 8.0 * x;
    let a1 = mu - 1.0;
    let a2 = mu - 9.0;
    let a3 = mu - 25.0;
    let a4 = mu - 49.0;
    let a5 = mu - 81.0;
    let p = 1.0 - a1 * a2 / (2.0 * z * z) + a1 * a2 * a3 * a4 / (24.0 * z.powi(4));
    let q = a1 / z - a1 * a2 * a3 / (6.0 * z.powi(3)) + a1 * a2 * a3 * a4 * a5 / (120.0 * z.powi(5));
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Far-field directivity of a baffled circular piston, `2·J1(u)/u` with the
/// removable singularity at zero filled in.
pub fn piston_directivity(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        // 1 - u²/8 + O(u⁴)
        1.0 - u * u / 8.0
    } else {
        2.0 * j1(u) / u
    }
}
