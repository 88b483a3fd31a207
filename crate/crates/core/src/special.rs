// SPDX-License-Identifier: Apache-2.0

//! Integer-order Bessel functions of the first kind.

/// `J_0(x), …, J_{max_order}(x)` for `x >= 0` by Miller's downward recurrence,
/// normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_orders(max_order: usize, x: f64) -> Vec<f64> {
    assert!(
        x >= 0.0 && x.is_finite(),
        "bessel_j_orders needs finite x >= 0, got {x}"
    );
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // start well above both the order and the argument so the seed error dies out
    let top = max_order.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let mut next = 0.0;
    let mut current = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * current - next;
        next = current;
        current = prev;
        // `current` is now the value at order k - 1
        let order = k - 1;
        if order <= max_order {
            out[order] = current;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += current;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `J_m(x)` for integer `m` (negative orders via `J_{-m} = (-1)^m J_m`) and real `x`.
pub fn bessel_j(m: i64, x: f64) -> f64 {
    let order = m.unsigned_abs() as usize;
    let mut value = bessel_j_orders(order, x.abs())[order];
    // J_m(-x) = (-1)^m J_m(x)
    if x < 0.0 && order % 2 == 1 {
        value = -value;
    }
    if m < 0 && order % 2 == 1 {
        value = -value;
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(order: usize, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(order as i32) / (1..=order).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for m in 1..200 {
            term *= -half * half / (m as f64 * (m + order) as f64);
            sum += term;
            if term.abs() < 1e-20 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn matches_power_series() {
        for &x in &[0.1, 0.5, 1.0, 2.404825557695773, 4.0, 7.5] {
            let all = bessel_j_orders(12, x);
            for (order, v) in all.iter().enumerate() {
                assert!((v - series(order, x)).abs() < 1e-12, "J_{order}({x})");
            }
        }
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel_j(0, 2.404825557695773).abs() < 1e-12);
    }

    #[test]
    fn sum_rules_at_large_argument() {
        let x = 60.0;
        let j = bessel_j_orders(200, x);
        let total: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-12);
        // Σ_m m² J_m(x)² = x²/2 over all integers m
        let second: f64 = 2.0
            * j.iter()
                .enumerate()
                .map(|(m, v)| (m * m) as f64 * v * v)
                .sum::<f64>();
        assert!((second - x * x / 2.0).abs() < 1e-9 * x * x);
    }

    #[test]
    fn negative_orders_and_arguments() {
        assert!((bessel_j(-3, 1.7) + bessel_j(3, 1.7)).abs() < 1e-15);
        assert!((bessel_j(2, -1.7) - bessel_j(2, 1.7)).abs() < 1e-15);
    }
}
