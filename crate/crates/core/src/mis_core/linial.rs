//! One-round color reduction on a graph of bounded degree using the
//! polynomial cover-free family over a prime field: color `c` is read as a
//! polynomial `p_c` of degree at most `d` over `F_q`, and a node picks the
//! first point `x` where `p_c` differs from all its neighbours' polynomials.
//! The new color `x·q + p_c(x)` lies in `0..q²`.

/// Field size and degree for one step from a palette of size `k` on a graph
/// of degree at most `max_deg`, keeping the `q`-bit conflict mask within
/// `max_bits`. `None` if no such step shrinks the palette.
pub fn linial_params(k: u64, max_deg: u64, max_bits: u32) -> Option<(u32, u64)> {
    let mut best: Option<(u32, u64)> = None;
    for d in 1..=16u32 {
        let mut q = next_prime(max_deg * d as u64 + 1);
        while !covers(q, d, k) {
            q = next_prime(q + 1);
        }
        if q > max_bits as u64 || q * q >= k {
            continue;
        }
        if best.is_none_or(|(_, bq)| q < bq) {
            best = Some((d, q));
        }
    }
    best
}

/// q^(d+1) >= k
fn covers(q: u64, d: u32, k: u64) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..=d {
        acc *= q as u128;
        if acc >= k as u128 {
            return true;
        }
    }
    false
}

fn next_prime(mut x: u64) -> u64 {
    x = x.max(2);
    loop {
        if (2..).take_while(|p| p * p <= x).all(|p| x % p != 0) {
            return x;
        }
        x += 1;
    }
}

/// p_c(x) over F_q with the base-q digits of `c` as coefficients.
pub fn poly_eval(c: u64, q: u64, d: u32, x: u64) -> u64 {
    let mut digits = [0u64; 17];
    let mut c = c;
    for slot in digits.iter_mut().take(d as usize + 1) {
        *slot = c % q;
        c /= q;
    }
    // Horner from the top coefficient
    let mut acc = 0u64;
    for i in (0..=d as usize).rev() {
        acc = (acc * x + digits[i]) % q;
    }
    acc
}

/// Points of `F_q` where the polynomials of `mine` and `theirs` agree.
pub fn conflict_mask(mine: u64, theirs: u64, q: u64, d: u32) -> u64 {
    let mut m = 0u64;
    for x in 0..q {
        if poly_eval(mine, q, d, x) == poly_eval(theirs, q, d, x) {
            m |= 1 << x;
        }
    }
    m
}

/// New color from the OR of all conflict masks, or `None` when every point
/// is covered (impossible for a proper input coloring within the degree bound).
pub fn pick_color(mine: u64, mask: u64, q: u64, d: u32) -> Option<u64> {
    (0..q)
        .find(|&x| mask >> x & 1 == 0)
        .map(|x| x * q + poly_eval(mine, q, d, x))
}

/// Palette sizes reached by successive steps starting from `k`, stopping
/// after `max_steps` or when no step makes progress.
pub fn palette_schedule(k: u64, max_deg: u64, max_bits: u32, max_steps: u32) -> Vec<(u32, u64)> {
    let mut out = Vec::new();
    let mut k = k;
    while (out.len() as u32) < max_steps {
        match linial_params(k, max_deg, max_bits) {
            Some((d, q)) => {
                out.push((d, q));
                k = q * q;
            }
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_for_large_id_space() {
        // 2^20 ids, 80-bit budget: cubic polynomials over F_37
        assert_eq!(linial_params(1 << 20, 10, 80), Some((3, 37)));
        let sched = palette_schedule(1 << 20, 10, 80, 10);
        assert_eq!(sched, vec![(3, 37), (2, 23)]);
        // 529 = 23^2 is a fixed point
        assert_eq!(linial_params(529, 10, 80), None);
        assert_eq!(linial_params(4, 10, 8), None);
    }

    #[test]
    fn distinct_polynomials_agree_on_at_most_d_points() {
        let (d, q) = (2u32, 23u64);
        for a in 0..200u64 {
            for b in (a + 1)..(a + 30) {
                assert!(conflict_mask(a, b, q, d).count_ones() <= d);
            }
        }
    }

    #[test]
    fn step_keeps_coloring_proper() {
        let (d, q) = (2u32, 23u64);
        // a star of 11 colors: center 0, leaves 1..=10
        let colors: Vec<u64> = (0..11).map(|i| i * 97 + 5).collect();
        let mut new = Vec::new();
        for (i, &c) in colors.iter().enumerate() {
            let nbrs: Vec<u64> = if i == 0 { colors[1..].to_vec() } else { vec![colors[0]] };
            let mask = nbrs.iter().fold(0, |m, &o| m | conflict_mask(c, o, q, d));
            new.push(pick_color(c, mask, q, d).unwrap());
        }
        assert!(new[1..].iter().all(|&x| x != new[0]));
        assert!(new.iter().all(|&x| x < q * q));
    }
}
