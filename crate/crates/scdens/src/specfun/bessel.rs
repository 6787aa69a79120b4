//! Bessel functions J_nu (integer and half-integer orders), modified
//! K_0/K_1, spherical j_l, and zero finders.
//!
//! Integer-order J comes from Miller's backward recurrence normalised with
//! the even-order sum rule; half-integer orders reduce to spherical Bessel
//! functions which have their own stable downward recurrence. These cover
//! every order the density formulas need (J_{D/2} for D = 1..3 and the
//! billiard spectra). K_0/K_1 switch between the ascending series and a
//! real-integral representation; both branches are accurate to ~1e-12.

use std::f64::consts::PI;

use super::quad::{integrate, QuadratureSpec};
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// J_nu(z) for z >= 0 and nu a non-negative integer or half-integer.
///
/// Other orders are rejected: nothing in the crate needs them, and a
/// general-order implementation would be untested ballast.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("bessel_j requires z >= 0, got {z}")));
    }
    if nu < 0.0 {
        return Err(Error::Domain(format!("bessel_j requires nu >= 0, got {nu}")));
    }
    let twice = 2.0 * nu;
    if (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "bessel_j supports integer and half-integer orders only, got nu = {nu}"
        )));
    }
    let twice = twice.round() as i64;
    if twice % 2 == 0 {
        Ok(bessel_j_int((twice / 2) as usize, z))
    } else {
        let l = ((twice - 1) / 2) as usize;
        // J_{l+1/2}(z) = sqrt(2z/pi) j_l(z)
        Ok((2.0 * z / PI).sqrt() * sph_bessel_j(l, z))
    }
}

/// d/dz J_m(z) for integer m, from J_m' = (J_{m-1} - J_{m+1})/2.
pub fn bessel_j_prime(m: usize, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("bessel_j_prime requires z >= 0, got {z}")));
    }
    if m == 0 {
        Ok(-bessel_j_int(1, z))
    } else {
        Ok(0.5 * (bessel_j_int(m - 1, z) - bessel_j_int(m + 1, z)))
    }
}

/// J_nu(z) / z^nu with its finite z -> 0 limit 1 / (2^nu Gamma(nu + 1)).
///
/// This is the combination entering the surface-oscillation formula, which
/// must stay finite at the wall where z vanishes.
pub fn bessel_j_over_pow(nu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("bessel_j_over_pow requires z >= 0, got {z}")));
    }
    if z < 0.1 {
        // Ascending series of J_nu(z)/z^nu; three terms give ~1e-17 here.
        let g1 = super::gamma::gamma_fn(nu + 1.0)?;
        let g2 = super::gamma::gamma_fn(nu + 2.0)?;
        let g3 = super::gamma::gamma_fn(nu + 3.0)?;
        let q = 0.25 * z * z;
        let s = 1.0 / g1 - q / g2 + q * q / (2.0 * g3);
        return Ok(s / 2f64.powf(nu));
    }
    Ok(bessel_j(nu, z)? / z.powf(nu))
}

/// Integer-order J_m(z) by backward recurrence (Miller's algorithm).
fn bessel_j_int(m: usize, z: f64) -> f64 {
    if z == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if z < 1e-7 {
        // Leading series term is plenty below the recurrence's comfort zone.
        let mut t = 1.0;
        for k in 1..=m {
            t *= z / (2.0 * k as f64);
        }
        return t * (1.0 - z * z / (4.0 * (m as f64 + 1.0)));
    }
    // Start high enough that the downward recurrence has converged onto the
    // minimal solution by the time it reaches order m.
    let start = (m.max(z.ceil() as usize)) + 16 + (40.0 * (m as f64 + z).sqrt()) as usize / 4;
    let start = if start % 2 == 0 { start } else { start + 1 };
    let mut jp = 0.0f64; // J_{k+1}
    let mut j = 1e-300f64; // J_k seed
    let mut result = if m >= start { 0.0 } else { f64::NAN };
    let mut sum = 0.0f64; // J_0 + 2*sum_{k even >= 2} J_k
    for k in (0..=start).rev() {
        let jm = (2.0 * (k as f64 + 1.0) / z) * j - jp;
        jp = j;
        j = jm;
        // j now holds the unnormalised J_k
        if k == m {
            result = j;
        }
        if k % 2 == 0 {
            sum += if k == 0 { j } else { 2.0 * j };
        }
        if j.abs() > 1e250 {
            // Rescale to dodge overflow; relative structure is preserved.
            j *= 1e-250;
            jp *= 1e-250;
            sum *= 1e-250;
            if !result.is_nan() {
                result *= 1e-250;
            }
        }
    }
    if result.is_nan() {
        0.0
    } else {
        result / sum
    }
}

/// Spherical Bessel function j_l(z), downward recurrence normalised on
/// j_0 = sin(z)/z.
pub fn sph_bessel_j(l: usize, z: f64) -> f64 {
    if z == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let j0 = z.sin() / z;
    if l == 0 {
        return j0;
    }
    let j1 = z.sin() / (z * z) - z.cos() / z;
    if l == 1 {
        return j1;
    }
    if z > 1.5 * l as f64 {
        // Upward recurrence is stable well above the turning point l ~ z.
        let mut a = j0;
        let mut b = j1;
        for k in 1..l {
            let c = (2.0 * k as f64 + 1.0) / z * b - a;
            a = b;
            b = c;
        }
        return b;
    }
    // Downward (Miller) recurrence from a safely high order.
    let start = l + 16 + (40.0 * (l as f64 + z).sqrt()) as usize / 4;
    let mut up = 0.0f64;
    let mut cur = 1e-300f64;
    let mut at_l = f64::NAN;
    let mut at_0 = f64::NAN;
    for k in (0..=start).rev() {
        let down = (2.0 * k as f64 + 3.0) / z * cur - up;
        up = cur;
        cur = down;
        if k == l {
            at_l = cur;
        }
        if k == 0 {
            at_0 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            up *= 1e-250;
            if !at_l.is_nan() {
                at_l *= 1e-250;
            }
        }
    }
    at_l / at_0 * j0
}

/// d/dz j_l(z) from j_l' = j_{l-1} - (l+1)/z * j_l (l >= 1), j_0' = -j_1.
pub fn sph_bessel_j_prime(l: usize, z: f64) -> f64 {
    if l == 0 {
        return -sph_bessel_j(1, z);
    }
    if z == 0.0 {
        return if l == 1 { 1.0 / 3.0 } else { 0.0 };
    }
    sph_bessel_j(l - 1, z) - (l as f64 + 1.0) / z * sph_bessel_j(l, z)
}

/// k-th positive zero of J_m (k counts from 1).
pub fn bessel_j_zero(m: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("zero index k counts from 1".into()));
    }
    find_zero(|z| bessel_j_int(m, z), m as f64, k)
}

/// k-th positive zero of the spherical Bessel function j_l
/// (equivalently of J_{l+1/2}).
pub fn sph_bessel_zero(l: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("zero index k counts from 1".into()));
    }
    find_zero(|z| sph_bessel_j(l, z), l as f64 + 0.5, k)
}

/// All positive zeros of J_m below z_max, in one scan. Much cheaper than
/// repeated `bessel_j_zero` calls when assembling billiard spectra.
pub fn bessel_j_zeros_upto(m: usize, z_max: f64) -> Vec<f64> {
    zeros_upto(|z| bessel_j_int(m, z), m as f64, z_max)
}

/// All positive zeros of the spherical Bessel function j_l below z_max.
pub fn sph_bessel_zeros_upto(l: usize, z_max: f64) -> Vec<f64> {
    zeros_upto(|z| sph_bessel_j(l, z), l as f64 + 0.5, z_max)
}

fn zeros_upto<F: Fn(f64) -> f64>(f: F, order: f64, z_max: f64) -> Vec<f64> {
    let mut found = Vec::new();
    let mut x = (order.max(0.0) + 1e-3).max(1e-3);
    if x >= z_max {
        return found;
    }
    let step = 0.4;
    let mut fx = f(x);
    while x < z_max {
        let x2 = (x + step).min(z_max);
        let f2 = f(x2);
        if fx == 0.0 {
            found.push(x);
        } else if fx * f2 < 0.0 {
            found.push(bisect(&f, x, x2));
        }
        x = x2;
        fx = f2;
    }
    found.retain(|&z| z <= z_max);
    found
}

/// Scan for sign changes starting just above `order` (the first zero of
/// J_nu lies above nu), bisecting each bracket to ~1e-13 absolute.
fn find_zero<F: Fn(f64) -> f64>(f: F, order: f64, k: usize) -> Result<f64> {
    let mut x = (order.max(0.0) + 1e-3).max(1e-3);
    let step = 0.4; // zeros are spaced by >= ~pi, so no zero can be skipped
    let mut fx = f(x);
    let mut found = 0;
    for _ in 0..200_000 {
        let x2 = x + step;
        let f2 = f(x2);
        if fx == 0.0 {
            found += 1;
            if found == k {
                return Ok(x);
            }
        } else if fx * f2 < 0.0 {
            found += 1;
            if found == k {
                return Ok(bisect(&f, x, x2));
            }
        }
        x = x2;
        fx = f2;
    }
    Err(Error::RootFinding(format!(
        "failed to locate zero #{k} of order-{order} Bessel function"
    )))
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-14 * b.max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Modified Bessel function K_0(z), z > 0.
pub fn bessel_k0(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("bessel_k0 requires z > 0, got {z}")));
    }
    if z <= 1.5 {
        return Ok(k_small_series(0, z));
    }
    k_large_integral(0, z)
}

/// Modified Bessel function K_1(z), z > 0.
pub fn bessel_k1(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("bessel_k1 requires z > 0, got {z}")));
    }
    if z <= 1.5 {
        return Ok(k_small_series(1, z));
    }
    k_large_integral(1, z)
}

/// Ascending series for K_0/K_1 (accurate for z <= ~2).
fn k_small_series(n: usize, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let lnz2 = (0.5 * z).ln();
    // I_0, I_1 by their (rapidly convergent) power series.
    let (mut i0, mut i1) = (1.0, 0.5 * z);
    let mut t0 = 1.0;
    let mut t1 = 0.5 * z;
    for k in 1..60 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        i0 += t0;
        i1 += t1;
        if t0.abs() < 1e-18 * i0.abs() && t1.abs() < 1e-18 * i1.abs() {
            break;
        }
    }
    if n == 0 {
        // K_0 = -(ln(z/2) + gamma) I_0 + sum_k q^k H_k / (k!)^2
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut h = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= q / (kf * kf);
            h += 1.0 / kf;
            let add = term * h;
            sum += add;
            if add.abs() < 1e-18 * (sum.abs() + 1.0) {
                break;
            }
        }
        -(lnz2 + EULER_GAMMA) * i0 + sum
    } else {
        // K_1 = 1/z + ln(z/2) I_1 - (z/4) sum_k (H_k + H_{k+1} - 2 gamma) q^k / (k! (k+1)!)
        let mut sum = 0.0;
        let mut term = 1.0; // q^k / (k! (k+1)!)
        let mut hk = 0.0;
        let mut hk1 = 1.0;
        for k in 0..60 {
            let add = term * (hk + hk1 - 2.0 * EULER_GAMMA);
            sum += add;
            let kf = k as f64;
            term *= q / ((kf + 1.0) * (kf + 2.0));
            hk += 1.0 / (kf + 1.0);
            hk1 += 1.0 / (kf + 2.0);
            if term.abs() * (hk + hk1) < 1e-18 * (sum.abs() + 1.0) {
                break;
            }
        }
        1.0 / z + lnz2 * i1 - 0.25 * z * sum
    }
}

/// K_n for larger z from the real integral
/// K_n(z) = sqrt(pi/2z) e^{-z} / Gamma(n+1/2) * int_0^inf e^{-u} u^{n-1/2} (1+u/2z)^{n-1/2} du,
/// with u = v^2 to remove the endpoint singularity.
fn k_large_integral(n: usize, z: f64) -> Result<f64> {
    let spec = QuadratureSpec {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_subdivisions: 400,
    };
    // e^{-v^2} < 1e-19 beyond v = 6.6; the integrand is smooth there anyway.
    let integral = if n == 0 {
        integrate(|v: f64| 2.0 * (-v * v).exp() / (1.0 + v * v / (2.0 * z)).sqrt(), 0.0, 6.6, spec)?
    } else {
        integrate(
            |v: f64| 2.0 * (-v * v).exp() * v * v * (1.0 + v * v / (2.0 * z)).sqrt(),
            0.0,
            6.6,
            spec,
        )?
    };
    let gamma_half = if n == 0 { PI.sqrt() } else { PI.sqrt() / 2.0 };
    Ok((PI / (2.0 * z)).sqrt() * (-z).exp() / gamma_half * integral.value)
}
