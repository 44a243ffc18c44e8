//! The `phi` functions of exponential integrators,
//! `phi_0(z) = e^z`, `phi_{m+1}(z) = (phi_m(z) - 1/m!) / z`.

pub(crate) const MAX_ORDER: usize = 4;

const FACT: [f64; 30] = {
    let mut f = [1.0; 30];
    let mut i = 1;
    while i < 30 {
        f[i] = f[i - 1] * i as f64;
        i += 1;
    }
    f
};

/// `[phi_1(z), ..., phi_4(z)]`.
///
/// Taylor series for `|z| < 1`, where the recurrence would cancel; the
/// recurrence otherwise.
pub(crate) fn phis(z: f64) -> [f64; MAX_ORDER] {
    if libm::fabs(z) < 1.0 {
        taylor(z)
    } else {
        recurrence(z)
    }
}

fn taylor(z: f64) -> [f64; MAX_ORDER] {
    let mut out = [0.0; MAX_ORDER];
    for (m, slot) in out.iter_mut().enumerate() {
        let order = m + 1;
        let mut term = 1.0 / FACT[order];
        let mut acc = term;
        for n in 1..(30 - order) {
            term *= z / (n + order) as f64;
            acc += term;
            if libm::fabs(term) < 1e-18 * libm::fabs(acc) {
                break;
            }
        }
        *slot = acc;
    }
    out
}

fn recurrence(z: f64) -> [f64; MAX_ORDER] {
    let mut out = [0.0; MAX_ORDER];
    let mut prev = libm::exp(z);
    for (m, slot) in out.iter_mut().enumerate() {
        let next = (prev - 1.0 / FACT[m]) / z;
        *slot = next;
        prev = next;
    }
    out
}
