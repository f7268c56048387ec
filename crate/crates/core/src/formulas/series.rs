//! Exact value of the n-message computational-basis attack, evaluated as an
//! infinite series over the counts (q₁, …, q_{n−1}) of the competing blocks:
//!
//! Σ multinomial(q₁+…+q_{n−1}+r; q₁,…,q_{n−1},r) · n^{−(Σq + r + 1)},
//! each qᵢ ranging over r, r+1, ….
//!
//! Naive enumeration of (n−1)-tuples is exponential, so the sum is
//! reorganized by total weight S = Σqᵢ. The inner multinomial mass of a
//! shell is built by iterative convolution of per-index truncated
//! sequences, in log space:
//!
//!   M_j(S) = n^{−S} · Σ_{q₁+…+q_j = S, qᵢ ≥ r} S!/(q₁!…q_j!)
//!          = Σ_{q=r}^{S−(j−1)r} C(S,q) n^{−q} M_{j−1}(S−q),
//!
//! and the shell term is C(S+r, r) · M_{n−1}(S) · n^{−(r+1)}. Successive
//! shells shrink geometrically with ratio below (n−1)/n · (1 + r/S) once the
//! occupancy factor p_S = M_{n−1}(S)·(n/(n−1))^S is close to 1, which gives
//! the truncation criterion.

use super::special::ln_binomial;
use crate::error::{Error, Result};

const SHELL_HARD_CAP: usize = 100_000;

fn log_sum_exp(terms: &[f64]) -> f64 {
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
}

struct ShellMasses {
    r: usize,
    n: usize,
    /// log_m[j][S] = ln M_j(S); row j valid for S ≤ built_up_to.
    log_m: Vec<Vec<f64>>,
    built_up_to: usize,
}

impl ShellMasses {
    fn new(r: usize, n: usize) -> Self {
        let parts = n - 1;
        Self {
            r,
            n,
            log_m: vec![Vec::new(); parts + 1],
            built_up_to: 0,
        }
    }

    fn extend_to(&mut self, s_max: usize) {
        let ln_n = (self.n as f64).ln();
        let r = self.r;
        let start = self.log_m[1].len();
        for s in start..=s_max {
            let v = if s >= r { -(s as f64) * ln_n } else { f64::NEG_INFINITY };
            self.log_m[1].push(v);
        }
        let parts = self.log_m.len() - 1;
        for j in 2..=parts {
            let start = self.log_m[j].len();
            let mut buf = Vec::new();
            for s in start..=s_max {
                let v = if s >= j * r {
                    buf.clear();
                    for q in r..=(s - (j - 1) * r) {
                        buf.push(
                            ln_binomial(s as u64, q as u64) - (q as f64) * ln_n
                                + self.log_m[j - 1][s - q],
                        );
                    }
                    log_sum_exp(&buf)
                } else {
                    f64::NEG_INFINITY
                };
                self.log_m[j].push(v);
            }
        }
        self.built_up_to = s_max;
    }

    fn ln_mass(&self, s: usize) -> f64 {
        *self.log_m.last().unwrap().get(s).unwrap()
    }
}

/// Winning probability of the n-message basis-measurement attack, evaluated
/// to absolute truncation error ≤ `tol`. The result lies in (1/n, 1).
pub fn multimessage_series_value(r: usize, n: usize, tol: f64) -> Result<f64> {
    if r < 1 {
        return Err(Error::InvalidParameter("rank r must be ≥ 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("message count n must be ≥ 2".into()));
    }
    if tol.is_nan() || tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let parts = n - 1;
    let ln_n = (n as f64).ln();
    let mut masses = ShellMasses::new(r, n);
    let mut s = parts * r;
    masses.extend_to(s + 64);

    let mut total = 0.0f64;
    loop {
        if s > masses.built_up_to {
            masses.extend_to(s + 64);
        }
        let ln_mass = masses.ln_mass(s);
        let ln_term = ln_binomial((s + r) as u64, r as u64) + ln_mass - (r as f64 + 1.0) * ln_n;
        let term = ln_term.exp();
        total += term;

        // occupancy factor p_S = M(S)·(n/(n−1))^S ∈ (0, 1], increasing in S
        let p_s = (ln_mass - (s as f64) * ((parts as f64).ln() - ln_n)).exp();
        let rho = (parts as f64 / n as f64) * (1.0 + r as f64 / (s as f64 + 1.0));
        if rho < 1.0 && p_s > 0.0 {
            let tail_bound = term * (rho / (1.0 - rho)) / p_s;
            if tail_bound <= 0.5 * tol {
                return Ok(total);
            }
        }
        s += 1;
        if s > SHELL_HARD_CAP {
            return Err(Error::Capacity(format!(
                "series did not converge to tol {tol} within {SHELL_HARD_CAP} shells"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::special::ln_gamma;
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: the same value as the Gamma-competition integral
    /// ∫₀^∞ P(r, t)^{n−1} · t^r e^{−t}/r! dt with P the regularized lower
    /// incomplete gamma, computed by composite Simpson quadrature. For
    /// integer r, P(r, t) = 1 − e^{−t} Σ_{j<r} t^j/j! exactly.
    fn quadrature_oracle(r: usize, n: usize) -> f64 {
        let reg_gamma_cdf = |t: f64| -> f64 {
            let mut partial = 0.0;
            let mut ln_term = 0.0; // ln(t^0/0!)
            for j in 0..r {
                if j > 0 {
                    ln_term += t.ln() - (j as f64).ln();
                }
                partial += (ln_term - t).exp();
            }
            1.0 - partial
        };
        let ln_rfact = ln_gamma(r as f64 + 1.0);
        let integrand = |t: f64| -> f64 {
            if t <= 0.0 {
                return 0.0;
            }
            let ln_density = (r as f64) * t.ln() - t - ln_rfact;
            reg_gamma_cdf(t).powi(n as i32 - 1) * ln_density.exp()
        };
        let upper = r as f64 + 60.0 + 12.0 * (r as f64).sqrt();
        let steps = 200_000usize;
        let h = upper / steps as f64;
        let mut acc = integrand(0.0) + integrand(upper);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn reduces_to_bit_value_at_two_messages() {
        for r in [1usize, 2, 5, 16, 32] {
            let series = multimessage_series_value(r, 2, 1e-10).unwrap();
            let exact = super::super::bit_exact_value(r).unwrap().float;
            assert_abs_diff_eq!(series, exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn small_cases_match_quadrature_oracle() {
        for &(r, n) in &[(1usize, 3usize), (2, 3), (2, 4), (4, 3), (3, 4)] {
            let series = multimessage_series_value(r, n, 1e-10).unwrap();
            let oracle = quadrature_oracle(r, n);
            assert_abs_diff_eq!(series, oracle, epsilon = 5e-8);
        }
        // frozen spot values
        assert_abs_diff_eq!(
            multimessage_series_value(1, 3, 1e-10).unwrap(),
            0.611_111_111_111_111,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            multimessage_series_value(2, 3, 1e-10).unwrap(),
            0.5354938271604938,
            epsilon = 1e-9
        );
    }

    #[test]
    fn strictly_decreasing_in_message_count() {
        let r = 2;
        let v2 = multimessage_series_value(r, 2, 1e-10).unwrap();
        let v3 = multimessage_series_value(r, 3, 1e-10).unwrap();
        let v4 = multimessage_series_value(r, 4, 1e-10).unwrap();
        assert!(v2 > v3 && v3 > v4, "{v2} > {v3} > {v4} violated");
    }

    #[test]
    fn value_in_open_interval() {
        for &(r, n) in &[(1usize, 2usize), (2, 3), (8, 4)] {
            let v = multimessage_series_value(r, n, 1e-9).unwrap();
            assert!(v > 1.0 / n as f64 && v < 1.0);
        }
    }

    #[test]
    fn halving_tolerance_moves_result_within_previous_tolerance() {
        let mut tol = 1e-4;
        let mut prev = multimessage_series_value(3, 3, tol).unwrap();
        for _ in 0..6 {
            tol /= 2.0;
            let next = multimessage_series_value(3, 3, tol).unwrap();
            assert!(
                (next - prev).abs() <= 2.0 * tol,
                "tol {tol}: jump {} exceeds {}",
                (next - prev).abs(),
                2.0 * tol
            );
            prev = next;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(multimessage_series_value(0, 3, 1e-8).is_err());
        assert!(multimessage_series_value(2, 1, 1e-8).is_err());
        assert!(multimessage_series_value(2, 3, 0.0).is_err());
        assert!(multimessage_series_value(2, 3, -1e-3).is_err());
    }
}
