//! Finite decision rule for `T -> infinity` limits sampled on a geometric
//! schedule.

use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    ConvergesToZero,
    ConvergesTo,
    Diverges,
    Undecided,
}

impl LimitKind {
    pub fn is_convergent(self) -> bool {
        matches!(self, LimitKind::ConvergesToZero | LimitKind::ConvergesTo)
    }
}

/// Thresholds shared by every limit decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictRule {
    pub window: usize,
    pub spread_tol: f64,
    pub zero_threshold: f64,
    /// Monotone growth past this value counts as divergence.
    pub divergence_bound: f64,
    /// Fitted decay exponent required for convergence to zero.
    pub min_decay: f64,
    /// Fitted growth exponent that also counts as divergence.
    pub min_growth: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule {
            window: 5,
            spread_tol: 1e-3,
            zero_threshold: 1e-3,
            divergence_bound: 1e6,
            min_decay: 0.0,
            min_growth: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitVerdict {
    pub kind: LimitKind,
    /// Estimated limit; present for convergence kinds.
    pub limit: Option<Vec<Complex64>>,
    /// Norm of the last sampled value.
    pub final_magnitude: f64,
    /// Largest pairwise relative spread over the final window.
    pub window_spread: f64,
    /// `p` in `R ~ C T^{-p}`, fitted on the running tail supremum.
    pub decay_exponent: f64,
    /// Slope of `ln |R|` against `ln T` over the fitted tail.
    pub growth_exponent: f64,
    /// Whether the limit came from Aitken extrapolation.
    pub extrapolated: bool,
}

impl LimitVerdict {
    pub fn undecided() -> Self {
        LimitVerdict {
            kind: LimitKind::Undecided,
            limit: None,
            final_magnitude: f64::NAN,
            window_spread: f64::NAN,
            decay_exponent: f64::NAN,
            growth_exponent: f64::NAN,
            extrapolated: false,
        }
    }

    pub fn is_convergent(&self) -> bool {
        self.kind.is_convergent()
    }

    /// Real part of the first coordinate of the limit.
    pub fn scalar(&self) -> Option<f64> {
        self.limit.as_ref().and_then(|v| v.first()).map(|z| z.re)
    }

    pub fn limit_norm(&self) -> Option<f64> {
        self.limit.as_ref().map(|v| norm(v))
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Least-squares `(slope, intercept)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let s = sxy / sxx;
    (s, my - s * mx)
}

fn rel_spread(window: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..window.len() {
        for j in i + 1..window.len() {
            let d: Vec<Complex64> = window[i].iter().zip(&window[j]).map(|(a, b)| a - b).collect();
            let scale = norm(&window[i]).max(norm(&window[j]));
            let r = if scale == 0.0 { 0.0 } else { norm(&d) / scale };
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
        }
    }
    worst
}

fn aitken(a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&x0, &x1), &x2)| {
            let d1 = x2 - x1;
            let d0 = x1 - x0;
            let den = d1 - d0;
            if den.norm() == 0.0 {
                x2
            } else {
                let v = x2 - d1 * d1 / den;
                if v.is_finite() {
                    v
                } else {
                    x2
                }
            }
        })
        .collect()
}

/// Core rule on `ln |R_j|` plus the values themselves when representable.
fn classify(ts: &[f64], ln_mags: &[f64], values: Option<&[Vec<Complex64>]>, rule: &VerdictRule) -> LimitVerdict {
    let n = ts.len();
    let w = rule.window.max(3);
    if n < w || ln_mags.len() != n {
        return LimitVerdict::undecided();
    }
    let fit_len = w.max(n.div_ceil(2));
    let fit = n - fit_len..n;
    let ln_t: Vec<f64> = ts[fit.clone()].iter().map(|t| t.ln()).collect();

    // Running tail supremum in the log domain.
    let mut tail_sup = vec![f64::NEG_INFINITY; n];
    let mut acc = f64::NEG_INFINITY;
    for j in (0..n).rev() {
        acc = acc.max(ln_mags[j]);
        tail_sup[j] = acc;
    }
    // Envelope fit `ln E ~ c - p ln T`, read off at the last sample.
    let (decay, envelope_last) = if tail_sup[n - 1] == f64::NEG_INFINITY {
        (f64::INFINITY, f64::NEG_INFINITY)
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit
            .clone()
            .zip(&ln_t)
            .filter(|(j, _)| tail_sup[*j].is_finite())
            .map(|(j, x)| (*x, tail_sup[j]))
            .unzip();
        let (s, c) = line_fit(&xs, &ys);
        (-s, c + s * ts[n - 1].ln())
    };
    let growth = {
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit
            .clone()
            .zip(&ln_t)
            .filter(|(j, _)| ln_mags[*j].is_finite())
            .map(|(j, x)| (*x, ln_mags[j]))
            .unzip();
        line_fit(&xs, &ys).0
    };

    let last = &ln_mags[n - w..];
    let mut verdict = LimitVerdict {
        kind: LimitKind::Undecided,
        limit: None,
        final_magnitude: ln_mags[n - 1].exp(),
        window_spread: f64::INFINITY,
        decay_exponent: decay,
        growth_exponent: growth,
        extrapolated: false,
    };
    if let Some(values) = values {
        verdict.window_spread = rel_spread(&values[n - w..]);
    }

    // The final value and the fitted envelope must both be small, so a
    // zero crossing of an oscillating curve does not count.
    let small = ln_mags[n - 1].max(envelope_last);
    if small <= rule.zero_threshold.ln() && decay > rule.min_decay {
        verdict.kind = LimitKind::ConvergesToZero;
        verdict.limit = Some(match values {
            Some(v) => v[n - 1].clone(),
            None => vec![Complex64::new(0.0, 0.0)],
        });
        return verdict;
    }

    if let Some(values) = values {
        // Successive differences must contract for extrapolation to apply.
        let diffs: Vec<f64> = (n - w..n - 1)
            .map(|j| {
                let d: Vec<Complex64> = values[j + 1].iter().zip(&values[j]).map(|(a, b)| a - b).collect();
                norm(&d)
            })
            .collect();
        let contracting = n >= w + 2 && diffs.windows(2).all(|p| p[1] < p[0]);
        let extrapolated: Option<Vec<Vec<Complex64>>> = contracting.then(|| {
            (n - w..n)
                .map(|j| aitken(&values[j - 2], &values[j - 1], &values[j]))
                .collect()
        });
        if verdict.window_spread <= rule.spread_tol {
            verdict.kind = LimitKind::ConvergesTo;
            match &extrapolated {
                Some(ext) if rel_spread(ext) <= rule.spread_tol => {
                    verdict.limit = Some(ext[w - 1].clone());
                    verdict.extrapolated = true;
                }
                _ => verdict.limit = Some(values[n - 1].clone()),
            }
            return verdict;
        }
        if let Some(ext) = &extrapolated {
            if rel_spread(ext) <= rule.spread_tol {
                verdict.kind = LimitKind::ConvergesTo;
                verdict.limit = Some(ext[w - 1].clone());
                verdict.extrapolated = true;
                return verdict;
            }
        }
    }

    let increasing = last.windows(2).all(|p| p[1] > p[0]);
    // Power growth keeps its log increments on a geometric schedule, while
    // a sequence creeping up to a limit sees them shrink geometrically.
    let sustained = last[w - 1] - last[w - 2] >= 0.5 * (last[1] - last[0]);
    if increasing && (ln_mags[n - 1] > rule.divergence_bound.ln() || (growth >= rule.min_growth && sustained)) {
        verdict.kind = LimitKind::Diverges;
    }
    verdict
}

/// Decide the limit of a vector-valued sequence `values[j]` sampled at `ts[j]`.
pub fn decide(ts: &[f64], values: &[Vec<Complex64>], rule: &VerdictRule) -> LimitVerdict {
    let ln_mags: Vec<f64> = values.iter().map(|v| norm(v).ln()).collect();
    classify(ts, &ln_mags, Some(values), rule)
}

/// Decide the limit of a real sequence.
pub fn decide_real(ts: &[f64], values: &[f64], rule: &VerdictRule) -> LimitVerdict {
    let v: Vec<Vec<Complex64>> = values.iter().map(|&x| vec![Complex64::new(x, 0.0)]).collect();
    decide(ts, &v, rule)
}

/// Decide the limit of a positive sequence given by its logarithms; values
/// outside the `f64` range still get zero and divergence verdicts.
pub fn decide_ln(ts: &[f64], ln_values: &[f64], rule: &VerdictRule) -> LimitVerdict {
    let representable = ln_values.iter().all(|l| l.is_finite() && l.abs() < 700.0);
    if representable {
        let v: Vec<Vec<Complex64>> = ln_values.iter().map(|&l| vec![Complex64::new(l.exp(), 0.0)]).collect();
        return classify(ts, ln_values, Some(&v), rule);
    }
    let w = rule.window.max(3);
    let tail_ok = ln_values.len() >= w && ln_values[ln_values.len() - w..].iter().all(|l| l.abs() < 700.0);
    if tail_ok {
        // Early huge or tiny values do not block a spread test on the window.
        let v: Vec<Vec<Complex64>> = ln_values
            .iter()
            .map(|&l| vec![Complex64::new(l.clamp(-700.0, 700.0).exp(), 0.0)])
            .collect();
        return classify(ts, ln_values, Some(&v), rule);
    }
    classify(ts, ln_values, None, rule)
}
