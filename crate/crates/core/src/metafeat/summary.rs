//! The 63 statistical summary functions that turn a variable-length
//! distribution into a fixed-length vector.
//!
//! Every function is order-free: the input is sorted once up front and all
//! reductions run over the sorted values, so permuting the input cannot change
//! a single bit of the output.

/// Number of summary functions.
pub const N_SUMMARIES: usize = 63;

const IQR_ALPHAS: [f64; 2] = [1.5, 3.0];
const STD_ALPHAS: [f64; 3] = [1.0, 2.0, 3.0];
/// (lower, upper) side selectors for outlier counts.
const SIDES: [(bool, bool, &str); 3] = [(true, false, "lb"), (false, true, "ub"), (true, true, "both")];

/// Canonical names of the 63 functions, in output order.
pub fn summary_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "min",
        "max",
        "median",
        "geometric_mean",
        "harmonic_mean",
        "mean",
        "stdev",
        "variance",
        "skewness",
        "pearson_kurtosis",
        "pearson_kurtosis_unbiased",
        "fisher_kurtosis",
        "fisher_kurtosis_unbiased",
        "quartile_dispersion",
        "median_abs_deviation",
        "avg_abs_deviation",
        "coeff_variation",
        "efficiency_ratio",
        "variance_to_mean",
        "snr",
        "entropy",
        "norm_entropy",
        "gini",
        "q1",
        "q3",
        "iqr",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for a in IQR_ALPHAS {
        names.push(format!("outlier_lb_{a}"));
    }
    for a in IQR_ALPHAS {
        names.push(format!("outlier_ub_{a}"));
    }
    for kind in ["count", "frac"] {
        for a in IQR_ALPHAS {
            for (_, _, side) in SIDES {
                names.push(format!("iqr_outlier_{kind}_{a}_{side}"));
            }
        }
    }
    for kind in ["count", "frac"] {
        for a in STD_ALPHAS {
            for (_, _, side) in SIDES {
                names.push(format!("std_outlier_{kind}_{a}_{side}"));
            }
        }
    }
    names.extend(["mode", "mode_count", "mode_frac"].map(String::from));
    debug_assert_eq!(names.len(), N_SUMMARIES);
    names
}

/// Summary of one distribution plus the number of entries that came out
/// non-finite and were replaced by zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub values: [f64; N_SUMMARIES],
    pub replaced: usize,
}

/// Linear interpolation between order statistics of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sum(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, |acc, v| acc + v)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Rounds to 8 significant digits.
pub(crate) fn round_sig8(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.7e}").parse().unwrap_or(v)
}

/// Applies the 63 summary functions. An empty input summarizes to all zeros.
pub fn summarize(values: &[f64]) -> Summary {
    let mut out = [0.0; N_SUMMARIES];
    if values.is_empty() {
        return Summary {
            values: out,
            replaced: 0,
        };
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let nf = n as f64;

    let min = x[0];
    let max = x[n - 1];
    let median = quantile_sorted(&x, 0.5);
    let mean = sum(x.iter().copied()) / nf;
    let constant = min == max;

    let (m2, m3, m4) = if constant {
        (0.0, 0.0, 0.0)
    } else {
        let c = |p: i32| sum(x.iter().map(|v| (v - mean).powi(p))) / nf;
        (c(2), c(3), c(4))
    };
    let variance = m2;
    let stdev = m2.sqrt();

    let shift = if min <= 0.0 { 1.0 - min } else { 0.0 };
    let geometric_mean = (sum(x.iter().map(|v| (v + shift).ln())) / nf).exp() - shift;
    let harmonic_mean = nf / sum(x.iter().map(|v| 1.0 / (v + shift))) - shift;

    let (skewness, kurt_biased, kurt_unbiased) = if m2 == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        let g1 = m3 / m2.powf(1.5);
        let g2 = m4 / (m2 * m2) - 3.0;
        let big_g2 = if n > 3 {
            ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0))
        } else {
            g2
        };
        (g1, g2, big_g2)
    };
    let (pearson_biased, pearson_unbiased) = if m2 == 0.0 {
        (0.0, 0.0)
    } else {
        (kurt_biased + 3.0, kurt_unbiased + 3.0)
    };

    let q1 = quantile_sorted(&x, 0.25);
    let q3 = quantile_sorted(&x, 0.75);
    let iqr = q3 - q1;

    let mut abs_dev: Vec<f64> = x.iter().map(|v| (v - median).abs()).collect();
    abs_dev.sort_by(f64::total_cmp);
    let mad = quantile_sorted(&abs_dev, 0.5);
    let aad = sum(x.iter().map(|v| (v - mean).abs())) / nf;

    let (entropy, norm_entropy) = {
        let lo = if min < 0.0 { min } else { 0.0 };
        let total = sum(x.iter().map(|v| v - lo));
        let h = if total == 0.0 {
            0.0
        } else {
            -sum(x.iter().map(|v| {
                let p = (v - lo) / total;
                if p > 0.0 {
                    p * p.log2()
                } else {
                    0.0
                }
            }))
        };
        let norm = if n == 1 { 1.0 } else { h / nf.log2() };
        (h, norm)
    };

    let gini = {
        let num = sum(x.iter().enumerate().map(|(i, v)| (2.0 * (i + 1) as f64 - nf - 1.0) * v));
        ratio(num, nf * sum(x.iter().copied()))
    };

    let mut k = 0;
    let mut push = |v: f64| {
        out[k] = v;
        k += 1;
    };
    push(min);
    push(max);
    push(median);
    push(geometric_mean);
    push(harmonic_mean);
    push(mean);
    push(stdev);
    push(variance);
    push(skewness);
    push(pearson_biased);
    push(pearson_unbiased);
    push(kurt_biased);
    push(kurt_unbiased);
    push(ratio(q3 - q1, q3 + q1));
    push(mad);
    push(aad);
    push(ratio(stdev, mean));
    push(ratio(variance, mean * mean));
    push(ratio(variance, mean));
    push(ratio(mean * mean, variance));
    push(entropy);
    push(norm_entropy);
    push(gini);
    push(q1);
    push(q3);
    push(iqr);

    // Values within a relative 1e-9 of a bound count as on it. Two-level data
    // with equal counts puts mean ± σ exactly on the levels, and rounding in
    // upstream sums would otherwise decide the count.
    let slack = 1e-9 * min.abs().max(max.abs());
    let count_outside = |lb: f64, ub: f64| {
        let below = x.iter().filter(|&&v| v < lb - slack).count() as f64;
        let above = x.iter().filter(|&&v| v > ub + slack).count() as f64;
        (below, above)
    };
    let iqr_bounds: Vec<(f64, f64)> = IQR_ALPHAS.iter().map(|a| (q1 - a * iqr, q3 + a * iqr)).collect();
    for &(lb, _) in &iqr_bounds {
        push(lb);
    }
    for &(_, ub) in &iqr_bounds {
        push(ub);
    }
    let iqr_counts: Vec<(f64, f64)> = iqr_bounds.iter().map(|&(lb, ub)| count_outside(lb, ub)).collect();
    let std_counts: Vec<(f64, f64)> = STD_ALPHAS
        .iter()
        .map(|a| count_outside(mean - a * stdev, mean + a * stdev))
        .collect();
    for counts in [&iqr_counts, &std_counts] {
        for divisor in [1.0, nf] {
            for &(below, above) in counts.iter() {
                for (lb, ub, _) in SIDES {
                    let c = if lb { below } else { 0.0 } + if ub { above } else { 0.0 };
                    push(c / divisor);
                }
            }
        }
    }

    let (mode, mode_count) = mode_of_sorted(&x);
    push(mode);
    push(mode_count as f64);
    push(mode_count as f64 / nf);
    debug_assert_eq!(k, N_SUMMARIES);

    let mut replaced = 0;
    for v in out.iter_mut() {
        if !v.is_finite() {
            *v = 0.0;
            replaced += 1;
        }
    }
    Summary {
        values: out,
        replaced,
    }
}

/// Most frequent value after rounding to 8 significant digits; ties go to the
/// smallest value.
fn mode_of_sorted(sorted: &[f64]) -> (f64, usize) {
    let mut rounded: Vec<f64> = sorted.iter().map(|&v| round_sig8(v)).collect();
    rounded.sort_by(f64::total_cmp);
    let mut best = (rounded[0], 0usize);
    let mut i = 0;
    while i < rounded.len() {
        let mut j = i;
        while j < rounded.len() && rounded[j] == rounded[i] {
            j += 1;
        }
        if j - i > best.1 {
            best = (rounded[i], j - i);
        }
        i = j;
    }
    best
}
