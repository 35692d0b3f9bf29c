//! Estimators and checks: degree-tail exponent with the sandwich bounds,
//! crossing-probability curves and threshold estimation, the Galton–Watson
//! offspring bound, domination-chain comparisons, the exact zero-function
//! inequality and the Yukich degree-law limit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{self, SimBox};
use crate::netmodels::{longrange_params_from, yukich_degree_field, ModelKind, Params};
use crate::percolation::{crossing_indicator, sample_open_graph};
use crate::rng::{self, Stream};

/// Volume of the d-dimensional unit ball, by the two-step recurrence.
pub fn unit_ball_volume(d: u32) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// `gamma - 1 = log_z(alpha) / (d - log_z(alpha))`, the degree-tail exponent.
pub fn gamma_minus_1(params: &Params) -> f64 {
    let la = params.alpha.ln() / (params.z as f64).ln();
    la / (params.d as f64 - la)
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let nf = n as f64;
    let phat = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Least squares fit returning (slope, intercept, slope standard error).
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let xbar = sx / n;
    let ybar = sy / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let se = if points.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

/// Kolmogorov–Smirnov statistic of samples against Uniform(0,1].
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}

/// Fitting method for the degree tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMethod {
    LogLogRegression,
    Hill,
}

/// One tail-exponent estimate.
#[derive(Clone, Debug)]
pub struct TailEstimate {
    pub gamma_minus_1: f64,
    pub stderr: f64,
    pub h_range: (u32, u32),
    pub n_samples: u64,
    pub method: TailMethod,
}

/// Both estimators plus the cross-check flag.
#[derive(Clone, Debug)]
pub struct TailFit {
    pub regression: TailEstimate,
    pub hill: TailEstimate,
    /// Set when the two estimators disagree by more than two joint standard
    /// errors; the fit window is then suspect.
    pub window_flagged: bool,
}

/// Fit the power-law tail exponent of a degree histogram on `h_range`:
/// least-squares slope of log ccdf against log h, with the Hill estimator
/// (continuity-corrected for integer data) as cross-check.
pub fn tail_exponent(hist: &[(u32, u64)], h_range: (u32, u32)) -> Result<TailFit> {
    let (h_min, h_max) = h_range;
    if h_min < 1 || h_max <= h_min {
        return Err(Error::BadInput(format!("bad h_range {h_range:?}")));
    }
    let total: u64 = hist.iter().map(|&(_, c)| c).sum();
    if total < 10_000 {
        return Err(Error::BadInput(format!(
            "need at least 1e4 uncensored samples, got {total}"
        )));
    }
    // ccdf at each distinct h present, walking from the top
    let mut sorted: Vec<(u32, u64)> = hist.to_vec();
    sorted.sort_unstable();
    let mut suffix = 0u64;
    let mut ccdf: Vec<(u32, f64)> = sorted
        .iter()
        .rev()
        .map(|&(h, c)| {
            suffix += c;
            (h, suffix as f64 / total as f64)
        })
        .collect();
    ccdf.reverse();

    let points: Vec<(f64, f64)> = ccdf
        .iter()
        .filter(|&&(h, p)| h >= h_min && h <= h_max && p > 0.0)
        .map(|&(h, p)| ((h as f64).ln(), p.ln()))
        .collect();
    if points.len() < 10 {
        return Err(Error::BadInput(format!(
            "only {} distinct degrees in the fit range; need 10",
            points.len()
        )));
    }
    let (slope, _, se_ols) = linear_fit(&points);
    // ccdf points share tail samples, so OLS residual error understates the
    // slope uncertainty; the binomial variance of the window endpoints is
    // the honest floor
    let var_ln = |p: f64| (1.0 - p) / (p * total as f64);
    let (first, last) = (points[0], points[points.len() - 1]);
    let se_ends =
        ((var_ln(first.1.exp()) + var_ln(last.1.exp())).sqrt()) / (last.0 - first.0);
    let regression = TailEstimate {
        gamma_minus_1: -slope,
        stderr: se_ols.max(se_ends),
        h_range,
        n_samples: total,
        method: TailMethod::LogLogRegression,
    };

    // Hill over all samples >= h_min with the 0.5 continuity shift
    let x0 = h_min as f64 - 0.5;
    let mut k = 0u64;
    let mut logsum = 0.0f64;
    for &(h, c) in &sorted {
        if h >= h_min {
            k += c;
            logsum += c as f64 * ((h as f64 - 0.5) / x0).ln();
        }
    }
    let gm1 = k as f64 / logsum;
    let hill = TailEstimate {
        gamma_minus_1: gm1,
        stderr: gm1 / (k as f64).sqrt(),
        h_range,
        n_samples: k,
        method: TailMethod::Hill,
    };

    let joint = (regression.stderr.powi(2) + hill.stderr.powi(2)).sqrt();
    let window_flagged = (regression.gamma_minus_1 - hill.gamma_minus_1).abs() > 2.0 * joint;
    Ok(TailFit {
        regression,
        hill,
        window_flagged,
    })
}

/// Sandwich check of the degree law at one probe: the limit constants
/// `1/(2 alpha)` and `(d^{d/2+1} w_d / (d - log_z alpha))^{gamma-1}`
/// bracket `ccdf(h) h^{gamma-1}` asymptotically; finite-h checks apply the
/// explicit slack factors.
#[derive(Clone, Debug)]
pub struct SandwichCheck {
    /// `ccdf(h_probe) * h_probe^(gamma-1)`.
    pub value: f64,
    /// Lower limit constant `1/(2 alpha)`.
    pub low: f64,
    /// Upper limit constant.
    pub high: f64,
    pub low_slack: f64,
    pub high_slack: f64,
    /// None when the upper constant is degenerate (alpha -> z^d).
    pub pass: Option<bool>,
}

pub const SANDWICH_DEFAULT_SLACK: (f64, f64) = (0.5, 2.0);

pub fn sandwich_check(
    hist: &[(u32, u64)],
    params: &Params,
    h_probe: u32,
    slack: (f64, f64),
) -> SandwichCheck {
    let total: u64 = hist.iter().map(|&(_, c)| c).sum();
    let above: u64 = hist
        .iter()
        .filter(|&&(h, _)| h >= h_probe)
        .map(|&(_, c)| c)
        .sum();
    let ccdf = above as f64 / total as f64;
    let gm1 = gamma_minus_1(params);
    let value = ccdf * (h_probe as f64).powf(gm1);
    let low = 1.0 / (2.0 * params.alpha);
    let la = params.alpha.ln() / (params.z as f64).ln();
    let gap = params.d as f64 - la;
    if gap < 1e-9 {
        return SandwichCheck {
            value,
            low,
            high: f64::INFINITY,
            low_slack: slack.0,
            high_slack: slack.1,
            pass: None,
        };
    }
    let d = params.d as f64;
    let high = (d.powf(d / 2.0 + 1.0) * unit_ball_volume(params.d) / gap).powf(gm1);
    let pass = value >= low * slack.0 && value <= high * slack.1;
    SandwichCheck {
        value,
        low,
        high,
        low_slack: slack.0,
        high_slack: slack.1,
        pass: Some(pass),
    }
}

/// Monte Carlo estimate of the box-crossing probability with Wilson 95% CI.
#[derive(Clone, Copy, Debug)]
pub struct CrossingEstimate {
    /// Transmission parameter this estimate was taken at.
    pub p: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
    pub l: i64,
}

/// Crossing frequency over `n_reps` independent replicas. Replica seeds
/// depend only on (seed, replica), so estimates at different parameter
/// values share uniforms and are monotone-coupled.
pub fn crossing_probability(
    bbox: SimBox,
    model: &ModelKind,
    params: &Params,
    n_reps: u64,
    seed: u64,
) -> Result<CrossingEstimate> {
    let hits: Result<u64> = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::hash_key(seed, Stream::Sequence, &[rep]);
            let g = sample_open_graph(bbox, model, params, rep_seed)?;
            Ok(u64::from(crossing_indicator(&g)))
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b));
    let hits = hits?;
    let (ci_low, ci_high) = wilson_interval(hits, n_reps);
    Ok(CrossingEstimate {
        p: params.p,
        p_hat: hits as f64 / n_reps as f64,
        ci_low,
        ci_high,
        n: n_reps,
        l: bbox.side(),
    })
}

/// Crossing curve over a grid of p values at fixed box side.
pub fn crossing_curve(
    base: &Params,
    model: &ModelKind,
    p_grid: &[f64],
    l: i64,
    n_reps: u64,
    seed: u64,
) -> Result<Vec<CrossingEstimate>> {
    let bbox = SimBox::new(l, base.d)?;
    p_grid
        .iter()
        .map(|&p| crossing_probability(bbox, model, &base.with_p(p)?, n_reps, seed))
        .collect()
}

#[derive(Clone, Debug)]
pub struct PcPoint {
    pub l: i64,
    pub pc: f64,
    /// Bisection steps whose CI straddled 1/2 (decided by point estimate).
    pub noisy_steps: u32,
}

/// Threshold estimate: per-L bisection of the crossing probability against
/// 1/2, the largest-L value as the headline number, and the cross-L drift.
#[derive(Clone, Debug)]
pub struct PcEstimate {
    pub per_l: Vec<PcPoint>,
    pub estimate: f64,
    /// `pc(L_max) - pc(L_min)`: negative drift toward 0 is the trivial-
    /// threshold signature, stabilization the nontrivial one.
    pub drift: f64,
    /// Significant non-monotonicities among the evaluated points.
    pub conflicts: Vec<String>,
}

pub fn estimate_pc(
    params: &Params,
    model: &ModelKind,
    l_list: &[i64],
    tol: f64,
    n_reps: u64,
    seed: u64,
) -> Result<PcEstimate> {
    if l_list.len() < 2 {
        return Err(Error::BadInput("estimate_pc needs at least two L values".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive".to_string()));
    }
    let mut per_l = Vec::new();
    let mut conflicts = Vec::new();
    for &l in l_list {
        let bbox = SimBox::new(l, params.d)?;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut noisy = 0u32;
        let mut evaluated: Vec<CrossingEstimate> = Vec::new();
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let est = crossing_probability(bbox, model, &params.with_p(mid)?, n_reps, seed)?;
            if est.ci_low > 0.5 {
                hi = mid;
            } else if est.ci_high < 0.5 {
                lo = mid;
            } else {
                noisy += 1;
                if est.p_hat >= 0.5 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            evaluated.push(est);
        }
        evaluated.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
        for w in evaluated.windows(2) {
            if w[0].ci_low > w[1].ci_high {
                conflicts.push(format!(
                    "L={l}: crossing estimate decreases significantly from p={:.4} ({:.3}) to p={:.4} ({:.3})",
                    w[0].p, w[0].p_hat, w[1].p, w[1].p_hat
                ));
            }
        }
        per_l.push(PcPoint {
            l,
            pc: 0.5 * (lo + hi),
            noisy_steps: noisy,
        });
    }
    let estimate = per_l.iter().max_by_key(|p| p.l).unwrap().pc;
    let min_l = per_l.iter().min_by_key(|p| p.l).unwrap().pc;
    Ok(PcEstimate {
        estimate,
        drift: estimate - min_l,
        per_l,
        conflicts,
    })
}

/// Galton–Watson offspring bound for the dominating long-range model:
/// `2 d p + beta' sum_u d(u,0)^-s`, with the lattice sum truncated at a
/// radius and the remainder covered by an analytic majorant.
#[derive(Clone, Debug)]
pub struct GwBound {
    pub mean_offspring: f64,
    pub truncation_level: u32,
    /// The majorant part included in `mean_offspring`.
    pub tail_bound: f64,
    pub s: f64,
    pub beta_prime: f64,
}

/// Exact lattice sum `sum_{0 < |u| <= R} |u|^-s` plus a tail majorant for
/// everything beyond: linf shells of size `(2m+1)^d - (2m-1)^d` at
/// distance at least m, summed to convergence with an integral remainder.
pub fn lattice_zeta(d: u32, s: f64, radius: u32) -> (f64, f64) {
    assert!(s > d as f64, "lattice sum needs s > d");
    let r = radius as i64;
    let r2 = (radius as u128) * (radius as u128);
    let dd = d as usize;
    let mut exact = 0.0f64;
    let mut comp = 0.0f64;
    let mut u = vec![-r; dd];
    'outer: loop {
        let n2: u128 = u.iter().map(|&x| (x * x) as u128).sum();
        if n2 > 0 && n2 <= r2 {
            let term = (n2 as f64).powf(-s / 2.0);
            let y = term - comp;
            let t = exact + y;
            comp = (t - exact) - y;
            exact = t;
        }
        let mut j = dd;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            u[j] += 1;
            if u[j] <= r {
                continue 'outer;
            }
            u[j] = -r;
        }
    }
    // every |u| > R has linf norm at least ceil(R/sqrt(d))
    let m0 = ((radius as f64) / (d as f64).sqrt()).floor() as u64 + 1;
    let mut tail = 0.0f64;
    let mut m = m0;
    loop {
        let shell = (2 * m + 1).pow(d) - (2 * m - 1).pow(d);
        let term = shell as f64 * (m as f64).powf(-s);
        tail += term;
        m += 1;
        if term < 1e-12 * tail.max(1e-300) || m > m0 + 5_000_000 {
            // integral remainder: shells bounded by 2d (3m)^(d-1)
            let c = 2.0 * d as f64 * 3f64.powi(d as i32 - 1);
            tail += c * (m as f64).powf(d as f64 - s) / (s - d as f64);
            break;
        }
    }
    (exact, tail)
}

pub fn gw_bound(params: &Params, truncation: u32) -> Result<GwBound> {
    let (s, beta_prime) = longrange_params_from(params)?;
    if s <= params.d as f64 {
        return Err(Error::Degenerate(format!(
            "s = log_z(alpha/rho) = {s:.4} <= d = {}; the offspring sum diverges \
             (the bound needs rho < alpha/z^d)",
            params.d
        )));
    }
    let (exact, tail) = lattice_zeta(params.d, s, truncation);
    Ok(GwBound {
        mean_offspring: 2.0 * params.d as f64 * params.p + beta_prime * (exact + tail),
        truncation_level: truncation,
        tail_bound: beta_prime * tail,
        s,
        beta_prime,
    })
}

/// The p solving `mean_offspring(p) = 1`: below it the dominating
/// Galton–Watson process is subcritical, certifying no percolation.
pub fn gw_critical_p(params: &Params, truncation: u32) -> Result<f64> {
    // mean_offspring is linear in p
    let at_one = gw_bound(&params.with_p(1.0)?, truncation)?;
    Ok(1.0 / at_one.mean_offspring)
}

/// Monte Carlo domination-chain report: crossing probabilities of the four
/// comparison models on one box, in domination order.
#[derive(Clone, Debug)]
pub struct DominationReport {
    pub estimates: Vec<(ModelKind, CrossingEstimate)>,
    /// No significant inversion along the chain.
    pub ordered: bool,
    pub violations: Vec<String>,
}

pub fn domination_check(
    params: &Params,
    l: i64,
    n_reps: u64,
    seed: u64,
) -> Result<DominationReport> {
    let bbox = SimBox::new(l, params.d)?;
    let (s, beta_prime) = longrange_params_from(params)?;
    let chain = [
        ModelKind::Nested,
        ModelKind::DistanceGated,
        ModelKind::DirectedPair {
            beta: params.alpha.sqrt(),
        },
        ModelKind::LongRange { beta: beta_prime, s },
    ];
    let mut estimates = Vec::new();
    for model in chain {
        let est = crossing_probability(bbox, &model, params, n_reps, seed)?;
        estimates.push((model, est));
    }
    let mut violations = Vec::new();
    for w in estimates.windows(2) {
        let (ma, ea) = &w[0];
        let (mb, eb) = &w[1];
        if ea.ci_low > eb.ci_high {
            violations.push(format!(
                "{} ({:.4}) significantly exceeds {} ({:.4})",
                ma, ea.p_hat, mb, eb.p_hat
            ));
        }
    }
    Ok(DominationReport {
        ordered: violations.is_empty(),
        estimates,
        violations,
    })
}

/// Exact zero-function comparison between consecutive interpolating
/// measures (shared pivot mark versus independent per-direction marks with
/// `beta^2 = alpha`).
#[derive(Clone, Copy, Debug)]
pub struct ZeroFunctionCheck {
    pub z1: f64,
    pub z2: f64,
    pub pass: bool,
}

/// Entry of one edge, identified by its endpoint distance from the pivot.
#[derive(Clone, Copy, Debug)]
struct ZeroEntry {
    dist: f64,
    alpha_u: f64,
    beta_u: f64,
    q: f64,
}

fn zero_entry(dist: f64, params: &Params, beta: f64) -> Result<ZeroEntry> {
    if !(dist > 0.0) {
        return Err(Error::BadInput("distances must be positive".into()));
    }
    let lnz = (params.z as f64).ln();
    let expo = (dist / params.delta).ln() / lnz;
    let expo = expo.max(0.0);
    let k1 = lattice::distance_level_from_dist2(dist * dist, params.z, params.delta_sq());
    if params.rho >= 1.0 {
        return Err(Error::invalid("rho", "zero functions need rho < 1".to_string()));
    }
    let q = (params.p / (1.0 - params.rho) * params.rho.powi(k1 as i32)).min(1.0);
    Ok(ZeroEntry {
        dist,
        alpha_u: params.alpha.powf(-expo),
        beta_u: beta.powf(-expo),
        q,
    })
}

/// `P(Z_S)` under the shared-mark measure: telescoping over the pivot
/// height thresholds, entries sorted by ascending distance.
fn zero_shared(entries: &[ZeroEntry]) -> f64 {
    if entries.is_empty() {
        return 1.0;
    }
    let mut total = 1.0 - entries[0].alpha_u;
    let mut prod = 1.0f64;
    for j in 0..entries.len() {
        prod *= 1.0 - entries[j].q;
        let next_alpha = if j + 1 < entries.len() {
            entries[j + 1].alpha_u
        } else {
            0.0
        };
        total += (entries[j].alpha_u - next_alpha) * prod;
    }
    // the last telescoping term above used alpha_last * prod_all
    total
}

/// `P(Z_S)` under the independent-marks measure.
fn zero_independent(entries: &[ZeroEntry]) -> f64 {
    entries.iter().map(|e| 1.0 - e.beta_u * e.q).product()
}

fn merge_sorted(a: &[ZeroEntry], b: &[ZeroEntry]) -> Vec<ZeroEntry> {
    let mut all: Vec<ZeroEntry> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.dist.partial_cmp(&y.dist).unwrap());
    all
}

fn zero_functions_with_beta(
    dists_a: &[f64],
    dists_b: &[f64],
    params: &Params,
    beta: f64,
) -> Result<ZeroFunctionCheck> {
    let mut a: Vec<ZeroEntry> = dists_a
        .iter()
        .map(|&t| zero_entry(t, params, beta))
        .collect::<Result<_>>()?;
    let mut b: Vec<ZeroEntry> = dists_b
        .iter()
        .map(|&t| zero_entry(t, params, beta))
        .collect::<Result<_>>()?;
    a.sort_by(|x, y| x.dist.partial_cmp(&y.dist).unwrap());
    b.sort_by(|x, y| x.dist.partial_cmp(&y.dist).unwrap());
    let merged = merge_sorted(&a, &b);
    let z1 = zero_shared(&a) + zero_shared(&b) - zero_shared(&merged);
    let z2 = zero_independent(&a) + zero_independent(&b)
        - zero_independent(&a) * zero_independent(&b);
    Ok(ZeroFunctionCheck {
        z1,
        z2,
        pass: z1 >= z2 - 1e-12,
    })
}

/// Compare the two zero functions at the balanced `beta = sqrt(alpha)`.
/// Edge sets are given by their endpoint distances from the pivot; the
/// inequality `z1 >= z2` holds for every disjoint pair of sets.
pub fn zero_function_compare(
    dists_a: &[f64],
    dists_b: &[f64],
    params: &Params,
) -> Result<ZeroFunctionCheck> {
    zero_functions_with_beta(dists_a, dists_b, params, params.alpha.sqrt())
}

/// Same comparison with an arbitrary beta (fault injection in tests: with
/// `beta = alpha` the inequality must break somewhere).
pub fn zero_function_compare_beta(
    dists_a: &[f64],
    dists_b: &[f64],
    params: &Params,
    beta: f64,
) -> Result<ZeroFunctionCheck> {
    zero_functions_with_beta(dists_a, dists_b, params, beta)
}

/// Coordinate-based wrapper that rejects overlapping edge sets.
pub fn zero_function_compare_points(
    pivot: &[i64],
    points_a: &[&[i64]],
    points_b: &[&[i64]],
    params: &Params,
) -> Result<ZeroFunctionCheck> {
    for a in points_a {
        for b in points_b {
            if a == b {
                return Err(Error::BadInput(format!(
                    "edge sets overlap at endpoint {a:?}"
                )));
            }
        }
    }
    let da: Vec<f64> = points_a.iter().map(|p| lattice::euclid_dist(pivot, p)).collect();
    let db: Vec<f64> = points_b.iter().map(|p| lattice::euclid_dist(pivot, p)).collect();
    zero_function_compare(&da, &db, params)
}

/// One probe of the Yukich degree-law limit.
#[derive(Clone, Copy, Debug)]
pub struct YukichPoint {
    pub t: u64,
    /// `t^{1/(sd-1)} ccdf(t)`.
    pub empirical: f64,
    /// `(delta^d s d w_d / (sd-1))^{1/(sd-1)}`.
    pub predicted: f64,
    pub ratio: f64,
}

/// Empirical check of the Yukich tail constant at several probe degrees.
pub fn yukich_limit_check(
    d: u32,
    s: f64,
    delta: f64,
    l: i64,
    t_values: &[u64],
    seed: u64,
) -> Result<Vec<YukichPoint>> {
    if !(s > 1.0 / d as f64) {
        return Err(Error::invalid("s", format!("need s > 1/d, got {s}")));
    }
    let sd1 = s * d as f64 - 1.0;
    if sd1 < 1e-9 {
        return Err(Error::Degenerate(
            "s d - 1 ~ 0: the limit constant diverges".into(),
        ));
    }
    let bbox = SimBox::new(l, d)?;
    let degrees = yukich_degree_field(bbox, s, delta, seed);
    let n = degrees.len() as f64;
    let predicted =
        (delta.powi(d as i32) * s * d as f64 * unit_ball_volume(d) / sd1).powf(1.0 / sd1);
    Ok(t_values
        .iter()
        .map(|&t| {
            let ccdf = degrees.iter().filter(|&&x| x as u64 >= t).count() as f64 / n;
            let empirical = (t as f64).powf(1.0 / sd1) * ccdf;
            YukichPoint {
                t,
                empirical,
                predicted,
                ratio: empirical / predicted,
            }
        })
        .collect())
}

/// Phase-plane classification of one (alpha, rho) cell at fixed p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseClass {
    /// p lies below the certified Galton–Watson root.
    CertifiedSubcritical,
    /// Crossing probability at the largest box significantly exceeds 1/2.
    Percolating,
    /// Neither certificate applies (includes the rho = alpha/z^d line,
    /// which neither certificate covers).
    Unclassified,
}

/// Classify one cell: certified-subcritical via the GW root when the
/// hypothesis `rho < alpha/z^d` holds, percolating when the crossing CI
/// clears 1/2 at the largest L, unclassified otherwise.
pub fn classify_cell(
    params: &Params,
    l_list: &[i64],
    n_reps: u64,
    gw_truncation: u32,
    seed: u64,
) -> Result<(PhaseClass, Option<f64>, Vec<CrossingEstimate>)> {
    let mut root = None;
    if params.rho > 0.0 && params.rho < 1.0 {
        if let Ok(p_star) = gw_critical_p(params, gw_truncation) {
            root = Some(p_star);
            if params.p < p_star {
                return Ok((PhaseClass::CertifiedSubcritical, root, Vec::new()));
            }
        }
    }
    let mut ests = Vec::new();
    for &l in l_list {
        let bbox = SimBox::new(l, params.d)?;
        ests.push(crossing_probability(bbox, &ModelKind::Nested, params, n_reps, seed)?);
    }
    let last = ests.last().unwrap();
    if last.ci_low > 0.5 {
        return Ok((PhaseClass::Percolating, root, ests));
    }
    Ok((PhaseClass::Unclassified, root, ests))
}
