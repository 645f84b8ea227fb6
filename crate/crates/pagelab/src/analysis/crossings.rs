//! Avoided-crossing detection in the entanglement spectrum, refinement by
//! re-simulation, and Page-time location.

use super::overlap::bhattacharyya_overlap;
use super::snapshot::EntanglementSnapshot;
use crate::error::{PagelabError, Result};

/// One avoided crossing of the top two levels of ρ_A.
#[derive(Debug, Clone)]
pub struct CrossingEvent {
    /// Crossing time; refined when `refined` is set, otherwise the sample
    /// with the minimal gap.
    pub t_star: f64,
    /// Minimum of log λ_0 − log λ_1 across the event.
    pub min_gap: f64,
    /// Level pair involved (top-two detection reports (0, 1)).
    pub levels: (usize, usize),
    /// Drop of the top-eigenvector Bhattacharyya overlap across the event:
    /// B(t*−δ, t*−2δ) − B(t*−δ, t*+δ) at sample spacing δ.
    pub bhattacharyya_jump: f64,
    /// Whether bracketed refinement succeeded.
    pub refined: bool,
    /// Half the final refinement bracket (or half the sample spacing if
    /// unrefined) — the resolution-of-sampling error bar.
    pub time_uncertainty: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CrossingOptions {
    /// A local gap minimum qualifies when the gap rises by at least this many
    /// nats on both sides before a deeper minimum intervenes.
    pub prominence: f64,
    /// Target width for the refinement bracket, in time units.
    pub refine_tol: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions { prominence: 0.5, refine_tol: 1e-3 }
    }
}

/// Evaluates the top-two log-gap at arbitrary times by re-running the
/// evolver from the nearest stored state.
pub trait GapProbe {
    fn log_gap_at(&mut self, t: f64) -> Result<f64>;
}

/// Locate qualifying local minima of the top log-gap over a sampled series.
/// No refinement is performed; see [`refine_crossings`].
pub fn detect_crossings(
    series: &[EntanglementSnapshot],
    opts: &CrossingOptions,
) -> Vec<CrossingEvent> {
    let n = series.len();
    if n < 3 {
        return Vec::new();
    }
    let gap: Vec<f64> = series.iter().map(|s| s.top_log_gap()).collect();
    let dt = if n > 1 { (series[n - 1].time - series[0].time) / (n - 1) as f64 } else { 0.0 };
    let mut events = Vec::new();
    for i in 1..n - 1 {
        if !(gap[i] <= gap[i - 1] && gap[i] <= gap[i + 1]) {
            continue;
        }
        if prominence_of(&gap, i) < opts.prominence {
            continue;
        }
        events.push(CrossingEvent {
            t_star: series[i].time,
            min_gap: gap[i],
            levels: (0, 1),
            bhattacharyya_jump: overlap_drop(series, i),
            refined: false,
            time_uncertainty: dt / 2.0,
        });
    }
    events
}

/// The smaller of the two rises around a local minimum, where each rise runs
/// until a strictly lower point (or the series boundary) is hit.
fn prominence_of(gap: &[f64], i: usize) -> f64 {
    let mut left = 0.0f64;
    for j in (0..i).rev() {
        if gap[j] < gap[i] {
            break;
        }
        left = left.max(gap[j] - gap[i]);
    }
    let mut right = 0.0f64;
    for &gj in gap.iter().skip(i + 1) {
        if gj < gap[i] {
            break;
        }
        right = right.max(gj - gap[i]);
    }
    left.min(right)
}

/// Top-eigenvector overlap drop across sample `i`, comparing the within-side
/// pair (i−1, i−2) against the cross-event pair (i−1, i+1). Adjacent levels
/// are matched by maximal overlap first, so a spurious index swap between
/// neighbouring samples does not masquerade as a character change.
fn overlap_drop(series: &[EntanglementSnapshot], i: usize) -> f64 {
    if i < 2 || i + 1 >= series.len() {
        return 0.0;
    }
    let (a, b, c) = (&series[i - 2], &series[i - 1], &series[i + 1]);
    let (va, vb, vc) = match (a.level(0), b.level(0), c.level(0)) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return 0.0,
    };
    // match b's top level against a: if a's level 1 overlaps b's top better,
    // the label swapped without a physical event and we compare against it
    let same = bhattacharyya_overlap(vb, va);
    let ref_within = match a.level(1) {
        Some(va1) => same.max(bhattacharyya_overlap(vb, va1)),
        None => same,
    };
    ref_within - bhattacharyya_overlap(vb, vc)
}

/// Golden-section refinement of each event on its bracketing sample interval.
/// Events whose probe fails are passed through with `refined = false`.
pub fn refine_crossings(
    events: &[CrossingEvent],
    series: &[EntanglementSnapshot],
    opts: &CrossingOptions,
    probe: &mut dyn GapProbe,
) -> Vec<CrossingEvent> {
    let times: Vec<f64> = series.iter().map(|s| s.time).collect();
    events
        .iter()
        .map(|ev| {
            let idx = match times.iter().position(|&t| (t - ev.t_star).abs() < 1e-12) {
                Some(i) if i > 0 && i + 1 < times.len() => i,
                _ => return ev.clone(),
            };
            match golden_section(probe, times[idx - 1], times[idx + 1], opts.refine_tol) {
                Ok((t_star, min_gap, width)) => CrossingEvent {
                    t_star,
                    min_gap,
                    refined: true,
                    time_uncertainty: width / 2.0,
                    ..ev.clone()
                },
                Err(_) => ev.clone(),
            }
        })
        .collect()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_section(
    probe: &mut dyn GapProbe,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64, f64)> {
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = probe.log_gap_at(c)?;
    let mut fd = probe.log_gap_at(d)?;
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = probe.log_gap_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = probe.log_gap_at(d)?;
        }
    }
    let (t, f) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok((t, f, b - a))
}

/// Time of the maximum of S_α, refined by quadratic interpolation through the
/// three samples around the discrete maximum. A maximum at either endpoint is
/// an error: the run was too short.
pub fn page_time(series: &[EntanglementSnapshot], alpha: f64) -> Result<f64> {
    if series.len() < 3 {
        return Err(PagelabError::InvalidSize("page_time needs at least 3 samples".into()));
    }
    let s: Vec<f64> = series
        .iter()
        .map(|snap| {
            snap.entropy(alpha).ok_or_else(|| {
                PagelabError::Config(format!("alpha = {alpha} not in the configured entropy set"))
            })
        })
        .collect::<Result<_>>()?;
    let imax = s
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).expect("finite entropies"))
        .map(|(i, _)| i)
        .unwrap();
    if imax == 0 || imax == s.len() - 1 {
        return Err(PagelabError::MaximumAtEndpoint);
    }
    let (t0, t1, t2) = (series[imax - 1].time, series[imax].time, series[imax + 1].time);
    let (y0, y1, y2) = (s[imax - 1], s[imax], s[imax + 1]);
    // vertex of the parabola through the three points (uniform or not)
    let denom = (t1 - t0) * (y1 - y2) - (t1 - t2) * (y1 - y0);
    if denom.abs() < 1e-300 {
        return Ok(t1);
    }
    let num = (t1 - t0).powi(2) * (y1 - y2) - (t1 - t2).powi(2) * (y1 - y0);
    Ok(t1 - 0.5 * num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;
    use num_complex::Complex64 as C64;

    /// Build a synthetic snapshot whose top two eigenvalues and eigenvectors
    /// follow a two-level Landau-Zener model.
    fn lz_snapshot(t: f64, delta: f64, t_c: f64) -> EntanglementSnapshot {
        let eps = 0.08 * (t - t_c);
        let e = (eps * eps + delta * delta / 4.0).sqrt();
        // log-eigenvalues a ± e, exponentiated and padded with a tiny third level
        let base: f64 = -2.0;
        let l0 = (base + e).exp();
        let l1 = (base - e).exp();
        let l2 = 1.0 - l0 - l1;
        // LZ mixing angle
        let theta = 0.5 * (delta / 2.0).atan2(eps);
        let mut vecs = Mat::<C64>::zeros(3, 3);
        vecs[(0, 0)] = C64::new(theta.cos(), 0.0);
        vecs[(1, 0)] = C64::new(theta.sin(), 0.0);
        vecs[(0, 1)] = C64::new(-theta.sin(), 0.0);
        vecs[(1, 1)] = C64::new(theta.cos(), 0.0);
        vecs[(2, 2)] = C64::ONE;
        EntanglementSnapshot {
            time: t,
            eigenvalues: vec![l0, l1, l2.max(0.0)],
            eigenvectors: vecs,
            entropies: vec![],
            stored_levels: 3,
            tail_weight: 0.0,
            min_eigenvalue: 0.0,
        }
    }

    struct LzProbe {
        delta: f64,
        t_c: f64,
    }
    impl GapProbe for LzProbe {
        fn log_gap_at(&mut self, t: f64) -> Result<f64> {
            let eps = 0.08 * (t - self.t_c);
            Ok(2.0 * (eps * eps + self.delta * self.delta / 4.0).sqrt())
        }
    }

    #[test]
    fn monotone_separating_spectrum_has_no_crossings() {
        let snaps: Vec<EntanglementSnapshot> = (0..20)
            .map(|i| {
                let t = i as f64;
                let l0 = 0.6 + 0.01 * t;
                let l1 = 0.3 - 0.01 * t;
                EntanglementSnapshot {
                    time: t,
                    eigenvalues: vec![l0, l1, 1.0 - l0 - l1],
                    eigenvectors: Mat::identity(3, 3),
                    entropies: vec![],
                    stored_levels: 3,
                    tail_weight: 0.0,
                    min_eigenvalue: 0.0,
                }
            })
            .collect();
        assert!(detect_crossings(&snaps, &CrossingOptions::default()).is_empty());
    }

    #[test]
    fn landau_zener_crossing_detected_and_refined() {
        let delta = 1e-3;
        let t_c = 5.0;
        let snaps: Vec<EntanglementSnapshot> =
            (0..41).map(|i| lz_snapshot(i as f64 * 0.25, delta, t_c)).collect();
        let opts = CrossingOptions::default();
        let events = detect_crossings(&snaps, &opts);
        assert_eq!(events.len(), 1, "expected exactly one event");
        let mut probe = LzProbe { delta, t_c };
        let refined = refine_crossings(&events, &snaps, &opts, &mut probe);
        let ev = &refined[0];
        assert!(ev.refined);
        assert!((ev.t_star - t_c).abs() <= opts.refine_tol, "t* = {}", ev.t_star);
        // min gap of the log-spectrum is exactly delta at the crossing
        assert!((ev.min_gap - delta).abs() < 1e-6, "min gap {}", ev.min_gap);
        // the top eigenvector rotates by ~90° across the event
        assert!(ev.bhattacharyya_jump > 0.2, "jump {}", ev.bhattacharyya_jump);
    }

    #[test]
    fn probe_failure_leaves_event_unrefined() {
        struct FailProbe;
        impl GapProbe for FailProbe {
            fn log_gap_at(&mut self, _t: f64) -> Result<f64> {
                Err(PagelabError::Numerical("no checkpoint".into()))
            }
        }
        let snaps: Vec<EntanglementSnapshot> =
            (0..41).map(|i| lz_snapshot(i as f64 * 0.25, 1e-3, 5.0)).collect();
        let opts = CrossingOptions::default();
        let events = detect_crossings(&snaps, &opts);
        let refined = refine_crossings(&events, &snaps, &opts, &mut FailProbe);
        assert_eq!(refined.len(), 1);
        assert!(!refined[0].refined);
    }

    fn entropy_series(values: &[f64]) -> Vec<EntanglementSnapshot> {
        values
            .iter()
            .enumerate()
            .map(|(i, &s)| EntanglementSnapshot {
                time: i as f64,
                eigenvalues: vec![1.0],
                eigenvectors: Mat::identity(1, 1),
                entropies: vec![(1.0, s)],
                stored_levels: 1,
                tail_weight: 0.0,
                min_eigenvalue: 0.0,
            })
            .collect()
    }

    #[test]
    fn page_time_exact_parabola() {
        let vals: Vec<f64> = (0..15).map(|i| -((i as f64) - 7.0).powi(2) + 3.0).collect();
        let series = entropy_series(&vals);
        let t = page_time(&series, 1.0).unwrap();
        assert!((t - 7.0).abs() < 1e-12, "t = {t}");
    }

    #[test]
    fn page_time_endpoint_is_error() {
        let vals: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let series = entropy_series(&vals);
        assert!(matches!(page_time(&series, 1.0), Err(PagelabError::MaximumAtEndpoint)));
    }
}
