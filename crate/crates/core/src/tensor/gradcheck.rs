use super::{Graph, Matrix, Tensor, TensorError};

/// Outcome of a central-difference gradient check.
#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    /// `max |analytic − numeric| / max(|analytic|, |numeric|, 1e-8)`.
    pub max_rel_error: f64,
    /// `(parameter index, entry index)` where the maximum occurred.
    pub worst: Option<(usize, usize)>,
    pub checked: usize,
    /// Entries whose ±eps probes straddle a relu kink.
    pub skipped: usize,
}

const DENOM_FLOOR: f64 = 1e-8;

/// Compares reverse-mode gradients of a scalar function against central
/// finite differences.
///
/// `build` receives a fresh graph and the parameters as leaves and must
/// return the scalar output. It is called once for the analytic pass and
/// twice per parameter entry. Entries whose `+eps` and `−eps` probes see a
/// different relu activation pattern are skipped.
pub fn finite_difference_check<F, E>(
    mut build: F,
    params: &[Matrix],
    eps: f64,
) -> Result<FdReport, E>
where
    F: FnMut(&mut Graph, &[Tensor]) -> Result<Tensor, E>,
    E: From<TensorError>,
{
    assert!(eps > 0.0, "eps must be positive");

    let mut graph = Graph::new();
    let leaves: Vec<Tensor> = params.iter().map(|p| graph.leaf(p.clone())).collect();
    let out = build(&mut graph, &leaves)?;
    let base = graph.value(out).get(0, 0);
    if !base.is_finite() {
        return Err(TensorError::NonFinite {
            value: base,
            param: 0,
            entry: 0,
        }
        .into());
    }
    graph.backward(out)?;
    let analytic: Vec<Matrix> = leaves.iter().map(|&l| graph.grad(l).clone()).collect();

    let mut probe = |params: &[Matrix], p: usize, e: usize| -> Result<(f64, Vec<bool>), E> {
        let mut g = Graph::new();
        let leaves: Vec<Tensor> = params.iter().map(|m| g.leaf(m.clone())).collect();
        let out = build(&mut g, &leaves)?;
        let v = g.value(out).get(0, 0);
        if !v.is_finite() {
            return Err(TensorError::NonFinite {
                value: v,
                param: p,
                entry: e,
            }
            .into());
        }
        Ok((v, g.relu_pattern()))
    };

    let mut work: Vec<Matrix> = params.to_vec();
    let mut report = FdReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
        skipped: 0,
    };
    for p in 0..params.len() {
        for e in 0..params[p].len() {
            let original = params[p].as_slice()[e];
            work[p].as_mut_slice()[e] = original + eps;
            let (plus, pat_plus) = probe(&work, p, e)?;
            work[p].as_mut_slice()[e] = original - eps;
            let (minus, pat_minus) = probe(&work, p, e)?;
            work[p].as_mut_slice()[e] = original;

            if pat_plus != pat_minus {
                report.skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[p].as_slice()[e];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(DENOM_FLOOR);
            report.checked += 1;
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = rel;
                report.worst = Some((p, e));
            }
        }
    }
    Ok(report)
}
