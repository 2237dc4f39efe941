use std::collections::VecDeque;

use super::{RunParams, StageInfo, SystemKind};
use crate::history::DelayHistory;
use crate::spectral::{NormBundle, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Stopped at `step` (time `time`) by a non-finite value or the energy guard.
    AbortedBlowup {
        step: usize,
        time: f64,
    },
}

/// Recorded run of one or more coupled components.
///
/// Node arrays (`times`, `eps`, `deps`, `norms`) start with the `k/dt`
/// prehistory nodes before `τ`; snapshot arrays (`a_of_lu`, `power`,
/// `defect`) start at `τ`. Snapshot `i` is node `i + delay_steps`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: RunParams,
    pub kinds: Vec<SystemKind>,
    pub delay_steps: usize,
    pub times: Vec<f64>,
    pub eps: Vec<f64>,
    pub deps: Vec<f64>,
    /// `norms[c][node]`, with `|ε|` taken pointwise.
    pub norms: Vec<Vec<NormBundle>>,
    pub a_of_lu: Vec<f64>,
    pub power: Vec<f64>,
    /// `‖u − c₁ − c₂‖` per snapshot for three-component runs.
    pub defect: Vec<f64>,
    pub final_state: Vec<SpectralField>,
    pub history: Option<DelayHistory>,
    pub status: RunStatus,
}

impl Trajectory {
    pub(super) fn new(params: RunParams, kinds: Vec<SystemKind>, delay_steps: usize, nodes: usize) -> Self {
        let nc = kinds.len();
        Self {
            params,
            kinds,
            delay_steps,
            times: Vec::with_capacity(nodes),
            eps: Vec::with_capacity(nodes),
            deps: Vec::with_capacity(nodes),
            norms: (0..nc).map(|_| Vec::with_capacity(nodes)).collect(),
            a_of_lu: Vec::with_capacity(nodes),
            power: Vec::with_capacity(nodes),
            defect: Vec::with_capacity(nodes),
            final_state: Vec::new(),
            history: None,
            status: RunStatus::Completed,
        }
    }

    pub(super) fn push_node(&mut self, t: f64, eps: f64, deps: f64, bundles: Vec<NormBundle>) {
        self.times.push(t);
        self.eps.push(eps);
        self.deps.push(deps);
        for (series, b) in self.norms.iter_mut().zip(bundles) {
            series.push(b);
        }
    }

    pub(super) fn push_stage_info(&mut self, info: StageInfo) {
        self.a_of_lu.push(info.a_of_lu);
        self.power.push(info.power);
    }

    pub(super) fn push_defect(&mut self, d: f64) {
        self.defect.push(d);
    }

    pub(super) fn abort(&mut self, step: usize, time: f64) {
        self.status = RunStatus::AbortedBlowup { step, time };
    }

    pub(super) fn finish(&mut self, finals: Vec<SpectralField>, history: DelayHistory) {
        self.final_state = finals;
        self.history = Some(history);
    }

    pub(super) fn node_count(&self) -> usize {
        self.times.len()
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// Number of recorded snapshots at or after `τ`.
    pub fn snapshots(&self) -> usize {
        self.times.len().saturating_sub(self.delay_steps)
    }

    pub fn node(&self, i: usize) -> usize {
        i + self.delay_steps
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[self.node(i)]
    }

    pub fn snapshot_times(&self) -> &[f64] {
        &self.times[self.delay_steps..]
    }

    pub fn norms_at(&self, component: usize, i: usize) -> &NormBundle {
        &self.norms[component][self.node(i)]
    }

    pub fn component(&self, kind: SystemKind) -> Option<usize> {
        self.kinds.iter().position(|&k| k == kind)
    }

    pub fn max_defect(&self) -> f64 {
        self.defect.iter().copied().fold(0.0, f64::max)
    }

    /// Snapshot nearest to `t`, if inside the run.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let dt = self.params.dt;
        let p = ((t - self.params.tau) / dt).round();
        if p < 0.0 || (t - self.params.tau - p * dt).abs() > 1e-6 * dt {
            return None;
        }
        let i = p as usize;
        (i < self.snapshots()).then_some(i)
    }

    pub fn final_history(&self) -> &DelayHistory {
        self.history.as_ref().expect("trajectory is finished")
    }

    /// Delay-window sup-norms of a component at every snapshot.
    pub fn window_series(&self, component: usize) -> WindowSeries {
        let w = self.delay_steps + 1;
        let series = &self.norms[component];
        let pick =
            |f: fn(&NormBundle) -> f64| -> Vec<f64> { sliding_max(&series.iter().map(f).collect::<Vec<_>>(), w) };
        let abs_eps: Vec<f64> = self.eps.iter().map(|e| e.abs()).collect();
        WindowSeries {
            l2: pick(|b| b.l2_sq),
            grad: pick(|b| b.grad_sq),
            laplace: pick(|b| b.laplace_sq),
            frac: pick(|b| b.frac_sq),
            frac1: pick(|b| b.frac1_sq),
            eps_abs: sliding_max(&abs_eps, w),
        }
    }
}

/// Window sup-norms per snapshot; see [`Trajectory::window_series`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowSeries {
    pub l2: Vec<f64>,
    pub grad: Vec<f64>,
    pub laplace: Vec<f64>,
    pub frac: Vec<f64>,
    pub frac1: Vec<f64>,
    pub eps_abs: Vec<f64>,
}

impl WindowSeries {
    pub fn len(&self) -> usize {
        self.l2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l2.is_empty()
    }

    /// `‖u_t‖²_{C_{H_t}}`
    pub fn ht(&self, i: usize) -> f64 {
        self.l2[i] + self.eps_abs[i] * self.grad[i]
    }

    /// `‖u_t‖²_{C_{H¹_t}}`
    pub fn h1t(&self, i: usize) -> f64 {
        self.grad[i] + self.eps_abs[i] * self.laplace[i]
    }

    /// `‖A^{σ/2}u_t‖²_C + |ε_t|·‖A^{(1+σ)/2}u_t‖²_C`
    pub fn fractional(&self, i: usize) -> f64 {
        self.frac[i] + self.eps_abs[i] * self.frac1[i]
    }
}

/// Maxima of every full window of `width` consecutive values.
pub fn sliding_max(values: &[f64], width: usize) -> Vec<f64> {
    if width == 0 || values.len() < width {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(values.len() + 1 - width);
    let mut dq: VecDeque<usize> = VecDeque::new();
    for (i, &v) in values.iter().enumerate() {
        while dq.back().is_some_and(|&j| values[j] <= v) {
            dq.pop_back();
        }
        dq.push_back(i);
        if dq[0] + width <= i {
            dq.pop_front();
        }
        if i + 1 >= width {
            out.push(values[dq[0]]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sliding_max_small_cases() {
        assert_eq!(sliding_max(&[1.0, 3.0, 2.0, 0.0, 0.5], 2), vec![3.0, 3.0, 2.0, 0.5]);
        assert_eq!(sliding_max(&[1.0, 2.0], 3), Vec::<f64>::new());
        assert_eq!(sliding_max(&[4.0, 1.0, 2.0], 1), vec![4.0, 1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn sliding_max_matches_brute_force(
            values in proptest::collection::vec(-5.0f64..5.0, 1..60),
            width in 1usize..10,
        ) {
            let fast = sliding_max(&values, width);
            let slow: Vec<f64> = values
                .windows(width)
                .map(|w| w.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            prop_assert_eq!(fast, slow);
        }
    }
}
