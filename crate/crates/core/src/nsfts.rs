//! Non-stationary fuzzy time series (first order).
//!
//! The universe of discourse is split into κ uniformly spaced triangular
//! sets. Training extracts first-order rules `A_p → {A_c, ...}` from the
//! crisp (max-membership) labels of consecutive observations. After training
//! the sets are never re-partitioned; instead each set carries a displacement
//! δ and a widening ρ that [`NsftsModel::adapt`] recomputes from the recent
//! forecast residuals and from observations falling outside the universe.
//!
//! ```text
//!   l' = (l + δ) − ρ/2     c' = c + δ     u' = (u + δ) + ρ/2
//! ```

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Absolute widening applied to a universe built from a constant series.
pub const CONSTANT_SERIES_EPSILON: f64 = 1e-6;
pub const DEFAULT_MARGIN_RATIO: f64 = 0.1;

/// Universe of discourse `[lb, ub]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    pub lb: f64,
    pub ub: f64,
    pub margin_ratio: f64,
}

/// `lb = min − r·|min|`, `ub = max + r·|max|`.
pub fn build_universe(train: &[f64], margin_ratio: f64) -> Result<Universe> {
    if train.is_empty() {
        return invalid("cannot build a universe from an empty series");
    }
    if !(margin_ratio > 0.0 && margin_ratio < 1.0) {
        return invalid(format!(
            "margin ratio must be in (0, 1), got {margin_ratio}"
        ));
    }
    if train.iter().any(|v| !v.is_finite()) {
        return invalid("series contains non-finite values");
    }
    let min = train.iter().copied().fold(f64::INFINITY, f64::min);
    let max = train.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lb = min - margin_ratio * min.abs();
    let mut ub = max + margin_ratio * max.abs();
    if min == max {
        log::warn!(
            "constant training series ({min}); widening universe by {CONSTANT_SERIES_EPSILON}"
        );
        lb -= CONSTANT_SERIES_EPSILON;
        ub += CONSTANT_SERIES_EPSILON;
    }
    Ok(Universe {
        lb,
        ub,
        margin_ratio,
    })
}

/// How δ and ρ are applied to a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationForm {
    /// `l' = (l+δ) − ρ/2`: ρ widens the support symmetrically.
    #[default]
    Adopted,
    /// `l' = ρ/2 − (l+δ)`, the lower bound exactly as printed in the source
    /// formula. Kept for comparison only; it mirrors the lower bound through
    /// zero and generally breaks the triangle.
    Literal,
}

/// Triangle parameters `(l, c, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub l: f64,
    pub c: f64,
    pub u: f64,
}

impl Triangle {
    /// Piecewise-linear grade: 1 at `c`, 0 outside `[l, u]`.
    pub fn membership(&self, y: f64) -> f64 {
        if y == self.c {
            1.0
        } else if y < self.c {
            if y >= self.l && self.c > self.l {
                (y - self.l) / (self.c - self.l)
            } else {
                0.0
            }
        } else if y <= self.u && self.u > self.c {
            (self.u - y) / (self.u - self.c)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySet {
    pub index: usize,
    pub label: String,
    pub l: f64,
    pub c: f64,
    pub u: f64,
    /// Displacement along the universe.
    pub delta: f64,
    /// Support widening, ≥ 0.
    pub rho: f64,
}

impl FuzzySet {
    pub fn new(index: usize, l: f64, c: f64, u: f64) -> Self {
        Self {
            index,
            label: format!("A{index}"),
            l,
            c,
            u,
            delta: 0.0,
            rho: 0.0,
        }
    }

    pub fn perturbed(&self, form: PerturbationForm) -> Triangle {
        let half = self.rho / 2.0;
        let l = match form {
            PerturbationForm::Adopted => (self.l + self.delta) - half,
            PerturbationForm::Literal => half - (self.l + self.delta),
        };
        Triangle {
            l,
            c: self.c + self.delta,
            u: (self.u + self.delta) + half,
        }
    }

    pub fn membership(&self, y: f64, form: PerturbationForm) -> f64 {
        self.perturbed(form).membership(y)
    }
}

/// Perturbed `(l', c', u')` of a set; the stored parameters are untouched.
pub fn perturb(set: &FuzzySet) -> (f64, f64, f64) {
    let t = set.perturbed(PerturbationForm::Adopted);
    (t.l, t.c, t.u)
}

pub fn membership(set: &FuzzySet, y: f64) -> f64 {
    set.membership(y, PerturbationForm::Adopted)
}

/// κ uniform triangles with 50% overlap, midpoints
/// `c_i = lb + i·(ub − lb)/(κ − 1)`. The outer supports extend one step past
/// the universe so edge sets behave like interior ones.
pub fn build_partitions(universe: &Universe, kappa: usize) -> Result<Vec<FuzzySet>> {
    if kappa < 3 {
        return invalid(format!("need at least 3 fuzzy sets, got {kappa}"));
    }
    let Universe { lb, ub, .. } = *universe;
    if lb.is_nan() || ub.is_nan() || lb >= ub {
        return invalid(format!("empty universe [{lb}, {ub}]"));
    }
    let c: Vec<f64> = (0..kappa)
        .map(|i| lb + i as f64 * ((ub - lb) / (kappa - 1) as f64))
        .collect();
    let sets = (0..kappa)
        .map(|i| {
            let l = if i == 0 { lb - (c[1] - c[0]) } else { c[i - 1] };
            let u = if i == kappa - 1 {
                ub + (c[kappa - 1] - c[kappa - 2])
            } else {
                c[i + 1]
            };
            FuzzySet::new(i, l, c[i], u)
        })
        .collect();
    Ok(sets)
}

/// Fuzzy logical relationship group: every consequent observed after
/// `precedent`, sorted and de-duplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub precedent: usize,
    pub consequents: Vec<usize>,
}

/// FIFO of the most recent forecast errors `actual − predicted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualWindow {
    capacity: usize,
    entries: VecDeque<f64>,
}

impl ResidualWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, e: f64) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(e);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().copied()
    }

    pub fn mean(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().sum::<f64>() / self.entries.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        let m = self.mean();
        let var =
            self.entries.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / self.entries.len() as f64;
        var.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsftsParams {
    /// Number of fuzzy sets κ.
    pub kappa: usize,
    /// Residual window length.
    pub w_e: usize,
    pub margin_ratio: f64,
    #[serde(default)]
    pub perturbation: PerturbationForm,
}

impl NsftsParams {
    pub fn new(kappa: usize, w_e: usize) -> Self {
        Self {
            kappa,
            w_e,
            margin_ratio: DEFAULT_MARGIN_RATIO,
            perturbation: PerturbationForm::Adopted,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa < 3 {
            return invalid(format!("kappa must be at least 3, got {}", self.kappa));
        }
        if self.w_e == 0 {
            return invalid("residual window length must be at least 1");
        }
        if !(self.margin_ratio > 0.0 && self.margin_ratio < 1.0) {
            return invalid(format!(
                "margin ratio must be in (0, 1), got {}",
                self.margin_ratio
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsftsModel {
    pub params: NsftsParams,
    pub universe: Universe,
    pub sets: Vec<FuzzySet>,
    /// Sorted by precedent, at most one rule per precedent.
    pub rules: Vec<Rule>,
    pub residuals: ResidualWindow,
    /// Always 1.
    pub order: usize,
    /// Times an adaptation would have reordered the perturbed midpoints and
    /// the displacements were re-sorted instead.
    #[serde(default)]
    pub reorder_events: u64,
}

/// Trains a first-order model and seeds the residual window by forecasting
/// the last `w_e` training points with the freshly trained (unperturbed)
/// sets.
pub fn train(series: &[f64], params: NsftsParams) -> Result<NsftsModel> {
    params.validate()?;
    if series.len() < params.w_e + 2 {
        return invalid(format!(
            "series of length {} too short for residual window {} (need {})",
            series.len(),
            params.w_e,
            params.w_e + 2
        ));
    }
    let universe = build_universe(series, params.margin_ratio)?;
    let sets = build_partitions(&universe, params.kappa)?;
    let mut model = NsftsModel {
        params,
        universe,
        sets,
        rules: Vec::new(),
        residuals: ResidualWindow::new(params.w_e),
        order: 1,
        reorder_events: 0,
    };

    let mut groups: Vec<Vec<bool>> = vec![vec![false; params.kappa]; params.kappa];
    let labels: Vec<usize> = series
        .iter()
        .map(|y| {
            model
                .crisp_label(*y)
                .expect("training values lie inside the universe")
        })
        .collect();
    for w in labels.windows(2) {
        groups[w[0]][w[1]] = true;
    }
    model.rules = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.iter().any(|x| *x))
        .map(|(p, g)| Rule {
            precedent: p,
            consequents: g
                .iter()
                .enumerate()
                .filter(|(_, x)| **x)
                .map(|(c, _)| c)
                .collect(),
        })
        .collect();

    let n = series.len();
    for t in n - params.w_e..n {
        let predicted = model.forecast_step(series[t - 1]);
        model.update_residuals(series[t], predicted);
    }
    Ok(model)
}

impl NsftsModel {
    pub fn kappa(&self) -> usize {
        self.sets.len()
    }

    pub fn rule_for(&self, precedent: usize) -> Option<&Rule> {
        self.rules
            .binary_search_by_key(&precedent, |r| r.precedent)
            .ok()
            .map(|i| &self.rules[i])
    }

    pub fn perturbed_sets(&self) -> Vec<Triangle> {
        let form = self.params.perturbation;
        self.sets.iter().map(|s| s.perturbed(form)).collect()
    }

    /// Membership grade of `y` in every (perturbed) set.
    pub fn fuzzify(&self, y: f64) -> Vec<f64> {
        self.perturbed_sets()
            .iter()
            .map(|t| t.membership(y))
            .collect()
    }

    /// Index of the max-membership set (lowest index on ties), `None` when
    /// `y` lies outside every support.
    pub fn crisp_label(&self, y: f64) -> Option<usize> {
        let grades = self.fuzzify(y);
        let mut best: Option<usize> = None;
        for (i, g) in grades.iter().enumerate() {
            if *g > 0.0 && best.is_none_or(|b| *g > grades[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// One-step-ahead forecast from the current observation.
    ///
    /// Matched rules are the precedents with positive membership. The forecast
    /// is the membership-weighted mean of each rule's consequent midpoint
    /// average, all on perturbed midpoints. With no match it is the perturbed
    /// midpoint nearest to `y`.
    pub fn forecast_step(&self, y: f64) -> f64 {
        let tri = self.perturbed_sets();
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, t) in tri.iter().enumerate() {
            let mu = t.membership(y);
            if mu <= 0.0 {
                continue;
            }
            let Some(rule) = self.rule_for(j) else {
                continue;
            };
            let mp = rule.consequents.iter().map(|&c| tri[c].c).sum::<f64>()
                / rule.consequents.len() as f64;
            num += mu * mp;
            den += mu;
        }
        if den > 0.0 {
            return num / den;
        }
        let mut best = 0;
        for (i, t) in tri.iter().enumerate() {
            if (y - t.c).abs() < (y - tri[best].c).abs() {
                best = i;
            }
        }
        tri[best].c
    }

    pub fn update_residuals(&mut self, actual: f64, predicted: f64) {
        self.residuals.push(actual - predicted);
    }

    /// Recomputes every set's displacement δ and widening ρ from the residual
    /// window and from how far `y` falls outside the universe.
    pub fn adapt(&mut self, y: f64) {
        let Universe { lb, ub, .. } = self.universe;
        let d_l = if y < lb { lb - y } else { 0.0 };
        let d_u = if y > ub { y - ub } else { 0.0 };
        let range = d_u - d_l;
        let mid = range / 2.0;
        let mean = self.residuals.mean();
        let sigma = self.residuals.std_dev();
        let k = self.sets.len();
        let kf = k as f64;

        let mut delta: Vec<f64> = (0..k)
            .map(|i| {
                let i = i as f64;
                mean + (i * range / (kf + 1.0) - mid) + (i * 2.0 * sigma / (kf - 1.0) - sigma)
            })
            .collect();

        let ordered = (1..k).all(|i| self.sets[i].c + delta[i] > self.sets[i - 1].c + delta[i - 1]);
        if !ordered {
            delta.sort_by(f64::total_cmp);
            self.reorder_events += 1;
            log::warn!(
                "adaptation at y = {y} would reorder set midpoints; displacements re-sorted (event {})",
                self.reorder_events
            );
        }

        for i in 0..k {
            let prev = delta[i.saturating_sub(1)];
            let next = delta[(i + 1).min(k - 1)];
            self.sets[i].delta = delta[i];
            self.sets[i].rho = (prev - next).abs();
        }
    }

    /// Forecasts each point of `test` from its predecessor (`previous` for the
    /// first). With `adapt_online`, every revealed observation updates the
    /// residual window and re-adapts the sets after its forecast is recorded.
    pub fn predict_series(&mut self, previous: f64, test: &[f64], adapt_online: bool) -> Vec<f64> {
        let mut out = Vec::with_capacity(test.len());
        let mut prev = previous;
        for &actual in test {
            let predicted = self.forecast_step(prev);
            out.push(predicted);
            if adapt_online {
                self.update_residuals(actual, predicted);
                self.adapt(actual);
            }
            prev = actual;
        }
        out
    }
}

impl fmt::Display for NsftsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let rhs: Vec<&str> = r
                .consequents
                .iter()
                .map(|c| self.sets[*c].label.as_str())
                .collect();
            writeln!(f, "{} -> {}", self.sets[r.precedent].label, rhs.join(", "))?;
        }
        Ok(())
    }
}
