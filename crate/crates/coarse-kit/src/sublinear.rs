//! Piecewise-linear asymptotically sublinear functions.
//!
//! A function `s: R+ -> R+` is asymptotically sublinear when it is eventually
//! below every non-constant linear function. With a piecewise-linear
//! representation the criterion is finite: the final ray must be flat. A
//! positive tail slope σ is already linear growth and loses against
//! `f(r) = σ r / 2`.

use crate::{Error, Result};

/// Continuous nonnegative piecewise-linear function on `[0, ∞)`.
///
/// Constant at the first breakpoint's value to the left of it, interpolated
/// between breakpoints, and following a ray of slope `tail_slope` after the
/// last one.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PiecewiseLinearFunction {
    breakpoints: Vec<(f64, f64)>,
    tail_slope: f64,
}

impl PiecewiseLinearFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>, tail_slope: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::Input("need at least one breakpoint".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Input(format!(
                    "breakpoint abscissae must strictly increase: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(t, v) in &breakpoints {
            if !(t >= 0.0) || !v.is_finite() || v < 0.0 {
                return Err(Error::Input(format!("invalid breakpoint ({t}, {v})")));
            }
        }
        if !tail_slope.is_finite() || tail_slope < 0.0 {
            return Err(Error::Input(format!(
                "tail slope must be finite and nonnegative to keep the function nonnegative, got {tail_slope}"
            )));
        }
        Ok(Self {
            breakpoints,
            tail_slope,
        })
    }

    /// The constant function `t -> value`.
    pub fn constant(value: f64) -> Self {
        Self::new(vec![(0.0, value)], 0.0).expect("constant is valid")
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    pub fn eval(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t <= bp[0].0 {
            return bp[0].1;
        }
        for w in bp.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if t == t1 {
                return v1;
            }
            if t < t1 {
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        let (tl, vl) = *bp.last().unwrap();
        vl + self.tail_slope * (t - tl)
    }

    /// Slopes of the interior segments followed by the tail slope.
    pub fn slopes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .breakpoints
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        out.push(self.tail_slope);
        out
    }

    /// `sup { s(r)/r : r >= lo }` for `lo > 0`. The ratio is monotone on
    /// each segment, so the sup is attained at `lo`, at a breakpoint, or in
    /// the tail limit (= tail slope).
    pub fn sup_ratio_from(&self, lo: f64) -> Result<f64> {
        if !(lo > 0.0) {
            return Err(Error::Precondition(format!(
                "ratio sup needs a positive lower bound, got {lo}"
            )));
        }
        let mut sup = self.eval(lo) / lo;
        for &(t, v) in &self.breakpoints {
            if t >= lo && t > 0.0 {
                sup = sup.max(v / t);
            }
        }
        Ok(sup.max(self.tail_slope))
    }
}

/// Verdict of the finite sublinearity criterion, with the data it inspected.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SublinearWitness {
    pub verdict: bool,
    /// Segment slopes, tail last.
    pub slope_sequence: Vec<f64>,
    /// When the verdict is false with tail slope σ > 0, the linear function
    /// `f(r) = (σ/2) r` eventually dominated by `s`; stored as σ/2.
    pub counterexample_slope: Option<f64>,
}

/// Finite criterion: the final ray must be flat. Decreasing interior slopes
/// alone are not enough.
pub fn is_asymptotically_sublinear(s: &PiecewiseLinearFunction) -> SublinearWitness {
    let slope_sequence = s.slopes();
    let sigma = s.tail_slope();
    if sigma == 0.0 {
        SublinearWitness {
            verdict: true,
            slope_sequence,
            counterexample_slope: None,
        }
    } else {
        SublinearWitness {
            verdict: false,
            slope_sequence,
            counterexample_slope: Some(sigma / 2.0),
        }
    }
}

/// Which route the interpolation construction took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FitRoute {
    /// Some sample after the running maximum does not exceed it: interpolate
    /// a nonincreasing chain of values.
    DescendingValues,
    /// Values keep growing: select samples whose chord slopes strictly
    /// decrease (greedy, always taking the next sample that lowers the
    /// slope).
    DecreasingChords,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SublinearFit {
    pub function: PiecewiseLinearFunction,
    /// Indices of the samples the function passes through exactly.
    pub selected: Vec<usize>,
    pub route: FitRoute,
}

/// Build an asymptotically sublinear piecewise-linear function with
/// `s(t_k) = a_k * t_k` exactly on a selected subsequence of the samples.
///
/// Samples are `(t_k, a_k)` with strictly increasing `t_k > 0` and `a_k > 0`.
/// The function is capped by a flat ray after the last selected sample.
pub fn fit_sublinear_through(samples: &[(f64, f64)]) -> Result<SublinearFit> {
    if samples.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Input("sample abscissae must strictly increase".into()));
        }
    }
    if samples.iter().any(|&(t, a)| !(t > 0.0) || !(a > 0.0)) {
        return Err(Error::Input("samples need t > 0 and a > 0".into()));
    }
    let values: Vec<f64> = samples.iter().map(|&(t, a)| a * t).collect();

    // First global maximum of the values.
    let mut argmax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[argmax] {
            argmax = i;
        }
    }
    // Greedy nonincreasing chain from the maximum.
    let mut chain = vec![argmax];
    for k in argmax + 1..values.len() {
        if values[k] <= values[*chain.last().unwrap()] {
            chain.push(k);
        }
    }

    let (selected, route) = if chain.len() >= 2 {
        (chain, FitRoute::DescendingValues)
    } else {
        // Values strictly exceed the running maximum; pick chords that
        // strictly lower the slope, starting from the first sample.
        let mut sel = vec![0usize];
        let mut slope = f64::INFINITY;
        for k in 1..values.len() {
            let last = *sel.last().unwrap();
            let cand = (values[k] - values[last]) / (samples[k].0 - samples[last].0);
            if cand < slope {
                sel.push(k);
                slope = cand;
            }
        }
        (sel, FitRoute::DecreasingChords)
    };

    let breakpoints: Vec<(f64, f64)> = selected
        .iter()
        .map(|&k| (samples[k].0, values[k]))
        .collect();
    let function = PiecewiseLinearFunction::new(breakpoints, 0.0)?;
    Ok(SublinearFit {
        function,
        selected,
        route,
    })
}
