use std::fmt::Write as _;

/// One fit of an evaluation protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    /// Training patterns.
    pub train_size: usize,
    /// Test patterns.
    pub test_size: usize,
    /// Hidden units of every network of the model.
    pub hidden: Vec<usize>,
    pub weights: usize,
    /// `None` when the model was not trained in this run.
    pub train_error: Option<f64>,
    /// `None` when the run has no test patterns.
    pub test_error: Option<f64>,
}

impl RunRecord {
    pub fn total_hidden(&self) -> usize {
        self.hidden.iter().sum()
    }
}

/// Mean and sample standard deviation (divisor n-1; 0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub protocol: String,
    pub runs: Vec<RunRecord>,
}

impl EvalReport {
    pub fn new(protocol: impl Into<String>, runs: Vec<RunRecord>) -> Self {
        Self {
            protocol: protocol.into(),
            runs,
        }
    }

    pub fn test_errors(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.test_error).collect()
    }

    pub fn train_errors(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.train_error).collect()
    }

    /// Pooled test error: misclassified test patterns over all test
    /// patterns of all runs. For leave-one-out this is the usual estimate.
    pub fn pooled_test_error(&self) -> Option<f64> {
        let total: usize = self
            .runs
            .iter()
            .filter(|r| r.test_error.is_some())
            .map(|r| r.test_size)
            .sum();
        if total == 0 {
            return None;
        }
        let wrong: f64 = self
            .runs
            .iter()
            .filter_map(|r| r.test_error.map(|e| e * r.test_size as f64))
            .sum();
        Some(wrong / total as f64)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "protocol: {} ({} runs)", self.protocol, self.runs.len());
        let et = self.train_errors();
        if !et.is_empty() {
            let (t, ts) = mean_std(&et);
            let _ = writeln!(s, "training error: {t:.4} +- {ts:.4}");
        }
        let eg = self.test_errors();
        if !eg.is_empty() {
            let (g, gs) = mean_std(&eg);
            let _ = writeln!(s, "generalization error: {g:.4} +- {gs:.4}");
            if let Some(p) = self.pooled_test_error() {
                let _ = writeln!(s, "pooled generalization error: {p:.4}");
            }
        }
        let h: Vec<f64> = self.runs.iter().map(|r| r.total_hidden() as f64).collect();
        let (hm, hs) = mean_std(&h);
        let _ = writeln!(s, "hidden units: {hm:.2} +- {hs:.2}");
        let w: Vec<f64> = self.runs.iter().map(|r| r.weights as f64).collect();
        let (wm, ws) = mean_std(&w);
        let _ = writeln!(s, "weights: {wm:.1} +- {ws:.1}");
        s
    }

    /// One row per run: `run_id,P,G,H,weights,eps_t,eps_g`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("run_id,P,G,H,weights,eps_t,eps_g\n");
        for r in &self.runs {
            let et = r.train_error.map_or_else(String::new, |e| e.to_string());
            let eg = r.test_error.map_or_else(String::new, |e| e.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.run_id,
                r.train_size,
                r.test_size,
                r.total_hidden(),
                r.weights,
                et,
                eg
            );
        }
        s
    }
}
