use std::io::{self, Write};

use super::State;

/// States on a uniform time grid plus per-step convergence diagnostics.
///
/// Entry 0 of every diagnostic vector describes the initial state and is
/// zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    /// Newton updates performed for each step.
    pub iterations: Vec<usize>,
    /// Jacobian evaluations (AD passes) for each step.
    pub jacobian_evaluations: Vec<usize>,
    /// `‖R‖₂` at the accepted iterate of each step.
    pub residual_norms: Vec<f64>,
}

impl Trajectory {
    pub fn starting_at(initial: State) -> Self {
        Trajectory {
            states: vec![initial],
            iterations: vec![0],
            jacobian_evaluations: vec![0],
            residual_norms: vec![0.0],
        }
    }

    pub fn push(
        &mut self,
        state: State,
        iterations: usize,
        jacobian_evaluations: usize,
        residual: f64,
    ) {
        self.states.push(state);
        self.iterations.push(iterations);
        self.jacobian_evaluations.push(jacobian_evaluations);
        self.residual_norms.push(residual);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_dof(&self) -> usize {
        self.states.first().map_or(0, State::n_dof)
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn displacement(&self, dof: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.x[dof]).collect()
    }

    pub fn velocity(&self, dof: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.v[dof]).collect()
    }

    pub fn acceleration(&self, dof: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.a[dof]).collect()
    }

    pub fn csv_header(n_dof: usize) -> String {
        let mut cols = vec!["t".to_string()];
        for prefix in ["x", "v", "a"] {
            cols.extend((0..n_dof).map(|i| format!("{prefix}_{i}")));
        }
        cols.join(",")
    }

    /// Writes `t, x_0.., v_0.., a_0..` rows with shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::csv_header(self.n_dof()))?;
        let mut line = String::new();
        for s in &self.states {
            line.clear();
            line.push_str(&format_float(s.t));
            for v in s.x.iter().chain(&s.v).chain(&s.a) {
                line.push(',');
                line.push_str(&format_float(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}
