use super::graph::{Graph, Var};
use crate::error::{Error, Result};

/// Weights of one LSTM direction: input projection `wx` (in × 4h),
/// recurrent projection `wh` (h × 4h) and bias `b` (4h). Gate blocks are
/// ordered input, forget, candidate, output.
#[derive(Clone, Debug)]
pub struct LstmWeights {
    pub wx: Var,
    pub wh: Var,
    pub b: Var,
}

impl LstmWeights {
    pub fn hidden_size(&self) -> usize {
        self.wh.value().rows()
    }
}

/// One LSTM step for a batch of rows: `x` is B×in, `h` and `c` are B×h.
pub fn lstm_cell(g: &mut Graph, x: &Var, h: &Var, c: &Var, w: &LstmWeights) -> Result<(Var, Var)> {
    let hidden = w.hidden_size();
    if w.wx.value().cols() != 4 * hidden || w.b.value().len() != 4 * hidden {
        return Err(Error::invalid("LSTM weights do not have 4 gate blocks"));
    }
    if x.value().cols() != w.wx.value().rows() {
        return Err(Error::invalid(format!(
            "LSTM input width {} does not match weights {}",
            x.value().cols(),
            w.wx.value().rows()
        )));
    }
    let projected = g.matmul(x, &w.wx)?;
    let projected = g.add_row(&projected, &w.b)?;
    lstm_step(g, &projected, h, c, &w.wh)
}

/// LSTM step given the already projected (and biased) input `x·Wx + b`.
pub fn lstm_step(g: &mut Graph, projected: &Var, h: &Var, c: &Var, wh: &Var) -> Result<(Var, Var)> {
    let hidden = wh.value().rows();
    if h.value().cols() != hidden || c.value().cols() != hidden {
        return Err(Error::invalid(format!(
            "LSTM state width {} / {} does not match hidden size {}",
            h.value().cols(),
            c.value().cols(),
            hidden
        )));
    }
    if projected.value().rows() != h.value().rows() || projected.value().cols() != 4 * hidden {
        return Err(Error::invalid("LSTM gate pre-activations have the wrong shape"));
    }
    let recurrent = g.matmul(h, wh)?;
    let gates = g.add(projected, &recurrent)?;

    let i = g.slice_cols(&gates, 0, hidden)?;
    let f = g.slice_cols(&gates, hidden, hidden)?;
    let cand = g.slice_cols(&gates, 2 * hidden, hidden)?;
    let o = g.slice_cols(&gates, 3 * hidden, hidden)?;
    let i = g.sigmoid(&i);
    let f = g.sigmoid(&f);
    let cand = g.tanh(&cand);
    let o = g.sigmoid(&o);

    let kept = g.mul(&f, c)?;
    let written = g.mul(&i, &cand)?;
    let c_next = g.add(&kept, &written)?;
    let squashed = g.tanh(&c_next);
    let h_next = g.mul(&o, &squashed)?;
    Ok((h_next, c_next))
}
