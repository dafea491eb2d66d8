//! FFT ring synthesis.

use std::collections::HashMap;
use std::sync::Arc;

use harmcrit_core::RingSynth;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// [`RingSynth`] backed by an inverse FFT. Plans are cached per ring length;
/// keep one instance per thread.
pub struct FftSynth {
    planner: FftPlanner<f64>,
    plans: HashMap<usize, Arc<dyn Fft<f64>>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Default for FftSynth {
    fn default() -> Self {
        Self::new()
    }
}

impl FftSynth {
    pub fn new() -> Self {
        FftSynth {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
            buf: Vec::new(),
            scratch: Vec::new(),
        }
    }
}

impl RingSynth for FftSynth {
    fn synth(&mut self, spec: &[Complex64], out: &mut [f64]) {
        let n = out.len();
        if n == 0 {
            return;
        }
        let plan = match self.plans.get(&n) {
            Some(p) => Arc::clone(p),
            None => {
                let p = self.planner.plan_fft_inverse(n);
                self.plans.insert(n, Arc::clone(&p));
                p
            }
        };
        self.buf.clear();
        self.buf.resize(n, Complex64::new(0.0, 0.0));
        for (m, &a) in spec.iter().enumerate() {
            self.buf[m % n] += a;
        }
        let need = plan.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        plan.process_with_scratch(&mut self.buf, &mut self.scratch[..need]);
        for (o, z) in out.iter_mut().zip(&self.buf) {
            *o = z.re;
        }
    }
}
