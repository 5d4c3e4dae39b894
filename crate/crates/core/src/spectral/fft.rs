use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Cached 1-D plans for one axis length.
pub(crate) struct Plan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan_cache() -> &'static Mutex<HashMap<usize, Arc<Plan>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn plan(n: usize) -> Arc<Plan> {
    let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

impl Plan {
    fn fft(&self, dir: Direction) -> &Arc<dyn Fft<f64>> {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        }
    }

    /// Unnormalized 3-D transform of an n³ cube stored x-fastest.
    pub(crate) fn transform3(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let fft = self.fft(dir).clone();
        let plane = n * n;
        let scratch_len = fft.get_inplace_scratch_len();

        // x lines are contiguous
        data.par_chunks_mut(plane).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, chunk| fft.process_with_scratch(chunk, scratch),
        );

        // y lines: transpose each z-plane, transform, transpose back
        data.par_chunks_mut(plane).for_each_init(
            || {
                (
                    vec![Complex64::default(); plane],
                    vec![Complex64::default(); scratch_len],
                )
            },
            |(buf, scratch), chunk| {
                transpose(chunk, buf, n);
                fft.process_with_scratch(buf, scratch);
                transpose(buf, chunk, n);
            },
        );

        // z lines: one x-z slab per y index
        let mut buf = vec![Complex64::default(); plane];
        let mut scratch = vec![Complex64::default(); scratch_len];
        for j in 0..n {
            for k in 0..n {
                let src = &data[k * plane + j * n..k * plane + j * n + n];
                for (i, v) in src.iter().enumerate() {
                    buf[i * n + k] = *v;
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                let dst = &mut data[k * plane + j * n..k * plane + j * n + n];
                for (i, v) in dst.iter_mut().enumerate() {
                    *v = buf[i * n + k];
                }
            }
        }
    }
}

/// `dst[i * n + j] = src[j * n + i]` for an n x n block.
fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 8;
    for jb in (0..n).step_by(B) {
        for ib in (0..n).step_by(B) {
            for j in jb..(jb + B).min(n) {
                for i in ib..(ib + B).min(n) {
                    dst[i * n + j] = src[j * n + i];
                }
            }
        }
    }
}
