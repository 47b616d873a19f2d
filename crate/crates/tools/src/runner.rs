//! Worker-pool task runner.
//!
//! Tasks are claimed from a shared atomic counter and each result lands in
//! its own slot, so the assembled output is identical to a sequential run
//! no matter how the scheduler interleaves workers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sphera_core::eval::TaskRunner;

pub struct ThreadedRunner {
    pub workers: usize,
}

impl ThreadedRunner {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
        }
    }
}

impl TaskRunner for ThreadedRunner {
    fn run<T: Send>(&self, n_tasks: usize, task: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        if self.workers == 1 || n_tasks <= 1 {
            return (0..n_tasks).map(task).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<T>>> = (0..n_tasks).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..self.workers.min(n_tasks) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n_tasks {
                        break;
                    }
                    let result = task(i);
                    *slots[i].lock().unwrap() = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| {
                slot.into_inner()
                    .unwrap()
                    .expect("every task index was claimed exactly once")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sphera_core::eval::SequentialRunner;

    #[test]
    fn threaded_matches_sequential() {
        let task = |i: usize| -> u64 {
            // make the work uneven so threads interleave
            let mut acc = i as u64;
            for k in 0..(i % 7) * 1000 {
                acc = acc.wrapping_mul(6364136223846793005).wrapping_add(k as u64);
            }
            acc
        };
        let sequential = SequentialRunner.run(40, &task);
        for workers in [1, 2, 8] {
            let threaded = ThreadedRunner::new(workers).run(40, &task);
            assert_eq!(sequential, threaded, "workers = {workers}");
        }
    }
}
