use crate::driver::Problem;
use crate::error::Result;
use crate::rng::seeded;
use crate::run::{Ledger, Phase, RunResult};

/// Evaluates `budget` distinct uniform samples. Stops early only when a
/// finite space runs out of unseen points.
pub fn random_search(problem: &Problem, seed: u64) -> Result<RunResult> {
    let mut rng = seeded(seed);
    let mut ledger = Ledger::new(problem);
    while ledger.remaining() > 0 {
        let Some(cfg) = problem
            .space()
            .sample_novel(ledger.experience().configurations(), &mut rng)
        else {
            break;
        };
        ledger.evaluate(cfg, Phase::Random, 0)?;
    }
    ledger.finish()
}
