//! Every terminating interleaving of a corpus entry, and of its
//! decompositions, ends in the same state.

use hodecomp::corpus::entries;
use hodecomp::optimize::{decompose_with, Optimization};
use hodecomp::semantics::explore;

const FUEL: usize = 60;
const MAX_STATES: usize = 200_000;

#[test]
fn terminating_runs_agree_on_the_final_state() {
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(|| {
            for e in entries().into_iter().filter(|e| e.has_process()) {
                let l = e.load().unwrap();
                let x = explore(&l.process, &l.frees, FUEL, MAX_STATES);
                assert!(x.terminals.len() <= 1, "{}: {:?}", e.name, x.terminals);
                for opt in Optimization::ALL {
                    let d = decompose_with(opt, &l.process, &l.frees).unwrap();
                    let y = explore(&d.term, &d.frees, FUEL, MAX_STATES);
                    assert!(y.terminals.len() <= 1, "{} ({opt}): {:?}", e.name, y.terminals);
                    if e.terminates {
                        assert_eq!(y.terminals, x.terminals, "{} ({opt})", e.name);
                    }
                }
            }
        })
        .unwrap()
        .join()
        .unwrap();
}
