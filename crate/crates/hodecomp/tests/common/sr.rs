//! Subject reduction over the reachable states of a process: every state
//! must typecheck under a session environment obtained from the previous
//! one by no change or by one `env_step`.

use std::collections::{HashSet, VecDeque};

use hodecomp::ast::{free_names, Name, Process};
use hodecomp::semantics::{Config, Redex, Rule};
use hodecomp::typeck::{check_process, Envs};
use hodecomp::types::{dual, env_step, stype_eq, CType, SType};

/// Session environment tracked along a run.
type Delta = Vec<(Name, SType)>;

/// Result of exploring one process.
#[derive(Debug, Default)]
pub struct Report {
    pub states: usize,
    pub truncated: bool,
    /// Descriptions of the states or transitions that failed.
    pub failures: Vec<String>,
}

fn delta_eq(a: &Delta, b: &Delta) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((n, s), (m, t))| n == m && stype_eq(s, t))
}

/// Adds the session endpoints of restrictions not yet in `delta`.
fn extend(delta: &mut Delta, c: &Config) {
    for (n, ty) in &c.restricted {
        if let CType::Session(s) = ty {
            if !delta.iter().any(|(m, _)| m == n) {
                delta.push((n.clone(), s.clone()));
                delta.push((n.co(), dual(s)));
            }
        }
    }
}

/// The environment after `r` fires in `c`.
fn advance(delta: &Delta, c: &Config, r: &Redex) -> Result<Delta, String> {
    let Some(subj) = &r.subject else { return Ok(delta.clone()) };
    let Some(i) = delta.iter().position(|(m, _)| m == subj) else {
        // A shared channel: the session environment is unchanged.
        return Ok(delta.clone());
    };
    let j = delta
        .iter()
        .position(|(m, _)| *m == subj.co())
        .ok_or_else(|| format!("no co-endpoint of {subj} in the environment"))?;
    let (a, b) = (delta[i].1.unfold_all(), delta[j].1.unfold_all());
    let (na, nb) = match (r.rule, &a, &b) {
        (Rule::Pass, SType::Out(_, ka), SType::In(_, kb)) => ((**ka).clone(), (**kb).clone()),
        (Rule::Sel, SType::Sel(ma), SType::Bra(mb)) => {
            let Process::Sel { label, .. } = &c.threads[r.threads[0]] else {
                return Err("selection redex without a selection".into());
            };
            let pick = |m: &Vec<(_, SType)>| m.iter().find(|(l, _)| l == label).map(|(_, k)| k.clone());
            match (pick(ma), pick(mb)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(format!("label {label} not in the types of {subj}")),
            }
        }
        _ => return Err(format!("{} on {subj} against types {a} and {b}", r.rule)),
    };
    let mut next = delta.clone();
    next[i].1 = na;
    next[j].1 = nb;
    if !env_step(delta).iter().any(|d| delta_eq(d, &next)) {
        return Err(format!("the environment after {} on {subj} is not an env_step successor", r.rule));
    }
    Ok(next)
}

fn typecheck(delta: &Delta, frees: &[(Name, CType)], c: &Config) -> Result<(), String> {
    let mut envs = Envs::new();
    for (n, t) in frees.iter().chain(&c.restricted) {
        if !matches!(t, CType::Session(_)) {
            envs.add_name(n, t);
        }
    }
    // Endpoints that no longer occur must have finished; their
    // restrictions are gone, so their names may be reused by binders.
    let body = Process::par_all(c.threads.clone());
    let live = free_names(&body);
    for (n, s) in delta {
        if live.contains(n) {
            envs.delta.push((n.clone(), s.clone()));
        } else if !s.unfold_all().is_end() {
            return Err(format!("`{n}` no longer occurs but its type is {s}"));
        }
    }
    let r = check_process(&envs, &body);
    if r.ok {
        Ok(())
    } else {
        Err(r.message())
    }
}

/// Explores all interleavings of `p` up to `fuel` steps deep, visiting at
/// most `max_states` distinct states, and typechecks each one.
pub fn check(p: &Process, frees: &[(Name, CType)], fuel: usize, max_states: usize) -> Report {
    let start = Config::new(p, frees);
    let mut delta: Delta = frees.iter().filter_map(|(n, t)| t.as_session().map(|s| (n.clone(), s.clone()))).collect();
    extend(&mut delta, &start);
    let mut rep = Report::default();
    let mut seen = HashSet::from([start.canonical()]);
    let mut queue = VecDeque::from([(start, delta, 0usize)]);
    while let Some((c, delta, depth)) = queue.pop_front() {
        rep.states += 1;
        if let Err(e) = typecheck(&delta, frees, &c) {
            rep.failures.push(format!("state {} at depth {depth}: {e}", c.to_process()));
            continue;
        }
        let rs = c.redexes();
        if !rs.is_empty() && depth >= fuel {
            rep.truncated = true;
            continue;
        }
        for r in &rs {
            let n = match c.fire(r) {
                Ok(n) => n,
                Err(e) => {
                    rep.failures.push(e.to_string());
                    continue;
                }
            };
            if !seen.insert(n.canonical()) {
                continue;
            }
            if seen.len() > max_states {
                rep.truncated = true;
                continue;
            }
            match advance(&delta, &c, r) {
                Ok(mut d) => {
                    extend(&mut d, &n);
                    queue.push_back((n, d, depth + 1));
                }
                Err(e) => rep.failures.push(format!("from {}: {e}", c.to_process())),
            }
        }
    }
    rep
}
