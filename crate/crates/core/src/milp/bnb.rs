//! Best-bound branch and bound with depth-first dives and reliability
//! branching.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{LinearProgram, LpOutcome, MipLimits, MipSolution, MixedIntegerProgram, Sense, Status, INT_TOL};
use crate::error::{Error, Result};

/// A solved LP relaxation that can be re-solved with one more variable fixed.
pub(crate) trait Relaxation: Sized + Clone {
    fn root(lp: &LinearProgram) -> Result<std::result::Result<Self, LpOutcome>>;
    fn objective(&self) -> f64;
    fn values(&self) -> Vec<f64>;
    /// `None` when the fixing makes the relaxation infeasible.
    fn fix(self, var: usize, value: f64) -> Result<Option<Self>>;
}

/// Open nodes that keep a solved relaxation; the rest replay fixings from
/// the root.
const STORED_STATES: usize = 48;
/// Observations per direction before a pseudocost is trusted.
const RELIABILITY: u32 = 4;
/// Strong-branching candidates evaluated per node.
const STRONG_CANDIDATES: usize = 8;
const MIN_GAIN: f64 = 1e-6;

struct Node<R> {
    /// Lower bound in minimization terms.
    bound: f64,
    seq: u64,
    fixings: Vec<(usize, f64)>,
    state: Option<R>,
    /// `(var, direction, parent objective, distance moved)` for the
    /// pseudocost update once the node is solved.
    origin: Option<(usize, usize, f64, f64)>,
}

impl<R> PartialEq for Node<R> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<R> Eq for Node<R> {}

impl<R> PartialOrd for Node<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<R> Ord for Node<R> {
    /// Reversed so the heap pops the smallest bound, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Per-unit objective degradation, indexed `[down, up]`.
struct Pseudocosts {
    sum: Vec<[f64; 2]>,
    count: Vec<[u32; 2]>,
    total: [f64; 2],
    total_count: [u32; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Pseudocosts {
            sum: vec![[0.0; 2]; n],
            count: vec![[0; 2]; n],
            total: [0.0; 2],
            total_count: [0; 2],
        }
    }

    fn record(&mut self, var: usize, dir: usize, gain: f64, dist: f64) {
        if !gain.is_finite() || dist <= INT_TOL {
            return;
        }
        let per_unit = gain.max(0.0) / dist;
        self.sum[var][dir] += per_unit;
        self.count[var][dir] += 1;
        self.total[dir] += per_unit;
        self.total_count[dir] += 1;
    }

    fn reliable(&self, var: usize) -> bool {
        self.count[var][0] >= RELIABILITY && self.count[var][1] >= RELIABILITY
    }

    fn estimate(&self, var: usize, dir: usize) -> f64 {
        if self.count[var][dir] > 0 {
            self.sum[var][dir] / self.count[var][dir] as f64
        } else if self.total_count[dir] > 0 {
            self.total[dir] / self.total_count[dir] as f64
        } else {
            1.0
        }
    }
}

fn score(down: f64, up: f64) -> f64 {
    down.max(MIN_GAIN) * up.max(MIN_GAIN)
}

fn fractional(v: f64) -> f64 {
    (v - v.floor()).min(v.ceil() - v)
}

/// Fractional integral variables in the highest priority tier present.
fn candidates(mip: &MixedIntegerProgram, values: &[f64]) -> Vec<usize> {
    let mut top = None;
    let mut out = Vec::new();
    for (j, &v) in values.iter().enumerate() {
        if !mip.integral[j] || fractional(v) <= INT_TOL {
            continue;
        }
        let tier = mip.priority[j];
        match top {
            Some(t) if tier < t => continue,
            Some(t) if tier == t => out.push(j),
            _ => {
                top = Some(tier);
                out.clear();
                out.push(j);
            }
        }
    }
    out
}

enum Decision<R> {
    Prune,
    /// One side of a candidate was ruled out; continue on the other side.
    Tighten(R, (usize, f64)),
    Branch {
        var: usize,
        /// Solved children in `[down, up]` order when strong branching ran.
        children: Option<[Option<R>; 2]>,
    },
}

struct Search<'a> {
    limits: &'a MipLimits,
    start: Instant,
    sign: f64,
    pseudo: Pseudocosts,
}

impl Search<'_> {
    fn out_of_time(&self) -> bool {
        self.limits.time.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn obj<R: Relaxation>(&self, r: &Option<R>) -> f64 {
        r.as_ref().map_or(f64::INFINITY, |r| self.sign * r.objective())
    }

    fn decide<R: Relaxation>(&mut self, relax: &R, values: &[f64], cands: &[usize], cutoff: f64) -> Result<Decision<R>> {
        let obj = self.sign * relax.objective();
        let mut unreliable: Vec<usize> = cands.iter().copied().filter(|&j| !self.pseudo.reliable(j)).collect();
        unreliable.sort_by(|&a, &b| fractional(values[b]).total_cmp(&fractional(values[a])).then(a.cmp(&b)));
        unreliable.truncate(STRONG_CANDIDATES);

        let mut best: Option<(f64, usize, Option<[Option<R>; 2]>)> = None;
        for &j in cands {
            if unreliable.contains(&j) {
                continue;
            }
            let f = values[j] - values[j].floor();
            let s = score(self.pseudo.estimate(j, 0) * f, self.pseudo.estimate(j, 1) * (1.0 - f));
            if best.as_ref().is_none_or(|(bs, bj, _)| s > *bs || (s == *bs && j < *bj)) {
                best = Some((s, j, None));
            }
        }
        for &j in &unreliable {
            if self.out_of_time() {
                break;
            }
            let f = values[j] - values[j].floor();
            let down = relax.clone().fix(j, 0.0)?;
            let up = relax.clone().fix(j, 1.0)?;
            let (od, ou) = (self.obj(&down), self.obj(&up));
            self.pseudo.record(j, 0, od - obj, f);
            self.pseudo.record(j, 1, ou - obj, 1.0 - f);
            let dead_down = od >= cutoff;
            let dead_up = ou >= cutoff;
            match (dead_down, dead_up) {
                (true, true) => return Ok(Decision::Prune),
                (true, false) => return Ok(Decision::Tighten(up.expect("live child is solved"), (j, 1.0))),
                (false, true) => return Ok(Decision::Tighten(down.expect("live child is solved"), (j, 0.0))),
                (false, false) => {}
            }
            let s = score(od - obj, ou - obj);
            if best.as_ref().is_none_or(|(bs, bj, _)| s > *bs || (s == *bs && j < *bj)) {
                best = Some((s, j, Some([down, up])));
            }
        }
        let (_, var, children) = best.expect("at least one candidate");
        Ok(Decision::Branch { var, children })
    }
}

pub(crate) fn branch_and_bound<R: Relaxation>(
    mip: &MixedIntegerProgram,
    limits: &MipLimits,
) -> Result<MipSolution> {
    let start = Instant::now();
    let n = mip.num_vars();
    let sign = match mip.lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let finish = |status: Status,
                  incumbent: Option<(f64, Vec<f64>)>,
                  bound: f64,
                  nodes: usize|
     -> MipSolution {
        let (objective, values) = match incumbent {
            Some((obj, vals)) => (sign * obj, vals),
            None => (f64::NAN, vec![0.0; n]),
        };
        let gap = if objective.is_nan() {
            f64::INFINITY
        } else {
            (objective - sign * bound).abs()
        };
        MipSolution {
            status,
            objective,
            values,
            bound: sign * bound,
            gap,
            nodes,
            wall_seconds: start.elapsed().as_secs_f64(),
        }
    };

    let root = match R::root(&mip.lp)? {
        Ok(r) => r,
        Err(LpOutcome::Infeasible) => return Ok(finish(Status::Infeasible, None, f64::NAN, 1)),
        Err(_) => return Ok(finish(Status::Unbounded, None, f64::NEG_INFINITY, 1)),
    };

    let mut search = Search {
        limits,
        start,
        sign,
        pseudo: Pseudocosts::new(n),
    };
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap: BinaryHeap<Node<R>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 0usize;
    let mut stored = 0usize;
    // (relaxation, fixings on the path, bound) currently being dived on
    let mut dive: Option<(R, Vec<(usize, f64)>)> = Some((root.clone(), Vec::new()));

    loop {
        let best_open = heap.peek().map_or(f64::INFINITY, |nd| nd.bound);
        let dive_bound = dive.as_ref().map_or(f64::INFINITY, |(r, _)| sign * r.objective());
        let global_bound = best_open.min(dive_bound);
        let inc_obj = incumbent.as_ref().map_or(f64::INFINITY, |(o, _)| *o);

        if dive.is_none() && (heap.is_empty() || best_open >= inc_obj - limits.abs_gap) {
            let bound = if heap.is_empty() { inc_obj } else { best_open.min(inc_obj) };
            return Ok(match incumbent {
                Some(_) => finish(Status::Optimal, incumbent, bound, nodes),
                None => finish(Status::Infeasible, None, f64::NAN, nodes.max(1)),
            });
        }
        let out_of_nodes = limits.nodes.is_some_and(|cap| nodes >= cap);
        if search.out_of_time() || out_of_nodes {
            return Ok(finish(Status::LimitReached, incumbent, global_bound.min(inc_obj), nodes));
        }

        let (relax, mut fixings) = match dive.take() {
            Some(d) => d,
            None => {
                let node = heap.pop().expect("heap checked non-empty");
                let relax = match node.state {
                    Some(r) => {
                        stored -= 1;
                        Some(r)
                    }
                    None => {
                        let mut r = Some(root.clone());
                        for &(v, val) in &node.fixings {
                            r = match r {
                                Some(state) => state.fix(v, val)?,
                                None => None,
                            };
                        }
                        r
                    }
                };
                let Some(relax) = relax else {
                    nodes += 1;
                    continue;
                };
                if let Some((var, dir, parent, dist)) = node.origin {
                    search.pseudo.record(var, dir, sign * relax.objective() - parent, dist);
                }
                (relax, node.fixings)
            }
        };
        nodes += 1;

        // strong branching may tighten the node several times before it branches
        let mut current = Some(relax);
        let (var, children, values) = loop {
            let relax = current.as_ref().expect("node relaxation is present");
            let obj = sign * relax.objective();
            let inc_obj = incumbent.as_ref().map_or(f64::INFINITY, |(o, _)| *o);
            if obj >= inc_obj - limits.abs_gap {
                break (None, None, Vec::new());
            }
            let values = relax.values();
            let cands = candidates(mip, &values);
            if cands.is_empty() {
                let mut vals = values;
                for (j, v) in vals.iter_mut().enumerate() {
                    if mip.integral[j] {
                        *v = v.round();
                    }
                }
                incumbent = Some((obj, vals));
                break (None, None, Vec::new());
            }
            if let Some(&bad) = cands.iter().find(|&&j| !values[j].is_finite()) {
                return Err(Error::Numerical(format!(
                    "relaxation value of {} is not finite",
                    mip.lp.variables[bad].name
                )));
            }
            match search.decide(relax, &values, &cands, inc_obj - limits.abs_gap)? {
                Decision::Prune => break (None, None, Vec::new()),
                Decision::Tighten(next, fixing) => {
                    current = Some(next);
                    fixings.push(fixing);
                }
                Decision::Branch { var, children } => break (Some(var), children, values),
            }
        };
        let Some(var) = var else { continue };
        let relax = current.expect("branching node keeps its relaxation");

        let obj = sign * relax.objective();
        let f = values[var] - values[var].floor();
        let dist = [f, 1.0 - f];
        let solved = children.is_some();
        let [down, up] = children.unwrap_or_default();
        // dive towards the nearer integer, or the better child when both are known
        let first_dir = if solved {
            if search.obj(&up) < search.obj(&down) { 1 } else { 0 }
        } else if f >= 0.5 {
            1
        } else {
            0
        };
        let mut states = [down, up];
        let second_dir = 1 - first_dir;

        let mut other = fixings.clone();
        other.push((var, second_dir as f64));
        let (state, bound, origin) = match states[second_dir].take() {
            Some(s) => {
                let bound = sign * s.objective();
                (Some(s), bound, None)
            }
            None if solved => (None, f64::INFINITY, None),
            None if stored < STORED_STATES => match relax.clone().fix(var, second_dir as f64)? {
                Some(s) => {
                    let bound = sign * s.objective();
                    search.pseudo.record(var, second_dir, bound - obj, dist[second_dir]);
                    (Some(s), bound, None)
                }
                None => (None, f64::INFINITY, None),
            },
            None => (None, obj, Some((var, second_dir, obj, dist[second_dir]))),
        };
        if bound.is_finite() {
            let state = state.filter(|_| stored < STORED_STATES);
            if state.is_some() {
                stored += 1;
            }
            seq += 1;
            heap.push(Node { bound, seq, fixings: other, state, origin });
        }

        let mut path = fixings;
        path.push((var, first_dir as f64));
        let child = match states[first_dir].take() {
            Some(c) => Some(c),
            None if solved => None,
            None => {
                let c = relax.fix(var, first_dir as f64)?;
                if let Some(c) = &c {
                    search.pseudo.record(var, first_dir, sign * c.objective() - obj, dist[first_dir]);
                }
                c
            }
        };
        if let Some(child) = child {
            dive = Some((child, path));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{solve_mip, LpBackend, Relation};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bip(rng: &mut ChaCha8Rng) -> MixedIntegerProgram {
        let n = rng.gen_range(3..=12);
        let sense = if rng.gen_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
        let mut mip = MixedIntegerProgram::new(sense);
        for j in 0..n {
            mip.add_binary(format!("x{j}"), rng.gen_range(-5..=9) as f64, rng.gen_range(0..2));
        }
        let extra = rng.gen_range(0..=2);
        for j in 0..extra {
            mip.add_continuous(format!("c{j}"), 0.0, 3.0, rng.gen_range(-2..=2) as f64);
        }
        for i in 0..rng.gen_range(1..=4) {
            let mut coeffs = Vec::new();
            for j in 0..n + extra {
                if rng.gen_bool(0.7) {
                    coeffs.push((j, rng.gen_range(-3..=6) as f64));
                }
            }
            let rel = if rng.gen_bool(0.7) { Relation::Le } else { Relation::Ge };
            let rhs = match rel {
                Relation::Le => rng.gen_range(2..=15) as f64,
                _ => rng.gen_range(-4..=4) as f64,
            };
            mip.add_constraint(format!("r{i}"), coeffs, rel, rhs);
        }
        mip
    }

    /// Enumerates every binary assignment, solving the continuous remainder as an LP.
    fn enumerate(mip: &MixedIntegerProgram) -> Option<f64> {
        let bins: Vec<usize> = (0..mip.num_vars()).filter(|&j| mip.integral[j]).collect();
        let mut best: Option<f64> = None;
        for mask in 0..1u32 << bins.len() {
            let mut lp = mip.lp.clone();
            for (k, &j) in bins.iter().enumerate() {
                let v = (mask >> k & 1) as f64;
                lp.variables[j].lower = v;
                lp.variables[j].upper = v;
            }
            let sol = super::super::solve_lp_with(&lp, LpBackend::Dense).unwrap();
            if sol.status == Status::Optimal {
                best = Some(match (best, mip.lp.sense) {
                    (None, _) => sol.objective,
                    (Some(b), Sense::Minimize) => b.min(sol.objective),
                    (Some(b), Sense::Maximize) => b.max(sol.objective),
                });
            }
        }
        best
    }

    #[test]
    fn random_binary_programs_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..60 {
            let mip = random_bip(&mut rng);
            let want = enumerate(&mip);
            for backend in [LpBackend::Dense, LpBackend::Sparse] {
                let limits = MipLimits { backend, ..Default::default() };
                let got = solve_mip(&mip, &limits).unwrap();
                match want {
                    Some(w) => {
                        assert_eq!(got.status, Status::Optimal, "case {case} {backend:?}");
                        assert!((got.objective - w).abs() < 1e-6, "case {case} {backend:?}: {} vs {w}", got.objective);
                        assert!(mip.lp.max_violation(&got.values) < 1e-6);
                    }
                    None => assert_eq!(got.status, Status::Infeasible, "case {case} {backend:?}"),
                }
            }
        }
    }

    #[test]
    fn deterministic_reruns() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let mip = random_bip(&mut rng);
            let a = solve_mip(&mip, &MipLimits::default()).unwrap();
            let b = solve_mip(&mip, &MipLimits::default()).unwrap();
            assert_eq!((a.values, a.nodes), (b.values, b.nodes));
        }
    }
}

