//! Random closed well-typed processes, built type-first: a session type is
//! drawn, then a process for each endpoint that follows it.

use hodecomp::ast::{sym, Linearity, Lit, Name, Process, Value, Var};
use hodecomp::types::{dual, BaseTy, CType, SType, VType};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Bound on the nesting of prefixes, counting abstraction bodies.
pub const MAX_DEPTH: usize = 5;

pub struct Gen {
    rng: StdRng,
    next: u32,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: StdRng::seed_from_u64(seed), next: 0 }
    }

    fn fresh(&mut self, stem: &str) -> String {
        self.next += 1;
        format!("{stem}{}", self.next)
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn base(&mut self) -> BaseTy {
        if self.coin(0.5) {
            BaseTy::Int
        } else {
            BaseTy::Bool
        }
    }

    fn lit(&mut self, b: BaseTy) -> Value {
        match b {
            BaseTy::Int => Value::Lit(Lit::Int(self.rng.gen_range(0..100))),
            BaseTy::Bool => Value::Lit(Lit::Bool(self.coin(0.5))),
        }
    }

    /// Payload types of one prefix whose continuation may nest `depth` more.
    fn payload(&mut self, depth: usize) -> Vec<VType> {
        if depth >= 1 && self.coin(0.35) {
            let c = CType::Session(self.session(depth.min(2)));
            return vec![if self.coin(0.7) { VType::Lin(vec![c]) } else { VType::Sh(vec![c]) }];
        }
        let n = if self.coin(0.2) { 2 } else { 1 };
        (0..n).map(|_| VType::Base(self.base())).collect()
    }

    /// A finite session type with at most `len` prefixes on every path.
    pub fn session(&mut self, len: usize) -> SType {
        if len == 0 || self.coin(0.15) {
            return SType::End;
        }
        match self.rng.gen_range(0..10) {
            0 | 1 => {
                let cases = vec![(sym("l"), self.session(len - 1)), (sym("r"), self.session(len - 1))];
                if self.coin(0.5) {
                    SType::Sel(cases)
                } else {
                    SType::Bra(cases)
                }
            }
            k => {
                let u = self.payload(len - 1);
                let s = Box::new(self.session(len - 1));
                if k % 2 == 0 {
                    SType::Out(u, s)
                } else {
                    SType::In(u, s)
                }
            }
        }
    }

    /// A tail-recursive type `μt.B` whose body is one or two base prefixes.
    pub fn recursive(&mut self) -> SType {
        let t = sym("t");
        let mut body = SType::TVar(t.clone());
        for _ in 0..self.rng.gen_range(1..=2) {
            let u = vec![VType::Base(self.base())];
            body = if self.coin(0.5) { SType::Out(u, Box::new(body)) } else { SType::In(u, Box::new(body)) };
        }
        SType::Rec(t, Box::new(body))
    }

    /// Drives `n : t`, a tail-recursive type, forever: a shared loop body
    /// runs one iteration on its first argument, then receives itself on
    /// its second argument and calls itself on a fresh channel.
    ///
    /// `νs (V (n, s) | s̄!⟨V⟩.0)` with
    /// `V = λ(x, y). y?(z). ⟨one iteration on x⟩. νr (z (x, r) | r̄!⟨z⟩.0)`.
    fn forever(&mut self, n: &Name, t: &SType) -> Process {
        let tv = sym("t");
        let x = Name::new(&self.fresh("xa"));
        let y = Name::new(&self.fresh("y"));
        let z = Var::new(&self.fresh("z"));
        let r = Name::new(&self.fresh("r"));
        let s = Name::new(&self.fresh("s"));
        let plain_t = CType::Session(t.clone());
        let loop_ty = SType::Rec(
            tv.clone(),
            Box::new(SType::In(
                vec![VType::Sh(vec![plain_t.clone(), CType::Session(SType::TVar(tv))])],
                Box::new(SType::End),
            )),
        );
        let SType::Rec(_, body) = t else { unreachable!("recursive() builds a μ-type") };
        let again = Process::res(
            r.clone(),
            CType::Session(loop_ty.clone()),
            Process::par(
                Process::app(Value::Var(z.clone()), vec![Value::Name(x.clone()), Value::Name(r.clone())]),
                Process::out(r.co(), vec![Value::Var(z.clone())], Process::Inact),
            ),
        );
        let iteration = self.iterate(&x, body, again);
        let v = Value::abs(
            vec![(x, plain_t), (y.clone(), CType::Session(loop_ty.clone()))],
            Linearity::Sh,
            Process::inp(y, vec![z], iteration),
        );
        Process::res(
            s.clone(),
            CType::Session(loop_ty),
            Process::par(
                Process::app(v.clone(), vec![Value::Name(n.clone()), Value::Name(s.clone())]),
                Process::out(s.co(), vec![v], Process::Inact),
            ),
        )
    }

    /// One pass over the base prefixes of a recursion body on `x`, then `then`.
    fn iterate(&mut self, x: &Name, body: &SType, then: Process) -> Process {
        match body {
            SType::Out(us, k) => {
                let payload = us
                    .iter()
                    .map(|u| match u {
                        VType::Base(b) => self.lit(*b),
                        _ => unreachable!("recursion bodies carry base values"),
                    })
                    .collect();
                let cont = self.iterate(x, k, then);
                Process::out(x.clone(), payload, cont)
            }
            SType::In(us, k) => {
                let xs = us.iter().map(|_| Var::new(&self.fresh("m"))).collect();
                let cont = self.iterate(x, k, then);
                Process::inp(x.clone(), xs, cont)
            }
            _ => then,
        }
    }

    fn value(&mut self, u: &VType, depth: usize) -> Value {
        match u {
            VType::Base(b) => self.lit(*b),
            VType::Lin(cs) | VType::Sh(cs) => {
                let lin = if matches!(u, VType::Lin(_)) { Linearity::Lin } else { Linearity::Sh };
                let CType::Session(s) = &cs[0] else { unreachable!("generated abstractions take one session") };
                let y = Name::new(&self.fresh("y"));
                let body = self.follow(&y, s, depth.saturating_sub(1));
                Value::abs(vec![(y, cs[0].clone())], lin, body)
            }
        }
    }

    /// A use of the received abstraction `x`: apply it to a fresh session
    /// whose other endpoint is driven by a new thread.
    fn use_var(&mut self, x: &Var, u: &VType, depth: usize) -> Option<Process> {
        let (VType::Lin(cs) | VType::Sh(cs)) = u else { return None };
        if matches!(u, VType::Sh(_)) && self.coin(0.3) {
            return None;
        }
        let CType::Session(s) = &cs[0] else { return None };
        let r = Name::new(&self.fresh("r"));
        let other = self.follow(&r.co(), &dual(s), depth.saturating_sub(1));
        Some(Process::res(
            r.clone(),
            cs[0].clone(),
            Process::par(Process::app(Value::Var(x.clone()), vec![Value::Name(r)]), other),
        ))
    }

    /// A process that uses `n` according to `s`, nesting at most `depth`
    /// more prefixes beyond the ones `s` requires.
    pub fn follow(&mut self, n: &Name, s: &SType, depth: usize) -> Process {
        match s {
            SType::End | SType::TVar(_) => {
                if depth >= 2 && self.coin(0.2) {
                    self.closed(depth - 1)
                } else {
                    Process::Inact
                }
            }
            SType::Rec(..) => self.follow(n, &s.unfold(), depth),
            SType::Out(us, k) => {
                let d = depth.saturating_sub(1);
                let payload = us.iter().map(|u| self.value(u, d)).collect();
                Process::out(n.clone(), payload, self.follow(n, k, d))
            }
            SType::In(us, k) => {
                let d = depth.saturating_sub(1);
                let xs: Vec<Var> = us.iter().map(|_| Var::new(&self.fresh("x"))).collect();
                let mut parts = vec![self.follow(n, k, d)];
                for (x, u) in xs.iter().zip(us) {
                    parts.extend(self.use_var(x, u, d));
                }
                Process::inp(n.clone(), xs, Process::par_all(parts))
            }
            SType::Sel(cases) => {
                let i = self.rng.gen_range(0..cases.len());
                let (l, k) = &cases[i];
                Process::Sel {
                    subj: n.clone(),
                    label: l.clone(),
                    cont: Box::new(self.follow(n, k, depth.saturating_sub(1))),
                }
            }
            SType::Bra(cases) => Process::Bra {
                subj: n.clone(),
                cases: cases.iter().map(|(l, k)| (l.clone(), self.follow(n, k, depth.saturating_sub(1)))).collect(),
            },
        }
    }

    /// A closed process of nesting depth at most `depth`.
    pub fn closed(&mut self, depth: usize) -> Process {
        if depth == 0 {
            return Process::Inact;
        }
        match self.rng.gen_range(0..11) {
            0 => Process::Inact,
            10 => {
                // A tail-recursive session whose endpoints each run forever.
                let t = self.recursive();
                let a = Name::new(&self.fresh("a"));
                let left = self.forever(&a, &t);
                let right = self.forever(&a.co(), &dual(&t));
                Process::res(a, CType::Session(t), Process::par(left, right))
            }
            1 => Process::par(self.closed(depth), self.closed(depth)),
            2 => {
                // A shared channel with one sender and one receiver.
                let k = Name::new(&self.fresh("k"));
                let u = self.payload(depth - 1).swap_remove(0);
                let v = self.value(&u, depth - 1);
                let x = Var::new(&self.fresh("x"));
                let mut recv = vec![self.closed(depth - 1)];
                recv.extend(self.use_var(&x, &u, depth - 1));
                let send = Process::out(k.clone(), vec![v], self.closed(depth - 1));
                Process::res(
                    k.clone(),
                    CType::Chan(u),
                    Process::par(send, Process::inp(k, vec![x], Process::par_all(recv))),
                )
            }
            3 => {
                // An abstraction applied directly.
                let s = self.session(depth - 1);
                let r = Name::new(&self.fresh("r"));
                let f = self.value(&VType::Lin(vec![CType::Session(s.clone())]), depth);
                let other = self.follow(&r.co(), &dual(&s), depth - 1);
                Process::res(r.clone(), CType::Session(s), Process::par(Process::app(f, vec![Value::Name(r)]), other))
            }
            _ => {
                let s = self.session(depth);
                let n = Name::new(&self.fresh("s"));
                let a = self.follow(&n, &s, depth);
                let b = self.follow(&n.co(), &dual(&s), depth);
                Process::res(n, CType::Session(s), Process::par(a, b))
            }
        }
    }
}

/// The closed process drawn from `seed`.
pub fn closed_process(seed: u64) -> Process {
    Gen::new(seed).closed(MAX_DEPTH)
}

/// Nesting depth of prefixes, counting the bodies of sent or applied
/// abstractions.
pub fn prefix_depth(p: &Process) -> usize {
    match p {
        Process::Inact => 0,
        Process::Out { payload, cont, .. } => {
            1 + payload.iter().map(value_depth).max().unwrap_or(0).max(prefix_depth(cont))
        }
        Process::In { cont, .. } | Process::Sel { cont, .. } => 1 + prefix_depth(cont),
        Process::Bra { cases, .. } => 1 + cases.iter().map(|(_, q)| prefix_depth(q)).max().unwrap_or(0),
        Process::App { fun, args } => args.iter().chain([fun]).map(value_depth).max().unwrap_or(0),
        Process::Par(a, b) => prefix_depth(a).max(prefix_depth(b)),
        Process::Res { body, .. } => prefix_depth(body),
    }
}

fn value_depth(v: &Value) -> usize {
    match v {
        Value::Abs(a) => prefix_depth(&a.body),
        _ => 0,
    }
}

/// Which constructs occur in a set of processes.
#[derive(Debug, Default, Clone, Copy)]
pub struct Coverage {
    pub output: usize,
    pub input: usize,
    pub select: usize,
    pub branch: usize,
    pub apply: usize,
    pub par: usize,
    pub session_restriction: usize,
    pub shared_restriction: usize,
    pub linear_abstraction: usize,
    pub shared_abstraction: usize,
    pub polyadic: usize,
    pub recursive_name: usize,
}

impl Coverage {
    pub fn add(&mut self, p: &Process) {
        match p {
            Process::Inact => {}
            Process::Out { payload, cont, .. } => {
                self.output += 1;
                if payload.len() > 1 {
                    self.polyadic += 1;
                }
                for v in payload {
                    self.add_value(v);
                }
                self.add(cont);
            }
            Process::In { binders, cont, .. } => {
                self.input += 1;
                if binders.len() > 1 {
                    self.polyadic += 1;
                }
                self.add(cont);
            }
            Process::Sel { cont, .. } => {
                self.select += 1;
                self.add(cont);
            }
            Process::Bra { cases, .. } => {
                self.branch += 1;
                for (_, q) in cases {
                    self.add(q);
                }
            }
            Process::App { fun, args } => {
                self.apply += 1;
                for v in args.iter().chain([fun]) {
                    self.add_value(v);
                }
            }
            Process::Par(a, b) => {
                self.par += 1;
                self.add(a);
                self.add(b);
            }
            Process::Res { ty, body, .. } => {
                match ty {
                    CType::Session(s) => {
                        self.session_restriction += 1;
                        if matches!(s, SType::Rec(..)) {
                            self.recursive_name += 1;
                        }
                    }
                    _ => self.shared_restriction += 1,
                }
                self.add(body);
            }
        }
    }

    fn add_value(&mut self, v: &Value) {
        if let Value::Abs(a) = v {
            match a.lin {
                Linearity::Lin => self.linear_abstraction += 1,
                Linearity::Sh => self.shared_abstraction += 1,
            }
            self.add(&a.body);
        }
    }

    /// Names of the constructs that never occurred.
    pub fn missing(&self) -> Vec<&'static str> {
        let all = [
            ("output", self.output),
            ("input", self.input),
            ("select", self.select),
            ("branch", self.branch),
            ("apply", self.apply),
            ("par", self.par),
            ("session restriction", self.session_restriction),
            ("shared restriction", self.shared_restriction),
            ("linear abstraction", self.linear_abstraction),
            ("shared abstraction", self.shared_abstraction),
            ("polyadic prefix", self.polyadic),
            ("tail-recursive name", self.recursive_name),
        ];
        all.iter().filter(|(_, n)| *n == 0).map(|(s, _)| *s).collect()
    }
}

/// The first `count` generated processes with at least one prefix and of
/// depth at most [`MAX_DEPTH`],
/// with their seeds.
pub fn sample(count: usize) -> Vec<(u64, Process)> {
    (0u64..)
        .map(|seed| (seed, closed_process(seed)))
        .filter(|(_, p)| (1..=MAX_DEPTH).contains(&prefix_depth(p)))
        .take(count)
        .collect()
}
