//! Big rings and big graded rings over a finite object set, their
//! bimodules, tensor products over the degree-zero part, flatness, and
//! restriction of base.
//!
//! A big ring over an object set Sigma is a family of Z/m-modules R_{st}
//! with biadditive composition maps R_{st} x R_{tr} -> R_{sr} and unit
//! elements e_s in R_{ss}. Components are finitely generated Z/m-modules
//! in canonical form; multiplications are integer structure tensors on
//! canonical generators.

use crate::exactla::{FinModule, MatZm, ModuleMap, Subquotient};
use crate::{Error, Result};
use std::collections::{BTreeMap, HashMap};

/// The object set Sigma: a finite ordered list of distinct labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectSet {
    names: Vec<String>,
}

impl ObjectSet {
    pub fn new(names: Vec<String>) -> Self {
        assert!(!names.is_empty(), "object set must be nonempty");
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                assert_ne!(a, b, "object labels must be distinct");
            }
        }
        Self { names }
    }

    pub fn single(name: &str) -> Self {
        Self::new(vec![name.to_string()])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Structure constants of a bilinear map A x B -> C on canonical
/// generators: entry (i, j) holds the coordinates of a_i * b_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor3 {
    pub a_rank: usize,
    pub b_rank: usize,
    pub out_rank: usize,
    pub m: u64,
    data: Vec<u64>,
}

impl Tensor3 {
    pub fn zeros(a_rank: usize, b_rank: usize, out_rank: usize, m: u64) -> Self {
        Self {
            a_rank,
            b_rank,
            out_rank,
            m,
            data: vec![0; a_rank * b_rank * out_rank],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &[u64] {
        let o = (i * self.b_rank + j) * self.out_rank;
        &self.data[o..o + self.out_rank]
    }

    pub fn set(&mut self, i: usize, j: usize, coords: &[u64]) {
        assert_eq!(coords.len(), self.out_rank);
        let o = (i * self.b_rank + j) * self.out_rank;
        for (k, &c) in coords.iter().enumerate() {
            self.data[o + k] = c % self.m;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    pub fn multiply(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        assert_eq!(a.len(), self.a_rank);
        assert_eq!(b.len(), self.b_rank);
        let m = self.m as u128;
        let mut out = vec![0u64; self.out_rank];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let c = (ai as u128 * bj as u128) % m;
                let e = self.get(i, j);
                for (k, acc) in out.iter_mut().enumerate() {
                    *acc = ((*acc as u128 + c * e[k] as u128) % m) as u64;
                }
            }
        }
        out
    }
}

/// Big ring over an object set: the degree-zero world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigRing {
    pub objects: ObjectSet,
    pub modulus: u64,
    comps: Vec<FinModule>,
    units: Vec<Vec<u64>>,
    mult: BTreeMap<(usize, usize, usize), Tensor3>,
}

impl BigRing {
    pub fn new(
        objects: ObjectSet,
        modulus: u64,
        comps: Vec<FinModule>,
        units: Vec<Vec<u64>>,
        mult: BTreeMap<(usize, usize, usize), Tensor3>,
    ) -> Self {
        let n = objects.len();
        assert_eq!(comps.len(), n * n);
        assert_eq!(units.len(), n);
        for (s, u) in units.iter().enumerate() {
            assert_eq!(u.len(), comps[s * n + s].rank());
        }
        Self {
            objects,
            modulus,
            comps,
            units,
            mult,
        }
    }

    /// The base with Z/m spanned by the unit on the diagonal and zero off it.
    pub fn diagonal_zm(objects: ObjectSet, modulus: u64) -> Self {
        let n = objects.len();
        let mut comps = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                comps.push(if s == t {
                    FinModule::free(modulus, 1)
                } else {
                    FinModule::zero(modulus)
                });
            }
        }
        let units = vec![vec![1u64]; n];
        let mut mult = BTreeMap::new();
        for s in 0..n {
            let mut t3 = Tensor3::zeros(1, 1, 1, modulus);
            t3.set(0, 0, &[1]);
            mult.insert((s, s, s), t3);
        }
        Self::new(objects, modulus, comps, units, mult)
    }

    pub fn comp(&self, s: usize, t: usize) -> &FinModule {
        &self.comps[s * self.objects.len() + t]
    }

    pub fn unit(&self, s: usize) -> &[u64] {
        &self.units[s]
    }

    pub fn mult_tensor(&self, s: usize, t: usize, r: usize) -> Option<&Tensor3> {
        self.mult.get(&(s, t, r))
    }

    pub fn mult_tensors(&self) -> &BTreeMap<(usize, usize, usize), Tensor3> {
        &self.mult
    }

    pub fn multiply(&self, s: usize, t: usize, r: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
        match self.mult_tensor(s, t, r) {
            Some(t3) => self.comp(s, r).reduce(&t3.multiply(a, b)),
            None => self.comp(s, r).zero_element(),
        }
    }

    /// True when each diagonal component is spanned by its unit and every
    /// off-diagonal component vanishes. Tensor relations over such a base
    /// are trivial, and flatness is decided componentwise.
    pub fn is_scalar_diagonal(&self) -> bool {
        let n = self.objects.len();
        for s in 0..n {
            for t in 0..n {
                if s == t {
                    let c = self.comp(s, s);
                    if c.rank() > 1 || (c.rank() == 1 && self.units[s] != [1]) {
                        return false;
                    }
                } else if !self.comp(s, t).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Unit and associativity identities on all generator triples.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let n = self.objects.len();
        for s in 0..n {
            for t in 0..n {
                let c = self.comp(s, t);
                for j in 0..c.rank() {
                    let mut x = c.zero_element();
                    x[j] = 1;
                    if self.multiply(s, s, t, self.unit(s), &x) != c.reduce(&x) {
                        report.push(format!(
                            "left unit fails on gen {j} of R[{},{}]",
                            self.objects.name(s),
                            self.objects.name(t)
                        ));
                    }
                    if self.multiply(s, t, t, &x, self.unit(t)) != c.reduce(&x) {
                        report.push(format!(
                            "right unit fails on gen {j} of R[{},{}]",
                            self.objects.name(s),
                            self.objects.name(t)
                        ));
                    }
                }
            }
        }
        for s in 0..n {
            for t in 0..n {
                for r in 0..n {
                    for p in 0..n {
                        let (ca, cb, cc) = (self.comp(s, t), self.comp(t, r), self.comp(r, p));
                        for i in 0..ca.rank() {
                            for j in 0..cb.rank() {
                                for k in 0..cc.rank() {
                                    let mut a = ca.zero_element();
                                    a[i] = 1;
                                    let mut b = cb.zero_element();
                                    b[j] = 1;
                                    let mut c = cc.zero_element();
                                    c[k] = 1;
                                    let ab = self.multiply(s, t, r, &a, &b);
                                    let bc = self.multiply(t, r, p, &b, &c);
                                    if self.multiply(s, r, p, &ab, &c)
                                        != self.multiply(s, t, p, &a, &bc)
                                    {
                                        report.push(format!(
                                            "associativity fails on ({s},{t},{r},{p}) gens ({i},{j},{k})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

/// Morphism of big rings over the same object set.
#[derive(Clone, Debug)]
pub struct BigRingMorphism {
    pub source: BigRing,
    pub target: BigRing,
    comps: Vec<ModuleMap>,
}

impl BigRingMorphism {
    pub fn new(source: BigRing, target: BigRing, comps: Vec<ModuleMap>) -> Self {
        assert_eq!(source.objects, target.objects);
        let n = source.objects.len();
        assert_eq!(comps.len(), n * n);
        for s in 0..n {
            for t in 0..n {
                assert_eq!(&comps[s * n + t].source, source.comp(s, t));
                assert_eq!(&comps[s * n + t].target, target.comp(s, t));
            }
        }
        Self {
            source,
            target,
            comps,
        }
    }

    pub fn identity(ring: &BigRing) -> Self {
        let n = ring.objects.len();
        let mut comps = Vec::new();
        for s in 0..n {
            for t in 0..n {
                comps.push(ModuleMap::identity(ring.comp(s, t).clone()));
            }
        }
        Self::new(ring.clone(), ring.clone(), comps)
    }

    /// The unique unital morphism from the diagonal Z/m base, when the
    /// target has the same object set.
    pub fn from_diagonal(target: &BigRing) -> Self {
        let source = BigRing::diagonal_zm(target.objects.clone(), target.modulus);
        let n = target.objects.len();
        let mut comps = Vec::new();
        for s in 0..n {
            for t in 0..n {
                let src = source.comp(s, t).clone();
                let tgt = target.comp(s, t).clone();
                let mut mat = MatZm::zeros(tgt.rank(), src.rank(), target.modulus);
                if s == t {
                    for (i, &u) in target.unit(s).iter().enumerate() {
                        mat[(i, 0)] = u;
                    }
                }
                comps.push(ModuleMap::new(src, tgt, mat));
            }
        }
        Self::new(source, target.clone(), comps)
    }

    pub fn comp(&self, s: usize, t: usize) -> &ModuleMap {
        &self.comps[s * self.source.objects.len() + t]
    }

    pub fn apply(&self, s: usize, t: usize, x: &[u64]) -> Vec<u64> {
        self.comp(s, t).apply(x)
    }

    pub fn is_unital(&self) -> bool {
        (0..self.source.objects.len()).all(|s| {
            self.apply(s, s, self.source.unit(s))
                == self.target.comp(s, s).reduce(self.target.unit(s))
        })
    }

    /// self after g.
    pub fn compose(&self, g: &BigRingMorphism) -> BigRingMorphism {
        assert_eq!(g.target, self.source);
        let n = self.source.objects.len();
        let comps = (0..n * n)
            .map(|i| self.comps[i].compose(&g.comps[i]))
            .collect();
        BigRingMorphism::new(g.source.clone(), self.target.clone(), comps)
    }
}

/// Bimodule over big rings (left, right).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bimodule {
    pub left: BigRing,
    pub right: BigRing,
    comps: Vec<FinModule>,
    /// (s, t, r): L_{st} x K_{tr} -> K_{sr}
    lact: BTreeMap<(usize, usize, usize), Tensor3>,
    /// (t, r, p): K_{tr} x R_{rp} -> K_{tp}
    ract: BTreeMap<(usize, usize, usize), Tensor3>,
}

impl Bimodule {
    pub fn new(
        left: BigRing,
        right: BigRing,
        comps: Vec<FinModule>,
        lact: BTreeMap<(usize, usize, usize), Tensor3>,
        ract: BTreeMap<(usize, usize, usize), Tensor3>,
    ) -> Self {
        assert_eq!(comps.len(), left.objects.len() * right.objects.len());
        Self {
            left,
            right,
            comps,
            lact,
            ract,
        }
    }

    pub fn zero(left: BigRing, right: BigRing) -> Self {
        let m = left.modulus;
        let comps = vec![FinModule::zero(m); left.objects.len() * right.objects.len()];
        Self::new(left, right, comps, BTreeMap::new(), BTreeMap::new())
    }

    /// The ring as a bimodule over itself.
    pub fn regular(ring: &BigRing) -> Self {
        let n = ring.objects.len();
        let comps = (0..n * n).map(|i| ring.comp(i / n, i % n).clone()).collect();
        let lact = ring.mult.clone();
        let ract = ring.mult.clone();
        Self::new(ring.clone(), ring.clone(), comps, lact, ract)
    }

    pub fn comp(&self, t: usize, r: usize) -> &FinModule {
        &self.comps[t * self.right.objects.len() + r]
    }

    pub fn act_left(&self, s: usize, t: usize, r: usize, a: &[u64], x: &[u64]) -> Vec<u64> {
        match self.lact.get(&(s, t, r)) {
            Some(t3) => self.comp(s, r).reduce(&t3.multiply(a, x)),
            None => self.comp(s, r).zero_element(),
        }
    }

    pub fn act_right(&self, t: usize, r: usize, p: usize, x: &[u64], b: &[u64]) -> Vec<u64> {
        match self.ract.get(&(t, r, p)) {
            Some(t3) => self.comp(t, p).reduce(&t3.multiply(x, b)),
            None => self.comp(t, p).zero_element(),
        }
    }

    pub fn total_rank(&self) -> usize {
        self.comps.iter().map(|c| c.rank()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn left_action_tensor(&self, s: usize, t: usize, r: usize) -> Option<&Tensor3> {
        self.lact.get(&(s, t, r))
    }

    pub fn right_action_tensor(&self, t: usize, r: usize, p: usize) -> Option<&Tensor3> {
        self.ract.get(&(t, r, p))
    }

    /// Biassociativity and unit identities on generators.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let nl = self.left.objects.len();
        let nr = self.right.objects.len();
        for t in 0..nl {
            for r in 0..nr {
                let c = self.comp(t, r);
                for j in 0..c.rank() {
                    let mut x = c.zero_element();
                    x[j] = 1;
                    if self.act_left(t, t, r, self.left.unit(t), &x) != c.reduce(&x) {
                        report.push(format!("left unit fails on K[{t},{r}] gen {j}"));
                    }
                    if self.act_right(t, r, r, &x, self.right.unit(r)) != c.reduce(&x) {
                        report.push(format!("right unit fails on K[{t},{r}] gen {j}"));
                    }
                }
            }
        }
        // (a b) x = a (b x), (a x) b = a (x b), (x a) b = x (a b)
        for s in 0..nl {
            for t in 0..nl {
                for u in 0..nl {
                    for r in 0..nr {
                        let (ca, cb, cx) =
                            (self.left.comp(s, t), self.left.comp(t, u), self.comp(u, r));
                        for i in 0..ca.rank() {
                            for j in 0..cb.rank() {
                                for k in 0..cx.rank() {
                                    let mut a = ca.zero_element();
                                    a[i] = 1;
                                    let mut b = cb.zero_element();
                                    b[j] = 1;
                                    let mut x = cx.zero_element();
                                    x[k] = 1;
                                    let ab = self.left.multiply(s, t, u, &a, &b);
                                    let bx = self.act_left(t, u, r, &b, &x);
                                    if self.act_left(s, u, r, &ab, &x)
                                        != self.act_left(s, t, r, &a, &bx)
                                    {
                                        report.push(format!(
                                            "left action associativity fails ({s},{t},{u},{r})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for s in 0..nl {
            for t in 0..nr {
                for u in 0..nr {
                    for r in 0..nr {
                        let (cx, ca, cb) =
                            (self.comp(s, t), self.right.comp(t, u), self.right.comp(u, r));
                        for k in 0..cx.rank() {
                            for i in 0..ca.rank() {
                                for j in 0..cb.rank() {
                                    let mut x = cx.zero_element();
                                    x[k] = 1;
                                    let mut a = ca.zero_element();
                                    a[i] = 1;
                                    let mut b = cb.zero_element();
                                    b[j] = 1;
                                    let xa = self.act_right(s, t, u, &x, &a);
                                    let ab = self.right.multiply(t, u, r, &a, &b);
                                    if self.act_right(s, u, r, &xa, &b)
                                        != self.act_right(s, t, r, &x, &ab)
                                    {
                                        report.push(format!(
                                            "right action associativity fails ({s},{t},{u},{r})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for s in 0..nl {
            for t in 0..nl {
                for u in 0..nr {
                    for r in 0..nr {
                        let (ca, cx, cb) =
                            (self.left.comp(s, t), self.comp(t, u), self.right.comp(u, r));
                        for i in 0..ca.rank() {
                            for k in 0..cx.rank() {
                                for j in 0..cb.rank() {
                                    let mut a = ca.zero_element();
                                    a[i] = 1;
                                    let mut x = cx.zero_element();
                                    x[k] = 1;
                                    let mut b = cb.zero_element();
                                    b[j] = 1;
                                    let ax = self.act_left(s, t, u, &a, &x);
                                    let xb = self.act_right(t, u, r, &x, &b);
                                    if self.act_right(s, u, r, &ax, &b)
                                        != self.act_left(s, t, r, &a, &xb)
                                    {
                                        report.push(format!(
                                            "bimodule compatibility fails ({s},{t},{u},{r})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

/// One basis chain of an iterated tensor product: an object path and one
/// generator index per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainBasisElem {
    pub path: Vec<usize>,
    pub gens: Vec<usize>,
}

/// One component (t, r) of an iterated tensor product over the base.
#[derive(Clone, Debug)]
pub struct ChainComponent {
    pub basis: Vec<ChainBasisElem>,
    pub sq: Subquotient,
    /// presentation relation columns in pure-chain coordinates
    pub rels: Vec<Vec<u64>>,
    index: HashMap<ChainBasisElem, usize>,
}

impl ChainComponent {
    pub fn module(&self) -> &FinModule {
        &self.sq.module
    }

    pub fn basis_index(&self, path: &[usize], gens: &[usize]) -> Option<usize> {
        self.index
            .get(&ChainBasisElem {
                path: path.to_vec(),
                gens: gens.to_vec(),
            })
            .copied()
    }

    /// Canonical coordinates of a pure-chain coordinate vector.
    pub fn canonicalize(&self, pure: &[u64]) -> Vec<u64> {
        self.sq.module.reduce(&self.sq.to_canon.apply(pure))
    }

    /// A pure-chain representative of a canonical element.
    pub fn lift(&self, canon: &[u64]) -> Vec<u64> {
        self.sq.reps.apply(canon)
    }
}

/// Iterated tensor product N_1 (x)_R ... (x)_R N_k of bimodules over
/// matching bases, with explicit pure-chain presentations per component.
#[derive(Clone, Debug)]
pub struct ChainTensor {
    pub left: BigRing,
    pub right: BigRing,
    pub modulus: u64,
    pub arity: usize,
    pub factors: Vec<Bimodule>,
    comps: Vec<ChainComponent>,
}

/// Enumerate pure chains of the factor list from `from` to `to`:
/// (object path, generator tuple) pairs with every slot nonzero.
pub fn enumerate_chains(factors: &[&Bimodule], from: usize, to: usize) -> Vec<ChainBasisElem> {
    let k = factors.len();
    let mut paths: Vec<Vec<usize>> = vec![vec![from]];
    for (f, fac) in factors.iter().enumerate() {
        let n_next = fac.right.objects.len();
        let mut next = Vec::new();
        for p in paths {
            for o in 0..n_next {
                if f == k - 1 && o != to {
                    continue;
                }
                if fac.comp(*p.last().unwrap(), o).is_zero() {
                    continue;
                }
                let mut q = p.clone();
                q.push(o);
                next.push(q);
            }
        }
        paths = next;
    }
    let mut out = Vec::new();
    for path in paths {
        let ranks: Vec<usize> = (0..k)
            .map(|f| factors[f].comp(path[f], path[f + 1]).rank())
            .collect();
        let total: usize = ranks.iter().product();
        for mut ix in 0..total {
            let mut gens = Vec::with_capacity(k);
            for &rk in &ranks {
                gens.push(ix % rk);
                ix /= rk;
            }
            out.push(ChainBasisElem {
                path: path.clone(),
                gens,
            });
        }
    }
    out
}

impl ChainTensor {
    pub fn comp(&self, t: usize, r: usize) -> &ChainComponent {
        &self.comps[t * self.right.objects.len() + r]
    }

    /// Rebuild with extra relation columns (pure-chain coordinates) per
    /// component; used for quotients by translated relation submodules.
    pub fn with_extra_relations(&self, extra: &[Vec<Vec<u64>>]) -> ChainTensor {
        assert_eq!(extra.len(), self.comps.len());
        let mut out = self.clone();
        for (c, ex) in out.comps.iter_mut().zip(extra) {
            let mut rel_cols = c.rels.clone();
            rel_cols.extend(ex.iter().cloned());
            let rels = MatZm::from_cols(c.basis.len(), self.modulus, &rel_cols);
            c.sq = Subquotient::from_presentation(c.basis.len(), self.modulus, &rels);
            c.rels = rel_cols;
        }
        out
    }

    pub fn module(&self, t: usize, r: usize) -> &FinModule {
        self.comp(t, r).module()
    }

    pub fn total_rank(&self) -> usize {
        self.comps.iter().map(|c| c.module().rank()).sum()
    }

    /// Export as a plain bimodule with induced outer actions.
    pub fn to_bimodule(&self) -> Bimodule {
        let nl = self.left.objects.len();
        let nr = self.right.objects.len();
        let m = self.modulus;
        let comps: Vec<FinModule> = (0..nl * nr)
            .map(|i| self.comps[i].module().clone())
            .collect();
        let mut lact = BTreeMap::new();
        let mut ract = BTreeMap::new();
        let first = &self.factors[0];
        let last_f = &self.factors[self.arity - 1];
        let last = self.arity - 1;
        for s in 0..nl {
            for t in 0..nl {
                for r in 0..nr {
                    let ra = self.left.comp(s, t);
                    let kc = self.comp(t, r);
                    let out = self.comp(s, r);
                    if ra.is_zero() || kc.module().is_zero() || out.module().is_zero() {
                        continue;
                    }
                    let mut t3 =
                        Tensor3::zeros(ra.rank(), kc.module().rank(), out.module().rank(), m);
                    for i in 0..ra.rank() {
                        let mut a = ra.zero_element();
                        a[i] = 1;
                        for j in 0..kc.module().rank() {
                            let mut x = kc.module().zero_element();
                            x[j] = 1;
                            let pure = kc.lift(&x);
                            let mut acc = vec![0u64; out.basis.len()];
                            for (bi, b) in kc.basis.iter().enumerate() {
                                if pure[bi] == 0 {
                                    continue;
                                }
                                let fc = first.comp(b.path[0], b.path[1]);
                                let mut xg = fc.zero_element();
                                xg[b.gens[0]] = 1;
                                let moved = first.act_left(s, b.path[0], b.path[1], &a, &xg);
                                let mut new_path = b.path.clone();
                                new_path[0] = s;
                                for (g0, &c0) in moved.iter().enumerate() {
                                    if c0 == 0 {
                                        continue;
                                    }
                                    let mut gens = b.gens.clone();
                                    gens[0] = g0;
                                    if let Some(idx) = out.basis_index(&new_path, &gens) {
                                        acc[idx] = ((acc[idx] as u128
                                            + c0 as u128 * pure[bi] as u128)
                                            % m as u128)
                                            as u64;
                                    }
                                }
                            }
                            t3.set(i, j, &out.canonicalize(&acc));
                        }
                    }
                    if !t3.is_zero() {
                        lact.insert((s, t, r), t3);
                    }
                }
            }
        }
        for t in 0..nl {
            for r in 0..nr {
                for p in 0..nr {
                    let kc = self.comp(t, r);
                    let rb = self.right.comp(r, p);
                    let out = self.comp(t, p);
                    if rb.is_zero() || kc.module().is_zero() || out.module().is_zero() {
                        continue;
                    }
                    let mut t3 =
                        Tensor3::zeros(kc.module().rank(), rb.rank(), out.module().rank(), m);
                    for j in 0..kc.module().rank() {
                        let mut x = kc.module().zero_element();
                        x[j] = 1;
                        let pure = kc.lift(&x);
                        for i in 0..rb.rank() {
                            let mut b = rb.zero_element();
                            b[i] = 1;
                            let mut acc = vec![0u64; out.basis.len()];
                            for (bi, be) in kc.basis.iter().enumerate() {
                                if pure[bi] == 0 {
                                    continue;
                                }
                                let fc = last_f.comp(be.path[last], be.path[last + 1]);
                                let mut xg = fc.zero_element();
                                xg[be.gens[last]] = 1;
                                let moved =
                                    last_f.act_right(be.path[last], be.path[last + 1], p, &xg, &b);
                                let mut new_path = be.path.clone();
                                *new_path.last_mut().unwrap() = p;
                                for (g0, &c0) in moved.iter().enumerate() {
                                    if c0 == 0 {
                                        continue;
                                    }
                                    let mut gens = be.gens.clone();
                                    gens[last] = g0;
                                    if let Some(idx) = out.basis_index(&new_path, &gens) {
                                        acc[idx] = ((acc[idx] as u128
                                            + c0 as u128 * pure[bi] as u128)
                                            % m as u128)
                                            as u64;
                                    }
                                }
                            }
                            t3.set(j, i, &out.canonicalize(&acc));
                        }
                    }
                    if !t3.is_zero() {
                        ract.insert((t, r, p), t3);
                    }
                }
            }
        }
        Bimodule::new(self.left.clone(), self.right.clone(), comps, lact, ract)
    }
}

/// Build the iterated tensor product of bimodules over their bases.
pub fn tensor_chain(factors: &[&Bimodule]) -> Result<ChainTensor> {
    assert!(!factors.is_empty(), "tensor_chain needs at least one factor");
    for w in factors.windows(2) {
        if w[0].right != w[1].left {
            return Err(Error::BaseMismatch(
                "adjacent tensor factors must share their base".into(),
            ));
        }
    }
    let left = factors[0].left.clone();
    let right = factors.last().unwrap().right.clone();
    let m = left.modulus;
    let k = factors.len();
    let nl = left.objects.len();
    let nr = right.objects.len();
    let mut comps = Vec::with_capacity(nl * nr);
    for t in 0..nl {
        for r in 0..nr {
            let basis = enumerate_chains(factors, t, r);
            let dim = basis.len();
            let index: HashMap<ChainBasisElem, usize> = basis
                .iter()
                .enumerate()
                .map(|(i, b)| (b.clone(), i))
                .collect();
            let lookup = |path: &[usize], gens: &[usize]| -> Option<usize> {
                index
                    .get(&ChainBasisElem {
                        path: path.to_vec(),
                        gens: gens.to_vec(),
                    })
                    .copied()
            };
            let mut rel_cols: Vec<Vec<u64>> = Vec::new();
            // torsion: the order of a pure chain is the gcd of its slot orders
            for (bi, b) in basis.iter().enumerate() {
                let mut order = m;
                for f in 0..k {
                    let d = factors[f].comp(b.path[f], b.path[f + 1]).factors()[b.gens[f]];
                    order = gcd(order, d);
                }
                if order < m {
                    let mut col = vec![0u64; dim];
                    col[bi] = order;
                    rel_cols.push(col);
                }
            }
            // over-the-base relations pre(x)(x.a)(x)y(x)suf = pre(x)x(x)(a.y)(x)suf
            // at every middle position; trivial over scalar-diagonal bases.
            for pos in 1..k {
                let base = &factors[pos].left;
                if base.is_scalar_diagonal() {
                    continue;
                }
                let pre_chains: Vec<ChainBasisElem> = if pos == 1 {
                    vec![ChainBasisElem {
                        path: vec![t],
                        gens: vec![],
                    }]
                } else {
                    let mut v = Vec::new();
                    for alpha in 0..factors[pos - 1].left.objects.len() {
                        v.extend(enumerate_chains(&factors[..pos - 1], t, alpha));
                    }
                    v
                };
                let suf_chains: Vec<ChainBasisElem> = if pos + 1 == k {
                    vec![ChainBasisElem {
                        path: vec![r],
                        gens: vec![],
                    }]
                } else {
                    let mut v = Vec::new();
                    for beta in 0..factors[pos + 1].left.objects.len() {
                        v.extend(enumerate_chains(&factors[pos + 1..], beta, r));
                    }
                    v
                };
                for s1 in 0..base.objects.len() {
                    for s2 in 0..base.objects.len() {
                        let rgen = base.comp(s1, s2);
                        if rgen.is_zero() {
                            continue;
                        }
                        for pre in &pre_chains {
                            let alpha = *pre.path.last().unwrap();
                            let xc = factors[pos - 1].comp(alpha, s1);
                            if xc.is_zero() {
                                continue;
                            }
                            for suf in &suf_chains {
                                let beta = suf.path[0];
                                let yc = factors[pos].comp(s2, beta);
                                if yc.is_zero() {
                                    continue;
                                }
                                for xi in 0..xc.rank() {
                                    let mut x = xc.zero_element();
                                    x[xi] = 1;
                                    for ai in 0..rgen.rank() {
                                        let mut a = rgen.zero_element();
                                        a[ai] = 1;
                                        let xa = factors[pos - 1].act_right(alpha, s1, s2, &x, &a);
                                        for yi in 0..yc.rank() {
                                            let mut y = yc.zero_element();
                                            y[yi] = 1;
                                            let ay = factors[pos].act_left(s1, s2, beta, &a, &y);
                                            let mut col = vec![0i128; dim];
                                            // term 1: x.a lands in slot pos-1, middle object s2
                                            for (g, &c) in xa.iter().enumerate() {
                                                if c == 0 {
                                                    continue;
                                                }
                                                let mut path = pre.path.clone();
                                                path.push(s2);
                                                path.extend_from_slice(&suf.path);
                                                let mut gens = pre.gens.clone();
                                                gens.push(g);
                                                gens.push(yi);
                                                gens.extend_from_slice(&suf.gens);
                                                if let Some(ix) = lookup(&path, &gens) {
                                                    col[ix] += c as i128;
                                                }
                                            }
                                            // term 2: a.y lands in slot pos, middle object s1
                                            for (h, &c) in ay.iter().enumerate() {
                                                if c == 0 {
                                                    continue;
                                                }
                                                let mut path = pre.path.clone();
                                                path.push(s1);
                                                path.extend_from_slice(&suf.path);
                                                let mut gens = pre.gens.clone();
                                                gens.push(xi);
                                                gens.push(h);
                                                gens.extend_from_slice(&suf.gens);
                                                if let Some(ix) = lookup(&path, &gens) {
                                                    col[ix] -= c as i128;
                                                }
                                            }
                                            if col.iter().any(|&c| c != 0) {
                                                rel_cols.push(
                                                    col.iter()
                                                        .map(|&c| c.rem_euclid(m as i128) as u64)
                                                        .collect(),
                                                );
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let rels = MatZm::from_cols(dim, m, &rel_cols);
            let sq = Subquotient::from_presentation(dim, m, &rels);
            comps.push(ChainComponent {
                basis,
                sq,
                rels: rel_cols,
                index,
            });
        }
    }
    Ok(ChainTensor {
        left,
        right,
        modulus: m,
        arity: k,
        factors: factors.iter().map(|&f| f.clone()).collect(),
        comps,
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Tensor product of two bimodules over their common middle base, with
/// canonical components and induced outer actions.
pub fn tensor_over_base(n: &Bimodule, m: &Bimodule) -> Result<Bimodule> {
    Ok(tensor_chain(&[n, m])?.to_bimodule())
}

/// Big graded ring: a base big ring in degree 0 plus components and
/// structure tensors for degrees 1..=d_max. Everything is truncated at
/// d_max; verdicts downstream are always "up to degree d".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigGradedRing {
    pub base: BigRing,
    pub d_max: usize,
    /// (degree >= 1, s, t) -> component; absent means zero
    comps: BTreeMap<(usize, usize, usize), FinModule>,
    /// (deg_a, deg_b, s, t, r) -> tensor; deg_a + deg_b <= d_max, not both 0
    mult: BTreeMap<(usize, usize, usize, usize, usize), Tensor3>,
}

impl BigGradedRing {
    pub fn new(
        base: BigRing,
        d_max: usize,
        comps: BTreeMap<(usize, usize, usize), FinModule>,
        mult: BTreeMap<(usize, usize, usize, usize, usize), Tensor3>,
    ) -> Self {
        for (&(n, _, _), _) in &comps {
            assert!(n >= 1 && n <= d_max);
        }
        Self {
            base,
            d_max,
            comps,
            mult,
        }
    }

    /// The base alone, with zero components in degrees >= 1.
    pub fn concentrated(base: BigRing, d_max: usize) -> Self {
        Self::new(base, d_max, BTreeMap::new(), BTreeMap::new())
    }

    pub fn modulus(&self) -> u64 {
        self.base.modulus
    }

    pub fn objects(&self) -> &ObjectSet {
        &self.base.objects
    }

    pub fn component(&self, n: usize, s: usize, t: usize) -> FinModule {
        if n == 0 {
            return self.base.comp(s, t).clone();
        }
        self.comps
            .get(&(n, s, t))
            .cloned()
            .unwrap_or_else(|| FinModule::zero(self.base.modulus))
    }

    pub fn components(&self) -> &BTreeMap<(usize, usize, usize), FinModule> {
        &self.comps
    }

    pub fn mult_map(&self) -> &BTreeMap<(usize, usize, usize, usize, usize), Tensor3> {
        &self.mult
    }

    pub fn degree_is_zero(&self, n: usize) -> bool {
        (0..self.objects().len())
            .all(|s| (0..self.objects().len()).all(|t| self.component(n, s, t).is_zero()))
    }

    pub fn multiply(
        &self,
        na: usize,
        s: usize,
        t: usize,
        a: &[u64],
        nb: usize,
        r: usize,
        b: &[u64],
    ) -> Vec<u64> {
        let out = self.component(na + nb, s, r);
        if na == 0 && nb == 0 {
            return self.base.multiply(s, t, r, a, b);
        }
        match self.mult.get(&(na, nb, s, t, r)) {
            Some(t3) => out.reduce(&t3.multiply(a, b)),
            None => out.zero_element(),
        }
    }

    /// Degree-1 component as a bimodule over the base.
    pub fn degree_bimodule(&self, n: usize) -> Bimodule {
        assert!(n >= 1);
        let no = self.objects().len();
        let comps = (0..no * no)
            .map(|i| self.component(n, i / no, i % no))
            .collect();
        let mut lact = BTreeMap::new();
        let mut ract = BTreeMap::new();
        for s in 0..no {
            for t in 0..no {
                for r in 0..no {
                    if let Some(t3) = self.mult.get(&(0, n, s, t, r)) {
                        lact.insert((s, t, r), t3.clone());
                    }
                    if let Some(t3) = self.mult.get(&(n, 0, s, t, r)) {
                        ract.insert((s, t, r), t3.clone());
                    }
                }
            }
        }
        Bimodule::new(self.base.clone(), self.base.clone(), comps, lact, ract)
    }

    /// Every failed unit/associativity/well-definedness identity on
    /// generators within the truncation; empty iff valid.
    pub fn validate(&self) -> Vec<String> {
        let mut report = self.base.validate();
        let no = self.objects().len();
        // units act as identity on all graded components
        for n in 1..=self.d_max {
            for s in 0..no {
                for t in 0..no {
                    let c = self.component(n, s, t);
                    for j in 0..c.rank() {
                        let mut x = c.zero_element();
                        x[j] = 1;
                        if self.multiply(0, s, s, self.base.unit(s), n, t, &x) != c.reduce(&x) {
                            report.push(format!("left unit fails on A_{n}[{s},{t}] gen {j}"));
                        }
                        if self.multiply(n, s, t, &x, 0, t, self.base.unit(t)) != c.reduce(&x) {
                            report.push(format!("right unit fails on A_{n}[{s},{t}] gen {j}"));
                        }
                    }
                }
            }
        }
        // well-definedness: order of a generator annihilates its products
        for (&(na, nb, s, t, r), t3) in &self.mult {
            let ca = self.component(na, s, t);
            let cb = self.component(nb, t, r);
            let out = self.component(na + nb, s, r);
            for i in 0..ca.rank() {
                for j in 0..cb.rank() {
                    let ord = gcd(ca.factors()[i], cb.factors()[j]);
                    let prod = t3.get(i, j);
                    let scaled: Vec<u64> = prod
                        .iter()
                        .map(|&c| ((c as u128 * ord as u128) % self.modulus() as u128) as u64)
                        .collect();
                    if !out.is_zero_element(&scaled) {
                        report.push(format!(
                            "structure constants not well-defined at degrees ({na},{nb}) objects ({s},{t},{r}) gens ({i},{j})"
                        ));
                    }
                }
            }
        }
        // associativity on generator triples within truncation
        for na in 0..=self.d_max {
            for nb in 0..=self.d_max - na {
                for nc in 0..=self.d_max - na - nb {
                    if na + nb + nc == 0 {
                        continue;
                    }
                    for s in 0..no {
                        for t in 0..no {
                            for r in 0..no {
                                for p in 0..no {
                                    let ca = self.component(na, s, t);
                                    let cb = self.component(nb, t, r);
                                    let cc = self.component(nc, r, p);
                                    for i in 0..ca.rank() {
                                        for j in 0..cb.rank() {
                                            for k in 0..cc.rank() {
                                                let mut a = ca.zero_element();
                                                a[i] = 1;
                                                let mut b = cb.zero_element();
                                                b[j] = 1;
                                                let mut c = cc.zero_element();
                                                c[k] = 1;
                                                let ab = self.multiply(na, s, t, &a, nb, r, &b);
                                                let bc = self.multiply(nb, t, r, &b, nc, p, &c);
                                                let l = self.multiply(na + nb, s, r, &ab, nc, p, &c);
                                                let rgt = self.multiply(na, s, t, &a, nb + nc, p, &bc);
                                                if l != rgt {
                                                    report.push(format!(
                                                        "associativity fails at degrees ({na},{nb},{nc}) objects ({s},{t},{r},{p}) gens ({i},{j},{k})"
                                                    ));
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

/// Replace the degree-zero component along a unital morphism phi: R' -> A_0.
/// Degree >= 1 components are untouched; their degree-zero actions are
/// pulled back along phi.
pub fn restrict_base(a: &BigGradedRing, phi: &BigRingMorphism) -> Result<BigGradedRing> {
    if phi.target != a.base {
        return Err(Error::BaseMismatch(
            "phi must land in the degree-zero component".into(),
        ));
    }
    if !phi.is_unital() {
        return Err(Error::NotUnital("phi does not preserve units".into()));
    }
    let rp = phi.source.clone();
    let no = rp.objects.len();
    let mut mult = BTreeMap::new();
    for (&(na, nb, s, t, r), t3) in &a.mult {
        if na >= 1 && nb >= 1 {
            mult.insert((na, nb, s, t, r), t3.clone());
        }
    }
    // pull back the degree-zero actions
    for n in 1..=a.d_max {
        for s in 0..no {
            for t in 0..no {
                for r in 0..no {
                    let rc = rp.comp(s, t);
                    let ac = a.component(n, t, r);
                    let out = a.component(n, s, r);
                    if rc.rank() > 0 && ac.rank() > 0 && out.rank() > 0 {
                        let mut t3 = Tensor3::zeros(rc.rank(), ac.rank(), out.rank(), rp.modulus);
                        let mut nonzero = false;
                        for i in 0..rc.rank() {
                            let mut e = rc.zero_element();
                            e[i] = 1;
                            let img = phi.apply(s, t, &e);
                            for j in 0..ac.rank() {
                                let mut x = ac.zero_element();
                                x[j] = 1;
                                let prod = a.multiply(0, s, t, &img, n, r, &x);
                                if !out.is_zero_element(&prod) {
                                    nonzero = true;
                                }
                                t3.set(i, j, &prod);
                            }
                        }
                        if nonzero {
                            mult.insert((0, n, s, t, r), t3);
                        }
                    }
                    // right action
                    let rc2 = rp.comp(t, r);
                    let ac2 = a.component(n, s, t);
                    if rc2.rank() > 0 && ac2.rank() > 0 && out.rank() > 0 {
                        let mut t3 = Tensor3::zeros(ac2.rank(), rc2.rank(), out.rank(), rp.modulus);
                        let mut nonzero = false;
                        for j in 0..ac2.rank() {
                            let mut x = ac2.zero_element();
                            x[j] = 1;
                            for i in 0..rc2.rank() {
                                let mut e = rc2.zero_element();
                                e[i] = 1;
                                let img = phi.apply(t, r, &e);
                                let prod = a.multiply(n, s, t, &x, 0, r, &img);
                                if !out.is_zero_element(&prod) {
                                    nonzero = true;
                                }
                                t3.set(j, i, &prod);
                            }
                        }
                        if nonzero {
                            mult.insert((n, 0, s, t, r), t3);
                        }
                    }
                }
            }
        }
    }
    Ok(BigGradedRing::new(rp, a.d_max, a.comps.clone(), mult))
}

/// Side of an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Flatness of a bimodule over its base on the chosen side.
///
/// Over a scalar-diagonal base this is the local-freeness criterion: for
/// every prime p dividing m, the p-part of each invariant factor of each
/// component is either 1 or the full p-part of m. That is equivalent to
/// projectivity over the product of the local rings Z/p^k, hence to
/// exactness of tensoring. Non-scalar bases are refused; restrict the
/// base first.
pub fn is_flat(k: &Bimodule, side: Side) -> Result<bool> {
    let base = match side {
        Side::Left => &k.left,
        Side::Right => &k.right,
    };
    if !base.is_scalar_diagonal() {
        return Err(Error::FlatnessViolated(
            "flatness test requires a scalar-diagonal base; apply restrict_base first".into(),
        ));
    }
    let m = base.modulus;
    let nl = k.left.objects.len();
    let nr = k.right.objects.len();
    for t in 0..nl {
        for r in 0..nr {
            // the relevant base diagonal entry: Z/m itself (or smaller)
            let d_base = match side {
                Side::Left => {
                    let c = base.comp(t, t);
                    if c.is_zero() { 1 } else { c.factors()[0] }
                }
                Side::Right => {
                    let c = base.comp(r, r);
                    if c.is_zero() { 1 } else { c.factors()[0] }
                }
            };
            for &d in k.comp(t, r).factors() {
                if !locally_free_factor(d, d_base, m) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// p-part of each invariant factor must be 1 or the full p-part of the
/// base diagonal entry, for every prime p dividing it.
fn locally_free_factor(d: u64, d_base: u64, _m: u64) -> bool {
    if d_base <= 1 {
        return d <= 1;
    }
    if d_base % d != 0 {
        return false;
    }
    let mut rest = d_base;
    let mut p = 2u64;
    while rest > 1 {
        if rest % p == 0 {
            let mut pk = 1u64;
            while rest % p == 0 {
                rest /= p;
                pk *= p;
            }
            let mut dp = 1u64;
            let mut dd = d;
            while dd % p == 0 {
                dd /= p;
                dp *= p;
            }
            if dp != 1 && dp != pk {
                return false;
            }
        }
        p += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exterior_one_gen(m: u64) -> BigGradedRing {
        // Z/m[x]/(x^2), x in degree 1, truncated at 3
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), m);
        let mut comps = BTreeMap::new();
        comps.insert((1, 0, 0), FinModule::free(m, 1));
        let mut mult = BTreeMap::new();
        let mut act = Tensor3::zeros(1, 1, 1, m);
        act.set(0, 0, &[1]);
        mult.insert((0, 1, 0, 0, 0), act.clone());
        mult.insert((1, 0, 0, 0, 0), act);
        // x * x = 0: no (1,1) tensor
        BigGradedRing::new(base, 3, comps, mult)
    }

    #[test]
    fn one_object_ring_validates() {
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), 2);
        let a = BigGradedRing::concentrated(base, 2);
        assert!(a.validate().is_empty());
    }

    #[test]
    fn corrupted_structure_constant_is_reported() {
        let mut a = exterior_one_gen(2);
        // corrupt the left unit action: e * x = 0 instead of x
        a.mult.insert((0, 1, 0, 0, 0), Tensor3::zeros(1, 1, 1, 2));
        let report = a.validate();
        assert!(!report.is_empty());
        assert!(report.iter().any(|r| r.contains("unit")));
    }

    #[test]
    fn exterior_validates() {
        assert!(exterior_one_gen(2).validate().is_empty());
        assert!(exterior_one_gen(4).validate().is_empty());
    }

    #[test]
    fn tensor_unit_law() {
        // N = M = R over the one-object base Z/2: R (x)_R R = R
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), 2);
        let r = Bimodule::regular(&base);
        let t = tensor_over_base(&r, &r).unwrap();
        assert_eq!(t.comp(0, 0), &FinModule::free(2, 1));
    }

    #[test]
    fn tensor_cyclic_over_z4() {
        // Z/2 (x)_{Z/4} Z/2 = Z/2
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), 4);
        let half = FinModule::new(4, vec![2]);
        let mut act = Tensor3::zeros(1, 1, 1, 4);
        act.set(0, 0, &[1]);
        let mut lact = BTreeMap::new();
        lact.insert((0, 0, 0), act.clone());
        let mut ract = BTreeMap::new();
        ract.insert((0, 0, 0), act);
        let k = Bimodule::new(base.clone(), base.clone(), vec![half.clone()], lact, ract);
        let t = tensor_over_base(&k, &k).unwrap();
        assert_eq!(t.comp(0, 0), &half);
    }

    #[test]
    fn tensor_disjoint_supports_vanish() {
        // two objects; N supported on (0,0), M supported on (1,1):
        // no matching middle object, so the product is zero
        let objects = ObjectSet::new(vec!["a".into(), "b".into()]);
        let base = BigRing::diagonal_zm(objects, 2);
        let mk = |s: usize, t: usize| {
            let mut comps = vec![FinModule::zero(2); 4];
            comps[s * 2 + t] = FinModule::free(2, 1);
            let mut act = Tensor3::zeros(1, 1, 1, 2);
            act.set(0, 0, &[1]);
            let mut lact = BTreeMap::new();
            lact.insert((s, s, t), act.clone());
            let mut ract = BTreeMap::new();
            ract.insert((s, t, t), act.clone());
            Bimodule::new(base.clone(), base.clone(), comps, lact, ract)
        };
        let n = mk(0, 0);
        let m = mk(1, 1);
        let t = tensor_over_base(&n, &m).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn flatness_over_z4() {
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), 4);
        let free = Bimodule::regular(&base);
        assert!(is_flat(&free, Side::Left).unwrap());
        assert!(is_flat(&free, Side::Right).unwrap());

        let half = FinModule::new(4, vec![2]);
        let mut act = Tensor3::zeros(1, 1, 1, 4);
        act.set(0, 0, &[1]);
        let mut lact = BTreeMap::new();
        lact.insert((0, 0, 0), act.clone());
        let mut ract = BTreeMap::new();
        ract.insert((0, 0, 0), act);
        let k = Bimodule::new(base.clone(), base.clone(), vec![half], lact, ract);
        assert!(!is_flat(&k, Side::Left).unwrap());
    }

    #[test]
    fn flatness_over_field() {
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), 2);
        let k = Bimodule::regular(&base);
        assert!(is_flat(&k, Side::Left).unwrap());
    }

    #[test]
    fn restrict_base_identity_is_noop() {
        let a = exterior_one_gen(2);
        let phi = BigRingMorphism::identity(&a.base);
        let b = restrict_base(&a, &phi).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn restrict_base_of_concentrated_ring_is_new_base() {
        let objects = ObjectSet::new(vec!["a".into(), "b".into()]);
        let base = BigRing::diagonal_zm(objects.clone(), 2);
        let a = BigGradedRing::concentrated(base.clone(), 3);
        let phi = BigRingMorphism::from_diagonal(&a.base);
        let b = restrict_base(&a, &phi).unwrap();
        assert_eq!(b.base, phi.source);
        for n in 1..=3 {
            assert!(b.degree_is_zero(n));
        }
    }
}
