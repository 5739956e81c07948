//! Quadraticity: relation extraction, quadratic closure, quadraticity
//! testing, quadratic part, and the quadratic-dual coring.

use crate::bigring::{
    enumerate_chains, tensor_chain, BigGradedRing, BigRing, Bimodule, ChainBasisElem,
    ChainTensor, Tensor3,
};
use crate::exactla::{diag_rels, FinModule, MatZm, ModuleMap, Subquotient};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// A quadratic presentation: base, degree-one bimodule, and the relation
/// sub-bimodule I of A1 (x)_R A1 given by generator columns in the
/// canonical coordinates of the tensor square.
#[derive(Clone, Debug)]
pub struct QuadraticPresentation {
    pub base: BigRing,
    pub a1: Bimodule,
    /// the tensor square A1 (x)_R A1 with its chain presentation
    pub t2: ChainTensor,
    /// per component (s, t): generator columns of I in t2 canonical coords
    pub rel_gens: Vec<MatZm>,
}

impl QuadraticPresentation {
    pub fn new(base: BigRing, a1: Bimodule, rel_gens: Vec<MatZm>) -> Result<Self> {
        let t2 = tensor_chain(&[&a1, &a1])?;
        let n = base.objects.len();
        assert_eq!(rel_gens.len(), n * n);
        for s in 0..n {
            for t in 0..n {
                assert_eq!(rel_gens[s * n + t].rows, t2.module(s, t).rank());
            }
        }
        Ok(Self {
            base,
            a1,
            t2,
            rel_gens,
        })
    }

    pub fn rel_gens_at(&self, s: usize, t: usize) -> &MatZm {
        &self.rel_gens[s * self.base.objects.len() + t]
    }

    pub fn relation_count(&self) -> usize {
        self.rel_gens.iter().map(|g| g.cols).sum()
    }
}

/// The multiplication maps A1 (x) A1 -> A2 on canonical generators of the
/// tensor square, one per component (s, t).
fn mult_maps_to_a2(a: &BigGradedRing, t2: &ChainTensor) -> Vec<ModuleMap> {
    let n = a.objects().len();
    let m = a.modulus();
    let mut out = Vec::with_capacity(n * n);
    for s in 0..n {
        for t in 0..n {
            let src = t2.module(s, t).clone();
            let tgt = a.component(2, s, t);
            let mut mat = MatZm::zeros(tgt.rank(), src.rank(), m);
            for g in 0..src.rank() {
                let mut e = src.zero_element();
                e[g] = 1;
                let pure = t2.comp(s, t).lift(&e);
                let mut acc = tgt.zero_element();
                for (bi, b) in t2.comp(s, t).basis.iter().enumerate() {
                    if pure[bi] == 0 {
                        continue;
                    }
                    let mid = b.path[1];
                    let ca = a.component(1, s, mid);
                    let cb = a.component(1, mid, t);
                    let mut x = ca.zero_element();
                    x[b.gens[0]] = 1;
                    let mut y = cb.zero_element();
                    y[b.gens[1]] = 1;
                    let prod = a.multiply(1, s, mid, &x, 1, t, &y);
                    for (k, &c) in prod.iter().enumerate() {
                        acc[k] =
                            ((acc[k] as u128 + c as u128 * pure[bi] as u128) % m as u128) as u64;
                    }
                }
                for (i, &c) in tgt.reduce(&acc).iter().enumerate() {
                    mat[(i, g)] = c;
                }
            }
            out.push(ModuleMap::new(src, tgt, mat));
        }
    }
    out
}

/// Extract the quadratic presentation: I = ker(A1 (x)_R A1 -> A2).
pub fn relations_of(a: &BigGradedRing) -> Result<QuadraticPresentation> {
    assert!(a.d_max >= 2, "ring must be truncated to degree >= 2");
    let a1 = a.degree_bimodule(1);
    let t2 = tensor_chain(&[&a1, &a1])?;
    let maps = mult_maps_to_a2(a, &t2);
    let rel_gens = maps.iter().map(|map| map.kernel().1.mat.clone()).collect();
    let mut p = QuadraticPresentation::new(a.base.clone(), a1, rel_gens)?;
    p.t2 = t2;
    Ok(p)
}

/// Public alias used by the lattice criterion.
pub fn translated_relation_cols_pub(
    p: &QuadraticPresentation,
    tn: &ChainTensor,
    n: usize,
    pos: usize,
) -> Vec<Vec<Vec<u64>>> {
    translated_relation_cols(p, tn, n, pos)
}

/// Relation translates A1^(x)pos (x) I (x) A1^(x)(n-pos-2) expanded into
/// pure-chain coordinates of the n-fold tensor power, per component.
fn translated_relation_cols(
    p: &QuadraticPresentation,
    tn: &ChainTensor,
    n: usize,
    pos: usize,
) -> Vec<Vec<Vec<u64>>> {
    let no = p.base.objects.len();
    let a1 = &p.a1;
    let factors_pre: Vec<&Bimodule> = (0..pos).map(|_| a1).collect();
    let factors_suf: Vec<&Bimodule> = (0..n - pos - 2).map(|_| a1).collect();
    let mut out = vec![Vec::new(); no * no];
    for s in 0..no {
        for t in 0..no {
            let comp = tn.comp(s, t);
            let dim = comp.basis.len();
            let mut cols: Vec<Vec<u64>> = Vec::new();
            let prefixes: Vec<ChainBasisElem> = if pos == 0 {
                vec![ChainBasisElem {
                    path: vec![s],
                    gens: vec![],
                }]
            } else {
                let mut v = Vec::new();
                for alpha in 0..no {
                    v.extend(enumerate_chains(&factors_pre, s, alpha));
                }
                v
            };
            let suffixes: Vec<ChainBasisElem> = if n - pos - 2 == 0 {
                vec![ChainBasisElem {
                    path: vec![t],
                    gens: vec![],
                }]
            } else {
                let mut v = Vec::new();
                for beta in 0..no {
                    v.extend(enumerate_chains(&factors_suf, beta, t));
                }
                v
            };
            for pre in &prefixes {
                let alpha = *pre.path.last().unwrap();
                for suf in &suffixes {
                    let beta = suf.path[0];
                    let rel = p.rel_gens_at(alpha, beta);
                    let pair = p.t2.comp(alpha, beta);
                    for rg in 0..rel.cols {
                        let pure_pair = pair.lift(&rel.col(rg));
                        let mut col = vec![0u64; dim];
                        let mut nonzero = false;
                        for (bi, b) in pair.basis.iter().enumerate() {
                            if pure_pair[bi] == 0 {
                                continue;
                            }
                            // pair path is [alpha, mid, beta]
                            let mut full_path = pre.path.clone();
                            full_path.push(b.path[1]);
                            full_path.push(b.path[2]);
                            full_path.extend_from_slice(&suf.path[1..]);
                            let mut gens = pre.gens.clone();
                            gens.push(b.gens[0]);
                            gens.push(b.gens[1]);
                            gens.extend_from_slice(&suf.gens);
                            if let Some(ix) = comp.basis_index(&full_path, &gens) {
                                col[ix] = (col[ix] + pure_pair[bi]) % p.base.modulus;
                                nonzero = true;
                            }
                        }
                        if nonzero {
                            cols.push(col);
                        }
                    }
                }
            }
            out[s * no + t] = cols;
        }
    }
    out
}

/// Quadratic closure truncated at degree d, keeping the chain
/// presentations of every degree for downstream maps.
#[derive(Clone, Debug)]
pub struct QuadraticClosure {
    pub ring: BigGradedRing,
    /// chain[n-1]: the degree-n component as a quotient of A1-chains
    pub chain: Vec<ChainTensor>,
}

pub fn quadratic_closure(p: &QuadraticPresentation, d: usize) -> Result<QuadraticClosure> {
    assert!(d >= 2);
    let no = p.base.objects.len();
    let m = p.base.modulus;
    let mut chain: Vec<ChainTensor> = Vec::with_capacity(d);
    for n in 1..=d {
        let factors: Vec<&Bimodule> = (0..n).map(|_| &p.a1).collect();
        let tn = tensor_chain(&factors)?;
        if n == 1 {
            chain.push(tn);
            continue;
        }
        let mut extra = vec![Vec::new(); no * no];
        for pos in 0..=n - 2 {
            let cols = translated_relation_cols(p, &tn, n, pos);
            for (i, c) in cols.into_iter().enumerate() {
                extra[i].extend(c);
            }
        }
        chain.push(tn.with_extra_relations(&extra));
    }
    let mut comps = BTreeMap::new();
    for (n, tn) in chain.iter().enumerate() {
        for s in 0..no {
            for t in 0..no {
                let module = tn.module(s, t).clone();
                if !module.is_zero() {
                    comps.insert((n + 1, s, t), module);
                }
            }
        }
    }
    let mut mult = BTreeMap::new();
    for (n, tn) in chain.iter().enumerate() {
        let bim = tn.to_bimodule();
        for s in 0..no {
            for t in 0..no {
                for r in 0..no {
                    if let Some(t3) = bim.left_action_tensor(s, t, r) {
                        mult.insert((0, n + 1, s, t, r), t3.clone());
                    }
                    if let Some(t3) = bim.right_action_tensor(s, t, r) {
                        mult.insert((n + 1, 0, s, t, r), t3.clone());
                    }
                }
            }
        }
    }
    for na in 1..d {
        for nb in 1..=d - na {
            let (ta, tb, tout) = (&chain[na - 1], &chain[nb - 1], &chain[na + nb - 1]);
            for s in 0..no {
                for u in 0..no {
                    for t in 0..no {
                        let ca = ta.module(s, u);
                        let cb = tb.module(u, t);
                        let co = tout.module(s, t);
                        if ca.is_zero() || cb.is_zero() || co.is_zero() {
                            continue;
                        }
                        let mut t3 = Tensor3::zeros(ca.rank(), cb.rank(), co.rank(), m);
                        let mut nonzero = false;
                        for i in 0..ca.rank() {
                            let mut ea = ca.zero_element();
                            ea[i] = 1;
                            let pa = ta.comp(s, u).lift(&ea);
                            for j in 0..cb.rank() {
                                let mut eb = cb.zero_element();
                                eb[j] = 1;
                                let pb = tb.comp(u, t).lift(&eb);
                                let mut acc = vec![0u64; tout.comp(s, t).basis.len()];
                                for (ai, a_elem) in ta.comp(s, u).basis.iter().enumerate() {
                                    if pa[ai] == 0 {
                                        continue;
                                    }
                                    for (bi, b_elem) in tb.comp(u, t).basis.iter().enumerate() {
                                        if pb[bi] == 0 {
                                            continue;
                                        }
                                        let mut path = a_elem.path.clone();
                                        path.extend_from_slice(&b_elem.path[1..]);
                                        let mut gens = a_elem.gens.clone();
                                        gens.extend_from_slice(&b_elem.gens);
                                        if let Some(ix) = tout.comp(s, t).basis_index(&path, &gens)
                                        {
                                            acc[ix] = ((acc[ix] as u128
                                                + pa[ai] as u128 * pb[bi] as u128)
                                                % m as u128)
                                                as u64;
                                        }
                                    }
                                }
                                let coords = tout.comp(s, t).canonicalize(&acc);
                                if !co.is_zero_element(&coords) {
                                    nonzero = true;
                                }
                                t3.set(i, j, &coords);
                            }
                        }
                        if nonzero {
                            mult.insert((na, nb, s, u, t), t3);
                        }
                    }
                }
            }
        }
    }
    let ring = BigGradedRing::new(p.base.clone(), d, comps, mult);
    Ok(QuadraticClosure { ring, chain })
}

/// Evaluate a pure chain of degree-one generators by iterated
/// multiplication in the ring; result lives in A_n[path0, path_last].
fn fold_chain(a: &BigGradedRing, path: &[usize], gens: &[usize]) -> Vec<u64> {
    let n = gens.len();
    let s = path[0];
    let mut deg = 1usize;
    let mut end = path[1];
    let c1 = a.component(1, s, end);
    let mut cur = c1.zero_element();
    cur[gens[0]] = 1;
    for k in 1..n {
        let nxt = path[k + 1];
        let cb = a.component(1, path[k], nxt);
        let mut y = cb.zero_element();
        y[gens[k]] = 1;
        cur = a.multiply(deg, s, end, &cur, 1, nxt, &y);
        deg += 1;
        end = nxt;
    }
    cur
}

/// Comparison maps closure_n -> A_n on canonical generators.
pub fn comparison_maps(
    a: &BigGradedRing,
    closure: &QuadraticClosure,
) -> BTreeMap<(usize, usize, usize), ModuleMap> {
    let no = a.objects().len();
    let m = a.modulus();
    let mut out = BTreeMap::new();
    for (n, tn) in closure.chain.iter().enumerate() {
        let deg = n + 1;
        for s in 0..no {
            for t in 0..no {
                let src = tn.module(s, t).clone();
                let tgt = a.component(deg, s, t);
                let mut mat = MatZm::zeros(tgt.rank(), src.rank(), m);
                for g in 0..src.rank() {
                    let mut e = src.zero_element();
                    e[g] = 1;
                    let pure = tn.comp(s, t).lift(&e);
                    let mut acc = tgt.zero_element();
                    for (bi, b) in tn.comp(s, t).basis.iter().enumerate() {
                        if pure[bi] == 0 {
                            continue;
                        }
                        let v = fold_chain(a, &b.path, &b.gens);
                        for (k, &c) in v.iter().enumerate() {
                            acc[k] = ((acc[k] as u128 + c as u128 * pure[bi] as u128) % m as u128)
                                as u64;
                        }
                    }
                    for (i, &c) in tgt.reduce(&acc).iter().enumerate() {
                        mat[(i, g)] = c;
                    }
                }
                out.insert((deg, s, t), ModuleMap::new(src, tgt, mat));
            }
        }
    }
    out
}

/// Quadraticity verdict with the first failing degree when not quadratic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticityVerdict {
    pub quadratic: bool,
    pub checked_up_to: usize,
    pub first_failure: Option<usize>,
}

/// True iff the natural map from the quadratic closure of relations_of(A)
/// is an isomorphism in every degree <= d.
pub fn is_quadratic_up_to(a: &BigGradedRing, d: usize) -> Result<QuadraticityVerdict> {
    assert!(d <= a.d_max, "d must not exceed the truncation degree");
    let p = relations_of(a)?;
    let closure = quadratic_closure(&p, d.max(2))?;
    let maps = comparison_maps(a, &closure);
    let no = a.objects().len();
    for n in 1..=d {
        for s in 0..no {
            for t in 0..no {
                let map = &maps[&(n, s, t)];
                if !map.kernel().0.is_zero() || !map.cokernel().0.is_zero() {
                    return Ok(QuadraticityVerdict {
                        quadratic: false,
                        checked_up_to: d,
                        first_failure: Some(n),
                    });
                }
            }
        }
    }
    Ok(QuadraticityVerdict {
        quadratic: true,
        checked_up_to: d,
        first_failure: None,
    })
}

/// The quadratic part qu A with its comparison morphism to A.
#[derive(Clone, Debug)]
pub struct QuadraticPart {
    pub closure: QuadraticClosure,
    pub comparison: BTreeMap<(usize, usize, usize), ModuleMap>,
}

pub fn quadratic_part(a: &BigGradedRing, d: usize) -> Result<QuadraticPart> {
    assert!(d >= 2);
    let p = relations_of(a)?;
    let closure = quadratic_closure(&p, d)?;
    let comparison = comparison_maps(a, &closure);
    Ok(QuadraticPart {
        closure,
        comparison,
    })
}

/// Nonpositively graded coring over the base: C_0 = R implicitly,
/// components C_{-n} for 1 <= n <= d_max, and split comultiplications
/// C_{-(i+j)} -> C_{-i} (x)_R C_{-j}.
#[derive(Clone, Debug)]
pub struct GradedCoring {
    pub base: BigRing,
    pub d_max: usize,
    comps: Vec<Bimodule>,
    splits: BTreeMap<(usize, usize), CoringSplit>,
}

#[derive(Clone, Debug)]
pub struct CoringSplit {
    pub pair: ChainTensor,
    /// per (s, t): C_{-(i+j)}[s,t] -> pair.module(s,t)
    pub maps: Vec<ModuleMap>,
}

impl GradedCoring {
    pub fn trivial(base: BigRing, d_max: usize) -> Self {
        let comps = (0..d_max)
            .map(|_| Bimodule::zero(base.clone(), base.clone()))
            .collect();
        Self {
            base,
            d_max,
            comps,
            splits: BTreeMap::new(),
        }
    }

    pub fn new(
        base: BigRing,
        d_max: usize,
        comps: Vec<Bimodule>,
        splits: BTreeMap<(usize, usize), CoringSplit>,
    ) -> Self {
        assert_eq!(comps.len(), d_max);
        Self {
            base,
            d_max,
            comps,
            splits,
        }
    }

    /// C_{-n} as a bimodule; n >= 1.
    pub fn component(&self, n: usize) -> &Bimodule {
        &self.comps[n - 1]
    }

    pub fn split(&self, i: usize, j: usize) -> Option<&CoringSplit> {
        self.splits.get(&(i, j))
    }

    pub fn component_rank(&self, n: usize, s: usize, t: usize) -> usize {
        self.component(n).comp(s, t).rank()
    }

    /// Coassociativity on generators within truncation.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let no = self.base.objects.len();
        for i in 1..=self.d_max {
            for j in 1..=self.d_max {
                for k in 1..=self.d_max {
                    let n = i + j + k;
                    if n > self.d_max {
                        continue;
                    }
                    let (Some(s_i_jk), Some(s_jk)) = (self.split(i, j + k), self.split(j, k))
                    else {
                        continue;
                    };
                    let (Some(s_ij_k), Some(s_ij)) = (self.split(i + j, k), self.split(i, j))
                    else {
                        continue;
                    };
                    let triple = match tensor_chain(&[
                        self.component(i),
                        self.component(j),
                        self.component(k),
                    ]) {
                        Ok(t) => t,
                        Err(e) => {
                            report.push(format!("triple tensor failed at ({i},{j},{k}): {e}"));
                            continue;
                        }
                    };
                    for s in 0..no {
                        for t in 0..no {
                            let cn = self.component(n).comp(s, t);
                            for g in 0..cn.rank() {
                                let mut e = cn.zero_element();
                                e[g] = 1;
                                let left = self.assoc_left(s_ij_k, s_ij, i + j, s, t, &e, &triple);
                                let right = self.assoc_right(s_i_jk, s_jk, j + k, s, t, &e, &triple);
                                if left != right {
                                    report.push(format!(
                                        "coassociativity fails at split ({i},{j},{k}) component ({s},{t}) gen {g}"
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        report
    }

    /// (Delta (x) 1) after Delta_{i+j,k}, in canonical triple coords.
    fn assoc_left(
        &self,
        s_ij_k: &CoringSplit,
        s_ij: &CoringSplit,
        ij: usize,
        s: usize,
        t: usize,
        e: &[u64],
        triple: &ChainTensor,
    ) -> Vec<u64> {
        let no = self.base.objects.len();
        let m = self.base.modulus;
        let pair_out = s_ij_k.maps[s * no + t].apply(e);
        let pair = &s_ij_k.pair;
        let mut acc = vec![0u64; triple.comp(s, t).basis.len()];
        let pure = pair.comp(s, t).lift(&pair_out);
        for (bi, b) in pair.comp(s, t).basis.iter().enumerate() {
            if pure[bi] == 0 {
                continue;
            }
            let mid = b.path[1];
            let cij = self.component(ij).comp(s, mid);
            let mut x = cij.zero_element();
            x[b.gens[0]] = 1;
            let inner = s_ij.maps[s * no + mid].apply(&x);
            let inner_pure = s_ij.pair.comp(s, mid).lift(&inner);
            for (ci, c) in s_ij.pair.comp(s, mid).basis.iter().enumerate() {
                if inner_pure[ci] == 0 {
                    continue;
                }
                let path = vec![s, c.path[1], mid, t];
                let gens = vec![c.gens[0], c.gens[1], b.gens[1]];
                if let Some(ix) = triple.comp(s, t).basis_index(&path, &gens) {
                    acc[ix] = ((acc[ix] as u128 + pure[bi] as u128 * inner_pure[ci] as u128)
                        % m as u128) as u64;
                }
            }
        }
        triple.comp(s, t).canonicalize(&acc)
    }

    /// (1 (x) Delta) after Delta_{i,j+k}, in canonical triple coords.
    fn assoc_right(
        &self,
        s_i_jk: &CoringSplit,
        s_jk: &CoringSplit,
        jk: usize,
        s: usize,
        t: usize,
        e: &[u64],
        triple: &ChainTensor,
    ) -> Vec<u64> {
        let no = self.base.objects.len();
        let m = self.base.modulus;
        let pair_out = s_i_jk.maps[s * no + t].apply(e);
        let pair = &s_i_jk.pair;
        let mut acc = vec![0u64; triple.comp(s, t).basis.len()];
        let pure = pair.comp(s, t).lift(&pair_out);
        for (bi, b) in pair.comp(s, t).basis.iter().enumerate() {
            if pure[bi] == 0 {
                continue;
            }
            let mid = b.path[1];
            let cjk = self.component(jk).comp(mid, t);
            let mut x = cjk.zero_element();
            x[b.gens[1]] = 1;
            let inner = s_jk.maps[mid * no + t].apply(&x);
            let inner_pure = s_jk.pair.comp(mid, t).lift(&inner);
            for (ci, c) in s_jk.pair.comp(mid, t).basis.iter().enumerate() {
                if inner_pure[ci] == 0 {
                    continue;
                }
                let path = vec![s, mid, c.path[1], t];
                let gens = vec![b.gens[0], c.gens[0], c.gens[1]];
                if let Some(ix) = triple.comp(s, t).basis_index(&path, &gens) {
                    acc[ix] = ((acc[ix] as u128 + pure[bi] as u128 * inner_pure[ci] as u128)
                        % m as u128) as u64;
                }
            }
        }
        triple.comp(s, t).canonicalize(&acc)
    }
}

/// Intersection of submodules given by generator columns, as generator
/// columns. An empty list yields the whole module.
fn intersect_submodules(module: &FinModule, subs: &[MatZm]) -> MatZm {
    let m = module.modulus();
    if subs.is_empty() {
        return MatZm::identity(module.rank(), m);
    }
    let mut current = subs[0].clone();
    for sub in &subs[1..] {
        let fx = ModuleMap::new(
            FinModule::free(m, current.cols),
            module.clone(),
            current.clone(),
        );
        let fy = ModuleMap::new(FinModule::free(m, sub.cols), module.clone(), sub.clone());
        let (_, px) = fx.cokernel();
        let (_, py) = fy.cokernel();
        let (_, e1, e2) = px.target.direct_sum(&py.target);
        let combined = e1.compose(&px).add(&e2.compose(&py));
        let (_, inc) = combined.kernel();
        current = inc.mat.clone();
    }
    current
}

/// A sub-bimodule from generator columns per component: the abstract
/// bimodule plus inclusion maps into the ambient components.
fn sub_bimodule(ambient: &Bimodule, gens: &[MatZm]) -> Result<(Bimodule, Vec<ModuleMap>)> {
    let nl = ambient.left.objects.len();
    let nr = ambient.right.objects.len();
    let m = ambient.left.modulus;
    let mut comps = Vec::with_capacity(nl * nr);
    let mut incs: Vec<ModuleMap> = Vec::with_capacity(nl * nr);
    for t in 0..nl {
        for r in 0..nr {
            let amb = ambient.comp(t, r);
            let g = &gens[t * nr + r];
            let sq = Subquotient::new(
                amb.rank(),
                m,
                g,
                &MatZm::zeros(amb.rank(), 0, m),
                &diag_rels(amb),
            );
            incs.push(ModuleMap::new(sq.module.clone(), amb.clone(), sq.reps.clone()));
            comps.push(sq.module);
        }
    }
    let mut lact = BTreeMap::new();
    let mut ract = BTreeMap::new();
    for s in 0..nl {
        for t in 0..nl {
            for r in 0..nr {
                let ra = ambient.left.comp(s, t);
                let src = comps[t * nr + r].clone();
                let out = comps[s * nr + r].clone();
                if ra.is_zero() || src.is_zero() || out.is_zero() {
                    continue;
                }
                let mut t3 = Tensor3::zeros(ra.rank(), src.rank(), out.rank(), m);
                let mut nonzero = false;
                for i in 0..ra.rank() {
                    let mut a = ra.zero_element();
                    a[i] = 1;
                    for j in 0..src.rank() {
                        let mut x = src.zero_element();
                        x[j] = 1;
                        let ax = ambient.act_left(s, t, r, &a, &incs[t * nr + r].apply(&x));
                        let y = incs[s * nr + r].solve(&ax).ok_or_else(|| {
                            Error::NonfreeComponents(
                                "submodule is not closed under the left action".into(),
                            )
                        })?;
                        if !out.is_zero_element(&y) {
                            nonzero = true;
                        }
                        t3.set(i, j, &y);
                    }
                }
                if nonzero {
                    lact.insert((s, t, r), t3);
                }
            }
        }
    }
    for t in 0..nl {
        for r in 0..nr {
            for q in 0..nr {
                let rb = ambient.right.comp(r, q);
                let src = comps[t * nr + r].clone();
                let out = comps[t * nr + q].clone();
                if rb.is_zero() || src.is_zero() || out.is_zero() {
                    continue;
                }
                let mut t3 = Tensor3::zeros(src.rank(), rb.rank(), out.rank(), m);
                let mut nonzero = false;
                for j in 0..src.rank() {
                    let mut x = src.zero_element();
                    x[j] = 1;
                    for i in 0..rb.rank() {
                        let mut b = rb.zero_element();
                        b[i] = 1;
                        let xb = ambient.act_right(t, r, q, &incs[t * nr + r].apply(&x), &b);
                        let y = incs[t * nr + q].solve(&xb).ok_or_else(|| {
                            Error::NonfreeComponents(
                                "submodule is not closed under the right action".into(),
                            )
                        })?;
                        if !out.is_zero_element(&y) {
                            nonzero = true;
                        }
                        t3.set(j, i, &y);
                    }
                }
                if nonzero {
                    ract.insert((t, r, q), t3);
                }
            }
        }
    }
    Ok((
        Bimodule::new(
            ambient.left.clone(),
            ambient.right.clone(),
            comps,
            lact,
            ract,
        ),
        incs,
    ))
}

/// Result of the dual-coring construction: the coring plus the inclusion
/// of each C_{-n} into the n-th tensor power of A1.
#[derive(Clone, Debug)]
pub struct DualCoring {
    pub coring: GradedCoring,
    /// tensor powers of A1, index n-1
    pub powers: Vec<ChainTensor>,
    /// per degree n (index n-1), per (s,t): inclusion C_{-n} -> powers[n-1]
    pub inclusions: Vec<Vec<ModuleMap>>,
}

/// Build the quadratic-dual coring: C_{-1} = A1, C_{-2} = I, and for
/// n >= 3, C_{-n} = the intersection of all relation translates inside
/// the n-th tensor power of A1; comultiplication by inclusion-induced
/// splitting. Refuses when a component fails to embed canonically.
pub fn quadratic_dual_coring(p: &QuadraticPresentation, d: usize) -> Result<DualCoring> {
    assert!(d >= 2);
    let no = p.base.objects.len();
    let m = p.base.modulus;

    let mut tns: Vec<ChainTensor> = Vec::with_capacity(d);
    for n in 1..=d {
        let factors: Vec<&Bimodule> = (0..n).map(|_| &p.a1).collect();
        tns.push(tensor_chain(&factors)?);
    }

    let mut sub_gens: Vec<Vec<MatZm>> = Vec::with_capacity(d);
    sub_gens.push(
        (0..no * no)
            .map(|i| MatZm::identity(tns[0].module(i / no, i % no).rank(), m))
            .collect(),
    );
    if d >= 2 {
        sub_gens.push(p.rel_gens.clone());
    }
    for n in 3..=d {
        let tn = &tns[n - 1];
        let mut gens_n: Vec<MatZm> = Vec::with_capacity(no * no);
        for s in 0..no {
            for t in 0..no {
                let module = tn.module(s, t).clone();
                let mut translates: Vec<MatZm> = Vec::new();
                for pos in 0..=n - 2 {
                    let cols = translated_relation_cols(p, tn, n, pos);
                    let canon_cols: Vec<Vec<u64>> = cols[s * no + t]
                        .iter()
                        .map(|c| tn.comp(s, t).canonicalize(c))
                        .collect();
                    translates.push(MatZm::from_cols(module.rank(), m, &canon_cols));
                }
                gens_n.push(intersect_submodules(&module, &translates));
            }
        }
        sub_gens.push(gens_n);
    }

    let mut comps: Vec<Bimodule> = Vec::with_capacity(d);
    let mut inclusions: Vec<Vec<ModuleMap>> = Vec::with_capacity(d);
    for n in 1..=d {
        let tn_bim = tns[n - 1].to_bimodule();
        let (bim, incs) = sub_bimodule(&tn_bim, &sub_gens[n - 1])?;
        comps.push(bim);
        inclusions.push(incs);
    }

    let mut splits = BTreeMap::new();
    for i in 1..=d {
        for j in 1..=d {
            let n = i + j;
            if n > d {
                continue;
            }
            let pair = tensor_chain(&[&comps[i - 1], &comps[j - 1]])?;
            let mut maps = Vec::with_capacity(no * no);
            for s in 0..no {
                for t in 0..no {
                    let tn = &tns[n - 1];
                    let src = pair.module(s, t).clone();
                    let tgt = tn.module(s, t).clone();
                    let mut mat = MatZm::zeros(tgt.rank(), src.rank(), m);
                    for g in 0..src.rank() {
                        let mut e = src.zero_element();
                        e[g] = 1;
                        let pure = pair.comp(s, t).lift(&e);
                        let mut acc = vec![0u64; tn.comp(s, t).basis.len()];
                        for (bi, b) in pair.comp(s, t).basis.iter().enumerate() {
                            if pure[bi] == 0 {
                                continue;
                            }
                            let mid = b.path[1];
                            let ci = comps[i - 1].comp(s, mid);
                            let mut x = ci.zero_element();
                            x[b.gens[0]] = 1;
                            let xi = inclusions[i - 1][s * no + mid].apply(&x);
                            let xi_pure = tns[i - 1].comp(s, mid).lift(&xi);
                            let cj = comps[j - 1].comp(mid, t);
                            let mut y = cj.zero_element();
                            y[b.gens[1]] = 1;
                            let yj = inclusions[j - 1][mid * no + t].apply(&y);
                            let yj_pure = tns[j - 1].comp(mid, t).lift(&yj);
                            for (ai, a_elem) in tns[i - 1].comp(s, mid).basis.iter().enumerate() {
                                if xi_pure[ai] == 0 {
                                    continue;
                                }
                                for (bj, b_elem) in
                                    tns[j - 1].comp(mid, t).basis.iter().enumerate()
                                {
                                    if yj_pure[bj] == 0 {
                                        continue;
                                    }
                                    let mut path = a_elem.path.clone();
                                    path.extend_from_slice(&b_elem.path[1..]);
                                    let mut gens = a_elem.gens.clone();
                                    gens.extend_from_slice(&b_elem.gens);
                                    if let Some(ix) = tn.comp(s, t).basis_index(&path, &gens) {
                                        let c = (xi_pure[ai] as u128 * yj_pure[bj] as u128
                                            % m as u128)
                                            * pure[bi] as u128
                                            % m as u128;
                                        acc[ix] = ((acc[ix] as u128 + c) % m as u128) as u64;
                                    }
                                }
                            }
                        }
                        let coords = tn.comp(s, t).canonicalize(&acc);
                        for (r, &c) in coords.iter().enumerate() {
                            mat[(r, g)] = c;
                        }
                    }
                    let emb = ModuleMap::new(src.clone(), tgt, mat);
                    if !emb.kernel().0.is_zero() {
                        return Err(Error::NonfreeComponents(format!(
                            "C_-{i} (x) C_-{j} does not embed into the tensor power at ({s},{t})"
                        )));
                    }
                    let cn = comps[n - 1].comp(s, t);
                    let mut split_mat = MatZm::zeros(src.rank(), cn.rank(), m);
                    for g in 0..cn.rank() {
                        let mut e = cn.zero_element();
                        e[g] = 1;
                        let in_tn = inclusions[n - 1][s * no + t].apply(&e);
                        match emb.solve(&in_tn) {
                            Some(y) => {
                                for (r, &c) in y.iter().enumerate() {
                                    split_mat[(r, g)] = c;
                                }
                            }
                            None => {
                                return Err(Error::NonfreeComponents(format!(
                                    "C_-{n} is not contained in C_-{i} (x) C_-{j} at ({s},{t})"
                                )))
                            }
                        }
                    }
                    maps.push(ModuleMap::new(cn.clone(), src, split_mat));
                }
            }
            splits.insert((i, j), CoringSplit { pair, maps });
        }
    }
    let coring = GradedCoring::new(p.base.clone(), d, comps, splits);
    Ok(DualCoring {
        coring,
        powers: tns,
        inclusions,
    })
}

/// Small presentation builders shared by tests across modules.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::bigring::ObjectSet;

    /// One-object presentation over Z/m with a free A1 of the given rank
    /// and relation vectors in pure pair coordinates.
    pub(crate) fn one_object(m: u64, rank: usize, rels: &[Vec<u64>]) -> QuadraticPresentation {
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), m);
        let a1_mod = FinModule::free(m, rank);
        let mut act = Tensor3::zeros(1, rank, rank, m);
        for i in 0..rank {
            let mut e = vec![0u64; rank];
            e[i] = 1;
            act.set(0, i, &e);
        }
        let mut ract = Tensor3::zeros(rank, 1, rank, m);
        for i in 0..rank {
            let mut e = vec![0u64; rank];
            e[i] = 1;
            ract.set(i, 0, &e);
        }
        let mut la = BTreeMap::new();
        la.insert((0, 0, 0), act);
        let mut ra = BTreeMap::new();
        ra.insert((0, 0, 0), ract);
        let a1 = Bimodule::new(base.clone(), base.clone(), vec![a1_mod], la, ra);
        let rel_mat = MatZm::from_cols(rank * rank, m, rels);
        QuadraticPresentation::new(base, a1, vec![rel_mat]).unwrap()
    }

    fn pair_ix(p: &QuadraticPresentation, i: usize, j: usize) -> usize {
        p.t2
            .comp(0, 0)
            .basis_index(&[0, 0, 0], &[i, j])
            .expect("pair basis element")
    }

    pub(crate) fn exterior(m: u64, gens: usize) -> QuadraticPresentation {
        let mut p = one_object(m, gens, &[]);
        let dim = gens * gens;
        let mut rels = Vec::new();
        for i in 0..gens {
            let mut col = vec![0u64; dim];
            col[pair_ix(&p, i, i)] = 1;
            rels.push(col);
            for j in i + 1..gens {
                let mut col = vec![0u64; dim];
                col[pair_ix(&p, i, j)] = 1;
                col[pair_ix(&p, j, i)] = 1;
                rels.push(col);
            }
        }
        p.rel_gens = vec![MatZm::from_cols(dim, m, &rels)];
        p
    }

    pub(crate) fn symmetric(m: u64, gens: usize) -> QuadraticPresentation {
        let mut p = one_object(m, gens, &[]);
        let dim = gens * gens;
        let mut rels = Vec::new();
        for i in 0..gens {
            for j in i + 1..gens {
                let mut col = vec![0u64; dim];
                col[pair_ix(&p, i, j)] = 1;
                col[pair_ix(&p, j, i)] = m - 1;
                rels.push(col);
            }
        }
        p.rel_gens = vec![MatZm::from_cols(dim, m, &rels)];
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigring::ObjectSet;

    /// One-object graded ring over Z/p from a free A1 of the given rank
    /// and relation vectors in pure pair coordinates (slot-0-fastest).
    pub(crate) fn one_object_presentation(
        m: u64,
        rank: usize,
        rels: &[Vec<u64>],
    ) -> QuadraticPresentation {
        let base = BigRing::diagonal_zm(ObjectSet::single("s"), m);
        let a1_mod = FinModule::free(m, rank);
        let mut act = Tensor3::zeros(1, rank, rank, m);
        for i in 0..rank {
            let mut e = vec![0u64; rank];
            e[i] = 1;
            act.set(0, i, &e);
        }
        let mut ract = Tensor3::zeros(rank, 1, rank, m);
        for i in 0..rank {
            let mut e = vec![0u64; rank];
            e[i] = 1;
            ract.set(i, 0, &e);
        }
        let mut la = BTreeMap::new();
        la.insert((0, 0, 0), act);
        let mut ra = BTreeMap::new();
        ra.insert((0, 0, 0), ract);
        let a1 = Bimodule::new(base.clone(), base.clone(), vec![a1_mod], la, ra);
        // pure pair coords are canonical for a free one-object A1
        let rel_mat = MatZm::from_cols(rank * rank, m, rels);
        QuadraticPresentation::new(base, a1, vec![rel_mat]).unwrap()
    }

    /// index of x_i (x) x_j in pure pair coordinates
    fn pair_ix(p: &QuadraticPresentation, i: usize, j: usize) -> usize {
        p.t2
            .comp(0, 0)
            .basis_index(&[0, 0, 0], &[i, j])
            .expect("pair basis element")
    }

    pub(crate) fn exterior_presentation(m: u64, gens: usize) -> QuadraticPresentation {
        // relations x_i (x) x_i and x_i (x) x_j + x_j (x) x_i
        let mut p = one_object_presentation(m, gens, &[]);
        let dim = gens * gens;
        let mut rels = Vec::new();
        for i in 0..gens {
            let mut col = vec![0u64; dim];
            col[pair_ix(&p, i, i)] = 1;
            rels.push(col);
            for j in i + 1..gens {
                let mut col = vec![0u64; dim];
                col[pair_ix(&p, i, j)] = 1;
                col[pair_ix(&p, j, i)] = 1;
                rels.push(col);
            }
        }
        p.rel_gens = vec![MatZm::from_cols(dim, m, &rels)];
        p
    }

    pub(crate) fn symmetric_presentation(m: u64, gens: usize) -> QuadraticPresentation {
        // relations x_i (x) x_j - x_j (x) x_i
        let mut p = one_object_presentation(m, gens, &[]);
        let dim = gens * gens;
        let mut rels = Vec::new();
        for i in 0..gens {
            for j in i + 1..gens {
                let mut col = vec![0u64; dim];
                col[pair_ix(&p, i, j)] = 1;
                col[pair_ix(&p, j, i)] = m - 1;
                rels.push(col);
            }
        }
        p.rel_gens = vec![MatZm::from_cols(dim, m, &rels)];
        p
    }

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut r = 1usize;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }

    #[test]
    fn closure_of_free_ring_is_tensor_ring() {
        let p = one_object_presentation(2, 1, &[]);
        let c = quadratic_closure(&p, 4).unwrap();
        for n in 1..=4 {
            assert_eq!(c.ring.component(n, 0, 0).rank(), 1, "degree {n}");
        }
    }

    #[test]
    fn closure_with_full_relations_vanishes() {
        let p = one_object_presentation(2, 1, &[vec![1]]);
        let c = quadratic_closure(&p, 4).unwrap();
        assert_eq!(c.ring.component(1, 0, 0).rank(), 1);
        for n in 2..=4 {
            assert!(c.ring.component(n, 0, 0).is_zero(), "degree {n}");
        }
    }

    #[test]
    fn closure_of_exterior_two_gens() {
        let p = exterior_presentation(2, 2);
        let c = quadratic_closure(&p, 3).unwrap();
        let ranks: Vec<usize> = (1..=3).map(|n| c.ring.component(n, 0, 0).rank()).collect();
        assert_eq!(ranks, vec![2, 1, 0]);
        assert!(c.ring.validate().is_empty());
    }

    #[test]
    fn closure_of_symmetric_matches_binomials() {
        for m in [2u64, 3] {
            let p = symmetric_presentation(m, 2);
            let c = quadratic_closure(&p, 4).unwrap();
            for n in 1..=4 {
                assert_eq!(
                    c.ring.component(n, 0, 0).rank(),
                    binomial(n + 2 - 1, n),
                    "degree {n} over Z/{m}"
                );
            }
        }
    }

    #[test]
    fn relations_recovered_from_closure() {
        // relations_of(closure) recovers the presentation's relation module
        let p = exterior_presentation(2, 2);
        let c = quadratic_closure(&p, 3).unwrap();
        let q = relations_of(&c.ring).unwrap();
        assert_eq!(q.relation_count(), 3);
        // free degree-2: tensor ring has no relations
        let free = one_object_presentation(2, 1, &[]);
        let cf = quadratic_closure(&free, 3).unwrap();
        let qf = relations_of(&cf.ring).unwrap();
        assert_eq!(qf.relation_count(), 0);
    }

    #[test]
    fn relations_of_truncated_ring_is_everything() {
        // A with A_2 = 0: I = A1 (x) A1
        let p = one_object_presentation(2, 1, &[vec![1]]);
        let c = quadratic_closure(&p, 3).unwrap();
        let q = relations_of(&c.ring).unwrap();
        assert_eq!(q.relation_count(), 1);
    }

    #[test]
    fn quadraticity_of_symmetric_algebra() {
        let p = symmetric_presentation(3, 2);
        let c = quadratic_closure(&p, 4).unwrap();
        let v = is_quadratic_up_to(&c.ring, 4).unwrap();
        assert!(v.quadratic);
    }

    #[test]
    fn extra_degree_three_generator_fails_at_three() {
        // take the exterior closure and enlarge A_3 artificially
        let p = exterior_presentation(2, 2);
        let c = quadratic_closure(&p, 3).unwrap();
        let mut comps = c.ring.components().clone();
        comps.insert((3, 0, 0), FinModule::free(2, 1));
        let tampered = BigGradedRing::new(c.ring.base.clone(), 3, comps, c.ring.mult_map().clone());
        let v = is_quadratic_up_to(&tampered, 3).unwrap();
        assert!(!v.quadratic);
        assert_eq!(v.first_failure, Some(3));
    }

    #[test]
    fn any_ring_is_quadratic_up_to_two() {
        let p = one_object_presentation(2, 1, &[vec![1]]);
        let c = quadratic_closure(&p, 2).unwrap();
        let v = is_quadratic_up_to(&c.ring, 2).unwrap();
        assert!(v.quadratic);
    }

    #[test]
    fn quadratic_part_of_quadratic_ring_is_identity() {
        let p = exterior_presentation(2, 2);
        let c = quadratic_closure(&p, 3).unwrap();
        let qp = quadratic_part(&c.ring, 3).unwrap();
        for n in 1..=3 {
            let map = &qp.comparison[&(n, 0, 0)];
            assert!(map.kernel().0.is_zero());
            assert!(map.cokernel().0.is_zero());
        }
    }

    #[test]
    fn quadratic_part_of_truncation_vanishes_upstairs() {
        // A_2 = 0, A_1 != 0, A_3 != 0 artificially: qu A zero in degrees >= 2
        let p = one_object_presentation(2, 1, &[vec![1]]);
        let c = quadratic_closure(&p, 3).unwrap();
        let mut comps = c.ring.components().clone();
        comps.insert((3, 0, 0), FinModule::free(2, 1));
        let tampered = BigGradedRing::new(c.ring.base.clone(), 3, comps, c.ring.mult_map().clone());
        let qp = quadratic_part(&tampered, 3).unwrap();
        assert!(qp.closure.ring.component(2, 0, 0).is_zero());
        assert!(qp.closure.ring.component(3, 0, 0).is_zero());
        // comparison injective in degree 2 (trivially, source is zero)
        let map = &qp.comparison[&(2, 0, 0)];
        assert!(map.kernel().0.is_zero());
    }

    #[test]
    fn dual_of_free_ring_vanishes() {
        let p = one_object_presentation(2, 1, &[]);
        let dc = quadratic_dual_coring(&p, 4).unwrap();
        assert_eq!(dc.coring.component_rank(1, 0, 0), 1);
        for n in 2..=4 {
            assert_eq!(dc.coring.component_rank(n, 0, 0), 0, "degree {n}");
        }
    }

    #[test]
    fn dual_of_dual_numbers_is_polynomial_coalgebra() {
        let p = one_object_presentation(2, 1, &[vec![1]]);
        let dc = quadratic_dual_coring(&p, 5).unwrap();
        for n in 1..=5 {
            assert_eq!(dc.coring.component_rank(n, 0, 0), 1, "degree {n}");
        }
        assert!(dc.coring.validate().is_empty());
    }

    #[test]
    fn dual_of_exterior_is_symmetric_coalgebra() {
        let p = exterior_presentation(2, 2);
        let dc = quadratic_dual_coring(&p, 4).unwrap();
        let ranks: Vec<usize> = (1..=4).map(|n| dc.coring.component_rank(n, 0, 0)).collect();
        assert_eq!(ranks, vec![2, 3, 4, 5]);
        assert!(dc.coring.validate().is_empty());
    }

    #[test]
    fn double_dual_recovers_presentation() {
        // dual of the exterior presentation has ranks of the symmetric
        // coalgebra; its "diagonal ring" is the symmetric algebra, whose
        // relations have the symmetric count
        let p = exterior_presentation(3, 2);
        let dc = quadratic_dual_coring(&p, 3).unwrap();
        assert_eq!(dc.coring.component_rank(2, 0, 0), 3);
        // and the dual of the symmetric presentation has exterior ranks
        let q = symmetric_presentation(3, 2);
        let dq = quadratic_dual_coring(&q, 4).unwrap();
        let ranks: Vec<usize> = (1..=4).map(|n| dq.coring.component_rank(n, 0, 0)).collect();
        assert_eq!(ranks, vec![2, 1, 0, 0]);
    }

    #[test]
    fn closure_is_idempotent() {
        let p = symmetric_presentation(2, 2);
        let c = quadratic_closure(&p, 4).unwrap();
        let q = relations_of(&c.ring).unwrap();
        let c2 = quadratic_closure(&q, 4).unwrap();
        for n in 1..=4 {
            assert_eq!(
                c.ring.component(n, 0, 0),
                c2.ring.component(n, 0, 0),
                "degree {n}"
            );
        }
    }
}
